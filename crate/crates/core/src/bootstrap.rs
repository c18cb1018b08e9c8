//! Residual bootstrap engines.
//!
//! Each engine is built once per dataset: it fits the model, extracts the
//! residual pool, and keeps whatever can be reused across refits (the
//! Nadaraya-Watson weight rows, the QR factorization of a fixed design).
//! [`NonparametricBootstrap::replicate`] and friends then fill a reusable
//! [`Replicate`] buffer with one bootstrap sample.
//!
//! Bootstrap errors are drawn through [`draw_errors`]: an atom of the
//! residual pool is chosen by inverse transform from one uniform per draw
//! (`picks` stream), optionally sign-flipped (symmetrized pool), and, for the
//! smooth bootstrap, perturbed by `s·V` with `V ~ ℓ` drawn from the separate
//! `noise` stream. Keeping picks and noise on separate streams lets the
//! smooth and non-smooth schemes share their uniforms.

use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;

use crate::empirical::{Edf, SmoothedEdf};
use crate::kernels::{IntegratedKernel, Kernel};
use crate::regression::{
    center_in_place, Dataset, FixedDesign, LeastSquares, NwSmoother, ParametricFamily, TrainingSmoother,
};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Resampling {
    /// Draw with replacement from the residual EDF.
    NonSmooth,
    /// Draw from the residual EDF convolved with `L(·/s)`.
    Smooth { bandwidth: f64, kernel: IntegratedKernel },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BootstrapScheme {
    pub resampling: Resampling,
    /// Draw from `½(F̂ + F̂₋)` instead of `F̂`.
    pub symmetrize: bool,
}

impl BootstrapScheme {
    pub fn non_smooth() -> Self {
        BootstrapScheme {
            resampling: Resampling::NonSmooth,
            symmetrize: false,
        }
    }

    pub fn smooth(bandwidth: f64, kernel: Kernel) -> Result<Self> {
        if !(bandwidth > 0.0) || !bandwidth.is_finite() {
            return Err(Error::NonPositiveBandwidth(bandwidth));
        }
        Ok(BootstrapScheme {
            resampling: Resampling::Smooth {
                bandwidth,
                kernel: IntegratedKernel::new(kernel),
            },
            symmetrize: false,
        })
    }

    pub fn symmetrized(mut self, symmetrize: bool) -> Self {
        self.symmetrize = symmetrize;
        self
    }

    pub fn is_smooth(&self) -> bool {
        matches!(self.resampling, Resampling::Smooth { .. })
    }

    pub fn name(&self) -> &'static str {
        if self.is_smooth() {
            "smooth"
        } else {
            "nonsmooth"
        }
    }

    /// The law the smooth scheme draws from, `F̂` convolved with the kernel.
    pub fn smoothed(&self, pool: &Edf) -> Result<Option<SmoothedEdf>> {
        match self.resampling {
            Resampling::NonSmooth => Ok(None),
            Resampling::Smooth { bandwidth, kernel } => {
                let base = if self.symmetrize { pool.symmetrized() } else { pool.clone() };
                SmoothedEdf::new(&base, kernel, bandwidth).map(Some)
            }
        }
    }
}

/// Fills `out` with `n` bootstrap errors drawn from `pool` under `scheme`.
pub fn draw_errors<P: Rng + ?Sized, N: Rng + ?Sized>(
    scheme: &BootstrapScheme,
    pool: &Edf,
    n: usize,
    picks: &mut P,
    noise: &mut N,
    out: &mut Vec<f64>,
) -> Result<()> {
    if pool.is_empty() {
        return Err(Error::Empty("residual pool"));
    }
    out.clear();
    let atoms = pool.points();
    for _ in 0..n {
        // 1 - U lies in (0, 1], the domain of the generalized inverse.
        let u = 1.0 - picks.random::<f64>();
        let mut e = atoms[pool.quantile_index(u)];
        if scheme.symmetrize && picks.random::<bool>() {
            e = -e;
        }
        if let Resampling::Smooth { bandwidth, kernel } = scheme.resampling {
            e += bandwidth * kernel.sample(noise);
        }
        out.push(e);
    }
    Ok(())
}

/// Smooth bootstrap errors by numerical inversion, `F̂ₛ⁻¹(U_i)`. Equal in law
/// to the atom-plus-noise draws of [`draw_errors`] and far slower; kept as an
/// independent route for checking them.
pub fn draw_by_inversion<P: Rng + ?Sized>(smoothed: &SmoothedEdf, n: usize, picks: &mut P) -> Result<Vec<f64>> {
    (0..n)
        .map(|_| {
            let mut u = picks.random::<f64>();
            while u == 0.0 {
                u = picks.random::<f64>();
            }
            smoothed.quantile(u)
        })
        .collect()
}

/// Reusable buffers for one bootstrap replicate.
#[derive(Debug, Clone, Default)]
pub struct Replicate {
    /// Bootstrap errors `ε*_i`.
    pub errors: Vec<f64>,
    /// Bootstrap responses `Y*_i`.
    pub responses: Vec<f64>,
    /// Refit at the covariates: `m̂*(X_i)` or `x_iᵀβ̂*`.
    pub fitted: Vec<f64>,
    /// Bootstrap residuals `ε̂*_i = Y*_i - fitted_i`.
    pub residuals: Vec<f64>,
    /// EDF of the bootstrap residuals.
    pub edf: Edf,
    /// Refit coefficients (`β̂*` or `θ̂*`); empty for the nonparametric model.
    pub coefficients: Vec<f64>,
    /// Goodness-of-fit only: `m̂_θ̂*(X_i)`.
    pub param_fitted: Vec<f64>,
    /// Goodness-of-fit only: `Y*_i - m̂_θ̂*(X_i)`.
    pub param_residuals: Vec<f64>,
    /// Goodness-of-fit only: EDF of `param_residuals`.
    pub param_edf: Edf,
    work: Vec<f64>,
}

impl Replicate {
    pub fn new() -> Self {
        Self::default()
    }
}

fn finish_residuals(rep: &mut Replicate, center: bool) -> Result<()> {
    rep.residuals.clear();
    rep.residuals
        .extend(rep.responses.iter().zip(&rep.fitted).map(|(y, f)| y - f));
    if center {
        center_in_place(&mut rep.residuals);
    }
    rep.edf.rebuild(&rep.residuals)
}

/// Residual bootstrap for the random-design nonparametric model
/// `Y = m(X) + ε` with a Nadaraya-Watson estimate of `m`.
#[derive(Debug, Clone)]
pub struct NonparametricBootstrap {
    smoother: TrainingSmoother,
    fitted: Vec<f64>,
    residuals: Vec<f64>,
    centered: Vec<f64>,
    pool: Edf,
    center_bootstrap: bool,
}

impl NonparametricBootstrap {
    pub fn new(data: &Dataset, kernel: Kernel, h: f64) -> Result<Self> {
        let smoother = NwSmoother::new(data.x(), kernel, h)?.training();
        let mut fitted = vec![0.0; data.len()];
        smoother.apply(data.y(), &mut fitted);
        let residuals: Vec<f64> = data.y().iter().zip(&fitted).map(|(y, f)| y - f).collect();
        let mut centered = residuals.clone();
        center_in_place(&mut centered);
        let pool = Edf::new(&centered)?;
        Ok(NonparametricBootstrap {
            smoother,
            fitted,
            residuals,
            centered,
            pool,
            center_bootstrap: false,
        })
    }

    /// Re-center bootstrap residuals before building their EDF (off by
    /// default).
    pub fn with_centered_bootstrap(mut self, center: bool) -> Self {
        self.center_bootstrap = center;
        self
    }

    pub fn centers_bootstrap(&self) -> bool {
        self.center_bootstrap
    }

    pub fn smoother(&self) -> &TrainingSmoother {
        &self.smoother
    }

    /// `m̂(X_i)`.
    pub fn fitted(&self) -> &[f64] {
        &self.fitted
    }

    /// Raw residuals `ε̂_i`.
    pub fn residuals(&self) -> &[f64] {
        &self.residuals
    }

    /// Centered residuals `ε̃_i`.
    pub fn centered_residuals(&self) -> &[f64] {
        &self.centered
    }

    /// `F̂₀,ₙ`, the EDF of the centered residuals.
    pub fn pool(&self) -> &Edf {
        &self.pool
    }

    pub fn replicate<P: Rng + ?Sized, N: Rng + ?Sized>(
        &self,
        scheme: &BootstrapScheme,
        picks: &mut P,
        noise: &mut N,
        rep: &mut Replicate,
    ) -> Result<()> {
        let n = self.fitted.len();
        draw_errors(scheme, &self.pool, n, picks, noise, &mut rep.errors)?;
        rep.responses.clear();
        rep.responses
            .extend(self.fitted.iter().zip(&rep.errors).map(|(m, e)| m + e));
        rep.fitted.resize(n, 0.0);
        self.smoother.apply(&rep.responses, &mut rep.fitted);
        rep.coefficients.clear();
        finish_residuals(rep, self.center_bootstrap)
    }
}

/// Residual bootstrap for the fixed-design linear model `Y = Xβ + ε`.
/// Residuals are used as they are; with an intercept they are centered by
/// construction.
#[derive(Debug, Clone)]
pub struct LinearBootstrap {
    solver: LeastSquares,
    coefficients: Vec<f64>,
    fitted: Vec<f64>,
    residuals: Vec<f64>,
    pool: Edf,
}

impl LinearBootstrap {
    pub fn new(design: FixedDesign, y: &[f64]) -> Result<Self> {
        let solver = LeastSquares::new(design)?;
        let coefficients = solver.solve(y)?;
        let mut fitted = vec![0.0; y.len()];
        solver.design().mul_vec(&coefficients, &mut fitted);
        let residuals: Vec<f64> = y.iter().zip(&fitted).map(|(y, f)| y - f).collect();
        let pool = Edf::new(&residuals)?;
        Ok(LinearBootstrap {
            solver,
            coefficients,
            fitted,
            residuals,
            pool,
        })
    }

    pub fn design(&self) -> &FixedDesign {
        self.solver.design()
    }

    /// `β̂ₙ`.
    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    pub fn fitted(&self) -> &[f64] {
        &self.fitted
    }

    pub fn residuals(&self) -> &[f64] {
        &self.residuals
    }

    /// `F̂₀,ₙ`, the EDF of the raw residuals.
    pub fn pool(&self) -> &Edf {
        &self.pool
    }

    pub fn replicate<P: Rng + ?Sized, N: Rng + ?Sized>(
        &self,
        scheme: &BootstrapScheme,
        picks: &mut P,
        noise: &mut N,
        rep: &mut Replicate,
    ) -> Result<()> {
        let n = self.fitted.len();
        let p = self.coefficients.len();
        draw_errors(scheme, &self.pool, n, picks, noise, &mut rep.errors)?;
        rep.responses.clear();
        rep.responses
            .extend(self.fitted.iter().zip(&rep.errors).map(|(m, e)| m + e));
        rep.work.resize(n, 0.0);
        rep.coefficients.resize(p, 0.0);
        self.solver.solve_into(&rep.responses, &mut rep.work, &mut rep.coefficients);
        rep.fitted.resize(n, 0.0);
        self.solver.design().mul_vec(&rep.coefficients, &mut rep.fitted);
        finish_residuals(rep, false)
    }
}

/// Residual bootstrap under a parametric null `m ∈ {m_θ}` for the
/// goodness-of-fit test.
///
/// Errors are drawn from the centered Nadaraya-Watson residuals; bootstrap
/// responses are built on the parametric fit, `Y*_i = m_θ̂(X_i) + ε*_i`. Each
/// replicate carries both the Nadaraya-Watson residual EDF and the EDF of
/// `Y*_i - m̂_θ̂*(X_i)`, computed from the same responses.
#[derive(Debug, Clone)]
pub struct GofBootstrap {
    family: ParametricFamily,
    smoother: TrainingSmoother,
    solver: LeastSquares,
    theta_hat: Vec<f64>,
    param_values: Vec<f64>,
    nw_residuals: Vec<f64>,
    pool: Edf,
    param_residuals: Vec<f64>,
    param_edf: Edf,
    center_bootstrap: bool,
}

impl GofBootstrap {
    pub fn new(data: &Dataset, family: ParametricFamily, kernel: Kernel, h: f64) -> Result<Self> {
        let n = data.len();
        let smoother = NwSmoother::new(data.x(), kernel, h)?.training();
        let mut nw_fitted = vec![0.0; n];
        smoother.apply(data.y(), &mut nw_fitted);
        let nw_residuals: Vec<f64> = data.y().iter().zip(&nw_fitted).map(|(y, f)| y - f).collect();
        let mut centered = nw_residuals.clone();
        center_in_place(&mut centered);
        let pool = Edf::new(&centered)?;

        let solver = LeastSquares::new(family.design(data.x())?)?;
        let theta_hat = solver.solve(data.y())?;
        let mut param_values = vec![0.0; n];
        solver.design().mul_vec(&theta_hat, &mut param_values);
        let mut smoothed = vec![0.0; n];
        smoother.apply(&param_values, &mut smoothed);
        let param_residuals: Vec<f64> = data.y().iter().zip(&smoothed).map(|(y, f)| y - f).collect();
        let param_edf = Edf::new(&param_residuals)?;
        Ok(GofBootstrap {
            family,
            smoother,
            solver,
            theta_hat,
            param_values,
            nw_residuals,
            pool,
            param_residuals,
            param_edf,
            center_bootstrap: false,
        })
    }

    pub fn with_centered_bootstrap(mut self, center: bool) -> Self {
        self.center_bootstrap = center;
        self
    }

    pub fn centers_bootstrap(&self) -> bool {
        self.center_bootstrap
    }

    pub fn family(&self) -> ParametricFamily {
        self.family
    }

    /// `θ̂`, the least-squares fit of the family.
    pub fn theta_hat(&self) -> &[f64] {
        &self.theta_hat
    }

    /// `m_θ̂(X_i)`.
    pub fn parametric_fit(&self) -> &[f64] {
        &self.param_values
    }

    pub fn nw_residuals(&self) -> &[f64] {
        &self.nw_residuals
    }

    /// `F̂₀,ₙ`: EDF of the centered Nadaraya-Watson residuals.
    pub fn pool(&self) -> &Edf {
        &self.pool
    }

    /// `Y_i - m̂_θ̂(X_i)`.
    pub fn param_residuals(&self) -> &[f64] {
        &self.param_residuals
    }

    /// `F̂_θ̂`.
    pub fn param_edf(&self) -> &Edf {
        &self.param_edf
    }

    pub fn replicate<P: Rng + ?Sized, N: Rng + ?Sized>(
        &self,
        scheme: &BootstrapScheme,
        picks: &mut P,
        noise: &mut N,
        rep: &mut Replicate,
    ) -> Result<()> {
        let n = self.param_values.len();
        let p = self.theta_hat.len();
        draw_errors(scheme, &self.pool, n, picks, noise, &mut rep.errors)?;
        rep.responses.clear();
        rep.responses
            .extend(self.param_values.iter().zip(&rep.errors).map(|(m, e)| m + e));

        rep.fitted.resize(n, 0.0);
        self.smoother.apply(&rep.responses, &mut rep.fitted);
        finish_residuals(rep, self.center_bootstrap)?;

        rep.work.resize(n, 0.0);
        rep.coefficients.resize(p, 0.0);
        self.solver.solve_into(&rep.responses, &mut rep.work, &mut rep.coefficients);
        // work <- m_θ̂*(X_i), then param_fitted <- m̂_θ̂*(X_i).
        self.solver.design().mul_vec(&rep.coefficients, &mut rep.work);
        rep.param_fitted.resize(n, 0.0);
        self.smoother.apply(&rep.work, &mut rep.param_fitted);
        rep.param_residuals.clear();
        rep.param_residuals
            .extend(rep.responses.iter().zip(&rep.param_fitted).map(|(y, f)| y - f));
        rep.param_edf.rebuild(&rep.param_residuals)
    }
}
