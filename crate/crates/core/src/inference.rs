//! Bootstrap tests and covariance formulas.
//!
//! The symmetry test compares the residual EDF of a fixed-design linear fit
//! with its reflection `y ↦ 1 - F̂(-y)`; the goodness-of-fit test compares
//! the Nadaraya-Watson residual EDF with the EDF of residuals from the
//! kernel-smoothed parametric fit. Both report `√n`-scaled KS and `n`-scaled
//! CM statistics, on the observed and on the bootstrap side alike.
//!
//! [`CovarianceOracle`] evaluates the limiting covariance functions of the
//! residual process, used to validate simulations.

use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;

use crate::bootstrap::{BootstrapScheme, GofBootstrap, LinearBootstrap, Replicate};
use crate::distributions::ErrorDistribution;
use crate::empirical::{ks_distance, DistributionFunction, Edf, StatKind};
use crate::math;
use crate::regression::{Dataset, FixedDesign, ParametricFamily};
use crate::kernels::Kernel;
use crate::{Error, Result};

/// Index (1-based) of the order statistic used as critical value,
/// `⌈(1-α)B⌉`, at least 1.
fn critical_rank(b: usize, alpha: f64) -> usize {
    // The small slack keeps e.g. (1 - 0.05)·100 from rounding up to 96.
    let k = math::ceil((1.0 - alpha) * b as f64 - 1e-9);
    (k.max(1.0) as usize).min(b)
}

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha < 1.0 {
        Ok(())
    } else {
        Err(Error::ProbabilityOutOfRange(alpha))
    }
}

/// The `⌈(1-α)B⌉`-th order statistic of the bootstrap statistics.
pub fn bootstrap_critical_value(boot_stats: &[f64], alpha: f64) -> Result<f64> {
    check_alpha(alpha)?;
    if boot_stats.is_empty() {
        return Err(Error::Empty("bootstrap statistics"));
    }
    let mut sorted = boot_stats.to_vec();
    math::sort_floats(&mut sorted);
    Ok(sorted[critical_rank(sorted.len(), alpha) - 1])
}

/// Outcome of a bootstrap test at one level.
#[derive(Debug, Clone, PartialEq)]
pub struct TestResult {
    pub kind: StatKind,
    pub observed: f64,
    /// Bootstrap statistics, sorted ascending.
    pub boot_stats: Vec<f64>,
    pub alpha: f64,
    pub critical: f64,
    /// `observed > critical`.
    pub reject: bool,
    /// `(1 + #{boot ≥ observed}) / (B + 1)`.
    pub p_value: f64,
}

impl TestResult {
    pub fn new(kind: StatKind, observed: f64, mut boot_stats: Vec<f64>, alpha: f64) -> Result<Self> {
        check_alpha(alpha)?;
        if boot_stats.is_empty() {
            return Err(Error::Empty("bootstrap statistics"));
        }
        if !observed.is_finite() || boot_stats.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("test statistic"));
        }
        math::sort_floats(&mut boot_stats);
        let critical = boot_stats[critical_rank(boot_stats.len(), alpha) - 1];
        let exceed = boot_stats.len() - boot_stats.partition_point(|&v| v < observed);
        Ok(TestResult {
            kind,
            observed,
            alpha,
            critical,
            reject: observed > critical,
            p_value: (1 + exceed) as f64 / (boot_stats.len() + 1) as f64,
            boot_stats,
        })
    }

    pub fn critical_at(&self, alpha: f64) -> Result<f64> {
        check_alpha(alpha)?;
        Ok(self.boot_stats[critical_rank(self.boot_stats.len(), alpha) - 1])
    }

    pub fn rejects_at(&self, alpha: f64) -> Result<bool> {
        Ok(self.observed > self.critical_at(alpha)?)
    }

    /// The level actually attained by the order statistic used at `alpha`,
    /// `(1 + B - k) / (B + 1)`; rejection at `alpha` is equivalent to
    /// `p_value ≤ realized_level(alpha)`.
    pub fn realized_level(&self, alpha: f64) -> Result<f64> {
        check_alpha(alpha)?;
        let b = self.boot_stats.len();
        Ok((1 + b - critical_rank(b, alpha)) as f64 / (b + 1) as f64)
    }
}

/// The KS and CM statistics computed from one pair of distribution
/// functions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KsCm {
    pub ks: f64,
    pub cm: f64,
}

impl KsCm {
    pub fn get(&self, kind: StatKind) -> Result<f64> {
        match kind {
            StatKind::Ks => Ok(self.ks),
            StatKind::Cm => Ok(self.cm),
            other => Err(Error::invalid("kind", alloc::format!("{} is not a test statistic", other.name()))),
        }
    }
}

/// `sup_y |F̂(y) - F̂₋(y)|` and `∫ (F̂ - F̂₋)² dF̂` with `F̂₋(y) = 1 - F̂(-y-)`
/// the reflected EDF, scaled by `√n` and `n`.
pub fn symmetry_statistics(edf: &Edf) -> KsCm {
    let reflected = edf.reflected();
    KsCm {
        ks: ks_distance(edf, &reflected, true),
        cm: cm_sum(edf, &reflected, edf),
    }
}

/// `sup_y |A(y) - B(y)|·√n` and `n ∫ (A - B)² dB` for two step functions.
pub fn gof_statistics(nw: &Edf, param: &Edf) -> KsCm {
    KsCm {
        ks: ks_distance(nw, param, true),
        cm: cm_sum(nw, param, param),
    }
}

/// `Σ_j (A(w_j) - B(w_j))²` over the weight's points, allocation free.
fn cm_sum(a: &Edf, b: &Edf, weight: &Edf) -> f64 {
    let (pa, pb) = (a.points(), b.points());
    let (na, nb) = (pa.len() as f64, pb.len() as f64);
    let (mut i, mut j) = (0, 0);
    let mut sum = 0.0;
    for &w in weight.points() {
        while i < pa.len() && pa[i] <= w {
            i += 1;
        }
        while j < pb.len() && pb[j] <= w {
            j += 1;
        }
        let d = i as f64 / na - j as f64 / nb;
        sum += d * d;
    }
    sum
}

/// Bootstrap KS and CM statistics for a test.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct BootstrapDistribution {
    pub ks: Vec<f64>,
    pub cm: Vec<f64>,
}

impl BootstrapDistribution {
    pub fn with_capacity(b: usize) -> Self {
        BootstrapDistribution {
            ks: Vec::with_capacity(b),
            cm: Vec::with_capacity(b),
        }
    }

    pub fn push(&mut self, stats: KsCm) {
        self.ks.push(stats.ks);
        self.cm.push(stats.cm);
    }

    pub fn get(&self, kind: StatKind) -> Result<&[f64]> {
        match kind {
            StatKind::Ks => Ok(&self.ks),
            StatKind::Cm => Ok(&self.cm),
            other => Err(Error::invalid("kind", alloc::format!("{} is not a test statistic", other.name()))),
        }
    }
}

fn check_test_kind(kind: StatKind) -> Result<()> {
    match kind {
        StatKind::Ks | StatKind::Cm => Ok(()),
        other => Err(Error::invalid("kind", alloc::format!("{} is not a test statistic", other.name()))),
    }
}

/// Residual-EDF symmetry test in a fixed-design linear model, prepared once
/// per dataset.
#[derive(Debug, Clone)]
pub struct SymmetryTest {
    engine: LinearBootstrap,
    observed: KsCm,
}

impl SymmetryTest {
    pub fn new(design: FixedDesign, y: &[f64]) -> Result<Self> {
        let engine = LinearBootstrap::new(design, y)?;
        let observed = symmetry_statistics(engine.pool());
        Ok(SymmetryTest { engine, observed })
    }

    pub fn engine(&self) -> &LinearBootstrap {
        &self.engine
    }

    pub fn observed(&self) -> KsCm {
        self.observed
    }

    /// Draws `b` replicates from the symmetrized residual pool (the scheme's
    /// `symmetrize` flag is forced on).
    pub fn bootstrap<P: Rng + ?Sized, N: Rng + ?Sized>(
        &self,
        scheme: &BootstrapScheme,
        b: usize,
        picks: &mut P,
        noise: &mut N,
        rep: &mut Replicate,
    ) -> Result<BootstrapDistribution> {
        let scheme = scheme.symmetrized(true);
        let mut dist = BootstrapDistribution::with_capacity(b);
        for _ in 0..b {
            self.engine.replicate(&scheme, picks, noise, rep)?;
            dist.push(symmetry_statistics(&rep.edf));
        }
        Ok(dist)
    }
}

/// Runs the symmetry test with `b` bootstrap replicates.
#[allow(clippy::too_many_arguments)]
pub fn symmetry_test<P: Rng + ?Sized, N: Rng + ?Sized>(
    design: FixedDesign,
    y: &[f64],
    scheme: &BootstrapScheme,
    b: usize,
    alpha: f64,
    kind: StatKind,
    picks: &mut P,
    noise: &mut N,
) -> Result<TestResult> {
    check_test_kind(kind)?;
    check_alpha(alpha)?;
    let test = SymmetryTest::new(design, y)?;
    let dist = test.bootstrap(scheme, b, picks, noise, &mut Replicate::new())?;
    TestResult::new(kind, test.observed.get(kind)?, dist.get(kind)?.to_vec(), alpha)
}

/// Goodness-of-fit test of a parametric regression family, prepared once
/// per dataset.
///
/// The observed Nadaraya-Watson residual EDF follows the same centering
/// convention as its bootstrap counterpart (uncentered unless
/// [`GofTest::with_centering`] turns it on), so that a dataset lying exactly
/// on the family yields a zero statistic.
#[derive(Debug, Clone)]
pub struct GofTest {
    engine: GofBootstrap,
    observed: KsCm,
}

impl GofTest {
    pub fn new(data: &Dataset, family: ParametricFamily, kernel: Kernel, h: f64) -> Result<Self> {
        Self::with_centering(data, family, kernel, h, false)
    }

    pub fn with_centering(data: &Dataset, family: ParametricFamily, kernel: Kernel, h: f64, center_residuals: bool) -> Result<Self> {
        let engine = GofBootstrap::new(data, family, kernel, h)?.with_centered_bootstrap(center_residuals);
        let nw = if center_residuals {
            engine.pool().clone()
        } else {
            Edf::new(engine.nw_residuals())?
        };
        let observed = gof_statistics(&nw, engine.param_edf());
        Ok(GofTest { engine, observed })
    }

    pub fn engine(&self) -> &GofBootstrap {
        &self.engine
    }

    pub fn observed(&self) -> KsCm {
        self.observed
    }

    pub fn bootstrap<P: Rng + ?Sized, N: Rng + ?Sized>(
        &self,
        scheme: &BootstrapScheme,
        b: usize,
        picks: &mut P,
        noise: &mut N,
        rep: &mut Replicate,
    ) -> Result<BootstrapDistribution> {
        let mut dist = BootstrapDistribution::with_capacity(b);
        for _ in 0..b {
            self.engine.replicate(scheme, picks, noise, rep)?;
            dist.push(gof_statistics(&rep.edf, &rep.param_edf));
        }
        Ok(dist)
    }
}

/// Runs the goodness-of-fit test with `b` bootstrap replicates.
#[allow(clippy::too_many_arguments)]
pub fn gof_test<P: Rng + ?Sized, N: Rng + ?Sized>(
    data: &Dataset,
    family: ParametricFamily,
    kernel: Kernel,
    h: f64,
    scheme: &BootstrapScheme,
    b: usize,
    alpha: f64,
    kind: StatKind,
    picks: &mut P,
    noise: &mut N,
) -> Result<TestResult> {
    check_test_kind(kind)?;
    check_alpha(alpha)?;
    let test = GofTest::new(data, family, kernel, h)?;
    let dist = test.bootstrap(scheme, b, picks, noise, &mut Replicate::new())?;
    TestResult::new(kind, test.observed.get(kind)?, dist.get(kind)?.to_vec(), alpha)
}

/// Limits `m = lim n⁻¹Σx_i` and `Σ = lim n⁻¹Σx_i x_iᵀ` of a fixed design.
#[derive(Debug, Clone, PartialEq)]
pub struct DesignLimits {
    m: Vec<f64>,
    sigma: Vec<f64>,
    quad: f64,
}

impl DesignLimits {
    /// `sigma` is `p×p`, row-major, and must be positive definite.
    pub fn new(m: Vec<f64>, sigma: Vec<f64>) -> Result<Self> {
        let p = m.len();
        if p == 0 {
            return Err(Error::Empty("design limit m"));
        }
        if sigma.len() != p * p {
            return Err(Error::LengthMismatch {
                what: "design limit sigma",
                left: sigma.len(),
                right: p * p,
            });
        }
        let z = solve_spd(&sigma, &m, p)?;
        let quad = m.iter().zip(&z).map(|(a, b)| a * b).sum();
        Ok(DesignLimits { m, sigma, quad })
    }

    /// Finite-sample moments of a design, standing in for the limits.
    pub fn from_design(design: &FixedDesign) -> Result<Self> {
        let (m, sigma) = design.moment_limits();
        Self::new(m, sigma)
    }

    pub fn m(&self) -> &[f64] {
        &self.m
    }

    pub fn sigma(&self) -> &[f64] {
        &self.sigma
    }

    /// `mᵀΣ⁻¹m`.
    pub fn quadratic_form(&self) -> f64 {
        self.quad
    }
}

/// Cholesky solve of `A z = b` for a small symmetric positive definite `A`.
fn solve_spd(a: &[f64], b: &[f64], p: usize) -> Result<Vec<f64>> {
    let mut l = vec![0.0; p * p];
    for i in 0..p {
        for j in 0..=i {
            let mut s = a[i * p + j];
            for k in 0..j {
                s -= l[i * p + k] * l[j * p + k];
            }
            if i == j {
                if !(s > 0.0) {
                    return Err(Error::invalid("sigma", "design limit matrix must be positive definite"));
                }
                l[i * p + i] = math::sqrt(s);
            } else {
                l[i * p + j] = s / l[j * p + j];
            }
        }
    }
    let mut z = b.to_vec();
    for i in 0..p {
        for k in 0..i {
            z[i] -= l[i * p + k] * z[k];
        }
        z[i] /= l[i * p + i];
    }
    for i in (0..p).rev() {
        for k in i + 1..p {
            z[i] -= l[k * p + i] * z[k];
        }
        z[i] /= l[i * p + i];
    }
    Ok(z)
}

/// Limiting covariance functions of the residual process for a given error
/// law.
#[derive(Debug, Clone, PartialEq)]
pub struct CovarianceOracle {
    law: ErrorDistribution,
    mean: f64,
    variance: f64,
    lower: f64,
    limits: Option<DesignLimits>,
}

impl CovarianceOracle {
    pub fn new(law: ErrorDistribution) -> Result<Self> {
        let (mean, variance) = law.moments()?;
        let lower = law.quantile(1e-12)?;
        Ok(CovarianceOracle {
            law,
            mean,
            variance,
            lower,
            limits: None,
        })
    }

    pub fn with_design_limits(mut self, limits: DesignLimits) -> Self {
        self.limits = Some(limits);
        self
    }

    pub fn law(&self) -> &ErrorDistribution {
        &self.law
    }

    pub fn variance(&self) -> f64 {
        self.variance
    }

    pub fn design_limits(&self) -> Option<&DesignLimits> {
        self.limits.as_ref()
    }

    /// `E[ε·I{ε ≤ y}]`: closed form `μΦ(z) - σ f(y)·σ` for a normal law,
    /// adaptive quadrature from the `1e-12` quantile otherwise.
    pub fn partial_mean(&self, y: f64) -> f64 {
        if let Some((mu, sd)) = self.law.as_normal() {
            let z = (y - mu) / sd;
            return mu * math::norm_cdf(z) - sd * math::norm_pdf(z);
        }
        if y <= self.lower {
            return 0.0;
        }
        math::integrate(|e| e * self.law.pdf(e), self.lower, y, 1e-12)
    }

    /// `E[(I{ε ≤ y₁} + f(y₁)ε)(I{ε ≤ y₂} + f(y₂)ε)]`, the nonparametric
    /// covariance written as an uncentered product moment.
    pub fn cov_np(&self, y1: f64, y2: f64) -> f64 {
        let (f1, f2) = (self.law.pdf(y1), self.law.pdf(y2));
        let second_moment = self.variance + self.mean * self.mean;
        self.law.cdf(y1.min(y2)) + f1 * self.partial_mean(y2) + f2 * self.partial_mean(y1) + f1 * f2 * second_moment
    }

    /// The covariance of `I{ε ≤ y₁} + f(y₁)ε` and `I{ε ≤ y₂} + f(y₂)ε`, i.e.
    /// [`cov_np`](Self::cov_np) minus the product of the means.
    pub fn cov_np_centered(&self, y1: f64, y2: f64) -> f64 {
        let m1 = self.law.cdf(y1) + self.law.pdf(y1) * self.mean;
        let m2 = self.law.cdf(y2) + self.law.pdf(y2) * self.mean;
        self.cov_np(y1, y2) - m1 * m2
    }

    /// Linear-model covariance:
    /// `F(y₁∧y₂) - F(y₁)F(y₂) + mᵀΣ⁻¹m (f₁f₂Var(ε) + f₁E[εI{ε≤y₂}] + f₂E[εI{ε≤y₁}])`.
    pub fn cov_linear(&self, y1: f64, y2: f64) -> Result<f64> {
        let limits = self.limits.as_ref().ok_or(Error::MissingDesignLimits)?;
        let (c1, c2) = (self.law.cdf(y1), self.law.cdf(y2));
        let (f1, f2) = (self.law.pdf(y1), self.law.pdf(y2));
        let correction = f1 * f2 * self.variance + f1 * self.partial_mean(y2) + f2 * self.partial_mean(y1);
        Ok(self.law.cdf(y1.min(y2)) - c1 * c2 + limits.quadratic_form() * correction)
    }
}

/// `n^{-1/2} Σ (I{e_i ≤ y} - F(y))` at each grid point.
pub fn residual_process(residuals: &[f64], law: &dyn DistributionFunction, grid: &[f64]) -> Vec<f64> {
    let scale = 1.0 / math::sqrt(residuals.len() as f64);
    grid.iter()
        .map(|&y| {
            let count = residuals.iter().filter(|&&e| e <= y).count() as f64;
            scale * (count - residuals.len() as f64 * law.eval(y))
        })
        .collect()
}
