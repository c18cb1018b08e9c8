//! Regression fits: Nadaraya-Watson smoothing for the random-design
//! nonparametric model, least squares for fixed-design linear models, and the
//! kernel-smoothed parametric regression used by the goodness-of-fit test.

use alloc::vec;
use alloc::vec::Vec;

use crate::kernels::Kernel;
use crate::math;
use crate::{Error, Result};

/// Paired observations `(x_i, y_i)` with a one-dimensional covariate.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    x: Vec<f64>,
    y: Vec<f64>,
}

impl Dataset {
    pub fn new(x: Vec<f64>, y: Vec<f64>) -> Result<Self> {
        if x.len() != y.len() {
            return Err(Error::LengthMismatch {
                what: "covariates and responses",
                left: x.len(),
                right: y.len(),
            });
        }
        if x.is_empty() {
            return Err(Error::Empty("dataset"));
        }
        if x.iter().chain(y.iter()).any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("dataset"));
        }
        Ok(Dataset { x, y })
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    pub fn x(&self) -> &[f64] {
        &self.x
    }

    pub fn y(&self) -> &[f64] {
        &self.y
    }
}

/// Kernel weights over a fixed set of covariates.
///
/// Both point predictions and the precomputed training-point rows of
/// [`TrainingSmoother`] sum kernel terms over the covariates in sorted order,
/// so the two paths agree bit for bit.
#[derive(Debug, Clone, PartialEq)]
pub struct NwSmoother {
    x_sorted: Vec<f64>,
    /// `order[j]` is the original index of the `j`-th smallest covariate.
    order: Vec<usize>,
    kernel: Kernel,
    h: f64,
}

impl NwSmoother {
    pub fn new(x: &[f64], kernel: Kernel, h: f64) -> Result<Self> {
        if x.is_empty() {
            return Err(Error::Empty("covariates"));
        }
        if !(h > 0.0) || !h.is_finite() {
            return Err(Error::NonPositiveBandwidth(h));
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("covariates"));
        }
        let mut order: Vec<usize> = (0..x.len()).collect();
        order.sort_by(|&a, &b| x[a].total_cmp(&x[b]).then(a.cmp(&b)));
        let x_sorted = order.iter().map(|&i| x[i]).collect();
        Ok(NwSmoother {
            x_sorted,
            order,
            kernel,
            h,
        })
    }

    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }

    pub fn kernel(&self) -> Kernel {
        self.kernel
    }

    pub fn bandwidth(&self) -> f64 {
        self.h
    }

    fn window(&self, x: f64) -> (usize, usize) {
        match self.kernel.support_radius() {
            Some(r) => {
                let reach = r * self.h;
                let lo = self.x_sorted.partition_point(|&v| v < x - reach);
                let hi = self.x_sorted.partition_point(|&v| v <= x + reach);
                (lo, hi)
            }
            None => (0, self.x_sorted.len()),
        }
    }

    fn nearest(&self, x: f64) -> usize {
        let pos = self.x_sorted.partition_point(|&v| v < x);
        if pos == 0 {
            return 0;
        }
        if pos == self.x_sorted.len() {
            return pos - 1;
        }
        if x - self.x_sorted[pos - 1] <= self.x_sorted[pos] - x {
            pos - 1
        } else {
            pos
        }
    }

    /// Weighted average of `responses` (indexed like the original
    /// covariates) at `x`. The flag reports the nearest-covariate fallback
    /// taken when every kernel weight vanishes.
    pub fn smooth_at(&self, x: f64, responses: &[f64]) -> (f64, bool) {
        debug_assert_eq!(responses.len(), self.order.len());
        let (lo, hi) = self.window(x);
        let mut num = 0.0;
        let mut den = 0.0;
        for j in lo..hi {
            let k = self.kernel.eval((x - self.x_sorted[j]) / self.h);
            num += k * responses[self.order[j]];
            den += k;
        }
        if den > 0.0 {
            (num / den, false)
        } else {
            (responses[self.order[self.nearest(x)]], true)
        }
    }

    /// Normalized weights at `x`, indexed like the original covariates.
    pub fn weights_at(&self, x: f64) -> Vec<f64> {
        let mut w = vec![0.0; self.order.len()];
        let (lo, hi) = self.window(x);
        let mut den = 0.0;
        for j in lo..hi {
            let k = self.kernel.eval((x - self.x_sorted[j]) / self.h);
            w[self.order[j]] = k;
            den += k;
        }
        if den > 0.0 {
            w.iter_mut().for_each(|v| *v /= den);
        } else {
            w[self.order[self.nearest(x)]] = 1.0;
        }
        w
    }

    /// Precomputes the weight rows at every training covariate.
    pub fn training(&self) -> TrainingSmoother {
        let n = self.order.len();
        let mut starts = Vec::with_capacity(n + 1);
        let mut columns = Vec::new();
        let mut values = Vec::new();
        let mut dens = Vec::with_capacity(n);
        let mut fallback = vec![usize::MAX; n];
        starts.push(0);
        // Row i belongs to the original index i.
        let mut xs = vec![0.0; n];
        for (j, &i) in self.order.iter().enumerate() {
            xs[i] = self.x_sorted[j];
        }
        for (i, &x) in xs.iter().enumerate() {
            let (lo, hi) = self.window(x);
            let mut den = 0.0;
            for j in lo..hi {
                let k = self.kernel.eval((x - self.x_sorted[j]) / self.h);
                columns.push(self.order[j] as u32);
                values.push(k);
                den += k;
            }
            if !(den > 0.0) {
                fallback[i] = self.order[self.nearest(x)];
            }
            dens.push(den);
            starts.push(columns.len());
        }
        TrainingSmoother {
            starts,
            columns,
            values,
            dens,
            fallback,
            kernel: self.kernel,
            h: self.h,
        }
    }
}

/// Sparse Nadaraya-Watson weight rows at the training covariates, reused for
/// every refit on the same design.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainingSmoother {
    starts: Vec<usize>,
    columns: Vec<u32>,
    values: Vec<f64>,
    dens: Vec<f64>,
    fallback: Vec<usize>,
    kernel: Kernel,
    h: f64,
}

impl TrainingSmoother {
    pub fn len(&self) -> usize {
        self.dens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dens.is_empty()
    }

    pub fn kernel(&self) -> Kernel {
        self.kernel
    }

    pub fn bandwidth(&self) -> f64 {
        self.h
    }

    /// Number of training points whose prediction uses the nearest-covariate
    /// fallback.
    pub fn fallback_count(&self) -> usize {
        self.fallback.iter().filter(|&&f| f != usize::MAX).count()
    }

    /// `out[i] = m̂(X_i)` for the smoother applied to `responses`.
    pub fn apply(&self, responses: &[f64], out: &mut [f64]) {
        debug_assert_eq!(responses.len(), self.dens.len());
        for (i, slot) in out.iter_mut().enumerate().take(self.dens.len()) {
            let den = self.dens[i];
            if den > 0.0 {
                let (a, b) = (self.starts[i], self.starts[i + 1]);
                let mut num = 0.0;
                for (&c, &k) in self.columns[a..b].iter().zip(&self.values[a..b]) {
                    num += k * responses[c as usize];
                }
                *slot = num / den;
            } else {
                *slot = responses[self.fallback[i]];
            }
        }
    }
}

/// A fitted Nadaraya-Watson regression.
#[derive(Debug, Clone, PartialEq)]
pub struct NwFit {
    smoother: NwSmoother,
    y: Vec<f64>,
}

pub fn nw_fit(data: &Dataset, kernel: Kernel, h: f64) -> Result<NwFit> {
    let smoother = NwSmoother::new(data.x(), kernel, h)?;
    Ok(NwFit {
        smoother,
        y: data.y().to_vec(),
    })
}

impl NwFit {
    pub fn predict(&self, x: f64) -> f64 {
        self.smoother.smooth_at(x, &self.y).0
    }

    /// Prediction plus a flag telling whether the nearest-covariate fallback
    /// was used.
    pub fn predict_flagged(&self, x: f64) -> (f64, bool) {
        self.smoother.smooth_at(x, &self.y)
    }

    pub fn smoother(&self) -> &NwSmoother {
        &self.smoother
    }

    pub fn responses(&self) -> &[f64] {
        &self.y
    }

    /// `m̂(X_i)` at every training covariate.
    pub fn fitted(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.y.len()];
        self.smoother.training().apply(&self.y, &mut out);
        out
    }
}

/// Parametric regression families that are linear in their parameters.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ParametricFamily {
    /// `θ·x`
    LinearNoIntercept,
    /// `θ₀ + θ₁·x`
    Linear,
    /// `θ₀ + θ₁·x + θ₂·x²`
    Quadratic,
}

impl ParametricFamily {
    pub fn n_params(self) -> usize {
        match self {
            ParametricFamily::LinearNoIntercept => 1,
            ParametricFamily::Linear => 2,
            ParametricFamily::Quadratic => 3,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ParametricFamily::LinearNoIntercept => "linear_no_intercept",
            ParametricFamily::Linear => "linear",
            ParametricFamily::Quadratic => "quadratic",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        match name {
            "linear_no_intercept" => Some(ParametricFamily::LinearNoIntercept),
            "linear" => Some(ParametricFamily::Linear),
            "quadratic" => Some(ParametricFamily::Quadratic),
            _ => None,
        }
    }

    fn basis(self, x: f64, out: &mut [f64]) {
        match self {
            ParametricFamily::LinearNoIntercept => out[0] = x,
            ParametricFamily::Linear => {
                out[0] = 1.0;
                out[1] = x;
            }
            ParametricFamily::Quadratic => {
                out[0] = 1.0;
                out[1] = x;
                out[2] = x * x;
            }
        }
    }

    pub fn eval(self, theta: &[f64], x: f64) -> f64 {
        let mut b = [0.0; 3];
        self.basis(x, &mut b);
        theta.iter().zip(&b).map(|(t, v)| t * v).sum()
    }

    /// Design matrix with the family's basis functions as columns.
    pub fn design(self, x: &[f64]) -> Result<FixedDesign> {
        let p = self.n_params();
        let mut data = vec![0.0; x.len() * p];
        for (row, &xi) in data.chunks_exact_mut(p).zip(x) {
            self.basis(xi, row);
        }
        FixedDesign::new(x.len(), p, data)
    }
}

/// Kernel-smoothed parametric regression `m̂_θ(x)`: the Nadaraya-Watson
/// smoother applied to the parametric predictions `m_θ(X_i)`.
pub fn parametric_smooth(smoother: &NwSmoother, x_train: &[f64], family: ParametricFamily, theta: &[f64], x: f64) -> f64 {
    let responses: Vec<f64> = x_train.iter().map(|&xi| family.eval(theta, xi)).collect();
    smoother.smooth_at(x, &responses).0
}

/// A fixed `n × p` design matrix stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct FixedDesign {
    n: usize,
    p: usize,
    data: Vec<f64>,
}

impl FixedDesign {
    pub fn new(n: usize, p: usize, data: Vec<f64>) -> Result<Self> {
        if n == 0 || p == 0 {
            return Err(Error::Empty("design"));
        }
        if data.len() != n * p {
            return Err(Error::LengthMismatch {
                what: "design entries",
                left: data.len(),
                right: n * p,
            });
        }
        if p > n {
            return Err(Error::RankDeficient { rank: n, columns: p });
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("design"));
        }
        Ok(FixedDesign { n, p, data })
    }

    /// One-column design, `x_{ni}` as the only regressor.
    pub fn single_column(x: &[f64]) -> Result<Self> {
        Self::new(x.len(), 1, x.to_vec())
    }

    /// The equispaced design `x_{ni} = i/n`, `i = 1..n`.
    pub fn equispaced(n: usize) -> Result<Self> {
        let x: Vec<f64> = (1..=n).map(|i| i as f64 / n as f64).collect();
        Self::single_column(&x)
    }

    pub fn nrows(&self) -> usize {
        self.n
    }

    pub fn ncols(&self) -> usize {
        self.p
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.p..(i + 1) * self.p]
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.p + j]
    }

    /// `out = X·β`.
    pub fn mul_vec(&self, beta: &[f64], out: &mut [f64]) {
        for (o, row) in out.iter_mut().zip(self.data.chunks_exact(self.p)) {
            *o = row.iter().zip(beta).map(|(a, b)| a * b).sum();
        }
    }

    /// `Xᵀ·v`.
    pub fn t_mul_vec(&self, v: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.p];
        for (row, &vi) in self.data.chunks_exact(self.p).zip(v) {
            for (o, &a) in out.iter_mut().zip(row) {
                *o += a * vi;
            }
        }
        out
    }

    /// Finite-sample design moments `(n⁻¹Σx_i, n⁻¹Σx_i x_iᵀ)`; their limits
    /// are the vector `m` and matrix `Σ` of the linear covariance.
    pub fn moment_limits(&self) -> (Vec<f64>, Vec<f64>) {
        let n = self.n as f64;
        let mut m = vec![0.0; self.p];
        let mut sigma = vec![0.0; self.p * self.p];
        for row in self.data.chunks_exact(self.p) {
            for a in 0..self.p {
                m[a] += row[a] / n;
                for b in 0..self.p {
                    sigma[a * self.p + b] += row[a] * row[b] / n;
                }
            }
        }
        (m, sigma)
    }
}

/// Householder QR factorization of a design, reused for every refit.
#[derive(Debug, Clone, PartialEq)]
pub struct LeastSquares {
    design: FixedDesign,
    /// Column-major Householder vectors below the diagonal, `R` on and above.
    qr: Vec<f64>,
    /// Householder scalars `2 / (vᵀv)` per column.
    tau: Vec<f64>,
    r_diag: Vec<f64>,
}

impl LeastSquares {
    pub fn new(design: FixedDesign) -> Result<Self> {
        let (n, p) = (design.n, design.p);
        let mut a = vec![0.0; n * p];
        for i in 0..n {
            for j in 0..p {
                a[j * n + i] = design.get(i, j);
            }
        }
        let col_norms: Vec<f64> = (0..p)
            .map(|j| math::sqrt(a[j * n..(j + 1) * n].iter().map(|v| v * v).sum()))
            .collect();
        let scale = col_norms.iter().copied().fold(0.0, f64::max);
        let mut tau = vec![0.0; p];
        let mut r_diag = vec![0.0; p];
        for k in 0..p {
            let norm = math::sqrt(a[k * n + k..(k + 1) * n].iter().map(|v| v * v).sum());
            let x0 = a[k * n + k];
            let alpha = if x0 >= 0.0 { -norm } else { norm };
            r_diag[k] = alpha;
            if norm == 0.0 {
                continue;
            }
            // v = x - alpha·e1, stored in place of x.
            a[k * n + k] = x0 - alpha;
            let vtv: f64 = a[k * n + k..(k + 1) * n].iter().map(|v| v * v).sum();
            if vtv == 0.0 {
                continue;
            }
            tau[k] = 2.0 / vtv;
            for j in k + 1..p {
                let dot: f64 = (k..n).map(|i| a[k * n + i] * a[j * n + i]).sum();
                let f = tau[k] * dot;
                for i in k..n {
                    a[j * n + i] -= f * a[k * n + i];
                }
            }
        }
        let tol = 1e-10 * scale.max(f64::MIN_POSITIVE);
        let rank = r_diag.iter().filter(|r| r.abs() > tol).count();
        if rank < p {
            return Err(Error::RankDeficient { rank, columns: p });
        }
        Ok(LeastSquares {
            design,
            qr: a,
            tau,
            r_diag,
        })
    }

    pub fn design(&self) -> &FixedDesign {
        &self.design
    }

    /// Least-squares coefficients for `y`; `work` must have length `n`.
    pub fn solve_into(&self, y: &[f64], work: &mut [f64], coef: &mut [f64]) {
        let (n, p) = (self.design.n, self.design.p);
        work[..n].copy_from_slice(&y[..n]);
        for k in 0..p {
            if self.tau[k] == 0.0 {
                continue;
            }
            let v = &self.qr[k * n..(k + 1) * n];
            let dot: f64 = (k..n).map(|i| v[i] * work[i]).sum();
            let f = self.tau[k] * dot;
            for i in k..n {
                work[i] -= f * v[i];
            }
        }
        for k in (0..p).rev() {
            let mut s = work[k];
            for j in k + 1..p {
                s -= self.qr[j * n + k] * coef[j];
            }
            coef[k] = s / self.r_diag[k];
        }
    }

    pub fn solve(&self, y: &[f64]) -> Result<Vec<f64>> {
        if y.len() != self.design.n {
            return Err(Error::LengthMismatch {
                what: "responses and design rows",
                left: y.len(),
                right: self.design.n,
            });
        }
        let mut work = vec![0.0; self.design.n];
        let mut coef = vec![0.0; self.design.p];
        self.solve_into(y, &mut work, &mut coef);
        Ok(coef)
    }
}

/// A least-squares fit on a fixed design.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearFit {
    pub coefficients: Vec<f64>,
    pub design: FixedDesign,
}

impl LinearFit {
    pub fn fitted(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.design.n];
        self.design.mul_vec(&self.coefficients, &mut out);
        out
    }

    pub fn predict(&self, row: &[f64]) -> f64 {
        row.iter().zip(&self.coefficients).map(|(a, b)| a * b).sum()
    }
}

pub fn ls_fit(design: &FixedDesign, y: &[f64]) -> Result<LinearFit> {
    let solver = LeastSquares::new(design.clone())?;
    let coefficients = solver.solve(y)?;
    Ok(LinearFit {
        coefficients,
        design: design.clone(),
    })
}

/// `ε̂_i = y_i - fitted_i`.
pub fn residuals(fitted: &[f64], y: &[f64]) -> Vec<f64> {
    y.iter().zip(fitted).map(|(yi, fi)| yi - fi).collect()
}

/// Subtracts the sample mean.
pub fn center(residuals: &[f64]) -> Vec<f64> {
    let mut out = residuals.to_vec();
    center_in_place(&mut out);
    out
}

pub fn center_in_place(values: &mut [f64]) {
    if values.is_empty() {
        return;
    }
    let mean = values.iter().sum::<f64>() / values.len() as f64;
    values.iter_mut().for_each(|v| *v -= mean);
}
