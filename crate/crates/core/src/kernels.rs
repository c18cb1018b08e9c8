//! Kernel functions, their integrated versions, and bandwidth rules.

use rand::Rng;
use rand_distr::{Beta, Distribution, StandardNormal};

use crate::math::{self, norm_cdf, norm_pdf};
use crate::{Error, Result};

/// A symmetric probability density used for regression weights (`k`) or for
/// smoothing the residual distribution (`ℓ`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Kernel {
    /// `(15/16)(1 - u²)²` on `[-1, 1]`.
    Biweight,
    /// `(3/4)(1 - u²)` on `[-1, 1]`.
    Epanechnikov,
    /// Standard normal density.
    Gaussian,
}

impl Kernel {
    #[inline]
    pub fn eval(self, u: f64) -> f64 {
        match self {
            Kernel::Biweight => {
                if u.abs() >= 1.0 {
                    0.0
                } else {
                    let t = 1.0 - u * u;
                    0.9375 * t * t
                }
            }
            Kernel::Epanechnikov => {
                if u.abs() >= 1.0 {
                    0.0
                } else {
                    0.75 * (1.0 - u * u)
                }
            }
            Kernel::Gaussian => norm_pdf(u),
        }
    }

    /// Half-width of the support, `None` for kernels supported on all of ℝ.
    pub fn support_radius(self) -> Option<f64> {
        match self {
            Kernel::Biweight | Kernel::Epanechnikov => Some(1.0),
            Kernel::Gaussian => None,
        }
    }

    /// Half-width beyond which the kernel mass is numerically negligible
    /// (below 1e-16 on each side).
    pub fn effective_radius(self) -> f64 {
        self.support_radius().unwrap_or(8.3)
    }

    pub fn name(self) -> &'static str {
        match self {
            Kernel::Biweight => "biweight",
            Kernel::Epanechnikov => "epanechnikov",
            Kernel::Gaussian => "gaussian",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        match name {
            "biweight" => Some(Kernel::Biweight),
            "epanechnikov" => Some(Kernel::Epanechnikov),
            "gaussian" | "normal" => Some(Kernel::Gaussian),
            _ => None,
        }
    }
}

/// Distribution function `L(t) = ∫_{-∞}^t ℓ(u) du` of a kernel.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct IntegratedKernel {
    pub base: Kernel,
}

impl IntegratedKernel {
    pub fn new(base: Kernel) -> Self {
        IntegratedKernel { base }
    }

    #[inline]
    pub fn eval(&self, t: f64) -> f64 {
        match self.base {
            Kernel::Gaussian => norm_cdf(t),
            Kernel::Biweight => {
                if t <= -1.0 {
                    0.0
                } else if t >= 1.0 {
                    1.0
                } else {
                    let t2 = t * t;
                    0.9375 * (t - 2.0 * t * t2 / 3.0 + t * t2 * t2 / 5.0 + 8.0 / 15.0)
                }
            }
            Kernel::Epanechnikov => {
                if t <= -1.0 {
                    0.0
                } else if t >= 1.0 {
                    1.0
                } else {
                    0.75 * (t - t * t * t / 3.0 + 2.0 / 3.0)
                }
            }
        }
    }

    #[inline]
    pub fn density(&self, t: f64) -> f64 {
        self.base.eval(t)
    }

    /// Draws `V ~ ℓ`.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self.base {
            Kernel::Gaussian => StandardNormal.sample(rng),
            // 2B - 1 with B ~ Beta(3, 3) has density proportional to (1 - u²)².
            Kernel::Biweight => {
                let beta = Beta::new(3.0, 3.0).expect("valid beta parameters");
                2.0 * beta.sample(rng) - 1.0
            }
            // Median of three uniforms on [-1, 1] is Epanechnikov distributed.
            Kernel::Epanechnikov => {
                let mut u = [
                    rng.random::<f64>() * 2.0 - 1.0,
                    rng.random::<f64>() * 2.0 - 1.0,
                    rng.random::<f64>() * 2.0 - 1.0,
                ];
                math::sort_floats(&mut u);
                u[1]
            }
        }
    }
}

/// Bandwidth rule for the regression smoother (`h`) or the residual
/// smoother (`s`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BandwidthRule {
    /// `h = sd(X) · n^(-0.3)`.
    RegressionDefault,
    /// `s = 0.5 · n^(-1/4)`.
    SmoothingDefault,
    Fixed(f64),
}

impl BandwidthRule {
    pub fn bandwidth(&self, n: usize, x_sd: f64) -> Result<f64> {
        if n < 2 {
            return Err(Error::invalid("n", "bandwidth rules need n >= 2"));
        }
        let value = match *self {
            BandwidthRule::RegressionDefault => {
                if !(x_sd > 0.0) {
                    return Err(Error::invalid("x_sd", "covariate spread must be positive"));
                }
                x_sd * math::powf(n as f64, -0.3)
            }
            BandwidthRule::SmoothingDefault => 0.5 * math::powf(n as f64, -0.25),
            BandwidthRule::Fixed(h) => h,
        };
        if value > 0.0 && value.is_finite() {
            Ok(value)
        } else {
            Err(Error::NonPositiveBandwidth(value))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    const ALL: [Kernel; 3] = [Kernel::Biweight, Kernel::Epanechnikov, Kernel::Gaussian];

    #[test]
    fn biweight_values() {
        assert_eq!(Kernel::Biweight.eval(0.0), 0.9375);
        assert_eq!(Kernel::Biweight.eval(1.0), 0.0);
        assert_eq!(Kernel::Biweight.eval(-1.0), 0.0);
        // (15/16)(1 - 25/36)^2 = 0.9375 * (11/36)^2
        assert_abs_diff_eq!(Kernel::Biweight.eval(5.0 / 6.0), 0.087_528_935, epsilon = 1e-9);
    }

    #[test]
    fn kernels_are_symmetric_densities() {
        for k in ALL {
            let r = k.effective_radius();
            let mass = math::integrate(|u| k.eval(u), -r, r, 1e-13);
            assert_abs_diff_eq!(mass, 1.0, epsilon = 1e-10);
            for i in 0..200 {
                let u = i as f64 * 0.013;
                assert_eq!(k.eval(u), k.eval(-u));
                assert!(k.eval(u) >= 0.0);
            }
        }
    }

    #[test]
    fn integrated_kernel_matches_quadrature_and_is_monotone() {
        for k in ALL {
            let l = IntegratedKernel::new(k);
            let r = k.effective_radius();
            for &t in &[-0.9, -0.3, 0.0, 0.4, 0.99] {
                let q = math::integrate(|u| k.eval(u), -r, t, 1e-13);
                assert_abs_diff_eq!(l.eval(t), q, epsilon = 1e-10);
            }
            assert_abs_diff_eq!(l.eval(r), 1.0, epsilon = 1e-15);
            assert_abs_diff_eq!(l.eval(-r), 0.0, epsilon = 1e-15);
            let mut prev = 0.0;
            for i in 0..=10_000 {
                let t = -r - 0.5 + (2.0 * r + 1.0) * i as f64 / 10_000.0;
                let v = l.eval(t);
                assert!(v >= prev);
                prev = v;
            }
        }
    }

    #[test]
    fn kernel_samples_have_kernel_variance() {
        // Variances: biweight 1/7, Epanechnikov 1/5, Gaussian 1.
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for (k, var) in [(Kernel::Biweight, 1.0f64 / 7.0), (Kernel::Epanechnikov, 0.2), (Kernel::Gaussian, 1.0)] {
            let l = IntegratedKernel::new(k);
            let n = 200_000;
            let draws: std::vec::Vec<f64> = (0..n).map(|_| l.sample(&mut rng)).collect();
            let (m, sd) = math::mean_sd(&draws);
            assert!(m.abs() < 4.0 * var.sqrt() / (n as f64).sqrt());
            assert_abs_diff_eq!(sd * sd, var, epsilon = 0.02 * var);
        }
    }

    #[test]
    fn bandwidth_rules() {
        let h = BandwidthRule::RegressionDefault.bandwidth(100, 1.0).unwrap();
        assert_abs_diff_eq!(h, 0.251_188_643_150_958, epsilon = 1e-12);
        let s = BandwidthRule::SmoothingDefault.bandwidth(16, 0.0).unwrap();
        assert_abs_diff_eq!(s, 0.25, epsilon = 1e-15);
        assert_eq!(BandwidthRule::Fixed(0.1).bandwidth(7, 0.0).unwrap(), 0.1);
        assert!(BandwidthRule::Fixed(0.0).bandwidth(7, 1.0).is_err());
        assert!(BandwidthRule::RegressionDefault.bandwidth(10, 0.0).is_err());
        assert!(BandwidthRule::SmoothingDefault.bandwidth(1, 1.0).is_err());
    }
}
