//! Error laws used to generate regression errors: normal, skew-normal,
//! Student-t with three degrees of freedom, Gumbel, and two-component
//! mixtures, each optionally wrapped in an affine map `a + b·Z`.
//!
//! Every law can be sampled and evaluated (density, distribution function,
//! quantile), reports its first two moments, and can be standardized to a
//! target mean and standard deviation through [`ErrorDistribution::standardize`].

use alloc::boxed::Box;
use alloc::vec::Vec;
use core::f64::consts::PI;

use rand::Rng;
use rand_distr::{Distribution, Gumbel, StandardNormal, StudentT};

use crate::math::{self, norm_cdf, norm_pdf, EULER_GAMMA};
use crate::{Error, Result};

/// Half-width (in units of the unwrapped law) of the interval on which the
/// skew-normal distribution function is integrated.
const SKEW_NORMAL_CUTOFF: f64 = 12.0;
const QUANTILE_MAX_ITER: usize = 200;

/// Target first two moments of a standardized error law.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentSpec {
    pub target_mean: f64,
    pub target_sd: f64,
}

impl MomentSpec {
    pub fn new(target_mean: f64, target_sd: f64) -> Result<Self> {
        if !(target_sd > 0.0) || !target_sd.is_finite() || !target_mean.is_finite() {
            return Err(Error::invalid("target_sd", "must be finite and positive"));
        }
        Ok(MomentSpec {
            target_mean,
            target_sd,
        })
    }

    /// Mean zero and standard deviation 0.25, the setting of every error law
    /// in the simulation studies.
    pub fn centered(target_sd: f64) -> Result<Self> {
        Self::new(0.0, target_sd)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Law {
    Normal {
        mean: f64,
        sd: f64,
    },
    /// Azzalini skew-normal with density `2φ(y)Φ(shape·y)`.
    SkewNormal {
        shape: f64,
    },
    /// Student-t with three degrees of freedom.
    StudentT3,
    Gumbel {
        loc: f64,
        scale: f64,
    },
    /// `weight·F_first + (1 - weight)·F_second`.
    Mixture {
        weight: f64,
        first: Box<ErrorDistribution>,
        second: Box<ErrorDistribution>,
    },
}

/// How the two components of a mixture relate to the final moment target.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MixtureStandardization {
    /// Mix the components as given, then standardize the mixture as a whole.
    #[default]
    Whole,
    /// Standardize each component to the target first, then mix.
    Components,
}

/// An error law `offset + scale·Z` with `Z` distributed according to `law`.
#[derive(Debug, Clone, PartialEq)]
pub struct ErrorDistribution {
    law: Law,
    offset: f64,
    scale: f64,
}

impl ErrorDistribution {
    fn from_law(law: Law) -> Self {
        ErrorDistribution {
            law,
            offset: 0.0,
            scale: 1.0,
        }
    }

    pub fn normal(mean: f64, sd: f64) -> Result<Self> {
        if !(sd > 0.0) || !sd.is_finite() || !mean.is_finite() {
            return Err(Error::invalid("sd", "normal sd must be finite and positive"));
        }
        Ok(Self::from_law(Law::Normal { mean, sd }))
    }

    pub fn skew_normal(shape: f64) -> Result<Self> {
        if !shape.is_finite() {
            return Err(Error::invalid("d", "skew-normal shape must be finite"));
        }
        Ok(Self::from_law(Law::SkewNormal { shape }))
    }

    pub fn student_t3() -> Self {
        Self::from_law(Law::StudentT3)
    }

    pub fn gumbel(loc: f64, scale: f64) -> Result<Self> {
        if !(scale > 0.0) || !scale.is_finite() || !loc.is_finite() {
            return Err(Error::invalid("scale", "gumbel scale must be finite and positive"));
        }
        Ok(Self::from_law(Law::Gumbel { loc, scale }))
    }

    pub fn mixture(weight: f64, first: ErrorDistribution, second: ErrorDistribution) -> Result<Self> {
        if !(0.0..=1.0).contains(&weight) {
            return Err(Error::invalid("p", "mixture weight must lie in [0, 1]"));
        }
        Ok(Self::from_law(Law::Mixture {
            weight,
            first: Box::new(first),
            second: Box::new(second),
        }))
    }

    /// Mixture of `first` and `second` standardized to `spec`, either as a
    /// whole or component by component.
    pub fn standardized_mixture(
        weight: f64,
        first: ErrorDistribution,
        second: ErrorDistribution,
        spec: MomentSpec,
        how: MixtureStandardization,
    ) -> Result<Self> {
        match how {
            MixtureStandardization::Whole => Self::mixture(weight, first, second)?.standardize(spec),
            MixtureStandardization::Components => {
                let first = first.standardize(spec)?;
                let second = second.standardize(spec)?;
                Self::mixture(weight, first, second)
            }
        }
    }

    pub fn law(&self) -> &Law {
        &self.law
    }

    /// The affine wrapper `(offset, scale)`.
    pub fn affine(&self) -> (f64, f64) {
        (self.offset, self.scale)
    }

    /// Returns the law with the affine wrapper replaced.
    pub fn with_affine(&self, offset: f64, scale: f64) -> Result<Self> {
        if !(scale > 0.0) || !scale.is_finite() || !offset.is_finite() {
            return Err(Error::invalid("scale", "affine scale must be finite and positive"));
        }
        Ok(ErrorDistribution {
            law: self.law.clone(),
            offset,
            scale,
        })
    }

    /// `(mean, sd)` when the law is exactly normal.
    pub fn as_normal(&self) -> Option<(f64, f64)> {
        match self.law {
            Law::Normal { mean, sd } => Some((self.offset + self.scale * mean, self.scale * sd)),
            Law::SkewNormal { shape: 0.0 } => Some((self.offset, self.scale)),
            _ => None,
        }
    }

    fn law_moments(law: &Law) -> Result<(f64, f64)> {
        Ok(match law {
            Law::Normal { mean, sd } => (*mean, sd * sd),
            Law::SkewNormal { shape } => {
                let delta = shape / math::sqrt(1.0 + shape * shape);
                (
                    delta * math::sqrt(2.0 / PI),
                    1.0 - 2.0 * delta * delta / PI,
                )
            }
            Law::StudentT3 => (0.0, 3.0),
            Law::Gumbel { loc, scale } => (loc + EULER_GAMMA * scale, PI * PI / 6.0 * scale * scale),
            Law::Mixture {
                weight,
                first,
                second,
            } => {
                let (m1, v1) = first.moments()?;
                let (m2, v2) = second.moments()?;
                let mean = weight * m1 + (1.0 - weight) * m2;
                let second_moment = weight * (v1 + m1 * m1) + (1.0 - weight) * (v2 + m2 * m2);
                (mean, (second_moment - mean * mean).max(0.0))
            }
        })
    }

    /// Mean and variance.
    pub fn moments(&self) -> Result<(f64, f64)> {
        let (m, v) = Self::law_moments(&self.law)?;
        Ok((self.offset + self.scale * m, self.scale * self.scale * v))
    }

    /// Affine rescaling of the underlying law to the target mean and
    /// standard deviation. Any existing wrapper is replaced, so the operation
    /// is idempotent.
    pub fn standardize(&self, spec: MomentSpec) -> Result<Self> {
        let (mean, var) = Self::law_moments(&self.law)?;
        if !(var > 0.0) {
            return Err(Error::ZeroVariance);
        }
        let scale = spec.target_sd / math::sqrt(var);
        let offset = spec.target_mean - scale * mean;
        Ok(ErrorDistribution {
            law: self.law.clone(),
            offset,
            scale,
        })
    }

    fn sample_law<R: Rng + ?Sized>(law: &Law, rng: &mut R) -> f64 {
        match law {
            Law::Normal { mean, sd } => {
                let z: f64 = StandardNormal.sample(rng);
                mean + sd * z
            }
            Law::SkewNormal { shape } => {
                let delta = shape / math::sqrt(1.0 + shape * shape);
                let z0: f64 = StandardNormal.sample(rng);
                let z1: f64 = StandardNormal.sample(rng);
                delta * z0.abs() + math::sqrt(1.0 - delta * delta) * z1
            }
            Law::StudentT3 => StudentT::new(3.0).expect("df = 3").sample(rng),
            Law::Gumbel { loc, scale } => Gumbel::new(*loc, *scale).expect("validated").sample(rng),
            // One uniform for the component pick, then the component draw.
            Law::Mixture {
                weight,
                first,
                second,
            } => {
                if rng.random::<f64>() < *weight {
                    first.sample(rng)
                } else {
                    second.sample(rng)
                }
            }
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        self.offset + self.scale * Self::sample_law(&self.law, rng)
    }

    pub fn sample_n<R: Rng + ?Sized>(&self, rng: &mut R, count: usize) -> Vec<f64> {
        (0..count).map(|_| self.sample(rng)).collect()
    }

    fn law_pdf(law: &Law, z: f64) -> f64 {
        match law {
            Law::Normal { mean, sd } => norm_pdf((z - mean) / sd) / sd,
            Law::SkewNormal { shape } => 2.0 * norm_pdf(z) * norm_cdf(shape * z),
            Law::StudentT3 => {
                let t = 1.0 + z * z / 3.0;
                2.0 / (PI * math::sqrt(3.0)) / (t * t)
            }
            Law::Gumbel { loc, scale } => {
                let u = (z - loc) / scale;
                math::exp(-(u + math::exp(-u))) / scale
            }
            Law::Mixture {
                weight,
                first,
                second,
            } => weight * first.pdf(z) + (1.0 - weight) * second.pdf(z),
        }
    }

    fn law_cdf(law: &Law, z: f64) -> f64 {
        match law {
            Law::Normal { mean, sd } => norm_cdf((z - mean) / sd),
            Law::SkewNormal { shape } => skew_normal_cdf(*shape, z),
            Law::StudentT3 => {
                let r = z / math::sqrt(3.0);
                0.5 + (r / (1.0 + r * r) + libm::atan(r)) / PI
            }
            Law::Gumbel { loc, scale } => math::exp(-math::exp(-(z - loc) / scale)),
            Law::Mixture {
                weight,
                first,
                second,
            } => weight * first.cdf(z) + (1.0 - weight) * second.cdf(z),
        }
    }

    pub fn pdf(&self, y: f64) -> f64 {
        Self::law_pdf(&self.law, (y - self.offset) / self.scale) / self.scale
    }

    pub fn cdf(&self, y: f64) -> f64 {
        Self::law_cdf(&self.law, (y - self.offset) / self.scale)
    }

    /// Quantile function on the open unit interval.
    pub fn quantile(&self, u: f64) -> Result<f64> {
        if !(u > 0.0 && u < 1.0) {
            return Err(Error::ProbabilityOutOfRange(u));
        }
        let z = match &self.law {
            Law::Normal { mean, sd } => mean + sd * math::norm_quantile(u),
            Law::Gumbel { loc, scale } => loc - scale * math::ln(-math::ln(u)),
            law => math::invert_monotone(
                |z| Self::law_cdf(law, z),
                u,
                -1.0,
                1.0,
                QUANTILE_MAX_ITER,
                0.0,
            ),
        };
        Ok(self.offset + self.scale * z)
    }
}

/// Skew-normal distribution function by adaptive quadrature of its density,
/// integrating from whichever end of `[-12, 12]` is nearer.
fn skew_normal_cdf(shape: f64, z: f64) -> f64 {
    if z <= -SKEW_NORMAL_CUTOFF {
        return 0.0;
    }
    if z >= SKEW_NORMAL_CUTOFF {
        return 1.0;
    }
    if shape == 0.0 {
        return norm_cdf(z);
    }
    let density = |t: f64| 2.0 * norm_pdf(t) * norm_cdf(shape * t);
    if z <= 0.0 {
        math::integrate(density, -SKEW_NORMAL_CUTOFF, z, 1e-13)
    } else {
        1.0 - math::integrate(density, z, SKEW_NORMAL_CUTOFF, 1e-13)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use alloc::vec;

    fn spec() -> MomentSpec {
        MomentSpec::centered(0.25).unwrap()
    }

    fn catalogue() -> Vec<ErrorDistribution> {
        let t3 = ErrorDistribution::student_t3().standardize(spec()).unwrap();
        let gumbel = ErrorDistribution::gumbel(0.0, 1.0).unwrap();
        vec![
            ErrorDistribution::normal(0.0, 0.25).unwrap(),
            ErrorDistribution::skew_normal(0.0).unwrap(),
            ErrorDistribution::skew_normal(2.0).unwrap().standardize(spec()).unwrap(),
            ErrorDistribution::skew_normal(-4.0).unwrap(),
            ErrorDistribution::student_t3(),
            t3.clone(),
            gumbel.clone(),
            ErrorDistribution::mixture(0.75, t3.clone(), gumbel.clone())
                .unwrap()
                .standardize(spec())
                .unwrap(),
            ErrorDistribution::standardized_mixture(0.5, t3, gumbel, spec(), MixtureStandardization::Components)
                .unwrap(),
        ]
    }

    /// Numerical mean and variance of a law from its density; heavy tails
    /// are handled by the `1/(1+y²)` substitution `y = tan(θ)`.
    fn quadrature_moments(d: &ErrorDistribution) -> (f64, f64, f64) {
        let half_pi = PI / 2.0 - 1e-9;
        let moment = |k: i32| {
            math::integrate(
                |theta: f64| {
                    let y = libm::tan(theta);
                    let jac = 1.0 + y * y;
                    libm::pow(y, k as f64) * d.pdf(y) * jac
                },
                -half_pi,
                half_pi,
                1e-11,
            )
        };
        let mass = moment(0);
        let m1 = moment(1);
        let m2 = moment(2);
        (mass, m1, m2 - m1 * m1)
    }

    #[test]
    fn closed_form_moments_match_quadrature() {
        for d in catalogue() {
            let (mean, var) = d.moments().unwrap();
            let (mass, qm, qv) = quadrature_moments(&d);
            assert_abs_diff_eq!(mass, 1.0, epsilon = 1e-8);
            assert_abs_diff_eq!(mean, qm, epsilon = 1e-7);
            assert_abs_diff_eq!(var, qv, epsilon = 1e-6 * var.max(1.0));
        }
    }

    #[test]
    fn student_t3_variance_by_quadrature() {
        // ∫ y² f(y) dy over ℝ, split at ±1 and mapped with y = 1/t in the tails.
        let d = ErrorDistribution::student_t3();
        let core = math::integrate(|y| y * y * d.pdf(y), -1.0, 1.0, 1e-13);
        let tail = math::integrate(|t: f64| d.pdf(1.0 / t) / (t * t * t * t), 0.0, 1.0, 1e-13);
        let var = core + 2.0 * tail;
        assert_abs_diff_eq!(var, 3.0, epsilon = 1e-8);
        assert_eq!(d.moments().unwrap(), (0.0, 3.0));
    }

    #[test]
    fn trivial_moments() {
        let n = ErrorDistribution::normal(0.0, 0.25).unwrap();
        assert_eq!(n.moments().unwrap(), (0.0, 0.0625));
        let sn = ErrorDistribution::skew_normal(0.0).unwrap();
        assert_eq!(sn.moments().unwrap(), (0.0, 1.0));
    }

    #[test]
    fn standardize_affine_values() {
        let t = ErrorDistribution::student_t3().standardize(spec()).unwrap();
        let (a, b) = t.affine();
        assert_eq!(a, 0.0);
        assert_abs_diff_eq!(b, 0.25 / 3f64.sqrt(), epsilon = 1e-15);
        assert_abs_diff_eq!(b, 0.144_338, epsilon = 1e-6);

        let n = ErrorDistribution::normal(0.0, 1.0).unwrap().standardize(spec()).unwrap();
        let (m, v) = n.moments().unwrap();
        assert_abs_diff_eq!(m, 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(v, 0.0625, epsilon = 1e-15);
        for &y in &[-0.5, 0.0, 0.3] {
            assert_abs_diff_eq!(n.cdf(y), norm_cdf(y / 0.25), epsilon = 1e-15);
        }
    }

    #[test]
    fn standardize_is_idempotent() {
        for d in catalogue() {
            let once = d.standardize(spec()).unwrap();
            let twice = once.standardize(spec()).unwrap();
            let (a1, b1) = once.affine();
            let (a2, b2) = twice.affine();
            assert!((a1 - a2).abs() < 1e-10 && (b1 - b2).abs() < 1e-10);
            let (m, v) = once.moments().unwrap();
            assert_abs_diff_eq!(m, 0.0, epsilon = 1e-12);
            assert_abs_diff_eq!(v, 0.0625, epsilon = 1e-12);
        }
    }

    #[test]
    fn invalid_parameters_are_rejected() {
        let n = ErrorDistribution::normal(0.0, 1.0).unwrap();
        assert!(ErrorDistribution::mixture(1.5, n.clone(), n.clone()).is_err());
        assert!(ErrorDistribution::mixture(-0.1, n.clone(), n).is_err());
        assert!(ErrorDistribution::normal(0.0, 0.0).is_err());
        assert!(ErrorDistribution::gumbel(0.0, -1.0).is_err());
        assert!(MomentSpec::new(0.0, 0.0).is_err());
    }

    #[test]
    fn densities_integrate_to_one() {
        for d in catalogue() {
            let (mass, _, _) = quadrature_moments(&d);
            assert_abs_diff_eq!(mass, 1.0, epsilon = 1e-6);
        }
        for &shape in &[2.0, 4.0, -3.0] {
            let d = ErrorDistribution::skew_normal(shape).unwrap();
            let mass = math::integrate(|y| d.pdf(y), -12.0, 12.0, 1e-13);
            assert_abs_diff_eq!(mass, 1.0, epsilon = 1e-10);
        }
    }

    #[test]
    fn cdf_quantile_round_trip() {
        for d in catalogue() {
            let (_, var) = d.moments().unwrap();
            let sd = var.sqrt();
            let mut prev = 0.0;
            for k in 1..=99 {
                let u = k as f64 / 100.0;
                let q = d.quantile(u).unwrap();
                assert!(q >= prev || k == 1);
                prev = q;
                assert_abs_diff_eq!(d.cdf(q), u, epsilon = 1e-8);
                // Inverting the other way on the standardized scale.
                let back = d.quantile(d.cdf(q)).unwrap();
                assert!((back - q).abs() / sd < 1e-8, "{d:?} at {u}");
            }
        }
    }

    #[test]
    fn cdf_limits_and_monotonicity() {
        for d in catalogue() {
            assert!(d.cdf(-1e6) < 1e-6);
            assert!(d.cdf(1e6) > 1.0 - 1e-6);
            let mut prev = 0.0;
            for i in 0..2000 {
                let y = -5.0 + i as f64 * 0.005;
                let c = d.cdf(y);
                assert!(c >= prev - 1e-15);
                assert!(d.pdf(y) >= 0.0);
                prev = c;
            }
        }
    }

    #[test]
    fn reference_points() {
        let n = ErrorDistribution::normal(0.0, 1.0).unwrap();
        assert_eq!(n.cdf(0.0), 0.5);
        let g = ErrorDistribution::gumbel(0.0, 1.0).unwrap();
        assert_abs_diff_eq!(g.quantile((-1.0f64).exp()).unwrap(), 0.0, epsilon = 1e-15);
        assert!(n.quantile(0.0).is_err());
        assert!(n.quantile(1.0).is_err());
        assert!(n.quantile(f64::NAN).is_err());
    }

    #[test]
    fn skew_normal_cdf_against_owen_free_reference() {
        // F(0) = 1/2 - atan(d)/π for the skew-normal.
        for &shape in &[0.5, 2.0, 4.0, -1.0] {
            let d = ErrorDistribution::skew_normal(shape).unwrap();
            assert_abs_diff_eq!(d.cdf(0.0), 0.5 - libm::atan(shape) / PI, epsilon = 1e-10);
        }
    }

    #[test]
    fn standardized_draws_match_target_moments() {
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        let count = 1_000_000;
        for d in catalogue().into_iter().map(|d| d.standardize(spec()).unwrap()) {
            let draws = d.sample_n(&mut rng, count);
            let (m, sd) = math::mean_sd(&draws);
            // SE of the mean is 0.25/1000; SE of the variance uses the
            // sample fourth central moment.
            let m4 = draws.iter().map(|x| (x - m).powi(4)).sum::<f64>() / count as f64;
            let var_se = ((m4 - sd.powi(4)) / count as f64).sqrt();
            assert!(m.abs() < 4.0 * 0.25 / 1000.0, "{d:?}: mean {m}");
            assert!((sd * sd - 0.0625).abs() < 4.0 * var_se, "{d:?}: var {}", sd * sd);
        }
    }

    #[test]
    fn skew_normal_four_standardized_mean() {
        let d = ErrorDistribution::skew_normal(4.0).unwrap().standardize(spec()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let draws = d.sample_n(&mut rng, 1_000_000);
        let (m, _) = math::mean_sd(&draws);
        assert!(m.abs() < 3.0 * 0.25 / 1000.0);
    }

    #[test]
    fn samplers_match_distribution_functions() {
        // One-sample KS against the law's own cdf at n = 20 000; the 1e-3
        // critical value of √n·D is about 1.95.
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        for d in catalogue() {
            let mut draws = d.sample_n(&mut rng, 20_000);
            math::sort_floats(&mut draws);
            let n = draws.len() as f64;
            let mut dmax: f64 = 0.0;
            for (i, &x) in draws.iter().enumerate() {
                let f = d.cdf(x);
                dmax = dmax.max((f - i as f64 / n).abs()).max(((i + 1) as f64 / n - f).abs());
            }
            assert!(n.sqrt() * dmax < 1.95, "{d:?}: {}", n.sqrt() * dmax);
        }
    }
}
