//! Empirical distribution functions of residuals and the distances between
//! them.
//!
//! [`Edf`] is the right-continuous step function of a sample. [`SmoothedEdf`]
//! convolves it with a scaled integrated kernel, `n⁻¹Σ L((y - ε_i)/s)`.
//! [`TabulatedCdf`] caches a smoothed EDF on a grid with cubic Hermite
//! interpolation for the bootstrap inner loop.
//!
//! Distances: Kolmogorov-Smirnov (exact over jump points whenever a step
//! function is involved), Cramér-von Mises against a step weight, and the
//! pointwise least-squares and median-absolute-deviation distances.

use alloc::vec;
use alloc::vec::Vec;

use crate::distributions::ErrorDistribution;
use crate::kernels::IntegratedKernel;
use crate::math;
use crate::{Error, Result};

/// Anything that can be evaluated as a distribution function.
pub trait DistributionFunction {
    /// Right-continuous value `F(y)`.
    fn eval(&self, y: f64) -> f64;

    /// Left limit `F(y-)`; equals `eval` for continuous functions.
    fn eval_left(&self, y: f64) -> f64 {
        self.eval(y)
    }

    /// Evaluates at ascending `ys`.
    fn eval_sorted(&self, ys: &[f64], out: &mut [f64]) {
        for (o, &y) in out.iter_mut().zip(ys) {
            *o = self.eval(y);
        }
    }

    /// The underlying step function, if this is one.
    fn as_edf(&self) -> Option<&Edf> {
        None
    }

    /// Number of observations behind an empirical function.
    fn sample_size(&self) -> Option<usize> {
        None
    }

    /// An interval carrying essentially all of the mass.
    fn range_hint(&self) -> (f64, f64);
}

/// Right-continuous empirical distribution function with `1/n` jumps.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Edf {
    sorted: Vec<f64>,
}

impl Edf {
    pub fn new(points: &[f64]) -> Result<Self> {
        let mut e = Edf::default();
        e.rebuild(points)?;
        Ok(e)
    }

    /// Replaces the sample, reusing the allocation.
    pub fn rebuild(&mut self, points: &[f64]) -> Result<()> {
        if points.is_empty() {
            return Err(Error::Empty("empirical distribution"));
        }
        if points.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("empirical distribution"));
        }
        self.sorted.clear();
        self.sorted.extend_from_slice(points);
        math::sort_floats(&mut self.sorted);
        Ok(())
    }

    /// The distribution of the negated sample.
    pub fn reflected(&self) -> Edf {
        Edf {
            sorted: self.sorted.iter().rev().map(|v| -v).collect(),
        }
    }

    /// Pool of `±ε_i`: the symmetrized law `½(F(y) + 1 - F(-y-))`.
    pub fn symmetrized(&self) -> Edf {
        let mut sorted: Vec<f64> = self.sorted.iter().flat_map(|&v| [v, -v]).collect();
        math::sort_floats(&mut sorted);
        Edf { sorted }
    }

    pub fn len(&self) -> usize {
        self.sorted.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sorted.is_empty()
    }

    /// Sample points in ascending order.
    pub fn points(&self) -> &[f64] {
        &self.sorted
    }

    /// Generalized inverse `inf{y : F(y) ≥ u}` for `u ∈ (0, 1]`, i.e. the
    /// `⌈u·n⌉`-th order statistic.
    pub fn quantile(&self, u: f64) -> Result<f64> {
        if !(u > 0.0 && u <= 1.0) {
            return Err(Error::ProbabilityOutOfRange(u));
        }
        Ok(self.sorted[self.quantile_index(u)])
    }

    #[inline]
    pub(crate) fn quantile_index(&self, u: f64) -> usize {
        let n = self.sorted.len();
        let k = libm::ceil(u * n as f64) as usize;
        k.clamp(1, n) - 1
    }
}

impl DistributionFunction for Edf {
    #[inline]
    fn eval(&self, y: f64) -> f64 {
        self.sorted.partition_point(|&v| v <= y) as f64 / self.sorted.len() as f64
    }

    fn eval_left(&self, y: f64) -> f64 {
        self.sorted.partition_point(|&v| v < y) as f64 / self.sorted.len() as f64
    }

    fn eval_sorted(&self, ys: &[f64], out: &mut [f64]) {
        let n = self.sorted.len();
        let mut idx = 0;
        for (o, &y) in out.iter_mut().zip(ys) {
            while idx < n && self.sorted[idx] <= y {
                idx += 1;
            }
            *o = idx as f64 / n as f64;
        }
    }

    fn as_edf(&self) -> Option<&Edf> {
        Some(self)
    }

    fn sample_size(&self) -> Option<usize> {
        Some(self.sorted.len())
    }

    fn range_hint(&self) -> (f64, f64) {
        (self.sorted[0], self.sorted[self.sorted.len() - 1])
    }
}

/// Kernel-smoothed empirical distribution `n⁻¹Σ L((y - ε_i)/s)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SmoothedEdf {
    atoms: Edf,
    kernel: IntegratedKernel,
    s: f64,
    reach: f64,
}

impl SmoothedEdf {
    pub fn new(base: &Edf, kernel: IntegratedKernel, s: f64) -> Result<Self> {
        if !(s > 0.0) || !s.is_finite() {
            return Err(Error::NonPositiveBandwidth(s));
        }
        if base.is_empty() {
            return Err(Error::Empty("empirical distribution"));
        }
        Ok(SmoothedEdf {
            atoms: base.clone(),
            kernel,
            s,
            reach: kernel.base.effective_radius() * s,
        })
    }

    pub fn base(&self) -> &Edf {
        &self.atoms
    }

    pub fn kernel(&self) -> IntegratedKernel {
        self.kernel
    }

    pub fn bandwidth(&self) -> f64 {
        self.s
    }

    /// Atoms farther than the kernel reach contribute exactly 0 or 1.
    fn window(&self, y: f64) -> (usize, usize) {
        let pts = self.atoms.points();
        let lo = pts.partition_point(|&v| v < y - self.reach);
        let hi = pts.partition_point(|&v| v <= y + self.reach);
        (lo, hi)
    }

    pub fn pdf(&self, y: f64) -> f64 {
        let (lo, hi) = self.window(y);
        let pts = self.atoms.points();
        let sum: f64 = pts[lo..hi].iter().map(|&e| self.kernel.density((y - e) / self.s)).sum();
        sum / (pts.len() as f64 * self.s)
    }

    /// Quantile by monotone bisection, `u ∈ (0, 1)`.
    pub fn quantile(&self, u: f64) -> Result<f64> {
        if !(u > 0.0 && u < 1.0) {
            return Err(Error::ProbabilityOutOfRange(u));
        }
        let (lo, hi) = self.range_hint();
        Ok(math::invert_monotone(|y| self.eval(y), u, lo, hi, 200, 1e-12))
    }

    /// Caches the function on `intervals + 1` equispaced points spanning the
    /// support, interpolated with cubic Hermite segments using the exact
    /// density as slope.
    pub fn tabulate(&self, intervals: usize) -> TabulatedCdf {
        let intervals = intervals.max(2);
        let (lo, hi) = self.range_hint();
        let step = (hi - lo) / intervals as f64;
        let mut values = Vec::with_capacity(intervals + 1);
        let mut slopes = Vec::with_capacity(intervals + 1);
        for i in 0..=intervals {
            let y = lo + step * i as f64;
            values.push(self.eval(y));
            slopes.push(self.pdf(y));
        }
        TabulatedCdf {
            lo,
            step,
            values,
            slopes,
            n: self.atoms.len(),
        }
    }
}

impl DistributionFunction for SmoothedEdf {
    fn eval(&self, y: f64) -> f64 {
        let (lo, hi) = self.window(y);
        let pts = self.atoms.points();
        let inner: f64 = pts[lo..hi].iter().map(|&e| self.kernel.eval((y - e) / self.s)).sum();
        ((lo as f64 + inner) / pts.len() as f64).min(1.0)
    }

    fn sample_size(&self) -> Option<usize> {
        Some(self.atoms.len())
    }

    fn range_hint(&self) -> (f64, f64) {
        let (a, b) = self.atoms.range_hint();
        (a - self.reach, b + self.reach)
    }
}

/// Grid cache of a smooth distribution function.
#[derive(Debug, Clone, PartialEq)]
pub struct TabulatedCdf {
    lo: f64,
    step: f64,
    values: Vec<f64>,
    slopes: Vec<f64>,
    n: usize,
}

impl DistributionFunction for TabulatedCdf {
    #[inline]
    fn eval(&self, y: f64) -> f64 {
        let t = (y - self.lo) / self.step;
        if !(t > 0.0) {
            return self.values[0];
        }
        let last = self.values.len() - 1;
        if t >= last as f64 {
            return self.values[last];
        }
        let i = t as usize;
        let r = t - i as f64;
        let (v0, v1) = (self.values[i], self.values[i + 1]);
        let (d0, d1) = (self.slopes[i] * self.step, self.slopes[i + 1] * self.step);
        let r2 = r * r;
        let r3 = r2 * r;
        let h00 = 2.0 * r3 - 3.0 * r2 + 1.0;
        let h10 = r3 - 2.0 * r2 + r;
        let h01 = -2.0 * r3 + 3.0 * r2;
        let h11 = r3 - r2;
        (h00 * v0 + h10 * d0 + h01 * v1 + h11 * d1).clamp(0.0, 1.0)
    }

    fn sample_size(&self) -> Option<usize> {
        Some(self.n)
    }

    fn range_hint(&self) -> (f64, f64) {
        (self.lo, self.lo + self.step * (self.values.len() - 1) as f64)
    }
}

impl DistributionFunction for ErrorDistribution {
    fn eval(&self, y: f64) -> f64 {
        self.cdf(y)
    }

    fn range_hint(&self) -> (f64, f64) {
        let lo = self.quantile(1e-12).unwrap_or(-1.0);
        let hi = self.quantile(1.0 - 1e-12).unwrap_or(1.0);
        (lo, hi)
    }
}

/// Which functional of a difference of distribution functions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum StatKind {
    /// Supremum distance, scaled by `√n`.
    Ks,
    /// Integrated squared distance, scaled by `n`.
    Cm,
    /// Sum of squared differences at the residuals.
    Ls,
    /// `n` times the median absolute difference at the residuals.
    Mad,
}

impl StatKind {
    pub fn name(self) -> &'static str {
        match self {
            StatKind::Ks => "KS",
            StatKind::Cm => "CM",
            StatKind::Ls => "LS",
            StatKind::Mad => "MAD",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        match name.to_ascii_uppercase().as_str() {
            "KS" => Some(StatKind::Ks),
            "CM" => Some(StatKind::Cm),
            "LS" => Some(StatKind::Ls),
            "MAD" => Some(StatKind::Mad),
            _ => None,
        }
    }
}

/// A computed distance with its scaling convention.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProcessDistance {
    pub kind: StatKind,
    pub value: f64,
    /// Whether the `√n` (KS) or `n` (CM) factor was applied.
    pub scaled: bool,
}

const SMOOTH_KS_GRID: usize = 2048;

fn sample_size_of(a: &dyn DistributionFunction, b: &dyn DistributionFunction) -> usize {
    a.sample_size().unwrap_or(0).max(b.sample_size().unwrap_or(0))
}

/// Exact supremum distance between two step functions by merging their
/// jump points.
fn ks_edf_pair(a: &Edf, b: &Edf) -> f64 {
    let (pa, pb) = (a.points(), b.points());
    let (na, nb) = (pa.len() as f64, pb.len() as f64);
    let (mut i, mut j) = (0, 0);
    let mut sup: f64 = 0.0;
    while i < pa.len() || j < pb.len() {
        let v = match (pa.get(i), pb.get(j)) {
            (Some(&x), Some(&y)) => x.min(y),
            (Some(&x), None) => x,
            (None, Some(&y)) => y,
            (None, None) => unreachable!(),
        };
        while i < pa.len() && pa[i] <= v {
            i += 1;
        }
        while j < pb.len() && pb[j] <= v {
            j += 1;
        }
        sup = sup.max((i as f64 / na - j as f64 / nb).abs());
    }
    sup
}

/// Supremum of `|A - B|` over the line.
///
/// When either argument is a step function the supremum is exact: between
/// consecutive jumps a step function is constant and the other argument is
/// monotone, so it suffices to compare right values and left limits at every
/// jump. Two smooth arguments are compared on a grid refined once around the
/// maximizer. With `scaled`, the result is multiplied by `√n` for the larger
/// sample size behind the arguments.
pub fn ks_distance(a: &dyn DistributionFunction, b: &dyn DistributionFunction, scaled: bool) -> f64 {
    let sup = match (a.as_edf(), b.as_edf()) {
        (Some(ea), Some(eb)) => ks_edf_pair(ea, eb),
        (None, None) => ks_smooth_pair(a, b),
        (Some(step), None) | (None, Some(step)) => {
            let mut sup: f64 = 0.0;
            for &y in step.points() {
                sup = sup.max((a.eval(y) - b.eval(y)).abs());
                sup = sup.max((a.eval_left(y) - b.eval_left(y)).abs());
            }
            sup
        }
    };
    if scaled {
        sup * math::sqrt(sample_size_of(a, b) as f64)
    } else {
        sup
    }
}

fn ks_smooth_pair(a: &dyn DistributionFunction, b: &dyn DistributionFunction) -> f64 {
    let (a_lo, a_hi) = a.range_hint();
    let (b_lo, b_hi) = b.range_hint();
    let (lo, hi) = (a_lo.min(b_lo), a_hi.max(b_hi));
    let grid = |lo: f64, hi: f64| {
        let step = (hi - lo) / SMOOTH_KS_GRID as f64;
        let mut best = (0.0f64, lo);
        for i in 0..=SMOOTH_KS_GRID {
            let y = lo + step * i as f64;
            let d = (a.eval(y) - b.eval(y)).abs();
            if d > best.0 {
                best = (d, y);
            }
        }
        (best, step)
    };
    let ((d, at), step) = grid(lo, hi);
    let ((d2, _), _) = grid(at - step, at + step);
    d.max(d2)
}

/// `∫ (A - B)² dW` for a step weight `W`, i.e. the average of the squared
/// difference over the weight's sample points (ties keep their stacked mass).
/// With `scaled`, multiplied by the weight's sample size.
pub fn cm_distance(a: &dyn DistributionFunction, b: &dyn DistributionFunction, weight: &Edf, scaled: bool) -> f64 {
    let pts = weight.points();
    let mut fa = vec![0.0; pts.len()];
    let mut fb = vec![0.0; pts.len()];
    a.eval_sorted(pts, &mut fa);
    b.eval_sorted(pts, &mut fb);
    let sum: f64 = fa.iter().zip(&fb).map(|(x, y)| (x - y) * (x - y)).sum();
    if scaled {
        sum
    } else {
        sum / pts.len() as f64
    }
}

/// `Σ_i (F̂(y_i) - F(y_i))²` over the evaluation points.
pub fn ls_stat(fhat: &dyn DistributionFunction, fref: &dyn DistributionFunction, eval_points: &[f64]) -> Result<f64> {
    if eval_points.is_empty() {
        return Err(Error::Empty("evaluation points"));
    }
    Ok(eval_points
        .iter()
        .map(|&y| {
            let d = fhat.eval(y) - fref.eval(y);
            d * d
        })
        .sum())
}

/// `n · median_i |F̂(y_i) - F(y_i)|` over the evaluation points.
pub fn mad_stat(fhat: &dyn DistributionFunction, fref: &dyn DistributionFunction, eval_points: &[f64]) -> Result<f64> {
    if eval_points.is_empty() {
        return Err(Error::Empty("evaluation points"));
    }
    let mut diffs: Vec<f64> = eval_points.iter().map(|&y| (fhat.eval(y) - fref.eval(y)).abs()).collect();
    Ok(eval_points.len() as f64 * math::median_in_place(&mut diffs))
}

/// Computes one of the four distances. KS and CM compare `a` with `b`
/// (CM weighted by `weight`); LS and MAD evaluate at `eval_points`.
pub fn process_distance(
    kind: StatKind,
    a: &dyn DistributionFunction,
    b: &dyn DistributionFunction,
    weight: &Edf,
    eval_points: &[f64],
    scaled: bool,
) -> Result<ProcessDistance> {
    let value = match kind {
        StatKind::Ks => ks_distance(a, b, scaled),
        StatKind::Cm => cm_distance(a, b, weight, scaled),
        StatKind::Ls => ls_stat(a, b, eval_points)?,
        StatKind::Mad => mad_stat(a, b, eval_points)?,
    };
    Ok(ProcessDistance { kind, value, scaled })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::Kernel;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn gaussian() -> IntegratedKernel {
        IntegratedKernel::new(Kernel::Gaussian)
    }

    #[test]
    fn edf_eval_and_quantile() {
        let e = Edf::new(&[2.0, -1.0, 0.0]).unwrap();
        assert_abs_diff_eq!(e.eval(0.0), 2.0 / 3.0);
        assert_eq!(e.eval(-1.5), 0.0);
        assert_eq!(e.eval(5.0), 1.0);
        assert_eq!(e.eval_left(0.0), 1.0 / 3.0);
        assert_eq!(e.quantile(1.0).unwrap(), 2.0);
        assert_eq!(e.quantile(1e-9).unwrap(), -1.0);
        assert_eq!(e.quantile(1.0 / 3.0).unwrap(), -1.0);
        assert_eq!(e.quantile(0.34).unwrap(), 0.0);
        assert!(e.quantile(0.0).is_err());
        assert!(e.quantile(1.01).is_err());
        assert!(Edf::new(&[]).is_err());
    }

    #[test]
    fn edf_ties_stack() {
        let e = Edf::new(&[1.0, 1.0, 3.0, 1.0]).unwrap();
        assert_eq!(e.eval(1.0), 0.75);
        assert_eq!(e.eval_left(1.0), 0.0);
    }

    #[test]
    fn smoothed_edf_basics() {
        let s = SmoothedEdf::new(&Edf::new(&[0.0]).unwrap(), gaussian(), 1.0).unwrap();
        assert_eq!(s.eval(0.0), 0.5);
        assert!(SmoothedEdf::new(&Edf::new(&[0.0]).unwrap(), gaussian(), 0.0).is_err());
        assert!(s.quantile(1.0).is_err());
    }

    #[test]
    fn smoothed_quantile_round_trip() {
        let e = Edf::new(&[-0.4, -0.1, 0.05, 0.2, 0.21, 0.6]).unwrap();
        for k in [Kernel::Gaussian, Kernel::Epanechnikov] {
            let s = SmoothedEdf::new(&e, IntegratedKernel::new(k), 0.15).unwrap();
            for i in 0..40 {
                let y = -0.5 + i as f64 * 0.03;
                let u = s.eval(y);
                if u > 1e-6 && u < 1.0 - 1e-6 {
                    // The compact kernel leaves flat stretches between atoms;
                    // there the generalized inverse returns the left end.
                    let q = s.quantile(u).unwrap();
                    assert_abs_diff_eq!(s.eval(q), u, epsilon = 1e-9);
                    assert!(q <= y + 1e-8);
                    if k == Kernel::Gaussian {
                        assert_abs_diff_eq!(q, y, epsilon = 1e-8);
                    }
                }
            }
        }
    }

    #[test]
    fn smoothed_approaches_step_as_bandwidth_shrinks() {
        let e = Edf::new(&[-0.33, -0.12, 0.04, 0.18, 0.51]).unwrap();
        // Grid avoiding the jump points.
        let grid: Vec<f64> = (0..200).map(|i| -0.6 + i as f64 * 0.0061).collect();
        let mut prev = f64::INFINITY;
        for &s in &[1e-1, 1e-2, 1e-3, 1e-4, 1e-5, 1e-6] {
            let sm = SmoothedEdf::new(&e, gaussian(), s).unwrap();
            let diff = grid.iter().map(|&y| (sm.eval(y) - e.eval(y)).abs()).fold(0.0, f64::max);
            assert!(diff <= prev);
            prev = diff;
        }
        assert!(prev < 1e-12);
    }

    #[test]
    fn tabulated_matches_exact() {
        let pts: Vec<f64> = (0..300).map(|i| ((i * 7919) % 1000) as f64 / 1000.0 - 0.5).collect();
        let s = SmoothedEdf::new(&Edf::new(&pts).unwrap(), gaussian(), 0.09).unwrap();
        let t = s.tabulate(1024);
        let (lo, hi) = s.range_hint();
        for i in 0..=5000 {
            let y = lo - 0.1 + (hi - lo + 0.2) * i as f64 / 5000.0;
            assert_abs_diff_eq!(t.eval(y), s.eval(y), epsilon = 1e-9);
        }
    }

    #[test]
    fn ks_examples() {
        let a = Edf::new(&[1.0, 2.0]).unwrap();
        assert_eq!(ks_distance(&a, &a, false), 0.0);
        assert_eq!(ks_distance(&a, &a.reflected(), false), 1.0);
        let sym = Edf::new(&[-1.0, 1.0]).unwrap();
        assert_eq!(ks_distance(&sym, &sym.reflected(), false), 0.0);
        assert_abs_diff_eq!(ks_distance(&a, &a.reflected(), true), 2f64.sqrt());
    }

    #[test]
    fn cm_examples() {
        let a = Edf::new(&[1.0, 2.0]).unwrap();
        let b = a.reflected();
        assert_eq!(cm_distance(&a, &a, &a, true), 0.0);
        assert_abs_diff_eq!(cm_distance(&a, &b, &a, true), 0.25);
        // Translation invariance.
        let shift = |e: &Edf, c: f64| Edf::new(&e.points().iter().map(|v| v + c).collect::<Vec<_>>()).unwrap();
        assert_abs_diff_eq!(
            cm_distance(&shift(&a, 3.3), &shift(&b, 3.3), &shift(&a, 3.3), true),
            0.25,
            epsilon = 1e-15
        );
    }

    #[test]
    fn ls_and_mad_examples() {
        // Two evaluation points with differences 0.1 and 0.3 against a
        // reference shifted by those amounts.
        struct Offset<'a>(&'a Edf, [f64; 2], [f64; 2]);
        impl DistributionFunction for Offset<'_> {
            fn eval(&self, y: f64) -> f64 {
                let d = if y == self.1[0] { self.2[0] } else { self.2[1] };
                self.0.eval(y) - d
            }
            fn range_hint(&self) -> (f64, f64) {
                self.0.range_hint()
            }
        }
        let e = Edf::new(&[0.0, 1.0]).unwrap();
        let r = Offset(&e, [0.0, 1.0], [0.1, 0.3]);
        assert_abs_diff_eq!(ls_stat(&e, &r, &[0.0, 1.0]).unwrap(), 0.10, epsilon = 1e-15);
        assert_abs_diff_eq!(mad_stat(&e, &r, &[0.0, 1.0]).unwrap(), 0.4, epsilon = 1e-15);
        assert_eq!(ls_stat(&e, &e, &[0.0, 1.0]).unwrap(), 0.0);
        assert_eq!(mad_stat(&e, &e, &[0.0, 1.0]).unwrap(), 0.0);
        assert!(ls_stat(&e, &e, &[]).is_err());
        assert!(mad_stat(&e, &e, &[]).is_err());
    }

    proptest! {
        #[test]
        fn edf_monotone(points in prop::collection::vec(-5.0f64..5.0, 1..50), grid in prop::collection::vec(-6.0f64..6.0, 1..200)) {
            let e = Edf::new(&points).unwrap();
            let s = SmoothedEdf::new(&e, gaussian(), 0.3).unwrap();
            let mut g = grid.clone();
            math::sort_floats(&mut g);
            let mut prev = (0.0, 0.0);
            for &y in &g {
                let cur = (e.eval(y), s.eval(y));
                prop_assert!(cur.0 >= prev.0 && cur.1 >= prev.1 - 1e-15);
                prev = cur;
            }
            let mut batched = vec![0.0; g.len()];
            e.eval_sorted(&g, &mut batched);
            for (b, &y) in batched.iter().zip(&g) {
                prop_assert_eq!(*b, e.eval(y));
            }
        }

        #[test]
        fn ls_permutation_invariant(points in prop::collection::vec(-1.0f64..1.0, 2..30)) {
            let e = Edf::new(&points).unwrap();
            let f = ErrorDistribution::normal(0.0, 0.5).unwrap();
            let mut rev = points.clone();
            rev.reverse();
            let a = ls_stat(&e, &f, &points).unwrap();
            let b = ls_stat(&e, &f, &rev).unwrap();
            prop_assert!((a - b).abs() < 1e-12);
        }

        #[test]
        fn ks_exact_is_symmetric(a in prop::collection::vec(-1.0f64..1.0, 1..30), b in prop::collection::vec(-1.0f64..1.0, 1..30)) {
            let ea = Edf::new(&a).unwrap();
            let eb = Edf::new(&b).unwrap();
            prop_assert_eq!(ks_distance(&ea, &eb, false), ks_distance(&eb, &ea, false));
        }
    }
}
