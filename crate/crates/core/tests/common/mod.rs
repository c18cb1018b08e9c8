//! Independent oracles and the property checks built on them.
//!
//! Each check returns `Err` with a diagnostic instead of panicking so that
//! the same checks can back ordinary tests and a summary report.

#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use statrs::distribution::{ChiSquared, ContinuousCDF};

use residboot_core::bootstrap::{draw_by_inversion, draw_errors, BootstrapScheme, LinearBootstrap, NonparametricBootstrap, Replicate};
use residboot_core::distributions::ErrorDistribution;
use residboot_core::empirical::{cm_distance, ks_distance, DistributionFunction, Edf, SmoothedEdf};
use residboot_core::inference::TestResult;
use residboot_core::kernels::{IntegratedKernel, Kernel};
use residboot_core::regression::{Dataset, LeastSquares, NwSmoother, ParametricFamily};
use residboot_core::empirical::StatKind;

pub type Check = Result<(), String>;

pub const SEEDS: [u64; 3] = [11, 22, 33];

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn ensure(ok: bool, message: impl FnOnce() -> String) -> Check {
    if ok {
        Ok(())
    } else {
        Err(message())
    }
}

/// Two-sample Kolmogorov-Smirnov distance by merging the sorted samples.
pub fn two_sample_ks(a: &[f64], b: &[f64]) -> f64 {
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j, mut d) = (0, 0, 0.0f64);
    while i < a.len() && j < b.len() {
        let t = a[i].min(b[j]);
        while i < a.len() && a[i] <= t {
            i += 1;
        }
        while j < b.len() && b[j] <= t {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    d
}

/// Asymptotic p-value of the two-sample KS test,
/// `Q(λ) = 2 Σ (-1)^(k-1) exp(-2k²λ²)`.
pub fn two_sample_ks_p_value(d: f64, na: usize, nb: usize) -> f64 {
    let ne = (na * nb) as f64 / (na + nb) as f64;
    let lambda = (ne.sqrt() + 0.12 + 0.11 / ne.sqrt()) * d;
    if lambda < 0.2 {
        return 1.0;
    }
    let mut sum = 0.0;
    for k in 1..=100 {
        let k = k as f64;
        let term = (-2.0 * k * k * lambda * lambda).exp();
        sum += if k as u64 % 2 == 1 { term } else { -term };
        if term < 1e-16 {
            break;
        }
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

/// Pearson chi-square p-value for `counts` against equal cell probabilities.
pub fn uniform_chi_square_p_value(counts: &[u64]) -> f64 {
    let total: u64 = counts.iter().sum();
    let expected = total as f64 / counts.len() as f64;
    let stat: f64 = counts.iter().map(|&c| (c as f64 - expected).powi(2) / expected).sum();
    let dist = ChiSquared::new((counts.len() - 1) as f64).expect("degrees of freedom");
    1.0 - dist.cdf(stat)
}

fn residual_pool(n: usize, seed: u64) -> Edf {
    let law = ErrorDistribution::normal(0.0, 0.25).unwrap();
    let mut r = rng(seed);
    Edf::new(&law.sample_n(&mut r, n)).unwrap()
}

fn np_data(n: usize, seed: u64) -> Dataset {
    let law = ErrorDistribution::normal(0.0, 0.25).unwrap();
    let mut r = rng(seed);
    let x: Vec<f64> = (0..n).map(|_| r.random::<f64>()).collect();
    let y = x.iter().map(|&v| 2.0 * v + law.sample(&mut r)).collect();
    Dataset::new(x, y).unwrap()
}

/// Skew-normal with shape 0 samples like the standard normal.
pub fn skew_normal_zero_samples_like_normal() -> Check {
    let sn = ErrorDistribution::skew_normal(0.0).unwrap();
    let normal = ErrorDistribution::normal(0.0, 1.0).unwrap();
    for seed in SEEDS {
        let a = sn.sample_n(&mut rng(seed), 100_000);
        let b = normal.sample_n(&mut rng(seed + 1000), 100_000);
        let p = two_sample_ks_p_value(two_sample_ks(&a, &b), a.len(), b.len());
        ensure(p > 1e-3, || format!("seed {seed}: two-sample KS p-value {p:.2e}"))?;
    }
    Ok(())
}

/// Atom-plus-noise draws and numerical inversion of the smoothed EDF agree
/// in law.
pub fn smooth_draw_representations_agree() -> Check {
    let pool = residual_pool(60, 5);
    let s = 0.5 * 60f64.powf(-0.25);
    for seed in SEEDS {
        let scheme = BootstrapScheme::smooth(s, Kernel::Gaussian).unwrap();
        let mut direct = Vec::new();
        draw_errors(&scheme, &pool, 100_000, &mut rng(seed), &mut rng(seed + 1), &mut direct).unwrap();
        let smoothed = SmoothedEdf::new(&pool, IntegratedKernel::new(Kernel::Gaussian), s).unwrap();
        let inverted = draw_by_inversion(&smoothed, 100_000, &mut rng(seed + 2)).unwrap();
        let p = two_sample_ks_p_value(two_sample_ks(&direct, &inverted), direct.len(), inverted.len());
        ensure(p > 1e-3, || format!("seed {seed}: two-sample KS p-value {p:.2e}"))?;
    }
    Ok(())
}

/// Inverse-transform sampling through the EDF quantile, and the non-smooth
/// bootstrap draws, hit every atom with probability `1/n`.
pub fn inverse_transform_matches_resampling() -> Check {
    let pool = residual_pool(25, 6);
    let atoms = pool.points().to_vec();
    let index = |v: f64| atoms.iter().position(|&a| a == v).expect("draw outside the pool");
    for seed in SEEDS {
        let mut via_quantile = vec![0u64; atoms.len()];
        let mut r = rng(seed);
        for _ in 0..100_000 {
            let u = 1.0 - r.random::<f64>();
            via_quantile[index(pool.quantile(u).unwrap())] += 1;
        }
        let p = uniform_chi_square_p_value(&via_quantile);
        ensure(p > 1e-3, || format!("seed {seed}: quantile draws chi-square p-value {p:.2e}"))?;

        let mut draws = Vec::new();
        draw_errors(&BootstrapScheme::non_smooth(), &pool, 100_000, &mut rng(seed + 7), &mut rng(0), &mut draws).unwrap();
        let mut counts = vec![0u64; atoms.len()];
        for d in draws {
            counts[index(d)] += 1;
        }
        let p = uniform_chi_square_p_value(&counts);
        ensure(p > 1e-3, || format!("seed {seed}: bootstrap draws chi-square p-value {p:.2e}"))?;
    }
    Ok(())
}

fn grid(lo: f64, hi: f64, count: usize) -> impl Iterator<Item = f64> {
    (0..count).map(move |i| lo + (hi - lo) * i as f64 / (count - 1) as f64)
}

/// The exact KS distance agrees with a scan over a million grid points.
pub fn ks_matches_grid_scan() -> Check {
    // Two step functions on a coarse lattice: every constancy interval is
    // wider than the grid spacing, so the scan attains the supremum.
    let mut r = rng(7);
    let lattice = |r: &mut ChaCha8Rng, n: usize| -> Vec<f64> { (0..n).map(|_| (r.random_range(-400..400) as f64) / 1000.0).collect() };
    let a = Edf::new(&lattice(&mut r, 40)).unwrap();
    let b = Edf::new(&lattice(&mut r, 55)).unwrap();
    let scan = grid(-0.5, 0.5, 1_000_001).map(|y| (a.eval(y) - b.eval(y)).abs()).fold(0.0, f64::max);
    let exact = ks_distance(&a, &b, false);
    ensure((exact - scan).abs() < 1e-9, || format!("step pair: exact {exact} vs scan {scan}"))?;

    // Against a continuous law the scan can only undershoot, by at most the
    // density bound times the spacing.
    let law = ErrorDistribution::normal(0.0, 0.25).unwrap();
    let e = residual_pool(50, 8);
    let (lo, hi) = (-1.5, 1.5);
    let step = (hi - lo) / 1e6;
    let scan = grid(lo, hi, 1_000_001).map(|y| (e.eval(y) - law.cdf(y)).abs()).fold(0.0, f64::max);
    let exact = ks_distance(&e, &law, false);
    let slack = law.pdf(0.0) * step;
    ensure(scan <= exact + 1e-9 && exact - scan <= slack + 1e-9, || {
        format!("step vs normal: exact {exact} vs scan {scan} (slack {slack:.1e})")
    })
}

/// The CM integral agrees with a Monte Carlo average over draws from the
/// weighting EDF.
pub fn cm_matches_monte_carlo() -> Check {
    let a = residual_pool(40, 9);
    let law = ErrorDistribution::normal(0.05, 0.3).unwrap();
    let weight = residual_pool(70, 10);
    let exact = cm_distance(&a, &law, &weight, false);
    let mut r = rng(11);
    let draws = 1_000_000;
    let (mut sum, mut sum_sq) = (0.0, 0.0);
    for _ in 0..draws {
        let y = weight.points()[r.random_range(0..weight.len())];
        let d = (a.eval(y) - law.cdf(y)).powi(2);
        sum += d;
        sum_sq += d * d;
    }
    let mean = sum / draws as f64;
    let se = ((sum_sq / draws as f64 - mean * mean) / draws as f64).sqrt();
    ensure((exact - mean).abs() <= 4.0 * se, || format!("exact {exact} vs Monte Carlo {mean} ± {se:.1e}"))
}

/// Non-smooth draws average to the pool mean.
pub fn non_smooth_mean_matches_pool() -> Check {
    let pool = residual_pool(30, 12);
    let n = pool.len() as f64;
    let mean = pool.points().iter().sum::<f64>() / n;
    let var = pool.points().iter().map(|p| (p - mean).powi(2)).sum::<f64>() / n;
    let mut draws = Vec::new();
    draw_errors(&BootstrapScheme::non_smooth(), &pool, 1_000_000, &mut rng(13), &mut rng(0), &mut draws).unwrap();
    let avg = draws.iter().sum::<f64>() / draws.len() as f64;
    let se = (var / draws.len() as f64).sqrt();
    ensure((avg - mean).abs() <= 4.0 * se, || format!("average {avg} vs pool mean {mean} ± {se:.1e}"))
}

/// Step and smoothed EDFs are nondecreasing on a fine sorted grid.
pub fn distribution_functions_are_monotone() -> Check {
    let e = residual_pool(80, 14);
    let s = SmoothedEdf::new(&e, IntegratedKernel::new(Kernel::Gaussian), 0.1).unwrap();
    let ys: Vec<f64> = grid(-1.5, 1.5, 10_000).collect();
    for f in [&e as &dyn DistributionFunction, &s] {
        let mut prev = f.eval(ys[0]);
        for &y in &ys[1..] {
            let v = f.eval(y);
            ensure(v >= prev, || format!("decrease at {y}: {prev} -> {v}"))?;
            prev = v;
        }
    }
    Ok(())
}

/// The smoothed EDF approaches the step EDF as the bandwidth shrinks.
pub fn smoothing_gap_shrinks() -> Check {
    let e = residual_pool(100, 15);
    let gaps: Vec<f64> = [0.5, 0.1, 0.01]
        .iter()
        .map(|&s| {
            let sm = SmoothedEdf::new(&e, IntegratedKernel::new(Kernel::Gaussian), s).unwrap();
            ks_distance(&sm, &e, false)
        })
        .collect();
    ensure(gaps[0] > gaps[1] && gaps[1] > gaps[2], || format!("gaps {gaps:?}"))
}

/// NW weights sum to one, constants are reproduced, and shifting the
/// responses shifts the fit.
pub fn nw_weights_and_shifts() -> Check {
    let data = np_data(120, 16);
    let smoother = NwSmoother::new(data.x(), Kernel::Biweight, 0.12).unwrap();
    let shifted: Vec<f64> = data.y().iter().map(|y| y + 3.5).collect();
    let constant = vec![-1.25; data.len()];
    for x in grid(-0.1, 1.1, 241) {
        let w = smoother.weights_at(x);
        let (fit, fallback) = smoother.smooth_at(x, data.y());
        if fallback {
            continue;
        }
        let total: f64 = w.iter().sum();
        ensure((total - 1.0).abs() < 1e-12, || format!("weights at {x} sum to {total}"))?;
        let (moved, _) = smoother.smooth_at(x, &shifted);
        ensure((moved - fit - 3.5).abs() < 1e-10, || format!("shift at {x}: {moved} vs {fit} + 3.5"))?;
        let (c, _) = smoother.smooth_at(x, &constant);
        ensure((c + 1.25).abs() < 1e-12, || format!("constant at {x}: {c}"))?;
    }
    Ok(())
}

/// Least-squares residuals are orthogonal to the design, and the single
/// column fit is `Σxy / Σx²`.
pub fn least_squares_orthogonality() -> Check {
    let mut r = rng(17);
    for family in [ParametricFamily::LinearNoIntercept, ParametricFamily::Linear, ParametricFamily::Quadratic] {
        let x: Vec<f64> = (0..90).map(|_| r.random::<f64>()).collect();
        let y: Vec<f64> = x.iter().map(|&v| 1.0 - v + 3.0 * v * v + r.random::<f64>() - 0.5).collect();
        let design = family.design(&x).unwrap();
        let beta = LeastSquares::new(design.clone()).unwrap().solve(&y).unwrap();
        let mut fitted = vec![0.0; y.len()];
        design.mul_vec(&beta, &mut fitted);
        let resid: Vec<f64> = y.iter().zip(&fitted).map(|(a, b)| a - b).collect();
        let norm = y.iter().map(|v| v * v).sum::<f64>().sqrt();
        for (k, g) in design.t_mul_vec(&resid).iter().enumerate() {
            ensure(g.abs() <= 1e-8 * norm, || format!("{}: column {k} gives {g}", family.name()))?;
        }
        if family == ParametricFamily::LinearNoIntercept {
            let closed = x.iter().zip(&y).map(|(a, b)| a * b).sum::<f64>() / x.iter().map(|a| a * a).sum::<f64>();
            ensure((beta[0] - closed).abs() < 1e-12, || format!("slope {} vs closed form {closed}", beta[0]))?;
        }
    }
    Ok(())
}

/// The bootstrap residual identities: for the kernel model
/// `ε̂*ᵢ - ε*ᵢ = m̂(Xᵢ) - m̂*(Xᵢ)`, and for the linear model additionally
/// `β̂* - β̂ = (XᵀX)⁻¹Xᵀε*`.
pub fn bootstrap_residual_identities() -> Check {
    let data = np_data(200, 18);
    let np = NonparametricBootstrap::new(&data, Kernel::Biweight, 0.1).unwrap();
    let mut rep = Replicate::new();
    let schemes = [BootstrapScheme::non_smooth(), BootstrapScheme::smooth(0.15, Kernel::Gaussian).unwrap()];
    for (k, scheme) in schemes.iter().enumerate() {
        for b in 0..20 {
            np.replicate(scheme, &mut rng(100 + b), &mut rng(200 + b), &mut rep).unwrap();
            for i in 0..data.len() {
                let gap = rep.residuals[i] - rep.errors[i] - (np.fitted()[i] - rep.fitted[i]);
                ensure(gap.abs() < 1e-10, || format!("kernel model, scheme {k}, obs {i}: {gap:e}"))?;
            }
        }
    }
    let x: Vec<f64> = (1..=150).map(|i| i as f64 / 150.0).collect();
    let design = ParametricFamily::Linear.design(&x).unwrap();
    let law = ErrorDistribution::normal(0.0, 0.25).unwrap();
    let mut r = rng(19);
    let y: Vec<f64> = x.iter().map(|&v| 2.0 * v + law.sample(&mut r)).collect();
    let lin = LinearBootstrap::new(design.clone(), &y).unwrap();
    let ls = LeastSquares::new(design).unwrap();
    for (k, scheme) in schemes.iter().enumerate() {
        for b in 0..20 {
            lin.replicate(scheme, &mut rng(300 + b), &mut rng(400 + b), &mut rep).unwrap();
            let direct = ls.solve(&rep.errors).unwrap();
            for (j, d) in direct.iter().enumerate() {
                let gap = rep.coefficients[j] - lin.coefficients()[j] - d;
                ensure(gap.abs() < 1e-10, || format!("linear model, scheme {k}, coefficient {j}: {gap:e}"))?;
            }
            for i in 0..x.len() {
                let gap = rep.residuals[i] - rep.errors[i] - (lin.fitted()[i] - rep.fitted[i]);
                ensure(gap.abs() < 1e-10, || format!("linear model, scheme {k}, obs {i}: {gap:e}"))?;
            }
        }
    }
    Ok(())
}

/// Over repeated linear-model replicates, `β̂*` centres on `β̂` (the pool
/// of least-squares residuals with an intercept has mean zero).
pub fn linear_bootstrap_is_unbiased() -> Check {
    let x: Vec<f64> = (1..=100).map(|i| i as f64 / 100.0).collect();
    let design = ParametricFamily::Linear.design(&x).unwrap();
    let law = ErrorDistribution::normal(0.0, 0.25).unwrap();
    let mut r = rng(20);
    let y: Vec<f64> = x.iter().map(|&v| 1.0 + 2.0 * v + law.sample(&mut r)).collect();
    let lin = LinearBootstrap::new(design, &y).unwrap();
    let mut rep = Replicate::new();
    let reps = 4000;
    let mut draws: [Vec<f64>; 2] = [Vec::with_capacity(reps), Vec::with_capacity(reps)];
    for b in 0..reps as u64 {
        lin.replicate(&BootstrapScheme::non_smooth(), &mut rng(1000 + b), &mut rng(0), &mut rep).unwrap();
        for (column, &c) in draws.iter_mut().zip(&rep.coefficients) {
            column.push(c);
        }
    }
    for (j, column) in draws.iter().enumerate() {
        let m = column.iter().sum::<f64>() / reps as f64;
        let v = column.iter().map(|d| (d - m).powi(2)).sum::<f64>() / (reps - 1) as f64;
        let se = (v / reps as f64).sqrt();
        let target = lin.coefficients()[j];
        ensure((m - target).abs() <= 4.0 * se, || format!("coefficient {j}: mean {m} vs {target} ± {se:.1e}"))?;
    }
    Ok(())
}

/// Rejection at a level agrees with the p-value compared against the
/// realized level of the critical order statistic, and rejections are
/// monotone in the level.
pub fn decisions_match_p_values() -> Check {
    let mut r = rng(21);
    for case in 0..2000 {
        let b = r.random_range(1..60);
        let boot: Vec<f64> = (0..b).map(|_| (r.random_range(0..20) as f64) / 4.0).collect();
        let observed = (r.random_range(0..24) as f64) / 4.0;
        let result = TestResult::new(StatKind::Ks, observed, boot, 0.05).unwrap();
        let mut rejected_before = false;
        for alpha in [0.01, 0.025, 0.05, 0.1, 0.2, 0.5, 0.9] {
            let reject = result.rejects_at(alpha).unwrap();
            let realized = result.realized_level(alpha).unwrap();
            ensure(reject == (result.p_value <= realized), || {
                format!("case {case}, alpha {alpha}: reject {reject}, p {} vs realized {realized}", result.p_value)
            })?;
            ensure(!rejected_before || reject, || format!("case {case}: rejection not monotone at {alpha}"))?;
            rejected_before = reject;
        }
    }
    Ok(())
}

pub type NamedCheck = (&'static str, fn() -> Check);

/// Every property check, by name.
pub fn all() -> Vec<NamedCheck> {
    vec![
        ("skew-normal d=0 samples like the normal", skew_normal_zero_samples_like_normal),
        ("smooth draws: atom+noise vs inversion", smooth_draw_representations_agree),
        ("inverse transform vs resampling", inverse_transform_matches_resampling),
        ("KS vs 1e6-point grid", ks_matches_grid_scan),
        ("CM vs Monte Carlo integral", cm_matches_monte_carlo),
        ("non-smooth draws average to pool mean", non_smooth_mean_matches_pool),
        ("EDFs monotone on 1e4 points", distribution_functions_are_monotone),
        ("smoothing gap shrinks with s", smoothing_gap_shrinks),
        ("NW weights, constants and shifts", nw_weights_and_shifts),
        ("least-squares orthogonality", least_squares_orthogonality),
        ("bootstrap residual identities", bootstrap_residual_identities),
        ("linear bootstrap centred on the fit", linear_bootstrap_is_unbiased),
        ("decisions match p-values", decisions_match_p_values),
    ]
}
