//! The Monte Carlo driver.
//!
//! For every sample size and scenario, simulations run in parallel on a
//! dedicated thread pool. Each simulation draws its dataset from its own
//! stream, computes the observed statistics, runs the bootstrap replicates
//! of every configured scheme serially, and reports, per statistic and
//! scheme, the observed value, the bootstrap p-value, and the critical value
//! at every level. Results are gathered in simulation order, so output does
//! not depend on the number of workers.

use std::collections::BTreeMap;
use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use rand::Rng;
use rayon::prelude::*;

use residboot_core::bootstrap::{BootstrapScheme, NonparametricBootstrap, Replicate};
use residboot_core::empirical::{DistributionFunction, Edf, SmoothedEdf, StatKind};
use residboot_core::inference::{gof_statistics, symmetry_statistics, GofTest, KsCm, SymmetryTest, TestResult};
use residboot_core::math;
use residboot_core::regression::{Dataset, FixedDesign};

use crate::config::{ExperimentConfig, Scenario, Study};
use crate::seed::{boot_streams, data_stream};
use crate::table::{Cell, RejectionTable};

/// Simulations between checkpoint flushes.
pub const CHECKPOINT_EVERY: usize = 50;

/// Intervals of the cached smoothed residual distribution function.
const TABULATION_INTERVALS: usize = 1024;

#[derive(Debug, thiserror::Error)]
pub enum StudyError {
    #[error("simulation {sim} (n = {n}, scenario {scenario}) failed: {source}")]
    Worker {
        n: usize,
        scenario: String,
        sim: usize,
        source: residboot_core::Error,
    },
    #[error("checkpoint {path}: {message}")]
    Checkpoint { path: PathBuf, message: String },
    #[error("cannot start worker pool: {0}")]
    Pool(String),
}

/// One statistic under one scheme in one simulation.
#[derive(Debug, Clone, PartialEq)]
pub struct StatOutcome {
    pub stat: StatKind,
    pub smooth: bool,
    pub observed: f64,
    pub p_value: f64,
    /// Critical value at each configured level.
    pub critical: Vec<f64>,
}

impl StatOutcome {
    pub fn scheme_name(&self) -> &'static str {
        scheme_name(self.smooth)
    }

    pub fn reject(&self, alpha_index: usize) -> bool {
        self.observed > self.critical[alpha_index]
    }
}

pub fn scheme_name(smooth: bool) -> &'static str {
    if smooth {
        "smooth"
    } else {
        "nonsmooth"
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimOutcome {
    pub sim: usize,
    pub stats: Vec<StatOutcome>,
}

/// All simulations of one `(n, scenario)` cell, in simulation order.
#[derive(Debug, Clone, PartialEq)]
pub struct CellResult {
    pub n: usize,
    pub scenario: usize,
    pub outcomes: Vec<SimOutcome>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StudyResult {
    pub config: ExperimentConfig,
    pub cells: Vec<CellResult>,
}

/// A failed study, with everything completed before the failure.
#[derive(Debug)]
pub struct StudyFailure {
    pub error: StudyError,
    pub partial: Box<StudyResult>,
}

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    /// Append completed simulations here and resume from it.
    pub checkpoint: Option<PathBuf>,
    /// Report progress on standard error.
    pub progress: bool,
}

/// Runs the study without checkpointing.
pub fn run_study(cfg: &ExperimentConfig) -> Result<StudyResult, StudyFailure> {
    run_study_with(cfg, &RunOptions::default())
}

pub fn run_study_with(cfg: &ExperimentConfig, options: &RunOptions) -> Result<StudyResult, StudyFailure> {
    let mut result = StudyResult {
        config: cfg.clone(),
        cells: Vec::new(),
    };
    let fail = |error, partial| Err(StudyFailure { error, partial: Box::new(partial) });
    let pool = match rayon::ThreadPoolBuilder::new().num_threads(cfg.workers).build() {
        Ok(p) => p,
        Err(e) => return fail(StudyError::Pool(e.to_string()), result),
    };
    let mut checkpoint = match options.checkpoint.as_deref().map(|p| Checkpoint::open(p, cfg)).transpose() {
        Ok(c) => c,
        Err(e) => return fail(e, result),
    };
    for &n in &cfg.ns {
        for (si, scenario) in cfg.scenarios.iter().enumerate() {
            let mut done: BTreeMap<usize, SimOutcome> = checkpoint
                .as_mut()
                .map(|c| c.take_cell(n, si))
                .unwrap_or_default();
            let todo: Vec<usize> = (0..cfg.sims).filter(|s| !done.contains_key(s)).collect();
            let mut failure = None;
            for chunk in todo.chunks(CHECKPOINT_EVERY) {
                let outcomes: Vec<Result<SimOutcome, (usize, residboot_core::Error)>> = pool.install(|| {
                    chunk
                        .par_iter()
                        .map(|&sim| simulate(cfg, n, scenario, sim).map_err(|e| (sim, e)))
                        .collect()
                });
                let mut completed = Vec::with_capacity(chunk.len());
                for outcome in outcomes {
                    match outcome {
                        Ok(o) => completed.push(o),
                        Err((sim, source)) if failure.is_none() => {
                            failure = Some(StudyError::Worker {
                                n,
                                scenario: scenario.label.clone(),
                                sim,
                                source,
                            })
                        }
                        Err(_) => {}
                    }
                }
                if let Some(c) = checkpoint.as_mut() {
                    if let Err(e) = c.append(n, si, &completed) {
                        failure.get_or_insert(e);
                    }
                }
                done.extend(completed.into_iter().map(|o| (o.sim, o)));
                if failure.is_some() {
                    break;
                }
            }
            if options.progress {
                eprintln!(
                    "{}: n = {n}, {}: {} of {} simulations",
                    cfg.study,
                    scenario.label,
                    done.len(),
                    cfg.sims
                );
            }
            result.cells.push(CellResult {
                n,
                scenario: si,
                outcomes: done.into_values().collect(),
            });
            if let Some(error) = failure {
                return fail(error, result);
            }
        }
    }
    Ok(result)
}

impl StudyResult {
    /// Rejection (or exceedance) proportions per cell, statistic, scheme and
    /// level.
    pub fn table(&self) -> RejectionTable {
        let cfg = &self.config;
        let mut table = RejectionTable::new(cfg.study, cfg.boot, cfg.seed);
        for cell in &self.cells {
            let label = &cfg.scenarios[cell.scenario].label;
            let Some(first) = cell.outcomes.first() else { continue };
            for (k, template) in first.stats.iter().enumerate() {
                for (ai, &alpha) in cfg.alphas.iter().enumerate() {
                    let rejections = cell.outcomes.iter().filter(|o| o.stats[k].reject(ai)).count();
                    table.push(Cell::from_counts(
                        cell.n,
                        label,
                        template.stat,
                        template.scheme_name(),
                        alpha,
                        rejections,
                        cell.outcomes.len(),
                    ));
                }
            }
        }
        table
    }

    /// One row per simulation, statistic, scheme and level.
    pub fn records_csv(&self) -> String {
        let cfg = &self.config;
        let mut out = String::from("test,stat_kind,scheme,n,alpha,observed,critical,pvalue,reject,scenario,sim\n");
        for cell in &self.cells {
            let label = &cfg.scenarios[cell.scenario].label;
            for o in &cell.outcomes {
                for s in &o.stats {
                    for (ai, &alpha) in cfg.alphas.iter().enumerate() {
                        out.push_str(&format!(
                            "{},{},{},{},{},{},{},{},{},{},{}\n",
                            cfg.study,
                            s.stat.name(),
                            s.scheme_name(),
                            cell.n,
                            alpha,
                            s.observed,
                            s.critical[ai],
                            s.p_value,
                            s.reject(ai),
                            label,
                            o.sim
                        ));
                    }
                }
            }
        }
        out
    }
}

/// Schemes to run, smooth first, as `(smooth, scheme)`.
fn schemes(cfg: &ExperimentConfig, n: usize) -> Result<Vec<(bool, BootstrapScheme)>, residboot_core::Error> {
    let (smooth, non_smooth) = cfg.schemes.runs();
    let mut out = Vec::new();
    if smooth {
        let s = cfg.s.bandwidth(n, 1.0)?;
        out.push((true, BootstrapScheme::smooth(s, cfg.smoothing_kernel)?));
    }
    if non_smooth {
        out.push((false, BootstrapScheme::non_smooth()));
    }
    Ok(out)
}

fn truth(cfg: &ExperimentConfig, scenario: &Scenario, x: f64) -> f64 {
    cfg.slope * x + scenario.a * x * x
}

/// Runs simulation `sim` of the `(n, scenario)` cell.
pub fn simulate(cfg: &ExperimentConfig, n: usize, scenario: &Scenario, sim: usize) -> Result<SimOutcome, residboot_core::Error> {
    let mut rng = data_stream(cfg.seed, sim as u64);
    let x: Vec<f64> = match cfg.study {
        Study::Symmetry => (1..=n).map(|i| i as f64 / n as f64).collect(),
        Study::Approx | Study::Gof => (0..n).map(|_| rng.random::<f64>()).collect(),
    };
    let errors = scenario.errors.sample_n(&mut rng, n);
    let y: Vec<f64> = x.iter().zip(&errors).map(|(&xi, e)| truth(cfg, scenario, xi) + e).collect();
    let stats = match cfg.study {
        Study::Approx => approx_sim(cfg, scenario, x, y, sim)?,
        Study::Symmetry => symmetry_sim(cfg, x, y, sim)?,
        Study::Gof => gof_sim(cfg, x, y, sim)?,
    };
    Ok(SimOutcome { sim, stats })
}

fn outcome(cfg: &ExperimentConfig, stat: StatKind, smooth: bool, observed: f64, boot: Vec<f64>) -> Result<StatOutcome, residboot_core::Error> {
    let result = TestResult::new(stat, observed, boot, cfg.alphas[0])?;
    let critical = cfg.alphas.iter().map(|&a| result.critical_at(a)).collect::<Result<_, _>>()?;
    Ok(StatOutcome {
        stat,
        smooth,
        observed,
        p_value: result.p_value,
        critical,
    })
}

/// LS and MAD of `fhat` against `fref` at the sorted points.
fn ls_mad(fhat: &Edf, fref: &dyn DistributionFunction, points: &[f64], a: &mut Vec<f64>, b: &mut Vec<f64>) -> (f64, f64) {
    a.resize(points.len(), 0.0);
    b.resize(points.len(), 0.0);
    fhat.eval_sorted(points, a);
    fref.eval_sorted(points, b);
    let mut ls = 0.0;
    for (u, v) in a.iter_mut().zip(b.iter()) {
        let d = *u - v;
        ls += d * d;
        *u = d.abs();
    }
    // Median of the absolute differences; even counts average the middle pair.
    let n = a.len();
    let mid = n / 2;
    let (_, &mut upper, _) = a.select_nth_unstable_by(mid, f64::total_cmp);
    let median = if n % 2 == 1 {
        upper
    } else {
        let lower = a[..mid].iter().copied().fold(f64::NEG_INFINITY, f64::max);
        0.5 * (lower + upper)
    };
    (ls, n as f64 * median)
}

fn approx_sim(cfg: &ExperimentConfig, scenario: &Scenario, x: Vec<f64>, y: Vec<f64>, sim: usize) -> Result<Vec<StatOutcome>, residboot_core::Error> {
    let n = x.len();
    let (_, sd_x) = math::mean_sd(&x);
    let h = cfg.h.bandwidth(n, sd_x)?;
    let data = Dataset::new(x, y)?;
    let engine = NonparametricBootstrap::new(&data, cfg.kernel, h)?.with_centered_bootstrap(cfg.center_bootstrap);
    let (mut a, mut b) = (Vec::new(), Vec::new());
    // Each EDF is evaluated at its own atoms, on the observed side as on the
    // bootstrap side, so both statistics sit at the tops of the same steps.
    let (ls, mad) = ls_mad(engine.pool(), &scenario.errors, engine.pool().points(), &mut a, &mut b);

    let mut rep = Replicate::new();
    let mut out = Vec::new();
    for (smooth, scheme) in schemes(cfg, n)? {
        // The smooth bootstrap is compared with F̂ₛ,ₙ, the non-smooth one with F̂₀,ₙ.
        let tabulated = scheme
            .smoothed(engine.pool())?
            .map(|s: SmoothedEdf| s.tabulate(TABULATION_INTERVALS));
        let reference: &dyn DistributionFunction = match &tabulated {
            Some(t) => t,
            None => engine.pool(),
        };
        let (mut ls_boot, mut mad_boot) = (Vec::with_capacity(cfg.boot), Vec::with_capacity(cfg.boot));
        for bi in 0..cfg.boot {
            let (mut picks, mut noise) = boot_streams(cfg.seed, sim as u64, bi as u64, smooth, cfg.coupled);
            engine.replicate(&scheme, &mut picks, &mut noise, &mut rep)?;
            let (l, m) = ls_mad(&rep.edf, reference, rep.edf.points(), &mut a, &mut b);
            ls_boot.push(l);
            mad_boot.push(m);
        }
        for &stat in &cfg.stats {
            let (observed, boot) = match stat {
                StatKind::Ls => (ls, ls_boot.clone()),
                _ => (mad, mad_boot.clone()),
            };
            out.push(outcome(cfg, stat, smooth, observed, boot)?);
        }
    }
    Ok(out)
}

fn push_test_outcomes(
    cfg: &ExperimentConfig,
    smooth: bool,
    observed: KsCm,
    boot: &[KsCm],
    out: &mut Vec<StatOutcome>,
) -> Result<(), residboot_core::Error> {
    for &stat in &cfg.stats {
        let values = boot.iter().map(|v| v.get(stat)).collect::<Result<Vec<_>, _>>()?;
        out.push(outcome(cfg, stat, smooth, observed.get(stat)?, values)?);
    }
    Ok(())
}

fn symmetry_sim(cfg: &ExperimentConfig, x: Vec<f64>, y: Vec<f64>, sim: usize) -> Result<Vec<StatOutcome>, residboot_core::Error> {
    let n = x.len();
    let test = SymmetryTest::new(FixedDesign::single_column(&x)?, &y)?;
    let mut rep = Replicate::new();
    let mut out = Vec::new();
    for (smooth, scheme) in schemes(cfg, n)? {
        let scheme = scheme.symmetrized(true);
        let mut boot = Vec::with_capacity(cfg.boot);
        for bi in 0..cfg.boot {
            let (mut picks, mut noise) = boot_streams(cfg.seed, sim as u64, bi as u64, smooth, cfg.coupled);
            test.engine().replicate(&scheme, &mut picks, &mut noise, &mut rep)?;
            boot.push(symmetry_statistics(&rep.edf));
        }
        push_test_outcomes(cfg, smooth, test.observed(), &boot, &mut out)?;
    }
    Ok(out)
}

fn gof_sim(cfg: &ExperimentConfig, x: Vec<f64>, y: Vec<f64>, sim: usize) -> Result<Vec<StatOutcome>, residboot_core::Error> {
    let n = x.len();
    let (_, sd_x) = math::mean_sd(&x);
    let h = cfg.h.bandwidth(n, sd_x)?;
    let data = Dataset::new(x, y)?;
    let test = GofTest::with_centering(&data, cfg.family, cfg.kernel, h, cfg.center_bootstrap)?;
    let mut rep = Replicate::new();
    let mut out = Vec::new();
    for (smooth, scheme) in schemes(cfg, n)? {
        let mut boot = Vec::with_capacity(cfg.boot);
        for bi in 0..cfg.boot {
            let (mut picks, mut noise) = boot_streams(cfg.seed, sim as u64, bi as u64, smooth, cfg.coupled);
            test.engine().replicate(&scheme, &mut picks, &mut noise, &mut rep)?;
            boot.push(gof_statistics(&rep.edf, &rep.param_edf));
        }
        push_test_outcomes(cfg, smooth, test.observed(), &boot, &mut out)?;
    }
    Ok(out)
}

/// Identifies the settings that determine simulation results; `workers`
/// is deliberately excluded.
fn fingerprint(cfg: &ExperimentConfig) -> u64 {
    let mut canonical = cfg.clone();
    canonical.workers = 1;
    canonical.ns.clear();
    canonical.sims = 0;
    let text = format!("{canonical:?}");
    // FNV-1a: stable across builds, unlike the std hasher.
    text.bytes().fold(0xcbf2_9ce4_8422_2325, |h, b| (h ^ b as u64).wrapping_mul(0x0100_0000_01b3))
}

/// Append-only record of completed simulations.
struct Checkpoint {
    path: PathBuf,
    file: File,
    loaded: BTreeMap<(usize, usize), BTreeMap<usize, SimOutcome>>,
}

const CHECKPOINT_MAGIC: &str = "residboot-checkpoint v1";

impl Checkpoint {
    fn open(path: &Path, cfg: &ExperimentConfig) -> Result<Self, StudyError> {
        let err = |message: String| StudyError::Checkpoint {
            path: path.to_path_buf(),
            message,
        };
        let header = format!("{CHECKPOINT_MAGIC} fingerprint={:016x}", fingerprint(cfg));
        let mut loaded: BTreeMap<(usize, usize), BTreeMap<usize, SimOutcome>> = BTreeMap::new();
        let exists = path.exists() && std::fs::metadata(path).map(|m| m.len() > 0).unwrap_or(false);
        if exists {
            let reader = BufReader::new(File::open(path).map_err(|e| err(e.to_string()))?);
            let mut lines = reader.lines();
            let first = lines.next().transpose().map_err(|e| err(e.to_string()))?.unwrap_or_default();
            if first != header {
                return Err(err("written by a different configuration; remove it or change --checkpoint".into()));
            }
            for (i, line) in lines.enumerate() {
                let line = line.map_err(|e| err(e.to_string()))?;
                // A torn final line from an interrupted run is dropped.
                let Some((n, si, o)) = parse_checkpoint_line(&line, cfg) else {
                    if line.is_empty() {
                        continue;
                    }
                    eprintln!("checkpoint {}: ignoring malformed line {}", path.display(), i + 2);
                    continue;
                };
                loaded.entry((n, si)).or_default().insert(o.sim, o);
            }
        }
        let mut file = OpenOptions::new()
            .create(true)
            .append(true)
            .open(path)
            .map_err(|e| err(e.to_string()))?;
        if !exists {
            writeln!(file, "{header}").map_err(|e| err(e.to_string()))?;
        }
        Ok(Checkpoint {
            path: path.to_path_buf(),
            file,
            loaded,
        })
    }

    fn take_cell(&mut self, n: usize, scenario: usize) -> BTreeMap<usize, SimOutcome> {
        self.loaded.remove(&(n, scenario)).unwrap_or_default()
    }

    fn append(&mut self, n: usize, scenario: usize, outcomes: &[SimOutcome]) -> Result<(), StudyError> {
        let mut text = String::new();
        for o in outcomes {
            text.push_str(&format!("{n} {scenario} {}", o.sim));
            for s in &o.stats {
                let crit: Vec<String> = s.critical.iter().map(f64::to_string).collect();
                text.push_str(&format!(
                    " {}:{}:{}:{}:{}",
                    s.stat.name(),
                    u8::from(s.smooth),
                    s.observed,
                    s.p_value,
                    crit.join("/")
                ));
            }
            text.push('\n');
        }
        self.file
            .write_all(text.as_bytes())
            .and_then(|_| self.file.flush())
            .map_err(|e| StudyError::Checkpoint {
                path: self.path.clone(),
                message: e.to_string(),
            })
    }
}

fn parse_checkpoint_line(line: &str, cfg: &ExperimentConfig) -> Option<(usize, usize, SimOutcome)> {
    let mut fields = line.split(' ');
    let n = fields.next()?.parse().ok()?;
    let scenario = fields.next()?.parse().ok()?;
    let sim = fields.next()?.parse().ok()?;
    let mut stats = Vec::new();
    for f in fields {
        let mut parts = f.split(':');
        let stat = StatKind::from_name(parts.next()?)?;
        let smooth = match parts.next()? {
            "1" => true,
            "0" => false,
            _ => return None,
        };
        let observed = parts.next()?.parse().ok()?;
        let p_value = parts.next()?.parse().ok()?;
        let critical: Vec<f64> = parts.next()?.split('/').map(str::parse).collect::<Result<_, _>>().ok()?;
        if critical.len() != cfg.alphas.len() || parts.next().is_some() {
            return None;
        }
        stats.push(StatOutcome {
            stat,
            smooth,
            observed,
            p_value,
            critical,
        });
    }
    if stats.is_empty() {
        return None;
    }
    Some((n, scenario, SimOutcome { sim, stats }))
}
