//! Experiment configuration: a flat `key = value` text format, one setting
//! per line, `#` starting a comment.
//!
//! ```text
//! study     = symmetry
//! n         = 200, 1000
//! alpha     = 0.025, 0.05, 0.1
//! sims      = 500
//! boot      = 500
//! seed      = 7
//! scheme    = both
//! stats     = ks, cm
//! scenarios = d=0: normal(sd=0.25); d=2: skewnormal(d=2, sd=0.25)
//! ```
//!
//! A scenario is `label[: error law]`; without a law it uses the `errors`
//! setting. Labels of the form `a=<value>` also set the quadratic term of
//! the true regression function `m(x) = slope·x + a·x²`.

use std::fmt;
use std::str::FromStr;

use residboot_core::distributions::{ErrorDistribution, MixtureStandardization, MomentSpec};
use residboot_core::empirical::StatKind;
use residboot_core::kernels::{BandwidthRule, Kernel};
use residboot_core::regression::ParametricFamily;

/// A configuration problem, located by the field it concerns.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("{path}: {message}")]
pub struct ConfigError {
    pub path: String,
    pub message: String,
}

impl ConfigError {
    pub fn new(path: impl Into<String>, message: impl Into<String>) -> Self {
        ConfigError {
            path: path.into(),
            message: message.into(),
        }
    }
}

type Result<T> = std::result::Result<T, ConfigError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Study {
    /// Bootstrap approximation of the LS and MAD residual distances.
    Approx,
    /// Symmetry of the error distribution in the linear model.
    Symmetry,
    /// Goodness of fit of a parametric regression function.
    Gof,
}

impl Study {
    pub fn name(self) -> &'static str {
        match self {
            Study::Approx => "approx",
            Study::Symmetry => "symmetry",
            Study::Gof => "gof",
        }
    }
}

impl FromStr for Study {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "approx" | "approximation" => Ok(Study::Approx),
            "symmetry" => Ok(Study::Symmetry),
            "gof" => Ok(Study::Gof),
            other => Err(format!("unknown study `{other}` (expected approx, symmetry or gof)")),
        }
    }
}

impl fmt::Display for Study {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SchemeChoice {
    NonSmooth,
    Smooth,
    Both,
}

impl SchemeChoice {
    /// Whether the smooth scheme runs, and whether the non-smooth one does.
    pub fn runs(self) -> (bool, bool) {
        match self {
            SchemeChoice::NonSmooth => (false, true),
            SchemeChoice::Smooth => (true, false),
            SchemeChoice::Both => (true, true),
        }
    }
}

impl FromStr for SchemeChoice {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "nonsmooth" => Ok(SchemeChoice::NonSmooth),
            "smooth" => Ok(SchemeChoice::Smooth),
            "both" => Ok(SchemeChoice::Both),
            other => Err(format!("unknown scheme `{other}` (expected nonsmooth, smooth or both)")),
        }
    }
}

/// One column group of a study: an error law and a true regression function.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub label: String,
    /// The error-law specification as written.
    pub errors_spec: String,
    pub errors: ErrorDistribution,
    /// Quadratic term of `m(x) = slope·x + a·x²`.
    pub a: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub study: Study,
    pub ns: Vec<usize>,
    pub alphas: Vec<f64>,
    pub sims: usize,
    pub boot: usize,
    pub seed: u64,
    pub schemes: SchemeChoice,
    /// Regression kernel `k`.
    pub kernel: Kernel,
    /// Regression bandwidth `h`.
    pub h: BandwidthRule,
    /// Residual smoothing kernel `ℓ`.
    pub smoothing_kernel: Kernel,
    /// Residual smoothing bandwidth `s`.
    pub s: BandwidthRule,
    /// Null family of the goodness-of-fit study.
    pub family: ParametricFamily,
    /// Linear term of the true regression function.
    pub slope: f64,
    pub stats: Vec<StatKind>,
    pub scenarios: Vec<Scenario>,
    /// Re-center bootstrap residuals before building their EDF.
    pub center_bootstrap: bool,
    /// Share the uniform picks between the smooth and non-smooth schemes.
    pub coupled: bool,
    pub workers: usize,
}

const TABLE1_ALPHAS: [f64; 7] = [0.025, 0.05, 0.1, 0.3, 0.5, 0.7, 0.9];
const TEST_ALPHAS: [f64; 3] = [0.025, 0.05, 0.1];
const PAPER_NS: [usize; 5] = [50, 100, 200, 500, 1000];

impl ExperimentConfig {
    /// The paper's setting for a study at desk scale (500 simulations with
    /// 500 bootstrap samples each).
    pub fn defaults(study: Study) -> Self {
        let normal = "normal(sd=0.25)";
        let scenarios: Vec<(&str, &str)> = match study {
            Study::Approx => vec![("normal", normal)],
            Study::Symmetry => vec![
                ("d=0", normal),
                ("d=2", "skewnormal(d=2, sd=0.25)"),
                ("d=4", "skewnormal(d=4, sd=0.25)"),
            ],
            Study::Gof => vec![("a=0", normal), ("a=0.25", normal), ("a=0.5", normal)],
        };
        let scenarios = scenarios
            .into_iter()
            .map(|(label, spec)| make_scenario(label, spec, "scenarios").expect("built-in scenario"))
            .collect();
        ExperimentConfig {
            study,
            ns: PAPER_NS.to_vec(),
            alphas: if study == Study::Approx { TABLE1_ALPHAS.to_vec() } else { TEST_ALPHAS.to_vec() },
            sims: 500,
            boot: 500,
            seed: 20_190_417,
            schemes: SchemeChoice::Both,
            kernel: Kernel::Biweight,
            h: BandwidthRule::RegressionDefault,
            smoothing_kernel: Kernel::Gaussian,
            s: BandwidthRule::SmoothingDefault,
            family: ParametricFamily::LinearNoIntercept,
            slope: 2.0,
            stats: if study == Study::Approx {
                vec![StatKind::Ls, StatKind::Mad]
            } else {
                vec![StatKind::Ks, StatKind::Cm]
            },
            scenarios,
            center_bootstrap: false,
            coupled: true,
            workers: default_workers(),
        }
    }

    /// Parses a config file on top of the study defaults. When `expected` is
    /// given, a `study` line must agree with it.
    pub fn parse(text: &str, expected: Option<Study>) -> Result<Self> {
        let entries = parse_lines(text)?;
        let study = match (entries.iter().find(|e| e.key == "study"), expected) {
            (Some(e), expected) => {
                let s: Study = e.value.parse().map_err(|m: String| ConfigError::new(e.path(), m))?;
                if let Some(x) = expected {
                    if x != s {
                        return Err(ConfigError::new(
                            e.path(),
                            format!("config is for study `{s}` but `{x}` was requested"),
                        ));
                    }
                }
                s
            }
            (None, Some(x)) => x,
            (None, None) => return Err(ConfigError::new("study", "missing study")),
        };
        let mut cfg = Self::defaults(study);
        let mut errors_spec: Option<(String, String)> = None;
        let mut scenarios: Option<(String, String)> = None;
        for e in &entries {
            let path = e.path();
            let v = e.value.as_str();
            match e.key.as_str() {
                "study" => {}
                "n" => cfg.ns = parse_list(v, &path)?,
                "alpha" => cfg.alphas = parse_list(v, &path)?,
                "sims" => cfg.sims = parse_value(v, &path)?,
                "boot" => cfg.boot = parse_value(v, &path)?,
                "seed" => cfg.seed = parse_value(v, &path)?,
                "scheme" => cfg.schemes = v.parse().map_err(|m: String| ConfigError::new(&path, m))?,
                "kernel" => cfg.kernel = parse_kernel(v, &path)?,
                "h" => cfg.h = parse_bandwidth(v, BandwidthRule::RegressionDefault, &path)?,
                "smoothing_kernel" => cfg.smoothing_kernel = parse_kernel(v, &path)?,
                "s" => cfg.s = parse_bandwidth(v, BandwidthRule::SmoothingDefault, &path)?,
                "family" => {
                    cfg.family = ParametricFamily::from_name(v)
                        .ok_or_else(|| ConfigError::new(&path, format!("unknown family `{v}`")))?
                }
                "slope" => cfg.slope = parse_value(v, &path)?,
                "stats" => {
                    cfg.stats = split_list(v)
                        .map(|s| {
                            StatKind::from_name(s).ok_or_else(|| ConfigError::new(&path, format!("unknown statistic `{s}`")))
                        })
                        .collect::<Result<_>>()?
                }
                "errors" => errors_spec = Some((v.to_string(), path)),
                "scenarios" => scenarios = Some((v.to_string(), path)),
                "center_bootstrap" => cfg.center_bootstrap = parse_value(v, &path)?,
                "coupled" => cfg.coupled = parse_value(v, &path)?,
                "workers" => cfg.workers = parse_value(v, &path)?,
                other => return Err(ConfigError::new(path, format!("unknown key `{other}`"))),
            }
        }
        if errors_spec.is_some() || scenarios.is_some() {
            let (default_errors, errors_path) =
                errors_spec.unwrap_or_else(|| ("normal(sd=0.25)".to_string(), "errors".to_string()));
            parse_law(&default_errors, &errors_path)?;
            cfg.scenarios = match scenarios {
                Some((text, path)) => parse_scenarios(&text, &default_errors, &path)?,
                None => cfg
                    .scenarios
                    .iter()
                    .map(|s| make_scenario(&s.label, &default_errors, &errors_path))
                    .collect::<Result<_>>()?,
            };
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.ns.is_empty() {
            return Err(ConfigError::new("n", "at least one sample size is required"));
        }
        if let Some(n) = self.ns.iter().find(|&&n| n < 3) {
            return Err(ConfigError::new("n", format!("sample size {n} is too small (need at least 3)")));
        }
        if self.alphas.is_empty() {
            return Err(ConfigError::new("alpha", "at least one level is required"));
        }
        if let Some(a) = self.alphas.iter().find(|&&a| !(a > 0.0 && a < 1.0)) {
            return Err(ConfigError::new("alpha", format!("level {a} is outside (0, 1)")));
        }
        if self.sims == 0 {
            return Err(ConfigError::new("sims", "must be at least 1"));
        }
        if self.sims > u32::MAX as usize {
            return Err(ConfigError::new("sims", "must fit in 32 bits"));
        }
        if self.boot == 0 {
            return Err(ConfigError::new("boot", "must be at least 1"));
        }
        if self.boot >= crate::seed::MAX_BOOT {
            return Err(ConfigError::new("boot", format!("must be below {}", crate::seed::MAX_BOOT)));
        }
        if self.workers == 0 {
            return Err(ConfigError::new("workers", "must be at least 1"));
        }
        if self.stats.is_empty() {
            return Err(ConfigError::new("stats", "at least one statistic is required"));
        }
        let allowed: &[StatKind] = match self.study {
            Study::Approx => &[StatKind::Ls, StatKind::Mad],
            _ => &[StatKind::Ks, StatKind::Cm],
        };
        if let Some(s) = self.stats.iter().find(|s| !allowed.contains(s)) {
            return Err(ConfigError::new(
                "stats",
                format!("{} is not available in the {} study", s.name(), self.study),
            ));
        }
        if self.scenarios.is_empty() {
            return Err(ConfigError::new("scenarios", "at least one scenario is required"));
        }
        for (i, s) in self.scenarios.iter().enumerate() {
            if self.scenarios[..i].iter().any(|t| t.label == s.label) {
                return Err(ConfigError::new(format!("scenarios[{i}]"), format!("duplicate label `{}`", s.label)));
            }
        }
        if !self.slope.is_finite() {
            return Err(ConfigError::new("slope", "must be finite"));
        }
        for (name, rule) in [("h", self.h), ("s", self.s)] {
            if let BandwidthRule::Fixed(v) = rule {
                if !(v > 0.0 && v.is_finite()) {
                    return Err(ConfigError::new(name, format!("bandwidth {v} must be positive")));
                }
            }
        }
        Ok(())
    }
}

fn default_workers() -> usize {
    std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1)
}

struct Entry {
    line: usize,
    key: String,
    value: String,
}

impl Entry {
    fn path(&self) -> String {
        format!("{} (line {})", self.key, self.line)
    }
}

fn parse_lines(text: &str) -> Result<Vec<Entry>> {
    let mut entries: Vec<Entry> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| ConfigError::new(format!("line {}", i + 1), "expected `key = value`"))?;
        let key = key.trim().to_string();
        if key.is_empty() {
            return Err(ConfigError::new(format!("line {}", i + 1), "empty key"));
        }
        if let Some(prev) = entries.iter().find(|e| e.key == key) {
            return Err(ConfigError::new(
                format!("{key} (line {})", i + 1),
                format!("duplicate key, first set on line {}", prev.line),
            ));
        }
        entries.push(Entry {
            line: i + 1,
            key,
            value: value.trim().to_string(),
        });
    }
    Ok(entries)
}

fn split_list(v: &str) -> impl Iterator<Item = &str> {
    v.split(',').map(str::trim).filter(|s| !s.is_empty())
}

fn parse_value<T: FromStr>(v: &str, path: &str) -> Result<T> {
    v.trim()
        .parse()
        .map_err(|_| ConfigError::new(path, format!("cannot parse `{}`", v.trim())))
}

pub fn parse_list<T: FromStr>(v: &str, path: &str) -> Result<Vec<T>> {
    split_list(v).map(|s| parse_value(s, path)).collect()
}

fn parse_kernel(v: &str, path: &str) -> Result<Kernel> {
    Kernel::from_name(v).ok_or_else(|| ConfigError::new(path, format!("unknown kernel `{v}`")))
}

fn parse_bandwidth(v: &str, auto: BandwidthRule, path: &str) -> Result<BandwidthRule> {
    if v == "auto" {
        Ok(auto)
    } else {
        Ok(BandwidthRule::Fixed(parse_value(v, path)?))
    }
}

fn parse_scenarios(text: &str, default_errors: &str, path: &str) -> Result<Vec<Scenario>> {
    let parts: Vec<&str> = text.split(';').map(str::trim).filter(|s| !s.is_empty()).collect();
    parts
        .iter()
        .enumerate()
        .map(|(i, part)| {
            let entry_path = format!("{path}: scenarios[{i}]");
            match part.split_once(':') {
                Some((label, spec)) => make_scenario(label.trim(), spec.trim(), &entry_path),
                None => make_scenario(part, default_errors, &entry_path),
            }
        })
        .collect()
}

fn make_scenario(label: &str, spec: &str, path: &str) -> Result<Scenario> {
    if label.is_empty() || label.contains(',') {
        return Err(ConfigError::new(path, format!("invalid scenario label `{label}`")));
    }
    let a = match label.strip_prefix("a=") {
        Some(v) => parse_value(v, path)?,
        None => 0.0,
    };
    Ok(Scenario {
        label: label.to_string(),
        errors_spec: spec.to_string(),
        errors: parse_law(spec, &format!("{path}.errors"))?,
        a,
    })
}

/// A parsed `name(arg, key=value, ...)` term.
#[derive(Debug)]
struct Term<'a> {
    name: &'a str,
    positional: Vec<Term<'a>>,
    named: Vec<(&'a str, &'a str)>,
}

fn parse_term(s: &str) -> std::result::Result<Term<'_>, String> {
    let s = s.trim();
    let (name, args) = match s.find('(') {
        None => (s, ""),
        Some(open) => {
            let inner = s[open + 1..]
                .strip_suffix(')')
                .ok_or_else(|| format!("unbalanced parentheses in `{s}`"))?;
            (s[..open].trim(), inner)
        }
    };
    if name.is_empty() || !name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_') {
        return Err(format!("invalid distribution name in `{s}`"));
    }
    let mut term = Term {
        name,
        positional: Vec::new(),
        named: Vec::new(),
    };
    let mut depth = 0i32;
    let mut start = 0;
    let mut pieces = Vec::new();
    for (i, c) in args.char_indices() {
        match c {
            '(' => depth += 1,
            ')' => depth -= 1,
            ',' if depth == 0 => {
                pieces.push(&args[start..i]);
                start = i + 1;
            }
            _ => {}
        }
        if depth < 0 {
            return Err(format!("unbalanced parentheses in `{s}`"));
        }
    }
    if depth != 0 {
        return Err(format!("unbalanced parentheses in `{s}`"));
    }
    pieces.push(&args[start..]);
    for piece in pieces.into_iter().map(str::trim).filter(|p| !p.is_empty()) {
        match piece.split_once('=') {
            Some((k, v)) if !k.contains('(') => term.named.push((k.trim(), v.trim())),
            _ => term.positional.push(parse_term(piece)?),
        }
    }
    Ok(term)
}

impl Term<'_> {
    fn number(&self, key: &str) -> std::result::Result<Option<f64>, String> {
        match self.named.iter().find(|(k, _)| *k == key) {
            None => Ok(None),
            Some((_, v)) => v
                .parse::<f64>()
                .map(Some)
                .map_err(|_| format!("{}: cannot parse {key} = `{v}`", self.name)),
        }
    }

    fn check_keys(&self, allowed: &[&str], positional: usize) -> std::result::Result<(), String> {
        if let Some((k, _)) = self.named.iter().find(|(k, _)| !allowed.contains(k)) {
            return Err(format!("{}: unknown parameter `{k}`", self.name));
        }
        if self.positional.len() != positional {
            return Err(format!(
                "{}: expected {positional} component distribution(s), found {}",
                self.name,
                self.positional.len()
            ));
        }
        Ok(())
    }
}

fn standardized(law: ErrorDistribution, sd: Option<f64>) -> std::result::Result<ErrorDistribution, String> {
    match sd {
        None => Ok(law),
        Some(sd) => {
            let spec = MomentSpec::centered(sd).map_err(|e| e.to_string())?;
            law.standardize(spec).map_err(|e| e.to_string())
        }
    }
}

fn build_law(t: &Term<'_>) -> std::result::Result<ErrorDistribution, String> {
    let sd = t.number("sd")?;
    let core_err = |e: residboot_core::Error| format!("{}: {e}", t.name);
    match t.name {
        "normal" => {
            t.check_keys(&["sd", "mean"], 0)?;
            ErrorDistribution::normal(t.number("mean")?.unwrap_or(0.0), sd.unwrap_or(1.0)).map_err(core_err)
        }
        "skewnormal" => {
            t.check_keys(&["d", "sd"], 0)?;
            let d = t.number("d")?.ok_or("skewnormal: missing shape d")?;
            standardized(ErrorDistribution::skew_normal(d).map_err(core_err)?, sd)
        }
        "t3" => {
            t.check_keys(&["sd"], 0)?;
            standardized(ErrorDistribution::student_t3(), sd)
        }
        "gumbel" => {
            t.check_keys(&["loc", "scale", "sd"], 0)?;
            let law = ErrorDistribution::gumbel(t.number("loc")?.unwrap_or(0.0), t.number("scale")?.unwrap_or(1.0))
                .map_err(core_err)?;
            standardized(law, sd)
        }
        "mix" => {
            t.check_keys(&["p", "sd", "standardize"], 2)?;
            let p = t.number("p")?.ok_or("mix: missing weight p")?;
            let first = build_law(&t.positional[0])?;
            let second = build_law(&t.positional[1])?;
            let how = match t.named.iter().find(|(k, _)| *k == "standardize").map(|(_, v)| *v) {
                None | Some("whole") => MixtureStandardization::Whole,
                Some("components") => MixtureStandardization::Components,
                Some(other) => return Err(format!("mix: unknown standardize mode `{other}`")),
            };
            match sd {
                None => ErrorDistribution::mixture(p, first, second).map_err(core_err),
                Some(sd) => {
                    let spec = MomentSpec::centered(sd).map_err(core_err)?;
                    ErrorDistribution::standardized_mixture(p, first, second, spec, how).map_err(core_err)
                }
            }
        }
        other => Err(format!("unknown distribution `{other}`")),
    }
}

/// Parses an error-law specification such as `skewnormal(d=2, sd=0.25)` or
/// `mix(p=0.75, t3(sd=0.25), gumbel, sd=0.25)`.
pub fn parse_law(spec: &str, path: &str) -> Result<ErrorDistribution> {
    parse_term(spec)
        .and_then(|t| build_law(&t))
        .map_err(|m| ConfigError::new(path, m))
}
