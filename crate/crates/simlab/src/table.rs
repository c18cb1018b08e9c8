//! Rejection tables and their CSV and Markdown renderings.

use std::fmt::Write;

use residboot_core::empirical::StatKind;

use crate::config::Study;

/// One rejection (or exceedance) proportion.
#[derive(Debug, Clone, PartialEq)]
pub struct Cell {
    pub n: usize,
    pub scenario: String,
    pub stat: StatKind,
    pub scheme: &'static str,
    pub alpha: f64,
    pub proportion: f64,
    /// Binomial Monte Carlo standard error of `proportion`.
    pub se: f64,
    /// Simulations behind the proportion.
    pub n_sims: usize,
}

impl Cell {
    pub fn from_counts(n: usize, scenario: &str, stat: StatKind, scheme: &'static str, alpha: f64, hits: usize, sims: usize) -> Self {
        let proportion = if sims == 0 { 0.0 } else { hits as f64 / sims as f64 };
        let se = if sims == 0 { 0.0 } else { (proportion * (1.0 - proportion) / sims as f64).sqrt() };
        Cell {
            n,
            scenario: scenario.to_string(),
            stat,
            scheme,
            alpha,
            proportion,
            se,
            n_sims: sims,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RejectionTable {
    pub study: Study,
    pub n_boot: usize,
    pub seed: u64,
    pub cells: Vec<Cell>,
}

pub const CSV_HEADER: &str = "study,n,scenario,stat,scheme,alpha,proportion,se,n_sims,n_boot,seed";

impl RejectionTable {
    pub fn new(study: Study, n_boot: usize, seed: u64) -> Self {
        RejectionTable {
            study,
            n_boot,
            seed,
            cells: Vec::new(),
        }
    }

    pub fn push(&mut self, cell: Cell) {
        self.cells.push(cell);
    }

    /// The cell for the given coordinates, if present.
    pub fn find(&self, n: usize, scenario: &str, stat: StatKind, scheme: &str, alpha: f64) -> Option<&Cell> {
        self.cells.iter().find(|c| {
            c.n == n && c.scenario == scenario && c.stat == stat && c.scheme == scheme && (c.alpha - alpha).abs() < 1e-12
        })
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from(CSV_HEADER);
        out.push('\n');
        for c in &self.cells {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{:.6},{:.6},{},{},{}",
                self.study,
                c.n,
                c.scenario,
                c.stat.name(),
                c.scheme,
                c.alpha,
                c.proportion,
                c.se,
                c.n_sims,
                self.n_boot,
                self.seed
            );
        }
        out
    }

    /// One table per scenario: rows are sample size × statistic × scheme,
    /// columns are levels.
    pub fn to_markdown(&self) -> String {
        let mut out = String::new();
        let mut alphas: Vec<f64> = Vec::new();
        for c in &self.cells {
            if !alphas.iter().any(|a| (a - c.alpha).abs() < 1e-12) {
                alphas.push(c.alpha);
            }
        }
        let mut scenarios: Vec<&str> = Vec::new();
        for c in &self.cells {
            if !scenarios.contains(&c.scenario.as_str()) {
                scenarios.push(&c.scenario);
            }
        }
        let _ = writeln!(
            out,
            "# {} study ({} bootstrap samples, seed {})",
            self.study, self.n_boot, self.seed
        );
        for scenario in scenarios {
            let _ = writeln!(out, "\n## {scenario}\n");
            out.push_str("| n | statistic | sims |");
            for a in &alphas {
                let _ = write!(out, " {} |", level_label(*a));
            }
            out.push_str("\n|---|---|---|");
            out.push_str(&"---:|".repeat(alphas.len()));
            out.push('\n');
            let mut rows: Vec<(usize, StatKind, &'static str, usize)> = Vec::new();
            for c in self.cells.iter().filter(|c| c.scenario == scenario) {
                let key = (c.n, c.stat, c.scheme, c.n_sims);
                if !rows.contains(&key) {
                    rows.push(key);
                }
            }
            for (n, stat, scheme, sims) in rows {
                let _ = write!(out, "| {n} | {} | {sims} |", row_label(stat, scheme));
                for &a in &alphas {
                    match self.find(n, scenario, stat, scheme, a) {
                        Some(c) => {
                            let _ = write!(out, " {:.3} |", c.proportion);
                        }
                        None => out.push_str(" |"),
                    }
                }
                out.push('\n');
            }
        }
        out
    }
}

/// `KS_s` for the smooth scheme, `KS_0` for the non-smooth one.
pub fn row_label(stat: StatKind, scheme: &str) -> String {
    let suffix = if scheme == "smooth" { "s" } else { "0" };
    format!("{}_{suffix}", stat.name().to_uppercase())
}

/// `.05` style level labels.
fn level_label(alpha: f64) -> String {
    let s = format!("{alpha}");
    s.strip_prefix('0').map(str::to_string).unwrap_or(s)
}
