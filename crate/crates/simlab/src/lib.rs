//! Monte Carlo harness for residual bootstrap studies.
//!
//! Three studies are supported: how well the bootstrap approximates the
//! distribution of distances between the residual EDF and the true error
//! distribution (`approx`), the bootstrap test of error symmetry in linear
//! regression (`symmetry`), and the bootstrap goodness-of-fit test of a
//! parametric regression function (`gof`). A study is described by an
//! [`config::ExperimentConfig`], run by [`study::run_study`], and summarized
//! as a [`table::RejectionTable`].

pub mod config;
pub mod seed;
pub mod study;
pub mod table;

pub use config::{ConfigError, ExperimentConfig, SchemeChoice, Scenario, Study};
pub use study::{run_study, run_study_with, RunOptions, StudyError, StudyFailure, StudyResult};
pub use table::RejectionTable;
