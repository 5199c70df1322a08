//! Simulation study on friedman1 data: every missing-data strategy under
//! every mechanism, missing-rate sweeps, prediction with missing test
//! entries, variable importance and split-search cost.

mod config;
mod output;
mod probe;
mod study;
mod svg;

use std::fmt;
use std::str::FromStr;

use assignforest::data::Mechanism;
use assignforest::Dataset;

pub use config::{ExperimentConfig, DESK_REPLICATES, FULL_REPLICATES};
pub use output::{emit_importance, emit_probe, emit_results, summarize, SummaryRow};
pub use probe::{complexity_probe, log_log_slope, ProbeRow};
pub use study::{
    forest_params, method_seed, run_importance_study, run_mechanism_study, run_method, run_rate_sweep,
    run_test_missing_sweep, ImportanceRecord,
    ReplicateData,
};

#[derive(Debug, thiserror::Error)]
pub enum BenchError {
    #[error(transparent)]
    Core(#[from] assignforest::Error),
    #[error("config: {0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, BenchError>;

/// Strategies compared in the study.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Method {
    /// native assignation of missing entries
    Ours,
    Mia,
    Median,
    Breiman,
    Ishioka,
    MissForest,
    Listwise,
    /// forest on the uncorrupted training set
    Comp,
}

impl Method {
    pub const ALL: [Method; 8] = [
        Method::Ours,
        Method::Mia,
        Method::Median,
        Method::Breiman,
        Method::Ishioka,
        Method::MissForest,
        Method::Listwise,
        Method::Comp,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Method::Ours => "OURS",
            Method::Mia => "MIA",
            Method::Median => "MEDIAN",
            Method::Breiman => "BREIMAN",
            Method::Ishioka => "ISHIOKA",
            Method::MissForest => "MISSFOREST",
            Method::Listwise => "LISTWISE",
            Method::Comp => "COMP",
        }
    }

    pub fn code(self) -> u64 {
        Method::ALL.iter().position(|&m| m == self).unwrap() as u64
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = BenchError;
    fn from_str(s: &str) -> Result<Self> {
        let upper = s.trim().to_ascii_uppercase();
        Method::ALL
            .iter()
            .copied()
            .find(|m| m.name() == upper)
            .ok_or_else(|| BenchError::Config(format!("unknown method '{s}'")))
    }
}

/// Test-set error of one method on one cell of the matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Metrics {
    pub mse: f64,
    pub bias: f64,
    pub cart_evaluations: usize,
}

/// One cell of the experiment matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentResult {
    pub method: Method,
    pub mechanism: Mechanism,
    /// the swept x4 rate (training or test, depending on the study)
    pub rate_point: f64,
    pub replicate: usize,
    /// `Err` carries the failure reason (for example listwise deletion
    /// leaving no rows)
    pub outcome: std::result::Result<Metrics, String>,
    pub wall_time: f64,
}

impl ExperimentResult {
    pub fn mse(&self) -> Option<f64> {
        self.outcome.as_ref().ok().map(|m| m.mse)
    }

    pub fn bias(&self) -> Option<f64> {
        self.outcome.as_ref().ok().map(|m| m.bias)
    }

    pub fn failed(&self) -> bool {
        self.outcome.is_err()
    }
}

/// Mean squared error and mean signed error of `predict` against the
/// responses of `test`, which hold the noiseless regression function.
pub fn mse_and_bias(test: &Dataset<f64>, predict: impl Fn(usize) -> Result<f64>) -> Result<(f64, f64)> {
    if test.is_empty() {
        return Err(assignforest::Error::EmptyDataset.into());
    }
    let mut se = 0.0;
    let mut e = 0.0;
    for i in 0..test.n_rows() {
        let d = predict(i)? - test.y(i);
        se += d * d;
        e += d;
    }
    let n = test.n_rows() as f64;
    Ok((se / n, e / n))
}
