use std::path::Path;

use assignforest::data::Mechanism;
use assignforest::SearchMode;
use serde::Deserialize;

use crate::{BenchError, Method, Result};

/// Experiment matrix settings. Columns are the friedman1 layout: the three
/// corrupted columns are x1, x3 and x4.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub n_train: usize,
    pub n_test: usize,
    pub replicates: usize,
    pub n_trees: usize,
    /// standard deviation of the Gaussian noise on training responses
    pub noise_sd: f64,
    pub mechanisms: Vec<Mechanism>,
    pub methods: Vec<Method>,
    /// missing fractions for x1, x3, x4
    pub rates: [f64; 3],
    /// x4 fractions for the rate sweep
    pub rate_sweep: Vec<f64>,
    /// x4 fractions of the test set for the test-missing sweep
    pub test_rate_sweep: Vec<f64>,
    /// training fractions for the test-missing sweep
    pub test_train_rates: [f64; 3],
    pub master_seed: u64,
    pub search_mode: SearchMode,
    /// refinement rounds for the iterative imputations
    pub iterations: usize,
    pub k_neighbors: usize,
}

pub const DESK_REPLICATES: usize = 20;
pub const FULL_REPLICATES: usize = 100;

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            n_train: 200,
            n_test: 2000,
            replicates: DESK_REPLICATES,
            n_trees: 100,
            noise_sd: 1.0,
            mechanisms: Mechanism::CORRUPTING.to_vec(),
            methods: Method::ALL.to_vec(),
            rates: [0.2, 0.1, 0.2],
            rate_sweep: vec![0.05, 0.1, 0.2, 0.4, 0.6, 0.8, 0.9, 0.95],
            test_rate_sweep: vec![0.0, 0.05, 0.1, 0.2, 0.4, 0.6, 0.8, 0.9, 0.95],
            test_train_rates: [0.2, 0.1, 0.6],
            master_seed: 0,
            search_mode: SearchMode::Dichotomy,
            iterations: 10,
            k_neighbors: 10,
        }
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    n_train: Option<usize>,
    n_test: Option<usize>,
    replicates: Option<usize>,
    full: Option<bool>,
    n_trees: Option<usize>,
    noise_sd: Option<f64>,
    mechanisms: Option<Vec<String>>,
    methods: Option<Vec<String>>,
    rates: Option<[f64; 3]>,
    rate_sweep: Option<Vec<f64>>,
    test_rate_sweep: Option<Vec<f64>>,
    test_train_rates: Option<[f64; 3]>,
    master_seed: Option<u64>,
    search_mode: Option<String>,
    iterations: Option<usize>,
    k_neighbors: Option<usize>,
}

impl ExperimentConfig {
    /// Parse a TOML configuration; absent keys keep their defaults.
    /// `full = true` switches to 100 replicates unless `replicates` is given.
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let raw: RawConfig = toml::from_str(text).map_err(|e| BenchError::Config(e.to_string()))?;
        let mut c = Self::default();
        if raw.full == Some(true) {
            c.replicates = FULL_REPLICATES;
        }
        macro_rules! take {
            ($($f:ident),*) => { $( if let Some(v) = raw.$f { c.$f = v; } )* };
        }
        take!(n_train, n_test, replicates, n_trees, noise_sd, rates, rate_sweep, test_rate_sweep, test_train_rates, master_seed, iterations, k_neighbors);
        if let Some(m) = raw.mechanisms {
            c.mechanisms = m.iter().map(|s| s.parse()).collect::<assignforest::Result<_>>()?;
        }
        if let Some(m) = raw.methods {
            c.methods = m.iter().map(|s| s.parse()).collect::<Result<_>>()?;
        }
        if let Some(s) = raw.search_mode {
            c.search_mode = s.parse()?;
        }
        c.validate()?;
        Ok(c)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| BenchError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(BenchError::Config(m));
        if self.n_train == 0 || self.n_test == 0 {
            return bad("n_train and n_test must be positive".into());
        }
        if self.replicates == 0 {
            return bad("replicates must be at least 1".into());
        }
        if self.n_trees == 0 {
            return bad("n_trees must be at least 1".into());
        }
        if self.noise_sd.is_nan() || self.noise_sd < 0.0 {
            return bad("noise_sd must be nonnegative".into());
        }
        if self.k_neighbors == 0 {
            return bad("k_neighbors must be at least 1".into());
        }
        let in_range = |r: &f64| (0.0..1.0).contains(r);
        for (name, list) in [
            ("rates", &self.rates[..]),
            ("rate_sweep", &self.rate_sweep[..]),
            ("test_rate_sweep", &self.test_rate_sweep[..]),
            ("test_train_rates", &self.test_train_rates[..]),
        ] {
            if !list.iter().all(in_range) {
                return bad(format!("{name}: every rate must lie in [0, 1)"));
            }
        }
        for (name, list) in [("rate_sweep", &self.rate_sweep), ("test_rate_sweep", &self.test_rate_sweep)] {
            if list.windows(2).any(|w| w[0] >= w[1]) {
                return bad(format!("{name} must be sorted ascending without repeats"));
            }
        }
        if self.mechanisms.contains(&Mechanism::Comp) {
            return bad("COMP is a method, not a corrupting mechanism".into());
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_config_is_default() {
        assert_eq!(ExperimentConfig::from_toml_str("").unwrap(), ExperimentConfig::default());
    }

    #[test]
    fn overrides_and_full_flag() {
        let c = ExperimentConfig::from_toml_str(
            "full = true\nmechanisms = [\"mcar\", \"DEPY\"]\nmethods = [\"ours\", \"missforest\"]\nsearch_mode = \"exhaustive\"\nrate_sweep = [0.9]\n",
        )
        .unwrap();
        assert_eq!(c.replicates, 100);
        assert_eq!(c.mechanisms, vec![Mechanism::Mcar, Mechanism::Depy]);
        assert_eq!(c.methods, vec![Method::Ours, Method::MissForest]);
        assert_eq!(c.search_mode, SearchMode::Exhaustive);
        assert_eq!(c.rate_sweep, vec![0.9]);
    }

    #[test]
    fn rejects_bad_values() {
        assert!(ExperimentConfig::from_toml_str("rates = [0.2, 1.0, 0.2]").is_err());
        assert!(ExperimentConfig::from_toml_str("rate_sweep = [0.5, 0.2]").is_err());
        assert!(ExperimentConfig::from_toml_str("replicates = 0").is_err());
        assert!(ExperimentConfig::from_toml_str("unknown = 1").is_err());
        assert!(ExperimentConfig::from_toml_str("methods = [\"magic\"]").is_err());
    }
}
