use std::time::Instant;

use assignforest::data::{apply_mechanism, gen_friedman1, Mechanism, MechanismSpec};
use assignforest::seed::derive_path;
use assignforest::{
    listwise_delete, train_forest, variable_importance, Dataset, ForestParams, ImputationMethod, SplitRule,
};
use rayon::prelude::*;

use crate::{mse_and_bias, ExperimentConfig, ExperimentResult, Method, Metrics, Result};

const TRAIN_STREAM: u64 = 1;
const TEST_STREAM: u64 = 2;
const CORRUPT_STREAM: u64 = 3;
const METHOD_STREAM: u64 = 4;
const TEST_CORRUPT_STREAM: u64 = 5;
const IMPORTANCE_STREAM: u64 = 6;

/// The complete training and test sets of one replicate. Test responses
/// are the noiseless regression function.
#[derive(Debug, Clone)]
pub struct ReplicateData {
    pub train: Dataset<f64>,
    pub test: Dataset<f64>,
}

impl ReplicateData {
    pub fn generate(config: &ExperimentConfig, replicate: usize) -> Result<Self> {
        let r = replicate as u64;
        Ok(Self {
            train: gen_friedman1(config.n_train, config.noise_sd, derive_path(config.master_seed, &[TRAIN_STREAM, r]))?,
            test: gen_friedman1(config.n_test, 0.0, derive_path(config.master_seed, &[TEST_STREAM, r]))?,
        })
    }

    /// Training set corrupted by `mechanism` at `rates` (x1, x3, x4). The
    /// seed depends on the replicate and mechanism only, so every method and
    /// every sweep point sees the same draw stream.
    pub fn corrupt(&self, config: &ExperimentConfig, replicate: usize, mechanism: Mechanism, rates: [f64; 3]) -> Result<Dataset<f64>> {
        let spec = MechanismSpec::friedman_study(mechanism, rates)?;
        let seed = derive_path(config.master_seed, &[CORRUPT_STREAM, replicate as u64, mechanism.code()]);
        Ok(apply_mechanism(&self.train, &spec, seed)?)
    }
}

pub fn method_seed(config: &ExperimentConfig, replicate: usize, mechanism: Mechanism, method: Method) -> u64 {
    derive_path(config.master_seed, &[METHOD_STREAM, replicate as u64, mechanism.code(), method.code()])
}

pub fn forest_params(config: &ExperimentConfig, n: usize, rule: SplitRule, seed: u64) -> ForestParams {
    ForestParams { n_trees: config.n_trees, split_rule: rule, search_mode: config.search_mode, ..ForestParams::defaults(n, 5) }
        .with_seed(seed)
}

/// Fit `method` on the corrupted training set (or the complete one for
/// COMP) and score it on the complete test set.
pub fn run_method(
    config: &ExperimentConfig,
    data: &ReplicateData,
    corrupted: &Dataset<f64>,
    method: Method,
    seed: u64,
) -> std::result::Result<Metrics, String> {
    let fit = |train: &Dataset<f64>, rule: SplitRule, seed: u64| -> std::result::Result<Metrics, String> {
        let params = forest_params(config, train.n_rows(), rule, seed);
        let forest = train_forest(train, &params).map_err(|e| e.to_string())?;
        let (mse, bias) = mse_and_bias(&data.test, |i| {
            Ok(forest.predict_complete(&data.test.complete_row(i).expect("complete test set"))?)
        })
        .map_err(|e| e.to_string())?;
        Ok(Metrics { mse, bias, cart_evaluations: forest.cart_evaluations() })
    };
    let impute = |m: ImputationMethod| -> std::result::Result<Metrics, String> {
        let params = forest_params(config, corrupted.n_rows(), SplitRule::Assignation, derive_path(seed, &[1]));
        let completed = m.run(corrupted, &params, config.iterations).map_err(|e| e.to_string())?;
        fit(completed.completed(), SplitRule::Assignation, derive_path(seed, &[2]))
    };
    match method {
        Method::Ours => fit(corrupted, SplitRule::Assignation, seed),
        Method::Mia => fit(corrupted, SplitRule::Mia, seed),
        Method::Comp => fit(&data.train, SplitRule::Assignation, seed),
        Method::Median => impute(ImputationMethod::Median),
        Method::Breiman => impute(ImputationMethod::Breiman),
        Method::Ishioka => impute(ImputationMethod::Ishioka { k_neighbors: config.k_neighbors }),
        Method::MissForest => {
            let augmented = with_response_column(corrupted).map_err(|e| e.to_string())?;
            let params = forest_params(config, corrupted.n_rows(), SplitRule::Assignation, derive_path(seed, &[1]));
            let completed = ImputationMethod::MissForest
                .run(&augmented, &params, config.iterations)
                .map_err(|e| e.to_string())?;
            let p = corrupted.n_cols();
            let rows = (0..corrupted.n_rows())
                .map(|i| completed.completed().complete_row(i).expect("completed")[..p].to_vec())
                .collect();
            let train = Dataset::complete(rows, corrupted.response().to_vec())
                .and_then(|d| d.with_column_names(corrupted.column_names().to_vec()))
                .map_err(|e| e.to_string())?;
            fit(&train, SplitRule::Assignation, derive_path(seed, &[2]))
        }
        Method::Listwise => {
            let kept = listwise_delete(corrupted);
            if kept.is_empty() {
                return Err("listwise deletion left no rows".to_string());
            }
            fit(&kept, SplitRule::Assignation, seed)
        }
    }
}

/// Copy of `dataset` with the response appended as a last, fully observed
/// feature, so the per-column imputation forests can use it.
fn with_response_column(dataset: &Dataset<f64>) -> assignforest::Result<Dataset<f64>> {
    let rows = (0..dataset.n_rows())
        .map(|i| {
            let mut row = dataset.row(i);
            row.push(Some(dataset.y(i)));
            row
        })
        .collect();
    Dataset::from_options(rows, dataset.response().to_vec())
}

fn run_cell(
    config: &ExperimentConfig,
    methods: &[Method],
    replicate: usize,
    mechanism: Mechanism,
    rates: [f64; 3],
    data: &ReplicateData,
) -> Result<Vec<ExperimentResult>> {
    let corrupted = data.corrupt(config, replicate, mechanism, rates)?;
    Ok(methods
        .iter()
        .map(|&method| {
            let start = Instant::now();
            let outcome = run_method(config, data, &corrupted, method, method_seed(config, replicate, mechanism, method));
            ExperimentResult {
                method,
                mechanism,
                rate_point: rates[2],
                replicate,
                outcome,
                wall_time: start.elapsed().as_secs_f64(),
            }
        })
        .collect())
}

/// Records ordered by replicate, then the sweep points, mechanisms and methods
/// in configuration order.
fn run_matrix(config: &ExperimentConfig, methods: &[Method], sweep: &[[f64; 3]]) -> Result<Vec<ExperimentResult>> {
    config.validate()?;
    let cells: Vec<(usize, usize, Mechanism)> = (0..config.replicates)
        .flat_map(|r| (0..sweep.len()).flat_map(move |s| config.mechanisms.iter().map(move |&m| (r, s, m))))
        .collect();
    let data: Vec<ReplicateData> = (0..config.replicates)
        .into_par_iter()
        .map(|r| ReplicateData::generate(config, r))
        .collect::<Result<_>>()?;
    let nested: Vec<Vec<ExperimentResult>> = cells
        .par_iter()
        .map(|&(r, s, m)| run_cell(config, methods, r, m, sweep[s], &data[r]))
        .collect::<Result<_>>()?;
    Ok(nested.into_iter().flatten().collect())
}

/// Every configured method under every configured mechanism at the default rates.
pub fn run_mechanism_study(config: &ExperimentConfig) -> Result<Vec<ExperimentResult>> {
    run_matrix(config, &config.methods, &[config.rates])
}

/// Vary the x4 rate over `rate_sweep`, x1 and x3 fixed; listwise deletion
/// is left out.
pub fn run_rate_sweep(config: &ExperimentConfig) -> Result<Vec<ExperimentResult>> {
    if config.rate_sweep.is_empty() {
        return Err(crate::BenchError::Config("rate_sweep is empty".into()));
    }
    let methods: Vec<Method> = config.methods.iter().copied().filter(|&m| m != Method::Listwise).collect();
    let sweep: Vec<[f64; 3]> = config.rate_sweep.iter().map(|&r| [config.rates[0], config.rates[1], r]).collect();
    run_matrix(config, &methods, &sweep)
}

/// Train the native forest at `test_train_rates`, then corrupt the test set
/// on x4 at each `test_rate_sweep` point (x1 and x3 at the default rates)
/// and predict with the stochastic descent. The 0% point is the complete
/// test set scored with `predict_complete`.
pub fn run_test_missing_sweep(config: &ExperimentConfig) -> Result<Vec<ExperimentResult>> {
    config.validate()?;
    if config.test_rate_sweep.is_empty() {
        return Err(crate::BenchError::Config("test_rate_sweep is empty".into()));
    }
    let cells: Vec<(usize, Mechanism)> = (0..config.replicates)
        .flat_map(|r| config.mechanisms.iter().map(move |&m| (r, m)))
        .collect();
    let nested: Vec<Vec<ExperimentResult>> = cells
        .par_iter()
        .map(|&(r, mechanism)| -> Result<Vec<ExperimentResult>> {
            let data = ReplicateData::generate(config, r)?;
            let start = Instant::now();
            let corrupted = data.corrupt(config, r, mechanism, config.test_train_rates)?;
            let seed = method_seed(config, r, mechanism, Method::Ours);
            let params = forest_params(config, corrupted.n_rows(), SplitRule::Assignation, seed);
            let forest = train_forest(&corrupted, &params)?;
            let train_time = start.elapsed().as_secs_f64();
            let test_seed = derive_path(config.master_seed, &[TEST_CORRUPT_STREAM, r as u64, mechanism.code()]);
            config
                .test_rate_sweep
                .iter()
                .map(|&rate| {
                    let start = Instant::now();
                    let (mse, bias) = if rate == 0.0 {
                        mse_and_bias(&data.test, |i| Ok(forest.predict_complete(&data.test.complete_row(i).unwrap())?))?
                    } else {
                        let spec = MechanismSpec::friedman_study(mechanism, [config.rates[0], config.rates[1], rate])?;
                        let test = apply_mechanism(&data.test, &spec, test_seed)?;
                        let predictions = forest.predict_dataset(&test, derive_path(seed, &[1]))?;
                        mse_and_bias(&data.test, |i| Ok(predictions[i]))?
                    };
                    Ok(ExperimentResult {
                        method: Method::Ours,
                        mechanism,
                        rate_point: rate,
                        replicate: r,
                        outcome: Ok(Metrics { mse, bias, cart_evaluations: forest.cart_evaluations() }),
                        wall_time: train_time + start.elapsed().as_secs_f64(),
                    })
                })
                .collect()
        })
        .collect::<Result<_>>()?;
    Ok(nested.into_iter().flatten().collect())
}

/// Importance scores of one feature in one replicate.
#[derive(Debug, Clone, PartialEq)]
pub struct ImportanceRecord {
    pub replicate: usize,
    pub feature: usize,
    pub pct_inc_mse: f64,
    pub inc_node_purity: f64,
}

/// Variable importance of a forest trained on each replicate's complete
/// training set.
pub fn run_importance_study(config: &ExperimentConfig) -> Result<Vec<ImportanceRecord>> {
    config.validate()?;
    let nested: Vec<Vec<ImportanceRecord>> = (0..config.replicates)
        .into_par_iter()
        .map(|r| -> Result<Vec<ImportanceRecord>> {
            let data = ReplicateData::generate(config, r)?;
            let seed = derive_path(config.master_seed, &[IMPORTANCE_STREAM, r as u64]);
            let params = forest_params(config, data.train.n_rows(), SplitRule::Assignation, seed);
            let forest = train_forest(&data.train, &params)?;
            let imp = variable_importance(&forest, &data.train)?;
            Ok((0..data.train.n_cols())
                .map(|h| ImportanceRecord {
                    replicate: r,
                    feature: h,
                    pct_inc_mse: imp.pct_inc_mse[h],
                    inc_node_purity: imp.inc_node_purity[h],
                })
                .collect())
        })
        .collect::<Result<_>>()?;
    Ok(nested.into_iter().flatten().collect())
}
