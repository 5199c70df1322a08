//! Dataset completion strategies: median, listwise deletion, proximity
//! imputation (Breiman and the k-nearest variant of Ishioka) and missForest.

use std::fmt;
use std::str::FromStr;

use crate::data::Dataset;
use crate::error::{invalid, Error, Result};
use crate::forest::{train_forest, ForestParams};
use crate::{seed, Scalar};

/// One imputed cell value after a given iteration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceEntry<T> {
    pub iteration: usize,
    pub row: usize,
    pub col: usize,
    pub value: T,
}

/// A completed dataset together with the mask it came from.
#[derive(Debug, Clone, PartialEq)]
pub struct ImputedDataset<T> {
    source: Dataset<T>,
    completed: Dataset<T>,
    iteration: usize,
    forests_trained: usize,
    trace: Vec<TraceEntry<T>>,
}

impl<T: Scalar> ImputedDataset<T> {
    /// The input dataset, mask included.
    pub fn source(&self) -> &Dataset<T> {
        &self.source
    }

    /// Same rows with every masked cell replaced by its imputation; no cell is masked.
    pub fn completed(&self) -> &Dataset<T> {
        &self.completed
    }

    pub fn into_completed(self) -> Dataset<T> {
        self.completed
    }

    pub fn value(&self, row: usize, col: usize) -> T {
        self.completed.get(row, col).expect("completed dataset has no masked cells")
    }

    /// 1 for the median start, plus one per refinement round.
    pub fn iteration(&self) -> usize {
        self.iteration
    }

    pub fn forests_trained(&self) -> usize {
        self.forests_trained
    }

    /// Imputed values of every masked cell after each iteration.
    pub fn trace(&self) -> &[TraceEntry<T>] {
        &self.trace
    }

    fn record(&mut self) {
        let it = self.iteration;
        for i in 0..self.source.n_rows() {
            for h in 0..self.source.n_cols() {
                if self.source.is_missing(i, h) {
                    let value = self.value(i, h);
                    self.trace.push(TraceEntry { iteration: it, row: i, col: h, value });
                }
            }
        }
    }
}

fn median<T: Scalar>(mut values: Vec<T>) -> T {
    values.sort_by(|a, b| a.partial_cmp(b).expect("finite values"));
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        (values[n / 2 - 1] + values[n / 2]) / (T::one() + T::one())
    }
}

fn check_columns<T: Scalar>(dataset: &Dataset<T>) -> Result<()> {
    if dataset.is_empty() {
        return Err(Error::EmptyDataset);
    }
    for h in 0..dataset.n_cols() {
        if dataset.missing_in_column(h) == dataset.n_rows() {
            return Err(Error::FullyMissingColumn { column: h });
        }
    }
    Ok(())
}

/// Replace every masked cell by the median of its column's observed values.
pub fn impute_median<T: Scalar>(dataset: &Dataset<T>) -> Result<ImputedDataset<T>> {
    check_columns(dataset)?;
    let medians: Vec<Option<T>> = (0..dataset.n_cols())
        .map(|h| (dataset.missing_in_column(h) > 0).then(|| median(dataset.observed_column(h))))
        .collect();
    let completed = dataset.filled_with(|_, h| medians[h].expect("column has masked cells"));
    let mut out = ImputedDataset { source: dataset.clone(), completed, iteration: 1, forests_trained: 0, trace: Vec::new() };
    out.record();
    Ok(out)
}

/// Keep the rows without any masked cell, in order. The result may be empty.
pub fn listwise_delete<T: Scalar>(dataset: &Dataset<T>) -> Dataset<T> {
    let keep: Vec<usize> = (0..dataset.n_rows()).filter(|&i| !dataset.row_has_missing(i)).collect();
    dataset.select_rows(&keep)
}

/// Weighted mean of `values`; `None` when the weights sum to zero.
pub fn weighted_mean<T: Scalar>(weights: &[T], values: &[T]) -> Option<T> {
    let mut num = T::zero();
    let mut den = T::zero();
    for (&w, &v) in weights.iter().zip(values) {
        num = num + w * v;
        den = den + w;
    }
    (den > T::zero()).then(|| num / den)
}

/// The `k` rows other than `target` with the highest weight; ties go to the
/// smaller row index. Returned in ascending row order.
pub fn nearest_rows<T: Scalar>(weights: &[T], target: usize, k: usize) -> Vec<usize> {
    let mut order: Vec<usize> = (0..weights.len()).filter(|&i| i != target).collect();
    order.sort_by(|&a, &b| weights[b].partial_cmp(&weights[a]).expect("finite weights").then(a.cmp(&b)));
    order.truncate(k);
    order.sort_unstable();
    order
}

fn masked_cells<T: Scalar>(dataset: &Dataset<T>) -> Vec<(usize, usize)> {
    let mut cells = Vec::new();
    for i in 0..dataset.n_rows() {
        for h in 0..dataset.n_cols() {
            if dataset.is_missing(i, h) {
                cells.push((i, h));
            }
        }
    }
    cells
}

fn proximity_impute<T: Scalar>(
    dataset: &Dataset<T>,
    params: &ForestParams,
    iterations: usize,
    k_neighbors: Option<usize>,
) -> Result<ImputedDataset<T>> {
    let mut state = impute_median(dataset)?;
    let cells = masked_cells(dataset);
    if cells.is_empty() {
        return Ok(state);
    }
    for round in 0..iterations {
        let round_params = params.with_seed(seed::derive(params.seed, round as u64));
        let forest = train_forest(&state.completed, &round_params)?;
        state.forests_trained += 1;
        let prox = forest.proximity_matrix(&state.completed)?;
        let current = &state.completed;
        let updates: Vec<T> = cells
            .iter()
            .map(|&(j, h)| {
                let weights = prox.row(j);
                let update = match k_neighbors {
                    None => {
                        let (w, v): (Vec<T>, Vec<T>) = (0..dataset.n_rows())
                            .filter(|&i| !dataset.is_missing(i, h))
                            .map(|i| (weights[i], current.get(i, h).expect("completed")))
                            .unzip();
                        weighted_mean(&w, &v)
                    }
                    Some(k) => {
                        let rows = nearest_rows(weights, j, k);
                        let w: Vec<T> = rows.iter().map(|&i| weights[i]).collect();
                        let v: Vec<T> = rows.iter().map(|&i| current.get(i, h).expect("completed")).collect();
                        weighted_mean(&w, &v)
                    }
                };
                update.unwrap_or_else(|| current.get(j, h).expect("completed"))
            })
            .collect();
        let mut next = updates.iter();
        let mut lookup = std::collections::HashMap::with_capacity(cells.len());
        for &(j, h) in &cells {
            lookup.insert((j, h), *next.next().expect("one update per cell"));
        }
        state.completed = dataset.filled_with(|i, h| lookup[&(i, h)]);
        state.iteration += 1;
        state.record();
    }
    Ok(state)
}

/// Start from the median and run `iterations` rounds of: train a forest on
/// the completed data, then set every masked cell to the proximity-weighted
/// mean of the observed values of its column. A cell with zero proximity to
/// every observed row keeps its previous value.
pub fn breiman_impute<T: Scalar>(dataset: &Dataset<T>, params: &ForestParams, iterations: usize) -> Result<ImputedDataset<T>> {
    proximity_impute(dataset, params, iterations, None)
}

/// As [`breiman_impute`], but the weighted mean runs over the `k_neighbors`
/// rows of highest proximity, observed or imputed.
pub fn ishioka_impute<T: Scalar>(
    dataset: &Dataset<T>,
    params: &ForestParams,
    iterations: usize,
    k_neighbors: usize,
) -> Result<ImputedDataset<T>> {
    if k_neighbors == 0 {
        return Err(invalid("k_neighbors must be at least 1"));
    }
    proximity_impute(dataset, params, iterations, Some(k_neighbors))
}

/// Parameters for a forest predicting one column from the others on the
/// `n_obs` rows where it is observed; subsample scales with the row count.
fn column_params(params: &ForestParams, n: usize, n_obs: usize, p: usize, seed: u64) -> ForestParams {
    let subsample = ((params.subsample as f64 * n_obs as f64 / n as f64).ceil() as usize).clamp(1, n_obs);
    ForestParams {
        mtry: params.mtry.clamp(1, p - 1),
        subsample,
        nodesize: params.nodesize.min(subsample),
        seed,
        ..*params
    }
}

/// Start from the median; each sweep regresses every column with masked
/// cells (fewest missing first) on the other columns and overwrites its
/// masked cells with the forest predictions.
pub fn missforest_impute<T: Scalar>(dataset: &Dataset<T>, params: &ForestParams, iterations: usize) -> Result<ImputedDataset<T>> {
    let mut state = impute_median(dataset)?;
    let n = dataset.n_rows();
    let p = dataset.n_cols();
    let mut targets: Vec<usize> = (0..p).filter(|&h| dataset.missing_in_column(h) > 0).collect();
    if targets.is_empty() {
        return Ok(state);
    }
    if p < 2 {
        return Err(invalid("missForest needs at least two columns"));
    }
    targets.sort_by_key(|&h| (dataset.missing_in_column(h), h));

    for round in 0..iterations {
        for &h in &targets {
            let others: Vec<usize> = (0..p).filter(|&c| c != h).collect();
            let project = |i: usize| -> Vec<T> {
                others.iter().map(|&c| state.completed.get(i, c).expect("completed")).collect()
            };
            let obs: Vec<usize> = (0..n).filter(|&i| !dataset.is_missing(i, h)).collect();
            let miss: Vec<usize> = (0..n).filter(|&i| dataset.is_missing(i, h)).collect();
            let train = Dataset::complete(
                obs.iter().map(|&i| project(i)).collect(),
                obs.iter().map(|&i| dataset.get(i, h).expect("observed")).collect(),
            )?;
            let inner = column_params(params, n, obs.len(), p, seed::derive_path(params.seed, &[round as u64, h as u64]));
            let forest = train_forest(&train, &inner)?;
            state.forests_trained += 1;
            let predictions = miss
                .iter()
                .map(|&i| forest.predict_complete(&project(i)))
                .collect::<Result<Vec<T>>>()?;
            let mut it = predictions.into_iter();
            let updated: std::collections::HashMap<usize, T> = miss.iter().map(|&i| (i, it.next().expect("prediction"))).collect();
            let previous = state.completed.clone();
            state.completed = dataset.filled_with(|i, c| {
                if c == h {
                    updated[&i]
                } else {
                    previous.get(i, c).expect("completed")
                }
            });
        }
        state.iteration += 1;
        state.record();
    }
    Ok(state)
}

/// Imputation strategy selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ImputationMethod {
    Median,
    Breiman,
    Ishioka { k_neighbors: usize },
    MissForest,
}

impl ImputationMethod {
    pub const DEFAULT_K_NEIGHBORS: usize = 10;

    pub fn name(self) -> &'static str {
        match self {
            ImputationMethod::Median => "median",
            ImputationMethod::Breiman => "breiman",
            ImputationMethod::Ishioka { .. } => "ishioka",
            ImputationMethod::MissForest => "missforest",
        }
    }

    pub fn run<T: Scalar>(self, dataset: &Dataset<T>, params: &ForestParams, iterations: usize) -> Result<ImputedDataset<T>> {
        match self {
            ImputationMethod::Median => impute_median(dataset),
            ImputationMethod::Breiman => breiman_impute(dataset, params, iterations),
            ImputationMethod::Ishioka { k_neighbors } => ishioka_impute(dataset, params, iterations, k_neighbors),
            ImputationMethod::MissForest => missforest_impute(dataset, params, iterations),
        }
    }
}

impl fmt::Display for ImputationMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ImputationMethod {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "median" => Ok(ImputationMethod::Median),
            "breiman" => Ok(ImputationMethod::Breiman),
            "ishioka" => Ok(ImputationMethod::Ishioka { k_neighbors: Self::DEFAULT_K_NEIGHBORS }),
            "missforest" => Ok(ImputationMethod::MissForest),
            _ => Err(invalid(format!("unknown imputation method '{s}'"))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::gen_friedman1;

    fn column(values: &[Option<f64>]) -> Dataset<f64> {
        let rows = values.iter().map(|&v| vec![v]).collect();
        Dataset::from_options(rows, vec![0.0; values.len()]).unwrap()
    }

    #[test]
    fn median_odd_and_even() {
        let d = column(&[Some(1.0), Some(9.0), None, Some(2.0)]);
        assert_eq!(impute_median(&d).unwrap().value(2, 0), 2.0);
        let d = column(&[Some(1.0), None, Some(3.0)]);
        assert_eq!(impute_median(&d).unwrap().value(1, 0), 2.0);
    }

    #[test]
    fn median_without_masks_is_identity() {
        let d = gen_friedman1::<f64>(10, 1.0, 1).unwrap();
        let out = impute_median(&d).unwrap();
        assert_eq!(out.completed(), &d);
        assert_eq!(out.iteration(), 1);
    }

    #[test]
    fn fully_missing_column_is_error() {
        let d = column(&[None, None]);
        assert!(matches!(impute_median(&d), Err(Error::FullyMissingColumn { column: 0 })));
    }

    #[test]
    fn listwise_counts() {
        let d = gen_friedman1::<f64>(10, 1.0, 1).unwrap();
        assert_eq!(listwise_delete(&d), d);
        let masked = d.with_masked(&[(1, 0), (4, 2), (4, 3), (8, 4)]);
        assert_eq!(listwise_delete(&masked).n_rows(), 7);
        let all: Vec<(usize, usize)> = (0..10).map(|i| (i, i % 5)).collect();
        assert!(listwise_delete(&d.with_masked(&all)).is_empty());
    }

    #[test]
    fn weighted_means() {
        assert_eq!(weighted_mean(&[0.5, 0.5, 0.0], &[2.0, 4.0, 100.0]), Some(3.0));
        assert_eq!(weighted_mean(&[0.8, 0.2], &[1.0, 6.0]), Some(2.0));
        assert_eq!(weighted_mean(&[0.0, 0.0], &[1.0, 6.0]), None);
    }

    #[test]
    fn nearest_rows_break_ties_by_index() {
        assert_eq!(nearest_rows(&[0.5, 1.0, 0.5, 0.5], 1, 2), vec![0, 2]);
        assert_eq!(nearest_rows(&[0.1, 0.9, 0.3], 0, 5), vec![1, 2]);
    }

    #[test]
    fn single_leaf_forest_gives_column_mean() {
        let d = gen_friedman1::<f64>(8, 1.0, 2).unwrap().with_masked(&[(3, 1)]);
        let params = ForestParams { n_trees: 3, subsample: 8, nodesize: 8, ..ForestParams::defaults(8, 5) };
        let out = breiman_impute(&d, &params, 1).unwrap();
        let obs = d.observed_column(1);
        let mean = obs.iter().sum::<f64>() / obs.len() as f64;
        assert!((out.value(3, 1) - mean).abs() < 1e-12);
    }

    #[test]
    fn zero_iterations_is_median() {
        let d = gen_friedman1::<f64>(30, 1.0, 3).unwrap().with_masked(&[(0, 0), (5, 3), (7, 3)]);
        let params = ForestParams { n_trees: 5, ..ForestParams::defaults(30, 5) };
        let med = impute_median(&d).unwrap();
        for m in [ImputationMethod::Breiman, ImputationMethod::Ishioka { k_neighbors: 3 }, ImputationMethod::MissForest] {
            assert_eq!(m.run(&d, &params, 0).unwrap().completed(), med.completed());
        }
    }

    #[test]
    fn missforest_trains_one_forest_per_column_per_sweep() {
        let d = gen_friedman1::<f64>(40, 1.0, 4).unwrap().with_masked(&[(0, 3), (5, 3), (9, 3)]);
        let params = ForestParams { n_trees: 5, ..ForestParams::defaults(40, 5) };
        let out = missforest_impute(&d, &params, 3).unwrap();
        assert_eq!(out.forests_trained(), 3);
        assert_eq!(out.iteration(), 4);
        assert_eq!(missforest_impute(&d.select_rows(&[1, 2, 3]), &ForestParams::defaults(3, 5), 3).unwrap().forests_trained(), 0);
    }

    #[test]
    fn missforest_duplicate_column_pins_value() {
        let base = gen_friedman1::<f64>(30, 1.0, 5).unwrap();
        let rows: Vec<Vec<f64>> = (0..30)
            .map(|i| {
                let x = base.complete_row(i).unwrap();
                vec![x[0], x[1], x[0]]
            })
            .collect();
        let d = Dataset::complete(rows, base.response().to_vec()).unwrap().with_masked(&[(4, 2)]);
        let params = ForestParams { n_trees: 1, mtry: 2, subsample: 30, nodesize: 1, ..ForestParams::defaults(30, 3) };
        let out = missforest_impute(&d, &params, 1).unwrap();
        // the nearest observed row in column 0 decides the leaf
        let x0 = d.get(4, 0).unwrap();
        let leaf_rows: Vec<usize> = (0..30).filter(|&i| i != 4).collect();
        let inner = column_params(&params, 30, 29, 3, seed::derive_path(params.seed, &[0, 2]));
        let train = Dataset::complete(
            leaf_rows.iter().map(|&i| vec![d.get(i, 0).unwrap(), d.get(i, 1).unwrap()]).collect(),
            leaf_rows.iter().map(|&i| d.get(i, 2).unwrap()).collect(),
        )
        .unwrap();
        let forest = train_forest(&train, &inner).unwrap();
        let expected = forest.predict_complete(&[x0, d.get(4, 1).unwrap()]).unwrap();
        assert!((out.value(4, 2) - expected).abs() < 1e-9);
        let neighbours: Vec<f64> = leaf_rows.iter().map(|&i| d.get(i, 0).unwrap()).collect();
        assert!(neighbours.contains(&out.value(4, 2)));
    }
}
