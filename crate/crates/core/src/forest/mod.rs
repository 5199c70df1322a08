//! Random forests grown with missing-value assignation, stochastic
//! prediction for incomplete queries, proximity matrices and variable
//! importance.

mod format;
mod importance;
mod tree;

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

pub use format::{read_forest, write_forest, FORMAT_HEADER};
pub use importance::{variable_importance, Importance};
pub use tree::{Tree, TreeNode};

use crate::data::Dataset;
use crate::error::{invalid, Error, Result};
use crate::split::SearchMode;
use crate::{seed, Scalar};

/// How a node chooses its split when the cut feature has missing values.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SplitRule {
    /// joint optimisation of cut and assignation of missing rows
    Assignation,
    /// missing incorporated in attributes: missing rows move as one block
    Mia,
    /// plain CART, complete data only
    Classic,
}

impl SplitRule {
    pub fn name(self) -> &'static str {
        match self {
            SplitRule::Assignation => "assignation",
            SplitRule::Mia => "mia",
            SplitRule::Classic => "classic",
        }
    }
}

impl fmt::Display for SplitRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SplitRule {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "assignation" => Ok(SplitRule::Assignation),
            "mia" => Ok(SplitRule::Mia),
            "classic" => Ok(SplitRule::Classic),
            _ => Err(invalid(format!("unknown split rule '{s}'"))),
        }
    }
}

impl SearchMode {
    pub fn name(self) -> &'static str {
        match self {
            SearchMode::Exhaustive => "exhaustive",
            SearchMode::Dichotomy => "dichotomy",
        }
    }
}

impl fmt::Display for SearchMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SearchMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "exhaustive" => Ok(SearchMode::Exhaustive),
            "dichotomy" => Ok(SearchMode::Dichotomy),
            _ => Err(invalid(format!("unknown search mode '{s}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ForestParams {
    pub n_trees: usize,
    pub mtry: usize,
    /// rows drawn per tree (`a_n`)
    pub subsample: usize,
    /// a cell with at most this many rows is final
    pub nodesize: usize,
    pub replacement: bool,
    pub search_mode: SearchMode,
    pub split_rule: SplitRule,
    pub seed: u64,
}

impl ForestParams {
    /// Regression defaults for `n` rows and `p` features: 100 trees,
    /// `mtry = max(1, floor(p/3))`, `a_n = ceil(0.632 n)` without
    /// replacement, nodesize 5.
    pub fn defaults(n: usize, p: usize) -> Self {
        let subsample = ((0.632 * n as f64).ceil() as usize).clamp(1, n.max(1));
        Self {
            n_trees: 100,
            mtry: (p / 3).max(1),
            subsample,
            nodesize: 5.min(subsample),
            replacement: false,
            search_mode: SearchMode::Dichotomy,
            split_rule: SplitRule::Assignation,
            seed: 0,
        }
    }

    pub fn with_seed(self, seed: u64) -> Self {
        Self { seed, ..self }
    }

    pub fn validate(&self, n: usize, p: usize) -> Result<()> {
        if n == 0 {
            return Err(Error::EmptyDataset);
        }
        if self.n_trees == 0 {
            return Err(invalid("n_trees must be at least 1"));
        }
        if self.mtry == 0 || self.mtry > p {
            return Err(invalid(format!("mtry must lie in 1..={p}, got {}", self.mtry)));
        }
        if self.subsample == 0 || self.subsample > n {
            return Err(invalid(format!("subsample must lie in 1..={n}, got {}", self.subsample)));
        }
        if self.nodesize == 0 || self.nodesize > self.subsample {
            return Err(invalid(format!(
                "nodesize must lie in 1..={}, got {}",
                self.subsample, self.nodesize
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Forest<T> {
    pub(crate) trees: Vec<Tree<T>>,
    pub(crate) params: ForestParams,
    pub(crate) n_features: usize,
    pub(crate) n_train: usize,
}

/// Seed of tree `k`: the master seed xor a hash of `k`.
pub fn tree_seed(master: u64, k: usize) -> u64 {
    seed::derive(master, k as u64)
}

fn check_inputs<T: Scalar>(dataset: &Dataset<T>, params: &ForestParams) -> Result<()> {
    params.validate(dataset.n_rows(), dataset.n_cols())?;
    if params.split_rule == SplitRule::Classic && dataset.has_missing() {
        return Err(invalid("the classic split rule needs a complete dataset"));
    }
    Ok(())
}

fn draw_bag(n: usize, params: &ForestParams, rng: &mut rand_chacha::ChaCha8Rng) -> Vec<usize> {
    use rand::Rng;
    let mut bag: Vec<usize> = if params.replacement {
        (0..params.subsample).map(|_| rng.random_range(0..n)).collect()
    } else {
        rand::seq::index::sample(rng, n, params.subsample).into_vec()
    };
    bag.sort_unstable();
    bag
}

/// Build one tree: draw the bag and the per-node feature subsets from `tree_seed`.
pub fn build_tree<T: Scalar>(dataset: &Dataset<T>, params: &ForestParams, tree_seed: u64) -> Result<Tree<T>> {
    check_inputs(dataset, params)?;
    let mut rng = seed::rng(tree_seed);
    let bag = draw_bag(dataset.n_rows(), params, &mut rng);
    Ok(tree::grow(dataset, bag, params, &mut rng))
}

/// Train `params.n_trees` trees in parallel; the result does not depend on
/// the number of threads.
pub fn train_forest<T: Scalar>(dataset: &Dataset<T>, params: &ForestParams) -> Result<Forest<T>> {
    check_inputs(dataset, params)?;
    let trees = (0..params.n_trees)
        .into_par_iter()
        .map(|k| {
            let mut rng = seed::rng(tree_seed(params.seed, k));
            let bag = draw_bag(dataset.n_rows(), params, &mut rng);
            tree::grow(dataset, bag, params, &mut rng)
        })
        .collect();
    Ok(Forest { trees, params: *params, n_features: dataset.n_cols(), n_train: dataset.n_rows() })
}

/// Square matrix stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct SquareMatrix<T> {
    n: usize,
    data: Vec<T>,
}

impl<T: Copy> SquareMatrix<T> {
    pub fn from_fn(n: usize, f: impl Fn(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                data.push(f(i, j));
            }
        }
        Self { n, data }
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> T {
        self.data[i * self.n + j]
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.n..(i + 1) * self.n]
    }
}

const PROXIMITY_STREAM: u64 = 0x5052_4f58;

impl<T: Scalar> Forest<T> {
    pub fn trees(&self) -> &[Tree<T>] {
        &self.trees
    }

    pub fn params(&self) -> &ForestParams {
        &self.params
    }

    pub fn n_features(&self) -> usize {
        self.n_features
    }

    pub fn n_train(&self) -> usize {
        self.n_train
    }

    /// Total criterion evaluations spent growing the forest.
    pub fn cart_evaluations(&self) -> usize {
        self.trees.iter().map(|t| t.cart_evaluations).sum()
    }

    fn average(&self, per_tree: impl Iterator<Item = T>) -> T {
        let sum: T = per_tree.sum();
        sum / T::from_usize_lossy(self.trees.len())
    }

    /// Average of the leaf means reached by `x` (left iff `x[h] < z`).
    pub fn predict_complete(&self, x: &[T]) -> Result<T> {
        if x.len() != self.n_features {
            return Err(invalid(format!("query has {} coordinates, forest expects {}", x.len(), self.n_features)));
        }
        Ok(self.average(self.trees.iter().map(|t| t.predict_complete(x))))
    }

    /// Prediction for a query with missing coordinates. On a cut whose
    /// feature is missing, tree `k` goes left with probability `N_L / N`
    /// using a stream derived from `(seed, k)`; when `N = 0` it returns the
    /// cell mean. Fully observed queries give exactly `predict_complete`.
    pub fn predict_with_missing(&self, x: &[Option<T>], seed: u64) -> Result<T> {
        if x.len() != self.n_features {
            return Err(invalid(format!("query has {} coordinates, forest expects {}", x.len(), self.n_features)));
        }
        Ok(self.average(self.trees.iter().enumerate().map(|(k, t)| {
            let mut rng = crate::seed::rng(crate::seed::derive(seed, k as u64));
            t.predict_with_missing(x, &mut rng)
        })))
    }

    /// Predict every row of `dataset`, using the stochastic descent on rows
    /// with missing cells; row `i` uses seed stream `(seed, i)`.
    pub fn predict_dataset(&self, dataset: &Dataset<T>, seed: u64) -> Result<Vec<T>> {
        (0..dataset.n_rows())
            .into_par_iter()
            .map(|i| match dataset.complete_row(i) {
                Some(x) => self.predict_complete(&x),
                None => self.predict_with_missing(&dataset.row(i), crate::seed::derive(seed, i as u64)),
            })
            .collect()
    }

    /// Final-cell identifier of every training row in tree `k`. Bag rows
    /// keep the leaf they were assigned to during training; other rows
    /// descend stochastically.
    fn cells_of(&self, k: usize, dataset: &Dataset<T>) -> Vec<usize> {
        let tree = &self.trees[k];
        let n = dataset.n_rows();
        let mut cell = vec![usize::MAX; n];
        for (id, node) in tree.nodes.iter().enumerate() {
            if let TreeNode::Leaf { rows, .. } = node {
                for &i in rows {
                    if cell[i] == usize::MAX {
                        cell[i] = id;
                    }
                }
            }
        }
        for (i, c) in cell.iter_mut().enumerate() {
            if *c == usize::MAX {
                let mut rng = seed::rng(seed::derive_path(self.params.seed, &[PROXIMITY_STREAM, k as u64, i as u64]));
                *c = match tree.descend(&dataset.row(i), &mut rng) {
                    tree::Landing::Leaf(id) => id,
                    tree::Landing::Stopped(id) => id,
                };
            }
        }
        cell
    }

    /// Fraction of trees in which rows `i` and `j` share a final cell.
    /// `dataset` must be the training dataset (same rows, same order).
    pub fn proximity_matrix(&self, dataset: &Dataset<T>) -> Result<SquareMatrix<T>> {
        if dataset.n_rows() != self.n_train || dataset.n_cols() != self.n_features {
            return Err(invalid("proximity needs the dataset the forest was trained on"));
        }
        let n = dataset.n_rows();
        let counts = (0..self.trees.len())
            .into_par_iter()
            .map(|k| {
                let cells = self.cells_of(k, dataset);
                let mut groups: std::collections::HashMap<usize, Vec<usize>> = std::collections::HashMap::new();
                for (i, &c) in cells.iter().enumerate() {
                    groups.entry(c).or_default().push(i);
                }
                let mut shared = vec![0u32; n * n];
                for members in groups.values() {
                    for &i in members {
                        for &j in members {
                            shared[i * n + j] += 1;
                        }
                    }
                }
                shared
            })
            .reduce(
                || vec![0u32; n * n],
                |mut a, b| {
                    for (x, y) in a.iter_mut().zip(b) {
                        *x += y;
                    }
                    a
                },
            );
        let m = T::from_usize_lossy(self.trees.len());
        Ok(SquareMatrix::from_fn(n, |i, j| T::from_usize_lossy(counts[i * n + j] as usize) / m))
    }
}

/// Free-function form of [`Forest::predict_complete`].
pub fn predict_complete<T: Scalar>(forest: &Forest<T>, x: &[T]) -> Result<T> {
    forest.predict_complete(x)
}

/// Free-function form of [`Forest::predict_with_missing`].
pub fn predict_with_missing<T: Scalar>(forest: &Forest<T>, x: &[Option<T>], seed: u64) -> Result<T> {
    forest.predict_with_missing(x, seed)
}

/// Free-function form of [`Forest::proximity_matrix`].
pub fn proximity_matrix<T: Scalar>(forest: &Forest<T>, dataset: &Dataset<T>) -> Result<SquareMatrix<T>> {
    forest.proximity_matrix(dataset)
}

#[cfg(test)]
mod tests;
