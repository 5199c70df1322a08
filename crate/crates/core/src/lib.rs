//! Random-forest regression that handles missing feature values inside the
//! CART split search.
//!
//! At every node the cut `(feature, position)` and the assignation of the
//! rows missing on that feature to a child are chosen jointly. Missing rows
//! are ordered by response, so an assignation reduces to a threshold count
//! and a side; the best threshold is found by a full scan or by a bisection
//! on the discrete gradient of the criterion.
//!
//! The crate also ships the usual baselines (median, listwise deletion,
//! proximity imputation, missForest, MIA splits) and generators for seven
//! missing-data mechanisms on the friedman1 benchmark.
//!
//! ```
//! use assignforest::{data, ForestParams, Forest64};
//!
//! let train = data::gen_friedman1::<f64>(100, 1.0, 7).unwrap();
//! let spec = data::MechanismSpec::friedman_study(data::Mechanism::Mcar, [0.2, 0.1, 0.2]).unwrap();
//! let train = data::apply_mechanism(&train, &spec, 7).unwrap();
//! let params = ForestParams { n_trees: 10, ..ForestParams::defaults(100, 5) }.with_seed(7);
//! let forest: Forest64 = assignforest::train_forest(&train, &params).unwrap();
//! let y = forest.predict_with_missing(&[Some(0.5), None, Some(0.5), Some(0.5), Some(0.5)], 1).unwrap();
//! assert!(y.is_finite());
//! ```

pub mod data;
mod error;
pub mod forest;
pub mod imputation;
mod scalar;
pub mod seed;
pub mod split;

pub use data::Dataset;
pub use error::{Error, Result};
pub use forest::{
    build_tree, train_forest, variable_importance, Forest, ForestParams, Importance, SplitRule, SquareMatrix, Tree,
    TreeNode,
};
pub use imputation::{
    breiman_impute, impute_median, ishioka_impute, listwise_delete, missforest_impute, ImputationMethod,
    ImputedDataset,
};
pub use scalar::Scalar;
pub use split::{Assignation, Cut, SearchMode, Side, SplitResult};

pub type Dataset64 = Dataset<f64>;
pub type Dataset32 = Dataset<f32>;
pub type Forest64 = Forest<f64>;
pub type Forest32 = Forest<f32>;
pub type ImputedDataset64 = ImputedDataset<f64>;
pub type ImputedDataset32 = ImputedDataset<f32>;
