use rand::seq::SliceRandom;

use super::{Forest, TreeNode};
use crate::data::Dataset;
use crate::error::{invalid, Result};
use crate::{seed, Scalar};

/// Per-feature importance scores.
#[derive(Debug, Clone, PartialEq)]
pub struct Importance<T> {
    /// mean out-of-bag MSE increase under permutation, divided by its
    /// standard error across trees
    pub pct_inc_mse: Vec<T>,
    /// `N(A) * gain` summed over cuts on the feature, per tree
    pub inc_node_purity: Vec<T>,
}

const IMPORTANCE_STREAM: u64 = 0x494d_504f;

fn mse<T: Scalar>(pred: impl Iterator<Item = (T, T)>) -> T {
    let mut n = 0usize;
    let mut acc = T::zero();
    for (p, y) in pred {
        acc = acc + (p - y) * (p - y);
        n += 1;
    }
    acc / T::from_usize_lossy(n)
}

/// Permutation and node-purity importance on a complete dataset. Trees
/// without out-of-bag rows do not contribute to `pct_inc_mse`.
pub fn variable_importance<T: Scalar>(forest: &Forest<T>, dataset: &Dataset<T>) -> Result<Importance<T>> {
    if dataset.has_missing() {
        return Err(invalid("variable importance needs a complete dataset"));
    }
    if dataset.n_cols() != forest.n_features || dataset.n_rows() != forest.n_train {
        return Err(invalid("variable importance needs the dataset the forest was trained on"));
    }
    let n = dataset.n_rows();
    let p = dataset.n_cols();
    let rows: Vec<Vec<T>> = (0..n).map(|i| dataset.complete_row(i).expect("complete")).collect();

    let mut diffs: Vec<Vec<T>> = vec![Vec::new(); p];
    for (k, tree) in forest.trees.iter().enumerate() {
        let mut in_bag = vec![false; n];
        for &i in &tree.bag {
            in_bag[i] = true;
        }
        let oob: Vec<usize> = (0..n).filter(|&i| !in_bag[i]).collect();
        if oob.is_empty() {
            continue;
        }
        let base = mse(oob.iter().map(|&i| (tree.predict_complete(&rows[i]), dataset.y(i))));
        for (h, d) in diffs.iter_mut().enumerate() {
            let mut rng = seed::rng(seed::derive_path(forest.params.seed, &[IMPORTANCE_STREAM, k as u64, h as u64]));
            let mut shuffled: Vec<T> = oob.iter().map(|&i| rows[i][h]).collect();
            shuffled.shuffle(&mut rng);
            let permuted = mse(oob.iter().zip(&shuffled).map(|(&i, &v)| {
                let mut x = rows[i].clone();
                x[h] = v;
                (tree.predict_complete(&x), dataset.y(i))
            }));
            d.push(permuted - base);
        }
    }

    let pct_inc_mse = diffs
        .iter()
        .map(|d| {
            if d.is_empty() {
                return T::zero();
            }
            let m = T::from_usize_lossy(d.len());
            let mean = d.iter().copied().sum::<T>() / m;
            if d.len() < 2 {
                return mean;
            }
            let var = d.iter().map(|&x| (x - mean) * (x - mean)).sum::<T>() / (m - T::one());
            let se = (var / m).sqrt();
            if se > T::zero() {
                mean / se
            } else {
                mean
            }
        })
        .collect();

    let mut purity = vec![T::zero(); p];
    for tree in &forest.trees {
        for node in &tree.nodes {
            if let TreeNode::Internal { cut, n_rows, gain, .. } = node {
                purity[cut.feature] = purity[cut.feature] + T::from_usize_lossy(*n_rows) * *gain;
            }
        }
    }
    let m = T::from_usize_lossy(forest.trees.len());
    let inc_node_purity = purity.into_iter().map(|v| v / m).collect();
    Ok(Importance { pct_inc_mse, inc_node_purity })
}
