use std::collections::VecDeque;

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::{ForestParams, SplitRule};
use crate::data::Dataset;
use crate::split::{self, Cut, NodeView, SplitResult};
use crate::Scalar;

#[derive(Debug, Clone, PartialEq)]
pub enum TreeNode<T> {
    Internal {
        cut: Cut<T>,
        left: usize,
        right: usize,
        /// training rows missing on the cut feature sent left / right
        missing_left: usize,
        missing_right: usize,
        /// training rows in the cell and their mean response
        n_rows: usize,
        mean: T,
        gain: T,
    },
    Leaf {
        mean: T,
        rows: Vec<usize>,
    },
}

/// One regression tree stored as an arena; the root is node 0 and nodes are
/// numbered in the order cells are processed.
#[derive(Debug, Clone, PartialEq)]
pub struct Tree<T> {
    pub(crate) nodes: Vec<TreeNode<T>>,
    pub(crate) bag: Vec<usize>,
    pub(crate) cart_evaluations: usize,
}

/// Where a descent ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Landing {
    Leaf(usize),
    /// stopped at an internal node whose cut feature is missing and which
    /// saw no missing training rows on it
    Stopped(usize),
}

impl<T: Scalar> Tree<T> {
    pub fn nodes(&self) -> &[TreeNode<T>] {
        &self.nodes
    }

    pub fn root(&self) -> &TreeNode<T> {
        &self.nodes[0]
    }

    /// Training rows the tree was grown on.
    pub fn bag(&self) -> &[usize] {
        &self.bag
    }

    pub fn cart_evaluations(&self) -> usize {
        self.cart_evaluations
    }

    pub fn n_leaves(&self) -> usize {
        self.nodes.iter().filter(|n| matches!(n, TreeNode::Leaf { .. })).count()
    }

    pub fn predict_complete(&self, x: &[T]) -> T {
        let mut id = 0;
        loop {
            match &self.nodes[id] {
                TreeNode::Leaf { mean, .. } => return *mean,
                TreeNode::Internal { cut, left, right, .. } => {
                    id = if x[cut.feature] < cut.position { *left } else { *right };
                }
            }
        }
    }

    /// Descend with missing coordinates routed left with probability
    /// `N_L / N` from the training assignation.
    pub(crate) fn descend<R: Rng>(&self, x: &[Option<T>], rng: &mut R) -> Landing {
        let mut id = 0;
        loop {
            match &self.nodes[id] {
                TreeNode::Leaf { .. } => return Landing::Leaf(id),
                TreeNode::Internal { cut, left, right, missing_left, missing_right, .. } => {
                    id = match x[cut.feature] {
                        Some(v) => {
                            if v < cut.position {
                                *left
                            } else {
                                *right
                            }
                        }
                        None => {
                            let n = missing_left + missing_right;
                            if n == 0 {
                                return Landing::Stopped(id);
                            }
                            let p_left = *missing_left as f64 / n as f64;
                            if rng.random::<f64>() < p_left {
                                *left
                            } else {
                                *right
                            }
                        }
                    };
                }
            }
        }
    }

    pub(crate) fn landing_value(&self, landing: Landing) -> T {
        match landing {
            Landing::Leaf(id) | Landing::Stopped(id) => match &self.nodes[id] {
                TreeNode::Leaf { mean, .. } | TreeNode::Internal { mean, .. } => *mean,
            },
        }
    }

    pub fn predict_with_missing<R: Rng>(&self, x: &[Option<T>], rng: &mut R) -> T {
        let landing = self.descend(x, rng);
        self.landing_value(landing)
    }
}

fn mean_of<T: Scalar>(dataset: &Dataset<T>, rows: &[usize]) -> T {
    let sum: T = rows.iter().map(|&i| dataset.y(i)).sum();
    sum / T::from_usize_lossy(rows.len())
}

/// Grow one tree on `bag` following the forest parameters. Cells are
/// processed first-in first-out.
pub(crate) fn grow<T: Scalar>(dataset: &Dataset<T>, bag: Vec<usize>, params: &ForestParams, rng: &mut ChaCha8Rng) -> Tree<T> {
    let p = dataset.n_cols();
    let mut nodes: Vec<TreeNode<T>> = vec![TreeNode::Leaf { mean: T::zero(), rows: Vec::new() }];
    let mut queue: VecDeque<(usize, Vec<usize>)> = VecDeque::new();
    queue.push_back((0, bag.clone()));
    let mut evaluations = 0;

    while let Some((id, rows)) = queue.pop_front() {
        let mean = mean_of(dataset, &rows);
        let leaf = |rows: Vec<usize>| TreeNode::Leaf { mean, rows };
        if rows.len() <= params.nodesize {
            nodes[id] = leaf(rows);
            continue;
        }
        let node = NodeView::new(dataset, &rows);
        let h_obs: Vec<usize> = (0..p).filter(|&h| node.observed_count(h) > 1).collect();
        if h_obs.is_empty() {
            nodes[id] = leaf(rows);
            continue;
        }
        let candidates: Vec<usize> = if h_obs.len() <= params.mtry {
            h_obs
        } else {
            let mut picked: Vec<usize> = rand::seq::index::sample(rng, h_obs.len(), params.mtry)
                .into_iter()
                .map(|k| h_obs[k])
                .collect();
            picked.sort_unstable();
            picked
        };
        let best: Option<SplitResult<T>> = match params.split_rule {
            SplitRule::Assignation => split::best_cut_and_assignation(&node, &candidates, params.search_mode),
            SplitRule::Mia => split::mia_best_cut(&node, &candidates),
            SplitRule::Classic => split::classic_best_cut(&node, &candidates),
        };
        let Some(best) = best else {
            nodes[id] = leaf(rows);
            continue;
        };
        evaluations += best.cart_evaluations;
        if best.gain <= T::zero() {
            nodes[id] = leaf(rows);
            continue;
        }
        let (left_rows, right_rows, missing_left, missing_right) = split::partition_rows(&node, &best);
        debug_assert!(!left_rows.is_empty() && !right_rows.is_empty());
        let left = nodes.len();
        let right = left + 1;
        nodes.push(TreeNode::Leaf { mean: T::zero(), rows: Vec::new() });
        nodes.push(TreeNode::Leaf { mean: T::zero(), rows: Vec::new() });
        nodes[id] = TreeNode::Internal {
            cut: best.cut,
            left,
            right,
            missing_left,
            missing_right,
            n_rows: rows.len(),
            mean,
            gain: best.gain,
        };
        queue.push_back((left, left_rows));
        queue.push_back((right, right_rows));
    }
    Tree { nodes, bag, cart_evaluations: evaluations }
}
