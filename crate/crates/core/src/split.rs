//! CART split search with joint cut and missing-value assignation.
//!
//! For a cut `(h, z)` the rows observed on `h` go left when `x < z`. Rows
//! missing on `h` are sorted by response and split at a threshold `w`: the
//! `w` lowest responses join the child named by [`Assignation::low_side`],
//! the rest join the other child. Every candidate is scored with the CART
//! criterion `N_L N_R / N^2 * (mean_L - mean_R)^2`, which equals the parent
//! variance minus the weighted child variances.
//!
//! Evaluations are counted so callers can compare the exhaustive threshold
//! scan with the dichotomy search.

use std::cmp::Ordering;

use crate::data::Dataset;
use crate::error::{invalid, Result};
use crate::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Side {
    Left,
    Right,
}

impl Side {
    pub fn other(self) -> Side {
        match self {
            Side::Left => Side::Right,
            Side::Right => Side::Left,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SearchMode {
    Exhaustive,
    Dichotomy,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cut<T> {
    pub feature: usize,
    pub position: T,
}

/// Split of the missing rows of a cell: the `threshold` lowest responses go
/// to `low_side`, the remaining ones to the other child.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Assignation {
    pub threshold: usize,
    pub low_side: Side,
}

impl Assignation {
    pub const VACUOUS: Assignation = Assignation { threshold: 0, low_side: Side::Left };

    /// Number of missing rows sent to the left child out of `n_missing`.
    pub fn left_count(&self, n_missing: usize) -> usize {
        match self.low_side {
            Side::Left => self.threshold,
            Side::Right => n_missing - self.threshold,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitResult<T> {
    pub cut: Cut<T>,
    pub assignation: Assignation,
    pub gain: T,
    pub cart_evaluations: usize,
}

/// A cell of the partition: the training rows that reached it.
#[derive(Debug, Clone, Copy)]
pub struct NodeView<'a, T> {
    dataset: &'a Dataset<T>,
    rows: &'a [usize],
}

impl<'a, T: Scalar> NodeView<'a, T> {
    pub fn new(dataset: &'a Dataset<T>, rows: &'a [usize]) -> Self {
        Self { dataset, rows }
    }

    pub fn rows(&self) -> &'a [usize] {
        self.rows
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn dataset(&self) -> &'a Dataset<T> {
        self.dataset
    }

    pub fn responses(&self) -> impl Iterator<Item = T> + '_ {
        self.rows.iter().map(|&i| self.dataset.y(i))
    }

    pub fn observed_count(&self, feature: usize) -> usize {
        self.rows.iter().filter(|&&i| !self.dataset.is_missing(i, feature)).count()
    }

    /// Responses are centred on the first row's response so that constant
    /// cells score exactly zero.
    fn center(&self) -> T {
        self.rows.first().map_or_else(T::zero, |&i| self.dataset.y(i))
    }

    /// Observed rows sorted by feature value, missing rows sorted by response.
    pub fn feature_view(&self, feature: usize) -> FeatureView<T> {
        let center = self.center();
        let mut observed = Vec::with_capacity(self.rows.len());
        let mut missing = Vec::new();
        for &i in self.rows {
            match self.dataset.get(i, feature) {
                Some(x) => observed.push(Observed { x, y: self.dataset.y(i), row: i }),
                None => missing.push(Missing { y: self.dataset.y(i), row: i }),
            }
        }
        FeatureView::assemble(feature, center, observed, missing)
    }
}

#[derive(Debug, Clone, Copy)]
struct Observed<T> {
    x: T,
    y: T,
    row: usize,
}

#[derive(Debug, Clone, Copy)]
struct Missing<T> {
    y: T,
    row: usize,
}

/// One feature's observed/missing partition of a cell.
#[derive(Debug, Clone)]
pub struct FeatureView<T> {
    feature: usize,
    center: T,
    observed: Vec<Observed<T>>,
    missing: Vec<Missing<T>>,
    /// prefix sums of centred missing responses, length `missing.len() + 1`
    missing_prefix: Vec<T>,
}

impl<T: Scalar> FeatureView<T> {
    fn assemble(feature: usize, center: T, mut observed: Vec<Observed<T>>, mut missing: Vec<Missing<T>>) -> Self {
        observed.sort_by(|a, b| a.x.partial_cmp(&b.x).unwrap_or(Ordering::Equal).then(a.row.cmp(&b.row)));
        missing.sort_by(|a, b| a.y.partial_cmp(&b.y).unwrap_or(Ordering::Equal).then(a.row.cmp(&b.row)));
        let mut missing_prefix = Vec::with_capacity(missing.len() + 1);
        let mut acc = T::zero();
        missing_prefix.push(acc);
        for m in &missing {
            acc = acc + (m.y - center);
            missing_prefix.push(acc);
        }
        Self { feature, center, observed, missing, missing_prefix }
    }

    /// Standalone view from `(x, y)` observed pairs and missing responses.
    /// Rows are numbered observed first, then missing.
    pub fn from_parts(feature: usize, observed: &[(T, T)], missing: &[T]) -> Self {
        let center = observed.first().map(|o| o.1).or(missing.first().copied()).unwrap_or_else(T::zero);
        let obs = observed.iter().enumerate().map(|(row, &(x, y))| Observed { x, y, row }).collect();
        let miss = missing
            .iter()
            .enumerate()
            .map(|(k, &y)| Missing { y, row: observed.len() + k })
            .collect();
        Self::assemble(feature, center, obs, miss)
    }

    pub fn feature(&self) -> usize {
        self.feature
    }

    pub fn observed_count(&self) -> usize {
        self.observed.len()
    }

    pub fn missing_count(&self) -> usize {
        self.missing.len()
    }

    /// Missing responses in ascending order.
    pub fn missing_responses(&self) -> Vec<T> {
        self.missing.iter().map(|m| m.y).collect()
    }

    /// Missing rows in ascending response order (ties by row index).
    pub fn missing_rows(&self) -> Vec<usize> {
        self.missing.iter().map(|m| m.row).collect()
    }

    /// Midpoints between consecutive distinct observed values.
    pub fn cut_positions(&self) -> Vec<T> {
        self.scan().map(|s| s.position).collect()
    }

    /// Observed-row statistics at every candidate cut, in increasing position.
    fn scan(&self) -> impl Iterator<Item = CutStats<T>> + '_ {
        let total: T = self.observed.iter().map(|o| o.y - self.center).sum();
        let n = self.observed.len();
        let mut left_sum = T::zero();
        (1..n).filter_map(move |k| {
            left_sum = left_sum + (self.observed[k - 1].y - self.center);
            let (a, b) = (self.observed[k - 1].x, self.observed[k].x);
            if a < b {
                Some(CutStats {
                    position: midpoint(a, b),
                    n_left: k,
                    sum_left: left_sum,
                    n_right: n - k,
                    sum_right: total - left_sum,
                })
            } else {
                None
            }
        })
    }

    fn stats_at(&self, position: T) -> CutStats<T> {
        let mut s = CutStats {
            position,
            n_left: 0,
            sum_left: T::zero(),
            n_right: 0,
            sum_right: T::zero(),
        };
        for o in &self.observed {
            if o.x < position {
                s.n_left += 1;
                s.sum_left = s.sum_left + (o.y - self.center);
            } else {
                s.n_right += 1;
                s.sum_right = s.sum_right + (o.y - self.center);
            }
        }
        s
    }
}

/// Midpoint strictly above `a` and at most `b`, so `a` goes left and `b` right.
fn midpoint<T: Scalar>(a: T, b: T) -> T {
    let two = T::one() + T::one();
    let m = a + (b - a) / two;
    if m > a && m <= b {
        m
    } else {
        b
    }
}

#[derive(Debug, Clone, Copy)]
struct CutStats<T> {
    position: T,
    n_left: usize,
    sum_left: T,
    n_right: usize,
    sum_right: T,
}

/// CART gain from child counts and centred response sums, with `0/0 = 0`.
#[inline]
fn gain_from_sums<T: Scalar>(n_left: usize, sum_left: T, n_right: usize, sum_right: T) -> T {
    if n_left == 0 || n_right == 0 {
        return T::zero();
    }
    let nl = T::from_usize_lossy(n_left);
    let nr = T::from_usize_lossy(n_right);
    let n = nl + nr;
    let diff = sum_left / nl - sum_right / nr;
    let g = (nl / n) * (nr / n) * diff * diff;
    if g > T::zero() {
        g
    } else {
        T::zero()
    }
}

/// Evaluation context for one cut: observed statistics plus missing prefix sums.
struct CutEvaluator<'v, T> {
    view: &'v FeatureView<T>,
    stats: CutStats<T>,
    /// orientation suggested by observed child means (ties: left)
    mean_low: Side,
    evaluations: usize,
}

impl<'v, T: Scalar> CutEvaluator<'v, T> {
    fn new(view: &'v FeatureView<T>, stats: CutStats<T>) -> Self {
        let mean_low = match (stats.n_left, stats.n_right) {
            (0, _) | (_, 0) => Side::Left,
            (nl, nr) => {
                let ml = stats.sum_left / T::from_usize_lossy(nl);
                let mr = stats.sum_right / T::from_usize_lossy(nr);
                if ml <= mr {
                    Side::Left
                } else {
                    Side::Right
                }
            }
        };
        Self { view, stats, mean_low, evaluations: 0 }
    }

    fn n_missing(&self) -> usize {
        self.view.missing.len()
    }

    fn value(&mut self, a: Assignation) -> T {
        self.evaluations += 1;
        let n = self.n_missing();
        let p = &self.view.missing_prefix;
        let low_sum = p[a.threshold];
        let high_sum = p[n] - p[a.threshold];
        let s = &self.stats;
        match a.low_side {
            Side::Left => gain_from_sums(
                s.n_left + a.threshold,
                s.sum_left + low_sum,
                s.n_right + (n - a.threshold),
                s.sum_right + high_sum,
            ),
            Side::Right => gain_from_sums(
                s.n_left + (n - a.threshold),
                s.sum_left + high_sum,
                s.n_right + a.threshold,
                s.sum_right + low_sum,
            ),
        }
    }

    /// Candidate index in enumeration order: the observed-mean orientation
    /// `w = 0..=N`, then the reverse orientation `w = 1..N-1`.
    fn candidate(&self, index: usize) -> Assignation {
        let n = self.n_missing();
        if index <= n {
            Assignation { threshold: index, low_side: self.mean_low }
        } else {
            Assignation { threshold: index - n, low_side: self.mean_low.other() }
        }
    }

    fn candidate_count(&self) -> usize {
        let n = self.n_missing();
        if n == 0 {
            1
        } else {
            2 * n
        }
    }

    /// Index of an assignation in enumeration order, canonicalising the two
    /// duplicate encodings of "all missing rows on one side".
    fn index_of(&self, orientation: Side, w: usize) -> usize {
        let n = self.n_missing();
        if orientation == self.mean_low {
            w
        } else if w == 0 {
            n
        } else if w == n {
            0
        } else {
            n + w
        }
    }

    fn exhaustive(&mut self) -> (Assignation, T) {
        let mut best = (Assignation::VACUOUS, T::neg_infinity());
        for idx in 0..self.candidate_count() {
            let a = self.candidate(idx);
            let g = self.value(a);
            if g > best.1 {
                best = (a, g);
            }
        }
        best
    }

    fn dichotomy(&mut self) -> (Assignation, T) {
        let n = self.n_missing();
        if 2 * n <= dichotomy_budget(n) {
            return self.exhaustive();
        }
        let mut memo: Vec<Option<T>> = vec![None; self.candidate_count()];
        let mut eval = |this: &mut Self, orientation: Side, w: usize| -> (usize, T) {
            let idx = this.index_of(orientation, w);
            let g = match memo[idx] {
                Some(g) => g,
                None => {
                    let g = this.value(this.candidate(idx));
                    memo[idx] = Some(g);
                    g
                }
            };
            (idx, g)
        };

        // Probe both orientations where the prefix of missing responses has
        // its most extreme deviation from the cell mean.
        let s = &self.stats;
        let total = s.sum_left + s.sum_right + self.view.missing_prefix[n];
        let mean = total / T::from_usize_lossy(s.n_left + s.n_right + n);
        let peak = self.view.missing.partition_point(|m| m.y - self.view.center < mean);
        let (_, default_probe) = eval(self, self.mean_low, peak);
        let (_, reverse_probe) = eval(self, self.mean_low.other(), peak);
        let side = if reverse_probe > default_probe { self.mean_low.other() } else { self.mean_low };

        // Gradient bisection on k starting from the pivot floor(N/2).
        let (mut lo, mut hi) = (0usize, n);
        while hi - lo > 1 {
            let mid = lo + (hi - lo) / 2;
            let (_, here) = eval(self, side, mid);
            let (_, next) = eval(self, side, mid + 1);
            if next > here {
                lo = mid + 1;
            } else {
                hi = mid;
            }
        }
        eval(self, side, lo);
        eval(self, side, hi);
        // endpoint guards: everything to one child or to the other
        eval(self, side, 0);
        eval(self, side, n);

        let mut best = (Assignation::VACUOUS, T::neg_infinity());
        for (idx, g) in memo.iter().enumerate() {
            if let Some(g) = *g {
                if g > best.1 {
                    best = (self.candidate(idx), g);
                }
            }
        }
        best
    }
}

/// Per-cut evaluation budget of the dichotomy search: `2 (ceil(log2(N + 2)) + 2)`.
pub fn dichotomy_budget(n_missing: usize) -> usize {
    let bits = usize::BITS - (n_missing + 1).leading_zeros();
    2 * (bits as usize + 2)
}

fn check_feature<T: Scalar>(node: &NodeView<'_, T>, feature: usize) -> Result<()> {
    if feature >= node.dataset.n_cols() {
        return Err(invalid(format!("feature {feature} out of range")));
    }
    Ok(())
}

/// CART criterion of `cut` and `assignation` on `node`, computed directly as
/// parent variance minus weighted child variances.
pub fn cart_criterion<T: Scalar>(node: &NodeView<'_, T>, cut: Cut<T>, assignation: Assignation) -> Result<T> {
    check_feature(node, cut.feature)?;
    let view = node.feature_view(cut.feature);
    criterion_of_view(&view, cut.position, assignation)
}

/// Same as [`cart_criterion`] on a standalone feature view.
pub fn criterion_of_view<T: Scalar>(view: &FeatureView<T>, position: T, assignation: Assignation) -> Result<T> {
    let n_missing = view.missing.len();
    if assignation.threshold > n_missing {
        return Err(invalid(format!(
            "assignation threshold {} exceeds the {} missing rows",
            assignation.threshold, n_missing
        )));
    }
    let mut left = Vec::new();
    let mut right = Vec::new();
    for o in &view.observed {
        if o.x < position {
            left.push(o.y);
        } else {
            right.push(o.y);
        }
    }
    for (k, m) in view.missing.iter().enumerate() {
        let side = if k < assignation.threshold { assignation.low_side } else { assignation.low_side.other() };
        match side {
            Side::Left => left.push(m.y),
            Side::Right => right.push(m.y),
        }
    }
    let n = left.len() + right.len();
    if n == 0 {
        return Ok(T::zero());
    }
    let sse = |v: &[T]| -> T {
        if v.is_empty() {
            return T::zero();
        }
        let mean = v.iter().copied().sum::<T>() / T::from_usize_lossy(v.len());
        v.iter().map(|&y| (y - mean) * (y - mean)).sum()
    };
    let all: Vec<T> = left.iter().chain(&right).copied().collect();
    let nn = T::from_usize_lossy(n);
    let g = (sse(&all) - sse(&left) - sse(&right)) / nn;
    Ok(if g > T::zero() { g } else { T::zero() })
}

/// Sorted midpoints of consecutive distinct observed values of `feature`.
pub fn enumerate_cut_positions<T: Scalar>(node: &NodeView<'_, T>, feature: usize) -> Vec<T> {
    node.feature_view(feature).cut_positions()
}

/// Best assignation for a fixed cut by scanning every threshold in both
/// orientations. Returns the assignation, its gain and the number of
/// criterion evaluations.
pub fn best_assignation_exhaustive<T: Scalar>(view: &FeatureView<T>, position: T) -> (Assignation, T, usize) {
    let mut ev = CutEvaluator::new(view, view.stats_at(position));
    let (a, g) = ev.exhaustive();
    (a, g, ev.evaluations)
}

/// Best assignation for a fixed cut by dichotomy on the threshold.
pub fn best_assignation_dichotomy<T: Scalar>(view: &FeatureView<T>, position: T) -> (Assignation, T, usize) {
    let mut ev = CutEvaluator::new(view, view.stats_at(position));
    let (a, g) = ev.dichotomy();
    (a, g, ev.evaluations)
}

fn sorted_features(features: &[usize]) -> Vec<usize> {
    let mut f = features.to_vec();
    f.sort_unstable();
    f.dedup();
    f
}

/// Best (cut, assignation) over `features`. Ties go to the smallest feature,
/// then the smallest position, then the earliest candidate assignation.
pub fn best_cut_and_assignation<T: Scalar>(
    node: &NodeView<'_, T>,
    features: &[usize],
    mode: SearchMode,
) -> Option<SplitResult<T>> {
    let mut best: Option<SplitResult<T>> = None;
    let mut evaluations = 0;
    for h in sorted_features(features) {
        if h >= node.dataset.n_cols() {
            continue;
        }
        let view = node.feature_view(h);
        for stats in view.scan() {
            let mut ev = CutEvaluator::new(&view, stats);
            let (assignation, gain) = match mode {
                SearchMode::Exhaustive => ev.exhaustive(),
                SearchMode::Dichotomy => ev.dichotomy(),
            };
            evaluations += ev.evaluations;
            if best.is_none_or(|b| gain > b.gain) {
                best = Some(SplitResult {
                    cut: Cut { feature: h, position: stats.position },
                    assignation,
                    gain,
                    cart_evaluations: 0,
                });
            }
        }
    }
    best.map(|b| SplitResult { cart_evaluations: evaluations, ..b })
}

/// Best split under the missing-incorporated-in-attributes rule: all
/// missing rows of the cut feature travel together. Candidates per feature
/// are every finite cut with the missing block on the left or on the right,
/// then the observed-versus-missing split, encoded as a cut at `+inf`
/// with the missing block on the right.
pub fn mia_best_cut<T: Scalar>(node: &NodeView<'_, T>, features: &[usize]) -> Option<SplitResult<T>> {
    let mut best: Option<SplitResult<T>> = None;
    let mut evaluations = 0;
    let consider = |cut: Cut<T>, assignation: Assignation, gain: T, best: &mut Option<SplitResult<T>>| {
        if best.is_none_or(|b| gain > b.gain) {
            *best = Some(SplitResult { cut, assignation, gain, cart_evaluations: 0 });
        }
    };
    for h in sorted_features(features) {
        if h >= node.dataset.n_cols() {
            continue;
        }
        let view = node.feature_view(h);
        if view.observed_count() < 2 {
            continue;
        }
        let n = view.missing_count();
        for stats in view.scan() {
            let mut ev = CutEvaluator::new(&view, stats);
            let cut = Cut { feature: h, position: stats.position };
            if n == 0 {
                let g = ev.value(Assignation::VACUOUS);
                consider(cut, Assignation::VACUOUS, g, &mut best);
            } else {
                for side in [Side::Left, Side::Right] {
                    let a = Assignation { threshold: n, low_side: side };
                    let g = ev.value(a);
                    consider(cut, a, g, &mut best);
                }
            }
            evaluations += ev.evaluations;
        }
        if n > 0 {
            let position = T::infinity();
            let mut ev = CutEvaluator::new(&view, view.stats_at(position));
            let a = Assignation { threshold: n, low_side: Side::Right };
            let g = ev.value(a);
            evaluations += ev.evaluations;
            consider(Cut { feature: h, position }, a, g, &mut best);
        }
    }
    best.map(|b| SplitResult { cart_evaluations: evaluations, ..b })
}

/// Classic CART scan over observed values; features with missing values in
/// the cell are skipped.
pub fn classic_best_cut<T: Scalar>(node: &NodeView<'_, T>, features: &[usize]) -> Option<SplitResult<T>> {
    let mut best: Option<SplitResult<T>> = None;
    let mut evaluations = 0;
    for h in sorted_features(features) {
        if h >= node.dataset.n_cols() {
            continue;
        }
        let view = node.feature_view(h);
        if view.missing_count() > 0 {
            continue;
        }
        for s in view.scan() {
            evaluations += 1;
            let gain = gain_from_sums(s.n_left, s.sum_left, s.n_right, s.sum_right);
            if best.is_none_or(|b| gain > b.gain) {
                best = Some(SplitResult {
                    cut: Cut { feature: h, position: s.position },
                    assignation: Assignation::VACUOUS,
                    gain,
                    cart_evaluations: 0,
                });
            }
        }
    }
    best.map(|b| SplitResult { cart_evaluations: evaluations, ..b })
}

/// Route the rows of `node` through `split`. Returns the left rows, the
/// right rows (both in node order) and the number of missing rows sent left
/// and right.
pub fn partition_rows<T: Scalar>(node: &NodeView<'_, T>, split: &SplitResult<T>) -> (Vec<usize>, Vec<usize>, usize, usize) {
    let h = split.cut.feature;
    let view = node.feature_view(h);
    let n_missing = view.missing_count();
    let low: std::collections::HashSet<usize> =
        view.missing[..split.assignation.threshold.min(n_missing)].iter().map(|m| m.row).collect();
    let mut left = Vec::new();
    let mut right = Vec::new();
    let (mut miss_left, mut miss_right) = (0, 0);
    for &i in node.rows {
        let side = match node.dataset.get(i, h) {
            Some(x) => {
                if x < split.cut.position {
                    Side::Left
                } else {
                    Side::Right
                }
            }
            None => {
                let side = if low.contains(&i) {
                    split.assignation.low_side
                } else {
                    split.assignation.low_side.other()
                };
                match side {
                    Side::Left => miss_left += 1,
                    Side::Right => miss_right += 1,
                }
                side
            }
        };
        match side {
            Side::Left => left.push(i),
            Side::Right => right.push(i),
        }
    }
    (left, right, miss_left, miss_right)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pair_view(missing: &[f64]) -> FeatureView<f64> {
        FeatureView::from_parts(0, &[(0.1, 0.0), (0.9, 10.0)], missing)
    }

    #[test]
    fn constant_responses_score_zero() {
        let view = FeatureView::from_parts(0, &[(0.1, 3.3), (0.4, 3.3), (0.9, 3.3)], &[3.3, 3.3]);
        for z in [0.2, 0.5] {
            for w in 0..=2 {
                for side in [Side::Left, Side::Right] {
                    let a = Assignation { threshold: w, low_side: side };
                    assert_eq!(criterion_of_view(&view, z, a).unwrap(), 0.0);
                }
            }
            assert_eq!(best_assignation_exhaustive(&view, z).1, 0.0);
        }
    }

    #[test]
    fn two_point_cut_scores_variance() {
        let view = pair_view(&[]);
        let g = criterion_of_view(&view, 0.5, Assignation::VACUOUS).unwrap();
        assert!((g - 25.0).abs() < 1e-12);
    }

    #[test]
    fn missing_row_assigned_right() {
        let view = pair_view(&[10.0]);
        // low side is left (observed means 0 < 10); threshold 0 sends the row right
        let a = Assignation { threshold: 0, low_side: Side::Left };
        let g = criterion_of_view(&view, 0.5, a).unwrap();
        assert!((g - 200.0 / 9.0).abs() < 1e-12);
    }

    #[test]
    fn threshold_above_missing_count_rejected() {
        let view = pair_view(&[10.0]);
        let a = Assignation { threshold: 2, low_side: Side::Left };
        assert!(criterion_of_view(&view, 0.5, a).is_err());
    }

    #[test]
    fn cut_positions_are_midpoints() {
        let v = FeatureView::from_parts(0, &[(0.8, 0.0), (0.2, 0.0), (0.4, 0.0)], &[]);
        let p: Vec<f64> = v.cut_positions();
        assert_eq!(p.len(), 2);
        assert!((p[0] - 0.3).abs() < 1e-15 && (p[1] - 0.6).abs() < 1e-15);
        let v = FeatureView::from_parts(0, &[(0.5, 0.0), (0.5, 1.0), (0.7, 0.0)], &[]);
        let p: Vec<f64> = v.cut_positions();
        assert_eq!(p.len(), 1);
        assert!((p[0] - 0.6).abs() < 1e-15);
        let v = FeatureView::from_parts(0, &[(0.5, 0.0)], &[1.0]);
        assert!(v.cut_positions().is_empty());
    }

    #[test]
    fn midpoint_of_adjacent_floats_separates() {
        let a = 1.0f64;
        let b = f64::from_bits(a.to_bits() + 1);
        let m = midpoint(a, b);
        assert!(a < m && m <= b);
    }

    #[test]
    fn exhaustive_separates_missing_rows() {
        let view = pair_view(&[0.0, 10.0]);
        let (a, g, evals) = best_assignation_exhaustive(&view, 0.5);
        assert!((g - 25.0).abs() < 1e-12);
        assert_eq!(a, Assignation { threshold: 1, low_side: Side::Left });
        assert_eq!(evals, 4);
    }

    #[test]
    fn exhaustive_counts() {
        let view = pair_view(&[]);
        let (a, _, evals) = best_assignation_exhaustive(&view, 0.5);
        assert_eq!(a, Assignation::VACUOUS);
        assert_eq!(evals, 1);
        let view = pair_view(&[1.0, 2.0, 3.0]);
        assert_eq!(best_assignation_exhaustive(&view, 0.5).2, 6);
    }

    #[test]
    fn dichotomy_matches_when_search_space_is_small() {
        for missing in [vec![], vec![4.0], vec![-3.0, 12.0], vec![1.0, 5.0, 9.0, 11.0]] {
            let view = pair_view(&missing);
            let (_, ge, _) = best_assignation_exhaustive(&view, 0.5);
            let (_, gd, evals) = best_assignation_dichotomy(&view, 0.5);
            assert_eq!(ge, gd);
            assert!(evals <= dichotomy_budget(missing.len()));
        }
        assert!(best_assignation_dichotomy(&pair_view(&[]), 0.5).2 <= 2);
    }

    #[test]
    fn budget_formula() {
        assert_eq!(dichotomy_budget(0), 2 * (1 + 2));
        assert_eq!(dichotomy_budget(2), 2 * (2 + 2));
        assert_eq!(dichotomy_budget(6), 2 * (3 + 2));
        assert_eq!(dichotomy_budget(7), 2 * (4 + 2));
    }

    fn single_feature_node(obs: &[(f64, f64)], missing: &[f64]) -> Dataset<f64> {
        let mut rows = Vec::new();
        let mut y = Vec::new();
        for &(x, r) in obs {
            rows.push(vec![Some(x)]);
            y.push(r);
        }
        for &r in missing {
            rows.push(vec![None]);
            y.push(r);
        }
        Dataset::from_options(rows, y).unwrap()
    }

    #[test]
    fn best_cut_single_feature() {
        let d = single_feature_node(&[(0.1, 0.0), (0.9, 10.0)], &[10.0]);
        let rows: Vec<usize> = (0..3).collect();
        let node = NodeView::new(&d, &rows);
        for mode in [SearchMode::Exhaustive, SearchMode::Dichotomy] {
            let r = best_cut_and_assignation(&node, &[0], mode).unwrap();
            assert!((r.cut.position - 0.5).abs() < 1e-15);
            assert!((r.gain - 200.0 / 9.0).abs() < 1e-12);
            assert_eq!(r.assignation.left_count(1), 0);
        }
        let direct = cart_criterion(&node, Cut { feature: 0, position: 0.5 }, Assignation::VACUOUS).unwrap();
        assert!((direct - 200.0 / 9.0).abs() < 1e-12);
        assert!(best_cut_and_assignation(&node, &[], SearchMode::Exhaustive).is_none());
        assert!(mia_best_cut(&node, &[]).is_none());
    }

    #[test]
    fn mia_cannot_separate_missing_rows() {
        let d = single_feature_node(&[(0.1, 0.0), (0.9, 10.0)], &[0.0, 10.0]);
        let rows: Vec<usize> = (0..4).collect();
        let node = NodeView::new(&d, &rows);
        let mia = mia_best_cut(&node, &[0]).unwrap();
        let joint = best_cut_and_assignation(&node, &[0], SearchMode::Exhaustive).unwrap();
        assert!((joint.gain - 25.0).abs() < 1e-12);
        assert!(mia.gain <= 200.0 / 9.0 + 1e-12);
        // the three MIA families, by hand: {0,0,10}|{10} and {0}|{10,0,10} give 25/3;
        // observed vs missing gives 0.
        assert!((mia.gain - 25.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn mia_observed_versus_missing() {
        // observed rows constant, missing rows far away: only the
        // observed-vs-missing rule separates them
        let d = single_feature_node(&[(0.1, 1.0), (0.5, 1.0), (0.9, 1.0)], &[9.0, 9.0]);
        let rows: Vec<usize> = (0..5).collect();
        let node = NodeView::new(&d, &rows);
        let r = mia_best_cut(&node, &[0]).unwrap();
        assert!(r.cut.position.is_infinite());
        let (left, right, ml, mr) = partition_rows(&node, &r);
        assert_eq!(left, vec![0, 1, 2]);
        assert_eq!(right, vec![3, 4]);
        assert_eq!((ml, mr), (0, 2));
    }

    #[test]
    fn all_missing_feature_yields_none() {
        let d = single_feature_node(&[], &[1.0, 2.0, 3.0]);
        let rows: Vec<usize> = (0..3).collect();
        let node = NodeView::new(&d, &rows);
        assert!(mia_best_cut(&node, &[0]).is_none());
        assert!(best_cut_and_assignation(&node, &[0], SearchMode::Dichotomy).is_none());
    }

    #[test]
    fn partition_records_assignation() {
        let d = single_feature_node(&[(0.1, 0.0), (0.9, 10.0)], &[10.0, 0.0]);
        let rows: Vec<usize> = (0..4).collect();
        let node = NodeView::new(&d, &rows);
        let r = best_cut_and_assignation(&node, &[0], SearchMode::Exhaustive).unwrap();
        let (left, right, ml, mr) = partition_rows(&node, &r);
        assert_eq!(left, vec![0, 3]);
        assert_eq!(right, vec![1, 2]);
        assert_eq!((ml, mr), (1, 1));
    }

    #[test]
    fn f32_criterion() {
        let view = FeatureView::<f32>::from_parts(0, &[(0.1, 0.0), (0.9, 10.0)], &[10.0]);
        let g = criterion_of_view(&view, 0.5, Assignation { threshold: 0, low_side: Side::Left }).unwrap();
        assert!((g - 200.0 / 9.0).abs() < 1e-4);
    }
}
