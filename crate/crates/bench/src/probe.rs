use assignforest::data::{apply_mechanism, gen_friedman1, Mechanism, MechanismSpec, Target};
use assignforest::seed::derive_path;
use assignforest::{build_tree, ForestParams, SearchMode, SplitRule};

use crate::Result;

/// Total criterion evaluations spent growing one tree.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProbeRow {
    pub n: usize,
    pub mode: SearchMode,
    pub cart_evaluations: usize,
}

/// Grow one full-depth tree (mtry = p, all rows, nodesize 5) per `n` and
/// search mode on friedman1 data with every column MCAR at
/// `missing_fraction`.
pub fn complexity_probe(n_grid: &[usize], missing_fraction: f64, seed: u64) -> Result<Vec<ProbeRow>> {
    if n_grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(crate::BenchError::Config("n_grid must be ascending".into()));
    }
    let mut rows = Vec::new();
    for &n in n_grid {
        let data = gen_friedman1::<f64>(n, 1.0, derive_path(seed, &[n as u64, 0]))?;
        let targets = (0..5).map(|column| Target { column, fraction: missing_fraction }).collect();
        let spec = MechanismSpec::new(Mechanism::Mcar, targets, Default::default())?;
        let data = apply_mechanism(&data, &spec, derive_path(seed, &[n as u64, 1]))?;
        for mode in [SearchMode::Exhaustive, SearchMode::Dichotomy] {
            let params = ForestParams {
                n_trees: 1,
                mtry: 5,
                subsample: n,
                nodesize: 5.min(n),
                replacement: false,
                search_mode: mode,
                split_rule: SplitRule::Assignation,
                seed,
            };
            let tree = build_tree(&data, &params, derive_path(seed, &[n as u64, 2]))?;
            rows.push(ProbeRow { n, mode, cart_evaluations: tree.cart_evaluations() });
        }
    }
    Ok(rows)
}

/// Least-squares slope of `ln(evaluations)` against `ln(n)` for one mode.
pub fn log_log_slope(rows: &[ProbeRow], mode: SearchMode) -> Option<f64> {
    let pts: Vec<(f64, f64)> = rows
        .iter()
        .filter(|r| r.mode == mode && r.cart_evaluations > 0)
        .map(|r| ((r.n as f64).ln(), (r.cart_evaluations as f64).ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let k = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}
