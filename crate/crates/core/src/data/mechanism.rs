//! Missing-data mechanisms used to corrupt complete datasets.
//!
//! Weighted mechanisms (MCAR, MAR1, MAR2, DEPY, LOG) mask a fixed number of
//! cells per target column by successive weighted draws without replacement.
//! MAR3 and MAR4 are deterministic truncations on the determining column.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::Deserialize;

use super::Dataset;
use crate::error::{invalid, Error, Result};
use crate::{seed, Scalar};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Mechanism {
    Mcar,
    Mar1,
    Mar2,
    Mar3,
    Mar4,
    Depy,
    Log,
    Comp,
}

impl Mechanism {
    pub const ALL: [Mechanism; 8] = [
        Mechanism::Mcar,
        Mechanism::Mar1,
        Mechanism::Mar2,
        Mechanism::Mar3,
        Mechanism::Mar4,
        Mechanism::Depy,
        Mechanism::Log,
        Mechanism::Comp,
    ];

    /// The seven corrupting mechanisms (everything but COMP).
    pub const CORRUPTING: [Mechanism; 7] = [
        Mechanism::Mcar,
        Mechanism::Mar1,
        Mechanism::Mar2,
        Mechanism::Mar3,
        Mechanism::Mar4,
        Mechanism::Depy,
        Mechanism::Log,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Mechanism::Mcar => "MCAR",
            Mechanism::Mar1 => "MAR1",
            Mechanism::Mar2 => "MAR2",
            Mechanism::Mar3 => "MAR3",
            Mechanism::Mar4 => "MAR4",
            Mechanism::Depy => "DEPY",
            Mechanism::Log => "LOG",
            Mechanism::Comp => "COMP",
        }
    }

    pub fn needs_determining(self) -> bool {
        matches!(self, Mechanism::Mar1 | Mechanism::Mar2 | Mechanism::Mar3 | Mechanism::Mar4)
    }

    /// Stable small integer used for seed derivation.
    pub fn code(self) -> u64 {
        Mechanism::ALL.iter().position(|&m| m == self).unwrap() as u64
    }
}

impl fmt::Display for Mechanism {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Mechanism {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let upper = s.trim().to_ascii_uppercase();
        Mechanism::ALL
            .iter()
            .copied()
            .find(|m| m.name() == upper)
            .ok_or_else(|| invalid(format!("unknown mechanism '{s}'")))
    }
}

/// One corrupted column and its missing fraction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Target {
    pub column: usize,
    pub fraction: f64,
}

/// Which mechanism corrupts which columns at what rate. Columns are 0-based.
#[derive(Debug, Clone, PartialEq)]
pub struct MechanismSpec {
    pub mechanism: Mechanism,
    pub targets: Vec<Target>,
    pub determining: BTreeMap<usize, usize>,
}

impl MechanismSpec {
    pub fn new(
        mechanism: Mechanism,
        targets: Vec<Target>,
        determining: BTreeMap<usize, usize>,
    ) -> Result<Self> {
        let spec = Self { mechanism, targets, determining };
        spec.validate()?;
        Ok(spec)
    }

    pub fn comp() -> Self {
        Self { mechanism: Mechanism::Comp, targets: Vec::new(), determining: BTreeMap::new() }
    }

    /// Friedman1 study layout: targets x1, x3, x4 with determining columns
    /// x2 for x1 and x5 for x3 and x4. `rates` are the fractions for x1, x3, x4.
    pub fn friedman_study(mechanism: Mechanism, rates: [f64; 3]) -> Result<Self> {
        if mechanism == Mechanism::Comp {
            return Ok(Self::comp());
        }
        let cols = [0usize, 2, 3];
        let targets = cols
            .iter()
            .zip(rates)
            .filter(|(_, r)| *r > 0.0)
            .map(|(&column, fraction)| Target { column, fraction })
            .collect();
        let determining = if mechanism.needs_determining() {
            BTreeMap::from([(0, 1), (2, 4), (3, 4)])
        } else {
            BTreeMap::new()
        };
        let mut spec = Self { mechanism, targets, determining };
        spec.determining.retain(|t, _| spec.targets.iter().any(|x| x.column == *t));
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.mechanism == Mechanism::Comp && !self.targets.is_empty() {
            return Err(invalid("COMP takes no target columns"));
        }
        for t in &self.targets {
            if !(0.0..1.0).contains(&t.fraction) {
                return Err(invalid(format!(
                    "missing fraction {} for column {} must lie in [0, 1)",
                    t.fraction,
                    t.column + 1
                )));
            }
            if self.mechanism.needs_determining() {
                match self.determining.get(&t.column) {
                    None => {
                        return Err(invalid(format!(
                            "{} requires a determining column for column {}",
                            self.mechanism,
                            t.column + 1
                        )))
                    }
                    Some(&d) if d == t.column => {
                        return Err(invalid("determining column must differ from its target"))
                    }
                    Some(&d) if self.targets.iter().any(|x| x.column == d) => {
                        return Err(invalid(format!(
                            "determining column {} is itself a target",
                            d + 1
                        )))
                    }
                    _ => {}
                }
            }
        }
        let mut cols: Vec<usize> = self.targets.iter().map(|t| t.column).collect();
        cols.sort_unstable();
        if cols.windows(2).any(|w| w[0] == w[1]) {
            return Err(invalid("duplicate target column"));
        }
        Ok(())
    }

    /// Parse the key-value mechanism configuration. Column numbers in the
    /// text are 1-based (`x1` is column 1). Returns the spec and optional seed.
    ///
    /// ```toml
    /// mechanism = "MAR1"
    /// seed = 7
    ///
    /// [[target]]
    /// column = 1
    /// rate = 0.2
    /// determining = 2
    /// ```
    pub fn from_config_str(text: &str) -> Result<(Self, Option<u64>)> {
        #[derive(Deserialize)]
        #[serde(deny_unknown_fields)]
        struct TargetCfg {
            column: usize,
            rate: f64,
            determining: Option<usize>,
        }
        #[derive(Deserialize)]
        #[serde(deny_unknown_fields)]
        struct Cfg {
            mechanism: String,
            seed: Option<u64>,
            #[serde(default)]
            target: Vec<TargetCfg>,
        }
        let cfg: Cfg = toml::from_str(text).map_err(|e| Error::Parse {
            line: e.span().map_or(0, |s| text[..s.start].lines().count().max(1)),
            message: e.message().to_string(),
        })?;
        let mechanism: Mechanism = cfg.mechanism.parse()?;
        let mut targets = Vec::new();
        let mut determining = BTreeMap::new();
        for t in cfg.target {
            if t.column == 0 {
                return Err(invalid("columns are numbered from 1"));
            }
            targets.push(Target { column: t.column - 1, fraction: t.rate });
            if let Some(d) = t.determining {
                if d == 0 {
                    return Err(invalid("columns are numbered from 1"));
                }
                determining.insert(t.column - 1, d - 1);
            }
        }
        Ok((Self::new(mechanism, targets, determining)?, cfg.seed))
    }
}

/// Number of cells masked for a fraction `f` of `n` rows: `ceil(f * n)`.
///
/// A 1e-9 guard absorbs products such as `0.2 * 200 = 40.000000000000004`.
pub fn masked_count(fraction: f64, n: usize) -> usize {
    let raw = fraction * n as f64;
    let count = (raw - 1e-9).ceil().max(0.0) as usize;
    count.min(n)
}

fn column_values<T: Scalar>(dataset: &Dataset<T>, col: usize) -> Result<Vec<f64>> {
    if col >= dataset.n_cols() {
        return Err(invalid(format!("column {} out of range", col + 1)));
    }
    (0..dataset.n_rows())
        .map(|i| {
            dataset.get(i, col).map(Scalar::as_f64).ok_or_else(|| {
                invalid(format!("column {} has a missing value at row {}", col + 1, i + 1))
            })
        })
        .collect()
}

/// Ordinal ranks 1..n, ties broken by row index.
fn ordinal_ranks(values: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]).then(a.cmp(&b)));
    let mut ranks = vec![0; values.len()];
    for (r, &i) in order.iter().enumerate() {
        ranks[i] = r + 1;
    }
    ranks
}

fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

fn determining_column(spec_map: Option<usize>, mechanism: Mechanism, target: usize) -> Result<usize> {
    spec_map.ok_or_else(|| {
        invalid(format!("{mechanism} requires a determining column for column {}", target + 1))
    })
}

/// Selection weight per row for the weighted mechanisms.
///
/// `determining` is required for MAR1 and MAR2 and ignored otherwise. LOG
/// reads every column except `target_col`, all of which must be observed.
pub fn mechanism_weights<T: Scalar>(
    mechanism: Mechanism,
    target_col: usize,
    determining: Option<usize>,
    dataset: &Dataset<T>,
) -> Result<Vec<f64>> {
    let n = dataset.n_rows();
    if n == 0 {
        return Err(Error::EmptyDataset);
    }
    if target_col >= dataset.n_cols() {
        return Err(invalid(format!("column {} out of range", target_col + 1)));
    }
    match mechanism {
        Mechanism::Mcar => Ok(vec![1.0 / n as f64; n]),
        Mechanism::Mar1 => {
            let d = determining_column(determining, mechanism, target_col)?;
            let values = column_values(dataset, d)?;
            let total = (n * (n + 1) / 2) as f64;
            Ok(ordinal_ranks(&values).into_iter().map(|r| r as f64 / total).collect())
        }
        Mechanism::Mar2 => {
            let d = determining_column(determining, mechanism, target_col)?;
            let values = column_values(dataset, d)?;
            let med = median(&values);
            let high = values.iter().filter(|&&v| v >= med).count();
            let low = n - high;
            Ok(values
                .iter()
                .map(|&v| if v >= med { 0.9 / high as f64 } else { 0.1 / low as f64 })
                .collect())
        }
        Mechanism::Depy => Ok(dataset
            .response()
            .iter()
            .map(|y| if y.as_f64() >= 13.0 { 0.1 } else { 0.4 })
            .collect()),
        Mechanism::Log => {
            let others: Vec<Vec<f64>> = (0..dataset.n_cols())
                .filter(|&k| k != target_col)
                .map(|k| column_values(dataset, k))
                .collect::<Result<_>>()?;
            Ok((0..n)
                .map(|i| {
                    let eta = -0.5 + others.iter().map(|c| c[i]).sum::<f64>();
                    1.0 / (1.0 + (-eta).exp())
                })
                .collect())
        }
        Mechanism::Mar3 | Mechanism::Mar4 | Mechanism::Comp => Err(invalid(format!(
            "{mechanism} is not a weighted mechanism"
        ))),
    }
}

/// Successive weighted draws without replacement, renormalizing after each draw.
fn weighted_sample<R: Rng>(weights: &[f64], k: usize, rng: &mut R) -> Vec<usize> {
    let mut remaining: Vec<(usize, f64)> =
        weights.iter().copied().enumerate().map(|(i, w)| (i, w.max(0.0))).collect();
    let mut picked = Vec::with_capacity(k);
    for _ in 0..k {
        let total: f64 = remaining.iter().map(|&(_, w)| w).sum();
        let pos = if total > 0.0 {
            let mut u = rng.random::<f64>() * total;
            let mut chosen = remaining.len() - 1;
            for (j, &(_, w)) in remaining.iter().enumerate() {
                if u < w {
                    chosen = j;
                    break;
                }
                u -= w;
            }
            // skip zero-weight tail entries that float drift could land on
            while remaining[chosen].1 == 0.0 && chosen > 0 {
                chosen -= 1;
            }
            chosen
        } else {
            rng.random_range(0..remaining.len())
        };
        picked.push(remaining.remove(pos).0);
    }
    picked
}

/// Rows ordered by determining value, largest first; ties by row index.
fn by_value_desc(values: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[b].total_cmp(&values[a]).then(a.cmp(&b)));
    order
}

/// Corrupt `dataset` per `spec`. All weights are computed on the input
/// before any target column is masked.
pub fn apply_mechanism<T: Scalar>(dataset: &Dataset<T>, spec: &MechanismSpec, seed: u64) -> Result<Dataset<T>> {
    spec.validate()?;
    let n = dataset.n_rows();
    let mut cells = Vec::new();
    for (t_idx, target) in spec.targets.iter().enumerate() {
        let col = target.column;
        if col >= dataset.n_cols() {
            return Err(invalid(format!("target column {} out of range", col + 1)));
        }
        if dataset.missing_in_column(col) > 0 {
            return Err(invalid(format!("target column {} already has missing values", col + 1)));
        }
        let k = masked_count(target.fraction, n);
        let determining = spec.determining.get(&col).copied();
        let rows: Vec<usize> = match spec.mechanism {
            Mechanism::Comp => Vec::new(),
            Mechanism::Mar3 | Mechanism::Mar4 => {
                let d = determining_column(determining, spec.mechanism, col)?;
                let order = by_value_desc(&column_values(dataset, d)?);
                if spec.mechanism == Mechanism::Mar3 {
                    order[..k].to_vec()
                } else {
                    let large = k.div_ceil(2);
                    let small = k - large;
                    order[..large].iter().chain(&order[n - small..]).copied().collect()
                }
            }
            m => {
                let weights = mechanism_weights(m, col, determining, dataset)?;
                let mut rng = seed::rng(seed::derive_path(seed, &[t_idx as u64, col as u64]));
                weighted_sample(&weights, k, &mut rng)
            }
        };
        cells.extend(rows.into_iter().map(|i| (i, col)));
    }
    Ok(dataset.with_masked(&cells))
}
