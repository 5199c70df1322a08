//! Result files.
//!
//! `results_long.csv`: `method,mechanism,rate,replicate,status,mse,bias,cart_evaluations`,
//! one line per record; `status` is `ok` or `failed: <reason>` and failed
//! records leave `mse`/`bias` as `NA`.
//!
//! `results_summary.csv`: `method,mechanism,rate,n,failures,mse_mean,mse_se,bias_mean,bias_se`
//! per (mechanism, rate, method), over successful records.
//!
//! `timings.csv`: `method,mechanism,rate,replicate,wall_time` in seconds. It
//! is kept apart so the other files are byte-identical across runs.
//!
//! `fig_*.svg`: MSE per mechanism and method (point chart and violins) for a
//! single rate, MSE against rate per mechanism for sweeps.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use assignforest::data::Mechanism;
use assignforest::SearchMode;

use crate::svg::{line_chart, point_chart, violin_chart, Series};
use crate::{ExperimentResult, ImportanceRecord, Method, ProbeRow, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub method: Method,
    pub mechanism: Mechanism,
    pub rate: f64,
    pub n: usize,
    pub failures: usize,
    pub mse_mean: f64,
    pub mse_se: f64,
    pub bias_mean: f64,
    pub bias_se: f64,
}

fn mean_se(v: &[f64]) -> (f64, f64) {
    if v.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    if v.len() < 2 {
        return (mean, 0.0);
    }
    let var = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

#[derive(PartialEq, Eq, PartialOrd, Ord)]
struct Key(Mechanism, u64, Method);

/// Mean and standard error per (mechanism, rate, method).
pub fn summarize(results: &[ExperimentResult]) -> Vec<SummaryRow> {
    let mut groups: BTreeMap<Key, Vec<&ExperimentResult>> = BTreeMap::new();
    for r in results {
        groups.entry(Key(r.mechanism, r.rate_point.to_bits(), r.method)).or_default().push(r);
    }
    groups
        .into_iter()
        .map(|(Key(mechanism, rate, method), recs)| {
            let mse: Vec<f64> = recs.iter().filter_map(|r| r.mse()).collect();
            let bias: Vec<f64> = recs.iter().filter_map(|r| r.bias()).collect();
            let (mse_mean, mse_se) = mean_se(&mse);
            let (bias_mean, bias_se) = mean_se(&bias);
            SummaryRow {
                method,
                mechanism,
                rate: f64::from_bits(rate),
                n: mse.len(),
                failures: recs.len() - mse.len(),
                mse_mean,
                mse_se,
                bias_mean,
                bias_se,
            }
        })
        .collect()
}

fn num(v: f64) -> String {
    if v.is_nan() {
        "NA".to_string()
    } else {
        v.to_string()
    }
}

fn prepare(out_dir: &Path) -> Result<()> {
    fs::create_dir_all(out_dir)?;
    Ok(())
}

/// Write the CSV files and figures into `out_dir`; returns the paths written.
pub fn emit_results(results: &[ExperimentResult], out_dir: impl AsRef<Path>) -> Result<Vec<PathBuf>> {
    let out_dir = out_dir.as_ref();
    if results.is_empty() {
        return Err(crate::BenchError::Config("no results to write".into()));
    }
    prepare(out_dir)?;
    let mut written = Vec::new();

    let path = out_dir.join("results_long.csv");
    let mut w = csv::Writer::from_path(&path)?;
    w.write_record(["method", "mechanism", "rate", "replicate", "status", "mse", "bias", "cart_evaluations"])?;
    for r in results {
        let (status, mse, bias, evals) = match &r.outcome {
            Ok(m) => ("ok".to_string(), num(m.mse), num(m.bias), m.cart_evaluations.to_string()),
            Err(e) => (format!("failed: {e}"), "NA".into(), "NA".into(), "NA".into()),
        };
        w.write_record([
            r.method.name().to_string(),
            r.mechanism.name().to_string(),
            r.rate_point.to_string(),
            r.replicate.to_string(),
            status,
            mse,
            bias,
            evals,
        ])?;
    }
    w.flush()?;
    written.push(path);

    let summary = summarize(results);
    let path = out_dir.join("results_summary.csv");
    let mut w = csv::Writer::from_path(&path)?;
    w.write_record(["method", "mechanism", "rate", "n", "failures", "mse_mean", "mse_se", "bias_mean", "bias_se"])?;
    for s in &summary {
        w.write_record([
            s.method.name().to_string(),
            s.mechanism.name().to_string(),
            s.rate.to_string(),
            s.n.to_string(),
            s.failures.to_string(),
            num(s.mse_mean),
            num(s.mse_se),
            num(s.bias_mean),
            num(s.bias_se),
        ])?;
    }
    w.flush()?;
    written.push(path);

    let path = out_dir.join("timings.csv");
    let mut w = csv::Writer::from_path(&path)?;
    w.write_record(["method", "mechanism", "rate", "replicate", "wall_time"])?;
    for r in results {
        w.write_record([
            r.method.name().to_string(),
            r.mechanism.name().to_string(),
            r.rate_point.to_string(),
            r.replicate.to_string(),
            format!("{:.6}", r.wall_time),
        ])?;
    }
    w.flush()?;
    written.push(path);

    for (name, svg) in figures(results, &summary) {
        let path = out_dir.join(name);
        fs::write(&path, svg)?;
        written.push(path);
    }
    Ok(written)
}

fn distinct<T: Ord + Copy>(v: impl Iterator<Item = T>) -> Vec<T> {
    let mut out: Vec<T> = v.collect();
    out.sort();
    out.dedup();
    out
}

fn figures(results: &[ExperimentResult], summary: &[SummaryRow]) -> Vec<(String, String)> {
    let mechanisms = distinct(summary.iter().map(|s| s.mechanism));
    let methods = distinct(summary.iter().map(|s| s.method));
    let rates = distinct(summary.iter().map(|s| s.rate.to_bits()));
    let mut figs = Vec::new();

    if rates.len() > 1 {
        for &mech in &mechanisms {
            let series: Vec<Series> = methods
                .iter()
                .map(|&method| Series {
                    name: method.name().to_string(),
                    points: summary
                        .iter()
                        .filter(|s| s.mechanism == mech && s.method == method && s.n > 0)
                        .map(|s| (s.rate, s.mse_mean))
                        .collect(),
                })
                .collect();
            figs.push((
                format!("fig_rates_{}.svg", mech.name().to_ascii_lowercase()),
                line_chart(&format!("MSE against missing rate, {mech}"), "missing rate of x4", "average test MSE", &series),
            ));
        }
        if methods.len() == 1 {
            let series: Vec<Series> = mechanisms
                .iter()
                .map(|&mech| Series {
                    name: mech.name().to_string(),
                    points: summary.iter().filter(|s| s.mechanism == mech && s.n > 0).map(|s| (s.rate, s.mse_mean)).collect(),
                })
                .collect();
            figs.push((
                "fig_rates_all.svg".to_string(),
                line_chart(&format!("MSE against missing rate, {}", methods[0]), "missing rate of x4", "average test MSE", &series),
            ));
        }
        return figs;
    }

    let categories: Vec<String> = mechanisms.iter().map(|m| m.name().to_string()).collect();
    for (file, label, pick) in [
        ("fig_mse.svg", "average test MSE", (|s: &SummaryRow| s.mse_mean) as fn(&SummaryRow) -> f64),
        ("fig_bias.svg", "average test bias", |s: &SummaryRow| s.bias_mean),
    ] {
        let series: Vec<(String, Vec<Option<f64>>)> = methods
            .iter()
            .map(|&method| {
                let values = mechanisms
                    .iter()
                    .map(|&mech| {
                        summary.iter().find(|s| s.mechanism == mech && s.method == method && s.n > 0).map(pick)
                    })
                    .collect();
                (method.name().to_string(), values)
            })
            .collect();
        figs.push((file.to_string(), point_chart(&format!("{label} per mechanism"), label, &categories, &series)));
    }
    for &mech in &mechanisms {
        let groups: Vec<(String, Vec<f64>)> = methods
            .iter()
            .map(|&method| {
                let sample = results.iter().filter(|r| r.mechanism == mech && r.method == method).filter_map(|r| r.mse()).collect();
                (method.name().to_string(), sample)
            })
            .collect();
        figs.push((
            format!("fig_violin_{}.svg", mech.name().to_ascii_lowercase()),
            violin_chart(&format!("test MSE across replicates, {mech}"), "test MSE", &groups),
        ));
    }
    figs
}

/// `importance.csv`: `replicate,feature,pct_inc_mse,inc_node_purity` with
/// 1-based features, plus a violin chart per measure.
pub fn emit_importance(records: &[ImportanceRecord], out_dir: impl AsRef<Path>) -> Result<Vec<PathBuf>> {
    let out_dir = out_dir.as_ref();
    prepare(out_dir)?;
    let path = out_dir.join("importance.csv");
    let mut w = csv::Writer::from_path(&path)?;
    w.write_record(["replicate", "feature", "pct_inc_mse", "inc_node_purity"])?;
    for r in records {
        w.write_record([r.replicate.to_string(), format!("x{}", r.feature + 1), num(r.pct_inc_mse), num(r.inc_node_purity)])?;
    }
    w.flush()?;
    let mut written = vec![path];
    let features = distinct(records.iter().map(|r| r.feature));
    for (file, label, pick) in [
        ("fig_importance_mse.svg", "permutation importance", (|r: &ImportanceRecord| r.pct_inc_mse) as fn(&ImportanceRecord) -> f64),
        ("fig_importance_purity.svg", "node purity increase", |r: &ImportanceRecord| r.inc_node_purity),
    ] {
        let groups: Vec<(String, Vec<f64>)> = features
            .iter()
            .map(|&h| (format!("x{}", h + 1), records.iter().filter(|r| r.feature == h).map(pick).collect()))
            .collect();
        let path = out_dir.join(file);
        fs::write(&path, violin_chart(label, label, &groups))?;
        written.push(path);
    }
    Ok(written)
}

/// `complexity.csv`: `n,mode,cart_evaluations`, plus a log-log line chart.
pub fn emit_probe(rows: &[ProbeRow], out_dir: impl AsRef<Path>) -> Result<Vec<PathBuf>> {
    let out_dir = out_dir.as_ref();
    prepare(out_dir)?;
    let path = out_dir.join("complexity.csv");
    let mut w = csv::Writer::from_path(&path)?;
    w.write_record(["n", "mode", "cart_evaluations"])?;
    for r in rows {
        w.write_record([r.n.to_string(), r.mode.name().to_string(), r.cart_evaluations.to_string()])?;
    }
    w.flush()?;
    let series: Vec<Series> = [SearchMode::Exhaustive, SearchMode::Dichotomy]
        .iter()
        .map(|&mode| Series {
            name: mode.name().to_string(),
            points: rows
                .iter()
                .filter(|r| r.mode == mode && r.cart_evaluations > 0)
                .map(|r| ((r.n as f64).log10(), (r.cart_evaluations as f64).log10()))
                .collect(),
        })
        .collect();
    let fig = out_dir.join("fig_complexity.svg");
    fs::write(&fig, line_chart("criterion evaluations per tree", "log10 n", "log10 evaluations", &series))?;
    Ok(vec![path, fig])
}
