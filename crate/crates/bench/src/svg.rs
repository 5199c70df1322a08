//! Minimal standalone SVG charts.

use std::fmt::Write;

const W: f64 = 720.0;
const H: f64 = 440.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 170.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 60.0;
const PALETTE: [&str; 8] = ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f"];

pub struct Series {
    pub name: String,
    pub points: Vec<(f64, f64)>,
}

struct Frame {
    x0: f64,
    x1: f64,
    y0: f64,
    y1: f64,
}

impl Frame {
    fn new(xs: impl Iterator<Item = f64> + Clone, ys: impl Iterator<Item = f64> + Clone) -> Self {
        let (mut x0, mut x1) = bounds(xs);
        let (mut y0, mut y1) = bounds(ys);
        if x1 <= x0 {
            x0 -= 0.5;
            x1 += 0.5;
        }
        if y1 <= y0 {
            y0 -= 0.5;
            y1 += 0.5;
        }
        let pad = 0.05 * (y1 - y0);
        Self { x0, x1, y0: y0 - pad, y1: y1 + pad }
    }

    fn px(&self, x: f64) -> f64 {
        LEFT + (x - self.x0) / (self.x1 - self.x0) * (W - LEFT - RIGHT)
    }

    fn py(&self, y: f64) -> f64 {
        H - BOTTOM - (y - self.y0) / (self.y1 - self.y0) * (H - TOP - BOTTOM)
    }
}

fn bounds(v: impl Iterator<Item = f64>) -> (f64, f64) {
    v.filter(|x| x.is_finite()).fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), x| (lo.min(x), hi.max(x)))
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn header(out: &mut String, title: &str, x_label: &str, y_label: &str) {
    let _ = write!(
        out,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{W}\" height=\"{H}\" viewBox=\"0 0 {W} {H}\" font-family=\"sans-serif\" font-size=\"12\">\n\
         <rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n\
         <text x=\"{}\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">{}</text>\n\
         <text x=\"{}\" y=\"{}\" text-anchor=\"middle\">{}</text>\n\
         <text x=\"16\" y=\"{}\" text-anchor=\"middle\" transform=\"rotate(-90 16 {})\">{}</text>\n",
        (LEFT + W - RIGHT) / 2.0,
        escape(title),
        (LEFT + W - RIGHT) / 2.0,
        H - 15.0,
        escape(x_label),
        (TOP + H - BOTTOM) / 2.0,
        (TOP + H - BOTTOM) / 2.0,
        escape(y_label),
    );
}

fn y_axis(out: &mut String, f: &Frame) {
    let _ = writeln!(
        out,
        "<line x1=\"{LEFT}\" y1=\"{TOP}\" x2=\"{LEFT}\" y2=\"{}\" stroke=\"black\"/>\n<line x1=\"{LEFT}\" y1=\"{0}\" x2=\"{1}\" y2=\"{0}\" stroke=\"black\"/>",
        H - BOTTOM,
        W - RIGHT
    );
    for k in 0..=5 {
        let y = f.y0 + (f.y1 - f.y0) * k as f64 / 5.0;
        let py = f.py(y);
        let _ = writeln!(
            out,
            "<line x1=\"{}\" y1=\"{py:.2}\" x2=\"{LEFT}\" y2=\"{py:.2}\" stroke=\"black\"/><text x=\"{}\" y=\"{:.2}\" text-anchor=\"end\">{y:.2}</text>",
            LEFT - 4.0,
            LEFT - 6.0,
            py + 4.0
        );
    }
}

fn legend(out: &mut String, names: &[String]) {
    for (k, name) in names.iter().enumerate() {
        let y = TOP + 10.0 + 18.0 * k as f64;
        let _ = writeln!(
            out,
            "<rect x=\"{}\" y=\"{:.2}\" width=\"12\" height=\"12\" fill=\"{}\"/><text x=\"{}\" y=\"{:.2}\">{}</text>",
            W - RIGHT + 15.0,
            y - 10.0,
            PALETTE[k % PALETTE.len()],
            W - RIGHT + 32.0,
            y,
            escape(name)
        );
    }
}

/// Lines with markers over a numeric x axis.
pub fn line_chart(title: &str, x_label: &str, y_label: &str, series: &[Series]) -> String {
    let all = series.iter().flat_map(|s| s.points.iter().copied());
    let f = Frame::new(all.clone().map(|p| p.0), all.map(|p| p.1));
    let mut out = String::new();
    header(&mut out, title, x_label, y_label);
    y_axis(&mut out, &f);
    let mut xs: Vec<f64> = series.iter().flat_map(|s| s.points.iter().map(|p| p.0)).collect();
    xs.sort_by(f64::total_cmp);
    xs.dedup();
    for x in xs {
        let px = f.px(x);
        let _ = writeln!(
            out,
            "<line x1=\"{px:.2}\" y1=\"{0}\" x2=\"{px:.2}\" y2=\"{1}\" stroke=\"black\"/><text x=\"{px:.2}\" y=\"{2}\" text-anchor=\"middle\">{x}</text>",
            H - BOTTOM,
            H - BOTTOM + 4.0,
            H - BOTTOM + 18.0
        );
    }
    for (k, s) in series.iter().enumerate() {
        let color = PALETTE[k % PALETTE.len()];
        let pts: Vec<String> = s.points.iter().map(|&(x, y)| format!("{:.2},{:.2}", f.px(x), f.py(y))).collect();
        let _ = writeln!(out, "<polyline fill=\"none\" stroke=\"{color}\" stroke-width=\"2\" points=\"{}\"/>", pts.join(" "));
        for &(x, y) in &s.points {
            let _ = writeln!(out, "<circle cx=\"{:.2}\" cy=\"{:.2}\" r=\"3\" fill=\"{color}\"/>", f.px(x), f.py(y));
        }
    }
    legend(&mut out, &series.iter().map(|s| s.name.clone()).collect::<Vec<_>>());
    out.push_str("</svg>\n");
    out
}

/// One marker per (category, series); series are offset horizontally.
pub fn point_chart(title: &str, y_label: &str, categories: &[String], series: &[(String, Vec<Option<f64>>)]) -> String {
    let ys = series.iter().flat_map(|s| s.1.iter().flatten().copied());
    let f = Frame::new([-0.5, categories.len() as f64 - 0.5].into_iter(), ys);
    let mut out = String::new();
    header(&mut out, title, "mechanism", y_label);
    y_axis(&mut out, &f);
    for (c, name) in categories.iter().enumerate() {
        let _ = writeln!(
            out,
            "<text x=\"{:.2}\" y=\"{}\" text-anchor=\"middle\">{}</text>",
            f.px(c as f64),
            H - BOTTOM + 18.0,
            escape(name)
        );
    }
    let width = 0.7;
    let m = series.len().max(1) as f64;
    for (k, (_, values)) in series.iter().enumerate() {
        let color = PALETTE[k % PALETTE.len()];
        let offset = if m > 1.0 { -width / 2.0 + width * k as f64 / (m - 1.0) } else { 0.0 };
        for (c, v) in values.iter().enumerate() {
            if let Some(v) = v {
                let _ = writeln!(
                    out,
                    "<circle cx=\"{:.2}\" cy=\"{:.2}\" r=\"4\" fill=\"{color}\"/>",
                    f.px(c as f64 + offset),
                    f.py(*v)
                );
            }
        }
    }
    legend(&mut out, &series.iter().map(|s| s.0.clone()).collect::<Vec<_>>());
    out.push_str("</svg>\n");
    out
}

fn kde(sample: &[f64], at: f64, bandwidth: f64) -> f64 {
    let norm = (2.0 * std::f64::consts::PI).sqrt() * bandwidth * sample.len() as f64;
    sample.iter().map(|&s| (-0.5 * ((at - s) / bandwidth).powi(2)).exp()).sum::<f64>() / norm
}

/// Gaussian-kernel violins, one per group, with the mean marked.
pub fn violin_chart(title: &str, y_label: &str, groups: &[(String, Vec<f64>)]) -> String {
    let ys = groups.iter().flat_map(|g| g.1.iter().copied());
    let f = Frame::new([-0.5, groups.len() as f64 - 0.5].into_iter(), ys);
    let mut out = String::new();
    header(&mut out, title, "method", y_label);
    y_axis(&mut out, &f);
    let half_width = 0.4 * (W - LEFT - RIGHT) / groups.len().max(1) as f64;
    for (k, (name, sample)) in groups.iter().enumerate() {
        let cx = f.px(k as f64);
        let _ = writeln!(
            out,
            "<text x=\"{cx:.2}\" y=\"{}\" text-anchor=\"middle\">{}</text>",
            H - BOTTOM + 18.0,
            escape(name)
        );
        if sample.is_empty() {
            continue;
        }
        let n = sample.len() as f64;
        let mean = sample.iter().sum::<f64>() / n;
        let sd = (sample.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n.max(2.0)).sqrt();
        let (lo, hi) = bounds(sample.iter().copied());
        let bandwidth = if sd > 0.0 { 1.06 * sd * n.powf(-0.2) } else { 1e-3 * mean.abs().max(1.0) };
        let grid: Vec<f64> = (0..=40).map(|i| lo - bandwidth + (hi - lo + 2.0 * bandwidth) * i as f64 / 40.0).collect();
        let dens: Vec<f64> = grid.iter().map(|&y| kde(sample, y, bandwidth)).collect();
        let peak = dens.iter().copied().fold(0.0, f64::max).max(f64::MIN_POSITIVE);
        let mut pts: Vec<String> = grid
            .iter()
            .zip(&dens)
            .map(|(&y, &d)| format!("{:.2},{:.2}", cx + half_width * d / peak, f.py(y)))
            .collect();
        pts.extend(grid.iter().zip(&dens).rev().map(|(&y, &d)| format!("{:.2},{:.2}", cx - half_width * d / peak, f.py(y))));
        let color = PALETTE[k % PALETTE.len()];
        let _ = writeln!(
            out,
            "<polygon points=\"{}\" fill=\"{color}\" fill-opacity=\"0.4\" stroke=\"{color}\"/>",
            pts.join(" ")
        );
        let _ = writeln!(
            out,
            "<line x1=\"{:.2}\" y1=\"{2:.2}\" x2=\"{:.2}\" y2=\"{2:.2}\" stroke=\"black\" stroke-width=\"2\"/>",
            cx - half_width / 2.0,
            cx + half_width / 2.0,
            f.py(mean)
        );
    }
    out.push_str("</svg>\n");
    out
}
