//! Cross-seed summaries and SVG regret curves.

use std::fmt::Write;

#[derive(Clone, Debug, PartialEq)]
pub struct SummaryRow {
    pub algo: String,
    pub seeds: usize,
    pub mean: f64,
    /// Sample standard deviation; 0 for a single seed.
    pub std: f64,
}

/// Mean and standard deviation of final regret per algorithm, in order of
/// first appearance.
pub fn summarize(finals: &[(String, u64)]) -> Vec<SummaryRow> {
    let mut order: Vec<(String, Vec<f64>)> = Vec::new();
    for (algo, r) in finals {
        match order.iter_mut().find(|(a, _)| a == algo) {
            Some((_, v)) => v.push(*r as f64),
            None => order.push((algo.clone(), vec![*r as f64])),
        }
    }
    order
        .into_iter()
        .map(|(algo, v)| {
            let n = v.len() as f64;
            let mean = v.iter().sum::<f64>() / n;
            let std =
                if v.len() > 1 { (v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt() } else { 0.0 };
            SummaryRow { algo, seeds: v.len(), mean, std }
        })
        .collect()
}

pub fn render_summary(rows: &[SummaryRow]) -> String {
    let width = rows.iter().map(|r| r.algo.len()).max().unwrap_or(4).max(4);
    let mut out = format!("{:width$}  seeds  final cumulative regret\n", "algo");
    for r in rows {
        let _ = writeln!(out, "{:width$}  {:>5}  {:.2} ± {:.2}", r.algo, r.seeds, r.mean, r.std);
    }
    out
}

/// One named regret curve; several seeds of a series are averaged.
#[derive(Clone, Debug, PartialEq)]
pub struct Series {
    pub label: String,
    pub runs: Vec<Vec<u64>>,
}

impl Series {
    /// Pointwise mean over the runs, truncated to the shortest run.
    pub fn mean_curve(&self) -> Vec<f64> {
        let len = self.runs.iter().map(Vec::len).min().unwrap_or(0);
        (0..len).map(|t| self.runs.iter().map(|r| r[t] as f64).sum::<f64>() / self.runs.len() as f64).collect()
    }
}

/// Collects curves into series by label, keeping first-appearance order.
pub fn group_series(curves: Vec<(String, Vec<u64>)>) -> Vec<Series> {
    let mut out: Vec<Series> = Vec::new();
    for (label, curve) in curves {
        match out.iter_mut().find(|s| s.label == label) {
            Some(s) => s.runs.push(curve),
            None => out.push(Series { label, runs: vec![curve] }),
        }
    }
    out
}

const PALETTE: [&str; 8] = ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf"];

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

/// Cumulative regret against `t`, one polyline per series.
pub fn render_svg(series: &[Series]) -> String {
    let (w, h) = (720.0, 440.0);
    let (left, right, top, bottom) = (70.0, 170.0, 20.0, 50.0);
    let (pw, ph) = (w - left - right, h - top - bottom);
    let curves: Vec<Vec<f64>> = series.iter().map(Series::mean_curve).collect();
    let t_max = curves.iter().map(Vec::len).max().unwrap_or(0).max(1) as f64;
    let y_max = curves.iter().flatten().copied().fold(0.0_f64, f64::max).max(1.0);
    let x = |t: f64| left + pw * t / t_max;
    let y = |v: f64| top + ph * (1.0 - v / y_max);

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect x="0" y="0" width="{w}" height="{h}" fill="white"/>"#);
    let _ = writeln!(s, r#"<path d="M{left},{top} V{} H{}" fill="none" stroke="black"/>"#, top + ph, left + pw);
    for i in 0..=4 {
        let f = i as f64 / 4.0;
        let tv = t_max * f;
        let rv = y_max * f;
        let _ = writeln!(
            s,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{}</text>"#,
            x(tv),
            top + ph + 16.0,
            tv.round()
        );
        let _ = writeln!(
            s,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="end">{}</text>"#,
            left - 6.0,
            y(rv) + 4.0,
            rv.round()
        );
    }
    let _ = writeln!(s, r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">t</text>"#, left + pw / 2.0, h - 10.0);
    let _ = writeln!(
        s,
        r#"<text x="16" y="{:.1}" text-anchor="middle" transform="rotate(-90 16 {:.1})">cumulative regret</text>"#,
        top + ph / 2.0,
        top + ph / 2.0
    );
    for (i, (ser, curve)) in series.iter().zip(&curves).enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        if !curve.is_empty() {
            let step = (curve.len() / 600).max(1);
            let mut pts = format!("{:.1},{:.1}", x(0.0), y(0.0));
            for (t, v) in curve.iter().enumerate() {
                if (t + 1) % step == 0 || t + 1 == curve.len() {
                    let _ = write!(pts, " {:.1},{:.1}", x((t + 1) as f64), y(*v));
                }
            }
            let _ = writeln!(s, r#"<polyline points="{pts}" fill="none" stroke="{color}" stroke-width="1.5"/>"#);
        }
        let ly = top + 14.0 + 18.0 * i as f64;
        let lx = left + pw + 14.0;
        let _ = writeln!(
            s,
            r#"<line x1="{lx}" y1="{ly}" x2="{}" y2="{ly}" stroke="{color}" stroke-width="2"/>"#,
            lx + 20.0
        );
        let _ = writeln!(s, r#"<text x="{}" y="{}">{}</text>"#, lx + 26.0, ly + 4.0, escape(&ser.label));
    }
    s.push_str("</svg>\n");
    s
}
