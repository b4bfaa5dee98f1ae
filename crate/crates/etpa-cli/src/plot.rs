//! Minimal deterministic SVG output: line plots and heatmaps.

use std::fmt::Write as _;
use std::path::Path;

use crate::{CliError, Result};

/// Numeric table with a header row.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn new(header: Vec<String>) -> Self {
        Table { header, rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        self.rows.push(row);
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        self.rows.iter().map(|r| r[j]).collect()
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(&self.header)?;
        for r in &self.rows {
            w.write_record(r.iter().map(|v| format!("{v:.9e}")))?;
        }
        w.flush().map_err(|e| CliError::io(path, e))?;
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Style {
    /// First column is x, every other column a series.
    Line { title: String, log_x: bool, log_y: bool },
    /// Every cell is a pixel, rows top to bottom.
    Heatmap { title: String },
}

const W: f64 = 640.0;
const H: f64 = 440.0;
const PAD: f64 = 60.0;
const COLORS: [&str; 8] = ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf"];

pub fn emit_plot(table: &Table, style: &Style, path: &Path) -> Result<()> {
    if table.rows.is_empty() || table.rows[0].is_empty() {
        return Err(CliError::Config(format!("nothing to plot for {}", path.display())));
    }
    let svg = match style {
        Style::Line { title, log_x, log_y } => line_svg(table, title, *log_x, *log_y)?,
        Style::Heatmap { title } => heatmap_svg(table, title),
    };
    std::fs::write(path, svg).map_err(|e| CliError::io(path, e))
}

fn header(title: &str) -> String {
    let mut s = String::new();
    let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}">"#);
    let _ = writeln!(s, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    let _ = writeln!(s, r#"<text x="{}" y="24" font-size="14" text-anchor="middle">{}</text>"#, W / 2.0, escape(title));
    s
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn bounds(v: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = v.filter(|x| x.is_finite()).fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), x| (a.min(x), b.max(x)));
    if !lo.is_finite() {
        return (0.0, 1.0);
    }
    if hi > lo {
        (lo, hi)
    } else {
        (lo - 0.5, hi + 0.5)
    }
}

fn line_svg(t: &Table, title: &str, log_x: bool, log_y: bool) -> Result<String> {
    let tx = |v: f64| if log_x { v.log10() } else { v };
    let ty = |v: f64| if log_y { v.log10() } else { v };
    if (log_x && t.rows.iter().any(|r| r[0] <= 0.0)) || (log_y && t.rows.iter().any(|r| r[1..].iter().any(|v| *v <= 0.0))) {
        return Err(CliError::Config("log axis needs positive data".into()));
    }
    let (x0, x1) = bounds(t.rows.iter().map(|r| tx(r[0])));
    let (y0, y1) = bounds(t.rows.iter().flat_map(|r| r[1..].iter().map(|v| ty(*v))));
    let px = |v: f64| PAD + (tx(v) - x0) / (x1 - x0) * (W - 2.0 * PAD);
    let py = |v: f64| H - PAD - (ty(v) - y0) / (y1 - y0) * (H - 2.0 * PAD);
    let mut s = header(title);
    let _ = writeln!(
        s,
        r#"<rect x="{PAD}" y="{PAD}" width="{}" height="{}" fill="none" stroke="black"/>"#,
        W - 2.0 * PAD,
        H - 2.0 * PAD
    );
    let xl = t.header.first().map_or("", String::as_str);
    let _ = writeln!(s, r#"<text x="{}" y="{}" font-size="12" text-anchor="middle">{}</text>"#, W / 2.0, H - 20.0, escape(xl));
    for (k, (a, b)) in [(x0, y0), (x1, y1)].iter().enumerate() {
        let _ = writeln!(
            s,
            r#"<text x="{:.1}" y="{:.1}" font-size="10" text-anchor="middle">{:.3e}</text>"#,
            PAD + k as f64 * (W - 2.0 * PAD),
            H - PAD + 14.0,
            a
        );
        let _ = writeln!(s, r#"<text x="4" y="{:.1}" font-size="10">{:.3e}</text>"#, H - PAD - k as f64 * (H - 2.0 * PAD), b);
    }
    let ncols = t.rows[0].len();
    let series = if ncols == 1 { 0 } else { ncols - 1 };
    for j in 1..=series {
        let color = COLORS[(j - 1) % COLORS.len()];
        let pts: Vec<String> = t.rows.iter().map(|r| format!("{:.2},{:.2}", px(r[0]), py(r[j]))).collect();
        let _ = writeln!(s, r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#, pts.join(" "));
        if let Some(name) = t.header.get(j) {
            let _ = writeln!(
                s,
                r#"<text x="{:.1}" y="{:.1}" font-size="10" fill="{color}">{}</text>"#,
                W - PAD + 4.0,
                PAD + 12.0 * j as f64,
                escape(name)
            );
        }
    }
    s.push_str("</svg>\n");
    Ok(s)
}

fn heatmap_svg(t: &Table, title: &str) -> String {
    let nr = t.rows.len();
    let nc = t.rows[0].len();
    let (lo, hi) = bounds(t.rows.iter().flatten().copied());
    let cw = (W - 2.0 * PAD) / nc as f64;
    let ch = (H - 2.0 * PAD) / nr as f64;
    let mut s = header(title);
    for (i, row) in t.rows.iter().enumerate() {
        for (j, v) in row.iter().enumerate() {
            let u = ((v - lo) / (hi - lo)).clamp(0.0, 1.0);
            let (r, g, b) = ((255.0 * u) as u8, (255.0 * u * u) as u8, (255.0 * (1.0 - u)) as u8);
            let _ = writeln!(
                s,
                r#"<rect x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}" fill="rgb({r},{g},{b})"/>"#,
                PAD + j as f64 * cw,
                PAD + i as f64 * ch,
                cw + 0.05,
                ch + 0.05
            );
        }
    }
    let _ = writeln!(s, r#"<text x="{PAD}" y="{}" font-size="10">min {lo:.3e}  max {hi:.3e}</text>"#, H - 20.0);
    s.push_str("</svg>\n");
    s
}
