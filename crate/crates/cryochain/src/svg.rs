//! Static SVG plots rendered from report CSVs.

use std::fmt::Write;

use crate::error::CliError;

const W: f64 = 640.0;
const H: f64 = 420.0;
const LEFT: f64 = 80.0;
const RIGHT: f64 = 150.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 60.0;
const COLORS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"];

/// Columns of a CSV: header names and, per column, the raw cells.
#[derive(Debug, Clone, PartialEq)]
pub struct CsvData {
    pub header: Vec<String>,
    pub cells: Vec<Vec<String>>,
}

impl CsvData {
    pub fn parse(bytes: &[u8]) -> Result<Self, CliError> {
        let mut r = csv::Reader::from_reader(bytes);
        let err = |e: csv::Error| CliError::Runtime(format!("cannot read csv: {e}"));
        let header: Vec<String> = r.headers().map_err(err)?.iter().map(String::from).collect();
        let mut cells = vec![Vec::new(); header.len()];
        for rec in r.records() {
            let rec = rec.map_err(err)?;
            for (k, c) in rec.iter().enumerate() {
                cells[k].push(c.to_string());
            }
        }
        Ok(Self { header, cells })
    }

    pub fn text(&self, name: &str) -> Option<&[String]> {
        let k = self.header.iter().position(|h| h == name)?;
        Some(&self.cells[k])
    }

    pub fn numbers(&self, name: &str) -> Option<Vec<f64>> {
        self.text(name)?.iter().map(|c| c.parse().ok()).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Plot {
    Lines { x: &'static str, ys: &'static [&'static str], log_y: bool },
    Heatmap { x: &'static str, y: &'static str, z: &'static str },
    Bars { y: &'static str },
}

/// Plots drawn for each (experiment, table).
fn plot_for(experiment: &str, table: &str) -> Option<Plot> {
    use Plot::*;
    Some(match (experiment, table) {
        ("bias_scan", "bias_scan") => Lines {
            x: "bias_a",
            ys: &["cryo_count_rate_hz", "conventional_count_rate_hz", "cryo_dark_rate_hz", "conventional_dark_rate_hz"],
            log_y: true,
        },
        ("pnr", "histogram2d") => Heatmap { x: "rising_s", y: "falling_s", z: "count" },
        ("pnr", "projection") => Lines { x: "projection_s", ys: &["count"], log_y: false },
        ("sweep", "monitors") => Lines { x: "threshold_v", ys: &["lower_rate_hz", "upper_rate_hz"], log_y: false },
        ("sweep", "driver_map") => Heatmap { x: "threshold1_v", y: "threshold2_v", z: "driver_rate_hz" },
        ("laser_readout", "trace") => Lines { x: "time_ns", ys: &["drive_v", "unfiltered_v", "filtered_v"], log_y: false },
        ("laser_readout", "spectra") => Lines { x: "freq_hz", ys: &["pre_filter_v", "post_filter_v"], log_y: true },
        ("laser_readout", "jitter") => Bars { y: "jitter_ps" },
        ("latency", "budget") => Bars { y: "delay_ns" },
        ("heat", "components") => Bars { y: "power_mw" },
        ("simulate", "trace") => Lines {
            x: "time_ns",
            ys: &["chain_v", "lower", "upper", "driver_v", "transmission"],
            log_y: false,
        },
        _ => return None,
    })
}

/// SVG files for every plottable CSV among `files`.
pub fn render_report(experiment: &str, files: &[(String, Vec<u8>)]) -> Result<Vec<(String, Vec<u8>)>, CliError> {
    let mut out = Vec::new();
    for (rel, bytes) in files {
        let Some(table) = rel.strip_suffix(".csv") else { continue };
        let Some(plot) = plot_for(experiment, table) else { continue };
        let data = CsvData::parse(bytes)?;
        let missing = |c: &str| CliError::Runtime(format!("{rel}: column {c} missing or not numeric"));
        let title = format!("{experiment}: {table}");
        let svg = match plot {
            Plot::Lines { x, ys, log_y } => {
                let xv = data.numbers(x).ok_or_else(|| missing(x))?;
                let series = ys
                    .iter()
                    .map(|&c| data.numbers(c).map(|v| (c, v)).ok_or_else(|| missing(c)))
                    .collect::<Result<Vec<_>, _>>()?;
                line_plot(&title, x, &xv, &series, log_y)
            }
            Plot::Heatmap { x, y, z } => {
                let xv = data.numbers(x).ok_or_else(|| missing(x))?;
                let yv = data.numbers(y).ok_or_else(|| missing(y))?;
                let zv = data.numbers(z).ok_or_else(|| missing(z))?;
                heatmap(&title, (x, &xv), (y, &yv), &zv)
            }
            Plot::Bars { y } => {
                let labels = data.text("label").ok_or_else(|| missing("label"))?;
                let v = data.numbers(y).ok_or_else(|| missing(y))?;
                bar_chart(&title, y, labels, &v)
            }
        };
        out.push((format!("svg/{table}.svg"), svg.into_bytes()));
    }
    Ok(out)
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn finite_range(v: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = v
        .filter(|x| x.is_finite())
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), x| (a.min(x), b.max(x)));
    if !lo.is_finite() {
        (0.0, 1.0)
    } else if hi > lo {
        (lo, hi)
    } else {
        (lo - 0.5, hi + 0.5)
    }
}

fn header(title: &str) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    let _ = writeln!(s, r#"<text x="{}" y="22" text-anchor="middle" font-size="14">{}</text>"#, W / 2.0, escape(title));
    s
}

fn axes(s: &mut String, x_label: &str, y_label: &str, x_range: (f64, f64), y_range: (f64, f64), log_y: bool) {
    let (x0, x1, y0, y1) = (LEFT, W - RIGHT, H - BOTTOM, TOP);
    let _ = writeln!(s, r#"<rect x="{x0}" y="{y1}" width="{}" height="{}" fill="none" stroke="black"/>"#, x1 - x0, y0 - y1);
    for k in 0..=4 {
        let f = k as f64 / 4.0;
        let xv = x_range.0 + f * (x_range.1 - x_range.0);
        let yv = y_range.0 + f * (y_range.1 - y_range.0);
        let yv = if log_y { 10f64.powf(yv) } else { yv };
        let px = x0 + f * (x1 - x0);
        let py = y0 - f * (y0 - y1);
        let _ = writeln!(s, r#"<text x="{px}" y="{}" text-anchor="middle">{}</text>"#, y0 + 16.0, tick(xv));
        let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="end">{}</text>"#, x0 - 4.0, py + 4.0, tick(yv));
    }
    let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#, (x0 + x1) / 2.0, H - 20.0, escape(x_label));
    let _ = writeln!(
        s,
        r#"<text x="16" y="{0}" text-anchor="middle" transform="rotate(-90 16 {0})">{1}</text>"#,
        (y0 + y1) / 2.0,
        escape(y_label)
    );
}

fn tick(v: f64) -> String {
    if v == 0.0 {
        "0".into()
    } else if v.abs() >= 1e4 || v.abs() < 1e-2 {
        format!("{v:.2e}")
    } else {
        format!("{v:.3}")
    }
}

fn to_px(v: f64, range: (f64, f64), p0: f64, p1: f64) -> f64 {
    p0 + (v - range.0) / (range.1 - range.0) * (p1 - p0)
}

/// One polyline per series against a shared x column.
pub fn line_plot(title: &str, x_label: &str, x: &[f64], series: &[(&str, Vec<f64>)], log_y: bool) -> String {
    let tr = |v: f64| if log_y { if v > 0.0 { v.log10() } else { f64::NAN } } else { v };
    let xr = finite_range(x.iter().copied());
    let yr = finite_range(series.iter().flat_map(|(_, v)| v.iter().map(|&y| tr(y))));
    let mut s = header(title);
    axes(&mut s, x_label, if log_y { "value (log)" } else { "value" }, xr, yr, log_y);
    for (k, (name, ys)) in series.iter().enumerate() {
        let color = COLORS[k % COLORS.len()];
        let mut pts = String::new();
        for (&xv, &yv) in x.iter().zip(ys) {
            let yv = tr(yv);
            if xv.is_finite() && yv.is_finite() {
                let _ = write!(pts, "{:.2},{:.2} ", to_px(xv, xr, LEFT, W - RIGHT), to_px(yv, yr, H - BOTTOM, TOP));
            }
        }
        let _ = writeln!(s, r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#, pts.trim_end());
        let ly = TOP + 14.0 + 18.0 * k as f64;
        let _ = writeln!(s, r#"<rect x="{}" y="{}" width="12" height="3" fill="{color}"/>"#, W - RIGHT + 10.0, ly - 4.0);
        let _ = writeln!(s, r#"<text x="{}" y="{ly}">{}</text>"#, W - RIGHT + 26.0, escape(name));
    }
    s.push_str("</svg>\n");
    s
}

/// Map of `z` over the grid given by the distinct `x` and `y` values.
pub fn heatmap(title: &str, x: (&str, &[f64]), y: (&str, &[f64]), z: &[f64]) -> String {
    let distinct = |v: &[f64]| {
        let mut d: Vec<f64> = v.iter().copied().filter(|a| a.is_finite()).collect();
        d.sort_by(f64::total_cmp);
        d.dedup();
        d
    };
    let (xs, ys) = (distinct(x.1), distinct(y.1));
    let zr = finite_range(z.iter().copied());
    let step = |d: &[f64]| if d.len() > 1 { (d[d.len() - 1] - d[0]) / (d.len() - 1) as f64 } else { 1.0 };
    let (dx, dy) = (step(&xs), step(&ys));
    let xr = (xs.first().copied().unwrap_or(0.0) - dx / 2.0, xs.last().copied().unwrap_or(1.0) + dx / 2.0);
    let yr = (ys.first().copied().unwrap_or(0.0) - dy / 2.0, ys.last().copied().unwrap_or(1.0) + dy / 2.0);
    let mut s = header(title);
    axes(&mut s, x.0, y.0, xr, yr, false);
    let cw = (W - RIGHT - LEFT) / xs.len().max(1) as f64;
    let ch = (H - BOTTOM - TOP) / ys.len().max(1) as f64;
    for ((&xv, &yv), &zv) in x.1.iter().zip(y.1).zip(z) {
        if !(xv.is_finite() && yv.is_finite() && zv.is_finite()) {
            continue;
        }
        let f = (zv - zr.0) / (zr.1 - zr.0);
        let px = to_px(xv, xr, LEFT, W - RIGHT) - cw / 2.0;
        let py = to_px(yv, yr, H - BOTTOM, TOP) - ch / 2.0;
        let _ = writeln!(s, r#"<rect x="{px:.2}" y="{py:.2}" width="{:.2}" height="{:.2}" fill="{}"/>"#, cw + 0.3, ch + 0.3, shade(f));
    }
    let _ = writeln!(s, r#"<text x="{}" y="{}">max {}</text>"#, W - RIGHT + 10.0, TOP + 14.0, tick(zr.1));
    let _ = writeln!(s, r#"<text x="{}" y="{}">min {}</text>"#, W - RIGHT + 10.0, TOP + 32.0, tick(zr.0));
    s.push_str("</svg>\n");
    s
}

/// White to dark blue.
fn shade(f: f64) -> String {
    let f = f.clamp(0.0, 1.0);
    let c = |a: f64, b: f64| (a + (b - a) * f).round() as u8;
    format!("#{:02x}{:02x}{:02x}", c(255.0, 8.0), c(255.0, 48.0), c(255.0, 107.0))
}

/// One bar per labelled row.
pub fn bar_chart(title: &str, y_label: &str, labels: &[String], values: &[f64]) -> String {
    let hi = values.iter().copied().filter(|v| v.is_finite()).fold(0.0, f64::max);
    let yr = (0.0, if hi > 0.0 { hi } else { 1.0 });
    let mut s = header(title);
    axes(&mut s, "", y_label, (0.0, labels.len().max(1) as f64), yr, false);
    let bw = (W - RIGHT - LEFT) / labels.len().max(1) as f64;
    for (k, (label, &v)) in labels.iter().zip(values).enumerate() {
        let v = if v.is_finite() { v.max(0.0) } else { 0.0 };
        let top = to_px(v, yr, H - BOTTOM, TOP);
        let x = LEFT + k as f64 * bw;
        let _ = writeln!(
            s,
            r#"<rect x="{:.2}" y="{top:.2}" width="{:.2}" height="{:.2}" fill="{}"/>"#,
            x + 0.1 * bw,
            0.8 * bw,
            H - BOTTOM - top,
            COLORS[0]
        );
        let _ = writeln!(s, r#"<text x="{:.2}" y="{:.2}" text-anchor="middle" font-size="10">{}</text>"#, x + bw / 2.0, top - 4.0, escape(label));
    }
    s.push_str("</svg>\n");
    s
}
