//! Hand-written SVG figures: median error against `T` with an IQR band per
//! `N`, and an `(N, T)` heatmap of the median error.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{HarnessError, Result};
use crate::report::{summarize, CellSummary};
use crate::sweep::ResultRow;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 420.0;
const MARGIN_L: f64 = 72.0;
const MARGIN_R: f64 = 120.0;
const MARGIN_T: f64 = 40.0;
const MARGIN_B: f64 = 56.0;

const PALETTE: [&str; 8] = [
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#17becf",
];

/// Writes `error_vs_T_w<i>.svg` and `heatmap_w<i>.svg` for every width in
/// `rows` and returns the paths written.
pub fn emit_plots(rows: &[ResultRow], dir: &Path) -> Result<Vec<PathBuf>> {
    if rows.is_empty() {
        return Err(HarnessError::EmptyRows);
    }
    fs::create_dir_all(dir).map_err(|e| HarnessError::io(dir, e))?;
    let summary = summarize(rows);
    let mut widths: Vec<f64> = Vec::new();
    for s in &summary {
        if !widths.iter().any(|w| w.to_bits() == s.width.to_bits()) {
            widths.push(s.width);
        }
    }
    let mut written = Vec::new();
    for (i, &w) in widths.iter().enumerate() {
        let cells: Vec<&CellSummary> = summary
            .iter()
            .filter(|s| s.width.to_bits() == w.to_bits())
            .collect();
        for (name, svg) in [
            (format!("error_vs_T_w{i}.svg"), error_chart(&cells, w)),
            (format!("heatmap_w{i}.svg"), heatmap(&cells, w)),
        ] {
            let path = dir.join(name);
            fs::write(&path, svg).map_err(|e| HarnessError::io(&path, e))?;
            written.push(path);
        }
    }
    Ok(written)
}

fn sorted_unique(values: impl Iterator<Item = usize>) -> Vec<usize> {
    let mut v: Vec<usize> = values.collect();
    v.sort_unstable();
    v.dedup();
    v
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn header(out: &mut String, title: &str) {
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        out,
        r#"<text x="{}" y="22" text-anchor="middle" font-size="14">{}</text>"#,
        WIDTH / 2.0,
        escape(title)
    );
}

/// Log-scale axis mapping onto `[lo_px, hi_px]`.
struct LogAxis {
    lo: f64,
    hi: f64,
    lo_px: f64,
    hi_px: f64,
}

impl LogAxis {
    fn new(min: f64, max: f64, lo_px: f64, hi_px: f64) -> Self {
        let (mut lo, mut hi) = (min.log10(), max.log10());
        if !(hi - lo).is_normal() {
            lo -= 0.5;
            hi += 0.5;
        }
        LogAxis { lo, hi, lo_px, hi_px }
    }

    fn map(&self, v: f64) -> f64 {
        self.lo_px + (v.log10() - self.lo) / (self.hi - self.lo) * (self.hi_px - self.lo_px)
    }

    fn decades(&self) -> Vec<f64> {
        (self.lo.ceil() as i32..=self.hi.floor() as i32)
            .map(|e| 10f64.powi(e))
            .collect()
    }
}

fn error_chart(cells: &[&CellSummary], width: f64) -> String {
    let ts = sorted_unique(cells.iter().map(|c| c.len));
    let ns = sorted_unique(cells.iter().map(|c| c.per_cluster));
    let finite: Vec<f64> = cells
        .iter()
        .flat_map(|c| [c.q25_error, c.q75_error, c.median_error])
        .filter(|v| v.is_finite() && *v > 0.0)
        .collect();
    let mut out = String::new();
    header(&mut out, &format!("Markov-parameter error vs T (width {width})"));
    if finite.is_empty() {
        let _ = writeln!(
            out,
            r#"<text x="{}" y="{}" text-anchor="middle">no successful trials</text></svg>"#,
            WIDTH / 2.0,
            HEIGHT / 2.0
        );
        return out;
    }
    let ymin = finite.iter().copied().fold(f64::INFINITY, f64::min);
    let ymax = finite.iter().copied().fold(0.0, f64::max);
    let x = LogAxis::new(ts[0] as f64, *ts.last().unwrap() as f64, MARGIN_L, WIDTH - MARGIN_R);
    let y = LogAxis::new(ymin, ymax, HEIGHT - MARGIN_B, MARGIN_T);

    let _ = writeln!(
        out,
        r#"<g stroke="black" fill="none"><line x1="{l}" y1="{b}" x2="{r}" y2="{b}"/><line x1="{l}" y1="{b}" x2="{l}" y2="{t}"/></g>"#,
        l = MARGIN_L,
        r = WIDTH - MARGIN_R,
        b = HEIGHT - MARGIN_B,
        t = MARGIN_T
    );
    for &t in &ts {
        let px = x.map(t as f64);
        let _ = writeln!(
            out,
            r#"<line x1="{px:.2}" y1="{b}" x2="{px:.2}" y2="{b2}" stroke="black"/><text x="{px:.2}" y="{ty}" text-anchor="middle">{t}</text>"#,
            b = HEIGHT - MARGIN_B,
            b2 = HEIGHT - MARGIN_B + 5.0,
            ty = HEIGHT - MARGIN_B + 18.0
        );
    }
    for d in y.decades() {
        let py = y.map(d);
        let _ = writeln!(
            out,
            r##"<line x1="{l}" y1="{py:.2}" x2="{r}" y2="{py:.2}" stroke="#ddd"/><text x="{tx}" y="{ty:.2}" text-anchor="end">{d:e}</text>"##,
            l = MARGIN_L,
            r = WIDTH - MARGIN_R,
            tx = MARGIN_L - 6.0,
            ty = py + 4.0
        );
    }
    let _ = writeln!(
        out,
        r#"<text x="{}" y="{}" text-anchor="middle">T</text>"#,
        (MARGIN_L + WIDTH - MARGIN_R) / 2.0,
        HEIGHT - 14.0
    );
    let _ = writeln!(
        out,
        r#"<text transform="translate(16 {}) rotate(-90)" text-anchor="middle">median avg_markov_error</text>"#,
        HEIGHT / 2.0
    );

    for (i, &n) in ns.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let mut series: Vec<&&CellSummary> = cells
            .iter()
            .filter(|c| c.per_cluster == n && c.median_error.is_finite() && c.q25_error > 0.0)
            .collect();
        series.sort_by_key(|c| c.len);
        if series.is_empty() {
            continue;
        }
        let upper = series.iter().map(|c| (x.map(c.len as f64), y.map(c.q75_error)));
        let lower = series.iter().rev().map(|c| (x.map(c.len as f64), y.map(c.q25_error)));
        let band: Vec<String> = upper
            .chain(lower)
            .map(|(a, b)| format!("{a:.2},{b:.2}"))
            .collect();
        let _ = writeln!(
            out,
            r#"<polygon points="{}" fill="{color}" fill-opacity="0.18" stroke="none"/>"#,
            band.join(" ")
        );
        let line: Vec<String> = series
            .iter()
            .map(|c| format!("{:.2},{:.2}", x.map(c.len as f64), y.map(c.median_error)))
            .collect();
        let _ = writeln!(
            out,
            r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="2"/>"#,
            line.join(" ")
        );
        for c in &series {
            let _ = writeln!(
                out,
                r#"<circle cx="{:.2}" cy="{:.2}" r="3" fill="{color}"/>"#,
                x.map(c.len as f64),
                y.map(c.median_error)
            );
        }
        let ly = MARGIN_T + 16.0 * i as f64 + 8.0;
        let lx = WIDTH - MARGIN_R + 12.0;
        let _ = writeln!(
            out,
            r#"<line x1="{lx}" y1="{ly}" x2="{}" y2="{ly}" stroke="{color}" stroke-width="2"/><text x="{}" y="{}">N = {n}</text>"#,
            lx + 20.0,
            lx + 26.0,
            ly + 4.0
        );
    }

    let failures: usize = cells.iter().map(|c| c.failures).sum();
    let trials: usize = cells.iter().map(|c| c.trials).sum();
    if failures > 0 {
        let _ = writeln!(
            out,
            r#"<text x="{}" y="{}" font-size="10">{failures}/{trials} trials failed, excluded</text>"#,
            WIDTH - MARGIN_R + 4.0,
            HEIGHT - MARGIN_B
        );
    }
    out.push_str("</svg>\n");
    out
}

/// Viridis-like ramp on `[0, 1]`.
fn color(t: f64) -> String {
    const STOPS: [(f64, f64, f64); 5] = [
        (68.0, 1.0, 84.0),
        (59.0, 82.0, 139.0),
        (33.0, 145.0, 140.0),
        (94.0, 201.0, 98.0),
        (253.0, 231.0, 37.0),
    ];
    let t = t.clamp(0.0, 1.0) * (STOPS.len() - 1) as f64;
    let i = (t.floor() as usize).min(STOPS.len() - 2);
    let f = t - i as f64;
    let mix = |a: f64, b: f64| (a + (b - a) * f).round() as u8;
    let (a, b) = (STOPS[i], STOPS[i + 1]);
    format!("#{:02x}{:02x}{:02x}", mix(a.0, b.0), mix(a.1, b.1), mix(a.2, b.2))
}

fn heatmap(cells: &[&CellSummary], width: f64) -> String {
    let ts = sorted_unique(cells.iter().map(|c| c.len));
    let ns = sorted_unique(cells.iter().map(|c| c.per_cluster));
    let logs: Vec<f64> = cells
        .iter()
        .map(|c| c.median_error.log10())
        .filter(|v| v.is_finite())
        .collect();
    let lo = logs.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let span = if hi > lo { hi - lo } else { 1.0 };

    let mut out = String::new();
    header(&mut out, &format!("log10 median Markov error over (N, T), width {width}"));
    let cw = (WIDTH - MARGIN_L - MARGIN_R) / ts.len() as f64;
    let ch = (HEIGHT - MARGIN_T - MARGIN_B) / ns.len() as f64;
    for c in cells {
        let col = ts.iter().position(|&t| t == c.len).unwrap();
        // largest N on top
        let row = ns.len() - 1 - ns.iter().position(|&n| n == c.per_cluster).unwrap();
        let x0 = MARGIN_L + col as f64 * cw;
        let y0 = MARGIN_T + row as f64 * ch;
        let v = c.median_error.log10();
        let (fill, label) = if v.is_finite() {
            (color((v - lo) / span), format!("{v:.2}"))
        } else {
            ("#bbbbbb".to_string(), "n/a".to_string())
        };
        let _ = writeln!(
            out,
            r#"<rect x="{x0:.2}" y="{y0:.2}" width="{cw:.2}" height="{ch:.2}" fill="{fill}" stroke="white"/><text x="{:.2}" y="{:.2}" text-anchor="middle" fill="{}">{label}</text>"#,
            x0 + cw / 2.0,
            y0 + ch / 2.0 + 4.0,
            if v.is_finite() && (v - lo) / span > 0.6 { "black" } else { "white" }
        );
    }
    for (i, t) in ts.iter().enumerate() {
        let _ = writeln!(
            out,
            r#"<text x="{:.2}" y="{}" text-anchor="middle">{t}</text>"#,
            MARGIN_L + (i as f64 + 0.5) * cw,
            HEIGHT - MARGIN_B + 18.0
        );
    }
    for (i, n) in ns.iter().rev().enumerate() {
        let _ = writeln!(
            out,
            r#"<text x="{}" y="{:.2}" text-anchor="end">{n}</text>"#,
            MARGIN_L - 6.0,
            MARGIN_T + (i as f64 + 0.5) * ch + 4.0
        );
    }
    let _ = writeln!(
        out,
        r#"<text x="{}" y="{}" text-anchor="middle">T</text><text transform="translate(20 {}) rotate(-90)" text-anchor="middle">N</text>"#,
        (MARGIN_L + WIDTH - MARGIN_R) / 2.0,
        HEIGHT - 14.0,
        HEIGHT / 2.0
    );
    let steps = 20;
    let bar_x = WIDTH - MARGIN_R + 30.0;
    let bar_h = (HEIGHT - MARGIN_T - MARGIN_B) / steps as f64;
    for s in 0..steps {
        let frac = 1.0 - (s as f64 + 0.5) / steps as f64;
        let _ = writeln!(
            out,
            r#"<rect x="{bar_x}" y="{:.2}" width="18" height="{:.2}" fill="{}"/>"#,
            MARGIN_T + s as f64 * bar_h,
            bar_h + 0.5,
            color(frac)
        );
    }
    if lo.is_finite() {
        let _ = writeln!(
            out,
            r#"<text x="{}" y="{}">{hi:.2}</text><text x="{}" y="{}">{lo:.2}</text>"#,
            bar_x + 24.0,
            MARGIN_T + 10.0,
            bar_x + 24.0,
            HEIGHT - MARGIN_B
        );
    }
    out.push_str("</svg>\n");
    out
}
