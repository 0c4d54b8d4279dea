//! Log-scale residual-versus-generation line charts as standalone SVG.

use std::fmt::Write as _;
use std::io::Write;

use crate::error::{Error, Result};

/// Residuals are clamped to this before taking `log10`.
pub const MIN_PLOT_RESIDUAL: f64 = 1e-16;

const WIDTH: f64 = 800.0;
const HEIGHT: f64 = 500.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 180.0;
const TOP: f64 = 30.0;
const BOTTOM: f64 = 60.0;
const PALETTE: [&str; 8] = ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf"];

#[derive(Debug, Clone, PartialEq)]
pub struct LabeledTrace {
    pub label: String,
    /// `(generation, residual)` points.
    pub points: Vec<(u64, f64)>,
}

fn escape(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    for c in text.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            c => out.push(c),
        }
    }
    out
}

fn log_residual(r: f64) -> f64 {
    if r.is_nan() {
        return f64::NAN;
    }
    r.max(MIN_PLOT_RESIDUAL).log10()
}

/// Writes one polyline per trace plus a legend with one entry per trace.
pub fn emit_trace_svg<W: Write>(traces: &[LabeledTrace], mut sink: W) -> Result<()> {
    if traces.is_empty() || traces.iter().any(|t| t.points.is_empty()) {
        return Err(Error::InvalidConfig("cannot plot an empty trace".into()));
    }

    let max_gen = traces.iter().flat_map(|t| t.points.iter().map(|p| p.0)).max().unwrap_or(0).max(1) as f64;
    let logs: Vec<f64> =
        traces.iter().flat_map(|t| t.points.iter().map(|p| log_residual(p.1))).filter(|v| v.is_finite()).collect();
    let mut y_lo = logs.iter().copied().fold(f64::INFINITY, f64::min).floor();
    let mut y_hi = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max).ceil();
    if !y_lo.is_finite() || !y_hi.is_finite() {
        (y_lo, y_hi) = (-1.0, 1.0);
    }
    if y_hi <= y_lo {
        y_lo -= 1.0;
        y_hi += 1.0;
    }

    let plot_w = WIDTH - LEFT - RIGHT;
    let plot_h = HEIGHT - TOP - BOTTOM;
    let sx = |g: f64| LEFT + g / max_gen * plot_w;
    let sy = |v: f64| TOP + (y_hi - v.clamp(y_lo, y_hi)) / (y_hi - y_lo) * plot_h;

    let mut svg = String::new();
    let _ = writeln!(svg, r#"<?xml version="1.0" encoding="UTF-8" standalone="no"?>"#);
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
    );
    let _ = writeln!(svg, r#"<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);

    // axes
    let (x0, y0, x1, y1) = (LEFT, TOP + plot_h, LEFT + plot_w, TOP);
    let _ = writeln!(
        svg,
        r#"<g class="axes" stroke="black" stroke-width="1"><line x1="{x0}" y1="{y0}" x2="{x1}" y2="{y0}"/><line x1="{x0}" y1="{y0}" x2="{x0}" y2="{y1}"/></g>"#
    );
    let _ = writeln!(svg, r#"<g class="ticks" font-family="sans-serif" font-size="11">"#);
    for k in 0..=5 {
        let g = max_gen * k as f64 / 5.0;
        let x = sx(g);
        let _ = writeln!(
            svg,
            r#"<line x1="{x:.2}" y1="{y0}" x2="{x:.2}" y2="{:.2}" stroke="black"/><text x="{x:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
            y0 + 5.0,
            y0 + 18.0,
            g.round()
        );
    }
    let span = (y_hi - y_lo) as i64;
    let step = (span / 10).max(1);
    let mut v = y_lo as i64;
    while v <= y_hi as i64 {
        let y = sy(v as f64);
        let _ = writeln!(
            svg,
            r#"<line x1="{:.2}" y1="{y:.2}" x2="{x0}" y2="{y:.2}" stroke="black"/><text x="{:.2}" y="{:.2}" text-anchor="end">{v}</text>"#,
            x0 - 5.0,
            x0 - 8.0,
            y + 4.0
        );
        v += step;
    }
    let _ = writeln!(svg, "</g>");
    let _ = writeln!(
        svg,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle" font-family="sans-serif" font-size="13">generation</text>"#,
        LEFT + plot_w / 2.0,
        HEIGHT - 15.0
    );
    let _ = writeln!(
        svg,
        r#"<text x="18" y="{:.2}" text-anchor="middle" font-family="sans-serif" font-size="13" transform="rotate(-90 18 {:.2})">log10 residual</text>"#,
        TOP + plot_h / 2.0,
        TOP + plot_h / 2.0
    );

    for (k, trace) in traces.iter().enumerate() {
        let color = PALETTE[k % PALETTE.len()];
        let points: Vec<String> = trace
            .points
            .iter()
            .filter(|p| !p.1.is_nan())
            .map(|&(g, r)| format!("{:.2},{:.2}", sx(g as f64), sy(log_residual(r))))
            .collect();
        let _ = writeln!(
            svg,
            r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{}"><title>{}</title></polyline>"#,
            points.join(" "),
            escape(&trace.label)
        );
    }

    let _ = writeln!(svg, r#"<g class="legend" font-family="sans-serif" font-size="12">"#);
    for (k, trace) in traces.iter().enumerate() {
        let color = PALETTE[k % PALETTE.len()];
        let lx = LEFT + plot_w + 15.0;
        let ly = TOP + 10.0 + 18.0 * k as f64;
        let _ = writeln!(
            svg,
            r#"<g class="legend-entry"><rect x="{lx:.2}" y="{:.2}" width="14" height="4" fill="{color}"/><text x="{:.2}" y="{ly:.2}">{}</text></g>"#,
            ly - 6.0,
            lx + 20.0,
            escape(&trace.label)
        );
    }
    let _ = writeln!(svg, "</g>");
    let _ = writeln!(svg, "</svg>");

    sink.write_all(svg.as_bytes())?;
    sink.flush()?;
    Ok(())
}
