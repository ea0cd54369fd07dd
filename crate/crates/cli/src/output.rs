use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use anyhow::{Context, Result};
use converse_core::diffeo::fmt17;
use serde_json::{json, Value};

pub fn write_text(dir: &Path, name: &str, text: &str) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let path = dir.join(name);
    fs::write(&path, text).with_context(|| format!("writing {}", path.display()))
}

pub fn write_json(dir: &Path, name: &str, value: &Value) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    write_text(dir, name, &text)
}

pub fn write_failure(dir: &Path, command: &str, code: i32, err: &anyhow::Error) -> Result<()> {
    let mut report = json!({
        "command": command,
        "status": "error",
        "exit_code": code,
        "error": format!("{err:#}"),
    });
    if let Some(converse_core::Error::ConvergenceFailure { best_residual, .. }) =
        err.downcast_ref::<converse_core::Error>()
    {
        report["best_residual"] = json!(best_residual);
    }
    write_json(dir, "report.json", &report)
}

/// CSV with an `x` column followed by one column per named series.
pub fn samples_csv(xs: &[f64], columns: &[(&str, Vec<f64>)]) -> String {
    let mut out = String::from("x");
    for (name, _) in columns {
        out.push(',');
        out.push_str(name);
    }
    out.push('\n');
    for (i, x) in xs.iter().enumerate() {
        out.push_str(&fmt17(*x));
        for (_, values) in columns {
            out.push(',');
            out.push_str(&fmt17(values[i]));
        }
        out.push('\n');
    }
    out
}

const COLORS: [&str; 4] = ["steelblue", "darkorange", "seagreen", "crimson"];

/// Line plot of several series over a common abscissa, with a horizontal reference line.
pub fn overlay_svg(xs: &[f64], columns: &[(&str, Vec<f64>)], reference: f64) -> String {
    let (w, h, pad) = (640.0, 360.0, 24.0);
    let x0 = xs.first().copied().unwrap_or(0.0);
    let x1 = xs.last().copied().unwrap_or(1.0).max(x0 + 1e-12);
    let (mut lo, mut hi) = (reference, reference);
    for (_, v) in columns {
        for y in v.iter().filter(|y| y.is_finite()) {
            lo = lo.min(*y);
            hi = hi.max(*y);
        }
    }
    if hi - lo < 1e-12 {
        hi += 0.5;
        lo -= 0.5;
    }
    let sx = |x: f64| pad + (x - x0) / (x1 - x0) * (w - 2.0 * pad);
    let sy = |y: f64| h - pad - (y - lo) / (hi - lo) * (h - 2.0 * pad);
    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 {w} {h}" width="{w}" height="{h}">"#
    );
    let _ = writeln!(
        out,
        r#"  <line x1="{:.3}" y1="{:.3}" x2="{:.3}" y2="{:.3}" stroke="gray" stroke-dasharray="4 4"/>"#,
        sx(x0),
        sy(reference),
        sx(x1),
        sy(reference)
    );
    for (i, (name, values)) in columns.iter().enumerate() {
        let points = xs
            .iter()
            .zip(values)
            .map(|(x, y)| format!("{:.3},{:.3}", sx(*x), sy(*y)))
            .collect::<Vec<_>>()
            .join(" ");
        let color = COLORS[i % COLORS.len()];
        let _ = writeln!(
            out,
            r#"  <polyline fill="none" stroke="{color}" stroke-width="1.5" points="{points}"/>"#
        );
        let _ = writeln!(
            out,
            r#"  <text x="{:.3}" y="{:.3}" font-size="12" fill="{color}">{name}</text>"#,
            pad + 4.0,
            pad + 14.0 * (i as f64 + 1.0)
        );
    }
    out.push_str("</svg>\n");
    out
}
