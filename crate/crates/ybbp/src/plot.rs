//! Minimal SVG line plots of densities with HPD markers.

use std::fmt::Write;
use std::path::Path;

use ybbp_core::stats::{DensityEstimate, HpdSet};

use crate::error::{AppError, AppResult};

const W: f64 = 480.0;
const H: f64 = 300.0;
const PAD: f64 = 40.0;

pub fn density_svg(title: &str, est: &DensityEstimate, hpd: Option<&HpdSet>, truth: Option<f64>) -> String {
    let (x0, x1) = (est.grid[0], *est.grid.last().unwrap());
    let ymax = est.density.iter().copied().fold(0.0, f64::max).max(f64::MIN_POSITIVE);
    let sx = |x: f64| PAD + (x - x0) / (x1 - x0) * (W - 2.0 * PAD);
    let sy = |y: f64| H - PAD - y / ymax * (H - 2.0 * PAD);

    let mut s = String::new();
    let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}">"#);
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(s, r#"<text x="{}" y="20" font-size="14" text-anchor="middle">{title}</text>"#, W / 2.0);
    let _ = writeln!(
        s,
        r#"<line x1="{PAD}" y1="{b}" x2="{r}" y2="{b}" stroke="black"/>"#,
        b = H - PAD,
        r = W - PAD
    );
    let _ = writeln!(s, r#"<text x="{PAD}" y="{}" font-size="11">{x0:.4}</text>"#, H - PAD + 15.0);
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" font-size="11" text-anchor="end">{x1:.4}</text>"#,
        W - PAD,
        H - PAD + 15.0
    );

    let step = (est.grid.len() / 1000).max(1);
    let points: Vec<String> = est
        .grid
        .iter()
        .zip(&est.density)
        .step_by(step)
        .map(|(&x, &y)| format!("{:.2},{:.2}", sx(x), sy(y)))
        .collect();
    let _ = writeln!(s, r#"<polyline fill="none" stroke="black" stroke-width="1.5" points="{}"/>"#, points.join(" "));

    if let Some(set) = hpd {
        for &(lo, hi) in &set.intervals {
            for x in [lo, hi] {
                let _ = writeln!(
                    s,
                    r#"<line x1="{x:.2}" y1="{t}" x2="{x:.2}" y2="{b}" stroke="black" stroke-dasharray="3,3"/>"#,
                    x = sx(x),
                    t = PAD,
                    b = H - PAD
                );
            }
        }
    }
    if let Some(t) = truth {
        if t >= x0 && t <= x1 {
            let _ = writeln!(
                s,
                r#"<line x1="{x:.2}" y1="{t}" x2="{x:.2}" y2="{b}" stroke="red"/>"#,
                x = sx(t),
                t = PAD,
                b = H - PAD
            );
        }
    }
    s.push_str("</svg>\n");
    s
}

pub fn write_svg(path: &Path, svg: &str) -> AppResult<()> {
    std::fs::write(path, svg).map_err(|e| AppError::io(path, e))
}
