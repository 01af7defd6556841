//! SVG of depth-k boxes: bars on the line, rectangles in the plane.

use std::fmt::Write as _;

use cantorcert::fractal::{approximate_set, AffineIFS};
use cantorcert::rignum::DyInterval;
use cantorcert::Error;

pub const DEFAULT_MAX_BOXES: u128 = 1_000_000;

const WIDTH: f64 = 1000.0;
const BAR: f64 = 40.0;
const GAP: f64 = 20.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Which {
    Left,
    Right,
    Both,
}

fn px(x: &DyInterval) -> (f64, f64) {
    (x.lo().to_f64() * WIDTH, x.hi().to_f64() * WIDTH)
}

/// Render the chosen systems; the box count over all panels must stay within `cap`.
pub fn svg(systems: &[(&str, &AffineIFS)], depth: u32, cap: u128) -> Result<(String, usize), Error> {
    let mut total: u128 = 0;
    for (_, s) in systems {
        total = total.saturating_add(s.len().checked_pow(depth).unwrap_or(u128::MAX));
    }
    if total > cap {
        return Err(Error::ResourceLimit(format!("{total} boxes exceed cap {cap}")));
    }
    let dim = systems.first().map(|s| s.1.dim).unwrap_or(1);
    if dim > 2 {
        return Err(Error::Domain("rendering covers d ≤ 2".into()));
    }
    let n = systems.len() as f64;
    let (w, h) = if dim == 1 { (WIDTH, n * (BAR + GAP) + GAP) } else { (n * (WIDTH + GAP) + GAP, WIDTH + 2.0 * GAP) };
    let mut out = String::new();
    let _ = writeln!(out, r#"<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 {w:.0} {h:.0}" width="{w:.0}" height="{h:.0}">"#);
    let mut count = 0;
    for (p, (name, s)) in systems.iter().enumerate() {
        let boxes = approximate_set(s, depth, cap)?;
        let _ = writeln!(out, r#"<g id="{name}" fill="black">"#);
        for b in &boxes {
            let (x0, x1) = px(&b[0]);
            if dim == 1 {
                let y = GAP + p as f64 * (BAR + GAP);
                let _ = writeln!(out, r#"<rect x="{x0:.6}" y="{y:.6}" width="{:.6}" height="{BAR:.6}"/>"#, x1 - x0);
            } else {
                let (y0, y1) = px(&b[1]);
                let ox = GAP + p as f64 * (WIDTH + GAP);
                // y grows downwards in SVG
                let _ = writeln!(
                    out,
                    r#"<rect x="{:.6}" y="{:.6}" width="{:.6}" height="{:.6}"/>"#,
                    ox + x0,
                    GAP + WIDTH - y1,
                    x1 - x0,
                    y1 - y0
                );
            }
            count += 1;
        }
        out.push_str("</g>\n");
    }
    out.push_str("</svg>\n");
    Ok((out, count))
}
