// SPDX-License-Identifier: MIT OR Apache-2.0

//! Standalone SVG plot of certificates: log10 FLOPs against bound.

use std::fmt::Write;

use super::ParetoPoint;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 400.0;
const MARGIN: f64 = 50.0;

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

/// Renders every point in grey and the frontier in black, joined by a line.
/// Output depends only on the inputs.
pub fn frontier_svg(points: &[ParetoPoint], frontier: &[ParetoPoint]) -> String {
    let logs: Vec<f64> = points
        .iter()
        .chain(frontier)
        .map(|p| (p.flops.max(1) as f64).log10())
        .collect();
    let (mut x0, mut x1) = logs
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
    if !x0.is_finite() {
        (x0, x1) = (0.0, 1.0);
    }
    x0 = x0.floor();
    x1 = x1.ceil().max(x0 + 1.0);
    let sx = |flops: u64| MARGIN + ((flops.max(1) as f64).log10() - x0) / (x1 - x0) * (WIDTH - 2.0 * MARGIN);
    let sy = |bound: f64| HEIGHT - MARGIN - bound.clamp(0.0, 1.0) * (HEIGHT - 2.0 * MARGIN);

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH:.0}" height="{HEIGHT:.0}" viewBox="0 0 {WIDTH:.0} {HEIGHT:.0}">"#
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let (left, right, top, bottom) = (MARGIN, WIDTH - MARGIN, MARGIN, HEIGHT - MARGIN);
    let _ = writeln!(
        s,
        r#"<path d="M{left:.2},{top:.2} L{left:.2},{bottom:.2} L{right:.2},{bottom:.2}" stroke="black" fill="none"/>"#
    );
    let mut decade = x0 as i64;
    while decade as f64 <= x1 {
        let x = MARGIN + (decade as f64 - x0) / (x1 - x0) * (WIDTH - 2.0 * MARGIN);
        let _ = writeln!(
            s,
            r#"<text x="{x:.2}" y="{:.2}" font-size="11" text-anchor="middle">1e{decade}</text>"#,
            bottom + 16.0
        );
        decade += 1;
    }
    for tick in [0.0, 0.25, 0.5, 0.75, 1.0] {
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}" font-size="11" text-anchor="end">{tick:.2}</text>"#,
            left - 6.0,
            sy(tick) + 4.0
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="{:.2}" font-size="12" text-anchor="middle">FLOPs (log10)</text>"#,
        WIDTH / 2.0,
        HEIGHT - 10.0
    );
    let _ = writeln!(
        s,
        r#"<text x="14" y="{:.2}" font-size="12" text-anchor="middle" transform="rotate(-90 14 {:.2})">accuracy bound</text>"#,
        HEIGHT / 2.0,
        HEIGHT / 2.0
    );
    for p in points {
        let _ = writeln!(
            s,
            r##"<circle cx="{:.2}" cy="{:.2}" r="3" fill="#999999"><title>{}</title></circle>"##,
            sx(p.flops),
            sy(p.bound),
            escape(&p.label)
        );
    }
    if !frontier.is_empty() {
        let path: Vec<String> = frontier
            .iter()
            .map(|p| format!("{:.2},{:.2}", sx(p.flops), sy(p.bound)))
            .collect();
        let _ = writeln!(
            s,
            r#"<polyline points="{}" stroke="black" fill="none"/>"#,
            path.join(" ")
        );
    }
    for p in frontier {
        let _ = writeln!(
            s,
            r#"<circle cx="{:.2}" cy="{:.2}" r="4" fill="black"><title>{}</title></circle>"#,
            sx(p.flops),
            sy(p.bound),
            escape(&p.label)
        );
    }
    s.push_str("</svg>\n");
    s
}
