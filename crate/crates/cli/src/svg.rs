//! Minimal SVG plot of a distribution profile: one polyline per checkpoint
//! over the threshold grid, plus the lower/upper envelopes dashed.

use std::fmt::Write as _;

use dendrite_core::DistributionProfile;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 400.0;
const MARGIN: f64 = 48.0;
const PALETTE: [&str; 6] = ["#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b"];

pub fn render_profile(p: &DistributionProfile) -> String {
    let (s_min, s_max) = (
        p.thresholds.first().copied().unwrap_or(0.0),
        p.thresholds.last().copied().unwrap_or(1.0),
    );
    let span = if s_max > s_min { s_max - s_min } else { 1.0 };
    let x = |s: f64| MARGIN + (s - s_min) / span * (WIDTH - 2.0 * MARGIN);
    let y = |f: f64| HEIGHT - MARGIN - f * (HEIGHT - 2.0 * MARGIN);
    let points = |vals: &[f64]| -> String {
        p.thresholds
            .iter()
            .zip(vals)
            .map(|(&s, &f)| format!("{:.2},{:.2}", x(s), y(f)))
            .collect::<Vec<_>>()
            .join(" ")
    };

    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
    );
    let _ = writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let (x0, x1, y0, y1) = (x(s_min), x(s_max), y(0.0), y(1.0));
    let _ = writeln!(
        out,
        r#"<path d="M{x0:.2},{y1:.2} L{x0:.2},{y0:.2} L{x1:.2},{y0:.2}" stroke="black" fill="none"/>"#
    );
    let _ = writeln!(
        out,
        r#"<text x="{:.2}" y="{:.2}" font-size="12" text-anchor="middle">s</text>"#,
        (x0 + x1) / 2.0,
        HEIGHT - 12.0
    );
    for (value, anchor_y) in [(s_min, y0 + 16.0), (s_max, y0 + 16.0)] {
        let _ = writeln!(
            out,
            r#"<text x="{:.2}" y="{anchor_y:.2}" font-size="11" text-anchor="middle">{value}</text>"#,
            x(value)
        );
    }
    for (label, f) in [("0", 0.0), ("1", 1.0)] {
        let _ = writeln!(
            out,
            r#"<text x="{:.2}" y="{:.2}" font-size="11" text-anchor="end">{label}</text>"#,
            x0 - 6.0,
            y(f) + 4.0
        );
    }
    for (k, (n, row)) in p.checkpoints.iter().zip(&p.freq).enumerate() {
        let color = PALETTE[k % PALETTE.len()];
        let _ = writeln!(
            out,
            r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="1.5"><title>N={n}</title></polyline>"#,
            points(row)
        );
    }
    for (name, vals) in [("lower", &p.lower), ("upper", &p.upper)] {
        let _ = writeln!(
            out,
            r#"<polyline points="{}" fill="none" stroke="gray" stroke-dasharray="4 3"><title>{name}</title></polyline>"#,
            points(vals)
        );
    }
    out.push_str("</svg>\n");
    out
}
