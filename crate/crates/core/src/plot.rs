//! Minimal SVG line charts of the three negativities against the sweep axis.

use std::fmt::Write as _;

use crate::sweep::SweepResult;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 400.0;
const MARGIN: f64 = 56.0;
const COLORS: [&str; 3] = ["#1f77b4", "#d62728", "#2ca02c"];
const LABELS: [&str; 3] = ["E_N mech-opt1", "E_N mech-opt2", "E_N opt1-opt2"];

/// Renders `E_N` curves; unstable or failed points break the lines.
pub fn render_svg(result: &SweepResult, title: &str) -> String {
    let rows = &result.rows;
    let (x0, x1) = (result.spec.start, result.spec.stop);
    let y_max = rows
        .iter()
        .filter_map(|r| r.e_n())
        .flat_map(|e| e.into_iter())
        .fold(0.0_f64, f64::max)
        .max(1e-3)
        * 1.05;
    let px = |x: f64| MARGIN + (x - x0) / (x1 - x0) * (WIDTH - 2.0 * MARGIN);
    let py = |y: f64| HEIGHT - MARGIN - y / y_max * (HEIGHT - 2.0 * MARGIN);

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(svg, r#"<text x="{}" y="20" text-anchor="middle" font-size="14">{}</text>"#, WIDTH / 2.0, escape(title));

    // shade unstable stretches
    let dx = if rows.len() > 1 { (px(x1) - px(x0)) / (rows.len() - 1) as f64 } else { 0.0 };
    for r in rows.iter().filter(|r| !r.eigen_stable) {
        let _ = writeln!(
            svg,
            r##"<rect x="{:.2}" y="{MARGIN}" width="{:.2}" height="{}" fill="#eeeeee"/>"##,
            px(r.axis_value) - dx / 2.0,
            dx.max(1.0),
            HEIGHT - 2.0 * MARGIN
        );
    }

    // axes and ticks
    let (left, right, top, bottom) = (MARGIN, WIDTH - MARGIN, MARGIN, HEIGHT - MARGIN);
    let _ = writeln!(svg, r#"<path d="M{left} {top} V{bottom} H{right}" stroke="black" fill="none"/>"#);
    for i in 0..=4 {
        let f = i as f64 / 4.0;
        let (x, y) = (x0 + f * (x1 - x0), f * y_max);
        let _ = writeln!(svg, r#"<text x="{:.2}" y="{}" text-anchor="middle">{}</text>"#, px(x), bottom + 16.0, tick(x));
        let _ = writeln!(svg, r#"<text x="{}" y="{:.2}" text-anchor="end">{}</text>"#, left - 6.0, py(y) + 4.0, tick(y));
    }
    let _ = writeln!(
        svg,
        r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#,
        WIDTH / 2.0,
        HEIGHT - 14.0,
        escape(result.spec.axis.name())
    );

    for k in 0..3 {
        let mut d = String::new();
        let mut pen_down = false;
        for r in rows {
            match r.e_n() {
                Some(e) => {
                    let _ = write!(d, "{}{:.2} {:.2} ", if pen_down { "L" } else { "M" }, px(r.axis_value), py(e[k]));
                    pen_down = true;
                }
                None => pen_down = false,
            }
        }
        let _ = writeln!(svg, r#"<path d="{}" stroke="{}" stroke-width="1.5" fill="none"/>"#, d.trim_end(), COLORS[k]);
        let ly = top + 14.0 + 16.0 * k as f64;
        let _ = writeln!(svg, r#"<line x1="{}" y1="{ly}" x2="{}" y2="{ly}" stroke="{}" stroke-width="2"/>"#, right - 130.0, right - 110.0, COLORS[k]);
        let _ = writeln!(svg, r#"<text x="{}" y="{}">{}</text>"#, right - 104.0, ly + 4.0, LABELS[k]);
    }
    svg.push_str("</svg>\n");
    svg
}

fn tick(v: f64) -> String {
    let s = format!("{v:.3}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" { "0".into() } else { s.to_string() }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
