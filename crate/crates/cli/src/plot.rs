//! Minimal SVG output: polylines and markers, fixed number formatting.

use std::fmt::Write;

use primlib::Segmentation;

const WIDTH: f64 = 800.0;
const PANEL: f64 = 140.0;
const GAP: f64 = 24.0;
const MARGIN: f64 = 40.0;

fn polyline(out: &mut String, values: &[f64], top: f64, colour: &str) {
    let n = values.len();
    let max = values.iter().cloned().fold(0.0f64, f64::max);
    let scale = if max > 0.0 { PANEL / max } else { 0.0 };
    let x_step = if n > 1 {
        (WIDTH - 2.0 * MARGIN) / (n - 1) as f64
    } else {
        0.0
    };
    let pts: Vec<String> = values
        .iter()
        .enumerate()
        .map(|(i, v)| format!("{:.2},{:.2}", MARGIN + i as f64 * x_step, top + PANEL - v * scale))
        .collect();
    let _ = writeln!(
        out,
        r#"<polyline fill="none" stroke="{colour}" stroke-width="1" points="{}"/>"#,
        pts.join(" ")
    );
}

fn marker(out: &mut String, index: usize, n: usize, top: f64, bottom: f64, colour: &str) {
    let x = MARGIN + index as f64 * (WIDTH - 2.0 * MARGIN) / (n.max(2) - 1) as f64;
    let _ = writeln!(
        out,
        r#"<line x1="{x:.2}" y1="{top:.2}" x2="{x:.2}" y2="{bottom:.2}" stroke="{colour}" stroke-dasharray="4 3"/>"#
    );
}

fn label(out: &mut String, text: &str, top: f64) {
    let _ = writeln!(
        out,
        r#"<text x="{MARGIN:.2}" y="{:.2}" font-family="monospace" font-size="12">{}</text>"#,
        top - 6.0,
        text.replace('&', "&amp;").replace('<', "&lt;")
    );
}

/// Fused density with keypoint markers on top, then one jerk panel per
/// stream with its changepoints.
pub fn segmentation_svg(seg: &Segmentation, seed: u64) -> String {
    let panels = 1 + seg.jerk.len();
    let height = MARGIN * 2.0 + panels as f64 * PANEL + (panels - 1) as f64 * GAP;
    let n = seg.density.values.len();
    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH:.0}" height="{height:.0}" viewBox="0 0 {WIDTH:.0} {height:.0}">"#
    );
    let _ = writeln!(out, "<!-- seed {seed} -->");
    let _ = writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#);

    let top = MARGIN;
    label(&mut out, "fused keypoint density", top);
    polyline(&mut out, &seg.density.values, top, "black");
    for &k in &seg.keypoints.indices {
        marker(&mut out, k, n, top, top + PANEL, "red");
    }

    for (p, ((name, jerk), cps)) in seg.jerk.iter().zip(&seg.changepoints).enumerate() {
        let top = MARGIN + (p + 1) as f64 * (PANEL + GAP);
        label(&mut out, &format!("windowed jerk: {name}"), top);
        polyline(&mut out, jerk, top, "steelblue");
        for &c in &cps.indices {
            marker(&mut out, c, n, top, top + PANEL, "orange");
        }
    }
    out.push_str("</svg>\n");
    out
}
