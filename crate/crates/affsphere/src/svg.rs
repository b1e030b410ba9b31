//! Plain-text SVG 1.1 figures of developed polygons.

use std::fmt::Write;

use affsphere_core::linalg::{cross, dot, norm, Vec3};

const CANVAS: f64 = 800.0;
const MARGIN: f64 = 60.0;

/// Affine chart `x ↦ (x·e₁, x·e₂)/(x·f)` centred on a direction `f`.
#[derive(Clone, Copy, Debug)]
pub struct AffineChart {
    f: Vec3,
    e1: Vec3,
    e2: Vec3,
}

fn unit(v: Vec3) -> Option<Vec3> {
    let n = norm(v);
    (n > 0.0 && n.is_finite()).then(|| [v[0] / n, v[1] / n, v[2] / n])
}

impl AffineChart {
    /// Chart centred on the sum of the unit representatives.
    pub fn centred(reps: &[Vec3]) -> Option<AffineChart> {
        let mut sum = [0.0; 3];
        for r in reps {
            let r = unit(*r)?;
            for i in 0..3 {
                sum[i] += r[i];
            }
        }
        let f = unit(sum)?;
        let seed = if f[0].abs() < 0.9 { [1.0, 0.0, 0.0] } else { [0.0, 1.0, 0.0] };
        let e1 = unit(cross(f, seed))?;
        Some(AffineChart { f, e1, e2: cross(f, e1) })
    }

    pub fn project(&self, x: Vec3) -> Option<(f64, f64)> {
        let w = dot(x, self.f);
        (w.abs() > 1e-12 * norm(x)).then(|| (dot(x, self.e1) / w, dot(x, self.e2) / w))
    }
}

pub struct PolygonFigure<'a> {
    pub title: &'a str,
    /// Vertex representatives in boundary order with their labels.
    pub vertices: &'a [(Vec3, String)],
    pub base: Vec3,
    pub samples: &'a [Vec3],
    pub edge_points: &'a [Vec3],
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

/// Renders the figure; points that do not fit the chart are skipped.
pub fn polygon_svg(fig: &PolygonFigure) -> String {
    let reps: Vec<Vec3> = fig.vertices.iter().map(|v| v.0).collect();
    let chart = AffineChart::centred(if reps.is_empty() { std::slice::from_ref(&fig.base) } else { &reps })
        .unwrap_or(AffineChart { f: [0.0, 0.0, 1.0], e1: [1.0, 0.0, 0.0], e2: [0.0, 1.0, 0.0] });
    let verts: Vec<Option<(f64, f64)>> = reps.iter().map(|&r| chart.project(r)).collect();
    let samples: Vec<(f64, f64)> = fig.samples.iter().filter_map(|&r| chart.project(r)).collect();
    let edge: Vec<(f64, f64)> = fig.edge_points.iter().filter_map(|&r| chart.project(r)).collect();
    let base = chart.project(fig.base);

    let all: Vec<(f64, f64)> = verts.iter().flatten().chain(&samples).chain(&edge).chain(base.iter()).copied().collect();
    let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for &(x, y) in &all {
        x0 = x0.min(x);
        x1 = x1.max(x);
        y0 = y0.min(y);
        y1 = y1.max(y);
    }
    if all.is_empty() {
        (x0, x1, y0, y1) = (-1.0, 1.0, -1.0, 1.0);
    }
    let span = (x1 - x0).max(y1 - y0).max(1e-12);
    let s = (CANVAS - 2.0 * MARGIN) / span;
    let (cx, cy) = ((x0 + x1) / 2.0, (y0 + y1) / 2.0);
    let map = |(x, y): (f64, f64)| (CANVAS / 2.0 + s * (x - cx), CANVAS / 2.0 - s * (y - cy));

    let mut out = String::new();
    let _ = writeln!(out, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{CANVAS}" height="{CANVAS}" viewBox="0 0 {CANVAS} {CANVAS}">"#
    );
    let _ = writeln!(out, "<title>{}</title>", escape(fig.title));
    let _ = writeln!(out, r#"<rect x="0" y="0" width="{CANVAS}" height="{CANVAS}" fill="white"/>"#);
    let _ = writeln!(out, r##"<g fill="#4a7ab5" fill-opacity="0.5">"##);
    for &p in &samples {
        let (x, y) = map(p);
        let _ = writeln!(out, r#"<circle cx="{x:.2}" cy="{y:.2}" r="1.5"/>"#);
    }
    let _ = writeln!(out, "</g>");
    let closed: Vec<(f64, f64)> = verts.iter().flatten().map(|&p| map(p)).collect();
    if closed.len() >= 2 {
        let pts: Vec<String> = closed.iter().map(|(x, y)| format!("{x:.2},{y:.2}")).collect();
        let _ = writeln!(out, r#"<polygon points="{}" fill="none" stroke="black" stroke-width="1.5"/>"#, pts.join(" "));
    }
    for &p in &edge {
        let (x, y) = map(p);
        let _ = writeln!(out, r##"<circle cx="{x:.2}" cy="{y:.2}" r="3" fill="#d04a2a"/>"##);
    }
    if let Some(b) = base {
        let (x, y) = map(b);
        let _ = writeln!(out, r#"<circle cx="{x:.2}" cy="{y:.2}" r="4" fill="none" stroke="black"/>"#);
    }
    let _ = writeln!(out, r#"<g font-family="monospace" font-size="12">"#);
    for (v, (_, label)) in verts.iter().zip(fig.vertices) {
        if let Some(p) = v {
            let (x, y) = map(*p);
            let _ = writeln!(out, r#"<circle cx="{x:.2}" cy="{y:.2}" r="4" fill="black"/>"#);
            let _ = writeln!(out, r#"<text x="{:.2}" y="{:.2}">{}</text>"#, x + 6.0, y - 6.0, escape(label));
        }
    }
    let _ = writeln!(out, "</g>");
    let _ = writeln!(out, "</svg>");
    out
}
