//! Vertices and edges of the developed image at the pole at infinity of a
//! polynomial cubic differential.

use alloc::format;
use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;
use num_traits::{Euclid, Float};

use super::{one_bar, ray_limit, straight, DevelopContext, RayConfig, RayLimit};
use crate::connection::{parallel_transport, Path};
use crate::differentials::{geodesic_velocity, negative_directions_at_infinity, trace_geodesic_ray};
use crate::error::{Error, Result};
use crate::linalg::{cross, dot, norm, Mat3, Vec3};
use crate::projective::{cross_ratio, segment_metric, ProjPoint, ProjSegment};

#[derive(Clone, Debug, PartialEq)]
pub struct PolygonConfig {
    pub ray: RayConfig,
    /// Flat offsets of the parallel negative rays sampled on each edge.
    pub edge_offsets: Vec<f64>,
    /// Chart radius of the point on each negative ray from which offsets are
    /// measured.
    pub anchor_radius: f64,
    /// Step for the transport from the base point to ray starts.
    pub transport_step: f64,
    /// Allowed sine deviation of edge samples from their edge line.
    pub collinearity_tol: f64,
}

impl Default for PolygonConfig {
    fn default() -> Self {
        PolygonConfig {
            ray: RayConfig::default(),
            edge_offsets: Vec::new(),
            anchor_radius: 1.0,
            transport_step: 1e-3,
            collinearity_tol: 1e-6,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum RayStatus {
    Converged { flat_time: f64, achieved: f64 },
    Failed(Error),
}

impl RayStatus {
    fn of(r: &Result<RayLimit>) -> RayStatus {
        match r {
            Ok(l) => RayStatus::Converged { flat_time: l.flat_time, achieved: l.achieved },
            Err(e) => RayStatus::Failed(e.clone()),
        }
    }

    pub fn is_converged(&self) -> bool {
        matches!(self, RayStatus::Converged { .. })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct EdgeSample {
    /// Index into the negative directions; the edge lies between vertices
    /// `edge` and `edge + 1` (cyclically).
    pub edge: usize,
    pub offset: f64,
    pub point: Option<ProjPoint>,
    pub status: RayStatus,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PolygonResult {
    pub frame: crate::connection::Frame,
    /// Chart angles of the vertex rays, increasing.
    pub directions: Vec<f64>,
    /// One entry per direction; `None` where the ray failed.
    pub vertices: Vec<Option<ProjPoint>>,
    pub representatives: Vec<Option<Vec3>>,
    pub statuses: Vec<RayStatus>,
    pub edges: Vec<EdgeSample>,
    pub base_image: ProjPoint,
    pub convex: bool,
    /// Cross-ratio of the pencil at vertex `i` through vertex `i+1`, the first
    /// edge sample on edge `i+1`, and vertices `i+2`, `i+3`. Empty for
    /// triangles and when edge samples are missing.
    pub cross_ratios: Vec<f64>,
}

impl PolygonResult {
    pub fn complete(&self) -> bool {
        self.statuses.iter().all(RayStatus::is_converged)
    }

    pub fn vertex_points(&self) -> Vec<ProjPoint> {
        self.vertices.iter().flatten().copied().collect()
    }
}

/// Negative directions at infinity and the mid-sector vertex directions
/// `θⱼ + π/(m+3)` between them, both increasing in `[0, 2π)`.
pub fn vertex_directions(ctx: &DevelopContext) -> Result<(Vec<f64>, Vec<f64>)> {
    let negative = negative_directions_at_infinity(ctx.phi)?;
    let half = PI / negative.len() as f64;
    let mut vertex: Vec<f64> = negative.iter().map(|t| Euclid::rem_euclid(&(t + half), &(2.0 * PI))).collect();
    vertex.sort_by(|a, b| a.partial_cmp(b).unwrap_or(core::cmp::Ordering::Equal));
    Ok((negative, vertex))
}

/// Limit along the straight chart ray from the base point at `angle`.
pub fn vertex_limit(ctx: &DevelopContext, angle: f64, cfg: &RayConfig) -> Result<RayLimit> {
    let v = straight(angle);
    ray_limit(ctx.field, ctx.phi, ctx.frame, ctx.base, Mat3::IDENTITY, &v, cfg)
}

/// Limit along the flat negative geodesic parallel to the negative ray at
/// `angle`, offset by flat distance `offset` (positive to the left).
pub fn edge_limit(ctx: &DevelopContext, angle: f64, offset: f64, cfg: &PolygonConfig) -> Result<RayLimit> {
    let minus_one = Complex64::new(-1.0, 0.0);
    let anchor = Complex64::from_polar(cfg.anchor_radius, angle);
    let dir = geodesic_velocity(ctx.phi, anchor, minus_one, Complex64::from_polar(1.0, angle))?;
    let start = if offset == 0.0 {
        anchor
    } else {
        let sign = offset.signum();
        let c = Complex64::new(0.0, sign);
        let hint = Complex64::new(0.0, sign) * dir;
        let step = (offset.abs() / 1000.0).min(1e-3);
        let path = trace_geodesic_ray(ctx.phi, anchor, c, hint, offset.abs(), step)?;
        path.last().map(|s| s.position).unwrap_or(anchor)
    };
    let initial = if start == ctx.base {
        Mat3::IDENTITY
    } else {
        parallel_transport(&Path::Segment { from: start, to: ctx.base }, ctx.field, ctx.phi, ctx.frame, cfg.transport_step)?
            .matrix
    };
    let phi = ctx.phi;
    let velocity = move |z: Complex64, prev: Complex64| {
        let reference = if prev == Complex64::new(0.0, 0.0) { dir } else { prev };
        geodesic_velocity(phi, z, minus_one, reference)
    };
    ray_limit(ctx.field, ctx.phi, ctx.frame, start, initial, &velocity, &cfg.ray)
}

/// Sine-type deviation of `x` from the line through `a` and `b`.
fn line_deviation(a: Vec3, b: Vec3, x: Vec3) -> f64 {
    let n = cross(a, b);
    dot(n, x).abs() / (norm(n) * norm(x))
}

fn chart_coordinates(reps: &[Vec3]) -> Option<Vec<(f64, f64)>> {
    let mut f = [0.0; 3];
    for r in reps {
        for i in 0..3 {
            f[i] += r[i];
        }
    }
    let nf = norm(f);
    if nf == 0.0 {
        return None;
    }
    let f = [f[0] / nf, f[1] / nf, f[2] / nf];
    let seed = if f[0].abs() < 0.9 { [1.0, 0.0, 0.0] } else { [0.0, 1.0, 0.0] };
    let e1 = {
        let c = cross(f, seed);
        let n = norm(c);
        [c[0] / n, c[1] / n, c[2] / n]
    };
    let e2 = cross(f, e1);
    reps.iter()
        .map(|r| {
            let w = dot(*r, f);
            (w > 0.0).then(|| (dot(*r, e1) / w, dot(*r, e2) / w))
        })
        .collect()
}

/// Strict convexity in the affine chart centred on the sum of the
/// representatives: all turns have one sign and add up to one full turn.
fn is_convex(reps: &[Vec3]) -> bool {
    let n = reps.len();
    if n < 3 {
        return false;
    }
    let Some(p) = chart_coordinates(reps) else { return false };
    let scale = p.iter().fold(0.0, |m: f64, q| m.max(q.0.abs()).max(q.1.abs())).max(1.0);
    let mut total = 0.0;
    let mut sign = 0.0;
    for i in 0..n {
        let (a, b, c) = (p[i], p[(i + 1) % n], p[(i + 2) % n]);
        let (ux, uy) = (b.0 - a.0, b.1 - a.1);
        let (vx, vy) = (c.0 - b.0, c.1 - b.1);
        let turn = ux * vy - uy * vx;
        if turn.abs() <= 1e-12 * scale * scale {
            return false;
        }
        if sign == 0.0 {
            sign = turn.signum();
        } else if turn.signum() != sign {
            return false;
        }
        total += turn.atan2(ux * vx + uy * vy);
    }
    (total.abs() - 2.0 * PI).abs() < 1e-6
}

fn pencil_cross_ratios(reps: &[Vec3], edge_points: &[Vec3]) -> Result<Vec<f64>> {
    let n = reps.len();
    if n < 4 || edge_points.len() != n {
        return Ok(Vec::new());
    }
    (0..n)
        .map(|i| {
            let p = reps[i];
            let line = |q: Vec3| ProjPoint::new(cross(p, q));
            cross_ratio(
                &line(reps[(i + 1) % n])?,
                &line(edge_points[(i + 1) % n])?,
                &line(reps[(i + 2) % n])?,
                &line(reps[(i + 3) % n])?,
            )
        })
        .collect()
}

/// Converged sample of each edge at the first configured offset.
fn first_edge_points(edges: &[EdgeSample], n: usize) -> Option<Vec<Vec3>> {
    let offset = edges.first()?.offset;
    (0..n)
        .map(|j| edges.iter().find(|e| e.edge == j && e.offset == offset).and_then(|e| e.point).map(|p| p.coords()))
        .collect()
}

/// Builds the polygon from per-direction vertex limits, in direction order.
pub fn assemble_polygon(
    ctx: &DevelopContext,
    directions: Vec<f64>,
    limits: Vec<Result<RayLimit>>,
    edges: Vec<EdgeSample>,
) -> Result<PolygonResult> {
    let statuses: Vec<RayStatus> = limits.iter().map(RayStatus::of).collect();
    let vertices: Vec<Option<ProjPoint>> = limits.iter().map(|l| l.as_ref().ok().map(|l| l.point)).collect();
    let representatives: Vec<Option<Vec3>> = limits.iter().map(|l| l.as_ref().ok().map(|l| l.representative)).collect();
    let base = one_bar(ctx.frame);
    let all: Option<Vec<Vec3>> = representatives.iter().copied().collect();
    let (convex, cross_ratios) = match &all {
        Some(reps) => {
            let ratios = first_edge_points(&edges, reps.len())
                .map(|e| pencil_cross_ratios(reps, &e).unwrap_or_default())
                .unwrap_or_default();
            (is_convex(reps), ratios)
        }
        None => (false, Vec::new()),
    };
    Ok(PolygonResult {
        frame: ctx.frame,
        directions,
        vertices,
        representatives,
        statuses,
        edges,
        base_image: ProjPoint::new(base)?,
        convex,
        cross_ratios,
    })
}

/// Vertices (and optional edge samples) of the developed image at the pole at
/// infinity, computed sequentially.
pub fn extract_polygon(ctx: &DevelopContext, cfg: &PolygonConfig) -> Result<PolygonResult> {
    let (negative, directions) = vertex_directions(ctx)?;
    let limits: Vec<Result<RayLimit>> = directions.iter().map(|&a| vertex_limit(ctx, a, &cfg.ray)).collect();
    let mut edges = Vec::new();
    for (j, &angle) in negative.iter().enumerate() {
        for &s in &cfg.edge_offsets {
            let r = edge_limit(ctx, angle, s, cfg);
            edges.push(EdgeSample { edge: j, offset: s, point: r.as_ref().ok().map(|l| l.point), status: RayStatus::of(&r) });
        }
    }
    let mut poly = assemble_polygon(ctx, directions, limits, edges)?;
    check_edges(&mut poly, cfg.collinearity_tol, &negative);
    Ok(poly)
}

/// Marks edge samples that are off the line through their two vertices.
pub fn check_edges(poly: &mut PolygonResult, tol: f64, negative: &[f64]) {
    let n = poly.directions.len();
    for e in poly.edges.iter_mut() {
        let (Some(p), true) = (e.point, e.status.is_converged()) else { continue };
        let (a, b) = edge_vertices(&poly.directions, negative[e.edge], n);
        if let (Some(va), Some(vb)) = (poly.vertices[a], poly.vertices[b]) {
            let dev = line_deviation(va.coords(), vb.coords(), p.coords());
            if dev > tol {
                e.status = RayStatus::Failed(Error::Geometry(format!("edge sample off its edge by {dev:.3e}")));
            }
        }
    }
}

/// Indices of the vertex directions just before and after a negative angle.
fn edge_vertices(directions: &[f64], negative: f64, n: usize) -> (usize, usize) {
    let after = directions
        .iter()
        .position(|&d| d > negative)
        .unwrap_or(0);
    ((after + n - 1) % n, after)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EdgeMetric {
    pub measured: f64,
    pub expected: f64,
    /// Largest deviation of the two edge limits from the vertex line.
    pub collinearity: f64,
}

/// Hilbert-metric distance (scaled by `1/√6`) between the limits of the
/// negative rays at flat offsets `0` and `offset` along negative direction
/// `edge`, measured on the segment between the adjacent vertices.
pub fn edge_metric_check(ctx: &DevelopContext, edge: usize, offset: f64, cfg: &PolygonConfig) -> Result<EdgeMetric> {
    let (negative, directions) = vertex_directions(ctx)?;
    let angle = *negative
        .get(edge)
        .ok_or_else(|| Error::Domain(format!("edge index {edge} out of range")))?;
    let (ia, ib) = edge_vertices(&directions, angle, directions.len());
    let va = vertex_limit(ctx, directions[ia], &cfg.ray)?.point;
    let vb = vertex_limit(ctx, directions[ib], &cfg.ray)?.point;
    let l0 = edge_limit(ctx, angle, 0.0, cfg)?.point;
    let ls = edge_limit(ctx, angle, offset, cfg)?.point;
    let collinearity =
        line_deviation(va.coords(), vb.coords(), l0.coords()).max(line_deviation(va.coords(), vb.coords(), ls.coords()));
    if collinearity > cfg.collinearity_tol {
        return Err(Error::Geometry(format!("edge limits deviate from the vertex line by {collinearity:.3e}")));
    }
    let seg = ProjSegment::through(va, vb, l0)?;
    let measured = if offset == 0.0 { 0.0 } else { segment_metric(&seg, &l0, &ls)? };
    Ok(EdgeMetric { measured, expected: offset.abs(), collinearity })
}
