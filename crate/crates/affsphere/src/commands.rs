//! The subcommands. Each one returns a text report, the files it wrote and an
//! exit code; failures that stop a command early come back as errors.

use std::f64::consts::PI;
use std::fmt::Write;
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use rayon::prelude::*;

use affsphere_core::develop::{
    assemble_polygon, check_edges, cylinder_holonomy, develop_point, edge_limit, vertex_directions, vertex_limit,
    CylinderConfig, DevelopContext, EdgeSample, PolygonConfig, PolygonResult, RayConfig, RayLimit, RayStatus,
};
use affsphere_core::differentials::{
    classify_flat_end, flat_end_invariants, finite_volume_end_test, pole_order_at_infinity, residue, FlatEnd,
    MeromorphicKDifferential, Pole,
};
use affsphere_core::field::{ConformalField, FlatExtension, GridField};
use affsphere_core::linalg::Vec3;
use affsphere_core::projective::{ClassifyTolerances, ProjClass};
use affsphere_core::vortex::{
    coarse_bound, fine_bound, flat_log_density, graded_disk_mesh, solve_grid, solve_radial, uniform_mesh, Domain,
    NodeKind, RadialBoundary, RadialField, RadialProfile, ScalarField, SolverConfig, SolverReport,
};
use affsphere_core::ProjPoint;

use crate::config::{DomainSpec, PoleSpec, RunConfig};
use crate::error::{AppError, Result, EXIT_NONCONVERGENCE, EXIT_OK};
use crate::svg::{polygon_svg, PolygonFigure};
use crate::table::{fmt_f64, fmt_opt, write_csv};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Command {
    Solve,
    Polygon,
    Holonomy,
    ClassifyEnd,
    Bounds,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Outcome {
    pub report: String,
    pub files: Vec<PathBuf>,
    pub exit_code: i32,
}

/// Validates the config and runs one command on a pool of `threads` workers.
pub fn run(command: Command, cfg: &RunConfig, threads: usize) -> Result<Outcome> {
    cfg.validate()?;
    if threads == 0 {
        return Err(AppError::field("--threads", "must be at least 1"));
    }
    let out = cfg.output_dir()?;
    let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build()?;
    pool.install(|| match command {
        Command::Solve => cmd_solve(cfg, out.as_deref()),
        Command::Polygon => cmd_polygon(cfg, out.as_deref()),
        Command::Holonomy => cmd_holonomy(cfg, out.as_deref()),
        Command::ClassifyEnd => cmd_classify_end(cfg),
        Command::Bounds => cmd_bounds(cfg, out.as_deref()),
    })
}

fn exit_code(ok: bool) -> i32 {
    if ok {
        EXIT_OK
    } else {
        EXIT_NONCONVERGENCE
    }
}

pub fn solver_config(cfg: &RunConfig) -> SolverConfig {
    SolverConfig {
        tol: cfg.solver.tol,
        cg_tol: cfg.solver.cg_tol,
        max_newton: cfg.solver.max_newton,
        ..SolverConfig::default()
    }
}

fn differential(cfg: &RunConfig) -> Result<MeromorphicKDifferential> {
    cfg.differential
        .as_ref()
        .ok_or_else(|| AppError::field("differential", "this command needs a differential"))?
        .to_differential()
}

/// A solved conformal factor, extended by the flat metric outside its domain.
pub enum SolvedField {
    Grid(FlatExtension<GridField>),
    Radial(FlatExtension<RadialField>),
}

impl SolvedField {
    pub fn as_field(&self) -> &dyn ConformalField {
        match self {
            SolvedField::Grid(f) => f,
            SolvedField::Radial(f) => f,
        }
    }

    /// `max |u − u_flat|` over nodes where `φ ≠ 0`.
    pub fn max_flat_deviation(&self) -> f64 {
        match self {
            SolvedField::Grid(f) => {
                let g = &f.inner.grid;
                g.active_nodes().fold(0.0, |m: f64, (i, j)| {
                    let flat = flat_log_density(&f.phi, g.node(i, j));
                    if flat.is_finite() {
                        m.max((g.value(i, j) - flat).abs())
                    } else {
                        m
                    }
                })
            }
            SolvedField::Radial(f) => f.inner.w.iter().filter(|w| w.is_finite()).fold(0.0, |m: f64, w| m.max(w.abs())),
        }
    }

    /// `u` at the origin when the domain contains it.
    pub fn center_value(&self) -> Option<f64> {
        match self {
            SolvedField::Grid(f) => f.inner.sample(Complex64::new(0.0, 0.0)).ok().map(|s| s.u),
            SolvedField::Radial(f) => (f.inner.r[0] == 0.0).then(|| f.inner.center_value()),
        }
    }

    /// Mesh width (largest step for radial meshes).
    pub fn spacing(&self) -> f64 {
        match self {
            SolvedField::Grid(f) => f.inner.grid.h,
            SolvedField::Radial(f) => f.inner.r.windows(2).fold(0.0, |m: f64, p| m.max(p[1] - p[0])),
        }
    }

    /// Rows `(x, y, u, u_flat, residual)`; radial fields use `y = 0`.
    pub fn rows(&self) -> Vec<[f64; 5]> {
        match self {
            SolvedField::Grid(f) => grid_rows(&f.inner.grid, &f.phi),
            SolvedField::Radial(f) => {
                let r = &f.inner;
                let res = r.residuals();
                (0..r.r.len()).map(|i| [r.r[i], 0.0, r.u[i], r.u[i] - r.w[i], res[i]]).collect()
            }
        }
    }
}

fn grid_rows(g: &ScalarField, phi: &MeromorphicKDifferential) -> Vec<[f64; 5]> {
    g.active_nodes()
        .map(|(i, j)| {
            let z = g.node(i, j);
            let residual = if g.kind(i, j) == NodeKind::Interior { g.residual_at(phi, i, j) } else { 0.0 };
            [z.re, z.im, g.value(i, j), flat_log_density(phi, z), residual]
        })
        .collect()
}

pub struct Solution {
    pub field: SolvedField,
    pub report: SolverReport,
}

/// Solves the Wang equation for `φ` on the domain with flat boundary values.
pub fn solve_field(
    phi: &MeromorphicKDifferential,
    domain: DomainSpec,
    resolution: usize,
    solver: &SolverConfig,
) -> Result<Solution> {
    let grid = |d: Domain| -> Result<Solution> {
        let (grid, report) = solve_grid(phi, d, resolution, solver)?;
        Ok(Solution { field: SolvedField::Grid(FlatExtension { inner: GridField { grid, phi: phi.clone() }, phi: phi.clone() }), report })
    };
    let radial = |mesh: Vec<f64>, inner: Option<RadialBoundary>| -> Result<Solution> {
        let profile = RadialProfile::of(phi)
            .ok_or_else(|| AppError::field("domain", "radial domains need a monomial differential"))?;
        let (field, report) = solve_radial(profile, &mesh, phi.k(), inner, RadialBoundary::Flat, solver)?;
        Ok(Solution { field: SolvedField::Radial(FlatExtension { inner: field, phi: phi.clone() }), report })
    };
    match domain {
        DomainSpec::Disk { radius } => grid(Domain::Disk { radius }),
        DomainSpec::Annulus { inner, outer } => grid(Domain::Annulus { inner, outer }),
        DomainSpec::RadialDisk { radius } => radial(uniform_mesh(0.0, radius, resolution), None),
        DomainSpec::RadialAnnulus { inner, outer } => {
            radial(uniform_mesh(inner, outer, resolution), Some(RadialBoundary::Flat))
        }
    }
}

fn write_solver_report(out: &mut String, r: &SolverReport) {
    let _ = writeln!(out, "converged: {}", r.converged);
    let _ = writeln!(out, "newton iterations: {}", r.iterations);
    let _ = writeln!(out, "residual: {:.3e}", r.residual);
    let _ = writeln!(out, "certificate: {:?}", r.certificate);
    let _ = writeln!(out, "min u - u_flat: {:.3e}", r.min_flat_gap);
}

fn default_domain(cfg: &RunConfig) -> DomainSpec {
    cfg.domain.unwrap_or(DomainSpec::Disk { radius: 6.0 })
}

pub fn cmd_solve(cfg: &RunConfig, out: Option<&Path>) -> Result<Outcome> {
    let phi = differential(cfg)?;
    let domain = default_domain(cfg);
    let solver = solver_config(cfg);
    let sol = solve_field(&phi, domain, cfg.resolution, &solver)?;
    let mut report = String::new();
    write_solver_report(&mut report, &sol.report);
    let _ = writeln!(report, "mesh width: {:.4e}", sol.field.spacing());
    if let Some(u0) = sol.field.center_value() {
        let _ = writeln!(report, "u(0): {u0:.6e}");
    }
    let deviation = sol.field.max_flat_deviation();
    let _ = writeln!(report, "max |u - u_flat|: {deviation:.3e}");
    let mut ok = sol.report.converged;
    if matches!(domain, DomainSpec::Annulus { .. } | DomainSpec::RadialAnnulus { .. }) {
        // Halve the resolution to estimate the grid order of the deviation.
        let coarse_n = (cfg.resolution - 1) / 2 + 1;
        if coarse_n >= 32 {
            let coarse = solve_field(&phi, domain, coarse_n, &solver)?;
            ok &= coarse.report.converged;
            let dc = coarse.field.max_flat_deviation();
            let order = (dc / deviation).ln() / (coarse.field.spacing() / sol.field.spacing()).ln();
            let _ = writeln!(report, "max |u - u_flat| at resolution {coarse_n}: {dc:.3e}");
            let _ = writeln!(report, "observed grid order: {order:.3}");
        }
    }
    let mut files = Vec::new();
    if let Some(dir) = out {
        let path = dir.join("field.csv");
        let rows = sol.field.rows().into_iter().map(|r| r.iter().map(|&x| fmt_f64(x)).collect());
        write_csv(&path, &["x", "y", "u", "u_flat", "residual"], rows)?;
        files.push(path);
    }
    Ok(Outcome { report, files, exit_code: exit_code(ok) })
}

pub fn polygon_config(cfg: &RunConfig) -> PolygonConfig {
    PolygonConfig {
        ray: RayConfig { step: cfg.rays.step, tol: cfg.rays.tol, max_flat_time: cfg.rays.max_flat_time, ..RayConfig::default() },
        edge_offsets: cfg.rays.edge_offsets.clone(),
        collinearity_tol: cfg.rays.collinearity_tol,
        ..PolygonConfig::default()
    }
}

/// Vertex and edge limits computed on the current rayon pool, in the order
/// of their directions and offsets.
pub fn parallel_polygon(ctx: &DevelopContext, pc: &PolygonConfig) -> Result<PolygonResult> {
    let (negative, directions) = vertex_directions(ctx)?;
    let limits: Vec<affsphere_core::Result<RayLimit>> =
        directions.par_iter().map(|&a| vertex_limit(ctx, a, &pc.ray)).collect();
    let tasks: Vec<(usize, f64)> = (0..negative.len())
        .flat_map(|j| pc.edge_offsets.iter().map(move |&s| (j, s)))
        .collect();
    let edges: Vec<EdgeSample> = tasks
        .par_iter()
        .map(|&(j, s)| {
            let r = edge_limit(ctx, negative[j], s, pc);
            let status = match &r {
                Ok(l) => RayStatus::Converged { flat_time: l.flat_time, achieved: l.achieved },
                Err(e) => RayStatus::Failed(e.clone()),
            };
            EdgeSample { edge: j, offset: s, point: r.ok().map(|l| l.point), status }
        })
        .collect();
    let mut poly = assemble_polygon(ctx, directions, limits, edges)?;
    check_edges(&mut poly, pc.collinearity_tol, &negative);
    Ok(poly)
}

fn status_text(s: &RayStatus) -> (String, String, String) {
    match s {
        RayStatus::Converged { flat_time, achieved } => ("converged".into(), fmt_f64(*flat_time), fmt_f64(*achieved)),
        RayStatus::Failed(e) => (format!("failed: {e}"), String::new(), String::new()),
    }
}

fn coords_label(p: &ProjPoint) -> String {
    let c = p.coords();
    format!("[{:.4}:{:.4}:{:.4}]", c[0], c[1], c[2])
}

pub fn cmd_polygon(cfg: &RunConfig, out: Option<&Path>) -> Result<Outcome> {
    let phi = differential(cfg)?;
    if phi.k() != 3 || !phi.is_polynomial() {
        return Err(AppError::field("differential", "polygon needs a polynomial cubic differential"));
    }
    let expected = pole_order_at_infinity(&phi)? - 3;
    let sol = solve_field(&phi, default_domain(cfg), cfg.resolution, &solver_config(cfg))?;
    let mut report = String::new();
    write_solver_report(&mut report, &sol.report);
    if !sol.report.converged {
        return Ok(Outcome { report, files: Vec::new(), exit_code: EXIT_NONCONVERGENCE });
    }
    let base = Complex64::new(cfg.rays.base[0], cfg.rays.base[1]);
    let ctx = DevelopContext::new(sol.field.as_field(), &phi, base);
    let pc = polygon_config(cfg);
    let poly = parallel_polygon(&ctx, &pc)?;

    let found = poly.vertex_points().len();
    let _ = writeln!(report, "frame: {:?}", poly.frame);
    let _ = writeln!(report, "vertices: {found} of {expected} expected");
    for (i, v) in poly.vertices.iter().enumerate() {
        match v {
            Some(p) => {
                let _ = writeln!(report, "  {i}: {}", coords_label(p));
            }
            None => {
                let _ = writeln!(report, "  {i}: {}", status_text(&poly.statuses[i]).0);
            }
        }
    }
    let _ = writeln!(report, "convex: {}", poly.convex);
    if !poly.cross_ratios.is_empty() {
        let list: Vec<String> = poly.cross_ratios.iter().map(|c| format!("{c:.6}")).collect();
        let _ = writeln!(report, "vertex cross-ratios: {}", list.join(", "));
    }
    let edges_ok = poly.edges.iter().all(|e| e.status.is_converged());
    if !poly.edges.is_empty() {
        let good = poly.edges.iter().filter(|e| e.status.is_converged()).count();
        let _ = writeln!(report, "edge samples on their edges: {good} of {}", poly.edges.len());
    }

    let mut files = Vec::new();
    if let Some(dir) = out {
        let path = dir.join("vertices.csv");
        let rows = poly.statuses.iter().enumerate().map(|(i, s)| {
            let c = poly.vertices[i].map(|p| p.coords());
            let (status, time, achieved) = status_text(s);
            vec![
                i.to_string(),
                fmt_f64(poly.directions[i]),
                fmt_opt(c.map(|c| c[0])),
                fmt_opt(c.map(|c| c[1])),
                fmt_opt(c.map(|c| c[2])),
                status,
                time,
                achieved,
            ]
        });
        write_csv(&path, &["index", "direction", "x0", "x1", "x2", "status", "flat_time", "achieved"], rows)?;
        files.push(path);
        if !poly.edges.is_empty() {
            let path = dir.join("edges.csv");
            let rows = poly.edges.iter().map(|e| {
                let c = e.point.map(|p| p.coords());
                vec![
                    e.edge.to_string(),
                    fmt_f64(e.offset),
                    fmt_opt(c.map(|c| c[0])),
                    fmt_opt(c.map(|c| c[1])),
                    fmt_opt(c.map(|c| c[2])),
                    status_text(&e.status).0,
                ]
            });
            write_csv(&path, &["edge", "offset", "x0", "x1", "x2", "status"], rows)?;
            files.push(path);
        }
        let path = dir.join("polygon.svg");
        let samples = developed_samples(&ctx, cfg.rays.sample_radius, pc.transport_step);
        let vertices: Vec<(Vec3, String)> = poly
            .representatives
            .iter()
            .zip(&poly.vertices)
            .enumerate()
            .filter_map(|(i, (r, p))| Some((r.as_ref().copied()?, format!("{i} {}", coords_label(p.as_ref()?)))))
            .collect();
        let edge_points: Vec<Vec3> = poly.edges.iter().filter_map(|e| e.point.map(|p| p.coords())).collect();
        let svg = polygon_svg(&PolygonFigure {
            title: &format!("developed image, {found} vertices"),
            vertices: &vertices,
            base: poly.base_image.coords(),
            samples: &samples,
            edge_points: &edge_points,
        });
        std::fs::write(&path, svg).map_err(|e| AppError::io(&path, e))?;
        files.push(path);
    }
    let ok = poly.complete() && edges_ok && found == expected as usize;
    Ok(Outcome { report, files, exit_code: exit_code(ok) })
}

/// Developed images of points on circles around the base point; points whose
/// transport fails are left out.
fn developed_samples(ctx: &DevelopContext, radius: f64, step: f64) -> Vec<Vec3> {
    let points: Vec<Complex64> = (1..=4)
        .flat_map(|ring| {
            let rho = radius * ring as f64 / 4.0;
            (0..32).map(move |j| Complex64::from_polar(rho, 2.0 * PI * j as f64 / 32.0))
        })
        .collect();
    let developed: Vec<Option<Vec3>> = points
        .par_iter()
        .map(|&dz| {
            develop_point(ctx.field, ctx.phi, ctx.frame, ctx.base, ctx.base + dz, step).ok().map(|p| p.coords())
        })
        .collect();
    developed.into_iter().flatten().collect()
}

fn class_tag(c: ProjClass) -> &'static str {
    match c {
        ProjClass::Principal => "principal",
        ProjClass::NonPrincipalHyperbolic => "non-principal",
        ProjClass::NonHyperbolic => "non-hyperbolic",
    }
}

pub fn cylinder_config(cfg: &RunConfig) -> CylinderConfig {
    let h = &cfg.holonomy;
    CylinderConfig {
        radius: h.loop_radius,
        step: h.step,
        ray: RayConfig { step: cfg.rays.step, tol: h.ray_tol, max_flat_time: cfg.rays.max_flat_time, ..RayConfig::default() },
        rel_tol: h.rel_tol,
        classify: ClassifyTolerances { line: h.line_tol, eigen_gap: h.eigen_gap, point: h.line_tol },
    }
}

pub fn cmd_holonomy(cfg: &RunConfig, out: Option<&Path>) -> Result<Outcome> {
    let r = match &cfg.differential {
        Some(lit) => {
            let phi = lit.to_differential()?;
            match phi.as_monomial() {
                Some((-3, _)) if phi.k() == 3 => residue(&phi)?,
                _ => return Err(AppError::field("differential", "holonomy needs R z^-3 dz^3")),
            }
        }
        None => Complex64::new(cfg.holonomy.residue[0], cfg.holonomy.residue[1]),
    };
    if r == Complex64::new(0.0, 0.0) {
        return Err(AppError::field("holonomy.residue", "must be nonzero"));
    }
    let phi = MeromorphicKDifferential::monomial(3, r, -3);
    let domain = cfg.domain.unwrap_or(DomainSpec::Annulus { inner: (-2.0f64).exp(), outer: 2.0f64.exp() });
    let radius = cfg.holonomy.loop_radius;
    match domain {
        DomainSpec::Annulus { inner, outer } | DomainSpec::RadialAnnulus { inner, outer }
            if inner < radius && radius < outer => {}
        _ => return Err(AppError::field("domain", "holonomy needs an annulus around the loop radius")),
    }
    let sol = solve_field(&phi, domain, cfg.resolution, &solver_config(cfg))?;
    let mut report = String::new();
    write_solver_report(&mut report, &sol.report);
    if !sol.report.converged {
        return Ok(Outcome { report, files: Vec::new(), exit_code: EXIT_NONCONVERGENCE });
    }
    let _ = writeln!(report, "max |u - u_flat|: {:.3e}", sol.field.max_flat_deviation());
    let bh = cylinder_holonomy(sol.field.as_field(), r, &cylinder_config(cfg))?;
    let _ = writeln!(report, "residue: {} {:+}i", fmt_f64(r.re), r.im);
    let _ = writeln!(report, "{:>3} {:>16} {:>16} {:>12}", "j", "log|lambda|", "expected", "rel error");
    let scale = bh.expected.iter().fold(1.0, |m: f64, x| m.max(x.abs()));
    for j in 0..3 {
        let rel = (bh.logs[j] - bh.expected[j]).abs() / scale;
        let _ = writeln!(report, "{j:>3} {:>16.10} {:>16.10} {rel:>12.3e}", bh.logs[j], bh.expected[j]);
    }
    let predicted = if r.re > 0.0 {
        "principal"
    } else if r.re < 0.0 {
        "non-principal"
    } else {
        "non-hyperbolic (Re R = 0)"
    };
    let _ = writeln!(report, "class: {}", class_tag(bh.class));
    let _ = writeln!(report, "predicted from Re(R): {predicted}");
    let mut files = Vec::new();
    if let Some(dir) = out {
        let path = dir.join("holonomy.csv");
        let rows = (0..3).map(|j| {
            vec![j.to_string(), fmt_f64(bh.logs[j]), fmt_f64(bh.expected[j]), fmt_f64((bh.logs[j] - bh.expected[j]).abs())]
        });
        write_csv(&path, &["index", "log_abs_eigenvalue", "expected", "abs_error"], rows)?;
        files.push(path);
    }
    Ok(Outcome { report, files, exit_code: EXIT_OK })
}

fn pole_of(p: PoleSpec) -> Pole {
    match p {
        PoleSpec::Zero => Pole::Zero,
        PoleSpec::Infinity => Pole::Infinity,
    }
}

/// The classification line for a pole, without the header lines.
pub fn classify_end_text(phi: &MeromorphicKDifferential, pole: Pole) -> Result<String> {
    let order = phi.pole_order(pole)?;
    let k = phi.k() as i32;
    if order <= 0 {
        return Ok(format!("not a pole (order {order})"));
    }
    if finite_volume_end_test(phi, pole)? {
        return Ok("finite-volume end".into());
    }
    let inv = flat_end_invariants(phi, pole)?;
    let mut text = match classify_flat_end(&inv)? {
        FlatEnd::Cone { angle } => format!("cone, angle {angle:.6}"),
        FlatEnd::Funnel { angle } => format!("funnel, angle {angle:.6}"),
        FlatEnd::HalfCylinder { perimeter } => format!("half-cylinder, τ = {perimeter:.6}"),
        FlatEnd::GraftedFunnel { l, t } => format!("grafted funnel, l = {l}, τ = {t:.6}"),
    };
    if order == k && pole == Pole::Zero {
        let r = residue(phi)?;
        let _ = write!(text, ", R = {} {:+}i", fmt_f64(r.re), r.im);
    }
    if k == 3 && order > k {
        let _ = write!(text, "; d−3 = {} boundary vertices expected", order - 3);
    }
    Ok(text)
}

pub fn cmd_classify_end(cfg: &RunConfig) -> Result<Outcome> {
    let phi = differential(cfg)?;
    let pole = pole_of(cfg.classify.pole);
    let order = phi.pole_order(pole)?;
    let mut report = String::new();
    let _ = writeln!(report, "pole: {:?}", cfg.classify.pole);
    let _ = writeln!(report, "order: {order}");
    let _ = writeln!(report, "weight k: {}", phi.k());
    let _ = writeln!(report, "{}", classify_end_text(&phi, pole)?);
    Ok(Outcome { report, files: Vec::new(), exit_code: EXIT_OK })
}

#[derive(Clone, Debug, PartialEq)]
pub struct BoundsRow {
    pub radius: f64,
    pub center: f64,
    pub converged: bool,
    pub coarse: Option<f64>,
    pub fine: Option<f64>,
}

/// The complete solution for `dz^k` on the disk of radius `r`, cut off `gap`
/// before the rim where it takes the value of the hyperbolic metric.
pub fn complete_disk_solve(
    r: f64,
    k: u32,
    step: f64,
    gap: f64,
    solver: &SolverConfig,
) -> Result<(RadialField, SolverReport)> {
    let mesh = graded_disk_mesh(r, gap, step, 0.02);
    let rim = r - gap;
    let bc = RadialBoundary::Value((4.0 * r * r / (r * r - rim * rim).powi(2)).ln());
    let profile = RadialProfile { amplitude: 1.0, exponent: 0.0 };
    Ok(solve_radial(profile, &mesh, k, None, bc, solver)?)
}

pub fn bounds_table(cfg: &RunConfig) -> Result<Vec<BoundsRow>> {
    let b = &cfg.bounds;
    let solver = solver_config(cfg);
    b.radii
        .par_iter()
        .map(|&r| {
            let (field, report) = complete_disk_solve(r, b.k, b.step, b.rim_gap, &solver)?;
            let (center, converged) = (field.center_value(), report.converged);
            let coarse = if r >= 1.0 { Some(coarse_bound(r, b.k)?) } else { None };
            let fine = if r > b.r1 { Some(fine_bound(r, b.k, b.r1)?) } else { None };
            Ok(BoundsRow { radius: r, center, converged, coarse, fine })
        })
        .collect()
}

pub fn cmd_bounds(cfg: &RunConfig, out: Option<&Path>) -> Result<Outcome> {
    let rows = bounds_table(cfg)?;
    let mut report = String::new();
    let _ = writeln!(report, "k = {}, r1 = {}", cfg.bounds.k, cfg.bounds.r1);
    let _ = writeln!(report, "{:>8} {:>14} {:>14} {:>14}", "r", "u(0)", "fine", "coarse");
    let cell = |x: Option<f64>| x.map(|v| format!("{v:.6e}")).unwrap_or_else(|| "-".into());
    for row in &rows {
        let _ = writeln!(report, "{:>8} {:>14.6e} {:>14} {:>14}", row.radius, row.center, cell(row.fine), cell(row.coarse));
    }
    let converged = rows.iter().all(|r| r.converged);
    let monotone = rows.windows(2).all(|p| p[1].radius <= p[0].radius || p[1].center < p[0].center);
    let violations = rows
        .iter()
        .filter(|r| r.coarse.is_some_and(|c| r.center > c) || r.fine.is_some_and(|f| r.center > f))
        .count();
    let _ = writeln!(report, "u(0) decreasing in r: {monotone}");
    let _ = writeln!(report, "bound violations: {violations}");
    let mut files = Vec::new();
    if let Some(dir) = out {
        let path = dir.join("bounds.csv");
        let csv_rows = rows.iter().map(|r| {
            vec![fmt_f64(r.radius), fmt_f64(r.center), fmt_opt(r.fine), fmt_opt(r.coarse), r.converged.to_string()]
        });
        write_csv(&path, &["radius", "u0", "fine", "coarse", "converged"], csv_rows)?;
        files.push(path);
    }
    Ok(Outcome { report, files, exit_code: exit_code(converged && violations == 0) })
}
