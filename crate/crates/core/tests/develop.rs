use std::f64::consts::PI;

use affsphere_core::connection::{parallel_transport, Frame, Path};
use affsphere_core::develop::*;
use affsphere_core::differentials::MeromorphicKDifferential;
use affsphere_core::field::{FlatExtension, FlatField};
use affsphere_core::projective::{ProjClass, ProjPoint};
use affsphere_core::vortex::{graded_disk_mesh, solve_radial, RadialBoundary, RadialField, RadialProfile, SolverConfig};
use num_complex::Complex64;

fn monomial(m: i32) -> MeromorphicKDifferential {
    MeromorphicKDifferential::monomial(3, Complex64::new(1.0, 0.0), m)
}

/// Radial solve of `z^m dz³` on a disk of the given radius with the flat
/// boundary value, extended by the flat metric outside.
fn radial_solve(m: i32, radius: f64, h: f64) -> FlatExtension<RadialField> {
    let phi = monomial(m);
    let profile = RadialProfile::of(&phi).unwrap();
    let mesh = graded_disk_mesh(radius, 0.0, h, 1.0);
    let (field, report) =
        solve_radial(profile, &mesh, 3, None, RadialBoundary::Flat, &SolverConfig::default()).unwrap();
    assert!(report.converged);
    FlatExtension { inner: field, phi }
}

fn origin() -> Complex64 {
    Complex64::new(0.0, 0.0)
}

#[test]
fn titeica_triangle() {
    let field = FlatField::model();
    let phi = MeromorphicKDifferential::model();
    let ctx = DevelopContext::new(&field, &phi, origin());
    assert_eq!(ctx.frame, Frame::Titeica);
    let poly = extract_polygon(&ctx, &PolygonConfig::default()).unwrap();
    assert!(poly.complete() && poly.convex);
    let expected = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]].map(|x| ProjPoint::new(x).unwrap());
    let vertices = poly.vertex_points();
    assert_eq!(vertices.len(), 3);
    for e in &expected {
        assert!(vertices.iter().any(|v| v.approx_eq(e, 1e-6)), "{e:?} missing from {vertices:?}");
    }
    assert!(poly.cross_ratios.is_empty());
}

#[test]
fn vertex_count_law() {
    for m in 0..3 {
        let field = radial_solve(m, 20.0, 2e-3);
        let phi = monomial(m);
        let ctx = DevelopContext::new(&field, &phi, origin());
        let poly = extract_polygon(&ctx, &PolygonConfig::default()).unwrap();
        let vertices = poly.vertex_points();
        assert_eq!(vertices.len(), (m + 3) as usize);
        assert!(poly.complete() && poly.convex, "m = {m}");
        for (i, a) in vertices.iter().enumerate() {
            for b in &vertices[i + 1..] {
                assert!(a.sin_angle(b) > 1e-3);
            }
        }
    }
}

#[test]
fn square_symmetry_at_two_resolutions() {
    let phi = monomial(1);
    let mut runs = Vec::new();
    for h in [2e-3, 1e-3] {
        let field = radial_solve(1, 20.0, h);
        let ctx = DevelopContext::new(&field, &phi, origin());
        let cfg = PolygonConfig { edge_offsets: vec![0.5], ..PolygonConfig::default() };
        let poly = extract_polygon(&ctx, &cfg).unwrap();
        assert_eq!(poly.cross_ratios.len(), 4);
        assert!((poly.cross_ratios[0] - 1.0).abs() > 1e-2, "degenerate pencil {:?}", poly.cross_ratios);
        let first = poly.cross_ratios[0];
        assert!(poly.cross_ratios.iter().all(|c| (c - first).abs() < 1e-3), "{:?}", poly.cross_ratios);
        runs.push(first);
    }
    assert!((runs[0] - runs[1]).abs() < 1e-3);
}

#[test]
fn model_edge_metric_is_exact() {
    let field = FlatField::model();
    let phi = MeromorphicKDifferential::model();
    let ctx = DevelopContext::new(&field, &phi, origin());
    let cfg = PolygonConfig::default();
    for edge in 0..3 {
        for s in [0.0, 0.25, 0.5, 1.0] {
            let m = edge_metric_check(&ctx, edge, s, &cfg).unwrap();
            assert!((m.measured - s).abs() < 1e-6, "edge {edge} s {s}: {m:?}");
        }
    }
}

#[test]
fn model_edge_limit_closed_form() {
    // Limits of parallel negative rays lie on one edge of the triangle, and a
    // flat offset s multiplies the ratio of the nonzero coordinates by e^{√6 s}.
    let field = FlatField::model();
    let phi = MeromorphicKDifferential::model();
    let ctx = DevelopContext::new(&field, &phi, origin());
    let (negative, _) = vertex_directions(&ctx).unwrap();
    let cfg = PolygonConfig::default();
    for &angle in &negative {
        let base = edge_limit(&ctx, angle, 0.0, &cfg).unwrap().point.coords();
        let zero = base.iter().position(|x| x.abs() < 1e-9).expect("edge point");
        let shifted = edge_limit(&ctx, angle, 0.5, &cfg).unwrap().point.coords();
        assert!(shifted[zero].abs() < 1e-9);
        let ratio = |x: [f64; 3]| {
            let rest: Vec<f64> = (0..3).filter(|&i| i != zero).map(|i| x[i]).collect();
            (rest[0] / rest[1]).ln()
        };
        let moved = (ratio(shifted) - ratio(base)).abs();
        assert!((moved - 6f64.sqrt() * 0.5).abs() < 1e-6, "{moved}");
    }
}

#[test]
fn square_edge_metric_and_linearity() {
    let phi = monomial(1);
    let field = radial_solve(1, 20.0, 2e-3);
    let ctx = DevelopContext::new(&field, &phi, origin());
    let cfg = PolygonConfig::default();
    let measured: Vec<f64> =
        [0.25, 0.5, 1.0].iter().map(|&s| edge_metric_check(&ctx, 0, s, &cfg).unwrap().measured).collect();
    for (m, s) in measured.iter().zip([0.25, 0.5, 1.0]) {
        assert!((m - s).abs() < 5e-3);
        assert!((m / s - measured[2]).abs() < 1e-2 * measured[2]);
    }
}

#[test]
fn parallel_edge_rays_are_collinear() {
    let phi = monomial(1);
    let field = radial_solve(1, 20.0, 2e-3);
    let ctx = DevelopContext::new(&field, &phi, origin());
    let cfg = PolygonConfig { edge_offsets: vec![-0.5, 0.25, 1.0], ..PolygonConfig::default() };
    let poly = extract_polygon(&ctx, &cfg).unwrap();
    assert_eq!(poly.edges.len(), 12);
    for edge in 0..4 {
        let pts: Vec<[f64; 3]> =
            poly.edges.iter().filter(|e| e.edge == edge).map(|e| e.point.unwrap().coords()).collect();
        let line = affsphere_core::linalg::cross(pts[0], pts[1]);
        let dev = affsphere_core::linalg::dot(line, pts[2]).abs()
            / (affsphere_core::linalg::norm(line) * affsphere_core::linalg::norm(pts[2]));
        assert!(dev < 1e-6, "edge {edge}: {dev:e}");
    }
    assert!(poly.edges.iter().all(|e| e.status.is_converged()));
}

fn base_change_error(field: &dyn affsphere_core::field::ConformalField, phi: &MeromorphicKDifferential) -> f64 {
    let (b0, b1) = (Complex64::new(0.3, 0.2), Complex64::new(-0.5, 0.7));
    let t = parallel_transport(&Path::Segment { from: b0, to: b1 }, field, phi, Frame::Real, 1e-3).unwrap().matrix;
    [Complex64::new(1.0, -1.0), Complex64::new(-2.0, 0.5), Complex64::new(0.1, 2.2)]
        .iter()
        .map(|&z| {
            let d0 = develop_point(field, phi, Frame::Real, b0, z, 1e-3).unwrap();
            let d1 = develop_point(field, phi, Frame::Real, b1, z, 1e-3).unwrap();
            d0.transform(&t).unwrap().sin_angle(&d1)
        })
        .fold(0.0, f64::max)
}

#[test]
fn base_change_is_one_matrix() {
    let phi = MeromorphicKDifferential::model();
    let exact = FlatField::model();
    assert!(base_change_error(&exact, &phi) < 1e-8);
    // The numerical solve is only flat up to its discretization error.
    let phi = monomial(1);
    let field = radial_solve(1, 20.0, 2e-3);
    assert!(base_change_error(&field, &phi) < 1e-6);
}

#[test]
fn developing_map_is_injective_on_a_grid() {
    let phi = monomial(1);
    let field = radial_solve(1, 20.0, 2e-3);
    let mut points = Vec::new();
    for i in 0..20 {
        for j in 0..20 {
            let z = Complex64::new(-2.0 + 4.0 * i as f64 / 19.0, -2.0 + 4.0 * j as f64 / 19.0);
            points.push(develop_point(&field, &phi, Frame::Real, origin(), z, 1e-2).unwrap());
        }
    }
    for (i, a) in points.iter().enumerate() {
        for b in &points[i + 1..] {
            assert!(a.sin_angle(b) > 1e-6);
        }
    }
}

#[test]
fn stokes_cosets_for_z_dz3() {
    let phi = monomial(1);
    let field = radial_solve(1, 20.0, 2e-3);
    let cfg = StokesConfig::default();
    let unstable = unstable_directions(&phi).unwrap();
    assert_eq!(unstable.len(), 8);
    for &a in &unstable {
        let r = stokes_check(&field, &phi, a, &cfg).unwrap();
        assert!(r.unstable && r.residual <= 1e-3, "unstable {a}: {}", r.residual);
        let s = stokes_check(&field, &phi, a + PI / 6.0, &cfg).unwrap();
        assert!(!s.unstable && s.residual <= 1e-3, "sector {}: {}", a + PI / 6.0, s.residual);
    }
}

#[test]
fn cylinder_holonomy_matches_residue_formula() {
    let cases = [
        (Complex64::new(1.0, 0.0), ProjClass::Principal),
        (Complex64::new(-1.0, 0.0), ProjClass::NonPrincipalHyperbolic),
        (Complex64::new(0.0, 1.0), ProjClass::NonHyperbolic),
    ];
    for (r, class) in cases {
        let field = FlatField { phi: MeromorphicKDifferential::monomial(3, r, -3) };
        let b = cylinder_holonomy(&field, r, &CylinderConfig::default()).unwrap();
        let scale = b.expected.iter().fold(1.0f64, |m, x| m.max(x.abs()));
        for (l, e) in b.logs.iter().zip(&b.expected) {
            assert!((l - e).abs() <= 1e-3 * scale, "R = {r}: {:?} vs {:?}", b.logs, b.expected);
        }
        assert!(b.logs.iter().sum::<f64>().abs() < 1e-6);
        assert_eq!(b.class, class, "R = {r}");
    }
    let one = expected_log_eigenvalues(Complex64::new(1.0, 0.0));
    assert!((one[0] - 6f64.sqrt() * PI).abs() < 1e-12 && one[1].abs() < 1e-12);
}
