//! Boundary holonomy at a third-order pole `R z⁻³ dz³`.

use alloc::format;
use core::f64::consts::PI;

use num_complex::Complex64;
use num_traits::Float;

use super::{flow, ray_limit, RayConfig};
use crate::connection::{parallel_transport, Frame, Path};
use crate::differentials::MeromorphicKDifferential;
use crate::error::{Error, Result};
use crate::field::ConformalField;
use crate::linalg::{cross, dot, norm, Mat3, Vec3};
use crate::projective::{classify_projective_with, ClassifyTolerances, ProjClass, ProjPoint, ProjSegment};

#[derive(Clone, Copy, Debug)]
pub struct CylinderConfig {
    /// Radius of the core circle, traversed clockwise from `z = radius`.
    pub radius: f64,
    pub step: f64,
    pub ray: RayConfig,
    /// Relative tolerance on the eigenvalue logs.
    pub rel_tol: f64,
    pub classify: ClassifyTolerances,
}

impl Default for CylinderConfig {
    fn default() -> Self {
        CylinderConfig {
            radius: 1.0,
            step: 1e-3,
            // Limits along rays into the pole settle slowly, and the
            // classification only needs them to about 1e−4.
            ray: RayConfig { tol: 1e-8, ..RayConfig::default() },
            rel_tol: 1e-3,
            classify: ClassifyTolerances { line: 1e-4, eigen_gap: 1e-3, point: 1e-4 },
        }
    }
}

#[derive(Clone, Copy, Debug)]
pub struct BoundaryHolonomy {
    pub h: Mat3,
    pub residue: Complex64,
    /// `log |λ|` of the eigenvalues, decreasing.
    pub logs: [f64; 3],
    /// `√2·Re(2πi rⱼ)` over the cube roots `rⱼ` of the residue, decreasing.
    pub expected: [f64; 3],
    pub class: ProjClass,
    /// The boundary segment, when the holonomy is hyperbolic.
    pub segment: Option<ProjSegment>,
}

fn sorted_desc(mut x: [f64; 3]) -> [f64; 3] {
    x.sort_by(|a, b| b.partial_cmp(a).unwrap_or(core::cmp::Ordering::Equal));
    x
}

pub fn expected_log_eigenvalues(residue: Complex64) -> [f64; 3] {
    let r = residue.powf(1.0 / 3.0);
    let roots: [Complex64; 3] = core::array::from_fn(|j| r * Complex64::from_polar(1.0, 2.0 * PI * j as f64 / 3.0));
    sorted_desc(roots.map(|rj| 2.0f64.sqrt() * (Complex64::new(0.0, 2.0 * PI) * rj).re))
}

/// Holonomy around the pole at 0 of `R z⁻³ dz³` and its classification. The
/// boundary segment is the line through the limits of two parallel negative
/// rays running into the pole, cut at the two eigenvectors it contains.
pub fn cylinder_holonomy(field: &dyn ConformalField, residue: Complex64, cfg: &CylinderConfig) -> Result<BoundaryHolonomy> {
    if residue == Complex64::new(0.0, 0.0) {
        return Err(Error::Domain("residue must be nonzero".into()));
    }
    let phi = MeromorphicKDifferential::monomial(3, residue, -3);
    let base = Complex64::new(cfg.radius, 0.0);
    let h = parallel_transport(&Path::circle(Complex64::new(0.0, 0.0), cfg.radius, -1.0), field, &phi, Frame::Real, cfg.step)?
        .matrix;
    let ev = h.eigenvalues();
    let logs = sorted_desc(ev.map(|l| l.norm().ln()));
    let expected = expected_log_eigenvalues(residue);
    let scale = expected.iter().fold(1.0, |m: f64, x| m.max(x.abs()));
    let err = logs.iter().zip(&expected).fold(0.0, |m: f64, (a, b)| m.max((a - b).abs())) / scale;
    if !(err <= cfg.rel_tol) {
        return Err(Error::Certification(format!(
            "holonomy eigenvalue logs {logs:?} differ from {expected:?} by {err:.3e} relative"
        )));
    }
    let top = ev.iter().fold(0.0, |m: f64, z| m.max(z.norm()));
    let real = ev.iter().all(|z| z.im.abs() <= 1e-9 * top && z.re > 0.0);
    let gap = (logs[0] - logs[1]).min(logs[1] - logs[2]);
    if !real || gap <= cfg.classify.eigen_gap * scale {
        return Ok(BoundaryHolonomy { h, residue, logs, expected, class: ProjClass::NonHyperbolic, segment: None });
    }
    let segment = boundary_segment(field, &phi, residue, base, &h, logs, cfg)?;
    let class = classify_projective_with(&h, &segment, &cfg.classify)?;
    Ok(BoundaryHolonomy { h, residue, logs, expected, class, segment: Some(segment) })
}

fn boundary_segment(
    field: &dyn ConformalField,
    phi: &MeromorphicKDifferential,
    residue: Complex64,
    base: Complex64,
    h: &Mat3,
    logs: [f64; 3],
    cfg: &CylinderConfig,
) -> Result<ProjSegment> {
    // Flat coordinate ζ = r log z with r³ = R; the circle has period 2πi·r.
    let r = residue.powf(1.0 / 3.0);
    let period = Complex64::new(0.0, 2.0 * PI) * r;
    let v = [
        Complex64::from_polar(1.0, PI / 3.0),
        Complex64::new(-1.0, 0.0),
        Complex64::from_polar(1.0, -PI / 3.0),
    ]
    .into_iter()
    .max_by(|a, b| {
        let score = |v: &Complex64| (v * period.conj()).im;
        score(a).partial_cmp(&score(b)).unwrap_or(core::cmp::Ordering::Equal)
    })
    .expect("three candidates");
    let ray = move |z: Complex64, _: Complex64| Ok(z * v / r);
    let shift = move |z: Complex64, _: Complex64| Ok(z * Complex64::new(0.0, 1.0) * v / r);
    let l0 = ray_limit(field, phi, Frame::Real, base, Mat3::IDENTITY, &ray, &cfg.ray)?;
    let (z1, m1) = flow(field, phi, Frame::Real, base, Mat3::IDENTITY, &shift, 1.0, cfg.ray.step)?;
    let l1 = ray_limit(field, phi, Frame::Real, z1, m1, &ray, &cfg.ray)?;
    let line = cross(l0.representative, l1.representative);
    let vectors: [Vec3; 3] = core::array::from_fn(|i| h.null_vector(logs[i].exp()));
    let incidence = |x: &Vec3| dot(line, *x).abs() / (norm(line) * norm(*x));
    let (mut best, mut pair) = (f64::INFINITY, (0, 1));
    for (a, b) in [(0, 1), (0, 2), (1, 2)] {
        let worst = incidence(&vectors[a]).max(incidence(&vectors[b]));
        if worst < best {
            best = worst;
            pair = (a, b);
        }
    }
    if best > cfg.classify.line {
        return Err(Error::Geometry(format!("no two eigenvectors on the boundary line (incidence {best:.3e})")));
    }
    // l0 is only within `classify.line` of the eigenvector line; its
    // projection onto that line picks the arc.
    let (va, vb) = (vectors[pair.0], vectors[pair.1]);
    let n = cross(va, vb);
    let x = l0.representative;
    let t = dot(x, n) / dot(n, n);
    let inside = ProjPoint::new([x[0] - t * n[0], x[1] - t * n[1], x[2] - t * n[2]])?;
    ProjSegment::through(ProjPoint::new(va)?, ProjPoint::new(vb)?, inside)
}
