//! Points, segments and cross-ratios in RP², plus the eigenvalue combinatorics
//! of the diagonal Ţiţeica transport (the functions μ_ij and the nilpotent
//! algebras n_v).

use alloc::format;
use alloc::vec::Vec;
use core::f64::consts::{FRAC_PI_3, SQRT_2};

use num_complex::Complex64;
use num_traits::Float;

use crate::error::{Error, Result};
use crate::linalg::{cross, dot, norm, Mat3, Vec3};

/// Two points are equal when the sine of the angle between representatives is
/// at most this.
pub const PROJ_TOL: f64 = 1e-9;

/// Default collinearity tolerance for cross-ratio inputs (scale-free).
pub const COLLINEAR_TOL: f64 = 1e-6;

/// Relative tie tolerance when collecting the maximizing pairs of μ.
pub const MU_TIE_TOL: f64 = 1e-8;

#[derive(Clone, Copy, Debug)]
pub struct ProjPoint {
    coords: Vec3,
}

impl ProjPoint {
    pub fn new(x: Vec3) -> Result<ProjPoint> {
        if !x.iter().all(|c| c.is_finite()) {
            return Err(Error::Domain(format!("non-finite homogeneous coordinates {x:?}")));
        }
        let p = ProjPoint { coords: x };
        let k = p.dominant_index();
        if x[k] == 0.0 {
            return Err(Error::Domain("all homogeneous coordinates vanish".into()));
        }
        Ok(p.normalize())
    }

    pub fn coords(&self) -> Vec3 {
        self.coords
    }

    fn dominant_index(&self) -> usize {
        let c = self.coords;
        let mut k = 0;
        for i in 1..3 {
            if c[i].abs() > c[k].abs() {
                k = i;
            }
        }
        k
    }

    /// Scale so the largest-magnitude coordinate is exactly `+1`.
    pub fn normalize(&self) -> ProjPoint {
        let s = self.coords[self.dominant_index()];
        ProjPoint {
            coords: [self.coords[0] / s, self.coords[1] / s, self.coords[2] / s],
        }
    }

    pub fn sin_angle(&self, other: &ProjPoint) -> f64 {
        let a = self.coords;
        let b = other.coords;
        norm(cross(a, b)) / (norm(a) * norm(b))
    }

    pub fn approx_eq(&self, other: &ProjPoint, tol: f64) -> bool {
        self.sin_angle(other) <= tol
    }

    pub fn transform(&self, m: &Mat3) -> Result<ProjPoint> {
        ProjPoint::new(m.mul_vec(self.coords))
    }
}

impl PartialEq for ProjPoint {
    fn eq(&self, other: &ProjPoint) -> bool {
        self.approx_eq(other, PROJ_TOL)
    }
}

/// An open segment `{[(1−s)·a + s·b] : 0 < s < 1}` for fixed representatives
/// of its endpoints. The representatives decide which of the two arcs of the
/// projective line is meant.
#[derive(Clone, Copy, Debug)]
pub struct ProjSegment {
    a: Vec3,
    b: Vec3,
}

impl ProjSegment {
    pub fn from_representatives(a: Vec3, b: Vec3) -> Result<ProjSegment> {
        let pa = ProjPoint::new(a)?;
        let pb = ProjPoint::new(b)?;
        if pa == pb {
            return Err(Error::Domain("segment endpoints coincide".into()));
        }
        Ok(ProjSegment { a, b })
    }

    pub fn new(a: ProjPoint, b: ProjPoint) -> Result<ProjSegment> {
        ProjSegment::from_representatives(a.coords(), b.coords())
    }

    /// The segment from `a` to `b` that contains `inside`.
    pub fn through(a: ProjPoint, b: ProjPoint, inside: ProjPoint) -> Result<ProjSegment> {
        let seg = ProjSegment::new(a, b)?;
        let (alpha, beta) = seg.decompose(&inside, COLLINEAR_TOL)?;
        if alpha * beta > 0.0 {
            Ok(seg)
        } else {
            let bb = b.coords();
            ProjSegment::from_representatives(a.coords(), [-bb[0], -bb[1], -bb[2]])
        }
    }

    pub fn a(&self) -> ProjPoint {
        ProjPoint::new(self.a).expect("validated at construction")
    }

    pub fn b(&self) -> ProjPoint {
        ProjPoint::new(self.b).expect("validated at construction")
    }

    pub fn representatives(&self) -> (Vec3, Vec3) {
        (self.a, self.b)
    }

    /// Normal vector of the supporting line.
    pub fn line(&self) -> Vec3 {
        cross(self.a, self.b)
    }

    pub fn sample(&self, s: f64) -> ProjPoint {
        let p = [
            (1.0 - s) * self.a[0] + s * self.b[0],
            (1.0 - s) * self.a[1] + s * self.b[1],
            (1.0 - s) * self.a[2] + s * self.b[2],
        ];
        ProjPoint::new(p).expect("interior samples of a valid segment are nonzero")
    }

    /// Coefficients `(α, β)` with `x ∝ α·a + β·b` (least squares in the plane).
    fn decompose(&self, x: &ProjPoint, tol: f64) -> Result<(f64, f64)> {
        let n = self.line();
        let xc = x.coords();
        let dev = dot(n, xc).abs() / (norm(n) * norm(xc));
        if dev > tol {
            return Err(Error::Collinearity { deviation: dev });
        }
        let (aa, ab, bb) = (dot(self.a, self.a), dot(self.a, self.b), dot(self.b, self.b));
        let (xa, xb) = (dot(xc, self.a), dot(xc, self.b));
        let det = aa * bb - ab * ab;
        Ok(((xa * bb - xb * ab) / det, (xb * aa - xa * ab) / det))
    }

    /// Affine parameter in `(0, 1)` of an interior point, `None` otherwise.
    pub fn interior_param(&self, x: &ProjPoint) -> Option<f64> {
        let (alpha, beta) = self.decompose(x, COLLINEAR_TOL).ok()?;
        let s = beta / (alpha + beta);
        (alpha * beta > 0.0 && s > 0.0 && s < 1.0).then_some(s)
    }
}

/// `[a, x, y, b] = (a−y)(b−x) / ((a−x)(b−y))` for four points on a line.
pub fn cross_ratio(a: &ProjPoint, x: &ProjPoint, y: &ProjPoint, b: &ProjPoint) -> Result<f64> {
    cross_ratio_with_tol(a, x, y, b, COLLINEAR_TOL)
}

pub fn cross_ratio_with_tol(a: &ProjPoint, x: &ProjPoint, y: &ProjPoint, b: &ProjPoint, tol: f64) -> Result<f64> {
    let unit = |p: &ProjPoint| {
        let c = p.coords();
        let n = norm(c);
        [c[0] / n, c[1] / n, c[2] / n]
    };
    let pts = [unit(a), unit(x), unit(y), unit(b)];
    let mut normal = [0.0; 3];
    for i in 0..4 {
        for j in i + 1..4 {
            let c = cross(pts[i], pts[j]);
            if norm(c) > norm(normal) {
                normal = c;
            }
        }
    }
    let nn = norm(normal);
    if nn == 0.0 {
        return Err(Error::Division);
    }
    let normal = [normal[0] / nn, normal[1] / nn, normal[2] / nn];
    let deviation = pts.iter().fold(0.0, |m: f64, p| m.max(dot(normal, *p).abs()));
    if deviation > tol {
        return Err(Error::Collinearity { deviation });
    }
    let mut k = 0;
    for i in 1..3 {
        if normal[i].abs() > normal[k].abs() {
            k = i;
        }
    }
    // Bracket of two points after dropping the dominant coordinate of the
    // normal, i.e. orthogonal projection onto the best-conditioned plane.
    let bracket = |p: Vec3, q: Vec3| cross(p, q)[k];
    let [pa, px, py, pb] = pts;
    let ax = bracket(pa, px);
    let yb = bracket(py, pb);
    if ax.abs() <= 1e-15 || yb.abs() <= 1e-15 {
        return Err(Error::Division);
    }
    Ok(bracket(pa, py) * bracket(px, pb) / (ax * yb))
}

pub fn hilbert_distance(seg: &ProjSegment, x: &ProjPoint, y: &ProjPoint) -> Result<f64> {
    for p in [x, y] {
        if seg.interior_param(p).is_none() {
            return Err(Error::Domain(format!("{:?} is not interior to the segment", p.coords())));
        }
    }
    let cr = cross_ratio(&seg.a(), x, y, &seg.b())?;
    Ok(cr.ln().abs())
}

/// The boundary-segment metric: Hilbert distance scaled by `1/√6`.
pub fn segment_metric(seg: &ProjSegment, x: &ProjPoint, y: &ProjPoint) -> Result<f64> {
    Ok(hilbert_distance(seg, x, y)? / 6.0f64.sqrt())
}

/// `ω^{1−i}` for one-based `i`.
fn root_weight(i: usize) -> Complex64 {
    Complex64::from_polar(1.0, -2.0 * FRAC_PI_3 * (i as f64 - 1.0))
}

fn check_unit(v: Complex64) -> Result<()> {
    if (v.norm() - 1.0).abs() > 1e-9 {
        return Err(Error::Domain(format!("direction {v} is not unit")));
    }
    Ok(())
}

/// `μ_ij(v) = √2·Re[(ω^{1−i} − ω^{1−j})·v]`, one-based indices.
pub fn mu(v: Complex64, i: usize, j: usize) -> Result<f64> {
    check_unit(v)?;
    if !(1..=3).contains(&i) || !(1..=3).contains(&j) {
        return Err(Error::Domain(format!("index pair ({i},{j}) out of range")));
    }
    Ok(SQRT_2 * ((root_weight(i) - root_weight(j)) * v).re)
}

pub fn mu_max(v: Complex64) -> Result<f64> {
    let mut best = f64::NEG_INFINITY;
    for (i, j) in OFF_DIAGONAL {
        best = best.max(mu(v, i, j)?);
    }
    Ok(best)
}

const OFF_DIAGONAL: [(usize, usize); 6] = [(1, 2), (1, 3), (2, 1), (2, 3), (3, 1), (3, 2)];

/// Index pairs spanning the nilpotent algebra `n_v`.
#[derive(Clone, Debug, PartialEq)]
pub struct UnipotentBasis {
    pub direction: Complex64,
    /// One-based `(i, j)` pairs, sorted.
    pub pairs: Vec<(usize, usize)>,
}

impl UnipotentBasis {
    pub fn contains(&self, i: usize, j: usize) -> bool {
        self.pairs.contains(&(i, j))
    }

    /// Elementary matrices `E_ij` of the basis.
    pub fn elementary(&self) -> Vec<Mat3> {
        self.pairs.iter().map(|&(i, j)| Mat3::unit(i - 1, j - 1)).collect()
    }
}

pub fn unipotent_basis(v: Complex64) -> Result<UnipotentBasis> {
    let top = mu_max(v)?;
    let mut pairs = Vec::new();
    for (i, j) in OFF_DIAGONAL {
        if mu(v, i, j)? >= top - MU_TIE_TOL * top.abs() {
            pairs.push((i, j));
        }
    }
    Ok(UnipotentBasis { direction: v, pairs })
}

/// Largest entry of `P1⁻¹P2 − I` outside the span of the basis.
pub fn coset_residual(p1: &Mat3, p2: &Mat3, basis: &UnipotentBasis) -> Result<f64> {
    let inv = p1.inverse().ok_or(Error::Singular)?;
    let d = inv * *p2 - Mat3::IDENTITY;
    let mut r: f64 = 0.0;
    for i in 0..3 {
        for j in 0..3 {
            if !basis.contains(i + 1, j + 1) {
                r = r.max(d.0[i][j].abs());
            }
        }
    }
    Ok(r)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ProjClass {
    Principal,
    NonPrincipalHyperbolic,
    NonHyperbolic,
}

#[derive(Clone, Copy, Debug)]
pub struct ClassifyTolerances {
    /// Allowed sine between the segment line and its image.
    pub line: f64,
    /// Eigenvalues count as distinct when their logs differ by more than this
    /// times `max(1, max |log λ|)`.
    pub eigen_gap: f64,
    /// Allowed sine between an endpoint and an eigenvector.
    pub point: f64,
}

impl Default for ClassifyTolerances {
    fn default() -> Self {
        ClassifyTolerances { line: 1e-6, eigen_gap: 1e-6, point: 1e-6 }
    }
}

pub fn classify_projective(h: &Mat3, seg: &ProjSegment) -> Result<ProjClass> {
    classify_projective_with(h, seg, &ClassifyTolerances::default())
}

pub fn classify_projective_with(h: &Mat3, seg: &ProjSegment, tol: &ClassifyTolerances) -> Result<ProjClass> {
    let inv = h.inverse().ok_or(Error::Singular)?;
    let line = seg.line();
    let image = inv.transpose().mul_vec(line);
    let sin = norm(cross(line, image)) / (norm(line) * norm(image));
    if sin > tol.line {
        return Err(Error::Precondition(format!("matrix does not preserve the segment line (sine {sin:.3e})")));
    }
    let ev = h.eigenvalues();
    let scale = ev.iter().fold(0.0, |m: f64, z| m.max(z.norm()));
    if ev.iter().any(|z| z.im.abs() > 1e-12 * scale || z.re <= 0.0) {
        return Ok(ProjClass::NonHyperbolic);
    }
    let mut logs: Vec<f64> = ev.iter().map(|z| z.re.ln()).collect();
    logs.sort_by(|a, b| a.partial_cmp(b).unwrap_or(core::cmp::Ordering::Equal));
    let spread = logs.iter().fold(1.0, |m: f64, l| m.max(l.abs()));
    if logs[1] - logs[0] <= tol.eigen_gap * spread || logs[2] - logs[1] <= tol.eigen_gap * spread {
        return Ok(ProjClass::NonHyperbolic);
    }
    let top = ProjPoint::new(h.null_vector(logs[2].exp()))?;
    let bottom = ProjPoint::new(h.null_vector(logs[0].exp()))?;
    let (a, b) = (seg.a(), seg.b());
    let joins = (a.approx_eq(&top, tol.point) && b.approx_eq(&bottom, tol.point))
        || (a.approx_eq(&bottom, tol.point) && b.approx_eq(&top, tol.point));
    Ok(if joins { ProjClass::Principal } else { ProjClass::NonPrincipalHyperbolic })
}

#[cfg(test)]
mod tests {
    use super::*;
    use core::f64::consts::PI;

    fn affine(t: f64) -> ProjPoint {
        ProjPoint::new([t, 1.0, 0.0]).unwrap()
    }

    #[test]
    fn cross_ratio_unit_interval() {
        let cr = cross_ratio(&affine(0.0), &affine(0.5), &affine(0.75), &affine(1.0)).unwrap();
        assert!((cr - 3.0).abs() < 1e-14);
    }

    #[test]
    fn cross_ratio_errors() {
        let off = ProjPoint::new([0.0, 0.0, 1.0]).unwrap();
        assert!(matches!(
            cross_ratio(&affine(0.0), &off, &affine(0.5), &affine(1.0)),
            Err(Error::Collinearity { .. })
        ));
        assert_eq!(cross_ratio(&affine(0.0), &affine(0.0), &affine(0.5), &affine(1.0)), Err(Error::Division));
    }

    #[test]
    fn hilbert_on_unit_interval() {
        let seg = ProjSegment::new(affine(0.0), affine(1.0)).unwrap();
        let d = hilbert_distance(&seg, &affine(0.5), &affine(0.75)).unwrap();
        assert!((d - 3.0f64.ln()).abs() < 1e-14);
        let m = segment_metric(&seg, &affine(0.5), &affine(0.75)).unwrap();
        assert!((m - 3.0f64.ln() / 6.0f64.sqrt()).abs() < 1e-14);
        assert!(hilbert_distance(&seg, &affine(0.5), &affine(1.5)).is_err());
    }

    #[test]
    fn segment_through_picks_the_arc() {
        let a = ProjPoint::new([1.0, 0.0, 0.0]).unwrap();
        let b = ProjPoint::new([0.0, 1.0, 0.0]).unwrap();
        let outside = ProjPoint::new([1.0, -1.0, 0.0]).unwrap();
        let seg = ProjSegment::through(a, b, outside).unwrap();
        assert!(seg.interior_param(&outside).is_some());
        assert!(seg.interior_param(&ProjPoint::new([1.0, 1.0, 0.0]).unwrap()).is_none());
    }

    #[test]
    fn mu_extremes() {
        let s6 = 6.0f64.sqrt();
        assert!((mu_max(Complex64::from_polar(1.0, PI / 6.0)).unwrap() - s6).abs() < 1e-14);
        assert!((mu_max(Complex64::new(1.0, 0.0)).unwrap() - 1.5 * SQRT_2).abs() < 1e-14);
        assert!(mu(Complex64::new(2.0, 0.0), 1, 2).is_err());
    }

    #[test]
    fn basis_sets() {
        let b = |arg: f64| unipotent_basis(Complex64::from_polar(1.0, arg)).unwrap().pairs;
        assert_eq!(b(PI / 6.0), [(1, 3)]);
        assert_eq!(b(-PI / 6.0), [(1, 2)]);
        assert_eq!(b(0.0), [(1, 2), (1, 3)]);
        assert_eq!(b(PI / 3.0), [(1, 3), (2, 3)]);
    }

    #[test]
    fn coset_examples() {
        let basis = unipotent_basis(Complex64::from_polar(1.0, PI / 6.0)).unwrap();
        let p1 = Mat3([[1.0, 2.0, 0.0], [0.0, 1.0, 0.0], [3.0, 0.0, 1.0]]);
        assert_eq!(coset_residual(&p1, &p1, &basis).unwrap(), 0.0);
        let in_coset = p1 * (Mat3::IDENTITY + Mat3::unit(0, 2).scale(5.0));
        assert!(coset_residual(&p1, &in_coset, &basis).unwrap() < 1e-12);
        let off = p1 * (Mat3::IDENTITY + Mat3::unit(1, 0));
        assert!(coset_residual(&p1, &off, &basis).unwrap() > 0.5);
    }

    #[test]
    fn classify_examples() {
        let h = Mat3::diag([4.0, 1.0, 0.25]);
        let e = |i: usize| {
            let mut c = [0.0; 3];
            c[i] = 1.0;
            ProjPoint::new(c).unwrap()
        };
        let s13 = ProjSegment::new(e(0), e(2)).unwrap();
        let s12 = ProjSegment::new(e(0), e(1)).unwrap();
        assert_eq!(classify_projective(&h, &s13).unwrap(), ProjClass::Principal);
        assert_eq!(classify_projective(&h, &s12).unwrap(), ProjClass::NonPrincipalHyperbolic);
        let parabolic = Mat3::IDENTITY + Mat3::unit(0, 1);
        assert_eq!(classify_projective(&parabolic, &s12).unwrap(), ProjClass::NonHyperbolic);
    }
}
