//! Classical RK4 integration of parallel transport along paths.

use alloc::format;
use alloc::vec::Vec;
use core::f64::consts::{PI, SQRT_2};

use num_complex::Complex64;
use num_traits::Float;

use super::{connection_at, model_deviation, titeica_weights, Frame};
use crate::differentials::MeromorphicKDifferential;
use crate::error::{Error, Result};
use crate::field::ConformalField;
use crate::linalg::Mat3;

/// A piecewise smooth path in the chart.
#[derive(Clone, Debug, PartialEq)]
pub enum Path {
    Segment { from: Complex64, to: Complex64 },
    Polyline(Vec<Complex64>),
    /// `center + radius·e^{i(start + t)}` for `t` from 0 to `sweep`; a negative
    /// sweep runs clockwise.
    Arc { center: Complex64, radius: f64, start: f64, sweep: f64 },
}

#[derive(Clone, Copy, Debug)]
enum Piece {
    Line(Complex64, Complex64),
    Arc { center: Complex64, radius: f64, start: f64, sweep: f64 },
}

impl Piece {
    fn position(&self, s: f64) -> Complex64 {
        match *self {
            Piece::Line(a, b) => a + (b - a) * s,
            Piece::Arc { center, radius, start, sweep } => center + Complex64::from_polar(radius, start + sweep * s),
        }
    }

    fn velocity(&self, s: f64) -> Complex64 {
        match *self {
            Piece::Line(a, b) => b - a,
            Piece::Arc { radius, start, sweep, .. } => {
                Complex64::new(0.0, 1.0) * Complex64::from_polar(radius * sweep, start + sweep * s)
            }
        }
    }

    fn length(&self) -> f64 {
        match *self {
            Piece::Line(a, b) => (b - a).norm(),
            Piece::Arc { radius, sweep, .. } => (radius * sweep).abs(),
        }
    }
}

impl Path {
    fn pieces(&self) -> Vec<Piece> {
        match self {
            Path::Segment { from, to } => alloc::vec![Piece::Line(*from, *to)],
            Path::Polyline(p) => p.windows(2).map(|w| Piece::Line(w[0], w[1])).collect(),
            Path::Arc { center, radius, start, sweep } => {
                alloc::vec![Piece::Arc { center: *center, radius: *radius, start: *start, sweep: *sweep }]
            }
        }
    }

    pub fn start(&self) -> Complex64 {
        self.pieces()[0].position(0.0)
    }

    pub fn end(&self) -> Complex64 {
        self.pieces().last().map(|p| p.position(1.0)).unwrap_or_else(|| self.start())
    }

    pub fn reversed(&self) -> Path {
        match self {
            Path::Segment { from, to } => Path::Segment { from: *to, to: *from },
            Path::Polyline(p) => Path::Polyline(p.iter().rev().copied().collect()),
            Path::Arc { center, radius, start, sweep } => {
                Path::Arc { center: *center, radius: *radius, start: start + sweep, sweep: -sweep }
            }
        }
    }

    /// Full circle(s) around `center` starting at angle 0; `turns < 0` is
    /// clockwise.
    pub fn circle(center: Complex64, radius: f64, turns: f64) -> Path {
        Path::Arc { center, radius, start: 0.0, sweep: 2.0 * PI * turns }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TransportResult {
    /// `T(end, start)`, carrying the fibre at the start to the fibre at the end.
    pub matrix: Mat3,
    pub frame: Frame,
    pub start: Complex64,
    pub end: Complex64,
    pub steps: usize,
    /// Richardson estimate `‖T_h − T_{h/2}‖/15` plus the floating point
    /// resolution of the determinant, `8ε‖T‖³`.
    pub error_estimate: f64,
}

/// One classical RK4 step for the joint system `(ż, Ṁ) = f(t, z, M)`.
pub fn rk4_step<F>(t: f64, z: Complex64, m: &Mat3, dt: f64, f: F) -> Result<(Complex64, Mat3)>
where
    F: Fn(f64, Complex64, &Mat3) -> Result<(Complex64, Mat3)>,
{
    let (z1, m1) = f(t, z, m)?;
    let (z2, m2) = f(t + dt / 2.0, z + z1 * (dt / 2.0), &(*m + m1.scale(dt / 2.0)))?;
    let (z3, m3) = f(t + dt / 2.0, z + z2 * (dt / 2.0), &(*m + m2.scale(dt / 2.0)))?;
    let (z4, m4) = f(t + dt, z + z3 * dt, &(*m + m3.scale(dt)))?;
    let zn = z + (z1 + z2 * 2.0 + z3 * 2.0 + z4) * (dt / 6.0);
    let mn = *m + (m1 + m2.scale(2.0) + m3.scale(2.0) + m4).scale(dt / 6.0);
    Ok((zn, mn))
}

/// Divides by `det^{1/3}` when the determinant is resolvable in floating
/// point, i.e. `‖M‖³` is moderate.
pub(crate) fn renormalize(m: &mut Mat3) {
    let size = m.max_abs();
    if size.powi(3) > 1e6 {
        return;
    }
    let d = m.det();
    if d > 0.0 && d.is_finite() {
        *m = m.scale(1.0 / d.cbrt());
    }
}

fn det_floor(m: &Mat3) -> f64 {
    8.0 * f64::EPSILON * m.max_abs().powi(3).max(1.0)
}

/// `A(v)` at `z` for a field, differential and frame.
fn connection_fn<'a>(
    field: &'a dyn ConformalField,
    phi: &'a MeromorphicKDifferential,
    frame: Frame,
) -> impl Fn(Complex64, Complex64) -> Result<Mat3> + 'a {
    move |z, v| {
        let s = field.sample(z)?;
        Ok(connection_at(phi, z, &s, frame)?.along(v))
    }
}

fn integrate_pieces(
    pieces: &[Piece],
    counts: &[usize],
    conn: &dyn Fn(Complex64, Complex64) -> Result<Mat3>,
) -> Result<Mat3> {
    let mut n_mat = Mat3::IDENTITY;
    for (piece, &n) in pieces.iter().zip(counts) {
        let dt = 1.0 / n as f64;
        for step in 0..n {
            let t0 = step as f64 * dt;
            let rhs = |t: f64, _z: Complex64, m: &Mat3| -> Result<(Complex64, Mat3)> {
                let a = conn(piece.position(t), piece.velocity(t))?;
                Ok((Complex64::new(0.0, 0.0), -(a * *m)))
            };
            let (_, next) = rk4_step(t0, Complex64::new(0.0, 0.0), &n_mat, dt, rhs)?;
            n_mat = next;
            renormalize(&mut n_mat);
        }
    }
    Ok(n_mat)
}

/// Transport `T(end, start)` along `path`, solving `Ṅ = −A(γ̇)N` with RK4.
///
/// Each piece is split into `⌈max(length, ‖A(γ̇)‖)/h⌉` steps and integrated
/// once more at half the step for the error estimate.
pub fn parallel_transport(
    path: &Path,
    field: &dyn ConformalField,
    phi: &MeromorphicKDifferential,
    frame: Frame,
    h: f64,
) -> Result<TransportResult> {
    if !(h > 0.0) {
        return Err(Error::Domain(format!("step {h} must be positive")));
    }
    let pieces = path.pieces();
    if pieces.is_empty() {
        return Err(Error::Domain("path has no pieces".into()));
    }
    let conn = connection_fn(field, phi, frame);
    let mut counts = Vec::with_capacity(pieces.len());
    for piece in &pieces {
        let mut scale = piece.length();
        for i in 0..=16 {
            let s = i as f64 / 16.0;
            scale = scale.max(conn(piece.position(s), piece.velocity(s))?.max_abs());
        }
        counts.push(((scale / h).ceil() as usize).max(1));
    }
    let coarse = integrate_pieces(&pieces, &counts, &conn)?;
    let doubled: Vec<usize> = counts.iter().map(|n| 2 * n).collect();
    let fine = integrate_pieces(&pieces, &doubled, &conn)?;
    let error_estimate = (fine - coarse).max_abs() / 15.0 + det_floor(&fine);
    Ok(TransportResult {
        matrix: fine,
        frame,
        start: path.start(),
        end: path.end(),
        steps: doubled.iter().sum(),
        error_estimate,
    })
}

/// Holonomy of a closed path: the transport once around it.
pub fn loop_holonomy(
    path: &Path,
    field: &dyn ConformalField,
    phi: &MeromorphicKDifferential,
    frame: Frame,
    h: f64,
) -> Result<Mat3> {
    let gap = (path.end() - path.start()).norm();
    if gap > 1e-12 * (1.0 + path.start().norm()) {
        return Err(Error::Domain(format!("loop is not closed, endpoints differ by {gap}")));
    }
    Ok(parallel_transport(path, field, phi, frame, h)?.matrix)
}

/// Closed-form Ţiţeica transport `T₀(z₂, z₁) = diag(e^{√2 Re(cᵢ(z₁ − z₂))})`.
pub fn titeica_transport(z2: Complex64, z1: Complex64) -> Mat3 {
    let c = titeica_weights();
    let d = z1 - z2;
    Mat3::diag([
        (SQRT_2 * (c[0] * d).re).exp(),
        (SQRT_2 * (c[1] * d).re).exp(),
        (SQRT_2 * (c[2] * d).re).exp(),
    ])
}

/// `X` with `dP/dt = P·X` for the osculation map `P(z) = T(z₀, z)T₀(z, z₀)` in
/// a chart where `φ = dz³`, at `z` moving with velocity `v`.
///
/// `X = D Ξ(v) D⁻¹` where `Ξ = A − A₀` and `D = T₀(z₀, z)` is diagonal, so the
/// entries of `Ξ` are scaled by `e^{√2 Re((cᵢ − cⱼ)(z − z₀))}`.
pub fn osculation_rhs(field: &dyn ConformalField, z0: Complex64, z: Complex64, v: Complex64) -> Result<Mat3> {
    let mut x = model_deviation(&field.deviation(z)?).along(v);
    let c = titeica_weights();
    for i in 0..3 {
        for j in 0..3 {
            if i != j {
                x.0[i][j] *= (SQRT_2 * ((c[i] - c[j]) * (z - z0)).re).exp();
            }
        }
    }
    Ok(x)
}

/// Osculation map `P(z)` along the straight segment from `z₀`, for a field
/// given in a chart where `φ = dz³`. `P(z₀) = I`.
pub fn osculation(field: &dyn ConformalField, z0: Complex64, z: Complex64, h: f64) -> Result<TransportResult> {
    if !(h > 0.0) {
        return Err(Error::Domain(format!("step {h} must be positive")));
    }
    let d = z - z0;
    let run = |n: usize| -> Result<Mat3> {
        let mut p = Mat3::IDENTITY;
        let dt = 1.0 / n as f64;
        for step in 0..n {
            let rhs = |t: f64, _z: Complex64, m: &Mat3| -> Result<(Complex64, Mat3)> {
                Ok((Complex64::new(0.0, 0.0), *m * osculation_rhs(field, z0, z0 + d * t, d)?))
            };
            p = rk4_step(step as f64 * dt, Complex64::new(0.0, 0.0), &p, dt, rhs)?.1;
            renormalize(&mut p);
        }
        Ok(p)
    };
    if d == Complex64::new(0.0, 0.0) {
        return Ok(TransportResult {
            matrix: Mat3::IDENTITY,
            frame: Frame::Titeica,
            start: z0,
            end: z,
            steps: 0,
            error_estimate: 0.0,
        });
    }
    let n = ((d.norm() / h).ceil() as usize).max(1);
    let coarse = run(n)?;
    let fine = run(2 * n)?;
    Ok(TransportResult {
        matrix: fine,
        frame: Frame::Titeica,
        start: z0,
        end: z,
        steps: 2 * n,
        error_estimate: (fine - coarse).max_abs() / 15.0 + det_floor(&fine),
    })
}
