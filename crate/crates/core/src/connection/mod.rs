//! The affine sphere connection `D = d + A` built from `(u, φ)`, and its
//! parallel transport.
//!
//! The real frame is `(e^{−u/2}∂ₓ, e^{−u/2}∂ᵧ, 1̄)`, which makes `A` trace-free.
//! The Ţiţeica frame is the constant change of basis `B` that diagonalizes the
//! connection of `u = 0, φ = dz³`.

mod transport;

pub use transport::{
    loop_holonomy, osculation, osculation_rhs, parallel_transport, rk4_step, titeica_transport, Path,
    TransportResult,
};

use core::f64::consts::{FRAC_1_SQRT_2, PI, SQRT_2};

use num_complex::Complex64;
use num_traits::Float;

use crate::differentials::MeromorphicKDifferential;
use crate::error::{Error, Result};
use crate::field::FieldSample;
use crate::linalg::{CMat3, Mat3};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Frame {
    Real,
    Titeica,
}

/// `A(∂ₓ)` and `A(∂ᵧ)` in a declared frame.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConnectionSample {
    pub ax: Mat3,
    pub ay: Mat3,
    pub frame: Frame,
}

impl ConnectionSample {
    /// `A(v)` for the tangent vector `v = vₓ + i vᵧ`.
    pub fn along(&self, v: Complex64) -> Mat3 {
        self.ax.scale(v.re) + self.ay.scale(v.im)
    }
}

/// The cube roots of unity `(1, ω², ω)` labelling the Ţiţeica frame.
pub fn titeica_weights() -> [Complex64; 3] {
    [
        Complex64::new(1.0, 0.0),
        Complex64::from_polar(1.0, -2.0 * PI / 3.0),
        Complex64::from_polar(1.0, 2.0 * PI / 3.0),
    ]
}

/// Columns `(√2 cos θ, √2 sin θ, 1)` for `θ = 0, 2π/3, −2π/3`: the Ţiţeica
/// frame expressed in the real frame.
pub fn titeica_basis() -> Mat3 {
    let col = |t: f64| [SQRT_2 * t.cos(), SQRT_2 * t.sin(), 1.0];
    Mat3::from_columns([col(0.0), col(2.0 * PI / 3.0), col(-2.0 * PI / 3.0)])
}

pub fn titeica_basis_inverse() -> Mat3 {
    // Rows are (√2 cos θ, √2 sin θ, 1)/3 because the columns are orthogonal
    // for the weights (1/2, 1/2, 1).
    let row = |t: f64| [SQRT_2 * t.cos() / 3.0, SQRT_2 * t.sin() / 3.0, 1.0 / 3.0];
    Mat3([row(0.0), row(2.0 * PI / 3.0), row(-2.0 * PI / 3.0)])
}

/// Connection matrix in the complex frame `(∂_z, ∂_z̄, 1̄)` (normalized by
/// `e^{−u/2}`) on the tangent vector with `dz = a`.
fn complex_matrix(s: &FieldSample, phi: Complex64, a: Complex64) -> CMat3 {
    let uz = s.dz();
    let ab = a.conj();
    let half = (uz * a - uz.conj() * ab) * 0.5;
    let em = (-s.u).exp() * FRAC_1_SQRT_2;
    let ep = (0.5 * s.u).exp();
    CMat3([
        [half, phi.conj() * ab * em, a * ep],
        [phi * a * em, -half, ab * ep],
        [ab * (0.5 * ep), a * (0.5 * ep), Complex64::new(0.0, 0.0)],
    ])
}

/// `complex_matrix(s, 1, a) − complex_matrix(0, 1, a)` without cancellation
/// when `u` is tiny.
fn complex_deviation(s: &FieldSample, a: Complex64) -> CMat3 {
    let uz = s.dz();
    let ab = a.conj();
    let half = (uz * a - uz.conj() * ab) * 0.5;
    let em = (-s.u).exp_m1() * FRAC_1_SQRT_2;
    let ep = (0.5 * s.u).exp_m1();
    CMat3([
        [half, ab * em, a * ep],
        [a * em, -half, ab * ep],
        [ab * (0.5 * ep), a * (0.5 * ep), Complex64::new(0.0, 0.0)],
    ])
}

fn realify(m: &CMat3) -> Mat3 {
    let i = Complex64::new(0.0, 1.0);
    let o = Complex64::new(0.0, 0.0);
    let l = Complex64::new(1.0, 0.0);
    let c = CMat3([[l, i, o], [l, -i, o], [o, o, l]]);
    let h = Complex64::new(0.5, 0.0);
    let ci = CMat3([[h, h, o], [-i * 0.5, i * 0.5, o], [o, o, l]]);
    (ci * *m * c).re()
}

/// Connection from pointwise values of `u`, its gradient and `φ(z)`, without
/// checking that the requested frame makes sense for `φ`.
pub fn connection_from_values(s: &FieldSample, phi: Complex64, frame: Frame) -> ConnectionSample {
    let ax = realify(&complex_matrix(s, phi, Complex64::new(1.0, 0.0)));
    let ay = realify(&complex_matrix(s, phi, Complex64::new(0.0, 1.0)));
    match frame {
        Frame::Real => ConnectionSample { ax, ay, frame },
        Frame::Titeica => {
            let (b, bi) = (titeica_basis(), titeica_basis_inverse());
            ConnectionSample { ax: bi * ax * b, ay: bi * ay * b, frame }
        }
    }
}

/// `A(w, dz³) − A(0, dz³)` in the Ţiţeica frame for a sample `w` of the
/// deviation in a chart where `φ = dz³`.
pub fn model_deviation(s: &FieldSample) -> ConnectionSample {
    let (b, bi) = (titeica_basis(), titeica_basis_inverse());
    let ax = realify(&complex_deviation(s, Complex64::new(1.0, 0.0)));
    let ay = realify(&complex_deviation(s, Complex64::new(0.0, 1.0)));
    ConnectionSample { ax: bi * ax * b, ay: bi * ay * b, frame: Frame::Titeica }
}

/// Connection of `(u, φ)` at `z`. The Ţiţeica frame is only defined when
/// `φ = dz³`.
pub fn connection_at(
    phi: &MeromorphicKDifferential,
    z: Complex64,
    s: &FieldSample,
    frame: Frame,
) -> Result<ConnectionSample> {
    if phi.k() != 3 {
        return Err(Error::Frame("the affine sphere connection needs a cubic differential".into()));
    }
    if frame == Frame::Titeica && !phi.is_model() {
        return Err(Error::Frame("the Ţiţeica frame needs φ = dz³".into()));
    }
    Ok(connection_from_values(s, phi.eval(z), frame))
}
