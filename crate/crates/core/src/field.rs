//! Pointwise access to a conformal factor `u` and its gradient, backed by
//! closed forms, grid solves or radial solves.

use num_complex::Complex64;
use num_traits::Float;

use crate::differentials::MeromorphicKDifferential;
use crate::error::{Error, Result};
use crate::vortex::{flat_log_density, flat_log_gradient, NodeKind, RadialField, ScalarField};

/// A value with its Cartesian gradient.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct FieldSample {
    pub u: f64,
    pub ux: f64,
    pub uy: f64,
}

impl FieldSample {
    pub const ZERO: FieldSample = FieldSample { u: 0.0, ux: 0.0, uy: 0.0 };

    /// `∂_z u = (u_x − i u_y)/2`.
    pub fn dz(&self) -> Complex64 {
        Complex64::new(self.ux, -self.uy) * 0.5
    }
}

/// A conformal factor `u` with `g = e^u |dz|²`.
///
/// `deviation` returns `w = u − u_flat` and its gradient. Implementations that
/// store `w` directly return it without cancellation.
pub trait ConformalField: Send + Sync {
    fn sample(&self, z: Complex64) -> Result<FieldSample>;
    fn deviation(&self, z: Complex64) -> Result<FieldSample>;
}

fn flat_sample(phi: &MeromorphicKDifferential, z: Complex64) -> Result<FieldSample> {
    let u = flat_log_density(phi, z);
    if !u.is_finite() {
        return Err(Error::SingularityHit { z });
    }
    let (ux, uy) = flat_log_gradient(phi, z);
    Ok(FieldSample { u, ux, uy })
}

fn subtract_flat(phi: &MeromorphicKDifferential, z: Complex64, s: FieldSample) -> Result<FieldSample> {
    let f = flat_sample(phi, z)?;
    Ok(FieldSample { u: s.u - f.u, ux: s.ux - f.ux, uy: s.uy - f.uy })
}

/// The flat metric `|φ|^{2/k}` itself.
#[derive(Clone, Debug)]
pub struct FlatField {
    pub phi: MeromorphicKDifferential,
}

impl FlatField {
    /// `u ≡ 0` for `φ = dz³`.
    pub fn model() -> FlatField {
        FlatField { phi: MeromorphicKDifferential::model() }
    }
}

impl ConformalField for FlatField {
    fn sample(&self, z: Complex64) -> Result<FieldSample> {
        flat_sample(&self.phi, z)
    }

    fn deviation(&self, z: Complex64) -> Result<FieldSample> {
        flat_sample(&self.phi, z).map(|_| FieldSample::ZERO)
    }
}

/// A field given by a closure, mostly for tests.
pub struct FnField<F> {
    pub phi: MeromorphicKDifferential,
    pub f: F,
}

impl<F: Fn(Complex64) -> FieldSample + Send + Sync> ConformalField for FnField<F> {
    fn sample(&self, z: Complex64) -> Result<FieldSample> {
        Ok((self.f)(z))
    }

    fn deviation(&self, z: Complex64) -> Result<FieldSample> {
        subtract_flat(&self.phi, z, (self.f)(z))
    }
}

/// Uses `inner` where it is defined and the flat metric elsewhere.
pub struct FlatExtension<F> {
    pub inner: F,
    pub phi: MeromorphicKDifferential,
}

impl<F: ConformalField> ConformalField for FlatExtension<F> {
    fn sample(&self, z: Complex64) -> Result<FieldSample> {
        match self.inner.sample(z) {
            Err(Error::DomainExit { .. }) => flat_sample(&self.phi, z),
            other => other,
        }
    }

    fn deviation(&self, z: Complex64) -> Result<FieldSample> {
        match self.inner.deviation(z) {
            Err(Error::DomainExit { .. }) => flat_sample(&self.phi, z).map(|_| FieldSample::ZERO),
            other => other,
        }
    }
}

/// Catmull-Rom bicubic interpolation of a grid solution.
#[derive(Clone, Debug)]
pub struct GridField {
    pub grid: ScalarField,
    pub phi: MeromorphicKDifferential,
}

fn catmull_rom(t: f64) -> ([f64; 4], [f64; 4]) {
    let (t2, t3) = (t * t, t * t * t);
    (
        [
            (-t3 + 2.0 * t2 - t) / 2.0,
            (3.0 * t3 - 5.0 * t2 + 2.0) / 2.0,
            (-3.0 * t3 + 4.0 * t2 + t) / 2.0,
            (t3 - t2) / 2.0,
        ],
        [
            (-3.0 * t2 + 4.0 * t - 1.0) / 2.0,
            (9.0 * t2 - 10.0 * t) / 2.0,
            (-9.0 * t2 + 8.0 * t + 1.0) / 2.0,
            (3.0 * t2 - 2.0 * t) / 2.0,
        ],
    )
}

impl ConformalField for GridField {
    fn sample(&self, z: Complex64) -> Result<FieldSample> {
        let g = &self.grid;
        let fx = (z.re - g.x0) / g.h;
        let fy = (z.im - g.y0) / g.h;
        let (i, j) = (fx.floor(), fy.floor());
        if !(i >= 1.0 && j >= 1.0 && i + 2.0 < g.nx as f64 && j + 2.0 < g.ny as f64) {
            return Err(Error::DomainExit { z });
        }
        let (i, j) = (i as usize, j as usize);
        // Only cells whose four corners are solved nodes count as inside.
        for (a, b) in [(i, j), (i + 1, j), (i, j + 1), (i + 1, j + 1)] {
            if g.kind(a, b) == NodeKind::Exterior {
                return Err(Error::DomainExit { z });
            }
        }
        let (wx, dwx) = catmull_rom(fx - i as f64);
        let (wy, dwy) = catmull_rom(fy - j as f64);
        let mut s = FieldSample::ZERO;
        for (b, (&vy, &dvy)) in wy.iter().zip(&dwy).enumerate() {
            for (a, (&vx, &dvx)) in wx.iter().zip(&dwx).enumerate() {
                let value = g.value(i + a - 1, j + b - 1);
                if !value.is_finite() {
                    return Err(Error::DomainExit { z });
                }
                s.u += vx * vy * value;
                s.ux += dvx * vy * value;
                s.uy += vx * dvy * value;
            }
        }
        s.ux /= g.h;
        s.uy /= g.h;
        Ok(s)
    }

    fn deviation(&self, z: Complex64) -> Result<FieldSample> {
        subtract_flat(&self.phi, z, self.sample(z)?)
    }
}

impl ConformalField for RadialField {
    fn sample(&self, z: Complex64) -> Result<FieldSample> {
        let r = z.norm();
        let (u, du) = self.u_at(r).ok_or(Error::DomainExit { z })?;
        if r == 0.0 {
            return Ok(FieldSample { u, ux: 0.0, uy: 0.0 });
        }
        Ok(FieldSample { u, ux: du * z.re / r, uy: du * z.im / r })
    }

    fn deviation(&self, z: Complex64) -> Result<FieldSample> {
        let r = z.norm();
        if r == 0.0 && self.profile.exponent != 0.0 {
            return Err(Error::SingularityHit { z });
        }
        let (w, dw) = self.w_at(r).ok_or(Error::DomainExit { z })?;
        if r == 0.0 {
            return Ok(FieldSample { u: w, ux: 0.0, uy: 0.0 });
        }
        Ok(FieldSample { u: w, ux: dw * z.re / r, uy: dw * z.im / r })
    }
}
