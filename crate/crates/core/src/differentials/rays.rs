//! Flat geodesics of `|φ|^{2/k}` along which `φ(γ̇)` is a fixed unit constant.

use alloc::format;
use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;

use num_traits::{Euclid, Float};

use super::MeromorphicKDifferential;
use crate::error::{Error, Result};

/// Relative size of `|φ|` below which a trace is aborted.
pub const ZERO_GUARD: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RayState {
    pub position: Complex64,
    /// Unit flat direction `v` with `v^k = c`.
    pub direction: Complex64,
    /// Current branch of `(c/φ)^{1/k}`, i.e. the chart velocity.
    pub velocity: Complex64,
    pub flat_time: f64,
}

/// Chart velocity `(c/φ(z))^{1/k}` on the branch nearest `reference`.
pub fn geodesic_velocity(
    phi: &MeromorphicKDifferential,
    z: Complex64,
    c: Complex64,
    reference: Complex64,
) -> Result<Complex64> {
    let value = phi.eval(z);
    if value.norm() < ZERO_GUARD * phi.local_scale(z) || value.norm() == 0.0 {
        return Err(Error::SingularityHit { z });
    }
    let k = phi.k() as f64;
    let base = (c / value).powf(1.0 / k);
    let step = Complex64::from_polar(1.0, 2.0 * PI / k);
    let mut best = base;
    let mut root = base;
    for _ in 1..phi.k() {
        root *= step;
        if (root - reference).norm() < (best - reference).norm() {
            best = root;
        }
    }
    Ok(best)
}

/// Integrates `dz/dt = (c/φ(z))^{1/k}` by RK4 with branch continuation.
/// `direction_hint` picks the initial branch (nearest root).
pub fn trace_geodesic_ray(
    phi: &MeromorphicKDifferential,
    start: Complex64,
    c: Complex64,
    direction_hint: Complex64,
    duration: f64,
    step: f64,
) -> Result<Vec<RayState>> {
    if (c.norm() - 1.0).abs() > 1e-12 {
        return Err(Error::Domain(format!("target value {c} is not unimodular")));
    }
    if !(step > 0.0 && duration >= 0.0) {
        return Err(Error::Domain("step and duration must be positive".into()));
    }
    let k = phi.k() as f64;
    let direction = c.powf(1.0 / k);
    let steps = (duration / step).ceil().max(1.0) as usize;
    let h = duration / steps as f64;
    let mut z = start;
    let mut v = geodesic_velocity(phi, z, c, direction_hint)?;
    let mut out = Vec::with_capacity(steps + 1);
    out.push(RayState { position: z, direction, velocity: v, flat_time: 0.0 });
    for i in 0..steps {
        let k1 = geodesic_velocity(phi, z, c, v)?;
        check_step(phi, z, h * k1.norm())?;
        let k2 = geodesic_velocity(phi, z + k1 * (h / 2.0), c, k1)?;
        let k3 = geodesic_velocity(phi, z + k2 * (h / 2.0), c, k2)?;
        let k4 = geodesic_velocity(phi, z + k3 * h, c, k3)?;
        z += (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0);
        v = geodesic_velocity(phi, z, c, k4)?;
        out.push(RayState { position: z, direction, velocity: v, flat_time: (i + 1) as f64 * h });
    }
    Ok(out)
}

/// Refuses steps longer than half the Newton estimate `|φ/φ'|` of the
/// distance to the nearest zero.
pub(crate) fn check_step(phi: &MeromorphicKDifferential, z: Complex64, length: f64) -> Result<()> {
    let slope = phi.eval_derivative(z).norm();
    if slope > 0.0 && length > 0.5 * phi.eval(z).norm() / slope {
        return Err(Error::SingularityHit { z });
    }
    Ok(())
}

/// Asymptotic angles of negative rays at `∞` for a polynomial cubic
/// differential of degree `m`: the solutions of `(m+3)θ + arg aₘ ≡ π`.
pub fn negative_directions_at_infinity(phi: &MeromorphicKDifferential) -> Result<Vec<f64>> {
    if phi.k() != 3 || !phi.is_polynomial() {
        return Err(Error::Precondition("expected a polynomial cubic differential".into()));
    }
    let m = phi.max_exponent().ok_or(Error::UndefinedOrder)?;
    let lead = phi.coeffs()[&m];
    let count = m + 3;
    let mut angles: Vec<f64> = (0..count)
        .map(|j| Euclid::rem_euclid(&((PI - lead.arg() + 2.0 * PI * j as f64) / count as f64), &(2.0 * PI)))
        .collect();
    angles.sort_by(|a, b| a.partial_cmp(b).unwrap_or(core::cmp::Ordering::Equal));
    Ok(angles)
}
