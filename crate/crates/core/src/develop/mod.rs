//! Developing maps `δ(z) = T(z₀, z)·1̄`, their limits along rays, and the
//! boundary data extracted from those limits.

mod chart;
mod cylinder;
mod polygon;
mod stokes;

pub use chart::{FlatChartField, MonomialChart};
pub use cylinder::{cylinder_holonomy, expected_log_eigenvalues, BoundaryHolonomy, CylinderConfig};
pub use polygon::{
    assemble_polygon, check_edges, edge_limit, edge_metric_check, extract_polygon, vertex_directions, vertex_limit, EdgeMetric,
    EdgeSample, PolygonConfig, PolygonResult, RayStatus,
};
pub use stokes::{stokes_check, unstable_directions, StokesConfig, StokesResult};

use core::f64::consts::SQRT_2;

use num_complex::Complex64;
use num_traits::Float;

use crate::connection::{connection_at, parallel_transport, rk4_step, titeica_weights, Frame, Path};
use crate::differentials::MeromorphicKDifferential;
use crate::error::{Error, Result};
use crate::field::ConformalField;
use crate::linalg::{norm, Mat3, Vec3};
use crate::projective::ProjPoint;

/// What a developing-map computation needs: the field, the differential, the
/// frame and the base point `z₀` with `δ(z₀) = 1̄`.
#[derive(Clone, Copy)]
pub struct DevelopContext<'a> {
    pub field: &'a dyn ConformalField,
    pub phi: &'a MeromorphicKDifferential,
    pub frame: Frame,
    pub base: Complex64,
}

impl<'a> DevelopContext<'a> {
    /// Uses the Ţiţeica frame for `φ = dz³` and the real frame otherwise.
    pub fn new(field: &'a dyn ConformalField, phi: &'a MeromorphicKDifferential, base: Complex64) -> Self {
        let frame = if phi.is_model() { Frame::Titeica } else { Frame::Real };
        DevelopContext { field, phi, frame, base }
    }
}

/// Coordinates of the section `1̄` in the given frame.
pub fn one_bar(frame: Frame) -> Vec3 {
    match frame {
        Frame::Real => [0.0, 0.0, 1.0],
        Frame::Titeica => [1.0 / 3.0; 3],
    }
}

/// Closed-form developing map of `u = 0, φ = dz³` with base point 0:
/// `[e^{√2 Re z} : e^{√2 Re ω²z} : e^{√2 Re ωz}]`.
pub fn titeica_develop(z: Complex64) -> ProjPoint {
    let c = titeica_weights();
    let e: [f64; 3] = core::array::from_fn(|i| SQRT_2 * (c[i] * z).re);
    let top = e.iter().fold(f64::NEG_INFINITY, |m, &x| m.max(x));
    ProjPoint::new(core::array::from_fn(|i| (e[i] - top).exp())).expect("one coordinate equals 1")
}

/// `δ(z)` with base point `z₀`, transporting along the straight segment.
pub fn develop_point(
    field: &dyn ConformalField,
    phi: &MeromorphicKDifferential,
    frame: Frame,
    base: Complex64,
    z: Complex64,
    step: f64,
) -> Result<ProjPoint> {
    if z == base {
        return ProjPoint::new(one_bar(frame));
    }
    let t = parallel_transport(&Path::Segment { from: z, to: base }, field, phi, frame, step)?;
    ProjPoint::new(t.matrix.mul_vec(one_bar(frame)))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RayConfig {
    /// Target size of `‖A(γ̇)‖·dt` per RK4 step.
    pub step: f64,
    /// Pairwise projective tolerance (sine of angle) over the window.
    pub tol: f64,
    pub window: usize,
    /// Flat-time spacing of the window samples.
    pub spacing: f64,
    pub max_flat_time: f64,
}

impl Default for RayConfig {
    fn default() -> Self {
        RayConfig { step: 1e-2, tol: 1e-10, window: 5, spacing: 1.0, max_flat_time: 60.0 }
    }
}

/// Limit of the developing map along a ray.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RayLimit {
    pub point: ProjPoint,
    /// Unit vector positively proportional to the transported `1̄`.
    pub representative: Vec3,
    pub flat_time: f64,
    /// Largest pairwise sine over the final window.
    pub achieved: f64,
    pub end: Complex64,
}

/// Chart velocity of a ray at `z`, given the velocity at the previous step
/// (used for branch continuation).
pub type Velocity<'a> = dyn Fn(Complex64, Complex64) -> Result<Complex64> + 'a;

fn flat_speed(phi: &MeromorphicKDifferential, z: Complex64, v: Complex64) -> f64 {
    phi.eval(z).norm().cbrt() * v.norm()
}

fn unit(v: Vec3) -> Vec3 {
    let n = norm(v);
    [v[0] / n, v[1] / n, v[2] / n]
}

/// Integrates `ż = velocity(z)`, `Ṁ = M·A(ż)` from `(start, m)` for the given
/// flat time, and returns the end state.
#[allow(clippy::too_many_arguments)]
pub fn flow(
    field: &dyn ConformalField,
    phi: &MeromorphicKDifferential,
    frame: Frame,
    start: Complex64,
    m: Mat3,
    velocity: &Velocity,
    flat_time: f64,
    step: f64,
) -> Result<(Complex64, Mat3)> {
    let mut state = RayState::new(field, phi, frame, start, m, velocity)?;
    while state.flat_time < flat_time {
        state.advance(step, Some(flat_time))?;
    }
    Ok((state.z, state.m))
}

struct RayState<'a> {
    field: &'a dyn ConformalField,
    phi: &'a MeromorphicKDifferential,
    frame: Frame,
    velocity: &'a Velocity<'a>,
    z: Complex64,
    m: Mat3,
    v: Complex64,
    flat_time: f64,
}

impl<'a> RayState<'a> {
    fn new(
        field: &'a dyn ConformalField,
        phi: &'a MeromorphicKDifferential,
        frame: Frame,
        start: Complex64,
        m: Mat3,
        velocity: &'a Velocity<'a>,
    ) -> Result<Self> {
        let v = velocity(start, Complex64::new(0.0, 0.0))?;
        Ok(RayState { field, phi, frame, velocity, z: start, m, v, flat_time: 0.0 })
    }

    fn conn(&self, z: Complex64, v: Complex64) -> Result<Mat3> {
        Ok(connection_at(self.phi, z, &self.field.sample(z)?, self.frame)?.along(v))
    }

    /// One RK4 step of size `step / max(‖A(ż)‖, flat speed)`, shortened so the
    /// flat time does not pass `stop`.
    fn advance(&mut self, step: f64, stop: Option<f64>) -> Result<()> {
        let a = self.conn(self.z, self.v)?;
        let speed0 = flat_speed(self.phi, self.z, self.v);
        let mut dt = step / a.max_abs().max(speed0).max(1e-300);
        if let (Some(stop), true) = (stop, speed0 > 0.0) {
            dt = dt.min((stop - self.flat_time) / speed0).max(dt * 1e-6);
        }
        let v_ref = self.v;
        let rhs = |_t: f64, z: Complex64, m: &Mat3| -> Result<(Complex64, Mat3)> {
            let v = (self.velocity)(z, v_ref)?;
            Ok((v, *m * self.conn(z, v)?))
        };
        let (z, mut m) = rk4_step(0.0, self.z, &self.m, dt, rhs)?;
        // Only the projective class and the frame-independent limit matter on
        // rays, so rescale before entries overflow.
        let size = m.max_abs();
        if size > 1e100 {
            m = m.scale(1.0 / size);
        }
        let v = (self.velocity)(z, v_ref)?;
        self.flat_time += 0.5 * (speed0 + flat_speed(self.phi, z, v)) * dt;
        self.z = z;
        self.m = m;
        self.v = v;
        Ok(())
    }
}

/// Limit of `δ = M·1̄` along the ray `ż = velocity(z)` from `start`, where
/// `initial = T(z₀, start)`. Converged once `window` samples spaced by
/// `spacing` in flat time are pairwise within `tol`.
#[allow(clippy::too_many_arguments)]
pub fn ray_limit(
    field: &dyn ConformalField,
    phi: &MeromorphicKDifferential,
    frame: Frame,
    start: Complex64,
    initial: Mat3,
    velocity: &Velocity,
    cfg: &RayConfig,
) -> Result<RayLimit> {
    if cfg.window < 2 || !(cfg.tol > 0.0 && cfg.step > 0.0 && cfg.spacing > 0.0) {
        return Err(Error::Domain("ray configuration needs window ≥ 2 and positive tolerances".into()));
    }
    let bar = one_bar(frame);
    let mut state = RayState::new(field, phi, frame, start, initial, velocity)?;
    let mut samples: alloc::vec::Vec<Vec3> = alloc::vec::Vec::new();
    let mut next = 0.0;
    loop {
        if state.flat_time >= next {
            samples.push(unit(state.m.mul_vec(bar)));
            next += cfg.spacing;
            if samples.len() >= cfg.window {
                let w = &samples[samples.len() - cfg.window..];
                let mut worst: f64 = 0.0;
                for i in 0..w.len() {
                    for j in i + 1..w.len() {
                        worst = worst.max(norm(crate::linalg::cross(w[i], w[j])));
                    }
                }
                if worst <= cfg.tol {
                    let rep = w[w.len() - 1];
                    return Ok(RayLimit {
                        point: ProjPoint::new(rep)?,
                        representative: rep,
                        flat_time: state.flat_time,
                        achieved: worst,
                        end: state.z,
                    });
                }
            }
        }
        if state.flat_time > cfg.max_flat_time {
            let n = samples.len();
            let last = if n >= 2 { [samples[n - 2], samples[n - 1]] } else { [samples[n - 1]; 2] };
            return Err(Error::LimitNotReached { flat_time: state.flat_time, last });
        }
        state.advance(cfg.step, None)?;
    }
}

/// Straight chart ray `z = start + t·e^{iθ}`.
pub fn straight(angle: f64) -> impl Fn(Complex64, Complex64) -> Result<Complex64> {
    let d = Complex64::from_polar(1.0, angle);
    move |_, _| Ok(d)
}
