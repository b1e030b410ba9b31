//! Sector limits of the osculation map across and away from unstable
//! directions.

use alloc::format;
use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;
use num_traits::Float;

use super::{FlatChartField, MonomialChart};
use crate::connection::osculation;
use crate::differentials::MeromorphicKDifferential;
use crate::error::{Error, Result};
use crate::field::ConformalField;
use crate::linalg::Mat3;
use crate::projective::{coset_residual, unipotent_basis};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StokesConfig {
    /// Half-angle between the two rays compared across an unstable direction.
    pub unstable_side: f64,
    pub unstable_flat_time: f64,
    /// Half-angle between the two rays compared inside one sector.
    pub sector_side: f64,
    pub sector_flat_time: f64,
    pub step: f64,
}

impl Default for StokesConfig {
    fn default() -> Self {
        StokesConfig {
            unstable_side: PI / 12.0,
            unstable_flat_time: 30.0,
            sector_side: PI / 24.0,
            sector_flat_time: 70.0,
            step: 1e-2,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StokesResult {
    /// Argument of the direction in the flat chart.
    pub angle: f64,
    pub unstable: bool,
    /// Coset residual for unstable directions, `‖P₁⁻¹P₂ − I‖` otherwise.
    pub residual: f64,
    pub p1: Mat3,
    pub p2: Mat3,
}

/// Flat-chart arguments `π/6 + jπ/3` of the unstable directions (`v³ = ±i`)
/// around the zero of `a zᵐ dz³`, covering its cone angle `2π(m+3)/3`.
pub fn unstable_directions(phi: &MeromorphicKDifferential) -> Result<Vec<f64>> {
    let chart = MonomialChart::new(phi, 0.0)?;
    let count = (6.0 * chart.p).round() as usize;
    Ok((0..count).map(|j| PI / 6.0 + j as f64 * PI / 3.0).collect())
}

/// Compares the osculation maps at large flat time along two rays from
/// `ζ₀ = e^{iθ}` on either side of the direction `e^{iθ}` in the flat chart of
/// a monomial differential. `field` is given in the original chart.
pub fn stokes_check(
    field: &dyn ConformalField,
    phi: &MeromorphicKDifferential,
    angle: f64,
    cfg: &StokesConfig,
) -> Result<StokesResult> {
    let chart = MonomialChart::new(phi, angle)?;
    let flat = FlatChartField { inner: field, chart };
    let v = Complex64::from_polar(1.0, angle);
    let unstable = (3.0 * angle).cos().abs() < 1e-9;
    let (side, time) = if unstable {
        (cfg.unstable_side, cfg.unstable_flat_time)
    } else {
        (cfg.sector_side, cfg.sector_flat_time)
    };
    let end = |s: f64| v + Complex64::from_polar(time, angle + s);
    let p1 = osculation(&flat, v, end(-side), cfg.step)?.matrix;
    let p2 = osculation(&flat, v, end(side), cfg.step)?.matrix;
    let residual = if unstable {
        coset_residual(&p1, &p2, &unipotent_basis(v)?)?
    } else {
        let inv = p1.inverse().ok_or_else(|| Error::Certification(format!("singular sector limit at {angle}")))?;
        (inv * p2 - Mat3::IDENTITY).max_abs()
    };
    Ok(StokesResult { angle, unstable, residual, p1, p2 })
}
