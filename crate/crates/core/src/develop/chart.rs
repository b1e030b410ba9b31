//! The flat coordinate `ζ` of a monomial cubic differential `a zᵐ dz³`, in
//! which `φ = dζ³`.

use alloc::format;
use core::f64::consts::PI;

use num_complex::Complex64;
use num_traits::Float;

use crate::differentials::MeromorphicKDifferential;
use crate::error::{Error, Result};
use crate::field::{ConformalField, FieldSample};

/// `ζ = c·z^p` with `p = (m+3)/3` and `c = a^{1/3}/p`, restricted to the sheet
/// where `arg ζ` lies within `π` of `center_arg`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MonomialChart {
    pub p: f64,
    pub c: Complex64,
    pub a_cbrt: Complex64,
    pub center_arg: f64,
}

impl MonomialChart {
    pub fn new(phi: &MeromorphicKDifferential, center_arg: f64) -> Result<MonomialChart> {
        let (m, a) = phi
            .as_monomial()
            .filter(|_| phi.k() == 3)
            .ok_or_else(|| Error::Precondition("flat chart needs a monomial cubic differential".into()))?;
        if m <= -3 {
            return Err(Error::Precondition(format!("no power-law flat chart for exponent {m}")));
        }
        let p = (m + 3) as f64 / 3.0;
        let a_cbrt = a.powf(1.0 / 3.0);
        Ok(MonomialChart { p, c: a_cbrt / p, a_cbrt, center_arg })
    }

    /// `log z` on the chosen sheet.
    pub fn log_z(&self, zeta: Complex64) -> Complex64 {
        let mut theta = zeta.arg();
        theta += 2.0 * PI * ((self.center_arg - theta) / (2.0 * PI)).round();
        Complex64::new((zeta.norm() / self.c.norm()).ln(), theta - self.c.arg()) / self.p
    }

    pub fn from_flat(&self, zeta: Complex64) -> Complex64 {
        self.log_z(zeta).exp()
    }

    /// `dz/dζ = 1 / (a^{1/3} z^{m/3})` on the sheet.
    pub fn dz_dzeta(&self, zeta: Complex64) -> Complex64 {
        let l = self.log_z(zeta);
        (self.a_cbrt * ((self.p - 1.0) * l).exp()).inv()
    }
}

/// A field in original coordinates viewed in a flat chart. Since `u_flat = 0`
/// there, the sample and the deviation coincide.
pub struct FlatChartField<'a> {
    pub inner: &'a dyn ConformalField,
    pub chart: MonomialChart,
}

impl ConformalField for FlatChartField<'_> {
    fn sample(&self, zeta: Complex64) -> Result<FieldSample> {
        self.deviation(zeta)
    }

    fn deviation(&self, zeta: Complex64) -> Result<FieldSample> {
        let z = self.chart.from_flat(zeta);
        let w = self.inner.deviation(z)?;
        // 2∂_ζ w = 2∂_z w · dz/dζ
        let g = Complex64::new(w.ux, -w.uy) * self.chart.dz_dzeta(zeta);
        Ok(FieldSample { u: w.u, ux: g.re, uy: -g.im })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_on_sheets() {
        let phi = MeromorphicKDifferential::monomial(3, Complex64::new(2.0, 1.0), 1);
        for center in [0.3, 2.0, 4.0, 7.5] {
            let chart = MonomialChart::new(&phi, center).unwrap();
            let zeta = Complex64::from_polar(1.7, center + 0.2);
            let z = chart.from_flat(zeta);
            // ζ(z) = c z^p on the same branch
            let back = chart.c * (chart.log_z(zeta) * chart.p).exp();
            assert!((back - zeta).norm() < 1e-13);
            // φ(z) (dz/dζ)³ = 1
            let one = phi.eval(z) * chart.dz_dzeta(zeta).powi(3);
            assert!((one - Complex64::new(1.0, 0.0)).norm() < 1e-12);
        }
    }
}
