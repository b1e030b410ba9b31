//! Meromorphic k-differentials given by finite Laurent data.

mod normal_form;
mod rays;
pub mod series;

pub use normal_form::{normal_form, reexpand, NormalForm, NormalFormCase, DEFAULT_TRUNCATION};
pub use rays::{geodesic_velocity, negative_directions_at_infinity, trace_geodesic_ray, RayState};

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;

use num_traits::Float;

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Chart {
    /// The Riemann sphere minus the poles; `∞` is reached through `w = 1/z`.
    PlaneWithInfinity,
    /// A punctured disk around `0`; only the puncture at `0` is meaningful.
    PuncturedDisk,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Pole {
    Zero,
    Infinity,
}

/// `φ = (Σ aₙ zⁿ)·dz^k` with finitely many nonzero `aₙ`.
#[derive(Clone, Debug, PartialEq)]
pub struct MeromorphicKDifferential {
    k: u32,
    coeffs: BTreeMap<i32, Complex64>,
    chart: Chart,
}

impl MeromorphicKDifferential {
    pub fn new(k: u32, terms: impl IntoIterator<Item = (i32, Complex64)>, chart: Chart) -> Result<Self> {
        if k == 0 {
            return Err(Error::Domain("weight k must be positive".into()));
        }
        let mut coeffs = BTreeMap::new();
        for (n, a) in terms {
            if !(a.re.is_finite() && a.im.is_finite()) {
                return Err(Error::Domain(format!("non-finite coefficient at exponent {n}")));
            }
            *coeffs.entry(n).or_insert(Complex64::new(0.0, 0.0)) += a;
        }
        coeffs.retain(|_, a| *a != Complex64::new(0.0, 0.0));
        Ok(MeromorphicKDifferential { k, coeffs, chart })
    }

    /// `a·z^m·dz^k` on the plane.
    pub fn monomial(k: u32, a: Complex64, m: i32) -> Self {
        MeromorphicKDifferential::new(k, [(m, a)], Chart::PlaneWithInfinity).expect("k > 0")
    }

    /// The Ţiţeica model `dz³`.
    pub fn model() -> Self {
        MeromorphicKDifferential::monomial(3, Complex64::new(1.0, 0.0), 0)
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn chart(&self) -> Chart {
        self.chart
    }

    pub fn coeffs(&self) -> &BTreeMap<i32, Complex64> {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn min_exponent(&self) -> Option<i32> {
        self.coeffs.keys().next().copied()
    }

    pub fn max_exponent(&self) -> Option<i32> {
        self.coeffs.keys().next_back().copied()
    }

    pub fn is_polynomial(&self) -> bool {
        self.min_exponent().is_none_or(|n| n >= 0)
    }

    /// True for `dz³`, the only differential with a Ţiţeica frame.
    pub fn is_model(&self) -> bool {
        self.k == 3 && self.coeffs.len() == 1 && self.coeffs.get(&0) == Some(&Complex64::new(1.0, 0.0))
    }

    /// The single term `(m, a)` of a monomial differential.
    pub fn as_monomial(&self) -> Option<(i32, Complex64)> {
        if self.coeffs.len() == 1 {
            self.coeffs.iter().next().map(|(&n, &a)| (n, a))
        } else {
            None
        }
    }

    /// Coefficient function `Σ aₙ zⁿ`.
    pub fn eval(&self, z: Complex64) -> Complex64 {
        self.coeffs.iter().map(|(&n, &a)| a * z.powi(n)).sum()
    }

    /// Derivative of the coefficient function.
    pub fn eval_derivative(&self, z: Complex64) -> Complex64 {
        self.coeffs
            .iter()
            .filter(|(&n, _)| n != 0)
            .map(|(&n, &a)| a * z.powi(n - 1) * n as f64)
            .sum()
    }

    /// Sum of the term magnitudes `Σ |aₙ||z|ⁿ`, the local size of `φ`.
    pub fn local_scale(&self, z: Complex64) -> f64 {
        let r = z.norm();
        self.coeffs.iter().map(|(&n, a)| a.norm() * r.powi(n)).sum()
    }

    /// Local expansion `φ = w^d f(w) dw^k` at the pole, with `f(0) ≠ 0`,
    /// returned as `(d, f)` with `f` truncated to `n` terms.
    pub fn local_series(&self, pole: Pole, n: usize) -> Result<(i32, Vec<Complex64>)> {
        let (lo, hi) = match (self.min_exponent(), self.max_exponent()) {
            (Some(lo), Some(hi)) => (lo, hi),
            _ => return Err(Error::UndefinedOrder),
        };
        let mut f = alloc::vec![Complex64::new(0.0, 0.0); n];
        match pole {
            Pole::Zero => {
                for (&e, &a) in &self.coeffs {
                    let j = (e - lo) as usize;
                    if j < n {
                        f[j] = a;
                    }
                }
                Ok((lo, f))
            }
            Pole::Infinity => {
                if self.chart != Chart::PlaneWithInfinity {
                    return Err(Error::Precondition("the chart has no point at infinity".into()));
                }
                let sign = if self.k.is_multiple_of(2) { 1.0 } else { -1.0 };
                for (&e, &a) in &self.coeffs {
                    let j = (hi - e) as usize;
                    if j < n {
                        f[j] = a * sign;
                    }
                }
                Ok((-hi - 2 * self.k as i32, f))
            }
        }
    }

    /// Pole order (negative degree) at the given point.
    pub fn pole_order(&self, pole: Pole) -> Result<i32> {
        Ok(-self.local_series(pole, 1)?.0)
    }
}

/// `m + 2k` for top degree `m`, from the chart change `w = 1/z`.
pub fn pole_order_at_infinity(phi: &MeromorphicKDifferential) -> Result<i32> {
    if phi.chart() != Chart::PlaneWithInfinity {
        return Err(Error::Precondition("the chart has no point at infinity".into()));
    }
    phi.pole_order(Pole::Infinity)
}

/// Coefficient `R` of the normal form `R·w^{−k} dw^k` at a pole of order `k` at `0`.
pub fn residue(phi: &MeromorphicKDifferential) -> Result<Complex64> {
    let (d, f) = phi.local_series(Pole::Zero, DEFAULT_TRUNCATION)?;
    let k = phi.k() as i32;
    if d != -k {
        return Err(Error::WrongOrder { expected: k, found: -d });
    }
    match normal_form(&f, d, phi.k(), DEFAULT_TRUNCATION)?.case {
        NormalFormCase::Residue { r } => Ok(r),
        _ => unreachable!("d = -k always yields the residue case"),
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FlatEndInvariants {
    pub degree: i32,
    pub theta: f64,
    /// One representative of the holonomy translation `τ`.
    pub translation: Complex64,
    /// Set when `τ` is only defined up to multiplication by k-th roots of unity.
    pub root_of_unity_ambiguity: bool,
}

impl FlatEndInvariants {
    pub fn from_theta_t(theta: f64, t: f64) -> Self {
        FlatEndInvariants {
            degree: 0,
            theta,
            translation: Complex64::new(t, 0.0),
            root_of_unity_ambiguity: false,
        }
    }

    pub fn t(&self) -> f64 {
        self.translation.norm()
    }
}

pub fn flat_end_invariants(phi: &MeromorphicKDifferential, pole: Pole) -> Result<FlatEndInvariants> {
    let (d, f) = phi.local_series(pole, DEFAULT_TRUNCATION)?;
    let k = phi.k();
    let ki = k as i32;
    let theta = 2.0 * PI * (d + ki) as f64 / k as f64;
    let two_pi_i = Complex64::new(0.0, 2.0 * PI);
    let (translation, ambiguous) = if d <= -ki && d % ki == 0 {
        match normal_form(&f, d, k, DEFAULT_TRUNCATION)?.case {
            NormalFormCase::Residue { r } => (two_pi_i * r.powf(1.0 / k as f64), true),
            NormalFormCase::Translation { a, .. } => (two_pi_i * a, true),
            NormalFormCase::Generic => unreachable!("d is a negative multiple of k"),
        }
    } else {
        (Complex64::new(0.0, 0.0), false)
    };
    Ok(FlatEndInvariants { degree: d, theta, translation, root_of_unity_ambiguity: ambiguous })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum FlatEnd {
    Cone { angle: f64 },
    Funnel { angle: f64 },
    HalfCylinder { perimeter: f64 },
    GraftedFunnel { l: u32, t: f64 },
}

const CLASSIFY_TOL: f64 = 1e-9;

pub fn classify_flat_end(inv: &FlatEndInvariants) -> Result<FlatEnd> {
    let theta = inv.theta;
    let t = inv.t();
    let turns = -theta / (2.0 * PI);
    let l = turns.round();
    let on_lattice = l >= 0.0 && (turns - l).abs() <= CLASSIFY_TOL;
    if t <= CLASSIFY_TOL {
        if theta > CLASSIFY_TOL {
            Ok(FlatEnd::Cone { angle: theta })
        } else if theta < -CLASSIFY_TOL {
            Ok(FlatEnd::Funnel { angle: -theta })
        } else {
            Err(Error::Classification("theta = 0 requires a nonzero translation".into()))
        }
    } else if on_lattice && l == 0.0 {
        Ok(FlatEnd::HalfCylinder { perimeter: t })
    } else if on_lattice {
        Ok(FlatEnd::GraftedFunnel { l: l as u32, t })
    } else {
        Err(Error::Classification(format!(
            "translation {t} is only allowed when theta is a non-positive multiple of 2π (theta = {theta})"
        )))
    }
}

/// Finite-volume criterion: the pole order is below `k`.
pub fn finite_volume_end_test(phi: &MeromorphicKDifferential, pole: Pole) -> Result<bool> {
    Ok(phi.pole_order(pole)? < phi.k() as i32)
}

/// Completeness of the flat metric at the pole: order at least `k`.
pub fn is_complete_flat(phi: &MeromorphicKDifferential, pole: Pole) -> Result<bool> {
    Ok(phi.pole_order(pole)? >= phi.k() as i32)
}
