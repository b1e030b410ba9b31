//! Explicit bounds on `u − u_flat` near a zero-free region, and the modified
//! Bessel functions they use.

use alloc::format;
use core::f64::consts::PI;


use num_traits::Float;

use crate::error::{Error, Result};

/// The unique `ξ ≥ 1` with `ξ^k − ξ^{k−1} = t`, for `t ≥ 0`.
pub fn xi(t: f64, k: u32) -> Result<f64> {
    if k == 0 {
        return Err(Error::Domain("weight k must be positive".into()));
    }
    if !(t >= 0.0) || !t.is_finite() {
        return Err(Error::Domain(format!("xi needs t ≥ 0, got {t}")));
    }
    let kf = k as f64;
    // g(ξ) = ξ^{k−1}(ξ − 1) − t is convex and increasing on [1, ∞) and
    // nonnegative at 1 + t^{1/k}, so Newton from there decreases monotonically.
    let mut x = 1.0 + if k == 1 { t } else { t.powf(1.0 / kf) };
    for _ in 0..200 {
        let p = x.powi(k as i32 - 2);
        let g = p * x * (x - 1.0) - t;
        let dg = p * (kf * x - (kf - 1.0));
        if !(dg > 0.0) {
            break;
        }
        let next = (x - g / dg).max(1.0);
        if (next - x).abs() <= 4.0 * f64::EPSILON * x || next >= x {
            x = next.min(x);
            break;
        }
        x = next;
    }
    Ok(x)
}

/// `log(ξ_k((r/2)^{2k}) / (r/2)²)`, valid for `r ≥ 1`.
pub fn coarse_bound(r: f64, k: u32) -> Result<f64> {
    if !(r >= 1.0) {
        return Err(Error::Domain(format!("coarse bound needs r ≥ 1, got {r}")));
    }
    let s2 = (r / 2.0) * (r / 2.0);
    let x = xi(s2.powi(k as i32), k)?;
    Ok(((x - s2) / s2).ln_1p())
}

/// Decay bound at distance `r − r1` beyond a radius `r1`:
/// `1/((k−2) I₀(x)) · (1 − 1/(2I₀(x)))` for `k ≥ 3` and `1/I₀(x)` otherwise,
/// with `x = √(2k)(r − r1)`.
pub fn fine_bound(r: f64, k: u32, r1: f64) -> Result<f64> {
    if k == 0 {
        return Err(Error::Domain("weight k must be positive".into()));
    }
    if !(r1 >= 0.0 && r > r1) {
        return Err(Error::Domain(format!("fine bound needs r > r1 ≥ 0, got r={r}, r1={r1}")));
    }
    let x = (2.0 * k as f64).sqrt() * (r - r1);
    let i0 = bessel_i0(x);
    Ok(if k >= 3 {
        (1.0 - 0.5 / i0) / ((k as f64 - 2.0) * i0)
    } else {
        1.0 / i0
    })
}

const SERIES_LIMIT: f64 = 30.0;

/// Modified Bessel function `I₀`.
pub fn bessel_i0(x: f64) -> f64 {
    bessel_i(0, x.abs())
}

/// Modified Bessel function `I₁`.
pub fn bessel_i1(x: f64) -> f64 {
    bessel_i(1, x.abs()) * x.signum()
}

fn bessel_i(order: u32, x: f64) -> f64 {
    if x <= SERIES_LIMIT {
        // Σ (x/2)^{2j+ν} / (j! (j+ν)!)
        let q = x * x / 4.0;
        let mut term = (x / 2.0).powi(order as i32);
        let mut sum = term;
        let mut j = 0.0;
        loop {
            j += 1.0;
            term *= q / (j * (j + order as f64));
            sum += term;
            if term <= 1e-17 * sum {
                return sum;
            }
        }
    }
    // e^x/√(2πx) Σ (−1)ⁿ Πₘ(μ − (2m−1)²) / (n! (8x)ⁿ), μ = 4ν²
    let mu = 4.0 * (order * order) as f64;
    let mut term = 1.0;
    let mut sum = 1.0;
    for n in 1..60 {
        let m = (2 * n - 1) as f64;
        let next = -term * (mu - m * m) / (n as f64 * 8.0 * x);
        if next.abs() >= term.abs() {
            break;
        }
        term = next;
        sum += term;
        if term.abs() <= 1e-17 * sum.abs() {
            break;
        }
    }
    x.exp() / (2.0 * PI * x).sqrt() * sum
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn xi_identities() {
        assert!((xi(0.0, 3).unwrap() - 1.0).abs() < 1e-15);
        assert!((xi(2.0, 2).unwrap() - 2.0).abs() < 1e-14);
        assert!((xi(5.0, 1).unwrap() - 6.0).abs() < 1e-14);
        assert!(xi(-1.0, 3).is_err());
    }

    #[test]
    fn bessel_values() {
        assert!((bessel_i0(0.0) - 1.0).abs() < 1e-16);
        assert!((bessel_i0(1.0) - 1.266_065_877_752_008_4).abs() < 1e-15);
        assert!((bessel_i1(1.0) - 0.565_159_103_992_485).abs() < 1e-15);
        // Continuity across the switch to the asymptotic expansion.
        // Continuity across the switch to the asymptotic expansion: the
        // jump over a 1e-9 step must match I₀' = I₁.
        let x = SERIES_LIMIT;
        let slope = (bessel_i0(x + 1e-9) / bessel_i0(x) - 1.0) / 1e-9;
        assert!((slope - bessel_i1(x) / bessel_i0(x)).abs() < 1e-4);
    }

    #[test]
    fn coarse_bound_domain() {
        assert!(coarse_bound(0.5, 3).is_err());
        let b = coarse_bound(4.0, 3).unwrap();
        assert!(b > 0.0 && b.is_finite());
    }
}
