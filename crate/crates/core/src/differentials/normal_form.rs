//! Local normal forms of `z^d f(z) dz^k` with `f(0) ≠ 0`.
//!
//! With `a(z) = f(z)^{1/k}` the problem becomes finding a primitive of
//! `z^{d/k} a(z) dz` in a normalized shape:
//!
//! * generic `d`: `w^{d/k} dw = z^{d/k} a dz`, so `w^d dw^k = z^d f dz^k`;
//! * `d = −k`: `a₀ dw/w = a dz/z`, so `φ = R w^{−k} dw^k` with `R = a₀^k`;
//! * `d = −(l+1)k`: `(w^{−l} + A) dw/w = z^{−l−1} a dz` with `A = a_l`.

use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;


use super::series::{self, Series};
use crate::error::{Error, Result};

pub const DEFAULT_TRUNCATION: usize = 40;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum NormalFormCase {
    /// `w^d dw^k`.
    Generic,
    /// `R w^{−k} dw^k`.
    Residue { r: Complex64 },
    /// `(w^{−l} + A)^k w^{−k} dw^k`.
    Translation { l: u32, a: Complex64 },
}

#[derive(Clone, Debug, PartialEq)]
pub struct NormalForm {
    pub case: NormalFormCase,
    /// Coefficients of the normalizing coordinate `w(z)` through `z^n`; `w[0] = 0`.
    pub coordinate: Series,
}

pub fn normal_form(f: &[Complex64], d: i32, k: u32, n: usize) -> Result<NormalForm> {
    if k == 0 {
        return Err(Error::Domain("weight k must be positive".into()));
    }
    if f.is_empty() || f[0] == Complex64::new(0.0, 0.0) {
        return Err(Error::Precondition("f(0) must be nonzero".into()));
    }
    if n < 2 {
        return Err(Error::Domain("truncation order must be at least 2".into()));
    }
    // One extra order so that w' (and hence the re-expansion) is exact to order n.
    let f = series::truncated(f, n + 1);
    let ki = k as i32;
    let root = series::pow(&f, Complex64::new(1.0 / k as f64, 0.0));
    if d == -ki {
        Ok(residue_case(&f, &root))
    } else if d < -ki && d % ki == 0 {
        translation_case(&root, (-d / ki - 1) as u32)
    } else {
        Ok(generic_case(&root, d, k))
    }
}

fn generic_case(root: &[Complex64], d: i32, k: u32) -> NormalForm {
    let (dk, kf) = (f64::from(d + k as i32), k as f64);
    // G = Σ aₙ (d+k)/(d+k+kn) zⁿ and w = z·G^{k/(d+k)}.
    let g: Series = root
        .iter()
        .enumerate()
        .map(|(i, &a)| a * (dk / (dk + kf * i as f64)))
        .collect();
    let q = series::pow(&g, Complex64::new(kf / dk, 0.0));
    NormalForm { case: NormalFormCase::Generic, coordinate: series::times_z(&q) }
}

fn residue_case(f: &[Complex64], root: &[Complex64]) -> NormalForm {
    let a0 = root[0];
    let mut e = vec![Complex64::new(0.0, 0.0); root.len()];
    for i in 1..root.len() {
        e[i] = root[i] / (a0 * i as f64);
    }
    NormalForm {
        case: NormalFormCase::Residue { r: f[0] },
        coordinate: series::times_z(&series::exp(&e)),
    }
}

fn translation_case(root: &[Complex64], l: u32) -> Result<NormalForm> {
    let n = root.len();
    let li = l as usize;
    let lf = l as f64;
    let a_l = if li < n { root[li] } else { Complex64::new(0.0, 0.0) };
    let eta: Series = (0..n)
        .map(|i| if i == li { Complex64::new(0.0, 0.0) } else { root[i] / (i as f64 - lf) })
        .collect();
    // Solve a_l z^l h + exp(−l h) = η order by order; the coefficient of zⁱ is
    // linear in hᵢ with slope −l·η₀ once the lower orders are fixed.
    let mut h = vec![Complex64::new(0.0, 0.0); n];
    h[0] = -eta[0].ln() / lf;
    let slope = eta[0] * -lf;
    for i in 1..n {
        let e = series::exp(&series::scale(&h[..=i], Complex64::new(-lf, 0.0)));
        let mut rhs = eta[i] - e[i];
        if i >= li {
            rhs -= a_l * h[i - li];
        }
        h[i] = rhs / slope;
    }
    let e = series::exp(&series::scale(&h, Complex64::new(-lf, 0.0)));
    let mut residual: f64 = 0.0;
    let scale = eta.iter().fold(1.0, |m: f64, x| m.max(x.norm()));
    for i in 0..n {
        let mut lhs = e[i];
        if i >= li {
            lhs += a_l * h[i - li];
        }
        residual = residual.max((lhs - eta[i]).norm() / scale);
    }
    if !(residual <= 1e-9) {
        return Err(Error::Truncation { order: n, residual });
    }
    // w = (−l)^{−1/l} z e^h turns −l w^{−l} into w^{−l}.
    let c = Complex64::new(-lf, 0.0).powf(-1.0 / lf);
    let coordinate = series::scale(&series::times_z(&series::exp(&h)), c);
    Ok(NormalForm { case: NormalFormCase::Translation { l, a: a_l }, coordinate })
}

/// Rebuild `f` from a normal form: the coefficient series of the pulled-back
/// normal-form differential divided by `z^d`, to the truncation order.
pub fn reexpand(nf: &NormalForm, d: i32, k: u32) -> Vec<Complex64> {
    let w = &nf.coordinate;
    let n = w.len() - 1;
    // Q = w/z, so Q has a nonzero constant term.
    let q = w[1..=n].to_vec();
    let dw = series::truncated(&series::derivative(w), n);
    let dw_k = series::powi(&dw, k as i32);
    match nf.case {
        NormalFormCase::Generic => series::mul(&series::powi(&q, d), &dw_k),
        NormalFormCase::Residue { r } => series::scale(&series::mul(&series::powi(&q, -(k as i32)), &dw_k), r),
        NormalFormCase::Translation { l, a } => {
            let mut inner = series::powi(&q, -(l as i32) - 1);
            let tail = series::powi(&q, -1);
            for i in l as usize..n {
                inner[i] += a * tail[i - l as usize];
            }
            series::mul(&series::powi(&inner, k as i32), &dw_k)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn identity_cases() {
        let nf = normal_form(&[c(1.0)], 0, 3, 8).unwrap();
        assert_eq!(nf.case, NormalFormCase::Generic);
        assert!((nf.coordinate[1] - c(1.0)).norm() < 1e-15);
        assert!(nf.coordinate[2..].iter().all(|x| x.norm() < 1e-15));

        let nf = normal_form(&[c(2.5)], -3, 3, 8).unwrap();
        assert_eq!(nf.case, NormalFormCase::Residue { r: c(2.5) });
        assert!((nf.coordinate[1] - c(1.0)).norm() < 1e-15);
    }

    #[test]
    fn one_plus_z_generic() {
        let f = [c(1.0), c(1.0)];
        let nf = normal_form(&f, 1, 3, 40).unwrap();
        let back = reexpand(&nf, 1, 3);
        assert!(series::max_diff(&back, &series::truncated(&f, 40)) < 1e-10);
    }

    #[test]
    fn translation_roundtrip() {
        let f = [c(1.0), c(0.5), Complex64::new(0.0, 0.25)];
        for (d, k) in [(-6, 3), (-9, 3), (-4, 2)] {
            let nf = normal_form(&f, d, k, 30).unwrap();
            assert!(matches!(nf.case, NormalFormCase::Translation { .. }));
            let back = reexpand(&nf, d, k);
            assert!(series::max_diff(&back, &series::truncated(&f, 30)) < 1e-10, "d={d} k={k}");
        }
    }

    #[test]
    fn rejects_vanishing_constant() {
        assert!(matches!(normal_form(&[c(0.0), c(1.0)], 0, 3, 8), Err(Error::Precondition(_))));
    }
}
