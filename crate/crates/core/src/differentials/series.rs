//! Truncated power series over `Complex64`. Every series is a coefficient
//! vector `c[0] + c[1] z + …` and operations keep the length of their inputs.

use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;

pub type Series = Vec<Complex64>;

fn zero() -> Complex64 {
    Complex64::new(0.0, 0.0)
}

pub fn truncated(c: &[Complex64], n: usize) -> Series {
    let mut s: Series = c.iter().copied().take(n).collect();
    s.resize(n, zero());
    s
}

pub fn mul(a: &[Complex64], b: &[Complex64]) -> Series {
    let n = a.len().min(b.len());
    let mut r = vec![zero(); n];
    for i in 0..n {
        if a[i] == zero() {
            continue;
        }
        for j in 0..n - i {
            r[i + j] += a[i] * b[j];
        }
    }
    r
}

pub fn scale(a: &[Complex64], s: Complex64) -> Series {
    a.iter().map(|&x| x * s).collect()
}

pub fn derivative(a: &[Complex64]) -> Series {
    let n = a.len();
    let mut r = vec![zero(); n];
    for i in 1..n {
        r[i - 1] = a[i] * i as f64;
    }
    r
}

/// Multiplicative inverse; requires `a[0] != 0`.
pub fn inv(a: &[Complex64]) -> Series {
    let n = a.len();
    let mut r = vec![zero(); n];
    if n == 0 {
        return r;
    }
    r[0] = a[0].inv();
    for i in 1..n {
        let mut s = zero();
        for j in 1..=i {
            s += a[j] * r[i - j];
        }
        r[i] = -s * r[0];
    }
    r
}

/// `exp(a)`, with `exp(a[0])` as constant term.
pub fn exp(a: &[Complex64]) -> Series {
    let n = a.len();
    let mut r = vec![zero(); n];
    if n == 0 {
        return r;
    }
    r[0] = a[0].exp();
    for i in 1..n {
        let mut s = zero();
        for j in 1..=i {
            s += a[j] * r[i - j] * j as f64;
        }
        r[i] = s / i as f64;
    }
    r
}

/// Principal-branch logarithm; requires `a[0] != 0`.
pub fn ln(a: &[Complex64]) -> Series {
    let n = a.len();
    if n == 0 {
        return Vec::new();
    }
    let quotient = mul(&derivative(a), &inv(a));
    let mut r = vec![zero(); n];
    r[0] = a[0].ln();
    for i in 1..n {
        r[i] = quotient[i - 1] / i as f64;
    }
    r
}

/// `a^alpha` with the principal branch of `a[0]^alpha`; requires `a[0] != 0`.
pub fn pow(a: &[Complex64], alpha: Complex64) -> Series {
    let n = a.len();
    let mut r = vec![zero(); n];
    if n == 0 {
        return r;
    }
    r[0] = a[0].powc(alpha);
    for i in 1..n {
        let mut s = zero();
        for j in 1..=i {
            s += a[j] * r[i - j] * (alpha * j as f64 - (i - j) as f64);
        }
        r[i] = s / (a[0] * i as f64);
    }
    r
}

pub fn powi(a: &[Complex64], e: i32) -> Series {
    let base = if e < 0 { inv(a) } else { a.to_vec() };
    let mut r = vec![zero(); a.len()];
    if !r.is_empty() {
        r[0] = Complex64::new(1.0, 0.0);
    }
    for _ in 0..e.unsigned_abs() {
        r = mul(&r, &base);
    }
    r
}

/// `f(g(z))` for `g(0) = 0`, by Horner's scheme.
pub fn compose(f: &[Complex64], g: &[Complex64]) -> Series {
    let n = f.len().min(g.len());
    let mut r = vec![zero(); n];
    for &c in f[..n].iter().rev() {
        r = mul(&r, &g[..n]);
        r[0] += c;
    }
    r
}

/// Shift by one order: `z·a(z)`, keeping the length.
pub fn times_z(a: &[Complex64]) -> Series {
    let n = a.len();
    let mut r = vec![zero(); n];
    if n > 0 {
        r[1..].copy_from_slice(&a[..n - 1]);
    }
    r
}

pub fn max_diff(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter().zip(b).fold(0.0, |m: f64, (x, y)| m.max((x - y).norm()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn exp_ln_roundtrip() {
        let a = vec![c(2.0), c(0.3), Complex64::new(0.1, -0.2), c(0.05), c(0.0), c(0.01)];
        assert!(max_diff(&exp(&ln(&a)), &a) < 1e-14);
    }

    #[test]
    fn pow_matches_powi() {
        let a = vec![c(1.5), c(-0.5), Complex64::new(0.25, 0.5), c(0.125)];
        assert!(max_diff(&pow(&a, c(3.0)), &powi(&a, 3)) < 1e-13);
        assert!(max_diff(&pow(&a, c(-2.0)), &powi(&a, -2)) < 1e-13);
        let cube_root = pow(&a, c(1.0 / 3.0));
        assert!(max_diff(&powi(&cube_root, 3), &a) < 1e-13);
    }

    #[test]
    fn compose_geometric() {
        // 1/(1−w) with w = z/(1+z)… check against 1 + z.
        let n = 8;
        let geo: Series = (0..n).map(|_| c(1.0)).collect();
        let mut w = vec![c(0.0); n];
        for i in 1..n {
            w[i] = c(if i % 2 == 1 { 1.0 } else { -1.0 });
        }
        let r = compose(&geo, &w);
        let mut expect = vec![c(0.0); n];
        expect[0] = c(1.0);
        expect[1] = c(1.0);
        assert!(max_diff(&r, &expect) < 1e-14);
    }
}
