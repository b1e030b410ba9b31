//! Small dense 3×3 linear algebra, real and complex.

use core::ops::{Add, Index, IndexMut, Mul, Neg, Sub};

use num_complex::Complex64;
use num_traits::Float;

pub type Vec3 = [f64; 3];

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Mat3(pub [[f64; 3]; 3]);

impl Mat3 {
    pub const ZERO: Mat3 = Mat3([[0.0; 3]; 3]);
    pub const IDENTITY: Mat3 = Mat3([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]);

    pub fn diag(d: Vec3) -> Mat3 {
        Mat3([[d[0], 0.0, 0.0], [0.0, d[1], 0.0], [0.0, 0.0, d[2]]])
    }

    /// Elementary matrix with a single 1 at zero-based position `(i, j)`.
    pub fn unit(i: usize, j: usize) -> Mat3 {
        let mut m = Mat3::ZERO;
        m.0[i][j] = 1.0;
        m
    }

    pub fn from_columns(c: [Vec3; 3]) -> Mat3 {
        let mut m = Mat3::ZERO;
        for (j, col) in c.iter().enumerate() {
            for i in 0..3 {
                m.0[i][j] = col[i];
            }
        }
        m
    }

    pub fn column(&self, j: usize) -> Vec3 {
        [self.0[0][j], self.0[1][j], self.0[2][j]]
    }

    pub fn det(&self) -> f64 {
        let m = &self.0;
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
            - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    }

    pub fn trace(&self) -> f64 {
        self.0[0][0] + self.0[1][1] + self.0[2][2]
    }

    pub fn transpose(&self) -> Mat3 {
        let mut t = Mat3::ZERO;
        for i in 0..3 {
            for j in 0..3 {
                t.0[i][j] = self.0[j][i];
            }
        }
        t
    }

    pub fn adjugate(&self) -> Mat3 {
        let m = &self.0;
        let c = |r0: usize, r1: usize, c0: usize, c1: usize| m[r0][c0] * m[r1][c1] - m[r0][c1] * m[r1][c0];
        Mat3([
            [c(1, 2, 1, 2), -c(0, 2, 1, 2), c(0, 1, 1, 2)],
            [-c(1, 2, 0, 2), c(0, 2, 0, 2), -c(0, 1, 0, 2)],
            [c(1, 2, 0, 1), -c(0, 2, 0, 1), c(0, 1, 0, 1)],
        ])
    }

    /// Inverse via the adjugate. `None` when the determinant is negligible
    /// relative to the entry scale.
    pub fn inverse(&self) -> Option<Mat3> {
        let det = self.det();
        let scale = self.max_abs();
        if !det.is_finite() || scale == 0.0 || det.abs() <= 1e-14 * scale * scale * scale {
            return None;
        }
        Some(self.adjugate().scale(1.0 / det))
    }

    pub fn scale(&self, s: f64) -> Mat3 {
        let mut r = *self;
        for row in r.0.iter_mut() {
            for x in row.iter_mut() {
                *x *= s;
            }
        }
        r
    }

    pub fn mul_vec(&self, v: Vec3) -> Vec3 {
        let m = &self.0;
        [
            m[0][0] * v[0] + m[0][1] * v[1] + m[0][2] * v[2],
            m[1][0] * v[0] + m[1][1] * v[1] + m[1][2] * v[2],
            m[2][0] * v[0] + m[2][1] * v[1] + m[2][2] * v[2],
        ]
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().flatten().fold(0.0, |a: f64, &x| a.max(x.abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().flatten().all(|x| x.is_finite())
    }

    pub fn is_unimodular(&self, tol: f64) -> bool {
        (self.det() - 1.0).abs() <= tol
    }

    /// Coefficients `(c2, c1, c0)` of `λ³ + c2 λ² + c1 λ + c0 = det(λI − M)`.
    pub fn char_poly(&self) -> (f64, f64, f64) {
        let m = &self.0;
        let minors = m[0][0] * m[1][1] - m[0][1] * m[1][0] + m[0][0] * m[2][2] - m[0][2] * m[2][0]
            + m[1][1] * m[2][2]
            - m[1][2] * m[2][1];
        (-self.trace(), minors, -self.det())
    }

    pub fn eigenvalues(&self) -> [Complex64; 3] {
        let (a, b, c) = self.char_poly();
        cubic_roots(a, b, c)
    }

    /// A unit vector spanning (approximately) the kernel of `M − λI`.
    pub fn null_vector(&self, lambda: f64) -> Vec3 {
        let mut s = *self;
        for i in 0..3 {
            s.0[i][i] -= lambda;
        }
        let r = s.0;
        let candidates = [cross(r[0], r[1]), cross(r[0], r[2]), cross(r[1], r[2])];
        let best = candidates
            .iter()
            .copied()
            .max_by(|p, q| norm(*p).partial_cmp(&norm(*q)).unwrap_or(core::cmp::Ordering::Equal))
            .unwrap_or([0.0; 3]);
        let n = norm(best);
        if n == 0.0 {
            return [1.0, 0.0, 0.0];
        }
        [best[0] / n, best[1] / n, best[2] / n]
    }
}

impl Index<(usize, usize)> for Mat3 {
    type Output = f64;
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.0[i][j]
    }
}

impl IndexMut<(usize, usize)> for Mat3 {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.0[i][j]
    }
}

impl Mul for Mat3 {
    type Output = Mat3;
    fn mul(self, o: Mat3) -> Mat3 {
        let mut r = Mat3::ZERO;
        for i in 0..3 {
            for j in 0..3 {
                r.0[i][j] = self.0[i][0] * o.0[0][j] + self.0[i][1] * o.0[1][j] + self.0[i][2] * o.0[2][j];
            }
        }
        r
    }
}

impl Add for Mat3 {
    type Output = Mat3;
    fn add(self, o: Mat3) -> Mat3 {
        let mut r = self;
        for i in 0..3 {
            for j in 0..3 {
                r.0[i][j] += o.0[i][j];
            }
        }
        r
    }
}

impl Sub for Mat3 {
    type Output = Mat3;
    fn sub(self, o: Mat3) -> Mat3 {
        self + (-o)
    }
}

impl Neg for Mat3 {
    type Output = Mat3;
    fn neg(self) -> Mat3 {
        self.scale(-1.0)
    }
}

pub fn cross(a: Vec3, b: Vec3) -> Vec3 {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

pub fn dot(a: Vec3, b: Vec3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

pub fn norm(a: Vec3) -> f64 {
    dot(a, a).sqrt()
}

pub fn det3(a: Vec3, b: Vec3, c: Vec3) -> f64 {
    dot(a, cross(b, c))
}

/// Roots of the monic cubic `λ³ + a λ² + b λ + c`, each refined by one Newton
/// step when that step reduces the residual.
pub fn cubic_roots(a: f64, b: f64, c: f64) -> [Complex64; 3] {
    let shift = a / 3.0;
    let p = b - a * a / 3.0;
    let q = 2.0 * a * a * a / 27.0 - a * b / 3.0 + c;
    let disc = (q / 2.0) * (q / 2.0) + (p / 3.0) * (p / 3.0) * (p / 3.0);
    let mut roots = if disc > 0.0 {
        let big = -q.signum() * (q.abs() / 2.0 + disc.sqrt()).cbrt();
        let small = if big != 0.0 { -p / (3.0 * big) } else { 0.0 };
        let re = -(big + small) / 2.0;
        let im = 3.0f64.sqrt() / 2.0 * (big - small);
        [
            Complex64::new(big + small, 0.0),
            Complex64::new(re, im),
            Complex64::new(re, -im),
        ]
    } else if p == 0.0 {
        [Complex64::new(0.0, 0.0); 3]
    } else {
        let r = 2.0 * (-p / 3.0).sqrt();
        let arg = (3.0 * q / (p * r)).clamp(-1.0, 1.0);
        let theta = arg.acos() / 3.0;
        let tau = 2.0 * core::f64::consts::PI / 3.0;
        [
            Complex64::new(r * theta.cos(), 0.0),
            Complex64::new(r * (theta - tau).cos(), 0.0),
            Complex64::new(r * (theta - 2.0 * tau).cos(), 0.0),
        ]
    };
    let f = |z: Complex64| ((z + a) * z + b) * z + c;
    let df = |z: Complex64| (z * 3.0 + 2.0 * a) * z + b;
    for root in roots.iter_mut() {
        *root -= shift;
        let d = df(*root);
        if d.norm() > 0.0 {
            let cand = *root - f(*root) / d;
            if f(cand).norm() < f(*root).norm() {
                *root = if root.im == 0.0 { Complex64::new(cand.re, 0.0) } else { cand };
            }
        }
    }
    roots
}

/// Complex 3×3 matrices, used to realify connection forms.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CMat3(pub [[Complex64; 3]; 3]);

impl CMat3 {
    pub fn zero() -> CMat3 {
        CMat3([[Complex64::new(0.0, 0.0); 3]; 3])
    }

    pub fn from_real(m: &Mat3) -> CMat3 {
        let mut r = CMat3::zero();
        for i in 0..3 {
            for j in 0..3 {
                r.0[i][j] = Complex64::new(m.0[i][j], 0.0);
            }
        }
        r
    }

    pub fn re(&self) -> Mat3 {
        let mut r = Mat3::ZERO;
        for i in 0..3 {
            for j in 0..3 {
                r.0[i][j] = self.0[i][j].re;
            }
        }
        r
    }

    pub fn max_imag(&self) -> f64 {
        self.0.iter().flatten().fold(0.0, |a: f64, z| a.max(z.im.abs()))
    }
}

impl Mul for CMat3 {
    type Output = CMat3;
    fn mul(self, o: CMat3) -> CMat3 {
        let mut r = CMat3::zero();
        for i in 0..3 {
            for j in 0..3 {
                r.0[i][j] = self.0[i][0] * o.0[0][j] + self.0[i][1] * o.0[1][j] + self.0[i][2] * o.0[2][j];
            }
        }
        r
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inverse_roundtrip() {
        let m = Mat3([[2.0, 1.0, 0.5], [0.0, 3.0, -1.0], [1.0, 0.0, 1.0]]);
        let p = m * m.inverse().unwrap();
        assert!((p - Mat3::IDENTITY).max_abs() < 1e-14);
    }

    #[test]
    fn cubic_three_real() {
        // (λ−1)(λ−2)(λ+3) = λ³ − 7λ + 6
        let mut r: std::vec::Vec<f64> = cubic_roots(0.0, -7.0, 6.0).iter().map(|z| z.re).collect();
        r.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert!((r[0] + 3.0).abs() < 1e-13 && (r[1] - 1.0).abs() < 1e-13 && (r[2] - 2.0).abs() < 1e-13);
    }

    #[test]
    fn cubic_complex_pair() {
        // (λ−2)(λ²+1) = λ³ − 2λ² + λ − 2
        let r = cubic_roots(-2.0, 1.0, -2.0);
        assert!((r[0] - Complex64::new(2.0, 0.0)).norm() < 1e-13);
        assert!((r[1].im.abs() - 1.0).abs() < 1e-13 && r[1].re.abs() < 1e-13);
    }

    #[test]
    fn eigen_spread() {
        let m = Mat3::diag([2200.0, 1.0, 1.0 / 2200.0]);
        let mut r: std::vec::Vec<f64> = m.eigenvalues().iter().map(|z| z.re).collect();
        r.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert!((r[0] * 2200.0 - 1.0).abs() < 1e-9);
        assert!((r[2] / 2200.0 - 1.0).abs() < 1e-12);
    }
}
