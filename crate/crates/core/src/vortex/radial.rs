//! Rotationally symmetric solves `u'' + u'/r = 2(e^u − e^{(1−k)u}|φ|²)` on a
//! possibly graded mesh.
//!
//! Away from the center the unknown is the deviation `w = u − u_flat`, which
//! satisfies `w'' + w'/r = 2e^{u_flat}(e^w − e^{(1−k)w})`. Storing `w` keeps its
//! exponentially small tail accurate in relative terms.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;


use num_traits::Float;

use super::{wang_rhs, wang_rhs_du, Certificate, SolverConfig, SolverReport};
use crate::differentials::MeromorphicKDifferential;
use crate::error::{Error, Result};

/// `|φ| = amplitude · r^exponent`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RadialProfile {
    pub amplitude: f64,
    pub exponent: f64,
}

impl RadialProfile {
    /// Profile of a monomial differential `a zᵐ dz^k`.
    pub fn of(phi: &MeromorphicKDifferential) -> Option<RadialProfile> {
        let (m, a) = phi.as_monomial()?;
        Some(RadialProfile { amplitude: a.norm(), exponent: m as f64 })
    }

    pub fn abs(&self, r: f64) -> f64 {
        if self.exponent == 0.0 {
            self.amplitude
        } else {
            self.amplitude * r.powf(self.exponent)
        }
    }

    pub fn flat(&self, r: f64, k: u32) -> f64 {
        let lr = if self.exponent == 0.0 { 0.0 } else { self.exponent * r.ln() };
        2.0 / k as f64 * (self.amplitude.ln() + lr)
    }

    pub fn flat_slope(&self, r: f64, k: u32) -> f64 {
        if self.exponent == 0.0 {
            0.0
        } else {
            2.0 / k as f64 * self.exponent / r
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum RadialBoundary {
    /// `u = u_flat`.
    Flat,
    /// `u` prescribed.
    Value(f64),
}

/// A radial solution sampled on its mesh, with `u`, `w = u − u_flat` and their
/// `r`-derivatives.
#[derive(Clone, Debug, PartialEq)]
pub struct RadialField {
    pub r: Vec<f64>,
    pub u: Vec<f64>,
    pub w: Vec<f64>,
    pub du: Vec<f64>,
    pub dw: Vec<f64>,
    pub profile: RadialProfile,
    pub k: u32,
    /// First node whose unknown was the deviation `w`.
    pub split: usize,
}

pub fn uniform_mesh(r0: f64, r1: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| r0 + (r1 - r0) * i as f64 / (n - 1) as f64).collect()
}

/// Mesh on `[0, radius − gap]` with spacing `min(h, q·(radius − r))`, i.e.
/// uniform in the bulk and geometric toward the rim.
pub fn graded_disk_mesh(radius: f64, gap: f64, h: f64, q: f64) -> Vec<f64> {
    let end = radius - gap;
    let mut mesh = vec![0.0];
    let mut r = 0.0;
    loop {
        let step = h.min(q * (radius - r));
        if r + step >= end - 0.5 * step {
            mesh.push(end);
            break;
        }
        r += step;
        mesh.push(r);
    }
    mesh
}

/// Three-point coefficients `(a, b, c)` of `v'' + v'/r` at an interior node.
fn stencil(rm: f64, r: f64, rp: f64) -> (f64, f64, f64) {
    let (hm, hp) = (r - rm, rp - r);
    let s = hm + hp;
    let a = 2.0 / (hm * s) - hp / (r * hm * s);
    let c = 2.0 / (hp * s) + hm / (r * hp * s);
    let b = -2.0 / (hp * hm) + (hp - hm) / (r * hp * hm);
    (a, b, c)
}

struct Problem<'a> {
    r: &'a [f64],
    profile: RadialProfile,
    k: u32,
    flat: Vec<f64>,
    phi_sq: Vec<f64>,
    split: usize,
    inner: Option<RadialBoundary>,
    outer: RadialBoundary,
}

impl Problem<'_> {
    fn is_w(&self, i: usize) -> bool {
        i >= self.split
    }

    /// Value of node `j` in the representation used by node `i`.
    fn as_rep(&self, v: &[f64], i: usize, j: usize) -> f64 {
        match (self.is_w(i), self.is_w(j)) {
            (true, false) => v[j] - self.flat[j],
            (false, true) => v[j] + self.flat[j],
            _ => v[j],
        }
    }

    fn u_at(&self, v: &[f64], i: usize) -> f64 {
        if self.is_w(i) {
            v[i] + self.flat[i]
        } else {
            v[i]
        }
    }

    fn target(&self, bc: RadialBoundary, i: usize) -> f64 {
        let u = match bc {
            RadialBoundary::Flat => self.flat[i],
            RadialBoundary::Value(x) => x,
        };
        if self.is_w(i) {
            u - self.flat[i]
        } else {
            u
        }
    }

    /// Source term and its derivative in the node's representation.
    fn source(&self, v: &[f64], i: usize) -> (f64, f64) {
        if self.is_w(i) {
            let kf = self.k as f64;
            let w = v[i];
            let e = 2.0 * self.flat[i].exp();
            (
                e * (w.exp_m1() - ((1.0 - kf) * w).exp_m1()),
                e * (w.exp() + (kf - 1.0) * ((1.0 - kf) * w).exp()),
            )
        } else {
            (wang_rhs(v[i], self.phi_sq[i], self.k), wang_rhs_du(v[i], self.phi_sq[i], self.k))
        }
    }

    /// Residual rows and tridiagonal Jacobian `(sub, diag, sup)`. Returns the
    /// scaled max-norm `max |Fᵢ| / (1 + |∂ source|)` and the plain max-norm.
    #[allow(clippy::type_complexity)]
    fn assemble(&self, v: &[f64], f: &mut [f64], jac: Option<(&mut [f64], &mut [f64], &mut [f64])>) -> (f64, f64) {
        let n = self.r.len();
        let (mut scaled, mut plain): (f64, f64) = (0.0, 0.0);
        let mut rows = vec![(0.0, 1.0, 0.0); n];
        for i in 0..n {
            if let (0, Some(inner)) = (i, self.inner) {
                f[i] = v[i] - self.target(inner, i);
                continue;
            }
            if i == n - 1 {
                f[i] = v[i] - self.target(self.outer, i);
                continue;
            }
            let (s, ds) = self.source(v, i);
            let (row, lap) = if i == 0 {
                let h2 = self.r[1] * self.r[1];
                let lap = 4.0 * (self.as_rep(v, 0, 1) - v[0]) / h2;
                ((0.0, -4.0 / h2 - ds, 4.0 / h2), lap)
            } else {
                let (a, b, c) = stencil(self.r[i - 1], self.r[i], self.r[i + 1]);
                let lap = a * self.as_rep(v, i, i - 1) + b * v[i] + c * self.as_rep(v, i, i + 1);
                ((a, b - ds, c), lap)
            };
            rows[i] = row;
            f[i] = lap - s;
            plain = plain.max(f[i].abs());
            scaled = scaled.max(f[i].abs() / (1.0 + ds.abs()));
        }
        if let Some((sub, diag, sup)) = jac {
            for i in 0..n {
                sub[i] = rows[i].0;
                diag[i] = rows[i].1;
                sup[i] = rows[i].2;
            }
        }
        (scaled, plain)
    }
}

/// Thomas algorithm for `sub[i] x[i−1] + diag[i] x[i] + sup[i] x[i+1] = rhs[i]`.
fn thomas(sub: &[f64], diag: &[f64], sup: &[f64], rhs: &[f64]) -> Vec<f64> {
    let n = diag.len();
    let mut c = vec![0.0; n];
    let mut d = vec![0.0; n];
    c[0] = sup[0] / diag[0];
    d[0] = rhs[0] / diag[0];
    for i in 1..n {
        let m = diag[i] - sub[i] * c[i - 1];
        c[i] = sup[i] / m;
        d[i] = (rhs[i] - sub[i] * d[i - 1]) / m;
    }
    let mut x = vec![0.0; n];
    x[n - 1] = d[n - 1];
    for i in (0..n - 1).rev() {
        x[i] = d[i] - c[i] * x[i + 1];
    }
    x
}

/// Solves the radial equation on `mesh` (strictly increasing). A mesh starting
/// at `r = 0` is a disk with a symmetry condition at the center; otherwise
/// `inner` is required.
pub fn solve_radial(
    profile: RadialProfile,
    mesh: &[f64],
    k: u32,
    inner: Option<RadialBoundary>,
    outer: RadialBoundary,
    cfg: &SolverConfig,
) -> Result<(RadialField, SolverReport)> {
    let n = mesh.len();
    if n < 32 {
        return Err(Error::Setup(format!("radial resolution {n} is below 32 nodes")));
    }
    if mesh.windows(2).any(|p| !(p[1] > p[0])) || mesh[0] < 0.0 {
        return Err(Error::Setup("radial mesh must be increasing and non-negative".into()));
    }
    let disk = mesh[0] == 0.0;
    if disk == inner.is_some() {
        return Err(Error::Setup("inner condition required exactly when the mesh avoids r = 0".into()));
    }
    if !(profile.amplitude > 0.0) {
        return Err(Error::Setup("profile amplitude must be positive".into()));
    }
    // The deviation is singular at a zero or pole of φ, so keep u near r = 0.
    let split_radius = if disk && profile.exponent != 0.0 { 1.0 } else { 0.0 };
    let split = mesh.iter().position(|&r| r >= split_radius).unwrap_or(n);
    let flat: Vec<f64> = mesh
        .iter()
        .map(|&r| if r == 0.0 && profile.exponent != 0.0 { f64::NEG_INFINITY } else { profile.flat(r, k) })
        .collect();
    let phi_sq: Vec<f64> = mesh.iter().map(|&r| profile.abs(r).powi(2)).collect();
    let problem = Problem { r: mesh, profile, k, flat, phi_sq, split, inner, outer };

    // Initial guess max(u_flat, 0), in each node's representation.
    let mut v: Vec<f64> = (0..n)
        .map(|i| {
            let u0 = problem.flat[i].max(0.0);
            if problem.is_w(i) {
                u0 - problem.flat[i]
            } else {
                u0
            }
        })
        .collect();
    if let Some(bc) = inner {
        v[0] = problem.target(bc, 0);
    }
    v[n - 1] = problem.target(outer, n - 1);

    // The discrete residual cannot drop below rounding in the second
    // differences, which matters on very fine meshes.
    let h_min = mesh.windows(2).fold(f64::INFINITY, |m, p| m.min(p[1] - p[0]));
    let scale = v.iter().fold(1.0f64, |m, x| m.max(x.abs()));
    let tol = cfg.tol.max(2.0 * f64::EPSILON * scale / (h_min * h_min));

    let (mut f, mut ft) = (vec![0.0; n], vec![0.0; n]);
    let (mut sub, mut diag, mut sup) = (vec![0.0; n], vec![0.0; n], vec![0.0; n]);
    let (mut norm, _) = problem.assemble(&v, &mut f, None);
    let mut history = vec![norm];
    let mut iterations = 0;
    let mut polished = false;
    while iterations < cfg.max_newton {
        iterations += 1;
        problem.assemble(&v, &mut f, Some((&mut sub, &mut diag, &mut sup)));
        let rhs: Vec<f64> = f.iter().map(|x| -x).collect();
        let delta = thomas(&sub, &diag, &sup, &rhs);
        let mut lambda = 1.0;
        let mut accepted = false;
        let mut trial = v.clone();
        for _ in 0..=cfg.max_halvings {
            for i in 0..n {
                trial[i] = v[i] + lambda * delta[i];
            }
            let (t, _) = problem.assemble(&trial, &mut ft, None);
            // Once converged, take full steps to polish the relative accuracy
            // of the tail even if the residual sits at rounding level.
            if t.is_finite() && (t < norm || (norm <= tol && t <= tol)) {
                accepted = true;
                norm = t;
                core::mem::swap(&mut v, &mut trial);
                break;
            }
            lambda *= 0.5;
        }
        history.push(norm);
        let step = (0..n).fold(0.0, |m: f64, i| m.max(lambda * delta[i].abs() / (1.0 + v[i].abs())));
        if !accepted {
            break;
        }
        if norm <= tol && lambda == 1.0 && step <= 1e-12 {
            if polished {
                break;
            }
            polished = true;
        }
    }
    if !(norm <= tol) {
        return Err(Error::NonConvergence { iterations, residual: norm });
    }
    let (_, plain) = problem.assemble(&v, &mut f, None);
    let field = finish(&problem, &v);
    let min_flat_gap = (0..n)
        .filter(|&i| problem.flat[i].is_finite())
        .map(|i| field.w[i])
        .fold(f64::INFINITY, f64::min);
    let certificate = radial_certificate(&problem, &v, tol);
    let report = SolverReport { iterations, residual: plain, converged: true, certificate, min_flat_gap, history };
    Ok((field, report))
}

fn radial_certificate(problem: &Problem, v: &[f64], tol: f64) -> Certificate {
    let mut f = vec![0.0; v.len()];
    problem.assemble(v, &mut f, None);
    let interior = 1..v.len() - 1;
    let sub = interior.clone().all(|i| f[i] >= -tol);
    let sup = interior.clone().all(|i| f[i] <= tol);
    match (sub, sup) {
        (true, true) => Certificate::Solution,
        (true, false) => Certificate::Sub,
        (false, true) => Certificate::Super,
        (false, false) => Certificate::Neither,
    }
}

/// Second-order derivative of nodal data on a nonuniform mesh.
fn nodal_derivative(r: &[f64], x: &[f64], i: usize) -> f64 {
    let n = r.len();
    let (i0, i1, i2) = if i == 0 {
        (0, 1, 2)
    } else if i == n - 1 {
        (n - 3, n - 2, n - 1)
    } else {
        (i - 1, i, i + 1)
    };
    // Derivative of the quadratic through the three nodes, evaluated at r[i].
    let (a, b, c) = (r[i0], r[i1], r[i2]);
    let t = r[i];
    x[i0] * ((t - b) + (t - c)) / ((a - b) * (a - c))
        + x[i1] * ((t - a) + (t - c)) / ((b - a) * (b - c))
        + x[i2] * ((t - a) + (t - b)) / ((c - a) * (c - b))
}

fn finish(problem: &Problem, v: &[f64]) -> RadialField {
    let n = v.len();
    let r = problem.r;
    let k = problem.k;
    let u: Vec<f64> = (0..n).map(|i| problem.u_at(v, i)).collect();
    let w: Vec<f64> = (0..n)
        .map(|i| if problem.is_w(i) { v[i] } else { v[i] - problem.flat[i] })
        .collect();
    let mut du = vec![0.0; n];
    let mut dw = vec![0.0; n];
    for i in 0..n {
        // Differentiate in the node's own representation, using neighbours
        // converted to it.
        let local: Vec<f64> = (0..n).map(|j| if j + 3 < i || j > i + 3 { 0.0 } else { problem.as_rep(v, i, j) }).collect();
        let d = if i == 0 && r[0] == 0.0 { 0.0 } else { nodal_derivative(r, &local, i) };
        let slope = if r[i] == 0.0 { 0.0 } else { problem.profile.flat_slope(r[i], k) };
        if problem.is_w(i) {
            dw[i] = d;
            du[i] = d + slope;
        } else {
            du[i] = d;
            dw[i] = d - slope;
        }
    }
    RadialField { r: r.to_vec(), u, w, du, dw, profile: problem.profile, k, split: problem.split }
}

impl RadialField {
    fn locate(&self, r: f64) -> Option<usize> {
        if r < self.r[0] || r > self.r[self.r.len() - 1] {
            return None;
        }
        let i = self.r.partition_point(|&x| x <= r);
        Some(i.clamp(1, self.r.len() - 1) - 1)
    }

    fn hermite(&self, vals: &[f64], ders: &[f64], i: usize, r: f64) -> (f64, f64) {
        let (r0, r1) = (self.r[i], self.r[i + 1]);
        let h = r1 - r0;
        let t = (r - r0) / h;
        let (t2, t3) = (t * t, t * t * t);
        let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
        let h10 = t3 - 2.0 * t2 + t;
        let h01 = -2.0 * t3 + 3.0 * t2;
        let h11 = t3 - t2;
        let value = h00 * vals[i] + h10 * h * ders[i] + h01 * vals[i + 1] + h11 * h * ders[i + 1];
        let d00 = (6.0 * t2 - 6.0 * t) / h;
        let d10 = 3.0 * t2 - 4.0 * t + 1.0;
        let d01 = (-6.0 * t2 + 6.0 * t) / h;
        let d11 = 3.0 * t2 - 2.0 * t;
        let slope = d00 * vals[i] + d10 * ders[i] + d01 * vals[i + 1] + d11 * ders[i + 1];
        (value, slope)
    }

    /// `(u, u_r)` at radius `r`, `None` outside the mesh.
    pub fn u_at(&self, r: f64) -> Option<(f64, f64)> {
        let i = self.locate(r)?;
        // Interpolate the deviation where it is the primary unknown.
        if i >= self.split && r > 0.0 {
            let (w, dw) = self.hermite(&self.w, &self.dw, i, r);
            Some((w + self.profile.flat(r, self.k), dw + self.profile.flat_slope(r, self.k)))
        } else {
            Some(self.hermite(&self.u, &self.du, i, r))
        }
    }

    /// `(w, w_r)` at radius `r`, `None` outside the mesh.
    pub fn w_at(&self, r: f64) -> Option<(f64, f64)> {
        let i = self.locate(r)?;
        if i >= self.split {
            Some(self.hermite(&self.w, &self.dw, i, r))
        } else {
            let (u, du) = self.hermite(&self.u, &self.du, i, r);
            Some((u - self.profile.flat(r, self.k), du - self.profile.flat_slope(r, self.k)))
        }
    }

    pub fn outer_radius(&self) -> f64 {
        self.r[self.r.len() - 1]
    }

    pub fn center_value(&self) -> f64 {
        self.u[0]
    }

    /// Discrete residual at each node in the representation the solver used
    /// there; zero at Dirichlet nodes.
    pub fn residuals(&self) -> Vec<f64> {
        let n = self.r.len();
        let disk = self.r[0] == 0.0;
        let kf = self.k as f64;
        let mut out = vec![0.0; n];
        for i in 0..n - 1 {
            if i == 0 && !disk {
                continue;
            }
            let rep: &[f64] = if i >= self.split { &self.w } else { &self.u };
            let source = if i >= self.split {
                let w = self.w[i];
                2.0 * self.profile.flat(self.r[i], self.k).exp() * (w.exp_m1() - ((1.0 - kf) * w).exp_m1())
            } else {
                let a = self.profile.abs(self.r[i]);
                wang_rhs(self.u[i], a * a, self.k)
            };
            let lap = if i == 0 {
                4.0 * (rep[1] - rep[0]) / (self.r[1] * self.r[1])
            } else {
                let (a, b, c) = stencil(self.r[i - 1], self.r[i], self.r[i + 1]);
                a * rep[i - 1] + b * rep[i] + c * rep[i + 1]
            };
            out[i] = lap - source;
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn one() -> RadialProfile {
        RadialProfile { amplitude: 1.0, exponent: 0.0 }
    }

    #[test]
    fn flat_annulus_is_flat() {
        let p = RadialProfile { amplitude: 1.0, exponent: -3.0 };
        let mesh = uniform_mesh((-2.0f64).exp(), 2.0f64.exp(), 2001);
        let (field, report) = solve_radial(
            p,
            &mesh,
            3,
            Some(RadialBoundary::Flat),
            RadialBoundary::Flat,
            &SolverConfig::default(),
        )
        .unwrap();
        assert!(report.converged);
        let err = field.w.iter().fold(0.0f64, |m, w| m.max(w.abs()));
        assert!(err < 1e-4, "{err}");
    }

    #[test]
    fn disk_decreases_with_radius() {
        let mut last = f64::INFINITY;
        for rho in [4.0, 6.0, 8.0] {
            let mesh = graded_disk_mesh(rho, 1e-3, 0.01, 0.02);
            let bc = RadialBoundary::Value((4.0 * rho * rho / (rho * rho - (rho - 1e-3f64).powi(2)).powi(2)).ln());
            let (field, _) = solve_radial(one(), &mesh, 3, None, bc, &SolverConfig::default()).unwrap();
            assert!(field.center_value() > 0.0 && field.center_value() < last);
            last = field.center_value();
        }
    }

    #[test]
    fn k_one_converges() {
        let mesh = uniform_mesh(0.0, 5.0, 501);
        let (_, report) =
            solve_radial(one(), &mesh, 1, None, RadialBoundary::Value(1.0), &SolverConfig::default()).unwrap();
        assert!(report.converged && report.residual < 1e-9);
    }

    #[test]
    fn residuals_match_report() {
        let mesh = graded_disk_mesh(4.0, 0.0, 0.01, 1.0);
        let (field, report) =
            solve_radial(RadialProfile { amplitude: 1.0, exponent: 1.0 }, &mesh, 3, None, RadialBoundary::Flat, &SolverConfig::default())
                .unwrap();
        let worst = field.residuals().iter().fold(0.0f64, |m, x| m.max(x.abs()));
        assert!((worst - report.residual).abs() <= 1e-12 + 1e-6 * report.residual, "{worst} vs {}", report.residual);
    }
}
