//! Wang's equation `Δu = 2(e^u − e^{(1−k)u}|φ|²)` on grids and radial meshes.

mod bounds;
mod grid;
mod radial;

pub use bounds::{bessel_i0, bessel_i1, coarse_bound, fine_bound, xi};
pub use grid::{check_subsupersolution, solve_grid, Domain, NodeKind, ScalarField};
pub use radial::{graded_disk_mesh, solve_radial, uniform_mesh, RadialBoundary, RadialField, RadialProfile};

use num_complex::Complex64;

use num_traits::Float;

use crate::differentials::MeromorphicKDifferential;

/// `u_flat = (2/k)·log|φ(z)|`; `−∞` at zeros of `φ`.
pub fn flat_log_density(phi: &MeromorphicKDifferential, z: Complex64) -> f64 {
    let m = phi.eval(z).norm();
    if m == 0.0 {
        return f64::NEG_INFINITY;
    }
    2.0 / phi.k() as f64 * m.ln()
}

/// Gradient `(∂ₓ, ∂ᵧ)` of `u_flat`, from `∂ₓ − i∂ᵧ = (2/k)·φ'/φ`.
pub fn flat_log_gradient(phi: &MeromorphicKDifferential, z: Complex64) -> (f64, f64) {
    let g = phi.eval_derivative(z) / phi.eval(z) * (2.0 / phi.k() as f64);
    (g.re, -g.im)
}

/// Right-hand side `2(e^u − e^{(1−k)u}|φ|²)`.
pub fn wang_rhs(u: f64, phi_sq: f64, k: u32) -> f64 {
    2.0 * (u.exp() - ((1.0 - k as f64) * u).exp() * phi_sq)
}

/// Derivative of [`wang_rhs`] in `u`.
pub fn wang_rhs_du(u: f64, phi_sq: f64, k: u32) -> f64 {
    let kf = k as f64;
    2.0 * (u.exp() + (kf - 1.0) * ((1.0 - kf) * u).exp() * phi_sq)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SolverConfig {
    /// Max-norm tolerance on the discrete residual.
    pub tol: f64,
    /// Relative tolerance of the inner conjugate-gradient solves.
    pub cg_tol: f64,
    pub max_newton: usize,
    pub max_halvings: usize,
    pub max_cg: usize,
    /// Use the diagonal of the linearization as CG preconditioner.
    pub jacobi_preconditioner: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            tol: 1e-10,
            cg_tol: 1e-12,
            max_newton: 60,
            max_halvings: 20,
            max_cg: 50_000,
            jacobi_preconditioner: true,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Certificate {
    Sub,
    Super,
    Solution,
    Neither,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SolverReport {
    pub iterations: usize,
    /// Max over active nodes of `|Δ_h u − 2(e^u − e^{(1−k)u}|φ|²)|`.
    pub residual: f64,
    pub converged: bool,
    pub certificate: Certificate,
    /// Minimum of `u − u_flat` over nodes where `φ ≠ 0`.
    pub min_flat_gap: f64,
    /// Residual history, one entry per Newton iteration (initial guess first).
    pub history: alloc::vec::Vec<f64>,
}
