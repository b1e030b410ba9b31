//! Five-point finite differences on a square grid with a disk, annulus or
//! rectangle mask, solved by damped Newton with conjugate-gradient inner
//! solves.

use alloc::collections::VecDeque;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;

use num_traits::Float;

use super::{flat_log_density, wang_rhs, wang_rhs_du, Certificate, SolverConfig, SolverReport};
use crate::differentials::MeromorphicKDifferential;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Domain {
    Disk { radius: f64 },
    Annulus { inner: f64, outer: f64 },
    Rectangle { x0: f64, x1: f64, y0: f64, y1: f64 },
}

impl Domain {
    fn contains(&self, z: Complex64) -> bool {
        match *self {
            Domain::Disk { radius } => z.norm() < radius,
            Domain::Annulus { inner, outer } => {
                let r = z.norm();
                r > inner && r < outer
            }
            Domain::Rectangle { x0, x1, y0, y1 } => z.re > x0 && z.re < x1 && z.im > y0 && z.im < y1,
        }
    }

    fn bounds(&self) -> (f64, f64, f64, f64) {
        match *self {
            Domain::Disk { radius } => (-radius, radius, -radius, radius),
            Domain::Annulus { outer, .. } => (-outer, outer, -outer, outer),
            Domain::Rectangle { x0, x1, y0, y1 } => (x0, x1, y0, y1),
        }
    }

    fn validate(&self) -> Result<()> {
        let ok = match *self {
            Domain::Disk { radius } => radius > 0.0,
            Domain::Annulus { inner, outer } => inner > 0.0 && outer > inner,
            Domain::Rectangle { x0, x1, y0, y1 } => x1 > x0 && y1 > y0,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::Setup(format!("degenerate domain {self:?}")))
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NodeKind {
    Interior,
    /// Dirichlet node: outside the domain with an interior neighbour.
    Boundary,
    Exterior,
}

/// Nodal values of the conformal factor on a masked square grid.
#[derive(Clone, Debug, PartialEq)]
pub struct ScalarField {
    pub x0: f64,
    pub y0: f64,
    pub h: f64,
    pub nx: usize,
    pub ny: usize,
    pub kinds: Vec<NodeKind>,
    pub u: Vec<f64>,
    pub domain: Domain,
    pub k: u32,
}

/// Padding nodes around the domain's bounding box.
const PAD: usize = 3;

impl ScalarField {
    fn layout(domain: Domain, resolution: usize, k: u32) -> Result<ScalarField> {
        domain.validate()?;
        if resolution < 32 {
            return Err(Error::Setup(format!("resolution {resolution} is below 32 nodes across")));
        }
        let (x0, x1, y0, y1) = domain.bounds();
        let h = (x1 - x0).max(y1 - y0) / (resolution - 1) as f64;
        let nx = ((x1 - x0) / h).round() as usize + 1 + 2 * PAD;
        let ny = ((y1 - y0) / h).round() as usize + 1 + 2 * PAD;
        let (gx, gy) = (x0 - PAD as f64 * h, y0 - PAD as f64 * h);
        let mut kinds = vec![NodeKind::Exterior; nx * ny];
        for j in 0..ny {
            for i in 0..nx {
                let z = Complex64::new(gx + i as f64 * h, gy + j as f64 * h);
                if domain.contains(z) {
                    kinds[j * nx + i] = NodeKind::Interior;
                }
            }
        }
        let interior = |i: usize, j: usize| kinds[j * nx + i] == NodeKind::Interior;
        let mut marked = kinds.clone();
        for j in 1..ny - 1 {
            for i in 1..nx - 1 {
                if !interior(i, j)
                    && (interior(i + 1, j) || interior(i - 1, j) || interior(i, j + 1) || interior(i, j - 1))
                {
                    marked[j * nx + i] = NodeKind::Boundary;
                }
            }
        }
        Ok(ScalarField { x0: gx, y0: gy, h, nx, ny, kinds: marked, u: vec![0.0; nx * ny], domain, k })
    }

    pub fn node(&self, i: usize, j: usize) -> Complex64 {
        Complex64::new(self.x0 + i as f64 * self.h, self.y0 + j as f64 * self.h)
    }

    pub fn kind(&self, i: usize, j: usize) -> NodeKind {
        self.kinds[j * self.nx + i]
    }

    pub fn value(&self, i: usize, j: usize) -> f64 {
        self.u[j * self.nx + i]
    }

    /// Indices of active (interior or boundary) nodes in row-major order.
    pub fn active_nodes(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.ny)
            .flat_map(move |j| (0..self.nx).map(move |i| (i, j)))
            .filter(move |&(i, j)| self.kind(i, j) != NodeKind::Exterior)
    }

    /// Discrete residual `Δ_h u − rhs` at an interior node.
    pub fn residual_at(&self, phi: &MeromorphicKDifferential, i: usize, j: usize) -> f64 {
        let idx = j * self.nx + i;
        let lap = (self.u[idx + 1] + self.u[idx - 1] + self.u[idx + self.nx] + self.u[idx - self.nx]
            - 4.0 * self.u[idx])
            / (self.h * self.h);
        lap - wang_rhs(self.u[idx], phi.eval(self.node(i, j)).norm_sqr(), self.k)
    }

    /// Max-norm residual over interior nodes.
    pub fn residual_norm(&self, phi: &MeromorphicKDifferential) -> f64 {
        let mut r: f64 = 0.0;
        for j in 0..self.ny {
            for i in 0..self.nx {
                if self.kind(i, j) == NodeKind::Interior {
                    r = r.max(self.residual_at(phi, i, j).abs());
                }
            }
        }
        r
    }

    /// Minimum of `u − u_flat` over active nodes away from zeros of `φ`.
    pub fn min_flat_gap(&self, phi: &MeromorphicKDifferential) -> f64 {
        self.active_nodes()
            .filter_map(|(i, j)| {
                let f = flat_log_density(phi, self.node(i, j));
                f.is_finite().then(|| self.value(i, j) - f)
            })
            .fold(f64::INFINITY, f64::min)
    }

    fn is_connected(&self) -> bool {
        let start = match self.kinds.iter().position(|&k| k == NodeKind::Interior) {
            Some(s) => s,
            None => return false,
        };
        let mut seen = vec![false; self.kinds.len()];
        let mut queue = VecDeque::from([start]);
        seen[start] = true;
        let mut count = 0;
        while let Some(idx) = queue.pop_front() {
            count += 1;
            for n in [idx + 1, idx - 1, idx + self.nx, idx - self.nx] {
                if self.kinds[n] == NodeKind::Interior && !seen[n] {
                    seen[n] = true;
                    queue.push_back(n);
                }
            }
        }
        count == self.kinds.iter().filter(|&&k| k == NodeKind::Interior).count()
    }
}

/// Compressed interior-node system used by the Newton iteration.
struct System<'a> {
    field: &'a ScalarField,
    /// Grid index of each unknown.
    nodes: Vec<usize>,
    /// Unknown number of each grid index, `usize::MAX` for fixed nodes.
    slot: Vec<usize>,
    phi_sq: Vec<f64>,
}

impl<'a> System<'a> {
    fn new(field: &'a ScalarField, phi: &MeromorphicKDifferential) -> Self {
        let mut slot = vec![usize::MAX; field.kinds.len()];
        let mut nodes = Vec::new();
        let mut phi_sq = Vec::new();
        for j in 0..field.ny {
            for i in 0..field.nx {
                let idx = j * field.nx + i;
                if field.kinds[idx] == NodeKind::Interior {
                    slot[idx] = nodes.len();
                    nodes.push(idx);
                    phi_sq.push(phi.eval(field.node(i, j)).norm_sqr());
                }
            }
        }
        System { field, nodes, slot, phi_sq }
    }

    fn neighbours(&self, idx: usize) -> [usize; 4] {
        let nx = self.field.nx;
        [idx + 1, idx - 1, idx + nx, idx - nx]
    }

    fn residual(&self, u: &[f64], out: &mut [f64]) -> f64 {
        let inv_h2 = 1.0 / (self.field.h * self.field.h);
        let mut norm: f64 = 0.0;
        for (s, &idx) in self.nodes.iter().enumerate() {
            let sum: f64 = self.neighbours(idx).iter().map(|&n| u[n]).sum();
            let r = (sum - 4.0 * u[idx]) * inv_h2 - wang_rhs(u[idx], self.phi_sq[s], self.field.k);
            out[s] = r;
            norm = norm.max(r.abs());
        }
        norm
    }

    /// `y = (−J) x` with `−J = −Δ_h + diag(shift)`, fixed nodes contributing zero.
    fn apply(&self, shift: &[f64], x: &[f64], y: &mut [f64]) {
        let inv_h2 = 1.0 / (self.field.h * self.field.h);
        for (s, &idx) in self.nodes.iter().enumerate() {
            let mut sum = 0.0;
            for n in self.neighbours(idx) {
                let t = self.slot[n];
                if t != usize::MAX {
                    sum += x[t];
                }
            }
            y[s] = (4.0 * x[s] - sum) * inv_h2 + shift[s] * x[s];
        }
    }

    /// Preconditioned CG for `(−J) x = b`; returns the iteration count.
    fn cg(&self, shift: &[f64], b: &[f64], x: &mut [f64], cfg: &SolverConfig) -> usize {
        let n = b.len();
        let inv_h2 = 4.0 / (self.field.h * self.field.h);
        let precond: Vec<f64> = shift
            .iter()
            .map(|s| if cfg.jacobi_preconditioner { 1.0 / (inv_h2 + s) } else { 1.0 })
            .collect();
        x.iter_mut().for_each(|v| *v = 0.0);
        let mut r = b.to_vec();
        let mut z: Vec<f64> = r.iter().zip(&precond).map(|(a, p)| a * p).collect();
        let mut p = z.clone();
        let mut ap = vec![0.0; n];
        let mut rz: f64 = r.iter().zip(&z).map(|(a, b)| a * b).sum();
        let b_norm = b.iter().map(|v| v * v).sum::<f64>().sqrt();
        if b_norm == 0.0 {
            return 0;
        }
        for it in 0..cfg.max_cg {
            self.apply(shift, &p, &mut ap);
            let pap: f64 = p.iter().zip(&ap).map(|(a, b)| a * b).sum();
            let alpha = rz / pap;
            for i in 0..n {
                x[i] += alpha * p[i];
                r[i] -= alpha * ap[i];
            }
            let r_norm = r.iter().map(|v| v * v).sum::<f64>().sqrt();
            if r_norm <= cfg.cg_tol * b_norm {
                return it + 1;
            }
            for i in 0..n {
                z[i] = r[i] * precond[i];
            }
            let rz_new: f64 = r.iter().zip(&z).map(|(a, b)| a * b).sum();
            let beta = rz_new / rz;
            rz = rz_new;
            for i in 0..n {
                p[i] = z[i] + beta * p[i];
            }
        }
        cfg.max_cg
    }
}

pub fn solve_grid(
    phi: &MeromorphicKDifferential,
    domain: Domain,
    resolution: usize,
    cfg: &SolverConfig,
) -> Result<(ScalarField, SolverReport)> {
    let mut field = ScalarField::layout(domain, resolution, phi.k())?;
    if !field.is_connected() {
        return Err(Error::Setup("the active mask is not connected".into()));
    }
    // Boundary data and initial guess max(u_flat, 0).
    for j in 0..field.ny {
        for i in 0..field.nx {
            let idx = j * field.nx + i;
            let z = field.node(i, j);
            let flat = flat_log_density(phi, z);
            match field.kinds[idx] {
                NodeKind::Boundary => {
                    if !flat.is_finite() || phi.eval(z).norm() < 1e-9 * phi.local_scale(z) {
                        return Err(Error::Setup(format!("boundary node {z} touches a zero of phi")));
                    }
                    field.u[idx] = flat;
                }
                NodeKind::Interior => field.u[idx] = flat.max(0.0),
                NodeKind::Exterior => field.u[idx] = if flat.is_finite() { flat } else { 0.0 },
            }
        }
    }
    let system = System::new(&field, phi);
    let mut u = field.u.clone();
    // One Jacobi sweep of the Laplacian on the initial guess.
    let smoothed: Vec<f64> = system
        .nodes
        .iter()
        .map(|&idx| system.neighbours(idx).iter().map(|&n| u[n]).sum::<f64>() / 4.0)
        .collect();
    for (s, &idx) in system.nodes.iter().enumerate() {
        u[idx] = smoothed[s];
    }

    let n = system.nodes.len();
    let mut res = vec![0.0; n];
    let mut trial_res = vec![0.0; n];
    let mut shift = vec![0.0; n];
    let mut delta = vec![0.0; n];
    let mut norm = system.residual(&u, &mut res);
    let mut history = vec![norm];
    let mut iterations = 0;
    while norm > cfg.tol && iterations < cfg.max_newton {
        iterations += 1;
        for (s, &idx) in system.nodes.iter().enumerate() {
            shift[s] = wang_rhs_du(u[idx], system.phi_sq[s], field.k);
        }
        // (−J) δ = F gives the Newton step u ← u + δ.
        system.cg(&shift, &res, &mut delta, cfg);
        let mut lambda = 1.0;
        let mut accepted = false;
        let mut trial = u.clone();
        for _ in 0..=cfg.max_halvings {
            for (s, &idx) in system.nodes.iter().enumerate() {
                trial[idx] = u[idx] + lambda * delta[s];
            }
            let t = system.residual(&trial, &mut trial_res);
            if t.is_finite() && t < norm {
                accepted = true;
                norm = t;
                core::mem::swap(&mut u, &mut trial);
                core::mem::swap(&mut res, &mut trial_res);
                break;
            }
            lambda *= 0.5;
        }
        history.push(norm);
        if !accepted {
            break;
        }
    }
    field.u = u;
    let converged = norm <= cfg.tol;
    if !converged {
        return Err(Error::NonConvergence { iterations, residual: norm });
    }
    let report = SolverReport {
        iterations,
        residual: norm,
        converged,
        certificate: check_subsupersolution(&field, phi, cfg.tol),
        min_flat_gap: field.min_flat_gap(phi),
        history,
    };
    Ok((field, report))
}

/// Nodewise sign of `Δ_h u − rhs` over interior nodes, with tolerance.
pub fn check_subsupersolution(field: &ScalarField, phi: &MeromorphicKDifferential, tol: f64) -> Certificate {
    let (mut sub, mut sup) = (true, true);
    for j in 0..field.ny {
        for i in 0..field.nx {
            if field.kind(i, j) != NodeKind::Interior {
                continue;
            }
            let r = field.residual_at(phi, i, j);
            sub &= r >= -tol;
            sup &= r <= tol;
        }
    }
    match (sub, sup) {
        (true, true) => Certificate::Solution,
        (true, false) => Certificate::Sub,
        (false, true) => Certificate::Super,
        (false, false) => Certificate::Neither,
    }
}

impl ScalarField {
    /// Copy of the grid with `u` replaced by `f(z)` at every node.
    pub fn with_values(&self, f: impl Fn(Complex64) -> f64) -> ScalarField {
        let mut out = self.clone();
        for j in 0..self.ny {
            for i in 0..self.nx {
                out.u[j * self.nx + i] = f(self.node(i, j));
            }
        }
        out
    }
}
