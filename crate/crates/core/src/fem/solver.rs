//! Linear solvers for the reduced symmetric positive definite systems.
//!
//! The direct path reorders the unknowns with reverse Cuthill-McKee and
//! factors the envelope (skyline) of the permuted matrix. Structured grids,
//! periodic ones included, keep a bandwidth of about two grid lines under
//! this ordering, so the factor stays small at the resolutions used here.
//! The iterative path is conjugate gradients with a Jacobi preconditioner.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use super::sparse::CsrMatrix;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum SolverMethod {
    DirectFactorization,
    ConjugateGradient,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", default)]
pub struct SolverConfig {
    pub method: SolverMethod,
    /// Relative residual target of the iterative solver.
    pub tolerance: f64,
    pub max_iterations: usize,
    /// Gauss points per direction used in assembly.
    pub quadrature_order: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            method: SolverMethod::DirectFactorization,
            tolerance: 1e-10,
            max_iterations: 20_000,
            quadrature_order: 2,
        }
    }
}

impl SolverConfig {
    pub fn conjugate_gradient() -> Self {
        SolverConfig { method: SolverMethod::ConjugateGradient, ..Default::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.tolerance > 0.0 && self.tolerance <= 1e-4) {
            return Err(Error::validation("solver.tolerance", "must lie in (0, 1e-4]"));
        }
        if self.quadrature_order < 2 {
            return Err(Error::validation("solver.quadratureOrder", "must be at least 2"));
        }
        if self.max_iterations == 0 {
            return Err(Error::validation("solver.maxIterations", "must be positive"));
        }
        Ok(())
    }
}

/// Solves `op x = rhs`.
pub fn solve(op: &CsrMatrix, rhs: &[f64], cfg: &SolverConfig) -> Result<Vec<f64>> {
    PreparedSolver::new(op, cfg)?.solve(rhs)
}

/// A solver bound to one operator, reusable for several right-hand sides.
#[derive(Debug)]
pub enum PreparedSolver<'a> {
    Direct(EnvelopeCholesky),
    Iterative { op: &'a CsrMatrix, inv_diag: Vec<f64>, cfg: SolverConfig },
}

impl<'a> PreparedSolver<'a> {
    pub fn new(op: &'a CsrMatrix, cfg: &SolverConfig) -> Result<Self> {
        match cfg.method {
            SolverMethod::DirectFactorization => Ok(PreparedSolver::Direct(EnvelopeCholesky::new(op)?)),
            SolverMethod::ConjugateGradient => {
                let inv_diag = op
                    .diagonal()
                    .iter()
                    .enumerate()
                    .map(
                        |(i, &d)| {
                            if d > 0.0 {
                                Ok(1.0 / d)
                            } else {
                                Err(Error::SingularSystem { pivot: i, value: d })
                            }
                        },
                    )
                    .collect::<Result<Vec<_>>>()?;
                Ok(PreparedSolver::Iterative { op, inv_diag, cfg: *cfg })
            }
        }
    }

    pub fn solve(&self, rhs: &[f64]) -> Result<Vec<f64>> {
        match self {
            PreparedSolver::Direct(chol) => Ok(chol.solve(rhs)),
            PreparedSolver::Iterative { op, inv_diag, cfg } => {
                preconditioned_cg(op, inv_diag, rhs, cfg.tolerance, cfg.max_iterations)
            }
        }
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn preconditioned_cg(op: &CsrMatrix, inv_diag: &[f64], rhs: &[f64], tol: f64, max_iter: usize) -> Result<Vec<f64>> {
    let n = rhs.len();
    let mut x = vec![0.0; n];
    let bnorm = dot(rhs, rhs).sqrt();
    if bnorm == 0.0 {
        return Ok(x);
    }
    let mut r = rhs.to_vec();
    let mut z: Vec<f64> = r.iter().zip(inv_diag).map(|(a, d)| a * d).collect();
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    for it in 0..max_iter {
        let ap = op.mul_vec(&p);
        let pap = dot(&p, &ap);
        if pap <= 0.0 {
            return Err(Error::SingularSystem { pivot: it, value: pap });
        }
        let alpha = rz / pap;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        let rnorm = dot(&r, &r).sqrt();
        if rnorm <= tol * bnorm {
            return Ok(x);
        }
        for i in 0..n {
            z[i] = r[i] * inv_diag[i];
        }
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    let res = op.mul_vec(&x).iter().zip(rhs).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
    Err(Error::SolverDiverged { iterations: max_iter, residual: res / bnorm })
}

/// Reverse Cuthill-McKee ordering: `perm[k]` is the original index placed
/// at position `k`.
pub fn reverse_cuthill_mckee(adjacency: &[Vec<usize>]) -> Vec<usize> {
    let n = adjacency.len();
    let degree: Vec<usize> = adjacency.iter().map(Vec::len).collect();
    let mut visited = vec![false; n];
    let mut order = Vec::with_capacity(n);
    let mut queue = VecDeque::new();
    while order.len() < n {
        let seed = (0..n).filter(|&i| !visited[i]).min_by_key(|&i| (degree[i], i)).unwrap();
        let start = pseudo_peripheral(adjacency, &degree, seed);
        visited[start] = true;
        queue.push_back(start);
        while let Some(v) = queue.pop_front() {
            order.push(v);
            let mut nbrs: Vec<usize> = adjacency[v].iter().copied().filter(|&w| !visited[w]).collect();
            nbrs.sort_by_key(|&w| (degree[w], w));
            nbrs.dedup();
            for w in nbrs {
                visited[w] = true;
                queue.push_back(w);
            }
        }
    }
    order.reverse();
    order
}

fn bfs_levels(adjacency: &[Vec<usize>], start: usize) -> Vec<usize> {
    let mut level = vec![usize::MAX; adjacency.len()];
    let mut queue = VecDeque::from([start]);
    level[start] = 0;
    while let Some(v) = queue.pop_front() {
        for &w in &adjacency[v] {
            if level[w] == usize::MAX {
                level[w] = level[v] + 1;
                queue.push_back(w);
            }
        }
    }
    level
}

fn pseudo_peripheral(adjacency: &[Vec<usize>], degree: &[usize], seed: usize) -> usize {
    let mut current = seed;
    let mut ecc = 0;
    for _ in 0..8 {
        let level = bfs_levels(adjacency, current);
        let max = level.iter().copied().filter(|&l| l != usize::MAX).max().unwrap_or(0);
        if max <= ecc && current != seed {
            break;
        }
        ecc = max;
        let far = (0..adjacency.len()).filter(|&i| level[i] == max).min_by_key(|&i| (degree[i], i)).unwrap();
        if far == current {
            break;
        }
        current = far;
    }
    current
}

/// Cholesky factor `L L^T = P A P^T` stored row-wise over the envelope.
#[derive(Debug, Clone)]
pub struct EnvelopeCholesky {
    perm: Vec<usize>,
    first: Vec<usize>,
    row_start: Vec<usize>,
    data: Vec<f64>,
}

impl EnvelopeCholesky {
    pub fn new(op: &CsrMatrix) -> Result<Self> {
        let n = op.dim();
        let perm = reverse_cuthill_mckee(&op.adjacency());
        let mut inv = vec![0usize; n];
        for (k, &p) in perm.iter().enumerate() {
            inv[p] = k;
        }
        // envelope of the lower triangle of the permuted matrix
        let mut first: Vec<usize> = (0..n).collect();
        for (i, j, _) in op.iter() {
            let (pi, pj) = (inv[i], inv[j]);
            if pj < pi && pj < first[pi] {
                first[pi] = pj;
            }
        }
        let mut row_start = Vec::with_capacity(n + 1);
        row_start.push(0);
        for i in 0..n {
            row_start.push(row_start[i] + (i - first[i] + 1));
        }
        let mut data = vec![0.0; row_start[n]];
        for (i, j, v) in op.iter() {
            let (pi, pj) = (inv[i], inv[j]);
            if pj <= pi {
                data[row_start[pi] + pj - first[pi]] += v;
            }
        }
        let scale = op.diagonal().iter().fold(0.0f64, |m, d| m.max(d.abs()));
        for i in 0..n {
            let fi = first[i];
            let ri = row_start[i];
            for j in fi..i {
                let fj = first[j];
                let rj = row_start[j];
                let k0 = fi.max(fj);
                let mut s = data[ri + j - fi];
                let li = &data[ri + k0 - fi..ri + j - fi];
                let lj = &data[rj + k0 - fj..rj + j - fj];
                s -= li.iter().zip(lj).map(|(a, b)| a * b).sum::<f64>();
                data[ri + j - fi] = s / data[rj + j - fj];
            }
            let row = &data[ri..ri + i - fi];
            let d = data[ri + i - fi] - row.iter().map(|v| v * v).sum::<f64>();
            if !d.is_finite() || d <= 1e-14 * scale {
                return Err(Error::SingularSystem { pivot: perm[i], value: d });
            }
            data[ri + i - fi] = d.sqrt();
        }
        Ok(EnvelopeCholesky { perm, first, row_start, data })
    }

    pub fn dim(&self) -> usize {
        self.perm.len()
    }

    /// Number of stored factor entries.
    pub fn envelope_size(&self) -> usize {
        self.data.len()
    }

    pub fn solve(&self, rhs: &[f64]) -> Vec<f64> {
        let n = self.dim();
        let mut y: Vec<f64> = self.perm.iter().map(|&p| rhs[p]).collect();
        for i in 0..n {
            let (fi, ri) = (self.first[i], self.row_start[i]);
            let row = &self.data[ri..ri + i - fi];
            let s: f64 = row.iter().zip(&y[fi..i]).map(|(a, b)| a * b).sum();
            y[i] = (y[i] - s) / self.data[ri + i - fi];
        }
        for i in (0..n).rev() {
            let (fi, ri) = (self.first[i], self.row_start[i]);
            y[i] /= self.data[ri + i - fi];
            let yi = y[i];
            for (k, l) in self.data[ri..ri + i - fi].iter().enumerate() {
                y[fi + k] -= l * yi;
            }
        }
        let mut x = vec![0.0; n];
        for (k, &p) in self.perm.iter().enumerate() {
            x[p] = y[k];
        }
        x
    }
}
