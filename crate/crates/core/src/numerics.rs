//! Shared numerical kernels: deterministic reductions, Gauss quadrature,
//! and Krylov solvers for the sparse systems assembled by the solver.

use crate::error::{Error, Result};
use nalgebra::DMatrix;

/// Pairwise summation in a fixed split order. The result depends only on the
/// input order, never on thread count.
pub fn pairwise_sum(values: &[f64]) -> f64 {
    const BLOCK: usize = 32;
    if values.len() <= BLOCK {
        let mut s = 0.0;
        for v in values {
            s += v;
        }
        return s;
    }
    let mid = values.len() / 2;
    pairwise_sum(&values[..mid]) + pairwise_sum(&values[mid..])
}

pub fn pairwise_sum_by<F: Fn(usize) -> f64>(n: usize, f: F) -> f64 {
    fn rec<F: Fn(usize) -> f64>(lo: usize, hi: usize, f: &F) -> f64 {
        if hi - lo <= 32 {
            let mut s = 0.0;
            for i in lo..hi {
                s += f(i);
            }
            return s;
        }
        let mid = lo + (hi - lo) / 2;
        rec(lo, mid, f) + rec(mid, hi, f)
    }
    rec(0, n, &f)
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    pairwise_sum_by(a.len(), |i| a[i] * b[i])
}

pub fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Gauss-Legendre nodes and weights on [-1, 1].
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

/// Composite Gauss rule on [0, 1] with panels graded geometrically toward 0,
/// so integrands like `s^l` with non-integer `l` keep relative error near
/// machine precision.
#[derive(Clone, Debug)]
pub struct GradedRule {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GradedRule {
    pub fn new(levels: usize, order: usize) -> Self {
        let (gx, gw) = gauss_legendre(order);
        let mut nodes = Vec::with_capacity(levels * order);
        let mut weights = Vec::with_capacity(levels * order);
        // panels [0, 2^-(levels-1)], then [2^-(j+1), 2^-j]
        let mut edges = vec![0.0];
        for j in (0..levels).rev() {
            edges.push(0.5f64.powi(j as i32));
        }
        for w in edges.windows(2) {
            let (a, b) = (w[0], w[1]);
            let half = 0.5 * (b - a);
            let mid = 0.5 * (a + b);
            for (x, wt) in gx.iter().zip(&gw) {
                nodes.push(mid + half * x);
                weights.push(half * wt);
            }
        }
        Self { nodes, weights }
    }

    pub fn points(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.nodes.iter().copied().zip(self.weights.iter().copied())
    }

    pub fn integrate<F: Fn(f64) -> f64>(&self, f: F) -> f64 {
        pairwise_sum_by(self.nodes.len(), |i| self.weights[i] * f(self.nodes[i]))
    }
}

impl Default for GradedRule {
    fn default() -> Self {
        GradedRule::new(48, 16)
    }
}

/// Compressed sparse rows with `block` x `block` dense blocks flattened to
/// scalar entries.
#[derive(Clone, Debug)]
pub struct SparseMatrix {
    pub n: usize,
    pub row_ptr: Vec<usize>,
    pub cols: Vec<usize>,
    pub vals: Vec<f64>,
    pub block: usize,
}

impl SparseMatrix {
    pub fn apply(&self, x: &[f64], y: &mut [f64]) {
        for r in 0..self.n {
            let mut s = 0.0;
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                s += self.vals[k] * x[self.cols[k]];
            }
            y[r] = s;
        }
    }

    pub fn is_symmetric(&self, tol: f64) -> bool {
        for r in 0..self.n {
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                let c = self.cols[k];
                let v = self.vals[k];
                let t = self.get(c, r);
                if (v - t).abs() > tol * (v.abs() + t.abs()).max(1e-300) {
                    return false;
                }
            }
        }
        true
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        let slice = &self.cols[self.row_ptr[r]..self.row_ptr[r + 1]];
        match slice.binary_search(&c) {
            Ok(k) => self.vals[self.row_ptr[r] + k],
            Err(_) => 0.0,
        }
    }

    /// Inverses of the diagonal blocks, used as a block-Jacobi preconditioner.
    fn block_jacobi(&self) -> Result<Vec<DMatrix<f64>>> {
        let b = self.block;
        let cells = self.n / b;
        let mut out = Vec::with_capacity(cells);
        for cell in 0..cells {
            let mut d = DMatrix::zeros(b, b);
            for i in 0..b {
                for j in 0..b {
                    d[(i, j)] = self.get(cell * b + i, cell * b + j);
                }
            }
            let inv = d
                .try_inverse()
                .ok_or_else(|| Error::Domain(format!("singular diagonal block at cell {cell}")))?;
            out.push(inv);
        }
        Ok(out)
    }
}

fn precondition(inv: &[DMatrix<f64>], b: usize, r: &[f64], z: &mut [f64]) {
    for (cell, m) in inv.iter().enumerate() {
        let base = cell * b;
        for i in 0..b {
            let mut s = 0.0;
            for j in 0..b {
                s += m[(i, j)] * r[base + j];
            }
            z[base + i] = s;
        }
    }
}

#[derive(Clone, Copy, Debug)]
pub struct SolveStats {
    pub iterations: usize,
    pub relative_residual: f64,
}

/// Relative residual accepted when CG restarts no longer reduce the true
/// residual below the requested tolerance.
const STAGNATION_FLOOR: f64 = 1e-8;

/// Solves `A x = rhs` starting from `x`. Conjugate gradients when `A` is
/// symmetric, BiCGSTAB otherwise; block-Jacobi preconditioned either way.
pub fn solve(a: &SparseMatrix, rhs: &[f64], x: &mut [f64], tol: f64, max_iter: usize) -> Result<SolveStats> {
    let inv = a.block_jacobi()?;
    if a.is_symmetric(1e-14) {
        pcg(a, &inv, rhs, x, tol, max_iter)
    } else {
        bicgstab(a, &inv, rhs, x, tol, max_iter)
    }
}

fn residual(a: &SparseMatrix, rhs: &[f64], x: &[f64]) -> Vec<f64> {
    let mut r = vec![0.0; rhs.len()];
    a.apply(x, &mut r);
    for (ri, bi) in r.iter_mut().zip(rhs) {
        *ri = bi - *ri;
    }
    r
}

fn pcg(
    a: &SparseMatrix,
    inv: &[DMatrix<f64>],
    rhs: &[f64],
    x: &mut [f64],
    tol: f64,
    max_iter: usize,
) -> Result<SolveStats> {
    let n = rhs.len();
    let bnorm = norm2(rhs).max(1e-300);
    let mut r = residual(a, rhs, x);
    let mut rel = norm2(&r) / bnorm;
    if rel <= tol {
        return Ok(SolveStats { iterations: 0, relative_residual: rel });
    }
    let mut z = vec![0.0; n];
    precondition(inv, a.block, &r, &mut z);
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    let mut ap = vec![0.0; n];
    let mut last_true = f64::INFINITY;
    for it in 1..=max_iter {
        a.apply(&p, &mut ap);
        let pap = dot(&p, &ap);
        if pap <= 0.0 || !pap.is_finite() {
            return Err(Error::LinearSolve { iterations: it, residual: rel });
        }
        let alpha = rz / pap;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        rel = norm2(&r) / bnorm;
        if rel <= tol {
            // recompute the true residual to guard against drift
            let true_r = residual(a, rhs, x);
            let true_rel = norm2(&true_r) / bnorm;
            if true_rel <= tol * 10.0 {
                return Ok(SolveStats { iterations: it, relative_residual: true_rel });
            }
            // rounding floor: restarts stopped paying off
            if true_rel > 0.5 * last_true && true_rel <= STAGNATION_FLOOR {
                return Ok(SolveStats { iterations: it, relative_residual: true_rel });
            }
            last_true = true_rel;
            r = true_r;
            rel = true_rel;
            precondition(inv, a.block, &r, &mut z);
            p.copy_from_slice(&z);
            rz = dot(&r, &z);
            continue;
        }
        precondition(inv, a.block, &r, &mut z);
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    Err(Error::LinearSolve { iterations: max_iter, residual: rel })
}

fn bicgstab(
    a: &SparseMatrix,
    inv: &[DMatrix<f64>],
    rhs: &[f64],
    x: &mut [f64],
    tol: f64,
    max_iter: usize,
) -> Result<SolveStats> {
    let n = rhs.len();
    let bnorm = norm2(rhs).max(1e-300);
    let mut r = residual(a, rhs, x);
    let mut rel = norm2(&r) / bnorm;
    if rel <= tol {
        return Ok(SolveStats { iterations: 0, relative_residual: rel });
    }
    let r_hat = r.clone();
    let (mut rho, mut alpha, mut omega) = (1.0, 1.0, 1.0);
    let mut v = vec![0.0; n];
    let mut p = vec![0.0; n];
    let mut y = vec![0.0; n];
    let mut s = vec![0.0; n];
    let mut zs = vec![0.0; n];
    let mut t = vec![0.0; n];
    for it in 1..=max_iter {
        let rho_new = dot(&r_hat, &r);
        if rho_new == 0.0 || !rho_new.is_finite() {
            return Err(Error::LinearSolve { iterations: it, residual: rel });
        }
        let beta = (rho_new / rho) * (alpha / omega);
        rho = rho_new;
        for i in 0..n {
            p[i] = r[i] + beta * (p[i] - omega * v[i]);
        }
        precondition(inv, a.block, &p, &mut y);
        a.apply(&y, &mut v);
        alpha = rho / dot(&r_hat, &v);
        for i in 0..n {
            s[i] = r[i] - alpha * v[i];
        }
        if norm2(&s) / bnorm <= tol {
            for i in 0..n {
                x[i] += alpha * y[i];
            }
            let true_rel = norm2(&residual(a, rhs, x)) / bnorm;
            return Ok(SolveStats { iterations: it, relative_residual: true_rel });
        }
        precondition(inv, a.block, &s, &mut zs);
        a.apply(&zs, &mut t);
        omega = dot(&t, &s) / dot(&t, &t);
        for i in 0..n {
            x[i] += alpha * y[i] + omega * zs[i];
            r[i] = s[i] - omega * t[i];
        }
        rel = norm2(&r) / bnorm;
        if !rel.is_finite() {
            return Err(Error::LinearSolve { iterations: it, residual: rel });
        }
        if rel <= tol {
            let true_rel = norm2(&residual(a, rhs, x)) / bnorm;
            if true_rel <= tol * 10.0 {
                return Ok(SolveStats { iterations: it, relative_residual: true_rel });
            }
        }
    }
    Err(Error::LinearSolve { iterations: max_iter, residual: rel })
}

/// Operator 2-norm (largest singular value).
pub fn op_norm(m: &DMatrix<f64>) -> f64 {
    if m.nrows() == 0 {
        return 0.0;
    }
    m.clone().singular_values().max()
}

pub fn frobenius(m: &DMatrix<f64>) -> f64 {
    m.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// Smallest and largest eigenvalue of the symmetric part.
pub fn sym_eig_extremes(m: &DMatrix<f64>) -> (f64, f64) {
    let sym = (m + m.transpose()) * 0.5;
    let eig = sym.symmetric_eigenvalues();
    (eig.min(), eig.max())
}
