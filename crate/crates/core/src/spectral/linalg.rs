//! Matrix-free Krylov and subspace-iteration kernels on flat `f64` vectors.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Symmetric linear operator on `R^len`.
pub trait LinOp {
    fn len(&self) -> usize;
    fn apply(&self, x: &[f64], y: &mut [f64]);
}

/// Symmetric positive definite preconditioner, `z = M^-1 r`.
pub trait Precond {
    fn apply(&self, r: &[f64], z: &mut [f64]);
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

fn axpy(a: f64, x: &[f64], y: &mut [f64]) {
    y.iter_mut().zip(x).for_each(|(y, x)| *y += a * x);
}

#[derive(Debug, Clone, Copy)]
pub struct CgOutcome {
    pub iterations: usize,
    pub rel_residual: f64,
    pub converged: bool,
}

/// Preconditioned CG for `(op + shift) x = b`, starting from the given `x`.
pub fn cg(
    op: &dyn LinOp,
    shift: f64,
    b: &[f64],
    x: &mut [f64],
    tol: f64,
    max_iter: usize,
    precond: Option<&dyn Precond>,
) -> CgOutcome {
    let n = op.len();
    let bnorm = norm(b);
    if bnorm == 0.0 {
        x.fill(0.0);
        return CgOutcome { iterations: 0, rel_residual: 0.0, converged: true };
    }
    let mut r = vec![0.0; n];
    let mut ap = vec![0.0; n];
    op.apply(x, &mut ap);
    for i in 0..n {
        r[i] = b[i] - ap[i] - shift * x[i];
    }
    let mut z = vec![0.0; n];
    let precondition = |r: &[f64], z: &mut [f64]| match precond {
        Some(m) => m.apply(r, z),
        None => z.copy_from_slice(r),
    };
    precondition(&r, &mut z);
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    let mut res = norm(&r) / bnorm;
    let mut it = 0;
    while res > tol && it < max_iter {
        op.apply(&p, &mut ap);
        axpy(shift, &p, &mut ap);
        let pap = dot(&p, &ap);
        if pap <= 0.0 {
            break;
        }
        let alpha = rz / pap;
        axpy(alpha, &p, x);
        axpy(-alpha, &ap, &mut r);
        it += 1;
        res = norm(&r) / bnorm;
        if res <= tol {
            break;
        }
        precondition(&r, &mut z);
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    CgOutcome { iterations: it, rel_residual: res, converged: res <= tol }
}

/// Orthonormalise in place (two passes of modified Gram-Schmidt), dropping
/// vectors that become numerically dependent.
pub fn orthonormalize(vs: &mut Vec<Vec<f64>>) {
    let mut out: Vec<Vec<f64>> = Vec::with_capacity(vs.len());
    for mut v in vs.drain(..) {
        let n0 = norm(&v);
        for _ in 0..2 {
            for q in &out {
                let c = dot(q, &v);
                axpy(-c, q, &mut v);
            }
        }
        let nv = norm(&v);
        if nv > 1e-10 * n0.max(f64::MIN_POSITIVE) && nv > 0.0 {
            v.iter_mut().for_each(|x| *x /= nv);
            out.push(v);
        }
    }
    *vs = out;
}

pub fn random_block(len: usize, count: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|_| (0..len).map(|_| rng.gen_range(-1.0..1.0)).collect()).collect()
}

#[derive(Debug, Clone)]
pub struct EigOutcome {
    /// Ritz values, ascending.
    pub values: Vec<f64>,
    pub vectors: Vec<Vec<f64>>,
    pub iterations: usize,
    /// `||op v - value v||` of the lowest pair (unit `v`).
    pub residual: f64,
    pub cg_iterations: usize,
}

pub struct SubspaceOptions<'a> {
    pub block: usize,
    pub shift: f64,
    pub tol: f64,
    pub max_iter: usize,
    pub cg_tol: f64,
    pub cg_max_iter: usize,
    pub precond: Option<&'a dyn Precond>,
    pub seed: u64,
}

/// Rayleigh-Ritz on `span(vs)`; returns ascending values, Ritz vectors and
/// their images under `op`.
fn rayleigh_ritz(op: &dyn LinOp, vs: &[Vec<f64>]) -> (Vec<f64>, Vec<Vec<f64>>, Vec<Vec<f64>>) {
    let m = vs.len();
    let n = op.len();
    let images: Vec<Vec<f64>> = vs
        .iter()
        .map(|v| {
            let mut y = vec![0.0; n];
            op.apply(v, &mut y);
            y
        })
        .collect();
    let h = DMatrix::from_fn(m, m, |i, j| 0.5 * (dot(&vs[i], &images[j]) + dot(&vs[j], &images[i])));
    let eig = SymmetricEigen::new(h);
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let combine = |src: &[Vec<f64>], k: usize| {
        let mut out = vec![0.0; n];
        for (j, s) in src.iter().enumerate() {
            axpy(eig.eigenvectors[(j, k)], s, &mut out);
        }
        out
    };
    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let vectors = order.iter().map(|&k| combine(vs, k)).collect();
    let imgs = order.iter().map(|&k| combine(&images, k)).collect();
    (values, vectors, imgs)
}

/// Lowest eigenpairs of a symmetric positive semidefinite operator by block
/// inverse iteration on `op + shift` with CG inner solves.
pub fn lowest_eigenpairs(
    op: &dyn LinOp,
    opts: &SubspaceOptions,
    init: Option<Vec<Vec<f64>>>,
) -> Result<EigOutcome> {
    let n = op.len();
    let block = opts.block.min(n).max(1);
    let mut x = init.unwrap_or_default();
    x.truncate(block);
    if x.len() < block {
        x.extend(random_block(n, block - x.len(), opts.seed));
    }
    orthonormalize(&mut x);
    let (mut values, mut x, mut imgs) = rayleigh_ritz(op, &x);
    let mut cg_total = 0;
    let mut residual = f64::INFINITY;
    for it in 0..=opts.max_iter {
        let r: Vec<f64> = imgs[0].iter().zip(&x[0]).map(|(a, v)| a - values[0] * v).collect();
        residual = norm(&r);
        if residual <= opts.tol {
            return Ok(EigOutcome { values, vectors: x, iterations: it, residual, cg_iterations: cg_total });
        }
        if it == opts.max_iter {
            break;
        }
        let mut y = Vec::with_capacity(x.len());
        for (v, theta) in x.iter().zip(&values) {
            let mut sol: Vec<f64> = v.iter().map(|a| a / (theta + opts.shift)).collect();
            let out = cg(op, opts.shift, v, &mut sol, opts.cg_tol, opts.cg_max_iter, opts.precond);
            cg_total += out.iterations;
            y.push(sol);
        }
        orthonormalize(&mut y);
        if y.is_empty() {
            break;
        }
        (values, x, imgs) = rayleigh_ritz(op, &y);
    }
    Err(Error::SolverStagnation { iterations: opts.max_iter, residual })
}

/// Dense matrix of an operator by applying it to unit vectors.
pub fn assemble_dense(op: &dyn LinOp) -> DMatrix<f64> {
    let n = op.len();
    let mut m = DMatrix::zeros(n, n);
    let mut e = vec![0.0; n];
    let mut y = vec![0.0; n];
    for j in 0..n {
        e[j] = 1.0;
        op.apply(&e, &mut y);
        for i in 0..n {
            m[(i, j)] = y[i];
        }
        e[j] = 0.0;
    }
    m
}
