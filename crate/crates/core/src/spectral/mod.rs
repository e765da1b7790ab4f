//! Least eigenvalues of `d_A^* d_A` on 0-forms and of `dbar_A dbar_A^*` on
//! (0,2)-forms, Laplace solves, dense small-grid oracles and continuity sweeps.

pub mod dense;
pub mod linalg;
pub mod ops;
pub mod precond;
pub(crate) mod rankone;

use serde::{Deserialize, Serialize};

use crate::algebra::GroupKind;
use crate::error::{Error, Result};
use crate::gauge::{random_field, Connection};
use crate::lattice::{lp_norm, CForm, Form};

use linalg::{cg, lowest_eigenpairs, SubspaceOptions};
use ops::{DelbarOp, LaplaceOp};
use precond::{FlatInverse, TwoLevel};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SpectralConfig {
    /// Eigen-residual target `||Op v - value v|| / ||v||`.
    pub tol: f64,
    pub max_iter: usize,
    /// Relative residual target of CG solves.
    pub cg_tol: f64,
    pub cg_max_iter: usize,
    /// Random starts of the constrained minimisation (plus one start from the
    /// unconstrained eigenvector).
    pub restarts: usize,
    pub lambda_floor: f64,
    /// Shift used by inverse iteration.
    pub shift: f64,
    pub seed: u64,
}

impl Default for SpectralConfig {
    fn default() -> Self {
        Self {
            tol: 1e-8,
            max_iter: 300,
            cg_tol: 1e-10,
            cg_max_iter: 5000,
            restarts: 8,
            lambda_floor: 1e-3,
            shift: 1.0,
            seed: 0,
        }
    }
}

impl SpectralConfig {
    pub fn validate(&self) -> Result<()> {
        let ok = self.tol > 0.0
            && self.max_iter > 0
            && self.cg_tol > 0.0
            && self.cg_max_iter > 0
            && self.restarts > 0
            && self.lambda_floor > 0.0
            && self.shift > 0.0;
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidArgument("spectral config values must be positive".into()))
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Witness {
    /// Real 0-form eigenvector.
    Section(Form),
    /// Coefficient `c` of the (0,2)-form `c dzbar^1 ^ dzbar^2`.
    Coefficient(CForm),
}

#[derive(Debug, Clone, PartialEq)]
pub struct EigenResult {
    pub value: f64,
    pub witness: Witness,
    pub iterations: usize,
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MuResult {
    /// Best value over the rank-one cone.
    pub constrained: EigenResult,
    /// Smallest eigenvalue over all (0,2)-forms.
    pub unconstrained: EigenResult,
    /// Final value of every restart, in restart order.
    pub restart_values: Vec<f64>,
}

fn lambda_options<'a>(cfg: &SpectralConfig, block: usize, pc: &'a FlatInverse) -> SubspaceOptions<'a> {
    SubspaceOptions {
        block,
        shift: cfg.shift,
        tol: cfg.tol,
        max_iter: cfg.max_iter,
        cg_tol: cfg.cg_tol,
        cg_max_iter: cfg.cg_max_iter,
        precond: Some(pc),
        seed: cfg.seed,
    }
}

/// Smallest eigenvalue of `nabla_A^* nabla_A` on Lie-valued 0-forms.
pub fn lambda_a(conn: &Connection, cfg: &SpectralConfig) -> Result<EigenResult> {
    cfg.validate()?;
    let op = LaplaceOp::new(conn);
    let dim = conn.group().dim();
    let pc = FlatInverse::new(conn.grid(), dim, 1.0, cfg.shift);
    let out = lowest_eigenpairs(&op, &lambda_options(cfg, dim + 2, &pc), None)?;
    let v = out.vectors.into_iter().next().expect("nonempty block");
    Ok(EigenResult {
        value: out.values[0],
        witness: Witness::Section(Form::from_data(conn.grid(), conn.group(), 0, v)?),
        iterations: out.iterations,
        residual: out.residual,
    })
}

/// Real dimension of the kernel of the flat lattice `dbar^*` on (0,2)-forms.
/// Besides constants, forward differences admit the modes `e^{2 pi i k.x}`
/// with `(k_0, k_1)` and `(k_2, k_3)` in `{(0, 0), (3n/4, n/4)}` when `4 | n`.
/// Each complex mode is a pair `(v, iv)` in the real representation.
pub fn flat_delbar_kernel(n: usize, dim: usize) -> usize {
    let per_pair = if n % 4 == 0 { 2 } else { 1 };
    2 * dim * per_pair * per_pair
}

/// Smallest eigenvalue of `dbar_A dbar_A^*` on all (0,2)-forms.
pub fn mu_unconstrained(conn: &Connection, cfg: &SpectralConfig) -> Result<EigenResult> {
    cfg.validate()?;
    let op = DelbarOp::new(conn);
    let dim = conn.group().dim();
    let pc = FlatInverse::delbar(conn.grid(), dim, cfg.shift);
    let out = lowest_eigenpairs(&op, &lambda_options(cfg, flat_delbar_kernel(conn.grid().n(), dim) + 2, &pc), None)?;
    let v = out.vectors.into_iter().next().expect("nonempty block");
    Ok(EigenResult {
        value: out.values[0],
        witness: Witness::Coefficient(ops::unstack(conn.grid(), conn.group(), &v)),
        iterations: out.iterations,
        residual: out.residual,
    })
}

fn normalize_sections(sigma: &mut [f64], dim: usize) {
    for v in sigma.chunks_mut(dim) {
        let r = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if r > 1e-12 {
            v.iter_mut().for_each(|x| *x /= r);
        } else {
            v.fill(0.0);
            v[0] = 1.0;
        }
    }
}

/// Least value of `||dbar_A^* phi||^2 / ||phi||^2` over rank-one (0,2)-forms
/// `phi = f sigma dzbar^1 ^ dzbar^2`, together with the unconstrained value.
pub fn mu_a(conn: &Connection, cfg: &SpectralConfig) -> Result<MuResult> {
    mu_a_from(conn, cfg, None)
}

/// As [`mu_a`], trying `start` (a coefficient field, retracted to the cone)
/// before the default starts.
pub fn mu_a_from(conn: &Connection, cfg: &SpectralConfig, start: Option<&CForm>) -> Result<MuResult> {
    mu_a_impl(conn, cfg, start, false)
}

fn mu_a_impl(conn: &Connection, cfg: &SpectralConfig, start: Option<&CForm>, only_start: bool) -> Result<MuResult> {
    let unconstrained = mu_unconstrained(conn, cfg)?;
    let dim = conn.group().dim();
    if conn.group() == GroupKind::U1 {
        return Ok(MuResult {
            constrained: unconstrained.clone(),
            restart_values: vec![unconstrained.value],
            unconstrained,
        });
    }
    let grid = conn.grid();
    let sites = grid.sites();
    let m = DelbarOp::new(conn);
    let pc = FlatInverse::delbar(grid, dim, unconstrained.value.max(1e-8));
    let Witness::Coefficient(w) = &unconstrained.witness else { unreachable!() };
    let wv = ops::stack(w);
    // Constant field along the dominant mean direction of the witness.
    let mut constant = vec![0.0; 2 * sites * dim];
    let mut mean = vec![0.0; dim];
    for (i, x) in wv[..sites * dim].iter().enumerate() {
        mean[i % dim] += x;
    }
    normalize_sections(&mut mean, dim);
    for s in 0..sites {
        constant[s * dim..(s + 1) * dim].copy_from_slice(&mean);
    }
    let mut starts: Vec<Vec<f64>> = start.map(|c| vec![ops::stack(c)]).unwrap_or_default();
    starts.push(constant);
    starts.push(wv);
    let floor = unconstrained.value + cfg.tol * (1.0 + unconstrained.value.abs());
    let mut best: Option<rankone::Run> = None;
    let mut restart_values = Vec::new();
    let mut last_err = None;
    let total = if only_start && start.is_some() { 1 } else { starts.len() + cfg.restarts };
    for r in 0..total {
        let c0 = if r < starts.len() {
            std::mem::take(&mut starts[r])
        } else {
            let seed = cfg.seed.wrapping_mul(1_000_003).wrapping_add(r as u64);
            let mut c = random_field(grid, conn.group(), 0, seed, 1.0, 1.5)?.into_data();
            normalize_sections(&mut c, dim);
            c.resize(2 * sites * dim, 0.0);
            c
        };
        if ops::norm_is_zero(&c0) {
            continue;
        }
        // A start that runs out of iterations is dropped; the others still
        // bound the minimum.
        let run = match rankone::minimise(&m, dim, &c0, &pc, cfg) {
            Ok(run) => run,
            Err(e @ Error::NonConvergence { .. }) => {
                last_err = Some(e);
                continue;
            }
            Err(e) => return Err(e),
        };
        restart_values.push(run.value);
        if best.as_ref().map_or(true, |b| run.value < b.value) {
            best = Some(run);
        }
        // Nothing on the cone can go below the unconstrained value.
        if best.as_ref().is_some_and(|b| b.value <= floor) {
            break;
        }
    }
    let Some(best) = best else {
        return Err(last_err.unwrap_or_else(|| Error::InvalidArgument("every rank-one start vanishes".into())));
    };
    Ok(MuResult {
        constrained: EigenResult {
            value: best.value,
            witness: Witness::Coefficient(ops::unstack(grid, conn.group(), &best.c)),
            iterations: best.iterations,
            residual: best.residual,
        },
        unconstrained,
        restart_values,
    })
}

/// Solver for `nabla_A^* nabla_A s = f` on 0-forms, guarded by `lambda(A)`.
pub struct LaplaceSolver<'a> {
    op: LaplaceOp<'a>,
    pc: TwoLevel,
    cfg: SpectralConfig,
    pub lambda: f64,
    cg_iterations: std::cell::Cell<usize>,
}

impl<'a> LaplaceSolver<'a> {
    /// Estimates `lambda(A)` and fails with `NearReducible` below the floor.
    pub fn new(conn: &'a Connection, cfg: &SpectralConfig) -> Result<Self> {
        let lambda = lambda_a(conn, cfg)?.value;
        Self::with_lambda(conn, cfg, lambda)
    }

    /// Uses a caller-supplied `lambda(A)`.
    pub fn with_lambda(conn: &'a Connection, cfg: &SpectralConfig, lambda: f64) -> Result<Self> {
        cfg.validate()?;
        if !(lambda >= cfg.lambda_floor) {
            return Err(Error::NearReducible { lambda, floor: cfg.lambda_floor });
        }
        let op = LaplaceOp::new(conn);
        let pc = TwoLevel::new(conn.grid(), conn.group().dim(), &op);
        Ok(Self { op, pc, cfg: *cfg, lambda, cg_iterations: std::cell::Cell::new(0) })
    }

    pub fn solve(&self, f: &Form) -> Result<Form> {
        f.expect_degree("solve_laplace", 0)?;
        let mut x = vec![0.0; f.data().len()];
        let out = cg(&self.op, 0.0, f.data(), &mut x, self.cfg.cg_tol, self.cfg.cg_max_iter, Some(&self.pc));
        self.cg_iterations.set(self.cg_iterations.get() + out.iterations);
        if !out.converged {
            return Err(Error::SolverStagnation { iterations: out.iterations, residual: out.rel_residual });
        }
        Form::from_data(f.grid(), f.group(), 0, x)
    }

    /// Total CG iterations spent so far.
    pub fn cg_iterations(&self) -> usize {
        self.cg_iterations.get()
    }
}

pub fn solve_laplace(conn: &Connection, f: &Form, cfg: &SpectralConfig) -> Result<Form> {
    if f.max_abs() == 0.0 {
        f.expect_degree("solve_laplace", 0)?;
        return Ok(f.clone());
    }
    LaplaceSolver::new(conn, cfg)?.solve(f)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ContinuityRow {
    pub t: f64,
    /// `||t a||_{L^4}`.
    pub a_l4: f64,
    pub lambda: f64,
    pub mu: f64,
    pub mu_unconstrained: f64,
}

/// `lambda` and `mu` along `A_0 + t a` for ascending `t`.
pub fn continuity_sweep(
    a0: &Connection,
    direction: &Form,
    amplitudes: &[f64],
    cfg: &SpectralConfig,
) -> Result<Vec<ContinuityRow>> {
    if amplitudes.windows(2).any(|w| !(w[0] <= w[1])) {
        return Err(Error::InvalidArgument("continuity amplitudes must be sorted ascending".into()));
    }
    let base_l4 = lp_norm(direction, 4.0)?;
    // The first row uses every start; later rows continue from the previous
    // row's minimiser only, so the table follows one branch of local minima.
    let mut prev: Option<CForm> = None;
    let mut rows = Vec::with_capacity(amplitudes.len());
    for &t in amplitudes {
        let a = a0.shifted(t, direction)?;
        let lambda = lambda_a(&a, cfg)?.value;
        let mu = mu_a_impl(&a, cfg, prev.as_ref(), true)?;
        rows.push(ContinuityRow {
            t,
            a_l4: t.abs() * base_l4,
            lambda,
            mu: mu.constrained.value,
            mu_unconstrained: mu.unconstrained.value,
        });
        if let Witness::Coefficient(c) = mu.constrained.witness {
            prev = Some(c);
        }
    }
    Ok(rows)
}

#[cfg(test)]
mod tests;
