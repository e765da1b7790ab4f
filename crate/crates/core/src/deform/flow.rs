use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gauge::{curvature, d_a_star, ym_energy, Connection};
use crate::lattice::Form;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FlowScheme {
    /// `A <- A - dt d_A^* F_A`, halving `dt` on an energy increase.
    Explicit,
    /// Limited-memory quasi-Newton descent with an Armijo line search. Same
    /// fixed points and monotone energy, but it does not crawl along the
    /// shallow valleys left by the lattice's broken gauge symmetry.
    Lbfgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FlowConfig {
    pub scheme: FlowScheme,
    /// Time step; for `Lbfgs` the length of the first trial step.
    pub dt: f64,
    pub max_steps: usize,
    /// Stop once `||d_A^* F_A||_{L^2}` falls to this value.
    pub grad_tol: f64,
    /// Halve the step on energy increase; without it every step is taken.
    pub backtracking: bool,
}

impl Default for FlowConfig {
    fn default() -> Self {
        Self { scheme: FlowScheme::Explicit, dt: 1e-3, max_steps: 20_000, grad_tol: 1e-6, backtracking: true }
    }
}

/// Halvings allowed within one step.
const MAX_REJECTIONS: usize = 20;

/// Correction pairs kept by the quasi-Newton scheme.
const MEMORY: usize = 10;

#[derive(Debug, Clone)]
pub struct FlowResult {
    pub connection: Connection,
    /// Energy before the first step and after every accepted step.
    pub energies: Vec<f64>,
    /// `||d_A^* F_A||` at the same points as `energies`.
    pub grad_norms: Vec<f64>,
    pub steps: usize,
    pub rejections: usize,
    pub converged: bool,
}

fn gradient(conn: &Connection) -> Form {
    d_a_star(&curvature(conn), conn).expect("curvature is a 2-form")
}

/// Explicit gradient descent `A <- A - dt d_A^* F_A` on the Yang-Mills energy.
pub fn ym_gradient_flow(a0: &Connection, cfg: &FlowConfig) -> Result<FlowResult> {
    if !(cfg.dt > 0.0) || !(cfg.grad_tol >= 0.0) {
        return Err(Error::InvalidArgument("flow needs dt > 0 and grad_tol >= 0".into()));
    }
    if cfg.scheme == FlowScheme::Lbfgs {
        return lbfgs(a0, cfg);
    }
    let mut conn = a0.clone();
    let mut energy = ym_energy(&conn);
    let mut grad = gradient(&conn);
    let mut energies = vec![energy];
    let mut grad_norms = vec![grad.l2_norm()];
    let mut rejections = 0;
    let mut steps = 0;
    while steps < cfg.max_steps && grad_norms[steps] > cfg.grad_tol {
        let mut dt = cfg.dt;
        let mut tries = 0;
        let (next, e) = loop {
            let trial = Connection::new(conn.form().sub(&grad.scaled(dt)))?;
            let e = ym_energy(&trial);
            if !cfg.backtracking || e <= energy {
                break (trial, e);
            }
            tries += 1;
            rejections += 1;
            if tries > MAX_REJECTIONS {
                return Err(Error::StepRejectionLimit { step: steps, rejections: tries });
            }
            dt *= 0.5;
        };
        conn = next;
        energy = e;
        grad = gradient(&conn);
        energies.push(energy);
        grad_norms.push(grad.l2_norm());
        steps += 1;
    }
    let converged = grad_norms[steps] <= cfg.grad_tol;
    Ok(FlowResult { connection: conn, energies, grad_norms, steps, rejections, converged })
}

/// `E = ||F||^2` has gradient `2 d_A^* F`; the iteration works with `d_A^* F`.
fn lbfgs(a0: &Connection, cfg: &FlowConfig) -> Result<FlowResult> {
    let mut conn = a0.clone();
    let mut energy = ym_energy(&conn);
    let mut grad = gradient(&conn);
    let mut energies = vec![energy];
    let mut grad_norms = vec![grad.l2_norm()];
    let mut mem: VecDeque<(Form, Form, f64)> = VecDeque::new();
    let mut rejections = 0;
    let mut steps = 0;
    while steps < cfg.max_steps && grad_norms[steps] > cfg.grad_tol {
        let mut q = grad.clone();
        let mut alphas = Vec::with_capacity(mem.len());
        for (s, y, rho) in mem.iter().rev() {
            let a = rho * s.inner(&q);
            q.axpy(-a, y);
            alphas.push(a);
        }
        let gamma = mem.back().map_or(cfg.dt, |(s, y, _)| s.inner(y) / y.inner(y));
        let mut r = q.scaled(gamma);
        for ((s, y, rho), a) in mem.iter().zip(alphas.iter().rev()) {
            let b = rho * y.inner(&r);
            r.axpy(a - b, s);
        }
        let mut dir = r.scaled(-1.0);
        if !(grad.inner(&dir) < 0.0) {
            mem.clear();
            dir = grad.scaled(-cfg.dt);
        }
        let mut step = 1.0;
        let mut tries = 0;
        let (next, e) = loop {
            let trial = Connection::new(conn.form().add(&dir.scaled(step)))?;
            let e = ym_energy(&trial);
            if e <= energy + 2e-4 * step * grad.inner(&dir) {
                break (trial, e);
            }
            tries += 1;
            rejections += 1;
            if tries > MAX_REJECTIONS {
                if mem.is_empty() {
                    return Err(Error::StepRejectionLimit { step: steps, rejections: tries });
                }
                // Stale curvature pairs: restart from steepest descent.
                mem.clear();
                dir = grad.scaled(-cfg.dt);
                step = 1.0;
                tries = 0;
                continue;
            }
            step *= 0.5;
        };
        let next_grad = gradient(&next);
        let s = dir.scaled(step);
        let y = next_grad.sub(&grad);
        let sy = s.inner(&y);
        if sy > 1e-12 * s.l2_norm() * y.l2_norm() {
            if mem.len() == MEMORY {
                mem.pop_front();
            }
            mem.push_back((s, y, 1.0 / sy));
        }
        conn = next;
        energy = e;
        grad = next_grad;
        energies.push(energy);
        grad_norms.push(grad.l2_norm());
        steps += 1;
    }
    let converged = grad_norms[steps] <= cfg.grad_tol;
    Ok(FlowResult { connection: conn, energies, grad_norms, steps, rejections, converged })
}
