//! Deformation of a connection to one with `Lambda_omega F = 0`, the
//! quadratic maps behind it, and Yang-Mills gradient flow.

mod flow;
mod harmonic;

pub use flow::{ym_gradient_flow, FlowConfig, FlowResult, FlowScheme};
pub use harmonic::{harmonicity_report, HarmonicityReport};

use serde::{Deserialize, Serialize};

use crate::algebra::bracket_acc;
use crate::error::{Error, Result};
use crate::gauge::{curvature, nabla, twist, Connection};
use crate::lattice::{lambda_omega, Form};
use crate::spectral::{LaplaceSolver, SpectralConfig};

/// Consecutive nondecreasing outer steps tolerated before giving up.
const STALL_LIMIT: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DeformMode {
    /// Fixed-point sequence `f_k = S(f_{k-1}, f_{k-1}) + Lambda F`.
    PaperPicard,
    /// Iteration on the exact lattice residual `Lambda F_{A + a(s)}`.
    DiscreteResidual,
}

impl std::str::FromStr for DeformMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace(['-', '_'], "").as_str() {
            "paperpicard" | "picard" => Ok(Self::PaperPicard),
            "discreteresidual" | "discrete" => Ok(Self::DiscreteResidual),
            _ => Err(Error::InvalidArgument(format!("unknown deform mode {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DeformConfig {
    pub mode: DeformMode,
    pub tol: f64,
    pub max_outer: usize,
    /// Largest `||Lambda F_A||` accepted as a starting point.
    pub rho_max: f64,
    pub lambda_floor: f64,
    pub spectral: SpectralConfig,
}

impl Default for DeformConfig {
    fn default() -> Self {
        Self {
            mode: DeformMode::DiscreteResidual,
            tol: 1e-8,
            max_outer: 200,
            rho_max: 0.5,
            lambda_floor: 1e-3,
            spectral: SpectralConfig::default(),
        }
    }
}

impl DeformConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0) || self.max_outer == 0 || !(self.rho_max > 0.0 && self.rho_max <= 1.0) {
            return Err(Error::InvalidArgument("deform config needs tol > 0, max_outer > 0, 0 < rho_max <= 1".into()));
        }
        if !(self.lambda_floor > 0.0) {
            return Err(Error::InvalidArgument("lambda_floor must be positive".into()));
        }
        self.spectral.validate()
    }
}

#[derive(Debug, Clone)]
pub struct DeformResult {
    pub s: Form,
    pub a_inf: Connection,
    /// `||g_k||` for the Picard sequence, or the residual norm per outer
    /// step in discrete mode.
    pub trace_norms: Vec<f64>,
    /// `||Lambda_omega F_{A_inf}||_{L^2}`.
    pub final_residual: f64,
    /// `||s||_{L^2_2} / ||Lambda_omega F_A||_{L^2}`.
    pub s_norm_ratio: f64,
    pub outer_iterations: usize,
    /// `lambda(A)`, not computed when `F_A = 0`.
    pub lambda: Option<f64>,
    /// `||Lambda_omega F_A||_{L^2}`.
    pub rho: f64,
}

/// `B(u, v) = 1/2 Lambda_omega [d_A u ^ d_A v]`.
pub fn bmap(u: &Form, v: &Form, conn: &Connection) -> Result<Form> {
    u.check_compatible(v)?;
    u.expect_degree("bmap", 0)?;
    let (du, dv) = (nabla(u, conn)?, nabla(v, conn)?);
    let mut out = u.zeros_like();
    let kind = u.group();
    if kind.is_abelian() {
        return Ok(out);
    }
    for site in 0..u.grid().sites() {
        let o = out.at_mut(site, 0);
        for (m, n) in [(0, 1), (2, 3)] {
            bracket_acc(kind, 0.5, du[m].at(site, 0), dv[n].at(site, 0), o);
            bracket_acc(kind, -0.5, du[n].at(site, 0), dv[m].at(site, 0), o);
        }
    }
    Ok(out)
}

/// `S(f, g) = B(L^-1 f, L^-1 g)` with `L = nabla_A^* nabla_A`.
pub fn smap(f: &Form, g: &Form, conn: &Connection, cfg: &SpectralConfig) -> Result<Form> {
    let solver = LaplaceSolver::new(conn, cfg)?;
    smap_with(&solver, f, g, conn)
}

fn smap_with(solver: &LaplaceSolver, f: &Form, g: &Form, conn: &Connection) -> Result<Form> {
    let u = solver.solve(f)?;
    let v = if std::ptr::eq(f, g) { u.clone() } else { solver.solve(g)? };
    bmap(&u, &v, conn)
}

/// `A + a(s)` with `a(s) = d_A^*(s omega)`, the lattice form of
/// `i (del_A s - delbar_A s)`.
pub fn deformed(conn: &Connection, s: &Form) -> Result<Connection> {
    Connection::new(conn.form().add(&twist(s, conn)?))
}

pub fn trace_curvature(conn: &Connection) -> Form {
    lambda_omega(&curvature(conn)).expect("curvature is a 2-form")
}

/// `(||s||^2 + ||nabla s||^2 + ||nabla nabla s||^2)^{1/2}`.
pub fn sobolev_l2_2(s: &Form, conn: &Connection) -> Result<f64> {
    let first = nabla(s, conn)?;
    let mut total = s.norm_sq();
    for d in &first {
        total += d.norm_sq();
        total += nabla(d, conn)?.iter().map(Form::norm_sq).sum::<f64>();
    }
    Ok(total.sqrt())
}

struct Stall {
    prev: f64,
    count: usize,
}

impl Stall {
    fn new() -> Self {
        Self { prev: f64::INFINITY, count: 0 }
    }

    fn push(&mut self, v: f64) -> Result<()> {
        if !v.is_finite() {
            return Err(Error::NoContraction { reason: "iterate diverged to a non-finite value".into() });
        }
        self.count = if v >= self.prev { self.count + 1 } else { 0 };
        self.prev = v;
        if self.count >= STALL_LIMIT {
            return Err(Error::NoContraction { reason: format!("{STALL_LIMIT} consecutive nondecreasing steps") });
        }
        Ok(())
    }
}

pub fn taubes_deform(conn: &Connection, cfg: &DeformConfig) -> Result<DeformResult> {
    cfg.validate()?;
    let f0 = trace_curvature(conn);
    let rho = f0.l2_norm();
    if f0.max_abs() == 0.0 {
        return Ok(DeformResult {
            s: f0.zeros_like(),
            a_inf: conn.clone(),
            trace_norms: vec![0.0],
            final_residual: 0.0,
            s_norm_ratio: 0.0,
            outer_iterations: 1,
            lambda: None,
            rho,
        });
    }
    let spectral = SpectralConfig { lambda_floor: cfg.lambda_floor, ..cfg.spectral };
    let solver = LaplaceSolver::new(conn, &spectral)?;
    if rho > cfg.rho_max {
        return Err(Error::NoContraction { reason: format!("||Lambda F|| = {rho:.3e} exceeds rho_max = {}", cfg.rho_max) });
    }
    let mut trace_norms = Vec::new();
    let mut stall = Stall::new();
    let mut converged = false;
    let s = match cfg.mode {
        DeformMode::PaperPicard => {
            let mut f = f0.clone();
            trace_norms.push(rho);
            for _ in 1..cfg.max_outer {
                let mut next = smap_with(&solver, &f, &f, conn)?;
                next.axpy(1.0, &f0);
                let g = next.sub(&f).l2_norm();
                trace_norms.push(g);
                stall.push(g)?;
                f = next;
                if g < cfg.tol {
                    converged = true;
                    break;
                }
            }
            solver.solve(&f)?.scaled(-1.0)
        }
        DeformMode::DiscreteResidual => {
            let mut s = f0.zeros_like();
            for _ in 0..cfg.max_outer {
                let r = trace_curvature(&deformed(conn, &s)?);
                let norm = r.l2_norm();
                trace_norms.push(norm);
                if norm <= cfg.tol {
                    converged = true;
                    break;
                }
                stall.push(norm)?;
                s.axpy(-1.0, &solver.solve(&r)?);
            }
            s
        }
    };
    if !converged {
        let last = trace_norms.last().copied().unwrap_or(f64::NAN);
        return Err(Error::NonConvergence { iterations: cfg.max_outer, change: last });
    }
    let a_inf = deformed(conn, &s)?;
    let final_residual = trace_curvature(&a_inf).l2_norm();
    Ok(DeformResult {
        s_norm_ratio: sobolev_l2_2(&s, conn)? / rho,
        s,
        a_inf,
        outer_iterations: trace_norms.len(),
        trace_norms,
        final_residual,
        lambda: Some(solver.lambda),
        rho,
    })
}

#[cfg(test)]
mod tests;
