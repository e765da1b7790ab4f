//! Minimisation of the `dbar_A dbar_A^*` Rayleigh quotient over rank-one
//! coefficient fields `c = f sigma` (complex scalar `f`, unit real section
//! `sigma`) by Riemannian L-BFGS on the rank-one cone.

use std::collections::VecDeque;

use crate::error::{Error, Result};

use super::linalg::{dot, norm, LinOp, Precond};
use super::ops::DelbarOp;
use super::SpectralConfig;

const MEMORY: usize = 12;
/// Window over which a stalled value ends the iteration.
const STALL_WINDOW: usize = 50;
const WEIGHT_FLOOR: f64 = 0.05;

pub(super) struct Run {
    pub value: f64,
    /// Stacked `[re | im]` minimiser, unit norm.
    pub c: Vec<f64>,
    pub iterations: usize,
    /// Norm of the tangential part of `M c - value c`, section-rotation
    /// components weighted by the local size of `f`.
    pub residual: f64,
}

/// Leading left singular vector of the `d x 2` matrix `[a b]` written to
/// `u`; returns false (leaving `u` untouched) if the matrix vanishes.
pub(crate) fn top_direction(a: &[f64], b: &[f64], u: &mut [f64]) -> bool {
    let (p, q, r) = (dot(a, a), dot(a, b), dot(b, b));
    if p + r == 0.0 {
        return false;
    }
    let lam = 0.5 * (p + r) + (0.25 * (p - r) * (p - r) + q * q).sqrt();
    let (w0, w1) = if lam - r >= lam - p { (lam - r, q) } else { (q, lam - p) };
    for g in 0..u.len() {
        u[g] = w0 * a[g] + w1 * b[g];
    }
    let mut nu = norm(u);
    if nu == 0.0 {
        // Zero weight vector only when the columns are parallel.
        u.copy_from_slice(if p >= r { a } else { b });
        nu = norm(u);
    }
    u.iter_mut().for_each(|x| *x /= nu);
    true
}

/// Rank-one point with its per-site factors.
struct Point {
    c: Vec<f64>,
    /// Unit section, `[site][gen]`.
    sigma: Vec<f64>,
    /// Unit phase of `f`, `(cos, sin)` per site; `None` where `f = 0`.
    phase: Vec<Option<(f64, f64)>>,
    value: f64,
    /// Riemannian gradient of the Rayleigh quotient.
    grad: Vec<f64>,
    residual: f64,
}

struct Cone<'a> {
    m: &'a DelbarOp<'a>,
    dim: usize,
    sites: usize,
}

impl Cone<'_> {
    /// Closest rank-one field to `x`, normalised, with its factors.
    fn retract(&self, x: &[f64], prev_sigma: Option<&[f64]>) -> (Vec<f64>, Vec<f64>, Vec<Option<(f64, f64)>>) {
        let (d, ms) = (self.dim, self.sites * self.dim);
        let mut c = vec![0.0; 2 * ms];
        let mut sigma = vec![0.0; ms];
        let mut phase = vec![None; self.sites];
        for s in 0..self.sites {
            let a = &x[s * d..(s + 1) * d];
            let b = &x[ms + s * d..ms + (s + 1) * d];
            let u = &mut sigma[s * d..(s + 1) * d];
            if !top_direction(a, b, u) {
                match prev_sigma {
                    Some(p) => u.copy_from_slice(&p[s * d..(s + 1) * d]),
                    None => u[0] = 1.0,
                }
            }
            if let Some(p) = prev_sigma {
                if dot(u, &p[s * d..(s + 1) * d]) < 0.0 {
                    u.iter_mut().for_each(|x| *x = -*x);
                }
            }
            let (fr, fi) = (dot(u, a), dot(u, b));
            let r = fr.hypot(fi);
            if r > 0.0 {
                phase[s] = Some((fr / r, fi / r));
            }
            for g in 0..d {
                c[s * d + g] = fr * u[g];
                c[ms + s * d + g] = fi * u[g];
            }
        }
        let nc = norm(&c);
        c.iter_mut().for_each(|x| *x /= nc);
        (c, sigma, phase)
    }

    /// Orthogonal projection onto the tangent space `C sigma + f sigma^perp`.
    fn project(&self, sigma: &[f64], phase: &[Option<(f64, f64)>], w: &[f64]) -> Vec<f64> {
        let (d, ms) = (self.dim, self.sites * self.dim);
        let mut out = vec![0.0; w.len()];
        for s in 0..self.sites {
            let u = &sigma[s * d..(s + 1) * d];
            let wr = &w[s * d..(s + 1) * d];
            let wi = &w[ms + s * d..ms + (s + 1) * d];
            let (pr, pi) = (dot(u, wr), dot(u, wi));
            for g in 0..d {
                let (mut or, mut oi) = (pr * u[g], pi * u[g]);
                if let Some((cs, sn)) = phase[s] {
                    // e^{i theta} Re(e^{-i theta} w_perp)
                    let (qr, qi) = (wr[g] - pr * u[g], wi[g] - pi * u[g]);
                    let t = cs * qr + sn * qi;
                    or += cs * t;
                    oi += sn * t;
                }
                out[s * d + g] = or;
                out[ms + s * d + g] = oi;
            }
        }
        out
    }

    /// Norm of a tangent vector with the section-rotation part damped by
    /// `min(1, |f| / rms f)`: rotating `sigma` near zeros of `f` barely
    /// changes the field.
    fn weighted_norm(&self, c: &[f64], sigma: &[f64], t: &[f64]) -> f64 {
        let (d, ms) = (self.dim, self.sites * self.dim);
        let rms = (dot(c, c) / self.sites as f64).sqrt();
        let mut total = 0.0;
        for s in 0..self.sites {
            let u = &sigma[s * d..(s + 1) * d];
            let (tr, ti) = (&t[s * d..(s + 1) * d], &t[ms + s * d..ms + (s + 1) * d]);
            let (pr, pi) = (dot(u, tr), dot(u, ti));
            let along = pr * pr + pi * pi;
            let perp = dot(tr, tr) + dot(ti, ti) - along;
            let f = (dot(&c[s * d..(s + 1) * d], &c[s * d..(s + 1) * d])
                + dot(&c[ms + s * d..ms + (s + 1) * d], &c[ms + s * d..ms + (s + 1) * d]))
                .sqrt();
            let w = (f / rms).min(1.0);
            total += along + w * w * perp.max(0.0);
        }
        total.sqrt()
    }

    /// Divides the section-rotation part of `v` at each site by
    /// `max(|f| / rms f, FLOOR)`.
    fn scale_perp(&self, c: &[f64], sigma: &[f64], v: &mut [f64]) {
        let (d, ms) = (self.dim, self.sites * self.dim);
        let rms = (dot(c, c) / self.sites as f64).sqrt();
        for s in 0..self.sites {
            let u = &sigma[s * d..(s + 1) * d];
            let f = (dot(&c[s * d..(s + 1) * d], &c[s * d..(s + 1) * d])
                + dot(&c[ms + s * d..ms + (s + 1) * d], &c[ms + s * d..ms + (s + 1) * d]))
                .sqrt();
            let w = (f / rms).max(WEIGHT_FLOOR);
            for off in [s * d, ms + s * d] {
                let p = dot(u, &v[off..off + d]);
                for g in 0..d {
                    let along = p * u[g];
                    v[off + g] = along + (v[off + g] - along) / w;
                }
            }
        }
    }

    fn point(&self, x: &[f64], prev_sigma: Option<&[f64]>) -> Point {
        let (c, sigma, phase) = self.retract(x, prev_sigma);
        let mut mc = vec![0.0; c.len()];
        self.m.apply(&c, &mut mc);
        let value = dot(&c, &mc);
        let r: Vec<f64> = mc.iter().zip(&c).map(|(m, c)| m - value * c).collect();
        let tr = self.project(&sigma, &phase, &r);
        let residual = self.weighted_norm(&c, &sigma, &tr);
        let grad = tr.into_iter().map(|x| 2.0 * x).collect();
        Point { c, sigma, phase, value, grad, residual }
    }
}

pub(super) fn minimise(
    m: &DelbarOp,
    dim: usize,
    c0: &[f64],
    pc: &dyn Precond,
    cfg: &SpectralConfig,
) -> Result<Run> {
    let sites = m.scalar_len() / dim;
    let cone = Cone { m, dim, sites };
    if norm(c0) == 0.0 {
        return Err(Error::InvalidArgument("rank-one start vanishes".into()));
    }
    let mut cur = cone.point(c0, None);
    let mut mem: VecDeque<(Vec<f64>, Vec<f64>, f64)> = VecDeque::new();
    let res_tol = cfg.tol.sqrt();
    let max_iter = 20 * cfg.max_iter;
    let precondition = |p: &Point, g: &[f64]| {
        let mut g = g.to_vec();
        cone.scale_perp(&p.c, &p.sigma, &mut g);
        let mut z = vec![0.0; g.len()];
        pc.apply(&g, &mut z);
        let mut z = cone.project(&p.sigma, &p.phase, &z);
        cone.scale_perp(&p.c, &p.sigma, &mut z);
        z
    };
    // Relative decrease over the window below which the value counts as
    // stalled: on grids with lattice doublers the cone landscape has long
    // shallow valleys where the residual test is out of reach.
    let stall_tol = 0.1 * res_tol;
    let mut history = VecDeque::with_capacity(STALL_WINDOW + 1);
    for it in 0..max_iter {
        history.push_back(cur.value);
        if history.len() > STALL_WINDOW {
            history.pop_front();
        }
        let stalled = history.len() == STALL_WINDOW && history[0] - cur.value <= stall_tol * cur.value.abs();
        if stalled || cur.residual <= res_tol * (1.0 + cur.value.abs()) {
            return Ok(Run { value: cur.value, c: cur.c, iterations: it, residual: cur.residual });
        }
        let mut q = cur.grad.clone();
        let mut alphas = Vec::with_capacity(mem.len());
        for (s, y, rho) in mem.iter().rev() {
            let a = rho * dot(s, &q);
            q.iter_mut().zip(y).for_each(|(q, y)| *q -= a * y);
            alphas.push(a);
        }
        let mut r = precondition(&cur, &q);
        if let Some((s, y, _)) = mem.back() {
            let py = precondition(&cur, y);
            let gamma = dot(s, y) / dot(y, &py);
            r.iter_mut().for_each(|a| *a *= gamma);
        }
        for ((s, y, rho), a) in mem.iter().zip(alphas.iter().rev()) {
            let b = rho * dot(y, &r);
            r.iter_mut().zip(s).for_each(|(r, s)| *r += (a - b) * s);
        }
        let mut dir: Vec<f64> = r.into_iter().map(|a| -a).collect();
        let mut slope = dot(&cur.grad, &dir);
        if !(slope < 0.0) {
            mem.clear();
            dir = precondition(&cur, &cur.grad).into_iter().map(|a| -a).collect();
            slope = dot(&cur.grad, &dir);
        }
        // Keep the first trial step small relative to the unit-norm point.
        let mut step = if mem.is_empty() { (0.1 / norm(&dir)).min(1.0) } else { 1.0 };
        let mut next = None;
        for _ in 0..40 {
            let trial: Vec<f64> = cur.c.iter().zip(&dir).map(|(a, d)| a + step * d).collect();
            let p = cone.point(&trial, Some(&cur.sigma));
            if p.value <= cur.value + 1e-4 * step * slope {
                next = Some(p);
                break;
            }
            step *= 0.5;
        }
        let Some(next) = next else {
            return Err(Error::NonConvergence { iterations: it, change: cur.residual });
        };
        // Transport the memory to the new tangent space by projection.
        let transport = |v: &[f64]| cone.project(&next.sigma, &next.phase, v);
        let s = transport(&dir.iter().map(|d| step * d).collect::<Vec<_>>());
        let y: Vec<f64> = next.grad.iter().zip(transport(&cur.grad)).map(|(a, b)| a - b).collect();
        for entry in mem.iter_mut() {
            entry.0 = transport(&entry.0);
            entry.1 = transport(&entry.1);
        }
        let sy = dot(&s, &y);
        if sy > 1e-12 * norm(&s) * norm(&y) {
            if mem.len() == MEMORY {
                mem.pop_front();
            }
            mem.push_back((s, y, 1.0 / sy));
        }
        cur = next;
    }
    Err(Error::NonConvergence { iterations: max_iter, change: cur.residual })
}
