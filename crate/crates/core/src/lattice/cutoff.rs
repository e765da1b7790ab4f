//! Logarithmic cutoff `beta = psi(log(R/|x|) / log N)`: 1 inside `R/N`, 0
//! outside `R`. The ramp `psi` is smoothed at both corners in the
//! log-radius variable so that its shape does not depend on `N`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::algebra::GroupKind;
use crate::error::{Error, Result};

use super::form::Form;
use super::Torus4;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CutoffProfile {
    /// Ratio `N` between outer and inner radius.
    pub ratio: f64,
    /// Outer radius `R`.
    pub radius: f64,
    /// Corner smoothing half-width, as a fraction of the log-radius range.
    pub width: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CutoffNorms {
    pub grad_l4: f64,
    pub hess_l2: f64,
}

impl CutoffNorms {
    pub fn sum(&self) -> f64 {
        self.grad_l4 + self.hess_l2
    }
}

/// Quintic smoothstep.
fn smoothstep(x: f64) -> f64 {
    x * x * x * (10.0 - 15.0 * x + 6.0 * x * x)
}

fn smoothstep_d(x: f64) -> f64 {
    30.0 * x * x * (1.0 - x) * (1.0 - x)
}

fn smoothstep_int(x: f64) -> f64 {
    x.powi(4) * (2.5 - 3.0 * x + x * x)
}

impl CutoffProfile {
    pub fn new(ratio: f64, radius: f64) -> Result<Self> {
        Self { ratio, radius, width: 0.1 }.validated()
    }

    pub fn with_width(self, width: f64) -> Result<Self> {
        Self { width, ..self }.validated()
    }

    fn validated(self) -> Result<Self> {
        if !(self.ratio >= 2.0) {
            return Err(Error::InvalidArgument(format!("cutoff ratio N must be >= 2, got {}", self.ratio)));
        }
        if !(self.radius > 0.0 && self.radius <= 0.25) {
            return Err(Error::InvalidArgument(format!(
                "cutoff radius must lie in (0, 0.25], got {}",
                self.radius
            )));
        }
        if !(self.width > 0.0 && self.width <= 0.25) {
            return Err(Error::InvalidArgument(format!(
                "cutoff smoothing width must lie in (0, 0.25], got {}",
                self.width
            )));
        }
        Ok(self)
    }

    fn log_ratio(&self) -> f64 {
        self.ratio.ln()
    }

    /// Ramp slope normalisation: `psi' = s m(t)` with `int m = 1 - 2 width`.
    fn slope(&self) -> f64 {
        1.0 / (1.0 - 2.0 * self.width)
    }

    pub fn psi(&self, t: f64) -> f64 {
        let w2 = 2.0 * self.width;
        let s = self.slope();
        if t <= 0.0 {
            0.0
        } else if t >= 1.0 {
            1.0
        } else if t < w2 {
            s * w2 * smoothstep_int(t / w2)
        } else if t <= 1.0 - w2 {
            s * (self.width + t - w2)
        } else {
            1.0 - s * w2 * smoothstep_int((1.0 - t) / w2)
        }
    }

    pub fn dpsi(&self, t: f64) -> f64 {
        let w2 = 2.0 * self.width;
        let s = self.slope();
        if t <= 0.0 || t >= 1.0 {
            0.0
        } else if t < w2 {
            s * smoothstep(t / w2)
        } else if t <= 1.0 - w2 {
            s
        } else {
            s * smoothstep((1.0 - t) / w2)
        }
    }

    pub fn ddpsi(&self, t: f64) -> f64 {
        let w2 = 2.0 * self.width;
        let s = self.slope();
        if t <= 0.0 || t >= 1.0 {
            0.0
        } else if t < w2 {
            s * smoothstep_d(t / w2) / w2
        } else if t <= 1.0 - w2 {
            0.0
        } else {
            -s * smoothstep_d((1.0 - t) / w2) / w2
        }
    }

    pub fn beta(&self, r: f64) -> f64 {
        if r <= 0.0 {
            return 1.0;
        }
        self.psi((self.radius / r).ln() / self.log_ratio())
    }

    /// Norms of the continuum profile by 1-D quadrature in `t`:
    /// `int |grad beta|^4 = 2 pi^2 int psi'^4 dt / L^3` and
    /// `int |hess beta|^2 = 2 pi^2 int ((psi''/L + psi')^2 + 3 psi'^2) dt / L`.
    pub fn radial_norms(&self) -> CutoffNorms {
        let l = self.log_ratio();
        // Composite Simpson; psi' is C^2 so the integrand is smooth enough.
        let m = 40_000;
        let dt = 1.0 / m as f64;
        let (mut g4, mut h2) = (0.0, 0.0);
        for i in 0..=m {
            let t = i as f64 * dt;
            let w = if i == 0 || i == m {
                1.0
            } else if i % 2 == 1 {
                4.0
            } else {
                2.0
            };
            let p1 = self.dpsi(t);
            let p2 = self.ddpsi(t);
            g4 += w * p1.powi(4);
            h2 += w * ((p2 / l + p1).powi(2) + 3.0 * p1 * p1);
        }
        g4 *= dt / 3.0;
        h2 *= dt / 3.0;
        let c = 2.0 * PI * PI;
        CutoffNorms {
            grad_l4: (c * g4 / l.powi(3)).powf(0.25),
            hess_l2: (c * h2 / l).sqrt(),
        }
    }
}

/// Sample `beta` around `center` (periodic minimum-image distance) and
/// measure its gradient and Hessian norms with finite differences.
pub fn cutoff_beta(profile: &CutoffProfile, grid: Torus4, center: usize) -> Result<(Form, CutoffNorms)> {
    let h = grid.h();
    if profile.radius / profile.ratio < 2.0 * h {
        return Err(Error::InvalidArgument(format!(
            "inner radius R/N = {:.4} is below 2h = {:.4}",
            profile.radius / profile.ratio,
            2.0 * h
        )));
    }
    let n = grid.n();
    let c = grid.coords(center);
    let beta = Form::from_fn(grid, GroupKind::U1, 0, |site, _, v| {
        let x = grid.coords(site);
        let r2: f64 = (0..4)
            .map(|mu| {
                let d = (x[mu] + n - c[mu]) % n;
                let d = d.min(n - d) as f64 * h;
                d * d
            })
            .sum();
        v[0] = profile.beta(r2.sqrt());
    });
    let b = beta.data();
    let inv_h = 1.0 / h;
    let (mut g4, mut h2) = (0.0, 0.0);
    for site in 0..grid.sites() {
        let mut grad2 = 0.0;
        let mut hess2 = 0.0;
        for mu in 0..4 {
            let f = grid.fwd(site, mu);
            let g = (b[f] - b[site]) * inv_h;
            grad2 += g * g;
            let bk = grid.bwd(site, mu);
            let hmm = (b[f] - 2.0 * b[site] + b[bk]) * inv_h * inv_h;
            hess2 += hmm * hmm;
            for nu in mu + 1..4 {
                let fn_ = grid.fwd(site, nu);
                let fmn = grid.fwd(f, nu);
                let hmn = (b[fmn] - b[f] - b[fn_] + b[site]) * inv_h * inv_h;
                hess2 += 2.0 * hmn * hmn;
            }
        }
        g4 += grad2 * grad2;
        h2 += hess2;
    }
    let vol = grid.cell_volume();
    Ok((beta, CutoffNorms { grad_l4: (g4 * vol).powf(0.25), hess_l2: (h2 * vol).sqrt() }))
}
