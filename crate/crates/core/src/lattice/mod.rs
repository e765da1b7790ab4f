//! Periodic 4-torus, Lie-algebra-valued lattice forms and the pointwise and
//! finite-difference operators that act on them.
//!
//! The torus has side length 1 and `n` sites per axis. The metric is flat with
//! orthonormal coframe `e^0..e^3`, Kähler form `omega = e^{01} + e^{23}` and
//! complex coframe `dz^1 = e^0 + i e^1`, `dz^2 = e^2 + i e^3`.

pub mod algebraic;
pub mod basis;
pub mod cutoff;
pub mod diff;
pub mod form;
pub mod norms;
pub mod snapshot;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use algebraic::{
    hodge_star, lambda_omega, lomega, pq_decompose, sd_asd_project, PqSplit,
};
pub use diff::{d, d_star};
pub use form::{CForm, Form};
pub use norms::{lp_norm, lp_norm_complex};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Torus4 {
    n: usize,
}

impl Torus4 {
    pub fn new(n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidArgument(format!("grid needs n >= 2, got {n}")));
        }
        Ok(Self { n })
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn h(&self) -> f64 {
        1.0 / self.n as f64
    }

    #[inline]
    pub fn sites(&self) -> usize {
        self.n.pow(4)
    }

    /// Volume of one lattice cell, `h^4`.
    #[inline]
    pub fn cell_volume(&self) -> f64 {
        self.h().powi(4)
    }

    #[inline]
    pub fn stride(&self, mu: usize) -> usize {
        self.n.pow(3 - mu as u32)
    }

    #[inline]
    pub fn coord(&self, site: usize, mu: usize) -> usize {
        (site / self.stride(mu)) % self.n
    }

    pub fn coords(&self, site: usize) -> [usize; 4] {
        [0, 1, 2, 3].map(|mu| self.coord(site, mu))
    }

    pub fn site(&self, coords: [usize; 4]) -> usize {
        coords.iter().fold(0, |acc, &c| acc * self.n + c % self.n)
    }

    /// Physical position of a site in `[0,1)^4`.
    pub fn position(&self, site: usize) -> [f64; 4] {
        self.coords(site).map(|c| c as f64 * self.h())
    }

    #[inline]
    pub fn fwd(&self, site: usize, mu: usize) -> usize {
        let s = self.stride(mu);
        if (site / s) % self.n == self.n - 1 {
            site + s - self.n * s
        } else {
            site + s
        }
    }

    #[inline]
    pub fn bwd(&self, site: usize, mu: usize) -> usize {
        let s = self.stride(mu);
        if (site / s) % self.n == 0 {
            site + self.n * s - s
        } else {
            site - s
        }
    }
}
