//! FFT-diagonalised flat operators used to precondition covariant solves.

use std::f64::consts::PI;
use std::sync::Arc;

use nalgebra::{Cholesky, DMatrix, Dyn};
use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};

use crate::lattice::Torus4;

use super::linalg::{LinOp, Precond};

/// Inverse of a translation-invariant operator given by its Fourier symbol,
/// applied to each generator of a `[site][gen]` field. Symbols that vanish
/// are dropped (pseudo-inverse on the zero modes).
pub struct FlatInverse {
    grid: Torus4,
    width: usize,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
    /// Reciprocal of the symbol, per Fourier site.
    recip: Vec<f64>,
    /// Input is a stacked `[re | im]` complex field transformed as one.
    complex: bool,
}

/// `(e^{2 pi i k / n} - 1) / h`, the symbol of a forward difference.
fn forward_symbol(k: usize, n: usize, h: f64) -> Complex<f64> {
    let t = 2.0 * PI * k as f64 / n as f64;
    Complex::new(t.cos() - 1.0, t.sin()) / h
}

impl FlatInverse {
    fn build(grid: Torus4, width: usize, complex: bool, symbol: impl Fn([usize; 4]) -> f64) -> Self {
        let n = grid.n();
        let mut planner = FftPlanner::new();
        let fwd = planner.plan_fft_forward(n);
        let inv = planner.plan_fft_inverse(n);
        let recip = (0..grid.sites())
            .map(|site| {
                let sym = symbol(grid.coords(site));
                if sym > 0.0 {
                    1.0 / sym
                } else {
                    0.0
                }
            })
            .collect();
        Self { grid, width, fwd, inv, recip, complex }
    }

    /// `(scale * Delta_flat + shift)^-1` on real fields (stacked complex
    /// fields are treated block by block).
    pub fn new(grid: Torus4, width: usize, scale: f64, shift: f64) -> Self {
        let (n, h) = (grid.n(), grid.h());
        let s1: Vec<f64> = (0..n).map(|k| forward_symbol(k, n, h).norm_sqr()).collect();
        Self::build(grid, width, false, |k| k.iter().map(|&k| s1[k]).sum::<f64>() * scale + shift)
    }

    /// `(M_0 + shift)^-1` for the flat `dbar dbar^*` coefficient operator,
    /// whose symbol is `1/2 (|d_0 + i d_1|^2 + |d_2 + i d_3|^2)`. It vanishes on
    /// the lattice doubler modes as well as on constants.
    pub fn delbar(grid: Torus4, width: usize, shift: f64) -> Self {
        let (n, h) = (grid.n(), grid.h());
        let d: Vec<Complex<f64>> = (0..n).map(|k| forward_symbol(k, n, h)).collect();
        let i = Complex::new(0.0, 1.0);
        Self::build(grid, width, true, |k| {
            0.5 * ((d[k[0]] + i * d[k[1]]).norm_sqr() + (d[k[2]] + i * d[k[3]]).norm_sqr()) + shift
        })
    }

    fn transform(&self, buf: &mut [Complex<f64>], fft: &Arc<dyn Fft<f64>>) {
        let n = self.grid.n();
        let mut line = vec![Complex::new(0.0, 0.0); n];
        for mu in 0..4 {
            let stride = self.grid.stride(mu);
            for start in 0..self.grid.sites() {
                if self.grid.coord(start, mu) != 0 {
                    continue;
                }
                for (i, l) in line.iter_mut().enumerate() {
                    *l = buf[start + i * stride];
                }
                fft.process(&mut line);
                for (i, l) in line.iter().enumerate() {
                    buf[start + i * stride] = *l;
                }
            }
        }
    }

    fn apply_scalar(&self, buf: &mut [Complex<f64>]) {
        self.transform(buf, &self.fwd);
        let norm = 1.0 / self.grid.sites() as f64;
        for (b, r) in buf.iter_mut().zip(&self.recip) {
            *b *= r * norm;
        }
        self.transform(buf, &self.inv);
    }
}

impl Precond for FlatInverse {
    fn apply(&self, r: &[f64], z: &mut [f64]) {
        let sites = self.grid.sites();
        let w = self.width;
        let mut buf = vec![Complex::new(0.0, 0.0); sites];
        if self.complex {
            let m = sites * w;
            for g in 0..w {
                for s in 0..sites {
                    buf[s] = Complex::new(r[s * w + g], r[m + s * w + g]);
                }
                self.apply_scalar(&mut buf);
                for s in 0..sites {
                    z[s * w + g] = buf[s].re;
                    z[m + s * w + g] = buf[s].im;
                }
            }
            return;
        }
        // Even symbols map real data to real data, one block at a time.
        for (rb, zb) in r.chunks(sites * w).zip(z.chunks_mut(sites * w)) {
            for g in 0..w {
                for s in 0..sites {
                    buf[s] = Complex::new(rb[s * w + g], 0.0);
                }
                self.apply_scalar(&mut buf);
                for s in 0..sites {
                    zb[s * w + g] = buf[s].re;
                }
            }
        }
    }
}

/// Two-level preconditioner for the covariant Laplacian on 0-forms: flat
/// inverse on the mean-free part plus a Galerkin solve on constant sections.
pub struct TwoLevel {
    flat: FlatInverse,
    width: usize,
    coarse: Option<Cholesky<f64, Dyn>>,
}

impl TwoLevel {
    pub fn new(grid: Torus4, width: usize, op: &dyn LinOp) -> Self {
        let flat = FlatInverse::new(grid, width, 1.0, 0.0);
        let sites = grid.sites();
        let basis: Vec<Vec<f64>> = (0..width)
            .map(|g| {
                let mut v = vec![0.0; sites * width];
                (0..sites).for_each(|s| v[s * width + g] = 1.0);
                v
            })
            .collect();
        let mut k0 = DMatrix::zeros(width, width);
        let mut y = vec![0.0; sites * width];
        for j in 0..width {
            op.apply(&basis[j], &mut y);
            for i in 0..width {
                k0[(i, j)] = super::linalg::dot(&basis[i], &y);
            }
        }
        let k0 = (&k0 + k0.transpose()) * 0.5;
        Self { flat, width, coarse: Cholesky::new(k0) }
    }
}

impl Precond for TwoLevel {
    fn apply(&self, r: &[f64], z: &mut [f64]) {
        let w = self.width;
        let sites = r.len() / w;
        let mut sums = vec![0.0; w];
        for (i, v) in r.iter().enumerate() {
            sums[i % w] += v;
        }
        let mut centred = r.to_vec();
        for (i, v) in centred.iter_mut().enumerate() {
            *v -= sums[i % w] / sites as f64;
        }
        self.flat.apply(&centred, z);
        if let Some(ch) = &self.coarse {
            let alpha = ch.solve(&nalgebra::DVector::from_vec(sums));
            for (i, v) in z.iter_mut().enumerate() {
                *v += alpha[i % w];
            }
        }
    }
}
