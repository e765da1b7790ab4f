//! Matrix-free operators on flat vectors: the covariant Laplacian on
//! 0-forms and `dbar_A dbar_A^*` on (0,2)-forms written through their
//! coefficient `c` in `phi = c dzbar^1 ^ dzbar^2`.

use crate::algebra::{bracket_acc, GroupKind};
use crate::gauge::Connection;
use crate::lattice::{CForm, Form, Torus4};

use super::linalg::LinOp;

/// Directional covariant differences on Lie-valued 0-forms.
pub struct Stencil<'a> {
    grid: Torus4,
    kind: GroupKind,
    dim: usize,
    a: &'a Form,
    inv_h: f64,
}

impl<'a> Stencil<'a> {
    pub fn new(conn: &'a Connection) -> Self {
        let a = conn.form();
        Self { grid: a.grid(), kind: a.group(), dim: a.dim(), a, inv_h: 1.0 / a.grid().h() }
    }

    pub fn scalar_len(&self) -> usize {
        self.grid.sites() * self.dim
    }

    /// `out = D_mu x`.
    pub fn diff(&self, x: &[f64], mu: usize, out: &mut [f64]) {
        let d = self.dim;
        for s in 0..self.grid.sites() {
            let nb = self.grid.fwd(s, mu);
            let (o, xs) = (&mut out[s * d..(s + 1) * d], &x[s * d..(s + 1) * d]);
            for g in 0..d {
                o[g] = (x[nb * d + g] - xs[g]) * self.inv_h;
            }
            bracket_acc(self.kind, 1.0, self.a.at(s, mu), xs, o);
        }
    }

    /// `out = D_mu^T x`.
    pub fn diff_t(&self, x: &[f64], mu: usize, out: &mut [f64]) {
        let d = self.dim;
        for s in 0..self.grid.sites() {
            let nb = self.grid.bwd(s, mu);
            let (o, xs) = (&mut out[s * d..(s + 1) * d], &x[s * d..(s + 1) * d]);
            for g in 0..d {
                o[g] = (x[nb * d + g] - xs[g]) * self.inv_h;
            }
            bracket_acc(self.kind, -1.0, self.a.at(s, mu), xs, o);
        }
    }
}

/// `nabla_A^* nabla_A` on real 0-forms.
pub struct LaplaceOp<'a> {
    st: Stencil<'a>,
}

impl<'a> LaplaceOp<'a> {
    pub fn new(conn: &'a Connection) -> Self {
        Self { st: Stencil::new(conn) }
    }
}

impl LinOp for LaplaceOp<'_> {
    fn len(&self) -> usize {
        self.st.scalar_len()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        let n = self.len();
        let mut t = vec![0.0; n];
        let mut u = vec![0.0; n];
        y.fill(0.0);
        for mu in 0..4 {
            self.st.diff(x, mu, &mut t);
            self.st.diff_t(&t, mu, &mut u);
            y.iter_mut().zip(&u).for_each(|(y, u)| *y += u);
        }
    }
}

/// `c -> coefficient of dbar_A dbar_A^* (c dzbar^1 ^ dzbar^2)`, acting on
/// `[re | im]` stacked vectors. With `b_2 = (D_0^T - i D_1^T) c` and
/// `b_1 = (-D_2^T + i D_3^T) c` one has `dbar^* phi = b_1 dzbar^1 + b_2 dzbar^2`
/// and the image is `1/2 ((D_0 + i D_1) b_2 - (D_2 + i D_3) b_1)`.
pub struct DelbarOp<'a> {
    st: Stencil<'a>,
}

impl<'a> DelbarOp<'a> {
    pub fn new(conn: &'a Connection) -> Self {
        Self { st: Stencil::new(conn) }
    }

    pub fn scalar_len(&self) -> usize {
        self.st.scalar_len()
    }

    /// `(b_1, b_2)` as stacked complex vectors.
    pub fn adjoint_coeffs(&self, c: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let m = self.scalar_len();
        let (cr, ci) = c.split_at(m);
        let mut t = [0, 1, 2, 3].map(|_| (vec![0.0; m], vec![0.0; m]));
        for (mu, (tr, ti)) in t.iter_mut().enumerate() {
            self.st.diff_t(cr, mu, tr);
            self.st.diff_t(ci, mu, ti);
        }
        let mut b1 = vec![0.0; 2 * m];
        let mut b2 = vec![0.0; 2 * m];
        for k in 0..m {
            b2[k] = t[0].0[k] + t[1].1[k];
            b2[m + k] = t[0].1[k] - t[1].0[k];
            b1[k] = -t[2].0[k] - t[3].1[k];
            b1[m + k] = -t[2].1[k] + t[3].0[k];
        }
        (b1, b2)
    }
}

impl LinOp for DelbarOp<'_> {
    fn len(&self) -> usize {
        2 * self.scalar_len()
    }

    fn apply(&self, c: &[f64], y: &mut [f64]) {
        let m = self.scalar_len();
        let (b1, b2) = self.adjoint_coeffs(c);
        let mut pr = vec![0.0; m];
        let mut pi = vec![0.0; m];
        let mut qr = vec![0.0; m];
        let mut qi = vec![0.0; m];
        y.fill(0.0);
        // (D_a + i D_b) b with sign s, accumulated into y with weight 1/2.
        for (b, mu_a, mu_b, sign) in [(&b2, 0, 1, 0.5), (&b1, 2, 3, -0.5)] {
            let (br, bi) = b.split_at(m);
            self.st.diff(br, mu_a, &mut pr);
            self.st.diff(bi, mu_a, &mut pi);
            self.st.diff(br, mu_b, &mut qr);
            self.st.diff(bi, mu_b, &mut qi);
            for k in 0..m {
                y[k] += sign * (pr[k] - qi[k]);
                y[m + k] += sign * (pi[k] + qr[k]);
            }
        }
    }
}

/// Restriction of [`DelbarOp`] to rank-one fields `c = f sigma` with a fixed
/// unit section `sigma`; acts on the complex scalar `f` as `[re | im]`.
pub struct RankOneOp<'a> {
    pub inner: &'a DelbarOp<'a>,
    pub sigma: &'a [f64],
    pub dim: usize,
}

impl RankOneOp<'_> {
    pub fn lift(&self, f: &[f64]) -> Vec<f64> {
        let sites = f.len() / 2;
        let d = self.dim;
        let m = sites * d;
        let mut c = vec![0.0; 2 * m];
        for s in 0..sites {
            for g in 0..d {
                c[s * d + g] = f[s] * self.sigma[s * d + g];
                c[m + s * d + g] = f[sites + s] * self.sigma[s * d + g];
            }
        }
        c
    }

    pub fn project(&self, c: &[f64], f: &mut [f64]) {
        let sites = f.len() / 2;
        let d = self.dim;
        let m = sites * d;
        for s in 0..sites {
            let (mut re, mut im) = (0.0, 0.0);
            for g in 0..d {
                re += self.sigma[s * d + g] * c[s * d + g];
                im += self.sigma[s * d + g] * c[m + s * d + g];
            }
            f[s] = re;
            f[sites + s] = im;
        }
    }
}

impl LinOp for RankOneOp<'_> {
    fn len(&self) -> usize {
        2 * self.inner.scalar_len() / self.dim
    }

    fn apply(&self, f: &[f64], y: &mut [f64]) {
        let c = self.lift(f);
        let mut mc = vec![0.0; c.len()];
        self.inner.apply(&c, &mut mc);
        self.project(&mc, y);
    }
}

pub fn norm_is_zero(v: &[f64]) -> bool {
    v.iter().all(|x| *x == 0.0)
}

pub fn stack(c: &CForm) -> Vec<f64> {
    let mut v = c.re.data().to_vec();
    v.extend_from_slice(c.im.data());
    v
}

pub fn unstack(grid: Torus4, group: GroupKind, v: &[f64]) -> CForm {
    let m = v.len() / 2;
    CForm {
        re: Form::from_data(grid, group, 0, v[..m].to_vec()).expect("length"),
        im: Form::from_data(grid, group, 0, v[m..].to_vec()).expect("length"),
    }
}

