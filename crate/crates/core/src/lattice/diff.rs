//! Finite-difference exterior derivative and its exact lattice adjoint.
//!
//! `D_mu u(x) = (u(x+mu) - u(x))/h + [A_mu(x), u(x)]` with the bracket at the
//! base site; its transpose is `D_mu^T w(x) = (w(x-mu) - w(x))/h - [A_mu(x), w(x)]`.
//! `d_A = sum_mu e^mu ^ D_mu` and `d_A^* = sum_mu i_mu D_mu^T`. Passing no
//! connection gives the flat operators.

use crate::algebra::bracket_acc;
use crate::error::{Error, Result};

use super::basis::tables;
use super::form::Form;

fn check_conn(u: &Form, conn: Option<&Form>) -> Result<()> {
    if let Some(a) = conn {
        a.expect_degree("connection", 1)?;
        u.group().check_same(a.group())?;
        if u.grid() != a.grid() {
            return Err(Error::GridMismatch { left: u.grid().n(), right: a.grid().n() });
        }
    }
    Ok(())
}

/// `d_A u` for a k-form, k < 4.
pub fn exterior_derivative(u: &Form, conn: Option<&Form>) -> Result<Form> {
    let k = u.degree();
    if k >= 4 {
        return Err(Error::Degree { op: "d", degree: k });
    }
    check_conn(u, conn)?;
    let grid = u.grid();
    let (inv_h, kind, dim) = (1.0 / grid.h(), u.group(), u.dim());
    let mut out = Form::zeros(grid, kind, k + 1);
    let ext = &tables().ext[k];
    let mut buf = vec![0.0; dim];
    for site in 0..grid.sites() {
        for (mu, map) in ext.iter().enumerate() {
            let nb = grid.fwd(site, mu);
            for &(src, dst, sign) in map {
                let here = u.at(site, src);
                let there = u.at(nb, src);
                for g in 0..dim {
                    buf[g] = (there[g] - here[g]) * inv_h;
                }
                if let Some(a) = conn {
                    bracket_acc(kind, 1.0, a.at(site, mu), here, &mut buf);
                }
                let o = out.at_mut(site, dst);
                for g in 0..dim {
                    o[g] += sign * buf[g];
                }
            }
        }
    }
    Ok(out)
}

/// Exact transpose of [`exterior_derivative`] for the `h^4`-weighted inner product.
pub fn exterior_coderivative(v: &Form, conn: Option<&Form>) -> Result<Form> {
    let k = v.degree();
    if k == 0 {
        return Err(Error::Degree { op: "d_star", degree: k });
    }
    check_conn(v, conn)?;
    let grid = v.grid();
    let (inv_h, kind, dim) = (1.0 / grid.h(), v.group(), v.dim());
    let mut out = Form::zeros(grid, kind, k - 1);
    let ext = &tables().ext[k - 1];
    let mut buf = vec![0.0; dim];
    for site in 0..grid.sites() {
        for (mu, map) in ext.iter().enumerate() {
            let nb = grid.bwd(site, mu);
            for &(src, dst, sign) in map {
                let here = v.at(site, dst);
                let there = v.at(nb, dst);
                for g in 0..dim {
                    buf[g] = (there[g] - here[g]) * inv_h;
                }
                if let Some(a) = conn {
                    bracket_acc(kind, -1.0, a.at(site, mu), here, &mut buf);
                }
                let o = out.at_mut(site, src);
                for g in 0..dim {
                    o[g] += sign * buf[g];
                }
            }
        }
    }
    Ok(out)
}

pub fn d(u: &Form) -> Result<Form> {
    exterior_derivative(u, None)
}

pub fn d_star(u: &Form) -> Result<Form> {
    exterior_coderivative(u, None)
}

/// Componentwise covariant difference `D_mu u`, same degree as `u`.
pub fn covariant_diff(u: &Form, conn: Option<&Form>, mu: usize) -> Result<Form> {
    check_conn(u, conn)?;
    let grid = u.grid();
    let (inv_h, kind) = (1.0 / grid.h(), u.group());
    let w = u.ncomp() * u.dim();
    let dim = u.dim();
    let mut out = u.zeros_like();
    for site in 0..grid.sites() {
        let nb = grid.fwd(site, mu);
        let o = site * w;
        for i in 0..w {
            out.data_mut()[o + i] = (u.data()[nb * w + i] - u.data()[o + i]) * inv_h;
        }
        if let Some(a) = conn {
            let am = a.at(site, mu);
            for c in 0..u.ncomp() {
                let oc = o + c * dim;
                bracket_acc(kind, 1.0, am, &u.data()[oc..oc + dim], &mut out.data_mut()[oc..oc + dim]);
            }
        }
    }
    Ok(out)
}

/// Transpose of [`covariant_diff`].
pub fn covariant_diff_adjoint(v: &Form, conn: Option<&Form>, mu: usize) -> Result<Form> {
    check_conn(v, conn)?;
    let grid = v.grid();
    let (inv_h, kind) = (1.0 / grid.h(), v.group());
    let w = v.ncomp() * v.dim();
    let dim = v.dim();
    let mut out = v.zeros_like();
    for site in 0..grid.sites() {
        let nb = grid.bwd(site, mu);
        let o = site * w;
        for i in 0..w {
            out.data_mut()[o + i] = (v.data()[nb * w + i] - v.data()[o + i]) * inv_h;
        }
        if let Some(a) = conn {
            let am = a.at(site, mu);
            for c in 0..v.ncomp() {
                let oc = o + c * dim;
                bracket_acc(kind, -1.0, am, &v.data()[oc..oc + dim], &mut out.data_mut()[oc..oc + dim]);
            }
        }
    }
    Ok(out)
}
