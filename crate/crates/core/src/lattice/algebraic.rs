//! Pointwise (derivative-free) operators: Hodge star, Kähler operators,
//! self-dual and (p,q) projections.

use crate::error::{Error, Result};

use super::basis::{ncomp, tables, SignedMap, E01, E02, E03, E12, E13, E23};
use super::form::{CForm, Form};

fn apply_map(u: &Form, map: &SignedMap, out_degree: usize, transpose: bool) -> Form {
    let grid = u.grid();
    let mut out = Form::zeros(grid, u.group(), out_degree);
    let dim = u.dim();
    for site in 0..grid.sites() {
        for &(src, dst, sign) in map {
            let (from, to) = if transpose { (dst, src) } else { (src, dst) };
            let ui = u.offset(site, from);
            let oi = out.offset(site, to);
            for g in 0..dim {
                out.data_mut()[oi + g] += sign * u.data()[ui + g];
            }
        }
    }
    out
}

pub fn hodge_star(u: &Form) -> Form {
    let k = u.degree();
    apply_map(u, &tables().hodge[k], 4 - k, false)
}

/// Exterior product with `omega`, degree k -> k+2.
pub fn lomega(u: &Form) -> Result<Form> {
    let k = u.degree();
    if k > 2 {
        return Err(Error::Degree { op: "lomega", degree: k });
    }
    Ok(apply_map(u, &tables().lomega[k], k + 2, false))
}

/// Pointwise adjoint of [`lomega`], degree k -> k-2.
pub fn lambda_omega(u: &Form) -> Result<Form> {
    let k = u.degree();
    if k < 2 {
        return Err(Error::Degree { op: "lambda_omega", degree: k });
    }
    Ok(apply_map(u, &tables().lomega[k - 2], k - 2, true))
}

/// Split a 2-form into self-dual and anti-self-dual parts.
pub fn sd_asd_project(f: &Form) -> Result<(Form, Form)> {
    f.expect_degree("sd_asd_project", 2)?;
    let star = hodge_star(f);
    let mut plus = f.add(&star);
    plus.scale(0.5);
    let mut minus = f.sub(&star);
    minus.scale(0.5);
    Ok((plus, minus))
}

pub fn hodge_star_c(u: &CForm) -> CForm {
    CForm { re: hodge_star(&u.re), im: hodge_star(&u.im) }
}

pub fn lomega_c(u: &CForm) -> Result<CForm> {
    Ok(CForm { re: lomega(&u.re)?, im: lomega(&u.im)? })
}

pub fn lambda_omega_c(u: &CForm) -> Result<CForm> {
    Ok(CForm { re: lambda_omega(&u.re)?, im: lambda_omega(&u.im)? })
}

/// Run `f(a_in, b_in, a_out, b_out)` per site and generator, where `a`/`b`
/// are the real/imaginary component vectors at that site.
fn pointwise_c(
    u: &CForm,
    out_degree: usize,
    f: impl Fn(&[f64], &[f64], &mut [f64], &mut [f64]),
) -> CForm {
    let grid = u.grid();
    let mut out = CForm::zeros(grid, u.group(), out_degree);
    let (ki, ko, dim) = (ncomp(u.degree()), ncomp(out_degree), u.re.dim());
    let mut a = vec![0.0; ki];
    let mut b = vec![0.0; ki];
    let mut ao = vec![0.0; ko];
    let mut bo = vec![0.0; ko];
    for site in 0..grid.sites() {
        for g in 0..dim {
            for c in 0..ki {
                a[c] = u.re.at(site, c)[g];
                b[c] = u.im.at(site, c)[g];
            }
            f(&a, &b, &mut ao, &mut bo);
            for c in 0..ko {
                out.re.at_mut(site, c)[g] = ao[c];
                out.im.at_mut(site, c)[g] = bo[c];
            }
        }
    }
    out
}

/// Projection of a complex 1-form onto its (0,1) part. On each pair
/// `(e^0, e^1)`, `(e^2, e^3)` this is `P = 1/2 [[1, i], [-i, 1]]`.
pub fn pi01(u: &CForm) -> Result<CForm> {
    if u.degree() != 1 {
        return Err(Error::Degree { op: "pi01", degree: u.degree() });
    }
    Ok(pointwise_c(u, 1, |a, b, ao, bo| {
        for p in [0, 2] {
            let q = p + 1;
            // x_p = (u_p + i u_q)/2, x_q = (-i u_p + u_q)/2
            ao[p] = 0.5 * (a[p] - b[q]);
            bo[p] = 0.5 * (b[p] + a[q]);
            ao[q] = 0.5 * (b[p] + a[q]);
            bo[q] = 0.5 * (-a[p] + b[q]);
        }
    }))
}

pub fn pi10(u: &CForm) -> Result<CForm> {
    Ok(u.sub(&pi01(u)?))
}

/// Coefficient `c` of `u^{0,2} = c dzbar^1 ^ dzbar^2`, as a complex 0-form.
pub fn coeff02(u: &CForm) -> Result<CForm> {
    if u.degree() != 2 {
        return Err(Error::Degree { op: "coeff02", degree: u.degree() });
    }
    Ok(pointwise_c(u, 0, |a, b, ao, bo| {
        ao[0] = 0.25 * (a[E02] - b[E03] - b[E12] - a[E13]);
        bo[0] = 0.25 * (b[E02] + a[E03] + a[E12] - b[E13]);
    }))
}

/// `c dzbar^1 ^ dzbar^2` for a complex 0-form `c`.
pub fn embed02(c: &CForm) -> Result<CForm> {
    if c.degree() != 0 {
        return Err(Error::Degree { op: "embed02", degree: c.degree() });
    }
    Ok(pointwise_c(c, 2, |a, b, ao, bo| {
        ao.fill(0.0);
        bo.fill(0.0);
        ao[E02] = a[0];
        bo[E02] = b[0];
        for e in [E03, E12] {
            ao[e] = b[0];
            bo[e] = -a[0];
        }
        ao[E13] = -a[0];
        bo[E13] = -b[0];
    }))
}

/// Coefficient `c` of `u^{2,0} = c dz^1 ^ dz^2`.
pub fn coeff20(u: &CForm) -> Result<CForm> {
    if u.degree() != 2 {
        return Err(Error::Degree { op: "coeff20", degree: u.degree() });
    }
    Ok(pointwise_c(u, 0, |a, b, ao, bo| {
        ao[0] = 0.25 * (a[E02] + b[E03] + b[E12] - a[E13]);
        bo[0] = 0.25 * (b[E02] - a[E03] - a[E12] - b[E13]);
    }))
}

pub fn embed20(c: &CForm) -> Result<CForm> {
    if c.degree() != 0 {
        return Err(Error::Degree { op: "embed20", degree: c.degree() });
    }
    Ok(pointwise_c(c, 2, |a, b, ao, bo| {
        ao.fill(0.0);
        bo.fill(0.0);
        ao[E02] = a[0];
        bo[E02] = b[0];
        for e in [E03, E12] {
            ao[e] = -b[0];
            bo[e] = a[0];
        }
        ao[E13] = -a[0];
        bo[E13] = -b[0];
    }))
}

pub fn pi02(u: &CForm) -> Result<CForm> {
    embed02(&coeff02(u)?)
}

pub fn pi20(u: &CForm) -> Result<CForm> {
    embed20(&coeff20(u)?)
}

pub fn pi11(u: &CForm) -> Result<CForm> {
    Ok(u.sub(&pi02(u)?).sub(&pi20(u)?))
}

/// Real 2-form as a complex form (zero imaginary part).
pub fn to_pq(f: &Form) -> CForm {
    CForm::from_real(f.clone())
}

/// Real part of a complex form.
pub fn to_real(u: &CForm) -> Form {
    u.re.clone()
}

/// Conjugate-adjoint `phi -> phi^*`. Real algebra elements are
/// anti-Hermitian matrices, so `(X (x) z)^* = -X (x) conj(z)` and in
/// coefficients this is `-conj(phi)`. A real 2-form has `F^{2,0} = -(F^{0,2})^*`.
pub fn conj_adjoint(u: &CForm) -> CForm {
    CForm { re: u.re.scaled(-1.0), im: u.im.clone() }
}

/// Type decomposition of a real 2-form.
#[derive(Debug, Clone)]
pub struct PqSplit {
    pub f20: CForm,
    pub f11_0: CForm,
    /// `Lambda_omega F`.
    pub trace: Form,
    pub f02: CForm,
}

impl PqSplit {
    /// `F^{2,0} + F^{1,1}_0 + 1/2 trace omega + F^{0,2}`.
    pub fn reassemble(&self) -> CForm {
        let mut out = self.f20.add(&self.f11_0).add(&self.f02);
        let tw = lomega(&self.trace).expect("trace is a 0-form");
        out.re.axpy(0.5, &tw);
        out
    }

    /// Self-dual part rebuilt from the type decomposition,
    /// `F^{2,0} + F^{0,2} + 1/2 trace omega`.
    pub fn self_dual(&self) -> Form {
        let mut out = self.f20.re.add(&self.f02.re);
        out.axpy(0.5, &lomega(&self.trace).expect("trace is a 0-form"));
        out
    }
}

pub fn pq_decompose(f: &Form) -> Result<PqSplit> {
    f.expect_degree("pq_decompose", 2)?;
    let fc = to_pq(f);
    let f20 = pi20(&fc)?;
    let f02 = pi02(&fc)?;
    let trace = lambda_omega(f)?;
    let mut f11_0 = fc.sub(&f20).sub(&f02);
    f11_0.re.axpy(-0.5, &lomega(&trace)?);
    Ok(PqSplit { f20, f11_0, trace, f02 })
}

/// Components `(B_1, B_2, B_3)` of a self-dual form
/// `B = B_1 (e^{01}+e^{23}) + B_2 (e^{02}+e^{31}) + B_3 (e^{03}+e^{12})`.
pub fn sd_components(b: &Form) -> Result<[Form; 3]> {
    b.expect_degree("sd_components", 2)?;
    let grid = b.grid();
    let mut out = [0, 1, 2].map(|_| Form::zeros(grid, b.group(), 0));
    for site in 0..grid.sites() {
        for g in 0..b.dim() {
            let v = |c: usize| b.at(site, c)[g];
            out[0].at_mut(site, 0)[g] = 0.5 * (v(E01) + v(E23));
            out[1].at_mut(site, 0)[g] = 0.5 * (v(E02) - v(E13));
            out[2].at_mut(site, 0)[g] = 0.5 * (v(E03) + v(E12));
        }
    }
    Ok(out)
}

/// Inverse of [`sd_components`].
pub fn sd_from_components(c: &[Form; 3]) -> Result<Form> {
    for x in c {
        x.expect_degree("sd_from_components", 0)?;
    }
    let grid = c[0].grid();
    let mut out = Form::zeros(grid, c[0].group(), 2);
    for site in 0..grid.sites() {
        for g in 0..c[0].dim() {
            let (b1, b2, b3) = (c[0].at(site, 0)[g], c[1].at(site, 0)[g], c[2].at(site, 0)[g]);
            out.at_mut(site, E01)[g] = b1;
            out.at_mut(site, E23)[g] = b1;
            out.at_mut(site, E02)[g] = b2;
            out.at_mut(site, E13)[g] = -b2;
            out.at_mut(site, E03)[g] = b3;
            out.at_mut(site, E12)[g] = b3;
        }
    }
    Ok(out)
}
