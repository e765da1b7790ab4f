//! Connections, curvature, covariant operators and energies.

mod random;
mod transform;

pub use random::{random_connection, random_field};
pub use transform::{apply_gauge, GaugeTransform};

use crate::algebra::{bracket_acc, GroupKind, TRACE_PAIRING};
use crate::error::{Error, Result};
use crate::lattice::algebraic::{pi01, pi02, pi10, pi20};
use crate::lattice::basis::index_of;
use crate::lattice::diff::{
    covariant_diff, covariant_diff_adjoint, exterior_coderivative, exterior_derivative,
};
use crate::lattice::{hodge_star, lomega, pq_decompose, sd_asd_project, CForm, Form, Torus4};

/// Lie-algebra-valued 1-form `A_mu(x)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Connection {
    a: Form,
}

impl Connection {
    pub fn new(a: Form) -> Result<Self> {
        a.expect_degree("connection", 1)?;
        if !a.is_finite() {
            return Err(Error::InvalidArgument("connection has non-finite components".into()));
        }
        Ok(Self { a })
    }

    pub fn zero(grid: Torus4, group: GroupKind) -> Self {
        Self { a: Form::zeros(grid, group, 1) }
    }

    #[inline]
    pub fn form(&self) -> &Form {
        &self.a
    }

    pub fn into_form(self) -> Form {
        self.a
    }

    pub fn grid(&self) -> Torus4 {
        self.a.grid()
    }

    pub fn group(&self) -> GroupKind {
        self.a.group()
    }

    /// `A + t b`.
    pub fn shifted(&self, t: f64, b: &Form) -> Result<Connection> {
        self.a.check_compatible(b)?;
        let mut a = self.a.clone();
        a.axpy(t, b);
        Ok(Connection { a })
    }
}

/// `F_{mu nu} = d^+_mu A_nu - d^+_nu A_mu + [A_mu, A_nu]`.
pub fn curvature(conn: &Connection) -> Form {
    let a = conn.form();
    let mut f = exterior_derivative(a, None).expect("1-form");
    let kind = a.group();
    if kind.is_abelian() {
        return f;
    }
    for site in 0..a.grid().sites() {
        for mu in 0..4 {
            for nu in mu + 1..4 {
                let c = index_of(2, (1 << mu) | (1 << nu)).unwrap();
                let o = f.offset(site, c);
                let d = kind.dim();
                let (am, an) = (a.at(site, mu), a.at(site, nu));
                bracket_acc(kind, 1.0, am, an, &mut f.data_mut()[o..o + d]);
            }
        }
    }
    f
}

pub fn d_a(u: &Form, conn: &Connection) -> Result<Form> {
    exterior_derivative(u, Some(conn.form()))
}

pub fn d_a_star(u: &Form, conn: &Connection) -> Result<Form> {
    exterior_coderivative(u, Some(conn.form()))
}

pub fn d_a_c(u: &CForm, conn: &Connection) -> Result<CForm> {
    Ok(CForm { re: d_a(&u.re, conn)?, im: d_a(&u.im, conn)? })
}

pub fn d_a_star_c(u: &CForm, conn: &Connection) -> Result<CForm> {
    Ok(CForm { re: d_a_star(&u.re, conn)?, im: d_a_star(&u.im, conn)? })
}

#[derive(Clone, Copy)]
enum Holo {
    Anti,
    Holo,
}

/// Projection onto the pure type `(k,0)` or `(0,k)`.
fn pure_type(u: &CForm, which: Holo) -> Result<CForm> {
    match (u.degree(), which) {
        (0, _) => Ok(u.clone()),
        (1, Holo::Anti) => pi01(u),
        (1, Holo::Holo) => pi10(u),
        (2, Holo::Anti) => pi02(u),
        (2, Holo::Holo) => pi20(u),
        // No (0,3) or (3,0) forms in complex dimension two.
        (3 | 4, _) => Ok(u.zeros_like()),
        _ => unreachable!(),
    }
}

fn typed_d(u: &CForm, conn: &Connection, which: Holo) -> Result<CForm> {
    if u.degree() >= 4 {
        return Err(Error::Degree { op: "delbar/del", degree: u.degree() });
    }
    pure_type(&d_a_c(&pure_type(u, which)?, conn)?, which)
}

fn typed_d_star(u: &CForm, conn: &Connection, which: Holo) -> Result<CForm> {
    if u.degree() == 0 {
        return Err(Error::Degree { op: "delbar_star/del_star", degree: 0 });
    }
    pure_type(&d_a_star_c(&pure_type(u, which)?, conn)?, which)
}

/// `dbar_A = pi^{0,q+1} d_A pi^{0,q}`.
pub fn delbar(u: &CForm, conn: &Connection) -> Result<CForm> {
    typed_d(u, conn, Holo::Anti)
}

/// Hermitian adjoint of [`delbar`].
pub fn delbar_star(u: &CForm, conn: &Connection) -> Result<CForm> {
    typed_d_star(u, conn, Holo::Anti)
}

/// `del_A = pi^{p+1,0} d_A pi^{p,0}`.
pub fn del(u: &CForm, conn: &Connection) -> Result<CForm> {
    typed_d(u, conn, Holo::Holo)
}

pub fn del_star(u: &CForm, conn: &Connection) -> Result<CForm> {
    typed_d_star(u, conn, Holo::Holo)
}

/// `nabla_A u` as its four directional components `D_mu u`.
pub fn nabla(u: &Form, conn: &Connection) -> Result<[Form; 4]> {
    let a = Some(conn.form());
    Ok([
        covariant_diff(u, a, 0)?,
        covariant_diff(u, a, 1)?,
        covariant_diff(u, a, 2)?,
        covariant_diff(u, a, 3)?,
    ])
}

/// Adjoint of [`nabla`]: `sum_mu D_mu^T w_mu`.
pub fn nabla_star(w: &[Form; 4], conn: &Connection) -> Result<Form> {
    let mut out = covariant_diff_adjoint(&w[0], Some(conn.form()), 0)?;
    for (mu, wm) in w.iter().enumerate().skip(1) {
        out.axpy(1.0, &covariant_diff_adjoint(wm, Some(conn.form()), mu)?);
    }
    Ok(out)
}

/// `||nabla_A u||^2`.
pub fn nabla_norm_sq(u: &Form, conn: &Connection) -> Result<f64> {
    Ok(nabla(u, conn)?.iter().map(Form::norm_sq).sum())
}

/// Rough Laplacian `nabla_A^* nabla_A`.
pub fn laplacian_nabla(u: &Form, conn: &Connection) -> Result<Form> {
    nabla_star(&nabla(u, conn)?, conn)
}

pub fn laplacian_nabla_c(u: &CForm, conn: &Connection) -> Result<CForm> {
    Ok(CForm { re: laplacian_nabla(&u.re, conn)?, im: laplacian_nabla(&u.im, conn)? })
}

/// `d_A^*(s omega)` for a real 0-form `s`; in the continuum this equals
/// `i (del_A s - delbar_A s)`.
pub fn twist(s: &Form, conn: &Connection) -> Result<Form> {
    s.expect_degree("twist", 0)?;
    d_a_star(&lomega(s)?, conn)
}

/// `i (del_A s - delbar_A s)` computed through the type projections.
pub fn twist_via_types(s: &Form, conn: &Connection) -> Result<Form> {
    let sc = CForm::from_real(s.clone());
    let v = del(&sc, conn)?.sub(&delbar(&sc, conn)?).mul_i();
    Ok(v.re)
}

pub fn ym_energy(conn: &Connection) -> f64 {
    curvature(conn).norm_sq()
}

/// Terms of `YM = 4 ||F^{0,2}||^2 + ||Lambda F||^2 + top`.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct EnergySplit {
    pub f02_sq: f64,
    pub trace_sq: f64,
    /// `int tr(F ^ F)` with the pairing constant [`TRACE_PAIRING`].
    pub top: f64,
    pub ym: f64,
}

impl EnergySplit {
    pub fn recombined(&self) -> f64 {
        4.0 * self.f02_sq + self.trace_sq + self.top
    }

    pub fn relative_defect(&self) -> f64 {
        (self.ym - self.recombined()).abs() / self.ym.max(f64::MIN_POSITIVE)
    }
}

pub fn energy_split_of(f: &Form) -> Result<EnergySplit> {
    let split = pq_decompose(f)?;
    Ok(EnergySplit {
        f02_sq: split.f02.norm_sq(),
        trace_sq: split.trace.norm_sq(),
        top: TRACE_PAIRING * f.inner(&hodge_star(f)),
        ym: f.norm_sq(),
    })
}

pub fn energy_split(conn: &Connection) -> EnergySplit {
    energy_split_of(&curvature(conn)).expect("curvature is a 2-form")
}

/// All pieces of the curvature.
#[derive(Debug, Clone)]
pub struct CurvatureSplit {
    pub f: Form,
    pub f20: CForm,
    pub f11_0: CForm,
    /// `Lambda_omega F`.
    pub trace: Form,
    pub f02: CForm,
    pub fplus: Form,
    pub fminus: Form,
}

pub fn curvature_split(conn: &Connection) -> CurvatureSplit {
    let f = curvature(conn);
    let pq = pq_decompose(&f).expect("2-form");
    let (fplus, fminus) = sd_asd_project(&f).expect("2-form");
    CurvatureSplit { f, f20: pq.f20, f11_0: pq.f11_0, trace: pq.trace, f02: pq.f02, fplus, fminus }
}
