use serde::{Deserialize, Serialize};

use crate::algebra::{bracket_acc, GroupKind};
use crate::error::{Error, Result};
use crate::gauge::{
    curvature, d_a, d_a_star, delbar, delbar_star, energy_split_of, laplacian_nabla_c, nabla, nabla_norm_sq, nabla_star,
    random_connection, random_field, Connection,
};
use crate::lattice::algebraic::{embed02, lambda_omega, pi02, pq_decompose, sd_asd_project};
use crate::lattice::{hodge_star, CForm, Form, Torus4};

use super::{digest_cforms, digest_forms, order_estimate, IdentityReport};

/// Pointwise `[a, u]` of a 0-form `a` with a form `u` of any degree.
pub(crate) fn bracket_0k(a: &Form, u: &Form) -> Form {
    let mut out = u.zeros_like();
    let (d, kind) = (u.dim(), u.group());
    for s in 0..u.grid().sites() {
        for c in 0..u.ncomp() {
            let o = out.offset(s, c);
            bracket_acc(kind, 1.0, a.at(s, 0), u.at(s, c), &mut out.data_mut()[o..o + d]);
        }
    }
    out
}

fn ratio(num: f64, den: f64) -> f64 {
    if den > 0.0 {
        num / den
    } else {
        num
    }
}

/// Residual of `2 (dbar dbar^* + dbar^* dbar) phi = nabla^* nabla phi + [i Lambda F, phi]`
/// on the (0,2) part of `phi`, relative to `||phi||`. In the normalisation
/// used here the Dolbeault Laplacian is half the rough Laplacian on
/// flat space, hence the factor 2.
pub fn weitzenbock_02(conn: &Connection, phi: &CForm) -> Result<IdentityReport> {
    if phi.degree() != 2 {
        return Err(Error::Degree { op: "weitzenbock_02", degree: phi.degree() });
    }
    let phi = pi02(phi)?;
    let mut lhs = delbar(&delbar_star(&phi, conn)?, conn)?.add(&delbar_star(&delbar(&phi, conn)?, conn)?);
    lhs.scale(2.0);
    let rough = laplacian_nabla_c(&phi, conn)?;
    let trace = lambda_omega(&curvature(conn))?;
    let curv = CForm { re: bracket_0k(&trace, &phi.re), im: bracket_0k(&trace, &phi.im) }.mul_i();
    let defect = lhs.sub(&rough).sub(&curv);
    let norm = phi.l2_norm();
    Ok(IdentityReport::new(
        "weitzenbock_02",
        conn.grid().n(),
        ratio(defect.l2_norm(), norm),
        ratio(rough.l2_norm(), norm),
        digest_cforms(&[&CForm::from_real(conn.form().clone()), &phi]),
    ))
}

/// Smooth prescribed pair on an `n` grid: a band-limited connection of the
/// given amplitude and a band-limited (0,2)-form, both from `seed`.
fn prescribed(n: usize, group: GroupKind, seed: u64, amplitude: f64) -> Result<(Connection, CForm)> {
    let grid = Torus4::new(n)?;
    let conn = random_connection(grid, group, seed, amplitude, 1.0)?;
    let c = CForm::new(
        random_field(grid, group, 0, seed.wrapping_add(1), 1.0, 1.0)?,
        random_field(grid, group, 0, seed.wrapping_add(2), 1.0, 1.0)?,
    )?;
    Ok((conn, embed02(&c)?))
}

/// [`weitzenbock_02`] on the prescribed smooth pair at `n` and `2n`; the
/// report is for `2n` and carries the observed order.
pub fn weitzenbock_pair(n: usize, group: GroupKind, seed: u64, amplitude: f64) -> Result<IdentityReport> {
    let (a, phi) = prescribed(n, group, seed, amplitude)?;
    let coarse = weitzenbock_02(&a, &phi)?;
    let (a, phi) = prescribed(2 * n, group, seed, amplitude)?;
    let mut fine = weitzenbock_02(&a, &phi)?;
    fine.order_estimate = order_estimate(coarse.residual, fine.residual);
    if amplitude == 0.0 {
        fine.name = "weitzenbock_02_flat".into();
    }
    Ok(fine)
}

/// `| ||dbar_A Lambda F||^2 - ||nabla_A F^{0,2}||^2 |` over the larger side.
/// For Yang-Mills connections on the flat torus the two sides agree; in
/// this normalisation the constant in front of the first term is 1.
pub fn ym_integral_identity(conn: &Connection) -> Result<IdentityReport> {
    let f = curvature(conn);
    let split = pq_decompose(&f)?;
    let lhs = delbar(&CForm::from_real(split.trace.clone()), conn)?.norm_sq();
    let rhs = nabla_norm_sq(&split.f02.re, conn)? + nabla_norm_sq(&split.f02.im, conn)?;
    let scale = lhs.max(rhs);
    Ok(IdentityReport::new(
        "ym_integral_identity",
        conn.grid().n(),
        ratio((lhs - rhs).abs(), scale),
        scale,
        digest_forms(&[conn.form()]),
    ))
}

fn adjoint_defect(lhs: f64, rhs: f64, scale: f64) -> (f64, f64) {
    (ratio((lhs - rhs).abs(), scale), scale)
}

/// Identities that hold to round-off on the lattice: adjointness of the
/// covariant operators, SD/ASD and type reassembly, the two constructions
/// of `F^+` and the energy decomposition. `corrupt` perturbs the curvature
/// fed to the type decomposition (a test hook for the failure path).
pub fn exact_identities(conn: &Connection, seed: u64, corrupt: bool) -> Result<Vec<IdentityReport>> {
    let grid = conn.grid();
    let group = conn.group();
    let n = grid.n();
    let digest = digest_forms(&[conn.form()]);
    let mut out = Vec::new();
    let mut push = |name: &str, (res, scale): (f64, f64)| {
        out.push(IdentityReport::new(name, n, res, scale, digest.clone()));
    };
    let field = |deg: usize, k: u64| random_field(grid, group, deg, seed.wrapping_mul(31).wrapping_add(k), 1.0, 3.0);

    for k in 0..4 {
        let u = field(k, 10 + k as u64)?;
        let v = field(k + 1, 20 + k as u64)?;
        let du = d_a(&u, conn)?;
        let dsv = d_a_star(&v, conn)?;
        let scale = du.l2_norm() * v.l2_norm() + u.l2_norm() * dsv.l2_norm();
        push(&format!("adjoint_d_a_{k}"), adjoint_defect(du.inner(&v), u.inner(&dsv), scale));
    }
    for q in 0..2 {
        let u = CForm::new(field(q, 30 + q as u64)?, field(q, 40 + q as u64)?)?;
        let v = CForm::new(field(q + 1, 50 + q as u64)?, field(q + 1, 60 + q as u64)?)?;
        let du = delbar(&u, conn)?;
        let dsv = delbar_star(&v, conn)?;
        let (l, r) = (du.inner(&v), u.inner(&dsv));
        let scale = du.l2_norm() * v.l2_norm() + u.l2_norm() * dsv.l2_norm();
        let defect = (l.0 - r.0).hypot(l.1 - r.1);
        push(&format!("adjoint_delbar_0{q}"), (ratio(defect, scale), scale));
    }
    let u = field(0, 70)?;
    let w = [field(0, 71)?, field(0, 72)?, field(0, 73)?, field(0, 74)?];
    let nu = nabla(&u, conn)?;
    let nsw = nabla_star(&w, conn)?;
    let lhs: f64 = nu.iter().zip(&w).map(|(a, b)| a.inner(b)).sum();
    let nu_norm = nu.iter().map(Form::norm_sq).sum::<f64>().sqrt();
    let w_norm = w.iter().map(Form::norm_sq).sum::<f64>().sqrt();
    let scale = nu_norm * w_norm + u.l2_norm() * nsw.l2_norm();
    push("adjoint_nabla", adjoint_defect(lhs, u.inner(&nsw), scale));

    let f = curvature(conn);
    let fnorm = f.l2_norm();
    let (plus, minus) = sd_asd_project(&f)?;
    let sd_defect = f.sub(&plus).sub(&minus).l2_norm()
        + hodge_star(&plus).sub(&plus).l2_norm()
        + hodge_star(&minus).add(&minus).l2_norm();
    push("sd_asd_reassembly", (ratio(sd_defect, fnorm), fnorm));

    let mut fed = f.clone();
    if corrupt && fed.data().len() > 0 {
        fed.data_mut()[0] += 1e-3 * fnorm.max(1.0);
    }
    let split = pq_decompose(&fed)?;
    push("pq_reassembly", (ratio(split.reassemble().sub(&CForm::from_real(f.clone())).l2_norm(), fnorm), fnorm));
    push("fplus_two_ways", (ratio(split.self_dual().sub(&plus).l2_norm(), plus.l2_norm()), plus.l2_norm()));
    let e = energy_split_of(&f)?;
    push("energy_decomposition", (e.relative_defect(), e.ym));
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SuiteOptions {
    pub n: usize,
    pub group: GroupKind,
    pub seed: u64,
    /// Amplitude of the random connection used by the exact identities.
    pub amplitude: f64,
    /// Amplitude of the smooth connection in the refinement pair.
    pub smooth_amplitude: f64,
    pub corrupt: bool,
}

impl Default for SuiteOptions {
    fn default() -> Self {
        Self { n: 8, group: GroupKind::Su2, seed: 0, amplitude: 0.5, smooth_amplitude: 0.3, corrupt: false }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    /// Round-off identities at `n` and `n/2`.
    pub exact: Vec<IdentityReport>,
    /// Discretisation-limited identities with their observed order.
    pub refined: Vec<IdentityReport>,
}

impl SuiteReport {
    pub fn all(&self) -> impl Iterator<Item = &IdentityReport> {
        self.exact.iter().chain(&self.refined)
    }

    /// Exact identities above `tol` and refined ones with order below
    /// `min_order`.
    pub fn failures(&self, tol: f64, min_order: f64) -> Vec<&IdentityReport> {
        let exact = self.exact.iter().filter(|r| !(r.residual <= tol));
        let refined = self.refined.iter().filter(|r| match r.order_estimate {
            Some(p) => !(p >= min_order),
            None => !(r.residual <= tol),
        });
        exact.chain(refined).collect()
    }
}

/// Exact identities at `n` and `n/2` on a random connection, plus the
/// Weitzenböck refinement pair `(n, 2n)` for a smooth connection and for
/// the flat one.
pub fn identity_suite(opts: &SuiteOptions) -> Result<SuiteReport> {
    let mut exact = Vec::new();
    let mut sizes = vec![opts.n];
    if opts.n / 2 >= 2 {
        sizes.push(opts.n / 2);
    }
    for n in sizes {
        let conn = random_connection(Torus4::new(n)?, opts.group, opts.seed, opts.amplitude, 3.0)?;
        exact.extend(exact_identities(&conn, opts.seed, opts.corrupt)?);
    }
    let refined = vec![
        weitzenbock_pair(opts.n, opts.group, opts.seed, opts.smooth_amplitude)?,
        weitzenbock_pair(opts.n, opts.group, opts.seed, 0.0)?,
    ];
    Ok(SuiteReport { exact, refined })
}
