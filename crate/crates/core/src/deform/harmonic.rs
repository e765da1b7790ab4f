use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::gauge::{curvature_split, d_a_star, del, del_star, delbar, delbar_star, Connection};
use crate::lattice::CForm;

/// Residuals describing how far a connection is from Yang-Mills with
/// harmonic curvature.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HarmonicityReport {
    /// `||d_A^* F_A||`.
    pub ym_residual: f64,
    /// `||dbar_A^* F^{0,2}||`.
    pub delbar_star_f02: f64,
    /// `||2 dbar_A^* F^{0,2} - i dbar_A Lambda F||`.
    pub identity_01: f64,
    /// `||2 del_A^* F^{2,0} + i del_A Lambda F||`.
    pub identity_10: f64,
    /// `||Lambda_omega F_A||`.
    pub trace_norm: f64,
    pub fplus_norm: f64,
    pub f02_norm: f64,
}

pub fn harmonicity_report(conn: &Connection) -> Result<HarmonicityReport> {
    let split = curvature_split(conn);
    let trace = CForm::from_real(split.trace.clone());
    let ds02 = delbar_star(&split.f02, conn)?;
    let ds20 = del_star(&split.f20, conn)?;
    let i_dbar_trace = delbar(&trace, conn)?.mul_i();
    let i_del_trace = del(&trace, conn)?.mul_i();
    let mut id01 = ds02.clone();
    id01.scale(2.0);
    let id01 = id01.sub(&i_dbar_trace);
    let mut id10 = ds20;
    id10.scale(2.0);
    let id10 = id10.add(&i_del_trace);
    Ok(HarmonicityReport {
        ym_residual: d_a_star(&split.f, conn)?.l2_norm(),
        delbar_star_f02: ds02.l2_norm(),
        identity_01: id01.l2_norm(),
        identity_10: id10.l2_norm(),
        trace_norm: split.trace.l2_norm(),
        fplus_norm: split.fplus.l2_norm(),
        f02_norm: split.f02.l2_norm(),
    })
}
