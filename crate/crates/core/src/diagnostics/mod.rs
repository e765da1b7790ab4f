//! Identity and structure checks: Weitzenböck residuals, the integrated
//! Yang-Mills identity, rank-one structure of (0,2)-fields, the `[B.B]`
//! map on self-dual forms and L^p ratios of `F^{0,2}`.

mod identities;
mod structure;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::lattice::{CForm, Form};

pub use identities::{
    exact_identities, identity_suite, weitzenbock_02, weitzenbock_pair, ym_integral_identity, SuiteOptions,
    SuiteReport,
};
pub use structure::{
    dot_bracket_map, dot_bracket_pair, f_sigma_split, lp_ratio_probe, rank_one_check, FSigmaSplit, LpRatio,
    RankOneReport, ZERO_THRESHOLD,
};

/// One identity residual, optionally paired with a coarser run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdentityReport {
    pub name: String,
    pub n: usize,
    pub residual: f64,
    /// Size of the terms the residual is relative to.
    pub norm_scale: f64,
    /// `log2(residual_n / residual_2n)` when a refinement pair was run.
    pub order_estimate: Option<f64>,
    pub inputs_digest: String,
}

impl IdentityReport {
    pub(crate) fn new(name: &str, n: usize, residual: f64, norm_scale: f64, digest: String) -> Self {
        Self { name: name.to_string(), n, residual, norm_scale, order_estimate: None, inputs_digest: digest }
    }
}

/// Below this both residuals count as exact and no order is estimated.
const ORDER_FLOOR: f64 = 1e-13;

/// Observed order from residuals at spacing `h` and `h/2`; `None` when
/// the finer residual is at round-off level.
pub fn order_estimate(coarse: f64, fine: f64) -> Option<f64> {
    if fine <= ORDER_FLOOR || coarse <= ORDER_FLOOR {
        None
    } else {
        Some((coarse / fine).log2())
    }
}

/// Short SHA-256 digest of the raw field values.
pub fn digest_forms(forms: &[&Form]) -> String {
    let mut hasher = Sha256::new();
    for f in forms {
        hasher.update((f.grid().n() as u64).to_le_bytes());
        hasher.update([f.degree() as u8, f.dim() as u8]);
        for x in f.data() {
            hasher.update(x.to_le_bytes());
        }
    }
    let out = hasher.finalize();
    out.iter().take(8).map(|b| format!("{b:02x}")).collect()
}

pub(crate) fn digest_cforms(forms: &[&CForm]) -> String {
    let parts: Vec<&Form> = forms.iter().flat_map(|c| [&c.re, &c.im]).collect();
    digest_forms(&parts)
}

#[cfg(test)]
mod tests;
