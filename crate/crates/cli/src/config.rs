//! Run configuration. Files are TOML with dotted section keys, e.g.
//!
//! ```toml
//! n = 8
//! group = "su2"
//! spectral.restarts = 2
//! deform.mode = "DiscreteResidual"
//! gap.amplitudes = [0.0, 0.05]
//! ```
//!
//! Every key has a default and unknown keys are rejected.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use ymk::deform::{DeformConfig, FlowConfig, FlowScheme};
use ymk::spectral::SpectralConfig;
use ymk::GroupKind;

use crate::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub n: usize,
    pub group: GroupKind,
    pub seed: u64,
    /// RMS size of the random starting connection.
    pub amplitude: f64,
    /// Fourier radius of random fields, in lattice modes.
    pub bandwidth: f64,
    pub out_dir: PathBuf,
    /// Write YMK1 snapshots of the fields a command produces.
    pub snapshots: bool,
    /// Test hook: perturb the curvature fed to the identity suite.
    pub corrupt: bool,
    pub spectral: SpectralConfig,
    pub deform: DeformConfig,
    pub flow: FlowConfig,
    pub check: CheckConfig,
    pub cutoff: CutoffConfig,
    pub continuity: ContinuityConfig,
    pub gap: GapConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        let spectral = SpectralConfig { restarts: 2, lambda_floor: 1e-5, ..SpectralConfig::default() };
        Self {
            n: 8,
            group: GroupKind::Su2,
            seed: 0,
            amplitude: 0.05,
            bandwidth: 2.0,
            out_dir: PathBuf::from("ymk-out"),
            snapshots: false,
            corrupt: false,
            spectral,
            deform: DeformConfig { lambda_floor: 1e-5, spectral, ..DeformConfig::default() },
            flow: FlowConfig { scheme: FlowScheme::Lbfgs, ..FlowConfig::default() },
            check: CheckConfig::default(),
            cutoff: CutoffConfig::default(),
            continuity: ContinuityConfig::default(),
            gap: GapConfig::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CheckConfig {
    /// Amplitude of the random connection for the exact identities.
    pub amplitude: f64,
    /// Amplitude of the smooth connection in the refinement pair.
    pub smooth_amplitude: f64,
    /// Largest residual accepted for round-off identities.
    pub tol: f64,
    /// Smallest observed order accepted for refined identities.
    pub min_order: f64,
}

impl Default for CheckConfig {
    fn default() -> Self {
        Self { amplitude: 0.5, smooth_amplitude: 0.3, tol: 1e-10, min_order: 0.8 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CutoffConfig {
    /// Radius ratios `N`.
    pub ratios: Vec<f64>,
    pub radius: f64,
    /// Corner smoothing half-width of the ramp.
    pub width: f64,
}

impl Default for CutoffConfig {
    fn default() -> Self {
        Self { ratios: vec![4.0, 16.0, 64.0], radius: 0.25, width: 0.1 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ContinuityConfig {
    /// Ascending ladder of `t` in `A_0 + t a`.
    pub ladder: Vec<f64>,
    /// RMS size of the direction `a`.
    pub direction_amplitude: f64,
}

impl Default for ContinuityConfig {
    fn default() -> Self {
        Self { ladder: vec![0.0, 1.0 / 32.0, 1.0 / 16.0, 0.125, 0.25, 0.5, 1.0], direction_amplitude: 0.1 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GapConfig {
    pub seeds: Vec<u64>,
    pub amplitudes: Vec<f64>,
    /// Compute the constrained `mu` per cell (the most expensive stage).
    pub mu: bool,
    /// Fraction of cells that must complete for exit 0.
    pub min_complete: f64,
}

impl Default for GapConfig {
    fn default() -> Self {
        Self { seeds: vec![0, 1], amplitudes: vec![0.0, 0.05, 0.1], mu: true, min_complete: 0.9 }
    }
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let bad = |m: &str| Err(CliError::Config(m.to_string()));
        if self.n < 2 {
            return bad("n must be at least 2");
        }
        if !(self.amplitude >= 0.0) || !(self.bandwidth > 0.0) {
            return bad("amplitude must be >= 0 and bandwidth > 0");
        }
        if self.continuity.ladder.windows(2).any(|w| !(w[0] < w[1])) {
            return bad("continuity.ladder must be strictly ascending");
        }
        if !(0.0..=1.0).contains(&self.gap.min_complete) {
            return bad("gap.min_complete must lie in [0, 1]");
        }
        self.spectral.validate().map_err(|e| CliError::Config(e.to_string()))?;
        self.deform.validate().map_err(|e| CliError::Config(e.to_string()))?;
        Ok(())
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serialises")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dotted_keys_override_defaults() {
        let cfg = RunConfig::from_toml("n = 4\ngroup = \"u1\"\nspectral.restarts = 5\ngap.seeds = [3]\n").unwrap();
        assert_eq!(cfg.n, 4);
        assert_eq!(cfg.group, GroupKind::U1);
        assert_eq!(cfg.spectral.restarts, 5);
        assert_eq!(cfg.gap.seeds, vec![3]);
        assert_eq!(cfg.flow, RunConfig::default().flow);
    }

    #[test]
    fn unknown_keys_and_bad_values_are_rejected() {
        assert!(RunConfig::from_toml("nn = 4").is_err());
        assert!(RunConfig::from_toml("spectral.bogus = 1").is_err());
        assert!(RunConfig::from_toml("n = 1").is_err());
        assert!(RunConfig::from_toml("deform.rho_max = 2.0").is_err());
    }

    #[test]
    fn round_trips_through_toml() {
        let cfg = RunConfig::default();
        assert_eq!(RunConfig::from_toml(&cfg.to_toml()).unwrap(), cfg);
    }
}
