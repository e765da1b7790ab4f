use crate::algebra::GroupKind;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("group mismatch: {left:?} vs {right:?}")]
    GroupMismatch { left: GroupKind, right: GroupKind },

    #[error("grid mismatch: n={left} vs n={right}")]
    GridMismatch { left: usize, right: usize },

    #[error("form degree {degree} not valid for {op}")]
    Degree { op: &'static str, degree: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// The least eigenvalue of the covariant Laplacian on 0-forms is below the
    /// configured floor, so the Laplace solve is (numerically) singular.
    #[error("connection is near-reducible: lambda(A) = {lambda:.3e} < floor {floor:.3e}")]
    NearReducible { lambda: f64, floor: f64 },

    #[error("no contraction: {reason}")]
    NoContraction { reason: String },

    #[error("solver stagnated after {iterations} iterations (relative residual {residual:.3e})")]
    SolverStagnation { iterations: usize, residual: f64 },

    #[error("no convergence after {iterations} iterations (last change {change:.3e})")]
    NonConvergence { iterations: usize, change: f64 },

    #[error("step rejected {rejections} times in a row at step {step}")]
    StepRejectionLimit { step: usize, rejections: usize },

    #[error("input is not self-dual (anti-self-dual part has norm {residual:.3e})")]
    NotSelfDual { residual: f64 },

    #[error("field vanishes (max pointwise norm {max_norm:.3e} on {fraction:.1}% of sites)")]
    VanishingField { max_norm: f64, fraction: f64 },

    #[error("snapshot: {0}")]
    Snapshot(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
