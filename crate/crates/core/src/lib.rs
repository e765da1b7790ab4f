//! Yang-Mills fields on a discretized flat Kähler 4-torus.
//!
//! Lie-algebra-valued forms live on a periodic `n^4` grid. On top of the
//! lattice calculus sit covariant operators and curvature splits
//! ([`gauge`]), least-eigenvalue solvers ([`spectral`]), the trace-deformation
//! iteration and Yang-Mills gradient flow ([`deform`]) and identity checks
//! ([`diagnostics`]).

pub mod algebra;
pub mod deform;
pub mod diagnostics;
pub mod error;
pub mod gauge;
pub mod lattice;
pub mod spectral;

pub use algebra::{CLieElement, GroupKind, LieElement};
pub use error::{Error, Result};
pub use lattice::{CForm, Form, Torus4};
