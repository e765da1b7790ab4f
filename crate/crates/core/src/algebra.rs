//! Finite-dimensional Lie-algebra kernel.
//!
//! Elements are coefficient vectors in a fixed orthonormal basis `e_1..e_d`.
//! For su(2) and so(3) the bracket is the cross product (`[e1,e2] = e3`), for
//! u(1) it vanishes. The inner product is Euclidean on coefficients, which is
//! ad-invariant exactly.
//!
//! The slice-level helpers (`bracket_into`, `bracket_acc`, `dot`) are what the
//! lattice stencils call in their inner loops.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Normalisation of the trace pairing used for the topological term:
/// `tr(X Y) = TRACE_PAIRING * <X, Y>`.
///
/// With unit-norm coframe 2-forms this is the value for which
/// `|F|^2 = 4|F^{0,2}|^2 + |Lambda F|^2 + tr(F ^ F)` holds pointwise.
pub const TRACE_PAIRING: f64 = -1.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GroupKind {
    Su2,
    So3,
    U1,
}

impl GroupKind {
    pub const fn dim(self) -> usize {
        match self {
            GroupKind::Su2 | GroupKind::So3 => 3,
            GroupKind::U1 => 1,
        }
    }

    pub const fn is_abelian(self) -> bool {
        matches!(self, GroupKind::U1)
    }

    /// Tag used in binary snapshots.
    pub const fn tag(self) -> u32 {
        match self {
            GroupKind::Su2 => 0,
            GroupKind::So3 => 1,
            GroupKind::U1 => 2,
        }
    }

    pub fn from_tag(tag: u32) -> Option<Self> {
        match tag {
            0 => Some(GroupKind::Su2),
            1 => Some(GroupKind::So3),
            2 => Some(GroupKind::U1),
            _ => None,
        }
    }

    pub fn check_same(self, other: GroupKind) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(Error::GroupMismatch { left: self, right: other })
        }
    }
}

impl fmt::Display for GroupKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            GroupKind::Su2 => "su2",
            GroupKind::So3 => "so3",
            GroupKind::U1 => "u1",
        })
    }
}

impl FromStr for GroupKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "su2" | "su(2)" => Ok(GroupKind::Su2),
            "so3" | "so(3)" => Ok(GroupKind::So3),
            "u1" | "u(1)" => Ok(GroupKind::U1),
            other => Err(Error::InvalidArgument(format!("unknown group '{other}'"))),
        }
    }
}

/// `out = [a, b]` for coefficient slices of length `kind.dim()`.
#[inline]
pub fn bracket_into(kind: GroupKind, a: &[f64], b: &[f64], out: &mut [f64]) {
    match kind {
        GroupKind::Su2 | GroupKind::So3 => {
            out[0] = a[1] * b[2] - a[2] * b[1];
            out[1] = a[2] * b[0] - a[0] * b[2];
            out[2] = a[0] * b[1] - a[1] * b[0];
        }
        GroupKind::U1 => out[0] = 0.0,
    }
}

/// `out += scale * [a, b]`.
#[inline]
pub fn bracket_acc(kind: GroupKind, scale: f64, a: &[f64], b: &[f64], out: &mut [f64]) {
    if let GroupKind::Su2 | GroupKind::So3 = kind {
        out[0] += scale * (a[1] * b[2] - a[2] * b[1]);
        out[1] += scale * (a[2] * b[0] - a[0] * b[2]);
        out[2] += scale * (a[0] * b[1] - a[1] * b[0]);
    }
}

#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LieElement {
    kind: GroupKind,
    coeffs: [f64; 3],
}

impl LieElement {
    pub fn zero(kind: GroupKind) -> Self {
        Self { kind, coeffs: [0.0; 3] }
    }

    /// Basis element `e_{index+1}`.
    pub fn basis(kind: GroupKind, index: usize) -> Result<Self> {
        if index >= kind.dim() {
            return Err(Error::InvalidArgument(format!(
                "basis index {index} out of range for {kind}"
            )));
        }
        let mut e = Self::zero(kind);
        e.coeffs[index] = 1.0;
        Ok(e)
    }

    pub fn from_slice(kind: GroupKind, c: &[f64]) -> Result<Self> {
        if c.len() != kind.dim() {
            return Err(Error::InvalidArgument(format!(
                "{kind} element needs {} coefficients, got {}",
                kind.dim(),
                c.len()
            )));
        }
        let mut e = Self::zero(kind);
        e.coeffs[..c.len()].copy_from_slice(c);
        Ok(e)
    }

    pub fn kind(&self) -> GroupKind {
        self.kind
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs[..self.kind.dim()]
    }

    pub fn bracket(&self, other: &Self) -> Result<Self> {
        self.kind.check_same(other.kind)?;
        let mut out = Self::zero(self.kind);
        bracket_into(self.kind, &self.coeffs, &other.coeffs, &mut out.coeffs);
        Ok(out)
    }

    pub fn inner(&self, other: &Self) -> Result<f64> {
        self.kind.check_same(other.kind)?;
        Ok(dot(self.coeffs(), other.coeffs()))
    }

    pub fn norm(&self) -> f64 {
        dot(self.coeffs(), self.coeffs()).sqrt()
    }

    pub fn scale(&self, s: f64) -> Self {
        let mut out = *self;
        out.coeffs.iter_mut().for_each(|c| *c *= s);
        out
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.kind.check_same(other.kind)?;
        let mut out = *self;
        for (o, b) in out.coeffs.iter_mut().zip(other.coeffs) {
            *o += b;
        }
        Ok(out)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.scale(-1.0))
    }
}

/// Element of the complexified algebra `g (x) C`, stored as `re + i im`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CLieElement {
    pub re: LieElement,
    pub im: LieElement,
}

impl CLieElement {
    pub fn new(re: LieElement, im: LieElement) -> Result<Self> {
        re.kind.check_same(im.kind)?;
        Ok(Self { re, im })
    }

    pub fn real(re: LieElement) -> Self {
        Self { re, im: LieElement::zero(re.kind) }
    }

    pub fn kind(&self) -> GroupKind {
        self.re.kind
    }

    /// Complex-bilinear bracket.
    pub fn cbracket(&self, other: &Self) -> Result<Self> {
        self.kind().check_same(other.kind())?;
        let re = self.re.bracket(&other.re)?.sub(&self.im.bracket(&other.im)?)?;
        let im = self.re.bracket(&other.im)?.add(&self.im.bracket(&other.re)?)?;
        Ok(Self { re, im })
    }

    /// Hermitian inner product `sum conj(a_i) b_i`, returned as `(re, im)`.
    pub fn cinner(&self, other: &Self) -> Result<(f64, f64)> {
        self.kind().check_same(other.kind())?;
        let re = self.re.inner(&other.re)? + self.im.inner(&other.im)?;
        let im = self.re.inner(&other.im)? - self.im.inner(&other.re)?;
        Ok((re, im))
    }

    pub fn norm_sq(&self) -> f64 {
        self.re.norm().powi(2) + self.im.norm().powi(2)
    }
}
