use crate::algebra::GroupKind;
use crate::error::{Error, Result};
use crate::lattice::{Form, Torus4};

use super::Connection;

type Quat = [f64; 4];

fn qmul(a: Quat, b: Quat) -> Quat {
    [
        a[0] * b[0] - a[1] * b[1] - a[2] * b[2] - a[3] * b[3],
        a[0] * b[1] + a[1] * b[0] + a[2] * b[3] - a[3] * b[2],
        a[0] * b[2] - a[1] * b[3] + a[2] * b[0] + a[3] * b[1],
        a[0] * b[3] + a[1] * b[2] - a[2] * b[1] + a[3] * b[0],
    ]
}

fn qconj(a: Quat) -> Quat {
    [a[0], -a[1], -a[2], -a[3]]
}

/// Per-site group element as a unit quaternion `(w, x, y, z)`. The algebra
/// basis `e_i` corresponds to half the imaginary units, so `g X g^-1` is the
/// rotation of the coefficient vector by `g`. For U1 only `(cos, sin, 0, 0)`
/// phases occur.
#[derive(Debug, Clone, PartialEq)]
pub struct GaugeTransform {
    grid: Torus4,
    group: GroupKind,
    q: Vec<Quat>,
}

impl GaugeTransform {
    pub fn identity(grid: Torus4, group: GroupKind) -> Self {
        Self { grid, group, q: vec![[1.0, 0.0, 0.0, 0.0]; grid.sites()] }
    }

    pub fn constant(grid: Torus4, group: GroupKind, q: Quat) -> Result<Self> {
        let q = normalise(group, q)?;
        Ok(Self { grid, group, q: vec![q; grid.sites()] })
    }

    /// `g = exp(chi)` sitewise for an algebra-valued 0-form `chi`.
    pub fn exp(chi: &Form) -> Result<Self> {
        chi.expect_degree("gauge exponential", 0)?;
        let group = chi.group();
        let q = (0..chi.grid().sites())
            .map(|site| {
                let c = chi.at(site, 0);
                match group {
                    GroupKind::U1 => {
                        let t = 0.5 * c[0];
                        [t.cos(), t.sin(), 0.0, 0.0]
                    }
                    _ => {
                        let r = (c[0] * c[0] + c[1] * c[1] + c[2] * c[2]).sqrt();
                        if r == 0.0 {
                            return [1.0, 0.0, 0.0, 0.0];
                        }
                        let s = (0.5 * r).sin() / r;
                        [(0.5 * r).cos(), s * c[0], s * c[1], s * c[2]]
                    }
                }
            })
            .collect();
        Ok(Self { grid: chi.grid(), group, q })
    }

    pub fn grid(&self) -> Torus4 {
        self.grid
    }

    pub fn at(&self, site: usize) -> Quat {
        self.q[site]
    }

    /// Largest deviation of `|g(x)|` from 1.
    pub fn unitarity_defect(&self) -> f64 {
        self.q
            .iter()
            .map(|q| (q.iter().map(|v| v * v).sum::<f64>().sqrt() - 1.0).abs())
            .fold(0.0, f64::max)
    }

    /// `g X g^-1` on coefficient vectors.
    fn adjoint(&self, site: usize, x: &[f64], out: &mut [f64]) {
        match self.group {
            GroupKind::U1 => out[0] = x[0],
            _ => {
                let q = self.q[site];
                let v = qmul(qmul(q, [0.0, x[0], x[1], x[2]]), qconj(q));
                out.copy_from_slice(&v[1..]);
            }
        }
    }

    /// Conjugate every component of an algebra-valued form.
    pub fn conjugate(&self, u: &Form) -> Result<Form> {
        self.check(u)?;
        let mut out = u.zeros_like();
        for site in 0..self.grid.sites() {
            for c in 0..u.ncomp() {
                self.adjoint(site, u.at(site, c), out.at_mut(site, c));
            }
        }
        Ok(out)
    }

    fn check(&self, u: &Form) -> Result<()> {
        self.group.check_same(u.group())?;
        if self.grid != u.grid() {
            return Err(Error::GridMismatch { left: self.grid.n(), right: u.grid().n() });
        }
        Ok(())
    }
}

fn normalise(group: GroupKind, q: Quat) -> Result<Quat> {
    let r = q.iter().map(|v| v * v).sum::<f64>().sqrt();
    if !(r > 0.0) || !r.is_finite() {
        return Err(Error::InvalidArgument("gauge element must be a nonzero quaternion".into()));
    }
    if group == GroupKind::U1 && (q[2] != 0.0 || q[3] != 0.0) {
        return Err(Error::InvalidArgument("u1 gauge element must be a phase (w, x, 0, 0)".into()));
    }
    Ok(q.map(|v| v / r))
}

/// `A -> g A g^-1 - (dg) g^-1` with forward differences.
pub fn apply_gauge(conn: &Connection, g: &GaugeTransform) -> Result<Connection> {
    let a = conn.form();
    let mut out = g.conjugate(a)?;
    let grid = a.grid();
    let inv_h = 1.0 / grid.h();
    for site in 0..grid.sites() {
        let q = g.q[site];
        let qi = qconj(q);
        for mu in 0..4 {
            let qn = g.q[grid.fwd(site, mu)];
            let dq = [qn[0] - q[0], qn[1] - q[1], qn[2] - q[2], qn[3] - q[3]];
            let m = qmul(dq, qi);
            let o = out.at_mut(site, mu);
            match g.group {
                GroupKind::U1 => o[0] -= 2.0 * m[1] * inv_h,
                _ => {
                    for i in 0..3 {
                        o[i] -= 2.0 * m[i + 1] * inv_h;
                    }
                }
            }
        }
    }
    Connection::new(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{bracket_into, LieElement};

    #[test]
    fn adjoint_action_is_an_automorphism() {
        let grid = Torus4::new(2).unwrap();
        let g = GaugeTransform::constant(grid, GroupKind::Su2, [0.3, -0.7, 0.2, 0.5]).unwrap();
        assert!(g.unitarity_defect() < 1e-15);
        let (a, b) = ([0.3, -1.0, 2.0], [1.5, 0.25, -0.5]);
        let mut ab = [0.0; 3];
        bracket_into(GroupKind::Su2, &a, &b, &mut ab);
        let (mut ga, mut gb, mut gab, mut br) = ([0.0; 3], [0.0; 3], [0.0; 3], [0.0; 3]);
        g.adjoint(0, &a, &mut ga);
        g.adjoint(0, &b, &mut gb);
        g.adjoint(0, &ab, &mut gab);
        bracket_into(GroupKind::Su2, &ga, &gb, &mut br);
        for i in 0..3 {
            assert!((br[i] - gab[i]).abs() < 1e-14);
        }
        let n = |v: &[f64; 3]| LieElement::from_slice(GroupKind::Su2, v).unwrap().norm();
        assert!((n(&ga) - n(&a)).abs() < 1e-14);
    }

    #[test]
    fn identity_leaves_connection_alone() {
        let grid = Torus4::new(3).unwrap();
        let a = Form::from_fn(grid, GroupKind::Su2, 1, |s, c, v| {
            v.iter_mut().enumerate().for_each(|(i, x)| *x = ((s + 3 * c + i) as f64).sin())
        });
        let conn = Connection::new(a).unwrap();
        let g = GaugeTransform::identity(grid, GroupKind::Su2);
        assert_eq!(apply_gauge(&conn, &g).unwrap(), conn);
    }
}
