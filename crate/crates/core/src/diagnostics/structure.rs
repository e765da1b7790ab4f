use serde::{Deserialize, Serialize};

use crate::algebra::{bracket_into, dot, GroupKind};
use crate::error::{Error, Result};
use crate::gauge::{curvature, delbar_star, nabla, Connection};
use crate::lattice::algebraic::{coeff02, embed02, pq_decompose, sd_asd_project, sd_components, sd_from_components};
use crate::lattice::norms::lp_norm_complex;
use crate::lattice::{CForm, Form, Torus4};
use crate::spectral::rankone::top_direction;

/// Pointwise norms below this count as zeros of a field.
pub const ZERO_THRESHOLD: f64 = 1e-10;
/// Relative size of the second singular value below which a site is rank one.
const RANK_TOL: f64 = 1e-8;
/// Minimum fraction of nonzero sites accepted by [`f_sigma_split`].
const MIN_SUPPORT: f64 = 0.1;
const SELF_DUAL_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RankOneReport {
    /// `||[B_1, B_2]||_{L^2}` for `F^{0,2} = (B_1 + i B_2) dzbar^1 ^ dzbar^2`.
    pub commutator_l2: f64,
    pub commutator_linf: f64,
    /// Fraction of sites where `B_1, B_2` span at most one direction.
    pub rank_profile: f64,
}

/// Ratio of the second to the first singular value of `[a b]`.
fn second_singular_ratio(a: &[f64], b: &[f64]) -> f64 {
    let (p, q, r) = (dot(a, a), dot(a, b), dot(b, b));
    if p + r == 0.0 {
        return 0.0;
    }
    let det = if a.len() == 3 {
        let mut c = [0.0; 3];
        bracket_into(GroupKind::Su2, a, b, &mut c);
        dot(&c, &c)
    } else {
        (p * r - q * q).max(0.0)
    };
    let lam1 = 0.5 * (p + r) + (0.25 * (p - r) * (p - r) + q * q).sqrt();
    det.sqrt() / lam1
}

/// Commutator of the real and imaginary parts of the (0,2)-coefficient of
/// `f02`, and the fraction of sites where the pair is rank one.
pub fn rank_one_check(f02: &CForm) -> Result<RankOneReport> {
    let c = coeff02(f02)?;
    let grid = c.grid();
    let kind = c.group();
    let mut comm = vec![0.0; kind.dim()];
    let (mut sum, mut max, mut rank_one) = (0.0_f64, 0.0_f64, 0usize);
    for s in 0..grid.sites() {
        let (b1, b2) = (c.re.at(s, 0), c.im.at(s, 0));
        bracket_into(kind, b1, b2, &mut comm);
        let m = dot(&comm, &comm);
        sum += m;
        max = max.max(m.sqrt());
        if second_singular_ratio(b1, b2) <= RANK_TOL {
            rank_one += 1;
        }
    }
    Ok(RankOneReport {
        commutator_l2: (sum * grid.cell_volume()).sqrt(),
        commutator_linf: max,
        rank_profile: rank_one as f64 / grid.sites() as f64,
    })
}

fn check_self_dual(b: &Form) -> Result<()> {
    b.expect_degree("dot_bracket_map", 2)?;
    let (_, minus) = sd_asd_project(b)?;
    let residual = minus.l2_norm();
    if residual > SELF_DUAL_TOL * (1.0 + b.l2_norm()) {
        return Err(Error::NotSelfDual { residual });
    }
    Ok(())
}

fn bracket_00(a: &Form, b: &Form) -> Form {
    let mut out = a.zeros_like();
    let (kind, d) = (a.group(), a.dim());
    for s in 0..a.grid().sites() {
        bracket_into(kind, a.at(s, 0), b.at(s, 0), &mut out.data_mut()[s * d..(s + 1) * d]);
    }
    out
}

/// Symmetric bilinear map on self-dual forms with
/// `-[B.C]/4 = sym([B_2,C_3])(e^{01}+e^{23}) + sym([B_3,C_1])(e^{02}+e^{31}) + sym([B_1,C_2])(e^{03}+e^{12})`,
/// where `sym([X,Y]) = ([X,Y] + [Y',X'])/2` swaps the roles of `B` and `C`.
pub fn dot_bracket_pair(b: &Form, c: &Form) -> Result<Form> {
    check_self_dual(b)?;
    check_self_dual(c)?;
    b.check_compatible(c)?;
    let bb = sd_components(b)?;
    let cc = sd_components(c)?;
    let slot = |i: usize, j: usize| bracket_00(&bb[i], &cc[j]).add(&bracket_00(&cc[i], &bb[j])).scaled(0.5);
    let out = sd_from_components(&[slot(1, 2), slot(2, 0), slot(0, 1)])?;
    Ok(out.scaled(-4.0))
}

/// `[B.B]` for a self-dual `B`.
pub fn dot_bracket_map(b: &Form) -> Result<Form> {
    dot_bracket_pair(b, b)
}

/// Polar split `phi = f sigma` of a (0,2)-field.
#[derive(Debug, Clone)]
pub struct FSigmaSplit {
    /// Complex scalar coefficient, a `u1` 0-form.
    pub f: CForm,
    /// Unit section, sign-aligned with its sweep parent.
    pub sigma: Form,
    /// `||phi - f sigma|| / ||phi||`; zero for rank-one input.
    pub rank_residual: f64,
    /// `||nabla_A sigma||_{L^2}` over sites where `f` is nonzero.
    pub nabla_sigma: f64,
    /// `||f nabla_A sigma|| / ||phi||`.
    pub f_nabla_sigma: f64,
    /// `||dbar^*(f dzbar^1 ^ dzbar^2)|| / ||phi||` with the trivial connection.
    pub f_harmonicity: f64,
}

/// Neighbour visited earlier in index order, `None` at the origin.
fn sweep_parent(grid: Torus4, site: usize) -> Option<usize> {
    (0..4).find(|&mu| grid.coord(site, mu) > 0).map(|mu| grid.bwd(site, mu))
}

/// Per-site split of the (0,2)-coefficient of `phi` into `f` times a unit
/// section along the top singular direction. Zeros of `phi` inherit the
/// section of their sweep parent.
pub fn f_sigma_split(phi: &CForm, conn: &Connection) -> Result<FSigmaSplit> {
    let c = coeff02(phi)?;
    let grid = c.grid();
    let d = c.group().dim();
    let sites = grid.sites();
    let mut max_norm = 0.0_f64;
    let mut nonzero = 0usize;
    for s in 0..sites {
        let m = c.pointwise_norm(s);
        max_norm = max_norm.max(m);
        if m > ZERO_THRESHOLD {
            nonzero += 1;
        }
    }
    let fraction = nonzero as f64 / sites as f64;
    if fraction < MIN_SUPPORT {
        return Err(Error::VanishingField { max_norm, fraction: 100.0 * fraction });
    }

    let mut sigma = Form::zeros(grid, c.group(), 0);
    let mut f = CForm::zeros(grid, GroupKind::U1, 0);
    let mut u = vec![0.0; d];
    let mut support = vec![false; sites];
    for s in 0..sites {
        let parent = sweep_parent(grid, s);
        let (b1, b2) = (c.re.at(s, 0), c.im.at(s, 0));
        if c.pointwise_norm(s) > ZERO_THRESHOLD && top_direction(b1, b2, &mut u) {
            support[s] = true;
            if let Some(p) = parent {
                if dot(&u, sigma.at(p, 0)) < 0.0 {
                    u.iter_mut().for_each(|x| *x = -*x);
                }
            }
            f.re.at_mut(s, 0)[0] = dot(b1, &u);
            f.im.at_mut(s, 0)[0] = dot(b2, &u);
        } else {
            match parent {
                Some(p) => u.copy_from_slice(sigma.at(p, 0)),
                None => {
                    u.fill(0.0);
                    u[0] = 1.0;
                }
            }
        }
        sigma.at_mut(s, 0).copy_from_slice(&u);
    }

    let mut rebuilt = c.zeros_like();
    for s in 0..sites {
        let (fr, fi) = (f.re.at(s, 0)[0], f.im.at(s, 0)[0]);
        for g in 0..d {
            rebuilt.re.at_mut(s, 0)[g] = fr * sigma.at(s, 0)[g];
            rebuilt.im.at_mut(s, 0)[g] = fi * sigma.at(s, 0)[g];
        }
    }
    let norm = c.l2_norm();
    let rank_residual = c.sub(&rebuilt).l2_norm() / norm;

    let grad = nabla(&sigma, conn)?;
    let (mut on_support, mut weighted) = (0.0, 0.0);
    for s in 0..sites {
        let local: f64 = grad.iter().map(|g| dot(g.at(s, 0), g.at(s, 0))).sum();
        let fsq = f.re.at(s, 0)[0].powi(2) + f.im.at(s, 0)[0].powi(2);
        if support[s] {
            on_support += local;
        }
        weighted += fsq * local;
    }
    let vol = grid.cell_volume();
    let flat = Connection::zero(grid, GroupKind::U1);
    let harm = delbar_star(&embed02(&f)?, &flat)?.l2_norm();
    // The embedding carries a factor 2 in norm relative to the coefficient.
    Ok(FSigmaSplit {
        f,
        sigma,
        rank_residual,
        nabla_sigma: (on_support * vol).sqrt(),
        f_nabla_sigma: (weighted * vol).sqrt() / norm,
        f_harmonicity: harm / (2.0 * norm),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LpRatio {
    pub p: f64,
    pub q: f64,
    pub lp: f64,
    pub lq: f64,
    /// `lp / lq`, or 0 when `F^{0,2}` vanishes.
    pub ratio: f64,
}

/// `||F^{0,2}||_p` against `||F^{0,2}||_q` with `1/q = 1/2 + 1/p`.
pub fn lp_ratio_probe(conn: &Connection, p: f64) -> Result<LpRatio> {
    if !(p > 4.0) {
        return Err(Error::InvalidArgument(format!("L^p ratio needs p > 4, got {p}")));
    }
    let q = 1.0 / (0.5 + 1.0 / p);
    let f02 = pq_decompose(&curvature(conn))?.f02;
    let lp = lp_norm_complex(&f02, p)?;
    let lq = lp_norm_complex(&f02, q)?;
    let ratio = if lq > 0.0 { lp / lq } else { 0.0 };
    Ok(LpRatio { p, q, lp, lq, ratio })
}
