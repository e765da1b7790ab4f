use super::*;
use crate::algebra::GroupKind;
use crate::gauge::{d_a_star, random_connection, random_field, ym_energy};
use crate::lattice::Torus4;
use crate::spectral::solve_laplace;

fn field(n: usize, group: GroupKind, seed: u64) -> Form {
    random_field(Torus4::new(n).unwrap(), group, 0, seed, 1.0, 3.0).unwrap()
}

fn conn(n: usize, group: GroupKind, seed: u64, amp: f64) -> Connection {
    random_connection(Torus4::new(n).unwrap(), group, seed, amp, 2.0).unwrap()
}

fn rel(a: &Form, b: &Form) -> f64 {
    a.sub(b).max_abs() / a.max_abs().max(b.max_abs()).max(f64::MIN_POSITIVE)
}

#[test]
fn bmap_is_symmetric_and_bilinear() {
    let a = conn(4, GroupKind::Su2, 1, 2.0);
    let (u, v, w) = (field(4, GroupKind::Su2, 1), field(4, GroupKind::Su2, 2), field(4, GroupKind::Su2, 3));
    assert!(rel(&bmap(&u, &v, &a).unwrap(), &bmap(&v, &u, &a).unwrap()) < 1e-12);
    let mut lhs_in = u.scaled(2.0);
    lhs_in.axpy(-3.0, &w);
    let lhs = bmap(&lhs_in, &v, &a).unwrap();
    let mut rhs = bmap(&u, &v, &a).unwrap().scaled(2.0);
    rhs.axpy(-3.0, &bmap(&w, &v, &a).unwrap());
    assert!(rel(&lhs, &rhs) < 1e-12);
}

#[test]
fn bmap_vanishes_for_u1_and_obeys_pointwise_bound() {
    let a = conn(4, GroupKind::U1, 1, 2.0);
    let u = field(4, GroupKind::U1, 1);
    assert_eq!(bmap(&u, &u, &a).unwrap().max_abs(), 0.0);

    let a = conn(4, GroupKind::Su2, 2, 2.0);
    let (u, v) = (field(4, GroupKind::Su2, 4), field(4, GroupKind::Su2, 5));
    let b = bmap(&u, &v, &a).unwrap();
    let (du, dv) = (nabla(&u, &a).unwrap(), nabla(&v, &a).unwrap());
    for s in 0..a.grid().sites() {
        let norm = |d: &[Form; 4]| d.iter().map(|f| f.at(s, 0).iter().map(|x| x * x).sum::<f64>()).sum::<f64>().sqrt();
        let bs = b.at(s, 0).iter().map(|x| x * x).sum::<f64>().sqrt();
        assert!(bs <= 0.5 * norm(&du) * norm(&dv) * (1.0 + 1e-12));
    }
}

#[test]
fn smap_matches_recomputation() {
    let a = conn(4, GroupKind::Su2, 3, 3.0);
    let cfg = SpectralConfig { cg_tol: 1e-12, ..SpectralConfig::default() };
    let f = field(4, GroupKind::Su2, 6);
    let s = smap(&f, &f, &a, &cfg).unwrap();
    let u = solve_laplace(&a, &f, &cfg).unwrap();
    let v = solve_laplace(&a, &f, &cfg).unwrap();
    assert!(rel(&s, &bmap(&u, &v, &a).unwrap()) < 1e-9);
    let zero = f.zeros_like();
    assert_eq!(smap(&zero, &zero, &a, &cfg).unwrap().max_abs(), 0.0);
}

#[test]
fn flat_connection_is_its_own_deformation() {
    let a = Connection::zero(Torus4::new(4).unwrap(), GroupKind::Su2);
    for mode in [DeformMode::PaperPicard, DeformMode::DiscreteResidual] {
        let out = taubes_deform(&a, &DeformConfig { mode, ..Default::default() }).unwrap();
        assert_eq!(out.s.max_abs(), 0.0);
        assert_eq!(out.outer_iterations, 1);
        assert_eq!(out.a_inf, a);
    }
}

#[test]
fn abelian_deformation_is_reducible() {
    let a = conn(4, GroupKind::U1, 4, 0.1);
    assert!(trace_curvature(&a).max_abs() > 0.0);
    let err = taubes_deform(&a, &DeformConfig::default()).unwrap_err();
    assert!(matches!(err, Error::NearReducible { .. }), "{err}");
}

#[test]
fn large_trace_is_rejected() {
    let a = conn(4, GroupKind::Su2, 5, 4.0);
    let cfg = DeformConfig { lambda_floor: 1e-6, ..Default::default() };
    let err = taubes_deform(&a, &cfg).unwrap_err();
    assert!(matches!(err, Error::NoContraction { .. }), "{err}");
}

#[test]
fn discrete_mode_reaches_tolerance() {
    let a = conn(4, GroupKind::Su2, 6, 0.1);
    let cfg = DeformConfig { lambda_floor: 1e-6, ..Default::default() };
    let out = taubes_deform(&a, &cfg).unwrap();
    assert!(out.final_residual <= 1e-8, "{}", out.final_residual);
    assert!(trace_curvature(&out.a_inf).l2_norm() <= 1e-8);
    assert!(out.trace_norms.windows(2).all(|w| w[1] < w[0]));
}

#[test]
fn picard_sequence_decays() {
    let a = conn(4, GroupKind::Su2, 6, 0.1);
    let cfg = DeformConfig { mode: DeformMode::PaperPicard, lambda_floor: 1e-6, tol: 1e-12, ..Default::default() };
    let out = taubes_deform(&a, &cfg).unwrap();
    assert!(out.trace_norms.len() >= 3);
    assert!(out.trace_norms.windows(2).skip(1).all(|w| w[1] < w[0]), "{:?}", out.trace_norms);
}

#[test]
fn flow_descends_and_fixes_flat_connections() {
    let flat = Connection::zero(Torus4::new(4).unwrap(), GroupKind::Su2);
    let out = ym_gradient_flow(&flat, &FlowConfig::default()).unwrap();
    assert_eq!(out.steps, 0);
    assert!(out.converged);

    let a = conn(4, GroupKind::Su2, 7, 1.0);
    let cfg = FlowConfig { max_steps: 200, grad_tol: 0.0, ..Default::default() };
    let out = ym_gradient_flow(&a, &cfg).unwrap();
    assert_eq!(out.steps, 200);
    assert!(out.energies.windows(2).all(|w| w[1] <= w[0]));
    assert!(ym_energy(&out.connection) < ym_energy(&a));
    assert!(out.grad_norms[200] < out.grad_norms[0]);
}

#[test]
fn energy_gradient_is_twice_d_star_f() {
    let a = conn(4, GroupKind::Su2, 5, 0.8);
    let v = random_field(a.grid(), GroupKind::Su2, 1, 6, 1.0, 2.0).unwrap();
    let eps = 1e-5;
    let at = |t: f64| ym_energy(&Connection::new(a.form().add(&v.scaled(t))).unwrap());
    let fd = (at(eps) - at(-eps)) / (2.0 * eps);
    let exact = 2.0 * d_a_star(&curvature(&a), &a).unwrap().inner(&v);
    assert!((fd - exact).abs() <= 1e-7 * exact.abs(), "{fd} vs {exact}");
}

#[test]
fn quasi_newton_flow_reaches_tight_tolerance() {
    let a = conn(4, GroupKind::Su2, 7, 1.0);
    let cfg = FlowConfig { scheme: FlowScheme::Lbfgs, grad_tol: 1e-6, ..Default::default() };
    let out = ym_gradient_flow(&a, &cfg).unwrap();
    assert!(out.converged, "stopped at {:.3e}", out.grad_norms[out.steps]);
    assert!(out.energies.windows(2).all(|w| w[1] <= w[0]));
    let explicit = ym_gradient_flow(&a, &FlowConfig { max_steps: out.steps, grad_tol: 0.0, ..Default::default() }).unwrap();
    assert!(out.grad_norms[out.steps] < explicit.grad_norms[explicit.steps]);
}

#[test]
fn harmonicity_report_of_flat_connection_is_zero() {
    let a = Connection::zero(Torus4::new(4).unwrap(), GroupKind::So3);
    let r = harmonicity_report(&a).unwrap();
    for v in [r.ym_residual, r.delbar_star_f02, r.identity_01, r.identity_10, r.trace_norm, r.fplus_norm, r.f02_norm] {
        assert_eq!(v, 0.0);
    }
}
