use super::dense::{lambda_dense, mu_unconstrained_dense, solve_laplace_dense};
use super::linalg::{dot, LinOp};
use super::ops::{stack, DelbarOp, LaplaceOp};
use super::*;
use crate::gauge::{delbar, delbar_star, random_connection, GaugeTransform, apply_gauge};
use crate::lattice::algebraic::{coeff02, embed02};
use crate::lattice::Torus4;

fn conn(n: usize, group: GroupKind, seed: u64, amp: f64) -> Connection {
    random_connection(Torus4::new(n).unwrap(), group, seed, amp, 2.0).unwrap()
}

fn tight() -> SpectralConfig {
    SpectralConfig { tol: 1e-9, cg_tol: 1e-12, ..SpectralConfig::default() }
}

#[test]
fn delbar_op_matches_generic_form_path() {
    for group in [GroupKind::Su2, GroupKind::So3, GroupKind::U1] {
        let a = conn(4, group, 3, 3.0);
        let grid = a.grid();
        let c = CForm::new(
            random_field(grid, group, 0, 11, 1.0, 3.0).unwrap(),
            random_field(grid, group, 0, 12, 1.0, 3.0).unwrap(),
        )
        .unwrap();
        let generic = coeff02(&delbar(&delbar_star(&embed02(&c).unwrap(), &a).unwrap(), &a).unwrap()).unwrap();
        let op = DelbarOp::new(&a);
        let mut y = vec![0.0; op.len()];
        op.apply(&stack(&c), &mut y);
        let want = stack(&generic);
        let err = y.iter().zip(&want).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        let scale = want.iter().map(|x| x.abs()).fold(0.0, f64::max);
        assert!(err <= 1e-12 * scale, "{group}: {err} vs {scale}");
    }
}

#[test]
fn delbar_rayleigh_quotient_is_adjoint_norm() {
    let a = conn(4, GroupKind::Su2, 5, 2.0);
    let grid = a.grid();
    let c = CForm::new(
        random_field(grid, GroupKind::Su2, 0, 1, 1.0, 3.0).unwrap(),
        random_field(grid, GroupKind::Su2, 0, 2, 1.0, 3.0).unwrap(),
    )
    .unwrap();
    let phi = embed02(&c).unwrap();
    let want = delbar_star(&phi, &a).unwrap().norm_sq() / phi.norm_sq();
    let op = DelbarOp::new(&a);
    let v = stack(&c);
    let mut y = vec![0.0; v.len()];
    op.apply(&v, &mut y);
    let got = dot(&v, &y) / dot(&v, &v);
    assert!((got - want).abs() <= 1e-12 * want, "{got} {want}");
}

#[test]
fn lambda_matches_dense_oracle() {
    for (group, seed) in [(GroupKind::Su2, 1), (GroupKind::So3, 2)] {
        let a = conn(3, group, seed, 4.0);
        let dense = lambda_dense(&a).unwrap();
        let out = lambda_a(&a, &tight()).unwrap();
        assert!(dense > 1e-3, "{dense}");
        assert!((out.value - dense).abs() <= 1e-8 * dense.max(1.0), "{} {dense}", out.value);
    }
}

#[test]
fn mu_unconstrained_matches_dense_oracle() {
    let a = conn(3, GroupKind::Su2, 4, 4.0);
    let dense = mu_unconstrained_dense(&a).unwrap();
    let out = mu_unconstrained(&a, &tight()).unwrap();
    assert!((out.value - dense).abs() <= 1e-8 * dense.max(1.0), "{} {dense}", out.value);
}

#[test]
fn flat_connection_has_zero_spectra() {
    let a = Connection::zero(Torus4::new(4).unwrap(), GroupKind::Su2);
    assert!(lambda_a(&a, &tight()).unwrap().value.abs() < 1e-10);
    let mu = mu_a(&a, &tight()).unwrap();
    assert!(mu.unconstrained.value.abs() < 1e-10);
    assert!(mu.constrained.value.abs() < 1e-8);
}

#[test]
fn constrained_mu_bounds_unconstrained() {
    let a = conn(4, GroupKind::Su2, 8, 3.0);
    let cfg = SpectralConfig { restarts: 3, ..tight() };
    let mu = mu_a(&a, &cfg).unwrap();
    // Constant start, unconstrained witness and three random starts.
    assert_eq!(mu.restart_values.len(), 5);
    assert!(mu.constrained.value >= mu.unconstrained.value * (1.0 - 1e-9));
    // The witness is rank one and attains the reported value.
    let Witness::Coefficient(c) = &mu.constrained.witness else { panic!() };
    let op = DelbarOp::new(&a);
    let v = stack(c);
    let mut y = vec![0.0; v.len()];
    op.apply(&v, &mut y);
    let q = dot(&v, &y) / dot(&v, &v);
    assert!((q - mu.constrained.value).abs() <= 1e-8 * q.max(1e-12));
    for s in 0..a.grid().sites() {
        let (re, im) = (c.re.at(s, 0), c.im.at(s, 0));
        let cross = [re[1] * im[2] - re[2] * im[1], re[2] * im[0] - re[0] * im[2], re[0] * im[1] - re[1] * im[0]];
        assert!(cross.iter().all(|x| x.abs() < 1e-12));
    }
}

#[test]
fn constrained_mu_is_reproducible_across_restarts_on_small_grids() {
    let a = conn(3, GroupKind::Su2, 9, 4.0);
    let mu = mu_a(&a, &SpectralConfig { restarts: 4, ..tight() }).unwrap();
    let best = mu.constrained.value;
    for v in &mu.restart_values {
        assert!((v - best).abs() <= 1e-6 * best, "{:?}", mu.restart_values);
    }
}

#[test]
fn u1_constraint_is_trivial() {
    let a = conn(4, GroupKind::U1, 2, 3.0);
    let mu = mu_a(&a, &tight()).unwrap();
    assert_eq!(mu.constrained.value, mu.unconstrained.value);
}

#[test]
fn lambda_is_invariant_under_constant_gauge() {
    let a = conn(4, GroupKind::Su2, 6, 3.0);
    let q = [0.5f64.sqrt(), 0.5, 0.0, 0.5];
    let g = GaugeTransform::constant(a.grid(), GroupKind::Su2, q).unwrap();
    let b = apply_gauge(&a, &g).unwrap();
    let (la, lb) = (lambda_a(&a, &tight()).unwrap().value, lambda_a(&b, &tight()).unwrap().value);
    assert!((la - lb).abs() <= 1e-8 * la, "{la} {lb}");
}

#[test]
fn laplace_solve_matches_dense_and_guards_reducible() {
    let a = conn(3, GroupKind::Su2, 9, 4.0);
    let f = random_field(a.grid(), GroupKind::Su2, 0, 4, 1.0, 3.0).unwrap();
    let cfg = tight();
    let s = solve_laplace(&a, &f, &cfg).unwrap();
    let want = solve_laplace_dense(&a, &f).unwrap();
    assert!(s.sub(&want).l2_norm() <= 1e-8 * want.l2_norm());
    let op = LaplaceOp::new(&a);
    let mut y = vec![0.0; op.len()];
    op.apply(s.data(), &mut y);
    let r: f64 = y.iter().zip(f.data()).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
    assert!(r <= 1e-10 * linalg::norm(f.data()));

    let flat = Connection::zero(a.grid(), GroupKind::Su2);
    assert!(matches!(solve_laplace(&flat, &f, &cfg), Err(Error::NearReducible { .. })));
}

#[test]
fn continuity_sweep_requires_ascending_amplitudes() {
    let a = Connection::zero(Torus4::new(3).unwrap(), GroupKind::Su2);
    let dir = random_field(a.grid(), GroupKind::Su2, 1, 1, 1.0, 2.0).unwrap();
    assert!(continuity_sweep(&a, &dir, &[0.2, 0.1], &tight()).is_err());
    let rows = continuity_sweep(&a, &dir, &[0.0, 2.0], &tight()).unwrap();
    assert!(rows[0].lambda.abs() < 1e-10);
    assert!(rows[1].lambda > rows[0].lambda);
}

mod props {
    use super::*;
    use proptest::prelude::*;

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(8))]
        #[test]
        fn lambda_is_a_lower_bound_for_rayleigh_quotients(seed in 0u64..1000) {
            let a = conn(3, GroupKind::Su2, 7, 3.0);
            let lambda = lambda_a(&a, &tight()).unwrap().value;
            let u = random_field(a.grid(), GroupKind::Su2, 0, seed, 1.0, 3.0).unwrap();
            let op = LaplaceOp::new(&a);
            let mut y = vec![0.0; op.len()];
            op.apply(u.data(), &mut y);
            let q = dot(u.data(), &y) / dot(u.data(), u.data());
            prop_assert!(q >= lambda * (1.0 - 1e-9));
        }
    }
}

#[test]
fn flat_delbar_kernel_counts_lattice_modes() {
    for n in [3, 4] {
        let a = Connection::zero(Torus4::new(n).unwrap(), GroupKind::U1);
        let m = super::linalg::assemble_dense(&DelbarOp::new(&a));
        let eig = nalgebra::SymmetricEigen::new(m);
        let zeros = eig.eigenvalues.iter().filter(|v| v.abs() < 1e-9).count();
        assert_eq!(zeros, flat_delbar_kernel(n, 1), "n = {n}");
    }
}
