//! The discrete deformation against a damped Newton solve of
//! `Lambda F_{A + a(s)} = 0` with a finite-difference Jacobian.

use nalgebra::{DMatrix, DVector};
use ymk::deform::{deformed, taubes_deform, trace_curvature, DeformConfig, DeformMode};
use ymk::gauge::{random_connection, Connection};
use ymk::{Form, GroupKind, Torus4};

fn residual(conn: &Connection, s: &[f64]) -> DVector<f64> {
    let mut f = Form::zeros(conn.grid(), conn.group(), 0);
    f.data_mut().copy_from_slice(s);
    DVector::from_column_slice(trace_curvature(&deformed(conn, &f).unwrap()).data())
}

fn newton(conn: &Connection) -> Vec<f64> {
    let len = conn.grid().sites() * conn.group().dim();
    let mut s = DVector::zeros(len);
    let eps = 1e-6;
    for _ in 0..20 {
        let r = residual(conn, s.as_slice());
        if r.norm() < 1e-13 {
            break;
        }
        let mut jac = DMatrix::zeros(len, len);
        for j in 0..len {
            let mut up = s.clone();
            let mut dn = s.clone();
            up[j] += eps;
            dn[j] -= eps;
            let col = (residual(conn, up.as_slice()) - residual(conn, dn.as_slice())) / (2.0 * eps);
            jac.set_column(j, &col);
        }
        let step = jac.lu().solve(&(-&r)).expect("nonsingular away from reducible connections");
        // Halve until the residual drops.
        let mut t = 1.0;
        while t > 1e-3 && residual(conn, (&s + &step * t).as_slice()).norm() >= r.norm() {
            t *= 0.5;
        }
        s += step * t;
    }
    s.as_slice().to_vec()
}

#[test]
fn discrete_residual_matches_newton() {
    for seed in [1, 2] {
        let a = random_connection(Torus4::new(4).unwrap(), GroupKind::Su2, seed, 0.1, 2.0).unwrap();
        let cfg = DeformConfig { mode: DeformMode::DiscreteResidual, tol: 1e-12, lambda_floor: 1e-6, ..Default::default() };
        let res = taubes_deform(&a, &cfg).unwrap();
        let oracle = newton(&a);
        let diff = res.s.data().iter().zip(&oracle).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt();
        let scale = oracle.iter().map(|x| x * x).sum::<f64>().sqrt();
        assert!(scale > 0.0);
        assert!(diff <= 1e-6 * scale, "seed {seed}: |s - s_newton| = {diff:.3e}, |s_newton| = {scale:.3e}");
        assert!(residual(&a, &oracle).norm() < 1e-10);
    }
}
