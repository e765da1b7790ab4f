//! Dense assembly of the spectral operators on very small grids, built on the
//! generic form operators rather than the matrix-free stencils.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};
use crate::gauge::{delbar, delbar_star, laplacian_nabla, Connection};
use crate::lattice::algebraic::{coeff02, embed02};
use crate::lattice::Form;

use super::linalg::{assemble_dense, LinOp};
use super::ops::{stack, unstack};

/// Largest grid side accepted by the dense routines.
pub const MAX_DENSE_N: usize = 4;

fn check_size(conn: &Connection) -> Result<()> {
    if conn.grid().n() > MAX_DENSE_N {
        return Err(Error::InvalidArgument(format!(
            "dense assembly limited to n <= {MAX_DENSE_N}, got {}",
            conn.grid().n()
        )));
    }
    Ok(())
}

struct GenericLaplace<'a>(&'a Connection);

impl LinOp for GenericLaplace<'_> {
    fn len(&self) -> usize {
        self.0.grid().sites() * self.0.group().dim()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        let u = Form::from_data(self.0.grid(), self.0.group(), 0, x.to_vec()).expect("length");
        y.copy_from_slice(laplacian_nabla(&u, self.0).expect("degree 0").data());
    }
}

/// `c -> coeff02(dbar_A dbar_A^* embed02(c))` through full complex forms.
struct GenericDelbar<'a>(&'a Connection);

impl LinOp for GenericDelbar<'_> {
    fn len(&self) -> usize {
        2 * self.0.grid().sites() * self.0.group().dim()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        let c = unstack(self.0.grid(), self.0.group(), x);
        let phi = embed02(&c).expect("degree 0");
        let out = delbar(&delbar_star(&phi, self.0).expect("degree 2"), self.0).expect("degree 1");
        let c = coeff02(&out).expect("degree 2");
        y.copy_from_slice(&stack(&c));
    }
}

fn min_eigenvalue(m: DMatrix<f64>) -> f64 {
    let m = (&m + m.transpose()) * 0.5;
    SymmetricEigen::new(m).eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min)
}

/// `lambda(A)` from the dense matrix of `nabla_A^* nabla_A`.
pub fn lambda_dense(conn: &Connection) -> Result<f64> {
    check_size(conn)?;
    Ok(min_eigenvalue(assemble_dense(&GenericLaplace(conn))))
}

/// Smallest eigenvalue of `dbar_A dbar_A^*` on (0,2)-forms, densely.
pub fn mu_unconstrained_dense(conn: &Connection) -> Result<f64> {
    check_size(conn)?;
    Ok(min_eigenvalue(assemble_dense(&GenericDelbar(conn))))
}

/// Direct solve of `nabla_A^* nabla_A s = f`.
pub fn solve_laplace_dense(conn: &Connection, f: &Form) -> Result<Form> {
    check_size(conn)?;
    f.expect_degree("solve_laplace_dense", 0)?;
    let m = assemble_dense(&GenericLaplace(conn));
    let x = m
        .lu()
        .solve(&DVector::from_column_slice(f.data()))
        .ok_or_else(|| Error::InvalidArgument("singular covariant Laplacian".into()))?;
    Form::from_data(conn.grid(), conn.group(), 0, x.as_slice().to_vec())
}
