use crate::error::{Error, Result};

use super::form::{CForm, Form};
use super::Torus4;

fn lp_from_pointwise(grid: Torus4, p: f64, norm_at: impl Fn(usize) -> f64) -> Result<f64> {
    if p.is_nan() || p < 1.0 {
        return Err(Error::InvalidArgument(format!("L^p norm needs p >= 1, got {p}")));
    }
    let sites = 0..grid.sites();
    if p.is_infinite() {
        return Ok(sites.map(norm_at).fold(0.0, f64::max));
    }
    let s: f64 = sites.map(|x| norm_at(x).powf(p)).sum();
    Ok((s * grid.cell_volume()).powf(1.0 / p))
}

/// `(h^4 sum_x |u(x)|^p)^(1/p)`; `p = inf` gives the max norm.
pub fn lp_norm(u: &Form, p: f64) -> Result<f64> {
    lp_from_pointwise(u.grid(), p, |x| u.pointwise_norm(x))
}

pub fn lp_norm_complex(u: &CForm, p: f64) -> Result<f64> {
    lp_from_pointwise(u.grid(), p, |x| u.pointwise_norm(x))
}

pub fn l2_inner(u: &Form, v: &Form) -> Result<f64> {
    u.check_compatible(v)?;
    Ok(u.inner(v))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::GroupKind;

    #[test]
    fn norm_examples() {
        let g = Torus4::new(3).unwrap();
        let z = Form::zeros(g, GroupKind::Su2, 1);
        assert_eq!(lp_norm(&z, 3.0).unwrap(), 0.0);
        // |u| = 2 everywhere
        let mut c = Form::zeros(g, GroupKind::Su2, 0);
        c.data_mut().chunks_mut(3).for_each(|v| v.copy_from_slice(&[0.0, 1.2, 1.6]));
        for p in [1.0, 2.0, 4.5, f64::INFINITY] {
            assert!((lp_norm(&c, p).unwrap() - 2.0).abs() < 1e-12);
        }
        assert!((lp_norm(&c, 2.0).unwrap().powi(2) - l2_inner(&c, &c).unwrap()).abs() < 1e-12);
        assert!(lp_norm(&c, 0.5).is_err());
    }
}
