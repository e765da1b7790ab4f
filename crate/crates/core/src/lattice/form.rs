use crate::algebra::GroupKind;
use crate::error::{Error, Result};

use super::basis::ncomp;
use super::Torus4;

/// Real Lie-algebra-valued k-form on the lattice. Storage order is
/// `[site][component][generator]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Form {
    grid: Torus4,
    group: GroupKind,
    degree: usize,
    data: Vec<f64>,
}

impl Form {
    pub fn zeros(grid: Torus4, group: GroupKind, degree: usize) -> Self {
        assert!(degree <= 4, "form degree {degree} out of range");
        let len = grid.sites() * ncomp(degree) * group.dim();
        Self { grid, group, degree, data: vec![0.0; len] }
    }

    pub fn from_data(grid: Torus4, group: GroupKind, degree: usize, data: Vec<f64>) -> Result<Self> {
        if degree > 4 {
            return Err(Error::Degree { op: "from_data", degree });
        }
        let len = grid.sites() * ncomp(degree) * group.dim();
        if data.len() != len {
            return Err(Error::InvalidArgument(format!(
                "expected {len} components, got {}",
                data.len()
            )));
        }
        Ok(Self { grid, group, degree, data })
    }

    /// Build a form from a closure `f(site, comp) -> coefficients`.
    pub fn from_fn(
        grid: Torus4,
        group: GroupKind,
        degree: usize,
        mut f: impl FnMut(usize, usize, &mut [f64]),
    ) -> Self {
        let mut out = Self::zeros(grid, group, degree);
        for site in 0..grid.sites() {
            for c in 0..ncomp(degree) {
                f(site, c, out.at_mut(site, c));
            }
        }
        out
    }

    pub fn zeros_like(&self) -> Self {
        Self::zeros(self.grid, self.group, self.degree)
    }

    #[inline]
    pub fn grid(&self) -> Torus4 {
        self.grid
    }

    #[inline]
    pub fn group(&self) -> GroupKind {
        self.group
    }

    #[inline]
    pub fn degree(&self) -> usize {
        self.degree
    }

    #[inline]
    pub fn ncomp(&self) -> usize {
        ncomp(self.degree)
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.group.dim()
    }

    #[inline]
    pub fn data(&self) -> &[f64] {
        &self.data
    }

    #[inline]
    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    #[inline]
    pub fn offset(&self, site: usize, comp: usize) -> usize {
        (site * self.ncomp() + comp) * self.dim()
    }

    #[inline]
    pub fn at(&self, site: usize, comp: usize) -> &[f64] {
        let o = self.offset(site, comp);
        &self.data[o..o + self.dim()]
    }

    #[inline]
    pub fn at_mut(&mut self, site: usize, comp: usize) -> &mut [f64] {
        let o = self.offset(site, comp);
        let d = self.dim();
        &mut self.data[o..o + d]
    }

    /// All components at one site.
    #[inline]
    pub fn site(&self, site: usize) -> &[f64] {
        let w = self.ncomp() * self.dim();
        &self.data[site * w..(site + 1) * w]
    }

    pub fn check_compatible(&self, other: &Form) -> Result<()> {
        self.group.check_same(other.group)?;
        if self.grid != other.grid {
            return Err(Error::GridMismatch { left: self.grid.n(), right: other.grid.n() });
        }
        if self.degree != other.degree {
            return Err(Error::Degree { op: "binary form operation", degree: other.degree });
        }
        Ok(())
    }

    pub(crate) fn expect_degree(&self, op: &'static str, degree: usize) -> Result<()> {
        if self.degree != degree {
            return Err(Error::Degree { op, degree: self.degree });
        }
        Ok(())
    }

    /// `h^4 * sum` of componentwise products.
    pub fn inner(&self, other: &Form) -> f64 {
        debug_assert_eq!(self.data.len(), other.data.len());
        let s: f64 = self.data.iter().zip(&other.data).map(|(a, b)| a * b).sum();
        s * self.grid.cell_volume()
    }

    pub fn norm_sq(&self) -> f64 {
        self.inner(self)
    }

    pub fn l2_norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Pointwise norm `|u(x)|` over all components and generators.
    pub fn pointwise_norm(&self, site: usize) -> f64 {
        self.site(site).iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn axpy(&mut self, a: f64, x: &Form) {
        for (y, x) in self.data.iter_mut().zip(&x.data) {
            *y += a * x;
        }
    }

    pub fn scale(&mut self, s: f64) {
        self.data.iter_mut().for_each(|v| *v *= s);
    }

    pub fn scaled(&self, s: f64) -> Form {
        let mut out = self.clone();
        out.scale(s);
        out
    }

    pub fn add(&self, other: &Form) -> Form {
        let mut out = self.clone();
        out.axpy(1.0, other);
        out
    }

    pub fn sub(&self, other: &Form) -> Form {
        let mut out = self.clone();
        out.axpy(-1.0, other);
        out
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }
}

/// Complex Lie-algebra-valued form, stored as real and imaginary parts in
/// the real coframe basis. Bidegree is tracked by the operator producing it.
#[derive(Debug, Clone, PartialEq)]
pub struct CForm {
    pub re: Form,
    pub im: Form,
}

impl CForm {
    pub fn zeros(grid: Torus4, group: GroupKind, degree: usize) -> Self {
        Self { re: Form::zeros(grid, group, degree), im: Form::zeros(grid, group, degree) }
    }

    pub fn new(re: Form, im: Form) -> Result<Self> {
        re.check_compatible(&im)?;
        Ok(Self { re, im })
    }

    pub fn from_real(re: Form) -> Self {
        let im = re.zeros_like();
        Self { re, im }
    }

    pub fn zeros_like(&self) -> Self {
        Self { re: self.re.zeros_like(), im: self.im.zeros_like() }
    }

    pub fn grid(&self) -> Torus4 {
        self.re.grid()
    }

    pub fn group(&self) -> GroupKind {
        self.re.group()
    }

    pub fn degree(&self) -> usize {
        self.re.degree()
    }

    pub fn check_compatible(&self, other: &CForm) -> Result<()> {
        self.re.check_compatible(&other.re)
    }

    /// Hermitian inner product `<u, v> = h^4 sum conj(u) v`, as (re, im).
    pub fn inner(&self, other: &CForm) -> (f64, f64) {
        let re = self.re.inner(&other.re) + self.im.inner(&other.im);
        let im = self.re.inner(&other.im) - self.im.inner(&other.re);
        (re, im)
    }

    pub fn norm_sq(&self) -> f64 {
        self.re.norm_sq() + self.im.norm_sq()
    }

    pub fn l2_norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    pub fn pointwise_norm(&self, site: usize) -> f64 {
        let a = self.re.pointwise_norm(site);
        let b = self.im.pointwise_norm(site);
        (a * a + b * b).sqrt()
    }

    pub fn axpy(&mut self, a: f64, x: &CForm) {
        self.re.axpy(a, &x.re);
        self.im.axpy(a, &x.im);
    }

    /// `self += (a + i b) x`.
    pub fn caxpy(&mut self, a: (f64, f64), x: &CForm) {
        self.re.axpy(a.0, &x.re);
        self.re.axpy(-a.1, &x.im);
        self.im.axpy(a.0, &x.im);
        self.im.axpy(a.1, &x.re);
    }

    pub fn scale(&mut self, s: f64) {
        self.re.scale(s);
        self.im.scale(s);
    }

    pub fn add(&self, other: &CForm) -> CForm {
        CForm { re: self.re.add(&other.re), im: self.im.add(&other.im) }
    }

    pub fn sub(&self, other: &CForm) -> CForm {
        CForm { re: self.re.sub(&other.re), im: self.im.sub(&other.im) }
    }

    /// Multiplication by `i`.
    pub fn mul_i(&self) -> CForm {
        CForm { re: self.im.scaled(-1.0), im: self.re.clone() }
    }

    pub fn conj(&self) -> CForm {
        CForm { re: self.re.clone(), im: self.im.scaled(-1.0) }
    }

    pub fn max_abs(&self) -> f64 {
        self.re.max_abs().max(self.im.max_abs())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn component_count() {
        let g = Torus4::new(3).unwrap();
        for k in 0..5 {
            let f = Form::zeros(g, GroupKind::Su2, k);
            assert_eq!(f.data().len(), 81 * ncomp(k) * 3);
        }
        assert!(Form::from_data(g, GroupKind::U1, 1, vec![0.0; 5]).is_err());
    }

    #[test]
    fn hermitian_inner_is_conjugate_linear_in_first_slot() {
        let g = Torus4::new(2).unwrap();
        let mut k = 0.0f64;
        let u = CForm {
            re: Form::from_fn(g, GroupKind::Su2, 0, |_, _, c| {
                k += 0.37;
                c.iter_mut().for_each(|v| *v = k.sin())
            }),
            im: Form::from_fn(g, GroupKind::Su2, 0, |_, _, c| {
                k += 0.11;
                c.iter_mut().for_each(|v| *v = k.cos())
            }),
        };
        let iu = u.mul_i();
        let (re, im) = iu.inner(&u);
        // <iu, u> = -i |u|^2
        assert!(re.abs() < 1e-14);
        assert!((im + u.norm_sq()).abs() < 1e-12);
    }
}
