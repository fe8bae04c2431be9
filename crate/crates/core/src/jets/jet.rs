use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use super::layout::Layout;
use super::univariate;
use crate::error::{Error, Result};

/// Truncated multivariate Taylor polynomial of a smooth scalar at a point.
///
/// Coefficient `c_m` of multi-index `m` is `∂^m f / m!`. Binary operations on
/// jets of different orders truncate to the smaller order.
#[derive(Clone)]
pub struct Jet {
    layout: Arc<Layout>,
    coeffs: Vec<f64>,
}

impl fmt::Debug for Jet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Jet")
            .field("dim", &self.dim())
            .field("order", &self.order())
            .field("coeffs", &self.coeffs)
            .finish()
    }
}

impl Jet {
    pub fn constant(dim: usize, order: usize, value: f64) -> Jet {
        let layout = Layout::get(dim, order);
        let mut coeffs = vec![0.0; layout.len()];
        coeffs[0] = value;
        Jet { layout, coeffs }
    }

    /// Jet of the coordinate function `x_var` at a point where it equals `value`.
    pub fn variable(dim: usize, order: usize, var: usize, value: f64) -> Jet {
        assert!(var < dim, "variable {var} out of range for dimension {dim}");
        let mut jet = Jet::constant(dim, order, value);
        if order > 0 {
            jet.coeffs[1 + var] = 1.0;
        }
        jet
    }

    pub fn from_coeffs(dim: usize, order: usize, coeffs: Vec<f64>) -> Jet {
        let layout = Layout::get(dim, order);
        assert_eq!(coeffs.len(), layout.len(), "coefficient count mismatch");
        Jet { layout, coeffs }
    }

    pub fn dim(&self) -> usize {
        self.layout.dim()
    }

    pub fn order(&self) -> usize {
        self.layout.order()
    }

    pub fn layout(&self) -> &Layout {
        &self.layout
    }

    pub fn value(&self) -> f64 {
        self.coeffs[0]
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    /// Taylor coefficient of the given multi-index (0 beyond the jet's order).
    pub fn coeff(&self, multi: &[u8]) -> f64 {
        self.layout
            .index_of(multi)
            .map(|i| self.coeffs[i])
            .unwrap_or(0.0)
    }

    /// Mixed partial derivative `∂^multi f` at the base point.
    pub fn partial(&self, multi: &[u8]) -> f64 {
        let fact: f64 = multi
            .iter()
            .map(|&k| (1..=k as u64).product::<u64>() as f64)
            .product();
        self.coeff(multi) * fact
    }

    /// First partial `∂_var f`.
    pub fn first(&self, var: usize) -> f64 {
        if self.order() == 0 {
            return 0.0;
        }
        self.coeffs[1 + var]
    }

    pub fn is_finite(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_finite())
    }

    pub fn truncate(&self, order: usize) -> Jet {
        if order >= self.order() {
            return self.clone();
        }
        let layout = Layout::get(self.dim(), order);
        let coeffs = self.coeffs[..layout.len()].to_vec();
        Jet { layout, coeffs }
    }

    /// Partial derivative jet `∂_var J`, one order lower.
    pub fn derivative(&self, var: usize) -> Result<Jet> {
        if self.order() == 0 {
            return Err(Error::Order {
                requested: 1,
                max: 0,
            });
        }
        let layout = Layout::get(self.dim(), self.order() - 1);
        let coeffs = self
            .layout
            .deriv_table(var)
            .iter()
            .map(|&(src, factor)| factor * self.coeffs[src as usize])
            .collect();
        Ok(Jet { layout, coeffs })
    }

    pub fn scale(&self, s: f64) -> Jet {
        Jet {
            layout: self.layout.clone(),
            coeffs: self.coeffs.iter().map(|c| c * s).collect(),
        }
    }

    pub fn add_scalar(&self, s: f64) -> Jet {
        let mut out = self.clone();
        out.coeffs[0] += s;
        out
    }

    /// `self += s * other`, truncating `self` to the common order.
    pub fn axpy(&mut self, s: f64, other: &Jet) {
        self.align_to(other);
        for (a, b) in self.coeffs.iter_mut().zip(&other.coeffs) {
            *a += s * b;
        }
    }

    fn align_to(&mut self, other: &Jet) {
        assert_eq!(self.dim(), other.dim(), "jet dimension mismatch");
        if other.order() < self.order() {
            *self = self.truncate(other.order());
        }
    }

    fn binary(&self, other: &Jet, f: impl Fn(f64, f64) -> f64) -> Jet {
        assert_eq!(self.dim(), other.dim(), "jet dimension mismatch");
        let (layout, n) = if self.order() <= other.order() {
            (self.layout.clone(), self.coeffs.len())
        } else {
            (other.layout.clone(), other.coeffs.len())
        };
        let coeffs = (0..n).map(|i| f(self.coeffs[i], other.coeffs[i])).collect();
        Jet { layout, coeffs }
    }

    fn product(&self, other: &Jet) -> Jet {
        assert_eq!(self.dim(), other.dim(), "jet dimension mismatch");
        let layout = if self.order() <= other.order() {
            self.layout.clone()
        } else {
            other.layout.clone()
        };
        let mut coeffs = vec![0.0; layout.len()];
        for &(a, b, c) in layout.mul_table() {
            coeffs[c as usize] += self.coeffs[a as usize] * other.coeffs[b as usize];
        }
        Jet { layout, coeffs }
    }

    /// Composition `f ∘ self` from the univariate Taylor coefficients of `f` at `self.value()`.
    ///
    /// The non-constant part of a jet is nilpotent of degree `order + 1`, so the
    /// Horner sum over `order + 1` terms is exact.
    pub fn compose(&self, taylor: &[f64]) -> Jet {
        let order = self.order();
        assert!(taylor.len() > order, "need {} univariate coefficients", order + 1);
        let mut nil = self.clone();
        nil.coeffs[0] = 0.0;
        let mut acc = Jet::constant(self.dim(), order, taylor[order]);
        for k in (0..order).rev() {
            acc = acc.product(&nil);
            acc.coeffs[0] += taylor[k];
        }
        acc
    }

    pub fn recip(&self) -> Result<Jet> {
        Ok(self.compose(&univariate::recip(self.value(), self.order())?))
    }

    pub fn div(&self, other: &Jet) -> Result<Jet> {
        Ok(self * &other.recip()?)
    }

    pub fn sqrt(&self) -> Result<Jet> {
        Ok(self.compose(&univariate::sqrt(self.value(), self.order())?))
    }

    pub fn powf(&self, exponent: f64) -> Result<Jet> {
        Ok(self.compose(&univariate::powf(self.value(), exponent, self.order())?))
    }

    pub fn powi(&self, exponent: i32) -> Result<Jet> {
        if exponent < 0 {
            return self.recip()?.powi(-exponent);
        }
        let mut acc = Jet::constant(self.dim(), self.order(), 1.0);
        let mut base = self.clone();
        let mut e = exponent as u32;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.product(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.product(&base);
            }
        }
        Ok(acc)
    }

    pub fn sin(&self) -> Jet {
        self.compose(&univariate::sin(self.value(), self.order()))
    }

    pub fn cos(&self) -> Jet {
        self.compose(&univariate::cos(self.value(), self.order()))
    }

    pub fn exp(&self) -> Jet {
        self.compose(&univariate::exp(self.value(), self.order()))
    }
}

impl Add for &Jet {
    type Output = Jet;
    fn add(self, rhs: &Jet) -> Jet {
        self.binary(rhs, |a, b| a + b)
    }
}

impl Sub for &Jet {
    type Output = Jet;
    fn sub(self, rhs: &Jet) -> Jet {
        self.binary(rhs, |a, b| a - b)
    }
}

impl Mul for &Jet {
    type Output = Jet;
    fn mul(self, rhs: &Jet) -> Jet {
        self.product(rhs)
    }
}

impl Neg for &Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        self.scale(-1.0)
    }
}

impl Add for Jet {
    type Output = Jet;
    fn add(self, rhs: Jet) -> Jet {
        &self + &rhs
    }
}

impl Sub for Jet {
    type Output = Jet;
    fn sub(self, rhs: Jet) -> Jet {
        &self - &rhs
    }
}

impl Mul for Jet {
    type Output = Jet;
    fn mul(self, rhs: Jet) -> Jet {
        &self * &rhs
    }
}

impl Add<&Jet> for Jet {
    type Output = Jet;
    fn add(self, rhs: &Jet) -> Jet {
        &self + rhs
    }
}

impl Sub<&Jet> for Jet {
    type Output = Jet;
    fn sub(self, rhs: &Jet) -> Jet {
        &self - rhs
    }
}

impl Mul<&Jet> for Jet {
    type Output = Jet;
    fn mul(self, rhs: &Jet) -> Jet {
        &self * rhs
    }
}

impl Neg for Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        self.scale(-1.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * (1.0 + b.abs())
    }

    #[test]
    fn square_of_variable() {
        let x = Jet::variable(1, 2, 0, 2.0);
        let sq = &x * &x;
        assert_eq!(sq.coeffs(), &[4.0, 4.0, 1.0]);
    }

    #[test]
    fn sqrt_of_square_is_identity() {
        let x = Jet::variable(1, 4, 0, 3.0);
        let r = (&x * &x).sqrt().unwrap();
        let expect = [3.0, 1.0, 0.0, 0.0, 0.0];
        for (a, b) in r.coeffs().iter().zip(expect) {
            assert!(close(*a, b, 1e-14), "{a} vs {b}");
        }
    }

    #[test]
    fn derivative_lowers_order() {
        // f = x^2 y at (1, 2): ∂x f = 2xy
        let x = Jet::variable(2, 3, 0, 1.0);
        let y = Jet::variable(2, 3, 1, 2.0);
        let f = &(&x * &x) * &y;
        let fx = f.derivative(0).unwrap();
        assert_eq!(fx.order(), 2);
        assert!(close(fx.value(), 4.0, 1e-15));
        assert!(close(fx.first(0), 4.0, 1e-15)); // 2y
        assert!(close(fx.first(1), 2.0, 1e-15)); // 2x
        assert!(close(fx.partial(&[1, 1]), 2.0, 1e-15));
    }

    #[test]
    fn mixed_order_truncates() {
        let a = Jet::variable(2, 3, 0, 1.0);
        let b = Jet::variable(2, 1, 1, 1.0);
        assert_eq!((&a * &b).order(), 1);
        assert_eq!((&a + &b).order(), 1);
    }

    #[test]
    fn division_by_zero_value_is_domain_error() {
        let x = Jet::variable(1, 2, 0, 0.0);
        assert!(matches!(x.recip(), Err(Error::Domain(_))));
        assert!(matches!(x.scale(-1.0).add_scalar(-1.0).sqrt(), Err(Error::Domain(_))));
    }

    #[test]
    fn powi_matches_repeated_product() {
        let x = Jet::variable(2, 3, 0, 0.7).add_scalar(0.0);
        let y = Jet::variable(2, 3, 1, -0.4);
        let s = &x + &y;
        let p = s.powi(3).unwrap();
        let q = &(&s * &s) * &s;
        for (a, b) in p.coeffs().iter().zip(q.coeffs()) {
            assert!(close(*a, *b, 1e-14));
        }
        let inv = s.powi(-2).unwrap();
        let back = &inv * &(&s * &s);
        assert!(close(back.value(), 1.0, 1e-14));
        assert!(back.coeffs()[1..].iter().all(|c| c.abs() < 1e-12));
    }
}
