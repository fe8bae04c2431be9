//! Closed-form expression trees over chart variables.

use std::collections::HashMap;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::sync::Arc;

use super::jet::Jet;
use crate::error::{Error, Result};

/// Largest jet order [`lift`] accepts.
pub const MAX_ORDER: usize = 10;

/// A smooth function of one real variable that can report its Taylor coefficients.
///
/// Used for functions that have no closed form, e.g. a numerically integrated warp factor.
pub trait UnivariateFn: Send + Sync + fmt::Debug {
    fn name(&self) -> String;

    /// `f^(k)(x) / k!` for `k = 0..=order`.
    fn taylor(&self, x: f64, order: usize) -> Result<Vec<f64>>;

    fn derivative(&self) -> Arc<dyn UnivariateFn>;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Rational {
    pub num: i32,
    pub den: u32,
}

impl Rational {
    pub fn new(num: i32, den: u32) -> Rational {
        assert!(den > 0, "zero denominator");
        let g = gcd(num.unsigned_abs(), den);
        Rational {
            num: num / g as i32,
            den: den / g,
        }
    }

    pub fn as_f64(self) -> f64 {
        self.num as f64 / self.den as f64
    }

    fn is_integer(self) -> bool {
        self.den == 1
    }
}

fn gcd(a: u32, b: u32) -> u32 {
    if b == 0 {
        a.max(1)
    } else {
        gcd(b, a % b)
    }
}

#[derive(Debug)]
pub enum Node {
    Var(usize),
    Const(f64),
    Add(Expr, Expr),
    Sub(Expr, Expr),
    Mul(Expr, Expr),
    Div(Expr, Expr),
    Neg(Expr),
    Pow(Expr, Rational),
    Sqrt(Expr),
    Sin(Expr),
    Cos(Expr),
    Exp(Expr),
    Func(Arc<dyn UnivariateFn>, Expr),
}

/// Shared, immutable expression DAG node.
#[derive(Clone, Debug)]
pub struct Expr(Arc<Node>);

impl Expr {
    fn node(n: Node) -> Expr {
        Expr(Arc::new(n))
    }

    pub fn var(i: usize) -> Expr {
        Expr::node(Node::Var(i))
    }

    pub fn constant(c: f64) -> Expr {
        Expr::node(Node::Const(c))
    }

    pub fn zero() -> Expr {
        Expr::constant(0.0)
    }

    pub fn one() -> Expr {
        Expr::constant(1.0)
    }

    pub fn kind(&self) -> &Node {
        &self.0
    }

    pub fn as_const(&self) -> Option<f64> {
        match *self.0 {
            Node::Const(c) => Some(c),
            _ => None,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.as_const() == Some(0.0)
    }

    fn is_one(&self) -> bool {
        self.as_const() == Some(1.0)
    }

    pub fn pow(&self, r: Rational) -> Expr {
        match (r.num, r.den) {
            (0, _) => Expr::one(),
            (1, 1) => self.clone(),
            _ => match self.as_const() {
                Some(c) if c > 0.0 || r.is_integer() => Expr::constant(c.powf(r.as_f64())),
                _ => Expr::node(Node::Pow(self.clone(), r)),
            },
        }
    }

    pub fn powi(&self, k: i32) -> Expr {
        self.pow(Rational::new(k, 1))
    }

    pub fn sqrt(&self) -> Expr {
        match self.as_const() {
            Some(c) if c >= 0.0 => Expr::constant(c.sqrt()),
            _ => Expr::node(Node::Sqrt(self.clone())),
        }
    }

    pub fn sin(&self) -> Expr {
        match self.as_const() {
            Some(c) => Expr::constant(c.sin()),
            None => Expr::node(Node::Sin(self.clone())),
        }
    }

    pub fn cos(&self) -> Expr {
        match self.as_const() {
            Some(c) => Expr::constant(c.cos()),
            None => Expr::node(Node::Cos(self.clone())),
        }
    }

    pub fn exp(&self) -> Expr {
        match self.as_const() {
            Some(c) => Expr::constant(c.exp()),
            None => Expr::node(Node::Exp(self.clone())),
        }
    }

    pub fn apply(f: Arc<dyn UnivariateFn>, arg: Expr) -> Expr {
        Expr::node(Node::Func(f, arg))
    }

    pub fn scale(&self, s: f64) -> Expr {
        Expr::constant(s) * self.clone()
    }

    /// Scalar evaluation at `p`.
    pub fn eval(&self, p: &[f64]) -> Result<f64> {
        Ok(match &*self.0 {
            Node::Var(i) => *p
                .get(*i)
                .ok_or_else(|| Error::Model(format!("variable x{i} outside a {}-point", p.len())))?,
            Node::Const(c) => *c,
            Node::Add(a, b) => a.eval(p)? + b.eval(p)?,
            Node::Sub(a, b) => a.eval(p)? - b.eval(p)?,
            Node::Mul(a, b) => a.eval(p)? * b.eval(p)?,
            Node::Div(a, b) => {
                let d = b.eval(p)?;
                if d == 0.0 || !d.is_finite() {
                    return Err(Error::Domain(format!("division by {d} at {p:?}")));
                }
                a.eval(p)? / d
            }
            Node::Neg(a) => -a.eval(p)?,
            Node::Pow(a, r) => {
                let x = a.eval(p)?;
                if r.is_integer() {
                    if x == 0.0 && r.num < 0 {
                        return Err(Error::Domain(format!("0^{} at {p:?}", r.num)));
                    }
                    x.powi(r.num)
                } else {
                    if x < 0.0 || (x == 0.0 && r.num < 0) {
                        return Err(Error::Domain(format!("{x}^{}/{} at {p:?}", r.num, r.den)));
                    }
                    x.powf(r.as_f64())
                }
            }
            Node::Sqrt(a) => {
                let x = a.eval(p)?;
                if x < 0.0 {
                    return Err(Error::Domain(format!("sqrt of {x} at {p:?}")));
                }
                x.sqrt()
            }
            Node::Sin(a) => a.eval(p)?.sin(),
            Node::Cos(a) => a.eval(p)?.cos(),
            Node::Exp(a) => a.eval(p)?.exp(),
            Node::Func(f, a) => f.taylor(a.eval(p)?, 0)?[0],
        })
    }

    /// Jet of this expression at `p`, truncated at `order`.
    pub fn lift(&self, p: &[f64], order: usize) -> Result<Jet> {
        Lifter::new(p, order)?.lift(self)
    }

    /// Symbolic partial derivative with respect to `x_var`.
    pub fn diff(&self, var: usize) -> Expr {
        match &*self.0 {
            Node::Var(i) => {
                if *i == var {
                    Expr::one()
                } else {
                    Expr::zero()
                }
            }
            Node::Const(_) => Expr::zero(),
            Node::Add(a, b) => a.diff(var) + b.diff(var),
            Node::Sub(a, b) => a.diff(var) - b.diff(var),
            Node::Mul(a, b) => a.diff(var) * b.clone() + a.clone() * b.diff(var),
            Node::Div(a, b) => {
                a.diff(var) / b.clone() - a.clone() * b.diff(var) / (b.clone() * b.clone())
            }
            Node::Neg(a) => -a.diff(var),
            Node::Pow(a, r) => {
                let lowered = a.pow(Rational::new(r.num - r.den as i32, r.den));
                Expr::constant(r.as_f64()) * lowered * a.diff(var)
            }
            Node::Sqrt(a) => a.diff(var) / (Expr::constant(2.0) * self.clone()),
            Node::Sin(a) => a.cos() * a.diff(var),
            Node::Cos(a) => -(a.sin() * a.diff(var)),
            Node::Exp(a) => self.clone() * a.diff(var),
            Node::Func(f, a) => Expr::apply(f.derivative(), a.clone()) * a.diff(var),
        }
    }

    /// Renames `x_i` to `x_{i+offset}`.
    pub fn shift_vars(&self, offset: usize) -> Expr {
        self.map_vars(&|i| Expr::var(i + offset))
    }

    /// Replaces every variable `x_i` by `f(i)`.
    pub fn map_vars(&self, f: &dyn Fn(usize) -> Expr) -> Expr {
        match &*self.0 {
            Node::Var(i) => f(*i),
            Node::Const(_) => self.clone(),
            Node::Add(a, b) => a.map_vars(f) + b.map_vars(f),
            Node::Sub(a, b) => a.map_vars(f) - b.map_vars(f),
            Node::Mul(a, b) => a.map_vars(f) * b.map_vars(f),
            Node::Div(a, b) => a.map_vars(f) / b.map_vars(f),
            Node::Neg(a) => -a.map_vars(f),
            Node::Pow(a, r) => a.map_vars(f).pow(*r),
            Node::Sqrt(a) => a.map_vars(f).sqrt(),
            Node::Sin(a) => a.map_vars(f).sin(),
            Node::Cos(a) => a.map_vars(f).cos(),
            Node::Exp(a) => a.map_vars(f).exp(),
            Node::Func(g, a) => Expr::apply(g.clone(), a.map_vars(f)),
        }
    }

    pub fn depends_on(&self, var: usize) -> bool {
        match &*self.0 {
            Node::Var(i) => *i == var,
            Node::Const(_) => false,
            Node::Add(a, b) | Node::Sub(a, b) | Node::Mul(a, b) | Node::Div(a, b) => {
                a.depends_on(var) || b.depends_on(var)
            }
            Node::Neg(a)
            | Node::Pow(a, _)
            | Node::Sqrt(a)
            | Node::Sin(a)
            | Node::Cos(a)
            | Node::Exp(a)
            | Node::Func(_, a) => a.depends_on(var),
        }
    }

    /// Highest variable index used, if any.
    pub fn max_var(&self) -> Option<usize> {
        match &*self.0 {
            Node::Var(i) => Some(*i),
            Node::Const(_) => None,
            Node::Add(a, b) | Node::Sub(a, b) | Node::Mul(a, b) | Node::Div(a, b) => {
                a.max_var().max(b.max_var())
            }
            Node::Neg(a)
            | Node::Pow(a, _)
            | Node::Sqrt(a)
            | Node::Sin(a)
            | Node::Cos(a)
            | Node::Exp(a)
            | Node::Func(_, a) => a.max_var(),
        }
    }

    /// Structural identity of two expression trees (function nodes compare by identity).
    pub fn same_as(&self, other: &Expr) -> bool {
        if Arc::ptr_eq(&self.0, &other.0) {
            return true;
        }
        match (&*self.0, &*other.0) {
            (Node::Var(a), Node::Var(b)) => a == b,
            (Node::Const(a), Node::Const(b)) => a.to_bits() == b.to_bits(),
            (Node::Add(a, b), Node::Add(c, d))
            | (Node::Sub(a, b), Node::Sub(c, d))
            | (Node::Mul(a, b), Node::Mul(c, d))
            | (Node::Div(a, b), Node::Div(c, d)) => a.same_as(c) && b.same_as(d),
            (Node::Neg(a), Node::Neg(b))
            | (Node::Sqrt(a), Node::Sqrt(b))
            | (Node::Sin(a), Node::Sin(b))
            | (Node::Cos(a), Node::Cos(b))
            | (Node::Exp(a), Node::Exp(b)) => a.same_as(b),
            (Node::Pow(a, r), Node::Pow(b, s)) => r == s && a.same_as(b),
            (Node::Func(f, a), Node::Func(g, b)) => {
                std::ptr::addr_eq(Arc::as_ptr(f), Arc::as_ptr(g)) && a.same_as(b)
            }
            _ => false,
        }
    }
}

/// Lifts many expressions at one point, sharing work on common subexpressions.
pub struct Lifter {
    point: Vec<f64>,
    order: usize,
    /// Keyed by node address; the `Expr` is held so the address cannot be reused while cached.
    cache: HashMap<usize, (Expr, Jet)>,
}

impl Lifter {
    pub fn new(point: &[f64], order: usize) -> Result<Lifter> {
        if order > MAX_ORDER {
            return Err(Error::Order {
                requested: order,
                max: MAX_ORDER,
            });
        }
        if point.iter().any(|x| !x.is_finite()) {
            return Err(Error::Domain(format!("non-finite point {point:?}")));
        }
        Ok(Lifter {
            point: point.to_vec(),
            order,
            cache: HashMap::new(),
        })
    }

    pub fn point(&self) -> &[f64] {
        &self.point
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn lift(&mut self, e: &Expr) -> Result<Jet> {
        let key = Arc::as_ptr(&e.0) as usize;
        if let Some((_, j)) = self.cache.get(&key) {
            return Ok(j.clone());
        }
        let dim = self.point.len();
        let order = self.order;
        let at = |msg: String, p: &[f64]| Error::Domain(format!("{msg} at {p:?}"));
        let jet = match &*e.0 {
            Node::Var(i) => {
                if *i >= dim {
                    return Err(Error::Model(format!(
                        "expression uses x{i} on a {dim}-dimensional chart"
                    )));
                }
                Jet::variable(dim, order, *i, self.point[*i])
            }
            Node::Const(c) => Jet::constant(dim, order, *c),
            Node::Add(a, b) => &self.lift(a)? + &self.lift(b)?,
            Node::Sub(a, b) => &self.lift(a)? - &self.lift(b)?,
            Node::Mul(a, b) => &self.lift(a)? * &self.lift(b)?,
            Node::Div(a, b) => {
                let num = self.lift(a)?;
                let den = self.lift(b)?;
                num.div(&den).map_err(|err| at(err.to_string(), &self.point))?
            }
            Node::Neg(a) => -&self.lift(a)?,
            Node::Pow(a, r) => {
                let base = self.lift(a)?;
                if r.is_integer() {
                    base.powi(r.num)
                } else {
                    base.powf(r.as_f64())
                }
                .map_err(|err| at(err.to_string(), &self.point))?
            }
            Node::Sqrt(a) => self
                .lift(a)?
                .sqrt()
                .map_err(|err| at(err.to_string(), &self.point))?,
            Node::Sin(a) => self.lift(a)?.sin(),
            Node::Cos(a) => self.lift(a)?.cos(),
            Node::Exp(a) => self.lift(a)?.exp(),
            Node::Func(f, a) => {
                let inner = self.lift(a)?;
                let taylor = f
                    .taylor(inner.value(), order)
                    .map_err(|err| at(format!("{}: {err}", f.name()), &self.point))?;
                inner.compose(&taylor)
            }
        };
        if !jet.is_finite() {
            return Err(at("non-finite jet".into(), &self.point));
        }
        self.cache.insert(key, (e.clone(), jet.clone()));
        Ok(jet)
    }
}

/// Jet of `e` at `p` up to `order`.
pub fn lift(e: &Expr, p: &[f64], order: usize) -> Result<Jet> {
    e.lift(p, order)
}

impl Add for Expr {
    type Output = Expr;
    fn add(self, rhs: Expr) -> Expr {
        match (self.as_const(), rhs.as_const()) {
            (Some(a), Some(b)) => Expr::constant(a + b),
            (Some(0.0), _) => rhs,
            (_, Some(0.0)) => self,
            _ => Expr::node(Node::Add(self, rhs)),
        }
    }
}

impl Sub for Expr {
    type Output = Expr;
    fn sub(self, rhs: Expr) -> Expr {
        match (self.as_const(), rhs.as_const()) {
            (Some(a), Some(b)) => Expr::constant(a - b),
            (Some(0.0), _) => -rhs,
            (_, Some(0.0)) => self,
            _ => Expr::node(Node::Sub(self, rhs)),
        }
    }
}

impl Mul for Expr {
    type Output = Expr;
    fn mul(self, rhs: Expr) -> Expr {
        match (self.as_const(), rhs.as_const()) {
            (Some(a), Some(b)) => Expr::constant(a * b),
            _ if self.is_zero() || rhs.is_zero() => Expr::zero(),
            _ if self.is_one() => rhs,
            _ if rhs.is_one() => self,
            _ => Expr::node(Node::Mul(self, rhs)),
        }
    }
}

impl Div for Expr {
    type Output = Expr;
    fn div(self, rhs: Expr) -> Expr {
        match (self.as_const(), rhs.as_const()) {
            (Some(a), Some(b)) if b != 0.0 => Expr::constant(a / b),
            _ if self.is_zero() && !rhs.is_zero() => Expr::zero(),
            _ if rhs.is_one() => self,
            _ => Expr::node(Node::Div(self, rhs)),
        }
    }
}

impl Neg for Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        match &*self.0 {
            Node::Const(c) => Expr::constant(-c),
            Node::Neg(a) => a.clone(),
            _ => Expr::node(Node::Neg(self)),
        }
    }
}

impl From<f64> for Expr {
    fn from(c: f64) -> Expr {
        Expr::constant(c)
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &*self.0 {
            Node::Var(i) => write!(f, "x{i}"),
            Node::Const(c) => write!(f, "{c}"),
            Node::Add(a, b) => write!(f, "({a} + {b})"),
            Node::Sub(a, b) => write!(f, "({a} - {b})"),
            Node::Mul(a, b) => write!(f, "{a}*{b}"),
            Node::Div(a, b) => write!(f, "{a}/({b})"),
            Node::Neg(a) => write!(f, "-{a}"),
            Node::Pow(a, r) if r.den == 1 => write!(f, "({a})^{}", r.num),
            Node::Pow(a, r) => write!(f, "({a})^({}/{})", r.num, r.den),
            Node::Sqrt(a) => write!(f, "sqrt({a})"),
            Node::Sin(a) => write!(f, "sin({a})"),
            Node::Cos(a) => write!(f, "cos({a})"),
            Node::Exp(a) => write!(f, "exp({a})"),
            Node::Func(g, a) => write!(f, "{}({a})", g.name()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn x() -> Expr {
        Expr::var(0)
    }
    fn y() -> Expr {
        Expr::var(1)
    }

    #[test]
    fn product_of_coordinates() {
        let j = (x() * y()).lift(&[1.0, 2.0], 2).unwrap();
        assert_eq!(j.value(), 2.0);
        assert_eq!(j.partial(&[1, 0]), 2.0);
        assert_eq!(j.partial(&[0, 1]), 1.0);
        assert_eq!(j.partial(&[1, 1]), 1.0);
        assert_eq!(j.partial(&[2, 0]), 0.0);
        assert_eq!(j.partial(&[0, 2]), 0.0);
    }

    #[test]
    fn sine_jet() {
        let j = x().sin().lift(&[0.0], 3).unwrap();
        let expect = [0.0, 1.0, 0.0, -1.0 / 6.0];
        for (a, b) in j.coeffs().iter().zip(expect) {
            assert!((a - b).abs() < 1e-16);
        }
    }

    #[test]
    fn order_limit() {
        assert!(matches!(
            x().lift(&[0.0], MAX_ORDER + 1),
            Err(Error::Order { .. })
        ));
    }

    #[test]
    fn pole_reports_domain_error() {
        let e = Expr::one() / x();
        assert!(matches!(e.lift(&[0.0], 2), Err(Error::Domain(_))));
        assert!(matches!(e.eval(&[0.0]), Err(Error::Domain(_))));
        let s = (x() - Expr::one()).sqrt();
        assert!(matches!(s.lift(&[0.5], 1), Err(Error::Domain(_))));
    }

    #[test]
    fn folding_and_structure() {
        let e = Expr::zero() + x() * Expr::one();
        assert!(e.same_as(&x()));
        assert!((x() * Expr::zero()).is_zero());
        assert!(!x().shift_vars(1).depends_on(0));
        assert_eq!(y().shift_vars(2).max_var(), Some(3));
    }

    #[test]
    fn symbolic_diff_matches_jet() {
        let e = (x() * y()).sin() / (Expr::one() + x() * x()) + (y().exp() * x()).sqrt();
        let p = [0.4, 0.3];
        let j = e.lift(&p, 2).unwrap();
        for v in 0..2 {
            let d = e.diff(v).lift(&p, 1).unwrap();
            let jd = j.derivative(v).unwrap();
            for (a, b) in d.coeffs().iter().zip(jd.coeffs()) {
                assert!((a - b).abs() < 1e-13, "{a} vs {b}");
            }
        }
    }

    #[test]
    fn rational_power_diff() {
        let e = (Expr::one() + x() * x()).pow(Rational::new(-3, 2));
        let d = e.diff(0).eval(&[0.5]).unwrap();
        let expect = -3.0 * 0.5 * (1.25f64).powf(-2.5);
        assert!((d - expect).abs() < 1e-14);
    }

    #[test]
    fn lifter_survives_dropped_expressions() {
        let mut lifter = Lifter::new(&[0.4], 2).unwrap();
        for k in 0..200 {
            let e = Expr::var(0).scale(k as f64 + 1.0);
            let j = lifter.lift(&e).unwrap();
            assert_eq!(j.first(0), k as f64 + 1.0);
        }
    }
}
