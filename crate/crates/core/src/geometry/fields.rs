use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use super::chart::Chart;
use super::tensor::Tensor;
use crate::error::{Error, Result};
use crate::jets::Expr;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Signature {
    Riemannian,
    Lorentzian,
}

fn check_vars(e: &Expr, dim: usize, what: &str) -> Result<()> {
    match e.max_var() {
        Some(v) if v >= dim => Err(Error::Model(format!(
            "{what} uses x{v} on a {dim}-dimensional chart"
        ))),
        _ => Ok(()),
    }
}

/// Symmetric metric tensor with closed-form components on a chart.
#[derive(Debug, Clone)]
pub struct MetricField {
    chart: Chart,
    comps: Vec<Expr>,
    signature: Signature,
}

impl MetricField {
    /// Builds the metric from its upper triangle; `entry(i, j)` is only called for `i <= j`.
    pub fn from_upper(
        chart: Chart,
        signature: Signature,
        mut entry: impl FnMut(usize, usize) -> Expr,
    ) -> Result<MetricField> {
        let n = chart.dim();
        let mut comps = vec![Expr::zero(); n * n];
        for i in 0..n {
            for j in i..n {
                let e = entry(i, j);
                check_vars(&e, n, "metric component")?;
                comps[i * n + j] = e.clone();
                comps[j * n + i] = e;
            }
        }
        Ok(MetricField {
            chart,
            comps,
            signature,
        })
    }

    /// Conformally flat metric `φ δ`.
    pub fn conformal(chart: Chart, factor: Expr) -> Result<MetricField> {
        MetricField::from_upper(chart, Signature::Riemannian, |i, j| {
            if i == j {
                factor.clone()
            } else {
                Expr::zero()
            }
        })
    }

    pub fn chart(&self) -> &Chart {
        &self.chart
    }

    pub fn dim(&self) -> usize {
        self.chart.dim()
    }

    pub fn signature(&self) -> Signature {
        self.signature
    }

    pub fn component(&self, i: usize, j: usize) -> &Expr {
        &self.comps[i * self.dim() + j]
    }

    /// `λ² g` on the same chart.
    pub fn scaled(&self, lambda: f64) -> MetricField {
        let s = Expr::constant(lambda * lambda);
        MetricField {
            chart: self.chart.clone(),
            comps: self.comps.iter().map(|e| s.clone() * e.clone()).collect(),
            signature: self.signature,
        }
    }

    pub fn value_at(&self, p: &[f64]) -> Result<Tensor> {
        let n = self.dim();
        let mut data = Vec::with_capacity(n * n);
        for e in &self.comps {
            data.push(e.eval(p)?);
        }
        Ok(Tensor::from_vec(n, 2, data))
    }

    /// Checks invertibility and the declared signature at `p`.
    pub fn check_at(&self, p: &[f64]) -> Result<()> {
        let g = self.value_at(p)?;
        check_signature(&g, self.signature, p)
    }
}

pub(crate) fn check_signature(g: &Tensor, signature: Signature, p: &[f64]) -> Result<()> {
    let n = g.dim();
    let m = DMatrix::from_fn(n, n, |i, j| g.get(&[i, j]));
    let eig = SymmetricEigen::new(m).eigenvalues;
    let scale = eig.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    if !scale.is_finite() || eig.iter().any(|v| v.abs() <= 1e-13 * scale) || scale == 0.0 {
        return Err(Error::SingularMetric { point: p.to_vec() });
    }
    let negative = eig.iter().filter(|v| **v < 0.0).count();
    let expected = match signature {
        Signature::Riemannian => 0,
        Signature::Lorentzian => 1,
    };
    if negative != expected {
        return Err(Error::Definiteness {
            point: p.to_vec(),
            detail: format!("{negative} negative eigenvalues, expected {expected}"),
        });
    }
    Ok(())
}

#[derive(Debug, Clone)]
pub struct ScalarField {
    expr: Expr,
}

impl ScalarField {
    pub fn new(expr: Expr) -> ScalarField {
        ScalarField { expr }
    }

    pub fn constant(c: f64) -> ScalarField {
        ScalarField::new(Expr::constant(c))
    }

    pub fn expr(&self) -> &Expr {
        &self.expr
    }

    pub fn check_dim(&self, dim: usize) -> Result<()> {
        check_vars(&self.expr, dim, "scalar field")
    }

    pub fn eval(&self, p: &[f64]) -> Result<f64> {
        self.expr.eval(p)
    }
}

impl From<Expr> for ScalarField {
    fn from(e: Expr) -> Self {
        ScalarField::new(e)
    }
}

#[derive(Debug, Clone)]
pub struct OneFormField {
    comps: Vec<Expr>,
}

impl OneFormField {
    pub fn new(comps: Vec<Expr>) -> OneFormField {
        OneFormField { comps }
    }

    pub fn zero(n: usize) -> OneFormField {
        OneFormField::new(vec![Expr::zero(); n])
    }

    /// Exterior derivative of a scalar, `df`.
    pub fn differential(f: &Expr, n: usize) -> OneFormField {
        OneFormField::new((0..n).map(|i| f.diff(i)).collect())
    }

    pub fn dim(&self) -> usize {
        self.comps.len()
    }

    pub fn comps(&self) -> &[Expr] {
        &self.comps
    }

    pub fn scaled(&self, s: f64) -> OneFormField {
        OneFormField::new(self.comps.iter().map(|e| e.scale(s)).collect())
    }

    pub fn add(&self, other: &OneFormField) -> OneFormField {
        OneFormField::new(
            self.comps
                .iter()
                .zip(&other.comps)
                .map(|(a, b)| a.clone() + b.clone())
                .collect(),
        )
    }

    pub fn check_dim(&self, dim: usize) -> Result<()> {
        if self.comps.len() != dim {
            return Err(Error::Model(format!(
                "one-form has {} components on a {dim}-dimensional chart",
                self.comps.len()
            )));
        }
        self.comps.iter().try_for_each(|e| check_vars(e, dim, "one-form"))
    }
}

#[derive(Debug, Clone)]
pub struct SymTensorField {
    n: usize,
    comps: Vec<Expr>,
}

impl SymTensorField {
    pub fn from_upper(n: usize, mut entry: impl FnMut(usize, usize) -> Expr) -> SymTensorField {
        let mut comps = vec![Expr::zero(); n * n];
        for i in 0..n {
            for j in i..n {
                let e = entry(i, j);
                comps[i * n + j] = e.clone();
                comps[j * n + i] = e;
            }
        }
        SymTensorField { n, comps }
    }

    /// `c · g` for a scalar `c`.
    pub fn umbilic(g: &MetricField, c: &Expr) -> SymTensorField {
        SymTensorField::from_upper(g.dim(), |i, j| c.clone() * g.component(i, j).clone())
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn component(&self, i: usize, j: usize) -> &Expr {
        &self.comps[i * self.n + j]
    }

    pub fn check_dim(&self, dim: usize) -> Result<()> {
        if self.n != dim {
            return Err(Error::Model(format!(
                "tensor field of dimension {} on a {dim}-dimensional chart",
                self.n
            )));
        }
        self.comps.iter().try_for_each(|e| check_vars(e, dim, "tensor field"))
    }
}
