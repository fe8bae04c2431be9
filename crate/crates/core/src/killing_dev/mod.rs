//! Killing development `γ̃ = (|α|² - f²) dt² + 2 dt⊙α + g` of Killing initial data, and its
//! Einstein and staticity residuals.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Chart, LocalGeometry, MetricField, Signature, TJet, Tensor};
use crate::jets::Expr;
use crate::models::Model;
use crate::operators::{EquationResidual, KidData, ResidualReport, Sampling};

/// Allowed variation of `c` and `Scal` before the development is refused.
pub const CONSTANCY_TOL: f64 = 1e-7;

/// `t` coordinate at which sample points of the development are placed.
const T_SLICE: f64 = 0.5;

const PROBE_COUNT: usize = 64;
const PROBE_SEED: u64 = 0x6b1d;

#[derive(Debug, Clone)]
pub struct LorentzModel {
    /// Lorentzian metric on `(t, x)`, with `x` the source chart shifted one slot up.
    pub metric: MetricField,
    pub lambda: f64,
    pub kid: KidData,
    pub f_floor: f64,
    pub source: String,
    pub scal: f64,
    pub c: f64,
    spatial_dim: usize,
}

/// Serializable summary of a development.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LorentzSummary {
    pub source: String,
    pub dim: usize,
    pub lambda: f64,
    pub einstein_constant: f64,
    pub scal: f64,
    pub c: f64,
    pub f_floor: f64,
    pub stationary: bool,
    pub slice_isometric: bool,
}

/// Determinant of a square matrix of expressions, by Laplace expansion along rows with
/// minors shared through a column-mask cache.
pub fn symbolic_det(m: &[Vec<Expr>]) -> Expr {
    fn rec(m: &[Vec<Expr>], row: usize, mask: u32, cache: &mut HashMap<u32, Expr>) -> Expr {
        let n = m.len();
        if row == n {
            return Expr::one();
        }
        if let Some(e) = cache.get(&mask) {
            return e.clone();
        }
        let mut acc = Expr::zero();
        let mut sign = 1.0;
        for col in 0..n {
            if mask & (1 << col) != 0 {
                continue;
            }
            let entry = &m[row][col];
            if !entry.is_zero() {
                let minor = rec(m, row + 1, mask | (1 << col), cache);
                let term = entry.clone() * minor;
                acc = if sign > 0.0 { acc + term } else { acc - term };
            }
            sign = -sign;
        }
        cache.insert(mask, acc.clone());
        acc
    }
    rec(m, 0, 0, &mut HashMap::new())
}

/// `g^{ij} α_i α_j = -det [[0, αᵀ], [α, g]] / det g`.
pub fn alpha_norm_sq(g: &MetricField, alpha: &[Expr]) -> Expr {
    let n = g.dim();
    let gm: Vec<Vec<Expr>> = (0..n)
        .map(|i| (0..n).map(|j| g.component(i, j).clone()).collect())
        .collect();
    let bordered: Vec<Vec<Expr>> = (0..=n)
        .map(|i| {
            (0..=n)
                .map(|j| match (i, j) {
                    (0, 0) => Expr::zero(),
                    (0, j) => alpha[j - 1].clone(),
                    (i, 0) => alpha[i - 1].clone(),
                    (i, j) => gm[i - 1][j - 1].clone(),
                })
                .collect()
        })
        .collect();
    -(symbolic_det(&bordered) / symbolic_det(&gm))
}

fn spread(v: &[f64]) -> (f64, f64) {
    let mean = v.iter().sum::<f64>() / v.len() as f64;
    let dev = v.iter().fold(0.0f64, |m, x| m.max((x - mean).abs()));
    (mean, dev)
}

/// Builds the development; `c` and `Scal` must be constant on the chart.
pub fn develop(model: &Model, kid: &KidData) -> Result<LorentzModel> {
    let g = &model.metric;
    let n = g.dim();
    kid.check_dim(n)?;
    let probes = model.chart().sample(PROBE_COUNT, PROBE_SEED);

    let mut cs = Vec::with_capacity(probes.len());
    let mut scals = Vec::with_capacity(probes.len());
    let mut fmax: f64 = 0.0;
    for p in &probes {
        cs.push(kid.c.eval(p)?);
        let geo = LocalGeometry::new(g, p, 2)?;
        scals.push(geo.scal().value());
        fmax = fmax.max(kid.f.eval(p)?.abs());
    }
    let (c, c_dev) = spread(&cs);
    if c_dev > CONSTANCY_TOL * c.abs().max(1.0) {
        return Err(Error::NonConstant(format!("c varies by {c_dev:.3e}")));
    }
    let (scal, scal_dev) = spread(&scals);
    if scal_dev > CONSTANCY_TOL * scal.abs().max(1.0) {
        return Err(Error::NonConstant(format!("Scal varies by {scal_dev:.3e}")));
    }
    if !(fmax > 1e-14) {
        return Err(Error::Degenerate("f vanishes at every probe point".into()));
    }
    let lambda = 0.5 * (scal + (n * (n - 1)) as f64 * c * c);

    let alpha: Vec<Expr> = kid.alpha.comps().iter().map(|a| a.shift_vars(1)).collect();
    let f = kid.f.expr().shift_vars(1);
    let lapse = alpha_norm_sq(g, kid.alpha.comps()).shift_vars(1) - f.clone() * f;
    let chart = Chart::new(vec![0.0], vec![1.0], vec![None], 0.05)?.product(model.chart())?;
    let metric = MetricField::from_upper(chart, Signature::Lorentzian, |i, j| match (i, j) {
        (0, 0) => lapse.clone(),
        (0, j) => alpha[j - 1].clone(),
        (i, j) => g.component(i - 1, j - 1).shift_vars(1),
    })?;
    Ok(LorentzModel {
        metric,
        lambda,
        kid: kid.clone(),
        f_floor: 0.1 * fmax,
        source: model.descriptor(),
        scal,
        c,
        spatial_dim: n,
    })
}

impl LorentzModel {
    pub fn spatial_dim(&self) -> usize {
        self.spatial_dim
    }

    /// `2Λ/(n-1)`, the Einstein constant in ambient dimension `n + 1`.
    pub fn einstein_constant(&self) -> f64 {
        2.0 * self.lambda / (self.spatial_dim as f64 - 1.0)
    }

    /// No component depends on the development variable.
    pub fn is_stationary(&self) -> bool {
        let n = self.metric.dim();
        (0..n).all(|i| (i..n).all(|j| !self.metric.component(i, j).depends_on(0)))
    }

    /// Spatial block with the development variable dropped, in the source chart.
    pub fn slice_metric(&self) -> Vec<Vec<Expr>> {
        let n = self.spatial_dim;
        let back = |v: usize| if v == 0 { Expr::zero() } else { Expr::var(v - 1) };
        (0..n)
            .map(|i| (0..n).map(|j| self.metric.component(i + 1, j + 1).map_vars(&back)).collect())
            .collect()
    }

    /// Whether the spatial block coincides with `g` expression for expression.
    pub fn slice_is(&self, g: &MetricField) -> bool {
        let s = self.slice_metric();
        g.dim() == self.spatial_dim
            && (0..self.spatial_dim)
                .all(|i| (0..self.spatial_dim).all(|j| s[i][j].same_as(g.component(i, j))))
    }

    pub fn summary(&self, source_metric: &MetricField) -> LorentzSummary {
        LorentzSummary {
            source: self.source.clone(),
            dim: self.metric.dim(),
            lambda: self.lambda,
            einstein_constant: self.einstein_constant(),
            scal: self.scal,
            c: self.c,
            f_floor: self.f_floor,
            stationary: self.is_stationary(),
            slice_isometric: self.slice_is(source_metric),
        }
    }

    /// Lifts source-chart points to the development at `t = 0.5`, dropping those with
    /// `|f| < f_floor`. Returns the kept points and the number excluded.
    pub fn admissible(&self, sampling: &Sampling) -> Result<(Sampling, usize)> {
        let mut kept = Vec::with_capacity(sampling.len());
        for p in &sampling.points {
            if p.len() != self.spatial_dim {
                return Err(Error::Param(format!(
                    "sample point has {} coordinates, slice has {}",
                    p.len(),
                    self.spatial_dim
                )));
            }
            if self.kid.f.eval(p)?.abs() >= self.f_floor {
                let mut q = Vec::with_capacity(p.len() + 1);
                q.push(T_SLICE);
                q.extend_from_slice(p);
                kept.push(q);
            }
        }
        if kept.is_empty() {
            return Err(Error::Degenerate(format!(
                "no sample point has |f| ≥ {:.3e}",
                self.f_floor
            )));
        }
        let excluded = sampling.len() - kept.len();
        Ok((
            Sampling {
                points: kept,
                seed: sampling.seed,
                order: sampling.order,
            },
            excluded,
        ))
    }

    /// `det γ̃` at a source-chart point.
    pub fn det_at(&self, p: &[f64]) -> Result<f64> {
        let mut q = vec![T_SLICE];
        q.extend_from_slice(p);
        let v = self.metric.value_at(&q)?;
        let n = self.metric.dim();
        Ok(nalgebra::DMatrix::from_fn(n, n, |i, j| v.get(&[i, j])).determinant())
    }
}

fn note_excluded(r: ResidualReport, excluded: usize, floor: f64) -> ResidualReport {
    if excluded > 0 {
        r.with_note(format!("{excluded} sample points with |f| < {floor:.3e} excluded"))
    } else {
        r
    }
}

/// `Ric(γ̃) - (2Λ/(n-1)) γ̃` over source-chart sample points.
pub fn einstein_residual(lm: &LorentzModel, sampling: &Sampling, tolerance: f64) -> Result<ResidualReport> {
    let (pts, excluded) = lm.admissible(sampling)?;
    let k = lm.einstein_constant();
    let (mut frame, mut raw) = (Vec::new(), Vec::new());
    for q in &pts.points {
        let geo = LocalGeometry::new(&lm.metric, q, pts.order)?;
        let r = geo.ricci().value().sub(&geo.metric().value().scale(k));
        frame.push(geo.norm(&r));
        raw.push(r.max_abs());
    }
    let eq = EquationResidual::new("einstein", frame, raw);
    let r = ResidualReport::new("einstein", &lm.source, &pts, tolerance, vec![eq]);
    Ok(note_excluded(r, excluded, lm.f_floor))
}

/// `w ∧ F` for a one-form `w` and two-form `F`.
fn wedge12(w: &Tensor, f: &Tensor) -> Tensor {
    Tensor::from_fn(w.dim(), 3, |ix| {
        let (a, b, c) = (ix[0], ix[1], ix[2]);
        w.get(&[a]) * f.get(&[b, c]) + w.get(&[b]) * f.get(&[c, a]) + w.get(&[c]) * f.get(&[a, b])
    })
}

/// `ξ♭ ∧ dξ♭` for `ξ = ∂_t`, over source-chart sample points.
pub fn staticity_residual(lm: &LorentzModel, sampling: &Sampling, tolerance: f64) -> Result<ResidualReport> {
    let (pts, excluded) = lm.admissible(sampling)?;
    let dim = lm.metric.dim();
    let xi: Vec<Expr> = (0..dim).map(|j| lm.metric.component(0, j).clone()).collect();
    let (mut frame, mut raw) = (Vec::new(), Vec::new());
    for q in &pts.points {
        let geo = LocalGeometry::new(&lm.metric, q, pts.order)?;
        let comps = xi.iter().map(|e| geo.lift(e)).collect::<Result<Vec<_>>>()?;
        let w = TJet::from_fn(dim, 1, |ix| comps[ix[0]].clone());
        let dw = w.partial().value();
        let dxi = dw.sub(&dw.transpose(0, 1));
        let t = wedge12(&w.value(), &dxi);
        frame.push(geo.norm(&t));
        raw.push(t.max_abs());
    }
    let eq = EquationResidual::new("xi_wedge_dxi", frame, raw);
    let r = ResidualReport::new("staticity", &lm.source, &pts, tolerance, vec![eq]);
    Ok(note_excluded(r, excluded, lm.f_floor))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{obata_kid, ModelSpec};

    fn sphere() -> Model {
        ModelSpec::Sphere { n: 3, r: 1.0, south: false }.build().unwrap()
    }

    #[test]
    fn determinant_of_small_matrix() {
        let x = Expr::var(0);
        let m = vec![
            vec![x.clone(), Expr::constant(2.0)],
            vec![Expr::constant(3.0), x.clone()],
        ];
        assert!((symbolic_det(&m).eval(&[5.0]).unwrap() - 19.0).abs() < 1e-14);
    }

    #[test]
    fn de_sitter_constant() {
        let m = sphere();
        let lm = develop(&m, &obata_kid(&m, 4, 1.0).unwrap()).unwrap();
        assert!((lm.lambda - 6.0).abs() < 1e-9);
        assert!((lm.einstein_constant() - 6.0).abs() < 1e-9);
        assert!(lm.is_stationary());
        assert!(lm.slice_is(&m.metric));
    }

    #[test]
    fn block_determinant_identity() {
        let m = sphere();
        let kid = obata_kid(&m, 2, 1.0).unwrap();
        let lm = develop(&m, &kid).unwrap();
        for p in m.chart().sample(10, 5) {
            let f = kid.f.eval(&p).unwrap();
            let dg = {
                let v = m.metric.value_at(&p).unwrap();
                nalgebra::DMatrix::from_fn(3, 3, |i, j| v.get(&[i, j])).determinant()
            };
            let expect = -f * f * dg;
            assert!((lm.det_at(&p).unwrap() - expect).abs() <= 1e-10 * expect.abs());
        }
    }

    #[test]
    fn zero_lapse_is_degenerate() {
        let m = sphere();
        let kid = KidData::new(Expr::zero(), m.oneform("killing_1_2").unwrap().clone(), Expr::one());
        assert!(matches!(develop(&m, &kid), Err(Error::Degenerate(_))));
    }
}
