//! Identities satisfied by closed conformal Killing forms `∇α = ψ g`, and structure checks.

use serde::{Deserialize, Serialize};

use super::ops::{ustar_jet, wedge11, wedge_ts};
use super::report::{Accumulator, EquationResidual, ResidualReport, Sampling};
use crate::error::Result;
use crate::geometry::{LocalGeometry, MetricField, OneFormField, ScalarField, TJet};
use crate::jets::Jet;

pub const LEMMA1_NAMES: [&str; 7] = ["t1", "t2", "t3", "t4", "t5", "t6", "t7"];

fn norms(geo: &LocalGeometry, t: &TJet) -> (f64, f64) {
    let v = t.value();
    (geo.norm(&v), v.max_abs())
}

/// Residual tensors of the seven identities at one point, left side minus right side.
pub fn lemma1_pointwise(geo: &LocalGeometry, alpha: &TJet, psi: &Jet) -> Result<[TJet; 7]> {
    let n = geo.dim() as f64;
    let g = geo.metric();
    let av = geo.raise(alpha);
    let dpsi = geo.d(psi);
    let ric = geo.ricci();
    let nric = geo.nabla_ricci()?;
    let dric = geo.dnabla_ricci()?;
    let u = ustar_jet(geo, psi);
    let lap = geo.laplacian(psi);
    let psiric = ric.times(psi).scale(n);
    let lapg = g.times(&lap).scale(n - 1.0);

    let t1 = geo.contract_last(&geo.riemann(), &av).sub(&wedge_ts(&dpsi, g));
    let t2 = wedge11(&dpsi, alpha);
    let t3 = geo.contract_last(ric, &av).add(&dpsi.scale(n - 1.0));
    let t4 = geo
        .contract_last(&nric, &av)
        .add(&u.scale(n - 1.0).add(&psiric).sub(&lapg));
    let t5 = geo
        .contract_first(&av, &nric)
        .add(&u.scale(n - 2.0).add(&psiric).sub(&lapg));
    let t6 = geo.contract_first(&av, &dric).sub(&u);
    let t7 = geo.contract_last(&dric, &av);
    Ok([t1, t2, t3, t4, t5, t6, t7])
}

pub fn lemma1_residuals(
    model: &str,
    g: &MetricField,
    alpha: &OneFormField,
    psi: &ScalarField,
    sampling: &Sampling,
    tolerance: f64,
) -> Result<ResidualReport> {
    let mut acc = Accumulator::new(&LEMMA1_NAMES);
    for p in &sampling.points {
        let geo = LocalGeometry::new(g, p, sampling.order)?;
        let res = lemma1_pointwise(&geo, &geo.oneform(alpha)?, &geo.scalar(psi)?)?;
        let v: Vec<(f64, f64)> = res.iter().map(|t| norms(&geo, t)).collect();
        acc.push(&v);
    }
    Ok(ResidualReport::new("lemma1", model, sampling, tolerance, acc.finish()))
}

/// `ψ d^∇U*(ψ) - [dψ ∧ U*(ψ) - ψ² d^∇Ric + (ψ dΔψ - Δψ dψ) ∧ g]`, and the same without the
/// last term, and `Δψ - Scal ψ/(n-1)`.
pub fn lemma2_pointwise(geo: &LocalGeometry, psi: &Jet) -> Result<(TJet, TJet, f64)> {
    let n = geo.dim() as f64;
    let u = ustar_jet(geo, psi);
    let dpsi = geo.d(psi);
    let lap = geo.laplacian(psi);
    let dric = geo.dnabla_ricci()?;
    let lhs = geo.dnabla(&u).times(psi);
    let short = wedge_ts(&dpsi, &u).sub(&dric.times(&(psi * psi)));
    let mixed = geo.d(&lap).times(psi).sub(&dpsi.times(&lap));
    let full = short.add(&wedge_ts(&mixed, geo.metric()));
    let eigen = lap.value() - geo.scal().value() * psi.value() / (n - 1.0);
    Ok((lhs.sub(&full), lhs.sub(&short), eigen))
}

/// Equations `full`, `constant_scal`, `eigen`.
pub fn lemma2_residuals(
    model: &str,
    g: &MetricField,
    psi: &ScalarField,
    sampling: &Sampling,
    tolerance: f64,
) -> Result<ResidualReport> {
    let mut acc = Accumulator::new(&["full", "constant_scal", "eigen"]);
    for p in &sampling.points {
        let geo = LocalGeometry::new(g, p, sampling.order)?;
        let (full, short, eigen) = lemma2_pointwise(&geo, &geo.scalar(psi)?)?;
        acc.push(&[norms(&geo, &full), norms(&geo, &short), (eigen.abs(), eigen.abs())]);
    }
    Ok(ResidualReport::new("lemma2", model, sampling, tolerance, acc.finish()))
}

/// Scalar curvature statistics over a sample set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalStats {
    pub mean: f64,
    pub min: f64,
    pub max: f64,
    /// `max |Scal - mean|`.
    pub variation: f64,
    pub positive: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StructureReport {
    pub bianchi: ResidualReport,
    pub harmonic: ResidualReport,
    pub scal: ScalStats,
}

/// Contracted Bianchi `δRic + ½ dScal`, harmonic curvature `d^∇Ric`, and Scal statistics.
pub fn structure_checks(
    model: &str,
    g: &MetricField,
    sampling: &Sampling,
    tolerance: f64,
) -> Result<StructureReport> {
    let mut bianchi = Accumulator::new(&["bianchi"]);
    let mut harmonic = Accumulator::new(&["dnabla_ric"]);
    let mut scal = Vec::with_capacity(sampling.len());
    for p in &sampling.points {
        let geo = LocalGeometry::new(g, p, sampling.order)?;
        let b = geo.divergence(geo.ricci()).add(&geo.dscal().scale(0.5));
        bianchi.push(&[norms(&geo, &b)]);
        harmonic.push(&[norms(&geo, &geo.dnabla_ricci()?)]);
        scal.push(geo.scal().value());
    }
    let mean = scal.iter().sum::<f64>() / scal.len().max(1) as f64;
    let min = scal.iter().copied().fold(f64::INFINITY, f64::min);
    let max = scal.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let variation = scal.iter().fold(0.0f64, |m, s| m.max((s - mean).abs()));
    Ok(StructureReport {
        bianchi: ResidualReport::new("bianchi", model, sampling, tolerance, bianchi.finish()),
        harmonic: ResidualReport::new("harmonic_curvature", model, sampling, tolerance, harmonic.finish()),
        scal: ScalStats {
            mean,
            min,
            max,
            variation,
            positive: min > 0.0,
        },
    })
}

impl StructureReport {
    /// Scal deviation from `target` as a residual report.
    pub fn scal_report(&self, model: &str, sampling: &Sampling, target: f64, tolerance: f64) -> ResidualReport {
        let dev = (self.scal.max - target).abs().max((self.scal.min - target).abs());
        ResidualReport::new(
            "scal_variation",
            model,
            sampling,
            tolerance,
            vec![EquationResidual::new("scal_minus_target", vec![dev], vec![dev])],
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::jets::Expr;
    use crate::models::{Model, ModelSpec};

    fn model(desc: &str) -> Model {
        desc.parse::<ModelSpec>().unwrap().build().unwrap()
    }

    #[test]
    fn obata_data_satisfies_all_seven() {
        for n in [2, 3, 4] {
            let m = model(&format!("sphere:n={n},r=1"));
            let x = format!("x{}", n + 1);
            let alpha = m.oneform(&format!("d{x}")).unwrap();
            let psi = ScalarField::new(-m.scalar(&x).unwrap().expr().clone());
            let s = Sampling::new(m.chart(), 20, 1);
            let r = lemma1_residuals("s", &m.metric, alpha, &psi, &s, 1e-10).unwrap();
            assert!(r.verdict, "n={n}: {:?}", r.equations.iter().map(|e| e.sup_norm).collect::<Vec<_>>());
        }
    }

    #[test]
    fn killing_form_is_a_negative_control() {
        let m = model("sphere:n=3,r=1");
        let s = Sampling::new(m.chart(), 20, 2);
        let alpha = m.oneform("killing_1_2").unwrap();
        let r = lemma1_residuals("s", &m.metric, alpha, &ScalarField::constant(0.5), &s, 1e-9).unwrap();
        assert!(r.equation("t1").unwrap().sup_norm > 1e-3);
    }

    #[test]
    fn zero_psi_with_killing_form() {
        let m = model("sphere:n=3,r=1");
        let s = Sampling::new(m.chart(), 10, 3);
        let r = lemma2_residuals("s", &m.metric, &ScalarField::constant(0.0), &s, 1e-12).unwrap();
        assert_eq!(r.sup_norm, 0.0);
    }

    #[test]
    fn sphere_structure() {
        let m = model("sphere:n=4,r=1");
        let s = Sampling::new(m.chart(), 20, 4);
        let st = structure_checks("s", &m.metric, &s, 1e-10).unwrap();
        assert!(st.bianchi.verdict && st.harmonic.verdict);
        assert!(st.scal.variation < 1e-10 && (st.scal.mean - 12.0).abs() < 1e-10 && st.scal.positive);
        assert!(st.scal_report("s", &s, 12.0, 1e-10).verdict);
    }

    #[test]
    fn random_metric_is_not_harmonic() {
        let g = crate::models::random_analytic_metric(3, &[2.0, 2.5, 3.0], 0.1, 7).unwrap();
        let s = Sampling::new(g.chart(), 20, 5);
        let st = structure_checks("r", &g, &s, 1e-8).unwrap();
        assert!(st.bianchi.verdict);
        assert!(st.harmonic.sup_norm > 1e-4);
    }

    #[test]
    fn lemma2_on_sphere_coordinates() {
        let m = model("sphere:n=3,r=1");
        let s = Sampling::new(m.chart(), 10, 6);
        let psi = ScalarField::new(Expr::zero() - m.scalar("x2").unwrap().expr().clone());
        let r = lemma2_residuals("s", &m.metric, &psi, &s, 1e-9).unwrap();
        assert!(r.verdict, "{:e}", r.sup_norm);
    }
}
