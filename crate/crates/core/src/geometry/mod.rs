//! Pointwise Riemannian and Lorentzian tensor calculus on chart metrics.
//!
//! Conventions: `R(X,Y)Z = ∇_X∇_Y Z - ∇_Y∇_X Z - ∇_{[X,Y]}Z`, `Ric_{jk} = R^i_{ijk}`,
//! `R(X,Y,Z,W) = g(R(X,Y)W, Z)`, `Δ = -tr Hess`, `δS = -tr_{12} ∇S`.

mod chart;
mod fields;
mod local;
mod tensor;

pub use chart::Chart;
pub use fields::{MetricField, OneFormField, ScalarField, Signature, SymTensorField};
pub use local::{wedge_ts_jet, LocalGeometry};
pub use tensor::{Frame, TJet, Tensor};

use crate::error::Result;
use crate::jets::DEFAULT_ORDER;

/// Curvature data of a metric at one point.
#[derive(Debug, Clone)]
pub struct CurvaturePack {
    pub point: Vec<f64>,
    /// `Γ^k_{ij}` as `[k][i][j]`.
    pub christoffel: Tensor,
    pub riemann: Tensor,
    pub ricci: Tensor,
    pub ricci0: Tensor,
    pub scal: f64,
    pub dscal: Tensor,
    pub dnabla_ric: Tensor,
}

pub fn curvature_pack(g: &MetricField, p: &[f64]) -> Result<CurvaturePack> {
    let geo = LocalGeometry::new(g, p, DEFAULT_ORDER)?;
    Ok(CurvaturePack {
        point: p.to_vec(),
        christoffel: geo.christoffel().value(),
        riemann: geo.riemann().value(),
        ricci: geo.ricci().value(),
        ricci0: geo.ricci0().value(),
        scal: geo.scal().value(),
        dscal: geo.dscal().value(),
        dnabla_ric: geo.dnabla_ricci()?.value(),
    })
}

pub fn hessian(g: &MetricField, f: &ScalarField, p: &[f64]) -> Result<Tensor> {
    let geo = LocalGeometry::new(g, p, DEFAULT_ORDER)?;
    Ok(geo.hessian(&geo.scalar(f)?).value())
}

pub fn laplacian(g: &MetricField, f: &ScalarField, p: &[f64]) -> Result<f64> {
    let geo = LocalGeometry::new(g, p, DEFAULT_ORDER)?;
    Ok(geo.laplacian(&geo.scalar(f)?).value())
}

pub fn divergence_sym(g: &MetricField, s: &SymTensorField, p: &[f64]) -> Result<Tensor> {
    let geo = LocalGeometry::new(g, p, DEFAULT_ORDER)?;
    Ok(geo.divergence(&geo.sym2(s)?).value())
}

pub fn nabla_oneform(g: &MetricField, a: &OneFormField, p: &[f64]) -> Result<Tensor> {
    let geo = LocalGeometry::new(g, p, DEFAULT_ORDER)?;
    Ok(geo.nabla(&geo.oneform(a)?).value())
}

pub fn delta_star(g: &MetricField, a: &OneFormField, p: &[f64]) -> Result<Tensor> {
    let geo = LocalGeometry::new(g, p, DEFAULT_ORDER)?;
    Ok(geo.delta_star(&geo.oneform(a)?).value())
}

pub fn lie_metric(g: &MetricField, a: &OneFormField, p: &[f64]) -> Result<Tensor> {
    let geo = LocalGeometry::new(g, p, DEFAULT_ORDER)?;
    Ok(geo.lie_metric(&geo.oneform(a)?).value())
}

pub fn dnabla(g: &MetricField, s: &SymTensorField, p: &[f64]) -> Result<Tensor> {
    let geo = LocalGeometry::new(g, p, DEFAULT_ORDER)?;
    Ok(geo.dnabla(&geo.sym2(s)?).value())
}

/// `(ω ∧ S)(X,Y,Z) = ω(X)S(Y,Z) - ω(Y)S(X,Z)`.
pub fn wedge_ts(w: &Tensor, s: &Tensor) -> Tensor {
    Tensor::from_fn(w.dim(), 3, |i| {
        w.get(&[i[0]]) * s.get(&[i[1], i[2]]) - w.get(&[i[1]]) * s.get(&[i[0], i[2]])
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::jets::Expr;
    use crate::models::ModelSpec;
    use crate::warp_ode::warped_scal_formula;
    use std::f64::consts::PI;

    fn model(desc: &str) -> crate::models::Model {
        desc.parse::<ModelSpec>().unwrap().build().unwrap()
    }

    fn close(a: &Tensor, b: &Tensor, tol: f64) -> bool {
        a.sub(b).max_abs() <= tol
    }

    #[test]
    fn sphere_at_origin() {
        let m = model("sphere:n=3,r=1");
        let p = [0.0; 3];
        let pack = curvature_pack(&m.metric, &p).unwrap();
        let g = m.metric.value_at(&p).unwrap();
        assert!((pack.scal - 6.0).abs() < 1e-12);
        assert!(close(&pack.ricci, &g.scale(2.0), 1e-12));
        assert!(pack.dnabla_ric.max_abs() < 1e-12);
        assert!(pack.ricci0.max_abs() < 1e-12);
    }

    #[test]
    fn flat_torus_is_flat() {
        let m = model("torus:n=3,L=3");
        let pack = curvature_pack(&m.metric, &[0.4, 1.1, 2.5]).unwrap();
        assert_eq!(pack.riemann.max_abs(), 0.0);
        assert_eq!(pack.ricci.max_abs(), 0.0);
        assert_eq!(pack.scal, 0.0);
    }

    #[test]
    fn riemann_symmetries_on_random_metric() {
        let g = crate::models::random_analytic_metric(4, &[2.0, 2.5, 3.0, 3.5], 0.2, 9).unwrap();
        for p in g.chart().sample(20, 3) {
            let pack = curvature_pack(&g, &p).unwrap();
            let r = &pack.riemann;
            assert!(close(r, &r.transpose(0, 1).scale(-1.0), 1e-12));
            assert!(close(r, &r.transpose(2, 3).scale(-1.0), 1e-12));
            let pair = Tensor::from_fn(4, 4, |i| r.get(&[i[2], i[3], i[0], i[1]]));
            assert!(close(r, &pair, 1e-9));
            let bianchi = Tensor::from_fn(4, 4, |i| {
                let (a, b, c, d) = (i[0], i[1], i[2], i[3]);
                r.get(&[a, b, c, d]) + r.get(&[b, c, a, d]) + r.get(&[c, a, b, d])
            });
            assert!(bianchi.max_abs() < 1e-9);
            let gv = g.value_at(&p).unwrap();
            let geo = LocalGeometry::new(&g, &p, 3).unwrap();
            let inv = geo.inverse_metric().value();
            let tr: f64 = (0..4).flat_map(|i| (0..4).map(move |j| (i, j))).map(|(i, j)| inv.get(&[i, j]) * pack.ricci.get(&[i, j])).sum();
            assert!((tr - pack.scal).abs() <= 1e-10 * pack.scal.abs().max(1.0));
            let tr0: f64 = (0..4).flat_map(|i| (0..4).map(move |j| (i, j))).map(|(i, j)| inv.get(&[i, j]) * pack.ricci0.get(&[i, j])).sum();
            assert!(tr0.abs() < 1e-10);
            assert!(gv.max_abs() > 0.0);
        }
    }

    #[test]
    fn scaling_law() {
        let g = crate::models::random_analytic_metric(3, &[2.0, 2.5, 3.0], 0.2, 4).unwrap();
        let p = [0.7, 1.3, 0.2];
        let base = curvature_pack(&g, &p).unwrap();
        for lambda in [0.5f64, 2.0] {
            let s = curvature_pack(&g.scaled(lambda), &p).unwrap();
            let l2 = lambda * lambda;
            assert!(close(&s.riemann, &base.riemann.scale(l2), 1e-9 * base.riemann.max_abs().max(1.0)));
            assert!(close(&s.ricci, &base.ricci, 1e-9 * base.ricci.max_abs().max(1.0)));
            assert!((s.scal - base.scal / l2).abs() <= 1e-9 * base.scal.abs().max(1.0));
        }
    }

    #[test]
    fn north_and_south_charts_agree() {
        let north = model("sphere:n=3,r=1");
        let south = model("sphere:n=3,r=1,chart=south");
        for p in north.chart().sample(50, 2) {
            let q = crate::models::stereographic_transition(&p, 1.0);
            if !south.chart().contains(&q) {
                continue;
            }
            let a = curvature_pack(&north.metric, &p).unwrap().scal;
            let b = curvature_pack(&south.metric, &q).unwrap().scal;
            assert!((a - b).abs() <= 1e-9 * a.abs());
        }
    }

    #[test]
    fn warped_scal_matches_closed_form() {
        let m = model(&format!("warped:n=3,h=trig,a=2,b=0.3,L={},base=sphere", 2.0 * PI));
        let h = m.scalar("h").unwrap();
        let dh = m.scalar("dh").unwrap();
        let ddh = dh.expr().diff(0);
        let p = [0.5, 0.2, -0.3];
        let (hv, dv, ddv) = (h.eval(&p).unwrap(), dh.eval(&p).unwrap(), ddh.eval(&p).unwrap());
        assert!((hv - (2.0 + 0.3 * 0.5f64.sin())).abs() < 1e-14);
        let expected = warped_scal_formula(hv, dv, ddv, 3, 2.0).unwrap();
        let scal = curvature_pack(&m.metric, &p).unwrap().scal;
        assert!((scal - expected).abs() < 1e-9);
    }

    #[test]
    fn obata_hessian_and_laplacian() {
        for n in [2, 3, 4] {
            let m = model(&format!("sphere:n={n},r=1"));
            let f = m.scalar(&format!("x{}", n + 1)).unwrap();
            for p in m.chart().sample(10, 5) {
                let fv = f.eval(&p).unwrap();
                let g = m.metric.value_at(&p).unwrap();
                assert!(close(&hessian(&m.metric, f, &p).unwrap(), &g.scale(-fv), 1e-10));
                assert!((laplacian(&m.metric, f, &p).unwrap() - n as f64 * fv).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn flat_sine_eigenfunction() {
        let l = 3.0;
        let m = model("torus:n=2,L=3");
        let k = 2.0 * PI / l;
        let f = ScalarField::new(Expr::var(0).scale(k).sin());
        let p = [0.8, 1.9];
        let fv = f.eval(&p).unwrap();
        let h = hessian(&m.metric, &f, &p).unwrap();
        assert!((h.get(&[0, 0]) + k * k * fv).abs() < 1e-12);
        assert!(h.get(&[1, 1]).abs() < 1e-12 && h.get(&[0, 1]).abs() < 1e-12);
        assert!((laplacian(&m.metric, &f, &p).unwrap() - k * k * fv).abs() < 1e-12);
        assert_eq!(laplacian(&m.metric, &ScalarField::constant(1.0), &p).unwrap(), 0.0);
    }

    #[test]
    fn divergence_identities() {
        let g = crate::models::random_analytic_metric(3, &[2.0, 2.5, 3.0], 0.2, 8).unwrap();
        let f = ScalarField::new(Expr::var(0).sin() * Expr::var(1).cos() + Expr::var(2).scale(0.3).exp());
        for p in g.chart().sample(8, 1) {
            let geo = LocalGeometry::new(&g, &p, 4).unwrap();
            assert!(geo.divergence(geo.metric()).value().max_abs() < 1e-12);
            let fj = geo.scalar(&f).unwrap();
            let lhs = geo.divergence(&geo.hessian(&fj)).value();
            // δ Hess f = d(Δf) - Ric(∇f)
            let grad = geo.raise(&geo.d(&fj));
            let rhs = geo.d(&geo.laplacian(&fj)).sub(&geo.contract_first(&grad, geo.ricci()));
            assert!(lhs.sub(&rhs.value()).max_abs() < 1e-9, "{:e}", lhs.sub(&rhs.value()).max_abs());
            let b = geo.divergence(geo.ricci()).add(&geo.dscal().scale(0.5)).value();
            assert!(b.max_abs() < 1e-9);
        }
    }

    #[test]
    fn oneform_derivatives() {
        let m = model("torus:n=3,L=2");
        let a = OneFormField::new(vec![Expr::constant(1.5), Expr::zero(), Expr::zero()]);
        assert_eq!(lie_metric(&m.metric, &a, &[0.3, 0.4, 0.5]).unwrap().max_abs(), 0.0);

        let m = model("warped:n=3,h=trig,a=3,b=0.5,L=2,base=random,amp=0.05,seed=3");
        let alpha = m.oneform("h_dt").unwrap();
        let psi = m.scalar("dh").unwrap();
        for p in m.chart().sample(6, 4) {
            let g = m.metric.value_at(&p).unwrap();
            let na = nabla_oneform(&m.metric, alpha, &p).unwrap();
            assert!(close(&na, &g.scale(psi.eval(&p).unwrap()), 1e-10));
            let ds = delta_star(&m.metric, alpha, &p).unwrap();
            assert!(close(&lie_metric(&m.metric, alpha, &p).unwrap(), &ds.scale(2.0), 1e-12));
        }

        let m = model("sphere:n=3,r=1");
        let a = m.oneform("dx4").unwrap();
        let f = m.scalar("x4").unwrap();
        let p = [0.2, 0.1, -0.4];
        let g = m.metric.value_at(&p).unwrap();
        assert!(close(&nabla_oneform(&m.metric, a, &p).unwrap(), &g.scale(-f.eval(&p).unwrap()), 1e-10));
    }

    #[test]
    fn dnabla_and_wedge_antisymmetry() {
        let m = model("sphere:n=3,r=1");
        let geo = LocalGeometry::new(&m.metric, &[0.3, 0.2, 0.1], 3).unwrap();
        assert!(geo.dnabla(geo.metric()).value().max_abs() < 1e-12);
        assert!(geo.dnabla_ricci().unwrap().value().max_abs() < 1e-10);
        let w = geo.d(&geo.lift(&(Expr::var(0) * Expr::var(2))).unwrap());
        let out = wedge_ts_jet(&w, geo.ricci()).value();
        assert_eq!(out.add(&out.transpose(0, 1)).max_abs(), 0.0);
    }
}
