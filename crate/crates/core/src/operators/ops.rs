//! Pointwise operator formulas on tensor jets.

use crate::geometry::{wedge_ts_jet, LocalGeometry, TJet};
use crate::jets::Jet;

/// `U*(f) = Hess f - f Ric + (Δf) g`.
pub fn ustar_jet(geo: &LocalGeometry, f: &Jet) -> TJet {
    let lap = geo.laplacian(f);
    geo.hessian(f)
        .sub(&geo.ricci().times(f))
        .add(&geo.metric().times(&lap))
}

/// Traceless version `Hess f - f Ric₀ + (Δf/n) g`.
pub fn ustar0_jet(geo: &LocalGeometry, f: &Jet) -> TJet {
    let n = geo.dim() as f64;
    let lap = geo.laplacian(f);
    geo.hessian(f)
        .sub(&geo.ricci0().times(f))
        .add(&geo.metric().times(&lap.scale(1.0 / n)))
}

/// Hamiltonian and momentum constraints `Φ₁ = Scal + (tr k)² - |k|²`, `Φ₂ = -2(δk + d tr k)`.
pub fn constraint_jet(geo: &LocalGeometry, k: &TJet) -> (Jet, TJet) {
    let tr = geo.trace(k);
    let phi1 = geo.scal() + &(&tr * &tr) - geo.inner(k, k);
    let phi2 = geo.divergence(k).add(&geo.d(&tr)).scale(-2.0);
    (phi1, phi2)
}

/// `(𝓛_α k)_{ij} = α^m ∇_m k_{ij} + k_{mj} ∇_i α^m + k_{im} ∇_j α^m`.
pub fn lie_sym2(geo: &LocalGeometry, alpha: &TJet, k: &TJet) -> TJet {
    let av = geo.raise(alpha);
    let transport = geo.contract_first(&av, &geo.nabla(k));
    // ∇_i α_p g^{pm} k_{mj} = (∇α ∘ k)_{ij}
    let na = geo.nabla(alpha);
    let left = geo.compose(&na, k);
    transport.add(&left).add(&left.transpose(0, 1))
}

/// `δα = -g^{ij} ∇_i α_j`.
pub fn codifferential(geo: &LocalGeometry, alpha: &TJet) -> Jet {
    -geo.trace(&geo.nabla(alpha))
}

/// Adjoint of the linearized constraint map at `(g, k)`, returns `(L*₁, L*₂)`.
pub fn lstar_jet(geo: &LocalGeometry, k: &TJet, f: &Jet, alpha: &TJet) -> (TJet, TJet) {
    let g = geo.metric();
    let tr = geo.trace(k);
    let core = geo.delta_star(alpha).add(&k.times(f));
    let l2 = core
        .scale(-2.0)
        .add(&g.times(&geo.trace(&core).scale(2.0)));

    let kk = geo.compose(k, k);
    let curv = geo
        .ricci()
        .add(&k.times(&tr.scale(2.0)))
        .sub(&kk.scale(2.0));
    let e = geo
        .hessian(f)
        .sub(&curv.times(f))
        .add(&lie_sym2(geo, alpha, k))
        .add(&k.times(&codifferential(geo, alpha)));
    let (phi1, phi2) = constraint_jet(geo, k);
    let bracket = geo.inner(&l2, k) + geo.inner(alpha, &phi2) + (f * &phi1).scale(2.0);
    let l1 = e
        .sub(&g.times(&geo.trace(&e)))
        .sub(&g.times(&bracket.scale(0.5)));
    (l1, l2)
}

/// The kernel system as displayed alongside the umbilical reduction, with `(tr k) k`
/// carrying coefficient 1; evaluated independently of [`lstar_jet`].
pub fn kernel_display_jet(geo: &LocalGeometry, k: &TJet, f: &Jet, alpha: &TJet) -> (TJet, TJet) {
    let n = geo.dim() as f64;
    let g = geo.metric();
    let tr = geo.trace(k);
    let kk = geo.compose(k, k);
    let curv = geo.ricci().add(&k.times(&tr)).sub(&kk.scale(2.0));
    let (phi1, phi2) = constraint_jet(geo, k);
    let bracket = geo.inner(alpha, &phi2) + (f * &phi1).scale(2.0);
    let first = geo
        .hessian(f)
        .add(&lie_sym2(geo, alpha, k))
        .sub(&curv.times(f))
        .add(&g.times(&bracket.scale(1.0 / (2.0 * (n - 1.0)))));
    let second = geo.lie_metric(alpha).add(&k.times(f).scale(2.0));
    (first, second)
}

/// `ω ∧ η` for one-forms, as an antisymmetric 2-tensor.
pub fn wedge11(a: &TJet, b: &TJet) -> TJet {
    let o = a.outer(b);
    o.sub(&o.transpose(0, 1))
}

pub fn wedge_ts(w: &TJet, s: &TJet) -> TJet {
    wedge_ts_jet(w, s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{SymTensorField, Tensor};
    use crate::jets::Expr;
    use crate::models::{random_analytic_metric, ModelSpec};

    fn geo_at(desc: &str, p: &[f64]) -> (crate::models::Model, LocalGeometry) {
        let m = desc.parse::<ModelSpec>().unwrap().build().unwrap();
        let geo = LocalGeometry::new(&m.metric, p, 3).unwrap();
        (m, geo)
    }

    fn trace_of(geo: &LocalGeometry, t: &Tensor) -> f64 {
        let inv = geo.inverse_metric().value();
        let n = geo.dim();
        (0..n * n).map(|k| inv.get(&[k / n, k % n]) * t.get(&[k / n, k % n])).sum()
    }

    #[test]
    fn ustar_kernels() {
        let (_, geo) = geo_at("torus:n=3,L=2", &[0.3, 0.6, 0.9]);
        assert_eq!(ustar_jet(&geo, &geo.lift(&Expr::one()).unwrap()).value().max_abs(), 0.0);
        for n in [2, 3, 4] {
            let (m, geo) = geo_at(&format!("sphere:n={n},r=1"), &vec![0.15; n]);
            for i in 1..=n + 1 {
                let f = geo.scalar(m.scalar(&format!("x{i}")).unwrap()).unwrap();
                assert!(ustar_jet(&geo, &f).value().max_abs() < 1e-10);
            }
        }
    }

    #[test]
    fn ustar_trace_identity() {
        let (m, geo) = geo_at("sphere:n=3,r=1", &[0.2, -0.1, 0.4]);
        let x4 = m.scalar("x4").unwrap().expr().clone();
        let f = geo.lift(&(x4.clone() * x4)).unwrap();
        let u = ustar_jet(&geo, &f).value();
        assert!(u.max_abs() > 1e-3);
        let expected = 2.0 * geo.laplacian(&f).value() - 6.0 * f.value();
        assert!((trace_of(&geo, &u) - expected).abs() < 1e-10);

        let g = random_analytic_metric(4, &[2.0, 2.5, 3.0, 3.5], 0.25, 21).unwrap();
        let f = Expr::var(0).sin() * Expr::var(3).cos() + Expr::var(1).scale(0.7).exp();
        for p in g.chart().sample(10, 6) {
            let geo = LocalGeometry::new(&g, &p, 3).unwrap();
            let fj = geo.lift(&f).unwrap();
            let u = ustar_jet(&geo, &fj).value();
            let expected = 3.0 * geo.laplacian(&fj).value() - fj.value() * geo.scal().value();
            assert!((trace_of(&geo, &u) - expected).abs() < 1e-10);
            // tr (Hess f - f Ric₀ + (Δf/n) g) = -Δf + Δf = 0
            assert!(trace_of(&geo, &ustar0_jet(&geo, &fj).value()).abs() < 1e-10);
        }
    }

    #[test]
    fn umbilic_constraints() {
        let (m, geo) = geo_at("sphere:n=3,r=1", &[0.1, 0.3, -0.2]);
        let k = geo.sym2(&SymTensorField::umbilic(&m.metric, &Expr::one())).unwrap();
        let (phi1, phi2) = constraint_jet(&geo, &k);
        assert!((phi1.value() - 12.0).abs() < 1e-10);
        assert!(phi2.value().max_abs() < 1e-12);

        let c = Expr::var(0).sin().scale(0.5) + Expr::constant(1.0);
        let k = geo.sym2(&SymTensorField::umbilic(&m.metric, &c)).unwrap();
        let cj = geo.lift(&c).unwrap();
        let (phi1, phi2) = constraint_jet(&geo, &k);
        assert!((phi1.value() - (6.0 + 6.0 * cj.value() * cj.value())).abs() < 1e-10);
        assert!(phi2.sub(&geo.d(&cj).scale(-4.0)).value().max_abs() < 1e-10);

        let zero = geo.sym2(&SymTensorField::from_upper(3, |_, _| Expr::zero())).unwrap();
        let (phi1, phi2) = constraint_jet(&geo, &zero);
        assert!((phi1.value() - 6.0).abs() < 1e-10, "{}", phi1.value());
        assert!(phi2.value().max_abs() == 0.0, "{:?}", phi2.value());
    }

    #[test]
    fn lstar_reductions() {
        let g = random_analytic_metric(3, &[2.0, 2.5, 3.0], 0.2, 5).unwrap();
        let f = Expr::var(1).cos() * Expr::var(2).sin();
        let a = [Expr::var(2).sin(), Expr::var(0).cos().scale(0.3), Expr::constant(0.2)];
        let kexpr = SymTensorField::from_upper(3, |i, j| {
            if i == j {
                Expr::constant(0.4) + Expr::var(i).sin().scale(0.1)
            } else {
                Expr::var(0).cos().scale(0.05)
            }
        });
        for p in g.chart().sample(6, 2) {
            let geo = LocalGeometry::new(&g, &p, 3).unwrap();
            let fj = geo.lift(&f).unwrap();
            let zero_a = TJet::from_fn(3, 1, |_| geo.lift(&Expr::zero()).unwrap());
            let zero_k = TJet::from_fn(3, 2, |_| geo.lift(&Expr::zero()).unwrap());
            let (l1, l2) = lstar_jet(&geo, &zero_k, &fj, &zero_a);
            assert_eq!(l2.value().max_abs(), 0.0);
            assert!(l1.sub(&ustar_jet(&geo, &fj)).value().max_abs() < 1e-10);

            let aj = TJet::from_fn(3, 1, |i| geo.lift(&a[i[0]]).unwrap());
            let kj = geo.sym2(&kexpr).unwrap();
            let (_, l2) = lstar_jet(&geo, &kj, &fj, &aj);
            let core = geo.delta_star(&aj).add(&kj.times(&fj));
            let lhs = trace_of(&geo, &l2.value());
            assert!((lhs - 4.0 * geo.trace(&core).value()).abs() < 1e-10);
            let l2v = l2.value();
            assert!(l2v.sub(&l2v.transpose(0, 1)).max_abs() < 1e-12);
        }
    }

    #[test]
    fn wedge11_is_antisymmetric() {
        let (_, geo) = geo_at("sphere:n=3,r=1", &[0.1, 0.2, 0.3]);
        let a = geo.d(&geo.lift(&Expr::var(0)).unwrap());
        let b = geo.d(&geo.lift(&(Expr::var(1) * Expr::var(2))).unwrap());
        let w = wedge11(&a, &b).value();
        assert_eq!(w.add(&w.transpose(0, 1)).max_abs(), 0.0);
        assert!(wedge11(&a, &a).value().max_abs() == 0.0);
    }
}
