use proptest::prelude::*;

use kidcheck::cli::{KidSpec, RunConfig};
use kidcheck::geometry::{curvature_pack, Tensor};
use kidcheck::jets::{lift, Expr, Jet};
use kidcheck::models::{random_analytic_metric, ModelSpec};
use kidcheck::operators::{structure_checks, Sampling};

const DIM: usize = 3;

/// Random smooth expressions in `DIM` variables without poles on `[-1, 1]^DIM`.
fn expr() -> impl Strategy<Value = Expr> {
    let leaf = prop_oneof![
        (0..DIM).prop_map(Expr::var),
        (-2.0..2.0f64).prop_map(Expr::constant),
    ];
    leaf.prop_recursive(4, 24, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| a + b),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| a - b),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| a * b),
            inner.clone().prop_map(|a| a.sin()),
            inner.clone().prop_map(|a| a.cos()),
            inner.clone().prop_map(|a| a.scale(0.3).exp()),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| a / (Expr::constant(1.5) + b.clone() * b)),
            inner.prop_map(|a| (Expr::constant(1.0) + a.clone() * a).sqrt()),
        ]
    })
}

fn point() -> impl Strategy<Value = Vec<f64>> {
    proptest::collection::vec(-1.0..1.0f64, DIM)
}

fn close_rel(a: f64, b: f64, rel: f64) -> bool {
    (a - b).abs() <= rel * a.abs().max(b.abs()).max(1.0)
}

fn jets_close(a: &Jet, b: &Jet, rel: f64) -> bool {
    let scale = a.coeffs().iter().chain(b.coeffs()).fold(1.0f64, |m, c| m.max(c.abs()));
    a.coeffs().iter().zip(b.coeffs()).all(|(x, y)| (x - y).abs() <= rel * scale)
}

/// Central difference of the order-0 evaluator.
fn central(e: &Expr, p: &[f64], var: usize, h: f64) -> f64 {
    let mut a = p.to_vec();
    let mut b = p.to_vec();
    a[var] += h;
    b[var] -= h;
    (e.eval(&a).unwrap() - e.eval(&b).unwrap()) / (2.0 * h)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn lift_is_linear(e1 in expr(), e2 in expr(), a in -3.0..3.0f64, p in point()) {
        let lhs = lift(&(e1.scale(a) + e2.clone()), &p, 3).unwrap();
        let rhs = &lift(&e1, &p, 3).unwrap().scale(a) + &lift(&e2, &p, 3).unwrap();
        prop_assert!(jets_close(&lhs, &rhs, 1e-12));
    }

    #[test]
    fn lift_obeys_leibniz(e1 in expr(), e2 in expr(), p in point()) {
        let lhs = lift(&(e1.clone() * e2.clone()), &p, 3).unwrap();
        let rhs = &lift(&e1, &p, 3).unwrap() * &lift(&e2, &p, 3).unwrap();
        prop_assert!(jets_close(&lhs, &rhs, 1e-12));
    }

    #[test]
    fn first_order_matches_central_differences(e in expr(), p in point()) {
        let j = lift(&e, &p, 1).unwrap();
        prop_assert!(close_rel(j.value(), e.eval(&p).unwrap(), 1e-14));
        for v in 0..DIM {
            let fd = central(&e, &p, v, 1e-4);
            prop_assert!(close_rel(j.first(v), fd, 1e-5), "var {v}: jet {} fd {fd}", j.first(v));
        }
    }

    #[test]
    fn derivative_of_jet_matches_symbolic(e in expr(), p in point(), v in 0..DIM) {
        let a = lift(&e, &p, 3).unwrap().derivative(v).unwrap();
        let b = lift(&e.diff(v), &p, 2).unwrap();
        prop_assert!(jets_close(&a, &b, 1e-10));
    }

    #[test]
    fn random_metrics_obey_curvature_symmetries(seed in 0u64..1000, amp in 0.0..0.25f64, n in 2usize..=4) {
        let periods: Vec<f64> = (0..n).map(|i| 2.0 + 0.4 * i as f64).collect();
        let g = random_analytic_metric(n, &periods, amp, seed).unwrap();
        let p = g.chart().sample(1, seed)[0].clone();
        let pack = curvature_pack(&g, &p).unwrap();
        let r = &pack.riemann;
        let scale = r.max_abs().max(1.0);
        let pair = Tensor::from_fn(n, 4, |i| r.get(&[i[2], i[3], i[0], i[1]]));
        prop_assert!(r.add(&r.transpose(0, 1)).max_abs() <= 1e-12 * scale);
        prop_assert!(r.add(&r.transpose(2, 3)).max_abs() <= 1e-12 * scale);
        prop_assert!(r.sub(&pair).max_abs() <= 1e-9 * scale);
        let s = Sampling::at(vec![p]);
        let st = structure_checks("random", &g, &s, 1e-8).unwrap();
        prop_assert!(st.bianchi.verdict, "bianchi {:e}", st.bianchi.sup_norm);
    }

    #[test]
    fn model_descriptors_round_trip(n in 2usize..6, r in 0.5..3.0f64, south in any::<bool>(), l in 0.5..8.0f64) {
        let specs = [
            format!("sphere:n={n},r={r}{}", if south { ",chart=south" } else { "" }),
            format!("torus:n={n},L={l}"),
            format!("product:n={},L={l}", n + 1),
            format!("warped:n={},h=trig,a=3,b=0.5,L={l},base=torus", n + 1),
        ];
        for s in specs {
            let spec: ModelSpec = s.parse().unwrap();
            prop_assert_eq!(spec.to_string().parse::<ModelSpec>().unwrap(), spec);
        }
    }

    #[test]
    fn configs_round_trip(i in 1usize..6, c in -3.0..3.0f64, samples in 10usize..500, seed in any::<u64>()) {
        let cfg = RunConfig {
            kid: Some(KidSpec::Obata { i, c }),
            samples,
            seed,
            ..RunConfig::default()
        };
        let back = RunConfig::from_toml(&cfg.to_toml().unwrap()).unwrap();
        prop_assert_eq!(back, cfg);
    }
}

fn fd_taylor(f: impl Fn(f64) -> f64, x: f64, h: f64) -> [f64; 4] {
    let d1 = (f(x + h) - f(x - h)) / (2.0 * h);
    let d2 = (f(x + h) - 2.0 * f(x) + f(x - h)) / (h * h);
    // wider stencil keeps the third difference above rounding noise
    let h3 = 1e-2;
    let d3 = (f(x + 2.0 * h3) - 2.0 * f(x + h3) + 2.0 * f(x - h3) - f(x - 2.0 * h3)) / (2.0 * h3 * h3 * h3);
    [f(x), d1, d2 / 2.0, d3 / 6.0]
}

#[test]
fn rational_function_matches_finite_differences() {
    let x = Expr::var(0);
    let e = Expr::one() / (Expr::one() + x.clone() * x);
    let j = lift(&e, &[0.3], 3).unwrap();
    let oracle = fd_taylor(|t| 1.0 / (1.0 + t * t), 0.3, 1e-4);
    for (k, want) in oracle.iter().enumerate() {
        let got = j.coeffs()[k];
        let tol = if k == 3 { 1e-3 } else { 1e-5 };
        assert!(close_rel(got, *want, tol), "coefficient {k}: {got} vs {want}");
    }
}

#[test]
fn exp_of_sine_matches_finite_differences() {
    let e = Expr::var(0).sin().exp();
    let j = lift(&e, &[0.7], 3).unwrap();
    let oracle = fd_taylor(|t| t.sin().exp(), 0.7, 1e-4);
    for (k, want) in oracle.iter().enumerate() {
        let got = j.coeffs()[k];
        let tol = if k == 3 { 1e-3 } else { 1e-5 };
        assert!(close_rel(got, *want, tol), "coefficient {k}: {got} vs {want}");
    }
}
