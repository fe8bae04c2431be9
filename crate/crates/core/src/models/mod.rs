//! Model geometries with their named fields and known Killing initial data.

mod spec;

pub use spec::{resonant_period, BaseSpec, ModelSpec, ProfileSpec, ODE_TOL};

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::geometry::{Chart, LocalGeometry, MetricField, OneFormField, ScalarField, Signature};
use crate::jets::Expr;
use crate::operators::{sigma_pointwise, KidData, Sampling, SystemId};
use crate::warp_ode::{solve_h, HSolution, WarpParams, WarpProblem};

/// Bound of the constructors' own `Σ₁` first-equation check.
pub const SELF_CHECK_BOUND: f64 = 1e-10;

#[derive(Debug, Clone)]
pub struct SphereInfo {
    pub n: usize,
    pub r: f64,
}

#[derive(Debug, Clone)]
pub struct WarpInfo {
    /// Total dimension; the base has dimension `n - 1`.
    pub n: usize,
    /// Warp factor as an expression in `x0 = t`.
    pub h: Expr,
    pub period: Option<f64>,
    pub base: MetricField,
    /// Scalar curvature of the base when it is a known constant.
    pub base_scal: Option<f64>,
    pub solution: Option<Arc<HSolution>>,
}

/// Metric, named scalars, named one-forms and warp data of a warped product.
type WarpParts = (MetricField, BTreeMap<String, ScalarField>, BTreeMap<String, OneFormField>, WarpInfo);

#[derive(Debug, Clone)]
pub struct Model {
    pub spec: ModelSpec,
    pub metric: MetricField,
    pub scalars: BTreeMap<String, ScalarField>,
    pub oneforms: BTreeMap<String, OneFormField>,
    pub sphere: Option<SphereInfo>,
    pub warp: Option<WarpInfo>,
}

impl Model {
    pub fn descriptor(&self) -> String {
        self.spec.to_string()
    }

    pub fn dim(&self) -> usize {
        self.metric.dim()
    }

    pub fn chart(&self) -> &Chart {
        self.metric.chart()
    }

    pub fn scalar(&self, name: &str) -> Result<&ScalarField> {
        self.scalars
            .get(name)
            .ok_or_else(|| Error::Model(format!("{} has no scalar '{name}'", self.descriptor())))
    }

    pub fn oneform(&self, name: &str) -> Result<&OneFormField> {
        self.oneforms
            .get(name)
            .ok_or_else(|| Error::Model(format!("{} has no one-form '{name}'", self.descriptor())))
    }

    /// Smooth bump centred in the chart, used to perturb fixtures.
    pub fn bump(&self) -> Expr {
        bump(self.chart())
    }
}

impl ModelSpec {
    pub fn build(&self) -> Result<Model> {
        let (metric, scalars, oneforms, sphere, warp) = match self {
            ModelSpec::Sphere { n, r, south } => {
                let (g, s, o) = sphere_parts(*n, *r, *south)?;
                (g, s, o, Some(SphereInfo { n: *n, r: *r }), None)
            }
            ModelSpec::Torus { n, period } => {
                let (g, s, o) = torus_parts(*n, *period)?;
                (g, s, o, None, None)
            }
            ModelSpec::Product { n, period } => {
                let (g, s, o, w) = warped_parts(*n, &ProfileSpec::Constant { h: 1.0, period: *period }, &BaseSpec::Sphere)?;
                (g, s, o, None, Some(w))
            }
            ModelSpec::Warped { n, profile, base } => {
                let (g, s, o, w) = warped_parts(*n, profile, base)?;
                (g, s, o, None, Some(w))
            }
            ModelSpec::Random {
                n,
                amp,
                seed,
                period,
            } => {
                let g = random_analytic_metric(*n, &vec![*period; *n], *amp, *seed)?;
                let mut s = BTreeMap::new();
                s.insert("one".to_string(), ScalarField::constant(1.0));
                (g, s, BTreeMap::new(), None, None)
            }
        };
        Ok(Model {
            spec: self.clone(),
            metric,
            scalars,
            oneforms,
            sphere,
            warp,
        })
    }
}

type Parts = (MetricField, BTreeMap<String, ScalarField>, BTreeMap<String, OneFormField>);

fn norm_sq(n: usize) -> Expr {
    (0..n).fold(Expr::zero(), |acc, i| acc + Expr::var(i) * Expr::var(i))
}

fn sphere_parts(n: usize, r: f64, south: bool) -> Result<Parts> {
    if n < 2 || !(r > 0.0) {
        return Err(Error::Param(format!("sphere needs n ≥ 2 and r > 0, got n={n}, r={r}")));
    }
    let chart = Chart::cube(n, 1.2 * r, 0.05 * r)?;
    let q = norm_sq(n);
    let r2 = Expr::constant(r * r);
    let phi = r2.clone() + q.clone();
    let g = MetricField::conformal(chart, Expr::constant(4.0 * r.powi(4)) / (phi.clone() * phi.clone()))?;

    let mut ambient: Vec<Expr> = (0..n)
        .map(|i| Expr::constant(2.0 * r * r) * Expr::var(i) / phi.clone())
        .collect();
    let sign = if south { -r } else { r };
    ambient.push(Expr::constant(sign) * (q - r2) / phi);

    let mut scalars = BTreeMap::new();
    let mut oneforms = BTreeMap::new();
    let diffs: Vec<OneFormField> = ambient.iter().map(|x| OneFormField::differential(x, n)).collect();
    for (a, x) in ambient.iter().enumerate() {
        scalars.insert(format!("x{}", a + 1), ScalarField::new(x.clone()));
        oneforms.insert(format!("dx{}", a + 1), diffs[a].clone());
    }
    for a in 0..=n {
        for b in (a + 1)..=n {
            let comps = (0..n)
                .map(|i| {
                    ambient[a].clone() * diffs[b].comps()[i].clone()
                        - ambient[b].clone() * diffs[a].comps()[i].clone()
                })
                .collect();
            oneforms.insert(format!("killing_{}_{}", a + 1, b + 1), OneFormField::new(comps));
        }
    }
    Ok((g, scalars, oneforms))
}

/// The other stereographic chart's coordinates of a point, `y = r² x / |x|²`.
pub fn stereographic_transition(x: &[f64], r: f64) -> Vec<f64> {
    let q: f64 = x.iter().map(|v| v * v).sum();
    x.iter().map(|v| r * r * v / q).collect()
}

fn torus_parts(n: usize, period: f64) -> Result<Parts> {
    if n < 1 || !(period > 0.0) {
        return Err(Error::Param(format!("torus needs n ≥ 1 and L > 0, got n={n}, L={period}")));
    }
    let chart = Chart::torus(&vec![period; n], 0.01 * period)?;
    let g = MetricField::conformal(chart, Expr::one())?;
    let mut scalars = BTreeMap::new();
    scalars.insert("one".to_string(), ScalarField::constant(1.0));
    let mut oneforms = BTreeMap::new();
    for i in 0..n {
        let comps = (0..n).map(|j| if i == j { Expr::one() } else { Expr::zero() }).collect();
        oneforms.insert(format!("dx{}", i + 1), OneFormField::new(comps));
    }
    Ok((g, scalars, oneforms))
}

fn warped_parts(
    n: usize,
    profile: &ProfileSpec,
    base: &BaseSpec,
) -> Result<WarpParts> {
    if n < 2 {
        return Err(Error::Param(format!("warped product needs n ≥ 2, got {n}")));
    }
    let m = n - 1;
    let (base_metric, base_scal) = match base {
        BaseSpec::Sphere => {
            if m < 2 {
                return Err(Error::Param("a sphere base needs n ≥ 3".into()));
            }
            (sphere_parts(m, 1.0, false)?.0, Some((m * (m - 1)) as f64))
        }
        BaseSpec::Torus => (torus_parts(m, 2.0 * PI)?.0, Some(0.0)),
        BaseSpec::Random { amp, seed } => (
            random_analytic_metric(m, &vec![2.0 * PI; m], *amp, *seed)?,
            None,
        ),
    };
    let t = Expr::var(0);
    let (h, t_chart, solution) = match profile {
        ProfileSpec::Trig { a, b, period } => {
            if !(*a > b.abs()) || !(*period > 0.0) {
                return Err(Error::Param(format!("trig warp needs a > |b| and L > 0 (a={a}, b={b})")));
            }
            let h = Expr::constant(*a) + Expr::constant(*b) * (t.scale(2.0 * PI / period)).sin();
            (h, Chart::torus(&[*period], 0.05)?, None)
        }
        ProfileSpec::Sine => (t.sin(), Chart::new(vec![0.0], vec![PI], vec![None], 0.3)?, None),
        ProfileSpec::Constant { h, period } => {
            if !(*h > 0.0) {
                return Err(Error::Param(format!("warp factor must be positive, got {h}")));
            }
            (Expr::constant(*h), Chart::torus(&[*period], 0.05)?, None)
        }
        ProfileSpec::Ode {
            scal_target,
            h0,
            dh0,
            tol,
        } => {
            let scal0 = base_scal.ok_or_else(|| {
                Error::Param("the warp equation needs a base of constant scalar curvature".into())
            })?;
            let params = WarpParams::new(n, *scal_target, scal0)?;
            let h0 = match h0 {
                Some(v) => *v,
                None => params.fixed_point()?,
            };
            let sol = solve_h(&WarpProblem {
                n,
                scal_target: *scal_target,
                scal0,
                h0,
                dh0: *dh0,
                l_hint: None,
                tol: *tol,
            })?;
            let h = Expr::apply(sol.profile(), t.clone());
            (h, Chart::torus(&[sol.period], 0.05)?, Some(Arc::new(sol)))
        }
    };
    let chart = t_chart.product(base_metric.chart())?;
    let h2 = h.clone() * h.clone();
    let metric = MetricField::from_upper(chart.clone(), Signature::Riemannian, |i, j| {
        match (i, j) {
            (0, 0) => Expr::one(),
            (0, _) => Expr::zero(),
            _ => h2.clone() * base_metric.component(i - 1, j - 1).shift_vars(1),
        }
    })?;
    let dh = h.diff(0);
    let mut scalars = BTreeMap::new();
    scalars.insert("h".to_string(), ScalarField::new(h.clone()));
    scalars.insert("dh".to_string(), ScalarField::new(dh));
    scalars.insert("one".to_string(), ScalarField::constant(1.0));
    let mut oneforms = BTreeMap::new();
    let mut comps = vec![Expr::zero(); n];
    comps[0] = h.clone();
    oneforms.insert("h_dt".to_string(), OneFormField::new(comps));
    let period = chart.periods()[0];
    Ok((
        metric,
        scalars,
        oneforms,
        WarpInfo {
            n,
            h,
            period,
            base: base_metric,
            base_scal,
            solution,
        },
    ))
}

/// `δ + amp·P` on a torus, with `P` a symmetric trigonometric polynomial bounded by `1/n`
/// entrywise, so the metric is diagonally dominant for `amp < 1`.
pub fn random_analytic_metric(n: usize, periods: &[f64], amp: f64, seed: u64) -> Result<MetricField> {
    if !(0.0..0.3).contains(&amp) {
        return Err(Error::Param(format!("amplitude must lie in [0, 0.3), got {amp}")));
    }
    if periods.len() != n {
        return Err(Error::Param("one period per axis".into()));
    }
    let chart = Chart::torus(periods, 0.01 * periods.iter().cloned().fold(f64::INFINITY, f64::min))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    const MODES: usize = 3;
    MetricField::from_upper(chart, Signature::Riemannian, |i, j| {
        let mut terms = Vec::with_capacity(MODES);
        let mut total = 0.0;
        for _ in 0..MODES {
            let c: f64 = rng.gen_range(-1.0..1.0);
            let phase: f64 = rng.gen_range(0.0..2.0 * PI);
            let mut k: Vec<i32> = (0..n).map(|_| rng.gen_range(-2..=2)).collect();
            if k.iter().all(|&v| v == 0) {
                k[rng.gen_range(0..n)] = 1;
            }
            let arg = (0..n).fold(Expr::constant(phase), |acc, d| {
                if k[d] == 0 {
                    acc
                } else {
                    acc + Expr::var(d).scale(2.0 * PI * k[d] as f64 / periods[d])
                }
            });
            total += c.abs();
            terms.push(Expr::constant(c) * arg.cos());
        }
        let p = terms.into_iter().fold(Expr::zero(), |a, b| a + b);
        let scale = amp / (n as f64 * total.max(f64::MIN_POSITIVE));
        let pert = if amp == 0.0 { Expr::zero() } else { p.scale(scale) };
        if i == j {
            Expr::one() + pert
        } else {
            pert
        }
    })
}

/// `exp(-Σ ((x_i - c_i)/w_i)²)` with `w_i` a quarter of the chart width.
pub fn bump(chart: &Chart) -> Expr {
    let c = chart.center();
    let arg = (0..chart.dim()).fold(Expr::zero(), |acc, i| {
        let w = 0.25 * (chart.upper()[i] - chart.lower()[i]);
        let u = (Expr::var(i) - Expr::constant(c[i])).scale(1.0 / w);
        acc + u.clone() * u
    });
    (-arg).exp()
}

fn self_check(name: &str, model: &Model, kid: &KidData) -> Result<()> {
    let sampling = Sampling::new(model.chart(), 8, 1).with_order(2);
    let mut worst: f64 = 0.0;
    for p in &sampling.points {
        let geo = LocalGeometry::new(&model.metric, p, sampling.order)?;
        let (first, _) = sigma_pointwise(SystemId::Sigma1, &geo, kid)?;
        worst = worst.max(geo.norm(&first.value()));
    }
    if !(worst <= SELF_CHECK_BOUND) {
        return Err(Error::SelfCheck {
            name: name.to_string(),
            residual: worst,
            bound: SELF_CHECK_BOUND,
        });
    }
    Ok(())
}

/// `(f, α, c) = (x_i, c r² dx_i, c)` on a round sphere of radius `r`, `i` in `1..=n+1`.
pub fn obata_kid(model: &Model, i: usize, c: f64) -> Result<KidData> {
    let info = model
        .sphere
        .as_ref()
        .ok_or_else(|| Error::Model(format!("{} is not a sphere", model.descriptor())))?;
    if c == 0.0 || !c.is_finite() {
        return Err(Error::Param("c must be nonzero".into()));
    }
    if i == 0 || i > info.n + 1 {
        return Err(Error::Param(format!("ambient index {i} outside 1..={}", info.n + 1)));
    }
    let f = model.scalar(&format!("x{i}"))?.expr().clone();
    let alpha = model.oneform(&format!("dx{i}"))?.scaled(c * info.r * info.r);
    let kid = KidData::new(f, alpha, Expr::constant(c));
    self_check("obata_kid", model, &kid)?;
    Ok(kid)
}

/// `(f, α, c) = (h', -c h dt, c)` on a warped product.
pub fn warp_kid(model: &Model, c: f64) -> Result<KidData> {
    if model.warp.is_none() {
        return Err(Error::Model(format!("{} is not a warped product", model.descriptor())));
    }
    if c == 0.0 || !c.is_finite() {
        return Err(Error::Param("c must be nonzero".into()));
    }
    let f = model.scalar("dh")?.expr().clone();
    let alpha = model.oneform("h_dt")?.scaled(-c);
    let kid = KidData::new(f, alpha, Expr::constant(c));
    self_check("warp_kid", model, &kid)?;
    Ok(kid)
}

/// `(0, α, c)` for a named one-form `α` of the model.
pub fn killing_kid(model: &Model, name: &str, c: f64) -> Result<KidData> {
    let alpha = model.oneform(name)?.clone();
    Ok(KidData::new(Expr::zero(), alpha, Expr::constant(c)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::curvature_pack;

    #[test]
    fn sphere_scalar_curvature() {
        let m = ModelSpec::Sphere { n: 3, r: 2.0, south: false }.build().unwrap();
        let pack = curvature_pack(&m.metric, &[0.3, -0.5, 0.9]).unwrap();
        assert!((pack.scal - 1.5).abs() < 1e-12);
    }

    #[test]
    fn ambient_coordinates_on_sphere() {
        let m = ModelSpec::Sphere { n: 4, r: 1.5, south: false }.build().unwrap();
        for p in m.chart().sample(30, 2) {
            let s: f64 = (1..=5).map(|i| m.scalar(&format!("x{i}")).unwrap().eval(&p).unwrap().powi(2)).sum();
            assert!((s - 2.25).abs() < 1e-12);
        }
    }

    #[test]
    fn chart_transition_preserves_ambient_point() {
        let north = ModelSpec::Sphere { n: 3, r: 1.0, south: false }.build().unwrap();
        let south = ModelSpec::Sphere { n: 3, r: 1.0, south: true }.build().unwrap();
        let x = [0.4, -0.3, 0.8];
        let y = stereographic_transition(&x, 1.0);
        for i in 1..=4 {
            let a = north.scalar(&format!("x{i}")).unwrap().eval(&x).unwrap();
            let b = south.scalar(&format!("x{i}")).unwrap().eval(&y).unwrap();
            assert!((a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn random_metric_is_deterministic_and_flat_at_zero() {
        let a = random_analytic_metric(3, &[1.0; 3], 0.1, 7).unwrap();
        let b = random_analytic_metric(3, &[1.0; 3], 0.1, 7).unwrap();
        let p = [0.2, 0.4, 0.7];
        assert_eq!(a.value_at(&p).unwrap(), b.value_at(&p).unwrap());
        let flat = random_analytic_metric(3, &[1.0; 3], 0.0, 7).unwrap();
        let v = flat.value_at(&p).unwrap();
        assert_eq!(v.data(), &[1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0]);
        assert!(random_analytic_metric(3, &[1.0; 3], 0.3, 7).is_err());
    }

    #[test]
    fn kid_constructors_pass_self_check() {
        let m = ModelSpec::Sphere { n: 3, r: 1.0, south: false }.build().unwrap();
        assert!(obata_kid(&m, 4, 1.0).is_ok());
        assert!(obata_kid(&m, 2, 2.0).is_ok());
        assert!(matches!(obata_kid(&m, 4, 0.0), Err(Error::Param(_))));
        let w: Model = "warped:n=3,h=trig,base=sphere".parse::<ModelSpec>().unwrap().build().unwrap();
        assert!(warp_kid(&w, 0.7).is_ok());
        assert!(obata_kid(&w, 1, 1.0).is_err());
    }

    #[test]
    fn wrong_scaling_trips_self_check() {
        // α = (1/c) dx_i only solves the first equation when c r² = 1/c
        let m = ModelSpec::Sphere { n: 3, r: 1.0, south: false }.build().unwrap();
        let c = 2.0;
        let f = m.scalar("x4").unwrap().expr().clone();
        let kid = KidData::new(f, m.oneform("dx4").unwrap().scaled(1.0 / c), Expr::constant(c));
        assert!(matches!(self_check("probe", &m, &kid), Err(Error::SelfCheck { .. })));
    }
}
