//! Kernel of `U*` restricted to functions of `t` on `dt² + h(t)² g₀` with `g₀` Einstein.
//!
//! With `m = n - 1`, `Ric₀ = ρ g₀` and `f = f(t)`:
//!
//! * `U*_tt = m (h''/h f - h'/h f')`,
//! * `U*_ab = -(f'' + (m-1) h'/h f' + (ρ/h² - h''/h - (m-1) h'²/h²) f) g_ab`,
//! * `U*_ta = 0`.
//!
//! So the `t`-kernel is the set of `L`-periodic solutions of the second-order equation
//! that also satisfy `h'' f = h' f'`.

use nalgebra::{DMatrix, Vector5};
use ode_solvers::dop_shared::OutputType;
use ode_solvers::{Dop853, System};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{curvature_pack, LocalGeometry, MetricField, Tensor};
use crate::jets::{Expr, DEFAULT_ORDER};
use crate::models::{Model, WarpInfo};
use crate::operators::ustar_jet;

/// Number of dense-output intervals over one period.
const GRID: usize = 64;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelResult {
    pub dim: usize,
    pub period: f64,
    /// Fundamental matrix after one period, row-major.
    pub monodromy: [[f64; 2]; 2],
    pub det: f64,
    pub singular_values: Vec<f64>,
    pub einstein_constant: f64,
    pub times: Vec<f64>,
    /// Values of a kernel basis on `times`.
    pub basis: Vec<Vec<f64>>,
    /// `|cos|` of the angle between a one-dimensional kernel and `h'` on `times`.
    pub correlation_with_dh: Option<f64>,
}

fn warp_of(model: &Model) -> Result<&WarpInfo> {
    model
        .warp
        .as_ref()
        .ok_or_else(|| Error::Model(format!("{} is not a warped product", model.descriptor())))
}

/// Einstein constant `ρ` of the base, checked at its centre and a few sample points.
pub fn base_einstein_constant(base: &MetricField) -> Result<f64> {
    let mut points = vec![base.chart().center()];
    points.extend(base.chart().sample(4, 11));
    let mut rho = None;
    for p in &points {
        let pack = curvature_pack(base, p)?;
        let g = base.value_at(p)?;
        let m = base.dim();
        let r = pack.scal / m as f64;
        let dev = pack.ricci.sub(&g.scale(r)).max_abs();
        let rho0 = *rho.get_or_insert(r);
        if dev > 1e-9 * r.abs().max(1.0) || (r - rho0).abs() > 1e-9 * r.abs().max(1.0) {
            return Err(Error::Model(format!(
                "base is not Einstein (deviation {dev:.3e} at {p:?})"
            )));
        }
    }
    Ok(rho.unwrap_or(0.0))
}

struct Profile {
    h: Expr,
    dh: Expr,
    ddh: Expr,
    tail: Vec<f64>,
}

impl Profile {
    fn new(w: &WarpInfo) -> Profile {
        let dh = w.h.diff(0);
        let ddh = dh.diff(0);
        Profile {
            h: w.h.clone(),
            dh,
            ddh,
            tail: w.base.chart().center(),
        }
    }

    fn at(&self, t: f64) -> Result<(f64, f64, f64)> {
        let mut p = Vec::with_capacity(1 + self.tail.len());
        p.push(t);
        p.extend_from_slice(&self.tail);
        Ok((self.h.eval(&p)?, self.dh.eval(&p)?, self.ddh.eval(&p)?))
    }
}

/// Coefficients `(p, q)` of `f'' = -p f' - q f`.
fn coefficients(m: f64, rho: f64, (h, dh, ddh): (f64, f64, f64)) -> (f64, f64) {
    let p = (m - 1.0) * dh / h;
    let q = rho / (h * h) - ddh / h - (m - 1.0) * dh * dh / (h * h);
    (p, q)
}

/// Random smooth trial function of `t` alone.
fn trial_function(rng: &mut ChaCha8Rng) -> Expr {
    let t = Expr::var(0);
    let mut f = Expr::constant(rng.gen_range(-1.0..1.0));
    for j in 1..=3 {
        let phase = Expr::constant(rng.gen_range(0.0..std::f64::consts::TAU));
        f = f + (t.scale(j as f64) + phase).cos().scale(rng.gen_range(-1.0..1.0));
    }
    f + (t.sin().scale(rng.gen_range(-0.5..0.5))).exp()
}

/// Largest relative gap between the engine's `U*(f)` and the reduced formulas over `trials`
/// random `t`-dependent trial functions, each at its own random chart point.
pub fn validate_reduction(model: &Model, trials: usize, seed: u64) -> Result<f64> {
    let w = warp_of(model)?;
    let rho = base_einstein_constant(&w.base)?;
    let m = (w.n - 1) as f64;
    let prof = Profile::new(w);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for p in model.chart().sample(trials, seed) {
        let f = trial_function(&mut rng);
        let df = f.diff(0);
        let ddf = df.diff(0);
        let geo = LocalGeometry::new(&model.metric, &p, DEFAULT_ORDER)?;
        let u = ustar_jet(&geo, &geo.lift(&f)?).value();
        let g = geo.metric().value();
        let (h, dh, ddh) = prof.at(p[0])?;
        let (fv, dfv, ddfv) = (f.eval(&p)?, df.eval(&p)?, ddf.eval(&p)?);
        let (pc, qc) = coefficients(m, rho, (h, dh, ddh));
        let tt = m * (ddh / h * fv - dh / h * dfv);
        let ab = -(ddfv + pc * dfv + qc * fv);
        let expected = Tensor::from_fn(w.n, 2, |ix| match (ix[0], ix[1]) {
            (0, 0) => tt,
            (0, _) | (_, 0) => 0.0,
            (a, b) => ab * g.get(&[a, b]),
        });
        let gap = u.sub(&expected).max_abs() / u.max_abs().max(1.0);
        worst = worst.max(if gap.is_nan() { f64::INFINITY } else { gap });
    }
    Ok(worst)
}

struct Fundamental<'a> {
    prof: &'a Profile,
    m: f64,
    rho: f64,
}

// Time rides along as a fifth state so the solver only ever sees an autonomous system.
impl System<f64, Vector5<f64>> for Fundamental<'_> {
    fn system(&self, _t: f64, y: &Vector5<f64>, dy: &mut Vector5<f64>) {
        let (p, q) = match self.prof.at(y[4]) {
            Ok(v) => coefficients(self.m, self.rho, v),
            Err(_) => (f64::NAN, f64::NAN),
        };
        dy[0] = y[1];
        dy[1] = -p * y[1] - q * y[0];
        dy[2] = y[3];
        dy[3] = -p * y[3] - q * y[2];
        dy[4] = 1.0;
    }
}

/// Dimension of the `t`-dependent kernel of `U*` on a warped model with constant scalar
/// curvature. `period` defaults to the model's `t`-period.
pub fn kernel_dim_t(model: &Model, period: Option<f64>, tol: f64) -> Result<KernelResult> {
    let w = warp_of(model)?;
    let l = match period.or(w.period) {
        Some(l) if l > 0.0 && l.is_finite() => l,
        _ => return Err(Error::Param("kernel computation needs a positive period".into())),
    };
    if !(tol > 0.0) {
        return Err(Error::Param("tolerance must be positive".into()));
    }
    if w.n < 3 {
        return Err(Error::Param("kernel reduction needs n ≥ 3".into()));
    }
    let rho = base_einstein_constant(&w.base)?;
    let m = (w.n - 1) as f64;
    let prof = Profile::new(w);

    let tail = w.base.chart().center();
    let mut scal = Vec::with_capacity(16);
    for k in 0..16 {
        let mut p = vec![(k as f64 + 0.37) * l / 16.0];
        p.extend_from_slice(&tail);
        scal.push(curvature_pack(&model.metric, &p)?.scal);
    }
    let smax = scal.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let smin = scal.iter().cloned().fold(f64::INFINITY, f64::min);
    if !(smax - smin <= 1e-6 * smax.abs().max(1.0)) {
        return Err(Error::Model(format!(
            "scalar curvature is not constant along t (range {smin:.6e}..{smax:.6e})"
        )));
    }

    let dt = l / GRID as f64;
    let mut times = vec![0.0];
    let mut states = vec![Vector5::new(1.0, 0.0, 0.0, 1.0, 0.0)];
    for k in 0..GRID {
        let (t0, t1) = (k as f64 * dt, (k + 1) as f64 * dt);
        let sys = Fundamental { prof: &prof, m, rho };
        let mut start = states[k];
        start[4] = t0;
        let mut solver = Dop853::from_param(
            sys,
            t0,
            t1,
            dt,
            start,
            1e-13,
            1e-13,
            0.9,
            0.0,
            0.333,
            6.0,
            dt / 8.0,
            0.0,
            100_000,
            1000,
            OutputType::Sparse,
        );
        solver
            .integrate()
            .map_err(|e| Error::Model(format!("kernel integration failed: {e:?}")))?;
        let y = *solver.y_out().last().expect("solver output");
        if y.iter().any(|v| !v.is_finite()) {
            return Err(Error::Model(format!("kernel integration diverged near t = {t1:.4}")));
        }
        times.push(t1);
        states.push(y);
    }
    let end = states[GRID];
    let mono = [[end[0], end[2]], [end[1], end[3]]];
    let det = mono[0][0] * mono[1][1] - mono[0][1] * mono[1][0];

    // rows: M - I, then h'' f - h' f' along the grid
    let mut rows: Vec<[f64; 2]> = vec![
        [mono[0][0] - 1.0, mono[0][1]],
        [mono[1][0], mono[1][1] - 1.0],
    ];
    let mut dh_samples = Vec::with_capacity(GRID);
    for (t, y) in times.iter().zip(&states).take(GRID) {
        let (_, dh, ddh) = prof.at(*t)?;
        rows.push([ddh * y[0] - dh * y[1], ddh * y[2] - dh * y[3]]);
        dh_samples.push(dh);
    }
    let a = DMatrix::from_fn(rows.len(), 2, |i, j| rows[i][j]);
    let svd = a.svd(false, true);
    let mut sv: Vec<(f64, usize)> = svd.singular_values.iter().cloned().zip(0..).collect();
    sv.sort_by(|x, y| y.0.total_cmp(&x.0));
    let smax = sv[0].0;
    let cut = tol * smax.max(1.0);
    let v_t = svd.v_t.expect("requested");
    let null: Vec<usize> = sv.iter().filter(|(s, _)| *s <= cut).map(|(_, i)| *i).collect();

    let grid_times: Vec<f64> = times[..GRID].to_vec();
    let basis: Vec<Vec<f64>> = null
        .iter()
        .map(|&i| {
            let (ca, cb) = (v_t[(i, 0)], v_t[(i, 1)]);
            states[..GRID].iter().map(|y| ca * y[0] + cb * y[2]).collect()
        })
        .collect();
    let correlation_with_dh = if basis.len() == 1 {
        let b = &basis[0];
        let dot: f64 = b.iter().zip(&dh_samples).map(|(x, y)| x * y).sum();
        let nb: f64 = b.iter().map(|x| x * x).sum::<f64>().sqrt();
        let nd: f64 = dh_samples.iter().map(|x| x * x).sum::<f64>().sqrt();
        if nb > 0.0 && nd > 0.0 {
            Some((dot / (nb * nd)).abs())
        } else {
            None
        }
    } else {
        None
    };

    Ok(KernelResult {
        dim: null.len(),
        period: l,
        monodromy: mono,
        det,
        singular_values: sv.iter().map(|s| s.0).collect(),
        einstein_constant: rho,
        times: grid_times,
        basis,
        correlation_with_dh,
    })
}
