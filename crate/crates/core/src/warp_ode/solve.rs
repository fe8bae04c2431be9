//! Taylor-series integration of the constant-scalar-curvature warp equation.

use std::io::Write;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::{first_integral, WarpParams};
use crate::error::{Error, Result};
use crate::jets::UnivariateFn;

/// Series order of each integration step.
const SERIES_ORDER: usize = 24;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WarpProblem {
    pub n: usize,
    pub scal_target: f64,
    pub scal0: f64,
    pub h0: f64,
    pub dh0: f64,
    /// Period reported for the constant solution; otherwise only a scale for the time limit.
    pub l_hint: Option<f64>,
    pub tol: f64,
}

impl WarpProblem {
    /// `n = 3` over the unit 2-sphere (`scal0 = 2`) with target 4, started at the fixed point
    /// with slope `dh0`.
    pub fn standard(dh0: f64) -> WarpProblem {
        let params = WarpParams::new(3, 4.0, 2.0).expect("valid defaults");
        WarpProblem {
            n: 3,
            scal_target: 4.0,
            scal0: 2.0,
            h0: params.fixed_point().expect("positive fixed point"),
            dh0,
            l_hint: None,
            tol: 1e-10,
        }
    }

    pub fn params(&self) -> Result<WarpParams> {
        WarpParams::new(self.n, self.scal_target, self.scal0)
    }

    fn validate(&self) -> Result<WarpParams> {
        let p = self.params()?;
        if !(self.h0 > 0.0) || !self.dh0.is_finite() {
            return Err(Error::Param(format!("need h0 > 0 and finite dh0, got ({}, {})", self.h0, self.dh0)));
        }
        if !(self.tol > 0.0) {
            return Err(Error::Param("tolerance must be positive".into()));
        }
        if let Some(l) = self.l_hint {
            if !(l > 0.0) {
                return Err(Error::Param("period hint must be positive".into()));
            }
        }
        Ok(p)
    }
}

/// Taylor coefficients `h_k` at a state `(h, h')` from the recursion of `b h h'' + a h'² + S h² = scal0`.
pub fn series(p: &WarpParams, h: f64, dh: f64, order: usize) -> Vec<f64> {
    let (a, b, s) = (p.a(), p.b(), p.scal_target);
    let mut c = vec![0.0; order.max(1) + 1];
    c[0] = h;
    c[1] = dh;
    for m in 0..order.saturating_sub(1) {
        let mut acc = if m == 0 { p.scal0 } else { 0.0 };
        for j in 1..=m {
            acc -= b * c[j] * ((m - j + 2) * (m - j + 1)) as f64 * c[m - j + 2];
        }
        for j in 0..=m {
            acc -= a * ((j + 1) * (m - j + 1)) as f64 * c[j + 1] * c[m - j + 1];
            acc -= s * c[j] * c[m - j];
        }
        c[m + 2] = acc / (b * h * ((m + 2) * (m + 1)) as f64);
    }
    c.truncate(order + 1);
    c
}

fn poly(c: &[f64], tau: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, x| acc * tau + x)
}

fn dpoly(c: &[f64], tau: f64) -> f64 {
    c.iter()
        .enumerate()
        .skip(1)
        .rev()
        .fold(0.0, |acc, (k, x)| acc * tau + k as f64 * x)
}

#[derive(Debug, Clone)]
struct Segment {
    t0: f64,
    len: f64,
    coeffs: Vec<f64>,
}

/// Dense periodic trajectory of `(h, h')`.
#[derive(Debug)]
pub(crate) struct Trajectory {
    params: WarpParams,
    period: f64,
    segments: Vec<Segment>,
    start: (f64, f64),
}

impl Trajectory {
    fn state(&self, t: f64) -> (f64, f64) {
        if self.segments.is_empty() {
            return self.start;
        }
        let t = t.rem_euclid(self.period);
        let k = self.segments.partition_point(|s| s.t0 <= t).saturating_sub(1);
        let seg = &self.segments[k];
        let tau = t - seg.t0;
        (poly(&seg.coeffs, tau), dpoly(&seg.coeffs, tau))
    }

    fn taylor(&self, t: f64, order: usize) -> Vec<f64> {
        let (h, dh) = self.state(t);
        series(&self.params, h, dh, order)
    }
}

/// `h^(d)` along a solved trajectory, as a univariate function of `t`.
#[derive(Debug, Clone)]
pub struct HProfile {
    traj: Arc<Trajectory>,
    deriv: usize,
}

impl UnivariateFn for HProfile {
    fn name(&self) -> String {
        format!("h{}", "'".repeat(self.deriv))
    }

    fn taylor(&self, x: f64, order: usize) -> Result<Vec<f64>> {
        let d = self.deriv;
        let base = self.traj.taylor(x, order + d);
        // coefficient k of h^(d) is h_{k+d} (k+d)!/k!
        Ok((0..=order)
            .map(|k| base[k + d] * ((k + 1)..=(k + d)).map(|i| i as f64).product::<f64>())
            .collect())
    }

    fn derivative(&self) -> Arc<dyn UnivariateFn> {
        Arc::new(HProfile {
            traj: self.traj.clone(),
            deriv: self.deriv + 1,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HSample {
    pub t: f64,
    pub h: f64,
    pub dh: f64,
    pub e: f64,
}

/// One period of a warp factor with constant scalar curvature.
#[derive(Debug, Clone)]
pub struct HSolution {
    pub problem: WarpProblem,
    pub period: f64,
    pub constant: bool,
    pub steps: usize,
    /// `|(h, h')(L) - (h, h')(0)|`.
    pub periodicity_gap: f64,
    /// `max |E(t) - E(0)| / max(1, |E(0)|)`.
    pub drift: f64,
    pub h_min: f64,
    pub h_max: f64,
    pub samples: Vec<HSample>,
    traj: Arc<Trajectory>,
}

impl HSolution {
    pub fn state(&self, t: f64) -> (f64, f64) {
        self.traj.state(t)
    }

    pub fn ddh(&self, t: f64) -> f64 {
        let (h, dh) = self.state(t);
        self.traj.params.rhs(h, dh)
    }

    pub fn profile(&self) -> Arc<dyn UnivariateFn> {
        Arc::new(HProfile {
            traj: self.traj.clone(),
            deriv: 0,
        })
    }

    pub fn params(&self) -> &WarpParams {
        &self.traj.params
    }

    pub fn write_csv(&self, mut w: impl Write) -> Result<()> {
        writeln!(w, "t,h,dh,E")?;
        for s in &self.samples {
            writeln!(w, "{:.17e},{:.17e},{:.17e},{:.17e}", s.t, s.h, s.dh, s.e)?;
        }
        Ok(())
    }
}

const SAMPLE_COUNT: usize = 256;

pub fn solve_h(prob: &WarpProblem) -> Result<HSolution> {
    let params = prob.validate()?;
    let (h0, dh0) = (prob.h0, prob.dh0);
    let v = (dh0, params.rhs(h0, dh0));
    let lin = params.linearization_period()?;
    let scale = prob.l_hint.unwrap_or(lin).max(lin);

    let mut segments = Vec::new();
    let constant = v.0.abs() + v.1.abs() <= 1e-14 * (1.0 + h0);
    let period = if constant {
        prob.l_hint.unwrap_or(lin)
    } else {
        let section = |h: f64, dh: f64| (h - h0) * v.0 + (dh - dh0) * v.1;
        let max_step = lin / 16.0;
        let t_max = 200.0 * scale;
        let eps = 1e-16 * h0.max(1.0);
        let (mut t, mut h, mut dh) = (0.0, h0, dh0);
        let mut armed = false;
        loop {
            let c = series(&params, h, dh, SERIES_ORDER);
            let mut tau = max_step;
            for k in [SERIES_ORDER - 1, SERIES_ORDER] {
                if c[k] != 0.0 {
                    tau = tau.min(0.5 * (eps / c[k].abs()).powf(1.0 / k as f64));
                }
            }
            if tau < 1e-12 * scale || segments.len() > 1_000_000 {
                return Err(Error::NoPeriodicOrbit(format!(
                    "step size collapsed near t = {t:.6} (h = {h:e})"
                )));
            }
            let (h1, dh1) = (poly(&c, tau), dpoly(&c, tau));
            if !(h1 > 0.0) || !h1.is_finite() || !dh1.is_finite() || h1 > 1e8 {
                return Err(Error::NoPeriodicOrbit(format!(
                    "trajectory leaves h > 0 near t = {t:.6} (h = {h1:e})"
                )));
            }
            let s1 = section(h1, dh1);
            if armed && s1 >= 0.0 {
                // bisection for the return to the section inside this step
                let (mut lo, mut hi) = (0.0, tau);
                for _ in 0..200 {
                    let mid = 0.5 * (lo + hi);
                    if section(poly(&c, mid), dpoly(&c, mid)) < 0.0 {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                    if hi - lo <= 1e-16 * (t + hi) {
                        break;
                    }
                }
                let tau_star = 0.5 * (lo + hi);
                segments.push(Segment {
                    t0: t,
                    len: tau_star,
                    coeffs: c,
                });
                t += tau_star;
                break;
            }
            if s1 < 0.0 {
                armed = true;
            }
            segments.push(Segment { t0: t, len: tau, coeffs: c });
            t += tau;
            h = h1;
            dh = dh1;
            if t > t_max {
                return Err(Error::NoPeriodicOrbit(format!(
                    "no return to the initial state before t = {t_max:.3}"
                )));
            }
        }
        t
    };

    let steps = segments.len();
    let (gap, end) = match segments.last() {
        Some(seg) => {
            let end = (poly(&seg.coeffs, seg.len), dpoly(&seg.coeffs, seg.len));
            (((end.0 - h0).powi(2) + (end.1 - dh0).powi(2)).sqrt(), Some(end))
        }
        None => (0.0, None),
    };
    let traj = Arc::new(Trajectory {
        params,
        period,
        segments,
        start: (h0, dh0),
    });

    let e0 = first_integral(prob.n, prob.scal_target, prob.scal0, h0, dh0)?;
    let norm = e0.abs().max(1.0);
    let mut drift: f64 = 0.0;
    let mut check = |h: f64, dh: f64| -> Result<()> {
        let e = first_integral(prob.n, prob.scal_target, prob.scal0, h, dh)?;
        drift = drift.max((e - e0).abs() / norm);
        Ok(())
    };
    for seg in &traj.segments {
        check(poly(&seg.coeffs, 0.0), dpoly(&seg.coeffs, 0.0))?;
    }
    if let Some((h, dh)) = end {
        check(h, dh)?;
    }
    let mut samples = Vec::with_capacity(SAMPLE_COUNT);
    let (mut h_min, mut h_max) = (f64::INFINITY, f64::NEG_INFINITY);
    for k in 0..SAMPLE_COUNT {
        let t = period * k as f64 / SAMPLE_COUNT as f64;
        let (h, dh) = traj.state(t);
        let e = first_integral(prob.n, prob.scal_target, prob.scal0, h, dh)?;
        drift = drift.max((e - e0).abs() / norm);
        h_min = h_min.min(h);
        h_max = h_max.max(h);
        samples.push(HSample { t, h, dh, e });
    }

    if gap > prob.tol {
        return Err(Error::Tolerance(format!(
            "periodicity gap {gap:e} exceeds {:e}",
            prob.tol
        )));
    }
    if drift > prob.tol {
        return Err(Error::Tolerance(format!(
            "first-integral drift {drift:e} exceeds {:e}",
            prob.tol
        )));
    }
    Ok(HSolution {
        problem: prob.clone(),
        period,
        constant,
        steps,
        periodicity_gap: gap,
        drift,
        h_min,
        h_max,
        samples,
        traj,
    })
}
