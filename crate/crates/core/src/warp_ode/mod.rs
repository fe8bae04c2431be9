//! Warp factors `h(t)` of `dt² + h(t)² g₀` with constant scalar curvature, and the
//! `t`-dependent kernel of `U*` on warped products.

mod kernel;
mod solve;

pub use kernel::{kernel_dim_t, validate_reduction, KernelResult};
pub use solve::{series, solve_h, HProfile, HSample, HSolution, WarpProblem};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// `Scal = scal0/h² - 2(n-1) h''/h - (n-1)(n-2) h'²/h²` for `dt² + h² g₀` with `Scal(g₀) = scal0`.
pub fn warped_scal_formula(h: f64, dh: f64, ddh: f64, n: usize, scal0: f64) -> Result<f64> {
    if !(h > 0.0) {
        return Err(Error::Param(format!("warp factor must be positive, got {h}")));
    }
    let m = (n - 1) as f64;
    Ok(scal0 / (h * h) - 2.0 * m * ddh / h - m * (m - 1.0) * dh * dh / (h * h))
}

/// `E = h^{n-2} h'² + S hⁿ/(n(n-1)) - scal0 h^{n-2}/((n-1)(n-2))`, conserved by the warp equation.
pub fn first_integral(n: usize, scal_target: f64, scal0: f64, h: f64, dh: f64) -> Result<f64> {
    if n < 3 {
        return Err(Error::Param(format!("first integral needs n ≥ 3, got {n}")));
    }
    if !(h > 0.0) {
        return Err(Error::Param(format!("warp factor must be positive, got {h}")));
    }
    let nf = n as f64;
    let hn2 = h.powi(n as i32 - 2);
    Ok(hn2 * dh * dh + scal_target * hn2 * h * h / (nf * (nf - 1.0))
        - scal0 * hn2 / ((nf - 1.0) * (nf - 2.0)))
}

/// Constants of the autonomous equation `b h h'' = scal0 - a h'² - S h²`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WarpParams {
    pub n: usize,
    pub scal_target: f64,
    pub scal0: f64,
}

impl WarpParams {
    pub fn new(n: usize, scal_target: f64, scal0: f64) -> Result<WarpParams> {
        if n < 3 {
            return Err(Error::Param(format!("warp equation needs n ≥ 3, got {n}")));
        }
        if !(scal_target > 0.0) || !scal0.is_finite() {
            return Err(Error::Param(format!(
                "need a positive target scalar curvature, got {scal_target}"
            )));
        }
        Ok(WarpParams {
            n,
            scal_target,
            scal0,
        })
    }

    /// `(n-1)(n-2)`.
    pub fn a(&self) -> f64 {
        ((self.n - 1) * (self.n - 2)) as f64
    }

    /// `2(n-1)`.
    pub fn b(&self) -> f64 {
        2.0 * (self.n - 1) as f64
    }

    /// `h''` from the constant-Scal condition.
    pub fn rhs(&self, h: f64, dh: f64) -> f64 {
        (self.scal0 - self.a() * dh * dh - self.scal_target * h * h) / (self.b() * h)
    }

    /// `h* = sqrt(scal0 / S)`.
    pub fn fixed_point(&self) -> Result<f64> {
        if !(self.scal0 > 0.0) {
            return Err(Error::Param("no positive fixed point unless scal0 > 0".into()));
        }
        Ok((self.scal0 / self.scal_target).sqrt())
    }

    /// `2π/√λ` with `λ = S/(n-1)`, the small-oscillation period around `h*`.
    pub fn linearization_period(&self) -> Result<f64> {
        let lambda = self.scal_target / (self.n - 1) as f64;
        Ok(2.0 * std::f64::consts::PI / lambda.sqrt())
    }
}
