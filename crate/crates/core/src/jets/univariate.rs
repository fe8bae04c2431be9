//! Univariate Taylor coefficients `f^(k)(x) / k!` of the elementary functions.

use crate::error::{Error, Result};

fn binomial(r: f64, k: usize) -> f64 {
    let mut acc = 1.0;
    for i in 0..k {
        acc *= (r - i as f64) / (i as f64 + 1.0);
    }
    acc
}

fn factorial(k: usize) -> f64 {
    (1..=k).map(|i| i as f64).product()
}

pub fn recip(x: f64, order: usize) -> Result<Vec<f64>> {
    if x == 0.0 || !x.is_finite() {
        return Err(Error::Domain(format!("division by a value of {x}")));
    }
    let inv = 1.0 / x;
    let mut out = Vec::with_capacity(order + 1);
    let mut c = inv;
    for _ in 0..=order {
        out.push(c);
        c *= -inv;
    }
    Ok(out)
}

pub fn sqrt(x: f64, order: usize) -> Result<Vec<f64>> {
    if x < 0.0 || !x.is_finite() || (x == 0.0 && order > 0) {
        return Err(Error::Domain(format!("sqrt of {x}")));
    }
    powf(x, 0.5, order)
}

pub fn powf(x: f64, r: f64, order: usize) -> Result<Vec<f64>> {
    let integral = r.fract() == 0.0 && r >= 0.0;
    if !x.is_finite() {
        return Err(Error::Domain(format!("pow of non-finite {x}")));
    }
    if x < 0.0 && !integral {
        return Err(Error::Domain(format!("{x}^{r} is not real")));
    }
    if x == 0.0 && !integral && (r < 0.0 || order > 0) {
        return Err(Error::Domain(format!("0^{r} is singular")));
    }
    Ok((0..=order)
        .map(|k| {
            let b = binomial(r, k);
            if b == 0.0 {
                0.0
            } else if integral {
                b * x.powi(r as i32 - k as i32)
            } else {
                b * x.powf(r - k as f64)
            }
        })
        .collect())
}

pub fn sin(x: f64, order: usize) -> Vec<f64> {
    let (s, c) = x.sin_cos();
    let cycle = [s, c, -s, -c];
    (0..=order).map(|k| cycle[k % 4] / factorial(k)).collect()
}

pub fn cos(x: f64, order: usize) -> Vec<f64> {
    let (s, c) = x.sin_cos();
    let cycle = [c, -s, -c, s];
    (0..=order).map(|k| cycle[k % 4] / factorial(k)).collect()
}

pub fn exp(x: f64, order: usize) -> Vec<f64> {
    let e = x.exp();
    (0..=order).map(|k| e / factorial(k)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sine_series_at_zero() {
        let c = sin(0.0, 3);
        assert_eq!(c[0], 0.0);
        assert_eq!(c[1], 1.0);
        assert_eq!(c[2], 0.0);
        assert!((c[3] + 1.0 / 6.0).abs() < 1e-16);
    }

    #[test]
    fn integer_power_of_negative_base() {
        let c = powf(-2.0, 3.0, 4).unwrap();
        // (x)^3 at -2: -8, 3*4=12, 3*(-2)=-6, 1, 0
        assert_eq!(c, vec![-8.0, 12.0, -6.0, 1.0, 0.0]);
    }

    #[test]
    fn domain_errors() {
        assert!(recip(0.0, 1).is_err());
        assert!(sqrt(-1.0, 0).is_err());
        assert!(sqrt(0.0, 1).is_err());
        assert!(sqrt(0.0, 0).is_ok());
        assert!(powf(-1.0, 0.5, 0).is_err());
    }
}
