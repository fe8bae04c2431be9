use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

const PRIMES: [u32; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];

/// Coordinate box with optional periodic axes.
#[derive(Debug, Clone, PartialEq)]
pub struct Chart {
    lower: Vec<f64>,
    upper: Vec<f64>,
    periods: Vec<Option<f64>>,
    margin: f64,
}

impl Chart {
    pub fn new(
        lower: Vec<f64>,
        upper: Vec<f64>,
        periods: Vec<Option<f64>>,
        margin: f64,
    ) -> Result<Chart> {
        let n = lower.len();
        if n == 0 || upper.len() != n || periods.len() != n {
            return Err(Error::Param("chart bounds must share a nonzero dimension".into()));
        }
        if !(margin > 0.0) {
            return Err(Error::Param(format!("chart margin must be positive, got {margin}")));
        }
        if n > PRIMES.len() {
            return Err(Error::Param(format!("charts above dimension {} unsupported", PRIMES.len())));
        }
        for i in 0..n {
            if !(upper[i] - lower[i] > 2.0 * margin) {
                return Err(Error::Param(format!(
                    "axis {i}: [{}, {}] is empty after a margin of {margin}",
                    lower[i], upper[i]
                )));
            }
            if let Some(p) = periods[i] {
                if !(p > 0.0) {
                    return Err(Error::Param(format!("axis {i}: period must be positive")));
                }
            }
        }
        Ok(Chart {
            lower,
            upper,
            periods,
            margin,
        })
    }

    /// Symmetric cube `[-half, half]^n`.
    pub fn cube(n: usize, half: f64, margin: f64) -> Result<Chart> {
        Chart::new(vec![-half; n], vec![half; n], vec![None; n], margin)
    }

    /// `[0, L_i)` on every axis, each periodic.
    pub fn torus(periods: &[f64], margin: f64) -> Result<Chart> {
        Chart::new(
            vec![0.0; periods.len()],
            periods.to_vec(),
            periods.iter().map(|&p| Some(p)).collect(),
            margin,
        )
    }

    /// Product chart with `self`'s axes first.
    pub fn product(&self, other: &Chart) -> Result<Chart> {
        let cat = |a: &[f64], b: &[f64]| a.iter().chain(b).copied().collect::<Vec<_>>();
        Chart::new(
            cat(&self.lower, &other.lower),
            cat(&self.upper, &other.upper),
            self.periods.iter().chain(&other.periods).copied().collect(),
            self.margin.min(other.margin),
        )
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    pub fn periods(&self) -> &[Option<f64>] {
        &self.periods
    }

    pub fn margin(&self) -> f64 {
        self.margin
    }

    pub fn center(&self) -> Vec<f64> {
        self.lower
            .iter()
            .zip(&self.upper)
            .map(|(a, b)| 0.5 * (a + b))
            .collect()
    }

    pub fn contains(&self, p: &[f64]) -> bool {
        p.len() == self.dim()
            && (0..self.dim()).all(|i| {
                self.periods[i].is_some() || (p[i] >= self.lower[i] && p[i] <= self.upper[i])
            })
    }

    /// `count` low-discrepancy points in the interior box shrunk by the margin.
    ///
    /// Halton sequence with a Cranley–Patterson rotation drawn from `seed`.
    pub fn sample(&self, count: usize, seed: u64) -> Vec<Vec<f64>> {
        let n = self.dim();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let shift: Vec<f64> = (0..n).map(|_| rng.gen::<f64>()).collect();
        (1..=count)
            .map(|k| {
                (0..n)
                    .map(|d| {
                        let u = (radical_inverse(k as u64, PRIMES[d]) + shift[d]).fract();
                        let lo = self.lower[d] + self.margin;
                        let hi = self.upper[d] - self.margin;
                        lo + u * (hi - lo)
                    })
                    .collect()
            })
            .collect()
    }
}

fn radical_inverse(mut k: u64, base: u32) -> f64 {
    let b = base as u64;
    let mut inv = 1.0 / base as f64;
    let mut out = 0.0;
    while k > 0 {
        out += (k % b) as f64 * inv;
        k /= b;
        inv /= base as f64;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn samples_stay_inside_margin() {
        let c = Chart::new(vec![0.0, -1.0], vec![1.0, 1.0], vec![None, Some(2.0)], 0.1).unwrap();
        for p in c.sample(200, 3) {
            assert!(p[0] >= 0.1 && p[0] <= 0.9);
            assert!(p[1] >= -0.9 && p[1] <= 0.9);
        }
    }

    #[test]
    fn sampling_is_deterministic() {
        let c = Chart::cube(3, 1.0, 0.05).unwrap();
        assert_eq!(c.sample(20, 9), c.sample(20, 9));
        assert_ne!(c.sample(20, 9), c.sample(20, 10));
    }

    #[test]
    fn rejects_bad_charts() {
        assert!(Chart::cube(2, 1.0, 0.0).is_err());
        assert!(Chart::cube(2, 0.1, 0.2).is_err());
        assert!(Chart::torus(&[1.0, -1.0], 0.01).is_err());
    }

    #[test]
    fn halton_base_two() {
        assert_eq!(radical_inverse(1, 2), 0.5);
        assert_eq!(radical_inverse(3, 2), 0.75);
    }
}
