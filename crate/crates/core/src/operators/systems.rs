use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::ops::{kernel_display_jet, lstar_jet, ustar_jet};
use super::report::{Accumulator, ResidualReport, Sampling};
use crate::error::{Error, Result};
use crate::geometry::{LocalGeometry, MetricField, OneFormField, ScalarField, SymTensorField, TJet};
use crate::jets::Expr;

/// Candidate Killing initial data `(f, α)` on an umbilical slice `k = c g`.
#[derive(Debug, Clone)]
pub struct KidData {
    pub f: ScalarField,
    pub alpha: OneFormField,
    pub c: ScalarField,
}

impl KidData {
    pub fn new(f: Expr, alpha: OneFormField, c: Expr) -> KidData {
        KidData {
            f: ScalarField::new(f),
            alpha,
            c: ScalarField::new(c),
        }
    }

    pub fn check_dim(&self, n: usize) -> Result<()> {
        self.f.check_dim(n)?;
        self.alpha.check_dim(n)?;
        self.c.check_dim(n)
    }

    /// `f → f + s·bump`.
    pub fn perturbed(&self, bump: &Expr, s: f64) -> KidData {
        KidData {
            f: ScalarField::new(self.f.expr().clone() + bump.scale(s)),
            alpha: self.alpha.clone(),
            c: self.c.clone(),
        }
    }

    pub fn second_fundamental_form(&self, g: &MetricField) -> SymTensorField {
        SymTensorField::umbilic(g, self.c.expr())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SystemId {
    Sigma,
    Sigma1,
    Sigma2,
    Sigma3,
    Sigma4,
}

impl SystemId {
    pub const ALL: [SystemId; 5] = [
        SystemId::Sigma,
        SystemId::Sigma1,
        SystemId::Sigma2,
        SystemId::Sigma3,
        SystemId::Sigma4,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SystemId::Sigma => "sigma",
            SystemId::Sigma1 => "sigma1",
            SystemId::Sigma2 => "sigma2",
            SystemId::Sigma3 => "sigma3",
            SystemId::Sigma4 => "sigma4",
        }
    }
}

impl fmt::Display for SystemId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SystemId {
    type Err = Error;
    fn from_str(s: &str) -> Result<SystemId> {
        SystemId::ALL
            .into_iter()
            .find(|id| id.name() == s.to_ascii_lowercase())
            .ok_or_else(|| Error::Config(format!("unknown system '{s}'")))
    }
}

fn norms(geo: &LocalGeometry, t: &TJet) -> (f64, f64) {
    let v = t.value();
    (geo.norm(&v), v.max_abs())
}

/// Both equations of a system at one point.
pub fn sigma_pointwise(sys: SystemId, geo: &LocalGeometry, kid: &KidData) -> Result<(TJet, TJet)> {
    let n = geo.dim() as f64;
    let g = geo.metric();
    let f = geo.scalar(&kid.f)?;
    let alpha = geo.oneform(&kid.alpha)?;
    let c = match sys {
        SystemId::Sigma4 => geo.lift(&Expr::one())?,
        _ => geo.scalar(&kid.c)?,
    };
    let cfg = g.times(&(&c * &f));
    let first = match sys {
        SystemId::Sigma => geo.lie_metric(&alpha).add(&cfg.scale(2.0)),
        _ => geo.nabla(&alpha).add(&cfg),
    };
    let u = ustar_jet(geo, &f);
    let second = match sys {
        SystemId::Sigma | SystemId::Sigma1 => u,
        SystemId::Sigma2 => {
            let lap = geo.laplacian(&f);
            let rhs = (lap.scale(n - 1.0) - &(&f * geo.scal())).scale(1.0 / n);
            u.sub(&g.times(&rhs))
        }
        SystemId::Sigma3 => u.sub(&geo.ricci0()),
        SystemId::Sigma4 => u.sub(&geo.ricci0().times(&f)),
    };
    Ok((first, second))
}

fn check_chart(g: &MetricField, kid: &KidData) -> Result<()> {
    kid.check_dim(g.dim())
}

pub fn sigma_residual(
    sys: SystemId,
    model: &str,
    g: &MetricField,
    kid: &KidData,
    sampling: &Sampling,
    tolerance: f64,
) -> Result<ResidualReport> {
    check_chart(g, kid)?;
    let mut acc = Accumulator::new(&["first", "second"]);
    for p in &sampling.points {
        let geo = LocalGeometry::new(g, p, sampling.order)?;
        let (a, b) = sigma_pointwise(sys, &geo, kid)?;
        acc.push(&[norms(&geo, &a), norms(&geo, &b)]);
    }
    let mut r = ResidualReport::new(sys.name(), model, sampling, tolerance, acc.finish());
    if sys == SystemId::Sigma4 {
        r = r.with_note("first equation uses the normalization c = 1");
    }
    Ok(r)
}

/// `L*(f, α)` at `k = c g`: equations `lstar1`, `lstar2`.
pub fn lstar_residual(
    model: &str,
    g: &MetricField,
    kid: &KidData,
    sampling: &Sampling,
    tolerance: f64,
) -> Result<ResidualReport> {
    check_chart(g, kid)?;
    let k = kid.second_fundamental_form(g);
    let mut acc = Accumulator::new(&["lstar1", "lstar2"]);
    for p in &sampling.points {
        let geo = LocalGeometry::new(g, p, sampling.order)?;
        let (l1, l2) = lstar_jet(&geo, &geo.sym2(&k)?, &geo.scalar(&kid.f)?, &geo.oneform(&kid.alpha)?);
        acc.push(&[norms(&geo, &l1), norms(&geo, &l2)]);
    }
    Ok(ResidualReport::new("lstar", model, sampling, tolerance, acc.finish()))
}

/// Displayed kernel system, plus its pointwise disagreement with `L*₁` (`display_vs_lstar1`).
pub fn kernel_display_residual(
    model: &str,
    g: &MetricField,
    kid: &KidData,
    sampling: &Sampling,
    tolerance: f64,
) -> Result<ResidualReport> {
    check_chart(g, kid)?;
    let k = kid.second_fundamental_form(g);
    let mut acc = Accumulator::new(&["display1", "display2", "display_vs_lstar1"]);
    for p in &sampling.points {
        let geo = LocalGeometry::new(g, p, sampling.order)?;
        let kj = geo.sym2(&k)?;
        let f = geo.scalar(&kid.f)?;
        let a = geo.oneform(&kid.alpha)?;
        let (d1, d2) = kernel_display_jet(&geo, &kj, &f, &a);
        let (l1, _) = lstar_jet(&geo, &kj, &f, &a);
        let diff = d1.sub(&l1);
        acc.push(&[norms(&geo, &d1), norms(&geo, &d2), norms(&geo, &diff)]);
    }
    Ok(ResidualReport::new("kernel_display", model, sampling, tolerance, acc.finish()))
}
