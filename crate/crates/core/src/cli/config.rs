//! Run configuration: a TOML file, overridden by command-line flags.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::models::{killing_kid, obata_kid, warp_kid, Model, ModelSpec};
use crate::operators::{KidData, SystemId};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    Verify,
    Warp,
    Develop,
    Refine,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Verify => "verify",
            Command::Warp => "warp",
            Command::Develop => "develop",
            Command::Refine => "refine",
        }
    }
}

/// Which residual suites `verify` and `refine` run besides the selected systems.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    Sigma,
    Lstar,
    Display,
    Lemma1,
    Lemma2,
    /// Contracted Bianchi identity only.
    Bianchi,
    /// Bianchi, harmonic curvature and Scal constancy.
    Structure,
    Kernel,
}

impl FromStr for Suite {
    type Err = Error;
    fn from_str(s: &str) -> Result<Suite> {
        Ok(match s.trim().to_ascii_lowercase().as_str() {
            "sigma" => Suite::Sigma,
            "lstar" => Suite::Lstar,
            "display" => Suite::Display,
            "lemma1" => Suite::Lemma1,
            "lemma2" => Suite::Lemma2,
            "bianchi" => Suite::Bianchi,
            "structure" => Suite::Structure,
            "kernel" => Suite::Kernel,
            other => return Err(Error::Config(format!("unknown suite '{other}'"))),
        })
    }
}

/// Killing initial data selector, `kind:key=value,...`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub enum KidSpec {
    /// Ambient coordinate `x_i` on a round sphere.
    Obata { i: usize, c: f64 },
    /// `(h', -c h dt)` on a warped product.
    Warp { c: f64 },
    /// `(0, α)` for a named one-form of the model.
    Killing { name: String, c: f64 },
}

impl KidSpec {
    pub fn build(&self, model: &Model) -> Result<KidData> {
        match self {
            KidSpec::Obata { i, c } => obata_kid(model, *i, *c),
            KidSpec::Warp { c } => warp_kid(model, *c),
            KidSpec::Killing { name, c } => killing_kid(model, name, *c),
        }
    }
}

impl FromStr for KidSpec {
    type Err = Error;
    fn from_str(s: &str) -> Result<KidSpec> {
        let (kind, rest) = s.trim().split_once(':').unwrap_or((s.trim(), ""));
        let mut i = None;
        let mut c = None;
        let mut name = None;
        for part in rest.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let (k, v) = part
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("kid: expected key=value, got '{part}'")))?;
            let bad = || Error::Config(format!("kid: bad value '{v}' for {k}"));
            match k.trim() {
                "i" => i = Some(v.trim().parse().map_err(|_| bad())?),
                "c" => c = Some(v.trim().parse().map_err(|_| bad())?),
                "name" => name = Some(v.trim().to_string()),
                other => return Err(Error::Config(format!("kid: unknown parameter '{other}'"))),
            }
        }
        let c = c.unwrap_or(1.0);
        match kind {
            "obata" => {
                if name.is_some() {
                    return Err(Error::Config("kid obata takes i and c".into()));
                }
                Ok(KidSpec::Obata {
                    i: i.ok_or_else(|| Error::Config("kid obata needs i".into()))?,
                    c,
                })
            }
            "warp" => {
                if i.is_some() || name.is_some() {
                    return Err(Error::Config("kid warp takes only c".into()));
                }
                Ok(KidSpec::Warp { c })
            }
            "killing" => {
                if i.is_some() {
                    return Err(Error::Config("kid killing takes name and c".into()));
                }
                Ok(KidSpec::Killing {
                    name: name.ok_or_else(|| Error::Config("kid killing needs name".into()))?,
                    c,
                })
            }
            other => Err(Error::Config(format!("unknown kid kind '{other}'"))),
        }
    }
}

impl fmt::Display for KidSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            KidSpec::Obata { i, c } => write!(f, "obata:i={i},c={c}"),
            KidSpec::Warp { c } => write!(f, "warp:c={c}"),
            KidSpec::Killing { name, c } => write!(f, "killing:name={name},c={c}"),
        }
    }
}

impl From<KidSpec> for String {
    fn from(k: KidSpec) -> String {
        k.to_string()
    }
}

impl TryFrom<String> for KidSpec {
    type Error = Error;
    fn try_from(s: String) -> Result<KidSpec> {
        s.parse()
    }
}

/// Parameters of the `warp` command's ODE problem.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WarpSection {
    pub n: usize,
    pub scal_target: f64,
    /// Base scalar curvature; defaults to the unit round sphere's `(n-1)(n-2)`.
    pub scal0: Option<f64>,
    /// Defaults to the fixed point `sqrt(scal0/S)`.
    pub h0: Option<f64>,
    pub dh0: f64,
    pub period_hint: Option<f64>,
    pub tol: f64,
}

impl Default for WarpSection {
    fn default() -> WarpSection {
        WarpSection {
            n: 3,
            scal_target: 4.0,
            scal0: None,
            h0: None,
            dh0: 0.2,
            period_hint: None,
            tol: crate::models::ODE_TOL,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RefineSection {
    pub counts: Vec<usize>,
    /// ODE tolerances paired with `counts`, applied when the model is ODE-built.
    pub ode_tols: Vec<f64>,
}

impl Default for RefineSection {
    fn default() -> RefineSection {
        RefineSection {
            counts: vec![20, 40, 80],
            ode_tols: vec![1e-6, 1e-8, 1e-10],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub command: Command,
    pub model: ModelSpec,
    pub kid: Option<KidSpec>,
    /// Amplitude `s` of the perturbation `f → f + s·bump`.
    pub perturb: f64,
    pub systems: Vec<SystemId>,
    pub suites: Vec<Suite>,
    pub samples: usize,
    pub seed: u64,
    pub order: Option<usize>,
    pub tolerance: f64,
    pub output: Option<PathBuf>,
    pub csv: Option<PathBuf>,
    pub warp: WarpSection,
    pub refine: RefineSection,
}

impl Default for RunConfig {
    fn default() -> RunConfig {
        RunConfig {
            command: Command::Verify,
            model: ModelSpec::Sphere {
                n: 3,
                r: 1.0,
                south: false,
            },
            kid: None,
            perturb: 0.0,
            systems: vec![SystemId::Sigma1],
            suites: vec![Suite::Sigma],
            samples: 50,
            seed: 1,
            order: None,
            tolerance: 1e-8,
            output: None,
            csv: None,
            warp: WarpSection::default(),
            refine: RefineSection::default(),
        }
    }
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<RunConfig> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<RunConfig> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        RunConfig::from_toml(&text)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn validate(&self) -> Result<()> {
        if self.samples < 10 {
            return Err(Error::Config(format!("samples must be at least 10, got {}", self.samples)));
        }
        if !(self.tolerance > 0.0) {
            return Err(Error::Config("tolerance must be positive".into()));
        }
        if let Some(o) = self.order {
            if !(2..=crate::jets::MAX_ORDER).contains(&o) {
                return Err(Error::Config(format!(
                    "order must lie in 2..={}, got {o}",
                    crate::jets::MAX_ORDER
                )));
            }
        }
        if !self.perturb.is_finite() {
            return Err(Error::Config("perturbation must be finite".into()));
        }
        if self.command == Command::Refine {
            let r = &self.refine;
            if r.counts.len() < 2 || r.counts.iter().any(|&c| c < 10) {
                return Err(Error::Config("refine needs at least two counts, each ≥ 10".into()));
            }
            if !r.ode_tols.is_empty() && r.ode_tols.len() != r.counts.len() {
                return Err(Error::Config("refine.ode_tols must match refine.counts".into()));
            }
            if r.ode_tols.iter().any(|t| !(*t > 0.0)) {
                return Err(Error::Config("refine.ode_tols must be positive".into()));
            }
        }
        if self.warp.n < 3 || !(self.warp.scal_target > 0.0) || !(self.warp.tol > 0.0) {
            return Err(Error::Config("warp needs n ≥ 3, scal_target > 0, tol > 0".into()));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kid_round_trip() {
        for s in ["obata:i=4,c=1", "warp:c=0.7", "killing:name=killing_1_2,c=2"] {
            let k: KidSpec = s.parse().unwrap();
            assert_eq!(k.to_string(), s);
        }
        assert!("obata:c=1".parse::<KidSpec>().is_err());
        assert!("warp:i=2".parse::<KidSpec>().is_err());
        assert!("nope".parse::<KidSpec>().is_err());
    }

    #[test]
    fn toml_round_trip_and_defaults() {
        let cfg = RunConfig::from_toml(
            r#"
            command = "verify"
            model = "sphere:n=3,r=1"
            kid = "obata:i=4,c=1"
            systems = ["sigma1", "sigma2"]
            suites = ["sigma", "lstar"]
            samples = 20
            [warp]
            dh0 = 0.1
            "#,
        )
        .unwrap();
        assert_eq!(cfg.samples, 20);
        assert_eq!(cfg.seed, 1);
        assert_eq!(cfg.warp.dh0, 0.1);
        assert_eq!(cfg.warp.n, 3);
        let again = RunConfig::from_toml(&cfg.to_toml().unwrap()).unwrap();
        assert_eq!(cfg, again);
    }

    #[test]
    fn rejects_bad_config() {
        assert!(RunConfig::from_toml("sampels = 3").is_err());
        let cfg = RunConfig {
            samples: 5,
            ..RunConfig::default()
        };
        assert!(cfg.validate().is_err());
    }
}
