//! Text descriptors of models, `kind:key=value,...`.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub enum ProfileSpec {
    /// `h = a + b sin(2πt/L)`.
    Trig { a: f64, b: f64, period: f64 },
    /// `h = sin t` on a window of `(0, π)`.
    Sine,
    Constant { h: f64, period: f64 },
    /// Constant-Scal warp factor from the warp equation.
    Ode {
        scal_target: f64,
        h0: Option<f64>,
        dh0: f64,
        /// Periodicity and drift tolerance of the solve.
        tol: f64,
    },
}

/// Default tolerance of ODE-built warp factors.
pub const ODE_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub enum BaseSpec {
    /// Unit round sphere, stereographic chart.
    Sphere,
    Torus,
    Random { amp: f64, seed: u64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub enum ModelSpec {
    Sphere { n: usize, r: f64, south: bool },
    Torus { n: usize, period: f64 },
    /// `S¹(L) × S^{n-1}(1)`.
    Product { n: usize, period: f64 },
    Warped {
        n: usize,
        profile: ProfileSpec,
        base: BaseSpec,
    },
    Random {
        n: usize,
        amp: f64,
        seed: u64,
        period: f64,
    },
}

struct Params {
    kind: String,
    map: BTreeMap<String, String>,
}

impl Params {
    fn parse(s: &str) -> Result<Params> {
        let s = s.trim();
        let (kind, rest) = s.split_once(':').unwrap_or((s, ""));
        let mut map = BTreeMap::new();
        for part in rest.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            match part.split_once('=') {
                Some((k, v)) => {
                    map.insert(k.trim().to_string(), v.trim().to_string());
                }
                // bare word: a flag such as `warped:ode`
                None => {
                    map.insert(part.to_string(), String::new());
                }
            }
        }
        Ok(Params {
            kind: kind.trim().to_ascii_lowercase(),
            map,
        })
    }

    fn take<T: FromStr>(&mut self, key: &str, default: T) -> Result<T> {
        match self.map.remove(key) {
            None => Ok(default),
            Some(v) => v
                .parse()
                .map_err(|_| Error::Config(format!("{}: bad value '{v}' for {key}", self.kind))),
        }
    }

    fn take_opt<T: FromStr>(&mut self, key: &str) -> Result<Option<T>> {
        match self.map.remove(key) {
            None => Ok(None),
            Some(v) => v
                .parse()
                .map(Some)
                .map_err(|_| Error::Config(format!("{}: bad value '{v}' for {key}", self.kind))),
        }
    }

    fn flag(&mut self, key: &str) -> bool {
        self.map.remove(key).is_some()
    }

    fn finish(self) -> Result<()> {
        match self.map.keys().next() {
            Some(k) => Err(Error::Config(format!("{}: unknown parameter '{k}'", self.kind))),
            None => Ok(()),
        }
    }
}

/// Default `L` of the resonant product, `2π/√(n-2)`.
pub fn resonant_period(n: usize) -> f64 {
    2.0 * PI / ((n as f64) - 2.0).sqrt()
}

impl FromStr for ModelSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<ModelSpec> {
        let mut p = Params::parse(s)?;
        let spec = match p.kind.as_str() {
            "sphere" => {
                let n = p.take("n", 3)?;
                let r = p.take("r", 1.0)?;
                let chart: String = p.take("chart", "north".to_string())?;
                let south = match chart.as_str() {
                    "north" => false,
                    "south" => true,
                    other => return Err(Error::Config(format!("sphere: unknown chart '{other}'"))),
                };
                ModelSpec::Sphere { n, r, south }
            }
            "torus" => ModelSpec::Torus {
                n: p.take("n", 3)?,
                period: p.take("L", 1.0)?,
            },
            "product" => {
                let n = p.take("n", 3)?;
                let period = match p.take_opt("L")? {
                    Some(l) => l,
                    None if n > 2 => resonant_period(n),
                    None => return Err(Error::Config("product: n must exceed 2".into())),
                };
                ModelSpec::Product { n, period }
            }
            "warped" => {
                let n = p.take("n", 3)?;
                let ode = p.flag("ode");
                let kind: String = p.take("h", if ode { "ode" } else { "trig" }.to_string())?;
                let profile = match kind.as_str() {
                    "trig" => ProfileSpec::Trig {
                        a: p.take("a", 2.0)?,
                        b: p.take("b", 0.3)?,
                        period: p.take("L", 2.0 * PI)?,
                    },
                    "sine" => ProfileSpec::Sine,
                    "const" => ProfileSpec::Constant {
                        h: p.take("a", 1.0)?,
                        period: p.take("L", 2.0 * PI)?,
                    },
                    "ode" => ProfileSpec::Ode {
                        scal_target: p.take("S", 4.0)?,
                        h0: p.take_opt("h0")?,
                        dh0: p.take("dh0", 0.2)?,
                        tol: p.take("tol", ODE_TOL)?,
                    },
                    other => return Err(Error::Config(format!("warped: unknown profile '{other}'"))),
                };
                let base_kind: String = p.take("base", "sphere".to_string())?;
                let base = match base_kind.as_str() {
                    "sphere" => BaseSpec::Sphere,
                    "torus" => BaseSpec::Torus,
                    "random" => BaseSpec::Random {
                        amp: p.take("amp", 0.1)?,
                        seed: p.take("seed", 7)?,
                    },
                    other => return Err(Error::Config(format!("warped: unknown base '{other}'"))),
                };
                ModelSpec::Warped { n, profile, base }
            }
            "random" => ModelSpec::Random {
                n: p.take("n", 3)?,
                amp: p.take("amp", 0.1)?,
                seed: p.take("seed", 7)?,
                period: p.take("L", 2.0 * PI)?,
            },
            other => return Err(Error::Config(format!("unknown model kind '{other}'"))),
        };
        p.finish()?;
        Ok(spec)
    }
}

impl fmt::Display for ModelSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ModelSpec::Sphere { n, r, south } => {
                write!(f, "sphere:n={n},r={r}")?;
                if *south {
                    write!(f, ",chart=south")?;
                }
                Ok(())
            }
            ModelSpec::Torus { n, period } => write!(f, "torus:n={n},L={period}"),
            ModelSpec::Product { n, period } => write!(f, "product:n={n},L={period}"),
            ModelSpec::Warped { n, profile, base } => {
                write!(f, "warped:n={n}")?;
                match profile {
                    ProfileSpec::Trig { a, b, period } => write!(f, ",h=trig,a={a},b={b},L={period}")?,
                    ProfileSpec::Sine => write!(f, ",h=sine")?,
                    ProfileSpec::Constant { h, period } => write!(f, ",h=const,a={h},L={period}")?,
                    ProfileSpec::Ode {
                        scal_target,
                        h0,
                        dh0,
                        tol,
                    } => {
                        write!(f, ",h=ode,S={scal_target},dh0={dh0}")?;
                        if let Some(h0) = h0 {
                            write!(f, ",h0={h0}")?;
                        }
                        if *tol != ODE_TOL {
                            write!(f, ",tol={tol}")?;
                        }
                    }
                }
                match base {
                    BaseSpec::Sphere => write!(f, ",base=sphere"),
                    BaseSpec::Torus => write!(f, ",base=torus"),
                    BaseSpec::Random { amp, seed } => write!(f, ",base=random,amp={amp},seed={seed}"),
                }
            }
            ModelSpec::Random {
                n,
                amp,
                seed,
                period,
            } => write!(f, "random:n={n},amp={amp},seed={seed},L={period}"),
        }
    }
}

impl From<ModelSpec> for String {
    fn from(s: ModelSpec) -> String {
        s.to_string()
    }
}

impl TryFrom<String> for ModelSpec {
    type Error = Error;
    fn try_from(s: String) -> Result<ModelSpec> {
        s.parse()
    }
}
