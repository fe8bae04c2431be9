use serde::{Deserialize, Serialize};

use crate::geometry::Chart;
use crate::jets::DEFAULT_ORDER;

/// Sample points plus the settings every pointwise evaluation shares.
#[derive(Debug, Clone)]
pub struct Sampling {
    pub points: Vec<Vec<f64>>,
    pub seed: u64,
    pub order: usize,
}

impl Sampling {
    pub fn new(chart: &Chart, count: usize, seed: u64) -> Sampling {
        Sampling {
            points: chart.sample(count, seed),
            seed,
            order: DEFAULT_ORDER,
        }
    }

    pub fn with_order(mut self, order: usize) -> Sampling {
        self.order = order;
        self
    }

    pub fn at(points: Vec<Vec<f64>>) -> Sampling {
        Sampling {
            points,
            seed: 0,
            order: DEFAULT_ORDER,
        }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Residual of one equation across the sample set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EquationResidual {
    pub name: String,
    /// Frame sup-norm at each point.
    #[serde(with = "float_text::vec")]
    pub per_point: Vec<f64>,
    #[serde(with = "float_text")]
    pub sup_norm: f64,
    /// Largest coordinate component over all points.
    #[serde(with = "float_text")]
    pub sup_raw: f64,
}

impl EquationResidual {
    pub fn new(name: &str, per_point: Vec<f64>, raw: Vec<f64>) -> EquationResidual {
        EquationResidual {
            name: name.to_string(),
            sup_norm: sup(&per_point),
            sup_raw: sup(&raw),
            per_point,
        }
    }
}

fn sup(v: &[f64]) -> f64 {
    if v.iter().any(|x| x.is_nan()) {
        return f64::NAN;
    }
    v.iter().fold(0.0, |m: f64, x| m.max(*x))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResidualReport {
    pub name: String,
    pub model: String,
    pub samples: usize,
    pub seed: u64,
    pub tolerance: f64,
    pub equations: Vec<EquationResidual>,
    #[serde(with = "float_text")]
    pub sup_norm: f64,
    pub verdict: bool,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

impl ResidualReport {
    pub fn new(
        name: &str,
        model: &str,
        sampling: &Sampling,
        tolerance: f64,
        equations: Vec<EquationResidual>,
    ) -> ResidualReport {
        let sup_norm = sup(&equations.iter().map(|e| e.sup_norm).collect::<Vec<_>>());
        ResidualReport {
            name: name.to_string(),
            model: model.to_string(),
            samples: sampling.len(),
            seed: sampling.seed,
            tolerance,
            verdict: sup_norm <= tolerance,
            sup_norm,
            equations,
            notes: Vec::new(),
        }
    }

    pub fn with_tolerance(mut self, tolerance: f64) -> ResidualReport {
        self.tolerance = tolerance;
        self.verdict = self.sup_norm <= tolerance;
        self
    }

    pub fn with_note(mut self, note: impl Into<String>) -> ResidualReport {
        self.notes.push(note.into());
        self
    }

    pub fn equation(&self, name: &str) -> Option<&EquationResidual> {
        self.equations.iter().find(|e| e.name == name)
    }
}

/// JSON has no NaN or infinity; those go out as the strings `"NaN"`, `"inf"`, `"-inf"`.
pub mod float_text {
    use serde::{de, Deserialize, Deserializer, Serialize, Serializer};

    #[derive(Serialize, Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Num(f64),
        Text(String),
    }

    fn to_repr(x: f64) -> Repr {
        if x.is_finite() {
            Repr::Num(x)
        } else if x.is_nan() {
            Repr::Text("NaN".into())
        } else if x > 0.0 {
            Repr::Text("inf".into())
        } else {
            Repr::Text("-inf".into())
        }
    }

    fn from_repr<E: de::Error>(r: Repr) -> Result<f64, E> {
        match r {
            Repr::Num(x) => Ok(x),
            Repr::Text(t) => match t.as_str() {
                "NaN" => Ok(f64::NAN),
                "inf" => Ok(f64::INFINITY),
                "-inf" => Ok(f64::NEG_INFINITY),
                other => Err(E::custom(format!("not a number: {other}"))),
            },
        }
    }

    pub fn serialize<S: Serializer>(x: &f64, s: S) -> Result<S::Ok, S::Error> {
        to_repr(*x).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        from_repr(Repr::deserialize(d)?)
    }

    pub mod vec {
        use super::*;

        pub fn serialize<S: Serializer>(v: &[f64], s: S) -> Result<S::Ok, S::Error> {
            v.iter().map(|x| to_repr(*x)).collect::<Vec<_>>().serialize(s)
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<f64>, D::Error> {
            Vec::<Repr>::deserialize(d)?.into_iter().map(from_repr).collect()
        }
    }
}

/// Collects per-point frame and raw norms for a fixed list of equations.
pub(crate) struct Accumulator {
    names: Vec<&'static str>,
    frame: Vec<Vec<f64>>,
    raw: Vec<Vec<f64>>,
}

impl Accumulator {
    pub fn new(names: &[&'static str]) -> Accumulator {
        Accumulator {
            names: names.to_vec(),
            frame: vec![Vec::new(); names.len()],
            raw: vec![Vec::new(); names.len()],
        }
    }

    pub fn push(&mut self, values: &[(f64, f64)]) {
        for (k, (f, r)) in values.iter().enumerate() {
            self.frame[k].push(*f);
            self.raw[k].push(*r);
        }
    }

    pub fn finish(self) -> Vec<EquationResidual> {
        self.names
            .iter()
            .zip(self.frame)
            .zip(self.raw)
            .map(|((n, f), r)| EquationResidual::new(n, f, r))
            .collect()
    }
}
