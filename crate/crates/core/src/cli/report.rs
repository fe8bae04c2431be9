//! The JSON report every command emits.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::config::RunConfig;
use crate::error::Error;
use crate::operators::ResidualReport;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorEntry {
    pub kind: String,
    pub message: String,
    /// Which step raised it, e.g. `sigma1` or `kid`.
    pub context: String,
}

impl ErrorEntry {
    pub fn new(context: &str, e: &Error) -> ErrorEntry {
        ErrorEntry {
            kind: e.kind().to_string(),
            message: e.to_string(),
            context: context.to_string(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportFile {
    pub schema_version: u32,
    pub tool_version: String,
    /// Wall-clock time of the run; the only field allowed to differ between reruns.
    pub timestamp: String,
    pub command: String,
    pub config: RunConfig,
    pub conventions: BTreeMap<String, String>,
    pub reports: Vec<ResidualReport>,
    /// Command-specific results (kernel dimensions, warp summary, development constants).
    pub extras: BTreeMap<String, Value>,
    pub errors: Vec<ErrorEntry>,
    pub verdict: bool,
}

/// Sign conventions shared by every evaluator.
pub fn conventions() -> BTreeMap<String, String> {
    [
        (
            "riemann",
            "R(X,Y)Z = ∇_X∇_Y Z - ∇_Y∇_X Z - ∇_[X,Y] Z; R^m_ijk = ∂_i Γ^m_jk - ∂_j Γ^m_ik + Γ^m_ip Γ^p_jk - Γ^m_jp Γ^p_ik",
        ),
        ("riemann_lowered", "R_ijkl = g(R(∂_i,∂_j)∂_l, ∂_k); round sphere R_ijkl = g_ik g_jl - g_jk g_il"),
        ("ricci", "Ric_jk = R^i_ijk; Scal(S^n(1)) = n(n-1)"),
        ("laplacian", "Δ = δd = -tr Hess (nonnegative spectrum)"),
        ("codifferential", "(δS)_{j...} = -g^{ik} ∇_i S_{kj...}"),
        ("ustar", "U*(f) = Hess f - f Ric + (Δf) g"),
        ("dnabla", "(d^∇S)(X,Y,Z) = (∇_X S)(Y,Z) - (∇_Y S)(X,Z)"),
        ("wedge", "(w∧S)(X,Y,Z) = w(X) S(Y,Z) - w(Y) S(X,Z)"),
        ("inner", "⟨S,T⟩ = g^{ik} g^{jl} S_ij T_kl"),
        ("lie", "(L_α k)_ij = α^m ∇_m k_ij + (∇α∘k)_ij + (∇α∘k)_ji, with (∇α∘k)_ij = ∇_i α^m k_mj"),
        ("norm", "sup over an orthonormal frame of |components|; raw coordinate max also reported"),
    ]
    .into_iter()
    .map(|(k, v)| (k.to_string(), v.to_string()))
    .collect()
}

impl ReportFile {
    pub fn new(config: &RunConfig) -> ReportFile {
        ReportFile {
            schema_version: SCHEMA_VERSION,
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            timestamp: chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
            command: config.command.name().to_string(),
            config: config.clone(),
            conventions: conventions(),
            reports: Vec::new(),
            extras: BTreeMap::new(),
            errors: Vec::new(),
            verdict: false,
        }
    }

    pub fn push(&mut self, r: ResidualReport) {
        self.reports.push(r);
    }

    pub fn error(&mut self, context: &str, e: &Error) {
        self.errors.push(ErrorEntry::new(context, e));
    }

    pub fn extra(&mut self, key: &str, v: impl Serialize) {
        let v = serde_json::to_value(v).unwrap_or_else(|e| Value::String(format!("unserializable: {e}")));
        self.extras.insert(key.to_string(), v);
    }

    /// Conjunction of member verdicts; any error or an empty report fails.
    pub fn finish(&mut self) {
        self.verdict = self.errors.is_empty()
            && !self.reports.is_empty()
            && self.reports.iter().all(|r| r.verdict);
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn from_json(text: &str) -> crate::Result<ReportFile> {
        serde_json::from_str(text).map_err(|e| Error::Config(format!("report: {e}")))
    }

    /// JSON with the timestamp blanked, for determinism comparisons.
    pub fn canonical_json(&self) -> String {
        let mut c = self.clone();
        c.timestamp = String::new();
        c.to_json()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operators::{EquationResidual, Sampling};

    fn residual(v: f64) -> ResidualReport {
        let s = Sampling::at(vec![vec![0.0]]);
        ResidualReport::new("x", "m", &s, 1e-8, vec![EquationResidual::new("e", vec![v], vec![v])])
    }

    #[test]
    fn verdict_rules() {
        let cfg = RunConfig::default();
        let mut r = ReportFile::new(&cfg);
        r.finish();
        assert!(!r.verdict, "empty report must fail");
        r.push(residual(1e-12));
        r.finish();
        assert!(r.verdict);
        r.push(residual(f64::NAN));
        r.finish();
        assert!(!r.verdict);
        let mut r = ReportFile::new(&cfg);
        r.push(residual(0.0));
        r.error("kid", &Error::Param("bad".into()));
        r.finish();
        assert!(!r.verdict);
        assert_eq!(r.errors[0].kind, "ParamError");
    }

    #[test]
    fn json_round_trip() {
        let mut r = ReportFile::new(&RunConfig::default());
        r.push(residual(f64::INFINITY));
        r.extra("k", BTreeMap::from([("dim", 2)]));
        r.finish();
        let back = ReportFile::from_json(&r.to_json()).unwrap();
        assert_eq!(back.reports[0].sup_norm, f64::INFINITY);
        assert_eq!(back.extras["k"]["dim"], 2);
        assert_eq!(back.to_json(), r.to_json());
        assert!(r.canonical_json().contains("\"timestamp\": \"\""));
    }
}
