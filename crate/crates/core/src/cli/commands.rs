//! The four commands. Each returns a finished report; module errors land in `errors`.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::BufWriter;

use serde::Serialize;

use super::config::{Command, RunConfig, Suite};
use super::report::ReportFile;
use crate::error::{Error, Result};
use crate::geometry::{OneFormField, ScalarField};
use crate::jets::DEFAULT_ORDER;
use crate::killing_dev::{develop, einstein_residual, staticity_residual, LorentzModel};
use crate::models::{BaseSpec, Model, ModelSpec, ProfileSpec};
use crate::operators::{
    kernel_display_residual, lemma1_residuals, lemma2_residuals, lstar_residual, sigma_residual,
    structure_checks, EquationResidual, KidData, ResidualReport, Sampling,
};
use crate::warp_ode::{kernel_dim_t, solve_h, validate_reduction, WarpParams, WarpProblem};

/// Relative SVD threshold of the kernel computation.
pub const KERNEL_TOL: f64 = 1e-6;
/// Agreement required between the reduced kernel equations and the full operator.
pub const REDUCTION_TOL: f64 = 1e-8;
/// Trial functions used to validate the kernel reduction.
pub const REDUCTION_TRIALS: usize = 20;
/// Largest allowed growth factor between consecutive refinement steps.
pub const REFINE_GROWTH: f64 = 2.0;

pub fn run(cfg: &RunConfig) -> ReportFile {
    let mut report = ReportFile::new(cfg);
    match cfg.command {
        Command::Verify => cmd_verify(cfg, &mut report),
        Command::Warp => cmd_warp(cfg, &mut report),
        Command::Develop => cmd_develop(cfg, &mut report),
        Command::Refine => cmd_refine(cfg, &mut report),
    }
    report.finish();
    report
}

fn sampling(cfg: &RunConfig, model: &Model, count: usize) -> Sampling {
    Sampling::new(model.chart(), count, cfg.seed).with_order(cfg.order.unwrap_or(DEFAULT_ORDER))
}

fn build_kid(cfg: &RunConfig, model: &Model) -> Result<Option<KidData>> {
    let Some(spec) = &cfg.kid else { return Ok(None) };
    let kid = spec.build(model)?;
    Ok(Some(if cfg.perturb != 0.0 {
        kid.perturbed(&model.bump(), cfg.perturb)
    } else {
        kid
    }))
}

/// `(α, ψ)` with `∇α = ψ g` expected: from the KID as `(α, -c f)`, else `(h dt, h')` on warps.
fn conformal_pair(model: &Model, kid: Option<&KidData>) -> Result<(OneFormField, ScalarField)> {
    if let Some(k) = kid {
        let psi = -(k.c.expr().clone() * k.f.expr().clone());
        return Ok((k.alpha.clone(), ScalarField::new(psi)));
    }
    if model.warp.is_some() {
        return Ok((model.oneform("h_dt")?.clone(), model.scalar("dh")?.clone()));
    }
    Err(Error::Config(
        "lemma suites need a kid, or a warped model for the default (h dt, h')".into(),
    ))
}

fn fixed_report(name: &str, model: &str, tolerance: f64, eq: &str, values: Vec<f64>) -> ResidualReport {
    let s = Sampling::at(vec![Vec::new(); values.len()]);
    ResidualReport::new(name, model, &s, tolerance, vec![EquationResidual::new(eq, values.clone(), values)])
}

fn record<T>(report: &mut ReportFile, context: &str, r: Result<T>) -> Option<T> {
    match r {
        Ok(v) => Some(v),
        Err(e) => {
            report.error(context, &e);
            None
        }
    }
}

/// Runs the configured suites once, appending reports and extras.
fn run_suites(cfg: &RunConfig, model: &Model, kid: Option<&KidData>, s: &Sampling, report: &mut ReportFile) {
    let name = model.descriptor();
    let g = &model.metric;
    let tol = cfg.tolerance;
    let need_kid = |report: &mut ReportFile, ctx: &str| -> Option<KidData> {
        match kid {
            Some(k) => Some(k.clone()),
            None => {
                report.error(ctx, &Error::Config(format!("suite {ctx} needs a kid")));
                None
            }
        }
    };
    for suite in &cfg.suites {
        match suite {
            Suite::Sigma => {
                let Some(k) = need_kid(report, "sigma") else { continue };
                for sys in &cfg.systems {
                    if let Some(r) = record(report, sys.name(), sigma_residual(*sys, &name, g, &k, s, tol)) {
                        report.push(r);
                    }
                }
            }
            Suite::Lstar => {
                let Some(k) = need_kid(report, "lstar") else { continue };
                if let Some(r) = record(report, "lstar", lstar_residual(&name, g, &k, s, tol)) {
                    report.push(r);
                }
            }
            Suite::Display => {
                let Some(k) = need_kid(report, "display") else { continue };
                if let Some(r) = record(report, "display", kernel_display_residual(&name, g, &k, s, tol)) {
                    report.push(r);
                }
            }
            Suite::Lemma1 | Suite::Lemma2 => {
                let ctx = if *suite == Suite::Lemma1 { "lemma1" } else { "lemma2" };
                let Some((alpha, psi)) = record(report, ctx, conformal_pair(model, kid)) else { continue };
                let r = if *suite == Suite::Lemma1 {
                    lemma1_residuals(&name, g, &alpha, &psi, s, tol)
                } else {
                    lemma2_residuals(&name, g, &psi, s, tol)
                };
                if let Some(r) = record(report, ctx, r) {
                    report.push(r);
                }
            }
            Suite::Bianchi | Suite::Structure => {
                let Some(st) = record(report, "structure", structure_checks(&name, g, s, tol)) else {
                    continue;
                };
                if *suite == Suite::Structure {
                    let target = scal_target(model).unwrap_or(st.scal.mean);
                    let sr = st.scal_report(&name, s, target, tol);
                    report.extra("scal", &st.scal);
                    report.push(st.bianchi);
                    report.push(st.harmonic);
                    report.push(sr);
                } else {
                    report.push(st.bianchi);
                }
            }
            Suite::Kernel => run_kernel(model, cfg.seed, report),
        }
    }
}

fn scal_target(model: &Model) -> Option<f64> {
    match &model.spec {
        ModelSpec::Warped {
            profile: ProfileSpec::Ode { scal_target, .. },
            ..
        } => Some(*scal_target),
        _ => None,
    }
}

fn run_kernel(model: &Model, seed: u64, report: &mut ReportFile) {
    let name = model.descriptor();
    if let Some(gap) = record(report, "kernel", validate_reduction(model, REDUCTION_TRIALS, seed)) {
        report.push(fixed_report("kernel_reduction", &name, REDUCTION_TOL, "reduced_vs_full", vec![gap]));
    }
    if let Some(k) = record(report, "kernel", kernel_dim_t(model, None, KERNEL_TOL)) {
        report.push(fixed_report(
            "kernel_monodromy",
            &name,
            REDUCTION_TOL,
            "det_minus_one",
            vec![(k.det - 1.0).abs()],
        ));
        report.extra("kernel", &k);
    }
}

pub fn cmd_verify(cfg: &RunConfig, report: &mut ReportFile) {
    let Some(model) = record(report, "model", cfg.model.build()) else { return };
    let Some(kid) = record(report, "kid", build_kid(cfg, &model)) else { return };
    let s = sampling(cfg, &model, cfg.samples);
    run_suites(cfg, &model, kid.as_ref(), &s, report);
}

#[derive(Debug, Serialize)]
struct WarpSummary {
    n: usize,
    scal_target: f64,
    scal0: f64,
    h0: f64,
    dh0: f64,
    period: f64,
    linearization_period: f64,
    constant: bool,
    steps: usize,
    periodicity_gap: f64,
    drift: f64,
    h_min: f64,
    h_max: f64,
}

pub fn cmd_warp(cfg: &RunConfig, report: &mut ReportFile) {
    let w = &cfg.warp;
    let unit_sphere = ((w.n - 1) * (w.n - 2)) as f64;
    let scal0 = w.scal0.unwrap_or(unit_sphere);
    let Some(params) = record(report, "warp", WarpParams::new(w.n, w.scal_target, scal0)) else { return };
    let h0 = match w.h0 {
        Some(h) => h,
        None => match record(report, "warp", params.fixed_point()) {
            Some(h) => h,
            None => return,
        },
    };
    let prob = WarpProblem {
        n: w.n,
        scal_target: w.scal_target,
        scal0,
        h0,
        dh0: w.dh0,
        l_hint: w.period_hint,
        tol: w.tol,
    };
    let Some(sol) = record(report, "warp", solve_h(&prob)) else { return };
    let lin = params.linearization_period().unwrap_or(f64::NAN);
    let label = format!("warp:n={},S={},scal0={scal0},h0={h0},dh0={}", w.n, w.scal_target, w.dh0);
    report.extra(
        "warp",
        WarpSummary {
            n: w.n,
            scal_target: w.scal_target,
            scal0,
            h0,
            dh0: w.dh0,
            period: sol.period,
            linearization_period: lin,
            constant: sol.constant,
            steps: sol.steps,
            periodicity_gap: sol.periodicity_gap,
            drift: sol.drift,
            h_min: sol.h_min,
            h_max: sol.h_max,
        },
    );
    report.push(fixed_report("warp_periodicity", &label, w.tol, "gap", vec![sol.periodicity_gap]));
    report.push(fixed_report("warp_first_integral", &label, w.tol, "drift", vec![sol.drift]));
    if let Some(path) = &cfg.csv {
        let written = File::create(path)
            .map_err(Error::from)
            .and_then(|f| sol.write_csv(BufWriter::new(f)));
        record(report, "csv", written);
    }
    if scal0 == unit_sphere {
        let spec = ModelSpec::Warped {
            n: w.n,
            profile: ProfileSpec::Ode {
                scal_target: w.scal_target,
                h0: w.h0,
                dh0: w.dh0,
                tol: w.tol,
            },
            base: BaseSpec::Sphere,
        };
        let Some(model) = record(report, "model", spec.build()) else { return };
        let s = sampling(cfg, &model, cfg.samples);
        if let Some(st) = record(report, "structure", structure_checks(&label, &model.metric, &s, cfg.tolerance)) {
            let sr = st.scal_report(&label, &s, w.scal_target, cfg.tolerance);
            report.extra("scal", &st.scal);
            report.push(st.harmonic);
            report.push(sr);
        }
    } else {
        report.extra(
            "notes",
            vec!["structure checks skipped: the base is not the unit round sphere".to_string()],
        );
    }
}

/// Largest `|γ̃(t, p) - γ̃(t', p)|` and `|γ̃_ij(t, p) - g_ij(p)|` over the points.
fn development_structure(lm: &LorentzModel, model: &Model, s: &Sampling) -> Result<(f64, f64)> {
    let n = model.dim();
    let (mut drift, mut slice): (f64, f64) = (0.0, 0.0);
    for p in &s.points {
        let at = |t: f64| -> Result<_> {
            let mut q = vec![t];
            q.extend_from_slice(p);
            lm.metric.value_at(&q)
        };
        let (a, b) = (at(0.1)?, at(0.9)?);
        drift = drift.max(a.sub(&b).max_abs());
        let g = model.metric.value_at(p)?;
        for i in 0..n {
            for j in 0..n {
                slice = slice.max((a.get(&[i + 1, j + 1]) - g.get(&[i, j])).abs());
            }
        }
    }
    Ok((drift, slice))
}

pub fn cmd_develop(cfg: &RunConfig, report: &mut ReportFile) {
    let Some(model) = record(report, "model", cfg.model.build()) else { return };
    let kid = match record(report, "kid", build_kid(cfg, &model)) {
        Some(Some(k)) => k,
        Some(None) => {
            report.error("kid", &Error::Config("develop needs a kid".into()));
            return;
        }
        None => return,
    };
    let Some(lm) = record(report, "develop", develop(&model, &kid)) else { return };
    report.extra("development", lm.summary(&model.metric));
    let s = sampling(cfg, &model, cfg.samples);
    let name = model.descriptor();
    if let Some(r) = record(report, "einstein", einstein_residual(&lm, &s, cfg.tolerance)) {
        report.push(r);
    }
    if let Some(r) = record(report, "staticity", staticity_residual(&lm, &s, cfg.tolerance)) {
        report.push(r);
    }
    if let Some((drift, slice)) = record(report, "development", development_structure(&lm, &model, &s)) {
        report.push(fixed_report("stationarity", &name, 0.0, "t_dependence", vec![drift]));
        report.push(fixed_report("slice_isometry", &name, 0.0, "slice_minus_g", vec![slice]));
    }
    if let Some(gaps) = record(report, "det_identity", det_gaps(&lm, &model, &kid, &s)) {
        report.push(fixed_report("det_identity", &name, 1e-10, "relative_gap", gaps));
    }
}

fn det_gaps(lm: &LorentzModel, model: &Model, kid: &KidData, s: &Sampling) -> Result<Vec<f64>> {
    let (kept, _) = lm.admissible(s)?;
    let n = model.dim();
    kept.points
        .iter()
        .map(|q| {
            let p = &q[1..];
            let f = kid.f.eval(p)?;
            let g = model.metric.value_at(p)?;
            let dg = nalgebra::DMatrix::from_fn(n, n, |i, j| g.get(&[i, j])).determinant();
            let expect = -f * f * dg;
            Ok((lm.det_at(p)? - expect).abs() / expect.abs())
        })
        .collect()
}

#[derive(Debug, Serialize)]
struct RefineStep {
    samples: usize,
    ode_tol: Option<f64>,
    sup_norms: BTreeMap<String, f64>,
}

fn with_ode_tol(spec: &ModelSpec, tol: f64) -> Option<ModelSpec> {
    match spec {
        ModelSpec::Warped {
            n,
            profile: ProfileSpec::Ode {
                scal_target, h0, dh0, ..
            },
            base,
        } => Some(ModelSpec::Warped {
            n: *n,
            profile: ProfileSpec::Ode {
                scal_target: *scal_target,
                h0: *h0,
                dh0: *dh0,
                tol,
            },
            base: base.clone(),
        }),
        _ => None,
    }
}

pub fn cmd_refine(cfg: &RunConfig, report: &mut ReportFile) {
    let mut series: BTreeMap<String, Vec<f64>> = BTreeMap::new();
    let mut steps = Vec::new();
    for (k, &count) in cfg.refine.counts.iter().enumerate() {
        let tuned = cfg.refine.ode_tols.get(k).and_then(|&t| Some((t, with_ode_tol(&cfg.model, t)?)));
        let applied_tol = tuned.as_ref().map(|(t, _)| *t);
        let spec = tuned.map(|(_, s)| s).unwrap_or_else(|| cfg.model.clone());
        let Some(model) = record(report, "model", spec.build()) else { return };
        let Some(kid) = record(report, "kid", build_kid(cfg, &model)) else { return };
        let s = sampling(cfg, &model, count);
        let start = report.reports.len();
        run_suites(cfg, &model, kid.as_ref(), &s, report);
        let mut sups = BTreeMap::new();
        for r in &mut report.reports[start..] {
            series.entry(r.name.clone()).or_default().push(r.sup_norm);
            sups.insert(r.name.clone(), r.sup_norm);
            r.name = format!("{}@{count}", r.name);
        }
        steps.push(RefineStep {
            samples: count,
            ode_tol: applied_tol,
            sup_norms: sups,
        });
    }
    let floor = 1e-3 * cfg.tolerance;
    let equations = series
        .iter()
        .map(|(name, r)| {
            let growth: Vec<f64> = r.windows(2).map(|w| w[1] / w[0].max(floor)).collect();
            EquationResidual::new(name, growth.clone(), growth)
        })
        .collect();
    let s = Sampling::at(Vec::new());
    report.push(
        ResidualReport::new("refine_trend", &cfg.model.to_string(), &s, REFINE_GROWTH, equations).with_note(
            format!("growth = r[k+1] / max(r[k], {floor:e}); residuals must not grow beyond a factor {REFINE_GROWTH}"),
        ),
    );
    report.extra("refine", steps);
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(command: Command) -> RunConfig {
        RunConfig {
            command,
            samples: 10,
            ..RunConfig::default()
        }
    }

    #[test]
    fn missing_kid_is_an_error_entry() {
        let r = run(&cfg(Command::Verify));
        assert!(!r.verdict);
        assert_eq!(r.errors.len(), 1);
        assert_eq!(r.errors[0].context, "sigma");
    }

    #[test]
    fn warp_reports_summary() {
        let r = run(&cfg(Command::Warp));
        assert!(r.verdict, "{:?}", r.errors);
        let w = &r.extras["warp"];
        assert!(w["period"].as_f64().unwrap() > 0.0);
        assert!(r.reports.iter().any(|x| x.name == "warp_periodicity"));
    }

    #[test]
    fn refine_appends_trend() {
        let c = RunConfig {
            model: "sphere:n=3,r=1".parse().unwrap(),
            kid: Some("obata:i=4,c=1".parse().unwrap()),
            refine: super::super::config::RefineSection {
                counts: vec![10, 20],
                ode_tols: vec![],
            },
            ..cfg(Command::Refine)
        };
        let r = run(&c);
        assert!(r.verdict, "{:?}", r.errors);
        let names: Vec<_> = r.reports.iter().map(|x| x.name.clone()).collect();
        assert_eq!(names, ["sigma1@10", "sigma1@20", "refine_trend"]);
    }

    #[test]
    fn ode_tolerance_only_applies_to_ode_models() {
        let ode: ModelSpec = "warped:h=ode".parse().unwrap();
        assert!(with_ode_tol(&ode, 1e-6).unwrap().to_string().contains("tol=0.000001"));
        assert!(with_ode_tol(&"sphere:n=3,r=1".parse().unwrap(), 1e-6).is_none());
    }
}
