//! Batch front end: `verify`, `warp`, `develop` and `refine`, each writing a JSON report.

mod commands;
mod config;
mod report;

pub use commands::{cmd_develop, cmd_refine, cmd_verify, cmd_warp, run, KERNEL_TOL, REDUCTION_TOL};
pub use config::{Command, KidSpec, RefineSection, RunConfig, Suite, WarpSection};
pub use report::{conventions, ErrorEntry, ReportFile, SCHEMA_VERSION};

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::error::{Error, Result};
use crate::models::ModelSpec;
use crate::operators::SystemId;

/// Environment variable naming the default output directory.
pub const OUT_DIR_ENV: &str = "KIDCHECK_OUT_DIR";

pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_ERROR: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "kidcheck", version, about = "Residual checks for Killing initial data on umbilical slices")]
struct Cli {
    #[command(subcommand)]
    command: Sub,
}

#[derive(Debug, Subcommand)]
enum Sub {
    /// Evaluate KID systems, lemma identities and structure checks on a model.
    Verify(Flags),
    /// Solve the constant-Scal warp equation and check the resulting metric.
    Warp(Flags),
    /// Build the Killing development and check the Einstein and staticity equations.
    Develop(Flags),
    /// Rerun the selected suites at growing sample counts and report the trend.
    Refine(Flags),
}

#[derive(Debug, Args)]
struct Flags {
    /// TOML configuration file; flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Model descriptor, e.g. `sphere:n=3,r=1` or `warped:ode`.
    #[arg(long)]
    model: Option<String>,
    /// KID selector, e.g. `obata:i=4,c=1` or `warp:c=0.7`.
    #[arg(long)]
    kid: Option<String>,
    /// Perturb `f` by this multiple of a bump function.
    #[arg(long)]
    perturb: Option<f64>,
    /// System to check (repeatable): sigma, sigma1..sigma4.
    #[arg(long = "system")]
    systems: Vec<String>,
    /// Suite to run (repeatable): sigma, lstar, display, lemma1, lemma2, bianchi, structure, kernel.
    #[arg(long = "suite")]
    suites: Vec<String>,
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Jet order of the pointwise evaluations.
    #[arg(long)]
    order: Option<usize>,
    #[arg(long = "tol")]
    tolerance: Option<f64>,
    /// Report path; defaults to `$KIDCHECK_OUT_DIR/<command>.json`, else stdout.
    #[arg(long)]
    output: Option<PathBuf>,
    /// CSV path for the warp factor samples.
    #[arg(long)]
    csv: Option<PathBuf>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long = "scal-target")]
    scal_target: Option<f64>,
    #[arg(long)]
    scal0: Option<f64>,
    #[arg(long)]
    h0: Option<f64>,
    #[arg(long)]
    dh0: Option<f64>,
    #[arg(long = "ode-tol")]
    ode_tol: Option<f64>,
    #[arg(long = "period-hint")]
    period_hint: Option<f64>,
    /// Refinement sample counts, comma separated.
    #[arg(long, value_delimiter = ',')]
    counts: Vec<usize>,
    /// Refinement ODE tolerances, comma separated.
    #[arg(long = "ode-tols", value_delimiter = ',')]
    ode_tols: Vec<f64>,
}

impl Flags {
    fn apply(self, mut cfg: RunConfig) -> Result<RunConfig> {
        if let Some(m) = self.model {
            cfg.model = m.parse::<ModelSpec>()?;
        }
        if let Some(k) = self.kid {
            cfg.kid = if k == "none" { None } else { Some(k.parse()?) };
        }
        if !self.systems.is_empty() {
            cfg.systems = self
                .systems
                .iter()
                .map(|s| s.parse::<SystemId>().map_err(|e| Error::Config(e.to_string())))
                .collect::<Result<_>>()?;
        }
        if !self.suites.is_empty() {
            cfg.suites = self.suites.iter().map(|s| s.parse()).collect::<Result<_>>()?;
        }
        macro_rules! set {
            ($($src:ident => $($dst:ident).+),* $(,)?) => {
                $(if let Some(v) = self.$src { cfg.$($dst).+ = v; })*
            };
        }
        set!(
            perturb => perturb,
            samples => samples,
            seed => seed,
            tolerance => tolerance,
            n => warp.n,
            scal_target => warp.scal_target,
            dh0 => warp.dh0,
            ode_tol => warp.tol,
        );
        if self.order.is_some() {
            cfg.order = self.order;
        }
        if self.output.is_some() {
            cfg.output = self.output;
        }
        if self.csv.is_some() {
            cfg.csv = self.csv;
        }
        if self.scal0.is_some() {
            cfg.warp.scal0 = self.scal0;
        }
        if self.h0.is_some() {
            cfg.warp.h0 = self.h0;
        }
        if self.period_hint.is_some() {
            cfg.warp.period_hint = self.period_hint;
        }
        if !self.counts.is_empty() {
            cfg.refine.counts = self.counts;
        }
        if !self.ode_tols.is_empty() {
            cfg.refine.ode_tols = self.ode_tols;
        }
        Ok(cfg)
    }
}

/// Parses arguments into a validated configuration.
pub fn parse_config<I, T>(args: I) -> Result<RunConfig>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = Cli::try_parse_from(args).map_err(|e| Error::Config(e.to_string()))?;
    config_from_cli(cli)
}

fn config_from_cli(cli: Cli) -> Result<RunConfig> {
    let (command, flags) = match cli.command {
        Sub::Verify(f) => (Command::Verify, f),
        Sub::Warp(f) => (Command::Warp, f),
        Sub::Develop(f) => (Command::Develop, f),
        Sub::Refine(f) => (Command::Refine, f),
    };
    let base = match &flags.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    let mut cfg = flags.apply(base)?;
    cfg.command = command;
    cfg.validate()?;
    Ok(cfg)
}

/// Fills output paths from the environment when the config leaves them open.
pub fn resolve_outputs(cfg: &mut RunConfig, out_dir: Option<PathBuf>) {
    let Some(dir) = out_dir else { return };
    if cfg.output.is_none() {
        cfg.output = Some(dir.join(format!("{}.json", cfg.command.name())));
    }
    if cfg.command == Command::Warp && cfg.csv.is_none() {
        cfg.csv = Some(dir.join("warp.csv"));
    }
}

pub fn exit_code(report: &ReportFile) -> i32 {
    if !report.errors.is_empty() {
        EXIT_ERROR
    } else if report.verdict {
        EXIT_PASS
    } else {
        EXIT_FAIL
    }
}

/// Full command-line entry point; returns the process exit status.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_ERROR } else { EXIT_PASS };
        }
    };
    let mut cfg = match config_from_cli(cli) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("kidcheck: {e}");
            return EXIT_ERROR;
        }
    };
    resolve_outputs(&mut cfg, std::env::var_os(OUT_DIR_ENV).map(PathBuf::from));
    if let Some(dir) = cfg.output.as_ref().and_then(|p| p.parent()).filter(|d| !d.as_os_str().is_empty()) {
        if let Err(e) = std::fs::create_dir_all(dir) {
            eprintln!("kidcheck: {}: {e}", dir.display());
            return EXIT_ERROR;
        }
    }
    let report = run(&cfg);
    let json = report.to_json();
    match &cfg.output {
        Some(path) => {
            if let Err(e) = std::fs::write(path, json + "\n") {
                eprintln!("kidcheck: {}: {e}", path.display());
                return EXIT_ERROR;
            }
        }
        None => println!("{json}"),
    }
    for r in &report.reports {
        eprintln!(
            "{:<28} {:>12.3e}  {}",
            r.name,
            r.sup_norm,
            if r.verdict { "pass" } else { "FAIL" }
        );
    }
    for e in &report.errors {
        eprintln!("error [{}] {}: {}", e.context, e.kind, e.message);
    }
    eprintln!("verdict: {}", if report.verdict { "pass" } else { "fail" });
    exit_code(&report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_override_defaults() {
        let cfg = parse_config([
            "kidcheck", "verify", "--model", "sphere:n=4,r=2", "--kid", "obata:i=2,c=0.5", "--system",
            "sigma1", "--system", "sigma2", "--samples", "12",
        ])
        .unwrap();
        assert_eq!(cfg.command, Command::Verify);
        assert_eq!(cfg.systems, vec![SystemId::Sigma1, SystemId::Sigma2]);
        assert_eq!(cfg.samples, 12);
        assert_eq!(cfg.model.to_string(), "sphere:n=4,r=2");
    }

    #[test]
    fn bad_flags_are_config_errors() {
        assert!(matches!(parse_config(["kidcheck", "verify", "--samples", "3"]), Err(Error::Config(_))));
        assert!(matches!(parse_config(["kidcheck", "verify", "--model", "cube"]), Err(Error::Config(_))));
        assert!(matches!(parse_config(["kidcheck", "launch"]), Err(Error::Config(_))));
    }

    #[test]
    fn out_dir_fills_paths() {
        let mut cfg = RunConfig {
            command: Command::Warp,
            ..RunConfig::default()
        };
        resolve_outputs(&mut cfg, Some(PathBuf::from("/tmp/x")));
        assert_eq!(cfg.output, Some(PathBuf::from("/tmp/x/warp.json")));
        assert_eq!(cfg.csv, Some(PathBuf::from("/tmp/x/warp.csv")));
    }
}
