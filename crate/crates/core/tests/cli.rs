use std::path::Path;
use std::process::{Command, Output};

use kidcheck::cli::{ReportFile, SCHEMA_VERSION};

fn kidcheck(args: &[&str], out_dir: Option<&Path>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_kidcheck"));
    cmd.args(args).env_remove("KIDCHECK_OUT_DIR");
    if let Some(d) = out_dir {
        cmd.env("KIDCHECK_OUT_DIR", d);
    }
    cmd.output().expect("binary runs")
}

fn report(path: &Path) -> ReportFile {
    ReportFile::from_json(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn verify_passes_on_obata_sphere() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("v.json");
    let o = kidcheck(
        &[
            "verify", "--model", "sphere:n=3,r=1", "--kid", "obata:i=4,c=1", "--system", "sigma1", "--system",
            "sigma2", "--suite", "sigma", "--suite", "lstar", "--samples", "15", "--output",
            out.to_str().unwrap(),
        ],
        None,
    );
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let r = report(&out);
    assert_eq!(r.schema_version, SCHEMA_VERSION);
    assert!(r.verdict);
    let names: Vec<&str> = r.reports.iter().map(|r| r.name.as_str()).collect();
    assert_eq!(names, ["sigma1", "sigma2", "lstar"]);
    assert!(r.reports.iter().all(|x| x.samples == 15 && x.seed == 1));
    assert!(r.conventions.contains_key("riemann"));
}

#[test]
fn perturbed_kid_exits_one() {
    let o = kidcheck(&["verify", "--model", "sphere:n=3,r=1", "--kid", "obata:i=4,c=1", "--perturb", "0.1"], None);
    assert_eq!(o.status.code(), Some(1));
    let r = ReportFile::from_json(&String::from_utf8(o.stdout).unwrap()).unwrap();
    assert!(!r.verdict && r.errors.is_empty());
}

#[test]
fn configuration_and_module_errors_exit_two() {
    assert_eq!(kidcheck(&["verify", "--samples", "2"], None).status.code(), Some(2));
    assert_eq!(kidcheck(&["verify", "--model", "cube:n=3"], None).status.code(), Some(2));
    assert_eq!(kidcheck(&["frobnicate"], None).status.code(), Some(2));
    let o = kidcheck(&["verify", "--model", "warped:n=3,h=trig,a=2,b=0.5,L=3", "--suite", "kernel"], None);
    assert_eq!(o.status.code(), Some(2));
    let r = ReportFile::from_json(&String::from_utf8(o.stdout).unwrap()).unwrap();
    assert_eq!(r.errors[0].kind, "ModelError");
    assert_eq!(kidcheck(&["--help"], None).status.code(), Some(0));
}

#[test]
fn out_dir_receives_reports_and_csv() {
    let dir = tempfile::tempdir().unwrap();
    let o = kidcheck(&["warp", "--dh0", "0.15"], Some(dir.path()));
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let r = report(&dir.path().join("warp.json"));
    assert!(r.extras.contains_key("warp"));
    let csv = std::fs::read_to_string(dir.path().join("warp.csv")).unwrap();
    assert!(csv.starts_with("t,h,dh,E\n"));
    assert!(csv.lines().count() > 100);
}

#[test]
fn config_file_with_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    std::fs::write(
        &cfg,
        "command = \"verify\"\nmodel = \"warped:h=ode\"\nkid = \"warp:c=0.7\"\nsuites = [\"sigma\", \"lemma2\"]\nsamples = 12\n",
    )
    .unwrap();
    let out = dir.path().join("r.json");
    let o = kidcheck(
        &["develop", "--config", cfg.to_str().unwrap(), "--samples", "11", "--output", out.to_str().unwrap()],
        None,
    );
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let r = report(&out);
    assert_eq!(r.command, "develop");
    assert_eq!(r.config.samples, 11);
    assert!(r.extras.contains_key("development"));
}

#[test]
fn reruns_are_identical_apart_from_timestamp() {
    let dir = tempfile::tempdir().unwrap();
    let mut texts = Vec::new();
    let out = dir.path().join("refine.json");
    for _ in 0..2 {
        let o = kidcheck(
            &[
                "refine", "--model", "warped:h=ode", "--kid", "warp:c=1", "--suite", "sigma", "--suite", "structure",
                "--output", out.to_str().unwrap(),
            ],
            None,
        );
        assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
        texts.push(report(&out).canonical_json());
    }
    assert_eq!(texts[0], texts[1]);
}
