use phasekit::core_math::{samples_from_csv, samples_to_csv, PeriodicSample};
use phasekit_cli::pipeline::Manifest;
use phasekit_cli::RunConfig;
use std::path::Path;
use std::process::{Command, Output};

fn phasekit(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_phasekit"))
        .arg("--out-dir")
        .arg(dir)
        .arg("--quiet")
        .args(args)
        .output()
        .expect("binary runs")
}

fn ok(dir: &Path, args: &[&str]) -> String {
    let out = phasekit(dir, args);
    assert!(
        out.status.success(),
        "{args:?}: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn read(dir: &Path, name: &str) -> String {
    std::fs::read_to_string(dir.join(name)).unwrap_or_else(|e| panic!("{name}: {e}"))
}

/// Runs the cycle → prc → reduce stages on a coarse grid.
fn staged(dir: &Path) {
    for stage in ["limit-cycle", "prc", "reduce"] {
        ok(dir, &["--grid", "256", stage]);
    }
}

fn csv_round_trip(text: &str) {
    let (names, cols) = samples_from_csv(text).unwrap();
    let names: Vec<&str> = names.iter().map(String::as_str).collect();
    let cols: Vec<&PeriodicSample> = cols.iter().collect();
    assert_eq!(samples_to_csv(&names, &cols), text);
}

#[test]
fn staged_pipeline_writes_round_trippable_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    staged(d);
    ok(d, &["deadzone"]);
    ok(d, &["--grid", "256", "fourier", "--order", "10"]);

    let cycle: serde_json::Value = serde_json::from_str(&read(d, "cycle.json")).unwrap();
    let period = cycle["period"].as_f64().unwrap();
    assert!((period / 3.36 - 1.0).abs() < 0.02, "period {period}");
    assert!(read(d, "cycle.csv").starts_with("phase,v,w,dv,dw\n"));
    assert!(read(d, "prc.csv").starts_with("phase,Z_1,Z_2\n"));
    assert!(read(d, "h.csv").starts_with("phase,h,h_odd\n"));
    for name in ["cycle.csv", "prc.csv", "h.csv", "h_fourier.csv"] {
        csv_round_trip(&read(d, name));
    }
    for name in ["cycle.json", "prc.json", "reduce.json", "dz.json", "fourier.json", "manifest.json"] {
        let text = read(d, name);
        let v: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert_eq!(serde_json::to_string_pretty(&v).unwrap() + "\n", text, "{name}");
    }

    let dz: serde_json::Value = serde_json::from_str(&read(d, "dz.json")).unwrap();
    let arcs = dz["columns"][1]["arcs"].as_array().unwrap();
    assert_eq!(dz["columns"][1]["source"], "h_odd");
    let pi = std::f64::consts::PI;
    assert!(arcs.iter().any(|a| a["first"].as_f64().unwrap() < pi && a["last"].as_f64().unwrap() > pi));

    let m: Manifest = serde_json::from_str(&read(d, "manifest.json")).unwrap();
    for stage in ["limit-cycle", "prc", "reduce", "deadzone", "fourier"] {
        let r = &m.stages[stage];
        assert_eq!(r.inputs_sha256.len(), 64);
        assert!(!r.outputs.is_empty());
    }
    assert!(m.stages["limit-cycle"].inputs.is_empty());
    assert!(m.stages["reduce"].inputs.iter().any(|f| f.path.ends_with("prc.csv")));
}

#[test]
fn identical_config_gives_identical_csv() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    staged(a.path());
    // rerun from the echoed config alone
    let echo = a.path().join("config.toml");
    let cfg = RunConfig::load(&echo).unwrap();
    assert_eq!(cfg.numerics.grid, 256);
    for stage in ["limit-cycle", "prc", "reduce"] {
        ok(b.path(), &["--config", echo.to_str().unwrap(), stage]);
    }
    for name in ["cycle.csv", "prc.csv", "h.csv", "cycle.json", "prc.json"] {
        assert_eq!(read(a.path(), name), read(b.path(), name), "{name}");
    }
}

#[test]
fn reduce_without_prc_names_the_stage() {
    let dir = tempfile::tempdir().unwrap();
    let out = phasekit(dir.path(), &["reduce"]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("stage `prc`"), "{err}");
    // with a cycle present the missing stage is still prc
    ok(dir.path(), &["--grid", "256", "limit-cycle"]);
    let err = String::from_utf8_lossy(&phasekit(dir.path(), &["--grid", "256", "reduce"]).stderr).to_string();
    assert!(err.contains("stage `prc`"), "{err}");
    // a cycle computed on another grid is stale
    let err = String::from_utf8_lossy(&phasekit(dir.path(), &["--grid", "128", "prc"]).stderr).to_string();
    assert!(err.contains("limit-cycle") && err.contains("grid"), "{err}");
}

#[test]
fn bad_config_names_the_key() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    std::fs::write(&cfg, "[numerics]\nsample_dt = 0.05\nwarmpu = 3.0\n").unwrap();
    let out = phasekit(dir.path(), &["--config", cfg.to_str().unwrap(), "limit-cycle"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("warmpu"));
    std::fs::write(&cfg, "[model.params]\nmu = 0.0\n").unwrap();
    let out = phasekit(dir.path(), &["--config", cfg.to_str().unwrap(), "limit-cycle"]);
    assert!(String::from_utf8_lossy(&out.stderr).contains("model.params.mu"));
    let out = phasekit(dir.path(), &["deadzone", "--eta", "-1"]);
    assert!(String::from_utf8_lossy(&out.stderr).contains("--eta"));
}

#[test]
fn verify_length_bound_passes() {
    let dir = tempfile::tempdir().unwrap();
    let stdout = ok(dir.path(), &["verify", "--suite", "prop3", "--seed", "7"]);
    assert!(stdout.starts_with("PASS [length-bound]"), "{stdout}");
    let v: serde_json::Value = serde_json::from_str(&read(dir.path(), "verify.json")).unwrap();
    assert_eq!(v[0]["detail"]["passed"], 100);
    assert_eq!(v[0]["detail"]["false_claims"], 0);
    let out = phasekit(dir.path(), &["verify", "--suite", "nope"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn small_ensemble_writes_report() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    staged(d);
    ok(d, &["--grid", "256", "ensemble", "--eps", "-0.04", "--n", "4", "--T", "10"]);
    let csv = read(d, "ensemble.csv");
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("t,member,Phi,v1,v2"));
    // 4 members × 201 samples
    assert_eq!(lines.count(), 4 * 201);
    let r: serde_json::Value = serde_json::from_str(&read(d, "ensemble_report.json")).unwrap();
    assert_eq!(r["eps"], -0.04);
    assert_eq!(r["members"], 4);
    assert!(r["dead_band"]["length"].as_f64().unwrap() > 2.0);
    let echo = RunConfig::load(&d.join("config.toml")).unwrap();
    assert_eq!((echo.coupling.eps, echo.numerics.ensemble_size, echo.numerics.t_final), (-0.04, 4, 10.0));
}
