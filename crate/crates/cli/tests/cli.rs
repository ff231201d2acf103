use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

const BENCHMARK: &str = "\
a1 = 0.05
a2 = 1.045
b1 = 0.95
b2 = 0.27
mu = 2
r = 4
r1 = 0.5
r2 = 0.5
";

fn run_cli(dir: &Path, config: &str, extra: &[&str]) -> Output {
    let cfg = dir.join("run.cfg");
    fs::write(&cfg, config).unwrap();
    let out_dir = dir.join("out");
    Command::new(env!("CARGO_BIN_EXE_infohopf"))
        .arg(&cfg)
        .arg("--output-dir")
        .arg(&out_dir)
        .args(extra)
        .output()
        .unwrap()
}

fn report(dir: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(dir.join("out/report.json")).unwrap()).unwrap()
}

#[test]
fn analyze_benchmark() {
    let tmp = tempfile::tempdir().unwrap();
    let out = run_cli(tmp.path(), &format!("{BENCHMARK}command = analyze\n"), &[]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let r = report(tmp.path());
    assert!((r["s0"].as_f64().unwrap() - 2.015).abs() < 1e-2);
    assert_eq!(r["normal_form"]["direction"], "Supercritical");
    assert!(tmp.path().join("out/report.csv").exists());
}

#[test]
fn simulate_writes_trajectory_and_plots() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = format!("{BENCHMARK}s = 2.02\ncommand = simulate\nt_end = 500\nsteps_per_delay = 40\n");
    let out = run_cli(tmp.path(), &cfg, &["--plot"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    for name in [
        "waveform_u.svg",
        "waveform_v.svg",
        "waveform_w.svg",
        "phase_uv.svg",
        "phase_uvw_projection.svg",
    ] {
        let svg = fs::read_to_string(tmp.path().join("out").join(name)).unwrap();
        assert!(svg.starts_with("<svg") && svg.contains(r#"width="800""#), "{name}");
    }
    let csv = fs::read_to_string(tmp.path().join("out/trajectory.csv")).unwrap();
    let h = 2.02 / 40.0;
    let expected_rows = (500.0f64 / h).round() as usize + 1;
    assert_eq!(csv.lines().next(), Some("t,u,v,w"));
    assert_eq!(csv.lines().count(), expected_rows + 1);
    let sim = &report(tmp.path())["simulation"];
    assert_eq!(sim["reference"], "EStar");
    assert!(sim["amplitude_u"].as_f64().unwrap() > 0.0);
}

#[test]
fn runs_are_deterministic() {
    let cfg = format!("{BENCHMARK}s = 2.02\ncommand = simulate\nt_end = 300\nsteps_per_delay = 40\n");
    let read = |dir: &Path, name: &str| fs::read(dir.join("out").join(name)).unwrap();
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    assert!(run_cli(a.path(), &cfg, &[]).status.success());
    assert!(run_cli(b.path(), &cfg, &[]).status.success());
    for name in ["report.json", "report.csv", "trajectory.csv"] {
        assert_eq!(read(a.path(), name), read(b.path(), name), "{name}");
    }
}

fn lookup<'a>(json: &'a Value, dotted: &str) -> &'a Value {
    dotted.split('.').fold(json, |v, k| match v {
        Value::Array(items) => &items[k.parse::<usize>().unwrap()],
        _ => &v[k],
    })
}

#[test]
fn csv_report_round_trips_json() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = format!("{BENCHMARK}s = 2.02\ncommand = simulate\nt_end = 300\nsteps_per_delay = 40\n");
    assert!(run_cli(tmp.path(), &cfg, &[]).status.success());
    let json = report(tmp.path());
    let csv = fs::read_to_string(tmp.path().join("out/report.csv")).unwrap();
    let mut checked = 0;
    for line in csv.lines().skip(1) {
        let (key, value) = line.split_once(',').unwrap();
        let j = lookup(&json, key);
        match j {
            Value::Number(n) => {
                assert_eq!(value.parse::<f64>().unwrap(), n.as_f64().unwrap(), "{key}");
                checked += 1;
            }
            Value::Null => assert_eq!(value, "", "{key}"),
            Value::String(s) => assert_eq!(value, s, "{key}"),
            Value::Bool(b) => assert_eq!(value, b.to_string(), "{key}"),
            Value::Array(a) => assert!(a.is_empty() && value.is_empty(), "{key}"),
            Value::Object(_) => panic!("{key} not flattened"),
        }
    }
    assert!(checked > 30);
}

#[test]
fn sweep_without_positive_equilibrium() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = format!(
        "{}command = sweep\nsweep_param = s\nsweep_min = 1\nsweep_max = 3\nsweep_count = 5\n",
        BENCHMARK.replace("b1 = 0.95", "b1 = 1.5")
    );
    let out = run_cli(tmp.path(), &cfg, &[]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = fs::read_to_string(tmp.path().join("out/sweep.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "param,value,s0,chi1,chi2,direction");
    assert_eq!(lines.len(), 6);
    for row in &lines[1..] {
        let fields: Vec<&str> = row.split(',').collect();
        assert_eq!(fields.len(), 6);
        assert_eq!(fields[0], "s");
        assert!(fields[2..].iter().all(|f| f.is_empty()), "{row}");
    }
}

#[test]
fn sweep_rows_match_direct_recomputation() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg =
        format!("{BENCHMARK}command = sweep\nsweep_param = b2\nsweep_min = 0.1\nsweep_max = 0.4\nsweep_count = 7\n");
    assert!(run_cli(tmp.path(), &cfg, &[]).status.success());
    let csv = fs::read_to_string(tmp.path().join("out/sweep.csv")).unwrap();
    for row in csv.lines().skip(1) {
        let fields: Vec<&str> = row.split(',').collect();
        let mut p = infohopf::ModelParams::<f64>::benchmark();
        p.b2 = fields[1].parse().unwrap();
        let direct = infohopf::s0(&p).unwrap().map(|c| c.s0);
        let reported = (!fields[2].is_empty()).then(|| fields[2].parse::<f64>().unwrap());
        assert_eq!(reported, direct, "{row}");
    }
}

#[test]
fn empty_config_is_a_config_error() {
    let tmp = tempfile::tempdir().unwrap();
    let out = run_cli(tmp.path(), "", &[]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    for key in ["command", "r1", "a2", "mu"] {
        assert!(err.contains(key), "{err}");
    }
}

#[test]
fn unwritable_output_is_a_filesystem_error() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("run.cfg");
    fs::write(&cfg, format!("{BENCHMARK}command = analyze\n")).unwrap();
    let blocker = tmp.path().join("file");
    fs::write(&blocker, "").unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_infohopf"))
        .arg(&cfg)
        .arg("--output-dir")
        .arg(blocker.join("sub"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn divergence_still_writes_report() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = format!(
        "{}s = 2\ncommand = simulate\nt_end = 200\nsteps_per_delay = 20\nu0 = 1\nv0 = 1\n",
        BENCHMARK
            .replace("b1 = 0.95", "b1 = -40")
            .replace("b2 = 0.27", "b2 = 10")
    );
    let out = run_cli(tmp.path(), &cfg, &["--plot"]);
    assert_eq!(out.status.code(), Some(3));
    let sim = &report(tmp.path())["simulation"];
    assert_eq!(sim["classification"], "Diverges");
    assert!(sim["diverged_at"].as_f64().unwrap() > 0.0);
    assert!(!tmp.path().join("out/trajectory.csv").exists());
}
