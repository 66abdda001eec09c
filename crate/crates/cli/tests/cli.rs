use rfh_cli::{run, Cli, Command};
use serde_json::Value;
use std::f64::consts::PI;
use std::path::{Path, PathBuf};
use std::process::Command as Process;

fn write_config(dir: &Path, body: &str) -> PathBuf {
    let p = dir.join("config.json");
    std::fs::write(&p, body).unwrap();
    p
}

fn cli(command: Command, config: &Path, out: &Path) -> Cli {
    Cli { command, config: Some(config.to_path_buf()), out: Some(out.to_path_buf()), threads: Some(1), seed: None }
}

fn read_table(path: &Path) -> (Vec<String>, Vec<Vec<f64>>) {
    let mut r = csv::Reader::from_path(path).unwrap();
    let headers = r.headers().unwrap().iter().map(String::from).collect();
    let rows = r.records().map(|rec| rec.unwrap().iter().map(|v| v.parse().unwrap()).collect()).collect();
    (headers, rows)
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

const SMALL_1D: &str = r#"{
  "dim": 1,
  "distribution": {"kind": "boltzmann", "temperature": 0.5, "mu": 0.0},
  "potential": {"kind": "point_mass", "weight": 0.2},
  "grid": {"length": 25.132741228718345, "points": 32, "mode_cutoff": 2.0},
  "evolution": {"dt": 0.05, "t_end": 1.0, "sample_every": 5},
  "perturbation": {"extras": [{"kind": "random", "bandwidth": 1.0, "amplitude": 0.2, "seed": 1}]},
  "fixedpoint": {"dt": 0.25, "steps": 8},
  "response": {"tau_points": 9, "k_points": 5},
  "crosscheck": {"levels": [8, 16]}
}"#;

#[test]
fn steady_profile_matches_the_fermi_ball_closed_form() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), r#"{"steady": {"r_max": 40.0, "points": 800}}"#);
    run(&cli(Command::Steady, &cfg, &dir.path().join("out"))).unwrap();
    let (headers, rows) = read_table(&dir.path().join("out/profile.csv"));
    assert_eq!(headers, ["r", "h_f", "error"]);
    for row in rows.iter().filter(|r| r[0] > 0.0) {
        let r = row[0];
        let want = (2.0 / PI).sqrt() * r.powi(-2) * (r.sin() / r - r.cos());
        assert!((row[1] - want).abs() <= 1e-12, "r = {r}");
    }
    let meta = read_json(&dir.path().join("out/profile.json"));
    assert_eq!(meta["provenance"]["command"], "steady");
    let summary = read_json(&dir.path().join("out/steady.json"));
    assert!((summary["tail"]["exponent"].as_f64().unwrap() - 2.0).abs() < 0.1);
}

#[test]
fn steady_boltzmann_profile_is_gaussian() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), r#"{"distribution": {"kind": "boltzmann", "temperature": 0.8, "mu": 0.3}, "steady": {"r_max": 12.0, "points": 200}}"#);
    run(&cli(Command::Steady, &cfg, &dir.path().join("out"))).unwrap();
    let (_, rows) = read_table(&dir.path().join("out/profile.csv"));
    let (t, mu) = (0.8f64, 0.3f64);
    for row in &rows {
        let want = (mu / t).exp() * (t / 2.0).powf(1.5) * (-t * row[0] * row[0] / 4.0).exp();
        assert!((row[1] - want).abs() <= 1e-9 * (1.0 + want), "r = {}", row[0]);
    }
}

#[test]
fn custom_radial_tables_are_read_and_vanishing_ones_rejected() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("zero.csv"), "radius,value\n0,0\n0.5,0\n1,0\n").unwrap();
    let cfg = write_config(dir.path(), r#"{"distribution": {"kind": "custom_radial", "path": "zero.csv", "tail": "compact"}}"#);
    let err = run(&cli(Command::Steady, &cfg, &dir.path().join("out"))).unwrap_err();
    assert_eq!(err.exit_code(), 2);

    let table: String = (0..=40).map(|i| { let r = i as f64 * 0.05; format!("{r},{}\n", (-r * r).exp()) }).collect();
    std::fs::write(dir.path().join("bump.csv"), format!("rho,f2\n{table}")).unwrap();
    let cfg = write_config(dir.path(), r#"{"distribution": {"kind": "custom_radial", "path": "bump.csv", "tail": {"exponential": {"rate": 4.0}}}, "steady": {"r_max": 30.0, "points": 300}}"#);
    run(&cli(Command::Steady, &cfg, &dir.path().join("out2"))).unwrap();
    let echo = read_json(&dir.path().join("out2/resolved_config.json"));
    assert!(Path::new(echo["distribution"]["path"].as_str().unwrap()).is_absolute());
}

#[test]
fn response_without_interaction_has_unit_gap() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), r#"{"potential": {"kind": "point_mass", "weight": 0.0}, "response": {"tau_points": 9, "k_points": 6}, "steady": {"r_max": 60.0, "points": 1200}}"#);
    run(&cli(Command::Response, &cfg, &dir.path().join("out"))).unwrap();
    let report = read_json(&dir.path().join("out/criteria.json"));
    let gap = report["criteria"].as_array().unwrap().iter().find(|c| c["name"] == "GAP").unwrap();
    assert_eq!(gap["value"].as_f64().unwrap(), 1.0);
    let (_, rows) = read_table(&dir.path().join("out/log_residual.csv"));
    assert_eq!(rows.len(), 9 * 6);
    assert!(rows.iter().all(|r| r[5].is_finite()));
}

#[test]
fn point_mass_cs_constant_is_infinite() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), r#"{"response": {"tau_points": 3, "k_points": 3, "log_residual": false}, "steady": {"r_max": 60.0, "points": 1200}}"#);
    run(&cli(Command::Response, &cfg, &dir.path().join("out"))).unwrap();
    let report = read_json(&dir.path().join("out/criteria.json"));
    let cs = report["criteria"].as_array().unwrap().iter().find(|c| c["name"] == "CS").unwrap();
    // Non-finite numbers are written as null.
    assert!(cs["value"].is_null());
    assert_eq!(cs["satisfied"], false);
}

#[test]
fn simulate_without_perturbation_stays_steady() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), &SMALL_1D.replace(r#""extras": [{"kind": "random", "bandwidth": 1.0, "amplitude": 0.2, "seed": 1}]"#, r#""extras": []"#));
    run(&cli(Command::Simulate, &cfg, &dir.path().join("out"))).unwrap();
    let (_, rows) = read_table(&dir.path().join("out/density.csv"));
    assert!(rows.iter().all(|r| r[2].abs() <= 1e-12));
}

#[test]
fn outputs_are_deterministic_and_the_echo_reproduces_them() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMALL_1D);
    let (a, b, c) = (dir.path().join("a"), dir.path().join("b"), dir.path().join("c"));
    run(&cli(Command::Simulate, &cfg, &a)).unwrap();
    run(&cli(Command::Simulate, &cfg, &b)).unwrap();
    run(&cli(Command::Simulate, &a.join("resolved_config.json"), &c)).unwrap();
    for name in ["density.csv", "norms.csv"] {
        let first = std::fs::read(a.join(name)).unwrap();
        assert_eq!(first, std::fs::read(b.join(name)).unwrap(), "{name}");
        assert_eq!(first, std::fs::read(c.join(name)).unwrap(), "{name} from echo");
    }
}

#[test]
fn fixed_point_without_data_converges_at_once() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), &SMALL_1D.replace(r#""extras": [{"kind": "random", "bandwidth": 1.0, "amplitude": 0.2, "seed": 1}]"#, r#""extras": []"#));
    run(&cli(Command::Fixedpoint, &cfg, &dir.path().join("out"))).unwrap();
    let summary = read_json(&dir.path().join("out/fixedpoint.json"));
    assert_eq!(summary["iterations"], 1);
    assert_eq!(summary["status"], "converged");
}

#[test]
fn fixed_point_with_small_data_has_geometric_residuals() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMALL_1D);
    run(&cli(Command::Fixedpoint, &cfg, &dir.path().join("out"))).unwrap();
    let (_, rows) = read_table(&dir.path().join("out/residuals.csv"));
    assert!(rows.len() >= 2);
    assert!(rows[1..].iter().all(|r| r[2] < 1.0));
}

#[test]
fn fixed_point_rejects_a_closed_gap() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), &SMALL_1D.replace(r#""weight": 0.2"#, r#""weight": 40.0"#));
    let err = run(&cli(Command::Fixedpoint, &cfg, &dir.path().join("out"))).unwrap_err();
    assert_eq!(err.exit_code(), 3, "{err}");
}

#[test]
fn crosscheck_without_interaction_is_zero() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), &SMALL_1D.replace(r#""weight": 0.2"#, r#""weight": 0.0"#));
    run(&cli(Command::Crosscheck, &cfg, &dir.path().join("out"))).unwrap();
    let (_, rows) = read_table(&dir.path().join("out/crosscheck.csv"));
    assert_eq!(rows.len(), 2);
    assert!(rows.iter().all(|r| r[2] == 0.0 && r[3] == 0.0));
}

#[test]
fn binary_reports_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let bin = env!("CARGO_BIN_EXE_rfh");
    let bad = write_config(dir.path(), r#"{"grid": {"points": 16, "unknown": 1}}"#);
    let status = Process::new(bin).args(["steady", "--config"]).arg(&bad).arg("--out").arg(dir.path().join("o")).status().unwrap();
    assert_eq!(status.code(), Some(2));
    let coarse = write_config(dir.path(), r#"{"steady": {"r_max": 20.0, "points": 100}}"#);
    let status = Process::new(bin).args(["steady", "--config"]).arg(&coarse).arg("--out").arg(dir.path().join("o")).status().unwrap();
    assert_eq!(status.code(), Some(3), "too few tail nodes trips the fit guard");
    let good = write_config(dir.path(), r#"{"steady": {"r_max": 40.0, "points": 800}}"#);
    let output = Process::new(bin).args(["steady", "--threads", "1", "--config"]).arg(&good).arg("--out").arg(dir.path().join("o")).output().unwrap();
    assert_eq!(output.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&output.stdout).starts_with("steady:"));
}
