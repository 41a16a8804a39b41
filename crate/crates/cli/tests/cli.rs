use std::f64::consts::PI;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use jsonschema::JSONSchema;
use serde_json::Value;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_ltlab"));
    c.env_remove("LTLAB_BUDGET");
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn crate_path(rel: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join(rel)
}

fn config(name: &str) -> String {
    crate_path(&format!("configs/{name}")).display().to_string()
}

fn schema(name: &str) -> JSONSchema {
    let text = std::fs::read_to_string(crate_path(&format!("schema/{name}"))).unwrap();
    JSONSchema::compile(&serde_json::from_str(&text).unwrap()).expect("schema compiles")
}

fn assert_valid(s: &JSONSchema, v: &Value) {
    if let Err(errors) = s.validate(v) {
        let msgs: Vec<String> = errors.map(|e| format!("{e} at {}", e.instance_path)).collect();
        panic!("schema violations: {msgs:?}");
    }
}

/// CSV body as rows of string cells, header first.
fn csv_rows(text: &str) -> Vec<Vec<String>> {
    let mut r = csv::ReaderBuilder::new().has_headers(false).from_reader(text.as_bytes());
    r.records().map(|rec| rec.unwrap().iter().map(str::to_string).collect()).collect()
}

fn read_json(p: &Path) -> Value {
    serde_json::from_slice(&std::fs::read(p).unwrap()).unwrap()
}

fn result(report: &Value, key: &str) -> f64 {
    report["results"][key].as_f64().unwrap_or_else(|| panic!("missing {key}"))
}

#[test]
fn constants_for_three_dimensions() {
    let o = run(&["constants", "--d", "1..3", "--q", "1"]);
    assert_eq!(code(&o), 0);
    let rows = csv_rows(&stdout(&o));
    assert_eq!(rows[0], ["d", "q", "k_sc", "l_sc", "rho0", "duality_residual"]);
    assert_eq!(rows.len(), 4);
    for r in &rows[1..] {
        assert!(r[5].parse::<f64>().unwrap() < 1e-12);
    }
    assert_eq!(rows[1][4].parse::<f64>().unwrap(), 1.0 / PI);
}

#[test]
fn constants_empty_range_and_bad_q() {
    let o = run(&["constants", "--d", "3..1"]);
    assert_eq!(code(&o), 0);
    assert_eq!(csv_rows(&stdout(&o)).len(), 1);
    assert_eq!(code(&run(&["constants", "--q", "0"])), 2);
    assert_eq!(code(&run(&["constants", "--d", "x"])), 2);
}

#[test]
fn response_psi_three_dimensions() {
    let o = run(&["response", "psi", "--d", "3", "--k", "0,1,2,3"]);
    assert_eq!(code(&o), 0);
    let rows = csv_rows(&stdout(&o));
    assert_eq!(rows[0], ["k", "value", "abs_error", "flag"]);
    assert_eq!(rows.len(), 5);
    let v0: f64 = rows[1][1].parse().unwrap();
    assert!((v0 - 1.0 / (8.0 * PI * PI)).abs() < 1e-10);
    assert_eq!(rows[3][3], "infinite_derivative");
}

#[test]
fn response_psi_one_dimension_flags_divergence() {
    let o = run(&["response", "psi", "--d", "1", "--grid", "0:4:5"]);
    assert_eq!(code(&o), 0);
    let rows = csv_rows(&stdout(&o));
    let at2 = rows.iter().find(|r| r[0] == "2.0").unwrap();
    assert_eq!(at2[1], "");
    assert_eq!(at2[3], "log_divergence");
}

#[test]
fn response_phi_maximum_and_bad_dimension() {
    let o = run(&["response", "phi", "--d", "3", "--k", "0"]);
    assert_eq!(code(&o), 0);
    let v: f64 = csv_rows(&stdout(&o))[1][1].parse().unwrap();
    assert!((v - PI * PI).abs() < 1e-6);
    assert_eq!(code(&run(&["response", "phi", "--d", "0", "--k", "1"])), 2);
    assert_eq!(code(&run(&["response", "phi", "--k", "1"])), 2);
    assert_eq!(code(&run(&["response", "weight1d", "--d", "2", "--k", "1"])), 2);
}

#[test]
fn response_writes_csv_and_plot_data() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = run(&["--out", out, "response", "weight1d", "--k", "0.5,1.5", "--weight", "potential"]);
    assert_eq!(code(&o), 0);
    assert!(o.stdout.is_empty());
    let csv = std::fs::read_to_string(dir.path().join("weight_potential_1d.csv")).unwrap();
    assert!(csv.starts_with("k,value,abs_error,flag\n"));
    let dat = std::fs::read_to_string(dir.path().join("weight_potential_1d.dat")).unwrap();
    assert!(dat.starts_with("# k value\n"));
    assert_eq!(dat.lines().count(), 3);
}

#[test]
fn box_run_zero_potential() {
    let o = run(&["--config", &config("box_zero.json"), "box-run"]);
    assert_eq!(code(&o), 0);
    let r: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(result(&r, "relative_energy"), 0.0);
    assert_eq!(r["passed"], true);
    assert_valid(&schema("report.schema.json"), &r);
}

#[test]
fn box_run_cosine_sample() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["--config", &config("box_cosine_d1.json"), "--out", dir.path().to_str().unwrap(), "box-run"]);
    assert_eq!(code(&o), 0);
    let r = read_json(&dir.path().join("report.json"));
    assert_valid(&schema("report.schema.json"), &r);
    assert!(result(&r, "relative_energy") < 0.0);
    assert!(r["results"]["trace_relation"]["deviation"].as_f64().unwrap() <= 1e-9);
    assert_eq!(r["seed"], 7);
    // the family is echoed in expanded form
    assert_eq!(r["config"]["potential"]["family"], "modes");
    assert_eq!(r["config"]["potential"]["modes"].as_array().unwrap().len(), 2);
    let density = std::fs::read_to_string(dir.path().join("density.csv")).unwrap();
    assert!(density.starts_with("x,rho\n"));
    assert!(dir.path().join("spectrum.dat").exists());
}

#[test]
fn box_run_degenerate_fermi_level() {
    let o = run(&["--config", &config("box_degenerate.json"), "box-run"]);
    assert_eq!(code(&o), 0);
    let r: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(r["authoritative"], false);
    let o = run(&["--strict", "--config", &config("box_degenerate.json"), "box-run"]);
    assert_eq!(code(&o), 4);
}

#[test]
fn box_run_error_exit_codes() {
    assert_eq!(code(&run(&["box-run"])), 2);
    assert_eq!(code(&run(&["--config", "/nonexistent/config.json", "box-run"])), 2);
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, r#"{"physics": {"d": 1, "mu": 1}, "bogus": 1}"#).unwrap();
    assert_eq!(code(&run(&["--config", bad.to_str().unwrap(), "box-run"])), 2);
    let small = dir.path().join("small.json");
    std::fs::write(
        &small,
        r#"{"physics": {"d": 1, "mu": 1}, "box": {"l": 40, "n_max": 2},
            "potential": {"family": "cosine", "amplitude": 0.1, "mode": [3]}}"#,
    )
    .unwrap();
    assert_eq!(code(&run(&["--config", small.to_str().unwrap(), "box-run"])), 3);
    let o = bin()
        .env("LTLAB_BUDGET", "1e9,16")
        .args(["--config", &config("box_cosine_d1.json"), "box-run"])
        .output()
        .unwrap();
    assert_eq!(code(&o), 3);
    assert_eq!(code(&run(&["--jobs", "0", "constants"])), 2);
}

#[test]
fn sample_configs_match_schema() {
    let s = schema("config.schema.json");
    let mut n = 0;
    for entry in std::fs::read_dir(crate_path("configs")).unwrap() {
        let p = entry.unwrap().path();
        assert_valid(&s, &read_json(&p));
        n += 1;
    }
    assert!(n >= 5);
    let bad: Value = serde_json::from_str(r#"{"potential": {"family": "zero", "amplitude": 1}}"#).unwrap();
    assert!(!s.is_valid(&bad));
}

#[test]
fn reports_are_byte_deterministic() {
    let args = ["--config", &config("box_cosine_d1.json"), "box-run"];
    assert_eq!(run(&args).stdout, run(&args).stdout);
    let jobs = ["--jobs", "3", "--config", &config("sweep_thermo.json"), "sweep", "thermo"];
    let serial = ["--config", &config("sweep_thermo.json"), "sweep", "thermo"];
    assert_eq!(run(&jobs).stdout, run(&serial).stdout);
}

#[test]
fn thermo_sweep_gaps_decrease() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["--config", &config("sweep_thermo.json"), "--out", dir.path().to_str().unwrap(), "sweep", "thermo"]);
    assert_eq!(code(&o), 0);
    let r = read_json(&dir.path().join("report.json"));
    assert_valid(&schema("report.schema.json"), &r);
    assert_eq!(r["command"], "sweep thermo");
    let rows = csv_rows(&std::fs::read_to_string(dir.path().join("levels.csv")).unwrap());
    let gap = rows[0].iter().position(|c| c == "gap").unwrap();
    let gaps: Vec<f64> = rows[2..].iter().map(|r| r[gap].parse().unwrap()).collect();
    assert_eq!(gaps.len(), 3);
    assert!(gaps.windows(2).all(|w| w[1] < w[0]), "{gaps:?}");
    assert!(dir.path().join("thermo_energy.dat").exists());
}

#[test]
fn peierls_verdicts_by_dimension() {
    let o = run(&["sweep", "peierls"]);
    assert_eq!(code(&o), 0);
    let r: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(r["results"]["summary"]["verdict"], "divergent");
    let o = run(&["--config", &config("sweep_peierls_d2.json"), "sweep", "peierls"]);
    assert_eq!(code(&o), 0);
    let r: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(r["results"]["summary"]["verdict"], "bounded");
}

#[test]
fn rumin_sweep_reports_khat() {
    let o = run(&["sweep", "rumin"]);
    assert_eq!(code(&o), 0);
    let r: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_valid(&schema("report.schema.json"), &r);
    let levels = r["results"]["levels"].as_array().unwrap();
    let k3 = levels[2]["khat"].as_f64().unwrap();
    assert!(k3 > 0.0 && k3 <= levels[2]["k_sc"].as_f64().unwrap());
    assert!(r["results"]["summary"]["max_asymptotic_deviation"].as_f64().unwrap() < 0.01);
}

#[test]
fn rumin_and_matrix_oracle_reports() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = run(&["--out", out, "rumin", "--d", "2", "--points", "50"]);
    assert_eq!(code(&o), 0);
    assert!(std::fs::read_to_string(dir.path().join("rumin.csv")).unwrap().starts_with("rho,r,delta_t1,ratio\n"));
    assert_valid(&schema("report.schema.json"), &read_json(&dir.path().join("rumin.json")));
    let o = run(&["--seed", "5", "matrix-oracle", "--pairs", "20", "--samples", "50"]);
    assert_eq!(code(&o), 0);
    let r: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_valid(&schema("report.schema.json"), &r);
    assert_eq!(r["seed"], 5);
    assert_eq!(r["passed"], true);
}

#[test]
fn accept_subset_and_fault_injection() {
    let o = run(&["accept", "--only", "1,2"]);
    assert_eq!(code(&o), 0);
    let lines: Vec<String> = stdout(&o).lines().map(str::to_string).collect();
    assert_eq!(lines.len(), 2);
    assert!(lines[0].starts_with("criterion  1  PASS"));
    let o = run(&["accept", "--only", "1", "--inject-fault"]);
    assert_eq!(code(&o), 1);
    assert!(stdout(&o).contains("criterion  1  FAIL"));
}

#[test]
fn accept_report_is_deterministic() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for d in [&a, &b] {
        let o = run(&["--out", d.path().to_str().unwrap(), "accept", "--only", "1,2,3,7,15"]);
        assert_eq!(code(&o), 0);
    }
    let ra = std::fs::read(a.path().join("accept.json")).unwrap();
    assert_eq!(ra, std::fs::read(b.path().join("accept.json")).unwrap());
    assert_valid(&schema("report.schema.json"), &serde_json::from_slice(&ra).unwrap());
}
