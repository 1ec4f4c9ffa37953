use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_volkov-spin"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn csv(text: &str) -> (Vec<String>, Vec<Vec<String>>) {
    let mut lines = text.lines().filter(|l| !l.starts_with('#'));
    let header = lines.next().unwrap().split(',').map(String::from).collect();
    let rows = lines.map(|l| l.split(',').map(String::from).collect()).collect();
    (header, rows)
}

fn column(header: &[String], rows: &[Vec<String>], name: &str) -> Vec<String> {
    let i = header.iter().position(|h| h == name).unwrap_or_else(|| panic!("no column {name}"));
    rows.iter().map(|r| r[i].clone()).collect()
}

const SCAN: &str = r#"
operators = ["FW", "PAULI"]
classical_models = ["TBMT"]

[pulse]
e_star = 10.0
omega = 1.0
n_c = 0.5

[packet]
p = [0.0, 0.0, 0.0]
s = 1
dq = 0.01

[scan]
variable = "n_c"
values = [0.5, 1.0, 1.5]
"#;

fn write_config(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_string_lossy().into_owned()
}

#[test]
fn area_grid() {
    let o = run(&["area", "--step", "0.25"]);
    assert!(o.status.success());
    let (h, rows) = csv(&stdout(&o));
    assert_eq!(h, ["n_c", "s_e", "sigma_e", "unipolarity"]);
    assert_eq!(rows.len(), 8);
    let s: f64 = rows[1][1].parse().unwrap();
    assert!((s - 40.0 / 3.0).abs() < 1e-12);
}

#[test]
fn classical_half_cycle() {
    let o = run(&["classical", "--nc", "0.5", "--format", "json"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    let row = &v["rows"][0];
    assert!((row["tbmt_dsx"].as_f64().unwrap() - 0.048534150081).abs() < 1e-9);
    assert!(row["q_fw_dsx"].is_null());
    assert_eq!(v["columns"].as_array().unwrap().len(), row.as_object().unwrap().len());
}

#[test]
fn quantum_single_point() {
    let o = run(&["quantum", "--nc", "0.5", "--pz", "14", "--operator", "fw,pryce"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let (h, rows) = csv(&stdout(&o));
    let fw: f64 = column(&h, &rows, "q_fw_dsx")[0].parse().unwrap();
    let pr: f64 = column(&h, &rows, "q_pryce_dsx")[0].parse().unwrap();
    let tb: f64 = column(&h, &rows, "tbmt_dsx")[0].parse().unwrap();
    assert!((fw - pr).abs() < 1e-10);
    assert!((fw - tb).abs() < 1e-6);
    assert!(column(&h, &rows, "q_pauli_dsx")[0].is_empty());
}

#[test]
fn scan_is_ordered_and_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "scan.toml", SCAN);
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    for out in [&a, &b] {
        let o = run(&["scan", "--config", &cfg, "--out", out.to_str().unwrap(), "--threads", "2"]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    }
    let ta = std::fs::read(&a).unwrap();
    assert_eq!(ta, std::fs::read(&b).unwrap());
    let (h, rows) = csv(&String::from_utf8(ta).unwrap());
    assert_eq!(column(&h, &rows, "scan_value"), ["5e-1", "1e0", "1.5e0"]);
    let hashes = column(&h, &rows, "config_hash");
    assert!(hashes.iter().all(|x| x == &hashes[0] && x.len() == 16));
    let other = write_config(dir.path(), "other.toml", &SCAN.replace("e_star = 10.0", "e_star = 9.0"));
    let o = run(&["scan", "--config", &other]);
    let (h2, rows2) = csv(&stdout(&o));
    assert_ne!(column(&h2, &rows2, "config_hash")[0], hashes[0]);
}

#[test]
fn zero_field_scan_gives_zero_change() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "zero.toml", &SCAN.replace("e_star = 10.0", "e_star = 0.0"));
    let o = run(&["scan", "--config", &cfg]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let (h, rows) = csv(&stdout(&o));
    for name in ["tbmt_dsx", "tbmt_dsz", "q_fw_dsx", "q_fw_dsz", "q_pauli_dsx", "q_pauli_dsz"] {
        for v in column(&h, &rows, name) {
            assert!(v.parse::<f64>().unwrap().abs() < 1e-12, "{name} = {v}");
        }
    }
}

#[test]
fn config_errors_name_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "typo.toml", &SCAN.replace("omega = 1.0", "omgea = 1.0"));
    let o = run(&["scan", "--config", &cfg]);
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("omgea"));

    let cfg = write_config(dir.path(), "range.toml", &SCAN.replace("[0.5, 1.0, 1.5]", "[0.5, 2.5]"));
    let o = run(&["scan", "--config", &cfg]);
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("n_c = 2.5"));

    let cfg = write_config(dir.path(), "ok.toml", &format!("allow_out_of_range = true\n{}", SCAN.replace("[0.5, 1.0, 1.5]", "[0.5, 2.5]")));
    let o = run(&["scan", "--config", &cfg]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(String::from_utf8_lossy(&o.stderr).contains("warning"));
}

#[test]
fn verify_reports_every_fast_criterion() {
    let o = run(&["verify", "--format", "json"]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    let crit = v["criteria"].as_array().unwrap();
    let ids: Vec<&str> = crit.iter().map(|c| c["id"].as_str().unwrap()).collect();
    assert_eq!(ids, ["1", "2", "4", "11"]);
    let all = crit.iter().all(|c| c["passed"].as_bool().unwrap());
    assert_eq!(o.status.code(), Some(if all { 0 } else { 2 }));
}
