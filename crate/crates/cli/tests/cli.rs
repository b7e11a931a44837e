use std::f64::consts::PI;
use std::path::Path;
use std::process::{Command, Output};

use rotdecoh::coefficients::nonvanishing_keys;
use rotdecoh::rates::Environment;

fn rotdecoh(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rotdecoh"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn rows(csv: &str) -> Vec<Vec<String>> {
    csv.lines().map(|l| l.split(',').map(str::to_string).collect()).collect()
}

fn write(dir: &Path, name: &str, body: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, body).unwrap();
    p.to_str().unwrap().to_string()
}

#[test]
fn small_grid_writes_header_and_rows() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("g.csv");
    let o = rotdecoh(&["grid", "--grid", "omega:0.5:1.5:2,z:1e-10:1e-9:2", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(o.stdout.is_empty());
    let r = rows(&std::fs::read_to_string(&out).unwrap());
    assert_eq!(r[0], ["omega", "z", "z_dimensionless", "ratio"]);
    assert_eq!(r.len(), 5);
    assert_eq!(r[1][0].parse::<f64>().unwrap(), 0.5);
    assert_eq!(r[2][1].parse::<f64>().unwrap(), 1e-9);
}

#[test]
fn zero_angle_gives_zero_rotational_rate() {
    let o = rotdecoh(&["rate", "--preset", "dipole", "--omega-rad", "0"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let r = rows(&stdout(&o));
    assert_eq!(r[1][0], "rotational");
    assert_eq!(r[1][3].parse::<f64>().unwrap(), 0.0);
    assert_eq!(r[2][0], "translational");
    assert!(r[2][3].parse::<f64>().unwrap() > 0.0);
}

#[test]
fn default_grid_spans_conventional_ranges() {
    let o = rotdecoh(&["grid", "--temperature-K", "1e-4"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let r = rows(&stdout(&o));
    assert_eq!(r.len(), 1 + 100 * 100);
    let env = Environment::new(1e14, 1e-26, 1e-4).unwrap();
    let num = |i: usize, j: usize| r[i][j].parse::<f64>().unwrap();
    for i in 1..r.len() {
        assert!(num(i, 0) > 0.0 && num(i, 0) < 2.0 * PI);
    }
    assert_eq!(num(1, 1), 1e-15);
    assert_eq!(num(100, 1), 0.3);
    assert!((num(1, 2) - 1e-15 / env.thermal_length()).abs() <= 1e-15 * num(1, 2));
    assert!((num(100, 2) - 0.3 / env.thermal_length()).abs() <= 1e-15 * num(100, 2));
}

#[test]
fn validation_errors_exit_one_and_name_the_source() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "bad.cfg", "command = rate\n# comment\ntemperature_K = -1\n");
    let o = rotdecoh(&["--config", &cfg]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("line 3"), "{}", stderr(&o));

    let o = rotdecoh(&["rate", "--gas-mass-kg", "0"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("--gas-mass-kg"), "{}", stderr(&o));

    let cfg = write(dir.path(), "unknown.cfg", "command = rate\ntemperature = 3\n");
    let o = rotdecoh(&["--config", &cfg]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("unknown key"), "{}", stderr(&o));

    let o = rotdecoh(&["grid", "--grid", "omega:2:1:4"]);
    assert_eq!(o.status.code(), Some(1));
    let o = rotdecoh(&["ratio", "--z-m", "0"]);
    assert_eq!(o.status.code(), Some(1), "{}", stderr(&o));
}

#[test]
fn flags_override_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "r.cfg", "command = ratio\ntemperature_K = 4\nz_m = 1e-8\n");
    let a = rows(&stdout(&rotdecoh(&["--config", &cfg])));
    let b = rows(&stdout(&rotdecoh(&["--config", &cfg, "--temperature-K", "16"])));
    assert_eq!(a[1][0].parse::<f64>().unwrap(), 4.0);
    assert_eq!(b[1][0].parse::<f64>().unwrap(), 16.0);
    // dipole ratio ∝ 1/T
    let (ra, rb) = (a[1][4].parse::<f64>().unwrap(), b[1][4].parse::<f64>().unwrap());
    assert!((ra / rb - 4.0).abs() < 1e-12);
}

#[test]
fn output_is_deterministic() {
    for args in [
        &["grid", "--grid", "omega:0.1:6:7,z:1e-12:1e-2:9,T:1e-4:100:3", "--preset", "quadrupole"][..],
        &["coeffs", "--omega-rad", "1.234", "--coeff-lmax", "6"][..],
    ] {
        let a = rotdecoh(args);
        let b = rotdecoh(args);
        assert_eq!(a.status.code(), Some(0), "{}", stderr(&a));
        assert_eq!(a.stdout, b.stdout);
    }
}

#[test]
fn json_output_parses() {
    let o = rotdecoh(&["rate", "--format", "json", "--preset", "quadrupole", "--z-m", "1e-6"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let reports = v.as_array().unwrap();
    assert_eq!(reports.len(), 2);
    assert!(reports[0]["lambda"].as_f64().unwrap() > 0.0);
    // k z far above 0.1 at 100 K
    assert!(reports[1]["warning"].as_str().unwrap().contains("short-distance"));
}

#[test]
fn coeffs_dump_lists_every_nonvanishing_index() {
    let o = rotdecoh(&["coeffs", "--preset", "quadrupole", "--coeff-lmax", "5"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let r = rows(&stdout(&o));
    assert_eq!(r[0], ["l", "m", "l'", "m'", "l''", "m''", "Re G", "Im G", "Re R", "Im R"]);
    let expect: usize = (-2..=2).map(|m| nonvanishing_keys(5, 2, m).len()).sum();
    assert_eq!(r.len() - 1, expect);
    // 17 significant digits
    assert_eq!(r[1][6].split('e').next().unwrap().trim_start_matches('-').len(), 18);
}

#[test]
fn terms_file_matches_inline_terms() {
    let dir = tempfile::tempdir().unwrap();
    let file = write(
        dir.path(),
        "t.csv",
        "l,m,amplitude_re,amplitude_im,exponent,cutoff_m\n1,-1,1e-30,0,3,0\n1,1,-1e-30,0,3,0\n",
    );
    let args = ["rate", "--temperature-K", "1"];
    let a = rotdecoh(&[&args[..], &["--terms-file", &file]].concat());
    let b = rotdecoh(&[&args[..], &["--term", "1,-1,1e-30,0,3,0", "--term", "1,1,-1e-30,0,3,0"]].concat());
    assert_eq!(a.status.code(), Some(0), "{}", stderr(&a));
    assert_eq!(a.stdout, b.stdout);

    let bad = write(dir.path(), "bad.csv", "l,m,amplitude_re,amplitude_im,exponent,cutoff_m\n1,3,1,0,3,0\n");
    let o = rotdecoh(&["rate", "--terms-file", &bad]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn unmet_series_tolerance_exits_two() {
    let o = rotdecoh(&["rate", "--radial-model", "published", "--lmax", "256"]);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
    assert!(stderr(&o).contains("tail"), "{}", stderr(&o));
}

#[test]
fn oracle_check_passes_and_fails() {
    let o = rotdecoh(&["oracle-check", "--temperature-K", "1e-4", "--omega-rad", "pi/2"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let r = rows(&stdout(&o));
    assert_eq!(r.len(), 4);
    assert!(r[1..].iter().all(|row| row[6] == "true"));

    // the published quadrupole radial forms sum to a different value
    let o = rotdecoh(&["oracle-check", "--preset", "quadrupole", "--temperature-K", "1e-4", "--radial-model", "published"]);
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
    assert!(rows(&stdout(&o))[1..].iter().any(|row| row[6] == "false"));
}
