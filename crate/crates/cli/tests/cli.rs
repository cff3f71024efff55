use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn jumpmix(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_jumpmix"))
        .args(args)
        .current_dir(cwd)
        .output()
        .expect("binary runs")
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let path = dir.join(name);
    fs::write(&path, text).unwrap();
    path
}

fn mixing_config(dir: &Path, name: &str, bijection: &str, kmax: usize) -> PathBuf {
    write(
        dir,
        name,
        &format!(
            r#"{{
  "_what": "lazy cycle on 101 states",
  "chain": {{"family": "lazy_cycle", "n": 101}},
  "bijection": {bijection},
  "analysis": [{{"type": "mixing", "kmax": {kmax}}}],
  "output": {{"format": "csv", "path": "out_{name}"}}
}}"#
        ),
    )
}

fn parse_csv(text: &str) -> Vec<Vec<String>> {
    text.lines()
        .filter(|l| !l.starts_with('#'))
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

#[test]
fn mixing_run_has_one_row_per_step_and_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = mixing_config(dir.path(), "jump.json", r#"{"kind": "random", "seed": 1}"#, 100);

    let first = jumpmix(&["--config", cfg.to_str().unwrap(), "run"], dir.path());
    assert!(first.status.success(), "{}", stderr(&first));
    let path = dir.path().join("out_jump.json/01_mixing.csv");
    let bytes = fs::read(&path).unwrap();
    let rows = parse_csv(std::str::from_utf8(&bytes).unwrap());
    assert_eq!(rows[0], ["k", "worst_tv", "bound_spectral"]);
    assert_eq!(rows.len() - 1, 101);

    let second = jumpmix(&["--config", cfg.to_str().unwrap()], dir.path());
    assert!(second.status.success(), "{}", stderr(&second));
    assert_eq!(fs::read(&path).unwrap(), bytes);

    // thread count does not change the output
    let other = dir.path().join("threads");
    let third = jumpmix(
        &["--config", cfg.to_str().unwrap(), "--threads", "1", "--out", other.to_str().unwrap()],
        dir.path(),
    );
    assert!(third.status.success(), "{}", stderr(&third));
    assert_eq!(fs::read(other.join("01_mixing.csv")).unwrap(), bytes);
}

#[test]
fn missing_matrix_file_is_named() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "exp.json",
        r#"{
  "chain": {"family": "file", "path": "kernels/absent.csv"},
  "bijection": {"kind": "identity"},
  "analysis": [{"type": "mixing", "kmax": 5}],
  "output": {"path": "out"}
}"#,
    );
    let out = jumpmix(&["--config", cfg.to_str().unwrap()], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("kernels/absent.csv"), "{}", stderr(&out));
}

#[test]
fn config_errors_carry_line_numbers() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "exp.json",
        "{\n  \"chain\": {\"family\": \"lazy_cycle\", \"n\": 9},\n  \"bijection\": {\"kind\": \"identity\"},\n  \"analysis\": [\n    {\"type\": \"scan\", \"epsilon\": 0.1, \"trials\": 2, \"seed\": 1},\n    {\"type\": \"mixing\", \"kmax\": 3, \"start\": 0}\n  ],\n  \"output\": {\"path\": \"out\"}\n}\n",
    );
    let out = jumpmix(&["--config", cfg.to_str().unwrap()], dir.path());
    assert_eq!(out.status.code(), Some(2));
    let msg = stderr(&out);
    assert!(msg.contains("exp.json:6") && msg.contains("start"), "{msg}");
    // nothing runs before the whole config is checked
    assert!(!dir.path().join("out").exists());
}

#[test]
fn compare_plain_and_jumped_walks() {
    let dir = tempfile::tempdir().unwrap();
    let plain = mixing_config(dir.path(), "plain.json", r#"{"kind": "identity"}"#, 100);
    let jump = mixing_config(dir.path(), "jump.json", r#"{"kind": "random", "seed": 1}"#, 100);

    let out = jumpmix(&["compare", plain.to_str().unwrap(), jump.to_str().unwrap()], dir.path());
    assert!(out.status.success(), "{}", stderr(&out));
    let rows = parse_csv(&String::from_utf8(out.stdout).unwrap());
    assert_eq!(rows[0], ["k", "worst_tv_A", "worst_tv_B"]);
    assert_eq!(rows.len(), 102);
    for row in &rows[21..] {
        let a: f64 = row[1].parse().unwrap();
        let b: f64 = row[2].parse().unwrap();
        assert!(b < a, "k={}: {b} >= {a}", row[0]);
    }

    let same = jumpmix(&["compare", plain.to_str().unwrap(), plain.to_str().unwrap()], dir.path());
    for row in &parse_csv(&String::from_utf8(same.stdout).unwrap())[1..] {
        assert_eq!(row[1], row[2]);
    }

    let short = mixing_config(dir.path(), "short.json", r#"{"kind": "identity"}"#, 80);
    let bad = jumpmix(&["compare", plain.to_str().unwrap(), short.to_str().unwrap()], dir.path());
    assert_eq!(bad.status.code(), Some(2));
    assert!(stderr(&bad).contains("kmax"), "{}", stderr(&bad));
}

#[test]
fn scan_matches_golden_file() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("scan.csv");
    let res = jumpmix(
        &[
            "scan", "--chain", "lazy-cycle:12", "--epsilon", "0.1", "--trials", "200", "--seed", "7",
            "--out", out.to_str().unwrap(),
        ],
        dir.path(),
    );
    assert!(res.status.success(), "{}", stderr(&res));
    assert!(stderr(&res).contains("fraction_good=1"));
    let golden = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden/scan_n12_eps0.1_seed7.csv");
    assert_eq!(fs::read_to_string(out).unwrap(), fs::read_to_string(golden).unwrap());
}

#[test]
fn scan_with_no_trials_marks_fraction_undefined() {
    let dir = tempfile::tempdir().unwrap();
    let res = jumpmix(
        &["scan", "--chain", "lazy-cycle:8", "--epsilon", "0.1", "--trials", "0", "--seed", "1"],
        dir.path(),
    );
    assert!(res.status.success());
    assert_eq!(String::from_utf8_lossy(&res.stdout), "seed,epsilon_star,good\n");
    assert!(stderr(&res).contains("undefined"));
}

#[test]
fn exit_codes_for_capacity_and_failed_assumptions() {
    let dir = tempfile::tempdir().unwrap();
    let cap = jumpmix(
        &["expansion", "--chain", "lazy-cycle:30", "--bijection", "identity"],
        dir.path(),
    );
    assert_eq!(cap.status.code(), Some(3));
    assert!(stderr(&cap).contains("24"), "{}", stderr(&cap));

    // sampled mode is explicit and recorded
    let sampled = jumpmix(
        &[
            "expansion", "--chain", "lazy-cycle:31", "--bijection", "doubling", "--sampled", "50",
            "--seed", "3",
        ],
        dir.path(),
    );
    assert!(sampled.status.success(), "{}", stderr(&sampled));
    assert!(String::from_utf8(sampled.stdout).unwrap().contains("\"mode\": \"sampled\""));

    write(dir.path(), "split.csv", "0.5,0.5,0,0\n0.5,0.5,0,0\n0,0,0.5,0.5\n0,0,0.5,0.5\n");
    let split = jumpmix(&["validate", "--chain", "file:split.csv"], dir.path());
    assert_eq!(split.status.code(), Some(4));
    assert!(String::from_utf8(split.stdout).unwrap().contains("\"all_passed\": false"));

    let bad_bij = jumpmix(&["mix", "--chain", "lazy-cycle:8", "--bijection", "doubling", "--kmax", "3"], dir.path());
    assert_eq!(bad_bij.status.code(), Some(2));
}

#[test]
fn hof_spec_files() {
    let dir = tempfile::tempdir().unwrap();
    let good = write(
        dir.path(),
        "cube.json",
        r#"{"base_n": 5, "order": 2, "builtin": "cube_plus_rest",
            "base_kernel": {"family": "lazy_cycle", "n": 5}}"#,
    );
    let out = jumpmix(&["hof", good.to_str().unwrap()], dir.path());
    assert!(out.status.success(), "{}", stderr(&out));
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["states"], 25);
    assert_eq!(report["verification"]["ergodic"], true);
    assert_eq!(report["verification"]["uniform_stationary"], true);

    let table: Vec<usize> = (0..25).map(|i| ((i / 5) * (i / 5) + i % 5) % 5).collect();
    fs::write(dir.path().join("p5.csv"), jumpmix_matrix_csv()).unwrap();
    let bad = write(
        dir.path(),
        "square.json",
        &format!(r#"{{"base_n": 5, "order": 2, "table": {table:?}, "base_kernel": "p5.csv"}}"#),
    );
    let out = jumpmix(&["hof", bad.to_str().unwrap()], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("x = 2 and x = 3"), "{}", stderr(&out));
}

fn jumpmix_matrix_csv() -> String {
    let third = 1.0 / 3.0;
    (0..5)
        .map(|i| {
            (0..5)
                .map(|j| {
                    let d = (i + 5 - j) % 5;
                    if d == 0 || d == 1 || d == 4 { third.to_string() } else { "0".into() }
                })
                .collect::<Vec<_>>()
                .join(",")
        })
        .collect::<Vec<_>>()
        .join("\n")
}
