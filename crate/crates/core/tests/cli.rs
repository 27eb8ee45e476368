use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn qfa(args: &[&str], seed_env: Option<&str>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_qfa"));
    cmd.args(args).env_remove("QFA_SEED");
    if let Some(s) = seed_env {
        cmd.env("QFA_SEED", s);
    }
    cmd.output().expect("run qfa")
}

fn text(p: &Path) -> String {
    fs::read_to_string(p).unwrap_or_else(|e| panic!("{}: {e}", p.display()))
}

fn csv_rows(p: &Path, header: &[&str]) -> Vec<csv::StringRecord> {
    let mut r = csv::Reader::from_path(p).unwrap();
    assert_eq!(r.headers().unwrap(), header, "{}", p.display());
    r.records().map(|x| x.unwrap()).collect()
}

#[test]
fn factor_writes_parseable_outputs_and_reproduces() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run");
    let o = out.to_str().unwrap();
    let args = [
        "factor", "--N", "35", "--n", "3", "--m", "3", "--reads", "200", "--sweeps", "500",
        "--seed", "4", "--out", o,
    ];
    let res = qfa(&args, None);
    assert!(
        res.status.success(),
        "{}",
        String::from_utf8_lossy(&res.stderr)
    );
    let stdout = String::from_utf8_lossy(&res.stdout);
    assert!(
        stdout.contains("factors: 5 x 7") || stdout.contains("factors: 7 x 5"),
        "{stdout}"
    );

    let samples = csv_rows(
        &out.join("samples.csv"),
        &["read_id", "energy", "occurrences", "spins"],
    );
    let side: serde_json::Value =
        serde_json::from_str(&text(&out.join("samples.csv.json"))).unwrap();
    let width = side["qubits"].as_array().unwrap().len();
    let mut reads = 0;
    for r in &samples {
        r[1].parse::<f64>().unwrap();
        reads += r[2].parse::<usize>().unwrap();
        assert_eq!(r[3].len(), width);
        assert!(r[3].chars().all(|c| c == '+' || c == '-'));
    }
    assert_eq!(reads, 200);
    assert_eq!(side["config"]["master_seed"], 4);
    for r in csv_rows(
        &out.join("excitations.csv"),
        &["kind", "col", "row", "count"],
    ) {
        assert!(&r[0] == "chain" || &r[0] == "cfa");
        r[3].parse::<usize>().unwrap();
    }
    let report: serde_json::Value = serde_json::from_str(&text(&out.join("report.json"))).unwrap();
    assert_eq!(report["N"], 35);
    assert!(report["success_reads"].as_u64().unwrap() > 0);
    let model = qfa_core::multiplier::ModelFile::from_json(&text(&out.join("model.json"))).unwrap();
    assert_eq!(model.target, Some(35));

    let before: Vec<Vec<u8>> = [
        "samples.csv",
        "excitations.csv",
        "report.json",
        "model.json",
    ]
    .iter()
    .map(|f| fs::read(out.join(f)).unwrap())
    .collect();
    let cfg = dir.path().join("cfg.json");
    fs::copy(out.join("run.json"), &cfg).unwrap();
    fs::remove_dir_all(&out).unwrap();
    let res = qfa(&["--config", cfg.to_str().unwrap(), "factor"], None);
    assert!(res.status.success());
    let after: Vec<Vec<u8>> = [
        "samples.csv",
        "excitations.csv",
        "report.json",
        "model.json",
    ]
    .iter()
    .map(|f| fs::read(out.join(f)).unwrap())
    .collect();
    assert_eq!(before, after);
}

#[test]
fn exit_code_reports_failure_to_factor() {
    let res = qfa(
        &[
            "factor", "--N", "143", "--n", "4", "--m", "4", "--reads", "2", "--sweeps", "1",
        ],
        None,
    );
    assert_eq!(res.status.code(), Some(1));
}

#[test]
fn env_seed_overrides_flag() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    let base = [
        "factor", "--N", "35", "--reads", "20", "--sweeps", "20", "--seed", "1", "--out",
    ];
    let mut args: Vec<&str> = base.to_vec();
    args.push(a.to_str().unwrap());
    qfa(&args, Some("77"));
    args.pop();
    args.push(b.to_str().unwrap());
    qfa(&args, None);
    let run: serde_json::Value = serde_json::from_str(&text(&a.join("run.json"))).unwrap();
    assert_eq!(run["seed"], 77);
    assert_ne!(
        fs::read(a.join("samples.csv")).unwrap(),
        fs::read(b.join("samples.csv")).unwrap()
    );
}

#[test]
fn usage_errors() {
    assert!(!qfa(&["synth", "--out", ""], None).status.success());
    assert!(!qfa(&["remedy", "--out", ""], None).status.success());
    let res = qfa(&["synth"], None);
    assert!(!res.status.success());
    assert!(String::from_utf8_lossy(&res.stderr).contains("needs --out"));
    let res = qfa(&["factor", "--reads", "5"], None);
    assert!(String::from_utf8_lossy(&res.stderr).contains("needs --N"));
    let res = qfa(&["factor", "--N", "300", "--n", "3", "--m", "3"], None);
    assert!(String::from_utf8_lossy(&res.stderr).contains("not representable"));
    let res = qfa(&["factor", "--N", "35", "--method", "qpu"], None);
    assert!(String::from_utf8_lossy(&res.stderr).contains("unknown method"));
}

#[test]
fn sweep_rows_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    let o = dir.path().to_str().unwrap();
    let res = qfa(
        &[
            "sweep",
            "--sizes",
            "4x4",
            "--instances",
            "3",
            "--reads",
            "30",
            "--sweeps",
            "50",
            "--out",
            o,
        ],
        None,
    );
    assert!(
        res.status.success(),
        "{}",
        String::from_utf8_lossy(&res.stderr)
    );
    let header = [
        "n",
        "m",
        "c",
        "N",
        "p",
        "q",
        "seed",
        "reads",
        "ground_reads",
        "no_broken_reads",
        "no_excited_reads",
    ];
    let rows = csv_rows(&dir.path().join("sweep.csv"), &header);
    assert_eq!(rows.len(), 3 * 3);
    for r in &rows {
        assert_eq!(&r[4], "13");
        let (n, p, q): (u64, u64, u64) = (
            r[3].parse().unwrap(),
            r[4].parse().unwrap(),
            r[5].parse().unwrap(),
        );
        assert_eq!(n, p * q);
    }
    let summary = csv_rows(
        &dir.path().join("summary.csv"),
        &["n", "m", "c", "metric", "min", "median", "max"],
    );
    assert_eq!(summary.len(), 3 * 3);
    for r in &summary {
        let (lo, mid, hi): (f64, f64, f64) = (
            r[4].parse().unwrap(),
            r[5].parse().unwrap(),
            r[6].parse().unwrap(),
        );
        assert!(lo <= mid && mid <= hi);
    }
    for entry in fs::read_dir(dir.path()).unwrap() {
        let p = entry.unwrap().path();
        if p.file_name()
            .unwrap()
            .to_string_lossy()
            .starts_with("excitations_")
        {
            csv_rows(&p, &["kind", "col", "row", "count"]);
        }
    }
}

#[test]
fn remedy_history_parses() {
    let dir = tempfile::tempdir().unwrap();
    let o = dir.path().to_str().unwrap();
    let res = qfa(
        &[
            "remedy",
            "--N",
            "143",
            "--n",
            "4",
            "--m",
            "4",
            "--reads",
            "10",
            "--sweeps",
            "10",
            "--threshold",
            "3",
            "--out",
            o,
        ],
        None,
    );
    assert!(
        res.status.success(),
        "{}",
        String::from_utf8_lossy(&res.stderr)
    );
    let r: qfa_core::remedy::RemedyResult =
        serde_json::from_str(&text(&dir.path().join("remedy.json"))).unwrap();
    assert!(r.iterations_used <= 3);
    assert_eq!(r.history.len(), r.iterations_used + 1);
    assert_eq!(r.threshold, 3);
}
