use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn codedmv(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_codedmv"))
        .current_dir(dir)
        .env_remove("CODEDMV_BUDGET")
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn design_prints_cyclic_grid() {
    let dir = tempfile::tempdir().unwrap();
    let o = codedmv(
        dir.path(),
        &["design", "cyclic-uncoded", "--n", "5", "--r", "3"],
    );
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.contains("A1  A2  A3  A4  A5\nA2  A3  A4  A5  A1\nA3  A4  A5  A1  A2\n"));
}

#[test]
fn underscore_flags_are_accepted() {
    let dir = tempfile::tempdir().unwrap();
    let o = codedmv(
        dir.path(),
        &[
            "design",
            "cyclic-coded-bottom",
            "--n",
            "5",
            "--r_u",
            "2",
            "--ell_c",
            "1",
        ],
    );
    assert!(o.status.success());
    assert!(stdout(&o).contains("C(3,4,5)"));
}

#[test]
fn design_verify_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let o = codedmv(
        dir.path(),
        &[
            "design",
            "cyclic-coded-top",
            "--n",
            "5",
            "--r-u",
            "2",
            "--ell-c",
            "1",
            "--out",
            "top.json",
        ],
    );
    assert!(o.status.success());
    let o = codedmv(dir.path(), &["verify", "top.json", "--out", "report.json"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let report: Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("report.json")).unwrap())
            .unwrap();
    assert_eq!(report["q_true"], 6);
    assert_eq!(report["resilience_true"], 3);
    assert_eq!(report["consistent"], true);
}

#[test]
fn bounds_reports_witness() {
    let dir = tempfile::tempdir().unwrap();
    let args = [
        "bounds",
        "--n",
        "15",
        "--ell-u",
        "3",
        "--ell-c",
        "1",
        "--delta",
        "15",
        "--r-u",
        "3",
        "--placement",
        "coded-top",
    ];
    let o = codedmv(dir.path(), &args);
    assert!(o.status.success());
    assert!(stdout(&o).contains("Q >= 18  (witness x=1, beta=4)"));
    let mut json_args = args.to_vec();
    json_args.extend(["--format", "json"]);
    let v: Value = serde_json::from_str(&stdout(&codedmv(dir.path(), &json_args))).unwrap();
    assert_eq!(v["witness"]["x"], 1);
    assert_eq!(v["witness"]["beta"], 4);
}

#[test]
fn usage_errors_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(codedmv(dir.path(), &["frobnicate"]).status.code(), Some(1));
    assert_eq!(
        codedmv(dir.path(), &["design", "cyclic-uncoded", "--n", "5"])
            .status
            .code(),
        Some(1)
    );
    assert_eq!(
        codedmv(
            dir.path(),
            &["design", "cyclic-uncoded", "--n", "3", "--r", "4"]
        )
        .status
        .code(),
        Some(1)
    );
}

fn write_config(dir: &Path) {
    for (name, args) in [
        ("u.json", vec!["cyclic-uncoded", "--r", "3"]),
        (
            "t.json",
            vec!["cyclic-coded-top", "--r-u", "2", "--ell-c", "1"],
        ),
    ] {
        let mut full = vec!["design"];
        full.extend(args);
        full.extend(["--n", "5", "--out", name]);
        assert!(codedmv(dir, &full).status.success());
    }
    std::fs::write(
        dir.join("exp.json"),
        r#"{"plans":[{"id":"uncoded","path":"u.json"},{"id":"top","path":"t.json"}],"trials":50,"seed":3}"#,
    )
    .unwrap();
}

#[test]
fn simulate_trials_zero_is_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    write_config(dir.path());
    let o = codedmv(dir.path(), &["simulate", "exp.json", "--trials", "0"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn simulate_writes_csv() {
    let dir = tempfile::tempdir().unwrap();
    write_config(dir.path());
    let o = codedmv(dir.path(), &["simulate", "exp.json", "--out", "runs.csv"]);
    assert!(o.status.success());
    let csv = std::fs::read_to_string(dir.path().join("runs.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(
        lines.next(),
        Some("plan_id,trial,finish_time,blocks_total,decode_ok")
    );
    assert_eq!(lines.count(), 100);
}

#[test]
fn budget_refusal_exits_three() {
    let dir = tempfile::tempdir().unwrap();
    codedmv(
        dir.path(),
        &[
            "design",
            "cyclic-uncoded",
            "--n",
            "9",
            "--r",
            "4",
            "--out",
            "p.json",
        ],
    );
    let o = codedmv(dir.path(), &["verify", "p.json", "--budget", "1000"]);
    assert_eq!(o.status.code(), Some(3));
    let o = Command::new(env!("CARGO_BIN_EXE_codedmv"))
        .current_dir(dir.path())
        .env("CODEDMV_BUDGET", "1000")
        .args(["verify", "p.json"])
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn decode_reconstructs_product() {
    let dir = tempfile::tempdir().unwrap();
    codedmv(
        dir.path(),
        &[
            "design",
            "cyclic-coded-bottom",
            "--n",
            "5",
            "--r-u",
            "2",
            "--ell-c",
            "1",
            "--out",
            "p.json",
        ],
    );
    let rows: Vec<String> = (0..11)
        .map(|i| {
            (0..4)
                .map(|j| ((i * 3 + j * 5) % 7).to_string())
                .collect::<Vec<_>>()
                .join(",")
        })
        .collect();
    std::fs::write(dir.path().join("a.csv"), rows.join("\n")).unwrap();
    std::fs::write(dir.path().join("x.txt"), "1 -1 2 0.5\n").unwrap();
    let o = codedmv(
        dir.path(),
        &[
            "decode",
            "--plan",
            "p.json",
            "--matrix",
            "a.csv",
            "--vector",
            "x.txt",
            "--state",
            "3,3,0,0,0",
            "--out",
            "y.txt",
        ],
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let y: Vec<f64> = std::fs::read_to_string(dir.path().join("y.txt"))
        .unwrap()
        .lines()
        .map(|l| l.parse().unwrap())
        .collect();
    for (i, v) in y.iter().enumerate() {
        let direct: f64 = (0..4)
            .map(|j| ((i * 3 + j * 5) % 7) as f64 * [1.0, -1.0, 2.0, 0.5][j])
            .sum();
        assert!((v - direct).abs() <= 1e-9 * direct.abs().max(1.0));
    }
    let o = codedmv(
        dir.path(),
        &[
            "decode",
            "--plan",
            "p.json",
            "--matrix",
            "a.csv",
            "--vector",
            "x.txt",
            "--state",
            "1,1,0,0,0",
        ],
    );
    assert_eq!(o.status.code(), Some(1));
}
