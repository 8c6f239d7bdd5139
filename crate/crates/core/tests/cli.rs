use std::path::Path;
use std::process::Command;

fn run(args: &[&str], seed_env: Option<&str>) -> (i32, String, String) {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_misometry"));
    cmd.args(args).env_remove("MISOMETRY_SEED");
    if let Some(s) = seed_env {
        cmd.env("MISOMETRY_SEED", s);
    }
    let out = cmd.output().expect("binary runs");
    (
        out.status.code().unwrap_or(-1),
        String::from_utf8_lossy(&out.stdout).into(),
        String::from_utf8_lossy(&out.stderr).into(),
    )
}

fn write(dir: &Path, name: &str, body: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, body).unwrap();
    p.display().to_string()
}

#[test]
fn exit_codes() {
    assert_eq!(run(&["check-mp", "--preset", "jordan", "--m", "3", "--p", "2"], None).0, 0);
    let (code, out, _) = run(&["check-mp", "--preset", "jordan", "--m", "2", "--p", "2"], None);
    assert_eq!(code, 1);
    assert!(out.contains("\"witness\""));
    assert_eq!(run(&["check-mp", "--preset", "nope", "--m", "3", "--p", "2"], None).0, 2);
    assert_eq!(run(&["frobnicate"], None).0, 2);
    assert_eq!(run(&["check-mp", "--preset", "rot3", "--m", "3", "--p", "2", "--strategy", "hilbert"], None).0, 2);
    assert_eq!(
        run(&["check-mp", "--preset", "jordan", "--m", "3", "--p", "2", "--output", "/nonexistent/dir/r.json"], None).0,
        2
    );
}

#[test]
fn malformed_operator_reports_location() {
    let dir = tempfile::tempdir().unwrap();
    let bad = write(
        dir.path(),
        "bad.json",
        "{\"kind\": \"dense\",\n \"field\": \"real\",\n \"entries\": [[1, 2], [3]],\n \"norm_p\": 2 ",
    );
    let (code, _, err) = run(&["check-mp", "--operator", &bad, "--m", "1", "--p", "2"], None);
    assert_eq!(code, 2);
    assert!(err.contains("line"), "{err}");
    let good = write(
        dir.path(),
        "shift.json",
        r#"{"kind":"shift","weights":{"form":"list","values":[2,1.5],"tail":1},"space_p":"inf","truncation":64}"#,
    );
    assert_eq!(run(&["check-minf", "--operator", &good, "--m", "3"], None).0, 0);
}

#[test]
fn reports_are_reproducible() {
    let args = ["classify", "--preset", "jordan", "--samples", "50", "--seed", "11"];
    let (a, b) = (run(&args, None), run(&args, None));
    assert_eq!(a.1, b.1);
    assert!(a.1.contains("\"pairs\": [\n      [\n        3,\n        2\n      ]"), "{}", a.1);
    let with_env = run(&args, Some("99"));
    assert!(with_env.1.contains("\"seed\": 99"));
    assert_ne!(with_env.1, a.1);
    let report: serde_json::Value = serde_json::from_str(&a.1).unwrap();
    for key in ["seed", "tol", "horizon", "strategy"] {
        assert!(!report["params"][key].is_null(), "missing {key}");
    }
    assert_eq!(report["version"], env!("CARGO_PKG_VERSION"));
}

#[test]
fn markdown_and_sequences() {
    let (code, md, _) =
        run(&["classify", "--preset", "bayart-shift", "--truncation", "256", "--format", "markdown"], None);
    assert_eq!(code, 0);
    assert!(md.contains("| 1 | 2 | 2 |") && md.contains("## Levels observed"), "{md}");
    let dir = tempfile::tempdir().unwrap();
    let flat = write(dir.path(), "flat.json", "[3, 3, 3, 3, 3]");
    let (code, out, _) = run(&["sequence", "--input", &flat], None);
    assert_eq!(code, 0);
    assert!(out.contains("\"classification\": \"ConstantAll\""));
    let closed =
        write(dir.path(), "closed.json", r#"{"form":"closed","expr_id":"poly_power","coeffs":[1,0,1],"inv_power":2}"#);
    let (code, out, _) = run(&["sequence", "--input", &closed, "--m", "3", "--p", "2"], None);
    assert_eq!(code, 0);
    assert!(out.contains("\"m0\": 3"));
    assert_eq!(run(&["sequence", "--input", &closed, "--m", "2", "--p", "2"], None).0, 1);
}
