use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn gafuzz(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gafuzz")).args(args).output().unwrap()
}

fn grammar() -> String {
    format!("{}/grammars/json.g", env!("CARGO_MANIFEST_DIR"))
}

fn samples() -> String {
    format!("{}/samples", env!("CARGO_MANIFEST_DIR"))
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn a_short_campaign_writes_reports() {
    let out = tempfile::tempdir().unwrap();
    let o = gafuzz(&[
        "--experiment", "7", "--grammar", &grammar(), "--seconds", "0.3", "--runs", "2",
        "--pop-size", "10", "--seed", "1", "--out", path(out.path()),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let cov = fs::read_to_string(out.path().join("coverage_report.csv")).unwrap();
    assert!(cov.starts_with("run_id,target,metric,scope,value\n"));
    // 2 runs x 5 targets x 3 metrics x 4 scopes
    assert_eq!(cov.lines().count(), 1 + 2 * 5 * 3 * 4);
    let exc = fs::read_to_string(out.path().join("exceptions.csv")).unwrap();
    assert!(exc.starts_with("run_id,target,exception_type,location,triggered,first_trigger_generation\n"));
    assert!(out.path().join("summary.txt").exists());
    assert_eq!(fs::read_dir(out.path().join("run-2/inputs")).unwrap().count(), 10);
}

#[test]
fn config_file_sits_between_preset_and_flags() {
    let out = tempfile::tempdir().unwrap();
    let cfg = out.path().join("exp.cfg");
    fs::write(&cfg, "# small run\npop_size = 6\nseconds = 0.2\nruns = 3\ntargets = serializer\n").unwrap();
    let o = gafuzz(&[
        "--experiment", "custom", "--grammar", &grammar(), "--config", path(&cfg), "--runs", "1",
        "--out", path(out.path()),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let cov = fs::read_to_string(out.path().join("coverage_report.csv")).unwrap();
    assert_eq!(cov.lines().count(), 1 + 3 * 4, "one run, one target");
    assert!(cov.lines().skip(1).all(|l| l.starts_with("1,serializer,")));
    assert_eq!(fs::read_dir(out.path().join("run-1/inputs")).unwrap().count(), 6);
}

#[test]
fn usage_errors_exit_2() {
    let out = tempfile::tempdir().unwrap();
    let o = path(out.path());
    let g = grammar();
    let cases: [&[&str]; 5] = [
        &["--experiment", "7"],
        &["--experiment", "9", "--grammar", &g, "--out", o],
        &["--experiment", "1", "--grammar", &g, "--seconds", "0.1", "--out", o],
        &["--grammar", &g, "--runs", "0", "--out", o],
        &["--grammar", &g, "--external-cmd", "cat", "--out", o],
    ];
    for args in cases {
        assert_eq!(gafuzz(args).status.code(), Some(2), "{args:?}");
    }
}

#[test]
fn grammar_and_target_errors() {
    let out = tempfile::tempdir().unwrap();
    let bad = out.path().join("bad.g");
    fs::write(&bad, "start ::= missing ;\n").unwrap();
    let o = gafuzz(&["--grammar", path(&bad), "--out", path(out.path())]);
    assert_eq!(o.status.code(), Some(3));

    let dir = out.path().join("samples");
    fs::create_dir(&dir).unwrap();
    fs::write(dir.join("a.json"), "{not json").unwrap();
    let o = gafuzz(&[
        "--experiment", "1", "--grammar", &grammar(), "--samples", path(&dir), "--seconds", "0.1",
        "--out", path(out.path()),
    ]);
    assert_eq!(o.status.code(), Some(3));

    let o = gafuzz(&["--grammar", &grammar(), "--targets", "nope", "--out", path(out.path())]);
    assert_eq!(o.status.code(), Some(4));
}

#[test]
fn probabilistic_presets_read_the_samples_dir() {
    let out = tempfile::tempdir().unwrap();
    let o = gafuzz(&[
        "--experiment", "1", "--grammar", &grammar(), "--samples", &samples(), "--seconds", "0.2",
        "--runs", "1", "--pop-size", "8", "--out", path(out.path()),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let summary = fs::read_to_string(out.path().join("summary.txt")).unwrap();
    assert!(summary.starts_with("experiment 1"));
}

#[test]
fn external_program_as_target() {
    let out = tempfile::tempdir().unwrap();
    let o = gafuzz(&[
        "--grammar", &grammar(), "--seconds", "0.05", "--runs", "1", "--pop-size", "4",
        "--out", path(out.path()), "--external-branches", "2",
        "--external-cmd", "sh", "-c", r#"cat > /dev/null; echo B1 > "$COVERAGE_OUT""#,
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let cov = fs::read_to_string(out.path().join("coverage_report.csv")).unwrap();
    assert!(cov.contains("1,external,branch,cumulative,50.00"), "{cov}");
}
