use std::path::PathBuf;
use std::process::Command;

use envelope_vote::cli::{cli_main, EXIT_INVALID, EXIT_OK, EXIT_VIOLATION};
use envelope_vote::sim::{worked_example, RunReport, Scenario};
use envelope_vote::verification::PropertyReport;

fn run(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("envelope-vote").chain(args.iter().copied());
    let code = cli_main(argv, &mut out, &mut err);
    (
        code,
        String::from_utf8(out).unwrap(),
        String::from_utf8(err).unwrap(),
    )
}

fn scenario_path(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("scenarios")
        .join(name)
        .display()
        .to_string()
}

#[test]
fn example_command_prints_full_breakdown() {
    let (code, out, _) = run(&["paper-example"]);
    assert_eq!(code, EXIT_OK);
    let r = RunReport::from_json(out.trim()).unwrap();
    let a = 2.25;
    assert_eq!(r.selected_label, "A2");
    let e = &r.envelope_details[0];
    let want_r0 = [-3.0 * a, 0.0, 4.0 * a];
    let want_r1 = [3.0 * a, 0.0, -4.0 * a];
    for j in 0..3 {
        assert!((e.r0[j] - want_r0[j]).abs() < 1e-9);
        assert!((e.r1[j] - want_r1[j]).abs() < 1e-9);
    }
    let deposited: f64 = e.deposits.iter().sum();
    assert!((e.transfer - deposited).abs() < 1e-9);
}

#[test]
fn worked_example_file_matches_builtin() {
    let text = std::fs::read_to_string(scenario_path("worked_example.json")).unwrap();
    let s = Scenario::from_json(&text).unwrap();
    assert_eq!(s, worked_example());
    let (_, from_file, _) = run(&["run", &scenario_path("worked_example.json")]);
    let (_, builtin, _) = run(&["paper-example"]);
    assert_eq!(from_file, builtin);
}

#[test]
fn bundled_scenarios_run_clean() {
    for name in [
        "worked_example.json",
        "equilibrium.json",
        "sybil_split.json",
    ] {
        let (code, out, err) = run(&["run", &scenario_path(name), "--check"]);
        assert_eq!(code, EXIT_OK, "{name}: {err}");
        let r = RunReport::from_json(out.trim()).unwrap();
        assert!(r.properties.is_some());
    }
}

#[test]
fn invalid_input_exits_two_with_diagnostic() {
    let (code, out, err) = run(&["run", "missing.json"]);
    assert_eq!(code, EXIT_INVALID);
    assert!(out.is_empty());
    assert!(err.contains("missing.json"));

    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    for text in [
        "{not json",
        r#"{"m": 3, "omega": 10.0, "players": [{"valuations": [1.0, 2.0], "belief": {"p0": [0.5, 0.5], "p": 0.001}}]}"#,
        r#"{"m": 2, "omega": 10.0, "players": [{"valuations": [1.0, 20.0], "belief": {"p0": [0.5, 0.5], "p": 0.001}}]}"#,
        r#"{"m": 2, "omega": 10.0, "players": [{"valuations": [1.0, 2.0], "belief": {"p0": [0.5, 0.5], "p": 0.9}}]}"#,
        r#"{"m": 2, "omega": 10.0, "players": [], "unknown": true}"#,
    ] {
        std::fs::write(&bad, text).unwrap();
        let (code, _, err) = run(&["run", bad.to_str().unwrap()]);
        assert_eq!(code, EXIT_INVALID, "{text}");
        assert!(err.starts_with("error:"), "{err}");
    }

    for args in [
        &["verify", "--property", "bogus"][..],
        &["verify", "--property", "all", "--trials", "-3"],
        &["--no-such-flag"],
        &["generate", "--alternatives", "1"],
        &["generate", "--omega", "-5"],
        &["run", "a.json", "--format", "xml"],
    ] {
        let (code, _, err) = run(args);
        assert_eq!(code, EXIT_INVALID, "{args:?}");
        assert!(!err.is_empty());
    }
}

#[test]
fn verify_reports_violations_with_exit_one() {
    let (code, out, _) = run(&[
        "verify",
        "--property",
        "surplus",
        "--trials",
        "2000",
        "--seed",
        "42",
    ]);
    assert_eq!(code, EXIT_VIOLATION);
    let r: PropertyReport = serde_json::from_str(out.trim()).unwrap();
    assert!(r.violations > 0);
    assert!(!r.violation_seeds.is_empty());
    assert_eq!(r.root_seed, Some(42));
}

#[test]
fn verify_passing_property_exits_zero() {
    let (code, out, _) = run(&[
        "verify",
        "--property",
        "efficiency",
        "--trials",
        "300",
        "--seed",
        "1",
    ]);
    assert_eq!(code, EXIT_OK);
    assert_eq!(out.lines().count(), 1);
}

#[test]
fn verify_all_emits_one_report_per_line() {
    let (_, out, _) = run(&[
        "verify",
        "--property",
        "all",
        "--trials",
        "50",
        "--seed",
        "42",
    ]);
    let reports: Vec<PropertyReport> = out
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect();
    assert_eq!(reports.len(), 8);
    let (_, csv_out, _) = run(&[
        "verify",
        "--property",
        "all",
        "--trials",
        "50",
        "--seed",
        "42",
        "--format",
        "csv",
    ]);
    let mut rd = csv::Reader::from_reader(csv_out.as_bytes());
    let rows: Vec<_> = rd.records().map(|r| r.unwrap()).collect();
    assert_eq!(rows.len(), reports.len());
    for (row, r) in rows.iter().zip(&reports) {
        assert_eq!(&row[0], r.property);
        assert_eq!(row[2].parse::<u64>().unwrap(), r.violations);
        if let Some(m) = r.worst_margin {
            assert_eq!(row[3].parse::<f64>().unwrap(), m);
        }
    }
}

#[test]
fn outputs_are_byte_identical_across_runs() {
    for args in [
        &[
            "verify",
            "--property",
            "all",
            "--trials",
            "100",
            "--seed",
            "7",
        ][..],
        &["generate", "--count", "3", "--seed", "9"],
        &["paper-example", "--format", "csv"],
    ] {
        assert_eq!(run(args), run(args));
    }
}

#[test]
fn csv_and_json_carry_the_same_values() {
    let path = scenario_path("sybil_split.json");
    let (_, json, _) = run(&["run", &path]);
    let (_, csv_text, _) = run(&["run", &path, "--format", "csv"]);
    let r = RunReport::from_json(json.trim()).unwrap();
    let mut rd = csv::Reader::from_reader(csv_text.as_bytes());
    let header: Vec<String> = rd.headers().unwrap().iter().map(String::from).collect();
    let col = |name: &str| header.iter().position(|h| h == name).unwrap();
    let floats = |s: &str| -> Vec<f64> { s.split(';').map(|v| v.parse().unwrap()).collect() };
    let rows: Vec<_> = rd.records().map(|x| x.unwrap()).collect();
    assert_eq!(rows.len(), r.envelope_details.len());
    for (row, e) in rows.iter().zip(&r.envelope_details) {
        let p = &r.players[e.player];
        assert_eq!(&row[col("scenario_digest")], r.scenario_digest);
        assert_eq!(row[col("selected")].parse::<usize>().unwrap(), r.selected);
        assert_eq!(row[col("surplus")].parse::<f64>().unwrap(), r.surplus);
        assert_eq!(floats(&row[col("tallies")]), r.tallies);
        assert_eq!(floats(&row[col("deposits")]), e.deposits);
        assert_eq!(floats(&row[col("votes")]), e.votes);
        assert_eq!(floats(&row[col("r0")]), e.r0);
        assert_eq!(floats(&row[col("r1")]), e.r1);
        assert_eq!(floats(&row[col("t")]), e.t);
        assert_eq!(row[col("transfer")].parse::<f64>().unwrap(), e.transfer);
        assert_eq!(
            row[col("realized_utility")].parse::<f64>().unwrap(),
            p.realized_utility
        );
        assert_eq!(
            row[col("expected_utility")].parse::<f64>().ok(),
            p.expected_utility
        );
    }
}

#[test]
fn generate_writes_valid_scenarios() {
    let dir = tempfile::tempdir().unwrap();
    let (code, out, _) = run(&[
        "generate",
        "--players",
        "4",
        "--alternatives",
        "3",
        "--count",
        "5",
        "--seed",
        "11",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(code, EXIT_OK);
    let paths: Vec<&str> = out.lines().collect();
    assert_eq!(paths.len(), 5);
    for p in paths {
        let (code, _, err) = run(&["run", p]);
        assert_eq!(code, EXIT_OK, "{err}");
    }
    let (_, lines, _) = run(&["generate", "--count", "2", "--seed", "11"]);
    for l in lines.lines() {
        Scenario::from_json(l).unwrap();
    }
}

#[test]
fn binary_exit_codes() {
    let bin = env!("CARGO_BIN_EXE_envelope-vote");
    let status = Command::new(bin).arg("paper-example").output().unwrap();
    assert_eq!(status.status.code(), Some(0));
    let status = Command::new(bin)
        .args(["run", "missing.json"])
        .output()
        .unwrap();
    assert_eq!(status.status.code(), Some(2));
    assert!(!status.stderr.is_empty());
    let status = Command::new(bin)
        .args(["verify", "--property", "split-inequality", "--trials", "10"])
        .output()
        .unwrap();
    // the ratio identity part of this group never holds
    assert_eq!(status.status.code(), Some(1));
    let help = Command::new(bin).arg("--help").output().unwrap();
    assert_eq!(help.status.code(), Some(0));
}
