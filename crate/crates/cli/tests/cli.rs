use std::path::PathBuf;
use std::process::{Command, Output};

use rentsplit::scenario::{builtin, load_scenario};
use rentsplit::{Assignment, Mechanism, PriceVector, Rational};
use serde_json::Value;

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../fixtures")
        .join(name)
}

fn rentsplit(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rentsplit"))
        .args(args)
        .output()
        .expect("run rentsplit")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).expect("valid json")
}

fn rat(v: &Value) -> Rational {
    let n: i64 = v["num"].as_str().unwrap().parse().unwrap();
    let d: i64 = v["den"].as_str().unwrap().parse().unwrap();
    Rational::new(n, d)
}

#[test]
fn solve_baseline_fixture() {
    let out = rentsplit(&["solve", fixture("baseline.json").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.contains("R1 $9.20"), "{text}");
    assert!(text.contains("R5 $4.20"), "{text}");
    assert!(text.contains("Minimum utility: $0.80"), "{text}");
}

#[test]
fn solve_single_agent_charges_the_whole_rent() {
    let out = rentsplit(&["solve", fixture("single-agent.json").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("Studio $1200.00"));
}

#[test]
fn malformed_input_exits_2_with_a_line_number() {
    let out = rentsplit(&["solve", fixture("malformed.json").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("line 7"), "{}", stderr(&out));
    assert!(stdout(&out).is_empty());

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("broken.json");
    std::fs::write(&path, "{ \"name\": ").unwrap();
    assert_eq!(
        rentsplit(&["solve", path.to_str().unwrap()]).status.code(),
        Some(2)
    );
    assert_eq!(
        rentsplit(&["solve", "/definitely/not/here.json"])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn verify_exit_codes() {
    assert_eq!(
        rentsplit(&["verify", "--builtin", "baseline"])
            .status
            .code(),
        Some(0)
    );
    assert_eq!(
        rentsplit(&["verify", "--builtin", "failed-counter-attack"])
            .status
            .code(),
        Some(0)
    );
    let all = rentsplit(&["verify", "--all-builtin"]);
    assert_eq!(all.status.code(), Some(1));
    assert_eq!(stdout(&all).matches("verdict: mismatch").count(), 1);
    let missing = rentsplit(&["verify", fixture("no-expected.json").to_str().unwrap()]);
    assert_eq!(missing.status.code(), Some(2));
    assert!(stderr(&missing).contains("no expected outcome"));
    assert_eq!(
        rentsplit(&["verify", "--builtin", "no-such-scenario"])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn verify_json_reports_the_cost_minimization_gap() {
    let out = rentsplit(&[
        "verify",
        "--builtin",
        "cost-minimization",
        "--format",
        "json",
    ]);
    assert_eq!(out.status.code(), Some(1));
    let v = json(&out);
    let s = &v["scenarios"][0];
    assert_eq!(s["verdict"], "mismatch");
    assert_eq!(s["expected"]["envy_free"], true);
    assert_eq!(s["expected"]["maximin"], false);
    assert_eq!(rat(&s["computed"]["min_utility"]), Rational::new(8, 5));
    assert_eq!(rat(&s["expected"]["min_utility"]), Rational::integer(1));
}

#[test]
fn solve_json_round_trips_into_the_outcome() {
    let out = rentsplit(&[
        "solve",
        "--builtin",
        "failed-counter-attack",
        "--format",
        "json",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    let s = builtin("failed-counter-attack").unwrap();
    let inst = &s.instance;
    let pairs: Vec<(String, String)> = v["outcome"]["assignment"]
        .as_array()
        .unwrap()
        .iter()
        .map(|p| {
            (
                p["agent"].as_str().unwrap().to_string(),
                p["room"].as_str().unwrap().to_string(),
            )
        })
        .collect();
    let assignment =
        Assignment::from_labels(inst, pairs.iter().map(|(a, r)| (a.as_str(), r.as_str()))).unwrap();
    let prices: Vec<Rational> = v["outcome"]["prices"]
        .as_array()
        .unwrap()
        .iter()
        .map(|p| rat(&p["price"]))
        .collect();
    let prices = PriceVector::new(prices, inst.total_rent()).unwrap();
    let o = Mechanism::new().run(inst, &s.reported_matrix).unwrap();
    assert_eq!(assignment, o.assignment);
    assert_eq!(prices, o.prices);
    assert_eq!(rat(&v["total_rent"]), Rational::integer(36));
}

#[test]
fn csv_output_has_a_stable_header() {
    let out = rentsplit(&["solve", "--builtin", "baseline", "--format", "csv"]);
    let text = stdout(&out);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("agent,room,value,price,utility"));
    assert_eq!(lines.next(), Some("A,R5,5.00,4.20,0.80"));
    assert_eq!(text.lines().count(), 6);
}

#[test]
fn exclusionary_template_meets_its_objective() {
    let out = rentsplit(&[
        "manipulate",
        fixture("baseline.json").to_str().unwrap(),
        "--template",
        "exclusionary",
        "--coalition",
        "A,B,C",
        "--objective",
        "exclude:D,E@R1,R2,R3",
        "--format",
        "json",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let v = json(&out);
    assert_eq!(v["objective_satisfied"], true);
    let a = &v["reported"][0]["values"];
    let row: Vec<Rational> = a.as_array().unwrap().iter().map(rat).collect();
    assert_eq!(row, [15, 2, 1, 9, 9].map(Rational::integer));
}

#[test]
fn flatten_template_payments() {
    let out = rentsplit(&[
        "manipulate",
        fixture("baseline.json").to_str().unwrap(),
        "--template",
        "flatten",
        "--coalition",
        "D,E",
        "--format",
        "csv",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    // The maximin solution for the flattened profile charges 6.40, below the
    // 7.00 quoted alongside the reference table.
    assert!(text.contains("\nD,R1,9.20,R4,6.40,"), "{text}");
    assert!(text.contains("\nE,R3,8.20,R5,6.40,"), "{text}");
}

#[test]
fn defensive_template_on_reports_backfires() {
    let out = rentsplit(&[
        "manipulate",
        "--builtin",
        "exclusionary-collusion",
        "--on-reports",
        "--template",
        "defensive",
        "--coalition",
        "D,E",
        "--contested",
        "D:R1,R2;E:R2,R3",
        "--format",
        "json",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let v = json(&out);
    assert_eq!(v["objective_satisfied"], false);
    assert_eq!(v["baseline"], "reported");
    // D pays 9.60 instead of 5.20.
    assert_eq!(rat(&v["payment_delta"][3]), Rational::new(22, 5));
}

#[test]
fn manipulate_input_errors_exit_2() {
    let base = fixture("baseline.json");
    let base = base.to_str().unwrap();
    for args in [
        vec!["--template", "flatten", "--coalition", "Z"],
        vec![
            "--template",
            "flatten",
            "--coalition",
            "D,E",
            "--objective",
            "steal:D",
        ],
        vec!["--coalition", "D"],
        vec!["--template", "flatten", "--search", "--coalition", "D"],
        vec!["--search", "--coalition", "D", "--step", "5"],
        vec![
            "--template",
            "defensive",
            "--coalition",
            "D",
            "--contested",
            "D:R1",
        ],
    ] {
        let mut full = vec!["manipulate", base];
        full.extend(args.iter().copied());
        let out = rentsplit(&full);
        assert_eq!(out.status.code(), Some(2), "{args:?}: {}", stderr(&out));
    }
}

#[test]
fn oversized_search_exits_3() {
    let out = rentsplit(&[
        "manipulate",
        "--builtin",
        "baseline",
        "--search",
        "--coalition",
        "D",
        "--budget",
        "10",
    ]);
    assert_eq!(out.status.code(), Some(3));
    assert!(stderr(&out).contains("budget"));
}

#[test]
fn search_output_is_independent_of_jobs() {
    let run = |jobs: &str| {
        let out = rentsplit(&[
            "manipulate",
            "--builtin",
            "baseline",
            "--search",
            "--coalition",
            "D,E",
            "--step",
            "3",
            "--jobs",
            jobs,
            "--format",
            "json",
        ]);
        assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
        out.stdout
    };
    let one = run("1");
    assert_eq!(one, run("4"));
    assert_eq!(one, run("4"));
}

#[test]
fn table_has_five_blocks_and_one_mismatch() {
    let out = rentsplit(&["table"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    for header in [
        "Baseline: Honest Reporting",
        "Scenario 1: Exclusionary Collusion",
        "Scenario 2: Failed Counter-Attack",
        "Scenario 3: Benevolent Collusion",
        "Scenario 4: Cost Minimization",
    ] {
        assert!(text.lines().any(|l| l == header), "missing {header}");
    }
    assert_eq!(text.matches("verdict: mismatch").count(), 1);

    let v = json(&rentsplit(&["table", "--format", "json"]));
    let scenarios = v["scenarios"].as_array().unwrap();
    assert_eq!(scenarios.len(), 5);
    let mismatches = scenarios
        .iter()
        .filter(|s| s["verdict"] == "mismatch")
        .count();
    assert_eq!(mismatches, 1);

    let csv = stdout(&rentsplit(&["table", "--format", "csv"]));
    assert_eq!(csv.lines().count(), 26);
}

#[test]
fn identical_invocations_are_byte_identical() {
    for args in [
        vec!["table"],
        vec!["table", "--format", "json"],
        vec!["verify", "--all-builtin", "--format", "csv"],
    ] {
        assert_eq!(rentsplit(&args).stdout, rentsplit(&args).stdout);
    }
}

#[test]
fn export_matches_shipped_fixtures() {
    let dir = tempfile::tempdir().unwrap();
    let out = rentsplit(&["export", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    for id in ["baseline", "cost-minimization"] {
        let name = format!("{id}.json");
        let written = std::fs::read_to_string(dir.path().join(&name)).unwrap();
        let shipped = std::fs::read_to_string(fixture(&name)).unwrap();
        assert_eq!(written, shipped);
        assert_eq!(
            load_scenario(dir.path().join(&name)).unwrap(),
            builtin(id).unwrap()
        );
    }
}
