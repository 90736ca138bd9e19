use std::process::{Command, Output};

fn levels(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_levels"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn stderr(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).unwrap()
}

fn write_temp(contents: &str) -> tempfile::NamedTempFile {
    let mut file = tempfile::Builder::new().suffix(".sol").tempfile().unwrap();
    std::io::Write::write_all(&mut file, contents.as_bytes()).unwrap();
    file
}

fn csv_rows(text: &str) -> Vec<Vec<String>> {
    text.lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

#[test]
fn validate_classifies_dice_as_uncertain() {
    let out = levels(&["validate", "builtin:dice"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(
        stdout(&out),
        "dice: uncertain (opaque: level-3 subrelationships of R_1, R_2, R_3, R_4, R_5, R_6)\n"
    );
    let out = levels(&["validate", "builtin:gravitation"]);
    assert_eq!(stdout(&out), "gravitation: certain\n");
}

#[test]
fn validate_reports_violations_with_positions() {
    let file = write_temp(
        "structure s {\n  level 1 { rel R; }\n  level 2 { entity E of R; }\n  level 3 { rel X of R; }\n}\n",
    );
    let out = levels(&["validate", file.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stdout(&out).is_empty());
    let err = stderr(&out);
    assert!(err.contains(":4:17: error: X at level 3 claims parent R at level 1"), "{err}");
}

#[test]
fn validate_missing_file_is_an_io_error() {
    let out = levels(&["validate", "/definitely/not/here.sol"]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn prob_of_coin_heads() {
    let out = levels(&["prob", "builtin:coin", "--target", "E_h"]);
    assert_eq!(out.status.code(), Some(0));
    let json: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(json["probability"], "1/2");
    assert_eq!(json["decimal"], 0.5);
    assert_eq!(json["via"], "denotation");
    assert_eq!(json["unknown"], false);
    assert_eq!(json["manifest"]["command"], "prob");
}

#[test]
fn prob_of_dice_face() {
    let out = levels(&["prob", "builtin:dice", "--target", "E_3"]);
    let json: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(json["probability"], "1/6");
    assert_eq!(json["decimal"], 0.166666666667);
    let out = levels(&["prob", "builtin:dice", "--target", "R_3"]);
    let json: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(json["via"], "direct");
}

#[test]
fn prob_without_denotation_fails() {
    let out = levels(&["prob", "builtin:decision", "--target", "mind"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("no denotation"));
    assert!(stdout(&out).is_empty());
}

#[test]
fn prob_unknown_is_not_an_error() {
    let file = write_temp("structure s { level 1 { rel R [opaque]; } }");
    let out = levels(&["prob", file.path().to_str().unwrap(), "--target", "R"]);
    assert_eq!(out.status.code(), Some(0));
    let json: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(json["unknown"], true);
    assert!(json["probability"].is_null());
}

#[test]
fn prob_needs_qualification_when_ambiguous() {
    let out = levels(&["prob", "builtin:bertrand-pair", "--target", "E_y"]);
    assert_eq!(out.status.code(), Some(2));
    let out = levels(&["prob", "builtin:bertrand-pair", "--target", "S_1.E_y"]);
    let json: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(json["probability"], "1/2");
}

#[test]
fn bertrand_report_shape() {
    let out = levels(&["bertrand", "--trials", "1000000", "--seed", "42"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.starts_with("# manifest: {\"command\":\"bertrand\""));
    assert!(text.contains("\nmethod,estimate,expected,abs_error\n"));
    let rows = csv_rows(&text);
    assert_eq!(rows.len(), 2);
    assert_eq!(rows[0][2], "0.5");
    assert_eq!(rows[1][2], "0.333333333333");
    let first: f64 = rows[0][1].parse().unwrap();
    let second: f64 = rows[1][1].parse().unwrap();
    assert!((first - 0.5).abs() < 0.0015);
    assert!((second - 1.0 / 3.0).abs() < 0.0015);
    assert!((first - second).abs() > 0.1);
}

#[test]
fn bertrand_single_trial() {
    let out = levels(&["bertrand", "--trials", "1"]);
    for row in csv_rows(&stdout(&out)) {
        assert!(row[1] == "0" || row[1] == "1", "{row:?}");
    }
}

#[test]
fn usage_errors_exit_4() {
    assert_eq!(levels(&["bertrand", "--trials", "0"]).status.code(), Some(4));
    assert_eq!(levels(&["bertrand"]).status.code(), Some(4));
    assert_eq!(levels(&["bertrand", "--trials", "x"]).status.code(), Some(4));
    assert_eq!(
        levels(&["simulate", "builtin:dice", "--group", "faces", "--trials", "0"]).status.code(),
        Some(4)
    );
    assert_eq!(levels(&["frobnicate"]).status.code(), Some(4));
    assert_eq!(
        levels(&["converge", "--p", "1/2", "--sizes", "10", "--reps", "5"]).status.code(),
        Some(4)
    );
    assert_eq!(levels(&["--help"]).status.code(), Some(0));
}

#[test]
fn simulate_dice_faces() {
    let out = levels(&[
        "simulate", "builtin:dice", "--group", "faces", "--trials", "600000", "--seed", "5",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.lines().nth(1) == Some("relation,trials,occurrences,relative"));
    let rows = csv_rows(&text);
    assert_eq!(rows.len(), 6);
    let total: u64 = rows.iter().map(|r| r[2].parse::<u64>().unwrap()).sum();
    assert_eq!(total, 600_000);
    for r in &rows {
        let f: f64 = r[3].parse().unwrap();
        assert!((f - 1.0 / 6.0).abs() < 0.003, "{r:?}");
    }
}

#[test]
fn simulate_unnormalized_group_is_a_domain_error() {
    let file = write_temp(
        "structure s { level 1 { rel R; } level 2 { rel A of R [alt=g]; rel B of R [alt=g]; } }",
    );
    let out = levels(&[
        "simulate", file.path().to_str().unwrap(), "--group", "g", "--trials", "10",
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn converge_rows_ascend_and_shrink() {
    let out = levels(&[
        "converge", "--p", "1/2", "--sizes", "400,10000", "--reps", "100", "--seed", "1",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let rows = csv_rows(&stdout(&out));
    assert_eq!(rows[0][0], "400");
    assert_eq!(rows[1][0], "10000");
    let small: f64 = rows[0][1].parse().unwrap();
    let large: f64 = rows[1][1].parse().unwrap();
    assert!((3.5..=7.0).contains(&(small / large)));
}

#[test]
fn converge_degenerate_probability() {
    for p in ["0", "1"] {
        let out = levels(&["converge", "--p", p, "--sizes", "400", "--reps", "100"]);
        assert_eq!(out.status.code(), Some(2), "p = {p}");
    }
}

#[test]
fn builtin_sources_print() {
    let out = levels(&["builtin", "coin"]);
    assert!(stdout(&out).contains("structure coin {"));
    assert_eq!(levels(&["builtin", "nope"]).status.code(), Some(4));
}
