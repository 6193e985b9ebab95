use std::path::Path;
use std::process::{Command, Output};

use pucvsim::UniaxialCrystal;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_pucvsim"));
    c.env_remove("PUCVSIM_CRYSTAL_REGISTRY");
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn ok(args: &[&str]) -> String {
    let o = run(args);
    assert!(o.status.success(), "{args:?} failed: {}", stderr(&o));
    stdout(&o)
}

fn csv_rows(text: &str) -> Vec<Vec<String>> {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    r.records()
        .map(|rec| rec.unwrap().iter().map(str::to_string).collect())
        .collect()
}

#[test]
fn index_of_ordinary_wave() {
    assert_eq!(
        ok(&["index", "--crystal", "bbo", "--lambda", "500", "--pol", "o"]).trim(),
        "1.677361"
    );
}

#[test]
fn index_at_ninety_degrees_is_principal_extraordinary() {
    let printed = ok(&["index", "--lambda", "500", "--pol", "e", "--psi", "90"]);
    let expected = UniaxialCrystal::bbo().n_ext90(0.5).unwrap();
    assert_eq!(printed.trim(), format!("{expected:.6}"));
}

#[test]
fn index_out_of_window_fails_on_stderr() {
    let o = run(&["index", "--lambda", "100"]);
    assert!(!o.status.success());
    assert!(stdout(&o).is_empty());
    assert!(stderr(&o).contains("outside the validity window"));
}

#[test]
fn missing_flag_is_a_usage_error() {
    let o = run(&["index"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn rainbow_csv_starts_at_edge_and_matches_table_row() {
    let text = ok(&["rainbow", "--min-nm", "481", "--max-nm", "800", "--step-nm", "1"]);
    assert!(text.starts_with("lambda1_nm,theta1_deg_eq,theta1_deg_long,lambda2_nm,warning\n"));
    let rows = csv_rows(&text);
    assert_eq!(rows[0][0], "481.07");
    assert_eq!(rows[0][1], "0.00");
    let row600 = rows.iter().find(|r| r[0] == "600.00").unwrap();
    assert_eq!(&row600[1..4], ["42.42", "36.94", "221.45"]);
    let mut last = 0.0;
    for r in &rows {
        let theta: f64 = r[1].parse().unwrap();
        assert!(theta >= last);
        last = theta;
    }
}

#[test]
fn rainbow_json_and_csv_carry_the_same_numbers() {
    let args = ["rainbow", "--min-nm", "495", "--max-nm", "505", "--step-nm", "2.5"];
    let csv_text = ok(&args);
    let mut json_args = args.to_vec();
    json_args.extend(["--format", "json"]);
    let json: serde_json::Value = serde_json::from_str(&ok(&json_args)).unwrap();
    let rows = csv_rows(&csv_text);
    let records = json.as_array().unwrap();
    assert_eq!(rows.len(), records.len());
    for (r, j) in rows.iter().zip(records) {
        assert_eq!(r[0], format!("{:.2}", j["lambda1_nm"].as_f64().unwrap()));
        assert_eq!(r[1], format!("{:.2}", j["theta1_deg_eq"].as_f64().unwrap()));
        assert_eq!(r[2], format!("{:.2}", j["theta1_deg_long"].as_f64().unwrap()));
        assert_eq!(r[3], format!("{:.2}", j["lambda2_nm"].as_f64().unwrap()));
    }
    assert_eq!(records[2]["lambda1_nm"].as_f64().unwrap(), 500.0);
}

#[test]
fn output_is_deterministic_across_runs_and_modes() {
    let args = [
        "rainbow",
        "--min-nm",
        "481",
        "--max-nm",
        "600",
        "--step-nm",
        "0.5",
        "--format",
        "json",
    ];
    let a = ok(&args);
    let b = ok(&args);
    let mut seq = args.to_vec();
    seq.push("--sequential");
    assert_eq!(a, b);
    assert_eq!(a, ok(&seq));
    assert_eq!(ok(&["ratio-table"]), ok(&["ratio-table", "--sequential"]));
}

#[test]
fn empty_rainbow_is_an_error() {
    let o = run(&["rainbow", "--min-nm", "400", "--max-nm", "450", "--step-nm", "10"]);
    assert!(!o.status.success());
    assert!(stderr(&o).contains("no solvable"));
}

#[test]
fn ratio_table_matches_reference_within_tolerance() {
    let expected = [0.003, 0.011, 0.025, 0.059, 0.254, 0.221, 0.094, 0.065, 0.052, 0.045];
    let rows = csv_rows(&ok(&["ratio-table"]));
    assert_eq!(rows.len(), 10);
    for (r, e) in rows.iter().zip(expected) {
        let ratio: f64 = r[1].parse().unwrap();
        assert!((ratio - e).abs() <= 0.2 * e, "{r:?}");
        assert_eq!(r[1].split('.').nth(1).unwrap().len(), 3);
    }
}

#[test]
fn ratio_table_fine_grid_notes_degenerate_point() {
    let o = run(&["ratio-table", "--step-nm", "1"]);
    assert!(o.status.success());
    let rows = csv_rows(&stdout(&o));
    let r491 = rows.iter().find(|r| r[0] == "491.00").unwrap();
    assert_eq!(r491[1], "");
    assert!(stderr(&o).contains("near-degenerate"));
}

#[test]
fn align_reports_partner_laser() {
    let rows = csv_rows(&ok(&["align", "--lambda1", "500"]));
    assert_eq!(rows[0][1], "206.23");
    assert_eq!(rows[0][2], "e");
}

#[test]
fn rates_vanish_at_the_edge() {
    let json = |l: &str| -> serde_json::Value {
        serde_json::from_str(&ok(&["rates", "--lambda1", l, "--format", "json"])).unwrap()
    };
    let edge = json("481.07")["rate_arbitrary"].as_f64().unwrap();
    let peak = json("490");
    assert_eq!(peak["detectable_mode"], "one");
    assert_eq!(peak["method"], "closed_form");
    for key in [
        "lambda1_nm",
        "theta1_deg",
        "rate_arbitrary",
        "detectable_mode",
        "method",
        "warnings",
    ] {
        assert!(peak.get(key).is_some(), "{key}");
    }
    assert!(edge.abs() < 1e-4 * peak["rate_arbitrary"].as_f64().unwrap());
}

#[test]
fn degenerate_rate_names_the_excluded_regime() {
    let o = run(&["rates", "--lambda1", "491"]);
    assert!(!o.status.success());
    assert!(stderr(&o).contains("near-degenerate phase matching"));
    let o = run(&["--process", "pdc", "--pump-pol", "e", "rates", "--lambda1", "702"]);
    assert!(!o.status.success());
    assert!(stderr(&o).contains("near-degenerate phase matching"));
}

#[test]
fn down_conversion_reference_rate() {
    let out = ok(&[
        "--process",
        "pdc",
        "--pump-pol",
        "e",
        "rates",
        "--lambda1",
        "692",
        "--format",
        "json",
    ]);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["detectable_mode"], "both");
    assert!(v["rate_arbitrary"].as_f64().unwrap() > 0.0);
}

#[test]
fn coupling_dump_has_type_field_names() {
    let v: serde_json::Value = serde_json::from_str(&ok(&["match", "--lambda1", "500", "--coupling"])).unwrap();
    for key in ["f1", "f2", "g1", "g2", "delta", "b", "length_l", "r1", "r2"] {
        assert!(v.get(key).is_some(), "{key}");
    }
}

#[test]
fn edge_of_long_pump_warns_below_transparency() {
    let o = run(&["--pump-nm", "702", "edge"]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("256.79,188.01,true"));
    assert!(stderr(&o).contains("transparency"));
}

#[test]
fn paper_tables_exit_code_tracks_verdicts() {
    let o = run(&["paper-tables"]);
    let text = stdout(&o);
    let verdicts: Vec<&str> = text
        .lines()
        .filter(|l| l.ends_with(": PASS") || l.ends_with(": FAIL"))
        .collect();
    assert_eq!(verdicts.len(), 5, "{text}");
    let all_pass = verdicts.iter().all(|l| l.ends_with("PASS"));
    assert_eq!(o.status.success(), all_pass);
    assert!(text.contains("Table 1: PASS"));
    let row = text.lines().find(|l| l.starts_with("500 nm eq (deg)")).unwrap();
    assert!(row.contains("18.04"));
    let flag = text
        .lines()
        .find(|l| l.starts_with("702 pump below-transparency flag"))
        .unwrap();
    assert!(flag.contains("1.0000") && flag.contains(" ok"));
}

#[test]
fn paper_tables_reports_sensitivity_case() {
    let o = run(&["paper-tables", "--d31-over-d15", "0.95"]);
    assert!(stdout(&o).contains("peak ratio, d31/d15 = 0.95"));
}

#[test]
fn registry_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("crystals.ini");
    std::fs::write(
        &path,
        "[bbo-copy]\nord.a = 2.7359\nord.b = .01878\nord.c = .01822\nord.d = .01354\n\
         ext90.a = 2.3753\next90.b = .01224\next90.c = .01667\next90.d = .01516\ntransparency_min = 0.189\n",
    )
    .unwrap();
    let o = bin()
        .env("PUCVSIM_CRYSTAL_REGISTRY", &path)
        .args(["--crystal", "bbo-copy", "index", "--lambda", "500"])
        .output()
        .unwrap();
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(stdout(&o).trim(), "1.677361");

    std::fs::write(&path, "[broken]\nord.a = x\n").unwrap();
    let o = bin()
        .env("PUCVSIM_CRYSTAL_REGISTRY", &path)
        .args(["index", "--lambda", "500"])
        .output()
        .unwrap();
    assert!(!o.status.success());
    assert!(stderr(&o).contains("line 2"));
}

#[test]
fn unknown_crystal_fails() {
    let o = run(&["--crystal", "kdp", "index", "--lambda", "500"]);
    assert!(!o.status.success());
    assert!(stderr(&o).contains("unknown crystal"));
}

#[test]
fn out_flag_writes_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("ratios.csv");
    let o = run(&["ratio-table", "--out", path.to_str().unwrap()]);
    assert!(o.status.success());
    assert!(stdout(&o).is_empty());
    let text = std::fs::read_to_string(Path::new(&path)).unwrap();
    assert!(text.starts_with("lambda1_nm,ratio,theta1_deg\n"));
}
