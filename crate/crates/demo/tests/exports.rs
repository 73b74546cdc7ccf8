use serde_json::Value;
use spir_demo::{rate_table, run_audit, run_retrieval};

fn parse(s: String) -> Value {
    serde_json::from_str(&s).unwrap()
}

#[test]
fn rate_table_rows() {
    let v = parse(rate_table(4));
    let rows = v["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 10);
    let row = rows.iter().find(|r| r["n"] == 4 && r["m"] == 2 && r["t"] == 2).unwrap();
    assert_eq!(row["capacity"], "1/4");
    assert_eq!(row["secrecy_bound"], "3");
}

#[test]
fn retrieval_round_trip() {
    let v = parse(run_retrieval(4, 2, 2, 2, 0, 2, 7));
    assert_eq!(v["correct"], true);
    assert_eq!(v["rate"], "1/4");
    assert_eq!(v["capacity"], "1/4");
    assert_eq!(v["rounds"].as_array().unwrap().len(), 2);
    assert_eq!(v["rounds"][0]["answers"].as_array().unwrap().len(), 4);
    assert!(v["transcript"].as_str().unwrap().starts_with("# spir-transcript v1"));
}

#[test]
fn errors_come_back_as_json() {
    let v = parse(run_retrieval(3, 2, 2, 2, 0, 1, 0));
    assert!(v["error"].as_str().unwrap().contains("N must be ≥ M+T"));
    let v = parse(run_audit("db", 4, 2, 2, 2, 5, ""));
    assert!(v["error"].as_str().unwrap().contains("ceiling"));
    let v = parse(run_audit("bogus", 2, 1, 1, 2, 3, ""));
    assert!(v.get("error").is_some());
}

#[test]
fn audits_and_mutants() {
    assert_eq!(parse(run_audit("user", 2, 1, 1, 2, 3, ""))["passed"], true);
    assert_eq!(parse(run_audit("db", 3, 1, 2, 2, 3, ""))["passed"], true);
    assert_eq!(parse(run_audit("entropy", 2, 1, 1, 2, 3, ""))["passed"], true);
    let v = parse(run_audit("db", 2, 1, 1, 2, 3, "no-mask"));
    assert_eq!(v["passed"], false);
    assert!(v["mutual_information_bits"].as_f64().unwrap() > 0.0);
    assert_eq!(parse(run_audit("user", 2, 1, 1, 2, 3, "no-randomization"))["passed"], false);
}
