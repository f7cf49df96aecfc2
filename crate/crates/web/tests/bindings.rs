use hm_web::{arcsin_check_json, majority_curve_json, quantum_outcomes_json};
use serde_json::Value;

#[test]
fn quantum_outcomes_always_win() {
    let v: Value = serde_json::from_str(&quantum_outcomes_json("0110", "[[0,1],[2,3]]", 0).unwrap()).unwrap();
    assert_eq!(v["win_probability"], "1/1");
    let rows = v["outcomes"].as_array().unwrap();
    assert!(!rows.is_empty() && rows.iter().all(|r| r["wins"] == true));
    // Each support element carries 4/n³.
    assert!(rows.iter().all(|r| r["probability"] == "1/16"));
}

#[test]
fn quantum_outcomes_draws_a_matching() {
    let a = quantum_outcomes_json("01101001", "", 3).unwrap();
    assert_eq!(a, quantum_outcomes_json("01101001", "", 3).unwrap());
    let v: Value = serde_json::from_str(&a).unwrap();
    assert_eq!(v["matching"].as_array().unwrap().len(), 4);
}

#[test]
fn quantum_outcomes_rejects_bad_input() {
    assert!(quantum_outcomes_json("012", "", 0).is_err());
    assert!(quantum_outcomes_json("0110", "[[0,1],[2,3],[4,5]]", 0).is_err());
    assert!(quantum_outcomes_json("0110", "not json", 0).is_err());
}

#[test]
fn majority_curve_grows_with_c() {
    let v: Value = serde_json::from_str(&majority_curve_json(16, 20_000, 0).unwrap()).unwrap();
    let pts = v.as_array().unwrap();
    let cs: Vec<u64> = pts.iter().map(|p| p["c"].as_u64().unwrap()).collect();
    assert_eq!(cs, vec![1, 2, 4]);
    let adv: Vec<f64> = pts.iter().map(|p| p["advantage"].as_f64().unwrap()).collect();
    assert!(adv[2] > adv[0]);
}

#[test]
fn arcsin_rows_track_the_formula() {
    let v: Value = serde_json::from_str(&arcsin_check_json(&[0.0, 60.0, 90.0], 20_000, 0).unwrap()).unwrap();
    let rows = v["rows"].as_array().unwrap();
    assert_eq!(rows[0]["estimate"], 1.0);
    assert!((rows[2]["expected"].as_f64().unwrap()).abs() < 1e-12);
    assert!(rows.iter().all(|r| r["z_score"].as_f64().unwrap().abs() < 5.0));
}
