//! Shipped scenarios: parsing, round trips and report stability.

use std::path::{Path, PathBuf};

use symsurf::lab::{emit_report, load_report, load_scenario, save_scenario, Lab, Scenario};

fn shipped() -> Vec<PathBuf> {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("scenarios");
    let mut v: Vec<_> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == "json"))
        .collect();
    v.sort();
    v
}

#[test]
fn shipped_scenarios_round_trip_with_equal_digests() {
    let paths = shipped();
    assert!(paths.len() >= 3);
    let dir = tempfile::tempdir().unwrap();
    for p in paths {
        let a = load_scenario(&p).unwrap();
        let copy = dir.path().join(p.file_name().unwrap());
        save_scenario(&a, &copy).unwrap();
        let b = load_scenario(&copy).unwrap();
        assert_eq!(a, b, "{}", p.display());
        assert_eq!(a.digest(), b.digest(), "{}", p.display());
        assert_eq!(Scenario::from_json(&b.to_json().unwrap()).unwrap().digest(), a.digest());
    }
}

#[test]
fn malformed_scenarios_are_rejected() {
    let base = r#"{"ambient": {"n": 2, "omega": "standard"}, "grid": {"N": 32}, "sigma": 1.0, "embedding": "flat", "suites": ["exact_coincidence"]"#;
    assert!(Scenario::from_json(&format!("{base}}}")).is_ok());
    assert!(Scenario::from_json(&format!(r#"{base}, "colour": "blue"}}"#)).is_err());
    assert!(Scenario::from_json(&format!(r#"{base}, "fields": {{"bandwidth": 20}}}}"#)).is_err());
    assert!(Scenario::from_json(&format!(r#"{base}, "fields": {{"samples": 0}}}}"#)).is_err());
    assert!(Scenario::from_json(&base.replace("exact_coincidence", "no_such_suite")).is_err());
    assert!(Scenario::from_json("{").is_err());
}

#[test]
fn missing_embedding_file_is_an_error() {
    let text = r#"{"ambient": {"n": 2, "omega": "standard"}, "grid": {"N": 32}, "sigma": 1.0,
        "embedding": {"file": "does_not_exist.json"}, "suites": ["tangency"]}"#;
    let sc = Scenario::from_json(text).unwrap();
    assert!(Lab::new(sc, Path::new("/nonexistent")).is_err());
}

#[test]
fn reports_are_bit_stable_and_round_trip() {
    let p = Path::new(env!("CARGO_MANIFEST_DIR")).join("scenarios/linear_n3.json");
    let run = || {
        let sc = load_scenario(&p).unwrap();
        Lab::new(sc, p.parent().unwrap()).unwrap().run()
    };
    let a = run();
    let b = run();
    assert_eq!(a.to_json(), b.to_json());
    assert!(a.pass);

    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("r.json");
    emit_report(&a, &out).unwrap();
    assert_eq!(load_report(&out).unwrap(), a);
}

#[test]
fn every_record_carries_a_digest_and_consistent_verdict() {
    let p = Path::new(env!("CARGO_MANIFEST_DIR")).join("scenarios/linear_n3.json");
    let report = Lab::new(load_scenario(&p).unwrap(), p.parent().unwrap()).unwrap().run();
    for s in &report.suites {
        assert_eq!(s.pass, s.error.is_none() && s.records.iter().all(|r| r.pass));
        for r in &s.records {
            assert_eq!(r.inputs_digest.len(), 16);
            assert_eq!(r.pass, r.bound.holds(r.residual));
        }
    }
}
