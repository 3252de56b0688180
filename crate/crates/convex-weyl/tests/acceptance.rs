//! Acceptance gate: one test (and one printed pass/fail line) per criterion.
//!
//! Run with `cargo test --test acceptance -- --nocapture` to see the lines;
//! the test names mirror the criteria so the default runner output is the
//! same tally.

use serde_json::json;

use convex_weyl::report::{check_instance, generate_suite, run_suite, ScanConfig};
use convex_weyl::root::{build_root_system, CartanDatum};
use convex_weyl::twisted::DiagramAut;

fn config(v: serde_json::Value) -> ScanConfig {
    ScanConfig::from_value(&v).expect("valid acceptance config")
}

fn verdict(criterion: &str, pass: bool) -> bool {
    println!(
        "criterion {criterion}: {}",
        if pass { "PASS" } else { "FAIL" }
    );
    pass
}

#[test]
fn criterion_1_convex_existence_in_every_elliptic_class() {
    let cfg = config(json!({
        "seed": 1,
        "suites": ["convexity"],
        "types": ["A1", "A2", "A3", "A4", "B2", "B3", "C3", "D4", "G2"],
    }));
    let rep = run_suite("convexity", &cfg).unwrap();
    let pass = rep.fail_count == 0 && rep.pass_count > 0 && rep.budget_refusals.is_empty();
    assert!(
        verdict("1 (convex existence, A1-A4/B2/B3/C3/D4/G2, all sigma)", pass),
        "{:?}",
        rep.counterexamples
    );
}

#[test]
fn criterion_2_uniformization_solver_vs_oracle() {
    let cfg = config(json!({
        "seed": 2,
        "suites": ["uniformization"],
        "types": ["A2", "A3", "B2"],
        "fields": [[2, 1], [2, 2], [3, 1]],
        "instances": 200,
    }));
    let rep = run_suite("uniformization", &cfg).unwrap();
    let pass = rep.fail_count == 0 && rep.pass_count == 200;
    assert!(
        verdict("2 (uniformization, 200 seeded instances)", pass),
        "passed {} failed {}: {:?}",
        rep.pass_count,
        rep.fail_count,
        rep.counterexamples
    );
}

#[test]
fn criterion_3_steinberg_bijectivity_and_round_trips() {
    let cfg = config(json!({
        "seed": 3,
        "suites": ["steinberg"],
        "types": ["A2", "A3", "B2"],
        "fields": [[2, 1], [2, 2], [3, 1]],
        "instances": 200,
        "round_trips": 500,
    }));
    let rep = run_suite("steinberg", &cfg).unwrap();
    let pass = rep.fail_count == 0 && rep.pass_count == 200;
    assert!(
        verdict("3 (Steinberg section, exhaustive + 500 round trips)", pass),
        "passed {} failed {}: {:?}",
        rep.pass_count,
        rep.fail_count,
        rep.counterexamples
    );
}

#[test]
fn criterion_4_group_cross_section_sl3() {
    let cfg = config(json!({
        "seed": 4,
        "suites": ["group"],
        "fields": [[2, 2], [3, 2]],
    }));
    let (instances, _) = generate_suite("group", &cfg).unwrap();
    let cross: Vec<_> = instances
        .iter()
        .filter(|i| i["kind"] == "cross_section")
        .collect();
    // Both Coxeter rotations, q in {2, 3}, three scalar choices over m = 2.
    assert!(cross.len() >= 2 * 2 * (1 + 3));
    let mut pass = true;
    for inst in &cross {
        let res = check_instance(inst).unwrap();
        if !res.pass {
            eprintln!("cross-section failure: {inst} -> {:?}", res.actual);
            pass = false;
        }
    }
    assert!(verdict("4 (SL_3 cross-section bijections)", pass));
}

#[test]
fn criterion_5_point_set_identities_sl2() {
    let cfg = config(json!({
        "seed": 5,
        "suites": ["group"],
        "fields": [[2, 2], [3, 2]],
    }));
    let (instances, _) = generate_suite("group", &cfg).unwrap();
    let ids: Vec<_> = instances
        .iter()
        .filter(|i| i["kind"] == "identities")
        .collect();
    assert_eq!(ids.len(), 4); // q in {2, 3} x r in {0, 1}
    let mut pass = true;
    for inst in &ids {
        let res = check_instance(inst).unwrap();
        let rows = res.actual["identities"].as_array().unwrap();
        let names: Vec<&str> = rows
            .iter()
            .map(|r| r["name"].as_str().unwrap())
            .collect();
        if !res.pass
            || !names.iter().any(|n| n.contains("X_r = Y_r"))
            || !names.iter().any(|n| n.contains("Z^K = X_natural"))
        {
            eprintln!("identity failure: {inst} -> {:?}", res.actual);
            pass = false;
        }
    }
    assert!(verdict("5 (SL_2 point-set counting identities)", pass));
}

#[test]
fn criterion_6_lang_orbit_identities() {
    let cfg = config(json!({
        "seed": 6,
        "suites": ["lang_orbit"],
        "types": ["A1", "A2", "B2", "A3"],
        "fields": [[2, 3], [3, 2]],
        "samples": 1000,
    }));
    let rep = run_suite("lang_orbit", &cfg).unwrap();
    let pass = rep.fail_count == 0 && rep.pass_count > 0;
    assert!(
        verdict("6 (Lang-orbit value identities, 1000 samples/profile)", pass),
        "{:?}",
        rep.counterexamples
    );
}

#[test]
fn criterion_7_howe_combinatorics() {
    let cfg = config(json!({
        "seed": 7,
        "suites": ["howe"],
        "instances": 50,
    }));
    let (instances, _) = generate_suite("howe", &cfg).unwrap();
    assert_eq!(instances.len(), 50);
    let rep = run_suite("howe", &cfg).unwrap();
    let pass = rep.fail_count == 0 && rep.pass_count == 50;
    assert!(
        verdict("7 (Howe level labels, 50 seeded data)", pass),
        "{:?}",
        rep.counterexamples
    );
}

#[test]
fn criterion_8_standard_convex_search() {
    let cfg = config(json!({
        "seed": 8,
        "suites": ["standard"],
        "types": ["A1", "A2", "A3", "B2", "B3", "C3", "G2"],
    }));
    let rep = run_suite("standard", &cfg).unwrap();
    let pass = rep.fail_count == 0 && rep.pass_count > 0;
    assert!(
        verdict("8 (standard-convex search, rank <= 3)", pass),
        "{:?}",
        rep.counterexamples
    );
}

#[test]
fn criterion_9_subadditivity_and_order_harnesses() {
    let types = ["A1", "A2", "A3", "A4", "B2", "B3", "C3", "D4", "G2"];
    let mut violations = 0u64;
    for t in types {
        let rs = build_root_system(CartanDatum::from_code(t).unwrap()).unwrap();
        for sigma in DiagramAut::all(&rs) {
            violations +=
                convex_weyl::report::convexity_harness_violations(&rs, &sigma).unwrap();
        }
    }
    assert!(
        verdict("9 (subadditivity + ordering harnesses)", violations == 0),
        "{violations} violations"
    );
}
