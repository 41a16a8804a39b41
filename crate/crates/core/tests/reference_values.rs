//! Values frozen from a 50-digit mpmath evaluation (see fixtures/gen_fixtures.py).

use ltlab_core::physcore::{duality_product, k_sc, l_sc};
use ltlab_core::response::{phi1, phi_d, psi_d, psi_d_via_psi2};
use serde_json::Value;

fn reference() -> Value {
    serde_json::from_str(include_str!("fixtures/reference.json")).unwrap()
}

fn num(v: &Value) -> f64 {
    v.as_str().unwrap().parse().unwrap()
}

fn rel(a: f64, b: f64) -> f64 {
    ((a - b) / b).abs()
}

#[test]
fn semiclassical_constants_match_high_precision() {
    let r = reference();
    for row in r["constants"].as_array().unwrap() {
        let d = row["d"].as_u64().unwrap() as usize;
        let q = row["q"].as_u64().unwrap() as u32;
        let k = k_sc(d, q).unwrap();
        let l = l_sc(d, q).unwrap();
        assert!(rel(k, num(&row["k_sc"])) < 1e-13, "K_sc d={d} q={q}: {k}");
        assert!(rel(l, num(&row["l_sc"])) < 1e-13, "L_sc d={d} q={q}: {l}");
        assert!((duality_product(d, q).unwrap() - 1.0).abs() < 1e-12);
    }
}

#[test]
fn phi1_matches_elliptic_reference() {
    let r = reference();
    for row in r["phi1"].as_array().unwrap() {
        let x = row["x"].as_f64().unwrap();
        let v = phi1(x).unwrap();
        assert!(rel(v.value().unwrap(), num(&row["value"])) < 1e-11, "x={x}");
        assert!(v.abs_error().unwrap() <= 1e-9);
    }
}

#[test]
fn phi_d_matches_reference() {
    let r = reference();
    for row in r["phi_d"].as_array().unwrap() {
        let d = row["d"].as_u64().unwrap() as usize;
        let k = row["k"].as_f64().unwrap();
        let v = phi_d(k, d).unwrap();
        assert!(rel(v.value().unwrap(), num(&row["value"])) < 1e-9, "d={d} k={k}: {v:?}");
        assert!(v.abs_error().unwrap() <= 1e-6);
    }
}

#[test]
fn psi_d_matches_reference() {
    let r = reference();
    for row in r["psi_d"].as_array().unwrap() {
        let d = row["d"].as_u64().unwrap() as usize;
        let k = row["k"].as_f64().unwrap();
        let want = num(&row["value"]);
        let v = psi_d(k, d).unwrap();
        assert!(rel(v.value().unwrap(), want) < 1e-10, "d={d} k={k}: {v:?}");
        assert!(v.abs_error().unwrap() <= 1e-7);
        if d >= 3 {
            let w = psi_d_via_psi2(k, d).unwrap().value().unwrap();
            assert!(rel(w, want) < 1e-10, "recursion d={d} k={k}: {w}");
        }
    }
}
