use monocircuit_web::{best_shadow, parse_matrix, parse_polynomial, perm_stats, shadow_under};
use serde_json::Value;

#[test]
fn parses_monomial_sums() {
    let p = parse_polynomial("3 x^2 y + x*y + 1").unwrap();
    assert_eq!(p.len(), 3);
    assert!(!p.is_laurent());
    assert!(parse_polynomial("x^-1 + y").unwrap().is_laurent());
    assert!(parse_polynomial("x + ").is_err());
    assert!(parse_polynomial("2x").is_err());
    assert!(parse_matrix("1,0;0,1").is_ok());
    assert!(parse_matrix("1,0,0").is_err());
}

#[test]
fn search_and_fixed_matrix() {
    let v: Value = serde_json::from_str(&best_shadow("x*y + x + y", 1).unwrap()).unwrap();
    assert_eq!(v["report"]["verdict"], "TRANSPARENT_WITNESSED");
    assert!(v["svg"].as_str().unwrap().starts_with("<svg"));
    let d: Value = serde_json::from_str(&shadow_under("1 + x*y + x^2*y^2", "1,0;0,1").unwrap()).unwrap();
    assert_eq!(d["report"]["vertex_count"], 2);
    assert_eq!(d["report"]["verdict"], "NOT_TRANSPARENT_EXHAUSTIVE");
    assert!(shadow_under("x + y", "1,0,0;0,1,0").is_err());
    assert!(best_shadow("x", 9).is_err());
}

#[test]
fn permanent_statistics() {
    let v: Value = serde_json::from_str(&perm_stats(3).unwrap()).unwrap();
    assert_eq!(v["terms"], 6);
    assert_eq!(v["matches_permanent"], true);
    let big: Value = serde_json::from_str(&perm_stats(6).unwrap()).unwrap();
    assert!(big.get("terms").is_none());
    assert!(perm_stats(7).is_err());
}
