use serde_json::Value;
use treeot_demo::{generate_tree, radon_round_trip, wasserstein_interpolate};

const STAR3: &str = r#"{"vertices":["c","a","b","d"],"edges":[
 {"u":"c","v":"a","len":"1"},{"u":"c","v":"b","len":"1"},{"u":"c","v":"d","len":"1"},
 {"u":"a","v":null,"len":"inf"},{"u":"a","v":null,"len":"inf"},
 {"u":"b","v":null,"len":"inf"},{"u":"b","v":null,"len":"inf"},
 {"u":"d","v":null,"len":"inf"},{"u":"d","v":null,"len":"inf"}]}"#;

fn parse(s: &str) -> Value {
    serde_json::from_str(s).unwrap()
}

#[test]
fn generated_trees_are_reproducible() {
    let a = generate_tree(3, 8).unwrap();
    assert_eq!(a, generate_tree(3, 8).unwrap());
    let t = treeot::io::read_tree(&a).unwrap();
    assert!(t.is_geodesically_complete() && t.vertex_count() <= 8);
}

#[test]
fn radon_round_trip_on_star() {
    let h = r#"{"values":[{"vertex":"c","value":"1"},{"vertex":"a","value":"2"},{"vertex":"b","value":"3"},{"vertex":"d","value":"4"}]}"#;
    let out = parse(&radon_round_trip(STAR3, h).unwrap());
    assert_eq!(out["matches"], true);
    assert_eq!(out["total"], "10");
    assert_eq!(out["table"].as_array().unwrap().len(), 12);
    assert_eq!(out["table"][0]["value"], "5");
}

#[test]
fn interpolation_midpoint_and_errors() {
    let a = r#"{"atoms":[{"edge":0,"offset":"1","mass":"1"}]}"#;
    let d = r#"{"atoms":[{"edge":2,"offset":"1","mass":"1"}]}"#;
    let out = parse(&wasserstein_interpolate(STAR3, a, d, "1/2").unwrap());
    assert_eq!(out["plan"]["w2_squared"], "4");
    // the midpoint is the centre c, written as offset 0 on edge 0
    assert_eq!(out["measure"]["atoms"][0]["edge"], 0);
    assert_eq!(out["measure"]["atoms"][0]["offset"], "0");
    let out = parse(&wasserstein_interpolate(STAR3, a, d, "3/2").unwrap());
    assert_eq!(out["measure"]["atoms"][0]["edge"], 7);
    assert!(wasserstein_interpolate(STAR3, a, d, "0.5").is_err());
    assert!(wasserstein_interpolate(STAR3, "{}", d, "1").is_err());
}
