//! Browser bindings for the demo page. Every operation takes and returns
//! JSON text in the same formats as the command line tool; the plain
//! functions are usable (and tested) natively, the `#[wasm_bindgen]`
//! wrappers only convert errors into JS exceptions.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};
use wasm_bindgen::prelude::*;

use treeot::io::{self, FormatError};
use treeot::radon::{radon_forward, radon_invert};
use treeot::rational::parse_rational;
use treeot::transport::{extend_from_dirac, interpolate, optimal_plan};
use treeot::verify::{gen_tree, SuiteConfig, TreeMode};

fn describe(e: FormatError) -> String {
    e.to_string()
}

fn value(text: String) -> Value {
    serde_json::from_str(&text).expect("writers emit valid JSON")
}

/// Random geodesically complete tree with at most `max_vertices` vertices.
pub fn generate_tree(seed: u64, max_vertices: usize) -> Result<String, String> {
    let config = SuiteConfig { max_vertices, max_valency: 4, denom_bound: 4, ..SuiteConfig::default() };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let tree = gen_tree(&config, &mut rng, TreeMode::Complete).map_err(|e| e.to_string())?;
    Ok(io::write_tree(&tree))
}

/// Flag table of `h`, and `h` recovered from that table and its total.
pub fn radon_round_trip(tree_json: &str, h_json: &str) -> Result<String, String> {
    let tree = io::read_tree(tree_json).map_err(describe)?;
    let h = io::read_vertex_function(&tree, h_json).map_err(describe)?;
    let table = radon_forward(&tree, &h);
    let recovered = radon_invert(&tree, &table, h.total()).map_err(|e| e.to_string())?;
    Ok(json!({
        "total": h.total().to_string(),
        "table": value(io::write_flag_table(&tree, &table)),
        "recovered": value(io::write_vertex_function(&tree, &recovered)),
        "matches": recovered == h,
    })
    .to_string())
}

/// The Wasserstein geodesic from `mu` to `nu` at time `t` (a `p/q`
/// string). Times above 1 continue the geodesic when `mu` is a Dirac mass.
pub fn wasserstein_interpolate(tree_json: &str, mu_json: &str, nu_json: &str, t: &str) -> Result<String, String> {
    let tree = io::read_tree(tree_json).map_err(describe)?;
    let mu = io::read_measure(&tree, mu_json).map_err(describe)?;
    let nu = io::read_measure(&tree, nu_json).map_err(describe)?;
    let t = parse_rational(t)?;
    let plan = optimal_plan(&tree, &mu, &nu).map_err(|e| e.to_string())?;
    let at = if t > treeot::rational::one() && mu.is_dirac() {
        extend_from_dirac(&tree, &mu.atoms()[0].point, &nu, &t)
    } else {
        interpolate(&tree, &plan, &t)
    }
    .map_err(|e| e.to_string())?;
    Ok(json!({
        "t": t.to_string(),
        "plan": value(io::write_plan(&tree, &plan)),
        "measure": value(io::write_measure(&tree, &at)),
    })
    .to_string())
}

#[wasm_bindgen(js_name = generateTree)]
pub fn generate_tree_js(seed: u32, max_vertices: u32) -> Result<String, JsError> {
    generate_tree(u64::from(seed), max_vertices as usize).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = radonRoundTrip)]
pub fn radon_round_trip_js(tree_json: &str, h_json: &str) -> Result<String, JsError> {
    radon_round_trip(tree_json, h_json).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = wassersteinInterpolate)]
pub fn wasserstein_interpolate_js(tree_json: &str, mu_json: &str, nu_json: &str, t: &str) -> Result<String, JsError> {
    wasserstein_interpolate(tree_json, mu_json, nu_json, t).map_err(|e| JsError::new(&e))
}
