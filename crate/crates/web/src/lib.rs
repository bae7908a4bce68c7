//! WebAssembly bindings for the static demo page in `www/`.
//!
//! Every export returns a JSON string; the plain functions in [`demo`] hold
//! the logic so it can be tested natively.

use wasm_bindgen::prelude::*;

pub mod demo;

fn to_js(result: mtqo::Result<String>) -> Result<String, JsValue> {
    result.map_err(|e| JsValue::from_str(&e.to_string()))
}

/// Mean minimum distance vs store size for each qubit count.
#[wasm_bindgen]
pub fn distance_curves(
    n_values: Vec<u32>,
    k_max: u32,
    trials: u32,
    seed: u64,
) -> Result<String, JsValue> {
    let ns: Vec<usize> = n_values.into_iter().map(|n| n as usize).collect();
    to_js(demo::distance_curves(
        &ns,
        k_max as usize,
        trials as usize,
        seed,
    ))
}

/// Cost traces for one fresh target: cold start, warm start and estimator.
#[wasm_bindgen]
pub fn transfer_traces(n: u32, k_a: u32, learning_rate: f64, seed: u64) -> Result<String, JsValue> {
    to_js(demo::transfer_traces(
        n as usize,
        k_a as usize,
        learning_rate,
        seed,
    ))
}

/// Per-node iterations of tree flooding vs independent cold starts.
#[wasm_bindgen]
pub fn tree_flooding(
    n: u32,
    targets: u32,
    depth: u32,
    branching: u32,
    seed: u64,
) -> Result<String, JsValue> {
    to_js(demo::tree_flooding(
        n as usize,
        targets as usize,
        depth as usize,
        branching as usize,
        seed,
    ))
}
