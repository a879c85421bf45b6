//! Browser demo: heat flow, a Harnack explorer, and spectra with bounds.
//!
//! Each export takes plain numbers and strings and returns a JSON string.
//! The `*_json` functions hold the logic so they can be tested natively.

use graphgrad::generate::{fixture, positive_function, rng_for, GraphFamily, MeasureScheme, WeightScheme};
use graphgrad::harnack::{harnack_bound, HarnackQuery, DEFAULT_PANELS};
use graphgrad::heat::{solve_heat, Method, Potential, StepControl};
use graphgrad::spectral::{cheng_bound, eigendecompose, eigenvalue_lower_bound, zero_tolerance};
use graphgrad::{GraphConstants, VertexFunction, WeightedGraph};
use serde::Serialize;
use serde_json::json;
use wasm_bindgen::prelude::*;

pub const MAX_VERTICES: usize = 60;

fn build(family: &str, n: usize, measure: &str) -> Result<WeightedGraph, String> {
    if !(2..=MAX_VERTICES).contains(&n) {
        return Err(format!("n must be between 2 and {MAX_VERTICES}"));
    }
    let family = match family {
        "path" => GraphFamily::Path,
        "cycle" => GraphFamily::Cycle,
        "complete" => GraphFamily::Complete,
        "grid" => GraphFamily::Grid,
        other => return Err(format!("unknown family {other:?}")),
    };
    let measure = match measure {
        "unit" => MeasureScheme::Unit,
        "degree" => MeasureScheme::Degree,
        other => return Err(format!("unknown measure {other:?}")),
    };
    fixture(family, n, WeightScheme::Unit, measure).map_err(|e| e.to_string())
}

fn edges(g: &WeightedGraph) -> Vec<(usize, usize)> {
    g.data().edges.iter().map(|e| (e.u, e.v)).collect()
}

#[derive(Serialize)]
struct Flow {
    n: usize,
    edges: Vec<(usize, usize)>,
    times: Vec<f64>,
    values: Vec<Vec<f64>>,
}

/// Heat flow from a unit spike at `source` over `[0, t_end]`.
pub fn heat_flow_json(family: &str, n: usize, source: usize, t_end: f64, frames: usize) -> Result<String, String> {
    let g = build(family, n, "unit")?;
    if source >= n || frames == 0 || !(t_end > 0.0) {
        return Err("need source < n, frames > 0 and t_end > 0".into());
    }
    let u0 = VertexFunction::from_fn(n, |x| if x == source { 1.0 } else { 0.0 });
    let times: Vec<f64> = (0..=frames).map(|k| t_end * k as f64 / frames as f64).collect();
    let sol = solve_heat(&g, &u0, Potential::zero(n), &times, Method::EigenExact, StepControl::default())
        .map_err(|e| e.to_string())?;
    let flow = Flow {
        n,
        edges: edges(&g),
        times,
        values: sol.values().iter().map(|v| v.values().to_vec()).collect(),
    };
    Ok(serde_json::to_string(&flow).unwrap())
}

/// Harnack bound between `(x, t1)` and `(y, t2)` next to the ratio a
/// random positive solution actually attains.
pub fn harnack_json(family: &str, n: usize, x: usize, y: usize, t1: f64, t2: f64, q: f64, seed: u64) -> Result<String, String> {
    let g = build(family, n, "unit")?;
    if x >= n || y >= n {
        return Err("vertex out of range".into());
    }
    let potential = Potential::Static(VertexFunction::constant(n, q));
    let bound = harnack_bound(&g, &potential, &HarnackQuery { x, y, t1, t2 }, DEFAULT_PANELS)
        .map_err(|e| e.to_string())?;
    let u0 = positive_function(&mut rng_for(seed, 0, 0), n, 0.01, 100.0);
    let times = if t1 > 0.0 { vec![0.0, t1, t2] } else { vec![t1, t2] };
    let sol = solve_heat(&g, &u0, potential, &times, Method::EigenExact, StepControl::default())
        .map_err(|e| e.to_string())?;
    let (i1, i2) = (times.len() - 2, times.len() - 1);
    let observed = sol.value(x, i1).ln() - sol.value(y, i2).ln();
    Ok(json!({
        "n": n,
        "edges": edges(&g),
        "bound": bound,
        "observed_log_ratio": observed,
        "holds": observed <= bound.exponent,
    })
    .to_string())
}

/// Spectrum of `-Δ` with the lower bound for the first nonzero eigenvalue
/// and the upper bound for the bottom of the spectrum.
pub fn spectrum_json(family: &str, n: usize, measure: &str) -> Result<String, String> {
    let g = build(family, n, measure)?;
    let dec = eigendecompose(&g).map_err(|e| e.to_string())?;
    let c = GraphConstants::of(&g);
    let first = dec.first_nonzero(zero_tolerance(&g)).map(|(_, l)| l);
    let lower = eigenvalue_lower_bound(&g).map_err(|e| e.to_string())?;
    Ok(json!({
        "eigenvalues": dec.eigenvalues,
        "first_nonzero": first,
        "lower_bound": lower,
        "bottom_upper_bound": cheng_bound(&c),
        "constants": c,
    })
    .to_string())
}

fn js(r: Result<String, String>) -> Result<String, JsValue> {
    r.map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn heat_flow(family: &str, n: usize, source: usize, t_end: f64, frames: usize) -> Result<String, JsValue> {
    js(heat_flow_json(family, n, source, t_end, frames))
}

#[wasm_bindgen]
pub fn harnack(family: &str, n: usize, x: usize, y: usize, t1: f64, t2: f64, q: f64, seed: u32) -> Result<String, JsValue> {
    js(harnack_json(family, n, x, y, t1, t2, q, seed as u64))
}

#[wasm_bindgen]
pub fn spectrum(family: &str, n: usize, measure: &str) -> Result<String, JsValue> {
    js(spectrum_json(family, n, measure))
}
