//! Browser bindings for the static demo page in `www/`.
//!
//! Parameters travel as JSON objects with the field names of
//! `EffectiveParams`; results come back as JSON strings or SVG markup.

use optomech::entanglement::{all_negativities, BipartitePair};
use optomech::lyapunov::solve_lyapunov_with;
use optomech::model::{build_diffusion, build_drift, EffectiveParams, ParamField};
use optomech::plot::render_svg;
use optomech::presets::Figure;
use optomech::stability::{check_stability, stability_boundary};
use optomech::sweep::{run_sweep, SweepAxis, SweepSpec};
use optomech::Tolerances;
use serde::Serialize;
use wasm_bindgen::prelude::*;

/// Grid size cap so a careless input cannot freeze the tab.
pub const MAX_POINTS: usize = 2001;

#[derive(Serialize)]
struct PointReport {
    eigen_stable: bool,
    marginal: bool,
    max_real_part: f64,
    s1: f64,
    s2: f64,
    min_symplectic_eigenvalue: Option<f64>,
    negativity: Option<Vec<PairValue>>,
}

#[derive(Serialize)]
struct PairValue {
    pair: String,
    e_n: f64,
    mu_minus: f64,
}

fn parse_params(json: &str) -> Result<EffectiveParams, String> {
    let p: EffectiveParams = serde_json::from_str(json).map_err(|e| format!("bad parameters: {e}"))?;
    p.validate().map_err(|e| e.to_string())?;
    Ok(p)
}

/// Base parameters and scan of a figure preset as JSON.
pub fn preset_json(name: &str) -> Result<String, String> {
    let spec = name.parse::<Figure>().map_err(|e| e.to_string())?.spec();
    Ok(serde_json::json!({
        "params": spec.base,
        "axis": spec.axis.name(),
        "start": spec.start,
        "stop": spec.stop,
        "points": spec.points,
    })
    .to_string())
}

/// Stability verdict and, for stable points, the three negativities.
pub fn point_json(params: &str) -> Result<String, String> {
    let p = parse_params(params)?;
    let report = check_stability(&p).map_err(|e| e.to_string())?;
    let mut out = PointReport {
        eigen_stable: report.eigen_stable,
        marginal: report.marginal,
        max_real_part: report.max_real_part,
        s1: report.s1,
        s2: report.s2,
        min_symplectic_eigenvalue: None,
        negativity: None,
    };
    if report.usable() {
        let sol = solve_lyapunov_with(&build_drift(&p), &build_diffusion(&p), &Tolerances::default()).map_err(|e| e.to_string())?;
        let ns = all_negativities(&sol.covariance).map_err(|e| e.to_string())?;
        out.min_symplectic_eigenvalue = Some(sol.covariance.min_symplectic_eigenvalue());
        out.negativity = Some(
            BipartitePair::ALL
                .iter()
                .zip(ns)
                .map(|(pair, n)| PairValue { pair: pair.to_string(), e_n: n.e_n, mu_minus: n.mu_minus })
                .collect(),
        );
    }
    serde_json::to_string(&out).map_err(|e| e.to_string())
}

/// SVG chart of the negativities over a one-parameter scan.
pub fn sweep_svg_string(params: &str, axis: &str, start: f64, stop: f64, points: usize) -> Result<String, String> {
    if points > MAX_POINTS {
        return Err(format!("at most {MAX_POINTS} points"));
    }
    let base = parse_params(params)?;
    let axis = SweepAxis::parse(axis, optomech::model::OMEGA_M_DEFAULT_ABS).map_err(|e| e.to_string())?;
    let spec = SweepSpec { base, axis, start, stop, points };
    let result = run_sweep(&spec).map_err(|e| e.to_string())?;
    Ok(render_svg(&result, &format!("E_N versus {axis}")))
}

/// First value of `field` in `[lo, hi]` where the system turns unstable.
pub fn stability_edge_value(params: &str, field: &str, lo: f64, hi: f64) -> Result<Option<f64>, String> {
    let base = parse_params(params)?;
    let field: ParamField = field.parse().map_err(|e: optomech::Error| e.to_string())?;
    stability_boundary(&base, field, lo, hi, 1e-9).map_err(|e| e.to_string())
}

#[wasm_bindgen]
pub fn preset(name: &str) -> Result<String, JsValue> {
    preset_json(name).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn point_report(params: &str) -> Result<String, JsValue> {
    point_json(params).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn sweep_svg(params: &str, axis: &str, start: f64, stop: f64, points: usize) -> Result<String, JsValue> {
    sweep_svg_string(params, axis, start, stop, points).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn stability_edge(params: &str, field: &str, lo: f64, hi: f64) -> Result<Option<f64>, JsValue> {
    stability_edge_value(params, field, lo, hi).map_err(|e| JsValue::from_str(&e))
}
