//! WebAssembly bindings for the static page in `www/`.
//!
//! Each export takes polynomials as text in `x` and `y` and returns a JSON
//! string; failures come back as JavaScript errors.

use abel_radon::geometry::{solve_fiber, DomainSpec, ParamSpace, PlaneChart, ResidueData, SamplingPlan, VarietySpec};
use abel_radon::numeric::{MultiPoly, C64};
use abel_radon::radon::radon_coefficients;
use abel_radon::reconstruct::reconstruct;
use abel_radon::residue::{trace_at, trace_table, MonomialIndex, TraceOptions};
use serde_json::{json, Value};
use wasm_bindgen::prelude::*;

const VARS: [&str; 2] = ["x", "y"];

fn curve(def: &str, psi: &str) -> Result<ResidueData, String> {
    let f = MultiPoly::parse(&VARS, def).map_err(|e| format!("curve: {e}"))?;
    let psi = MultiPoly::parse(&VARS, psi).map_err(|e| format!("numerator: {e}"))?;
    let v = VarietySpec::new(&["x"], &["y"], vec![f]).map_err(|e| e.to_string())?;
    ResidueData::new(v, psi, def).map_err(|e| e.to_string())
}

fn pair(z: C64) -> Value {
    json!([z.re, z.im])
}

/// Fiber points of the line `x = a y + b` and the traces `u_0, …, u_order`.
pub fn fiber_report(def: &str, psi: &str, a: C64, b: C64, order: u32) -> Result<Value, String> {
    let data = curve(def, psi)?;
    let chart = PlaneChart::new(vec![vec![a]], vec![b]).map_err(|e| e.to_string())?;
    let fiber = solve_fiber(data.variety(), &chart, 1e-10).map_err(|e| e.to_string())?;
    let indices: Vec<MonomialIndex> = (0..=order).map(MonomialIndex::single).collect();
    let traces = trace_at(&data, &chart, &indices, TraceOptions::default()).map_err(|e| e.to_string())?;
    let points: Vec<Value> = fiber
        .points
        .iter()
        .map(|p| json!({"x": pair(p.coords[0]), "y": pair(p.coords[1]), "jacobian": pair(p.jacobian), "cluster": p.cluster_size}))
        .collect();
    Ok(json!({
        "degree": data.variety().degree().general,
        "points": points,
        "traces": traces.values.iter().copied().map(pair).collect::<Vec<_>>(),
        "clustered": traces.clustered,
    }))
}

/// Largest transform coefficient over a `grid × grid` lattice around
/// `(a, b)`, relative to the size of the individual residue terms.
pub fn radon_report(def: &str, psi: &str, a: C64, b: C64, radius: f64, grid: usize) -> Result<Value, String> {
    let data = curve(def, psi)?;
    let domain = DomainSpec::new(vec![a, b], vec![radius, radius]).map_err(|e| e.to_string())?;
    let rt = radon_coefficients(
        &data,
        &domain,
        &SamplingPlan::lattice(vec![grid, grid]),
        Default::default(),
    )
    .map_err(|e| e.to_string())?;
    Ok(json!({
        "samples": rt.table.samples.len(),
        "clean": rt.table.clean_samples().count(),
        "max_abs": rt.max_abs(),
        "scale": rt.scale(),
        "ratio": rt.max_abs() / rt.scale().max(f64::MIN_POSITIVE),
    }))
}

/// Samples traces on the circle `|x − center| = radius` and recovers the
/// curve and numerator from them alone.
pub fn reconstruct_report(
    def: &str,
    psi: &str,
    center: C64,
    radius: f64,
    nodes: usize,
    order: u32,
) -> Result<Value, String> {
    let data = curve(def, psi)?;
    let domain = DomainSpec::new(vec![center], vec![radius]).map_err(|e| e.to_string())?;
    let t = trace_table(
        &data,
        ParamSpace::Base,
        &domain,
        &MonomialIndex::up_to(1, order),
        &SamplingPlan::circle(0, nodes),
        Default::default(),
    )
    .map_err(|e| e.to_string())?;
    let r = reconstruct(&t, &Default::default()).map_err(|e| e.to_string())?;
    let tidy = |p: &MultiPoly| p.rounded(10).to_string();
    Ok(json!({
        "zero": r.is_zero(),
        "degree": r.minimal.degrees()[0],
        "minimal": tidy(&r.minimal.poly(0)),
        "numerator": tidy(&r.numerator),
        "psi": tidy(&r.numerator.scale(C64::new(-1.0, 0.0))),
        "recurrence_residual": r.diagnostics.fit.recurrence_residual,
        "truncation_defect": r.diagnostics.truncation_defect,
    }))
}

fn finish(v: Result<Value, String>) -> Result<String, JsError> {
    v.map(|v| v.to_string()).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn fiber(def: &str, psi: &str, a_re: f64, a_im: f64, b_re: f64, b_im: f64, order: u32) -> Result<String, JsError> {
    finish(fiber_report(
        def,
        psi,
        C64::new(a_re, a_im),
        C64::new(b_re, b_im),
        order,
    ))
}

#[wasm_bindgen]
pub fn radon(
    def: &str,
    psi: &str,
    a_re: f64,
    a_im: f64,
    b_re: f64,
    b_im: f64,
    radius: f64,
    grid: usize,
) -> Result<String, JsError> {
    finish(radon_report(
        def,
        psi,
        C64::new(a_re, a_im),
        C64::new(b_re, b_im),
        radius,
        grid,
    ))
}

#[wasm_bindgen]
pub fn recover(
    def: &str,
    psi: &str,
    c_re: f64,
    c_im: f64,
    radius: f64,
    nodes: usize,
    order: u32,
) -> Result<String, JsError> {
    finish(reconstruct_report(def, psi, C64::new(c_re, c_im), radius, nodes, order))
}
