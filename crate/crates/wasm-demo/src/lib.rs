//! Browser bindings. Each export returns a JSON string; the plain Rust
//! functions behind them are usable (and tested) natively.

use lmfrail::region::{boundary_param, classify_boundary, p_coeffs, positive_axis_min, q_coeffs, Contact};
use lmfrail::sim::{binning_diagnostic, generate_dataset, FrailtySpec, SimConfig};
use lmfrail::{em_fit, fit, membership, EmConfig, FitConfig, LmmParams};
use serde::Serialize;
use wasm_bindgen::prelude::*;

/// Membership grid of the plane `λ2 = const` over `(λ3, λ4)`, with the
/// boundary sheet traced through the double roots.
#[derive(Debug, Serialize)]
pub struct Slice {
    pub lambda2: f64,
    pub lambda3_range: (f64, f64),
    pub lambda4_range: (f64, f64),
    pub nx: usize,
    pub ny: usize,
    /// Row-major from the bottom-left corner, `1` for members.
    pub member: Vec<u8>,
    /// `(λ3, λ4, y)` along the sheet.
    pub boundary: Vec<(f64, f64, f64)>,
}

pub fn region_slice(lambda2: f64, lambda3_range: (f64, f64), lambda4_max: f64, nx: usize, ny: usize) -> Result<Slice, String> {
    if !(nx >= 2 && ny >= 2 && nx * ny <= 1 << 20) {
        return Err("grid must be at least 2x2 and at most 2^20 cells".into());
    }
    if !(lambda3_range.0 < lambda3_range.1 && lambda4_max > 0.0 && lambda2.is_finite()) {
        return Err("empty plotting window".into());
    }
    let (lo, hi) = lambda3_range;
    let mut member = Vec::with_capacity(nx * ny);
    for j in 0..ny {
        let l4 = lambda4_max * j as f64 / (ny - 1) as f64;
        for i in 0..nx {
            let l3 = lo + (hi - lo) * i as f64 / (nx - 1) as f64;
            member.push(u8::from(membership(&LmmParams::new(lambda2, l3, l4))));
        }
    }
    let boundary = (1..=600)
        .filter_map(|k| {
            let y = 0.05 * k as f64;
            let b = boundary_param(y, lambda2).ok()?;
            b.valid.then_some((b.lambda.lambda3, b.lambda.lambda4, y))
        })
        .collect();
    Ok(Slice { lambda2, lambda3_range, lambda4_range: (0.0, lambda4_max), nx, ny, member, boundary })
}

#[derive(Debug, Serialize)]
pub struct Inspection {
    pub lambda: LmmParams,
    pub member: bool,
    pub min_q: f64,
    pub min_p: f64,
    /// `"interior"`, `"outside"`, `"sheet"`, `"face"` or `"edge"`.
    pub location: &'static str,
    pub double_root: Option<f64>,
    /// `(y, q(y))` on `[0, y_max]`.
    pub q_curve: Vec<(f64, f64)>,
}

pub fn inspect(lambda: LmmParams, y_max: f64) -> Result<Inspection, String> {
    if !(lambda.is_finite() && y_max > 0.0) {
        return Err("λ must be finite and y_max positive".into());
    }
    let q = q_coeffs(&lambda);
    let min_q = positive_axis_min(&q.ascending()).value;
    let min_p = positive_axis_min(&p_coeffs(&lambda).ascending()).value;
    let member = membership(&lambda);
    let (location, double_root) = match classify_boundary(&lambda) {
        Ok(bp) if member => match bp.contact {
            Contact::DoubleRoot { y_star } => ("sheet", Some(y_star)),
            Contact::Face => ("face", None),
            Contact::Edge { y_star } => ("edge", Some(y_star)),
        },
        _ if member => ("interior", None),
        _ => ("outside", None),
    };
    let q_curve = (0..=200).map(|k| {
        let y = y_max * k as f64 / 200.0;
        (y, q.eval(y))
    });
    Ok(Inspection { lambda, member, min_q, min_p, location, double_root, q_curve: q_curve.collect() })
}

#[derive(Debug, Serialize)]
pub struct MethodFit {
    pub beta: f64,
    pub converged: bool,
}

#[derive(Debug, Serialize)]
pub struct RoundTrip {
    pub beta_true: f64,
    pub n: usize,
    pub events: usize,
    pub lmm: MethodFit,
    pub lambda: LmmParams,
    pub on_boundary: bool,
    pub em: MethodFit,
    pub eta_hat: f64,
    /// `(bin length, variance/mean, skewness)`.
    pub diagnostics: Vec<(f64, Option<f64>, Option<f64>)>,
}

/// One simulated gamma-frailty dataset, fitted by both methods and binned.
pub fn simulate_and_fit(n: usize, eta: f64, seed: u64) -> Result<RoundTrip, String> {
    if !(20..=5000).contains(&n) {
        return Err("n must lie in 20..=5000".into());
    }
    let frailty = if eta > 0.0 { FrailtySpec::Gamma { eta } } else { FrailtySpec::None };
    let sim = SimConfig { n, frailty, replicates: 1, master_seed: seed, ..SimConfig::default() };
    let data = generate_dataset(&sim, 0).map_err(|e| e.to_string())?;
    let lmm = fit(&data, &FitConfig::default()).map_err(|e| e.to_string())?;
    let em = em_fit(&data, &EmConfig::default()).map_err(|e| e.to_string())?;
    let gammas: Vec<f64> = (1..=10).map(f64::from).collect();
    let diagnostics = binning_diagnostic(&data, &gammas)
        .map_err(|e| e.to_string())?
        .into_iter()
        .map(|r| (r.bin_length, r.ratio, r.skewness))
        .collect();
    Ok(RoundTrip {
        beta_true: sim.beta_true,
        n,
        events: data.n_events(),
        lmm: MethodFit { beta: lmm.beta_hat[0], converged: lmm.converged },
        lambda: lmm.lambda_hat,
        on_boundary: lmm.on_boundary,
        em: MethodFit { beta: em.beta_hat[0], converged: em.converged },
        eta_hat: em.eta_hat,
        diagnostics,
    })
}

fn to_json<T: Serialize>(r: Result<T, String>) -> Result<String, JsError> {
    let v = r.map_err(|e| JsError::new(&e))?;
    serde_json::to_string(&v).map_err(|e| JsError::new(&e.to_string()))
}

#[wasm_bindgen(js_name = regionSlice)]
pub fn region_slice_js(lambda2: f64, lambda3_min: f64, lambda3_max: f64, lambda4_max: f64, nx: usize, ny: usize) -> Result<String, JsError> {
    to_json(region_slice(lambda2, (lambda3_min, lambda3_max), lambda4_max, nx, ny))
}

#[wasm_bindgen(js_name = inspectPoint)]
pub fn inspect_js(lambda2: f64, lambda3: f64, lambda4: f64, y_max: f64) -> Result<String, JsError> {
    to_json(inspect(LmmParams::new(lambda2, lambda3, lambda4), y_max))
}

#[wasm_bindgen(js_name = simulateAndFit)]
pub fn simulate_and_fit_js(n: usize, eta: f64, seed: u32) -> Result<String, JsError> {
    to_json(simulate_and_fit(n, eta, u64::from(seed)))
}
