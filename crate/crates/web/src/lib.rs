//! Browser bindings for the bound explorer in `www/`.
//!
//! Each export takes plain arguments and returns a JSON string; the inner
//! functions are ordinary Rust so they can be tested natively.

use mixbound::analysis::analyze;
use mixbound::bounds::{crude_variance_bound, poisson_variance_bound, rosenthal_bound};
use mixbound::montecarlo::estimate_moment;
use mixbound::ChainFamily;
use serde::Serialize;
use wasm_bindgen::prelude::*;

/// Longest Dobrushin sequence returned to the page.
const MAX_PROFILE_HORIZON: u32 = 200;
/// Upper limit on simulated steps (`n × replications`) per call.
const MAX_SIMULATED_STEPS: usize = 20_000_000;

#[derive(Serialize)]
pub struct MixingSummary {
    pub chain: String,
    pub states: usize,
    pub tau: usize,
    pub stationary: Vec<f64>,
    /// `Δ(Q^t)` for `t = 1..=horizon`.
    pub dobrushin: Vec<f64>,
    pub sigma2: f64,
    pub poisson_sup_norm: f64,
    pub poisson_sup_norm_cap: f64,
}

pub fn mixing_summary(family: &str, horizon: u32, seed: u64) -> Result<MixingSummary, String> {
    let family: ChainFamily = family.parse().map_err(|e: mixbound::Error| e.to_string())?;
    let model = family.generate(seed).map_err(|e| e.to_string())?;
    let analysis = analyze(&model).map_err(|e| e.to_string())?;
    let horizon = horizon.clamp(1, MAX_PROFILE_HORIZON) as usize;
    let dobrushin = (1..=horizon)
        .map(|t| model.kernel().dobrushin_coefficient(t))
        .collect::<Result<_, _>>()
        .map_err(|e| e.to_string())?;
    Ok(MixingSummary {
        chain: family.to_string(),
        states: analysis.size,
        tau: analysis.tau,
        stationary: analysis.stationary,
        dobrushin,
        sigma2: analysis.sigma2_poisson,
        poisson_sup_norm: analysis.poisson_sup_norm,
        poisson_sup_norm_cap: analysis.poisson_sup_norm_cap,
    })
}

#[derive(Serialize)]
pub struct CurvePoint {
    pub n: usize,
    pub rosenthal: f64,
    pub variance_term: f64,
    pub quarter_term: f64,
    pub tau_term: f64,
    pub crude_variance: f64,
    pub poisson_variance: f64,
}

/// Bounds on a log-spaced grid of `n` from 1 to `n_max`.
pub fn bound_curve(p: f64, tau: usize, sigma: f64, n_max: usize, points: usize) -> Result<Vec<CurvePoint>, String> {
    if n_max == 0 || tau == 0 {
        return Err("n_max and tau must be at least 1".into());
    }
    let points = points.clamp(2, 400);
    let top = (n_max as f64).ln();
    let mut ns: Vec<usize> = (0..points)
        .map(|i| (top * i as f64 / (points - 1) as f64).exp().round() as usize)
        .collect();
    ns.dedup();
    ns.into_iter()
        .map(|n| {
            let b = rosenthal_bound(p, n, tau, sigma, true).map_err(|e| e.to_string())?;
            Ok(CurvePoint {
                n,
                rosenthal: b.total,
                variance_term: b.term("variance").unwrap_or(0.0),
                quarter_term: b.term("quarter").unwrap_or(0.0),
                tau_term: b.term("tau").unwrap_or(0.0),
                crude_variance: crude_variance_bound(n, tau),
                poisson_variance: poisson_variance_bound(n, tau, sigma),
            })
        })
        .collect()
}

#[derive(Serialize)]
pub struct SimulatedMoment {
    pub p: f64,
    pub n: usize,
    pub tau: usize,
    pub empirical: f64,
    pub std_error: f64,
    pub bound: f64,
    pub crude_variance: f64,
}

pub fn simulated_moment(
    family: &str,
    n: usize,
    p: f64,
    replications: usize,
    seed: u64,
) -> Result<SimulatedMoment, String> {
    if n.saturating_mul(replications) > MAX_SIMULATED_STEPS {
        return Err(format!("n × replications must stay below {MAX_SIMULATED_STEPS}"));
    }
    let family: ChainFamily = family.parse().map_err(|e: mixbound::Error| e.to_string())?;
    let model = family.generate(seed).map_err(|e| e.to_string())?;
    let analysis = analyze(&model).map_err(|e| e.to_string())?;
    let est = estimate_moment(&model, n, p, replications, seed).map_err(|e| e.to_string())?;
    let sigma = analysis.sigma2_poisson.max(0.0).sqrt();
    let bound = rosenthal_bound(p.max(2.0), n, analysis.tau, sigma, true).map_err(|e| e.to_string())?;
    Ok(SimulatedMoment {
        p,
        n,
        tau: analysis.tau,
        empirical: est.value,
        std_error: est.std_error,
        bound: bound.total,
        crude_variance: crude_variance_bound(n, analysis.tau),
    })
}

fn to_js<T: Serialize>(result: Result<T, String>) -> Result<String, JsValue> {
    result
        .and_then(|v| serde_json::to_string(&v).map_err(|e| e.to_string()))
        .map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn mixing_profile(family: &str, horizon: u32, seed: u32) -> Result<String, JsValue> {
    to_js(mixing_summary(family, horizon, u64::from(seed)))
}

#[wasm_bindgen]
pub fn rosenthal_curve(p: f64, tau: u32, sigma: f64, n_max: u32, points: u32) -> Result<String, JsValue> {
    to_js(bound_curve(p, tau as usize, sigma, n_max as usize, points as usize))
}

#[wasm_bindgen]
pub fn simulate_moment(family: &str, n: u32, p: f64, replications: u32, seed: u32) -> Result<String, JsValue> {
    to_js(simulated_moment(family, n as usize, p, replications as usize, u64::from(seed)))
}
