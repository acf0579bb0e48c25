use serde::Serialize;

use crate::error::Result;
use crate::kernel::DEFAULT_MIXING_HORIZON;
use crate::model::ChainModel;
use crate::poisson::{
    asymptotic_variance_poisson, asymptotic_variance_series, poisson_sup_norm_cap, solve_poisson_direct,
    solve_poisson_series, DEFAULT_SERIES_TOLERANCE,
};

/// Exact summary of a chain and test function.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChainAnalysis {
    pub size: usize,
    pub stationary: Vec<f64>,
    pub tau: usize,
    /// `Δ(Q^t)` for `t = 1..=τ`.
    pub dobrushin: Vec<f64>,
    pub f_sup_norm: f64,
    pub sigma2_series: f64,
    pub sigma2_poisson: f64,
    pub poisson_solution: Vec<f64>,
    pub poisson_residual: f64,
    pub poisson_sup_norm: f64,
    pub poisson_sup_norm_cap: f64,
    /// Largest gap between the direct and series Poisson solutions.
    pub poisson_route_gap: f64,
}

pub fn analyze(model: &ChainModel) -> Result<ChainAnalysis> {
    let q = model.kernel();
    let profile = q.mixing_profile(DEFAULT_MIXING_HORIZON)?;
    let tau = profile.tau()?;
    let pi = q.stationary_distribution()?;
    let f = model.f();
    let direct = solve_poisson_direct(q, f, &pi)?;
    let series = solve_poisson_series(q, f, &pi, tau, DEFAULT_SERIES_TOLERANCE)?;
    let gap = direct
        .g
        .iter()
        .zip(&series.g)
        .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
    Ok(ChainAnalysis {
        size: q.size(),
        stationary: pi.weights().to_vec(),
        tau,
        dobrushin: profile.deltas.iter().take(tau).copied().collect(),
        f_sup_norm: model.f_sup_norm(),
        sigma2_series: asymptotic_variance_series(q, f, &pi, tau, DEFAULT_SERIES_TOLERANCE)?,
        sigma2_poisson: asymptotic_variance_poisson(f, &direct.g, &pi),
        poisson_residual: direct.residual,
        poisson_sup_norm: direct.sup_norm,
        poisson_sup_norm_cap: poisson_sup_norm_cap(tau, model.f_sup_norm()),
        poisson_solution: direct.g,
        poisson_route_gap: gap,
    })
}
