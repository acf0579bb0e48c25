//! Closed-form moment and deviation bounds for additive functionals of
//! uniformly geometrically ergodic chains, with their absolute constants.
//!
//! Every bound is returned as a [`BoundBreakdown`] (or a plain number for the
//! single-term ones) so reports can show which term dominates.

use std::f64::consts::{E, LN_2, SQRT_2};

use serde::Serialize;
use statrs::function::gamma::ln_gamma;

use crate::error::{out_of_range, Result};

/// Absolute constants of the moment bounds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConstantTable {
    /// Martingale Rosenthal constant in front of the conditional-variance term.
    pub c_rm1: f64,
    /// Martingale Rosenthal constant in front of the maximal-increment term.
    pub c_rm2: f64,
    /// Auxiliary (variance-free) Rosenthal bound, `√(nτp)` term.
    pub d_aux1: f64,
    /// Auxiliary Rosenthal bound, `τp` term.
    pub d_aux2: f64,
    /// Recursion on `R_{k,s}`, `n^{1/4}` term.
    pub d_rec1: f64,
    /// Recursion on `R_{k,s}`, `τ` term.
    pub d_rec2: f64,
    /// Main bound, `n^{1/4}τ^{3/4}p log₂(2p)` term.
    pub d_thm1: f64,
    /// Main bound, `τp log₂(2p)` term.
    pub d_thm2: f64,
}

impl ConstantTable {
    pub fn standard() -> Self {
        let c_rm1 = 60.0 * E;
        let c_rm2 = 60.0;
        Self {
            c_rm1,
            c_rm2,
            d_aux1: 16.0 / 3.0 * c_rm1,
            d_aux2: 8.0 * c_rm2,
            d_rec1: (19.0f64 / 3.0).sqrt() * c_rm1.sqrt(),
            d_rec2: 3.0 * c_rm2.sqrt(),
            d_thm1: 16.0 / 3.0 * (19.0f64 / 3.0).sqrt() * c_rm1,
            d_thm2: 64.0 / 3.0 * (c_rm2.sqrt() * c_rm1 * c_rm1 + c_rm2),
        }
    }
}

impl Default for ConstantTable {
    fn default() -> Self {
        Self::standard()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundTerm {
    pub name: &'static str,
    pub value: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundInputs {
    pub p: f64,
    pub n: usize,
    pub tau: usize,
    pub sigma: Option<f64>,
    pub from_stationary: bool,
}

/// A bound value split into its named, non-negative terms.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundBreakdown {
    pub total: f64,
    pub terms: Vec<BoundTerm>,
    pub inputs: BoundInputs,
}

impl BoundBreakdown {
    fn new(terms: Vec<BoundTerm>, inputs: BoundInputs) -> Self {
        Self {
            total: terms.iter().map(|t| t.value).sum(),
            terms,
            inputs,
        }
    }

    pub fn term(&self, name: &str) -> Option<f64> {
        self.terms.iter().find(|t| t.name == name).map(|t| t.value)
    }

    /// The block argument behind the main bound needs `n >= τ`; the bound is
    /// still evaluated below that, and this flags it.
    pub fn n_below_tau(&self) -> bool {
        self.inputs.n < self.inputs.tau
    }
}

fn check_p(p: f64) -> Result<()> {
    if p.is_finite() && p >= 2.0 {
        Ok(())
    } else {
        Err(out_of_range("p", p, "p >= 2"))
    }
}

fn check_sigma(sigma: f64) -> Result<()> {
    if sigma.is_finite() && sigma >= 0.0 {
        Ok(())
    } else {
        Err(out_of_range("sigma", sigma, "sigma >= 0"))
    }
}

fn log2_2p(p: f64) -> f64 {
    (2.0 * p).log2()
}

/// Rosenthal-type bound on `E^{1/p}[|S̄_n|^p]`:
/// `C₁√2·√p·√n·σ + D₁·n^{1/4}τ^{3/4}·p log₂(2p) + D₂·τ·p log₂(2p)`, plus
/// `2D₂·τ·p log₂(2p)` when the chain does not start from `π`.
pub fn rosenthal_bound(p: f64, n: usize, tau: usize, sigma: f64, from_stationary: bool) -> Result<BoundBreakdown> {
    check_p(p)?;
    check_sigma(sigma)?;
    let c = ConstantTable::standard();
    let (nf, tf) = (n as f64, tau as f64);
    let growth = p * log2_2p(p);
    let mut terms = vec![
        BoundTerm {
            name: "variance",
            value: c.c_rm1 * SQRT_2 * p.sqrt() * nf.sqrt() * sigma,
        },
        BoundTerm {
            name: "quarter",
            value: c.d_thm1 * nf.powf(0.25) * tf.powf(0.75) * growth,
        },
        BoundTerm {
            name: "tau",
            value: c.d_thm2 * tf * growth,
        },
    ];
    if !from_stationary {
        terms.push(BoundTerm {
            name: "ksi_correction",
            value: 2.0 * c.d_thm2 * tf * growth,
        });
    }
    Ok(BoundBreakdown::new(
        terms,
        BoundInputs {
            p,
            n,
            tau,
            sigma: Some(sigma),
            from_stationary,
        },
    ))
}

/// Intermediate bound for dyadic moments `p = 2^s`:
/// `C₁·√p·√n·σ + (D₁/2)·n^{1/4}τ^{3/4}·p log₂p + (D₁/2)·τ·p log₂p`.
pub fn rosenthal_bound_dyadic(s: u32, n: usize, tau: usize, sigma: f64) -> Result<BoundBreakdown> {
    if s == 0 || s > 60 {
        return Err(out_of_range("s", s as f64, "1 <= s <= 60"));
    }
    check_sigma(sigma)?;
    let c = ConstantTable::standard();
    let p = 2f64.powi(s as i32);
    let (nf, tf) = (n as f64, tau as f64);
    let growth = p * s as f64;
    Ok(BoundBreakdown::new(
        vec![
            BoundTerm {
                name: "variance",
                value: c.c_rm1 * p.sqrt() * nf.sqrt() * sigma,
            },
            BoundTerm {
                name: "quarter",
                value: c.d_thm1 / 2.0 * nf.powf(0.25) * tf.powf(0.75) * growth,
            },
            BoundTerm {
                name: "tau",
                value: c.d_thm1 / 2.0 * tf * growth,
            },
        ],
        BoundInputs {
            p,
            n,
            tau,
            sigma: Some(sigma),
            from_stationary: true,
        },
    ))
}

/// Variance-free bound `D_aux1·√(nτp) + D_aux2·τp`.
pub fn auxiliary_rosenthal_bound(p: f64, n: usize, tau: usize) -> Result<BoundBreakdown> {
    check_p(p)?;
    let c = ConstantTable::standard();
    let (nf, tf) = (n as f64, tau as f64);
    Ok(BoundBreakdown::new(
        vec![
            BoundTerm {
                name: "sqrt",
                value: c.d_aux1 * (nf * tf * p).sqrt(),
            },
            BoundTerm {
                name: "linear",
                value: c.d_aux2 * tf * p,
            },
        ],
        BoundInputs {
            p,
            n,
            tau,
            sigma: None,
            from_stationary: true,
        },
    ))
}

/// `(1 + 4/√3)·√(nτ)`, a bound on `E^{1/2}_π[|S̄_n|²]`.
pub fn crude_variance_bound(n: usize, tau: usize) -> f64 {
    (1.0 + 4.0 / 3f64.sqrt()) * ((n * tau) as f64).sqrt()
}

/// `√n·σ + (16/3)·τ`, a bound on `E^{1/2}_π[|S̄_n|²]`.
pub fn poisson_variance_bound(n: usize, tau: usize, sigma: f64) -> f64 {
    (n as f64).sqrt() * sigma + 16.0 / 3.0 * tau as f64
}

/// Deviation thresholds at confidence `δ`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BernsteinThreshold {
    pub delta: f64,
    /// `ln(1/δ)`, used as the moment order.
    pub log_inv_delta: f64,
    /// `ln(1/δ)·log₂(2 ln(1/δ))`.
    pub tilde_ln: f64,
    /// Threshold written with `ln(1/δ)` substituted term by term, without the
    /// factor `e` of the moment-to-tail conversion.
    pub literal: BoundBreakdown,
    /// `e` times the main moment bound at `p = ln(1/δ)`.
    pub conservative: f64,
}

impl BernsteinThreshold {
    /// The conservative threshold, always backed by the moment bound.
    pub fn value(&self) -> f64 {
        self.conservative
    }
}

fn moment_order_for(delta: f64) -> Result<f64> {
    let limit = (-2.0f64).exp();
    if !(delta > 0.0 && delta <= limit) {
        return Err(out_of_range("delta", delta, "0 < delta <= e^-2"));
    }
    Ok((1.0 / delta).ln().max(2.0))
}

/// Threshold `t` with `P_π(|S̄_n| >= t) <= δ`.
pub fn bernstein_threshold(delta: f64, n: usize, tau: usize, sigma: f64) -> Result<BernsteinThreshold> {
    let log_inv_delta = moment_order_for(delta)?;
    check_sigma(sigma)?;
    let c = ConstantTable::standard();
    let tilde_ln = log_inv_delta * (2.0 * log_inv_delta).log2();
    let (nf, tf) = (n as f64, tau as f64);
    let literal = BoundBreakdown::new(
        vec![
            BoundTerm {
                name: "variance",
                value: c.c_rm1 * SQRT_2 * (nf * log_inv_delta).sqrt() * sigma,
            },
            BoundTerm {
                name: "quarter",
                value: c.d_thm1 * nf.powf(0.25) * tf.powf(0.75) * tilde_ln,
            },
            BoundTerm {
                name: "tau",
                value: c.d_thm2 * tf * tilde_ln,
            },
        ],
        BoundInputs {
            p: log_inv_delta,
            n,
            tau,
            sigma: Some(sigma),
            from_stationary: true,
        },
    );
    let conservative = E * rosenthal_bound(log_inv_delta, n, tau, sigma, true)?.total;
    Ok(BernsteinThreshold {
        delta,
        log_inv_delta,
        tilde_ln,
        literal,
        conservative,
    })
}

/// `e·φ(ln(1/δ))`: if `E^{1/p}|Y|^p <= φ(p)` for all `p >= 2`, then
/// `P(|Y| >= e·φ(ln(1/δ))) <= δ`.
pub fn deviation_from_moments(phi: impl Fn(f64) -> f64, delta: f64) -> Result<f64> {
    let p = moment_order_for(delta)?;
    Ok(E * phi(p))
}

/// `1 + 128·(τ/ln 4)^p·Γ(p + 1)`, a bound on `E[T^p]` for the coupling time
/// against the stationary chain. Returns `+∞` once the exponent exceeds 700.
pub fn coupling_moment_bound(p: f64, tau: usize) -> Result<f64> {
    if !(p.is_finite() && p >= 1.0) {
        return Err(out_of_range("p", p, "p >= 1"));
    }
    if tau == 0 {
        return Err(out_of_range("tau", 0.0, "tau >= 1"));
    }
    let log_growth = p * (tau as f64 / (2.0 * LN_2)).ln() + ln_gamma(p + 1.0);
    if log_growth > 700.0 {
        return Ok(f64::INFINITY);
    }
    Ok(1.0 + 128.0 * log_growth.exp())
}

/// `1 + Σ_{k≥2} (k^p − (k−1)^p)·min(1, 2·(1/4)^⌊(k−1)/τ⌋)`, the coupling
/// moment bound before the floor is removed. Always below
/// [`coupling_moment_bound`].
pub fn coupling_moment_block_bound(p: f64, tau: usize) -> Result<f64> {
    if !(p.is_finite() && p >= 1.0) {
        return Err(out_of_range("p", p, "p >= 1"));
    }
    if tau == 0 {
        return Err(out_of_range("tau", 0.0, "tau >= 1"));
    }
    let t = tau as f64;
    let mut total = 1.0;
    let mut weight = 1.0f64;
    for m in 0.. {
        // k − 1 ranges over [mτ, (m+1)τ), with k >= 2
        let mf = m as f64;
        let block = ((mf + 1.0) * t).powf(p) - (mf * t).max(1.0).powf(p);
        let term = block * weight.min(1.0);
        if !term.is_finite() {
            return Ok(f64::INFINITY);
        }
        total += term;
        if m > 0 && term <= 1e-17 * total && mf * t > p {
            break;
        }
        weight = if m == 0 { 0.5 } else { weight * 0.25 };
    }
    Ok(total)
}

fn check_nonnegative(name: &'static str, values: &[f64]) -> Result<()> {
    match values.iter().find(|v| !(v.is_finite() && **v >= 0.0)) {
        Some(v) => Err(out_of_range(name, *v, "finite and >= 0")),
        None => Ok(()),
    }
}

/// Closed-form solution bound for `r_k <= a_k·√r_{k+1} + b_k + c_k`,
/// `k = 1..m−1`:
///
/// `Π a_i^{2^{1−i}}·r_m^{2^{1−m}} + Σ_ℓ Π_{i<ℓ} a_i^{2^{1−i}}·(b_ℓ^{2^{1−ℓ}} + c_ℓ^{2^{1−ℓ}})`.
pub fn recursion_closed_form(a: &[f64], b: &[f64], c: &[f64], r_m: f64) -> Result<f64> {
    if a.len() != b.len() || a.len() != c.len() {
        return Err(crate::Error::LengthMismatch {
            expected: a.len(),
            got: if a.len() != b.len() { b.len() } else { c.len() },
        });
    }
    check_nonnegative("a", a)?;
    check_nonnegative("b", b)?;
    check_nonnegative("c", c)?;
    check_nonnegative("r_m", &[r_m])?;
    let mut prefix = 1.0;
    let mut exponent = 1.0;
    let mut total = 0.0;
    for ((a, b), c) in a.iter().zip(b).zip(c) {
        total += prefix * (b.powf(exponent) + c.powf(exponent));
        prefix *= a.powf(exponent);
        exponent *= 0.5;
    }
    Ok(total + prefix * r_m.powf(exponent))
}

/// `α·2^{s/2}·r^{1/2^{s−2}} + α(βκ₀ + γκ₁)·2^{s/2}·(s − 2)`, the simplified
/// closed form for the recursion with `a_k = α^{1/2}2^{(s−k)/4}`,
/// `b_k = κ₀β^{2^{k−1}}2^{(k+s)/4}` and `c_k = κ₁γ^{2^{k−1}}2^{s/2}`.
///
/// `κ₀, κ₁` must each be zero or at least one.
#[allow(clippy::too_many_arguments)]
pub fn recursion_corollary_bound(
    alpha: f64,
    beta: f64,
    gamma: f64,
    kappa0: f64,
    kappa1: f64,
    s: u32,
    r_last: f64,
) -> Result<f64> {
    for (name, v) in [("alpha", alpha), ("beta", beta), ("gamma", gamma)] {
        if !(v.is_finite() && v >= 1.0) {
            return Err(out_of_range(name, v, ">= 1"));
        }
    }
    for (name, v) in [("kappa0", kappa0), ("kappa1", kappa1)] {
        if !(v.is_finite() && (v == 0.0 || v >= 1.0)) {
            return Err(out_of_range(name, v, "0 or >= 1"));
        }
    }
    if s < 2 {
        return Err(out_of_range("s", s as f64, "s >= 2"));
    }
    check_nonnegative("r_last", &[r_last])?;
    let scale = 2f64.powf(s as f64 / 2.0);
    let root = r_last.powf(0.5f64.powi(s as i32 - 2));
    Ok(alpha * scale * root + alpha * (beta * kappa0 + gamma * kappa1) * scale * (s - 2) as f64)
}

/// Recursion coefficients `(a_k, b_k, c_k)`, `k = 1..s−2`, matching
/// [`recursion_corollary_bound`].
pub fn corollary_coefficients(
    alpha: f64,
    beta: f64,
    gamma: f64,
    kappa0: f64,
    kappa1: f64,
    s: u32,
) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
    let sf = s as f64;
    let ks = 1..=s.saturating_sub(2);
    let a = ks.clone().map(|k| alpha.sqrt() * 2f64.powf((sf - k as f64) / 4.0)).collect();
    let b = ks
        .clone()
        .map(|k| kappa0 * beta.powf(2f64.powi(k as i32 - 1)) * 2f64.powf((k as f64 + sf) / 4.0))
        .collect();
    let c = ks
        .map(|k| kappa1 * gamma.powf(2f64.powi(k as i32 - 1)) * 2f64.powf(sf / 2.0))
        .collect();
    (a, b, c)
}

/// Right-hand side of the one-step recursion for `R_{k,s}`:
/// `C₁^{1/2}2^{(s−k)/4}R_{k+1,s}^{1/2} + (16/3)^{−1/2}τ^{−1/4}D_rec1·n^{1/4}(8τ/3)^{2^{k−1}}2^{(s+k)/4}
///  + D_rec2·2^{s/2}(8τ/3)^{2^{k−1}}`.
pub fn recurrence_r_bound(k: u32, s: u32, n: usize, tau: usize, r_next: f64) -> Result<BoundBreakdown> {
    if k == 0 || k >= s {
        return Err(out_of_range("k", k as f64, "1 <= k <= s - 1"));
    }
    check_nonnegative("r_next", &[r_next])?;
    let c = ConstantTable::standard();
    let (kf, sf, nf, tf) = (k as f64, s as f64, n as f64, tau as f64);
    let growth = (8.0 * tf / 3.0).powf(2f64.powi(k as i32 - 1));
    Ok(BoundBreakdown::new(
        vec![
            BoundTerm {
                name: "recursive",
                value: c.c_rm1.sqrt() * 2f64.powf((sf - kf) / 4.0) * r_next.sqrt(),
            },
            BoundTerm {
                name: "quarter",
                value: (16.0f64 / 3.0).powf(-0.5)
                    * tf.powf(-0.25)
                    * c.d_rec1
                    * nf.powf(0.25)
                    * growth
                    * 2f64.powf((sf + kf) / 4.0),
            },
            BoundTerm {
                name: "tau",
                value: c.d_rec2 * 2f64.powf(sf / 2.0) * growth,
            },
        ],
        BoundInputs {
            p: 2f64.powi(s as i32),
            n,
            tau,
            sigma: None,
            from_stationary: true,
        },
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    const TOL: f64 = 1e-12;

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() <= TOL * (1.0 + a.abs().max(b.abs()))
    }

    #[test]
    fn constants_reproduce_their_definitions() {
        let c = ConstantTable::standard();
        assert!(close(c.c_rm1, 163.096_909_707_542_63));
        assert_eq!(c.c_rm2, 60.0);
        assert!(close(c.d_aux1, 16.0 / 3.0 * 60.0 * E));
        assert!(close(c.d_aux2, 480.0));
        assert!(close(c.d_rec1, (19.0 / 3.0 * 60.0 * E).sqrt()));
        assert!(close(c.d_rec2, 3.0 * 60f64.sqrt()));
        assert!(close(c.d_thm1, 16.0 / 3.0 * (19.0f64 / 3.0).sqrt() * 60.0 * E));
        let expected_thm2 = 64.0 / 3.0 * (60f64.sqrt() * (60.0 * E).powi(2) + 60.0);
        assert!(close(c.d_thm2, expected_thm2));
        for v in [c.c_rm1, c.c_rm2, c.d_aux1, c.d_aux2, c.d_rec1, c.d_rec2, c.d_thm1, c.d_thm2] {
            assert!(v > 0.0);
        }
    }

    #[test]
    fn rosenthal_zero_variance_unit_case() {
        let c = ConstantTable::standard();
        let b = rosenthal_bound(2.0, 1, 1, 0.0, true).unwrap();
        assert_eq!(b.term("variance"), Some(0.0));
        assert!(close(b.total, 4.0 * (c.d_thm1 + c.d_thm2)));
        assert!(close(b.total, b.terms.iter().map(|t| t.value).sum()));
    }

    #[test]
    fn non_stationary_adds_correction() {
        let c = ConstantTable::standard();
        for (p, n, tau, sigma) in [(2.0, 10, 1, 0.3), (3.7, 1000, 4, 1.2), (8.0, 5, 9, 0.0)] {
            let pi = rosenthal_bound(p, n, tau, sigma, true).unwrap();
            let xi = rosenthal_bound(p, n, tau, sigma, false).unwrap();
            let correction = 2.0 * c.d_thm2 * tau as f64 * p * (2.0 * p).log2();
            assert!(close(xi.total, pi.total + correction));
            assert!(close(xi.term("ksi_correction").unwrap(), correction));
        }
    }

    #[test]
    fn rosenthal_two_state_example() {
        // p = 2, n = 100, τ = 2, σ = 0.7637
        let c = ConstantTable::standard();
        let expected = c.c_rm1 * SQRT_2 * 2f64.sqrt() * 10.0 * 0.7637
            + c.d_thm1 * 100f64.powf(0.25) * 2f64.powf(0.75) * 4.0
            + c.d_thm2 * 2.0 * 4.0;
        let b = rosenthal_bound(2.0, 100, 2, 0.7637, true).unwrap();
        assert!(close(b.total, expected));
        assert!(!b.n_below_tau());
        assert!(rosenthal_bound(2.0, 1, 2, 0.7637, true).unwrap().n_below_tau());
    }

    #[test]
    fn rosenthal_rejects_small_p() {
        assert!(rosenthal_bound(1.99, 10, 1, 1.0, true).is_err());
        assert!(rosenthal_bound(f64::NAN, 10, 1, 1.0, true).is_err());
        assert!(rosenthal_bound(2.0, 10, 1, -1.0, true).is_err());
        assert!(auxiliary_rosenthal_bound(1.5, 10, 1).is_err());
    }

    #[test]
    fn auxiliary_examples() {
        let c = ConstantTable::standard();
        let b = auxiliary_rosenthal_bound(2.0, 1, 1).unwrap();
        assert!(close(b.total, c.d_aux1 * SQRT_2 + 2.0 * c.d_aux2));
        let one = auxiliary_rosenthal_bound(3.0, 50, 2).unwrap();
        let two = auxiliary_rosenthal_bound(3.0, 100, 2).unwrap();
        assert!(close(two.term("sqrt").unwrap(), SQRT_2 * one.term("sqrt").unwrap()));
        let b = auxiliary_rosenthal_bound(4.0, 1000, 3).unwrap();
        assert!(close(b.total, c.d_aux1 * 12000f64.sqrt() + c.d_aux2 * 12.0));
    }

    #[test]
    fn crude_and_poisson_variance_examples() {
        let k = 1.0 + 4.0 / 3f64.sqrt();
        assert!((crude_variance_bound(1, 1) - 3.309_401_076_758_503).abs() < 1e-12);
        assert!(close(crude_variance_bound(4, 1), 2.0 * k));
        assert!(close(crude_variance_bound(100, 2), k * 200f64.sqrt()));
        assert!(close(poisson_variance_bound(17, 3, 0.0), 16.0));
        assert!(close(poisson_variance_bound(1, 1, 1.0), 1.0 + 16.0 / 3.0));
        assert!(close(poisson_variance_bound(100, 2, 0.7637), 7.637 + 32.0 / 3.0));
    }

    #[test]
    fn bernstein_at_boundary() {
        let b = bernstein_threshold((-2.0f64).exp(), 10, 1, 0.5).unwrap();
        assert!(close(b.log_inv_delta, 2.0));
        assert!(close(b.tilde_ln, 4.0));
        let direct = E * rosenthal_bound(2.0, 10, 1, 0.5, true).unwrap().total;
        assert!(close(b.value(), direct));
    }

    #[test]
    fn bernstein_domain() {
        for delta in [0.0, -0.1, 0.5, 1.0, f64::NAN, 0.1354] {
            assert!(bernstein_threshold(delta, 10, 1, 0.5).is_err(), "{delta}");
        }
        assert!(bernstein_threshold(0.135, 10, 1, 0.5).is_ok());
    }

    #[test]
    fn bernstein_decreasing_in_delta() {
        let deltas = [1e-12, 1e-8, 1e-4, 1e-3, 0.01, 0.05, 0.1, 0.13];
        for w in deltas.windows(2) {
            let a = bernstein_threshold(w[0], 1000, 2, 0.7637).unwrap();
            let b = bernstein_threshold(w[1], 1000, 2, 0.7637).unwrap();
            assert!(a.conservative > b.conservative);
            assert!(a.literal.total > b.literal.total);
        }
    }

    #[test]
    fn bernstein_numeric_example() {
        // δ = 0.01, n = 1000, τ = 2, σ = 0.7637
        let c = ConstantTable::standard();
        let l = 100f64.ln();
        let lt = l * (2.0 * l).log2();
        let literal = c.c_rm1 * SQRT_2 * (1000.0 * l).sqrt() * 0.7637
            + c.d_thm1 * 1000f64.powf(0.25) * 2f64.powf(0.75) * lt
            + c.d_thm2 * 2.0 * lt;
        let b = bernstein_threshold(0.01, 1000, 2, 0.7637).unwrap();
        assert!(close(b.literal.total, literal));
        // e·φ(L) multiplies every term by e; the literal form applies it to none.
        assert!(b.conservative > b.literal.total);
    }

    #[test]
    fn deviation_examples() {
        assert!(close(deviation_from_moments(|_| 3.0, 0.01).unwrap(), 3.0 * E));
        assert!(close(deviation_from_moments(f64::sqrt, (-4.0f64).exp()).unwrap(), 2.0 * E));
        assert!(deviation_from_moments(|_| 1.0, 0.3).is_err());
        let delta = 0.001;
        let via_phi =
            deviation_from_moments(|p| rosenthal_bound(p, 500, 3, 0.4, true).unwrap().total, delta).unwrap();
        assert!(close(via_phi, bernstein_threshold(delta, 500, 3, 0.4).unwrap().conservative));
    }

    #[test]
    fn coupling_bound_examples() {
        let ln4 = 4f64.ln();
        assert!((coupling_moment_bound(1.0, 1).unwrap() - (1.0 + 128.0 / ln4)).abs() < 1e-10);
        assert!((coupling_moment_bound(1.0, 1).unwrap() - 93.332).abs() < 1e-3);
        assert!((coupling_moment_bound(2.0, 1).unwrap() - (1.0 + 256.0 / (ln4 * ln4))).abs() < 1e-10);
        let mut prev = 0.0;
        for tau in 1..20 {
            let v = coupling_moment_bound(2.5, tau).unwrap();
            assert!(v > prev);
            prev = v;
        }
        assert_eq!(coupling_moment_bound(400.0, 50).unwrap(), f64::INFINITY);
        assert!(coupling_moment_bound(0.5, 1).is_err());
    }

    #[test]
    fn closed_form_examples() {
        // m = 2: a₁·r₂^{1/2} + b₁ + c₁
        let v = recursion_closed_form(&[3.0], &[0.5], &[0.25], 16.0).unwrap();
        assert!(close(v, 3.0 * 4.0 + 0.75));
        let v = recursion_closed_form(&[1.0; 7], &[0.0; 7], &[0.0; 7], 1.0).unwrap();
        assert!(close(v, 1.0));
        // m = 1: nothing to unroll
        assert_eq!(recursion_closed_form(&[], &[], &[], 5.0).unwrap(), 5.0);
        assert!(recursion_closed_form(&[1.0], &[-1.0], &[0.0], 1.0).is_err());
        assert!(recursion_closed_form(&[1.0], &[1.0], &[], 1.0).is_err());
    }

    #[test]
    fn corollary_examples() {
        assert!(close(recursion_corollary_bound(3.0, 2.0, 5.0, 1.0, 7.0, 2, 4.0).unwrap(), 3.0 * 2.0 * 4.0));
        let v = recursion_corollary_bound(2.0, 1.5, 1.2, 0.0, 0.0, 6, 3.0).unwrap();
        assert!(close(v, 2.0 * 8.0 * 3f64.powf(1.0 / 16.0)));
        assert!(recursion_corollary_bound(0.5, 1.0, 1.0, 1.0, 1.0, 3, 1.0).is_err());
        assert!(recursion_corollary_bound(1.0, 1.0, 1.0, 0.5, 1.0, 3, 1.0).is_err());
        assert!(recursion_corollary_bound(1.0, 1.0, 1.0, 1.0, 1.0, 1, 1.0).is_err());
    }

    #[test]
    fn dyadic_bound_sits_below_main_bound() {
        // Lyapunov: E^{1/p} <= E^{1/2^s} with 2^s = smallest power of two >= p.
        for p in [2.0f64, 2.5, 3.0, 4.0, 5.5, 8.0, 13.0, 16.0] {
            let s = p.log2().ceil().max(1.0) as u32;
            for (n, tau, sigma) in [(1, 1, 0.0), (100, 2, 0.76), (10_000, 7, 3.0)] {
                let main = rosenthal_bound(p, n, tau, sigma, true).unwrap();
                let dyadic = rosenthal_bound_dyadic(s, n, tau, sigma).unwrap();
                for name in ["variance", "quarter", "tau"] {
                    assert!(main.term(name).unwrap() >= dyadic.term(name).unwrap() * (1.0 - 1e-12));
                }
            }
        }
    }

    #[test]
    fn dyadic_relation_term_by_term() {
        for s in 1..8u32 {
            let p = 2f64.powi(s as i32);
            let main = rosenthal_bound(p, 250, 3, 0.9, true).unwrap();
            let dyadic = rosenthal_bound_dyadic(s, 250, 3, 0.9).unwrap();
            assert!(close(main.term("variance").unwrap(), SQRT_2 * dyadic.term("variance").unwrap()));
            let ratio = (s as f64 + 1.0) / s as f64;
            assert!(close(main.term("quarter").unwrap(), 2.0 * ratio * dyadic.term("quarter").unwrap()));
        }
    }

    #[test]
    fn block_bound_matches_termwise_sum_and_sits_below_closed_form() {
        for tau in [1usize, 2, 5] {
            for p in [1.0, 2.0, 3.0, 4.0] {
                let brute = 1.0
                    + (2..20_000usize)
                        .map(|k| {
                            let w = (2.0 * 0.25f64.powi(((k - 1) / tau) as i32)).min(1.0);
                            ((k as f64).powf(p) - ((k - 1) as f64).powf(p)) * w
                        })
                        .sum::<f64>();
                let block = coupling_moment_block_bound(p, tau).unwrap();
                assert!((block - brute).abs() <= 1e-9 * brute, "tau={tau} p={p}");
                assert!(block <= coupling_moment_bound(p, tau).unwrap());
            }
        }
        assert!(coupling_moment_block_bound(0.5, 1).is_err());
        assert!(coupling_moment_block_bound(2.0, 0).is_err());
    }
}
