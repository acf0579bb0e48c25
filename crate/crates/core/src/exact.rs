//! Sampling-free quantities: the second moment of `S̄_n` under `π` and the
//! law of the maximal exact coupling time through its tail
//! `P(T > k) = ½‖ξQ^k − ξ'Q^k‖₁`.

use serde::Serialize;

use crate::error::{out_of_range, Error, Result};
use crate::kernel::{tv_distance, Distribution, StochasticKernel, MAX_POWER};
use crate::poisson::uge_tail_sum;

/// `E_π[|Σ_{i<n} f̄(Z_i)|²] = n·γ(0) + 2 Σ_{k=1}^{n−1} (n − k)·γ(k)` with
/// `γ(k) = π(f̄·Q^k f̄)`.
pub fn exact_second_moment(q: &StochasticKernel, f: &[f64], pi: &Distribution, n: usize) -> Result<f64> {
    if f.len() != q.size() || pi.len() != q.size() {
        return Err(Error::LengthMismatch {
            expected: q.size(),
            got: if f.len() != q.size() { f.len() } else { pi.len() },
        });
    }
    if n == 0 {
        return Ok(0.0);
    }
    let fbar = pi.center(f);
    let weighted: Vec<f64> = fbar.iter().zip(pi.weights()).map(|(x, w)| x * w).collect();
    let dot = |v: &[f64]| weighted.iter().zip(v).map(|(a, b)| a * b).sum::<f64>();
    let nf = n as f64;
    let mut total = nf * dot(&fbar);
    let mut current = fbar;
    for k in 1..n {
        current = q.apply(&current);
        if current.iter().all(|x| *x == 0.0) {
            break;
        }
        total += 2.0 * (nf - k as f64) * dot(&current);
    }
    Ok(total)
}

/// Tail of the coupling time between chains started from `ξ` and `ξ'`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CouplingTailProfile {
    /// `tail[k] = P(T > k)` for `k = 0..=horizon`.
    pub tail: Vec<f64>,
    pub tau: usize,
    /// Certified bound on `Σ_{j > horizon} P(T > j)`, from
    /// `P(T > j) <= P(T > horizon)·(1/4)^⌊(j − horizon)/τ⌋`.
    pub truncation_bound: f64,
}

impl CouplingTailProfile {
    pub fn horizon(&self) -> usize {
        self.tail.len() - 1
    }
}

/// First `k` with `2·(1/4)^⌊k/τ⌋·(k + 1)^p < 1e-10`.
pub fn default_coupling_horizon(tau: usize, p: f64) -> usize {
    let tau = tau.max(1);
    (0..=MAX_POWER)
        .find(|&k| 2.0 * 0.25f64.powi((k / tau) as i32) * ((k + 1) as f64).powf(p) < 1e-10)
        .unwrap_or(MAX_POWER)
}

pub fn coupling_tail(
    q: &StochasticKernel,
    xi: &Distribution,
    xi_prime: &Distribution,
    horizon: usize,
    tau: usize,
) -> Result<CouplingTailProfile> {
    if horizon > MAX_POWER {
        return Err(out_of_range("horizon", horizon as f64, "at most 1e6"));
    }
    if tau == 0 {
        return Err(out_of_range("tau", 0.0, "tau >= 1"));
    }
    for d in [xi, xi_prime] {
        if d.len() != q.size() {
            return Err(Error::LengthMismatch {
                expected: q.size(),
                got: d.len(),
            });
        }
    }
    let mut a = xi.weights().to_vec();
    let mut b = xi_prime.weights().to_vec();
    let mut tail = Vec::with_capacity(horizon + 1);
    tail.push(tv_distance(&a, &b)?);
    for _ in 0..horizon {
        a = q.left_apply(&a);
        b = q.left_apply(&b);
        tail.push(tv_distance(&a, &b)?);
    }
    let last = *tail.last().expect("tail has at least one entry");
    Ok(CouplingTailProfile {
        truncation_bound: last * uge_tail_sum(tau, 0),
        tail,
        tau,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CouplingMoment {
    pub p: f64,
    /// `1 + Σ_{k=2}^{H+1} (k^p − (k−1)^p)·P(T > k − 1)` over the computed tail.
    pub value: f64,
    /// Certified bound on the omitted terms `k > H + 1`.
    pub remainder_bound: f64,
}

/// `E[T^p] = 1 + Σ_{k≥2} (k^p − (k−1)^p)·P(T > k − 1)` under `T >= 1`.
pub fn coupling_moment(profile: &CouplingTailProfile, p: f64) -> Result<CouplingMoment> {
    if !(p.is_finite() && p >= 1.0) {
        return Err(out_of_range("p", p, "p >= 1"));
    }
    let increment = |k: f64| k.powf(p) - (k - 1.0).powf(p);
    let mut value = 1.0;
    for (j, t) in profile.tail.iter().enumerate().skip(1) {
        value += increment(j as f64 + 1.0) * t;
    }
    let remainder_bound = coupling_remainder(profile, p, value);
    if remainder_bound > 0.01 * value {
        return Err(Error::HorizonTooShort {
            remainder: remainder_bound,
            value,
        });
    }
    Ok(CouplingMoment {
        p,
        value,
        remainder_bound,
    })
}

/// Bounds `Σ_{j≥1} ((H+1+j)^p − (H+j)^p)·P(T > H + j)` using
/// `P(T > H + j) <= P(T > H)·4ρ^j`, `ρ = 4^{−1/τ}`. The summands' ratio
/// decreases towards `ρ`, so the geometric completion of a partial sum is an
/// upper bound.
fn coupling_remainder(profile: &CouplingTailProfile, p: f64, value: f64) -> f64 {
    let last = *profile.tail.last().expect("tail has at least one entry");
    if last == 0.0 {
        return 0.0;
    }
    let h = profile.horizon() as f64;
    let rho = 0.25f64.powf(1.0 / profile.tau as f64);
    let term = |j: f64| 4.0 * last * ((h + 1.0 + j).powf(p) - (h + j).powf(p)) * rho.powf(j);
    let mut sum = 0.0;
    let mut j = 1.0;
    let mut current = term(j);
    loop {
        sum += current;
        let next = term(j + 1.0);
        let ratio = next / current;
        if ratio < 1.0 && (current < 1e-18 * value.max(1.0) || j > 1e7) {
            return sum + next / (1.0 - ratio);
        }
        if !next.is_finite() || j > 1e7 {
            return f64::INFINITY;
        }
        current = next;
        j += 1.0;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::validate_kernel;

    fn two_state() -> (StochasticKernel, Distribution) {
        let q = validate_kernel(vec![vec![0.7, 0.3], vec![0.3, 0.7]]).unwrap();
        let pi = q.stationary_distribution().unwrap();
        (q, pi)
    }

    #[test]
    fn iid_second_moment_is_n_times_variance() {
        let q = validate_kernel(vec![vec![0.2, 0.5, 0.3]; 3]).unwrap();
        let pi = q.stationary_distribution().unwrap();
        let f = [1.0, 0.0, -1.0];
        let fbar = pi.center(&f);
        let var = pi.expect(&fbar.iter().map(|x| x * x).collect::<Vec<_>>());
        for n in [1, 7, 100] {
            let m = exact_second_moment(&q, &f, &pi, n).unwrap();
            assert!((m - n as f64 * var).abs() < 1e-12);
        }
    }

    #[test]
    fn two_state_second_moment_matches_autocovariance_sum() {
        // γ(k) = 0.25·0.4^k for f = (1, 0)
        let (q, pi) = two_state();
        let n = 100usize;
        let mut expected = n as f64 * 0.25;
        for k in 1..n {
            expected += 2.0 * (n - k) as f64 * 0.25 * 0.4f64.powi(k as i32);
        }
        let m = exact_second_moment(&q, &[1.0, 0.0], &pi, n).unwrap();
        assert!((m - expected).abs() < 1e-10);
        assert!((exact_second_moment(&q, &[1.0, 0.0], &pi, 1).unwrap() - 0.25).abs() < 1e-15);
    }

    #[test]
    fn identical_starts_never_decouple() {
        let (q, pi) = two_state();
        let profile = coupling_tail(&q, &pi, &pi, 20, 2).unwrap();
        assert!(profile.tail.iter().all(|t| t.abs() < 1e-15));
        let m = coupling_moment(&profile, 3.0).unwrap();
        assert!((m.value - 1.0).abs() < 1e-12);
    }

    #[test]
    fn iid_couples_in_one_step() {
        let q = validate_kernel(vec![vec![0.2, 0.5, 0.3]; 3]).unwrap();
        let xi = Distribution::dirac(3, 0).unwrap();
        let xi2 = Distribution::dirac(3, 2).unwrap();
        let profile = coupling_tail(&q, &xi, &xi2, 5, 1).unwrap();
        assert_eq!(profile.tail[0], 1.0);
        assert!(profile.tail[1..].iter().all(|t| t.abs() < 1e-15));
    }

    #[test]
    fn two_state_tail_is_geometric() {
        // ½‖δ₀Q^k − π‖₁ = ½·0.4^k
        let (q, pi) = two_state();
        let xi = Distribution::dirac(2, 0).unwrap();
        let profile = coupling_tail(&q, &xi, &pi, 30, 2).unwrap();
        for (k, t) in profile.tail.iter().enumerate() {
            assert!((t - 0.5 * 0.4f64.powi(k as i32)).abs() < 1e-14);
        }
    }

    #[test]
    fn first_moment_is_telescoped_tail_sum() {
        let (q, pi) = two_state();
        let xi = Distribution::dirac(2, 1).unwrap();
        let profile = coupling_tail(&q, &xi, &pi, 60, 2).unwrap();
        let m = coupling_moment(&profile, 1.0).unwrap();
        let sum: f64 = 1.0 + profile.tail[1..].iter().sum::<f64>();
        assert!((m.value - sum).abs() < 1e-12);
        // 1 + ½ Σ_{k≥1} 0.4^k = 1 + ½·0.4/0.6
        assert!((m.value - (1.0 + 0.5 * 0.4 / 0.6)).abs() < 1e-12);
    }

    #[test]
    fn short_horizon_is_reported() {
        let (q, pi) = two_state();
        let xi = Distribution::dirac(2, 0).unwrap();
        let profile = coupling_tail(&q, &xi, &pi, 1, 2).unwrap();
        assert!(matches!(
            coupling_moment(&profile, 4.0),
            Err(Error::HorizonTooShort { .. })
        ));
    }

    #[test]
    fn remainder_bound_covers_truncated_mass() {
        let (q, pi) = two_state();
        let xi = Distribution::dirac(2, 0).unwrap();
        for p in [1.0, 2.0, 3.5] {
            // analytic tail ½·0.4^k
            let exact = 1.0
                + (1..2000)
                    .map(|k| (((k + 1) as f64).powf(p) - (k as f64).powf(p)) * 0.5 * 0.4f64.powi(k))
                    .sum::<f64>();
            for h in [20, 30, 45] {
                let short = coupling_tail(&q, &xi, &pi, h, 2).unwrap();
                let m = coupling_moment(&short, p).unwrap();
                assert!(m.value <= exact * (1.0 + 1e-9));
                assert!(m.value + m.remainder_bound >= exact * (1.0 - 1e-9), "p={p} h={h}");
            }
        }
    }

    #[test]
    fn default_horizon_is_certified() {
        let h = default_coupling_horizon(2, 4.0);
        assert!(2.0 * 0.25f64.powi((h / 2) as i32) * ((h + 1) as f64).powi(4) < 1e-10);
        assert!(coupling_tail(
            &two_state().0,
            &Distribution::uniform(2).unwrap(),
            &Distribution::uniform(2).unwrap(),
            MAX_POWER + 1,
            1
        )
        .is_err());
    }
}
