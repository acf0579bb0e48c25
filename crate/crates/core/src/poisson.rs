//! Poisson equation `g − Qg = f − π(f)` and the asymptotic variance.
//!
//! Two independent routes are provided for both the solution and the
//! variance: a direct linear solve and a truncated series whose truncation
//! point comes from the a priori geometric tail `(1/4)^⌊k/τ⌋`.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{out_of_range, Error, Result};
use crate::kernel::{Distribution, StochasticKernel};
use crate::model::sup_norm;

/// Default absolute truncation tolerance for the series routes.
pub const DEFAULT_SERIES_TOLERANCE: f64 = 1e-12;

/// Maximal number of series terms before the input is declared non-mixing.
pub const MAX_SERIES_TERMS: usize = 1_000_000;

/// Largest admissible decomposition level `k` (powers up to `2^16`).
pub const MAX_DECOMPOSITION_LEVEL: u32 = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum PoissonMethod {
    DirectSolve,
    Series,
}

/// Zero-mean (`π(g) = 0`) solution of the Poisson equation.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PoissonSolution {
    pub g: Vec<f64>,
    /// `max_z |g(z) − Qg(z) − f̄(z)|`.
    pub residual: f64,
    pub sup_norm: f64,
    pub method: PoissonMethod,
}

/// `Σ_{j > k} (1/4)^⌊j/τ⌋`, in closed form.
pub fn uge_tail_sum(tau: usize, k: usize) -> f64 {
    let tau = tau.max(1);
    let m = (k + 1) / tau;
    let partial = ((m + 1) * tau - (k + 1)) as f64;
    let scale = 0.25f64.powi(m as i32);
    partial * scale + tau as f64 / 3.0 * scale
}

/// The cap `(8/3)·τ·‖f‖_∞` on the sup-norm of the zero-mean Poisson solution.
pub fn poisson_sup_norm_cap(tau: usize, f_sup_norm: f64) -> f64 {
    8.0 / 3.0 * tau as f64 * f_sup_norm
}

fn check_lengths(q: &StochasticKernel, f: &[f64], pi: &Distribution) -> Result<()> {
    for got in [f.len(), pi.len()] {
        if got != q.size() {
            return Err(Error::LengthMismatch {
                expected: q.size(),
                got,
            });
        }
    }
    Ok(())
}

fn finish(q: &StochasticKernel, f: &[f64], pi: &Distribution, mut g: Vec<f64>, method: PoissonMethod) -> PoissonSolution {
    let shift = pi.expect(&g);
    g.iter_mut().for_each(|x| *x -= shift);
    let fbar = pi.center(f);
    let qg = q.apply(&g);
    let residual = g
        .iter()
        .zip(&qg)
        .zip(&fbar)
        .fold(0.0f64, |m, ((g, qg), fb)| m.max((g - qg - fb).abs()));
    PoissonSolution {
        sup_norm: sup_norm(&g),
        g,
        residual,
        method,
    }
}

/// Solves `(I − Q)g = f̄` with the equation of the heaviest state replaced by
/// `π·g = 0`.
pub fn solve_poisson_direct(q: &StochasticKernel, f: &[f64], pi: &Distribution) -> Result<PoissonSolution> {
    check_lengths(q, f, pi)?;
    let n = q.size();
    let fbar = pi.center(f);
    let pivot = pi
        .weights()
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .map(|(i, _)| i)
        .unwrap_or(0);
    let system = DMatrix::from_fn(n, n, |i, j| {
        if i == pivot {
            pi.weights()[j]
        } else {
            (if i == j { 1.0 } else { 0.0 }) - q.row(i)[j]
        }
    });
    let mut rhs = DVector::from_column_slice(&fbar);
    rhs[pivot] = 0.0;
    if !system.iter().all(|x| x.is_finite()) {
        return Err(Error::SingularSystem);
    }
    let g = system
        .lu()
        .solve(&rhs)
        .ok_or(Error::SingularSystem)?;
    let solution = finish(q, f, pi, g.iter().copied().collect(), PoissonMethod::DirectSolve);
    if !solution.residual.is_finite() || solution.residual > 1e-6 * (1.0 + solution.sup_norm) {
        return Err(Error::SingularSystem);
    }
    Ok(solution)
}

fn series_terms(tau: usize, scale: f64, tol: f64) -> Result<usize> {
    if tol.is_nan() || tol <= 0.0 {
        return Err(out_of_range("tol", tol, "tol > 0"));
    }
    let mut k = 0;
    while scale * uge_tail_sum(tau, k) > tol {
        k += 1;
        if k > MAX_SERIES_TERMS {
            return Err(Error::NotMixing { horizon: MAX_SERIES_TERMS });
        }
    }
    Ok(k)
}

/// `g = Σ_{k=0}^{K} (Q^k f − π(f))`, with `K` the first index whose certified
/// tail `2‖f‖_∞ Σ_{j>K} (1/4)^⌊j/τ⌋` is at most `tol`.
pub fn solve_poisson_series(
    q: &StochasticKernel,
    f: &[f64],
    pi: &Distribution,
    tau: usize,
    tol: f64,
) -> Result<PoissonSolution> {
    check_lengths(q, f, pi)?;
    let terms = series_terms(tau, 2.0 * sup_norm(f), tol)?;
    let mean = pi.expect(f);
    let mut g = vec![0.0; q.size()];
    let mut current = f.to_vec();
    for k in 0..=terms {
        if k > 0 {
            current = q.apply(&current);
        }
        for (acc, v) in g.iter_mut().zip(&current) {
            *acc += v - mean;
        }
    }
    Ok(finish(q, f, pi, g, PoissonMethod::Series))
}

/// `σ²_π(f) = π(f̄²) + 2 Σ_{ℓ≥1} π(f̄ Q^ℓ f̄)`, truncated by the geometric
/// tail bound and clamped at zero when round-off pushes it just below.
pub fn asymptotic_variance_series(
    q: &StochasticKernel,
    f: &[f64],
    pi: &Distribution,
    tau: usize,
    tol: f64,
) -> Result<f64> {
    check_lengths(q, f, pi)?;
    let fbar = pi.center(f);
    let abs_mean = pi.expect(&fbar.iter().map(|x| x.abs()).collect::<Vec<_>>());
    let lags = series_terms(tau, 4.0 * abs_mean * sup_norm(f), tol)?;
    let weighted: Vec<f64> = fbar.iter().zip(pi.weights()).map(|(x, w)| x * w).collect();
    let dot = |v: &[f64]| weighted.iter().zip(v).map(|(a, b)| a * b).sum::<f64>();
    let mut sigma2 = dot(&fbar);
    let mut current = fbar.clone();
    for _ in 1..=lags {
        current = q.apply(&current);
        sigma2 += 2.0 * dot(&current);
    }
    if sigma2 < 0.0 && sigma2 > -tol.max(1e-12) {
        sigma2 = 0.0;
    }
    Ok(sigma2)
}

/// `π(f̄·(2g − f̄))`, the variance read off a zero-mean Poisson solution.
pub fn asymptotic_variance_poisson(f: &[f64], g: &[f64], pi: &Distribution) -> f64 {
    let fbar = pi.center(f);
    let integrand: Vec<f64> = fbar.iter().zip(g).map(|(fb, g)| fb * (2.0 * g - fb)).collect();
    pi.expect(&integrand)
}

/// Level `k` of the recursive Poisson decomposition:
/// `g_k = Q(g^{2^k}) − (Qg)^{2^k}` and `h_k = g^{2^k} − (Qg)^{2^k}`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecompositionLevel {
    pub k: u32,
    pub g_k: Vec<f64>,
    pub h_k: Vec<f64>,
    pub sup_h: f64,
}

impl DecompositionLevel {
    /// Cap `2^{k−1}((8/3)τ)^{2^k − 1}` on `‖h_k‖_∞` when `‖f‖_∞ <= 1`.
    pub fn sup_h_cap(k: u32, tau: usize) -> f64 {
        let exponent = 2f64.powi(k as i32) - 1.0;
        2f64.powi(k as i32 - 1) * (8.0 / 3.0 * tau as f64).powf(exponent)
    }
}

pub fn decomposition_level(q: &StochasticKernel, g: &[f64], pi: &Distribution, k: u32) -> Result<DecompositionLevel> {
    check_lengths(q, g, pi)?;
    if k == 0 || k > MAX_DECOMPOSITION_LEVEL {
        return Err(out_of_range("k", k as f64, "1 <= k <= 16"));
    }
    let power = 1i32 << k;
    let norm = sup_norm(g);
    if norm > 0.0 && power as f64 * norm.ln() > 700.0 {
        return Err(Error::Overflow(format!("‖g‖^{power} with ‖g‖ = {norm}")));
    }
    let qg = q.apply(g);
    let g_pow: Vec<f64> = g.iter().map(|x| x.powi(power)).collect();
    let q_g_pow = q.apply(&g_pow);
    let qg_pow: Vec<f64> = qg.iter().map(|x| x.powi(power)).collect();
    let g_k = q_g_pow.iter().zip(&qg_pow).map(|(a, b)| a - b).collect();
    let h_k: Vec<f64> = g_pow.iter().zip(&qg_pow).map(|(a, b)| a - b).collect();
    Ok(DecompositionLevel {
        k,
        sup_h: sup_norm(&h_k),
        g_k,
        h_k,
    })
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

    fn iid() -> (StochasticKernel, Distribution) {
        let q = validate_kernel(vec![vec![0.2, 0.5, 0.3]; 3]).unwrap();
        let pi = q.stationary_distribution().unwrap();
        (q, pi)
    }

    #[test]
    fn tail_sum_matches_brute_force() {
        for tau in 1..6 {
            for k in 0..30 {
                let brute: f64 = ((k + 1)..2000).map(|j| 0.25f64.powi((j / tau) as i32)).sum();
                assert!((uge_tail_sum(tau, k) - brute).abs() < 1e-13, "tau={tau} k={k}");
            }
        }
    }

    #[test]
    fn iid_solution_is_centered_f() {
        let (q, pi) = iid();
        let f = [1.0, -0.5, 0.25];
        let fbar = pi.center(&f);
        for sol in [
            solve_poisson_direct(&q, &f, &pi).unwrap(),
            solve_poisson_series(&q, &f, &pi, 1, DEFAULT_SERIES_TOLERANCE).unwrap(),
        ] {
            for (a, b) in sol.g.iter().zip(&fbar) {
                assert!((a - b).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn constant_f_gives_zero() {
        let (q, pi) = two_state();
        let f = [0.4, 0.4];
        assert!(solve_poisson_direct(&q, &f, &pi).unwrap().sup_norm < 1e-15);
        assert!(solve_poisson_series(&q, &f, &pi, 2, 1e-12).unwrap().sup_norm < 1e-15);
        assert_eq!(asymptotic_variance_series(&q, &f, &pi, 2, 1e-12).unwrap(), 0.0);
        assert!(asymptotic_variance_poisson(&f, &[0.0, 0.0], &pi).abs() < 1e-15);
    }

    #[test]
    fn two_state_closed_forms() {
        let (q, pi) = two_state();
        let f = [1.0, 0.0];
        // g = f̄ / (p + q)
        let expected = [0.5 / 0.6, -0.5 / 0.6];
        let direct = solve_poisson_direct(&q, &f, &pi).unwrap();
        let series = solve_poisson_series(&q, &f, &pi, 2, 1e-13).unwrap();
        for (i, e) in expected.iter().enumerate() {
            assert!((direct.g[i] - e).abs() < 1e-12);
            assert!((series.g[i] - e).abs() < 1e-12);
        }
        assert!(direct.residual < 1e-14);
        assert_eq!(direct.method, PoissonMethod::DirectSolve);
        assert_eq!(series.method, PoissonMethod::Series);

        // p q (2 − p − q) / (p + q)^3
        let closed = 0.09 * 1.4 / 0.216;
        let by_series = asymptotic_variance_series(&q, &f, &pi, 2, 1e-13).unwrap();
        let by_poisson = asymptotic_variance_poisson(&f, &direct.g, &pi);
        assert!((by_series - closed).abs() < 1e-12);
        assert!((by_poisson - closed).abs() < 1e-12);
    }

    #[test]
    fn iid_variance_is_plain_variance() {
        let (q, pi) = iid();
        let f = [1.0, -0.5, 0.25];
        let fbar = pi.center(&f);
        let var = pi.expect(&fbar.iter().map(|x| x * x).collect::<Vec<_>>());
        let g = solve_poisson_direct(&q, &f, &pi).unwrap().g;
        assert!((asymptotic_variance_series(&q, &f, &pi, 1, 1e-13).unwrap() - var).abs() < 1e-14);
        assert!((asymptotic_variance_poisson(&f, &g, &pi) - var).abs() < 1e-14);
    }

    #[test]
    fn level_one_for_iid_collapses() {
        let (q, pi) = iid();
        let f = [1.0, -0.5, 0.25];
        let g = pi.center(&f);
        let var = pi.expect(&g.iter().map(|x| x * x).collect::<Vec<_>>());
        let level = decomposition_level(&q, &g, &pi, 1).unwrap();
        for gk in &level.g_k {
            assert!((gk - var).abs() < 1e-14);
        }
        for (hk, x) in level.h_k.iter().zip(&g) {
            assert!((hk - x * x).abs() < 1e-14);
        }
    }

    #[test]
    fn level_guards() {
        let (q, pi) = two_state();
        assert!(decomposition_level(&q, &[0.1, -0.1], &pi, 0).is_err());
        assert!(decomposition_level(&q, &[0.1, -0.1], &pi, 17).is_err());
        assert!(matches!(
            decomposition_level(&q, &[1e3, -1e3], &pi, 10),
            Err(Error::Overflow(_))
        ));
    }

    #[test]
    fn series_rejects_bad_tolerance() {
        let (q, pi) = two_state();
        assert!(solve_poisson_series(&q, &[1.0, 0.0], &pi, 2, 0.0).is_err());
    }
}
