//! Finite-state Markov kernels.
//!
//! A [`StochasticKernel`] is a dense row-stochastic matrix on the state space
//! `{0, .., size - 1}`. Besides validation this module computes the stationary
//! distribution, total-variation distances, Dobrushin coefficients of matrix
//! powers and the mixing time `tau`, defined as the first `t` with
//! `Δ(Q^t) <= 1/4`. Submultiplicativity of `Δ` then gives
//! `½‖Q^n(z,·) − π‖ <= (1/4)^⌊n/τ⌋` for every `n`.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{out_of_range, Error, Result};

/// Maximal deviation of a row sum from one accepted by [`validate_kernel`].
pub const ROW_SUM_TOLERANCE: f64 = 1e-9;

/// Largest matrix power accepted by the power routines.
pub const MAX_POWER: usize = 1_000_000;

/// Default search horizon for [`StochasticKernel::mixing_profile`].
pub const DEFAULT_MIXING_HORIZON: usize = 10_000;

/// Contraction level defining the mixing time.
pub const MIXING_THRESHOLD: f64 = 0.25;

/// Singular values of `Qᵀ − I` below this are counted as invariant directions.
const EIGENSPACE_TOLERANCE: f64 = 1e-8;

/// Number of Dobrushin coefficients kept when no mixing time is found.
const UNMIXED_RECORD: usize = 64;

/// Probability vector on a finite state space.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Distribution {
    weights: Vec<f64>,
}

impl Distribution {
    /// Validates non-negativity and normalisation (within [`ROW_SUM_TOLERANCE`]),
    /// then renormalises exactly.
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::EmptyStateSpace);
        }
        if let Some((i, w)) = weights
            .iter()
            .enumerate()
            .find(|(_, w)| !w.is_finite() || **w < 0.0)
        {
            return Err(Error::InvalidDistribution(format!(
                "weight {w} at index {i} is negative or not finite"
            )));
        }
        let sum: f64 = weights.iter().sum();
        if (sum - 1.0).abs() > ROW_SUM_TOLERANCE {
            return Err(Error::InvalidDistribution(format!(
                "weights sum to {sum}, expected 1"
            )));
        }
        Ok(Self {
            weights: weights.into_iter().map(|w| w / sum).collect(),
        })
    }

    /// Point mass `δ_z`.
    pub fn dirac(size: usize, z: usize) -> Result<Self> {
        if size == 0 {
            return Err(Error::EmptyStateSpace);
        }
        if z >= size {
            return Err(out_of_range("state", z as f64, "an index below the state count"));
        }
        let mut weights = vec![0.0; size];
        weights[z] = 1.0;
        Ok(Self { weights })
    }

    pub fn uniform(size: usize) -> Result<Self> {
        if size == 0 {
            return Err(Error::EmptyStateSpace);
        }
        Ok(Self {
            weights: vec![1.0 / size as f64; size],
        })
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    /// `μ(f) = Σ μ_i f_i`.
    pub fn expect(&self, f: &[f64]) -> f64 {
        self.weights.iter().zip(f).map(|(w, v)| w * v).sum()
    }

    /// Centred copy `f − μ(f)`.
    pub fn center(&self, f: &[f64]) -> Vec<f64> {
        let mean = self.expect(f);
        f.iter().map(|v| v - mean).collect()
    }

    pub fn tv_distance(&self, other: &Distribution) -> Result<f64> {
        tv_distance(&self.weights, &other.weights)
    }
}

/// Total-variation distance `½ Σ |μ_i − ν_i|`.
pub fn tv_distance(mu: &[f64], nu: &[f64]) -> Result<f64> {
    if mu.len() != nu.len() {
        return Err(Error::LengthMismatch {
            expected: mu.len(),
            got: nu.len(),
        });
    }
    Ok(half_l1(mu, nu))
}

fn half_l1(a: &[f64], b: &[f64]) -> f64 {
    0.5 * a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum::<f64>()
}

/// Row-stochastic matrix `Q` stored row-major.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StochasticKernel {
    size: usize,
    entries: Vec<f64>,
}

/// Checks that `rows` is a square stochastic matrix and wraps it.
///
/// Rows within [`ROW_SUM_TOLERANCE`] of one are renormalised so that the
/// stored kernel is stochastic to machine precision.
pub fn validate_kernel(rows: Vec<Vec<f64>>) -> Result<StochasticKernel> {
    let size = rows.len();
    if size == 0 {
        return Err(Error::EmptyStateSpace);
    }
    let mut entries = Vec::with_capacity(size * size);
    for (i, row) in rows.iter().enumerate() {
        if row.len() != size {
            return Err(Error::NotSquare {
                row: i,
                len: row.len(),
                expected: size,
            });
        }
        if let Some((j, &value)) = row
            .iter()
            .enumerate()
            .find(|(_, v)| !v.is_finite() || **v < 0.0)
        {
            return Err(Error::InvalidEntry { row: i, col: j, value });
        }
        let sum: f64 = row.iter().sum();
        if (sum - 1.0).abs() > ROW_SUM_TOLERANCE {
            return Err(Error::RowSum { row: i, sum });
        }
        entries.extend(row.iter().map(|v| v / sum));
    }
    Ok(StochasticKernel { size, entries })
}

/// Dobrushin mixing profile of a kernel.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MixingProfile {
    /// `Δ(Q^t)` for `t = 1, 2, ..`, up to and including `tau` when found.
    pub deltas: Vec<f64>,
    /// Smallest `t` with `Δ(Q^t) <= 1/4`, if one exists within the horizon.
    pub tau: Option<usize>,
    pub horizon: usize,
}

impl MixingProfile {
    pub fn tau(&self) -> Result<usize> {
        self.tau.ok_or(Error::NotMixing {
            horizon: self.horizon,
        })
    }
}

impl StochasticKernel {
    /// Builds a kernel from a row-major buffer; see [`validate_kernel`].
    pub fn from_row_major(size: usize, entries: &[f64]) -> Result<Self> {
        if entries.len() != size * size {
            return Err(Error::LengthMismatch {
                expected: size * size,
                got: entries.len(),
            });
        }
        validate_kernel(entries.chunks(size.max(1)).map(<[f64]>::to_vec).collect())
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn row(&self, z: usize) -> &[f64] {
        &self.entries[z * self.size..(z + 1) * self.size]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.entries.chunks(self.size)
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        self.rows().map(<[f64]>::to_vec).collect()
    }

    /// `Qv`, i.e. `z ↦ Σ_y Q(z, y) v(y)`.
    pub fn apply(&self, v: &[f64]) -> Vec<f64> {
        debug_assert_eq!(v.len(), self.size);
        self.rows()
            .map(|row| row.iter().zip(v).map(|(q, x)| q * x).sum())
            .collect()
    }

    /// `μQ` for a row vector `μ`.
    pub fn left_apply(&self, mu: &[f64]) -> Vec<f64> {
        debug_assert_eq!(mu.len(), self.size);
        let mut out = vec![0.0; self.size];
        for (m, row) in mu.iter().zip(self.rows()) {
            if *m == 0.0 {
                continue;
            }
            for (o, q) in out.iter_mut().zip(row) {
                *o += m * q;
            }
        }
        out
    }

    /// `Q^t v` by `t` successive matrix-vector products.
    pub fn power_apply(&self, v: &[f64], t: usize) -> Result<Vec<f64>> {
        if v.len() != self.size {
            return Err(Error::LengthMismatch {
                expected: self.size,
                got: v.len(),
            });
        }
        let mut out = v.to_vec();
        for _ in 0..t {
            out = self.apply(&out);
        }
        Ok(out)
    }

    /// Dense `Q^t` by repeated squaring, row-major.
    pub fn matrix_power(&self, t: usize) -> Result<Vec<f64>> {
        if t > MAX_POWER {
            return Err(out_of_range("t", t as f64, "at most 1e6"));
        }
        let n = self.size;
        let mut result = identity(n);
        let mut base = self.entries.clone();
        let mut e = t;
        while e > 0 {
            if e & 1 == 1 {
                result = mat_mul(&result, &base, n);
            }
            e >>= 1;
            if e > 0 {
                base = mat_mul(&base, &base, n);
            }
        }
        Ok(result)
    }

    /// `Δ(Q^t) = max_{z,z'} ½‖Q^t(z,·) − Q^t(z',·)‖₁`.
    pub fn dobrushin_coefficient(&self, t: usize) -> Result<f64> {
        if t == 0 {
            return Err(out_of_range("t", 0.0, "t >= 1"));
        }
        Ok(dobrushin(&self.matrix_power(t)?, self.size))
    }

    /// Walks `Δ(Q^t)` for `t = 1, 2, ..` until it drops to 1/4.
    ///
    /// A single repeated-squaring evaluation of `Δ(Q^horizon)` rejects
    /// non-mixing inputs before the walk, so the cost is `O(τ·size³)`.
    pub fn mixing_profile(&self, horizon: usize) -> Result<MixingProfile> {
        if horizon == 0 || horizon > MAX_POWER {
            return Err(out_of_range("horizon", horizon as f64, "1 <= horizon <= 1e6"));
        }
        let n = self.size;
        let reachable = dobrushin(&self.matrix_power(horizon)?, n) <= MIXING_THRESHOLD;
        let limit = if reachable {
            horizon
        } else {
            horizon.min(UNMIXED_RECORD)
        };
        let mut deltas = Vec::new();
        let mut tau = None;
        let mut power = self.entries.clone();
        for t in 1..=limit {
            let delta = dobrushin(&power, n);
            deltas.push(delta);
            if delta <= MIXING_THRESHOLD {
                tau = Some(t);
                break;
            }
            power = mat_mul(&power, &self.entries, n);
        }
        Ok(MixingProfile {
            deltas,
            tau,
            horizon,
        })
    }

    /// Mixing time with the default horizon, failing on non-mixing kernels.
    pub fn mixing_time(&self) -> Result<usize> {
        self.mixing_profile(DEFAULT_MIXING_HORIZON)?.tau()
    }

    /// Unique invariant distribution, from the linear system `(Qᵀ − I)π = 0`
    /// with one redundant equation replaced by `Σ π_i = 1`.
    pub fn stationary_distribution(&self) -> Result<Distribution> {
        let n = self.size;
        let system = DMatrix::from_fn(n, n, |i, j| {
            self.entries[j * n + i] - if i == j { 1.0 } else { 0.0 }
        });
        let svd = system.clone().svd(false, false);
        let dimension = svd
            .singular_values
            .iter()
            .filter(|s| **s <= EIGENSPACE_TOLERANCE)
            .count();
        if dimension > 1 {
            return Err(Error::NonUniqueStationary { dimension });
        }
        let mut system = system;
        for j in 0..n {
            system[(n - 1, j)] = 1.0;
        }
        let mut rhs = DVector::zeros(n);
        rhs[n - 1] = 1.0;
        let solution = system
            .lu()
            .solve(&rhs)
            .ok_or(Error::NonUniqueStationary { dimension: 2 })?;
        // Round-off can leave entries of order -1e-17 on transient states.
        let weights: Vec<f64> = solution.iter().map(|w| w.max(0.0)).collect();
        let sum: f64 = weights.iter().sum();
        Ok(Distribution {
            weights: weights.into_iter().map(|w| w / sum).collect(),
        })
    }

    /// Power iteration on the lazy kernel `½(I + Q)`, which shares `π` with
    /// `Q` and converges for periodic chains as well.
    pub fn stationary_by_power_iteration(&self, tol: f64, max_iter: usize) -> Result<Distribution> {
        let mut mu = vec![1.0 / self.size as f64; self.size];
        for _ in 0..max_iter {
            let step = self.left_apply(&mu);
            let next: Vec<f64> = mu.iter().zip(&step).map(|(a, b)| 0.5 * (a + b)).collect();
            let change: f64 = next.iter().zip(&mu).map(|(a, b)| (a - b).abs()).sum();
            mu = next;
            if change <= tol {
                let sum: f64 = mu.iter().sum();
                return Ok(Distribution {
                    weights: mu.into_iter().map(|w| w / sum).collect(),
                });
            }
        }
        Err(Error::NotConverged {
            iterations: max_iter,
        })
    }

    /// Lazy version `λI + (1 − λ)Q`.
    pub fn lazy(&self, lambda: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&lambda) {
            return Err(out_of_range("lambda", lambda, "0 <= lambda < 1"));
        }
        let n = self.size;
        let entries = self
            .entries
            .iter()
            .enumerate()
            .map(|(idx, q)| {
                let diag = if idx / n == idx % n { lambda } else { 0.0 };
                diag + (1.0 - lambda) * q
            })
            .collect();
        Ok(Self { size: n, entries })
    }
}

pub(crate) fn identity(n: usize) -> Vec<f64> {
    let mut m = vec![0.0; n * n];
    for i in 0..n {
        m[i * n + i] = 1.0;
    }
    m
}

pub(crate) fn mat_mul(a: &[f64], b: &[f64], n: usize) -> Vec<f64> {
    let mut out = vec![0.0; n * n];
    for i in 0..n {
        let out_row = &mut out[i * n..(i + 1) * n];
        for k in 0..n {
            let aik = a[i * n + k];
            if aik == 0.0 {
                continue;
            }
            for (o, bkj) in out_row.iter_mut().zip(&b[k * n..(k + 1) * n]) {
                *o += aik * bkj;
            }
        }
    }
    out
}

/// Dobrushin coefficient of a row-major stochastic matrix.
pub(crate) fn dobrushin(m: &[f64], n: usize) -> f64 {
    let mut worst: f64 = 0.0;
    for i in 0..n {
        for j in (i + 1)..n {
            worst = worst.max(half_l1(&m[i * n..(i + 1) * n], &m[j * n..(j + 1) * n]));
        }
    }
    worst.min(1.0)
}
