//! Seeded simulation of chain trajectories and empirical checks of the
//! moment and tail bounds.
//!
//! Replication `r` of a run with seed `s` always draws from ChaCha8 stream `r`
//! of the generator keyed by `s`, so results do not depend on how
//! replications are scheduled across threads.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::bounds::{
    auxiliary_rosenthal_bound, bernstein_threshold, crude_variance_bound, poisson_variance_bound, rosenthal_bound,
};
use crate::error::{out_of_range, Error, Result};
use crate::kernel::{Distribution, StochasticKernel};
use crate::model::{ChainModel, InitialLaw};
use crate::poisson::{asymptotic_variance_poisson, decomposition_level, solve_poisson_direct};

/// Smallest replication count accepted by the moment estimators.
pub const MIN_REPLICATIONS: usize = 100;

/// Largest moment order accepted by [`CertifyConfig`].
pub const MAX_MOMENT_ORDER: f64 = 16.0;

/// Largest `s` accepted by [`estimate_r_ks`].
pub const MAX_DYADIC_LEVEL: u32 = 6;

/// Generator for replication `r` of a run seeded with `seed`.
pub fn rng_for_replication(seed: u64, replication: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(replication);
    rng
}

/// SplitMix64 finaliser of `seed ^ tag`; gives independent seeds to the
/// sub-simulations of one run.
pub fn derive_seed(seed: u64, tag: u64) -> u64 {
    let mut z = (seed ^ tag.wrapping_mul(0x9E37_79B9_7F4A_7C15)).wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn cumulative(weights: &[f64]) -> Vec<f64> {
    let mut acc = 0.0;
    let mut cdf: Vec<f64> = weights
        .iter()
        .map(|w| {
            acc += w;
            acc
        })
        .collect();
    if let Some(last) = cdf.last_mut() {
        *last = f64::INFINITY;
    }
    cdf
}

fn draw(cdf: &[f64], rng: &mut impl Rng) -> usize {
    let u: f64 = rng.random();
    cdf.partition_point(|c| *c <= u).min(cdf.len() - 1)
}

/// Inverse-CDF sampler for a kernel and an initial law.
#[derive(Debug, Clone)]
pub struct ChainSampler {
    rows: Vec<Vec<f64>>,
    initial: Vec<f64>,
}

impl ChainSampler {
    pub fn new(kernel: &StochasticKernel, initial: &Distribution) -> Result<Self> {
        if initial.len() != kernel.size() {
            return Err(Error::LengthMismatch {
                expected: kernel.size(),
                got: initial.len(),
            });
        }
        Ok(Self {
            rows: kernel.rows().map(cumulative).collect(),
            initial: cumulative(initial.weights()),
        })
    }

    /// Sampler for a model; a stationary start draws `Z_0` from the exact `π`.
    pub fn for_model(model: &ChainModel) -> Result<Self> {
        let initial = match model.initial() {
            InitialLaw::Stationary => model.kernel().stationary_distribution()?,
            InitialLaw::Distribution(d) => d.clone(),
        };
        Self::new(model.kernel(), &initial)
    }

    pub fn initial_state(&self, rng: &mut impl Rng) -> usize {
        draw(&self.initial, rng)
    }

    pub fn step(&self, z: usize, rng: &mut impl Rng) -> usize {
        draw(&self.rows[z], rng)
    }

    /// `Z_0, …, Z_{n−1}`.
    pub fn path(&self, n: usize, rng: &mut impl Rng) -> Vec<usize> {
        let mut out = Vec::with_capacity(n);
        if n == 0 {
            return out;
        }
        let mut z = self.initial_state(rng);
        out.push(z);
        for _ in 1..n {
            z = self.step(z, rng);
            out.push(z);
        }
        out
    }

    /// `Σ_{i<n} v(Z_i)` read off at each checkpoint `n` (ascending).
    pub fn partial_sums(&self, values: &[f64], checkpoints: &[usize], rng: &mut impl Rng) -> Vec<f64> {
        let mut out = Vec::with_capacity(checkpoints.len());
        let Some(&last) = checkpoints.last() else {
            return out;
        };
        let mut next = checkpoints.iter().peekable();
        while next.next_if_eq(&&0).is_some() {
            out.push(0.0);
        }
        if last == 0 {
            return out;
        }
        let mut z = self.initial_state(rng);
        let mut sum = values[z];
        for i in 1..=last {
            while next.next_if_eq(&&i).is_some() {
                out.push(sum);
            }
            if i == last {
                break;
            }
            z = self.step(z, rng);
            sum += values[z];
        }
        out
    }
}

#[cfg(feature = "parallel")]
fn map_replications<T: Send>(replications: usize, f: impl Fn(u64) -> T + Sync + Send) -> Vec<T> {
    use rayon::prelude::*;
    (0..replications as u64).into_par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
fn map_replications<T: Send>(replications: usize, f: impl Fn(u64) -> T + Sync + Send) -> Vec<T> {
    (0..replications as u64).map(f).collect()
}

/// `replications` trajectories of length `n`.
pub fn simulate_paths(model: &ChainModel, n: usize, replications: usize, seed: u64) -> Result<Vec<Vec<usize>>> {
    let sampler = ChainSampler::for_model(model)?;
    Ok(map_replications(replications, |r| {
        sampler.path(n, &mut rng_for_replication(seed, r))
    }))
}

/// Centred sums `S̄_n` of many replications at several horizons.
#[derive(Debug, Clone, PartialEq)]
pub struct AdditiveSamples {
    pub checkpoints: Vec<usize>,
    /// `sums[c][r]` is `S̄_{checkpoints[c]}` in replication `r`.
    pub sums: Vec<Vec<f64>>,
    pub seed: u64,
}

impl AdditiveSamples {
    pub fn replications(&self) -> usize {
        self.sums.first().map_or(0, Vec::len)
    }

    pub fn at(&self, n: usize) -> Option<&[f64]> {
        self.checkpoints.iter().position(|c| *c == n).map(|i| self.sums[i].as_slice())
    }
}

/// Simulates `Σ_{i<n} (v(Z_i) − π(v))` for every `n` in `checkpoints`, all
/// checkpoints sharing the same trajectories.
pub fn simulate_centered_sums(
    model: &ChainModel,
    values: &[f64],
    checkpoints: &[usize],
    replications: usize,
    seed: u64,
) -> Result<AdditiveSamples> {
    if values.len() != model.size() {
        return Err(Error::LengthMismatch {
            expected: model.size(),
            got: values.len(),
        });
    }
    let mut checkpoints = checkpoints.to_vec();
    checkpoints.sort_unstable();
    checkpoints.dedup();
    let pi = model.kernel().stationary_distribution()?;
    let centered = pi.center(values);
    let sampler = ChainSampler::for_model(model)?;
    let per_replication = map_replications(replications, |r| {
        sampler.partial_sums(&centered, &checkpoints, &mut rng_for_replication(seed, r))
    });
    let sums = (0..checkpoints.len())
        .map(|c| per_replication.iter().map(|row| row[c]).collect())
        .collect();
    Ok(AdditiveSamples { checkpoints, sums, seed })
}

/// [`simulate_centered_sums`] for the model's own `f`.
pub fn simulate_additive(
    model: &ChainModel,
    checkpoints: &[usize],
    replications: usize,
    seed: u64,
) -> Result<AdditiveSamples> {
    simulate_centered_sums(model, model.f(), checkpoints, replications, seed)
}

/// Empirical `E^{1/p}[|S̄_n|^p]` with a delta-method standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MomentEstimate {
    pub p: f64,
    pub n: usize,
    pub replications: usize,
    pub value: f64,
    pub std_error: f64,
    pub seed: u64,
}

/// Empirical `p`-th moment of `|x|` and its standard error.
fn raw_moment(sums: &[f64], p: f64) -> Result<(f64, f64)> {
    let max = sums.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    if max > 0.0 && p * max.ln() > 700.0 {
        return Err(Error::Overflow(format!(
            "|S|^p with p = {p} and max |S| = {max} exceeds the floating-point range"
        )));
    }
    let count = sums.len() as f64;
    let powers: Vec<f64> = sums.iter().map(|x| x.abs().powf(p)).collect();
    let mean = powers.iter().sum::<f64>() / count;
    let var = if sums.len() > 1 {
        powers.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (count - 1.0)
    } else {
        0.0
    };
    Ok((mean, (var / count).sqrt()))
}

/// Moment estimate from precomputed sums.
pub fn moment_from_sums(sums: &[f64], p: f64, n: usize, seed: u64) -> Result<MomentEstimate> {
    if !(p.is_finite() && p >= 1.0) {
        return Err(out_of_range("p", p, "p >= 1"));
    }
    if sums.len() < MIN_REPLICATIONS {
        return Err(out_of_range("replications", sums.len() as f64, "at least 100"));
    }
    let (mean, se_mean) = raw_moment(sums, p)?;
    let value = mean.powf(1.0 / p);
    let std_error = if mean > 0.0 {
        se_mean * value / (p * mean)
    } else {
        0.0
    };
    Ok(MomentEstimate {
        p,
        n,
        replications: sums.len(),
        value,
        std_error,
        seed,
    })
}

pub fn estimate_moment(model: &ChainModel, n: usize, p: f64, replications: usize, seed: u64) -> Result<MomentEstimate> {
    if !(p.is_finite() && p >= 1.0) {
        return Err(out_of_range("p", p, "p >= 1"));
    }
    if replications < MIN_REPLICATIONS {
        return Err(out_of_range("replications", replications as f64, "at least 100"));
    }
    let samples = simulate_additive(model, &[n], replications, seed)?;
    moment_from_sums(&samples.sums[0], p, n, seed)
}

/// Fraction of sums with `|S| >= threshold`.
pub fn tail_frequency(sums: &[f64], threshold: f64) -> f64 {
    if sums.is_empty() {
        return 0.0;
    }
    sums.iter().filter(|s| s.abs() >= threshold).count() as f64 / sums.len() as f64
}

/// Empirical `P(|S̄_n| >= threshold)`.
pub fn estimate_tail(model: &ChainModel, n: usize, threshold: f64, replications: usize, seed: u64) -> Result<f64> {
    let samples = simulate_additive(model, &[n], replications, seed)?;
    Ok(tail_frequency(&samples.sums[0], threshold))
}

/// Empirical `R_{k,s} = E^{1/2^{s−k+1}}[|Σ_{i<n} g_k(Z_i) − π(g_k)|^{2^{s−k}}]`
/// under a stationary start, with `g_k` built from the exact Poisson solution.
/// The returned `p` is the moment order `2^{s−k}`.
pub fn estimate_r_ks(
    model: &ChainModel,
    n: usize,
    k: u32,
    s: u32,
    replications: usize,
    seed: u64,
) -> Result<MomentEstimate> {
    if !(2..=MAX_DYADIC_LEVEL).contains(&s) {
        return Err(out_of_range("s", s as f64, "2 <= s <= 6"));
    }
    if !(1..=s).contains(&k) {
        return Err(out_of_range("k", k as f64, "1 <= k <= s"));
    }
    if replications < MIN_REPLICATIONS {
        return Err(out_of_range("replications", replications as f64, "at least 100"));
    }
    let q = model.kernel();
    let pi = q.stationary_distribution()?;
    let g = solve_poisson_direct(q, model.f(), &pi)?.g;
    let level = decomposition_level(q, &g, &pi, k)?;
    let stationary = model.with_initial(InitialLaw::Stationary)?;
    let samples = simulate_centered_sums(&stationary, &level.g_k, &[n], replications, seed)?;
    let order = 2f64.powi((s - k) as i32);
    let norm = moment_from_sums(&samples.sums[0], order, n, seed)?;
    let value = norm.value.sqrt();
    let std_error = if value > 0.0 { norm.std_error / (2.0 * value) } else { 0.0 };
    Ok(MomentEstimate {
        value,
        std_error,
        ..norm
    })
}

/// Comparison of a deterministic bound with an empirical estimate.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Verdict {
    pub bound_name: String,
    pub p: f64,
    pub n: usize,
    pub bound_value: f64,
    pub empirical_value: f64,
    pub std_error: f64,
    /// `bound / empirical`, only when the empirical value is positive.
    pub ratio: Option<f64>,
    /// `bound >= empirical − 3·std_error`.
    pub holds: bool,
}

impl Verdict {
    pub fn new(bound_name: impl Into<String>, p: f64, n: usize, bound_value: f64, empirical_value: f64, std_error: f64) -> Self {
        Self {
            bound_name: bound_name.into(),
            p,
            n,
            bound_value,
            empirical_value,
            std_error,
            ratio: (empirical_value > 0.0).then(|| bound_value / empirical_value),
            holds: bound_value >= empirical_value - 3.0 * std_error,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CertifyConfig {
    pub p_list: Vec<f64>,
    pub n_list: Vec<usize>,
    pub replications: usize,
    pub tail_replications: usize,
    pub seed: u64,
    pub delta_list: Vec<f64>,
    /// State `z` of the `δ_z` start; `None` skips the non-stationary rows.
    pub start_state: Option<usize>,
    /// Worker threads; `None` uses the global pool.
    pub threads: Option<usize>,
}

impl Default for CertifyConfig {
    fn default() -> Self {
        Self {
            p_list: vec![2.0, 4.0, 8.0],
            n_list: vec![10, 100, 1000],
            replications: 10_000,
            tail_replications: 10_000,
            seed: 0,
            delta_list: vec![(-2.0f64).exp(), 0.01],
            start_state: Some(0),
            threads: None,
        }
    }
}

impl CertifyConfig {
    pub fn validate(&self) -> Result<()> {
        if let Some(p) = self.p_list.iter().find(|p| !(p.is_finite() && **p >= 2.0 && **p <= MAX_MOMENT_ORDER)) {
            return Err(out_of_range("p", *p, "2 <= p <= 16"));
        }
        if self.n_list.contains(&0) {
            return Err(out_of_range("n", 0.0, "n >= 1"));
        }
        for reps in [self.replications, self.tail_replications] {
            if reps < MIN_REPLICATIONS {
                return Err(out_of_range("replications", reps as f64, "at least 100"));
            }
        }
        let limit = (-2.0f64).exp();
        if let Some(d) = self.delta_list.iter().find(|d| !(**d > 0.0 && **d <= limit)) {
            return Err(out_of_range("delta", *d, "0 < delta <= e^-2"));
        }
        if self.threads == Some(0) {
            return Err(out_of_range("threads", 0.0, "threads >= 1"));
        }
        Ok(())
    }
}

/// Verdicts for one chain together with its exact mixing quantities.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CertifyReport {
    pub tau: usize,
    pub sigma: f64,
    pub verdicts: Vec<Verdict>,
}

impl CertifyReport {
    pub fn all_hold(&self) -> bool {
        self.verdicts.iter().all(|v| v.holds)
    }
}

const STATIONARY_TAG: u64 = 1;
const DIRAC_TAG: u64 = 2;
const TAIL_TAG: u64 = 3;

/// Runs every bound in the config grid against simulation.
pub fn certify(model: &ChainModel, config: &CertifyConfig) -> Result<CertifyReport> {
    config.validate()?;
    match config.threads {
        #[cfg(feature = "parallel")]
        Some(threads) => rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .map_err(|e| Error::InvalidDistribution(format!("cannot build thread pool: {e}")))?
            .install(|| certify_inner(model, config)),
        _ => certify_inner(model, config),
    }
}

fn certify_inner(model: &ChainModel, config: &CertifyConfig) -> Result<CertifyReport> {
    let norm = model.f_sup_norm();
    if norm > 1.0 + 1e-12 {
        return Err(out_of_range("sup norm of f", norm, "at most 1 (rescale first)"));
    }
    let q = model.kernel();
    let tau = q.mixing_time()?;
    let pi = q.stationary_distribution()?;
    let g = solve_poisson_direct(q, model.f(), &pi)?.g;
    let sigma = asymptotic_variance_poisson(model.f(), &g, &pi).max(0.0).sqrt();

    let mut verdicts = Vec::new();
    let stationary = model.with_initial(InitialLaw::Stationary)?;
    let samples = simulate_additive(
        &stationary,
        &config.n_list,
        config.replications,
        derive_seed(config.seed, STATIONARY_TAG),
    )?;
    for &n in &config.n_list {
        let sums = samples.at(n).expect("checkpoint simulated");
        for &p in &config.p_list {
            let est = moment_from_sums(sums, p, n, samples.seed)?;
            let mut push = |name: &str, bound: f64| {
                verdicts.push(Verdict::new(name, p, n, bound, est.value, est.std_error));
            };
            push("rosenthal", rosenthal_bound(p, n, tau, sigma, true)?.total);
            push("auxiliary_rosenthal", auxiliary_rosenthal_bound(p, n, tau)?.total);
            if p == 2.0 {
                push("crude_variance", crude_variance_bound(n, tau));
                push("poisson_variance", poisson_variance_bound(n, tau, sigma));
            }
        }
    }

    if let Some(z) = config.start_state {
        let dirac = model.with_initial(InitialLaw::Distribution(Distribution::dirac(model.size(), z)?))?;
        let samples = simulate_additive(
            &dirac,
            &config.n_list,
            config.replications,
            derive_seed(config.seed, DIRAC_TAG),
        )?;
        for &n in &config.n_list {
            let sums = samples.at(n).expect("checkpoint simulated");
            for &p in &config.p_list {
                let est = moment_from_sums(sums, p, n, samples.seed)?;
                let bound = rosenthal_bound(p, n, tau, sigma, false)?.total;
                verdicts.push(Verdict::new("rosenthal_xi", p, n, bound, est.value, est.std_error));
            }
        }
    }

    if !config.delta_list.is_empty() {
        let samples = simulate_additive(
            &stationary,
            &config.n_list,
            config.tail_replications,
            derive_seed(config.seed, TAIL_TAG),
        )?;
        for &n in &config.n_list {
            let sums = samples.at(n).expect("checkpoint simulated");
            for &delta in &config.delta_list {
                let threshold = bernstein_threshold(delta, n, tau, sigma)?;
                let freq = tail_frequency(sums, threshold.value());
                let se = (freq * (1.0 - freq) / sums.len() as f64).sqrt();
                verdicts.push(Verdict::new("bernstein_tail", threshold.log_inv_delta, n, delta, freq, se));
            }
        }
    }

    Ok(CertifyReport { tau, sigma, verdicts })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::exact_second_moment;
    use crate::kernel::validate_kernel;

    fn two_state(initial: InitialLaw) -> ChainModel {
        let q = validate_kernel(vec![vec![0.7, 0.3], vec![0.3, 0.7]]).unwrap();
        ChainModel::new(q, vec![1.0, 0.0], initial).unwrap()
    }

    #[test]
    fn iid_marginals_match_binomial_band() {
        let mu = [0.2, 0.5, 0.3];
        let q = validate_kernel(vec![mu.to_vec(); 3]).unwrap();
        let model = ChainModel::new(q, vec![0.0; 3], InitialLaw::Stationary).unwrap();
        let draws = 100_000;
        let paths = simulate_paths(&model, 1, draws, 11).unwrap();
        for (i, m) in mu.iter().enumerate() {
            let freq = paths.iter().filter(|p| p[0] == i).count() as f64 / draws as f64;
            assert!((freq - m).abs() <= 4.0 * (m * (1.0 - m) / draws as f64).sqrt());
        }
    }

    #[test]
    fn fixed_seed_is_deterministic() {
        let model = two_state(InitialLaw::Stationary);
        assert_eq!(
            simulate_paths(&model, 20, 50, 3).unwrap(),
            simulate_paths(&model, 20, 50, 3).unwrap()
        );
        assert_ne!(
            simulate_paths(&model, 20, 50, 3).unwrap(),
            simulate_paths(&model, 20, 50, 4).unwrap()
        );
    }

    #[test]
    fn dirac_start_of_length_one() {
        let model = two_state(InitialLaw::Distribution(Distribution::dirac(2, 1).unwrap()));
        assert!(simulate_paths(&model, 1, 30, 0).unwrap().iter().all(|p| p == &vec![1]));
    }

    #[test]
    fn checkpoint_sums_match_paths() {
        let model = two_state(InitialLaw::Stationary);
        let sampler = ChainSampler::for_model(&model).unwrap();
        let values = [0.5, -0.5];
        let path = sampler.path(9, &mut rng_for_replication(5, 2));
        let sums = sampler.partial_sums(&values, &[0, 1, 4, 9], &mut rng_for_replication(5, 2));
        let direct = |n: usize| path[..n].iter().map(|z| values[*z]).sum::<f64>();
        assert_eq!(sums, vec![0.0, direct(1), direct(4), direct(9)]);
    }

    #[test]
    fn constant_f_has_zero_moment() {
        let model = two_state(InitialLaw::Stationary).with_f(vec![1.0, 1.0]).unwrap();
        let est = estimate_moment(&model, 50, 4.0, 200, 1).unwrap();
        assert_eq!(est.value, 0.0);
        assert_eq!(est.std_error, 0.0);
    }

    #[test]
    fn second_moment_matches_exact() {
        let model = two_state(InitialLaw::Stationary);
        let q = model.kernel();
        let pi = q.stationary_distribution().unwrap();
        let exact = exact_second_moment(q, model.f(), &pi, 100).unwrap();
        let est = estimate_moment(&model, 100, 2.0, 20_000, 9).unwrap();
        let second = est.value * est.value;
        // standard error of value² is 2·value·se
        assert!((second - exact).abs() <= 4.0 * 2.0 * est.value * est.std_error);
    }

    #[test]
    fn iid_second_moment_is_n_variance() {
        let q = validate_kernel(vec![vec![0.5, 0.5]; 2]).unwrap();
        let model = ChainModel::new(q, vec![1.0, 0.0], InitialLaw::Stationary).unwrap();
        let est = estimate_moment(&model, 40, 2.0, 20_000, 2).unwrap();
        let per_step = est.value * est.value / 40.0;
        assert!((per_step - 0.25).abs() <= 4.0 * 2.0 * est.value * est.std_error / 40.0);
    }

    #[test]
    fn lower_moment_does_not_exceed_higher() {
        let model = two_state(InitialLaw::Stationary);
        let samples = simulate_additive(&model, &[30], 5_000, 4).unwrap();
        let m2 = moment_from_sums(&samples.sums[0], 2.0, 30, 4).unwrap();
        let m4 = moment_from_sums(&samples.sums[0], 4.0, 30, 4).unwrap();
        assert!(m2.value <= m4.value + 3.0 * (m2.std_error + m4.std_error));
    }

    #[test]
    fn tail_extremes() {
        let model = two_state(InitialLaw::Stationary);
        assert_eq!(estimate_tail(&model, 10, 0.0, 500, 1).unwrap(), 1.0);
        assert_eq!(estimate_tail(&model, 10, 10.0 * 0.5 + 1e-9, 500, 1).unwrap(), 0.0);
    }

    #[test]
    fn moment_guards() {
        let model = two_state(InitialLaw::Stationary);
        assert!(estimate_moment(&model, 10, 0.5, 200, 1).is_err());
        assert!(estimate_moment(&model, 10, 2.0, 99, 1).is_err());
        assert!(matches!(
            moment_from_sums(&vec![1e3; 100], 200.0, 1, 0),
            Err(Error::Overflow(_))
        ));
    }

    #[test]
    fn r_ks_last_level_is_a_second_moment() {
        // 3-state chain so that g_k is not constant
        let q = validate_kernel(vec![vec![0.5, 0.3, 0.2], vec![0.1, 0.6, 0.3], vec![0.3, 0.2, 0.5]]).unwrap();
        let model = ChainModel::new(q.clone(), vec![1.0, 0.0, -0.5], InitialLaw::Stationary).unwrap();
        let pi = q.stationary_distribution().unwrap();
        let g = solve_poisson_direct(&q, model.f(), &pi).unwrap().g;
        let level = decomposition_level(&q, &g, &pi, 2).unwrap();
        let exact = exact_second_moment(&q, &level.g_k, &pi, 50).unwrap();
        let est = estimate_r_ks(&model, 50, 2, 3, 20_000, 6).unwrap();
        assert_eq!(est.p, 2.0);
        // R⁴ is the second moment; its standard error is 4R³·se
        let r4 = est.value.powi(4);
        assert!((r4 - exact).abs() <= 4.0 * 4.0 * est.value.powi(3) * est.std_error);
    }

    #[test]
    fn r_ks_vanishes_for_constant_f() {
        let model = two_state(InitialLaw::Stationary).with_f(vec![0.3, 0.3]).unwrap();
        assert_eq!(estimate_r_ks(&model, 20, 1, 3, 200, 0).unwrap().value, 0.0);
        assert!(estimate_r_ks(&model, 20, 0, 3, 200, 0).is_err());
        assert!(estimate_r_ks(&model, 20, 1, 7, 200, 0).is_err());
    }

    #[test]
    fn verdict_grace_and_ratio() {
        let v = Verdict::new("x", 2.0, 10, 1.0, 1.2, 0.1);
        assert!(v.holds);
        assert!((v.ratio.unwrap() - 1.0 / 1.2).abs() < 1e-15);
        assert!(!Verdict::new("x", 2.0, 10, 1.0, 1.4, 0.1).holds);
        assert_eq!(Verdict::new("x", 2.0, 10, 1.0, 0.0, 0.0).ratio, None);
    }

    #[test]
    fn config_validation() {
        assert!(CertifyConfig::default().validate().is_ok());
        let bad = [
            CertifyConfig { delta_list: vec![0.5], ..Default::default() },
            CertifyConfig { p_list: vec![0.5], ..Default::default() },
            CertifyConfig { p_list: vec![32.0], ..Default::default() },
            CertifyConfig { n_list: vec![0], ..Default::default() },
            CertifyConfig { replications: 10, ..Default::default() },
            CertifyConfig { threads: Some(0), ..Default::default() },
        ];
        for config in bad {
            assert!(config.validate().is_err(), "{config:?}");
        }
    }

    #[test]
    fn certify_small_grid_holds() {
        let model = two_state(InitialLaw::Stationary);
        let config = CertifyConfig {
            n_list: vec![10, 50],
            replications: 500,
            tail_replications: 500,
            ..Default::default()
        };
        let report = certify(&model, &config).unwrap();
        assert_eq!(report.tau, 2);
        assert!(report.all_hold());
        // 2 n × (3 p × 3 rows + 2 variance rows) + 2 n × 2 δ
        assert_eq!(report.verdicts.len(), 2 * (3 * 3 + 2) + 4);
        assert_eq!(report, certify(&model, &CertifyConfig { threads: Some(3), ..config }).unwrap());
    }

    #[test]
    fn certify_rejects_large_f() {
        let model = two_state(InitialLaw::Stationary).with_f(vec![2.0, 0.0]).unwrap();
        assert!(certify(&model, &CertifyConfig::default()).is_err());
    }
}
