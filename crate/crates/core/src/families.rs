//! Built-in chain families spanning a range of mixing times.
//!
//! Families can be written as short expressions, e.g. `two_state(0.3,0.3)`,
//! `iid(0.2,0.3,0.5)`, `iid(uniform-3)`, `random_doeblin(10,0.5)` or
//! `lazy(two_state(0.3,0.3),0.5)`.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{out_of_range, Error, Result};
use crate::kernel::{validate_kernel, Distribution, StochasticKernel};
use crate::model::{ChainModel, InitialLaw};

#[derive(Debug, Clone, PartialEq)]
pub enum ChainFamily {
    /// `[[1 − p, p], [q, 1 − q]]`.
    TwoState { p: f64, q: f64 },
    /// Every row equal to `mu`.
    Iid { mu: Vec<f64> },
    /// `ε·1μᵀ + (1 − ε)·R` with random `μ` and random stochastic `R`, so that
    /// `Δ(Q) <= 1 − ε`.
    RandomDoeblin { size: usize, epsilon: f64 },
    /// `λI + (1 − λ)Q_base`.
    Lazy { base: Box<ChainFamily>, lambda: f64 },
}

impl ChainFamily {
    pub fn iid_uniform(size: usize) -> Self {
        ChainFamily::Iid {
            mu: vec![1.0 / size.max(1) as f64; size],
        }
    }

    /// Kernel of the family; `seed` only matters for random families.
    pub fn kernel(&self, seed: u64) -> Result<StochasticKernel> {
        match self {
            ChainFamily::TwoState { p, q } => {
                for (name, v) in [("p", *p), ("q", *q)] {
                    if !(v > 0.0 && v <= 1.0) {
                        return Err(out_of_range(name, v, "0 < value <= 1"));
                    }
                }
                validate_kernel(vec![vec![1.0 - p, *p], vec![*q, 1.0 - q]])
            }
            ChainFamily::Iid { mu } => {
                let mu = Distribution::new(mu.clone())?;
                validate_kernel(vec![mu.weights().to_vec(); mu.len()])
            }
            ChainFamily::RandomDoeblin { size, epsilon } => {
                if *size == 0 {
                    return Err(Error::EmptyStateSpace);
                }
                if !(*epsilon > 0.0 && *epsilon <= 1.0) {
                    return Err(out_of_range("epsilon", *epsilon, "0 < epsilon <= 1"));
                }
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let minorant = random_distribution(&mut rng, *size);
                let rows = (0..*size)
                    .map(|_| {
                        random_distribution(&mut rng, *size)
                            .iter()
                            .zip(&minorant)
                            .map(|(r, m)| epsilon * m + (1.0 - epsilon) * r)
                            .collect()
                    })
                    .collect();
                validate_kernel(rows)
            }
            ChainFamily::Lazy { base, lambda } => base.kernel(seed)?.lazy(*lambda),
        }
    }

    /// Model with `f` the indicator of state 0 (so `‖f‖_∞ = 1`) and a
    /// stationary start.
    pub fn generate(&self, seed: u64) -> Result<ChainModel> {
        let kernel = self.kernel(seed)?;
        let mut f = vec![0.0; kernel.size()];
        f[0] = 1.0;
        ChainModel::new(kernel, f, InitialLaw::Stationary)
    }
}

/// Flat Dirichlet draw via normalised exponentials.
fn random_distribution(rng: &mut impl Rng, size: usize) -> Vec<f64> {
    let draws: Vec<f64> = (0..size).map(|_| -(1.0 - rng.random::<f64>()).ln()).collect();
    let total: f64 = draws.iter().sum();
    draws.into_iter().map(|d| d / total).collect()
}

/// Convenience wrapper over [`ChainFamily::generate`].
pub fn generate_chain(family: &ChainFamily, seed: u64) -> Result<ChainModel> {
    family.generate(seed)
}

impl fmt::Display for ChainFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ChainFamily::TwoState { p, q } => write!(f, "two_state({p},{q})"),
            ChainFamily::Iid { mu } => {
                let parts: Vec<String> = mu.iter().map(|m| m.to_string()).collect();
                write!(f, "iid({})", parts.join(","))
            }
            ChainFamily::RandomDoeblin { size, epsilon } => write!(f, "random_doeblin({size},{epsilon})"),
            ChainFamily::Lazy { base, lambda } => write!(f, "lazy({base},{lambda})"),
        }
    }
}

fn parse_error(msg: impl Into<String>) -> Error {
    Error::InvalidDistribution(format!("cannot parse chain family: {}", msg.into()))
}

/// Splits on commas at parenthesis depth zero.
fn split_args(args: &str) -> Vec<&str> {
    let mut out = Vec::new();
    let mut depth = 0i32;
    let mut start = 0;
    for (i, ch) in args.char_indices() {
        match ch {
            '(' => depth += 1,
            ')' => depth -= 1,
            ',' if depth == 0 => {
                out.push(args[start..i].trim());
                start = i + 1;
            }
            _ => {}
        }
    }
    out.push(args[start..].trim());
    out
}

fn number(s: &str) -> Result<f64> {
    s.parse::<f64>().map_err(|_| parse_error(format!("`{s}` is not a number")))
}

impl FromStr for ChainFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let open = s.find('(').ok_or_else(|| parse_error(format!("`{s}` has no argument list")))?;
        if !s.ends_with(')') {
            return Err(parse_error(format!("`{s}` is missing a closing parenthesis")));
        }
        let name = s[..open].trim();
        let args = split_args(&s[open + 1..s.len() - 1]);
        let arity = |n: usize| {
            if args.len() == n {
                Ok(())
            } else {
                Err(parse_error(format!("{name} takes {n} arguments, got {}", args.len())))
            }
        };
        match name {
            "two_state" => {
                arity(2)?;
                Ok(ChainFamily::TwoState {
                    p: number(args[0])?,
                    q: number(args[1])?,
                })
            }
            "iid" => {
                if let [single] = args.as_slice() {
                    if let Some(k) = single.strip_prefix("uniform-") {
                        let size = k
                            .parse::<usize>()
                            .map_err(|_| parse_error(format!("`{k}` is not a state count")))?;
                        return Ok(ChainFamily::iid_uniform(size));
                    }
                }
                Ok(ChainFamily::Iid {
                    mu: args.iter().map(|a| number(a)).collect::<Result<_>>()?,
                })
            }
            "random_doeblin" => {
                arity(2)?;
                let size = args[0]
                    .parse::<usize>()
                    .map_err(|_| parse_error(format!("`{}` is not a state count", args[0])))?;
                Ok(ChainFamily::RandomDoeblin {
                    size,
                    epsilon: number(args[1])?,
                })
            }
            "lazy" => {
                arity(2)?;
                Ok(ChainFamily::Lazy {
                    base: Box::new(args[0].parse()?),
                    lambda: number(args[1])?,
                })
            }
            other => Err(parse_error(format!("unknown family `{other}`"))),
        }
    }
}
