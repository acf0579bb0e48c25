use serde::Serialize;

use crate::error::{Error, Result};
use crate::kernel::{Distribution, StochasticKernel};

/// Law of the initial state `Z_0`.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum InitialLaw {
    /// Start from the (exactly computed) invariant distribution.
    Stationary,
    Distribution(Distribution),
}

/// A kernel together with a test function `f` and an initial law.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChainModel {
    kernel: StochasticKernel,
    f: Vec<f64>,
    initial: InitialLaw,
}

impl ChainModel {
    pub fn new(kernel: StochasticKernel, f: Vec<f64>, initial: InitialLaw) -> Result<Self> {
        if f.len() != kernel.size() {
            return Err(Error::LengthMismatch {
                expected: kernel.size(),
                got: f.len(),
            });
        }
        if let Some(v) = f.iter().find(|v| !v.is_finite()) {
            return Err(Error::InvalidDistribution(format!(
                "test function value {v} is not finite"
            )));
        }
        if let InitialLaw::Distribution(d) = &initial {
            if d.len() != kernel.size() {
                return Err(Error::LengthMismatch {
                    expected: kernel.size(),
                    got: d.len(),
                });
            }
        }
        Ok(Self { kernel, f, initial })
    }

    pub fn kernel(&self) -> &StochasticKernel {
        &self.kernel
    }

    pub fn f(&self) -> &[f64] {
        &self.f
    }

    pub fn initial(&self) -> &InitialLaw {
        &self.initial
    }

    pub fn size(&self) -> usize {
        self.kernel.size()
    }

    /// `‖f‖_∞`.
    pub fn f_sup_norm(&self) -> f64 {
        sup_norm(&self.f)
    }

    pub fn with_initial(&self, initial: InitialLaw) -> Result<Self> {
        Self::new(self.kernel.clone(), self.f.clone(), initial)
    }

    pub fn with_f(&self, f: Vec<f64>) -> Result<Self> {
        Self::new(self.kernel.clone(), f, self.initial.clone())
    }

    /// Copy with `f` divided by `‖f‖_∞` when that exceeds one.
    pub fn rescaled(&self) -> Self {
        let norm = self.f_sup_norm();
        if norm <= 1.0 {
            return self.clone();
        }
        Self {
            kernel: self.kernel.clone(),
            f: self.f.iter().map(|v| v / norm).collect(),
            initial: self.initial.clone(),
        }
    }
}

pub(crate) fn sup_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}
