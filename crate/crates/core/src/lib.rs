//! Mixing-time based moment and deviation bounds for additive functionals of
//! finite Markov chains, with exact and Monte-Carlo checks.

pub mod analysis;
pub mod bounds;
pub mod error;
pub mod exact;
pub mod families;
pub mod kernel;
pub mod model;
pub mod montecarlo;
pub mod poisson;

pub use error::{Error, Result};
pub use families::{generate_chain, ChainFamily};
pub use kernel::{validate_kernel, Distribution, StochasticKernel};
pub use model::{ChainModel, InitialLaw};
