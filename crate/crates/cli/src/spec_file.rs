//! TOML chain specifications.
//!
//! ```toml
//! name = "two_state"
//! states = 2
//! matrix = [[0.7, 0.3], [0.3, 0.7]]
//! f = [1.0, 0.0]
//! initial = "stationary"   # or a distribution, e.g. [1.0, 0.0]
//! ```

use std::path::Path;

use mixbound::{validate_kernel, ChainModel, Distribution, InitialLaw};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum InitialSpec {
    Named(String),
    Vector(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChainSpecFile {
    pub name: String,
    pub states: usize,
    pub matrix: Vec<Vec<f64>>,
    pub f: Vec<f64>,
    pub initial: InitialSpec,
}

fn field(field: impl Into<String>, message: impl Into<String>) -> CliError {
    CliError::Field {
        field: field.into(),
        message: message.into(),
    }
}

impl ChainSpecFile {
    pub fn from_model(name: impl Into<String>, model: &ChainModel) -> Self {
        Self {
            name: name.into(),
            states: model.size(),
            matrix: model.kernel().to_rows(),
            f: model.f().to_vec(),
            initial: match model.initial() {
                InitialLaw::Stationary => InitialSpec::Named("stationary".into()),
                InitialLaw::Distribution(d) => InitialSpec::Vector(d.weights().to_vec()),
            },
        }
    }

    pub fn to_model(&self) -> Result<ChainModel, CliError> {
        if self.states == 0 {
            return Err(field("states", "must be at least 1"));
        }
        if self.matrix.len() != self.states {
            return Err(field(
                "matrix",
                format!("expected {} rows, got {}", self.states, self.matrix.len()),
            ));
        }
        for (i, row) in self.matrix.iter().enumerate() {
            if row.len() != self.states {
                return Err(field(
                    format!("matrix[{i}]"),
                    format!("expected {} entries, got {}", self.states, row.len()),
                ));
            }
        }
        if self.f.len() != self.states {
            return Err(field("f", format!("expected {} entries, got {}", self.states, self.f.len())));
        }
        if let Some(i) = self.f.iter().position(|v| !v.is_finite()) {
            return Err(field(format!("f[{i}]"), "must be finite"));
        }
        let kernel = validate_kernel(self.matrix.clone()).map_err(|e| field("matrix", e.to_string()))?;
        let initial = match &self.initial {
            InitialSpec::Named(s) if s == "stationary" => InitialLaw::Stationary,
            InitialSpec::Named(s) => {
                return Err(field("initial", format!("expected \"stationary\" or a vector, got \"{s}\"")));
            }
            InitialSpec::Vector(v) => {
                if v.len() != self.states {
                    return Err(field("initial", format!("expected {} entries, got {}", self.states, v.len())));
                }
                InitialLaw::Distribution(Distribution::new(v.clone()).map_err(|e| field("initial", e.to_string()))?)
            }
        };
        Ok(ChainModel::new(kernel, self.f.clone(), initial)?)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("chain spec serializes")
    }
}

pub fn parse_chain_spec_str(text: &str) -> Result<(String, ChainModel), CliError> {
    let spec: ChainSpecFile = toml::from_str(text).map_err(|e| CliError::Parse(e.to_string()))?;
    let model = spec.to_model()?;
    Ok((spec.name, model))
}

/// Reads and validates a chain spec, returning its name and model.
pub fn parse_chain_spec(path: &Path) -> Result<(String, ChainModel), CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    parse_chain_spec_str(&text).map_err(|e| match e {
        CliError::Parse(msg) => CliError::Parse(format!("{}: {msg}", path.display())),
        other => other,
    })
}
