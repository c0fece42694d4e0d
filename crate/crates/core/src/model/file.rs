//! TOML instance files.
//!
//! ```toml
//! m = 2
//! prior = [0.5, 0.5]
//! utility_gap = [2.0, -4.0]
//! user_belief = [0.5, 0.5]      # optional, defaults to prior
//! platform_value = [1.0, 1.0]   # optional, defaults to all ones
//! ```

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{Instance, ModelError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceFile {
    pub m: usize,
    pub prior: Vec<f64>,
    pub utility_gap: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub user_belief: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub platform_value: Option<Vec<f64>>,
}

impl InstanceFile {
    pub fn into_instance(self) -> Result<Instance> {
        if self.prior.len() != self.m {
            return Err(ModelError::DimensionMismatch {
                field: "prior",
                expected: self.m,
                found: self.prior.len(),
            });
        }
        let mut builder = Instance::builder(self.prior, self.utility_gap);
        if let Some(b) = self.user_belief {
            builder = builder.user_belief(b);
        }
        if let Some(v) = self.platform_value {
            builder = builder.platform_value(v);
        }
        builder.build()
    }
}

impl From<&Instance> for InstanceFile {
    fn from(inst: &Instance) -> Self {
        Self {
            m: inst.num_states(),
            prior: inst.prior().to_vec(),
            utility_gap: inst.utility_gap().to_vec(),
            user_belief: Some(inst.user_belief().to_vec()),
            platform_value: Some(inst.platform_value().to_vec()),
        }
    }
}

/// Parses and validates an instance from TOML text.
pub fn parse_instance(text: &str) -> Result<Instance> {
    let file: InstanceFile = toml::from_str(text).map_err(|e| ModelError::InstanceFile {
        path: "<input>".into(),
        reason: e.to_string(),
    })?;
    file.into_instance()
}

/// Reads, parses and validates an instance file.
pub fn load_instance(path: &Path) -> Result<Instance> {
    let text = std::fs::read_to_string(path).map_err(|e| ModelError::InstanceFile {
        path: path.display().to_string(),
        reason: e.to_string(),
    })?;
    parse_instance(&text).map_err(|e| match e {
        ModelError::InstanceFile { reason, .. } => ModelError::InstanceFile {
            path: path.display().to_string(),
            reason,
        },
        other => other,
    })
}
