//! TOML experiment configs.
//!
//! ```toml
//! policy = "loglog"            # loglog | poly | no-info | full-reveal | hindsight
//! horizons = [1000, 10000]     # nonempty, strictly ascending
//! seeds = 20
//! master_seed = 7              # optional, default 0
//! output_dir = "out"           # optional; CSVs are written only when set
//!
//! [instance]                   # exactly one of:
//! path = "instance.toml"
//! # random = { m = 3, seed = 1, omega_range = [0.05, 1.0] }
//! # pricing = { value = 0.3, horizon = 1000000 }
//! ```

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::model::{load_instance, Instance};
use crate::policies::PolicyKind;
use crate::reductions::{build_pricing_instance, PricingInstance};
use crate::rng::rng_from_seed;
use crate::sampling::{random_instance, InstanceFamily};

use super::HarnessError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RandomSpec {
    pub m: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub omega_range: Option<(f64, f64)>,
    #[serde(default)]
    pub misspecified_belief: bool,
    #[serde(default)]
    pub value_range: Option<(f64, f64)>,
}

impl RandomSpec {
    pub fn family(&self) -> InstanceFamily {
        let mut family = InstanceFamily::baseline(self.m);
        if let Some(range) = self.omega_range {
            family.omega_range = range;
        }
        family.misspecified_belief = self.misspecified_belief;
        family.value_range = self.value_range;
        family
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PricingSpec {
    pub value: f64,
    pub horizon: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", deny_unknown_fields)]
pub enum InstanceSpec {
    Path(PathBuf),
    Random(RandomSpec),
    Pricing(PricingSpec),
}

impl InstanceSpec {
    /// Builds the instance; relative paths resolve against `base`.
    pub fn resolve(&self, base: Option<&Path>) -> Result<Instance, HarnessError> {
        match self {
            InstanceSpec::Path(path) => {
                let full = match base {
                    Some(dir) if path.is_relative() => dir.join(path),
                    _ => path.clone(),
                };
                Ok(load_instance(&full)?)
            }
            InstanceSpec::Random(spec) => {
                if spec.m < 2 {
                    return Err(HarnessError::Config {
                        path: "<instance.random>".into(),
                        reason: format!("random instances need m ≥ 2, got {}", spec.m),
                    });
                }
                Ok(random_instance(&mut rng_from_seed(spec.seed), &spec.family()))
            }
            InstanceSpec::Pricing(spec) => {
                let p = PricingInstance::new(spec.value, spec.horizon)?;
                Ok(build_pricing_instance(&p)?)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub policy: PolicyKind,
    pub horizons: Vec<u64>,
    pub seeds: u64,
    #[serde(default)]
    pub master_seed: u64,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
    pub instance: InstanceSpec,
    /// Directory that relative instance paths resolve against.
    #[serde(skip)]
    pub base_dir: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<(), String> {
        if self.horizons.is_empty() {
            return Err("horizons must be nonempty".into());
        }
        if self.horizons[0] == 0 {
            return Err("horizons must be positive".into());
        }
        if self.horizons.windows(2).any(|w| w[0] >= w[1]) {
            return Err(format!("horizons must be strictly ascending, got {:?}", self.horizons));
        }
        if self.seeds == 0 {
            return Err("seeds must be at least 1".into());
        }
        Ok(())
    }
}

/// Parses and validates config text; `origin` names the source in errors.
pub fn parse_config(text: &str, origin: &str) -> Result<ExperimentConfig, HarnessError> {
    let cfg: ExperimentConfig = toml::from_str(text).map_err(|e| HarnessError::Config {
        path: origin.to_string(),
        reason: e.to_string(),
    })?;
    cfg.validate().map_err(|reason| HarnessError::Config {
        path: origin.to_string(),
        reason,
    })?;
    Ok(cfg)
}

pub fn load_config(path: &Path) -> Result<ExperimentConfig, HarnessError> {
    let text = std::fs::read_to_string(path).map_err(|source| HarnessError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let mut cfg = parse_config(&text, &path.display().to_string())?;
    cfg.base_dir = path.parent().map(Path::to_path_buf);
    Ok(cfg)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_each_instance_kind() {
        let cfg = parse_config(
            "policy = \"loglog\"\nhorizons = [10, 100]\nseeds = 3\n[instance]\npath = \"a.toml\"\n",
            "t",
        )
        .unwrap();
        assert_eq!(cfg.instance, InstanceSpec::Path("a.toml".into()));
        let cfg = parse_config(
            "policy = \"poly\"\nhorizons = [10]\nseeds = 1\ninstance = { random = { m = 3, seed = 4 } }\n",
            "t",
        )
        .unwrap();
        assert!(matches!(cfg.instance, InstanceSpec::Random(RandomSpec { m: 3, seed: 4, .. })));
        let cfg = parse_config(
            "policy = \"no-info\"\nhorizons = [10]\nseeds = 1\n[instance.pricing]\nvalue = 0.3\nhorizon = 1000\n",
            "t",
        )
        .unwrap();
        let inst = cfg.instance.resolve(None).unwrap();
        assert_eq!(inst.num_states(), 2);
    }

    #[test]
    fn rejects_bad_configs() {
        let base = "policy = \"loglog\"\nseeds = 3\n[instance]\npath = \"a.toml\"\n";
        for horizons in ["[]", "[100, 10]", "[0, 5]"] {
            let text = format!("horizons = {horizons}\n{base}");
            assert!(matches!(parse_config(&text, "t"), Err(HarnessError::Config { .. })));
        }
        let err = parse_config("policy = \"greedy\"\nhorizons = [1]\nseeds = 1\n", "cfg.toml").unwrap_err();
        assert!(err.to_string().contains("cfg.toml"));
        assert!(err.to_string().contains("line"));
    }
}
