// Copyright 2026 The subgroup Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//   http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

//! Run configuration: one TOML file, every field defaulted.
//!
//! The top-level `seed` is the only seed; it is copied into the annealer,
//! the split plan and the simulators when the configuration is resolved.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use subgroup_core::annealer::AnnealerConfig;
use subgroup_core::frontier::{validate_alphas, DEFAULT_ALPHAS};
use subgroup_core::inference::{Sided, SplitPlan};
use subgroup_core::miner::{DiscretizationSpec, MinerConfig, Scheme, VariableSpec};
use subgroup_core::oracle::EnumerationBudget;
use subgroup_core::simgen::OutcomeSpec;
use subgroup_core::{Constraints, ObjectiveConfig};

use crate::error::{CliError, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    pub input: Option<PathBuf>,
    pub output: PathBuf,
    /// Worker threads for sweeps; all available cores when absent.
    pub threads: Option<usize>,
    pub data: DataConfig,
    pub constraints: Constraints,
    pub objective: ObjectiveConfig,
    pub miner: MinerConfig,
    pub annealer: AnnealerConfig,
    pub sweep: SweepConfig,
    pub split: SplitPlan,
    pub inference: InferenceConfig,
    pub oracle: EnumerationBudget,
    pub simulate: SimulateConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            input: None,
            output: PathBuf::from("out"),
            threads: None,
            data: DataConfig::default(),
            constraints: Constraints::default(),
            objective: ObjectiveConfig::default(),
            miner: MinerConfig::default(),
            annealer: AnnealerConfig::default(),
            sweep: SweepConfig::default(),
            split: SplitPlan::default(),
            inference: InferenceConfig::default(),
            oracle: EnumerationBudget::default(),
            simulate: SimulateConfig::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DataConfig {
    pub tau_hat: String,
    pub outcome: Option<String>,
    pub treatment: Option<String>,
    /// Covariates to discretize; when empty every other column is used with
    /// an inferred type.
    pub variables: Vec<VariableDecl>,
}

impl Default for DataConfig {
    fn default() -> Self {
        Self {
            tau_hat: "tau_hat".into(),
            outcome: None,
            treatment: None,
            variables: Vec::new(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum VariableKind {
    Binary,
    Categorical,
    Ordinal,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VariableDecl {
    pub name: String,
    #[serde(rename = "type")]
    pub kind: VariableKind,
    /// Quantile probabilities for ordinal variables; quartiles by default.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cuts: Option<Vec<f64>>,
}

impl VariableDecl {
    pub fn scheme(&self) -> Result<Scheme> {
        match (self.kind, &self.cuts) {
            (VariableKind::Binary, None) => Ok(Scheme::Binary),
            (VariableKind::Categorical, None) => Ok(Scheme::Categorical),
            (VariableKind::Ordinal, None) => Ok(Scheme::ordinal_quartiles()),
            (VariableKind::Ordinal, Some(cuts)) => Ok(Scheme::Ordinal { cuts: cuts.clone() }),
            (_, Some(_)) => Err(CliError::Config(format!(
                "variable {}: cuts only apply to ordinal variables",
                self.name
            ))),
        }
    }
}

impl DataConfig {
    pub fn discretization(&self) -> Result<DiscretizationSpec> {
        let variables = self
            .variables
            .iter()
            .map(|v| {
                Ok(VariableSpec {
                    name: v.name.clone(),
                    scheme: v.scheme()?,
                })
            })
            .collect::<Result<_>>()?;
        Ok(DiscretizationSpec {
            variables,
            tau_hat: self.tau_hat.clone(),
            outcome: self.outcome.clone(),
            treatment: self.treatment.clone(),
        })
    }

    /// Names of columns that are not covariates.
    pub fn reserved(&self) -> Vec<&str> {
        let mut out = vec![self.tau_hat.as_str()];
        out.extend(self.outcome.as_deref());
        out.extend(self.treatment.as_deref());
        out
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepConfig {
    pub alphas: Vec<f64>,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            alphas: DEFAULT_ALPHAS.to_vec(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct InferenceConfig {
    /// Test level.
    pub level: f64,
    pub sided: Sided,
    /// Null value of the fixed-threshold test.
    pub threshold: f64,
}

impl Default for InferenceConfig {
    fn default() -> Self {
        Self {
            level: 0.05,
            sided: Sided::TwoSided,
            threshold: 0.0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Dgp {
    Concave,
    Convex,
    Continuous,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimulateConfig {
    pub dgp: Dgp,
    /// Sample size; 1000 for the discrete designs and 10000 for the
    /// continuous one when absent.
    pub n: Option<usize>,
    pub outcome: OutcomeSpec,
}

impl Default for SimulateConfig {
    fn default() -> Self {
        Self {
            dgp: Dgp::Concave,
            n: None,
            outcome: OutcomeSpec::default(),
        }
    }
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("configuration is always serializable")
    }

    /// Propagates the seed and checks every parameter range.
    pub fn resolve(mut self) -> Result<Self> {
        self.annealer.seed = self.seed;
        self.split.seed = self.seed;
        self.annealer.validate()?;
        self.constraints.validate()?;
        self.objective.validate()?;
        validate_alphas(&self.sweep.alphas, &self.objective)?;
        if !(0.0..1.0).contains(&self.miner.min_support) {
            return Err(CliError::Config("miner.min_support must lie in [0, 1)".into()));
        }
        if self.miner.n_rules == 0 {
            return Err(CliError::Config("miner.n_rules must be positive".into()));
        }
        if !(self.inference.level > 0.0 && self.inference.level < 1.0) {
            return Err(CliError::Config("inference.level must lie in (0, 1)".into()));
        }
        if self.threads == Some(0) {
            return Err(CliError::Config("threads must be positive".into()));
        }
        self.data.discretization()?;
        Ok(self)
    }
}
