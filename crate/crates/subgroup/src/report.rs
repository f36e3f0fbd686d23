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

//! Output documents: JSON fronts, plot-ready CSVs, traces, pool listings.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use subgroup_core::annealer::SearchTrace;
use subgroup_core::frontier::{Front, FrontierPoint, SweepResult};
use subgroup_core::miner::RulePool;
use subgroup_core::Dataset;

use crate::error::{CliError, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PointDoc {
    pub alpha: f64,
    pub rules: String,
    pub support_rate: f64,
    pub effect: f64,
    pub objective: f64,
    pub complexity: usize,
    /// Hex digest of the coverage mask.
    pub fingerprint: String,
}

impl PointDoc {
    pub fn new(p: &FrontierPoint, data: &Dataset) -> Self {
        Self {
            alpha: p.alpha,
            rules: data.format_ruleset(&p.ruleset),
            support_rate: p.support_rate,
            effect: p.effect,
            objective: p.objective,
            complexity: p.complexity(),
            fingerprint: format!("{:016x}", p.fingerprint),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FailureDoc {
    pub alpha: f64,
    pub error: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FrontDoc {
    pub points: Vec<PointDoc>,
    /// Best rule set found at each alpha, before filtering.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub per_alpha: Vec<PointDoc>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub failures: Vec<FailureDoc>,
}

impl FrontDoc {
    pub fn from_front(front: &Front, data: &Dataset) -> Self {
        Self {
            points: front.iter().map(|p| PointDoc::new(p, data)).collect(),
            per_alpha: Vec::new(),
            failures: Vec::new(),
        }
    }

    pub fn from_sweep(sweep: &SweepResult, data: &Dataset) -> Self {
        let mut doc = Self::from_front(&sweep.front, data);
        for r in &sweep.raw {
            match &r.point {
                Ok(p) => doc.per_alpha.push(PointDoc::new(p, data)),
                Err(e) => doc.failures.push(FailureDoc {
                    alpha: r.alpha,
                    error: e.to_string(),
                }),
            }
        }
        doc
    }
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(CliError::io(path))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| CliError::Data(e.to_string()))?;
    text.push('\n');
    write_text(path, &text)
}

fn csv_writer(path: &Path) -> Result<csv::Writer<fs::File>> {
    csv::Writer::from_path(path).map_err(|e| csv_error(path, e))
}

fn csv_error(path: &Path, e: csv::Error) -> CliError {
    match e.into_kind() {
        csv::ErrorKind::Io(source) => CliError::Io {
            path: path.to_path_buf(),
            source,
        },
        other => CliError::Data(format!("{}: {other:?}", path.display())),
    }
}

/// Rows of `(support_rate, effect, split)`.
pub fn write_curve(path: &Path, curves: &[(&str, Vec<(f64, f64)>)]) -> Result<()> {
    let mut w = csv_writer(path)?;
    let wrap = |e| csv_error(path, e);
    w.write_record(["support_rate", "effect", "split"]).map_err(wrap)?;
    for (split, points) in curves {
        for (s, e) in points {
            w.serialize((s, e, split)).map_err(wrap)?;
        }
    }
    w.flush().map_err(CliError::io(path))
}

pub fn front_curve(front: &Front) -> Vec<(f64, f64)> {
    front.iter().map(|p| (p.support_rate, p.effect)).collect()
}

pub fn write_trace(path: &Path, trace: &SearchTrace) -> Result<()> {
    let mut w = csv_writer(path)?;
    let wrap = |e| csv_error(path, e);
    w.write_record(["iteration", "action", "noop", "neighborhood", "accepted", "proposal_objective", "objective", "temperature"])
        .map_err(wrap)?;
    for r in &trace.records {
        w.serialize((
            r.iteration,
            r.action.as_str(),
            r.noop,
            r.neighborhood.as_str(),
            r.accepted,
            r.proposal_objective,
            r.objective,
            r.temperature,
        ))
        .map_err(wrap)?;
    }
    w.flush().map_err(CliError::io(path))
}

pub fn write_pool(path: &Path, pool: &RulePool, data: &Dataset) -> Result<()> {
    let mut w = csv_writer(path)?;
    let wrap = |e| csv_error(path, e);
    w.write_record(["rule", "length", "support", "mean_tau", "provenance"]).map_err(wrap)?;
    for p in pool.iter() {
        let rs = subgroup_core::RuleSet::single(p.rule.clone());
        let provenance = match p.provenance {
            subgroup_core::miner::Provenance::Mined => "mined",
            subgroup_core::miner::Provenance::Injected => "injected",
        };
        w.serialize((data.format_ruleset(&rs), p.rule.len(), p.mask.count(), p.mean_tau, provenance))
            .map_err(wrap)?;
    }
    w.flush().map_err(CliError::io(path))
}

/// One row of the inference report.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InferenceRow {
    pub rules: String,
    pub support_rate: f64,
    /// Mean effect estimate on the training split.
    pub tau_train: f64,
    pub test_support_rate: f64,
    pub tau_test: Option<f64>,
    /// Difference in mean outcomes on the training split.
    pub train_effect: Option<f64>,
    pub train_se: Option<f64>,
    pub test_effect: Option<f64>,
    pub test_se: Option<f64>,
    pub p_value: Option<f64>,
    pub power: Option<f64>,
    pub power_rank: Option<usize>,
    /// Why a test or power value is missing.
    pub note: String,
}

pub fn write_inference(path: &Path, rows: &[InferenceRow]) -> Result<()> {
    let mut w = csv_writer(path)?;
    for r in rows {
        w.serialize(r).map_err(|e| csv_error(path, e))?;
    }
    w.flush().map_err(CliError::io(path))
}
