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

//! The subcommands, as library functions over a resolved configuration.

use std::fs;
use std::path::{Path, PathBuf};

use log::info;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use subgroup_core::annealer::{best_of, ChainResult};
use subgroup_core::frontier::{run_alpha_chain, FrontierPoint};
use subgroup_core::inference::{diff_in_means_mask, power_rank, split};
use subgroup_core::miner::RawValues;
use subgroup_core::model::{coverage_of_ruleset, subgroup_effect};
use subgroup_core::oracle::{exact_argmax, exact_front};
use subgroup_core::simgen::{self, ContinuousDgpSpec, DiscreteDgpSpec, InteractionCatalog, Simulation};
use subgroup_core::{Dataset, ObjectiveConfig};

use crate::config::{DataConfig, Dgp, RunConfig, VariableDecl, VariableKind};
use crate::data::load_path;
use crate::error::{CliError, Result};
use crate::pipeline::{build_pool, par_sweep, with_threads};
use crate::report::{
    front_curve, write_curve, write_inference, write_json, write_pool, write_text, write_trace, FrontDoc,
    InferenceRow, PointDoc,
};

pub const RESOLVED_CONFIG: &str = "config.resolved.toml";

fn prepare_output(cfg: &RunConfig) -> Result<&Path> {
    let out = cfg.output.as_path();
    fs::create_dir_all(out).map_err(CliError::io(out))?;
    write_text(&out.join(RESOLVED_CONFIG), &cfg.to_toml())?;
    Ok(out)
}

fn load(cfg: &RunConfig) -> Result<Dataset> {
    let input = cfg
        .input
        .as_deref()
        .ok_or_else(|| CliError::Usage("no input file; pass --input or set `input` in the config".into()))?;
    let loaded = load_path(input, &cfg.data)?;
    info!(
        "loaded {} rows ({} dropped), {} condition columns",
        loaded.dataset.n(),
        loaded.rows_dropped,
        loaded.dataset.n_columns()
    );
    Ok(loaded.dataset)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Truth {
    pub dgp: Dgp,
    pub n: usize,
    pub seed: u64,
    /// Planted rules with their effects (discrete designs).
    pub planted: Vec<(String, f64)>,
    /// Variable pairs whose product appears in the true effect.
    pub interactions: Vec<(String, String)>,
    pub tau: Vec<f64>,
}

fn write_table(path: &Path, sim: &Simulation) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| CliError::Data(e.to_string()))?;
    let names = sim.table.names();
    w.write_record(names).map_err(|e| CliError::Data(e.to_string()))?;
    let cols: Vec<&RawValues> = names.iter().map(|n| sim.table.get(n).expect("listed column")).collect();
    for i in 0..sim.table.n_rows() {
        let row: Vec<String> = cols
            .iter()
            .map(|c| match c {
                RawValues::Numeric(v) => v[i].to_string(),
                RawValues::Text(v) => v[i].clone(),
            })
            .collect();
        w.write_record(&row).map_err(|e| CliError::Data(e.to_string()))?;
    }
    w.flush().map_err(CliError::io(path))
}

/// Generates a simulated dataset plus its truth file and a ready-to-run
/// analysis configuration.
pub fn simulate(cfg: &RunConfig) -> Result<PathBuf> {
    let out = prepare_output(cfg)?;
    let sc = &cfg.simulate;
    let (sim, planted, interactions) = match sc.dgp {
        Dgp::Concave | Dgp::Convex => {
            let base = if sc.dgp == Dgp::Concave { DiscreteDgpSpec::concave() } else { DiscreteDgpSpec::convex() };
            let spec = DiscreteDgpSpec {
                n: sc.n.unwrap_or(base.n),
                seed: cfg.seed,
                outcome: sc.outcome,
                ..base
            };
            let planted = spec
                .rules
                .iter()
                .map(|(vars, mu)| {
                    let conds: Vec<String> = vars.iter().map(|&v| format!("{}=1", simgen::discrete_name(v))).collect();
                    (format!("({})", conds.join(" & ")), *mu)
                })
                .collect();
            (simgen::gen_discrete(&spec)?, planted, Vec::new())
        }
        Dgp::Continuous => {
            let spec = ContinuousDgpSpec {
                n: sc.n.unwrap_or(10_000),
                seed: cfg.seed,
                outcome: sc.outcome,
                ..Default::default()
            };
            let pairs = (1..=10)
                .flat_map(|a| ((a + 1)..=10).map(move |b| (format!("X{a}"), format!("X{b}"))))
                .filter(|(a, b)| InteractionCatalog::continuous().contains(a, b))
                .collect();
            (simgen::gen_continuous(&spec)?, Vec::new(), pairs)
        }
    };
    let data_path = out.join("data.csv");
    write_table(&data_path, &sim)?;
    let truth = Truth {
        dgp: sc.dgp,
        n: sim.tau.len(),
        seed: cfg.seed,
        planted,
        interactions,
        tau: sim.tau.clone(),
    };
    write_json(&out.join("truth.json"), &truth)?;

    let analysis = RunConfig {
        input: Some(data_path.clone()),
        data: DataConfig {
            tau_hat: sim.spec.tau_hat.clone(),
            outcome: sim.spec.outcome.clone(),
            treatment: sim.spec.treatment.clone(),
            variables: sim
                .spec
                .variables
                .iter()
                .map(|v| VariableDecl {
                    name: v.name.clone(),
                    kind: match v.scheme {
                        subgroup_core::miner::Scheme::Binary => VariableKind::Binary,
                        subgroup_core::miner::Scheme::Categorical => VariableKind::Categorical,
                        subgroup_core::miner::Scheme::Ordinal { .. } => VariableKind::Ordinal,
                    },
                    cuts: None,
                })
                .collect(),
        },
        ..cfg.clone()
    };
    write_text(&out.join("config.toml"), &analysis.to_toml())?;
    Ok(data_path)
}

/// Writes the culled rule pool; returns its size.
pub fn mine(cfg: &RunConfig) -> Result<usize> {
    let data = load(cfg)?;
    let out = prepare_output(cfg)?;
    let pool = build_pool(&data, &cfg.constraints, &cfg.miner)?;
    write_pool(&out.join("pool.csv"), &pool, &data)?;
    Ok(pool.len())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChainDoc {
    pub chain: usize,
    pub objective: f64,
    pub t0: f64,
    pub rules: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SearchDoc {
    pub best: PointDoc,
    pub chains: Vec<ChainDoc>,
}

/// Best rule set at a single alpha (or linear weight).
pub fn search(cfg: &RunConfig, alpha: f64) -> Result<SearchDoc> {
    let data = load(cfg)?;
    let out = prepare_output(cfg)?;
    let ocfg = cfg.objective.with_param(alpha);
    ocfg.validate()?;
    let pool = build_pool(&data, &cfg.constraints, &cfg.miner)?;
    let chains: Vec<ChainResult> = with_threads(cfg.threads, || {
        (0..cfg.annealer.restarts)
            .into_par_iter()
            .map(|c| run_alpha_chain(&data, &pool, alpha, &cfg.annealer, &cfg.objective, &cfg.constraints, c))
            .collect::<subgroup_core::Result<Vec<_>>>()
    })?
    .map_err(|e| CliError::Search(e.to_string()))?;
    if cfg.annealer.trace {
        for (k, c) in chains.iter().enumerate() {
            write_trace(&out.join(format!("trace_chain{k}.csv")), &c.trace)?;
        }
    }
    let docs = chains
        .iter()
        .enumerate()
        .map(|(chain, c)| ChainDoc {
            chain,
            objective: c.value,
            t0: c.t0,
            rules: data.format_ruleset(&c.ruleset),
        })
        .collect();
    let best = best_of(chains).ok_or_else(|| CliError::Search("no chains ran".into()))?;
    let point = FrontierPoint::evaluate(&data, best.ruleset, &ocfg)?;
    let doc = SearchDoc {
        best: PointDoc::new(&point, &data),
        chains: docs,
    };
    write_json(&out.join("search.json"), &doc)?;
    Ok(doc)
}

/// Full alpha sweep and Pareto filter on the whole input.
pub fn frontier(cfg: &RunConfig) -> Result<FrontDoc> {
    let data = load(cfg)?;
    let out = prepare_output(cfg)?;
    let pool = build_pool(&data, &cfg.constraints, &cfg.miner)?;
    let sweep = with_threads(cfg.threads, || {
        par_sweep(&data, &pool, &cfg.sweep.alphas, &cfg.annealer, &cfg.objective, &cfg.constraints)
    })??;
    let doc = FrontDoc::from_sweep(&sweep, &data);
    write_json(&out.join("front.json"), &doc)?;
    write_curve(&out.join("front.csv"), &[("search", front_curve(&sweep.front))])?;
    Ok(doc)
}

/// Searches on the training split, then tests every front point on the
/// held-out split and ranks points by planned power.
pub fn infer(cfg: &RunConfig) -> Result<Vec<InferenceRow>> {
    let data = load(cfg)?;
    if data.outcome().is_none() {
        return Err(CliError::Data("inference requires outcome and treatment columns".into()));
    }
    let out = prepare_output(cfg)?;
    let parts = split(&data, &cfg.split)?;
    let (train, test) = (&parts.train, &parts.test);
    let pool = build_pool(train, &cfg.constraints, &cfg.miner)?;
    let sweep = with_threads(cfg.threads, || {
        par_sweep(train, &pool, &cfg.sweep.alphas, &cfg.annealer, &cfg.objective, &cfg.constraints)
    })??;
    let ic = &cfg.inference;
    let ranking = power_rank(&sweep.front, train, test.n(), ic.level, ic.sided)?;

    let mut rows = Vec::with_capacity(sweep.front.len());
    let mut test_curve = Vec::new();
    for (index, p) in sweep.front.iter().enumerate() {
        let test_mask = coverage_of_ruleset(&p.ruleset, test)?;
        let mut notes = Vec::new();
        let train_mask = &p.coverage;
        let train_test = diff_in_means_mask(train_mask, train, ic.threshold, ic.sided);
        let test_result = diff_in_means_mask(&test_mask, test, ic.threshold, ic.sided);
        if let Err(e) = &test_result {
            notes.push(format!("test: {e}"));
        }
        let rank = ranking.iter().position(|r| r.index == index).expect("every point is ranked");
        let power = ranking[rank].power.as_ref().ok().copied();
        if let Err(e) = &ranking[rank].power {
            notes.push(format!("power: {e}"));
        }
        let tau_test = (test_mask.count() > 0).then(|| subgroup_effect(&test_mask, test));
        let test_support = test_mask.count() as f64 / test.n() as f64;
        if let Some(t) = tau_test {
            test_curve.push((test_support, t));
        }
        rows.push(InferenceRow {
            rules: data.format_ruleset(&p.ruleset),
            support_rate: p.support_rate,
            tau_train: p.effect,
            test_support_rate: test_support,
            tau_test,
            train_effect: train_test.as_ref().ok().map(|r| r.estimate),
            train_se: train_test.as_ref().ok().map(|r| r.se),
            test_effect: test_result.as_ref().ok().map(|r| r.estimate),
            test_se: test_result.as_ref().ok().map(|r| r.se),
            p_value: test_result.as_ref().ok().map(|r| r.p_value),
            power,
            power_rank: power.map(|_| rank + 1),
            note: notes.join("; "),
        });
    }
    write_json(&out.join("front.json"), &FrontDoc::from_sweep(&sweep, train))?;
    write_curve(
        &out.join("front.csv"),
        &[("train", front_curve(&sweep.front)), ("test", test_curve)],
    )?;
    write_inference(&out.join("inference.csv"), &rows)?;
    Ok(rows)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OracleDoc {
    pub front: Vec<PointDoc>,
    pub argmax: Vec<PointDoc>,
}

/// Exhaustive front and per-alpha maximizers over the culled pool.
pub fn oracle(cfg: &RunConfig) -> Result<OracleDoc> {
    let data = load(cfg)?;
    let out = prepare_output(cfg)?;
    let pool = build_pool(&data, &cfg.constraints, &cfg.miner)?;
    let front = exact_front(&data, &pool, &cfg.constraints, &cfg.oracle)?;
    let argmax = cfg
        .sweep
        .alphas
        .iter()
        .map(|&a| {
            let ocfg: ObjectiveConfig = cfg.objective.with_param(a);
            let (rs, _) = exact_argmax(&data, &pool, &cfg.constraints, &ocfg, &cfg.oracle)?;
            Ok(PointDoc::new(&FrontierPoint::evaluate(&data, rs, &ocfg)?, &data))
        })
        .collect::<Result<Vec<_>>>()?;
    let doc = OracleDoc {
        front: front.iter().map(|p| PointDoc::new(p, &data)).collect(),
        argmax,
    };
    write_json(&out.join("oracle.json"), &doc)?;
    write_curve(&out.join("oracle.csv"), &[("oracle", front_curve(&front))])?;
    Ok(doc)
}
