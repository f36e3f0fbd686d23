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

//! Pool construction and the parallel alpha sweep.

use log::{debug, warn};
use rayon::prelude::*;
use subgroup_core::annealer::{AnnealerConfig, ChainResult};
use subgroup_core::frontier::{assemble_sweep, run_alpha_chain, validate_alphas, SweepResult};
use subgroup_core::miner::{cull, mine_rules, MinerConfig, RulePool};
use subgroup_core::{Constraints, Dataset, ObjectiveConfig};

use crate::error::{CliError, Result};

/// Mines every rule reaching the support threshold, then keeps the
/// `n_rules` most promising.
pub fn build_pool(data: &Dataset, constraints: &Constraints, miner: &MinerConfig) -> Result<RulePool> {
    let mined = mine_rules(data, constraints, miner.min_support)?;
    debug!("mined {} rules", mined.len());
    Ok(cull(mined, miner.n_rules, data)?)
}

/// Runs `f` on a pool of `threads` workers (all cores when `None`).
pub fn with_threads<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(t) = threads {
        builder = builder.num_threads(t);
    }
    let pool = builder.build().map_err(|e| CliError::Config(e.to_string()))?;
    Ok(pool.install(f))
}

/// The sweep with every (alpha, restart) chain run in parallel.
///
/// Results are gathered in (alpha, chain) order, so the output matches the
/// sequential sweep exactly.
pub fn par_sweep(
    data: &Dataset,
    pool: &RulePool,
    alphas: &[f64],
    annealer: &AnnealerConfig,
    objective: &ObjectiveConfig,
    constraints: &Constraints,
) -> Result<SweepResult> {
    validate_alphas(alphas, objective)?;
    annealer.validate()?;
    let jobs: Vec<(usize, usize)> = (0..alphas.len())
        .flat_map(|a| (0..annealer.restarts).map(move |c| (a, c)))
        .collect();
    let results: Vec<subgroup_core::Result<ChainResult>> = jobs
        .par_iter()
        .map(|&(a, c)| run_alpha_chain(data, pool, alphas[a], annealer, objective, constraints, c))
        .collect();
    let mut it = results.into_iter();
    let runs = alphas
        .iter()
        .map(|&a| (a, it.by_ref().take(annealer.restarts).collect()))
        .collect();
    let sweep = assemble_sweep(data, objective, runs)?;
    for (alpha, e) in sweep.failures() {
        warn!("alpha {alpha} failed: {e}");
    }
    Ok(sweep)
}
