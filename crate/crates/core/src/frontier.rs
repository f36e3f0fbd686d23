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

//! Alpha sweeps and Pareto filtering of the resulting rule sets.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::cmp::Ordering;

use crate::annealer::{best_of, AnnealerConfig, ChainResult, SearchContext};
use crate::error::{invalid, Error, Result};
use crate::mask::CoverageMask;
use crate::miner::RulePool;
use crate::model::{coverage_of_ruleset, subgroup_effect, Dataset, RuleSet};
use crate::objective::{Constraints, Objective, ObjectiveConfig};

/// Default sweep grid; denser where the trade-off moves fastest.
pub const DEFAULT_ALPHAS: [f64; 12] = [0.0, 0.05, 0.1, 0.25, 0.5, 0.75, 1.0, 1.5, 2.0, 3.0, 5.0, 10.0];

#[derive(Clone, Debug, PartialEq)]
pub struct FrontierPoint {
    /// Objective parameter the point was found at (the weight for linear runs).
    pub alpha: f64,
    pub ruleset: RuleSet,
    pub support: usize,
    pub support_rate: f64,
    pub effect: f64,
    pub objective: f64,
    pub coverage: CoverageMask,
    pub fingerprint: u64,
}

impl FrontierPoint {
    /// Scores `ruleset` from scratch on `data`.
    pub fn evaluate(data: &Dataset, ruleset: RuleSet, cfg: &ObjectiveConfig) -> Result<Self> {
        let objective = Objective::new(data, *cfg)?;
        let coverage = coverage_of_ruleset(&ruleset, data)?;
        let value = objective.value(&coverage);
        Ok(Self::from_parts(data, ruleset, coverage, cfg.param(), value))
    }

    pub(crate) fn from_parts(
        data: &Dataset,
        ruleset: RuleSet,
        coverage: CoverageMask,
        alpha: f64,
        objective: f64,
    ) -> Self {
        let support = coverage.count();
        Self {
            alpha,
            support,
            support_rate: support as f64 / data.n() as f64,
            effect: subgroup_effect(&coverage, data),
            objective,
            fingerprint: coverage.fingerprint(),
            coverage,
            ruleset,
        }
    }

    pub fn complexity(&self) -> usize {
        self.ruleset.complexity()
    }

    /// Weak dominance: at least as good on both axes, better on one.
    pub fn dominates(&self, other: &Self) -> bool {
        self.support_rate >= other.support_rate
            && self.effect >= other.effect
            && (self.support_rate > other.support_rate || self.effect > other.effect)
    }
}

/// Dominance-free points sorted by support ascending (effect descending).
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Front {
    points: Vec<FrontierPoint>,
}

impl Front {
    /// Wraps points that are already dominance-free and sorted.
    pub(crate) fn from_sorted(points: Vec<FrontierPoint>) -> Self {
        Self { points }
    }

    pub fn points(&self) -> &[FrontierPoint] {
        &self.points
    }

    pub fn into_points(self) -> Vec<FrontierPoint> {
        self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &FrontierPoint> {
        self.points.iter()
    }
}

fn by_alpha_then_simplicity(a: &FrontierPoint, b: &FrontierPoint) -> Ordering {
    a.alpha
        .total_cmp(&b.alpha)
        .then(a.complexity().cmp(&b.complexity()))
        .then(a.ruleset.cmp(&b.ruleset))
}

fn by_simplicity_then_alpha(a: &FrontierPoint, b: &FrontierPoint) -> Ordering {
    a.complexity()
        .cmp(&b.complexity())
        .then(a.ruleset.cmp(&b.ruleset))
        .then(a.alpha.total_cmp(&b.alpha))
}

/// Reduces `points` to a Pareto front.
///
/// Empty subgroups are dropped. Points with identical coverage collapse to
/// the one with the lowest alpha (then complexity, then canonical order);
/// weakly dominated points are removed; distinct coverages sharing the same
/// (support, effect) collapse to the simplest rule set. The result does not
/// depend on input order.
pub fn pareto_filter(points: Vec<FrontierPoint>) -> Front {
    let mut pts: Vec<FrontierPoint> = points.into_iter().filter(|p| p.support > 0).collect();

    pts.sort_by(|a, b| {
        a.fingerprint
            .cmp(&b.fingerprint)
            .then_with(|| a.coverage.words().cmp(b.coverage.words()))
            .then_with(|| by_alpha_then_simplicity(a, b))
    });
    pts.dedup_by(|later, first| later.coverage == first.coverage);

    let kept: Vec<bool> = pts
        .iter()
        .map(|p| !pts.iter().any(|q| q.dominates(p)))
        .collect();
    let mut pts: Vec<FrontierPoint> = pts
        .into_iter()
        .zip(kept)
        .filter_map(|(p, k)| k.then_some(p))
        .collect();

    pts.sort_by(|a, b| {
        a.support_rate
            .total_cmp(&b.support_rate)
            .then(b.effect.total_cmp(&a.effect))
            .then_with(|| by_simplicity_then_alpha(a, b))
    });
    pts.dedup_by(|later, first| {
        later.support_rate == first.support_rate && later.effect == first.effect
    });
    Front { points: pts }
}

/// Outcome of one sweep parameter.
#[derive(Clone, Debug)]
pub struct AlphaResult {
    pub alpha: f64,
    pub point: Result<FrontierPoint>,
    /// Objective of every restart, in chain order.
    pub chain_values: Vec<f64>,
}

#[derive(Clone, Debug)]
pub struct SweepResult {
    pub front: Front,
    pub raw: Vec<AlphaResult>,
}

impl SweepResult {
    pub fn failures(&self) -> impl Iterator<Item = (f64, &Error)> {
        self.raw.iter().filter_map(|r| r.point.as_ref().err().map(|e| (r.alpha, e)))
    }
}

pub fn validate_alphas(alphas: &[f64], cfg: &ObjectiveConfig) -> Result<()> {
    if alphas.is_empty() {
        return Err(invalid("alphas", "must not be empty"));
    }
    for &a in alphas {
        cfg.with_param(a).validate()?;
    }
    Ok(())
}

/// Runs chain `chain` at sweep parameter `alpha`.
pub fn run_alpha_chain(
    data: &Dataset,
    pool: &RulePool,
    alpha: f64,
    annealer: &AnnealerConfig,
    objective_cfg: &ObjectiveConfig,
    constraints: &Constraints,
    chain: usize,
) -> Result<ChainResult> {
    let objective = Objective::new(data, objective_cfg.with_param(alpha))?;
    SearchContext {
        data,
        pool,
        objective: &objective,
        constraints,
        cfg: annealer,
    }
    .run_chain(chain)
}

/// Builds the sweep result from per-alpha chain outcomes (in chain order).
///
/// A failed chain fails its alpha; the sweep fails only if every alpha did.
pub fn assemble_sweep(
    data: &Dataset,
    objective_cfg: &ObjectiveConfig,
    runs: Vec<(f64, Vec<Result<ChainResult>>)>,
) -> Result<SweepResult> {
    let mut raw = Vec::with_capacity(runs.len());
    for (alpha, chains) in runs {
        let chains: Result<Vec<ChainResult>> = chains.into_iter().collect();
        let (point, chain_values) = match chains {
            Ok(chains) => {
                let values = chains.iter().map(|c| c.value).collect();
                let point = match best_of(chains) {
                    Some(best) => FrontierPoint::evaluate(data, best.ruleset, &objective_cfg.with_param(alpha)),
                    None => Err(invalid("restarts", "must be at least 1")),
                };
                (point, values)
            }
            Err(e) => (Err(e), Vec::new()),
        };
        raw.push(AlphaResult {
            alpha,
            point,
            chain_values,
        });
    }
    if raw.iter().all(|r| r.point.is_err()) {
        let reasons: Vec<String> = raw
            .iter()
            .filter_map(|r| r.point.as_ref().err().map(|e| format!("alpha {}: {e}", r.alpha)))
            .collect();
        return Err(Error::SweepFailed(reasons.join("; ")));
    }
    let front = pareto_filter(raw.iter().filter_map(|r| r.point.clone().ok()).collect());
    Ok(SweepResult { front, raw })
}

/// Sequential sweep: every alpha, every restart, then the Pareto filter.
pub fn sweep(
    data: &Dataset,
    pool: &RulePool,
    alphas: &[f64],
    annealer: &AnnealerConfig,
    objective_cfg: &ObjectiveConfig,
    constraints: &Constraints,
) -> Result<SweepResult> {
    validate_alphas(alphas, objective_cfg)?;
    annealer.validate()?;
    let runs = alphas
        .iter()
        .map(|&a| {
            let chains = (0..annealer.restarts)
                .map(|c| run_alpha_chain(data, pool, a, annealer, objective_cfg, constraints, c))
                .collect();
            (a, chains)
        })
        .collect();
    assemble_sweep(data, objective_cfg, runs)
}
