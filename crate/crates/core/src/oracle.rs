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

//! Exhaustive reference answers for small instances.
//!
//! Everything here enumerates every feasible rule set over a pool. The size
//! of that space is bounded before any expansion and the work is refused
//! when the bound exceeds the budget.

use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;

use crate::error::{Error, Result};
use crate::frontier::{Front, FrontierPoint};
use crate::mask::CoverageMask;
use crate::miner::{PoolRule, RulePool};
use crate::model::{is_sorted_subset, Dataset, RuleSet};
use crate::objective::{Constraints, Objective, ObjectiveConfig};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default, deny_unknown_fields))]
pub struct EnumerationBudget {
    pub max_pool: usize,
    /// Extra cap on rules per set, on top of the constraints.
    pub max_rules: Option<usize>,
    /// Extra cap on complexity, on top of the constraints.
    pub max_complexity: Option<usize>,
    /// Refuse when the predicted number of rule sets exceeds this.
    pub hard_cap: u128,
}

impl Default for EnumerationBudget {
    fn default() -> Self {
        Self {
            max_pool: 4096,
            max_rules: None,
            max_complexity: None,
            hard_cap: 2_000_000,
        }
    }
}

struct Limits {
    rules: usize,
    complexity: usize,
}

fn limits(c: &Constraints, b: &EnumerationBudget) -> Limits {
    Limits {
        rules: b.max_rules.map_or(c.max_rules(), |m| m.min(c.max_rules())),
        complexity: b.max_complexity.map_or(c.c_max, |m| m.min(c.c_max)),
    }
}

/// Number of subsets of `lengths` with at most `max_rules` members and total
/// length at most `max_complexity`. Nesting is ignored, so this bounds the
/// feasible count from above.
pub fn enumeration_bound(lengths: &[usize], max_rules: usize, max_complexity: usize) -> u128 {
    // ways[k][c]: subsets of k rules with total length c.
    let k_max = max_rules.min(lengths.len());
    let mut ways = vec![vec![0u128; max_complexity + 1]; k_max + 1];
    ways[0][0] = 1;
    for &len in lengths {
        for k in (1..=k_max).rev() {
            for c in (len..=max_complexity).rev() {
                ways[k][c] = ways[k][c].saturating_add(ways[k - 1][c - len]);
            }
        }
    }
    ways[1..].iter().flatten().fold(0u128, |acc, w| acc.saturating_add(*w))
}

fn check_budget(pool: &RulePool, lim: &Limits, budget: &EnumerationBudget) -> Result<()> {
    if pool.len() > budget.max_pool {
        return Err(Error::BudgetExceeded {
            bound: pool.len() as u128,
            cap: budget.max_pool as u128,
        });
    }
    let lengths: Vec<usize> = pool.iter().map(|p| p.rule.len()).collect();
    let bound = enumeration_bound(&lengths, lim.rules, lim.complexity);
    if bound > budget.hard_cap {
        return Err(Error::BudgetExceeded {
            bound,
            cap: budget.hard_cap,
        });
    }
    Ok(())
}

/// Calls `visit` once per feasible rule set, with the members in canonical
/// order and their joint coverage.
fn for_each(
    data: &Dataset,
    pool: &RulePool,
    constraints: &Constraints,
    budget: &EnumerationBudget,
    mut visit: impl FnMut(&[&PoolRule], &CoverageMask, usize),
) -> Result<()> {
    constraints.validate()?;
    let lim = limits(constraints, budget);
    check_budget(pool, &lim, budget)?;
    let mut rules: Vec<&PoolRule> = pool
        .iter()
        .filter(|p| p.rule.len() <= constraints.l_max)
        .collect();
    rules.sort_by(|a, b| a.rule.cmp(&b.rule));
    rules.dedup_by(|a, b| a.rule == b.rule);

    struct Walk<'p, F> {
        rules: Vec<&'p PoolRule>,
        lim: Limits,
        chosen: Vec<&'p PoolRule>,
        visit: F,
    }
    impl<'p, F: FnMut(&[&PoolRule], &CoverageMask, usize)> Walk<'p, F> {
        fn go(&mut self, from: usize, cov: &CoverageMask, complexity: usize) {
            for i in from..self.rules.len() {
                let r = self.rules[i];
                if complexity + r.rule.len() > self.lim.complexity {
                    continue;
                }
                let nested = self.chosen.iter().any(|c| {
                    is_sorted_subset(c.rule.conditions(), r.rule.conditions())
                        || is_sorted_subset(r.rule.conditions(), c.rule.conditions())
                });
                if nested {
                    continue;
                }
                let next = cov.or(&r.mask);
                self.chosen.push(r);
                (self.visit)(&self.chosen, &next, complexity + r.rule.len());
                if self.chosen.len() < self.lim.rules {
                    self.go(i + 1, &next, complexity + r.rule.len());
                }
                self.chosen.pop();
            }
        }
    }
    let mut walk = Walk {
        rules,
        lim,
        chosen: vec![],
        visit: &mut visit,
    };
    walk.go(0, &CoverageMask::zeros(data.n()), 0);
    Ok(())
}

fn to_ruleset(members: &[&PoolRule]) -> RuleSet {
    RuleSet::from_sorted_unchecked(members.iter().map(|p| p.rule.clone()).collect())
}

/// Every feasible rule set over `pool`, each once, in canonical order.
pub fn enumerate_rulesets(
    data: &Dataset,
    pool: &RulePool,
    constraints: &Constraints,
    budget: &EnumerationBudget,
) -> Result<Vec<RuleSet>> {
    let mut out = vec![];
    for_each(data, pool, constraints, budget, |m, _, _| out.push(to_ruleset(m)))?;
    Ok(out)
}

struct Scored {
    members: RuleSet,
    coverage: CoverageMask,
    effect: f64,
}

/// The exact (support, effect) Pareto front over all feasible rule sets.
///
/// Points carry `alpha = 1` and the objective at `alpha = 1`.
pub fn exact_front(
    data: &Dataset,
    pool: &RulePool,
    constraints: &Constraints,
    budget: &EnumerationBudget,
) -> Result<Front> {
    let objective = Objective::new(data, ObjectiveConfig::multiplicative(1.0)).ok();
    let mut all: Vec<Scored> = vec![];
    for_each(data, pool, constraints, budget, |m, cov, _| {
        if cov.count() > 0 {
            all.push(Scored {
                members: to_ruleset(m),
                coverage: cov.clone(),
                effect: crate::model::subgroup_effect(cov, data),
            });
        }
    })?;
    // Enumeration is canonical, so the first of each coverage class is the
    // canonically smallest; prefer lower complexity among equals.
    all.sort_by(|a, b| {
        a.coverage
            .words()
            .cmp(b.coverage.words())
            .then(a.members.complexity().cmp(&b.members.complexity()))
            .then_with(|| a.members.cmp(&b.members))
    });
    all.dedup_by(|later, first| later.coverage == first.coverage);

    let mut front: Vec<&Scored> = vec![];
    for p in &all {
        let (sp, ep) = (p.coverage.count(), p.effect);
        let dominated = all.iter().any(|q| {
            let (sq, eq) = (q.coverage.count(), q.effect);
            sq >= sp && eq >= ep && (sq > sp || eq > ep)
        });
        if dominated {
            continue;
        }
        match front
            .iter_mut()
            .find(|f| f.coverage.count() == sp && f.effect == ep)
        {
            Some(slot) => {
                let better = p
                    .members
                    .complexity()
                    .cmp(&slot.members.complexity())
                    .then_with(|| p.members.cmp(&slot.members))
                    == Ordering::Less;
                if better {
                    *slot = p;
                }
            }
            None => front.push(p),
        }
    }
    front.sort_by_key(|p| p.coverage.count());
    let points = front
        .into_iter()
        .map(|p| {
            let value = objective.as_ref().map_or(f64::NAN, |o| o.value(&p.coverage));
            FrontierPoint::from_parts(data, p.members.clone(), p.coverage.clone(), 1.0, value)
        })
        .collect();
    Ok(Front::from_sorted(points))
}

/// The global maximizer of the configured objective.
///
/// Ties go to larger support, then larger effect, then lower complexity,
/// then canonical order.
pub fn exact_argmax(
    data: &Dataset,
    pool: &RulePool,
    constraints: &Constraints,
    cfg: &ObjectiveConfig,
    budget: &EnumerationBudget,
) -> Result<(RuleSet, f64)> {
    let objective = Objective::new(data, *cfg)?;
    let mut best: Option<(f64, usize, f64, usize, RuleSet)> = None;
    for_each(data, pool, constraints, budget, |m, cov, complexity| {
        let value = objective.value(cov);
        let count = cov.count();
        let effect = if count == 0 {
            f64::NEG_INFINITY
        } else {
            crate::model::subgroup_effect(cov, data)
        };
        let wins = match &best {
            None => true,
            Some((bv, bc, be, bx, _)) => {
                value
                    .total_cmp(bv)
                    .then(count.cmp(bc))
                    .then(effect.total_cmp(be))
                    .then(bx.cmp(&complexity))
                    == Ordering::Greater
            }
        };
        // Enumeration is canonical, so exact ties keep the earlier set.
        if wins {
            best = Some((value, count, effect, complexity, to_ruleset(m)));
        }
    })?;
    best.map(|(v, _, _, _, rs)| (rs, v))
        .ok_or_else(|| crate::error::invalid("pool", "must contain at least one feasible rule"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::miner::{mine_rules, Provenance};
    use crate::model::fixtures::*;
    use crate::model::Rule;
    use crate::objective::{evaluate, is_feasible};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn singletons(k: usize) -> (Dataset, RulePool) {
        let cols: Vec<Vec<u8>> = (0..k).map(|v| (0..8).map(|i| ((i >> (v % 3)) & 1) as u8).collect()).collect();
        let refs: Vec<&[u8]> = cols.iter().map(|c| c.as_slice()).collect();
        let data = dataset_from_columns(&refs, &[0.0, 1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0]);
        let rules = (0..k).map(|c| Rule::from_columns(&data, &[c]).unwrap()).collect();
        let pool = RulePool::from_rules(&data, rules, Provenance::Injected).unwrap();
        (data, pool)
    }

    fn constraints(max_rules: usize) -> Constraints {
        Constraints {
            n_rules_cap: Some(max_rules),
            ..Constraints::new(3, 100)
        }
    }

    #[test]
    fn binomial_counts() {
        let (d3, p3) = singletons(3);
        let all = enumerate_rulesets(&d3, &p3, &constraints(2), &EnumerationBudget::default()).unwrap();
        assert_eq!(all.len(), 6);
        let (d4, p4) = singletons(4);
        let all = enumerate_rulesets(&d4, &p4, &constraints(3), &EnumerationBudget::default()).unwrap();
        assert_eq!(all.len(), 14);
        let mut sorted = all.clone();
        sorted.sort();
        sorted.dedup();
        assert_eq!(sorted.len(), all.len());
    }

    #[test]
    fn count_matches_subset_recount() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let data = random_binary(60, 4, &mut rng);
        let c = Constraints::new(2, 5);
        let pool = mine_rules(&data, &c, 0.0).unwrap();
        let mut small = RulePool::default();
        for p in pool.iter().step_by(3).take(14) {
            small.push(&data, p.rule.clone(), Provenance::Mined).unwrap();
        }
        let got = enumerate_rulesets(&data, &small, &c, &EnumerationBudget::default()).unwrap();
        let k = small.len();
        let mut expected = 0;
        for bits in 1u32..(1 << k) {
            let rules: Vec<Rule> = (0..k).filter(|i| bits >> i & 1 == 1).map(|i| small.rules()[i].rule.clone()).collect();
            if let Ok(rs) = RuleSet::new(rules) {
                if is_feasible(&rs, &c) {
                    expected += 1;
                }
            }
        }
        assert_eq!(got.len(), expected);
        for rs in &got {
            assert!(rs.validate().is_ok() && is_feasible(rs, &c));
        }
        let lengths: Vec<usize> = small.iter().map(|p| p.rule.len()).collect();
        assert!(enumeration_bound(&lengths, c.max_rules(), c.c_max) >= expected as u128);
    }

    #[test]
    fn bound_is_exact_without_nesting() {
        assert_eq!(enumeration_bound(&[1, 1, 1, 1], 3, 100), 14);
        assert_eq!(enumeration_bound(&[2, 2, 2], 3, 4), 6);
    }

    #[test]
    fn refuses_over_budget() {
        let (d, p) = singletons(4);
        let budget = EnumerationBudget { hard_cap: 10, ..Default::default() };
        match enumerate_rulesets(&d, &p, &constraints(3), &budget) {
            Err(Error::BudgetExceeded { bound, cap }) => assert_eq!((bound, cap), (14, 10)),
            other => panic!("{other:?}"),
        }
        let budget = EnumerationBudget { max_pool: 3, ..Default::default() };
        assert!(enumerate_rulesets(&d, &p, &constraints(3), &budget).is_err());
    }

    #[test]
    fn single_rule_front() {
        let (d, p) = singletons(4);
        let mut one = RulePool::default();
        one.push(&d, p.rules()[1].rule.clone(), Provenance::Mined).unwrap();
        let f = exact_front(&d, &one, &constraints(3), &EnumerationBudget::default()).unwrap();
        assert_eq!(f.len(), 1);
        assert_eq!(f.points()[0].ruleset, RuleSet::single(p.rules()[1].rule.clone()));
    }

    #[test]
    fn empty_rule_does_not_change_front() {
        let data = dataset_from_columns(
            &[&[1, 1, 0, 0, 0, 0], &[0, 0, 1, 1, 0, 0], &[1, 0, 1, 0, 1, 0], &[0, 0, 0, 0, 0, 0]],
            &[5.0, 4.0, 3.0, 1.0, 2.0, 0.0],
        );
        let rules: Vec<Rule> = (0..3).map(|c| Rule::from_columns(&data, &[c]).unwrap()).collect();
        let base = RulePool::from_rules(&data, rules.clone(), Provenance::Mined).unwrap();
        let mut aug = base.clone();
        aug.push(&data, Rule::from_columns(&data, &[3]).unwrap(), Provenance::Mined).unwrap();
        let c = constraints(4);
        let b = EnumerationBudget::default();
        assert_eq!(exact_front(&data, &base, &c, &b).unwrap(), exact_front(&data, &aug, &c, &b).unwrap());
    }

    #[test]
    fn argmax_matches_brute_force_and_lies_on_front() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let data = random_binary(80, 4, &mut rng);
        let c = Constraints::new(2, 4);
        let pool = mine_rules(&data, &c, 0.1).unwrap();
        let b = EnumerationBudget::default();
        let all = enumerate_rulesets(&data, &pool, &c, &b).unwrap();
        let front = exact_front(&data, &pool, &c, &b).unwrap();
        for alpha in [0.0, 0.25, 1.0, 3.0] {
            let cfg = ObjectiveConfig::multiplicative(alpha);
            let (rs, v) = exact_argmax(&data, &pool, &c, &cfg, &b).unwrap();
            let best = all.iter().map(|r| evaluate(r, &data, &cfg).unwrap()).fold(f64::NEG_INFINITY, f64::max);
            assert_eq!(v, best);
            assert_eq!(evaluate(&rs, &data, &cfg).unwrap(), v);
            if alpha > 0.0 {
                let cov = crate::model::coverage_of_ruleset(&rs, &data).unwrap();
                let eff = crate::model::subgroup_effect(&cov, &data);
                assert!(front.iter().any(|p| p.support == cov.count() && p.effect == eff), "alpha {alpha}");
            }
        }
    }

    #[test]
    fn front_is_dominance_free_and_covers_every_set() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let data = random_binary(100, 4, &mut rng);
        let c = Constraints::new(2, 4);
        let pool = mine_rules(&data, &c, 0.1).unwrap();
        let b = EnumerationBudget::default();
        let front = exact_front(&data, &pool, &c, &b).unwrap();
        for w in front.points().windows(2) {
            assert!(w[0].support < w[1].support && w[0].effect > w[1].effect);
        }
        for rs in enumerate_rulesets(&data, &pool, &c, &b).unwrap() {
            let cov = crate::model::coverage_of_ruleset(&rs, &data).unwrap();
            if cov.count() == 0 {
                continue;
            }
            let e = crate::model::subgroup_effect(&cov, &data);
            let covered = front.iter().any(|p| p.support >= cov.count() && p.effect >= e);
            assert!(covered);
        }
    }
}
