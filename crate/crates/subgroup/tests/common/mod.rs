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

//! Instance builders shared by the integration tests.

#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use subgroup::core::miner::{cull, discretize, mine_rules, DiscretizationSpec, Provenance, RawTable, RawValues};
use subgroup::core::miner::{RulePool, Scheme, VariableSpec};
use subgroup::core::simgen::{gen_discrete, DiscreteDgpSpec};
use subgroup::core::{Constraints, Dataset};

/// Constraints of the small exhaustive instances.
pub fn small_constraints() -> Constraints {
    Constraints {
        l_max: 2,
        c_max: 4,
        n_rules_cap: None,
    }
}

/// Random binary covariates with continuous effect estimates.
pub fn random_instance(seed: u64, vars: usize, n: usize) -> Dataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut table = RawTable::new();
    let mut variables = vec![];
    for v in 0..vars {
        let name = format!("V{v}");
        let mut bits: Vec<f64> = (0..n).map(|_| f64::from(u8::from(rng.random_bool(0.5)))).collect();
        // Keep every variable non-constant so the column count is stable.
        bits[0] = 0.0;
        bits[1] = 1.0;
        table.push(name.clone(), RawValues::Numeric(bits)).unwrap();
        variables.push(VariableSpec {
            name,
            scheme: Scheme::Binary,
        });
    }
    let tau = (0..n).map(|_| rng.random_range(-1.0..3.0)).collect();
    table.push("tau_hat", RawValues::Numeric(tau)).unwrap();
    let spec = DiscretizationSpec {
        variables,
        tau_hat: "tau_hat".into(),
        outcome: None,
        treatment: None,
    };
    discretize(&table, &spec).unwrap().dataset
}

/// All rules up to the constraint length, culled to at most `size`.
pub fn small_pool(data: &Dataset, size: usize) -> RulePool {
    let mined = mine_rules(data, &small_constraints(), 0.0).unwrap();
    cull(mined, size, data).unwrap()
}

pub fn discrete(mu: [f64; 3], seed: u64) -> Dataset {
    let spec = DiscreteDgpSpec {
        seed,
        ..DiscreteDgpSpec::with_mu(mu)
    };
    gen_discrete(&spec).unwrap().dataset().unwrap()
}

/// The three planted rules plus their complement partner `A=0`, which is
/// enough to express every vertex of the discrete designs' fronts.
pub fn planted_pool(data: &Dataset) -> RulePool {
    let rules = ["(A=1)", "(A=0)", "(B=1 & C=1)", "(D=1 & E=1 & F=1)"]
        .iter()
        .map(|t| data.parse_rule(t).unwrap())
        .collect();
    RulePool::from_rules(data, rules, Provenance::Injected).unwrap()
}
