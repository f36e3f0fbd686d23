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

//! Synthetic data with known treatment effects.
//!
//! The discrete design plants effects on three nested-size conjunctions of
//! fair coins; the continuous design uses a smooth multiplicative effect
//! over ten uniform covariates, only six of which matter.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{invalid, Result};
use crate::frontier::Front;
use crate::miner::{discretize, DiscretizationSpec, Discretized, RawTable, RawValues, Scheme, VariableSpec};
use crate::model::{ConditionTest, Dataset};
use crate::stats::standard_normal;

pub const TAU_HAT: &str = "tau_hat";
pub const OUTCOME: &str = "y";
pub const TREATMENT: &str = "d";

/// Effect sizes planted on `A=1`, `B=1 & C=1` and `D=1 & E=1 & F=1`.
pub const CONCAVE_MU: [f64; 3] = [4.5, 6.5, 7.0];
pub const CONVEX_MU: [f64; 3] = [1.0, 5.0, 10.0];

/// Letter name of discrete variable `j` (`A`, `B`, ...).
pub fn discrete_name(j: usize) -> String {
    if j < 26 {
        char::from(b'A' + j as u8).to_string()
    } else {
        format!("V{j}")
    }
}

/// What gets written next to the covariates.
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default, deny_unknown_fields))]
pub struct OutcomeSpec {
    /// Emit `d ~ Bernoulli(1/2)` and `y = d * tau + N(0, 1)`.
    pub outcomes: bool,
    /// Standard deviation of Gaussian noise added to the effect estimates.
    pub tau_noise_sd: f64,
}

impl Default for OutcomeSpec {
    fn default() -> Self {
        Self {
            outcomes: true,
            tau_noise_sd: 0.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default, deny_unknown_fields))]
pub struct DiscreteDgpSpec {
    pub n: usize,
    pub j: usize,
    /// Planted rules as variable indices (all conditions `=1`) with their
    /// effects; later rules overwrite earlier ones where they overlap.
    pub rules: Vec<(Vec<usize>, f64)>,
    pub seed: u64,
    pub outcome: OutcomeSpec,
}

impl Default for DiscreteDgpSpec {
    fn default() -> Self {
        Self::with_mu(CONCAVE_MU)
    }
}

impl DiscreteDgpSpec {
    pub fn with_mu(mu: [f64; 3]) -> Self {
        Self {
            n: 1000,
            j: 10,
            rules: vec![(vec![0], mu[0]), (vec![1, 2], mu[1]), (vec![3, 4, 5], mu[2])],
            seed: 0,
            outcome: OutcomeSpec::default(),
        }
    }

    pub fn concave() -> Self {
        Self::with_mu(CONCAVE_MU)
    }

    pub fn convex() -> Self {
        Self::with_mu(CONVEX_MU)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 || self.j == 0 {
            return Err(invalid("n", "sample size and variable count must be positive"));
        }
        for (vars, mu) in &self.rules {
            if vars.is_empty() || vars.iter().any(|&v| v >= self.j) {
                return Err(invalid("rules", format!("rule {vars:?} references a missing variable")));
            }
            if !mu.is_finite() {
                return Err(invalid("rules", "effects must be finite"));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default, deny_unknown_fields))]
pub struct ContinuousDgpSpec {
    pub n: usize,
    pub scale: f64,
    pub seed: u64,
    pub outcome: OutcomeSpec,
}

impl Default for ContinuousDgpSpec {
    fn default() -> Self {
        Self {
            n: 10_000,
            scale: 1.0,
            seed: 0,
            outcome: OutcomeSpec::default(),
        }
    }
}

pub const CONTINUOUS_VARS: usize = 10;

/// `scale * (x1 + x2 + 1)(x4 + x5 + 1)(x7 + x8 + 1)` with 1-based names.
pub fn continuous_tau(x: &[f64; CONTINUOUS_VARS], scale: f64) -> f64 {
    scale * (x[0] + x[1] + 1.0) * (x[3] + x[4] + 1.0) * (x[6] + x[7] + 1.0)
}

/// A generated table plus its ground truth.
#[derive(Clone, Debug)]
pub struct Simulation {
    /// Covariates, `tau_hat`, and optionally `y` and `d`.
    pub table: RawTable,
    pub tau: Vec<f64>,
    pub spec: DiscretizationSpec,
}

impl Simulation {
    pub fn discretize(&self) -> Result<Discretized> {
        discretize(&self.table, &self.spec)
    }

    pub fn dataset(&self) -> Result<Dataset> {
        Ok(self.discretize()?.dataset)
    }
}

fn finish(
    rng: &mut ChaCha8Rng,
    mut table: RawTable,
    tau: Vec<f64>,
    outcome: &OutcomeSpec,
    variables: Vec<VariableSpec>,
) -> Result<Simulation> {
    if !(outcome.tau_noise_sd >= 0.0 && outcome.tau_noise_sd.is_finite()) {
        return Err(invalid("tau_noise_sd", "must be a nonnegative number"));
    }
    let tau_hat: Vec<f64> = if outcome.tau_noise_sd > 0.0 {
        tau.iter().map(|t| t + outcome.tau_noise_sd * standard_normal(rng)).collect()
    } else {
        tau.clone()
    };
    table.push(TAU_HAT, RawValues::Numeric(tau_hat))?;
    let mut spec = DiscretizationSpec {
        variables,
        tau_hat: TAU_HAT.into(),
        outcome: None,
        treatment: None,
    };
    if outcome.outcomes {
        let d: Vec<bool> = tau.iter().map(|_| rng.random_bool(0.5)).collect();
        let y = tau
            .iter()
            .zip(&d)
            .map(|(t, &di)| if di { *t } else { 0.0 } + standard_normal(rng))
            .collect();
        table.push(OUTCOME, RawValues::Numeric(y))?;
        table.push(TREATMENT, RawValues::Numeric(d.iter().map(|&b| f64::from(u8::from(b))).collect()))?;
        spec.outcome = Some(OUTCOME.into());
        spec.treatment = Some(TREATMENT.into());
    }
    Ok(Simulation { table, tau, spec })
}

/// Fair-coin binary covariates `A`, `B`, ... with planted effects.
pub fn gen_discrete(spec: &DiscreteDgpSpec) -> Result<Simulation> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let x: Vec<Vec<bool>> = (0..spec.j)
        .map(|_| (0..spec.n).map(|_| rng.random_bool(0.5)).collect())
        .collect();
    let mut tau = vec![0.0; spec.n];
    for (vars, mu) in &spec.rules {
        for (i, t) in tau.iter_mut().enumerate() {
            if vars.iter().all(|&v| x[v][i]) {
                *t = *mu;
            }
        }
    }
    let mut table = RawTable::new();
    let mut variables = vec![];
    for (j, col) in x.iter().enumerate() {
        let name = discrete_name(j);
        table.push(name.clone(), RawValues::Numeric(col.iter().map(|&b| f64::from(u8::from(b))).collect()))?;
        variables.push(VariableSpec {
            name,
            scheme: Scheme::Binary,
        });
    }
    finish(&mut rng, table, tau, &spec.outcome, variables)
}

/// Ten uniform covariates `X1..X10`, discretized at the quartiles.
pub fn gen_continuous(spec: &ContinuousDgpSpec) -> Result<Simulation> {
    if spec.n == 0 || !(spec.scale > 0.0 && spec.scale.is_finite()) {
        return Err(invalid("n", "sample size and scale must be positive"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let rows: Vec<[f64; CONTINUOUS_VARS]> = (0..spec.n)
        .map(|_| core::array::from_fn(|_| rng.random::<f64>()))
        .collect();
    let tau = rows.iter().map(|x| continuous_tau(x, spec.scale)).collect();
    let mut table = RawTable::new();
    let mut variables = vec![];
    for j in 0..CONTINUOUS_VARS {
        let name = format!("X{}", j + 1);
        table.push(name.clone(), RawValues::Numeric(rows.iter().map(|x| x[j]).collect()))?;
        variables.push(VariableSpec {
            name,
            scheme: Scheme::ordinal_quartiles(),
        });
    }
    finish(&mut rng, table, tau, &spec.outcome, variables)
}

/// Unordered variable-name pairs whose product is a term of the true effect.
#[derive(Clone, Debug, PartialEq)]
pub struct InteractionCatalog {
    pairs: Vec<(String, String)>,
}

impl InteractionCatalog {
    pub fn new(pairs: impl IntoIterator<Item = (String, String)>) -> Self {
        let mut pairs: Vec<(String, String)> = pairs
            .into_iter()
            .map(|(a, b)| if a <= b { (a, b) } else { (b, a) })
            .collect();
        pairs.sort();
        pairs.dedup();
        Self { pairs }
    }

    /// The twelve two-way terms of `(X1 + X2 + 1)(X4 + X5 + 1)(X7 + X8 + 1)`:
    /// every pairing of variables from different factors.
    pub fn continuous() -> Self {
        let factors = [[1, 2], [4, 5], [7, 8]];
        let mut pairs = vec![];
        for (a, fa) in factors.iter().enumerate() {
            for fb in &factors[a + 1..] {
                for x in fa {
                    for y in fb {
                        pairs.push((format!("X{x}"), format!("X{y}")));
                    }
                }
            }
        }
        Self::new(pairs)
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn contains(&self, a: &str, b: &str) -> bool {
        let key = if a <= b { (a, b) } else { (b, a) };
        self.pairs
            .binary_search_by(|(x, y)| (x.as_str(), y.as_str()).cmp(&key))
            .is_ok()
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct FaceValidity {
    pub pairs: usize,
    pub real_pairs: usize,
    /// Ordinal conditions (`<` or `>=`), counted with repeats.
    pub conditions: usize,
    pub at_least: usize,
}

impl FaceValidity {
    /// Share of within-rule variable pairs found in the catalog.
    pub fn real_interaction_rate(&self) -> Option<f64> {
        (self.pairs > 0).then(|| self.real_pairs as f64 / self.pairs as f64)
    }

    /// Share of ordinal conditions that are `>=` thresholds.
    pub fn directionality_rate(&self) -> Option<f64> {
        (self.conditions > 0).then(|| self.at_least as f64 / self.conditions as f64)
    }
}

/// Scores a front's rules against a catalog of true interactions.
pub fn face_validity(front: &Front, data: &Dataset, catalog: &InteractionCatalog) -> FaceValidity {
    let mut out = FaceValidity::default();
    for point in front.iter() {
        for rule in point.ruleset.rules() {
            let conds = rule.conditions();
            for (k, a) in conds.iter().enumerate() {
                match data.column_meta()[a.column].test {
                    ConditionTest::AtLeast { .. } => {
                        out.conditions += 1;
                        out.at_least += 1;
                    }
                    ConditionTest::Below { .. } => out.conditions += 1,
                    _ => {}
                }
                for b in &conds[k + 1..] {
                    out.pairs += 1;
                    let va = &data.variables()[a.variable];
                    let vb = &data.variables()[b.variable];
                    if catalog.contains(va, vb) {
                        out.real_pairs += 1;
                    }
                }
            }
        }
    }
    out
}
