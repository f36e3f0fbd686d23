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

//! Condition universe construction and candidate-rule mining.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{invalid, Error, Result};
use crate::mask::CoverageMask;
use crate::model::{coverage_of_rule, ColumnMeta, Condition, ConditionTest, Dataset, Rule};
use crate::objective::Constraints;

/// Raw values of one input column.
#[derive(Clone, Debug, PartialEq)]
pub enum RawValues {
    Numeric(Vec<f64>),
    Text(Vec<String>),
}

impl RawValues {
    pub fn len(&self) -> usize {
        match self {
            RawValues::Numeric(v) => v.len(),
            RawValues::Text(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn numeric(&self, column: &str) -> Result<Vec<f64>> {
        match self {
            RawValues::Numeric(v) => Ok(v.clone()),
            RawValues::Text(v) => v
                .iter()
                .enumerate()
                .map(|(row, s)| {
                    s.trim().parse::<f64>().map_err(|_| {
                        Error::Data(format!(
                            "column {column}, row {row}: {s:?} is not numeric"
                        ))
                    })
                })
                .collect(),
        }
    }

    fn text(&self) -> Vec<String> {
        match self {
            RawValues::Text(v) => v.clone(),
            RawValues::Numeric(v) => v.iter().map(|x| format!("{x}")).collect(),
        }
    }
}

/// A rectangular table of named raw columns (complete cases only).
#[derive(Clone, Debug, Default)]
pub struct RawTable {
    names: Vec<String>,
    columns: Vec<RawValues>,
}

impl RawTable {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, name: impl Into<String>, values: RawValues) -> Result<()> {
        let name = name.into();
        if let Some(first) = self.columns.first() {
            if first.len() != values.len() {
                return Err(Error::LengthMismatch {
                    what: "raw column",
                    expected: first.len(),
                    found: values.len(),
                });
            }
        }
        if self.names.contains(&name) {
            return Err(Error::Data(format!("duplicate column {name}")));
        }
        self.names.push(name);
        self.columns.push(values);
        Ok(())
    }

    pub fn n_rows(&self) -> usize {
        self.columns.first().map_or(0, RawValues::len)
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn get(&self, name: &str) -> Option<&RawValues> {
        self.names
            .iter()
            .position(|n| n == name)
            .map(|i| &self.columns[i])
    }

    fn require(&self, name: &str) -> Result<&RawValues> {
        self.get(name)
            .ok_or_else(|| Error::Data(format!("missing column {name}")))
    }
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum Scheme {
    /// 0/1 variable; emits `W=1` and `W=0`.
    Binary,
    /// One column per level, plus `X!=level` columns when there are more
    /// than two levels.
    Categorical,
    /// Cumulative quantile indicators `X<qNN` and `X>=qNN`.
    Ordinal { cuts: Vec<f64> },
}

impl Scheme {
    pub fn ordinal_quartiles() -> Self {
        Scheme::Ordinal {
            cuts: vec![0.25, 0.5, 0.75],
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct VariableSpec {
    pub name: String,
    pub scheme: Scheme,
}

#[derive(Clone, Debug, PartialEq, Default)]
pub struct DiscretizationSpec {
    pub variables: Vec<VariableSpec>,
    pub tau_hat: String,
    pub outcome: Option<String>,
    pub treatment: Option<String>,
}

#[derive(Clone, Debug)]
pub struct Discretized {
    pub dataset: Dataset,
    /// Variables dropped because they were constant.
    pub dropped: Vec<String>,
}

fn quantile_label(p: f64) -> String {
    let pct = p * 100.0;
    if libm::fabs(pct - libm::round(pct)) < 1e-9 {
        format!("q{}", libm::round(pct) as i64)
    } else {
        format!("q{pct}")
    }
}

/// Cut point at probability `p` over sorted values.
///
/// Uses the order statistic at zero-based index `ceil(p * n)` (clamped to
/// `n - 1`), so `X < cut` holds for the `ceil(p * n)` smallest values when
/// they are distinct.
pub fn quantile_cut(sorted: &[f64], p: f64) -> f64 {
    let n = sorted.len();
    let idx = libm::ceil(p * n as f64 - 1e-9).max(0.0) as usize;
    sorted[idx.min(n - 1)]
}

fn parse_binary(values: &RawValues, name: &str) -> Result<Vec<bool>> {
    values
        .text()
        .iter()
        .enumerate()
        .map(|(row, s)| match s.trim() {
            "1" | "1.0" | "true" | "TRUE" | "True" => Ok(true),
            "0" | "0.0" | "false" | "FALSE" | "False" => Ok(false),
            other => Err(Error::Data(format!(
                "column {name}, row {row}: {other:?} is not binary"
            ))),
        })
        .collect()
}

/// Turns raw variables into binary condition columns.
pub fn discretize(table: &RawTable, spec: &DiscretizationSpec) -> Result<Discretized> {
    let n = table.n_rows();
    if n == 0 {
        return Err(Error::Data("table has no rows".into()));
    }
    let tau = table.require(&spec.tau_hat)?.numeric(&spec.tau_hat)?;
    let mut variables = vec![];
    let mut columns: Vec<(ColumnMeta, CoverageMask)> = vec![];
    let mut dropped = vec![];
    for var in &spec.variables {
        let raw = table.require(&var.name)?;
        let id = variables.len();
        let name = &var.name;
        let mut emitted: Vec<(ColumnMeta, CoverageMask)> = vec![];
        match &var.scheme {
            Scheme::Binary => {
                let bits = parse_binary(raw, name)?;
                let ones = CoverageMask::from_bools(&bits);
                if ones.count() == 0 || ones.count() == n {
                    dropped.push(name.clone());
                    continue;
                }
                let zeros = CoverageMask::ones(n).and_not(&ones);
                for (level, mask) in [("1", ones), ("0", zeros)] {
                    emitted.push((
                        ColumnMeta {
                            variable: id,
                            name: format!("{name}={level}"),
                            test: ConditionTest::Equals(level.to_string()),
                        },
                        mask,
                    ));
                }
            }
            Scheme::Categorical => {
                let values = raw.text();
                let mut levels: Vec<String> = values.iter().map(|s| s.trim().to_string()).collect();
                levels.sort();
                levels.dedup();
                if levels.len() < 2 {
                    dropped.push(name.clone());
                    continue;
                }
                for level in &levels {
                    let mask = CoverageMask::from_fn(n, |i| values[i].trim() == level);
                    if levels.len() > 2 {
                        emitted.push((
                            ColumnMeta {
                                variable: id,
                                name: format!("{name}!={level}"),
                                test: ConditionTest::NotEquals(level.clone()),
                            },
                            CoverageMask::ones(n).and_not(&mask),
                        ));
                    }
                    emitted.push((
                        ColumnMeta {
                            variable: id,
                            name: format!("{name}={level}"),
                            test: ConditionTest::Equals(level.clone()),
                        },
                        mask,
                    ));
                }
            }
            Scheme::Ordinal { cuts } => {
                let values = raw.numeric(name)?;
                if let Some(row) = values.iter().position(|v| !v.is_finite()) {
                    return Err(Error::Data(format!("column {name}, row {row}: not finite")));
                }
                let mut sorted = values.clone();
                sorted.sort_by(f64::total_cmp);
                if sorted[0] == sorted[n - 1] {
                    dropped.push(name.clone());
                    continue;
                }
                let mut ps = cuts.clone();
                if ps.iter().any(|p| !(0.0..1.0).contains(p) || *p <= 0.0) {
                    return Err(invalid("cuts", format!("{name}: cut probabilities must lie in (0, 1)")));
                }
                ps.sort_by(f64::total_cmp);
                let mut last_cut = None;
                for p in ps {
                    let cut = quantile_cut(&sorted, p);
                    if last_cut == Some(cut) {
                        continue;
                    }
                    let below = CoverageMask::from_fn(n, |i| values[i] < cut);
                    if below.count() == 0 || below.count() == n {
                        continue;
                    }
                    last_cut = Some(cut);
                    let label = quantile_label(p);
                    let above = CoverageMask::ones(n).and_not(&below);
                    emitted.push((
                        ColumnMeta {
                            variable: id,
                            name: format!("{name}<{label}"),
                            test: ConditionTest::Below {
                                label: label.clone(),
                                cut,
                            },
                        },
                        below,
                    ));
                    emitted.push((
                        ColumnMeta {
                            variable: id,
                            name: format!("{name}>={label}"),
                            test: ConditionTest::AtLeast { label, cut },
                        },
                        above,
                    ));
                }
                if emitted.is_empty() {
                    dropped.push(name.clone());
                    continue;
                }
            }
        }
        variables.push(name.clone());
        columns.extend(emitted);
    }
    let mut dataset = Dataset::new(variables, columns, tau)?;
    match (&spec.outcome, &spec.treatment) {
        (Some(y), Some(d)) => {
            let y = table.require(y)?.numeric(y)?;
            let dname = d;
            let d = parse_binary(table.require(dname)?, dname)?;
            dataset = dataset.with_outcomes(y, d)?;
        }
        (None, None) => {}
        _ => {
            return Err(invalid(
                "outcome/treatment",
                "outcome and treatment columns must be given together",
            ))
        }
    }
    Ok(Discretized { dataset, dropped })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum Provenance {
    Mined,
    Injected,
}

/// A candidate rule with its coverage cached.
#[derive(Clone, Debug)]
pub struct PoolRule {
    pub rule: Rule,
    pub mask: CoverageMask,
    pub mean_tau: f64,
    pub provenance: Provenance,
}

#[derive(Clone, Debug, Default)]
pub struct RulePool {
    rules: Vec<PoolRule>,
}

#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default, deny_unknown_fields))]
pub struct MinerConfig {
    /// Minimum support fraction for a mined rule, in `[0, 1)`.
    pub min_support: f64,
    /// Pool size after culling.
    pub n_rules: usize,
}

impl Default for MinerConfig {
    fn default() -> Self {
        Self {
            min_support: 0.01,
            n_rules: 500,
        }
    }
}

impl RulePool {
    /// Builds a pool from explicit rules, computing their coverage.
    pub fn from_rules(data: &Dataset, rules: Vec<Rule>, provenance: Provenance) -> Result<Self> {
        let mut pool = Self::default();
        for rule in rules {
            pool.push(data, rule, provenance)?;
        }
        Ok(pool)
    }

    /// Adds a rule unless an identical one is already present.
    pub fn push(&mut self, data: &Dataset, rule: Rule, provenance: Provenance) -> Result<bool> {
        if self.rules.iter().any(|p| p.rule == rule) {
            return Ok(false);
        }
        let mask = coverage_of_rule(&rule, data)?;
        let mean_tau = crate::model::subgroup_effect(&mask, data);
        self.rules.push(PoolRule {
            rule,
            mask,
            mean_tau,
            provenance,
        });
        Ok(true)
    }

    pub fn rules(&self) -> &[PoolRule] {
        &self.rules
    }

    pub fn len(&self) -> usize {
        self.rules.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rules.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &PoolRule> {
        self.rules.iter()
    }
}

/// Enumerates every conjunction of at most `l_max` conditions (one per
/// variable) whose support reaches `min_support * N`.
///
/// Support is anti-monotone under conjunction, so a conjunction below the
/// threshold is never extended. Output is in canonical (lexicographic) order.
pub fn mine_rules(data: &Dataset, c: &Constraints, min_support: f64) -> Result<RulePool> {
    c.validate()?;
    if !(0.0..1.0).contains(&min_support) {
        return Err(invalid("min_support", format!("must lie in [0, 1), got {min_support}")));
    }
    let threshold = min_support * data.n() as f64;
    let mut out = vec![];
    let mut stack: Vec<Condition> = vec![];
    for first in 0..data.n_columns() {
        let mask = data.columns()[first].clone();
        extend(data, c.l_max, threshold, first, mask, &mut stack, &mut out)?;
    }
    if out.is_empty() {
        return Err(Error::EmptyPool { min_support });
    }
    Ok(RulePool { rules: out })
}

fn extend(
    data: &Dataset,
    l_max: usize,
    threshold: f64,
    column: usize,
    mask: CoverageMask,
    stack: &mut Vec<Condition>,
    out: &mut Vec<PoolRule>,
) -> Result<()> {
    if (mask.count() as f64) < threshold {
        return Ok(());
    }
    stack.push(data.condition(column)?);
    // pre-order: the parent precedes its extensions
    out.push(pool_rule(data, stack, mask.clone())?);
    if stack.len() < l_max {
        for next in column + 1..data.n_columns() {
            let var = data.column_meta()[next].variable;
            if stack.iter().any(|c| c.variable == var) {
                continue;
            }
            let m = mask.and(&data.columns()[next]);
            extend(data, l_max, threshold, next, m, stack, out)?;
        }
    }
    stack.pop();
    Ok(())
}

fn pool_rule(data: &Dataset, stack: &[Condition], mask: CoverageMask) -> Result<PoolRule> {
    Ok(PoolRule {
        rule: Rule::new(stack.to_vec())?,
        mean_tau: crate::model::subgroup_effect(&mask, data),
        mask,
        provenance: Provenance::Mined,
    })
}

/// Ranking score used by [`cull`]: the single-rule objective at `alpha = 1`
/// in normalized-mean mode.
pub fn cull_score(p: &PoolRule, data: &Dataset) -> f64 {
    let range = data.tau_max() - data.tau_min();
    if p.mask.is_empty() || range <= 0.0 {
        return 0.0;
    }
    let s = p.mask.count() as f64 / data.n() as f64;
    s * (p.mean_tau - data.tau_min()) / range
}

/// Keeps the `n_rules` best rules by [`cull_score`], ties broken by higher
/// support and then canonical order. Pools already small enough are
/// returned unchanged.
pub fn cull(pool: RulePool, n_rules: usize, data: &Dataset) -> Result<RulePool> {
    if n_rules < 1 {
        return Err(invalid("n_rules", "must be at least 1"));
    }
    if pool.len() <= n_rules {
        return Ok(pool);
    }
    let mut scored: Vec<(f64, PoolRule)> = pool
        .rules
        .into_iter()
        .map(|p| (cull_score(&p, data), p))
        .collect();
    scored.sort_by(|(fa, a), (fb, b)| {
        fb.total_cmp(fa)
            .then(b.mask.count().cmp(&a.mask.count()))
            .then(a.rule.cmp(&b.rule))
    });
    scored.truncate(n_rules);
    Ok(RulePool {
        rules: scored.into_iter().map(|(_, p)| p).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::fixtures::random_binary;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn table_with(name: &str, values: RawValues, tau: Vec<f64>) -> RawTable {
        let mut t = RawTable::new();
        t.push(name, values).unwrap();
        t.push("tau", RawValues::Numeric(tau)).unwrap();
        t
    }

    fn spec(name: &str, scheme: Scheme) -> DiscretizationSpec {
        DiscretizationSpec {
            variables: vec![VariableSpec {
                name: name.into(),
                scheme,
            }],
            tau_hat: "tau".into(),
            ..Default::default()
        }
    }

    fn bits(m: &CoverageMask) -> Vec<u8> {
        (0..m.len()).map(|i| m.get(i) as u8).collect()
    }

    #[test]
    fn nested_quartile_masks() {
        let t = table_with(
            "X",
            RawValues::Numeric(vec![0.1, 0.4, 0.6, 0.9]),
            vec![1.0, 2.0, 3.0, 4.0],
        );
        let d = discretize(&t, &spec("X", Scheme::ordinal_quartiles())).unwrap().dataset;
        let below = |label: &str| bits(d.column(d.column_by_name(&format!("X<{label}")).unwrap()).unwrap());
        assert_eq!(below("q25"), vec![1, 0, 0, 0]);
        assert_eq!(below("q50"), vec![1, 1, 0, 0]);
        assert_eq!(below("q75"), vec![1, 1, 1, 0]);
        // complementary columns nest in reverse
        let above = |label: &str| d.column(d.column_by_name(&format!("X>={label}")).unwrap()).unwrap().clone();
        assert!(above("q75").is_subset(&above("q50")));
        assert!(above("q50").is_subset(&above("q25")));
        // cut points agree with sorting by hand: indices ceil(p*4) = 1, 2, 3
        let mut sorted = vec![0.9, 0.1, 0.6, 0.4];
        sorted.sort_by(f64::total_cmp);
        assert_eq!(quantile_cut(&sorted, 0.25), sorted[1]);
        assert_eq!(quantile_cut(&sorted, 0.75), sorted[3]);
    }

    #[test]
    fn median_split_of_uniform() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let n = 10_000;
        let x: Vec<f64> = (0..n).map(|_| rng.random::<f64>()).collect();
        let t = table_with("X", RawValues::Numeric(x), (0..n).map(|i| i as f64).collect());
        let d = discretize(&t, &spec("X", Scheme::Ordinal { cuts: vec![0.5] })).unwrap().dataset;
        let c = d.column(d.column_by_name("X<q50").unwrap()).unwrap().count();
        assert_eq!(c, n / 2);
    }

    #[test]
    fn binary_polarities_are_complements() {
        let t = table_with(
            "W",
            RawValues::Text(vec!["1".into(), "0".into(), "1".into()]),
            vec![0.0, 1.0, 2.0],
        );
        let d = discretize(&t, &spec("W", Scheme::Binary)).unwrap().dataset;
        let one = d.column(d.column_by_name("W=1").unwrap()).unwrap();
        let zero = d.column(d.column_by_name("W=0").unwrap()).unwrap();
        assert_eq!(bits(one), vec![1, 0, 1]);
        assert_eq!(one.or(zero).count(), 3);
        assert_eq!(one.and(zero).count(), 0);
    }

    #[test]
    fn categorical_levels() {
        let vals = ["a", "b", "c", "a"].iter().map(|s| s.to_string()).collect();
        let t = table_with("G", RawValues::Text(vals), vec![0.0, 1.0, 2.0, 3.0]);
        let d = discretize(&t, &spec("G", Scheme::Categorical)).unwrap().dataset;
        assert_eq!(d.n_columns(), 6);
        assert_eq!(bits(d.column(d.column_by_name("G!=a").unwrap()).unwrap()), vec![0, 1, 1, 0]);
    }

    #[test]
    fn constant_variable_dropped_and_bad_values_rejected() {
        let t = table_with("X", RawValues::Numeric(vec![2.0, 2.0]), vec![0.0, 1.0]);
        let out = discretize(&t, &spec("X", Scheme::ordinal_quartiles())).unwrap();
        assert_eq!(out.dropped, vec!["X".to_string()]);
        assert_eq!(out.dataset.n_columns(), 0);
        let t = table_with(
            "X",
            RawValues::Text(vec!["1.5".into(), "oops".into()]),
            vec![0.0, 1.0],
        );
        assert!(matches!(
            discretize(&t, &spec("X", Scheme::ordinal_quartiles())),
            Err(Error::Data(_))
        ));
        assert!(discretize(&t, &spec("missing", Scheme::Binary)).is_err());
    }

    /// All conjunctions of distinct-variable columns up to `l_max`, by brute
    /// force over column subsets.
    fn brute_force_rules(d: &Dataset, l_max: usize, min_support: f64) -> Vec<(Vec<usize>, usize)> {
        let k = d.n_columns();
        let mut out = vec![];
        for subset in 1u32..(1 << k) {
            let cols: Vec<usize> = (0..k).filter(|c| subset >> c & 1 == 1).collect();
            if cols.len() > l_max {
                continue;
            }
            let vars: Vec<usize> = cols.iter().map(|&c| d.column_meta()[c].variable).collect();
            if (1..vars.len()).any(|i| vars[..i].contains(&vars[i])) {
                continue;
            }
            let support = (0..d.n())
                .filter(|&i| cols.iter().all(|&c| d.columns()[c].get(i)))
                .count();
            if support as f64 >= min_support * d.n() as f64 {
                out.push((cols, support));
            }
        }
        out.sort();
        out
    }

    #[test]
    fn three_binary_variables_give_eighteen_rules() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let d = random_binary(40, 3, &mut rng);
        let pool = mine_rules(&d, &Constraints::new(2, 4), 0.0).unwrap();
        assert_eq!(brute_force_rules(&d, 2, 0.0).len(), 18);
        assert_eq!(pool.len(), 18);
    }

    #[test]
    fn too_high_min_support_is_an_error() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let d = random_binary(40, 3, &mut rng);
        assert!(matches!(
            mine_rules(&d, &Constraints::new(2, 4), 0.999),
            Err(Error::EmptyPool { .. })
        ));
        assert!(mine_rules(&d, &Constraints::new(2, 4), 1.0).is_err());
    }

    #[test]
    fn no_two_conditions_on_one_variable() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let x: Vec<f64> = (0..50).map(|_| rng.random::<f64>()).collect();
        let y: Vec<f64> = (0..50).map(|_| rng.random::<f64>()).collect();
        let mut t = table_with("X", RawValues::Numeric(x), (0..50).map(|i| i as f64).collect());
        t.push("Y", RawValues::Numeric(y)).unwrap();
        let mut s = spec("X", Scheme::ordinal_quartiles());
        s.variables.push(VariableSpec {
            name: "Y".into(),
            scheme: Scheme::ordinal_quartiles(),
        });
        let d = discretize(&t, &s).unwrap().dataset;
        let pool = mine_rules(&d, &Constraints::new(3, 9), 0.0).unwrap();
        // 12 singles plus 6 x 6 cross-variable pairs
        assert_eq!(pool.len(), 12 + 36);
        let x25 = d.column_by_name("X<q25").unwrap();
        let x50 = d.column_by_name("X<q50").unwrap();
        assert!(pool
            .iter()
            .all(|p| !(p.rule.contains_column(x25) && p.rule.contains_column(x50))));
    }

    #[test]
    fn pruning_is_exact_and_masks_are_consistent() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..20 {
            let n = rng.random_range(8..80);
            let d = random_binary(n, 5, &mut rng);
            let s = rng.random_range(0.0..0.5);
            let pool = mine_rules(&d, &Constraints::new(3, 9), s).unwrap();
            let got: Vec<(Vec<usize>, usize)> = pool
                .iter()
                .map(|p| (p.rule.columns().collect(), p.mask.count()))
                .collect();
            let mut sorted = got.clone();
            sorted.sort();
            assert_eq!(got, sorted, "pool is in canonical order");
            assert_eq!(got, brute_force_rules(&d, 3, s));
            for p in pool.iter() {
                assert_eq!(p.mask, coverage_of_rule(&p.rule, &d).unwrap());
                assert!(p.mask.count() as f64 >= s * n as f64);
            }
        }
    }

    #[test]
    fn cull_identity_and_order() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let d = random_binary(60, 3, &mut rng);
        let pool = mine_rules(&d, &Constraints::new(2, 4), 0.0).unwrap();
        let before: Vec<Rule> = pool.iter().map(|p| p.rule.clone()).collect();
        let same = cull(pool, 20, &d).unwrap();
        assert_eq!(before, same.iter().map(|p| p.rule.clone()).collect::<Vec<_>>());
    }

    #[test]
    fn cull_prefers_higher_mean_at_equal_support() {
        use crate::model::fixtures::dataset_from_columns;
        let d = dataset_from_columns(&[&[1, 1, 0, 0], &[0, 0, 1, 1]], &[0.0, 1.0, 2.0, 3.0]);
        let rules = vec![
            Rule::from_columns(&d, &[0]).unwrap(),
            Rule::from_columns(&d, &[1]).unwrap(),
        ];
        let pool = RulePool::from_rules(&d, rules, Provenance::Injected).unwrap();
        let culled = cull(pool, 1, &d).unwrap();
        assert_eq!(culled.rules()[0].rule, Rule::from_columns(&d, &[1]).unwrap());
    }

    #[test]
    fn cull_matches_oracle_sort_and_is_idempotent() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for _ in 0..10 {
            let d = random_binary(50, 4, &mut rng);
            let pool = mine_rules(&d, &Constraints::new(2, 4), 0.0).unwrap();
            let mut oracle: Vec<(f64, usize, Rule)> = pool
                .iter()
                .map(|p| {
                    let cnt = p.mask.count();
                    let mean = if cnt == 0 { 0.0 } else { p.mask.iter_ones().map(|i| d.tau_hat()[i]).sum::<f64>() / cnt as f64 };
                    let f = if cnt == 0 { 0.0 } else { cnt as f64 / 50.0 * (mean - d.tau_min()) / (d.tau_max() - d.tau_min()) };
                    (f, cnt, p.rule.clone())
                })
                .collect();
            oracle.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap().then(b.1.cmp(&a.1)).then(a.2.cmp(&b.2)));
            let culled = cull(pool, 5, &d).unwrap();
            let got: Vec<Rule> = culled.iter().map(|p| p.rule.clone()).collect();
            let want: Vec<Rule> = oracle.iter().take(5).map(|o| o.2.clone()).collect();
            assert_eq!(got, want);
            let again = cull(culled.clone(), 5, &d).unwrap();
            assert_eq!(got, again.iter().map(|p| p.rule.clone()).collect::<Vec<_>>());
        }
    }
}
