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

//! Conditions, rules, rule sets and the dataset they are evaluated against.
//!
//! A condition is a precomputed binary column. A rule is the conjunction of
//! its conditions (bitwise AND of columns) and a rule set is the disjunction
//! of its rules (bitwise OR). Rules and rule sets are kept in canonical
//! sorted form so equal objects compare and print identically.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::cmp::Ordering;

use crate::error::{Error, Result};
use crate::mask::CoverageMask;

/// A binary predicate on one variable, identified by its column.
///
/// Equality and ordering consider the column only.
#[derive(Clone, Copy, Debug)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Condition {
    pub column: usize,
    pub variable: usize,
}

impl PartialEq for Condition {
    fn eq(&self, other: &Self) -> bool {
        self.column == other.column
    }
}

impl Eq for Condition {}

impl PartialOrd for Condition {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Condition {
    fn cmp(&self, other: &Self) -> Ordering {
        self.column.cmp(&other.column)
    }
}

/// A conjunction of conditions, sorted by column, at most one per variable.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Rule {
    conditions: Vec<Condition>,
}

impl core::hash::Hash for Condition {
    fn hash<H: core::hash::Hasher>(&self, state: &mut H) {
        self.column.hash(state);
    }
}

impl Rule {
    pub fn new(mut conditions: Vec<Condition>) -> Result<Self> {
        if conditions.is_empty() {
            return Err(Error::InvalidRule("a rule needs at least one condition".into()));
        }
        conditions.sort();
        for pair in conditions.windows(2) {
            if pair[0] == pair[1] {
                return Err(Error::InvalidRule(format!(
                    "duplicate condition on column {}",
                    pair[0].column
                )));
            }
        }
        for (i, a) in conditions.iter().enumerate() {
            if conditions[i + 1..].iter().any(|b| b.variable == a.variable) {
                return Err(Error::InvalidRule(format!(
                    "two conditions on variable {}",
                    a.variable
                )));
            }
        }
        Ok(Self { conditions })
    }

    /// Builds a rule from column indices, looking variables up in `data`.
    pub fn from_columns(data: &Dataset, columns: &[usize]) -> Result<Self> {
        let conditions = columns
            .iter()
            .map(|&c| data.condition(c))
            .collect::<Result<Vec<_>>>()?;
        Self::new(conditions)
    }

    /// Number of conditions.
    #[inline]
    pub fn len(&self) -> usize {
        self.conditions.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.conditions.is_empty()
    }

    #[inline]
    pub fn conditions(&self) -> &[Condition] {
        &self.conditions
    }

    pub fn columns(&self) -> impl Iterator<Item = usize> + '_ {
        self.conditions.iter().map(|c| c.column)
    }

    pub fn contains_column(&self, column: usize) -> bool {
        self.conditions.binary_search_by(|c| c.column.cmp(&column)).is_ok()
    }

    pub fn has_variable(&self, variable: usize) -> bool {
        self.conditions.iter().any(|c| c.variable == variable)
    }

    /// True when every condition of `self` is also a condition of `other`.
    pub fn is_subset_of(&self, other: &Rule) -> bool {
        is_sorted_subset(&self.conditions, &other.conditions)
    }

    /// The rule with `condition` added; `None` if that breaks an invariant.
    pub fn with_condition(&self, condition: Condition) -> Option<Rule> {
        if self.contains_column(condition.column) || self.has_variable(condition.variable) {
            return None;
        }
        let mut conditions = self.conditions.clone();
        let at = conditions.partition_point(|c| c.column < condition.column);
        conditions.insert(at, condition);
        Some(Rule { conditions })
    }

    /// The rule with the condition on `column` removed; `None` when that
    /// would leave it empty or the column is absent.
    pub fn without_column(&self, column: usize) -> Option<Rule> {
        if self.len() < 2 {
            return None;
        }
        let pos = self.conditions.iter().position(|c| c.column == column)?;
        let mut conditions = self.conditions.clone();
        conditions.remove(pos);
        Some(Rule { conditions })
    }
}

pub(crate) fn is_sorted_subset(small: &[Condition], big: &[Condition]) -> bool {
    if small.len() > big.len() {
        return false;
    }
    let mut j = 0;
    for c in small {
        while j < big.len() && big[j].column < c.column {
            j += 1;
        }
        if j == big.len() || big[j].column != c.column {
            return false;
        }
        j += 1;
    }
    true
}

/// A disjunction of rules in canonical order.
///
/// No rule may be a superset of another member: its coverage would be
/// contained in the smaller rule's and it would only burn complexity.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct RuleSet {
    rules: Vec<Rule>,
    complexity: usize,
}

impl RuleSet {
    pub fn new(mut rules: Vec<Rule>) -> Result<Self> {
        rules.sort();
        for (i, a) in rules.iter().enumerate() {
            for b in &rules[i + 1..] {
                if a == b {
                    return Err(Error::InvalidRule("duplicate rule in rule set".into()));
                }
                if a.is_subset_of(b) || b.is_subset_of(a) {
                    return Err(Error::InvalidRule(
                        "rule set contains a rule that is a superset of another".into(),
                    ));
                }
            }
        }
        let complexity = rules.iter().map(Rule::len).sum();
        Ok(Self { rules, complexity })
    }

    pub fn empty() -> Self {
        Self::default()
    }

    /// Constructs from rules already known to satisfy the invariants.
    pub(crate) fn from_sorted_unchecked(rules: Vec<Rule>) -> Self {
        debug_assert!(rules.windows(2).all(|w| w[0] < w[1]));
        let complexity = rules.iter().map(Rule::len).sum();
        Self { rules, complexity }
    }

    pub fn single(rule: Rule) -> Self {
        let complexity = rule.len();
        Self {
            rules: alloc::vec![rule],
            complexity,
        }
    }

    #[inline]
    pub fn rules(&self) -> &[Rule] {
        &self.rules
    }

    /// Sum of rule lengths.
    #[inline]
    pub fn complexity(&self) -> usize {
        self.complexity
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.rules.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.rules.is_empty()
    }

    /// Checks the structural invariants (useful after deserialization).
    pub fn validate(&self) -> Result<()> {
        let rebuilt = RuleSet::new(self.rules.clone())?;
        if rebuilt != *self {
            return Err(Error::InvalidRule("rule set is not in canonical form".into()));
        }
        Ok(())
    }
}

/// How a column was derived from its source variable.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum ConditionTest {
    /// Variable equals a level (binary and categorical variables).
    Equals(String),
    /// Variable differs from a level (categorical negation columns).
    NotEquals(String),
    /// Ordered variable strictly below a cut point.
    Below { label: String, cut: f64 },
    /// Ordered variable at or above a cut point.
    AtLeast { label: String, cut: f64 },
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ColumnMeta {
    pub variable: usize,
    /// Display name used by the rule-set grammar, e.g. `age<q50`.
    pub name: String,
    pub test: ConditionTest,
}

/// Immutable table of binary condition columns plus effect estimates.
#[derive(Clone, Debug)]
pub struct Dataset {
    variables: Vec<String>,
    meta: Vec<ColumnMeta>,
    columns: Vec<CoverageMask>,
    tau_hat: Vec<f64>,
    tau_min: f64,
    tau_max: f64,
    outcome: Option<Vec<f64>>,
    treatment: Option<Vec<bool>>,
}

fn check_display_name(name: &str) -> Result<()> {
    if name.is_empty()
        || name.trim() != name
        || name.contains(" & ")
        || name.contains(" | ")
        || name.contains('(')
        || name.contains(')')
    {
        return Err(Error::Data(format!(
            "column name {name:?} cannot be used in the rule-set grammar"
        )));
    }
    Ok(())
}

impl Dataset {
    pub fn new(
        variables: Vec<String>,
        columns: Vec<(ColumnMeta, CoverageMask)>,
        tau_hat: Vec<f64>,
    ) -> Result<Self> {
        let n = tau_hat.len();
        if n == 0 {
            return Err(Error::Data("dataset has no observations".into()));
        }
        if let Some(i) = tau_hat.iter().position(|t| !t.is_finite()) {
            return Err(Error::Data(format!("effect estimate {i} is not finite")));
        }
        let (meta, columns): (Vec<_>, Vec<_>) = columns.into_iter().unzip();
        for (m, c) in meta.iter().zip(&columns) {
            if c.len() != n {
                return Err(Error::LengthMismatch {
                    what: "condition column",
                    expected: n,
                    found: c.len(),
                });
            }
            if m.variable >= variables.len() {
                return Err(Error::Data(format!(
                    "column {} refers to unknown variable {}",
                    m.name, m.variable
                )));
            }
            check_display_name(&m.name)?;
        }
        for (i, m) in meta.iter().enumerate() {
            if meta[..i].iter().any(|o| o.name == m.name) {
                return Err(Error::Data(format!("duplicate column name {}", m.name)));
            }
        }
        let tau_min = tau_hat.iter().copied().fold(f64::INFINITY, f64::min);
        let tau_max = tau_hat.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        Ok(Self {
            variables,
            meta,
            columns,
            tau_hat,
            tau_min,
            tau_max,
            outcome: None,
            treatment: None,
        })
    }

    /// Attaches observed outcomes and binary treatment indicators.
    pub fn with_outcomes(mut self, outcome: Vec<f64>, treatment: Vec<bool>) -> Result<Self> {
        for (what, len) in [("outcome", outcome.len()), ("treatment", treatment.len())] {
            if len != self.n() {
                return Err(Error::LengthMismatch {
                    what,
                    expected: self.n(),
                    found: len,
                });
            }
        }
        if let Some(i) = outcome.iter().position(|y| !y.is_finite()) {
            return Err(Error::Data(format!("outcome {i} is not finite")));
        }
        self.outcome = Some(outcome);
        self.treatment = Some(treatment);
        Ok(self)
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.tau_hat.len()
    }

    #[inline]
    pub fn n_columns(&self) -> usize {
        self.columns.len()
    }

    pub fn variables(&self) -> &[String] {
        &self.variables
    }

    pub fn column(&self, column: usize) -> Result<&CoverageMask> {
        self.columns.get(column).ok_or(Error::UnknownColumn {
            column,
            n_columns: self.columns.len(),
        })
    }

    pub fn columns(&self) -> &[CoverageMask] {
        &self.columns
    }

    pub fn column_meta(&self) -> &[ColumnMeta] {
        &self.meta
    }

    pub fn condition(&self, column: usize) -> Result<Condition> {
        let meta = self.meta.get(column).ok_or(Error::UnknownColumn {
            column,
            n_columns: self.meta.len(),
        })?;
        Ok(Condition {
            column,
            variable: meta.variable,
        })
    }

    pub fn tau_hat(&self) -> &[f64] {
        &self.tau_hat
    }

    #[inline]
    pub fn tau_min(&self) -> f64 {
        self.tau_min
    }

    #[inline]
    pub fn tau_max(&self) -> f64 {
        self.tau_max
    }

    pub fn outcome(&self) -> Option<&[f64]> {
        self.outcome.as_deref()
    }

    pub fn treatment(&self) -> Option<&[bool]> {
        self.treatment.as_deref()
    }

    pub fn column_by_name(&self, name: &str) -> Option<usize> {
        self.meta.iter().position(|m| m.name == name)
    }

    /// The rows at `indices` (in that order) as a new dataset.
    pub fn subset(&self, indices: &[usize]) -> Result<Self> {
        if let Some(&bad) = indices.iter().find(|&&i| i >= self.n()) {
            return Err(Error::Data(format!("row {bad} out of range")));
        }
        let columns = self
            .meta
            .iter()
            .cloned()
            .zip(self.columns.iter().map(|c| c.select(indices)))
            .collect();
        let tau = indices.iter().map(|&i| self.tau_hat[i]).collect();
        let data = Dataset::new(self.variables.clone(), columns, tau)?;
        match (&self.outcome, &self.treatment) {
            (Some(y), Some(d)) => data.with_outcomes(
                indices.iter().map(|&i| y[i]).collect(),
                indices.iter().map(|&i| d[i]).collect(),
            ),
            _ => Ok(data),
        }
    }

    fn check_condition(&self, c: &Condition) -> Result<()> {
        match self.meta.get(c.column) {
            None => Err(Error::UnknownColumn {
                column: c.column,
                n_columns: self.meta.len(),
            }),
            Some(m) if m.variable != c.variable => Err(Error::InvalidRule(format!(
                "condition on column {} names variable {} but the column belongs to {}",
                c.column, c.variable, m.variable
            ))),
            Some(_) => Ok(()),
        }
    }

    pub fn format_rule(&self, rule: &Rule) -> String {
        let mut out = String::from("(");
        for (i, c) in rule.conditions().iter().enumerate() {
            if i > 0 {
                out.push_str(" & ");
            }
            out.push_str(&self.meta[c.column].name);
        }
        out.push(')');
        out
    }

    /// Prints a rule set as `(a & b) | (c)`; the empty set prints as "".
    pub fn format_ruleset(&self, rs: &RuleSet) -> String {
        rs.rules()
            .iter()
            .map(|r| self.format_rule(r))
            .collect::<Vec<_>>()
            .join(" | ")
    }

    pub fn parse_rule(&self, text: &str) -> Result<Rule> {
        let inner = text
            .trim()
            .strip_prefix('(')
            .and_then(|t| t.strip_suffix(')'))
            .ok_or_else(|| Error::Parse(format!("rule {text:?} must be parenthesized")))?;
        let columns = inner
            .split(" & ")
            .map(|name| {
                self.column_by_name(name.trim())
                    .ok_or_else(|| Error::Parse(format!("unknown condition {:?}", name.trim())))
            })
            .collect::<Result<Vec<_>>>()?;
        Rule::from_columns(self, &columns)
    }

    pub fn parse_ruleset(&self, text: &str) -> Result<RuleSet> {
        if text.trim().is_empty() {
            return Ok(RuleSet::empty());
        }
        let rules = text
            .split(" | ")
            .map(|r| self.parse_rule(r))
            .collect::<Result<Vec<_>>>()?;
        RuleSet::new(rules)
    }
}

/// Observations satisfying every condition of `rule`.
pub fn coverage_of_rule(rule: &Rule, data: &Dataset) -> Result<CoverageMask> {
    let mut conds = rule.conditions().iter();
    let first = conds
        .next()
        .ok_or_else(|| Error::InvalidRule("empty rule".to_string()))?;
    data.check_condition(first)?;
    let mut mask = data.columns[first.column].clone();
    for c in conds {
        data.check_condition(c)?;
        mask.and_assign(&data.columns[c.column]);
    }
    Ok(mask)
}

/// Observations satisfying at least one rule; all-zero for the empty set.
pub fn coverage_of_ruleset(rs: &RuleSet, data: &Dataset) -> Result<CoverageMask> {
    let mut mask = CoverageMask::zeros(data.n());
    for rule in rs.rules() {
        mask.or_assign(&coverage_of_rule(rule, data)?);
    }
    Ok(mask)
}

/// Mean effect estimate over the covered observations; NaN when empty.
pub fn subgroup_effect(mask: &CoverageMask, data: &Dataset) -> f64 {
    try_subgroup_effect(mask, data).unwrap_or(f64::NAN)
}

pub fn try_subgroup_effect(mask: &CoverageMask, data: &Dataset) -> Result<f64> {
    if mask.is_empty() {
        return Err(Error::EmptySubgroup);
    }
    let sum: f64 = mask.iter_ones().map(|i| data.tau_hat[i]).sum();
    Ok(sum / mask.count() as f64)
}


#[cfg(test)]
mod tests {
    use super::fixtures::*;
    use super::*;
    use alloc::vec;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn ab() -> Dataset {
        dataset_from_columns(&[&[1, 1, 0, 0], &[1, 0, 1, 0]], &[1.0, 2.0, 3.0, 4.0])
    }

    fn mask(v: &[u8]) -> CoverageMask {
        CoverageMask::from_fn(v.len(), |i| v[i] == 1)
    }

    #[test]
    fn rule_coverage_is_and() {
        let d = ab();
        let r = Rule::from_columns(&d, &[0, 1]).unwrap();
        assert_eq!(coverage_of_rule(&r, &d).unwrap(), mask(&[1, 0, 0, 0]));
        let single = Rule::from_columns(&d, &[0]).unwrap();
        assert_eq!(coverage_of_rule(&single, &d).unwrap(), mask(&[1, 1, 0, 0]));
    }

    #[test]
    fn unknown_column_is_structural_error() {
        let d = ab();
        let r = Rule::new(vec![Condition {
            column: 7,
            variable: 0,
        }])
        .unwrap();
        assert!(matches!(
            coverage_of_rule(&r, &d),
            Err(Error::UnknownColumn { column: 7, .. })
        ));
        assert!(Rule::from_columns(&d, &[5]).is_err());
    }

    #[test]
    fn ruleset_coverage_is_or() {
        let d = dataset_from_columns(
            &[&[1, 0, 0, 0], &[0, 0, 1, 0], &[1, 1, 1, 1]],
            &[1.0, 2.0, 3.0, 4.0],
        );
        let rs = RuleSet::new(vec![
            Rule::from_columns(&d, &[0]).unwrap(),
            Rule::from_columns(&d, &[1]).unwrap(),
        ])
        .unwrap();
        assert_eq!(coverage_of_ruleset(&rs, &d).unwrap(), mask(&[1, 0, 1, 0]));
        assert_eq!(
            coverage_of_ruleset(&RuleSet::empty(), &d).unwrap(),
            mask(&[0, 0, 0, 0])
        );
    }

    #[test]
    fn subgroup_effect_cases() {
        let d = ab();
        assert_eq!(subgroup_effect(&mask(&[0, 0, 1, 1]), &d), 3.5);
        assert_eq!(subgroup_effect(&CoverageMask::ones(4), &d), 2.5);
        assert!(subgroup_effect(&CoverageMask::zeros(4), &d).is_nan());
        assert_eq!(
            try_subgroup_effect(&CoverageMask::zeros(4), &d),
            Err(Error::EmptySubgroup)
        );
    }

    #[test]
    fn rule_invariants() {
        let a = Condition {
            column: 0,
            variable: 0,
        };
        let a_neg = Condition {
            column: 1,
            variable: 0,
        };
        assert!(Rule::new(vec![]).is_err());
        assert!(Rule::new(vec![a, a]).is_err());
        assert!(Rule::new(vec![a, a_neg]).is_err());
    }

    #[test]
    fn ruleset_rejects_duplicates_and_supersets() {
        let d = dataset_from_columns(&[&[1, 0], &[0, 1]], &[0.0, 1.0]);
        let r0 = Rule::from_columns(&d, &[0]).unwrap();
        let r01 = Rule::from_columns(&d, &[0, 1]).unwrap();
        assert!(RuleSet::new(vec![r0.clone(), r0.clone()]).is_err());
        assert!(RuleSet::new(vec![r0.clone(), r01]).is_err());
        let rs = RuleSet::new(vec![Rule::from_columns(&d, &[1]).unwrap(), r0]).unwrap();
        assert_eq!(rs.complexity(), 2);
        assert!(rs.rules()[0] < rs.rules()[1]);
    }

    #[test]
    fn grammar_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let d = random_binary(20, 4, &mut rng);
        let rs = d.parse_ruleset("(V2=0 & V0=1) | (V3=1)").unwrap();
        let text = d.format_ruleset(&rs);
        assert_eq!(text, "(V0=1 & V2=0) | (V3=1)");
        assert_eq!(d.parse_ruleset(&text).unwrap(), rs);
        assert!(d.parse_ruleset("(V9=1)").is_err());
        assert!(d.parse_ruleset("V0=1").is_err());
        assert!(d.parse_ruleset("(V0=1 & V0=0)").is_err());
        assert_eq!(d.parse_ruleset("").unwrap(), RuleSet::empty());
    }

    #[test]
    fn subset_recomputes_extrema() {
        let d = ab();
        let s = d.subset(&[1, 2]).unwrap();
        assert_eq!(s.tau_min(), 2.0);
        assert_eq!(s.tau_max(), 3.0);
        assert_eq!(s.column(0).unwrap(), &mask(&[1, 0]));
    }

    fn row_scan_rule(d: &Dataset, rule: &Rule, i: usize) -> bool {
        rule.columns().all(|c| d.columns()[c].get(i))
    }

    #[test]
    fn coverage_matches_row_scan_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..50 {
            let n = rng.random_range(1..=256);
            let d = random_binary(n, 6, &mut rng);
            let mut rules = vec![];
            while rules.len() < 3 {
                let mut cols: Vec<usize> = vec![];
                let len = rng.random_range(1..=3);
                while cols.len() < len {
                    let c = rng.random_range(0..d.n_columns());
                    if cols.iter().all(|&o| d.column_meta()[o].variable != d.column_meta()[c].variable) {
                        cols.push(c);
                    }
                }
                let r = Rule::from_columns(&d, &cols).unwrap();
                let m = coverage_of_rule(&r, &d).unwrap();
                for i in 0..n {
                    assert_eq!(m.get(i), row_scan_rule(&d, &r, i));
                }
                if rules.iter().all(|o: &Rule| !o.is_subset_of(&r) && !r.is_subset_of(o)) {
                    rules.push(r);
                }
            }
            let rs = RuleSet::new(rules).unwrap();
            let m = coverage_of_ruleset(&rs, &d).unwrap();
            let mut sum = 0.0;
            let mut cnt = 0;
            for i in 0..n {
                let hit = rs.rules().iter().any(|r| row_scan_rule(&d, r, i));
                assert_eq!(m.get(i), hit);
                if hit {
                    sum += d.tau_hat()[i];
                    cnt += 1;
                }
            }
            if cnt > 0 {
                assert!((subgroup_effect(&m, &d) - sum / cnt as f64).abs() < 1e-12);
            }
        }
    }
}
