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

//! The multiplicative size/effect objective, its linear baseline, and the
//! interpretability constraints.
//!
//! With support fraction `s = supp(A)/N` and the normalized effect term
//! `e = (mean_A(tau) - tau_min) / (tau_max - tau_min)` the objective is
//! `F = s^alpha * e`. Both factors enter monotonically, so any maximizer for
//! `alpha > 0` is Pareto optimal in (support, effect).

use alloc::format;

use crate::error::{invalid, Error, Result};
use crate::mask::{CoverageMask, WeightedSum};
use crate::model::{coverage_of_ruleset, Dataset, RuleSet};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum EffectTermMode {
    /// `(mean - tau_min) / (tau_max - tau_min)`, in `[0, 1]`.
    #[default]
    NormalizedMean,
    /// `(sum - tau_min) / tau_max`, the formula read literally.
    PaperSum,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum ObjectiveKind {
    #[default]
    Multiplicative,
    /// `w * s + (1 - w) * e`; only used as a comparison baseline.
    Linear,
}

#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default, deny_unknown_fields))]
pub struct ObjectiveConfig {
    /// Weight on subgroup size, `alpha >= 0`.
    pub alpha: f64,
    pub kind: ObjectiveKind,
    /// Weight on the support fraction for the linear kind, in `[0, 1]`.
    pub linear_weight: f64,
    pub effect_term_mode: EffectTermMode,
}

impl Default for ObjectiveConfig {
    fn default() -> Self {
        Self {
            alpha: 1.0,
            kind: ObjectiveKind::Multiplicative,
            linear_weight: 0.5,
            effect_term_mode: EffectTermMode::NormalizedMean,
        }
    }
}

impl ObjectiveConfig {
    pub fn multiplicative(alpha: f64) -> Self {
        Self {
            alpha,
            ..Self::default()
        }
    }

    pub fn linear(weight: f64) -> Self {
        Self {
            kind: ObjectiveKind::Linear,
            linear_weight: weight,
            ..Self::default()
        }
    }

    /// The same configuration with its sweep parameter (alpha, or the
    /// weight for the linear kind) replaced.
    pub fn with_param(mut self, value: f64) -> Self {
        match self.kind {
            ObjectiveKind::Multiplicative => self.alpha = value,
            ObjectiveKind::Linear => self.linear_weight = value,
        }
        self
    }

    pub fn param(&self) -> f64 {
        match self.kind {
            ObjectiveKind::Multiplicative => self.alpha,
            ObjectiveKind::Linear => self.linear_weight,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha >= 0.0 && self.alpha.is_finite()) {
            return Err(invalid("alpha", format!("must be a finite value >= 0, got {}", self.alpha)));
        }
        if !(0.0..=1.0).contains(&self.linear_weight) {
            return Err(invalid(
                "linear_weight",
                format!("must lie in [0, 1], got {}", self.linear_weight),
            ));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default, deny_unknown_fields))]
pub struct Constraints {
    /// Maximum number of conditions per rule.
    pub l_max: usize,
    /// Maximum sum of rule lengths.
    pub c_max: usize,
    /// Optional maximum number of rules.
    pub n_rules_cap: Option<usize>,
}

impl Default for Constraints {
    fn default() -> Self {
        Self {
            l_max: 3,
            c_max: 9,
            n_rules_cap: None,
        }
    }
}

impl Constraints {
    pub fn new(l_max: usize, c_max: usize) -> Self {
        Self {
            l_max,
            c_max,
            n_rules_cap: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.l_max < 1 {
            return Err(invalid("l_max", "must be at least 1"));
        }
        if self.c_max < self.l_max {
            return Err(invalid("c_max", "must be at least l_max"));
        }
        if self.n_rules_cap == Some(0) {
            return Err(invalid("n_rules_cap", "must be at least 1"));
        }
        Ok(())
    }

    pub fn max_rules(&self) -> usize {
        self.n_rules_cap.unwrap_or(usize::MAX)
    }
}

/// True iff the rule set is nonempty, within the length, complexity and
/// count limits, and structurally valid.
pub fn is_feasible(rs: &RuleSet, c: &Constraints) -> bool {
    !rs.is_empty()
        && rs.len() <= c.max_rules()
        && rs.complexity() <= c.c_max
        && rs.rules().iter().all(|r| r.len() <= c.l_max)
        && rs.validate().is_ok()
}

/// An objective bound to one dataset, with the effect sums precomputed.
#[derive(Clone, Debug)]
pub struct Objective {
    cfg: ObjectiveConfig,
    n: f64,
    tau_min: f64,
    tau_max: f64,
    sums: WeightedSum,
}

impl Objective {
    pub fn new(data: &Dataset, cfg: ObjectiveConfig) -> Result<Self> {
        cfg.validate()?;
        check_effects(data, cfg.effect_term_mode)?;
        Ok(Self {
            cfg,
            n: data.n() as f64,
            tau_min: data.tau_min(),
            tau_max: data.tau_max(),
            sums: WeightedSum::new(data.tau_hat()),
        })
    }

    pub fn config(&self) -> &ObjectiveConfig {
        &self.cfg
    }

    /// Sum of effect estimates over the mask.
    #[inline]
    pub fn tau_sum(&self, mask: &CoverageMask) -> f64 {
        self.sums.sum(mask)
    }

    /// The effect factor for a subgroup of `count` observations whose
    /// estimates sum to `sum`.
    pub fn effect_term(&self, count: usize, sum: f64) -> f64 {
        if count == 0 {
            return 0.0;
        }
        match self.cfg.effect_term_mode {
            EffectTermMode::NormalizedMean => {
                (sum / count as f64 - self.tau_min) / (self.tau_max - self.tau_min)
            }
            EffectTermMode::PaperSum => (sum - self.tau_min) / self.tau_max,
        }
    }

    pub fn value_from(&self, count: usize, sum: f64) -> f64 {
        if count == 0 {
            return 0.0;
        }
        let s = count as f64 / self.n;
        match self.cfg.kind {
            ObjectiveKind::Linear => {
                let w = self.cfg.linear_weight;
                w * s + (1.0 - w) * self.effect_term(count, sum)
            }
            ObjectiveKind::Multiplicative => {
                let alpha = self.cfg.alpha;
                match self.cfg.effect_term_mode {
                    EffectTermMode::NormalizedMean if alpha != 0.0 => {
                        // s^alpha * (mean - min) / range, arranged so that at
                        // alpha = 1 covering extra observations with
                        // tau = tau_min leaves the value bit-identical.
                        let excess = (sum - count as f64 * self.tau_min) / self.n;
                        libm::pow(s, alpha - 1.0) * excess / (self.tau_max - self.tau_min)
                    }
                    _ => libm::pow(s, alpha) * self.effect_term(count, sum),
                }
            }
        }
    }

    /// Objective of the subgroup described by `mask`; 0 when empty.
    #[inline]
    pub fn value(&self, mask: &CoverageMask) -> f64 {
        self.value_from(mask.count(), self.tau_sum(mask))
    }

    /// Objective of a mask given word by word, without materializing it.
    #[inline]
    pub fn value_words(&self, words: impl Iterator<Item = u64> + Clone) -> f64 {
        let count = words.clone().map(|w| w.count_ones() as usize).sum();
        self.value_from(count, self.sums.sum_words(words))
    }

    /// Objective of `a | b`.
    #[inline]
    pub fn value_union(&self, a: &CoverageMask, b: &CoverageMask) -> f64 {
        debug_assert_eq!(a.len(), b.len());
        self.value_words(a.words().iter().zip(b.words()).map(|(x, y)| x | y))
    }

    pub fn evaluate(&self, rs: &RuleSet, data: &Dataset) -> Result<f64> {
        Ok(self.value(&coverage_of_ruleset(rs, data)?))
    }
}

fn check_effects(data: &Dataset, mode: EffectTermMode) -> Result<()> {
    if data.tau_max() == data.tau_min() {
        return Err(Error::DegenerateEffects(format!(
            "all effect estimates equal {}",
            data.tau_max()
        )));
    }
    if mode == EffectTermMode::PaperSum && data.tau_max() <= 0.0 {
        return Err(Error::DegenerateEffects(format!(
            "paper-sum mode needs a positive maximum estimate, got {}",
            data.tau_max()
        )));
    }
    Ok(())
}

/// Evaluates the configured objective (multiplicative or linear).
pub fn evaluate(rs: &RuleSet, data: &Dataset, cfg: &ObjectiveConfig) -> Result<f64> {
    Objective::new(data, *cfg)?.evaluate(rs, data)
}

/// Evaluates the linear scalarization `w * s + (1 - w) * e` with
/// `w = cfg.linear_weight`, whatever `cfg.kind` says.
pub fn evaluate_linear(rs: &RuleSet, data: &Dataset, cfg: &ObjectiveConfig) -> Result<f64> {
    let cfg = ObjectiveConfig {
        kind: ObjectiveKind::Linear,
        ..*cfg
    };
    evaluate(rs, data, &cfg)
}

/// The alpha at which a larger, lower-effect subgroup starts to beat a
/// smaller, higher-effect one under the multiplicative objective.
///
/// Takes support fractions and effect terms; returns `None` unless
/// `support_big > support_small` and `0 < term_big < term_small`.
pub fn overtaking_alpha(
    support_big: f64,
    term_big: f64,
    support_small: f64,
    term_small: f64,
) -> Option<f64> {
    if !(support_big > support_small && support_small > 0.0) {
        return None;
    }
    if !(term_big > 0.0 && term_big < term_small) {
        return None;
    }
    Some(libm::log(term_small / term_big) / libm::log(support_big / support_small))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::fixtures::*;
    use crate::model::{Rule, RuleSet};
    use alloc::vec;
    use alloc::vec::Vec;
    use proptest::prelude::*;

    fn four() -> Dataset {
        dataset_from_columns(
            &[&[0, 0, 1, 1], &[1, 1, 1, 1], &[1, 0, 0, 0], &[0, 1, 0, 0]],
            &[1.0, 2.0, 3.0, 4.0],
        )
    }

    fn rs(d: &Dataset, col: usize) -> RuleSet {
        RuleSet::single(Rule::from_columns(d, &[col]).unwrap())
    }

    #[test]
    fn alpha_zero_ignores_support() {
        let d = four();
        let cfg = ObjectiveConfig::multiplicative(0.0);
        let f = evaluate(&rs(&d, 0), &d, &cfg).unwrap();
        assert!((f - 2.5 / 3.0).abs() < 1e-15);
        // same effect term, different support
        let d2 = dataset_from_columns(&[&[1, 0, 0, 0], &[1, 1, 0, 0]], &[2.0, 2.0, 1.0, 3.0]);
        let a = evaluate(&rs(&d2, 0), &d2, &cfg).unwrap();
        let b = evaluate(&rs(&d2, 1), &d2, &cfg).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn hand_evaluated_example() {
        let d = four();
        let f = evaluate(&rs(&d, 0), &d, &ObjectiveConfig::multiplicative(1.0)).unwrap();
        // oracle loop over covered indices {2, 3}
        let covered = [2usize, 3];
        let mean: f64 = covered.iter().map(|&i| d.tau_hat()[i]).sum::<f64>() / 2.0;
        let oracle = (2.0 / 4.0) * (mean - 1.0) / (4.0 - 1.0);
        assert!((f - 0.416_666_666_666_666_7).abs() < 1e-12);
        assert!((f - oracle).abs() < 1e-15);
    }

    #[test]
    fn full_coverage_is_effect_term() {
        let d = four();
        let f = evaluate(&rs(&d, 1), &d, &ObjectiveConfig::multiplicative(1.0)).unwrap();
        assert!((f - (2.5 - 1.0) / 3.0).abs() < 1e-15);
    }

    #[test]
    fn linear_weight_collapse() {
        let d = four();
        let r = rs(&d, 0);
        let w1 = evaluate_linear(&r, &d, &ObjectiveConfig::linear(1.0)).unwrap();
        let w0 = evaluate_linear(&r, &d, &ObjectiveConfig::linear(0.0)).unwrap();
        let w5 = evaluate_linear(&r, &d, &ObjectiveConfig::linear(0.5)).unwrap();
        assert_eq!(w1, 0.5);
        assert!((w0 - 2.5 / 3.0).abs() < 1e-15);
        assert!((w5 - 0.666_666_666_666_666_6).abs() < 1e-12);
    }

    #[test]
    fn paper_sum_mode() {
        let d = four();
        let cfg = ObjectiveConfig {
            effect_term_mode: EffectTermMode::PaperSum,
            ..ObjectiveConfig::multiplicative(1.0)
        };
        let f = evaluate(&rs(&d, 0), &d, &cfg).unwrap();
        assert!((f - 0.5 * (7.0 - 1.0) / 4.0).abs() < 1e-15);
        let neg = dataset_from_columns(&[&[1, 0]], &[-1.0, -2.0]);
        assert!(matches!(
            Objective::new(&neg, cfg),
            Err(Error::DegenerateEffects(_))
        ));
    }

    #[test]
    fn degenerate_and_empty() {
        let flat = dataset_from_columns(&[&[1, 0]], &[3.0, 3.0]);
        assert!(matches!(
            Objective::new(&flat, ObjectiveConfig::default()),
            Err(Error::DegenerateEffects(_))
        ));
        let d = four();
        let obj = Objective::new(&d, ObjectiveConfig::default()).unwrap();
        assert_eq!(obj.value(&CoverageMask::zeros(4)), 0.0);
        assert!(Objective::new(&d, ObjectiveConfig::multiplicative(-1.0)).is_err());
        assert!(Objective::new(&d, ObjectiveConfig::linear(1.5)).is_err());
    }

    #[test]
    fn alpha_one_tie_is_exact() {
        // adding tau_min observations keeps F bit-identical at alpha = 1
        let d = dataset_from_columns(&[&[1, 1, 0, 0, 0], &[1, 1, 1, 1, 0]], &[2.5, 7.25, 0.0, 0.0, 0.0]);
        let obj = Objective::new(&d, ObjectiveConfig::multiplicative(1.0)).unwrap();
        let a = obj.evaluate(&rs(&d, 0), &d).unwrap();
        let b = obj.evaluate(&rs(&d, 1), &d).unwrap();
        assert_eq!(a.to_bits(), b.to_bits());
    }

    #[test]
    fn feasibility() {
        let d = dataset_from_columns(&[&[1], &[1], &[1], &[1], &[1]], &[1.0]);
        let long = Rule::from_columns(&d, &[0, 1, 2]).unwrap();
        let short = Rule::from_columns(&d, &[3, 4]).unwrap();
        let set = RuleSet::new(vec![long, short]).unwrap();
        assert!(is_feasible(&set, &Constraints::new(3, 5)));
        assert!(!is_feasible(&set, &Constraints::new(3, 4)));
        let four_long = RuleSet::single(Rule::from_columns(&d, &[0, 1, 2, 3]).unwrap());
        assert!(!is_feasible(&four_long, &Constraints::new(3, 9)));
        assert!(!is_feasible(&RuleSet::empty(), &Constraints::new(3, 9)));
        let capped = Constraints {
            n_rules_cap: Some(1),
            ..Constraints::new(3, 9)
        };
        assert!(!is_feasible(&set, &capped));
    }

    #[test]
    fn non_converse_counterexample() {
        // The only subgroup containing the highest-support observation set
        // has mean equal to tau_min: Pareto optimal on support, yet F = 0.
        let d = dataset_from_columns(&[&[1, 1, 1, 0], &[0, 0, 0, 1]], &[0.0, 0.0, 0.0, 5.0]);
        for alpha in [0.1, 1.0, 10.0] {
            let f = evaluate(&rs(&d, 0), &d, &ObjectiveConfig::multiplicative(alpha)).unwrap();
            assert_eq!(f, 0.0);
        }
    }

    #[test]
    fn overtaking_alpha_is_the_crossing() {
        let a = overtaking_alpha(0.6, 0.4, 0.2, 0.9).unwrap();
        let lhs = libm::pow(0.6, a) * 0.4;
        let rhs = libm::pow(0.2, a) * 0.9;
        assert!((lhs - rhs).abs() < 1e-12);
        assert!(overtaking_alpha(0.2, 0.4, 0.6, 0.9).is_none());
    }

    proptest! {
        #[test]
        fn monotone_in_support_and_effect(
            alpha in 0.0f64..5.0,
            n in 10usize..500,
            c1 in 1usize..500, c2 in 1usize..500,
            m1 in 0.0f64..1.0, m2 in 0.0f64..1.0,
        ) {
            let (c1, c2) = (c1.min(n), c2.min(n));
            let tau: Vec<f64> = (0..n).map(|i| if i == 0 { 0.0 } else if i == 1 { 1.0 } else { 0.5 }).collect();
            let cols: Vec<u8> = vec![1; n];
            let d = dataset_from_columns(&[&cols], &tau);
            let obj = Objective::new(&d, ObjectiveConfig::multiplicative(alpha)).unwrap();
            // monotone in support at fixed mean
            let (lo, hi) = (c1.min(c2), c1.max(c2));
            prop_assert!(obj.value_from(lo, m1 * lo as f64) <= obj.value_from(hi, m1 * hi as f64) * (1.0 + 1e-12));
            // monotone in mean at fixed support
            let (ml, mh) = (m1.min(m2), m1.max(m2));
            prop_assert!(obj.value_from(c1, ml * c1 as f64) <= obj.value_from(c1, mh * c1 as f64) * (1.0 + 1e-12) + 1e-15);
        }

        #[test]
        fn ratio_monotone_in_alpha(s1 in 0.3f64..1.0, s2 in 0.01f64..0.3, e1 in 0.01f64..1.0, e2 in 0.01f64..1.0, a in 0.0f64..5.0, b in 0.0f64..5.0) {
            // F(rs1)/F(rs2) = (s1/s2)^alpha * e1/e2 grows with alpha when s1 > s2
            let ratio = |alpha: f64| libm::pow(s1, alpha) * e1 / (libm::pow(s2, alpha) * e2);
            let (lo, hi) = (a.min(b), a.max(b));
            prop_assert!(ratio(lo) <= ratio(hi) * (1.0 + 1e-12));
        }
    }
}
