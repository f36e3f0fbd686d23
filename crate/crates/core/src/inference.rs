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

//! Sample splitting, hypothesis tests and power for selected subgroups.
//!
//! Tests use a normal reference distribution and Welch (unpooled) standard
//! errors.

use alloc::format;
use alloc::vec::Vec;
use core::cmp::Ordering;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{invalid, Error, Result};
use crate::frontier::Front;
use crate::mask::CoverageMask;
use crate::model::{coverage_of_ruleset, Dataset, RuleSet};
use crate::stats::{normal_cdf, normal_quantile, Moments};

#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default, deny_unknown_fields))]
pub struct SplitPlan {
    pub train_fraction: f64,
    pub seed: u64,
    /// Split each treatment arm separately so both splits contain both arms.
    pub stratify: bool,
}

impl Default for SplitPlan {
    fn default() -> Self {
        Self {
            train_fraction: 0.7,
            seed: 0,
            stratify: true,
        }
    }
}

#[derive(Clone, Debug)]
pub struct Split {
    pub train: Dataset,
    pub test: Dataset,
    /// Original row indices, ascending.
    pub train_rows: Vec<usize>,
    pub test_rows: Vec<usize>,
}

/// Rows that go to the training split: `floor(fraction * n)` of them.
pub fn train_size(n: usize, fraction: f64) -> usize {
    libm::floor(fraction * n as f64 + 1e-9) as usize
}

/// Partitions `data` into train and test splits.
///
/// With stratification the training quota is shared across arms in
/// proportion to arm size, so each split's treated share is within one row
/// of the overall share.
pub fn split(data: &Dataset, plan: &SplitPlan) -> Result<Split> {
    let n = data.n();
    if n < 2 {
        return Err(Error::InsufficientData { treated: n, control: 0 });
    }
    if !(plan.train_fraction > 0.0 && plan.train_fraction < 1.0) {
        return Err(invalid("train_fraction", format!("must lie in (0, 1), got {}", plan.train_fraction)));
    }
    let n_train = train_size(n, plan.train_fraction);
    if n_train == 0 || n_train == n {
        return Err(invalid("train_fraction", format!("leaves an empty split at n = {n}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(plan.seed);
    let mut train = Vec::with_capacity(n_train);
    let mut test = Vec::with_capacity(n - n_train);
    match (plan.stratify, data.treatment()) {
        (true, Some(d)) => {
            let mut treated: Vec<usize> = (0..n).filter(|&i| d[i]).collect();
            let mut control: Vec<usize> = (0..n).filter(|&i| !d[i]).collect();
            let t1 = libm::round(n_train as f64 * treated.len() as f64 / n as f64) as usize;
            let t1 = t1.min(treated.len()).max(n_train.saturating_sub(control.len()));
            let t0 = n_train - t1;
            if t1 == 0 || t0 == 0 || t1 == treated.len() || t0 == control.len() {
                return Err(Error::InsufficientData {
                    treated: treated.len(),
                    control: control.len(),
                });
            }
            treated.shuffle(&mut rng);
            control.shuffle(&mut rng);
            train.extend_from_slice(&treated[..t1]);
            train.extend_from_slice(&control[..t0]);
            test.extend_from_slice(&treated[t1..]);
            test.extend_from_slice(&control[t0..]);
        }
        _ => {
            let mut rows: Vec<usize> = (0..n).collect();
            rows.shuffle(&mut rng);
            train.extend_from_slice(&rows[..n_train]);
            test.extend_from_slice(&rows[n_train..]);
        }
    }
    train.sort_unstable();
    test.sort_unstable();
    Ok(Split {
        train: data.subset(&train)?,
        test: data.subset(&test)?,
        train_rows: train,
        test_rows: test,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum TestKind {
    FixedThreshold,
    GroupComparison,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum Sided {
    #[default]
    TwoSided,
    /// Alternative: the estimate exceeds the threshold.
    Greater,
    Less,
}

impl Sided {
    pub fn p_value(&self, z: f64) -> f64 {
        match self {
            Sided::TwoSided => libm::erfc(libm::fabs(z) / core::f64::consts::SQRT_2).min(1.0),
            Sided::Greater => normal_cdf(-z),
            Sided::Less => normal_cdf(z),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TestResult {
    pub estimate: f64,
    pub se: f64,
    pub statistic: f64,
    pub p_value: f64,
    pub kind: TestKind,
    pub sided: Sided,
}

impl TestResult {
    fn new(estimate: f64, null: f64, se: f64, kind: TestKind, sided: Sided) -> Result<Self> {
        if se <= 0.0 {
            return Err(Error::ZeroVariance { estimate });
        }
        let statistic = (estimate - null) / se;
        Ok(Self {
            estimate,
            se,
            statistic,
            p_value: sided.p_value(statistic),
            kind,
            sided,
        })
    }
}

/// Outcome moments of each arm within a subgroup.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct ArmStats {
    pub treated: Moments,
    pub control: Moments,
}

impl ArmStats {
    pub fn of(mask: &CoverageMask, data: &Dataset) -> Result<Self> {
        let (y, d) = outcomes(data)?;
        let mut s = ArmStats::default();
        for i in mask.iter_ones() {
            if d[i] {
                s.treated.push(y[i]);
            } else {
                s.control.push(y[i]);
            }
        }
        Ok(s)
    }

    pub fn difference(&self) -> f64 {
        self.treated.mean - self.control.mean
    }

    /// Welch variance of the difference in means.
    pub fn variance(&self) -> f64 {
        self.treated.variance() / self.treated.n as f64 + self.control.variance() / self.control.n as f64
    }

    pub fn treated_share(&self) -> f64 {
        self.treated.n as f64 / (self.treated.n + self.control.n) as f64
    }

    fn require(&self, min: usize) -> Result<()> {
        if self.treated.n < min || self.control.n < min {
            return Err(Error::InsufficientData {
                treated: self.treated.n,
                control: self.control.n,
            });
        }
        Ok(())
    }
}

fn outcomes(data: &Dataset) -> Result<(&[f64], &[bool])> {
    match (data.outcome(), data.treatment()) {
        (Some(y), Some(d)) => Ok((y, d)),
        _ => Err(Error::Data("inference requires outcome and treatment columns".into())),
    }
}

/// Difference in mean outcomes between arms among covered rows, tested
/// against `threshold`.
pub fn diff_in_means_mask(mask: &CoverageMask, data: &Dataset, threshold: f64, sided: Sided) -> Result<TestResult> {
    let arms = ArmStats::of(mask, data)?;
    arms.require(2)?;
    TestResult::new(
        arms.difference(),
        threshold,
        libm::sqrt(arms.variance()),
        TestKind::FixedThreshold,
        sided,
    )
}

pub fn diff_in_means(rs: &RuleSet, data: &Dataset, threshold: f64, sided: Sided) -> Result<TestResult> {
    diff_in_means_mask(&coverage_of_ruleset(rs, data)?, data, threshold, sided)
}

/// `var_a + var_b - 2 cov_ab`, rejecting inputs that make it negative.
pub fn difference_variance(var_a: f64, var_b: f64, cov_ab: f64) -> Result<f64> {
    if var_a < 0.0 || var_b < 0.0 {
        return Err(invalid("variance", "must be nonnegative"));
    }
    let v = var_a + var_b - 2.0 * cov_ab;
    let tol = 1e-12 * (var_a + var_b).max(f64::MIN_POSITIVE);
    if v < -tol {
        return Err(invalid("cov_ab", format!("implies a negative variance {v}")));
    }
    Ok(v.max(0.0))
}

/// Tests `tau_a = tau_b` given both variances and their covariance.
pub fn compare_groups(tau_a: f64, tau_b: f64, var_a: f64, var_b: f64, cov_ab: f64, sided: Sided) -> Result<TestResult> {
    let v = difference_variance(var_a, var_b, cov_ab)?;
    TestResult::new(tau_a - tau_b, 0.0, libm::sqrt(v), TestKind::GroupComparison, sided)
}

/// Tests whether the subgroup effect differs from the whole-sample effect.
///
/// The subgroup is part of the sample, so the two estimates covary; the
/// covariance is the plug-in `s1A^2 / n1 + s0A^2 / n0`, where `s.A` are
/// subgroup arm variances and `n.` whole-sample arm sizes.
pub fn compare_to_ate(mask: &CoverageMask, data: &Dataset, sided: Sided) -> Result<TestResult> {
    let sub = ArmStats::of(mask, data)?;
    let all = ArmStats::of(&CoverageMask::ones(data.n()), data)?;
    sub.require(2)?;
    all.require(2)?;
    let cov = sub.treated.variance() / all.treated.n as f64 + sub.control.variance() / all.control.n as f64;
    compare_groups(sub.difference(), all.difference(), sub.variance(), all.variance(), cov, sided)
}

/// Normal-approximation power of the two-sample test.
///
/// Arm sizes may be fractional (planned sizes).
pub fn power(effect: f64, sd1: f64, sd0: f64, n1: f64, n0: f64, alpha_level: f64, sided: Sided) -> Result<f64> {
    if !(sd1 > 0.0 && sd0 > 0.0) {
        return Err(invalid("sd", "must be positive"));
    }
    if !(n1 >= 2.0 && n0 >= 2.0) {
        return Err(invalid("n", format!("arm sizes must be at least 2, got {n1} and {n0}")));
    }
    if !(alpha_level > 0.0 && alpha_level < 1.0) {
        return Err(invalid("alpha_level", "must lie in (0, 1)"));
    }
    if !effect.is_finite() {
        return Err(invalid("effect", "must be finite"));
    }
    let se = libm::sqrt(sd1 * sd1 / n1 + sd0 * sd0 / n0);
    let delta = libm::fabs(effect) / se;
    Ok(match sided {
        Sided::TwoSided => {
            let z = normal_quantile(1.0 - alpha_level / 2.0);
            normal_cdf(delta - z) + normal_cdf(-delta - z)
        }
        Sided::Greater | Sided::Less => normal_cdf(delta - normal_quantile(1.0 - alpha_level)),
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct PowerRow {
    /// Position of the point in the front.
    pub index: usize,
    pub support_rate: f64,
    pub train_effect: f64,
    pub n_treated: f64,
    pub n_control: f64,
    pub power: Result<f64>,
}

/// Annotates each front point with its power at the planned test size and
/// ranks them (highest power first; points that could not be assessed last,
/// in front order).
///
/// Arm moments come from covered training rows; the planned arm sizes are
/// `support_rate * test_size` split by the covered treated share.
pub fn power_rank(front: &Front, train: &Dataset, test_size: usize, alpha_level: f64, sided: Sided) -> Result<Vec<PowerRow>> {
    outcomes(train)?;
    let mut rows = Vec::with_capacity(front.len());
    for (index, p) in front.iter().enumerate() {
        let cov = coverage_of_ruleset(&p.ruleset, train)?;
        let arms = ArmStats::of(&cov, train)?;
        let planned = p.support_rate * test_size as f64;
        let (n1, n0) = if arms.treated.n + arms.control.n == 0 {
            (0.0, 0.0)
        } else {
            let share = arms.treated_share();
            (planned * share, planned * (1.0 - share))
        };
        let power = arms.require(2).and_then(|_| {
            power(
                arms.difference(),
                libm::sqrt(arms.treated.variance()),
                libm::sqrt(arms.control.variance()),
                n1,
                n0,
                alpha_level,
                sided,
            )
        });
        rows.push(PowerRow {
            index,
            support_rate: p.support_rate,
            train_effect: arms.difference(),
            n_treated: n1,
            n_control: n0,
            power,
        });
    }
    rows.sort_by(|a, b| match (&a.power, &b.power) {
        (Ok(x), Ok(y)) => y.total_cmp(x).then(a.index.cmp(&b.index)),
        (Ok(_), Err(_)) => Ordering::Less,
        (Err(_), Ok(_)) => Ordering::Greater,
        (Err(_), Err(_)) => a.index.cmp(&b.index),
    });
    Ok(rows)
}
