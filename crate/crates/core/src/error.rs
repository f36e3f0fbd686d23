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

use alloc::string::String;
use core::fmt;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// A condition refers to a column the dataset does not have.
    UnknownColumn { column: usize, n_columns: usize },
    /// A rule or rule set violates a structural invariant.
    InvalidRule(String),
    /// Vectors that must share a length do not.
    LengthMismatch {
        what: &'static str,
        expected: usize,
        found: usize,
    },
    /// A parameter is outside its documented range.
    InvalidParameter { name: &'static str, reason: String },
    /// The effect estimates cannot be normalized.
    DegenerateEffects(String),
    /// An operation needed a value from an empty subgroup.
    EmptySubgroup,
    /// Mining produced no candidate rules.
    EmptyPool { min_support: f64 },
    /// Raw data could not be discretized.
    Data(String),
    /// Text did not parse in the rule-set grammar.
    Parse(String),
    /// Not enough covered observations per arm for a test.
    InsufficientData { treated: usize, control: usize },
    /// A test statistic would divide by a zero standard error.
    ZeroVariance { estimate: f64 },
    /// Exhaustive enumeration would exceed its budget.
    BudgetExceeded { bound: u128, cap: u128 },
    /// Every point of a sweep failed.
    SweepFailed(String),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::UnknownColumn { column, n_columns } => {
                write!(f, "unknown column {column} (dataset has {n_columns} columns)")
            }
            Error::InvalidRule(msg) => write!(f, "invalid rule: {msg}"),
            Error::LengthMismatch {
                what,
                expected,
                found,
            } => write!(f, "{what}: expected length {expected}, found {found}"),
            Error::InvalidParameter { name, reason } => {
                write!(f, "invalid parameter `{name}`: {reason}")
            }
            Error::DegenerateEffects(msg) => write!(f, "degenerate effect estimates: {msg}"),
            Error::EmptySubgroup => f.write_str("empty subgroup"),
            Error::EmptyPool { min_support } => write!(
                f,
                "no candidate rules reach min_support = {min_support}; lower the threshold"
            ),
            Error::Data(msg) => write!(f, "data error: {msg}"),
            Error::Parse(msg) => write!(f, "parse error: {msg}"),
            Error::InsufficientData { treated, control } => write!(
                f,
                "need at least 2 covered observations per arm (treated {treated}, control {control})"
            ),
            Error::ZeroVariance { estimate } => {
                write!(f, "zero standard error (estimate {estimate})")
            }
            Error::BudgetExceeded { bound, cap } => write!(
                f,
                "enumeration bound {bound} exceeds the budget of {cap} rule sets"
            ),
            Error::SweepFailed(msg) => write!(f, "sweep failed: {msg}"),
        }
    }
}

impl core::error::Error for Error {}

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
