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

//! Pareto frontiers of interpretable rule sets for subgroup discovery.
//!
//! Given per-observation treatment-effect estimates and binary condition
//! columns, the crate searches for rule sets (ORs of ANDs of conditions)
//! that trade subgroup size against mean estimated effect. A simulated
//! annealing search maximizes `(supp/N)^alpha * effect`, sweeping `alpha`
//! traces the frontier, and held-out inference checks what was found.
//!
//! The crate is `no_std` and needs only `alloc`. IO, configuration files and
//! parallel sweeps live in the companion `subgroup` crate.

#![no_std]

extern crate alloc;

pub mod annealer;
pub mod error;
pub mod frontier;
pub mod inference;
pub mod mask;
pub mod miner;
pub mod model;
pub mod objective;
pub mod oracle;
pub mod simgen;
pub mod stats;

pub use error::{Error, Result};
pub use mask::CoverageMask;
pub use model::{Condition, Dataset, Rule, RuleSet};
pub use objective::{Constraints, ObjectiveConfig};
