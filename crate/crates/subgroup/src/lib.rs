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

//! File formats, configuration, parallel sweeps and the `subgroup` command.
//!
//! The search itself lives in [`subgroup_core`]; this crate adds everything
//! that needs an operating system.

pub mod commands;
pub mod config;
pub mod data;
pub mod error;
pub mod pipeline;
pub mod report;

pub use error::{CliError, Result};
pub use subgroup_core as core;
