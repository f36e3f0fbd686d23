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

//! CSV ingestion: complete-case filtering, type inference, discretization.

use std::io::Read;
use std::path::Path;

use log::info;
use subgroup_core::miner::{discretize, DiscretizationSpec, RawTable, RawValues, Scheme, VariableSpec};
use subgroup_core::Dataset;

use crate::config::DataConfig;
use crate::error::{CliError, Result};

/// Field values treated as missing.
const MISSING: [&str; 5] = ["", "NA", "NaN", "nan", "null"];

#[derive(Clone, Debug)]
pub struct Loaded {
    pub dataset: Dataset,
    pub rows_read: usize,
    pub rows_dropped: usize,
    /// Covariates dropped for being constant.
    pub constant_variables: Vec<String>,
}

pub fn load_path(path: &Path, cfg: &DataConfig) -> Result<Loaded> {
    let file = std::fs::File::open(path).map_err(CliError::io(path))?;
    load_reader(file, cfg)
}

/// Reads a headed, comma-separated table and discretizes it.
///
/// Rows with a missing value in any used column are dropped and counted.
pub fn load_reader(reader: impl Read, cfg: &DataConfig) -> Result<Loaded> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
    let header: Vec<String> = rdr
        .headers()
        .map_err(|e| CliError::Data(e.to_string()))?
        .iter()
        .map(|h| h.trim().to_string())
        .collect();
    let position = |name: &str| {
        header
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| CliError::Data(format!("missing column {name}")))
    };

    let reserved = cfg.reserved();
    let mut used: Vec<&str> = reserved.clone();
    if cfg.variables.is_empty() {
        used.extend(header.iter().map(String::as_str).filter(|h| !reserved.contains(h)));
    } else {
        used.extend(cfg.variables.iter().map(|v| v.name.as_str()));
    }
    let idx: Vec<usize> = used.iter().map(|n| position(n)).collect::<Result<_>>()?;

    let mut values: Vec<Vec<String>> = vec![Vec::new(); used.len()];
    let (mut rows_read, mut rows_dropped) = (0, 0);
    for record in rdr.records() {
        let record = record.map_err(|e| CliError::Data(e.to_string()))?;
        rows_read += 1;
        let fields: Vec<&str> = idx.iter().map(|&i| record.get(i).unwrap_or("").trim()).collect();
        if fields.iter().any(|f| MISSING.contains(f)) {
            rows_dropped += 1;
            continue;
        }
        for (col, f) in values.iter_mut().zip(fields) {
            col.push(f.to_string());
        }
    }
    if rows_dropped > 0 {
        info!("dropped {rows_dropped} incomplete rows of {rows_read}");
    }

    let mut table = RawTable::new();
    for (name, col) in used.iter().zip(values) {
        let raw = match col.iter().map(|s| s.parse::<f64>()).collect::<Result<Vec<f64>, _>>() {
            Ok(nums) => RawValues::Numeric(nums),
            Err(_) => RawValues::Text(col),
        };
        table.push(*name, raw)?;
    }
    if table.n_rows() == 0 {
        return Err(CliError::Data("no complete rows".into()));
    }

    let mut spec = cfg.discretization()?;
    if spec.variables.is_empty() {
        spec.variables = infer_variables(&table, &reserved);
    }
    check_tau(&table, &spec)?;
    let d = discretize(&table, &spec)?;
    for v in &d.dropped {
        info!("variable {v} is constant and was dropped");
    }
    Ok(Loaded {
        dataset: d.dataset,
        rows_read,
        rows_dropped,
        constant_variables: d.dropped,
    })
}

/// 0/1 columns are binary, other numeric columns ordinal at the quartiles,
/// anything else categorical.
fn infer_variables(table: &RawTable, reserved: &[&str]) -> Vec<VariableSpec> {
    table
        .names()
        .iter()
        .filter(|n| !reserved.contains(&n.as_str()))
        .map(|name| {
            let scheme = match table.get(name) {
                Some(RawValues::Numeric(v)) if v.iter().all(|x| *x == 0.0 || *x == 1.0) => Scheme::Binary,
                Some(RawValues::Numeric(_)) => Scheme::ordinal_quartiles(),
                _ => Scheme::Categorical,
            };
            VariableSpec {
                name: name.clone(),
                scheme,
            }
        })
        .collect()
}

fn check_tau(table: &RawTable, spec: &DiscretizationSpec) -> Result<()> {
    match table.get(&spec.tau_hat) {
        Some(RawValues::Numeric(v)) => {
            let first = v[0];
            if v.iter().all(|x| *x == first) {
                return Err(CliError::Data(format!(
                    "column {} is constant; effect estimates must vary",
                    spec.tau_hat
                )));
            }
            Ok(())
        }
        _ => Err(CliError::Data(format!("column {} must be numeric", spec.tau_hat))),
    }
}
