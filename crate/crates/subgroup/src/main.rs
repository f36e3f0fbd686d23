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

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use log::warn;
use subgroup::commands;
use subgroup::config::{Dgp, RunConfig};
use subgroup::Result;

/// Subgroup discovery by annealing over rule sets, with an effect/support
/// frontier and split-sample inference.
#[derive(Debug, Parser)]
#[command(name = "subgroup", version)]
struct Cli {
    /// TOML run configuration; flags override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads; defaults to available parallelism.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Annealing iterations per chain.
    #[arg(long, global = true)]
    n_iter: Option<usize>,
    /// Independent chains per alpha.
    #[arg(long, global = true)]
    restarts: Option<usize>,
    /// Raise log verbosity; repeat for more.
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate a simulated dataset with its truth file.
    Simulate {
        #[arg(long, value_enum)]
        dgp: Option<DgpArg>,
        #[arg(long)]
        n: Option<usize>,
    },
    /// List the culled rule pool.
    Mine {
        #[arg(long)]
        input: Option<PathBuf>,
    },
    /// Best rule set at one alpha.
    Search {
        #[arg(long)]
        input: Option<PathBuf>,
        #[arg(long)]
        alpha: f64,
    },
    /// Alpha sweep and Pareto front.
    Frontier {
        #[arg(long)]
        input: Option<PathBuf>,
        #[arg(long, num_args = 1.., value_delimiter = ',')]
        alpha: Option<Vec<f64>>,
    },
    /// Train/test split, front on train, tests and power on test.
    Infer {
        #[arg(long)]
        input: Option<PathBuf>,
        #[arg(long, num_args = 1.., value_delimiter = ',')]
        alpha: Option<Vec<f64>>,
    },
    /// Exhaustive front and per-alpha maximizers on small inputs.
    Oracle {
        #[arg(long)]
        input: Option<PathBuf>,
        #[arg(long, num_args = 1.., value_delimiter = ',')]
        alpha: Option<Vec<f64>>,
    },
}

#[derive(Clone, Copy, Debug, clap::ValueEnum)]
enum DgpArg {
    Concave,
    Convex,
    Continuous,
}

fn build_config(cli: &Cli) -> Result<RunConfig> {
    let mut cfg = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if let Some(out) = &cli.out {
        cfg.output = out.clone();
    }
    if cli.threads.is_some() {
        cfg.threads = cli.threads;
    }
    if let Some(n) = cli.n_iter {
        cfg.annealer.n_iter = n;
    }
    if let Some(r) = cli.restarts {
        cfg.annealer.restarts = r;
    }
    let (input, alphas) = match &cli.command {
        Command::Simulate { dgp, n } => {
            if let Some(d) = dgp {
                cfg.simulate.dgp = match d {
                    DgpArg::Concave => Dgp::Concave,
                    DgpArg::Convex => Dgp::Convex,
                    DgpArg::Continuous => Dgp::Continuous,
                };
            }
            if n.is_some() {
                cfg.simulate.n = *n;
            }
            (None, None)
        }
        Command::Mine { input } | Command::Search { input, .. } => (input.as_ref(), None),
        Command::Frontier { input, alpha } | Command::Infer { input, alpha } | Command::Oracle { input, alpha } => {
            (input.as_ref(), alpha.as_ref())
        }
    };
    if let Some(i) = input {
        cfg.input = Some(i.clone());
    }
    if let Some(a) = alphas {
        cfg.sweep.alphas = a.clone();
    }
    cfg.resolve()
}

fn run(cli: &Cli) -> Result<()> {
    let cfg = build_config(cli)?;
    match &cli.command {
        Command::Simulate { .. } => {
            let path = commands::simulate(&cfg)?;
            println!("wrote {}", path.display());
        }
        Command::Mine { .. } => println!("{} rules in pool", commands::mine(&cfg)?),
        Command::Search { alpha, .. } => {
            let doc = commands::search(&cfg, *alpha)?;
            println!("{}  F={}", doc.best.rules, doc.best.objective);
        }
        Command::Frontier { .. } => {
            let doc = commands::frontier(&cfg)?;
            for f in &doc.failures {
                warn!("alpha {} failed: {}", f.alpha, f.error);
            }
            for p in &doc.points {
                println!("{:.4}\t{:.4}\t{}", p.support_rate, p.effect, p.rules);
            }
        }
        Command::Infer { .. } => {
            for r in commands::infer(&cfg)? {
                let p = r.p_value.map_or_else(|| "-".to_string(), |p| format!("{p:.3e}"));
                println!("{:.4}\t{p}\t{}", r.support_rate, r.rules);
            }
        }
        Command::Oracle { .. } => {
            let doc = commands::oracle(&cfg)?;
            println!("{} points on the exact front", doc.front.len());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
