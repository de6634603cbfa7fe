//! `cgrpo`: train, evaluate, compare and plot continuous GRPO runs.
//!
//! Exit codes: 0 success, 1 invalid input or configuration, 2 training
//! divergence, 3 I/O failure.

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand};

use cgrpo_core::harness::{emit_plot, load_config, run_compare, run_eval, run_resume, run_train};

#[derive(Parser)]
#[command(name = "cgrpo", version, about = "Continuous group relative policy optimization")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train a policy population from a config file.
    Train {
        #[arg(long)]
        config: PathBuf,
        /// Overrides the config's seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Overrides the config's output directory.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Continue from a checkpoint written under the same config.
        #[arg(long)]
        resume: Option<PathBuf>,
        /// Overrides the rollout thread count.
        #[arg(long)]
        threads: Option<usize>,
    },
    /// Evaluate every policy of a checkpoint with mean actions.
    Eval {
        #[arg(long)]
        checkpoint: PathBuf,
        #[arg(long)]
        episodes: usize,
        #[arg(long)]
        seed: u64,
    },
    /// Train both variants for each seed and compare them.
    Compare {
        #[arg(long)]
        config: PathBuf,
        /// Comma-separated seeds, at least two.
        #[arg(long, value_delimiter = ',', required = true)]
        seeds: Vec<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Runs trained concurrently.
        #[arg(long, default_value_t = 1)]
        jobs: usize,
    },
    /// Render the training curve of a metrics CSV as SVG.
    Plot {
        #[arg(long)]
        csv: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

fn exit_code(err: &anyhow::Error) -> u8 {
    err.chain()
        .find_map(|e| e.downcast_ref::<cgrpo_core::Error>())
        .map_or(1, |e| e.exit_code() as u8)
}

fn run(cli: Cli) -> anyhow::Result<u8> {
    match cli.command {
        Command::Train {
            config,
            seed,
            out,
            resume,
            threads,
        } => {
            let mut cfg = load_config(&config).with_context(|| format!("loading {}", config.display()))?;
            if let Some(s) = seed {
                cfg.grpo.seed = s;
            }
            if let Some(o) = out {
                cfg.out_dir = o;
            }
            if let Some(t) = threads {
                cfg.grpo.rollout_threads = t;
            }
            let outcome = match resume {
                Some(ckpt) => run_resume(&cfg, &ckpt)?,
                None => run_train(&cfg)?,
            };
            let r = &outcome.report;
            if let Some(last) = outcome.metrics.last() {
                for p in &last.policies {
                    println!(
                        "policy {}: final mean return {:.4}",
                        p.policy_index + 1,
                        p.mean_return
                    );
                }
            }
            println!(
                "violations: reward {}, advantage {}, step {}",
                r.reward_violations, r.advantage_violations, r.step_violations
            );
            println!("outputs in {}", outcome.out_dir.display());
            Ok(0)
        }
        Command::Eval {
            checkpoint,
            episodes,
            seed,
        } => {
            print!("{}", run_eval(&checkpoint, episodes, seed)?);
            Ok(0)
        }
        Command::Compare {
            config,
            seeds,
            out,
            jobs,
        } => {
            let mut cfg = load_config(&config).with_context(|| format!("loading {}", config.display()))?;
            if let Some(o) = out {
                cfg.out_dir = o;
            }
            let report = run_compare(&cfg, &seeds, jobs)?;
            print!("{}", report.to_table());
            Ok(report.cells.iter().map(|c| c.exit_code as u8).max().unwrap_or(0))
        }
        Command::Plot { csv, out } => {
            emit_plot(&csv, &out)?;
            println!("wrote {}", out.display());
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
