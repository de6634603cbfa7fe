//! Train, resume, evaluate and compare runs on disk.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;

use super::checkpoint::Checkpoint;
use super::config::RunConfig;
use super::metrics::{csv_header, csv_rows, MetricsTable};
use super::plot::emit_plot;
use crate::diagnostics::{schedule_check, ConvergenceReport};
use crate::envs::{rollout_mean, EnvSpec};
use crate::error::{Error, Result};
use crate::grpo::{IterationMetrics, Trainer, Variant};
use crate::rng::{stream, Purpose};

pub const METRICS_FILE: &str = "metrics.csv";
pub const REPORT_FILE: &str = "report.json";
pub const PLOT_FILE: &str = "training_curve.svg";
pub const FINAL_CHECKPOINT: &str = "final.ckpt";
/// Trailing window of the stationarity trend in the run report.
pub const TREND_WINDOW: usize = 100;
/// Trailing window for the final-return and variance statistics of comparisons.
pub const FINAL_WINDOW: usize = 100;

/// Result of a finished (or resumed) training run.
#[derive(Debug, Clone)]
pub struct TrainOutcome {
    /// Metrics of the iterations executed by this call.
    pub metrics: Vec<IterationMetrics>,
    pub report: ConvergenceReport,
    pub out_dir: PathBuf,
}

impl TrainOutcome {
    pub fn metrics_path(&self) -> PathBuf {
        self.out_dir.join(METRICS_FILE)
    }

    pub fn checkpoint_path(&self) -> PathBuf {
        self.out_dir.join(FINAL_CHECKPOINT)
    }
}

pub fn periodic_checkpoint_name(iteration: usize) -> String {
    format!("iter_{iteration:06}.ckpt")
}

#[derive(Serialize)]
struct RunReport<'a> {
    env: String,
    variant: String,
    seed: u64,
    completed_iterations: usize,
    divergence: Option<String>,
    convergence: &'a ConvergenceReport,
}

fn create_dir(path: &Path) -> Result<()> {
    fs::create_dir_all(path).map_err(|e| Error::io(path, e))
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).map_err(|e| Error::io(path, e))
}

fn checkpoint_of(cfg: &RunConfig, trainer: &Trainer) -> Checkpoint {
    Checkpoint {
        config_hash: cfg.trajectory_hash(),
        env: cfg.env,
        next_iteration: trainer.next_iteration(),
        policies: trainer.policies().to_vec(),
        reference: trainer.reference().clone(),
        monitor: trainer.monitor().clone(),
    }
}

/// Trains from scratch into `cfg.out_dir`: metrics CSV streamed per
/// iteration, periodic and final checkpoints, JSON report and SVG curve.
pub fn run_train(cfg: &RunConfig) -> Result<TrainOutcome> {
    cfg.validate()?;
    let trainer = Trainer::new(cfg.grpo.clone(), EnvSpec::from_kind(cfg.env))?;
    create_dir(&cfg.out_dir)?;
    write_file(&cfg.out_dir.join(METRICS_FILE), &csv_header())?;
    drive(cfg, trainer)
}

/// Continues a run from `checkpoint`. Rows past the checkpoint's iteration
/// are dropped from an existing metrics CSV before new rows are appended.
pub fn run_resume(cfg: &RunConfig, checkpoint: impl AsRef<Path>) -> Result<TrainOutcome> {
    cfg.validate()?;
    let ckpt = Checkpoint::load(checkpoint)?;
    if ckpt.config_hash != cfg.trajectory_hash() {
        return Err(Error::Checkpoint(
            "checkpoint was written under a different configuration".into(),
        ));
    }
    if ckpt.env != cfg.env {
        return Err(Error::Checkpoint(format!(
            "checkpoint is for {}, config asks for {}",
            ckpt.env, cfg.env
        )));
    }
    let trainer = Trainer::restore(
        cfg.grpo.clone(),
        EnvSpec::from_kind(cfg.env),
        ckpt.policies,
        ckpt.reference,
        ckpt.next_iteration,
        ckpt.monitor,
    )?;
    create_dir(&cfg.out_dir)?;
    let csv = cfg.out_dir.join(METRICS_FILE);
    let mut kept = csv_header();
    if let Ok(existing) = fs::read_to_string(&csv) {
        for line in existing.lines().skip(1) {
            let iteration: usize = line
                .split(',')
                .next()
                .and_then(|v| v.parse().ok())
                .ok_or_else(|| Error::Format(format!("unreadable row in {}", csv.display())))?;
            if iteration <= ckpt.next_iteration {
                kept.push_str(line);
                kept.push('\n');
            }
        }
    }
    write_file(&csv, &kept)?;
    drive(cfg, trainer)
}

fn drive(cfg: &RunConfig, mut trainer: Trainer) -> Result<TrainOutcome> {
    let out = cfg.out_dir.clone();
    let csv_path = out.join(METRICS_FILE);
    let file = fs::OpenOptions::new()
        .append(true)
        .open(&csv_path)
        .map_err(|e| Error::io(&csv_path, e))?;
    let mut csv = BufWriter::new(file);
    let schedule = schedule_check(cfg.grpo.alpha0, cfg.grpo.lr_decay, cfg.iterations)?;
    let mut metrics = Vec::new();
    let mut failure = None;

    while trainer.next_iteration() < cfg.iterations {
        match trainer.train_iteration() {
            Ok(m) => {
                csv.write_all(csv_rows(&m, cfg.record_wall_time).as_bytes())
                    .and_then(|_| csv.flush())
                    .map_err(|e| Error::io(&csv_path, e))?;
                let done = m.iteration;
                if done % 10 == 0 || done == 1 {
                    let mean = m.policies.iter().map(|p| p.mean_return).sum::<f64>() / m.policies.len() as f64;
                    log::info!("iteration {done}: mean return {mean:.3}");
                }
                metrics.push(m);
                if cfg.checkpoint_every > 0 && done % cfg.checkpoint_every == 0 && done < cfg.iterations {
                    let dir = out.join("checkpoints");
                    create_dir(&dir)?;
                    checkpoint_of(cfg, &trainer).save(dir.join(periodic_checkpoint_name(done)))?;
                }
            }
            Err(e) => {
                failure = Some(e);
                break;
            }
        }
    }

    let report = trainer.monitor().report(TREND_WINDOW, schedule);
    let run_report = RunReport {
        env: cfg.env.to_string(),
        variant: cfg.grpo.variant.to_string(),
        seed: cfg.grpo.seed,
        completed_iterations: trainer.next_iteration(),
        divergence: failure.as_ref().map(ToString::to_string),
        convergence: &report,
    };
    let json = serde_json::to_string_pretty(&run_report).map_err(|e| Error::Internal(e.to_string()))?;
    write_file(&out.join(REPORT_FILE), &json)?;
    if let Some(e) = failure {
        log::error!("{e}");
        return Err(e);
    }
    checkpoint_of(cfg, &trainer).save(out.join(FINAL_CHECKPOINT))?;
    emit_plot(&csv_path, out.join(PLOT_FILE))?;
    Ok(TrainOutcome {
        metrics,
        report,
        out_dir: out,
    })
}

/// Deterministic evaluation returns per policy.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvalSummary {
    pub env: String,
    pub episodes: usize,
    pub seed: u64,
    pub mean_return: Vec<f64>,
    pub std_return: Vec<f64>,
}

impl std::fmt::Display for EvalSummary {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "{} episodes on {} (seed {})", self.episodes, self.env, self.seed)?;
        for (i, (m, s)) in self.mean_return.iter().zip(&self.std_return).enumerate() {
            writeln!(f, "policy {}: {m:.4} ± {s:.4}", i + 1)?;
        }
        Ok(())
    }
}

/// Rolls out every policy of a checkpoint with mean actions.
pub fn run_eval(checkpoint: impl AsRef<Path>, episodes: usize, seed: u64) -> Result<EvalSummary> {
    if episodes == 0 {
        return Err(Error::Argument("episodes must be at least 1".into()));
    }
    let ckpt = Checkpoint::load(checkpoint)?;
    let spec = EnvSpec::from_kind(ckpt.env);
    let mut mean_return = Vec::new();
    let mut std_return = Vec::new();
    for (i, policy) in ckpt.policies.iter().enumerate() {
        if policy.state_dim() != spec.state_dim || policy.action_dim() != spec.action_dim {
            return Err(Error::Checkpoint(format!("policy {i} does not fit {}", spec.kind)));
        }
        let returns = (0..episodes)
            .map(|e| {
                let mut rng = stream(seed, Purpose::Eval, &[i as u64, e as u64]);
                rollout_mean(policy, &spec, i, &mut rng).map(|t| t.episode_return())
            })
            .collect::<Result<Vec<_>>>()?;
        let n = returns.len() as f64;
        let m = returns.iter().sum::<f64>() / n;
        let var = returns.iter().map(|r| (r - m) * (r - m)).sum::<f64>() / n;
        mean_return.push(m);
        std_return.push(var.sqrt());
    }
    Ok(EvalSummary {
        env: ckpt.env.to_string(),
        episodes,
        seed,
        mean_return,
        std_return,
    })
}

/// Statistics of one (seed, variant) training run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CellSummary {
    pub seed: u64,
    pub variant: String,
    pub iterations: usize,
    /// Per-iteration mean return averaged over policies.
    pub returns: Vec<f64>,
    /// Mean of `returns` over the final window.
    pub final_mean: f64,
    /// Population variance of `returns` over the final window.
    pub final_variance: f64,
    pub violations: u64,
    pub out_dir: PathBuf,
}

impl CellSummary {
    /// Builds the summary from a per-iteration return series.
    pub fn from_returns(seed: u64, variant: Variant, returns: Vec<f64>, violations: u64, out_dir: PathBuf) -> Self {
        let tail = &returns[returns.len().saturating_sub(FINAL_WINDOW)..];
        let n = tail.len().max(1) as f64;
        let final_mean = tail.iter().sum::<f64>() / n;
        let final_variance = tail.iter().map(|r| (r - final_mean) * (r - final_mean)).sum::<f64>() / n;
        CellSummary {
            seed,
            variant: variant.to_string(),
            iterations: returns.len(),
            returns,
            final_mean,
            final_variance,
            violations,
            out_dir,
        }
    }

    /// Mean return over the first `w` iterations.
    pub fn head_mean(&self, w: usize) -> f64 {
        let h = &self.returns[..w.min(self.returns.len())];
        h.iter().sum::<f64>() / h.len().max(1) as f64
    }

    /// Mean return over the last `w` iterations.
    pub fn tail_mean(&self, w: usize) -> f64 {
        let t = &self.returns[self.returns.len().saturating_sub(w)..];
        t.iter().sum::<f64>() / t.len().max(1) as f64
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CompareCell {
    pub seed: u64,
    pub variant: String,
    /// Process exit code the cell's run would have produced.
    pub exit_code: i32,
    pub result: std::result::Result<CellSummary, String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct CompareReport {
    pub cells: Vec<CompareCell>,
    /// Seeds where both variants finished.
    pub seeds_compared: usize,
    /// Seeds where Full's final mean return ≥ Simple's.
    pub return_wins: usize,
    /// Seeds where Full's final-window variance ≤ Simple's.
    pub variance_wins: usize,
    pub mean_final_full: Option<f64>,
    pub mean_final_simple: Option<f64>,
}

impl CompareReport {
    pub fn cell(&self, seed: u64, variant: Variant) -> Option<&CellSummary> {
        self.cells
            .iter()
            .find(|c| c.seed == seed && c.variant == variant.name())
            .and_then(|c| c.result.as_ref().ok())
    }

    pub fn win_rate(&self) -> f64 {
        if self.seeds_compared == 0 {
            0.0
        } else {
            self.return_wins as f64 / self.seeds_compared as f64
        }
    }

    /// Plain-text table, one line per seed.
    pub fn to_table(&self) -> String {
        let mut s = String::from("seed  full_final  simple_final  full_var  simple_var\n");
        let mut seeds: Vec<u64> = self.cells.iter().map(|c| c.seed).collect();
        seeds.dedup();
        for seed in seeds {
            let fmt = |v: Variant, var: bool| match self.cell(seed, v) {
                Some(c) => format!("{:.4}", if var { c.final_variance } else { c.final_mean }),
                None => "failed".into(),
            };
            s.push_str(&format!(
                "{seed}  {}  {}  {}  {}\n",
                fmt(Variant::Full, false),
                fmt(Variant::Simple, false),
                fmt(Variant::Full, true),
                fmt(Variant::Simple, true)
            ));
        }
        s.push_str(&format!(
            "full >= simple on final return: {}/{} (win rate {:.2})\nfull <= simple on final variance: {}/{}\n",
            self.return_wins,
            self.seeds_compared,
            self.win_rate(),
            self.variance_wins,
            self.seeds_compared
        ));
        for c in &self.cells {
            if let Err(e) = &c.result {
                s.push_str(&format!("seed {} {}: {e}\n", c.seed, c.variant));
            }
        }
        s
    }
}

/// Aggregates finished cells into a report.
pub fn summarize(cells: Vec<CompareCell>) -> CompareReport {
    let mut seeds: Vec<u64> = cells.iter().map(|c| c.seed).collect();
    seeds.sort_unstable();
    seeds.dedup();
    let mut report = CompareReport {
        cells,
        seeds_compared: 0,
        return_wins: 0,
        variance_wins: 0,
        mean_final_full: None,
        mean_final_simple: None,
    };
    for seed in seeds {
        if let (Some(f), Some(s)) = (report.cell(seed, Variant::Full), report.cell(seed, Variant::Simple)) {
            let (rw, vw) = (f.final_mean >= s.final_mean, f.final_variance <= s.final_variance);
            report.seeds_compared += 1;
            report.return_wins += rw as usize;
            report.variance_wins += vw as usize;
        }
    }
    let avg = |v: Variant| {
        let xs: Vec<f64> = report
            .cells
            .iter()
            .filter(|c| c.variant == v.name())
            .filter_map(|c| c.result.as_ref().ok().map(|r| r.final_mean))
            .collect();
        (!xs.is_empty()).then(|| xs.iter().sum::<f64>() / xs.len() as f64)
    };
    report.mean_final_full = avg(Variant::Full);
    report.mean_final_simple = avg(Variant::Simple);
    report
}

fn run_cell(base: &RunConfig, seed: u64, variant: Variant) -> Result<CellSummary> {
    let mut cfg = base.with_variant(variant);
    cfg.grpo.seed = seed;
    cfg.out_dir = base.out_dir.join(format!("seed{seed}_{variant}"));
    let outcome = run_train(&cfg)?;
    let returns = MetricsTable::load(outcome.metrics_path())?.population_returns()?;
    Ok(CellSummary::from_returns(
        seed,
        variant,
        returns,
        outcome.report.violations(),
        cfg.out_dir,
    ))
}

/// Runs both variants for every seed; cells run on up to `threads` worker
/// threads. A failing cell is recorded and the others continue.
pub fn run_compare(base: &RunConfig, seeds: &[u64], threads: usize) -> Result<CompareReport> {
    if seeds.len() < 2 {
        return Err(Error::Argument("compare needs at least two seeds".into()));
    }
    base.validate()?;
    let jobs: Vec<(u64, Variant)> = seeds
        .iter()
        .flat_map(|&s| [(s, Variant::Full), (s, Variant::Simple)])
        .collect();
    let threads = threads.clamp(1, jobs.len());
    let chunk = jobs.len().div_ceil(threads);
    let cells: Vec<CompareCell> = std::thread::scope(|scope| {
        let handles: Vec<_> = jobs
            .chunks(chunk)
            .map(|c| {
                scope.spawn(move || {
                    c.iter()
                        .map(|&(seed, variant)| {
                            let result = run_cell(base, seed, variant);
                            CompareCell {
                                seed,
                                variant: variant.to_string(),
                                exit_code: result.as_ref().err().map_or(0, Error::exit_code),
                                result: result.map_err(|e| e.to_string()),
                            }
                        })
                        .collect::<Vec<_>>()
                })
            })
            .collect();
        handles
            .into_iter()
            .flat_map(|h| h.join().expect("compare worker panicked"))
            .collect()
    });
    let report = summarize(cells);
    create_dir(&base.out_dir)?;
    let json = serde_json::to_string_pretty(&report).map_err(|e| Error::Internal(e.to_string()))?;
    write_file(&base.out_dir.join("compare.json"), &json)?;
    write_file(&base.out_dir.join("compare.txt"), &report.to_table())?;
    Ok(report)
}

/// Convenience for callers that only need the CSV of a finished run.
pub fn load_metrics(out_dir: impl AsRef<Path>) -> Result<MetricsTable> {
    MetricsTable::load(out_dir.as_ref().join(METRICS_FILE))
}

