//! Metrics CSV: one row per (iteration, policy), fixed column order.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::grpo::IterationMetrics;

pub const CSV_COLUMNS: [&str; 16] = [
    "iteration",
    "policy_index",
    "mean_return",
    "std_return",
    "surrogate_loss",
    "smooth_loss",
    "diversity_loss",
    "group_index",
    "mu_g",
    "sigma_g",
    "eps_g",
    "state_clusters",
    "noise_frac",
    "grad_norm",
    "alpha_k",
    "wall_ms",
];

pub fn csv_header() -> String {
    let mut s = CSV_COLUMNS.join(",");
    s.push('\n');
    s
}

/// Rows for one iteration. Floats use the shortest round-trip form, so equal
/// values always print identically. `wall_ms` is written as 0 unless
/// `record_wall_time` is set.
pub fn csv_rows(m: &IterationMetrics, record_wall_time: bool) -> String {
    let wall = if record_wall_time { m.wall_ms } else { 0 };
    let mut out = String::new();
    for p in &m.policies {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            m.iteration,
            p.policy_index,
            p.mean_return,
            p.std_return,
            p.surrogate_loss,
            p.smooth_loss,
            p.diversity_loss,
            p.group_index,
            p.mu_g,
            p.sigma_g,
            p.eps_g,
            m.state_clusters,
            m.noise_frac,
            p.grad_norm,
            m.alpha_k,
            wall
        );
    }
    out
}

/// Parsed metrics CSV: header plus numeric rows.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricsTable {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl MetricsTable {
    pub fn parse(text: &str) -> Result<Self> {
        let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(text.as_bytes());
        let columns: Vec<String> = reader
            .headers()
            .map_err(|e| Error::Format(e.to_string()))?
            .iter()
            .map(str::to_string)
            .collect();
        if columns.iter().all(String::is_empty) {
            return Err(Error::Format("empty CSV".into()));
        }
        let mut rows = Vec::new();
        for (i, record) in reader.records().enumerate() {
            let record = record.map_err(|e| Error::Format(e.to_string()))?;
            let row = record
                .iter()
                .map(|v| {
                    v.parse::<f64>()
                        .map_err(|_| Error::Format(format!("row {}: '{v}' is not a number", i + 2)))
                })
                .collect::<Result<Vec<_>>>()?;
            rows.push(row);
        }
        Ok(MetricsTable { columns, rows })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }

    pub fn column(&self, name: &str) -> Result<usize> {
        self.columns
            .iter()
            .position(|c| c == name)
            .ok_or_else(|| Error::Format(format!("missing column '{name}'")))
    }

    /// `(iteration, value)` series per policy index.
    pub fn series(&self, name: &str) -> Result<Vec<Vec<(f64, f64)>>> {
        let it = self.column("iteration")?;
        let pi = self.column("policy_index")?;
        let vi = self.column(name)?;
        let mut out: Vec<Vec<(f64, f64)>> = Vec::new();
        for r in &self.rows {
            let p = r[pi];
            if p < 0.0 || p.fract() != 0.0 {
                return Err(Error::Format(format!("bad policy index {p}")));
            }
            let p = p as usize;
            if out.len() <= p {
                out.resize(p + 1, Vec::new());
            }
            out[p].push((r[it], r[vi]));
        }
        Ok(out)
    }

    /// Mean over policies of `mean_return`, per iteration in file order.
    pub fn population_returns(&self) -> Result<Vec<f64>> {
        let it = self.column("iteration")?;
        let vi = self.column("mean_return")?;
        let mut out: Vec<(f64, f64, usize)> = Vec::new();
        for r in &self.rows {
            match out.last_mut() {
                Some(last) if last.0 == r[it] => {
                    last.1 += r[vi];
                    last.2 += 1;
                }
                _ => out.push((r[it], r[vi], 1)),
            }
        }
        Ok(out.into_iter().map(|(_, s, n)| s / n as f64).collect())
    }
}
