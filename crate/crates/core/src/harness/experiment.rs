use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use rayon::prelude::*;
use serde::Serialize;

use crate::env::Environment;
use crate::model::Instance;
use crate::policies::{run_policy, PolicyKind, PolicyRun};
use crate::rng::derive_seed;

use super::{ExperimentConfig, HarnessError};

/// First line of every CSV the harness writes.
pub const REPORT_SCHEMA: &str = "# bayesrec regret-report v1";

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SeedRow {
    pub horizon: u64,
    pub seed_index: u64,
    pub seed: u64,
    pub regret: f64,
    pub realized_regret: f64,
    pub rounds_used: u64,
    pub oracle_value: f64,
    pub committed_value: f64,
    pub exploration_completed: bool,
    pub checks: u64,
    pub lp_queries: u64,
    /// `name:rounds` per phase, `;`-separated.
    pub phase_rounds: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AggregateRow {
    pub horizon: u64,
    pub runs: u64,
    pub mean: f64,
    pub std: f64,
    pub min: f64,
    pub q25: f64,
    pub median: f64,
    pub q75: f64,
    pub max: f64,
    pub oracle_value: f64,
    pub completed_runs: u64,
    pub mean_checks: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RegretReport {
    pub policy: PolicyKind,
    pub master_seed: u64,
    pub instance: Instance,
    pub rows: Vec<SeedRow>,
    pub aggregates: Vec<AggregateRow>,
}

/// Runs one policy on a fresh environment.
pub fn run_seed(inst: &Instance, policy: PolicyKind, horizon: u64, seed: u64) -> Result<PolicyRun, HarnessError> {
    let mut env = Environment::new(inst.clone(), horizon, seed)?;
    Ok(run_policy(&mut env, policy)?)
}

/// Linear-interpolation quantile of sorted data (`q ∈ [0, 1]`).
pub fn quantile(sorted: &[f64], q: f64) -> f64 {
    let n = sorted.len();
    if n == 0 {
        return f64::NAN;
    }
    let h = (n - 1) as f64 * q;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Per-horizon summaries; rows of one horizon must be contiguous.
pub fn aggregate(rows: &[SeedRow]) -> Vec<AggregateRow> {
    rows.chunk_by(|a, b| a.horizon == b.horizon)
        .map(|group| {
            let mut regrets: Vec<f64> = group.iter().map(|r| r.regret).collect();
            regrets.sort_by(f64::total_cmp);
            let n = regrets.len() as f64;
            let mean = regrets.iter().sum::<f64>() / n;
            let std = if regrets.len() > 1 {
                (regrets.iter().map(|r| (r - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
            } else {
                0.0
            };
            AggregateRow {
                horizon: group[0].horizon,
                runs: group.len() as u64,
                mean,
                std,
                min: regrets[0],
                q25: quantile(&regrets, 0.25),
                median: quantile(&regrets, 0.5),
                q75: quantile(&regrets, 0.75),
                max: regrets[regrets.len() - 1],
                oracle_value: group[0].oracle_value,
                completed_runs: group.iter().filter(|r| r.exploration_completed).count() as u64,
                mean_checks: group.iter().map(|r| r.checks as f64).sum::<f64>() / n,
            }
        })
        .collect()
}

fn seed_row(run: &PolicyRun, seed_index: u64, seed: u64) -> SeedRow {
    let t = run.trace();
    SeedRow {
        horizon: t.horizon,
        seed_index,
        seed,
        regret: t.regret,
        realized_regret: t.realized_regret,
        rounds_used: t.rounds_used,
        oracle_value: t.oracle_value,
        committed_value: t.committed_value,
        exploration_completed: t.exploration_completed,
        checks: t.checks(),
        lp_queries: t.lp_queries,
        phase_rounds: t
            .phases
            .iter()
            .map(|p| format!("{}:{}", p.name, p.rounds))
            .collect::<Vec<_>>()
            .join(";"),
    }
}

/// Runs every (horizon, seed) cell in parallel and writes the CSVs when
/// `output_dir` is set. Cell `(h, s)` uses `derive_seed(master, h, s)`.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<RegretReport, HarnessError> {
    let inst = cfg.instance.resolve(cfg.base_dir.as_deref())?;
    let cells: Vec<(u64, u64, u64)> = cfg
        .horizons
        .iter()
        .enumerate()
        .flat_map(|(h, &horizon)| (0..cfg.seeds).map(move |s| (h as u64, s, horizon)))
        .collect();
    let rows = cells
        .par_iter()
        .map(|&(h, s, horizon)| {
            let seed = derive_seed(cfg.master_seed, h, s);
            run_seed(&inst, cfg.policy, horizon, seed).map(|run| seed_row(&run, s, seed))
        })
        .collect::<Result<Vec<_>, _>>()?;
    let report = RegretReport {
        policy: cfg.policy,
        master_seed: cfg.master_seed,
        instance: inst,
        aggregates: aggregate(&rows),
        rows,
    };
    if let Some(dir) = &cfg.output_dir {
        std::fs::create_dir_all(dir).map_err(|source| HarnessError::Io {
            path: dir.clone(),
            source,
        })?;
        write_per_seed_csv(&report, &dir.join("per_seed.csv"))?;
        write_aggregate_csv(&report, &dir.join("aggregate.csv"))?;
    }
    Ok(report)
}

fn write_csv<T: Serialize>(report: &RegretReport, path: &Path, records: &[T]) -> Result<(), HarnessError> {
    let io_err = |source| HarnessError::Io {
        path: path.to_path_buf(),
        source,
    };
    let mut out = BufWriter::new(File::create(path).map_err(io_err)?);
    writeln!(out, "{REPORT_SCHEMA}").map_err(io_err)?;
    writeln!(
        out,
        "# policy={} master_seed={} states={}",
        report.policy,
        report.master_seed,
        report.instance.num_states()
    )
    .map_err(io_err)?;
    let csv_err = |source| HarnessError::Csv {
        path: path.to_path_buf(),
        source,
    };
    let mut writer = csv::Writer::from_writer(out);
    for record in records {
        writer.serialize(record).map_err(csv_err)?;
    }
    writer.flush().map_err(io_err)
}

pub fn write_per_seed_csv(report: &RegretReport, path: &Path) -> Result<(), HarnessError> {
    write_csv(report, path, &report.rows)
}

pub fn write_aggregate_csv(report: &RegretReport, path: &Path) -> Result<(), HarnessError> {
    write_csv(report, path, &report.aggregates)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quantiles_interpolate() {
        let data = [1.0, 2.0, 3.0, 4.0];
        assert_eq!(quantile(&data, 0.0), 1.0);
        assert_eq!(quantile(&data, 1.0), 4.0);
        assert!((quantile(&data, 0.5) - 2.5).abs() < 1e-15);
        assert!((quantile(&data, 0.25) - 1.75).abs() < 1e-15);
        assert_eq!(quantile(&[7.0], 0.3), 7.0);
    }

    #[test]
    fn aggregates_per_horizon() {
        let row = |horizon, regret| SeedRow {
            horizon,
            seed_index: 0,
            seed: 0,
            regret,
            realized_regret: regret,
            rounds_used: horizon,
            oracle_value: 0.5,
            committed_value: 0.5,
            exploration_completed: true,
            checks: 2,
            lp_queries: 0,
            phase_rounds: String::new(),
        };
        let rows = vec![row(10, 1.0), row(10, 3.0), row(100, 5.0)];
        let agg = aggregate(&rows);
        assert_eq!(agg.len(), 2);
        assert_eq!(agg[0].runs, 2);
        assert!((agg[0].mean - 2.0).abs() < 1e-15);
        assert!((agg[0].std - 2f64.sqrt()).abs() < 1e-15);
        assert_eq!(agg[1].std, 0.0);
    }
}
