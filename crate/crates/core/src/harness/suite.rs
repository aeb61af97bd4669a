use std::collections::HashMap;
use std::io::Write;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::{KnowledgeGraph, PartitionStrategy};
use crate::error::{Error, Result};
use crate::harness::config::{ExperimentConfig, Method};
use crate::harness::experiment::{run_experiment_on, ResultsRecord};
use crate::harness::store::ResultStore;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FailureRecord {
    pub id: String,
    pub config: ExperimentConfig,
    pub error: String,
}

/// Mean and sample standard deviation over the seeds of one
/// (method, partition) cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub method: Method,
    pub partition: PartitionStrategy,
    pub runs: usize,
    pub seeds: Vec<u64>,
    pub forgetting_pp_mean: f64,
    pub forgetting_pp_std: f64,
    pub final_mrr_mean: f64,
    pub final_mrr_std: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SuiteSummary {
    pub records: Vec<ResultsRecord>,
    pub failures: Vec<FailureRecord>,
    pub rows: Vec<SummaryRow>,
}

/// `(mean, sample std)`; std is 0 for a single value.
pub fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    if n == 1 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    (mean, var.sqrt())
}

impl SuiteSummary {
    /// Groups records by (method, partition) in order of first appearance.
    pub fn from_records(records: Vec<ResultsRecord>, failures: Vec<FailureRecord>) -> Self {
        let mut groups: Vec<((Method, PartitionStrategy), Vec<&ResultsRecord>)> = Vec::new();
        for r in &records {
            let key = (r.config.method, r.config.partition);
            match groups.iter_mut().find(|(k, _)| *k == key) {
                Some((_, members)) => members.push(r),
                None => groups.push((key, vec![r])),
            }
        }
        let rows = groups
            .into_iter()
            .map(|((method, partition), members)| {
                let f: Vec<f64> = members.iter().map(|r| r.report.average_pp).collect();
                let m: Vec<f64> = members.iter().map(|r| r.report.final_mrr).collect();
                let (forgetting_pp_mean, forgetting_pp_std) = mean_std(&f);
                let (final_mrr_mean, final_mrr_std) = mean_std(&m);
                SummaryRow {
                    method,
                    partition,
                    runs: members.len(),
                    seeds: members.iter().map(|r| r.config.seed).collect(),
                    forgetting_pp_mean,
                    forgetting_pp_std,
                    final_mrr_mean,
                    final_mrr_std,
                }
            })
            .collect();
        Self {
            records,
            failures,
            rows,
        }
    }

    pub fn row(&self, method: Method, partition: PartitionStrategy) -> Option<&SummaryRow> {
        self.rows
            .iter()
            .find(|r| r.method == method && r.partition == partition)
    }

    /// Summary table as CSV:
    /// `method,lambda,partition,runs,forgetting_pp_mean,forgetting_pp_std,final_mrr_mean,final_mrr_std`.
    pub fn write_csv(&self, out: impl Write) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record([
            "method",
            "lambda",
            "partition",
            "runs",
            "forgetting_pp_mean",
            "forgetting_pp_std",
            "final_mrr_mean",
            "final_mrr_std",
        ])?;
        for r in &self.rows {
            w.write_record([
                r.method.name().to_string(),
                r.method.lambda().map(|l| l.to_string()).unwrap_or_default(),
                r.partition.to_string(),
                r.runs.to_string(),
                r.forgetting_pp_mean.to_string(),
                r.forgetting_pp_std.to_string(),
                r.final_mrr_mean.to_string(),
                r.final_mrr_std.to_string(),
            ])?;
        }
        w.flush().map_err(|e| Error::io("<csv>", e))?;
        Ok(())
    }
}

/// Runs every config (up to `workers` at a time) and aggregates. A failing
/// config becomes a [`FailureRecord`]; the rest still run.
pub fn run_suite(grid: &[ExperimentConfig], workers: usize) -> Result<SuiteSummary> {
    run_suite_inner(grid, workers, None)
}

/// As [`run_suite`], but configs already in `store` are loaded instead of
/// rerun, and new records are saved as they finish.
pub fn run_suite_cached(
    grid: &[ExperimentConfig],
    workers: usize,
    store: &ResultStore,
) -> Result<SuiteSummary> {
    run_suite_inner(grid, workers, Some(store))
}

fn run_suite_inner(
    grid: &[ExperimentConfig],
    workers: usize,
    store: Option<&ResultStore>,
) -> Result<SuiteSummary> {
    if grid.is_empty() {
        return Err(Error::Config("empty experiment grid".into()));
    }
    let mut graphs: HashMap<String, std::result::Result<Arc<KnowledgeGraph>, String>> =
        HashMap::new();
    for cfg in grid {
        let key = cfg.dataset.cache_key();
        graphs
            .entry(key)
            .or_insert_with(|| cfg.dataset.load().map(Arc::new).map_err(|e| e.to_string()));
    }

    let run_one =
        |cfg: &ExperimentConfig| -> std::result::Result<ResultsRecord, Box<FailureRecord>> {
            let fail = |error: String| {
                Box::new(FailureRecord {
                    id: cfg.run_id(),
                    config: cfg.clone(),
                    error,
                })
            };
            if let Some(store) = store {
                if let Some(rec) = store.load(&cfg.run_id()).map_err(|e| fail(e.to_string()))? {
                    return Ok(rec);
                }
            }
            let graph = graphs[&cfg.dataset.cache_key()]
                .as_ref()
                .map_err(|e| fail(e.clone()))?;
            let rec = run_experiment_on(graph, cfg).map_err(|e| fail(e.to_string()))?;
            if let Some(store) = store {
                store.save(&rec).map_err(|e| fail(e.to_string()))?;
            }
            Ok(rec)
        };

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::Config(e.to_string()))?;
    let outcomes: Vec<_> = pool.install(|| grid.par_iter().map(run_one).collect());

    let mut records = Vec::new();
    let mut failures = Vec::new();
    for o in outcomes {
        match o {
            Ok(r) => records.push(r),
            Err(f) => failures.push(*f),
        }
    }
    Ok(SuiteSummary::from_records(records, failures))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mean_std_basics() {
        assert_eq!(mean_std(&[3.0]), (3.0, 0.0));
        let (m, s) = mean_std(&[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(m, 2.5);
        assert!((s - (5.0f64 / 3.0).sqrt()).abs() < 1e-15);
    }
}
