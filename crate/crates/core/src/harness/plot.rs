//! CSV plot data. Files written by [`emit_plot_data`]:
//!
//! - `forgetting_by_method.csv`: `method,lambda,partition,runs,forgetting_pp_mean,forgetting_pp_std`
//! - `partition_comparison.csv`: `method,lambda,relation_pp_mean,relation_pp_std,random_pp_mean,random_pp_std,difference_pp`
//! - `tradeoff_scatter.csv`: `method,lambda,partition,forgetting_pp,final_mrr,forgetting_pp_std,final_mrr_std`
//! - `retention_heatmap.csv`: `method,lambda,partition,after_task,task,mrr_mean,mrr_std,runs`
//! - `lambda_sweep.csv`: `lambda,relation_pp_mean,relation_pp_std,random_pp_mean,random_pp_std,relation_final_mrr_mean,relation_final_mrr_std`

use std::fs::{self, File};
use std::path::{Path, PathBuf};

use crate::dataset::PartitionStrategy;
use crate::error::{Error, Result};
use crate::harness::config::Method;
use crate::harness::suite::{mean_std, SuiteSummary};

fn writer(dir: &Path, name: &str) -> Result<(csv::Writer<File>, PathBuf)> {
    let path = dir.join(name);
    let f = File::create(&path).map_err(|e| Error::io(&path, e))?;
    Ok((csv::Writer::from_writer(f), path))
}

fn lambda_cell(m: &Method) -> String {
    m.lambda().map(|l| l.to_string()).unwrap_or_default()
}

pub fn emit_plot_data(summary: &SuiteSummary, dir: impl AsRef<Path>) -> Result<Vec<PathBuf>> {
    let dir = dir.as_ref();
    if summary.rows.is_empty() {
        return Err(Error::Config("nothing to plot: summary is empty".into()));
    }
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut written = Vec::new();

    let (mut w, path) = writer(dir, "forgetting_by_method.csv")?;
    w.write_record([
        "method",
        "lambda",
        "partition",
        "runs",
        "forgetting_pp_mean",
        "forgetting_pp_std",
    ])?;
    for r in &summary.rows {
        w.write_record([
            r.method.name().to_string(),
            lambda_cell(&r.method),
            r.partition.to_string(),
            r.runs.to_string(),
            r.forgetting_pp_mean.to_string(),
            r.forgetting_pp_std.to_string(),
        ])?;
    }
    w.flush().map_err(|e| Error::io(&path, e))?;
    written.push(path);

    let (mut w, path) = writer(dir, "partition_comparison.csv")?;
    w.write_record([
        "method",
        "lambda",
        "relation_pp_mean",
        "relation_pp_std",
        "random_pp_mean",
        "random_pp_std",
        "difference_pp",
    ])?;
    for rel in summary
        .rows
        .iter()
        .filter(|r| r.partition == PartitionStrategy::RelationRoundRobin)
    {
        if let Some(rnd) = summary.row(rel.method, PartitionStrategy::Random) {
            w.write_record([
                rel.method.name().to_string(),
                lambda_cell(&rel.method),
                rel.forgetting_pp_mean.to_string(),
                rel.forgetting_pp_std.to_string(),
                rnd.forgetting_pp_mean.to_string(),
                rnd.forgetting_pp_std.to_string(),
                (rel.forgetting_pp_mean - rnd.forgetting_pp_mean).to_string(),
            ])?;
        }
    }
    w.flush().map_err(|e| Error::io(&path, e))?;
    written.push(path);

    let (mut w, path) = writer(dir, "tradeoff_scatter.csv")?;
    w.write_record([
        "method",
        "lambda",
        "partition",
        "forgetting_pp",
        "final_mrr",
        "forgetting_pp_std",
        "final_mrr_std",
    ])?;
    for r in &summary.rows {
        w.write_record([
            r.method.name().to_string(),
            lambda_cell(&r.method),
            r.partition.to_string(),
            r.forgetting_pp_mean.to_string(),
            r.final_mrr_mean.to_string(),
            r.forgetting_pp_std.to_string(),
            r.final_mrr_std.to_string(),
        ])?;
    }
    w.flush().map_err(|e| Error::io(&path, e))?;
    written.push(path);

    let (mut w, path) = writer(dir, "retention_heatmap.csv")?;
    w.write_record([
        "method",
        "lambda",
        "partition",
        "after_task",
        "task",
        "mrr_mean",
        "mrr_std",
        "runs",
    ])?;
    for row in &summary.rows {
        let members: Vec<_> = summary
            .records
            .iter()
            .filter(|r| r.config.method == row.method && r.config.partition == row.partition)
            .collect();
        let t = members.first().map_or(0, |r| r.retention.num_tasks());
        for i in 0..t {
            for j in 0..=i {
                let cells: Vec<f64> = members
                    .iter()
                    .filter_map(|r| r.retention.get(i, j))
                    .collect();
                if cells.is_empty() {
                    continue;
                }
                let (mean, std) = mean_std(&cells);
                w.write_record([
                    row.method.name().to_string(),
                    lambda_cell(&row.method),
                    row.partition.to_string(),
                    i.to_string(),
                    j.to_string(),
                    mean.to_string(),
                    std.to_string(),
                    cells.len().to_string(),
                ])?;
            }
        }
    }
    w.flush().map_err(|e| Error::io(&path, e))?;
    written.push(path);

    let (mut w, path) = writer(dir, "lambda_sweep.csv")?;
    w.write_record([
        "lambda",
        "relation_pp_mean",
        "relation_pp_std",
        "random_pp_mean",
        "random_pp_std",
        "relation_final_mrr_mean",
        "relation_final_mrr_std",
    ])?;
    let mut lambdas: Vec<f64> = summary
        .rows
        .iter()
        .filter_map(|r| match r.method {
            Method::Ewc { lambda } => Some(lambda),
            _ => None,
        })
        .collect();
    lambdas.sort_by(f64::total_cmp);
    lambdas.dedup();
    let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
    for lambda in lambdas {
        let m = Method::Ewc { lambda };
        let rel = summary.row(m, PartitionStrategy::RelationRoundRobin);
        let rnd = summary.row(m, PartitionStrategy::Random);
        w.write_record([
            lambda.to_string(),
            opt(rel.map(|r| r.forgetting_pp_mean)),
            opt(rel.map(|r| r.forgetting_pp_std)),
            opt(rnd.map(|r| r.forgetting_pp_mean)),
            opt(rnd.map(|r| r.forgetting_pp_std)),
            opt(rel.map(|r| r.final_mrr_mean)),
            opt(rel.map(|r| r.final_mrr_std)),
        ])?;
    }
    w.flush().map_err(|e| Error::io(&path, e))?;
    written.push(path);

    Ok(written)
}
