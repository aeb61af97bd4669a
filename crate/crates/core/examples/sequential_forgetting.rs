//! Four tasks in sequence: retention matrix and forgetting per method.
//!
//! ```text
//! cargo run --release --example sequential_forgetting
//! ```

use kgcl::dataset::PartitionStrategy;
use kgcl::harness::{run_experiment, DatasetSource, ExperimentConfig, Method};
use kgcl::synthetic::SyntheticConfig;

pub fn run() -> kgcl::Result<()> {
    let mut base = ExperimentConfig {
        dataset: DatasetSource::Synthetic(SyntheticConfig::default()),
        ..Default::default()
    };
    base.train.adam.lr = 0.01;

    for partition in [
        PartitionStrategy::RelationRoundRobin,
        PartitionStrategy::Random,
    ] {
        for method in [
            Method::Naive,
            Method::Ewc { lambda: 10.0 },
            Method::ReplayRandom,
        ] {
            let mut config = base.clone();
            config.partition = partition;
            config.method = method;
            let record = run_experiment(&config)?;
            println!(
                "{partition:<8} {:<14} forgetting {:>6.2} pp  final MRR {:.4}  ({:.1}s)",
                method.to_string(),
                record.report.average_pp,
                record.report.final_mrr,
                record.timings.total_seconds
            );
            if method == Method::Naive {
                let mut csv = Vec::new();
                record.retention.write_csv(&mut csv)?;
                print!("{}", String::from_utf8_lossy(&csv));
            }
        }
    }
    Ok(())
}

fn main() -> kgcl::Result<()> {
    run()
}
