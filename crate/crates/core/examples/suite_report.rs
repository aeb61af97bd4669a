//! A small multi-seed grid: cached results, summary table and plot data.
//!
//! ```text
//! cargo run --release --example suite_report -- /tmp/kgcl-suite
//! ```

use std::path::PathBuf;

use kgcl::harness::{
    emit_plot_data, run_suite_cached, DatasetSource, ExperimentConfig, GridSpec, Method,
    ResultStore,
};
use kgcl::synthetic::SyntheticConfig;

pub fn run(out: PathBuf) -> kgcl::Result<()> {
    let mut base = ExperimentConfig {
        dataset: DatasetSource::Synthetic(SyntheticConfig::default()),
        ..Default::default()
    };
    base.train.adam.lr = 0.01;
    base.train.epochs = 10;
    let mut grid = GridSpec::full(base);
    grid.seeds = vec![42, 123, 456];
    grid.methods = vec![
        Method::Naive,
        Method::Ewc { lambda: 1.0 },
        Method::Ewc { lambda: 10.0 },
    ];

    let store = ResultStore::open(&out)?;
    let summary = run_suite_cached(&grid.expand(), 1, &store)?;
    let mut table = Vec::new();
    summary.write_csv(&mut table)?;
    print!("{}", String::from_utf8_lossy(&table));
    for path in emit_plot_data(&summary, out.join("plots"))? {
        println!("wrote {}", path.display());
    }
    Ok(())
}

fn main() -> kgcl::Result<()> {
    let out = std::env::args_os()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| std::env::temp_dir().join("kgcl-suite"));
    run(out)
}
