use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use kgcl::dataset::partition;
use kgcl::harness::{
    emit_plot_data, run_experiment, run_suite_cached, ExperimentConfig, GridSpec, Method,
    ResultStore, SuiteSummary,
};
use kgcl::rng::{SeedStreams, Stream};

#[derive(Parser)]
#[command(
    name = "kgcl",
    version,
    about = "Continual TransE training with EWC and replay"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment and store its results.
    Run {
        /// `key = value` config file.
        #[arg(long)]
        config: Option<PathBuf>,
        #[command(flatten)]
        overrides: Overrides,
        #[command(flatten)]
        out: OutDir,
    },
    /// Run a grid of experiments, skipping any already stored.
    Suite {
        /// Grid file: a config file whose `seeds`, `methods` and `partitions`
        /// may be comma-separated lists. Without one the full 80-run grid is used.
        #[arg(long)]
        grid: Option<PathBuf>,
        #[arg(long, value_delimiter = ',')]
        seeds: Option<Vec<u64>>,
        /// Methods such as `naive,ewc:0.1,replay_random`.
        #[arg(long, value_delimiter = ',')]
        methods: Option<Vec<String>>,
        #[arg(long, value_delimiter = ',')]
        partitions: Option<Vec<String>>,
        #[arg(long, default_value_t = 1)]
        workers: usize,
        #[command(flatten)]
        overrides: Overrides,
        #[command(flatten)]
        out: OutDir,
    },
    /// Summarise stored runs and write plot data.
    Report {
        #[command(flatten)]
        out: OutDir,
        /// Where plot CSVs go; defaults to `<out>/plots`.
        #[arg(long)]
        plots: Option<PathBuf>,
    },
    /// Print the task manifest for a partition.
    PartitionAudit {
        #[arg(long)]
        config: Option<PathBuf>,
        #[command(flatten)]
        overrides: Overrides,
    },
}

#[derive(Args)]
struct OutDir {
    /// Result store directory.
    #[arg(long = "out", env = "KGCL_OUTPUT_DIR", default_value = "results")]
    dir: PathBuf,
}

#[derive(Args, Default)]
struct Overrides {
    /// Dataset directory, or `synthetic`.
    #[arg(long, env = "KGCL_DATA_DIR")]
    dataset: Option<String>,
    #[arg(long)]
    method: Option<String>,
    #[arg(long)]
    lambda: Option<f64>,
    /// `relation` or `random`.
    #[arg(long)]
    partition: Option<String>,
    #[arg(long)]
    tasks: Option<usize>,
    #[arg(long)]
    epochs: Option<usize>,
    #[arg(long)]
    batch_size: Option<usize>,
    #[arg(long)]
    dim: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Any config key, as `key=value`. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
}

impl Overrides {
    fn apply(&self, cfg: &mut ExperimentConfig) -> kgcl::Result<()> {
        let mut pairs: Vec<(String, String)> = Vec::new();
        let mut push = |k: &str, v: Option<String>| {
            if let Some(v) = v {
                pairs.push((k.to_string(), v));
            }
        };
        push("dataset", self.dataset.clone());
        match (&self.method, self.lambda) {
            (Some(m), Some(l)) if !m.contains(':') => push("method", Some(format!("{m}:{l}"))),
            (m, l) => {
                push("method", m.clone());
                push("lambda", l.map(|v| v.to_string()));
            }
        }
        push("partition", self.partition.clone());
        push("tasks", self.tasks.map(|v| v.to_string()));
        push("epochs", self.epochs.map(|v| v.to_string()));
        push("batch_size", self.batch_size.map(|v| v.to_string()));
        push("dim", self.dim.map(|v| v.to_string()));
        push("seed", self.seed.map(|v| v.to_string()));
        for kv in &self.set {
            let (k, v) = kv.split_once('=').ok_or_else(|| {
                kgcl::Error::Config(format!("--set expects key=value, got `{kv}`"))
            })?;
            pairs.push((k.trim().to_string(), v.trim().to_string()));
        }
        for (k, v) in pairs {
            cfg.set(&k, &v)?;
        }
        cfg.validate()
    }
}

fn load_config(path: Option<&PathBuf>, overrides: &Overrides) -> kgcl::Result<ExperimentConfig> {
    let mut cfg = match path {
        Some(p) => ExperimentConfig::from_file(p)?,
        None => ExperimentConfig::default(),
    };
    overrides.apply(&mut cfg)?;
    Ok(cfg)
}

fn print_summary(summary: &SuiteSummary) -> kgcl::Result<()> {
    let mut table = Vec::new();
    summary.write_csv(&mut table)?;
    print!("{}", String::from_utf8_lossy(&table));
    Ok(())
}

fn execute(cli: Cli) -> kgcl::Result<bool> {
    match cli.command {
        Command::Run {
            config,
            overrides,
            out,
        } => {
            let cfg = load_config(config.as_ref(), &overrides)?;
            let store = ResultStore::open(&out.dir)?;
            let id = cfg.run_id();
            let record = match store.load(&id)? {
                Some(r) => {
                    eprintln!("run {id} already stored");
                    r
                }
                None => {
                    let r = run_experiment(&cfg)?;
                    store.save(&r)?;
                    r
                }
            };
            println!(
                "run {id}  {} / {}",
                record.config.method, record.config.partition
            );
            for (j, f) in record.report.per_task_pp.iter().enumerate() {
                println!("  task {j} forgetting {f:.2} pp");
            }
            println!("  average forgetting {:.2} pp", record.report.average_pp);
            println!(
                "  final MRR {:.4} (pooled {:.4})",
                record.report.final_mrr, record.final_mrr_pooled
            );
            println!(
                "  config: {}",
                out.dir.join("runs").join(format!("{id}.config")).display()
            );
            Ok(true)
        }
        Command::Suite {
            grid,
            seeds,
            methods,
            partitions,
            workers,
            overrides,
            out,
        } => {
            let mut spec = match &grid {
                Some(p) => GridSpec::from_file(p)?,
                None => GridSpec::full(ExperimentConfig::default()),
            };
            overrides.apply(&mut spec.base)?;
            if let Some(s) = seeds {
                spec.seeds = s;
            }
            if let Some(m) = methods {
                spec.methods = m
                    .iter()
                    .map(|m| Method::parse(m, None))
                    .collect::<kgcl::Result<_>>()?;
            }
            if let Some(p) = partitions {
                spec.partitions = p.iter().map(|p| p.parse()).collect::<kgcl::Result<_>>()?;
            }
            let configs = spec.expand();
            eprintln!(
                "{} runs, {workers} worker(s), store {}",
                configs.len(),
                out.dir.display()
            );
            let store = ResultStore::open(&out.dir)?;
            let summary = run_suite_cached(&configs, workers, &store)?;
            print_summary(&summary)?;
            for f in &summary.failures {
                eprintln!(
                    "FAILED {} ({} / {}): {}",
                    f.id, f.config.method, f.config.partition, f.error
                );
            }
            Ok(summary.failures.is_empty())
        }
        Command::Report { out, plots } => {
            let store = ResultStore::open(&out.dir)?;
            let summary = SuiteSummary::from_records(store.load_all()?, Vec::new());
            let path = out.dir.join("summary.csv");
            let file = std::fs::File::create(&path).map_err(|e| kgcl::Error::Io {
                path: path.clone(),
                source: e,
            })?;
            summary.write_csv(file)?;
            print_summary(&summary)?;
            eprintln!("wrote {}", path.display());
            for p in emit_plot_data(&summary, plots.unwrap_or_else(|| out.dir.join("plots")))? {
                eprintln!("wrote {}", p.display());
            }
            Ok(true)
        }
        Command::PartitionAudit { config, overrides } => {
            let cfg = load_config(config.as_ref(), &overrides)?;
            let graph = cfg.dataset.load()?;
            let tasks = partition(
                &graph,
                cfg.partition,
                cfg.num_tasks,
                &mut SeedStreams::new(cfg.seed).stream(Stream::Partition),
            )?;
            print!("{}", tasks.manifest(&graph));
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
