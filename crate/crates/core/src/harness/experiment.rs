use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::continual::{compute_fisher_diagonal, EwcAnchor, EwcRegularizer, ReplayBuffer};
use crate::dataset::{partition, KnowledgeGraph, PartitionStrategy};
use crate::error::Result;
use crate::eval::{
    forgetting_report, pooled_final_mrr, retention_update, FilterIndex, ForgettingReport,
    RetentionMatrix,
};
use crate::harness::config::ExperimentConfig;
use crate::optim::{train_task, AdamState, PenaltyHook, TrainLog, TrainRngs};
use crate::rng::{SeedStreams, Stream};
use crate::transe::TransEModel;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Timings {
    pub total_seconds: f64,
    pub train_seconds: Vec<f64>,
    pub fisher_seconds: Vec<f64>,
    pub eval_seconds: Vec<f64>,
}

/// Everything one run produced, with its resolved config embedded.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultsRecord {
    pub id: String,
    pub config: ExperimentConfig,
    pub retention: RetentionMatrix,
    pub report: ForgettingReport,
    pub final_mrr_pooled: f64,
    pub train_sizes: Vec<usize>,
    pub eval_sizes: Vec<usize>,
    pub train_logs: Vec<TrainLog>,
    pub timings: Timings,
}

/// The compact per-run forgetting record.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForgettingRecord {
    pub method: String,
    pub seed: u64,
    pub partition: PartitionStrategy,
    pub lambda: Option<f64>,
    pub per_task_forgetting_pp: Vec<f64>,
    pub average_forgetting_pp: f64,
    pub final_mrr: f64,
}

impl ResultsRecord {
    pub fn forgetting_record(&self) -> ForgettingRecord {
        ForgettingRecord {
            method: self.config.method.name().to_string(),
            seed: self.config.seed,
            partition: self.config.partition,
            lambda: self.config.method.lambda(),
            per_task_forgetting_pp: self.report.per_task_pp.clone(),
            average_forgetting_pp: self.report.average_pp,
            final_mrr: self.report.final_mrr,
        }
    }
}

/// Loads the configured dataset and runs it.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ResultsRecord> {
    let graph = config.dataset.load()?;
    run_experiment_on(&graph, config)
}

/// Sequential training over the partitioned tasks. After task `k`: train,
/// snapshot an EWC anchor (when the method uses EWC and more tasks follow),
/// add task `k` to the replay buffer (likewise), then fill retention row `k`.
pub fn run_experiment_on(
    graph: &KnowledgeGraph,
    config: &ExperimentConfig,
) -> Result<ResultsRecord> {
    config.validate()?;
    let started = Instant::now();
    let streams = SeedStreams::new(config.seed);
    let tasks = partition(
        graph,
        config.partition,
        config.num_tasks,
        &mut streams.stream(Stream::Partition),
    )?;
    let filter = FilterIndex::from_graph(graph);

    let mut model = TransEModel::init(
        graph.num_entities(),
        graph.num_relations(),
        config.model,
        config.seed,
        &mut streams.stream(Stream::Init),
    )?;
    let mut adam = AdamState::new(&model, config.train.adam);
    let mut train_rngs = TrainRngs {
        shuffle: streams.stream(Stream::Shuffle),
        negatives: streams.stream(Stream::Negatives),
    };
    let mut fisher_rng = streams.stream(Stream::Fisher);
    let mut replay_rng = streams.stream(Stream::Replay);

    let mut ewc = config
        .method
        .lambda()
        .map(|l| EwcRegularizer::new(Vec::new(), l))
        .transpose()?;
    let mut replay = config
        .method
        .replay()
        .map(|s| ReplayBuffer::new(s, config.replay_capacity));

    let t = tasks.num_tasks();
    let mut retention = RetentionMatrix::new(t);
    let mut logs = Vec::with_capacity(t);
    let mut timings = Timings::default();

    for k in 0..t {
        let task = &tasks.train_tasks[k];
        if k > 0 && config.train.reset_adam_per_task {
            adam.reset();
        }

        let clock = Instant::now();
        let log = train_task(
            &mut model,
            &mut adam,
            task,
            &config.train,
            ewc.as_ref().map(|e| e as &dyn PenaltyHook),
            replay.as_ref(),
            &mut train_rngs,
            k,
        )?;
        logs.push(log);
        timings.train_seconds.push(clock.elapsed().as_secs_f64());

        let clock = Instant::now();
        if k + 1 < t {
            if let Some(reg) = ewc.as_mut() {
                let fisher = compute_fisher_diagonal(
                    &model,
                    task,
                    config.fisher_batch_size,
                    config.model.margin,
                    &mut fisher_rng,
                )?;
                reg.push_anchor(EwcAnchor::new(k, model.clone(), fisher)?)?;
            }
            if let Some(buffer) = replay.as_mut() {
                buffer.add_task(k, task, &mut replay_rng);
            }
        }
        timings.fisher_seconds.push(clock.elapsed().as_secs_f64());

        let clock = Instant::now();
        retention_update(
            &mut retention,
            k,
            &model,
            &tasks,
            &filter,
            config.eval_sides,
        )?;
        timings.eval_seconds.push(clock.elapsed().as_secs_f64());
    }

    let report = forgetting_report(&retention)?;
    let eval_sizes: Vec<usize> = tasks.eval_tasks.iter().map(Vec::len).collect();
    let final_mrr_pooled = pooled_final_mrr(&retention, &eval_sizes)?;
    timings.total_seconds = started.elapsed().as_secs_f64();

    Ok(ResultsRecord {
        id: config.run_id(),
        config: config.clone(),
        retention,
        report,
        final_mrr_pooled,
        train_sizes: tasks.train_tasks.iter().map(Vec::len).collect(),
        eval_sizes,
        train_logs: logs,
        timings,
    })
}
