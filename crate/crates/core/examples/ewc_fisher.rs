//! Fisher diagonal, EWC anchor and what the penalty does to old-task MRR.
//!
//! ```text
//! cargo run --release --example ewc_fisher
//! ```

use kgcl::continual::{compute_fisher_diagonal, ewc_penalty, EwcAnchor, EwcRegularizer};
use kgcl::dataset::{partition_relation_roundrobin, PartitionStrategy};
use kgcl::eval::{mrr, FilterIndex};
use kgcl::optim::{train_task, AdamConfig, AdamState, TrainConfig, TrainRngs};
use kgcl::rng::{SeedStreams, Stream};
use kgcl::synthetic::{generate, SyntheticConfig};
use kgcl::transe::{ModelConfig, Table, TransEModel};

pub fn run() -> kgcl::Result<()> {
    let graph = generate(&SyntheticConfig::default())?;
    let tasks = partition_relation_roundrobin(&graph, 2)?;
    assert_eq!(tasks.strategy, PartitionStrategy::RelationRoundRobin);
    let filter = FilterIndex::from_graph(&graph);
    let streams = SeedStreams::new(42);
    let config = TrainConfig {
        adam: AdamConfig {
            lr: 0.01,
            ..Default::default()
        },
        ..Default::default()
    };

    let mut model = TransEModel::init(
        graph.num_entities(),
        graph.num_relations(),
        ModelConfig::default(),
        42,
        &mut streams.stream(Stream::Init),
    )?;
    let mut adam = AdamState::new(&model, config.adam);
    let mut rngs = TrainRngs {
        shuffle: streams.stream(Stream::Shuffle),
        negatives: streams.stream(Stream::Negatives),
    };
    train_task(
        &mut model,
        &mut adam,
        &tasks.train_tasks[0],
        &config,
        None,
        None,
        &mut rngs,
        0,
    )?;
    let before = mrr(&model, &tasks.eval_tasks[0], &filter)?;

    let fisher = compute_fisher_diagonal(
        &model,
        &tasks.train_tasks[0],
        256,
        model.config().margin,
        &mut streams.stream(Stream::Fisher),
    )?;
    let values = fisher.table(Table::Entity);
    let nonzero = values.iter().filter(|v| **v > 0.0).count();
    let max = values.iter().cloned().fold(0.0, f64::max);
    println!(
        "entity Fisher: {nonzero}/{} nonzero, max {max:.4}",
        values.len()
    );
    let anchor = EwcAnchor::new(0, model.clone(), fisher)?;

    println!("task 0 MRR after task 0: {before:.4}");
    for lambda in [0.0, 1.0, 10.0, 100.0] {
        let reg = EwcRegularizer::new(vec![anchor.clone()], lambda)?;
        let mut m = model.clone();
        let mut a = adam.clone();
        let mut r = rngs.clone();
        train_task(
            &mut m,
            &mut a,
            &tasks.train_tasks[1],
            &config,
            Some(&reg),
            None,
            &mut r,
            1,
        )?;
        println!(
            "λ = {lambda:>5}: task 0 MRR {:.4}, task 1 MRR {:.4}, unweighted penalty {:.3}",
            mrr(&m, &tasks.eval_tasks[0], &filter)?,
            mrr(&m, &tasks.eval_tasks[1], &filter)?,
            ewc_penalty(&m, std::slice::from_ref(&anchor), 1.0)?
        );
    }
    Ok(())
}

fn main() -> kgcl::Result<()> {
    run()
}
