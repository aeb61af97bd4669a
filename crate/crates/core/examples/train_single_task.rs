//! Train TransE on a single task and watch loss and MRR.
//!
//! ```text
//! cargo run --release --example train_single_task
//! ```

use kgcl::eval::{mrr, FilterIndex};
use kgcl::optim::{train_task, AdamConfig, AdamState, TrainConfig, TrainRngs};
use kgcl::rng::{SeedStreams, Stream};
use kgcl::synthetic::{generate, SyntheticConfig};
use kgcl::transe::{ModelConfig, TransEModel};

pub fn run() -> kgcl::Result<()> {
    let graph = generate(&SyntheticConfig {
        views: 1,
        ..Default::default()
    })?;
    let filter = FilterIndex::from_graph(&graph);
    let streams = SeedStreams::new(42);
    let mut model = TransEModel::init(
        graph.num_entities(),
        graph.num_relations(),
        ModelConfig::default(),
        42,
        &mut streams.stream(Stream::Init),
    )?;
    let config = TrainConfig {
        epochs: 20,
        batch_size: 128,
        adam: AdamConfig {
            lr: 0.01,
            ..Default::default()
        },
        ..Default::default()
    };
    let mut adam = AdamState::new(&model, config.adam);
    let mut rngs = TrainRngs {
        shuffle: streams.stream(Stream::Shuffle),
        negatives: streams.stream(Stream::Negatives),
    };

    println!("test MRR before: {:.4}", mrr(&model, &graph.test, &filter)?);
    let log = train_task(
        &mut model,
        &mut adam,
        &graph.train,
        &config,
        None,
        None,
        &mut rngs,
        0,
    )?;
    for e in log.epochs.iter().step_by(4) {
        println!("epoch {:>2}  mean loss {:.4}", e.epoch, e.mean_loss);
    }
    println!("{} Adam steps", adam.step_count());
    println!("test MRR after:  {:.4}", mrr(&model, &graph.test, &filter)?);
    Ok(())
}

fn main() -> kgcl::Result<()> {
    run()
}
