//! Load a graph and split it into tasks both ways.
//!
//! ```text
//! cargo run --example load_and_partition                  # generated graph
//! cargo run --example load_and_partition -- data/FB15k-237
//! ```
//!
//! A directory needs tab-separated `train.txt`, `valid.txt` and `test.txt`.

use std::path::PathBuf;

use kgcl::dataset::{partition, KnowledgeGraph, PartitionStrategy};
use kgcl::rng::{SeedStreams, Stream};
use kgcl::synthetic::{generate, SyntheticConfig};

pub fn run(dir: Option<PathBuf>) -> kgcl::Result<()> {
    let graph = match dir {
        Some(dir) => KnowledgeGraph::load_dir(dir)?,
        None => generate(&SyntheticConfig::default())?,
    };
    println!(
        "{} entities ({} seen in train), {} relations, {}/{}/{} train/valid/test triples",
        graph.num_entities(),
        graph.train_entity_count(),
        graph.num_relations(),
        graph.train.len(),
        graph.valid.len(),
        graph.test.len()
    );
    if let Some(raw) = graph.decode(&graph.train[0]) {
        println!(
            "first training triple: {} --{}--> {}",
            raw.head, raw.relation, raw.tail
        );
    }

    let streams = SeedStreams::new(42);
    for strategy in [
        PartitionStrategy::RelationRoundRobin,
        PartitionStrategy::Random,
    ] {
        let tasks = partition(&graph, strategy, 4, &mut streams.stream(Stream::Partition))?;
        println!("\n{strategy} partition");
        print!("{}", tasks.manifest(&graph));
    }
    Ok(())
}

fn main() -> kgcl::Result<()> {
    run(std::env::args_os().nth(1).map(PathBuf::from))
}
