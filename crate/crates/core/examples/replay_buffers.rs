//! Compare random and wave replay selection on one task.
//!
//! ```text
//! cargo run --example replay_buffers
//! ```

use kgcl::continual::{build_replay_buffer, ReplayStrategy};
use kgcl::dataset::Triple;
use kgcl::rng::{SeedStreams, Stream};

pub fn run() -> kgcl::Result<()> {
    // positions are encoded in the head id so the spread is easy to see
    let task: Vec<Triple> = (0..1_000).map(|i| Triple::new(i, 0, i + 1)).collect();
    let streams = SeedStreams::new(42);
    for strategy in [ReplayStrategy::Random, ReplayStrategy::Wave] {
        let buffer =
            build_replay_buffer(0, &task, strategy, 50, &mut streams.stream(Stream::Replay));
        let mut deciles = [0usize; 10];
        for t in buffer.triples() {
            deciles[t.head as usize / 100] += 1;
        }
        println!(
            "{strategy:<6} {} kept, per decile of the task: {deciles:?}",
            buffer.len()
        );
    }
    let small = build_replay_buffer(
        3,
        &task[..20],
        ReplayStrategy::Wave,
        50,
        &mut streams.stream(Stream::Replay),
    );
    println!(
        "a 20-triple task keeps everything: {}",
        small.count_for_task(3)
    );
    Ok(())
}

fn main() -> kgcl::Result<()> {
    run()
}
