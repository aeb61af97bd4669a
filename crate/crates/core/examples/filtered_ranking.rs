//! Filtered ranking on a hand-built graph, including a tie.
//!
//! ```text
//! cargo run --example filtered_ranking
//! ```

use kgcl::dataset::Triple;
use kgcl::eval::{filtered_rank, mrr, FilterIndex, Side};
use kgcl::transe::{ModelConfig, TransEModel};

pub fn run() -> kgcl::Result<()> {
    // seven entities on a line, one relation that steps +1
    let config = ModelConfig {
        dim: 1,
        margin: 1.0,
        normalize_entities: false,
    };
    let model = TransEModel::from_tables(
        config,
        0,
        vec![0.0, 1.3, 2.0, 1.0, 0.9, 1.0, 1.0],
        vec![1.0],
    )?;
    let known = [
        Triple::new(0, 0, 1),
        Triple::new(0, 0, 3),
        Triple::new(1, 0, 2),
    ];
    let filter = FilterIndex::from_triples(&known);
    let raw = FilterIndex::from_triples(&[]);

    for t in &known {
        for side in [Side::Head, Side::Tail] {
            println!(
                "{:?} {:<4?} raw rank {}  filtered rank {}",
                (t.head, t.relation, t.tail),
                side,
                filtered_rank(&model, t, side, &raw)?,
                filtered_rank(&model, t, side, &filter)?
            );
        }
    }
    // entities 3, 5 and 6 share a point, so the tail of (0, 0, 3) has two
    // tied rivals: 1 + 0 + floor(2 / 2) = 2. The tail of (0, 0, 1) loses to
    // 3, 4, 5 and 6; filtering drops the known answer 3.
    println!("MRR over both sides: {:.4}", mrr(&model, &known, &filter)?);
    Ok(())
}

fn main() -> kgcl::Result<()> {
    run()
}
