//! Score triples with a freshly initialised TransE model and round-trip it
//! through a binary checkpoint.
//!
//! ```text
//! cargo run --example transe_scoring
//! ```

use kgcl::checkpoint::{load_model, save_model};
use kgcl::dataset::Triple;
use kgcl::rng::{SeedStreams, Stream};
use kgcl::transe::{translation_distance, ModelConfig, TransEModel};

pub fn run() -> kgcl::Result<()> {
    let config = ModelConfig {
        dim: 8,
        ..Default::default()
    };
    let model = TransEModel::init(
        5,
        2,
        config,
        7,
        &mut SeedStreams::new(7).stream(Stream::Init),
    )?;

    for id in 0..model.num_entities() as u32 {
        let norm: f64 = model.entity(id).iter().map(|v| v * v).sum::<f64>().sqrt();
        println!("entity {id}: |e| = {norm:.6}");
    }
    for t in [
        Triple::new(0, 0, 1),
        Triple::new(1, 1, 2),
        Triple::new(3, 0, 3),
    ] {
        println!(
            "d{:?} = {:.4}",
            (t.head, t.relation, t.tail),
            model.score(&t)?
        );
    }
    // distance 0 only for an exact translation
    let h = [0.5, -1.0];
    println!(
        "exact translation: {}",
        translation_distance(&h, &[1.0, 1.0], &[1.5, 0.0])
    );
    if model.score(&Triple::new(9, 0, 0)).is_err() {
        println!("entity 9 is out of range");
    }

    let path = std::env::temp_dir().join(format!("kgcl-example-{}.ckpt", std::process::id()));
    save_model(&model, &path)?;
    let back = load_model(&path)?;
    println!(
        "checkpoint {} bytes, identical: {}",
        std::fs::metadata(&path).map_or(0, |m| m.len()),
        back == model
    );
    let _ = std::fs::remove_file(&path);
    Ok(())
}

fn main() -> kgcl::Result<()> {
    run()
}
