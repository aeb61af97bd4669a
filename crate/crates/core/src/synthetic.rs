//! Generated knowledge graphs with planted translational structure.
//!
//! Entities get hidden latent vectors and relations hidden translations.
//! A triple `(h, r, t)` picks `t` as the closest of `candidates` random
//! candidates to `latent(h) + translation(r)`, so TransE can learn the graph
//! but not perfectly. Relation frequencies follow a Zipf-like law, which
//! gives the round-robin partitioner something to balance.
//!
//! With `views > 1` every entity has one latent vector per view and relation
//! `r` lives in view `r % views`. Relations from different views disagree
//! about where entities sit, so learning one view pulls the embedding away
//! from the others.

use std::collections::HashSet;

use rand::distributions::{Distribution, WeightedIndex};
use rand::seq::SliceRandom;
use rand::{Rng as _, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dataset::{KnowledgeGraph, Triple};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SyntheticConfig {
    pub entities: usize,
    pub relations: usize,
    /// Target number of distinct triples across all splits.
    pub triples: usize,
    pub latent_dim: usize,
    /// Independent latent spaces; relation `r` uses view `r % views`.
    pub views: usize,
    /// Random tail candidates considered per triple; higher is cleaner.
    pub candidates: usize,
    pub zipf_exponent: f64,
    pub valid_fraction: f64,
    pub test_fraction: f64,
    pub seed: u64,
}

impl Default for SyntheticConfig {
    fn default() -> Self {
        Self {
            entities: 200,
            relations: 24,
            triples: 8_000,
            latent_dim: 4,
            views: 4,
            candidates: 200,
            zipf_exponent: 0.8,
            valid_fraction: 0.05,
            test_fraction: 0.08,
            seed: 7,
        }
    }
}

pub fn generate(cfg: &SyntheticConfig) -> Result<KnowledgeGraph> {
    if cfg.entities < 2
        || cfg.relations == 0
        || cfg.latent_dim == 0
        || cfg.candidates == 0
        || cfg.views == 0
    {
        return Err(Error::Config(
            "synthetic graph needs >= 2 entities, >= 1 relation".into(),
        ));
    }
    if cfg.triples < cfg.relations {
        return Err(Error::Config(
            "synthetic graph needs at least one triple per relation".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let k = cfg.latent_dim;
    let stride = cfg.entities * k;
    let latent: Vec<f64> = (0..cfg.views * stride)
        .map(|_| rng.gen_range(-1.0..1.0))
        .collect();
    let shift: Vec<f64> = (0..cfg.relations * k)
        .map(|_| rng.gen_range(-0.8..0.8))
        .collect();
    let weights: Vec<f64> = (0..cfg.relations)
        .map(|r| 1.0 / ((r + 1) as f64).powf(cfg.zipf_exponent))
        .collect();
    let pick_relation = WeightedIndex::new(&weights).map_err(|e| Error::Config(e.to_string()))?;

    let sample_triple = |rng: &mut ChaCha8Rng, relation: usize| -> Triple {
        let head = rng.gen_range(0..cfg.entities);
        let latent = &latent[(relation % cfg.views) * stride..][..stride];
        let target: Vec<f64> = (0..k)
            .map(|i| latent[head * k + i] + shift[relation * k + i])
            .collect();
        let mut best = (f64::INFINITY, 0usize);
        for _ in 0..cfg.candidates {
            let cand = rng.gen_range(0..cfg.entities);
            if cand == head {
                continue;
            }
            let d: f64 = (0..k)
                .map(|i| (target[i] - latent[cand * k + i]).powi(2))
                .sum();
            if d < best.0 {
                best = (d, cand);
            }
        }
        if best.0.is_infinite() {
            best.1 = (head + 1) % cfg.entities;
        }
        Triple::new(head as u32, relation as u32, best.1 as u32)
    };

    let mut seen = HashSet::new();
    let mut triples = Vec::with_capacity(cfg.triples);
    // a few guaranteed triples per relation so each appears in training
    for relation in 0..cfg.relations {
        for _ in 0..64 {
            let t = sample_triple(&mut rng, relation);
            if seen.insert(t) {
                triples.push(t);
                if triples
                    .iter()
                    .filter(|x| x.relation == relation as u32)
                    .count()
                    >= 2
                {
                    break;
                }
            }
        }
    }
    let mut attempts = 0usize;
    while triples.len() < cfg.triples && attempts < cfg.triples * 50 {
        attempts += 1;
        let relation = pick_relation.sample(&mut rng);
        let t = sample_triple(&mut rng, relation);
        if seen.insert(t) {
            triples.push(t);
        }
    }
    // keep the guaranteed triples in train; shuffle the rest into splits
    let guaranteed = triples.len().min(cfg.relations * 2);
    let (head, rest) = triples.split_at_mut(guaranteed);
    rest.shuffle(&mut rng);
    let n_rest = rest.len();
    let n_test = (n_rest as f64 * cfg.test_fraction).round() as usize;
    let n_valid = (n_rest as f64 * cfg.valid_fraction).round() as usize;
    let test = rest[..n_test].to_vec();
    let valid = rest[n_test..n_test + n_valid].to_vec();
    let mut train = head.to_vec();
    train.extend_from_slice(&rest[n_test + n_valid..]);
    KnowledgeGraph::from_ids(cfg.entities, cfg.relations, train, valid, test)
}
