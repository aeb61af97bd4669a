//! Test-only oracles. Nothing here calls the ranking, gradient or Fisher
//! code it is used to check.

#![allow(dead_code)]

use kgcl::dataset::Triple;
use kgcl::optim::NegativeSample;
use kgcl::transe::{ModelConfig, TransEModel};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_model(
    rng: &mut ChaCha8Rng,
    ne: usize,
    nr: usize,
    dim: usize,
    scale: f64,
) -> TransEModel {
    let cfg = ModelConfig {
        dim,
        margin: 1.0,
        normalize_entities: false,
    };
    let e = (0..ne * dim)
        .map(|_| rng.gen_range(-scale..scale))
        .collect();
    let r = (0..nr * dim)
        .map(|_| rng.gen_range(-scale..scale))
        .collect();
    TransEModel::from_tables(cfg, 0, e, r).unwrap()
}

pub fn random_triple(rng: &mut ChaCha8Rng, ne: usize, nr: usize) -> Triple {
    Triple::new(
        rng.gen_range(0..ne) as u32,
        rng.gen_range(0..nr) as u32,
        rng.gen_range(0..ne) as u32,
    )
}

/// Plain L2 distance written out long-hand.
pub fn oracle_distance(m: &TransEModel, t: &Triple) -> f64 {
    let h = m.entity(t.head);
    let r = m.relation(t.relation);
    let tl = m.entity(t.tail);
    let mut s = 0.0;
    for i in 0..m.dim() {
        s += (h[i] + r[i] - tl[i]).powi(2);
    }
    s.sqrt()
}

pub fn oracle_batch_loss(m: &TransEModel, batch: &[NegativeSample], margin: f64) -> f64 {
    batch
        .iter()
        .map(|p| {
            (margin + oracle_distance(m, &p.positive) - oracle_distance(m, &p.negative)).max(0.0)
        })
        .sum()
}

/// Minimum |hinge| over the batch; finite differences are only meaningful
/// away from the kink.
pub fn min_hinge_gap(m: &TransEModel, batch: &[NegativeSample], margin: f64) -> f64 {
    batch
        .iter()
        .map(|p| (margin + oracle_distance(m, &p.positive) - oracle_distance(m, &p.negative)).abs())
        .fold(f64::INFINITY, f64::min)
}

/// Gradient of `loss` wrt every parameter by central differences.
/// Returns `(entity_grad, relation_grad)` as dense tables.
pub fn finite_difference(
    model: &TransEModel,
    step: f64,
    loss: impl Fn(&TransEModel) -> f64,
) -> (Vec<f64>, Vec<f64>) {
    use kgcl::transe::Table;
    let mut out = Vec::new();
    for table in [Table::Entity, Table::Relation] {
        let n = model.table(table).len();
        let mut g = vec![0.0; n];
        for (k, gk) in g.iter_mut().enumerate() {
            let mut plus = model.clone();
            plus.table_mut(table)[k] += step;
            let mut minus = model.clone();
            minus.table_mut(table)[k] -= step;
            *gk = (loss(&plus) - loss(&minus)) / (2.0 * step);
        }
        out.push(g);
    }
    let r = out.pop().unwrap();
    let e = out.pop().unwrap();
    (e, r)
}

/// Mid-tie filtered rank by sorting every surviving candidate.
pub fn oracle_rank(
    m: &TransEModel,
    t: &Triple,
    tail_side: bool,
    truths: &std::collections::HashSet<Triple>,
) -> usize {
    let mut scored: Vec<(f64, bool)> = Vec::new();
    for e in 0..m.num_entities() as u32 {
        let cand = if tail_side {
            Triple::new(t.head, t.relation, e)
        } else {
            Triple::new(e, t.relation, t.tail)
        };
        let is_target = cand == *t;
        if !is_target && truths.contains(&cand) {
            continue;
        }
        scored.push((m.score(&cand).unwrap(), is_target));
    }
    scored.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then(b.1.cmp(&a.1)));
    let target_pos = scored.iter().position(|s| s.1).unwrap();
    let d = scored[target_pos].0;
    let better = scored.iter().take_while(|s| s.0 < d).count();
    let tied = scored.iter().filter(|s| s.0 == d && !s.1).count();
    1 + better + tied / 2
}

/// Dense brute force: per batch, draw the tail corruptions, accumulate the
/// hinge subgradient coordinate by coordinate, square, then average.
pub fn oracle_fisher(
    m: &TransEModel,
    triples: &[Triple],
    batch_size: usize,
    margin: f64,
    rng: &mut ChaCha8Rng,
) -> (Vec<f64>, Vec<f64>) {
    use kgcl::transe::Table;
    let d = m.dim();
    let mut fe = vec![0.0; m.table(Table::Entity).len()];
    let mut fr = vec![0.0; m.table(Table::Relation).len()];
    let mut batches = 0.0;
    for batch in triples.chunks(batch_size) {
        let mut ge = vec![0.0; fe.len()];
        let mut gr = vec![0.0; fr.len()];
        for &pos in batch {
            let neg = Triple::new(
                pos.head,
                pos.relation,
                rng.gen_range(0..m.num_entities()) as u32,
            );
            let dp = oracle_distance(m, &pos);
            let dn = oracle_distance(m, &neg);
            if margin + dp - dn <= 0.0 {
                continue;
            }
            for (t, dist, sign) in [(pos, dp, 1.0), (neg, dn, -1.0)] {
                for i in 0..d {
                    let u = if dist == 0.0 {
                        0.0
                    } else {
                        (m.entity(t.head)[i] + m.relation(t.relation)[i] - m.entity(t.tail)[i])
                            / dist
                    };
                    ge[t.head as usize * d + i] += sign * u;
                    gr[t.relation as usize * d + i] += sign * u;
                    ge[t.tail as usize * d + i] -= sign * u;
                }
            }
        }
        for (f, g) in fe.iter_mut().zip(&ge).chain(fr.iter_mut().zip(&gr)) {
            *f += g * g;
        }
        batches += 1.0;
    }
    fe.iter_mut()
        .chain(fr.iter_mut())
        .for_each(|v| *v /= batches);
    (fe, fr)
}
