use std::collections::HashMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::{check_bounds, KnowledgeGraph, Triple};
use crate::error::{Error, Result};
use crate::transe::{translation_distance, TransEModel};

/// Every known true triple, indexed for `(h, r, ?)` and `(?, r, t)` lookups.
#[derive(Debug, Clone, Default)]
pub struct FilterIndex {
    tails: HashMap<(u32, u32), Vec<u32>>,
    heads: HashMap<(u32, u32), Vec<u32>>,
    len: usize,
}

impl FilterIndex {
    pub fn from_triples<'a>(triples: impl IntoIterator<Item = &'a Triple>) -> Self {
        let mut tails: HashMap<(u32, u32), Vec<u32>> = HashMap::new();
        let mut heads: HashMap<(u32, u32), Vec<u32>> = HashMap::new();
        for t in triples {
            tails.entry((t.head, t.relation)).or_default().push(t.tail);
            heads.entry((t.relation, t.tail)).or_default().push(t.head);
        }
        let mut len = 0;
        for list in tails.values_mut() {
            list.sort_unstable();
            list.dedup();
            len += list.len();
        }
        for list in heads.values_mut() {
            list.sort_unstable();
            list.dedup();
        }
        Self { tails, heads, len }
    }

    /// Index over train, valid and test of the whole graph.
    pub fn from_graph(graph: &KnowledgeGraph) -> Self {
        Self::from_triples(graph.train.iter().chain(&graph.valid).chain(&graph.test))
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn contains(&self, t: &Triple) -> bool {
        self.known_tails(t.head, t.relation)
            .binary_search(&t.tail)
            .is_ok()
    }

    pub fn known_tails(&self, head: u32, relation: u32) -> &[u32] {
        self.tails.get(&(head, relation)).map_or(&[], Vec::as_slice)
    }

    pub fn known_heads(&self, relation: u32, tail: u32) -> &[u32] {
        self.heads.get(&(relation, tail)).map_or(&[], Vec::as_slice)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    Head,
    Tail,
}

/// Which replacement sides enter the MRR average.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RankSides {
    Both,
    TailOnly,
}

/// Filtered rank with mid-tie resolution:
/// `1 + #{better} + floor(#{tied} / 2)` over candidates that do not form
/// another known true triple. The evaluated triple itself is never removed.
pub fn filtered_rank(
    model: &TransEModel,
    triple: &Triple,
    side: Side,
    filter: &FilterIndex,
) -> Result<usize> {
    check_bounds(triple, model.num_entities(), model.num_relations())?;
    Ok(filtered_rank_unchecked(model, triple, side, filter))
}

fn filtered_rank_unchecked(
    model: &TransEModel,
    triple: &Triple,
    side: Side,
    filter: &FilterIndex,
) -> usize {
    let r = model.relation(triple.relation);
    match side {
        Side::Tail => {
            let h = model.entity(triple.head);
            mid_tie_rank(
                model.num_entities(),
                triple.tail,
                filter.known_tails(triple.head, triple.relation),
                |e| translation_distance(h, r, model.entity(e)),
            )
        }
        Side::Head => {
            let t = model.entity(triple.tail);
            mid_tie_rank(
                model.num_entities(),
                triple.head,
                filter.known_heads(triple.relation, triple.tail),
                |e| translation_distance(model.entity(e), r, t),
            )
        }
    }
}

fn mid_tie_rank(
    num_entities: usize,
    target: u32,
    known: &[u32],
    distance: impl Fn(u32) -> f64,
) -> usize {
    let reference = distance(target);
    let mut better = 0usize;
    let mut tied = 0usize;
    for e in 0..num_entities as u32 {
        if e == target {
            continue;
        }
        let d = distance(e);
        if d < reference {
            better += 1;
        } else if d == reference {
            tied += 1;
        }
    }
    // remove the other true answers; their distances are recomputed bit-identically
    for &e in known {
        if e == target || e as usize >= num_entities {
            continue;
        }
        let d = distance(e);
        if d < reference {
            better -= 1;
        } else if d == reference {
            tied -= 1;
        }
    }
    1 + better + tied / 2
}

/// Mean reciprocal filtered rank. With [`RankSides::Both`] each triple
/// contributes a head and a tail ranking.
pub fn mrr(model: &TransEModel, eval_triples: &[Triple], filter: &FilterIndex) -> Result<f64> {
    mrr_with_sides(model, eval_triples, filter, RankSides::Both)
}

pub fn mrr_with_sides(
    model: &TransEModel,
    eval_triples: &[Triple],
    filter: &FilterIndex,
    sides: RankSides,
) -> Result<f64> {
    if eval_triples.is_empty() {
        return Err(Error::EmptyEvalSet);
    }
    for t in eval_triples {
        check_bounds(t, model.num_entities(), model.num_relations())?;
    }
    // ranks are collected in input order and summed sequentially, so the
    // result does not depend on thread scheduling
    let reciprocal: Vec<f64> = eval_triples
        .par_iter()
        .map(|t| {
            let tail = 1.0 / filtered_rank_unchecked(model, t, Side::Tail, filter) as f64;
            match sides {
                RankSides::Both => {
                    tail + 1.0 / filtered_rank_unchecked(model, t, Side::Head, filter) as f64
                }
                RankSides::TailOnly => tail,
            }
        })
        .collect();
    let per_triple = match sides {
        RankSides::Both => 2.0,
        RankSides::TailOnly => 1.0,
    };
    Ok(reciprocal.iter().sum::<f64>() / (per_triple * eval_triples.len() as f64))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::transe::ModelConfig;

    fn line_model(positions: &[f64]) -> TransEModel {
        let cfg = ModelConfig {
            dim: 1,
            ..ModelConfig::default()
        };
        TransEModel::from_tables(cfg, 0, positions.to_vec(), vec![1.0]).unwrap()
    }

    #[test]
    fn unique_best_tail_ranks_first() {
        // h=0, r=1: entity at 1.0 is exact
        let m = line_model(&[0.0, 1.0, 3.0, -2.0, 5.0]);
        let t = Triple::new(0, 0, 1);
        let filter = FilterIndex::from_triples([&t]);
        assert_eq!(filtered_rank(&m, &t, Side::Tail, &filter).unwrap(), 1);
    }

    #[test]
    fn better_true_triple_is_filtered() {
        let m = line_model(&[0.0, 1.0, 1.5, 3.0]);
        let test = Triple::new(0, 0, 2);
        let other = Triple::new(0, 0, 1);
        let unfiltered = FilterIndex::from_triples([&test]);
        let filtered = FilterIndex::from_triples([&test, &other]);
        // tail candidates by distance to 1.0: e1 (0), e2 (0.5), e0 (1), e3 (2)
        assert_eq!(
            filtered_rank(&m, &test, Side::Tail, &unfiltered).unwrap(),
            2
        );
        assert_eq!(filtered_rank(&m, &test, Side::Tail, &filtered).unwrap(), 1);
    }

    #[test]
    fn ties_take_the_middle() {
        // all entities at the same point: 4 tied competitors -> 1 + 2
        let m = line_model(&[0.0; 5]);
        let t = Triple::new(0, 0, 1);
        let filter = FilterIndex::from_triples([&t]);
        assert_eq!(filtered_rank(&m, &t, Side::Tail, &filter).unwrap(), 3);
        assert_eq!(filtered_rank(&m, &t, Side::Head, &filter).unwrap(), 3);
    }

    #[test]
    fn head_side_ranks_heads() {
        // t=1, r=1: best head is at 0.0
        let m = line_model(&[0.0, 1.0, 0.2, -0.5]);
        let t = Triple::new(2, 0, 1);
        let filter = FilterIndex::from_triples([&t]);
        // distances |e + 1 - 1| = |e|: e0 0, e2 0.2, e3 0.5, e1 1
        assert_eq!(filtered_rank(&m, &t, Side::Head, &filter).unwrap(), 2);
    }

    #[test]
    fn out_of_bounds_rejected() {
        let m = line_model(&[0.0, 1.0]);
        let filter = FilterIndex::default();
        assert!(filtered_rank(&m, &Triple::new(0, 0, 9), Side::Tail, &filter).is_err());
        assert!(matches!(mrr(&m, &[], &filter), Err(Error::EmptyEvalSet)));
    }

    #[test]
    fn perfect_model_has_mrr_one() {
        let m = line_model(&[0.0, 1.0, 2.0, 3.0]);
        let eval = [
            Triple::new(0, 0, 1),
            Triple::new(1, 0, 2),
            Triple::new(2, 0, 3),
        ];
        let filter = FilterIndex::from_triples(&eval);
        assert_eq!(mrr(&m, &eval, &filter).unwrap(), 1.0);
    }

    #[test]
    fn tail_only_mrr_arithmetic() {
        // ranks 1, 2, 4 on the tail side
        let m = line_model(&[0.0, 1.0, 1.2, 1.4, 1.6, 10.0]);
        let eval = [
            Triple::new(0, 0, 1),
            Triple::new(0, 0, 2),
            Triple::new(0, 0, 4),
        ];
        let filter = FilterIndex::default();
        let got = mrr_with_sides(&m, &eval, &filter, RankSides::TailOnly).unwrap();
        assert!((got - (1.0 + 0.5 + 0.25) / 3.0).abs() < 1e-15);
    }

    #[test]
    fn filter_counts_distinct_triples() {
        let a = Triple::new(0, 0, 1);
        let f = FilterIndex::from_triples([&a, &a, &Triple::new(1, 0, 0)]);
        assert_eq!(f.len(), 2);
        assert!(f.contains(&a));
        assert!(!f.contains(&Triple::new(0, 0, 0)));
        assert_eq!(f.known_heads(0, 1), &[0]);
    }
}
