use rand::Rng as _;

use crate::dataset::Triple;
use crate::optim::gradient::{ParamRow, SparseGradient};
use crate::rng::Rng;
use crate::transe::TransEModel;

/// A positive triple and its tail-corrupted counterpart.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NegativeSample {
    pub positive: Triple,
    pub negative: Triple,
}

/// Replaces the tail with a uniform draw over all entities. No filtering:
/// the draw may reproduce the positive tail or another true triple.
pub fn sample_negative(triple: Triple, num_entities: usize, rng: &mut Rng) -> NegativeSample {
    let tail = rng.gen_range(0..num_entities) as u32;
    NegativeSample {
        positive: triple,
        negative: Triple { tail, ..triple },
    }
}

pub fn sample_negatives(
    triples: &[Triple],
    num_entities: usize,
    rng: &mut Rng,
) -> Vec<NegativeSample> {
    triples
        .iter()
        .map(|&t| sample_negative(t, num_entities, rng))
        .collect()
}

#[inline]
pub fn margin_loss(pos_score: f64, neg_score: f64, margin: f64) -> f64 {
    (margin + pos_score - neg_score).max(0.0)
}

/// Summed hinge loss over the batch and its subgradient. Pairs whose hinge
/// is inactive contribute nothing, so an all-inactive batch yields an empty
/// gradient. The distance subgradient at zero distance is the zero vector.
pub fn loss_gradients(
    model: &TransEModel,
    batch: &[NegativeSample],
    margin: f64,
) -> (f64, SparseGradient) {
    let dim = model.dim();
    let mut grads = SparseGradient::new(dim);
    let mut loss = 0.0;
    let mut unit_pos = vec![0.0; dim];
    let mut unit_neg = vec![0.0; dim];

    for pair in batch {
        let pos = model.distance(&pair.positive);
        let neg = model.distance(&pair.negative);
        let hinge = margin + pos - neg;
        if hinge <= 0.0 {
            continue;
        }
        loss += hinge;

        residual_direction(model, &pair.positive, pos, &mut unit_pos);
        residual_direction(model, &pair.negative, neg, &mut unit_neg);

        let p = pair.positive;
        let n = pair.negative;
        // d pos / d(h, r, t) = (u, u, -u); the negative enters with a minus sign.
        grads.add_scaled(ParamRow::entity(p.head), &unit_pos, 1.0);
        grads.add_scaled(ParamRow::relation(p.relation), &unit_pos, 1.0);
        grads.add_scaled(ParamRow::entity(p.tail), &unit_pos, -1.0);
        grads.add_scaled(ParamRow::entity(n.head), &unit_neg, -1.0);
        grads.add_scaled(ParamRow::relation(n.relation), &unit_neg, -1.0);
        grads.add_scaled(ParamRow::entity(n.tail), &unit_neg, 1.0);
    }
    (loss, grads)
}

/// Writes `(h + r - t) / ||h + r - t||` into `out`, or zeros at distance 0.
fn residual_direction(model: &TransEModel, t: &Triple, distance: f64, out: &mut [f64]) {
    if distance == 0.0 {
        out.iter_mut().for_each(|v| *v = 0.0);
        return;
    }
    let h = model.entity(t.head);
    let r = model.relation(t.relation);
    let tl = model.entity(t.tail);
    for (i, o) in out.iter_mut().enumerate() {
        *o = ((h[i] + r[i]) - tl[i]) / distance;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{SeedStreams, Stream};
    use crate::transe::{ModelConfig, Table};

    fn tiny(dim: usize, ents: Vec<f64>, rels: Vec<f64>) -> TransEModel {
        let cfg = ModelConfig {
            dim,
            ..ModelConfig::default()
        };
        TransEModel::from_tables(cfg, 0, ents, rels).unwrap()
    }

    #[test]
    fn margin_loss_examples() {
        assert_eq!(margin_loss(0.0, 2.0, 1.0), 0.0);
        assert_eq!(margin_loss(1.0, 1.0, 1.0), 1.0);
        assert!((margin_loss(0.5, 0.4, 1.0) - 1.1).abs() < 1e-12);
    }

    #[test]
    fn negatives_keep_head_and_relation() {
        let mut rng = SeedStreams::new(1).stream(Stream::Negatives);
        for _ in 0..200 {
            let s = sample_negative(Triple::new(3, 2, 1), 7, &mut rng);
            assert_eq!(s.negative.head, 3);
            assert_eq!(s.negative.relation, 2);
            assert!(s.negative.tail < 7);
        }
    }

    #[test]
    fn negatives_are_unfiltered_on_two_entities() {
        let mut rng = SeedStreams::new(5).stream(Stream::Negatives);
        let n = 4000;
        let same = (0..n)
            .filter(|_| {
                sample_negative(Triple::new(1, 0, 0), 2, &mut rng)
                    .negative
                    .tail
                    == 0
            })
            .count();
        // Binomial(4000, 1/2): sd ~ 31.6
        assert!((same as f64 - 2000.0).abs() < 5.0 * 31.7, "{same}");
    }

    #[test]
    fn negative_tails_are_uniform() {
        let mut rng = SeedStreams::new(11).stream(Stream::Negatives);
        let mut counts = [0usize; 10];
        for _ in 0..10_000 {
            counts[sample_negative(Triple::new(0, 0, 0), 10, &mut rng)
                .negative
                .tail as usize] += 1;
        }
        // Binomial(10000, 0.1): sd = 30
        for c in counts {
            assert!((c as f64 - 1000.0).abs() <= 150.0, "{counts:?}");
        }
        let chi2: f64 = counts
            .iter()
            .map(|&c| (c as f64 - 1000.0).powi(2) / 1000.0)
            .sum();
        // 9 dof, p = 0.001 critical value
        assert!(chi2 < 27.88, "chi2 = {chi2}");
    }

    #[test]
    fn inactive_hinges_give_empty_gradient() {
        // e0=(0,0), e1=(0,0), e2=(5,0), r0=(0,0): pos=0, neg=5
        let m = tiny(2, vec![0.0, 0.0, 0.0, 0.0, 5.0, 0.0], vec![0.0, 0.0]);
        let pair = NegativeSample {
            positive: Triple::new(0, 0, 1),
            negative: Triple::new(0, 0, 2),
        };
        let (loss, g) = loss_gradients(&m, &[pair, pair], 1.0);
        assert_eq!(loss, 0.0);
        assert!(g.is_empty());
    }

    #[test]
    fn single_pair_head_gradient_is_unit_residual() {
        // h=(1,2), r=(0.5,-1), t=(0,0), t'=(1.5,1.2): pos=|(1.5,1)|, neg=|(0,-0.2)|
        let m = tiny(2, vec![1.0, 2.0, 0.0, 0.0, 1.5, 1.2], vec![0.5, -1.0]);
        let pair = NegativeSample {
            positive: Triple::new(0, 0, 1),
            negative: Triple::new(0, 0, 2),
        };
        let (loss, g) = loss_gradients(&m, &[pair], 1.0);
        let pos = (1.5f64 * 1.5 + 1.0).sqrt();
        assert!((loss - (1.0 + pos - 0.2)).abs() < 1e-12);
        // gradient on t (only positive contributes): -(h+r-t)/pos
        let gt = g.get(ParamRow::entity(1)).unwrap();
        assert!((gt[0] + 1.5 / pos).abs() < 1e-12);
        assert!((gt[1] + 1.0 / pos).abs() < 1e-12);
        // h gets u_pos - u_neg with u_neg = (0, -1)
        let gh = g.get(ParamRow::entity(0)).unwrap();
        assert!((gh[0] - 1.5 / pos).abs() < 1e-12);
        assert!((gh[1] - (1.0 / pos + 1.0)).abs() < 1e-12);
        assert_eq!(g.len(), 4);
        let _ = Table::Entity;
    }

    #[test]
    fn zero_distance_positive_has_zero_subgradient() {
        // pos exact, neg at distance 0.5 < margin, so hinge active
        let m = tiny(1, vec![0.0, 1.0, 1.5], vec![1.0]);
        let pair = NegativeSample {
            positive: Triple::new(0, 0, 1),
            negative: Triple::new(0, 0, 2),
        };
        let (loss, g) = loss_gradients(&m, &[pair], 1.0);
        assert!((loss - 0.5).abs() < 1e-12);
        assert_eq!(g.get(ParamRow::entity(1)), Some(&[0.0][..]));
        // only the negative's direction (-1) acts: h, r get +1, t' gets -1
        assert_eq!(g.get(ParamRow::entity(0)), Some(&[1.0][..]));
        assert_eq!(g.get(ParamRow::entity(2)), Some(&[-1.0][..]));
    }
}
