mod common;

use common::*;
use kgcl::continual::compute_fisher_diagonal;
use kgcl::dataset::Triple;
use kgcl::rng::{SeedStreams, Stream};
use kgcl::transe::Table;
use rand::Rng;

fn close(a: &[f64], b: &[f64]) -> bool {
    a.iter()
        .zip(b)
        .all(|(x, y)| (x - y).abs() <= 1e-12 * (1.0 + x.abs().max(y.abs())))
}

#[test]
fn fisher_matches_brute_force() {
    let mut r = rng(11);
    let mut exact = 0;
    for case in 0..300 {
        let ne = r.gen_range(2..7);
        let nr = r.gen_range(1..4);
        let model = random_model(&mut r, ne, nr, 3, 1.0);
        let n = r.gen_range(1..=8);
        let triples: Vec<_> = (0..n).map(|_| random_triple(&mut r, ne, nr)).collect();
        let batch = r.gen_range(1..=8);
        let margin = r.gen_range(0.5..3.0);
        let stream = SeedStreams::new(case).stream(Stream::Fisher);
        let got =
            compute_fisher_diagonal(&model, &triples, batch, margin, &mut stream.clone()).unwrap();
        let (oe, or) = oracle_fisher(&model, &triples, batch, margin, &mut stream.clone());
        assert!(close(got.table(Table::Entity), &oe), "case {case}");
        assert!(close(got.table(Table::Relation), &or), "case {case}");
        if got.table(Table::Entity) == oe.as_slice() && got.table(Table::Relation) == or.as_slice()
        {
            exact += 1;
        }
    }
    assert_eq!(exact, 300, "bitwise agreement expected in f64");
}

#[test]
fn single_triple_batch_is_squared_gradient() {
    let mut r = rng(12);
    let model = random_model(&mut r, 4, 1, 2, 1.0);
    let t = [Triple::new(0, 0, 1)];
    let stream = SeedStreams::new(3).stream(Stream::Fisher);
    let f = compute_fisher_diagonal(&model, &t, 1, 10.0, &mut stream.clone()).unwrap();
    let (oe, or) = oracle_fisher(&model, &t, 1, 10.0, &mut stream.clone());
    assert_eq!(f.table(Table::Entity), oe.as_slice());
    assert_eq!(f.table(Table::Relation), or.as_slice());
    assert!(f.table(Table::Entity).iter().all(|v| *v >= 0.0));
}

#[test]
fn inactive_hinges_give_zero_fisher() {
    let mut r = rng(13);
    let model = random_model(&mut r, 5, 2, 3, 1.0);
    let triples: Vec<_> = (0..8).map(|_| random_triple(&mut r, 5, 2)).collect();
    // a hugely negative margin keeps every hinge off
    let f = compute_fisher_diagonal(
        &model,
        &triples,
        3,
        -1e6,
        &mut SeedStreams::new(1).stream(Stream::Fisher),
    )
    .unwrap();
    assert!(f
        .table(Table::Entity)
        .iter()
        .chain(f.table(Table::Relation))
        .all(|v| *v == 0.0));
}

#[test]
fn fisher_does_not_touch_the_model() {
    let mut r = rng(14);
    let model = random_model(&mut r, 5, 2, 3, 1.0);
    let before = model.clone();
    let triples: Vec<_> = (0..8).map(|_| random_triple(&mut r, 5, 2)).collect();
    compute_fisher_diagonal(
        &model,
        &triples,
        2,
        1.0,
        &mut SeedStreams::new(1).stream(Stream::Fisher),
    )
    .unwrap();
    assert_eq!(model, before);
}
