use std::collections::{HashMap, HashSet};

use kgcl::dataset::{
    partition, partition_random, partition_relation_roundrobin, KnowledgeGraph, PartitionStrategy,
    RawTriple, Triple,
};
use kgcl::rng::{SeedStreams, Stream};
use proptest::prelude::*;

fn graph_strategy() -> impl Strategy<Value = KnowledgeGraph> {
    (3usize..30, 2usize..12).prop_flat_map(|(ne, nr)| {
        let triple =
            (0..ne as u32, 0..nr as u32, 0..ne as u32).prop_map(|(h, r, t)| Triple::new(h, r, t));
        (
            Just(ne),
            Just(nr),
            prop::collection::vec(triple.clone(), 1..200),
            prop::collection::vec(triple, 0..40),
        )
            .prop_map(|(ne, nr, train, test)| {
                KnowledgeGraph::from_ids(ne, nr, train, vec![], test).unwrap()
            })
    })
}

fn sorted(mut v: Vec<Triple>) -> Vec<Triple> {
    v.sort();
    v
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn relation_partition_is_complete_and_coherent(g in graph_strategy(), t in 2usize..6) {
        let nr = g.num_relations();
        prop_assume!(t <= nr);
        let p = partition_relation_roundrobin(&g, t).unwrap();
        prop_assert_eq!(p.num_tasks(), t);
        let all: Vec<Triple> = p.train_tasks.concat();
        prop_assert_eq!(sorted(all), sorted(g.train.clone()));
        prop_assert_eq!(sorted(p.eval_tasks.concat()), sorted(g.test.clone()));

        let assign = p.relation_assignment.clone().unwrap();
        prop_assert_eq!(assign.len(), nr);
        for (k, task) in p.train_tasks.iter().enumerate() {
            prop_assert!(task.iter().all(|x| assign[x.relation as usize] == k));
        }
        for (k, task) in p.eval_tasks.iter().enumerate() {
            prop_assert!(task.iter().all(|x| assign[x.relation as usize] == k));
        }
        let mut per_task = vec![0usize; t];
        for &k in &assign {
            per_task[k] += 1;
        }
        let (lo, hi) = (per_task.iter().min().unwrap(), per_task.iter().max().unwrap());
        prop_assert!(hi - lo <= 1, "{:?}", per_task);

        prop_assert_eq!(partition_relation_roundrobin(&g, t).unwrap(), p);
    }

    #[test]
    fn random_partition_is_balanced_and_seeded(g in graph_strategy(), t in 2usize..6, seed in any::<u64>()) {
        prop_assume!(g.train.len() >= t);
        let s = SeedStreams::new(seed);
        let p = partition_random(&g, t, &mut s.stream(Stream::Partition)).unwrap();
        prop_assert_eq!(sorted(p.train_tasks.concat()), sorted(g.train.clone()));
        prop_assert_eq!(sorted(p.eval_tasks.concat()), sorted(g.test.clone()));
        let sizes: Vec<usize> = p.train_tasks.iter().map(Vec::len).collect();
        prop_assert!(sizes.iter().max().unwrap() - sizes.iter().min().unwrap() <= 1);
        prop_assert!(sizes.windows(2).all(|w| w[0] >= w[1]), "extras go first: {:?}", sizes);
        prop_assert!(p.relation_assignment.is_none());

        let again = partition(&g, PartitionStrategy::Random, t, &mut s.stream(Stream::Partition)).unwrap();
        prop_assert_eq!(again, p);
    }

    #[test]
    fn vocabulary_round_trips(names in prop::collection::vec(("[a-z]{1,3}", "[A-Z]{1,2}", "[a-z]{1,3}"), 1..60)) {
        let raw: Vec<RawTriple> = names.iter().map(|(h, r, t)| RawTriple::new(h.as_str(), r.as_str(), t.as_str())).collect();
        let g = KnowledgeGraph::build(&raw, &[], &[]);
        for r in &raw {
            let id = g.encode(r).unwrap();
            prop_assert_eq!(g.decode(&id).unwrap(), r.clone());
        }
        let distinct: HashSet<&RawTriple> = raw.iter().collect();
        prop_assert_eq!(g.train.len(), distinct.len());
        // ids follow first appearance
        let mut first: HashMap<&str, u32> = HashMap::new();
        for r in &raw {
            for name in [r.head.as_str(), r.tail.as_str()] {
                let next = first.len() as u32;
                first.entry(name).or_insert(next);
            }
        }
        for (name, id) in first {
            prop_assert_eq!(g.entities.id(name), Some(id));
        }
    }
}

#[test]
fn task_count_bounds_are_enforced() {
    let g = KnowledgeGraph::from_ids(
        4,
        3,
        vec![
            Triple::new(0, 0, 1),
            Triple::new(1, 1, 2),
            Triple::new(2, 2, 3),
        ],
        vec![],
        vec![],
    )
    .unwrap();
    assert!(partition_relation_roundrobin(&g, 1).is_err());
    assert!(partition_relation_roundrobin(&g, 4).is_err());
    assert!(partition_relation_roundrobin(&g, 3).is_ok());
    let mut rng = SeedStreams::new(0).stream(Stream::Partition);
    assert!(partition_random(&g, 1, &mut rng).is_err());
}

#[test]
fn frequent_relations_are_dealt_first() {
    // frequencies: r0=1, r1=3, r2=2, r3=3 -> order r1, r3, r2, r0
    let t = |h, r| Triple::new(h, r, 0);
    let train = vec![
        t(1, 0),
        t(1, 1),
        t(2, 1),
        t(3, 1),
        t(1, 2),
        t(2, 2),
        t(1, 3),
        t(2, 3),
        t(3, 3),
    ];
    let g = KnowledgeGraph::from_ids(4, 4, train, vec![], vec![t(3, 0)]).unwrap();
    let p = partition_relation_roundrobin(&g, 2).unwrap();
    assert_eq!(p.relation_assignment.as_deref(), Some(&[1, 0, 0, 1][..]));
    assert_eq!(p.eval_tasks[1], vec![t(3, 0)]);
    assert_eq!(p.train_tasks[0].len() + p.train_tasks[1].len(), 9);
}
