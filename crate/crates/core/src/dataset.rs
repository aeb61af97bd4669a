//! Triple files, vocabularies and task partitioning.

use std::collections::HashSet;
use std::fmt::{self, Write as _};
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use indexmap::IndexSet;
use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::Rng;

/// Integer-encoded triple.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Triple {
    pub head: u32,
    pub relation: u32,
    pub tail: u32,
}

impl Triple {
    pub const fn new(head: u32, relation: u32, tail: u32) -> Self {
        Self {
            head,
            relation,
            tail,
        }
    }
}

/// A triple as it appears in the source file.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct RawTriple {
    pub head: String,
    pub relation: String,
    pub tail: String,
}

impl RawTriple {
    pub fn new(
        head: impl Into<String>,
        relation: impl Into<String>,
        tail: impl Into<String>,
    ) -> Self {
        Self {
            head: head.into(),
            relation: relation.into(),
            tail: tail.into(),
        }
    }
}

/// Reads a tab-separated triple file. Blank lines are skipped.
pub fn parse_triple_file(path: impl AsRef<Path>) -> Result<Vec<RawTriple>> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    parse_triples(BufReader::new(file), path)
}

/// Same as [`parse_triple_file`] over any reader; `origin` only labels errors.
pub fn parse_triples(reader: impl BufRead, origin: impl AsRef<Path>) -> Result<Vec<RawTriple>> {
    let origin = origin.as_ref();
    let mut out = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| Error::io(origin, e))?;
        let line = line.trim_end_matches(['\r', '\n']);
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').map(str::trim).collect();
        let parse_err = |message: String| Error::Parse {
            path: origin.to_path_buf(),
            line: idx + 1,
            message,
        };
        if fields.len() != 3 {
            return Err(parse_err(format!(
                "expected 3 tab-separated fields, found {}",
                fields.len()
            )));
        }
        if fields.iter().any(|f| f.is_empty()) {
            return Err(parse_err("empty field".to_string()));
        }
        out.push(RawTriple::new(fields[0], fields[1], fields[2]));
    }
    Ok(out)
}

/// Dense string <-> id bijection in first-appearance order.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Vocab {
    names: IndexSet<String>,
}

impl Vocab {
    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn id(&self, name: &str) -> Option<u32> {
        self.names.get_index_of(name).map(|i| i as u32)
    }

    pub fn name(&self, id: u32) -> Option<&str> {
        self.names.get_index(id as usize).map(String::as_str)
    }

    fn intern(&mut self, name: &str) -> u32 {
        if let Some(id) = self.id(name) {
            return id;
        }
        self.names.insert_full(name.to_owned()).0 as u32
    }

    pub fn iter(&self) -> impl Iterator<Item = (u32, &str)> {
        self.names
            .iter()
            .enumerate()
            .map(|(i, s)| (i as u32, s.as_str()))
    }
}

#[derive(Debug, Clone)]
pub struct KnowledgeGraph {
    pub entities: Vocab,
    pub relations: Vocab,
    pub train: Vec<Triple>,
    pub valid: Vec<Triple>,
    pub test: Vec<Triple>,
}

impl KnowledgeGraph {
    /// Encodes the three splits. Ids are assigned by first appearance over
    /// train, then valid, then test. Duplicate training triples are dropped.
    pub fn build(train: &[RawTriple], valid: &[RawTriple], test: &[RawTriple]) -> Self {
        let mut entities = Vocab::default();
        let mut relations = Vocab::default();
        let mut encode = |raw: &[RawTriple]| -> Vec<Triple> {
            raw.iter()
                .map(|t| {
                    let head = entities.intern(&t.head);
                    let relation = relations.intern(&t.relation);
                    let tail = entities.intern(&t.tail);
                    Triple::new(head, relation, tail)
                })
                .collect()
        };
        let mut train = encode(train);
        let valid = encode(valid);
        let test = encode(test);

        let mut seen = HashSet::with_capacity(train.len());
        train.retain(|t| seen.insert(*t));

        Self {
            entities,
            relations,
            train,
            valid,
            test,
        }
    }

    /// Loads `train.txt`, `valid.txt` and `test.txt` from a directory.
    pub fn load_dir(dir: impl AsRef<Path>) -> Result<Self> {
        let dir = dir.as_ref();
        let train = parse_triple_file(dir.join("train.txt"))?;
        let valid = parse_triple_file(dir.join("valid.txt"))?;
        let test = parse_triple_file(dir.join("test.txt"))?;
        Ok(Self::build(&train, &valid, &test))
    }

    /// Builds a graph directly from integer triples; vocabulary names are
    /// `e<id>` and `r<id>`. Useful for generated data.
    pub fn from_ids(
        num_entities: usize,
        num_relations: usize,
        train: Vec<Triple>,
        valid: Vec<Triple>,
        test: Vec<Triple>,
    ) -> Result<Self> {
        let mut entities = Vocab::default();
        for i in 0..num_entities {
            entities.intern(&format!("e{i}"));
        }
        let mut relations = Vocab::default();
        for i in 0..num_relations {
            relations.intern(&format!("r{i}"));
        }
        for t in train.iter().chain(&valid).chain(&test) {
            check_bounds(t, num_entities, num_relations)?;
        }
        let mut seen = HashSet::with_capacity(train.len());
        let train = train.into_iter().filter(|t| seen.insert(*t)).collect();
        Ok(Self {
            entities,
            relations,
            train,
            valid,
            test,
        })
    }

    pub fn num_entities(&self) -> usize {
        self.entities.len()
    }

    pub fn num_relations(&self) -> usize {
        self.relations.len()
    }

    pub fn decode(&self, t: &Triple) -> Option<RawTriple> {
        Some(RawTriple::new(
            self.entities.name(t.head)?,
            self.relations.name(t.relation)?,
            self.entities.name(t.tail)?,
        ))
    }

    pub fn encode(&self, t: &RawTriple) -> Option<Triple> {
        Some(Triple::new(
            self.entities.id(&t.head)?,
            self.relations.id(&t.relation)?,
            self.entities.id(&t.tail)?,
        ))
    }

    /// Distinct entities that occur in the training split.
    pub fn train_entity_count(&self) -> usize {
        let mut seen = vec![false; self.num_entities()];
        for t in &self.train {
            seen[t.head as usize] = true;
            seen[t.tail as usize] = true;
        }
        seen.into_iter().filter(|&s| s).count()
    }

    /// Number of training triples per relation id.
    pub fn relation_frequencies(&self) -> Vec<usize> {
        let mut freq = vec![0usize; self.num_relations()];
        for t in &self.train {
            freq[t.relation as usize] += 1;
        }
        freq
    }
}

pub(crate) fn check_bounds(t: &Triple, num_entities: usize, num_relations: usize) -> Result<()> {
    for id in [t.head, t.tail] {
        if id as usize >= num_entities {
            return Err(Error::OutOfBounds {
                kind: "entity",
                id: id as usize,
                size: num_entities,
            });
        }
    }
    if t.relation as usize >= num_relations {
        return Err(Error::OutOfBounds {
            kind: "relation",
            id: t.relation as usize,
            size: num_relations,
        });
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PartitionStrategy {
    RelationRoundRobin,
    Random,
}

impl PartitionStrategy {
    pub fn as_str(&self) -> &'static str {
        match self {
            PartitionStrategy::RelationRoundRobin => "relation",
            PartitionStrategy::Random => "random",
        }
    }
}

impl fmt::Display for PartitionStrategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for PartitionStrategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "relation" | "relation_roundrobin" | "relation-roundrobin" => {
                Ok(PartitionStrategy::RelationRoundRobin)
            }
            "random" => Ok(PartitionStrategy::Random),
            other => Err(Error::Config(format!(
                "unknown partition strategy `{other}`"
            ))),
        }
    }
}

/// Training and evaluation triples split into ordered tasks.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TaskPartition {
    pub strategy: PartitionStrategy,
    pub train_tasks: Vec<Vec<Triple>>,
    pub eval_tasks: Vec<Vec<Triple>>,
    /// Relation id -> task index. Only set for relation round-robin.
    pub relation_assignment: Option<Vec<usize>>,
}

impl TaskPartition {
    pub fn num_tasks(&self) -> usize {
        self.train_tasks.len()
    }

    /// Plain-text manifest: one row per relation (round-robin) or per task
    /// (random), tab-separated with a header.
    pub fn manifest(&self, graph: &KnowledgeGraph) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "# strategy\t{}", self.strategy);
        let _ = writeln!(out, "# tasks\t{}", self.num_tasks());
        let _ = writeln!(out, "task\ttrain_triples\teval_triples\trelations");
        for (k, (train, eval)) in self.train_tasks.iter().zip(&self.eval_tasks).enumerate() {
            let rels = match &self.relation_assignment {
                Some(a) => a.iter().filter(|&&task| task == k).count(),
                None => train
                    .iter()
                    .map(|t| t.relation)
                    .collect::<HashSet<_>>()
                    .len(),
            };
            let _ = writeln!(out, "{k}\t{}\t{}\t{rels}", train.len(), eval.len());
        }
        if let Some(assignment) = &self.relation_assignment {
            let freq = graph.relation_frequencies();
            let _ = writeln!(out);
            let _ = writeln!(out, "relation_id\trelation\ttask\ttrain_triples");
            for (rel, task) in assignment.iter().enumerate() {
                let name = graph.relations.name(rel as u32).unwrap_or("?");
                let _ = writeln!(out, "{rel}\t{name}\t{task}\t{}", freq[rel]);
            }
        }
        out
    }
}

/// Sorts relations by training frequency (descending, ties by ascending id)
/// and deals them to tasks round-robin. Every triple follows its relation.
pub fn partition_relation_roundrobin(
    graph: &KnowledgeGraph,
    num_tasks: usize,
) -> Result<TaskPartition> {
    if num_tasks < 2 {
        return Err(Error::InvalidTaskCount {
            requested: num_tasks,
            reason: "need at least 2 tasks".into(),
        });
    }
    if num_tasks > graph.num_relations() {
        return Err(Error::InvalidTaskCount {
            requested: num_tasks,
            reason: format!("only {} relations", graph.num_relations()),
        });
    }
    let freq = graph.relation_frequencies();
    let mut order: Vec<usize> = (0..freq.len()).collect();
    order.sort_by(|&a, &b| freq[b].cmp(&freq[a]).then(a.cmp(&b)));

    let mut assignment = vec![0usize; freq.len()];
    for (pos, &rel) in order.iter().enumerate() {
        assignment[rel] = pos % num_tasks;
    }

    let route = |triples: &[Triple]| {
        let mut tasks = vec![Vec::new(); num_tasks];
        for t in triples {
            tasks[assignment[t.relation as usize]].push(*t);
        }
        tasks
    };
    Ok(TaskPartition {
        strategy: PartitionStrategy::RelationRoundRobin,
        train_tasks: route(&graph.train),
        eval_tasks: route(&graph.test),
        relation_assignment: Some(assignment),
    })
}

/// Shuffles train and test with `rng` and cuts each into `num_tasks`
/// contiguous chunks; the first `len % num_tasks` chunks get one extra triple.
pub fn partition_random(
    graph: &KnowledgeGraph,
    num_tasks: usize,
    rng: &mut Rng,
) -> Result<TaskPartition> {
    if num_tasks < 2 {
        return Err(Error::InvalidTaskCount {
            requested: num_tasks,
            reason: "need at least 2 tasks".into(),
        });
    }
    if num_tasks > graph.train.len() {
        return Err(Error::InvalidTaskCount {
            requested: num_tasks,
            reason: format!("only {} training triples", graph.train.len()),
        });
    }
    let mut train = graph.train.clone();
    train.shuffle(rng);
    let mut test = graph.test.clone();
    test.shuffle(rng);
    Ok(TaskPartition {
        strategy: PartitionStrategy::Random,
        train_tasks: chunk_evenly(&train, num_tasks),
        eval_tasks: chunk_evenly(&test, num_tasks),
        relation_assignment: None,
    })
}

pub fn partition(
    graph: &KnowledgeGraph,
    strategy: PartitionStrategy,
    num_tasks: usize,
    rng: &mut Rng,
) -> Result<TaskPartition> {
    match strategy {
        PartitionStrategy::RelationRoundRobin => partition_relation_roundrobin(graph, num_tasks),
        PartitionStrategy::Random => partition_random(graph, num_tasks, rng),
    }
}

fn chunk_evenly<T: Clone>(items: &[T], parts: usize) -> Vec<Vec<T>> {
    let base = items.len() / parts;
    let extra = items.len() % parts;
    let mut out = Vec::with_capacity(parts);
    let mut start = 0;
    for k in 0..parts {
        let len = base + usize::from(k < extra);
        out.push(items[start..start + len].to_vec());
        start += len;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{SeedStreams, Stream};
    use std::io::Cursor;

    fn raw(h: &str, r: &str, t: &str) -> RawTriple {
        RawTriple::new(h, r, t)
    }

    #[test]
    fn parses_tab_separated_line() {
        let got = parse_triples(Cursor::new("/m/a\t/film/genre\t/m/b\n"), "x").unwrap();
        assert_eq!(got, vec![raw("/m/a", "/film/genre", "/m/b")]);
    }

    #[test]
    fn empty_input_and_blank_lines() {
        assert!(parse_triples(Cursor::new(""), "x").unwrap().is_empty());
        let got = parse_triples(Cursor::new("\n a\tr\tb \r\n\n"), "x").unwrap();
        assert_eq!(got, vec![raw("a", "r", "b")]);
    }

    #[test]
    fn malformed_line_reports_line_number() {
        let err = parse_triples(Cursor::new("a\tr\tb\na\tr\n"), "train.txt").unwrap_err();
        match err {
            Error::Parse { line, .. } => assert_eq!(line, 2),
            other => panic!("unexpected {other:?}"),
        }
        let err = parse_triples(Cursor::new("a\t \tb\n"), "x").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 1, .. }));
    }

    #[test]
    fn missing_file_is_io_error() {
        assert!(matches!(
            parse_triple_file("/definitely/not/here.txt"),
            Err(Error::Io { .. })
        ));
    }

    #[test]
    fn minimal_graph() {
        let g = KnowledgeGraph::build(&[raw("a", "r", "b")], &[], &[]);
        assert_eq!(g.num_entities(), 2);
        assert_eq!(g.num_relations(), 1);
    }

    #[test]
    fn vocab_order_and_valid_only_entities() {
        let g = KnowledgeGraph::build(
            &[raw("a", "r", "b"), raw("a", "r", "b"), raw("b", "s", "c")],
            &[raw("d", "r", "a")],
            &[raw("a", "q", "e")],
        );
        assert_eq!(g.train.len(), 2, "duplicate dropped");
        assert_eq!(g.entities.id("a"), Some(0));
        assert_eq!(g.entities.id("c"), Some(2));
        assert_eq!(g.entities.id("d"), Some(3));
        assert_eq!(g.entities.id("e"), Some(4));
        assert_eq!(g.relations.id("q"), Some(2));
        assert_eq!(g.train_entity_count(), 3);
        assert_eq!(g.decode(&g.test[0]), Some(raw("a", "q", "e")));
    }

    fn graph_with_frequencies(freqs: &[usize]) -> KnowledgeGraph {
        let mut train = Vec::new();
        let mut test = Vec::new();
        for (rel, &n) in freqs.iter().enumerate() {
            for i in 0..n {
                train.push(Triple::new(i as u32, rel as u32, (i + 1) as u32));
            }
            test.push(Triple::new(0, rel as u32, 20));
        }
        KnowledgeGraph::from_ids(32, freqs.len(), train, vec![], test).unwrap()
    }

    #[test]
    fn round_robin_by_frequency() {
        let g = graph_with_frequencies(&[10, 9, 8, 7, 6, 5, 4, 3]);
        let p = partition_relation_roundrobin(&g, 4).unwrap();
        assert_eq!(p.relation_assignment, Some(vec![0, 1, 2, 3, 0, 1, 2, 3]));
        let rels = |k: usize| {
            let mut r: Vec<u32> = p.train_tasks[k].iter().map(|t| t.relation).collect();
            r.dedup();
            r
        };
        assert_eq!(rels(0), vec![0, 4]);
        assert_eq!(rels(3), vec![3, 7]);
        assert_eq!(p.eval_tasks[1].len(), 2);
    }

    #[test]
    fn round_robin_ties_break_by_id() {
        let g = graph_with_frequencies(&[3, 5, 3, 5]);
        let p = partition_relation_roundrobin(&g, 2).unwrap();
        // order: 1, 3, 0, 2
        assert_eq!(p.relation_assignment, Some(vec![0, 0, 1, 1]));
    }

    #[test]
    fn round_robin_rejects_bad_task_counts() {
        let g = graph_with_frequencies(&[3, 2, 1]);
        assert!(partition_relation_roundrobin(&g, 4).is_err());
        assert!(partition_relation_roundrobin(&g, 1).is_err());
    }

    #[test]
    fn random_chunk_sizes() {
        let train: Vec<Triple> = (0..10).map(|i| Triple::new(i, 0, i + 1)).collect();
        let g = KnowledgeGraph::from_ids(12, 1, train, vec![], vec![]).unwrap();
        let mut rng = SeedStreams::new(7).stream(Stream::Partition);
        let p = partition_random(&g, 4, &mut rng).unwrap();
        let sizes: Vec<usize> = p.train_tasks.iter().map(Vec::len).collect();
        assert_eq!(sizes, vec![3, 3, 2, 2]);
        assert!(p.relation_assignment.is_none());
    }

    #[test]
    fn random_partition_is_seeded() {
        let train: Vec<Triple> = (0..200).map(|i| Triple::new(i, i % 3, i + 1)).collect();
        let g = KnowledgeGraph::from_ids(201, 3, train, vec![], vec![]).unwrap();
        let run = |seed| {
            let mut rng = SeedStreams::new(seed).stream(Stream::Partition);
            partition_random(&g, 4, &mut rng).unwrap()
        };
        assert_eq!(run(1), run(1));
        assert_ne!(run(1), run(2));
    }

    #[test]
    fn manifest_lists_every_relation() {
        let g = graph_with_frequencies(&[4, 3, 2]);
        let p = partition_relation_roundrobin(&g, 2).unwrap();
        let m = p.manifest(&g);
        assert!(m.contains("relation_id\trelation\ttask\ttrain_triples"));
        assert!(m.contains("2\tr2\t0\t2"));
    }
}
