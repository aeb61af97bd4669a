use std::collections::BTreeSet;
use std::fmt;

use rand::seq::index;
use serde::{Deserialize, Serialize};

use crate::dataset::Triple;
use crate::error::Error;
use crate::rng::Rng;

/// Number of phase-shifted passes used by wave selection.
pub const WAVE_PASSES: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReplayStrategy {
    Random,
    Wave,
}

impl fmt::Display for ReplayStrategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ReplayStrategy::Random => "random",
            ReplayStrategy::Wave => "wave",
        })
    }
}

impl std::str::FromStr for ReplayStrategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        match s {
            "random" => Ok(ReplayStrategy::Random),
            "wave" => Ok(ReplayStrategy::Wave),
            other => Err(Error::Config(format!("unknown replay strategy `{other}`"))),
        }
    }
}

/// Stored past-task triples, each tagged with the task it came from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReplayBuffer {
    strategy: ReplayStrategy,
    capacity_per_task: usize,
    entries: Vec<(usize, Triple)>,
}

impl ReplayBuffer {
    pub fn new(strategy: ReplayStrategy, capacity_per_task: usize) -> Self {
        Self {
            strategy,
            capacity_per_task,
            entries: Vec::new(),
        }
    }

    pub fn strategy(&self) -> ReplayStrategy {
        self.strategy
    }

    pub fn capacity_per_task(&self) -> usize {
        self.capacity_per_task
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[(usize, Triple)] {
        &self.entries
    }

    pub fn triples(&self) -> impl Iterator<Item = Triple> + '_ {
        self.entries.iter().map(|(_, t)| *t)
    }

    pub fn count_for_task(&self, task: usize) -> usize {
        self.entries.iter().filter(|(k, _)| *k == task).count()
    }

    /// Selects up to `capacity_per_task` triples from `task_triples` and
    /// stores them tagged with `task_index`.
    pub fn add_task(&mut self, task_index: usize, task_triples: &[Triple], rng: &mut Rng) {
        let picks = match self.strategy {
            ReplayStrategy::Random => {
                select_random(task_triples.len(), self.capacity_per_task, rng)
            }
            ReplayStrategy::Wave => select_wave(task_triples.len(), self.capacity_per_task, rng),
        };
        self.entries
            .extend(picks.into_iter().map(|i| (task_index, task_triples[i])));
    }
}

pub fn build_replay_buffer(
    task_index: usize,
    task_triples: &[Triple],
    strategy: ReplayStrategy,
    capacity: usize,
    rng: &mut Rng,
) -> ReplayBuffer {
    let mut buffer = ReplayBuffer::new(strategy, capacity);
    buffer.add_task(task_index, task_triples, rng);
    buffer
}

/// Uniform sample without replacement, returned in ascending position order.
fn select_random(n: usize, capacity: usize, rng: &mut Rng) -> Vec<usize> {
    let k = capacity.min(n);
    let mut picks = index::sample(rng, n, k).into_vec();
    picks.sort_unstable();
    picks
}

/// Stratified selection over the task's training order. The capacity is
/// split across `WAVE_PASSES` passes; pass `w` takes evenly spaced positions
/// with stride `n / k_w` at phase `(w + 0.5) / WAVE_PASSES` of a stride.
/// Collisions are dropped and the shortfall is topped up uniformly from the
/// positions not yet chosen. Output is in ascending position order.
fn select_wave(n: usize, capacity: usize, rng: &mut Rng) -> Vec<usize> {
    let c = capacity.min(n);
    if c == n {
        return (0..n).collect();
    }
    let mut chosen = BTreeSet::new();
    for w in 0..WAVE_PASSES {
        let k = c / WAVE_PASSES + usize::from(w < c % WAVE_PASSES);
        if k == 0 {
            continue;
        }
        let stride = n as f64 / k as f64;
        let phase = stride * (w as f64 + 0.5) / WAVE_PASSES as f64;
        for i in 0..k {
            let pos = (phase + i as f64 * stride).floor() as usize;
            chosen.insert(pos.min(n - 1));
        }
    }
    if chosen.len() < c {
        let rest: Vec<usize> = (0..n).filter(|i| !chosen.contains(i)).collect();
        let need = c - chosen.len();
        for j in index::sample(rng, rest.len(), need) {
            chosen.insert(rest[j]);
        }
    }
    chosen.into_iter().collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{SeedStreams, Stream};

    fn triples(n: u32) -> Vec<Triple> {
        (0..n).map(|i| Triple::new(i, i % 7, i + 1)).collect()
    }

    fn rng() -> Rng {
        SeedStreams::new(17).stream(Stream::Replay)
    }

    #[test]
    fn zero_capacity_is_empty() {
        for s in [ReplayStrategy::Random, ReplayStrategy::Wave] {
            assert!(build_replay_buffer(0, &triples(100), s, 0, &mut rng()).is_empty());
        }
    }

    #[test]
    fn small_task_is_stored_whole() {
        for s in [ReplayStrategy::Random, ReplayStrategy::Wave] {
            let b = build_replay_buffer(2, &triples(300), s, 500, &mut rng());
            assert_eq!(b.len(), 300);
            assert_eq!(b.count_for_task(2), 300);
        }
    }

    #[test]
    fn large_task_yields_exactly_capacity_distinct() {
        let task = triples(10_000);
        for s in [ReplayStrategy::Random, ReplayStrategy::Wave] {
            let b = build_replay_buffer(0, &task, s, 500, &mut rng());
            assert_eq!(b.len(), 500);
            let distinct: BTreeSet<_> = b.triples().collect();
            assert_eq!(distinct.len(), 500);
            assert!(b.triples().all(|t| task.contains(&t)));
        }
    }

    #[test]
    fn wave_covers_the_timeline() {
        let n = 10_000;
        let picks = select_wave(n, 500, &mut rng());
        // every tenth of the timeline gets its share (50 per decile)
        for decile in 0..10 {
            let lo = decile * n / 10;
            let hi = lo + n / 10;
            let count = picks.iter().filter(|&&p| p >= lo && p < hi).count();
            assert!((45..=55).contains(&count), "decile {decile}: {count}");
        }
    }

    #[test]
    fn wave_tops_up_after_collisions() {
        // n barely above capacity forces phase collisions
        let picks = select_wave(510, 500, &mut rng());
        assert_eq!(picks.len(), 500);
        assert!(picks.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn per_task_capacity_respected_across_tasks() {
        let mut b = ReplayBuffer::new(ReplayStrategy::Random, 50);
        let mut r = rng();
        b.add_task(0, &triples(80), &mut r);
        b.add_task(1, &triples(30), &mut r);
        assert_eq!(b.count_for_task(0), 50);
        assert_eq!(b.count_for_task(1), 30);
    }
}
