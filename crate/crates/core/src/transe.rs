//! TransE embedding tables and the translational distance.

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::dataset::{check_bounds, Triple};
use crate::error::{Error, Result};
use crate::rng::Rng;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelConfig {
    pub dim: usize,
    pub margin: f64,
    pub normalize_entities: bool,
}

impl Default for ModelConfig {
    fn default() -> Self {
        Self {
            dim: 50,
            margin: 1.0,
            normalize_entities: true,
        }
    }
}

impl ModelConfig {
    pub fn validate(&self) -> Result<()> {
        if self.dim == 0 {
            return Err(Error::Config("dim must be >= 1".into()));
        }
        if self.margin.is_nan() || self.margin <= 0.0 {
            return Err(Error::Config("margin must be > 0".into()));
        }
        Ok(())
    }
}

/// Which embedding table a parameter row lives in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Table {
    Entity,
    Relation,
}

/// Entity and relation tables, row-major, `dim` columns each.
#[derive(Debug, Clone, PartialEq)]
pub struct TransEModel {
    config: ModelConfig,
    seed: u64,
    num_entities: usize,
    num_relations: usize,
    entities: Vec<f64>,
    relations: Vec<f64>,
}

impl TransEModel {
    /// Uniform init in `[-6/sqrt(d), 6/sqrt(d)]`, entities drawn first, then
    /// relations; entity rows are normalized afterwards.
    pub fn init(
        num_entities: usize,
        num_relations: usize,
        config: ModelConfig,
        seed: u64,
        rng: &mut Rng,
    ) -> Result<Self> {
        config.validate()?;
        if num_entities == 0 || num_relations == 0 {
            return Err(Error::Config(
                "need at least one entity and one relation".into(),
            ));
        }
        let bound = 6.0 / (config.dim as f64).sqrt();
        let mut draw =
            |n: usize| -> Vec<f64> { (0..n).map(|_| rng.gen_range(-bound..=bound)).collect() };
        let entities = draw(num_entities * config.dim);
        let relations = draw(num_relations * config.dim);
        let mut model = Self {
            config,
            seed,
            num_entities,
            num_relations,
            entities,
            relations,
        };
        model.normalize_entities();
        Ok(model)
    }

    /// Builds a model from explicit tables. Used by checkpoints and tests.
    pub fn from_tables(
        config: ModelConfig,
        seed: u64,
        entities: Vec<f64>,
        relations: Vec<f64>,
    ) -> Result<Self> {
        config.validate()?;
        let d = config.dim;
        if !entities.len().is_multiple_of(d) || !relations.len().is_multiple_of(d) {
            return Err(Error::ShapeMismatch(format!(
                "table lengths {} / {} not multiples of dim {d}",
                entities.len(),
                relations.len()
            )));
        }
        Ok(Self {
            config,
            seed,
            num_entities: entities.len() / d,
            num_relations: relations.len() / d,
            entities,
            relations,
        })
    }

    pub fn config(&self) -> &ModelConfig {
        &self.config
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn dim(&self) -> usize {
        self.config.dim
    }

    pub fn num_entities(&self) -> usize {
        self.num_entities
    }

    pub fn num_relations(&self) -> usize {
        self.num_relations
    }

    pub fn num_rows(&self, table: Table) -> usize {
        match table {
            Table::Entity => self.num_entities,
            Table::Relation => self.num_relations,
        }
    }

    pub fn table(&self, table: Table) -> &[f64] {
        match table {
            Table::Entity => &self.entities,
            Table::Relation => &self.relations,
        }
    }

    pub fn table_mut(&mut self, table: Table) -> &mut [f64] {
        match table {
            Table::Entity => &mut self.entities,
            Table::Relation => &mut self.relations,
        }
    }

    pub fn entity(&self, id: u32) -> &[f64] {
        let d = self.config.dim;
        &self.entities[id as usize * d..(id as usize + 1) * d]
    }

    pub fn relation(&self, id: u32) -> &[f64] {
        let d = self.config.dim;
        &self.relations[id as usize * d..(id as usize + 1) * d]
    }

    pub fn row(&self, table: Table, id: u32) -> &[f64] {
        match table {
            Table::Entity => self.entity(id),
            Table::Relation => self.relation(id),
        }
    }

    pub fn row_mut(&mut self, table: Table, id: u32) -> &mut [f64] {
        let d = self.config.dim;
        &mut self.table_mut(table)[id as usize * d..(id as usize + 1) * d]
    }

    pub fn same_shape(&self, other: &TransEModel) -> bool {
        self.config.dim == other.config.dim
            && self.num_entities == other.num_entities
            && self.num_relations == other.num_relations
    }

    pub fn is_finite(&self) -> bool {
        self.entities
            .iter()
            .chain(&self.relations)
            .all(|v| v.is_finite())
    }

    /// `||h + r - t||_2` with bounds checks.
    pub fn score(&self, t: &Triple) -> Result<f64> {
        check_bounds(t, self.num_entities, self.num_relations)?;
        Ok(self.distance(t))
    }

    /// Unchecked variant of [`score`](Self::score); panics on bad ids.
    #[inline]
    pub fn distance(&self, t: &Triple) -> f64 {
        translation_distance(
            self.entity(t.head),
            self.relation(t.relation),
            self.entity(t.tail),
        )
    }

    /// Rescales every entity row to unit L2 norm. Zero rows stay zero.
    pub fn normalize_entities(&mut self) {
        let d = self.config.dim;
        for row in self.entities.chunks_exact_mut(d) {
            let norm = row.iter().map(|v| v * v).sum::<f64>().sqrt();
            if norm > 0.0 {
                row.iter_mut().for_each(|v| *v /= norm);
            }
        }
    }
}

/// `||h + r - t||_2`, summed in index order. Ranking relies on every caller
/// going through this function so equal inputs give bit-equal distances.
#[inline]
pub fn translation_distance(h: &[f64], r: &[f64], t: &[f64]) -> f64 {
    h.iter()
        .zip(r)
        .zip(t)
        .map(|((h, r), t)| {
            let x = (h + r) - t;
            x * x
        })
        .sum::<f64>()
        .sqrt()
}
