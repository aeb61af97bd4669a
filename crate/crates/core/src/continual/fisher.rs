use crate::dataset::Triple;
use crate::error::{Error, Result};
use crate::optim::{loss_gradients, sample_negatives};
use crate::rng::Rng;
use crate::transe::{Table, TransEModel};

/// Per-parameter importance, same layout as the model tables.
#[derive(Debug, Clone, PartialEq)]
pub struct FisherDiagonal {
    dim: usize,
    entities: Vec<f64>,
    relations: Vec<f64>,
}

impl FisherDiagonal {
    pub fn zeros_like(model: &TransEModel) -> Self {
        Self {
            dim: model.dim(),
            entities: vec![0.0; model.table(Table::Entity).len()],
            relations: vec![0.0; model.table(Table::Relation).len()],
        }
    }

    pub fn from_tables(dim: usize, entities: Vec<f64>, relations: Vec<f64>) -> Result<Self> {
        if dim == 0 || !entities.len().is_multiple_of(dim) || !relations.len().is_multiple_of(dim) {
            return Err(Error::ShapeMismatch(
                "fisher tables not multiples of dim".into(),
            ));
        }
        if entities
            .iter()
            .chain(&relations)
            .any(|v| !(v.is_finite() && *v >= 0.0))
        {
            return Err(Error::Config(
                "fisher entries must be finite and >= 0".into(),
            ));
        }
        Ok(Self {
            dim,
            entities,
            relations,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn table(&self, table: Table) -> &[f64] {
        match table {
            Table::Entity => &self.entities,
            Table::Relation => &self.relations,
        }
    }

    pub fn row(&self, table: Table, id: u32) -> &[f64] {
        let d = self.dim;
        &self.table(table)[id as usize * d..(id as usize + 1) * d]
    }

    pub fn matches(&self, model: &TransEModel) -> bool {
        self.dim == model.dim()
            && self.entities.len() == model.table(Table::Entity).len()
            && self.relations.len() == model.table(Table::Relation).len()
    }

    fn table_mut(&mut self, table: Table) -> &mut [f64] {
        match table {
            Table::Entity => &mut self.entities,
            Table::Relation => &mut self.relations,
        }
    }
}

/// Empirical Fisher diagonal: the task is walked once in its stored order in
/// batches of `batch_size`, each batch gets fresh 1:1 negatives, and the
/// elementwise square of each batch's summed margin-loss gradient is
/// averaged over the number of batches. The model is never updated.
pub fn compute_fisher_diagonal(
    model: &TransEModel,
    task_triples: &[Triple],
    batch_size: usize,
    margin: f64,
    rng: &mut Rng,
) -> Result<FisherDiagonal> {
    if task_triples.is_empty() {
        return Err(Error::Config("fisher pass over an empty task".into()));
    }
    if batch_size == 0 {
        return Err(Error::Config("fisher batch size must be >= 1".into()));
    }
    let mut fisher = FisherDiagonal::zeros_like(model);
    let d = model.dim();
    let mut batches = 0usize;
    for batch in task_triples.chunks(batch_size) {
        let pairs = sample_negatives(batch, model.num_entities(), rng);
        let (_, grads) = loss_gradients(model, &pairs, margin);
        for (row, g) in grads.iter() {
            let start = row.id as usize * d;
            let acc = &mut fisher.table_mut(row.table)[start..start + d];
            for (a, gi) in acc.iter_mut().zip(g) {
                *a += gi * gi;
            }
        }
        batches += 1;
    }
    let scale = batches as f64;
    fisher
        .entities
        .iter_mut()
        .chain(fisher.relations.iter_mut())
        .for_each(|v| *v /= scale);
    Ok(fisher)
}
