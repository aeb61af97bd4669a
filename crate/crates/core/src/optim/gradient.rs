use std::collections::BTreeMap;

use crate::transe::Table;

/// One row of one embedding table.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ParamRow {
    pub table: Table,
    pub id: u32,
}

impl ParamRow {
    pub const fn entity(id: u32) -> Self {
        Self {
            table: Table::Entity,
            id,
        }
    }

    pub const fn relation(id: u32) -> Self {
        Self {
            table: Table::Relation,
            id,
        }
    }
}

/// Partials for the rows a batch touched. Rows are kept in `ParamRow` order
/// so iteration (and anything reduced over it) is deterministic.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseGradient {
    dim: usize,
    rows: BTreeMap<ParamRow, Vec<f64>>,
}

impl SparseGradient {
    pub fn new(dim: usize) -> Self {
        Self {
            dim,
            rows: BTreeMap::new(),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn get(&self, row: ParamRow) -> Option<&[f64]> {
        self.rows.get(&row).map(Vec::as_slice)
    }

    /// Mutable access, inserting a zero row if absent.
    pub fn row_mut(&mut self, row: ParamRow) -> &mut [f64] {
        let dim = self.dim;
        self.rows.entry(row).or_insert_with(|| vec![0.0; dim])
    }

    /// `row += scale * values`
    pub fn add_scaled(&mut self, row: ParamRow, values: &[f64], scale: f64) {
        debug_assert_eq!(values.len(), self.dim);
        for (g, v) in self.row_mut(row).iter_mut().zip(values) {
            *g += scale * v;
        }
    }

    pub fn merge(&mut self, other: &SparseGradient) {
        for (row, values) in &other.rows {
            self.add_scaled(*row, values, 1.0);
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (ParamRow, &[f64])> {
        self.rows.iter().map(|(r, v)| (*r, v.as_slice()))
    }

    pub fn is_finite(&self) -> bool {
        self.rows.values().flatten().all(|v| v.is_finite())
    }
}
