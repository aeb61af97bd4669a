use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::continual::fisher::FisherDiagonal;
use crate::error::{Error, Result};
use crate::optim::{ParamRow, PenaltyHook, SparseGradient};
use crate::transe::{Table, TransEModel};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EwcConfig {
    pub lambda: f64,
    pub fisher_batch_size: usize,
}

impl Default for EwcConfig {
    fn default() -> Self {
        Self {
            lambda: 10.0,
            fisher_batch_size: 256,
        }
    }
}

/// Parameters and Fisher diagonal frozen at the end of one task.
#[derive(Debug, Clone, PartialEq)]
pub struct EwcAnchor {
    task_index: usize,
    theta_star: TransEModel,
    fisher: FisherDiagonal,
}

impl EwcAnchor {
    pub fn new(task_index: usize, theta_star: TransEModel, fisher: FisherDiagonal) -> Result<Self> {
        if !fisher.matches(&theta_star) {
            return Err(Error::ShapeMismatch(
                "fisher does not match anchor model".into(),
            ));
        }
        Ok(Self {
            task_index,
            theta_star,
            fisher,
        })
    }

    pub fn task_index(&self) -> usize {
        self.task_index
    }

    pub fn theta_star(&self) -> &TransEModel {
        &self.theta_star
    }

    pub fn fisher(&self) -> &FisherDiagonal {
        &self.fisher
    }

    fn check(&self, model: &TransEModel) -> Result<()> {
        if self.theta_star.same_shape(model) {
            Ok(())
        } else {
            Err(Error::ShapeMismatch(format!(
                "anchor for task {} does not match live model",
                self.task_index
            )))
        }
    }

    /// `sum_k F_k (theta_k - theta*_k)^2`, without the lambda/2 factor.
    fn weighted_sq_distance(&self, model: &TransEModel) -> f64 {
        let mut total = 0.0;
        for table in [Table::Entity, Table::Relation] {
            let f = self.fisher.table(table);
            let theta = model.table(table);
            let star = self.theta_star.table(table);
            for i in 0..f.len() {
                let diff = theta[i] - star[i];
                total += f[i] * diff * diff;
            }
        }
        total
    }

    fn nonzero_rows(&self) -> impl Iterator<Item = ParamRow> + '_ {
        let d = self.fisher.dim();
        [Table::Entity, Table::Relation]
            .into_iter()
            .flat_map(move |table| {
                self.fisher
                    .table(table)
                    .chunks_exact(d)
                    .enumerate()
                    .filter(|(_, row)| row.iter().any(|&v| v != 0.0))
                    .map(move |(id, _)| ParamRow {
                        table,
                        id: id as u32,
                    })
            })
    }
}

/// `sum_j (lambda/2) sum_k F^j_k (theta_k - theta*_{k,j})^2`; 0 for no anchors.
pub fn ewc_penalty(model: &TransEModel, anchors: &[EwcAnchor], lambda: f64) -> Result<f64> {
    let mut total = 0.0;
    for anchor in anchors {
        anchor.check(model)?;
        total += 0.5 * lambda * anchor.weighted_sq_distance(model);
    }
    Ok(total)
}

/// `sum_j lambda F^j_k (theta_k - theta*_{k,j})` over every row that has a
/// nonzero Fisher entry in some anchor. Empty when `lambda == 0`, so a
/// zero-strength penalty leaves the optimizer's row set untouched.
pub fn ewc_penalty_gradients(
    model: &TransEModel,
    anchors: &[EwcAnchor],
    lambda: f64,
) -> Result<SparseGradient> {
    let reg = EwcRegularizer::new(anchors.to_vec(), lambda)?;
    let mut grads = SparseGradient::new(model.dim());
    reg.add_gradients(model, &mut grads)?;
    Ok(grads)
}

/// The EWC penalty hook used during training: owns the anchors and caches
/// the union of rows any anchor protects.
#[derive(Debug, Clone)]
pub struct EwcRegularizer {
    anchors: Vec<EwcAnchor>,
    lambda: f64,
    active_rows: Vec<ParamRow>,
}

impl EwcRegularizer {
    pub fn new(anchors: Vec<EwcAnchor>, lambda: f64) -> Result<Self> {
        if !(lambda >= 0.0 && lambda.is_finite()) {
            return Err(Error::Config(format!(
                "lambda must be finite and >= 0, got {lambda}"
            )));
        }
        if let Some(first) = anchors.first() {
            for a in &anchors[1..] {
                a.check(first.theta_star())?;
            }
        }
        let active_rows = if lambda == 0.0 {
            Vec::new()
        } else {
            anchors
                .iter()
                .flat_map(EwcAnchor::nonzero_rows)
                .collect::<BTreeSet<_>>()
                .into_iter()
                .collect()
        };
        Ok(Self {
            anchors,
            lambda,
            active_rows,
        })
    }

    pub fn anchors(&self) -> &[EwcAnchor] {
        &self.anchors
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn push_anchor(&mut self, anchor: EwcAnchor) -> Result<()> {
        let mut anchors = std::mem::take(&mut self.anchors);
        anchors.push(anchor);
        *self = Self::new(anchors, self.lambda)?;
        Ok(())
    }
}

impl PenaltyHook for EwcRegularizer {
    fn penalty(&self, model: &TransEModel) -> Result<f64> {
        ewc_penalty(model, &self.anchors, self.lambda)
    }

    fn add_gradients(&self, model: &TransEModel, grads: &mut SparseGradient) -> Result<()> {
        for a in &self.anchors {
            a.check(model)?;
        }
        let d = model.dim();
        for &row in &self.active_rows {
            let theta = model.row(row.table, row.id);
            let out = grads.row_mut(row);
            for anchor in &self.anchors {
                let f = anchor.fisher.row(row.table, row.id);
                let star = anchor.theta_star.row(row.table, row.id);
                for i in 0..d {
                    out[i] += self.lambda * f[i] * (theta[i] - star[i]);
                }
            }
        }
        Ok(())
    }
}
