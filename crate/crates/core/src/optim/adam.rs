use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::optim::gradient::SparseGradient;
use crate::transe::{Table, TransEModel};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdamConfig {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        Self {
            lr: 0.001,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
        }
    }
}

/// Dense moment tables with lazy (row-sparse) updates: only rows present in
/// a gradient have their moments and parameters touched. Bias correction
/// uses the global step count.
#[derive(Debug, Clone, PartialEq)]
pub struct AdamState {
    config: AdamConfig,
    step: u64,
    m_entity: Vec<f64>,
    v_entity: Vec<f64>,
    m_relation: Vec<f64>,
    v_relation: Vec<f64>,
}

impl AdamState {
    pub fn new(model: &TransEModel, config: AdamConfig) -> Self {
        let ne = model.table(Table::Entity).len();
        let nr = model.table(Table::Relation).len();
        Self {
            config,
            step: 0,
            m_entity: vec![0.0; ne],
            v_entity: vec![0.0; ne],
            m_relation: vec![0.0; nr],
            v_relation: vec![0.0; nr],
        }
    }

    pub fn config(&self) -> &AdamConfig {
        &self.config
    }

    pub fn step_count(&self) -> u64 {
        self.step
    }

    pub fn reset(&mut self) {
        self.step = 0;
        for t in [
            &mut self.m_entity,
            &mut self.v_entity,
            &mut self.m_relation,
            &mut self.v_relation,
        ] {
            t.iter_mut().for_each(|v| *v = 0.0);
        }
    }

    pub fn is_finite(&self) -> bool {
        self.m_entity
            .iter()
            .chain(&self.v_entity)
            .chain(&self.m_relation)
            .chain(&self.v_relation)
            .all(|v| v.is_finite())
    }

    /// One Adam update over the rows in `grads`. A non-finite gradient is
    /// rejected before anything is modified; the error carries the step index.
    pub fn apply(&mut self, model: &mut TransEModel, grads: &SparseGradient) -> Result<()> {
        if grads.dim() != model.dim()
            || self.m_entity.len() != model.table(Table::Entity).len()
            || self.m_relation.len() != model.table(Table::Relation).len()
        {
            return Err(Error::ShapeMismatch(
                "adam state does not match model".into(),
            ));
        }
        if !grads.is_finite() {
            return Err(Error::NonFiniteGradient {
                batch: self.step as usize,
            });
        }
        self.step += 1;
        let AdamConfig {
            lr,
            beta1,
            beta2,
            eps,
        } = self.config;
        let bc1 = 1.0 - beta1.powi(self.step as i32);
        let bc2 = 1.0 - beta2.powi(self.step as i32);
        let d = model.dim();

        for (row, g) in grads.iter() {
            let range = row.id as usize * d..(row.id as usize + 1) * d;
            let (m, v) = match row.table {
                Table::Entity => (&mut self.m_entity[range.clone()], &mut self.v_entity[range]),
                Table::Relation => (
                    &mut self.m_relation[range.clone()],
                    &mut self.v_relation[range],
                ),
            };
            let theta = model.row_mut(row.table, row.id);
            for i in 0..d {
                m[i] = beta1 * m[i] + (1.0 - beta1) * g[i];
                v[i] = beta2 * v[i] + (1.0 - beta2) * g[i] * g[i];
                let m_hat = m[i] / bc1;
                let v_hat = v[i] / bc2;
                theta[i] -= lr * m_hat / (v_hat.sqrt() + eps);
            }
        }
        Ok(())
    }
}

/// Free-function form of [`AdamState::apply`].
pub fn adam_step(
    state: &mut AdamState,
    model: &mut TransEModel,
    grads: &SparseGradient,
) -> Result<()> {
    state.apply(model, grads)
}
