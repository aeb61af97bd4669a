use std::io::Write;
use std::time::Instant;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::continual::ReplayBuffer;
use crate::dataset::Triple;
use crate::error::{Error, Result};
use crate::optim::adam::{AdamConfig, AdamState};
use crate::optim::gradient::SparseGradient;
use crate::optim::loss::{loss_gradients, sample_negatives};
use crate::rng::Rng;
use crate::transe::TransEModel;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NormalizeSchedule {
    PerEpoch,
    PerBatch,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub adam: AdamConfig,
    pub normalize: NormalizeSchedule,
    /// Zero the Adam moments at every task boundary.
    pub reset_adam_per_task: bool,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            epochs: 20,
            batch_size: 256,
            adam: AdamConfig::default(),
            normalize: NormalizeSchedule::PerEpoch,
            reset_adam_per_task: false,
        }
    }
}

/// Extra loss term applied on every batch (EWC implements this).
pub trait PenaltyHook {
    fn penalty(&self, model: &TransEModel) -> Result<f64>;

    /// Adds the penalty's gradient into `grads`.
    fn add_gradients(&self, model: &TransEModel, grads: &mut SparseGradient) -> Result<()>;
}

/// Shuffle and negative-sampling generators, kept separate so replay pool
/// size cannot shift the negative draws and vice versa.
#[derive(Debug, Clone)]
pub struct TrainRngs {
    pub shuffle: Rng,
    pub negatives: Rng,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochLog {
    pub task: usize,
    pub epoch: usize,
    pub mean_loss: f64,
    pub wall_seconds: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TrainLog {
    pub epochs: Vec<EpochLog>,
    pub batches: usize,
}

/// Writes logs as CSV with columns `task,epoch,mean_loss,wall_seconds`.
pub fn write_train_logs_csv<'a>(
    logs: impl IntoIterator<Item = &'a TrainLog>,
    out: impl Write,
) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for log in logs {
        for e in &log.epochs {
            w.serialize(e)?;
        }
    }
    w.flush().map_err(|e| Error::io("<csv>", e))?;
    Ok(())
}

/// Trains on one task. Each epoch shuffles the task triples (with any replay
/// examples appended), walks them in batches, draws one tail-corrupted
/// negative per triple, adds penalty gradients, and takes one Adam step per
/// batch. `mean_loss` is the summed hinge loss divided by pairs seen.
#[allow(clippy::too_many_arguments)]
pub fn train_task(
    model: &mut TransEModel,
    adam: &mut AdamState,
    task_triples: &[Triple],
    config: &TrainConfig,
    penalty: Option<&dyn PenaltyHook>,
    replay: Option<&ReplayBuffer>,
    rngs: &mut TrainRngs,
    task_index: usize,
) -> Result<TrainLog> {
    if task_triples.is_empty() {
        return Err(Error::Config(format!(
            "task {task_index} has no training triples"
        )));
    }
    if config.batch_size == 0 {
        return Err(Error::Config("batch size must be >= 1".into()));
    }
    let mut pool: Vec<Triple> = task_triples.to_vec();
    if let Some(buffer) = replay {
        pool.extend(buffer.triples());
    }
    let margin = model.config().margin;
    let normalize = model.config().normalize_entities;
    let num_entities = model.num_entities();
    let mut log = TrainLog::default();

    for epoch in 0..config.epochs {
        let start = Instant::now();
        pool.shuffle(&mut rngs.shuffle);
        let mut total = 0.0;
        for batch in pool.chunks(config.batch_size) {
            let pairs = sample_negatives(batch, num_entities, &mut rngs.negatives);
            let (loss, mut grads) = loss_gradients(model, &pairs, margin);
            total += loss;
            if let Some(hook) = penalty {
                hook.add_gradients(model, &mut grads)?;
            }
            adam.apply(model, &grads).map_err(|e| match e {
                Error::NonFiniteGradient { .. } => Error::NonFiniteGradient { batch: log.batches },
                other => other,
            })?;
            log.batches += 1;
            if normalize && config.normalize == NormalizeSchedule::PerBatch {
                model.normalize_entities();
            }
        }
        if normalize && config.normalize == NormalizeSchedule::PerEpoch {
            model.normalize_entities();
        }
        log.epochs.push(EpochLog {
            task: task_index,
            epoch,
            mean_loss: total / pool.len() as f64,
            wall_seconds: start.elapsed().as_secs_f64(),
        });
    }
    Ok(log)
}
