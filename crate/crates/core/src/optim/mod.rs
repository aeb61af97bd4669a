//! Negative sampling, margin loss, Adam and the per-task training loop.

mod adam;
mod gradient;
mod loss;
mod train;

pub use adam::{adam_step, AdamConfig, AdamState};
pub use gradient::{ParamRow, SparseGradient};
pub use loss::{loss_gradients, margin_loss, sample_negative, sample_negatives, NegativeSample};
pub use train::{
    train_task, write_train_logs_csv, EpochLog, NormalizeSchedule, PenaltyHook, TrainConfig,
    TrainLog, TrainRngs,
};
