//! Elastic Weight Consolidation and replay buffers.

mod ewc;
mod fisher;
mod replay;

pub use ewc::{ewc_penalty, ewc_penalty_gradients, EwcAnchor, EwcConfig, EwcRegularizer};
pub use fisher::{compute_fisher_diagonal, FisherDiagonal};
pub use replay::{build_replay_buffer, ReplayBuffer, ReplayStrategy, WAVE_PASSES};
