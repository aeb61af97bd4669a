//! Filtered link-prediction ranking, MRR, retention matrix and forgetting.

mod rank;
mod retention;

pub use rank::{filtered_rank, mrr, mrr_with_sides, FilterIndex, RankSides, Side};
pub use retention::{
    forgetting_report, pooled_final_mrr, retention_update, ForgettingReport, RetentionMatrix,
};
