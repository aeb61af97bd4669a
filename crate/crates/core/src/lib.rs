//! Continual learning for TransE knowledge-graph embeddings.
//!
//! A graph's training triples are split into ordered tasks (by relation or
//! at random) and a single TransE model is trained on them one after
//! another. Elastic Weight Consolidation and replay buffers can be switched
//! on to fight catastrophic forgetting, which is measured with filtered MRR
//! in a lower-triangular retention matrix.
//!
//! ```no_run
//! use kgcl::harness::{run_experiment, ExperimentConfig, Method};
//!
//! let mut config = ExperimentConfig::default();
//! config.method = Method::Ewc { lambda: 10.0 };
//! let record = run_experiment(&config)?;
//! println!("average forgetting: {:.2} pp", record.report.average_pp);
//! # Ok::<(), kgcl::Error>(())
//! ```

pub mod checkpoint;
pub mod continual;
pub mod dataset;
mod error;
pub mod eval;
pub mod harness;
pub mod optim;
pub mod rng;
pub mod synthetic;
pub mod transe;

pub use error::{Error, Result};
