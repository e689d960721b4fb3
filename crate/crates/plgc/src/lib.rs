//! Single-process federated recommendation simulator built around a
//! matrix-factorization backbone, with dynamic local-global embedding
//! mixing driven by Gram-matrix traces and a feature-wise embedding
//! redundancy reduction loss, plus leave-one-out ranking evaluation and
//! embedding-collapse diagnostics.
//!
//! See the `examples/` directory for one runnable example per capability.

// the dense matrix kernels index several slices with one loop variable,
// where iterator rewrites would obscure the arithmetic
#![allow(clippy::needless_range_loop)]

pub mod backbone;
pub mod config;
pub mod data;
pub mod embedding;
pub mod evaluation;
pub mod federation;
pub mod plgc;
pub mod runner;

pub use config::ExperimentConfig;
pub use embedding::{EmbeddingTable, UserVector};
pub use federation::{Simulation, SimulationConfig, Strategy};
pub use plgc::{MixCoefficients, PlgcHyper};
