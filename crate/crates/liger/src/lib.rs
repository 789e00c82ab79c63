//! Weak-supervision label modeling over embedding spaces.
//!
//! The engine fuses precomputed embeddings with votes from weak sources
//! (labeling functions over `{-1, 0, +1}`, `0` meaning abstain) and emits
//! probabilistic pseudolabels. It has two coupled ideas:
//!
//! * **Local accuracy estimation.** The embedding space is partitioned with
//!   k-means and per-part source accuracies are recovered in closed form
//!   from pairwise agreement moments of conditionally independent source
//!   triples ([`model`], [`partition`]).
//! * **Vote extension.** Each source's votes propagate to abstained points
//!   within a per-source radius of its support via exact nearest-neighbor
//!   search, raising coverage before estimation and inference ([`extend`]).
//!
//! Around the core sit smoothness diagnostics for judging whether an
//! embedding supports local modeling ([`smoothness`]), exact samplers for
//! the generative model and checkerboard benchmark tasks ([`synthetic`]),
//! metrics plus a staged dev-set hyperparameter search ([`eval`]), and the
//! two benchmark drivers ([`bench`]).
//!
//! Start with the `examples/` directory: each file is a runnable walkthrough
//! of one capability (`cargo run --release -p liger --example quickstart`).
//! The same pipeline is scriptable through the thin `liger` binary ([`cli`]).

pub mod bench;
pub mod cli;
pub mod data;
pub mod error;
pub mod eval;
pub mod extend;
pub mod io;
pub mod model;
pub mod partition;
pub mod rng;
pub mod smoothness;
pub mod synthetic;

pub use data::{
    validate_bundle, ClassBalanceMode, DiagnosticsSummary, EmbeddingDataset, EngineConfig,
    LabelVector, Metric, VoteMatrix,
};
pub use error::{LigerError, Result};
pub use extend::{
    coverage_delta, extend_all, extend_external, extend_source, nearest_covered_neighbor,
    CoverageDelta, ExtendedVoteMatrix, ExtensionIndex, Provenance,
};
pub use model::{
    fit, fit_with_partition, pairwise_agreements, triplet_accuracy, LabelModel, MomentTable,
    PredictionRow, Predictions,
};
pub use partition::{kmeans_fit, kmeans_fit_with, part_diameters, KmeansRun, Partition};
