//! Detection of bursty topics in dynamic co-word networks.
//!
//! A collection of time-stamped titles is binned into periods, turned into one
//! co-word network per period, and stacked into a pair-by-period weight matrix
//! `W`. That matrix is split into a part that is smooth along time and a sparse
//! part `S` whose positive entries are bursts, by solving
//!
//! ```text
//! min_S  1/2 ||D(W - S)||_F^2 + lambda ||S||_1
//! ```
//!
//! with an accelerated proximal-gradient (FISTA) iteration. `D` takes
//! differences of successive columns. The crate also ships four baseline
//! detectors, a synthetic benchmark with injected ground-truth bursts,
//! precision/recall evaluation, Louvain clustering of the per-period burst
//! graphs, and GraphML/DOT/JSON export.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod baselines;
pub mod cli;
pub mod corpus;
pub mod coword;
pub mod decomp;
pub mod error;
pub mod eval;
pub mod graph;
pub mod synth;

pub use baselines::{BurstPoint, BurstSet, KleinbergParams};
pub use corpus::{BinSpec, BinnedCorpus, Document, TokenizedDocument, VocabularyIndex};
pub use coword::{PairKey, PairSeries};
pub use decomp::{DecompositionResult, DifferenceOperator, SolverConfig};
pub use error::{Error, Result};
pub use eval::{EvaluationReport, PrPoint};
pub use graph::BurstGraph;
pub use synth::{BurstType, GroundTruth, StableSeries};
