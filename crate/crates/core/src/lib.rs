//! Beam-RSRP fingerprinting and machine-learning UE positioning for mmWave cells.
//!
//! The crate is organised as a pipeline:
//!
//! - [`scenario`]: synthetic urban world (sites, sectors, buildings, sampling grid) and
//!   line-of-sight queries.
//! - [`radio`]: antenna element and SSB beam patterns, free-space path loss, beam RSRP.
//! - [`fingerprint`]: grid sweep producing per-location beam RSRP records, LoS filter,
//!   per-cell partitioning and the line-delimited JSON dataset format.
//! - [`features`]: fixed-length feature vectors from records plus z-score normalisation.
//! - [`mlp`]: feedforward regressor trained with backpropagation and Adam.
//! - [`dtree`]: multi-output CART regression tree.
//! - [`eval`]: Euclidean error statistics, percentiles and CDFs.
//! - [`pipeline`]: train/test split, experiment sweeps, model files and inference.

// `!(x > 0.0)` style checks are deliberate: they also reject NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod dtree;
pub mod error;
pub mod eval;
pub mod features;
pub mod fingerprint;
pub mod mlp;
pub mod pipeline;
pub mod radio;
pub mod scenario;

pub use error::{Error, Result};
