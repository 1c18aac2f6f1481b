//! Influence-score feature assessment and backward-dropping feature selection.
//!
//! The crate is organized bottom-up:
//!
//! * [`data`] holds datasets, CSV ingestion and binarization of continuous columns.
//! * [`iscore`] computes partitions and the influence score of variable subsets.
//! * [`bda`] runs the backward dropping search and ranks variable modules.
//! * [`predictor`] turns modules into classifiers and provides a logistic baseline.
//! * [`metrics`] has confusion counts, ROC curves and AUC.
//! * [`simgen`] generates the artificial benchmark datasets.
//! * [`pipeline`] wires everything into repeatable experiments.

pub mod bda;
pub mod data;
pub mod error;
pub mod iscore;
pub mod metrics;
pub mod pipeline;
pub mod predictor;
pub mod simgen;

pub use error::{Error, Result};
