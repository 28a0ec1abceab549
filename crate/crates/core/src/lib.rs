//! Interpretable multivariate time series classification: per-channel
//! complexity features flattened into one row per instance, a train-fitted
//! cleaning/imputation step, tree ensembles and 1NN classifiers, rank-based
//! model comparison, and Gini-importance reports.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod classifiers;
pub mod cli;
pub mod data;
pub mod error;
pub mod evaluation;
pub mod features;
pub mod interpret;
pub mod preprocess;
pub mod tabular;

pub use error::{Error, Result};
