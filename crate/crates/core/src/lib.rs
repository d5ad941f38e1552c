//! Adaptive dimensionality reduction (ADR) for multimodal tabular data.
//!
//! Samples are grouped into supersamples by a density watershed, each
//! supersample gets a local Gaussian-kernel feature graph, the whole dataset
//! gets a mutual-information feature graph, and the two normalized Laplacians
//! are jointly diagonalized. The joint spectrum picks how many features to
//! keep, k-means over the joint embedding groups redundant features, and the
//! medoid of each group is kept.
//!
//! The selected subsets feed three consumers: a model-level tree ensemble
//! ([`ensembles::train_adr_el`]), a data-level SVM ensemble
//! ([`ensembles::train_adr_svm`]) and Jaccard-ordered transductive transfer
//! ([`transfer::ttl_propagate`]).
//!
//! The crate is `no_std` and only needs `alloc`.

#![no_std]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod adr;
pub mod datagen;
pub mod dataset;
pub mod ensembles;
mod error;
pub mod featgraph;
pub mod jointdiag;
pub mod kmeans;
pub mod kneedle;
pub mod learners;
pub(crate) mod math;
pub mod matrix;
pub mod partition;
pub mod rng;
pub mod transfer;

pub use error::{Error, Result};
pub use matrix::Matrix;
