//! Base learners: CART trees, RBF SVMs trained by SMO, cross-validated grid
//! search, majority voting, and a 1-nearest-neighbor classifier.
//!
//! Learners address training data as row indices into a sample matrix plus
//! a label slice indexed the same way, so bootstraps and feature subsets
//! never copy the data.

mod cart;
mod grid;
mod knn;
mod svm;
mod vote;

pub use cart::{predict_tree, train_cart, DecisionTree, TreeConfig};
pub use grid::{grid_search_cv, stratified_folds, GridSearchResult, GridSearchSpec};
pub use knn::NearestNeighbor;
pub use svm::{predict_svm, train_svm_smo, BinarySvm, SvmModel, SvmParams};
pub use vote::{majority_vote, vote_counts};

use alloc::format;

use crate::{Error, Matrix, Result};

pub(crate) fn check_training(x: &Matrix, rows: &[usize], labels: &[usize], features: &[usize]) -> Result<()> {
    if rows.is_empty() {
        return Err(Error::EmptyInput);
    }
    if features.is_empty() {
        return Err(Error::InvalidArgument("feature set is empty".into()));
    }
    if labels.len() != x.nrows() {
        return Err(Error::DimensionMismatch { expected: x.nrows(), found: labels.len() });
    }
    if let Some(&r) = rows.iter().find(|&&r| r >= x.nrows()) {
        return Err(Error::InvalidArgument(format!("row {r} out of range")));
    }
    if let Some(&f) = features.iter().find(|&&f| f >= x.ncols()) {
        return Err(Error::InvalidArgument(format!("feature {f} out of range")));
    }
    Ok(())
}
