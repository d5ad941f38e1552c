//! ADR ensembles: bagged trees per feature subset (model level), one tuned
//! SVM per supersample (data level), and the random-forest baseline.

use alloc::format;
use alloc::vec::Vec;

use rand::Rng;

use crate::adr::{AdrModel, FeatureSubset};
use crate::dataset::{DataMatrix, LabelVector};
use crate::learners::{
    grid_search_cv, majority_vote, predict_svm, predict_tree, train_cart, train_svm_smo, DecisionTree,
    GridSearchResult, GridSearchSpec, SvmModel, SvmParams, TreeConfig,
};
use crate::math::{floor, sqrt};
use crate::rng;
use crate::{Error, Matrix, Result};

#[derive(Debug, Clone)]
pub struct EnsembleTree {
    pub tree: DecisionTree,
    pub subset: FeatureSubset,
}

#[derive(Debug, Clone)]
pub struct ModelLevelEnsemble {
    pub trees: Vec<EnsembleTree>,
    pub lambda: usize,
}

impl ModelLevelEnsemble {
    pub fn len(&self) -> usize {
        self.trees.len()
    }

    pub fn is_empty(&self) -> bool {
        self.trees.is_empty()
    }
}

#[derive(Debug, Clone)]
pub struct DataLevelEnsemble {
    pub svms: Vec<SvmModel>,
    pub tuning: Vec<GridSearchResult>,
    pub assignment: Vec<usize>,
}

fn check_split(data: &DataMatrix, labels: &LabelVector, train: &[usize]) -> Result<()> {
    if train.is_empty() {
        return Err(Error::EmptyInput);
    }
    if labels.len() != data.n_samples() {
        return Err(Error::DimensionMismatch { expected: data.n_samples(), found: labels.len() });
    }
    if let Some(&r) = train.iter().find(|&&r| r >= data.n_samples()) {
        return Err(Error::InvalidArgument(format!("training row {r} out of range")));
    }
    Ok(())
}

fn bootstrap(train: &[usize], seed: u64, name: &str, index: u64) -> Vec<usize> {
    let mut r = rng::substream(seed, name, index);
    (0..train.len()).map(|_| train[r.random_range(0..train.len())]).collect()
}

/// `Λ` bagged trees for every supersample subset, `Λ · S` in total.
pub fn train_adr_el(
    data: &DataMatrix,
    labels: &LabelVector,
    train: &[usize],
    model: &AdrModel,
    lambda: usize,
    config: TreeConfig,
    seed: u64,
) -> Result<ModelLevelEnsemble> {
    check_split(data, labels, train)?;
    if lambda == 0 {
        return Err(Error::InvalidArgument("lambda must be at least 1".into()));
    }
    let x = data.values();
    let mut trees = Vec::with_capacity(lambda * model.subsets.len());
    for (m, subset) in model.subsets.iter().enumerate() {
        for l in 0..lambda {
            let index = (m * lambda + l) as u64;
            let rows = bootstrap(train, seed, "adr-el-bootstrap", index);
            let tree_seed = rng::derive_seed(seed, "adr-el-tree", index);
            let tree = train_cart(x, &rows, labels.as_slice(), &subset.selected, config, tree_seed)?;
            trees.push(EnsembleTree { tree, subset: subset.clone() });
        }
    }
    Ok(ModelLevelEnsemble { trees, lambda })
}

/// Majority vote over every tree.
pub fn predict_adr_el(ensemble: &ModelLevelEnsemble, x: &Matrix, rows: &[usize]) -> Vec<usize> {
    let mut votes = Vec::with_capacity(ensemble.trees.len());
    rows.iter()
        .map(|&r| {
            votes.clear();
            votes.extend(ensemble.trees.iter().map(|t| predict_tree(&t.tree, x.row(r))));
            majority_vote(&votes).expect("ensembles hold at least one tree")
        })
        .collect()
}

/// Bagged CART over all features with `floor(sqrt(N))` features tried per
/// node.
pub fn train_random_forest(
    data: &DataMatrix,
    labels: &LabelVector,
    train: &[usize],
    n_trees: usize,
    config: TreeConfig,
    seed: u64,
) -> Result<ModelLevelEnsemble> {
    check_split(data, labels, train)?;
    if n_trees == 0 {
        return Err(Error::InvalidArgument("n_trees must be at least 1".into()));
    }
    let n = data.n_features();
    let all = FeatureSubset::new(0, (0..n).collect(), n)?;
    let config = TreeConfig { max_features: Some((floor(sqrt(n as f64)) as usize).max(1)), ..config };
    let mut trees = Vec::with_capacity(n_trees);
    for t in 0..n_trees {
        let rows = bootstrap(train, seed, "rf-bootstrap", t as u64);
        let tree_seed = rng::derive_seed(seed, "rf-tree", t as u64);
        let tree = train_cart(data.values(), &rows, labels.as_slice(), &all.selected, config, tree_seed)?;
        trees.push(EnsembleTree { tree, subset: all.clone() });
    }
    Ok(ModelLevelEnsemble { trees, lambda: n_trees })
}

/// Grid search followed by a final fit on all `rows`.
///
/// `spec = None` uses the standard grid scaled by `|features|`. Folds are
/// reduced to the smallest class count (at least 2) so small training sets
/// still tune.
pub fn train_tuned_svm(
    x: &Matrix,
    rows: &[usize],
    labels: &[usize],
    features: &[usize],
    spec: Option<&GridSearchSpec>,
    seed: u64,
) -> Result<(SvmModel, GridSearchResult)> {
    let mut spec = spec.cloned().unwrap_or_else(|| GridSearchSpec::standard(features.len()));
    let classes = crate::dataset::LabelVector::from_labels(rows.iter().map(|&r| labels[r]).collect());
    let counts = classes.class_counts();
    if counts.iter().filter(|&&c| c > 0).count() < 2 {
        return Err(Error::SingleClass);
    }
    let smallest = counts.iter().copied().filter(|&c| c > 0).min().unwrap_or(0);
    if smallest < 2 {
        let class = counts.iter().position(|&c| c == smallest).unwrap_or(0);
        return Err(Error::ClassTooSmall { class, count: smallest, required: 2 });
    }
    spec.folds = spec.folds.min(smallest).max(2);
    let best = grid_search_cv(x, rows, labels, features, &spec, seed)?;
    let model = train_svm_smo(x, rows, labels, features, SvmParams::new(best.c, best.gamma))?;
    Ok((model, best))
}

/// One tuned SVM per supersample on all training rows, restricted to `Ω_m`.
/// Supersamples with identical subsets share one fit.
pub fn train_adr_svm(
    data: &DataMatrix,
    labels: &LabelVector,
    train: &[usize],
    model: &AdrModel,
    spec: Option<&GridSearchSpec>,
    seed: u64,
) -> Result<DataLevelEnsemble> {
    check_split(data, labels, train)?;
    let mut svms: Vec<SvmModel> = Vec::with_capacity(model.subsets.len());
    let mut tuning = Vec::with_capacity(model.subsets.len());
    for (m, subset) in model.subsets.iter().enumerate() {
        if let Some(prev) = model.subsets[..m].iter().position(|s| s.selected == subset.selected) {
            svms.push(svms[prev].clone());
            tuning.push(tuning[prev]);
            continue;
        }
        // Same subset, same seed: the cache above stays exact.
        let (svm, best) = train_tuned_svm(data.values(), train, labels.as_slice(), &subset.selected, spec, seed)?;
        svms.push(svm);
        tuning.push(best);
    }
    Ok(DataLevelEnsemble { svms, tuning, assignment: model.partition.assignment().to_vec() })
}

/// Each row is classified by the SVM of its stored supersample.
pub fn predict_adr_svm(ensemble: &DataLevelEnsemble, x: &Matrix, rows: &[usize]) -> Result<Vec<usize>> {
    rows.iter()
        .map(|&r| {
            let m = *ensemble
                .assignment
                .get(r)
                .ok_or_else(|| Error::InvalidArgument(format!("row {r} outside the partition")))?;
            Ok(predict_svm(&ensemble.svms[m], x.row(r)))
        })
        .collect()
}

pub fn overall_accuracy(predicted: &[usize], truth: &[usize]) -> Result<f64> {
    if predicted.len() != truth.len() {
        return Err(Error::DimensionMismatch { expected: truth.len(), found: predicted.len() });
    }
    if truth.is_empty() {
        return Err(Error::EmptyInput);
    }
    let hits = predicted.iter().zip(truth).filter(|(p, t)| p == t).count();
    Ok(hits as f64 / truth.len() as f64)
}
