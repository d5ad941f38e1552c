//! Transductive transfer: labels flow from source supersamples to target
//! supersamples one target at a time, always to the target whose selected
//! features best overlap (Jaccard) an already labeled supersample.

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use rand::seq::SliceRandom;

use crate::adr::AdrModel;
use crate::ensembles::train_tuned_svm;
use crate::learners::{predict_svm, GridSearchSpec, NearestNeighbor};
use crate::rng;
use crate::{Error, Matrix, Result};

const MAX_SPLIT_ATTEMPTS: u64 = 100;

/// `|a ∩ b| / |a ∪ b|` of two feature index sets.
pub fn jaccard_index(a: &[usize], b: &[usize]) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::EmptyInput);
    }
    let (sa, sb): (BTreeSet<usize>, BTreeSet<usize>) = (a.iter().copied().collect(), b.iter().copied().collect());
    let inter = sa.intersection(&sb).count();
    Ok(inter as f64 / (sa.len() + sb.len() - inter) as f64)
}

fn intersection(a: &[usize], b: &[usize]) -> Vec<usize> {
    a.iter().copied().filter(|f| b.contains(f)).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct DomainSplit {
    pub source_ids: Vec<usize>,
    pub target_ids: Vec<usize>,
    /// Share of all samples inside the source supersamples.
    pub source_fraction: f64,
}

/// Adds supersamples in a seeded random order until the source covers
/// `source_fraction` of the samples, keeping at least one target. Orders
/// whose source holds fewer than two classes are redrawn.
pub fn make_domain_split(model: &AdrModel, labels: &[usize], source_fraction: f64, seed: u64) -> Result<DomainSplit> {
    if !(source_fraction > 0.0 && source_fraction < 1.0) {
        return Err(Error::InvalidArgument(format!("source fraction {source_fraction} outside (0, 1)")));
    }
    let partition = &model.partition;
    if labels.len() != partition.n_samples() {
        return Err(Error::DimensionMismatch { expected: partition.n_samples(), found: labels.len() });
    }
    let s = partition.n_supersamples();
    if s < 2 {
        return Err(Error::DomainSplitFailed);
    }
    let sizes = partition.sizes();
    let total = partition.n_samples() as f64;
    let members: Vec<Vec<usize>> = (0..s).map(|m| partition.members(m)).collect();
    for attempt in 0..MAX_SPLIT_ATTEMPTS {
        let mut order: Vec<usize> = (0..s).collect();
        order.shuffle(&mut rng::substream(seed, "domain-split", attempt));
        let mut covered = 0usize;
        let mut source = Vec::new();
        for &m in &order[..s - 1] {
            source.push(m);
            covered += sizes[m];
            if covered as f64 >= source_fraction * total {
                break;
            }
        }
        let mut classes: Vec<usize> = source.iter().flat_map(|&m| members[m].iter().map(|&i| labels[i])).collect();
        classes.sort_unstable();
        classes.dedup();
        if classes.len() >= 2 {
            source.sort_unstable();
            let target_ids = (0..s).filter(|m| !source.contains(m)).collect();
            return Ok(DomainSplit { source_ids: source, target_ids, source_fraction: covered as f64 / total });
        }
    }
    Err(Error::DomainSplitFailed)
}

#[derive(Debug, Clone, PartialEq)]
pub enum TransferClassifier {
    /// RBF SVM tuned by grid search; `None` uses the standard grid.
    Svm(Option<GridSearchSpec>),
    NearestNeighbor,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TransferConfig {
    pub classifier: TransferClassifier,
    /// Use `Ω_t` when no labeled subset overlaps the target.
    pub allow_fallback: bool,
    pub seed: u64,
}

impl Default for TransferConfig {
    fn default() -> Self {
        TransferConfig { classifier: TransferClassifier::Svm(None), allow_fallback: true, seed: 0 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PropagationStep {
    pub target: usize,
    /// Labeled supersamples attaining the best Jaccard value.
    pub matched: Vec<usize>,
    pub jaccard: f64,
    pub features: Vec<usize>,
    pub fallback: bool,
    pub n_training: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PropagationState {
    /// Source supersamples first, then targets in consumption order.
    pub labeled_ids: Vec<usize>,
    pub inferred_labels: Vec<Option<usize>>,
    pub log: Vec<PropagationStep>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TransferOutcome {
    /// Target samples, ascending, and their inferred labels.
    pub target_samples: Vec<usize>,
    pub predictions: Vec<usize>,
    pub state: PropagationState,
}

/// Best `(jaccard, intersection size)` of a target against the labeled set,
/// with the labeled supersamples reaching that Jaccard value.
fn score(model: &AdrModel, target: usize, labeled: &[usize]) -> Result<(f64, usize, Vec<usize>)> {
    let omega_t = &model.subsets[target].selected;
    let mut best_j = f64::NEG_INFINITY;
    let mut matched = Vec::new();
    for &s in labeled {
        let j = jaccard_index(&model.subsets[s].selected, omega_t)?;
        if j > best_j + 1e-12 {
            best_j = j;
            matched = vec![s];
        } else if (j - best_j).abs() <= 1e-12 {
            matched.push(s);
        }
    }
    let best_inter =
        matched.iter().map(|&s| intersection(&model.subsets[s].selected, omega_t).len()).max().unwrap_or(0);
    Ok((best_j, best_inter, matched))
}

/// `labels` needs valid entries for source samples only.
pub fn ttl_propagate(
    x: &Matrix,
    labels: &[usize],
    model: &AdrModel,
    split: &DomainSplit,
    config: &TransferConfig,
) -> Result<TransferOutcome> {
    let partition = &model.partition;
    if x.nrows() != partition.n_samples() || labels.len() != x.nrows() {
        return Err(Error::DimensionMismatch { expected: partition.n_samples(), found: x.nrows() });
    }
    let s = partition.n_supersamples();
    let mut all: Vec<usize> = split.source_ids.iter().chain(&split.target_ids).copied().collect();
    all.sort_unstable();
    if split.source_ids.is_empty() || all != (0..s).collect::<Vec<_>>() {
        return Err(Error::InvalidArgument("domain split must be a disjoint cover with a source".into()));
    }
    let members: Vec<Vec<usize>> = (0..s).map(|m| partition.members(m)).collect();
    let mut known: Vec<Option<usize>> = vec![None; x.nrows()];
    for &m in &split.source_ids {
        for &i in &members[m] {
            known[i] = Some(labels[i]);
        }
    }
    let mut state = PropagationState {
        labeled_ids: split.source_ids.clone(),
        inferred_labels: vec![None; x.nrows()],
        log: Vec::new(),
    };
    let mut pending: Vec<usize> = split.target_ids.clone();
    pending.sort_unstable();
    while !pending.is_empty() {
        let mut pick: Option<(usize, f64, usize, Vec<usize>)> = None;
        for (pos, &t) in pending.iter().enumerate() {
            let (j, inter, matched) = score(model, t, &state.labeled_ids)?;
            let better = match &pick {
                None => true,
                Some((_, bj, bi, _)) => j > bj + 1e-12 || ((j - bj).abs() <= 1e-12 && inter > *bi),
            };
            if better {
                pick = Some((pos, j, inter, matched));
            }
        }
        let (pos, jaccard, _, matched) = pick.expect("pending is non-empty");
        let target = pending.remove(pos);
        let omega_t = &model.subsets[target].selected;
        let mut features: Vec<usize> =
            matched.iter().flat_map(|&m| intersection(&model.subsets[m].selected, omega_t)).collect();
        features.sort_unstable();
        features.dedup();
        let fallback = features.is_empty();
        if fallback {
            if !config.allow_fallback {
                return Err(Error::NoOverlap);
            }
            features = omega_t.clone();
        }
        let train: Vec<usize> = (0..x.nrows()).filter(|&i| known[i].is_some()).collect();
        let train_labels: Vec<usize> = known.iter().map(|k| k.unwrap_or(0)).collect();
        let step_seed = rng::derive_seed(config.seed, "ttl-step", state.log.len() as u64);
        let predict: alloc::boxed::Box<dyn Fn(&[f64]) -> usize> = match &config.classifier {
            TransferClassifier::Svm(spec) => {
                match train_tuned_svm(x, &train, &train_labels, &features, spec.as_ref(), step_seed) {
                    Ok((svm, _)) => alloc::boxed::Box::new(move |row| predict_svm(&svm, row)),
                    // A one-class labeled pool can only propagate that class.
                    Err(Error::SingleClass) => {
                        let only = train_labels[train[0]];
                        alloc::boxed::Box::new(move |_| only)
                    }
                    Err(e) => return Err(e),
                }
            }
            TransferClassifier::NearestNeighbor => {
                let nn = NearestNeighbor::fit(x, &train, &train_labels, &features)?;
                alloc::boxed::Box::new(move |row| nn.predict(row))
            }
        };
        for &i in &members[target] {
            let label = predict(x.row(i));
            state.inferred_labels[i] = Some(label);
            known[i] = Some(label);
        }
        state.labeled_ids.push(target);
        state.log.push(PropagationStep { target, matched, jaccard, features, fallback, n_training: train.len() });
    }
    let target_samples: Vec<usize> = (0..x.nrows()).filter(|&i| state.inferred_labels[i].is_some()).collect();
    let predictions = target_samples.iter().map(|&i| state.inferred_labels[i].expect("filtered")).collect();
    Ok(TransferOutcome { target_samples, predictions, state })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn jaccard_examples() {
        assert_eq!(jaccard_index(&[1, 2, 3], &[2, 3, 4]).unwrap(), 0.5);
        assert_eq!(jaccard_index(&[4, 1], &[1, 4]).unwrap(), 1.0);
        assert_eq!(jaccard_index(&[0], &[1]).unwrap(), 0.0);
        assert_eq!(jaccard_index(&[], &[1]), Err(Error::EmptyInput));
    }
}
