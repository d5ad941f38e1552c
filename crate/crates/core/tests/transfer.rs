use adr_core::adr::{AdrModel, FeatureSubset, Metric};
use adr_core::ensembles::train_tuned_svm;
use adr_core::learners::predict_svm;
use adr_core::partition::SupersamplePartition;
use adr_core::transfer::{jaccard_index, make_domain_split, ttl_propagate, DomainSplit, TransferConfig};
use adr_core::Matrix;
use proptest::prelude::*;

fn model(assignment: Vec<usize>, subsets: &[Vec<usize>], n_features: usize) -> AdrModel {
    AdrModel {
        metric: Metric::Adr,
        partition: SupersamplePartition::new(assignment).unwrap(),
        subsets: subsets
            .iter()
            .enumerate()
            .map(|(m, s)| FeatureSubset::new(m, s.clone(), n_features).unwrap())
            .collect(),
        embeddings: Vec::new(),
        diagnostics: Vec::new(),
    }
}

/// `s` supersamples of 20 rows over 10 features; the class is the sign of
/// feature 0 and supersamples differ by an offset on feature 9.
fn separable(s: usize) -> (Matrix, Vec<usize>, Vec<usize>) {
    let p = 20 * s;
    let x = Matrix::from_fn(p, 10, |i, j| {
        let class = (i % 2) as f64 * 2.0 - 1.0;
        let wobble = ((i * 13 + j * 7) % 11) as f64 / 11.0;
        match j {
            0 => class * (1.0 + wobble),
            9 => (i / 20) as f64 * 5.0 + wobble,
            _ => wobble,
        }
    });
    (x, (0..p).map(|i| i % 2).collect(), (0..p).map(|i| i / 20).collect())
}

fn feature_set() -> impl Strategy<Value = Vec<usize>> {
    prop::collection::btree_set(0usize..12, 1..8).prop_map(|s| s.into_iter().collect())
}

proptest! {
    #[test]
    fn jaccard_is_a_bounded_symmetric_similarity(a in feature_set(), b in feature_set()) {
        let j = jaccard_index(&a, &b).unwrap();
        prop_assert!((0.0..=1.0).contains(&j));
        prop_assert_eq!(j, jaccard_index(&b, &a).unwrap());
        prop_assert_eq!(jaccard_index(&a, &a).unwrap(), 1.0);
        prop_assert_eq!(j == 1.0, a == b);
    }

    #[test]
    fn domain_split_is_a_cover_with_two_source_classes(fraction in 0.05f64..0.95, seed in any::<u64>()) {
        let (_, labels, assignment) = separable(5);
        let m = model(assignment, &vec![vec![0]; 5], 10);
        let split = make_domain_split(&m, &labels, fraction, seed).unwrap();
        let mut all: Vec<usize> = split.source_ids.iter().chain(&split.target_ids).copied().collect();
        all.sort_unstable();
        prop_assert_eq!(all, (0..5).collect::<Vec<_>>());
        prop_assert!(!split.target_ids.is_empty());
    }
}

#[test]
fn jaccard_examples() {
    assert_eq!(jaccard_index(&[1, 2, 3], &[2, 3, 4]).unwrap(), 0.5);
    assert_eq!(jaccard_index(&[1, 2], &[3]).unwrap(), 0.0);
}

#[test]
fn shared_subsets_on_separable_classes_transfer_perfectly() {
    let (x, labels, assignment) = separable(4);
    let m = model(assignment, &vec![vec![0, 3]; 4], 10);
    let split = DomainSplit { source_ids: vec![0], target_ids: vec![1, 2, 3], source_fraction: 0.25 };
    let out = ttl_propagate(&x, &labels, &m, &split, &TransferConfig::default()).unwrap();
    assert_eq!(out.target_samples, (20..80).collect::<Vec<_>>());
    let hits = out.target_samples.iter().zip(&out.predictions).filter(|(&i, &p)| labels[i] == p).count();
    assert_eq!(hits, 60);
}

#[test]
fn one_target_with_equal_subsets_is_train_on_source() {
    let (x, labels, assignment) = separable(2);
    let m = model(assignment, &[vec![0, 5], vec![0, 5]], 10);
    let split = DomainSplit { source_ids: vec![0], target_ids: vec![1], source_fraction: 0.5 };
    let config = TransferConfig::default();
    let out = ttl_propagate(&x, &labels, &m, &split, &config).unwrap();
    let source: Vec<usize> = (0..20).collect();
    let (svm, _) = train_tuned_svm(&x, &source, &labels, &[0, 5], None, config.seed).unwrap();
    let direct: Vec<usize> = (20..40).map(|r| predict_svm(&svm, x.row(r))).collect();
    assert_eq!(out.predictions, direct);
    assert_eq!(out.state.log.len(), 1);
    assert_eq!(out.state.log[0].jaccard, 1.0);
}

#[test]
fn closer_target_is_consumed_first() {
    let (x, labels, assignment) = separable(3);
    // Against the source {0..=8}: {0..=7} scores 8/9, {0, 9} scores 1/10.
    let subsets = [(0..9).collect(), vec![0, 9], (0..8).collect()];
    let m = model(assignment, &subsets, 10);
    let split = DomainSplit { source_ids: vec![0], target_ids: vec![1, 2], source_fraction: 1.0 / 3.0 };
    let out = ttl_propagate(&x, &labels, &m, &split, &TransferConfig::default()).unwrap();
    let order: Vec<usize> = out.state.log.iter().map(|s| s.target).collect();
    assert_eq!(order, vec![2, 1]);
    assert_eq!(out.state.labeled_ids, vec![0, 2, 1]);
    assert!((out.state.log[0].jaccard - 8.0 / 9.0).abs() < 1e-12);
}

#[test]
fn bad_splits_are_rejected() {
    let (x, labels, assignment) = separable(2);
    let m = model(assignment, &[vec![0], vec![0]], 10);
    let overlap = DomainSplit { source_ids: vec![0, 1], target_ids: vec![1], source_fraction: 0.5 };
    assert!(ttl_propagate(&x, &labels, &m, &overlap, &TransferConfig::default()).is_err());
    let one = model(vec![0; 40], &[vec![0]], 10);
    assert!(make_domain_split(&one, &labels, 0.5, 0).is_err());
}
