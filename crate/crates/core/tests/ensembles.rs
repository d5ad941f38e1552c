use adr_core::adr::{AdrModel, FeatureSubset, Metric};
use adr_core::dataset::{stratified_split, DataMatrix, LabelVector};
use adr_core::ensembles::{
    overall_accuracy, predict_adr_el, predict_adr_svm, train_adr_el, train_adr_svm, train_random_forest,
    train_tuned_svm,
};
use adr_core::learners::{predict_svm, predict_tree, TreeConfig};
use adr_core::partition::SupersamplePartition;
use adr_core::Matrix;

/// Three supersamples of 20 rows, five features; the class shows in feature 0.
fn dataset() -> (DataMatrix, LabelVector, Vec<usize>) {
    let x = Matrix::from_fn(60, 5, |i, j| {
        let class = (i % 2) as f64;
        let wobble = ((i * 31 + j * 17) % 13) as f64 / 13.0 - 0.5;
        if j == 0 {
            2.0 * class + wobble
        } else {
            wobble + (i / 20) as f64
        }
    });
    let labels = LabelVector::from_labels((0..60).map(|i| i % 2).collect());
    (DataMatrix::single_modality(x).unwrap(), labels, (0..60).map(|i| i / 20).collect())
}

fn model(assignment: Vec<usize>, subsets: &[&[usize]], n_features: usize) -> AdrModel {
    AdrModel {
        metric: Metric::Adr,
        partition: SupersamplePartition::new(assignment).unwrap(),
        subsets: subsets
            .iter()
            .enumerate()
            .map(|(m, s)| FeatureSubset::new(m, s.to_vec(), n_features).unwrap())
            .collect(),
        embeddings: Vec::new(),
        diagnostics: Vec::new(),
    }
}

#[test]
fn lambda_per_subset_gives_lambda_times_s_trees() {
    let (data, labels, assignment) = dataset();
    let m = model(assignment, &[&[0, 1], &[0, 2], &[3, 4]], 5);
    let train: Vec<usize> = (0..60).step_by(2).chain((1..60).step_by(2)).collect();
    let e = train_adr_el(&data, &labels, &train, &m, 10, TreeConfig::default(), 1).unwrap();
    assert_eq!(e.len(), 30);
    for (s, subset) in m.subsets.iter().enumerate() {
        let trees: Vec<_> = e.trees.iter().filter(|t| t.subset == *subset).collect();
        assert_eq!(trees.len(), 10, "subset {s}");
        assert!(trees.iter().all(|t| t.tree.split_features().iter().all(|f| subset.selected.contains(f))));
    }
}

#[test]
fn single_tree_ensemble_predicts_like_its_tree() {
    let (data, labels, _) = dataset();
    let m = model(vec![0; 60], &[&[0, 3]], 5);
    let rows: Vec<usize> = (0..60).collect();
    let e = train_adr_el(&data, &labels, &rows[..40], &m, 1, TreeConfig::default(), 4).unwrap();
    assert_eq!(e.len(), 1);
    let direct: Vec<usize> = rows.iter().map(|&r| predict_tree(&e.trees[0].tree, data.values().row(r))).collect();
    assert_eq!(predict_adr_el(&e, data.values(), &rows), direct);
}

#[test]
fn forest_has_the_requested_size() {
    let (data, labels, _) = dataset();
    let rows: Vec<usize> = (0..60).collect();
    let f = train_random_forest(&data, &labels, &rows, 7, TreeConfig::default(), 2).unwrap();
    assert_eq!(f.len(), 7);
    assert!(train_random_forest(&data, &labels, &rows, 0, TreeConfig::default(), 2).is_err());
}

#[test]
fn one_supersample_data_ensemble_is_one_svm() {
    let (data, labels, _) = dataset();
    let m = model(vec![0; 60], &[&[0, 2]], 5);
    let split = stratified_split(&labels, 0.5, 9).unwrap();
    let e = train_adr_svm(&data, &labels, &split.train, &m, None, 5).unwrap();
    let (plain, _) = train_tuned_svm(data.values(), &split.train, labels.as_slice(), &[0, 2], None, 5).unwrap();
    let ours = predict_adr_svm(&e, data.values(), &split.test).unwrap();
    let theirs: Vec<usize> = split.test.iter().map(|&r| predict_svm(&plain, data.values().row(r))).collect();
    assert_eq!(ours, theirs);
}

#[test]
fn identical_subsets_share_one_model() {
    let (data, labels, assignment) = dataset();
    let m = model(assignment, &[&[0, 1], &[0, 1], &[0, 4]], 5);
    let split = stratified_split(&labels, 0.5, 9).unwrap();
    let e = train_adr_svm(&data, &labels, &split.train, &m, None, 5).unwrap();
    assert_eq!(e.svms[0], e.svms[1]);
    let acc = overall_accuracy(
        &predict_adr_svm(&e, data.values(), &split.test).unwrap(),
        &split.test.iter().map(|&r| labels.as_slice()[r]).collect::<Vec<_>>(),
    )
    .unwrap();
    assert!(acc > 0.9, "accuracy {acc}");
}

#[test]
fn accuracy_rejects_bad_lengths() {
    assert_eq!(overall_accuracy(&[1, 0, 1], &[1, 1, 1]).unwrap(), 2.0 / 3.0);
    assert!(overall_accuracy(&[1], &[1, 0]).is_err());
    assert!(overall_accuracy(&[], &[]).is_err());
}
