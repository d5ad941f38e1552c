use adr_core::learners::{
    grid_search_cv, majority_vote, predict_svm, predict_tree, train_cart, train_svm_smo, GridSearchSpec, SvmParams,
    TreeConfig,
};
use adr_core::Matrix;
use proptest::prelude::*;

fn labelled(p: usize) -> impl Strategy<Value = (Matrix, Vec<usize>)> {
    (prop::collection::vec(-3.0f64..3.0, p * 2), prop::collection::vec(0usize..3, p))
        .prop_map(move |(v, l)| (Matrix::from_vec(p, 2, v).unwrap(), l))
}

fn train_accuracy(x: &Matrix, labels: &[usize], depth: usize) -> f64 {
    let rows: Vec<usize> = (0..x.nrows()).collect();
    let config = TreeConfig { max_depth: depth, min_leaf: 1, max_features: None };
    let tree = train_cart(x, &rows, labels, &[0, 1], config, 0).unwrap();
    assert!(tree.depth() <= depth);
    rows.iter().filter(|&&r| predict_tree(&tree, x.row(r)) == labels[r]).count() as f64 / rows.len() as f64
}

proptest! {
    #[test]
    fn deeper_trees_fit_training_data_at_least_as_well((x, labels) in labelled(30)) {
        let mut last = 0.0;
        for depth in 0..6 {
            let acc = train_accuracy(&x, &labels, depth);
            prop_assert!(acc >= last - 1e-12, "depth {depth}: {acc} < {last}");
            last = acc;
        }
    }

    #[test]
    fn vote_ignores_order(mut votes in prop::collection::vec(0usize..4, 1..30), seed in any::<u64>()) {
        let before = majority_vote(&votes).unwrap();
        let n = votes.len();
        for i in 0..n {
            votes.swap(i, (seed as usize).wrapping_add(i * 7919) % n);
        }
        prop_assert_eq!(majority_vote(&votes).unwrap(), before);
    }

    #[test]
    fn strict_majority_wins(winner in 0usize..5, others in prop::collection::vec(0usize..5, 0..20)) {
        let mut votes: Vec<usize> = vec![winner; others.len() + 1];
        votes.extend(&others);
        prop_assert_eq!(majority_vote(&votes).unwrap(), winner);
    }
}

#[test]
fn vote_examples() {
    assert_eq!(majority_vote(&[0, 0, 1]).unwrap(), 0);
    assert_eq!(majority_vote(&[0, 1]).unwrap(), 0);
    let mut votes = vec![2; 51];
    votes.extend(vec![0; 25]);
    votes.extend(vec![1; 25]);
    assert_eq!(majority_vote(&votes).unwrap(), 2);
    assert!(majority_vote(&[]).is_err());
}

#[test]
fn threshold_goes_right_and_training_rows_are_reproduced() {
    let x = Matrix::from_rows(&[[1.0], [2.0], [3.0], [4.0]]).unwrap();
    let labels = [0, 0, 1, 1];
    let tree = train_cart(&x, &[0, 1, 2, 3], &labels, &[0], TreeConfig::default(), 0).unwrap();
    assert_eq!(tree.root_split(), Some((0, 2.5)));
    assert_eq!(predict_tree(&tree, &[2.5]), 1);
    for r in 0..4 {
        assert_eq!(predict_tree(&tree, x.row(r)), labels[r]);
    }
}

fn ring(p: usize) -> (Matrix, Vec<usize>) {
    let x = Matrix::from_fn(p, 2, |i, j| {
        let angle = i as f64 * 2.399;
        let radius = if i % 2 == 0 { 1.0 } else { 3.0 };
        if j == 0 {
            radius * angle.cos()
        } else {
            radius * angle.sin()
        }
    });
    (x, (0..p).map(|i| i % 2).collect())
}

#[test]
fn duplicating_the_training_set_keeps_decision_signs() {
    let (x, labels) = ring(30);
    let rows: Vec<usize> = (0..30).collect();
    let twice: Vec<usize> = rows.iter().chain(&rows).copied().collect();
    let params = SvmParams::new(10.0, 0.5);
    let once = train_svm_smo(&x, &rows, &labels, &[0, 1], params).unwrap();
    let doubled = train_svm_smo(&x, &twice, &labels, &[0, 1], params).unwrap();
    for i in 0..40 {
        let probe = [(i as f64 * 0.37).sin() * 3.5, (i as f64 * 0.91).cos() * 3.5];
        let (a, b) = (once.decision_value(0, &probe), doubled.decision_value(0, &probe));
        if a.abs() > 1e-3 {
            assert_eq!(a > 0.0, b > 0.0, "probe {probe:?}: {a} vs {b}");
        }
    }
    for &r in &rows {
        assert_eq!(predict_svm(&doubled, x.row(r)), labels[r]);
    }
}

#[test]
fn separable_data_reaches_perfect_cross_validation() {
    let x = Matrix::from_fn(40, 2, |i, j| {
        let side = if i < 20 { -2.0 } else { 2.0 };
        if j == 0 {
            side + 0.05 * (i % 7) as f64
        } else {
            (i % 5) as f64 * 0.1
        }
    });
    let labels: Vec<usize> = (0..40).map(|i| usize::from(i >= 20)).collect();
    let rows: Vec<usize> = (0..40).collect();
    let spec = GridSearchSpec::standard(2);
    let best = grid_search_cv(&x, &rows, &labels, &[0, 1], &spec, 3).unwrap();
    assert_eq!(best.accuracy, 1.0);
    let refit = train_svm_smo(&x, &rows, &labels, &[0, 1], SvmParams::new(best.c, best.gamma)).unwrap();
    assert!(rows.iter().all(|&r| predict_svm(&refit, x.row(r)) == labels[r]));
}

#[test]
fn single_point_grid_is_returned() {
    let (x, labels) = ring(20);
    let rows: Vec<usize> = (0..20).collect();
    let spec = GridSearchSpec { c_grid: vec![3.0], gamma_grid: vec![0.7], folds: 2 };
    let best = grid_search_cv(&x, &rows, &labels, &[0, 1], &spec, 0).unwrap();
    assert_eq!((best.c, best.gamma), (3.0, 0.7));
}
