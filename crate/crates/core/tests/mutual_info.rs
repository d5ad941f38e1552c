use adr_core::dataset::DataMatrix;
use adr_core::featgraph::{binned_mutual_information, default_bins, mutual_information_graph, quantile_bins};
use adr_core::Matrix;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};

fn column_pair(p: usize) -> impl Strategy<Value = (Vec<f64>, Vec<f64>)> {
    (prop::collection::vec(-10.0f64..10.0, p), prop::collection::vec(-10.0f64..10.0, p))
}

fn mi(a: &[f64], b: &[f64], bins: usize) -> f64 {
    binned_mutual_information(&quantile_bins(a, bins), &quantile_bins(b, bins), bins)
}

proptest! {
    #[test]
    fn information_is_nonnegative_and_symmetric((a, b) in column_pair(60), bins in 2usize..8) {
        let ab = mi(&a, &b, bins);
        prop_assert!(ab >= 0.0);
        prop_assert!((ab - mi(&b, &a, bins)).abs() < 1e-12);
        prop_assert!(ab <= (bins as f64).ln() + 1e-12);
    }

    #[test]
    fn strictly_increasing_transforms_change_nothing((a, b) in column_pair(60), bins in 2usize..8) {
        let warped: Vec<f64> = a.iter().map(|x| x.powi(3) + 2.0 * x).collect();
        prop_assert_eq!(quantile_bins(&a, bins), quantile_bins(&warped, bins));
        prop_assert_eq!(mi(&a, &b, bins).to_bits(), mi(&warped, &b, bins).to_bits());
    }

    #[test]
    fn bins_stay_in_range(a in prop::collection::vec(-5.0f64..5.0, 1..80), bins in 1usize..20) {
        prop_assert!(quantile_bins(&a, bins).iter().all(|&k| k < bins));
    }
}

#[test]
fn independent_columns_have_little_information() {
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
    let a: Vec<f64> = (0..2000).map(|_| rng.random::<f64>()).collect();
    let b: Vec<f64> = (0..2000).map(|_| rng.random::<f64>()).collect();
    assert!(mi(&a, &b, 8) < 0.05);
}

#[test]
fn graph_is_symmetric_with_zero_diagonal() {
    let x = Matrix::from_fn(40, 4, |i, j| ((i * (j + 3)) % 11) as f64 + 0.1 * j as f64);
    let g = mutual_information_graph(&DataMatrix::single_modality(x).unwrap(), default_bins(40)).unwrap();
    let w = g.weights();
    for i in 0..4 {
        assert_eq!(w[(i, i)], 0.0);
        for j in 0..4 {
            assert_eq!(w[(i, j)], w[(j, i)]);
            assert!(w[(i, j)] >= 0.0);
        }
    }
}

#[test]
fn default_bin_rule() {
    assert_eq!(default_bins(9), 3);
    assert_eq!(default_bins(200), 14);
    assert_eq!(default_bins(10_000), 16);
}
