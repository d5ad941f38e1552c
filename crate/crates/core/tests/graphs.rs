use adr_core::dataset::DataMatrix;
use adr_core::featgraph::{
    gaussian_kernel_graph, indicator_matrix, min_ratio_cut_bipartition, ratio_cut, trace_form, Bandwidth, FeatureGraph,
};
use adr_core::Matrix;
use proptest::prelude::*;

fn graph_from(n: usize, upper: &[f64]) -> FeatureGraph {
    let mut w = Matrix::zeros(n, n);
    let mut k = 0;
    for i in 0..n {
        for j in i + 1..n {
            w[(i, j)] = upper[k];
            w[(j, i)] = upper[k];
            k += 1;
        }
    }
    FeatureGraph::from_weights(w).unwrap()
}

fn weighted_graph(n: usize) -> impl Strategy<Value = FeatureGraph> {
    prop::collection::vec(0.05f64..5.0, n * (n - 1) / 2).prop_map(move |u| graph_from(n, &u))
}

/// Labels in `0..k` with every label used at least once.
fn partition_of(n: usize, k: usize) -> impl Strategy<Value = Vec<Vec<usize>>> {
    prop::collection::vec(0..k, n)
        .prop_filter("all parts non-empty", move |l| (0..k).all(|c| l.contains(&c)))
        .prop_map(move |l| (0..k).map(|c| (0..n).filter(|&i| l[i] == c).collect()).collect())
}

proptest! {
    #[test]
    fn ratio_cut_equals_trace_form_on_unnormalized_laplacian(
        g in weighted_graph(6),
        parts in (2usize..=4).prop_flat_map(|k| partition_of(6, k)),
    ) {
        let h = indicator_matrix(6, &parts).unwrap();
        let rc = ratio_cut(&g, &parts).unwrap();
        let tf = trace_form(&g.laplacian(), &h).unwrap();
        prop_assert!((rc - tf).abs() < 1e-9, "ratio cut {rc} vs trace {tf}");
    }

    #[test]
    fn full_basis_trace_is_total_degree(g in weighted_graph(5)) {
        let tf = trace_form(&g.laplacian(), &Matrix::identity(5)).unwrap();
        let total: f64 = g.degree().iter().sum();
        prop_assert!((tf - total).abs() < 1e-9);
    }

    #[test]
    fn normalized_laplacian_spectrum_lies_in_zero_two(g in weighted_graph(6)) {
        let eig = g.normalized_laplacian().symmetric_eigen().unwrap();
        prop_assert!(eig.values.iter().all(|&v| v > -1e-9 && v < 2.0 + 1e-9));
        prop_assert!(eig.values[0].abs() < 1e-9);
    }

    #[test]
    fn exhaustive_bipartition_is_minimal(g in weighted_graph(5), parts in partition_of(5, 2)) {
        let (best, [a, b]) = min_ratio_cut_bipartition(&g).unwrap();
        prop_assert!(best <= ratio_cut(&g, &parts).unwrap() + 1e-12);
        prop_assert!((ratio_cut(&g, &[a, b]).unwrap() - best).abs() < 1e-12);
    }
}

#[test]
fn null_space_multiplicity_counts_components() {
    for blocks in 1..=4 {
        let n = 3 * blocks;
        let mut w = Matrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                if i != j && i / 3 == j / 3 {
                    w[(i, j)] = 1.0 + ((i + j) % 3) as f64;
                }
            }
        }
        let g = FeatureGraph::from_weights(w).unwrap();
        let eig = g.normalized_laplacian().symmetric_eigen().unwrap();
        let zeros = eig.values.iter().filter(|v| v.abs() < 1e-10).count();
        assert_eq!(zeros, blocks);
    }
}

#[test]
fn gaussian_kernel_on_copied_columns() {
    // Columns 0 and 1 are equal, column 2 sits at squared distance 1 from them.
    let x = Matrix::from_rows(&[[0.0, 0.0, 1.0], [1.0, 1.0, 1.0]]).unwrap();
    let data = DataMatrix::single_modality(x).unwrap();
    let kg = gaussian_kernel_graph(&data, &[0, 1], Bandwidth::Fixed(0.5)).unwrap();
    let w = kg.graph.weights();
    assert_eq!(w[(0, 1)], 1.0);
    assert!((w[(0, 2)] - (-1.0f64).exp()).abs() < 1e-12);
    assert_eq!(w[(0, 0)], 0.0);
}

#[test]
fn kernel_uses_only_the_given_rows() {
    let x = Matrix::from_rows(&[[0.0, 0.0], [5.0, -5.0]]).unwrap();
    let data = DataMatrix::single_modality(x).unwrap();
    let kg = gaussian_kernel_graph(&data, &[0], Bandwidth::Fixed(1.0)).unwrap();
    assert_eq!(kg.graph.weights()[(0, 1)], 1.0);
}
