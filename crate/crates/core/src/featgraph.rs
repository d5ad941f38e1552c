//! Feature graphs: vertices are features, edge weights are feature
//! similarities. Provides the per-supersample Gaussian-kernel graph, the
//! global mutual-information graph, their normalized Laplacians, and the
//! RatioCut / trace-form functionals used as spectral oracles.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::dataset::DataMatrix;
use crate::math::{abs, exp, floor, ln, sq_dist, sqrt};
use crate::{Error, Matrix, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureGraph {
    weights: Matrix,
    degree: Vec<f64>,
    normalized_laplacian: Matrix,
}

impl FeatureGraph {
    /// Builds the graph from a symmetric nonnegative weight matrix; the
    /// diagonal is forced to zero.
    pub fn from_weights(mut weights: Matrix) -> Result<Self> {
        if !weights.is_square() {
            return Err(Error::DimensionMismatch { expected: weights.nrows(), found: weights.ncols() });
        }
        let n = weights.nrows();
        if weights.max_asymmetry() > 1e-12 {
            return Err(Error::NotSymmetric);
        }
        for i in 0..n {
            weights[(i, i)] = 0.0;
            for j in 0..n {
                let w = weights[(i, j)];
                if !w.is_finite() {
                    return Err(Error::NonFinite { row: i, col: j });
                }
                if w < 0.0 {
                    return Err(Error::InvalidArgument(format!("negative weight {w} at ({i}, {j})")));
                }
            }
        }
        let degree: Vec<f64> = (0..n).map(|i| weights.row(i).iter().sum()).collect();
        // Isolated vertices get D^{-1/2} = 0, i.e. an identity row in L̄.
        let inv_sqrt: Vec<f64> = degree.iter().map(|&d| if d > 0.0 { 1.0 / sqrt(d) } else { 0.0 }).collect();
        let normalized_laplacian = Matrix::from_fn(n, n, |i, j| {
            let id = if i == j { 1.0 } else { 0.0 };
            id - inv_sqrt[i] * weights[(i, j)] * inv_sqrt[j]
        });
        Ok(FeatureGraph { weights, degree, normalized_laplacian })
    }

    pub fn n_vertices(&self) -> usize {
        self.degree.len()
    }

    pub fn weights(&self) -> &Matrix {
        &self.weights
    }

    pub fn degree(&self) -> &[f64] {
        &self.degree
    }

    /// `I − D^{-1/2} W D^{-1/2}`.
    pub fn normalized_laplacian(&self) -> &Matrix {
        &self.normalized_laplacian
    }

    /// Unnormalized Laplacian `D − W`.
    pub fn laplacian(&self) -> Matrix {
        let n = self.n_vertices();
        Matrix::from_fn(n, n, |i, j| if i == j { self.degree[i] } else { -self.weights[(i, j)] })
    }
}

/// Width of the Gaussian kernel.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum Bandwidth {
    Fixed(f64),
    /// Median of the nonzero pairwise squared column distances.
    MedianSquaredDistance,
    /// Median of the nonzero pairwise column distances.
    #[default]
    MedianDistance,
}

/// The GK graph together with the width actually used.
#[derive(Debug, Clone)]
pub struct KernelGraph {
    pub graph: FeatureGraph,
    pub sigma: f64,
    /// Set when the median heuristic was undefined and `sigma = 1` was used.
    pub sigma_fallback: bool,
}

/// `exp(−‖x_{·a} − x_{·b}‖² / (2σ))` over the given rows only.
pub fn gaussian_kernel_graph(data: &DataMatrix, rows: &[usize], bandwidth: Bandwidth) -> Result<KernelGraph> {
    if rows.is_empty() {
        return Err(Error::EmptyInput);
    }
    let x = data.values();
    if let Some(&r) = rows.iter().find(|&&r| r >= x.nrows()) {
        return Err(Error::InvalidArgument(format!("row {r} out of range")));
    }
    let n = x.ncols();
    // Columns of the supersample, contiguous.
    let cols: Vec<Vec<f64>> = (0..n).map(|j| rows.iter().map(|&r| x[(r, j)]).collect()).collect();
    let mut d2 = Matrix::zeros(n, n);
    for a in 0..n {
        for b in (a + 1)..n {
            let d = sq_dist(&cols[a], &cols[b]);
            d2[(a, b)] = d;
            d2[(b, a)] = d;
        }
    }
    let (sigma, sigma_fallback) = match bandwidth {
        Bandwidth::Fixed(s) => {
            if !(s > 0.0) || !s.is_finite() {
                return Err(Error::InvalidArgument(format!("sigma must be positive, got {s}")));
            }
            (s, false)
        }
        Bandwidth::MedianSquaredDistance | Bandwidth::MedianDistance => {
            let mut nz: Vec<f64> = Vec::new();
            for a in 0..n {
                for b in (a + 1)..n {
                    if d2[(a, b)] > 0.0 {
                        nz.push(if bandwidth == Bandwidth::MedianDistance { sqrt(d2[(a, b)]) } else { d2[(a, b)] });
                    }
                }
            }
            match median(&mut nz) {
                Some(m) => (m, false),
                None => {
                    log::warn!("all pairwise feature distances are zero; using sigma = 1");
                    (1.0, true)
                }
            }
        }
    };
    let w = Matrix::from_fn(n, n, |a, b| if a == b { 0.0 } else { exp(-d2[(a, b)] / (2.0 * sigma)) });
    Ok(KernelGraph { graph: FeatureGraph::from_weights(w)?, sigma, sigma_fallback })
}

fn median(v: &mut [f64]) -> Option<f64> {
    if v.is_empty() {
        return None;
    }
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    Some(if v.len() % 2 == 1 { v[m] } else { 0.5 * (v[m - 1] + v[m]) })
}

/// Default bin count `min(16, floor(sqrt(P)))`.
pub fn default_bins(n_samples: usize) -> usize {
    (floor(sqrt(n_samples as f64)) as usize).min(16)
}

/// Equal-frequency bin of every value; tied values share the bin of their
/// smallest rank.
pub fn quantile_bins(values: &[f64], bins: usize) -> Vec<usize> {
    let p = values.len();
    let mut order: Vec<usize> = (0..p).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]).then(a.cmp(&b)));
    let mut out = vec![0; p];
    let mut rank = 0;
    for (pos, &i) in order.iter().enumerate() {
        if pos == 0 || values[i] != values[order[pos - 1]] {
            rank = pos;
        }
        out[i] = rank * bins / p;
    }
    out
}

/// Plug-in mutual information (nats) of two binned columns.
pub fn binned_mutual_information(a: &[usize], b: &[usize], bins: usize) -> f64 {
    let p = a.len() as f64;
    let mut joint = vec![0usize; bins * bins];
    let mut ma = vec![0usize; bins];
    let mut mb = vec![0usize; bins];
    for (&x, &y) in a.iter().zip(b) {
        joint[x * bins + y] += 1;
        ma[x] += 1;
        mb[y] += 1;
    }
    let mut mi = 0.0;
    for x in 0..bins {
        for y in 0..bins {
            let c = joint[x * bins + y];
            if c > 0 {
                let pxy = c as f64 / p;
                mi += pxy * ln(pxy * p * p / (ma[x] as f64 * mb[y] as f64));
            }
        }
    }
    mi.max(0.0)
}

/// Mutual-information feature graph over all samples.
pub fn mutual_information_graph(data: &DataMatrix, bins: usize) -> Result<FeatureGraph> {
    let x = data.values();
    let p = x.nrows();
    if bins < 2 {
        return Err(Error::InvalidArgument(format!("bins = {bins} must be at least 2")));
    }
    if p < bins {
        return Err(Error::InvalidArgument(format!("P = {p} is smaller than bins = {bins}")));
    }
    let n = x.ncols();
    let binned: Vec<Vec<usize>> = (0..n).map(|j| quantile_bins(&x.column(j), bins)).collect();
    let mut w = Matrix::zeros(n, n);
    for a in 0..n {
        for b in (a + 1)..n {
            let mi = binned_mutual_information(&binned[a], &binned[b], bins);
            w[(a, b)] = mi;
            w[(b, a)] = mi;
        }
    }
    FeatureGraph::from_weights(w)
}

fn check_partition(n: usize, parts: &[Vec<usize>]) -> Result<()> {
    let mut seen = vec![false; n];
    for (k, part) in parts.iter().enumerate() {
        if part.is_empty() {
            return Err(Error::InvalidPartition(format!("part {k} is empty")));
        }
        for &v in part {
            if v >= n {
                return Err(Error::InvalidPartition(format!("vertex {v} out of range")));
            }
            if seen[v] {
                return Err(Error::InvalidPartition(format!("vertex {v} appears twice")));
            }
            seen[v] = true;
        }
    }
    if let Some(v) = seen.iter().position(|s| !s) {
        return Err(Error::InvalidPartition(format!("vertex {v} is not covered")));
    }
    Ok(())
}

/// `Σ_κ ζ(C_κ, C̄_κ) / |C_κ|`, with ζ the total weight crossing the cut.
///
/// This is the convention under which RatioCut equals `Tr(Hᵀ L H)` for the
/// scaled indicator matrix of the partition.
pub fn ratio_cut(graph: &FeatureGraph, parts: &[Vec<usize>]) -> Result<f64> {
    let n = graph.n_vertices();
    check_partition(n, parts)?;
    let mut part_of = vec![0; n];
    for (k, part) in parts.iter().enumerate() {
        for &v in part {
            part_of[v] = k;
        }
    }
    let w = graph.weights();
    let mut total = 0.0;
    for (k, part) in parts.iter().enumerate() {
        let mut cut = 0.0;
        for &i in part {
            for j in 0..n {
                if part_of[j] != k {
                    cut += w[(i, j)];
                }
            }
        }
        total += cut / part.len() as f64;
    }
    Ok(total)
}

/// Indicator matrix with `h_{nκ} = 1/√|C_κ|` for `n ∈ C_κ`.
pub fn indicator_matrix(n: usize, parts: &[Vec<usize>]) -> Result<Matrix> {
    check_partition(n, parts)?;
    let mut h = Matrix::zeros(n, parts.len());
    for (k, part) in parts.iter().enumerate() {
        let v = 1.0 / sqrt(part.len() as f64);
        for &i in part {
            h[(i, k)] = v;
        }
    }
    Ok(h)
}

/// `Tr(Hᵀ L H)` for column-orthonormal `H`.
pub fn trace_form(laplacian: &Matrix, h: &Matrix) -> Result<f64> {
    if laplacian.nrows() != h.nrows() || !laplacian.is_square() {
        return Err(Error::DimensionMismatch { expected: laplacian.nrows(), found: h.nrows() });
    }
    let gram = h.transpose().matmul(h)?;
    let k = gram.nrows();
    for i in 0..k {
        for j in 0..k {
            let target = if i == j { 1.0 } else { 0.0 };
            if abs(gram[(i, j)] - target) > 1e-10 {
                return Err(Error::InvalidArgument("H columns are not orthonormal".into()));
            }
        }
    }
    Ok(laplacian.congruence(h)?.trace())
}

/// Exhaustive minimum-RatioCut bipartition (vertex 0 kept in the first part).
pub fn min_ratio_cut_bipartition(graph: &FeatureGraph) -> Result<(f64, [Vec<usize>; 2])> {
    let n = graph.n_vertices();
    if !(2..=24).contains(&n) {
        return Err(Error::InvalidArgument(format!("exhaustive bipartition needs 2 <= N <= 24, got {n}")));
    }
    let mut best: Option<(f64, [Vec<usize>; 2])> = None;
    for mask in 1u32..(1u32 << (n - 1)) {
        // Bit v set: vertex v + 1 goes to the second part.
        let second: Vec<usize> = (1..n).filter(|v| mask & (1 << (v - 1)) != 0).collect();
        let first: Vec<usize> = (0..n).filter(|v| *v == 0 || mask & (1 << (v - 1)) == 0).collect();
        let parts = [first, second];
        let rc = ratio_cut(graph, &parts)?;
        if best.as_ref().is_none_or(|(b, _)| rc < *b) {
            best = Some((rc, parts));
        }
    }
    Ok(best.expect("n >= 2 gives at least one bipartition"))
}
