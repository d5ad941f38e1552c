//! The ADR feature-selection pipeline and its single-metric baselines.
//!
//! For every supersample the local GK Laplacian and the global MI Laplacian
//! are jointly diagonalized; kneedle on the ascending joint spectrum gives
//! `K_m`, the first `K_m` joint eigenvectors embed the features, k-means
//! groups them and each group's medoid is kept.

use alloc::format;
use alloc::vec::Vec;

use crate::dataset::DataMatrix;
use crate::featgraph::{self, Bandwidth};
use crate::jointdiag::{self, JointBasis};
use crate::kmeans::{distinct_rows, kmeans, KMeansResult};
use crate::kneedle::{kneedle_select_k, DEFAULT_SENSITIVITY};
use crate::math::{sq_dist, sqrt};
use crate::partition::SupersamplePartition;
use crate::rng;
use crate::{Error, Matrix, Result};

/// Selected features `Ω_m` of one supersample, ascending 0-based indices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FeatureSubset {
    pub supersample_id: usize,
    pub selected: Vec<usize>,
    pub k: usize,
}

impl FeatureSubset {
    pub fn new(supersample_id: usize, mut selected: Vec<usize>, n_features: usize) -> Result<Self> {
        selected.sort_unstable();
        let len = selected.len();
        selected.dedup();
        if selected.len() != len {
            return Err(Error::InvalidArgument("feature subset has duplicates".into()));
        }
        if selected.is_empty() {
            return Err(Error::InvalidArgument("feature subset is empty".into()));
        }
        if let Some(&f) = selected.iter().find(|&&f| f >= n_features) {
            return Err(Error::InvalidArgument(format!("feature {f} out of range 0..{n_features}")));
        }
        Ok(FeatureSubset { supersample_id, k: selected.len(), selected })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Metric {
    /// Joint diagonalization of the GK and MI Laplacians.
    #[default]
    Adr,
    Gk,
    Mi,
}

impl Metric {
    pub fn name(self) -> &'static str {
        match self {
            Metric::Adr => "adr",
            Metric::Gk => "gk",
            Metric::Mi => "mi",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AdrConfig {
    pub bandwidth: Bandwidth,
    /// MI bins; `None` uses `featgraph::default_bins(P)`.
    pub bins: Option<usize>,
    pub sensitivity: f64,
    /// Joint diagonalization stops once its largest pair step is below this.
    pub tol: f64,
    pub max_iter: usize,
    pub seed: u64,
}

impl Default for AdrConfig {
    fn default() -> Self {
        AdrConfig {
            bandwidth: Bandwidth::default(),
            bins: None,
            sensitivity: DEFAULT_SENSITIVITY,
            tol: jointdiag::DEFAULT_TOL,
            max_iter: jointdiag::DEFAULT_MAX_ITER,
            seed: 0,
        }
    }
}

/// What the selection saw for one supersample.
#[derive(Debug, Clone, PartialEq)]
pub struct SupersampleDiagnostics {
    /// Ascending spectrum handed to kneedle.
    pub spectrum: Vec<f64>,
    pub diag_gk: Vec<f64>,
    pub diag_mi: Vec<f64>,
    /// GK width, when a GK graph was built.
    pub sigma: Option<f64>,
    pub sigma_fallback: bool,
    /// Leading spectrum entries at or below the near-null threshold.
    pub null_count: usize,
    pub criterion: Option<f64>,
    pub iterations: usize,
    /// Kneedle result before capping at the number of distinct embedded rows.
    pub kneedle_k: usize,
}

#[derive(Debug, Clone)]
pub struct AdrModel {
    pub metric: Metric,
    pub partition: SupersamplePartition,
    pub subsets: Vec<FeatureSubset>,
    /// `N × K_m` feature embedding per supersample.
    pub embeddings: Vec<Matrix>,
    pub diagnostics: Vec<SupersampleDiagnostics>,
}

impl AdrModel {
    /// `Ω` of the supersample holding `sample`.
    pub fn subset_of_sample(&self, sample: usize) -> &FeatureSubset {
        &self.subsets[self.partition.assignment()[sample]]
    }
}

/// Distances closer than this count as ties, so exact feature copies whose
/// embedded rows differ only by rounding resolve to the lowest index.
const MEDOID_TIE_TOL: f64 = 1e-9;

/// The medoid feature of every cluster: the row nearest its centroid, lowest
/// index on ties.
pub fn select_medoids(
    supersample_id: usize,
    embedding: &Matrix,
    assignment: &[usize],
    centroids: &Matrix,
) -> Result<FeatureSubset> {
    if assignment.len() != embedding.nrows() {
        return Err(Error::DimensionMismatch { expected: embedding.nrows(), found: assignment.len() });
    }
    let mut selected = Vec::with_capacity(centroids.nrows());
    for c in 0..centroids.nrows() {
        let mut best: Option<(usize, f64)> = None;
        for (f, _) in assignment.iter().enumerate().filter(|(_, &a)| a == c) {
            let d = sqrt(sq_dist(embedding.row(f), centroids.row(c)));
            if best.is_none_or(|(_, bd)| d < bd - MEDOID_TIE_TOL) {
                best = Some((f, d));
            }
        }
        let (f, _) = best.ok_or_else(|| Error::InvalidPartition(format!("cluster {c} is empty")))?;
        selected.push(f);
    }
    FeatureSubset::new(supersample_id, selected, embedding.nrows())
}

/// Kneedle, embedding, k-means and medoids on an ascending spectrum and the
/// matching basis columns.
fn select_from_spectrum(
    supersample_id: usize,
    spectrum: &[f64],
    basis: &Matrix,
    config: &AdrConfig,
) -> Result<(FeatureSubset, Matrix, usize)> {
    let n = spectrum.len();
    // Kneedle needs three points; below that no knee exists and every
    // feature is kept.
    let kneedle_k = if n >= 3 { kneedle_select_k(spectrum, config.sensitivity)? } else { n };
    // k-means needs at least K distinct embedded features.
    let mut k = kneedle_k;
    let mut embedding = basis.select_columns(&(0..k).collect::<Vec<_>>());
    while k > 1 && distinct_rows(&embedding) < k {
        k -= 1;
        embedding = basis.select_columns(&(0..k).collect::<Vec<_>>());
    }
    if k < kneedle_k {
        log::debug!("supersample {supersample_id}: K capped from {kneedle_k} to {k}");
    }
    let seed = rng::derive_seed(config.seed, "adr-kmeans", supersample_id as u64);
    let KMeansResult { assignment, centroids, .. } = kmeans(&embedding, k, seed)?;
    let subset = select_medoids(supersample_id, &embedding, &assignment, &centroids)?;
    Ok((subset, embedding, kneedle_k))
}

fn check_inputs(data: &DataMatrix, partition: &SupersamplePartition) -> Result<()> {
    if partition.n_samples() != data.n_samples() {
        return Err(Error::DimensionMismatch { expected: data.n_samples(), found: partition.n_samples() });
    }
    Ok(())
}

fn mi_laplacian(data: &DataMatrix, config: &AdrConfig) -> Result<Matrix> {
    let bins = config.bins.unwrap_or_else(|| featgraph::default_bins(data.n_samples()));
    Ok(featgraph::mutual_information_graph(data, bins)?.normalized_laplacian().clone())
}

/// Joint eigenvalue sums at or below `10 · 2ε` count as null.
fn null_count(basis: &JointBasis) -> usize {
    let threshold = 10.0 * (basis.eps_a + basis.eps_b);
    basis.joint_spectrum().iter().take_while(|&&s| s <= threshold).count()
}

/// ADR on one supersample with a precomputed global MI Laplacian.
pub fn select_supersample(
    data: &DataMatrix,
    partition: &SupersamplePartition,
    supersample_id: usize,
    mi_laplacian: &Matrix,
    config: &AdrConfig,
) -> Result<(FeatureSubset, Matrix, SupersampleDiagnostics)> {
    let rows = partition.members(supersample_id);
    let kg = featgraph::gaussian_kernel_graph(data, &rows, config.bandwidth)?;
    let jb = jointdiag::joint_diagonalize(kg.graph.normalized_laplacian(), mi_laplacian, config.tol, config.max_iter)?;
    let spectrum = jb.joint_spectrum();
    let (subset, embedding, kneedle_k) = select_from_spectrum(supersample_id, &spectrum, &jb.basis, config)?;
    let diagnostics = SupersampleDiagnostics {
        null_count: null_count(&jb),
        spectrum,
        diag_gk: jb.diag_gk.clone(),
        diag_mi: jb.diag_mi.clone(),
        sigma: Some(kg.sigma),
        sigma_fallback: kg.sigma_fallback,
        criterion: Some(jb.criterion_value),
        iterations: jb.iterations,
        kneedle_k,
    };
    Ok((subset, embedding, diagnostics))
}

/// Full ADR selection over every supersample.
pub fn adr_select(data: &DataMatrix, partition: &SupersamplePartition, config: &AdrConfig) -> Result<AdrModel> {
    check_inputs(data, partition)?;
    let mi = mi_laplacian(data, config)?;
    adr_select_with_mi(data, partition, &mi, config)
}

pub fn adr_select_with_mi(
    data: &DataMatrix,
    partition: &SupersamplePartition,
    mi_laplacian: &Matrix,
    config: &AdrConfig,
) -> Result<AdrModel> {
    check_inputs(data, partition)?;
    let mut model = AdrModel {
        metric: Metric::Adr,
        partition: partition.clone(),
        subsets: Vec::new(),
        embeddings: Vec::new(),
        diagnostics: Vec::new(),
    };
    for m in 0..partition.n_supersamples() {
        let (subset, embedding, diag) = select_supersample(data, partition, m, mi_laplacian, config)?;
        model.subsets.push(subset);
        model.embeddings.push(embedding);
        model.diagnostics.push(diag);
    }
    Ok(model)
}

/// Spectral clustering of the features on a single Laplacian: the local GK
/// graph of each supersample, or the global MI graph shared by all.
pub fn single_metric_select(
    data: &DataMatrix,
    partition: &SupersamplePartition,
    metric: Metric,
    config: &AdrConfig,
) -> Result<AdrModel> {
    check_inputs(data, partition)?;
    if metric == Metric::Adr {
        return adr_select(data, partition, config);
    }
    let mi = if metric == Metric::Mi { Some(mi_laplacian(data, config)?) } else { None };
    let mut model = AdrModel {
        metric,
        partition: partition.clone(),
        subsets: Vec::new(),
        embeddings: Vec::new(),
        diagnostics: Vec::new(),
    };
    for m in 0..partition.n_supersamples() {
        let (laplacian, sigma, fallback) = match &mi {
            Some(l) => (l.clone(), None, false),
            None => {
                let kg = featgraph::gaussian_kernel_graph(data, &partition.members(m), config.bandwidth)?;
                (kg.graph.normalized_laplacian().clone(), Some(kg.sigma), kg.sigma_fallback)
            }
        };
        let eig = laplacian.symmetric_eigen()?;
        // Same kmeans stream for every supersample keeps the shared MI
        // spectrum mapping to one subset.
        let id_for_seed = if metric == Metric::Mi { 0 } else { m };
        let (mut subset, embedding, kneedle_k) = select_from_spectrum(id_for_seed, &eig.values, &eig.vectors, config)?;
        subset.supersample_id = m;
        let diag = laplacian.congruence(&eig.vectors)?.diagonal();
        let (diag_gk, diag_mi) = if metric == Metric::Gk { (diag, Vec::new()) } else { (Vec::new(), diag) };
        model.diagnostics.push(SupersampleDiagnostics {
            null_count: eig.values.iter().take_while(|&&v| v <= 1e-8).count(),
            spectrum: eig.values,
            diag_gk,
            diag_mi,
            sigma,
            sigma_fallback: fallback,
            criterion: None,
            iterations: 0,
            kneedle_k,
        });
        model.subsets.push(subset);
        model.embeddings.push(embedding);
    }
    Ok(model)
}
