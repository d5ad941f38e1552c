//! Seeded trials shared by the CLI and the acceptance harness.
//!
//! A trial is a pure function of `(RunConfig, seed)`. Seeds fan out over
//! rayon and come back in seed order, so aggregated numbers never depend on
//! scheduling.

use rayon::prelude::*;
use serde::Serialize;

use adr_core::adr::{single_metric_select, AdrModel, Metric};
use adr_core::datagen::{gen_multimodal, SynthData};
use adr_core::dataset::{stratified_split, zscore_normalize, DataMatrix};
use adr_core::ensembles::{
    overall_accuracy, predict_adr_el, predict_adr_svm, train_adr_el, train_adr_svm, train_random_forest,
    train_tuned_svm,
};
use adr_core::learners::predict_svm;
use adr_core::partition::{watershed_partition_with, SupersamplePartition};
use adr_core::transfer::{make_domain_split, ttl_propagate};

use crate::config::{DatasetKind, RunConfig};

/// Generated data, z-scored, with its watershed partition.
pub struct Prepared {
    pub synth: SynthData,
    pub z: DataMatrix,
    pub partition: SupersamplePartition,
}

pub fn prepare(config: &RunConfig, kind: DatasetKind, seed: u64) -> anyhow::Result<Prepared> {
    let spec = kind.spec(config.noise_for(kind), seed);
    let synth = gen_multimodal(&spec, config.spc_for(kind))?;
    let z = zscore_normalize(&synth.data)?;
    let partition = watershed_partition_with(z.values(), &config.watershed(z.n_samples()))?;
    Ok(Prepared { synth, z, partition })
}

pub fn fit(config: &RunConfig, prepared: &Prepared, metric: Metric, seed: u64) -> anyhow::Result<AdrModel> {
    Ok(single_metric_select(&prepared.z, &prepared.partition, metric, &config.adr(seed))?)
}

pub fn metric_from_name(name: &str) -> Option<Metric> {
    [Metric::Adr, Metric::Gk, Metric::Mi].into_iter().find(|m| m.name() == name)
}

/// Trees per subset for a total budget: `max(1, round(total / S))`.
pub fn lambda_for(config: &RunConfig, total_trees: usize, n_subsets: usize) -> usize {
    config.lambda.unwrap_or_else(|| ((total_trees as f64 / n_subsets.max(1) as f64).round() as usize).max(1))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Measurement {
    pub method: String,
    /// Tree budget or source fraction; absent when the method has no sweep.
    pub x: Option<f64>,
    pub accuracy: f64,
}

fn measure(method: impl Into<String>, x: Option<f64>, accuracy: f64) -> Measurement {
    Measurement { method: method.into(), x, accuracy }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Trial {
    pub seed: u64,
    pub n_supersamples: usize,
    /// Why the seed produced no measurements.
    pub skipped: Option<String>,
    pub measurements: Vec<Measurement>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SummaryRow {
    pub method: String,
    pub x: Option<f64>,
    pub mean: f64,
    /// Sample standard deviation over seeds; 0 for a single seed.
    pub std: f64,
    pub n: usize,
}

/// Mean and spread per `(method, x)`, in order of first appearance.
pub fn summarize(trials: &[Trial]) -> Vec<SummaryRow> {
    let mut keys: Vec<(String, Option<f64>)> = Vec::new();
    for m in trials.iter().flat_map(|t| &t.measurements) {
        let key = (m.method.clone(), m.x);
        if !keys.contains(&key) {
            keys.push(key);
        }
    }
    keys.into_iter()
        .map(|(method, x)| {
            let v: Vec<f64> = trials
                .iter()
                .flat_map(|t| &t.measurements)
                .filter(|m| m.method == method && m.x == x)
                .map(|m| m.accuracy)
                .collect();
            let n = v.len();
            let mean = v.iter().sum::<f64>() / n as f64;
            let std =
                if n > 1 { (v.iter().map(|a| (a - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt() } else { 0.0 };
            SummaryRow { method, x, mean, std, n }
        })
        .collect()
}

pub fn seeds(config: &RunConfig) -> Vec<u64> {
    (0..config.seeds as u64).map(|i| config.seed + i).collect()
}

/// Runs `trial` for every seed and keeps seed order.
pub fn run_seeds<T: Send>(
    config: &RunConfig,
    trial: impl Fn(&RunConfig, u64) -> anyhow::Result<T> + Sync,
) -> anyhow::Result<Vec<T>> {
    seeds(config).into_par_iter().map(|s| trial(config, s)).collect()
}

fn skipped(seed: u64, partition: &SupersamplePartition, reason: &str) -> Trial {
    Trial { seed, n_supersamples: partition.n_supersamples(), skipped: Some(reason.into()), measurements: Vec::new() }
}

/// Feature recovery on one seed of the standard dataset.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RecoveryTrial {
    pub seed: u64,
    pub n_supersamples: usize,
    /// Majority planted cluster of each supersample.
    pub cluster: Vec<usize>,
    /// Selected features per supersample, 0-based.
    pub subsets: Vec<Vec<usize>>,
    /// Every subset holds exactly one member of each group relevant to its
    /// supersample's cluster.
    pub recovered: bool,
}

pub fn majority_cluster(members: &[usize], truth_cluster: &[usize]) -> usize {
    let n = truth_cluster.iter().max().map_or(0, |m| m + 1);
    let mut counts = vec![0usize; n];
    for &i in members {
        counts[truth_cluster[i]] += 1;
    }
    // Lowest cluster id wins ties.
    let best = counts.iter().copied().max().unwrap_or(0);
    counts.iter().position(|&c| c == best).unwrap_or(0)
}

pub fn recovery_trial(config: &RunConfig, seed: u64) -> anyhow::Result<RecoveryTrial> {
    let prepared = prepare(config, config.dataset_or(DatasetKind::Standard), seed)?;
    let model = fit(config, &prepared, Metric::Adr, seed)?;
    let truth = &prepared.synth.truth;
    let mut cluster = Vec::new();
    let mut recovered = true;
    for (m, subset) in model.subsets.iter().enumerate() {
        let c = majority_cluster(&prepared.partition.members(m), &truth.cluster);
        cluster.push(c);
        recovered &= truth.relevance_map[c]
            .iter()
            .all(|&g| truth.groups[g].iter().filter(|f| subset.selected.contains(f)).count() == 1);
    }
    Ok(RecoveryTrial {
        seed,
        n_supersamples: prepared.partition.n_supersamples(),
        cluster,
        subsets: model.subsets.iter().map(|s| s.selected.clone()).collect(),
        recovered,
    })
}

const METRICS: [Metric; 3] = [Metric::Adr, Metric::Gk, Metric::Mi];

/// Tree ensembles and per-supersample SVMs on ADR, GK-only and MI-only
/// subsets of the standard dataset.
pub fn ablation_trial(config: &RunConfig, seed: u64) -> anyhow::Result<Trial> {
    let prepared = prepare(config, config.dataset_or(DatasetKind::Standard), seed)?;
    let (z, labels) = (&prepared.z, &prepared.synth.labels);
    let split = stratified_split(labels, config.train_fraction, seed)?;
    let truth: Vec<usize> = split.test.iter().map(|&i| labels.as_slice()[i]).collect();
    let mut measurements = Vec::new();
    for metric in METRICS {
        let model = fit(config, &prepared, metric, seed)?;
        for &total in &config.ablation_trees {
            let lambda = lambda_for(config, total, model.subsets.len());
            let el = train_adr_el(z, labels, &split.train, &model, lambda, config.tree(), seed)?;
            let acc = overall_accuracy(&predict_adr_el(&el, z.values(), &split.test), &truth)?;
            measurements.push(measure(format!("{}-el", metric.name()), Some(total as f64), acc));
        }
        let spec = config.grid_override(z.n_features());
        let svm = train_adr_svm(z, labels, &split.train, &model, spec.as_ref(), seed)?;
        let acc = overall_accuracy(&predict_adr_svm(&svm, z.values(), &split.test)?, &truth)?;
        measurements.push(measure(format!("{}-svm", metric.name()), None, acc));
    }
    Ok(Trial { seed, n_supersamples: prepared.partition.n_supersamples(), skipped: None, measurements })
}

/// ADR-EL against a random forest of the same total size.
pub fn ensemble_model_trial(config: &RunConfig, seed: u64) -> anyhow::Result<Trial> {
    let prepared = prepare(config, config.dataset_or(DatasetKind::Standard), seed)?;
    let (z, labels) = (&prepared.z, &prepared.synth.labels);
    let split = stratified_split(labels, config.train_fraction, seed)?;
    let truth: Vec<usize> = split.test.iter().map(|&i| labels.as_slice()[i]).collect();
    let model = fit(config, &prepared, Metric::Adr, seed)?;
    let mut measurements = Vec::new();
    for &total in &config.trees {
        let lambda = lambda_for(config, total, model.subsets.len());
        let el = train_adr_el(z, labels, &split.train, &model, lambda, config.tree(), seed)?;
        let acc = overall_accuracy(&predict_adr_el(&el, z.values(), &split.test), &truth)?;
        measurements.push(measure("adr-el", Some(total as f64), acc));
        let rf = train_random_forest(z, labels, &split.train, total, config.tree(), seed)?;
        let acc = overall_accuracy(&predict_adr_el(&rf, z.values(), &split.test), &truth)?;
        measurements.push(measure("rf", Some(total as f64), acc));
    }
    Ok(Trial { seed, n_supersamples: prepared.partition.n_supersamples(), skipped: None, measurements })
}

/// ADR-SVM against one tuned SVM on every feature.
pub fn ensemble_data_trial(config: &RunConfig, seed: u64) -> anyhow::Result<Trial> {
    let prepared = prepare(config, config.dataset_or(DatasetKind::Standard), seed)?;
    let (z, labels) = (&prepared.z, &prepared.synth.labels);
    let split = stratified_split(labels, config.train_fraction, seed)?;
    let truth: Vec<usize> = split.test.iter().map(|&i| labels.as_slice()[i]).collect();
    let model = fit(config, &prepared, Metric::Adr, seed)?;
    let spec = config.grid_override(z.n_features());
    let ens = train_adr_svm(z, labels, &split.train, &model, spec.as_ref(), seed)?;
    let acc = overall_accuracy(&predict_adr_svm(&ens, z.values(), &split.test)?, &truth)?;
    let all: Vec<usize> = (0..z.n_features()).collect();
    let (svm, _) = train_tuned_svm(z.values(), &split.train, labels.as_slice(), &all, spec.as_ref(), seed)?;
    let global: Vec<usize> = split.test.iter().map(|&i| predict_svm(&svm, z.values().row(i))).collect();
    let global_acc = overall_accuracy(&global, &truth)?;
    Ok(Trial {
        seed,
        n_supersamples: prepared.partition.n_supersamples(),
        skipped: None,
        measurements: vec![measure("adr-svm", None, acc), measure("svm", None, global_acc)],
    })
}

/// ADR-TTL target accuracy over the configured source fractions, for each
/// requested subset model. Seeds whose watershed yields one supersample
/// cannot form a source and a target and are skipped.
pub fn transfer_trial(config: &RunConfig, seed: u64, metrics: &[Metric]) -> anyhow::Result<Trial> {
    let prepared = prepare(config, config.dataset_or(DatasetKind::SharedGroups), seed)?;
    if prepared.partition.n_supersamples() < 2 {
        return Ok(skipped(seed, &prepared.partition, "watershed returned a single supersample"));
    }
    let (z, labels) = (&prepared.z, prepared.synth.labels.as_slice());
    let mut measurements = Vec::new();
    for &metric in metrics {
        let model = fit(config, &prepared, metric, seed)?;
        for &fraction in &config.source_fractions {
            let split = make_domain_split(&model, labels, fraction, seed)?;
            let out = ttl_propagate(z.values(), labels, &model, &split, &config.transfer(seed, z.n_features()))?;
            let truth: Vec<usize> = out.target_samples.iter().map(|&i| labels[i]).collect();
            let acc = overall_accuracy(&out.predictions, &truth)?;
            measurements.push(measure(format!("{}-ttl", metric.name()), Some(fraction), acc));
        }
    }
    Ok(Trial { seed, n_supersamples: prepared.partition.n_supersamples(), skipped: None, measurements })
}
