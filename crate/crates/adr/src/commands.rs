//! Subcommand bodies. Each writes its files under an output directory and
//! returns the paths it wrote. Reports hold no timestamps or timings, so
//! identical inputs give identical bytes.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::Context;
use serde::Serialize;

use adr_core::adr::{AdrModel, Metric};
use adr_core::datagen::{gen_multimodal, GroundTruth};
use adr_core::dataset::{zscore_normalize, DataMatrix};
use adr_core::featgraph::{default_bins, gaussian_kernel_graph, mutual_information_graph};
use adr_core::partition::watershed_partition_with;
use adr_core::Matrix;

use crate::config::{DatasetKind, RunConfig};
use crate::csvio::{format_modalities, load_csv, write_csv, LoadOptions};
use crate::experiments::{self, SummaryRow, Trial};

fn write_json(path: &Path, value: &impl Serialize) -> anyhow::Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn write_text(path: &Path, text: &str) -> anyhow::Result<()> {
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn out_dir(dir: &Path) -> anyhow::Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))
}

fn one_based(v: &[usize]) -> Vec<usize> {
    v.iter().map(|f| f + 1).collect()
}

#[derive(Serialize)]
struct TruthFile<'a> {
    dataset: &'a str,
    seed: u64,
    samples_per_cluster: usize,
    noise_sigma: f64,
    n_features: usize,
    /// Feature columns are 1-based; cluster and group ids are 0-based.
    groups: Vec<Vec<usize>>,
    noise_features: Vec<usize>,
    relevance_map: &'a [Vec<usize>],
    relevant_features: Vec<Vec<usize>>,
    cluster: &'a [usize],
}

fn truth_file<'a>(kind: DatasetKind, config: &RunConfig, seed: u64, truth: &'a GroundTruth, n: usize) -> TruthFile<'a> {
    TruthFile {
        dataset: kind.name(),
        seed,
        samples_per_cluster: config.spc_for(kind),
        noise_sigma: config.noise_for(kind),
        n_features: n,
        groups: truth.groups.iter().map(|g| one_based(g)).collect(),
        noise_features: one_based(&truth.noise_features),
        relevance_map: &truth.relevance_map,
        relevant_features: truth.relevant_features.iter().map(|g| one_based(g)).collect(),
        cluster: &truth.cluster,
    }
}

/// `data.csv` (features then label) and `truth.json`.
pub fn gen(config: &RunConfig, out: &Path) -> anyhow::Result<Vec<PathBuf>> {
    out_dir(out)?;
    let kind = config.dataset_or(DatasetKind::Standard);
    let spec = kind.spec(config.noise_for(kind), config.seed);
    let synth = gen_multimodal(&spec, config.spc_for(kind))?;
    let data_path = out.join("data.csv");
    write_csv(&data_path, synth.data.values(), Some(synth.labels.as_slice()), true)?;
    let truth_path = out.join("truth.json");
    write_json(&truth_path, &truth_file(kind, config, config.seed, &synth.truth, spec.n_features()))?;
    Ok(vec![data_path, truth_path])
}

#[derive(Debug, Clone, Default)]
pub struct SelectInput {
    /// `None` generates data from the configuration.
    pub input: Option<PathBuf>,
    pub options: LoadOptions,
    pub metric: Metric,
    pub dump_graphs: bool,
}

#[derive(Serialize)]
struct SubsetReport {
    supersample: usize,
    size: usize,
    k: usize,
    /// 1-based feature columns.
    features: Vec<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    feature_names: Option<Vec<String>>,
    kneedle_k: usize,
    sigma: Option<f64>,
    sigma_fallback: bool,
    null_count: usize,
    criterion: Option<f64>,
    iterations: usize,
    spectrum: Vec<f64>,
}

#[derive(Serialize)]
struct SelectReport {
    source: String,
    method: &'static str,
    n_samples: usize,
    n_features: usize,
    modalities: String,
    n_supersamples: usize,
    subsets: Vec<SubsetReport>,
    config: Vec<String>,
}

fn write_matrix(path: &Path, m: &Matrix) -> anyhow::Result<()> {
    Ok(write_csv(path, m, None, false)?)
}

/// `partition.csv` and `report.json`, plus graph weight matrices on request.
pub fn adr_select(config: &RunConfig, select: &SelectInput, out: &Path) -> anyhow::Result<Vec<PathBuf>> {
    out_dir(out)?;
    let (data, names, source): (DataMatrix, Option<Vec<String>>, String) = match &select.input {
        Some(path) => {
            let loaded = load_csv(path, &select.options)?;
            (loaded.data, loaded.feature_names, path.display().to_string())
        }
        None => {
            let kind = config.dataset_or(DatasetKind::Standard);
            let synth = gen_multimodal(&kind.spec(config.noise_for(kind), config.seed), config.spc_for(kind))?;
            (synth.data, None, format!("generated:{}", kind.name()))
        }
    };
    let z = zscore_normalize(&data)?;
    let partition = watershed_partition_with(z.values(), &config.watershed(z.n_samples()))?;
    let model: AdrModel = adr_core::adr::single_metric_select(&z, &partition, select.metric, &config.adr(config.seed))?;
    let mut written = Vec::new();

    let part_path = out.join("partition.csv");
    let mut text = String::from("row,supersample\n");
    for (i, s) in partition.assignment().iter().enumerate() {
        text.push_str(&format!("{},{s}\n", i + 1));
    }
    write_text(&part_path, &text)?;
    written.push(part_path);

    let sizes = partition.sizes();
    let subsets = model
        .subsets
        .iter()
        .zip(&model.diagnostics)
        .enumerate()
        .map(|(m, (s, d))| SubsetReport {
            supersample: m,
            size: sizes[m],
            k: s.k,
            features: one_based(&s.selected),
            feature_names: names.as_ref().map(|n| s.selected.iter().map(|&f| n[f].clone()).collect()),
            kneedle_k: d.kneedle_k,
            sigma: d.sigma,
            sigma_fallback: d.sigma_fallback,
            null_count: d.null_count,
            criterion: d.criterion,
            iterations: d.iterations,
            spectrum: d.spectrum.clone(),
        })
        .collect();
    let report = SelectReport {
        source,
        method: select.metric.name(),
        n_samples: z.n_samples(),
        n_features: z.n_features(),
        modalities: format_modalities(z.modalities()),
        n_supersamples: partition.n_supersamples(),
        subsets,
        config: config.to_text().lines().map(String::from).collect(),
    };
    let report_path = out.join("report.json");
    write_json(&report_path, &report)?;
    written.push(report_path);

    if select.dump_graphs {
        for m in 0..partition.n_supersamples() {
            let kg = gaussian_kernel_graph(&z, &partition.members(m), config.adr(config.seed).bandwidth)?;
            let path = out.join(format!("gk_graph_{m}.csv"));
            write_matrix(&path, kg.graph.weights())?;
            written.push(path);
        }
        let bins = config.bins.unwrap_or_else(|| default_bins(z.n_samples()));
        let mi = mutual_information_graph(&z, bins)?;
        let path = out.join("mi_graph.csv");
        write_matrix(&path, mi.weights())?;
        written.push(path);
    }
    Ok(written)
}

#[derive(Serialize)]
struct ExperimentReport<'a> {
    command: &'a str,
    x_label: &'a str,
    seeds: Vec<u64>,
    skipped_seeds: Vec<u64>,
    summary: &'a [SummaryRow],
    trials: &'a [Trial],
    config: Vec<String>,
}

fn summary_csv(x_label: &str, rows: &[SummaryRow]) -> String {
    let mut text = format!("method,{x_label},mean_acc,std_acc,n\n");
    for r in rows {
        let x = r.x.map_or(String::new(), |x| x.to_string());
        text.push_str(&format!("{},{x},{},{},{}\n", r.method, r.mean, r.std, r.n));
    }
    text
}

/// `report.json` with every trial and `results.csv` with the per-method
/// summary.
pub fn write_experiment(
    command: &str,
    x_label: &str,
    config: &RunConfig,
    trials: &[Trial],
    extra: &[(&str, String)],
    out: &Path,
) -> anyhow::Result<Vec<PathBuf>> {
    out_dir(out)?;
    let summary = experiments::summarize(trials);
    let report = ExperimentReport {
        command,
        x_label,
        seeds: trials.iter().map(|t| t.seed).collect(),
        skipped_seeds: trials.iter().filter(|t| t.skipped.is_some()).map(|t| t.seed).collect(),
        summary: &summary,
        trials,
        config: config.to_text().lines().map(String::from).collect(),
    };
    let report_path = out.join("report.json");
    write_json(&report_path, &report)?;
    let csv_path = out.join("results.csv");
    write_text(&csv_path, &summary_csv(x_label, &summary))?;
    let mut written = vec![report_path, csv_path];
    for (name, text) in extra {
        let path = out.join(name);
        write_text(&path, text)?;
        written.push(path);
    }
    Ok(written)
}

pub fn ensemble_model(config: &RunConfig, out: &Path) -> anyhow::Result<Vec<PathBuf>> {
    let trials = experiments::run_seeds(config, experiments::ensemble_model_trial)?;
    write_experiment("ensemble-model", "trees", config, &trials, &[], out)
}

pub fn ensemble_data(config: &RunConfig, out: &Path) -> anyhow::Result<Vec<PathBuf>> {
    let trials = experiments::run_seeds(config, experiments::ensemble_data_trial)?;
    write_experiment("ensemble-data", "x", config, &trials, &[], out)
}

pub fn transfer(config: &RunConfig, metrics: &[Metric], out: &Path) -> anyhow::Result<Vec<PathBuf>> {
    let trials = experiments::run_seeds(config, |c, s| experiments::transfer_trial(c, s, metrics))?;
    write_experiment("transfer", "source_fraction", config, &trials, &[], out)
}

/// Per-metric accuracies plus `deltas.csv` with ADR minus each baseline.
pub fn ablation(config: &RunConfig, out: &Path) -> anyhow::Result<Vec<PathBuf>> {
    let trials = experiments::run_seeds(config, experiments::ablation_trial)?;
    let summary = experiments::summarize(&trials);
    let mean = |method: &str, x: Option<f64>| summary.iter().find(|r| r.method == method && r.x == x).map(|r| r.mean);
    let mut deltas = String::from("learner,trees,adr_minus_gk,adr_minus_mi\n");
    let budgets = config.ablation_trees.iter().map(|&t| ("el", Some(t as f64)));
    for (learner, x) in budgets.chain([("svm", None)]) {
        let adr = mean(&format!("adr-{learner}"), x);
        let gk = mean(&format!("gk-{learner}"), x);
        let mi = mean(&format!("mi-{learner}"), x);
        if let (Some(a), Some(g), Some(m)) = (adr, gk, mi) {
            let x = x.map_or(String::new(), |x| x.to_string());
            deltas.push_str(&format!("{learner},{x},{},{}\n", a - g, a - m));
        }
    }
    write_experiment("ablation", "trees", config, &trials, &[("deltas.csv", deltas)], out)
}
