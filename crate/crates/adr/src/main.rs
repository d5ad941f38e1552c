use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use adr::commands::{self, SelectInput};
use adr::config::RunConfig;
use adr::csvio::{parse_modalities, LoadOptions};
use adr::experiments::metric_from_name;
use adr_core::adr::Metric;

/// Adaptive dimensionality reduction on multimodal tabular data.
#[derive(Parser)]
#[command(name = "adr", version)]
struct Cli {
    /// `key = value` configuration file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Number of consecutive seeds for experiment commands.
    #[arg(long, global = true)]
    seeds: Option<usize>,
    /// Override one configuration key, e.g. `--set adr.bins=8`.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Out {
    /// Output directory, created if missing.
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a planted dataset: data.csv and truth.json.
    Gen {
        #[command(flatten)]
        out: Out,
        #[arg(long, value_name = "standard|shared-groups")]
        dataset: Option<String>,
        #[arg(long)]
        samples_per_cluster: Option<usize>,
        #[arg(long)]
        noise: Option<f64>,
    },
    /// Partition samples and select a feature subset per supersample.
    AdrSelect {
        #[command(flatten)]
        out: Out,
        /// CSV file; without it the configured dataset is generated.
        #[arg(long)]
        input: Option<PathBuf>,
        #[arg(long)]
        header: bool,
        /// 1-based label column to drop from the features.
        #[arg(long)]
        label_column: Option<usize>,
        /// Feature column ranges per modality, e.g. `1..4,5..9`.
        #[arg(long)]
        modalities: Option<String>,
        #[arg(long, default_value = "adr", value_name = "adr|gk|mi")]
        method: String,
        /// Also write the GK and MI graph weight matrices.
        #[arg(long)]
        dump_graphs: bool,
        #[arg(long)]
        watershed_k: Option<usize>,
        #[arg(long)]
        min_supersample: Option<usize>,
    },
    /// ADR-EL against a random forest across tree budgets.
    EnsembleModel {
        #[command(flatten)]
        out: Out,
        /// Comma-separated total tree counts.
        #[arg(long)]
        trees: Option<String>,
        #[arg(long)]
        lambda: Option<usize>,
    },
    /// ADR-SVM against one SVM on all features.
    EnsembleData {
        #[command(flatten)]
        out: Out,
    },
    /// Jaccard-ordered transfer across source fractions.
    Transfer {
        #[command(flatten)]
        out: Out,
        #[arg(long)]
        source_fractions: Option<String>,
        /// Comma-separated subset models.
        #[arg(long, default_value = "adr,gk,mi", value_name = "adr,gk,mi")]
        method: String,
    },
    /// ADR against GK-only and MI-only subsets for trees and SVMs.
    Ablation {
        #[command(flatten)]
        out: Out,
        #[arg(long)]
        trees: Option<String>,
    },
}

fn metric(name: &str) -> anyhow::Result<Metric> {
    metric_from_name(name.trim()).ok_or_else(|| anyhow::anyhow!("unknown method {name:?}; expected adr, gk or mi"))
}

fn load_config(cli: &Cli) -> anyhow::Result<RunConfig> {
    let mut config = match &cli.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| anyhow::anyhow!("reading {}: {e}", path.display()))?;
            RunConfig::parse(&text).map_err(|e| anyhow::anyhow!("{}: {e}", path.display()))?
        }
        None => RunConfig::default(),
    };
    let mut sets: Vec<(String, String)> = Vec::new();
    if let Some(s) = cli.seed {
        sets.push(("seed".into(), s.to_string()));
    }
    if let Some(s) = cli.seeds {
        sets.push(("seeds".into(), s.to_string()));
    }
    for o in &cli.overrides {
        let (k, v) = o.split_once('=').ok_or_else(|| anyhow::anyhow!("--set expects KEY=VALUE, got {o:?}"))?;
        sets.push((k.trim().into(), v.trim().into()));
    }
    let mut push = |k: &str, v: Option<String>| {
        if let Some(v) = v {
            sets.push((k.into(), v));
        }
    };
    match &cli.command {
        Command::Gen { dataset, samples_per_cluster, noise, .. } => {
            push("data.kind", dataset.clone());
            push("data.samples_per_cluster", samples_per_cluster.map(|v| v.to_string()));
            push("data.noise_sigma", noise.map(|v| v.to_string()));
        }
        Command::AdrSelect { watershed_k, min_supersample, .. } => {
            push("watershed.k", watershed_k.map(|v| v.to_string()));
            push("watershed.min_size", min_supersample.map(|v| v.to_string()));
        }
        Command::EnsembleModel { trees, lambda, .. } => {
            push("ensemble.trees", trees.clone());
            push("ensemble.lambda", lambda.map(|v| v.to_string()));
        }
        Command::Transfer { source_fractions, .. } => push("transfer.source_fractions", source_fractions.clone()),
        Command::Ablation { trees, .. } => push("ablation.trees", trees.clone()),
        Command::EnsembleData { .. } => {}
    }
    let errors: Vec<String> = sets.iter().filter_map(|(k, v)| config.set(k, v).err()).collect();
    if !errors.is_empty() {
        anyhow::bail!("{}", adr::config::ConfigErrors(errors));
    }
    config.validate()?;
    Ok(config)
}

fn run(cli: Cli) -> anyhow::Result<Vec<PathBuf>> {
    let config = load_config(&cli)?;
    match cli.command {
        Command::Gen { out, .. } => commands::gen(&config, &out.out),
        Command::AdrSelect { out, input, header, label_column, modalities, method, dump_graphs, .. } => {
            let options = LoadOptions {
                header,
                label_column,
                modalities: modalities.as_deref().map(parse_modalities).transpose()?,
            };
            let select = SelectInput { input, options, metric: metric(&method)?, dump_graphs };
            commands::adr_select(&config, &select, &out.out)
        }
        Command::EnsembleModel { out, .. } => commands::ensemble_model(&config, &out.out),
        Command::EnsembleData { out } => commands::ensemble_data(&config, &out.out),
        Command::Transfer { out, method, .. } => {
            let metrics = method.split(',').map(metric).collect::<anyhow::Result<Vec<_>>>()?;
            commands::transfer(&config, &metrics, &out.out)
        }
        Command::Ablation { out, .. } => commands::ablation(&config, &out.out),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(paths) => {
            for p in paths {
                println!("{}", p.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
