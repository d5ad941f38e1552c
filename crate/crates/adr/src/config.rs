//! Plain-text `key = value` run configuration.
//!
//! Lines are `key = value`; `#` starts a comment. Lists are comma separated.
//! Unknown keys and out-of-range values are all collected and reported
//! together.

use std::fmt;

use adr_core::adr::AdrConfig;
use adr_core::datagen::SynthSpec;
use adr_core::featgraph::Bandwidth;
use adr_core::jointdiag::{DEFAULT_MAX_ITER, DEFAULT_TOL};
use adr_core::kneedle::DEFAULT_SENSITIVITY;
use adr_core::learners::{GridSearchSpec, TreeConfig};
use adr_core::partition::{default_k, WatershedConfig, DEFAULT_MIN_SIZE, DEFAULT_PERSISTENCE};
use adr_core::transfer::{TransferClassifier, TransferConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DatasetKind {
    /// Three groups of three, three noise features, two clusters.
    Standard,
    /// Six clusters sharing their relevant groups, nine noise features.
    SharedGroups,
}

impl DatasetKind {
    pub fn name(self) -> &'static str {
        match self {
            DatasetKind::Standard => "standard",
            DatasetKind::SharedGroups => "shared-groups",
        }
    }

    pub fn spec(self, noise_sigma: f64, seed: u64) -> SynthSpec {
        match self {
            DatasetKind::Standard => SynthSpec::standard(noise_sigma, seed),
            DatasetKind::SharedGroups => SynthSpec::shared_groups(noise_sigma, seed),
        }
    }

    pub fn default_samples_per_cluster(self) -> usize {
        match self {
            DatasetKind::Standard => 400,
            DatasetKind::SharedGroups => 150,
        }
    }

    pub fn default_noise_sigma(self) -> f64 {
        match self {
            DatasetKind::Standard => 0.3,
            DatasetKind::SharedGroups => 0.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BandwidthRule {
    MedianDistance,
    MedianSquaredDistance,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TransferLearner {
    Svm,
    NearestNeighbor,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub seed: u64,
    pub seeds: usize,
    /// `None` lets each command pick its dataset.
    pub dataset: Option<DatasetKind>,
    pub samples_per_cluster: Option<usize>,
    pub noise_sigma: Option<f64>,
    pub train_fraction: f64,
    /// `None` uses `max(10, ceil(sqrt(P)))`.
    pub watershed_k: Option<usize>,
    pub min_supersample: usize,
    pub persistence: f64,
    pub bandwidth: BandwidthRule,
    /// Fixed GK bandwidth, overriding the rule.
    pub sigma: Option<f64>,
    pub bins: Option<usize>,
    pub sensitivity: f64,
    pub jd_tol: f64,
    pub jd_max_iter: usize,
    pub max_depth: usize,
    pub min_leaf: usize,
    pub trees: Vec<usize>,
    pub ablation_trees: Vec<usize>,
    /// Trees per subset; `None` spreads `trees` evenly over the subsets.
    pub lambda: Option<usize>,
    pub c_grid: Vec<f64>,
    pub gamma_scale: Vec<f64>,
    pub folds: usize,
    pub source_fractions: Vec<f64>,
    pub transfer_learner: TransferLearner,
    pub transfer_fallback: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        let tree = TreeConfig::default();
        RunConfig {
            seed: 0,
            seeds: 20,
            dataset: None,
            samples_per_cluster: None,
            noise_sigma: None,
            train_fraction: 0.2,
            watershed_k: None,
            min_supersample: DEFAULT_MIN_SIZE,
            persistence: DEFAULT_PERSISTENCE,
            bandwidth: BandwidthRule::MedianDistance,
            sigma: None,
            bins: None,
            sensitivity: DEFAULT_SENSITIVITY,
            jd_tol: DEFAULT_TOL,
            jd_max_iter: DEFAULT_MAX_ITER,
            max_depth: tree.max_depth,
            min_leaf: tree.min_leaf,
            trees: vec![10, 50, 100, 200],
            ablation_trees: vec![50, 150],
            lambda: None,
            c_grid: GridSearchSpec::DEFAULT_C.to_vec(),
            gamma_scale: GridSearchSpec::DEFAULT_GAMMA_SCALE.to_vec(),
            folds: 5,
            source_fractions: (1..=9).map(|i| i as f64 / 10.0).collect(),
            transfer_learner: TransferLearner::Svm,
            transfer_fallback: true,
        }
    }
}

/// Every problem found in a configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigErrors(pub Vec<String>);

impl fmt::Display for ConfigErrors {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{} configuration error(s):", self.0.len())?;
        for e in &self.0 {
            writeln!(f, "  {e}")?;
        }
        Ok(())
    }
}

impl std::error::Error for ConfigErrors {}

pub const KEYS: &[&str] = &[
    "seed",
    "seeds",
    "data.kind",
    "data.samples_per_cluster",
    "data.noise_sigma",
    "data.train_fraction",
    "watershed.k",
    "watershed.min_size",
    "watershed.persistence",
    "adr.bandwidth",
    "adr.sigma",
    "adr.bins",
    "adr.sensitivity",
    "adr.tol",
    "adr.max_iter",
    "tree.max_depth",
    "tree.min_leaf",
    "ensemble.trees",
    "ensemble.lambda",
    "ablation.trees",
    "svm.c_grid",
    "svm.gamma_scale",
    "svm.folds",
    "transfer.source_fractions",
    "transfer.classifier",
    "transfer.fallback",
];

fn num<T: std::str::FromStr>(v: &str) -> Result<T, String> {
    v.parse().map_err(|_| format!("cannot parse {v:?}"))
}

fn list<T: std::str::FromStr>(v: &str) -> Result<Vec<T>, String> {
    v.split(',').map(str::trim).filter(|s| !s.is_empty()).map(num).collect()
}

/// `0` (or `auto`) means "derive from the data".
fn auto<T: std::str::FromStr + PartialEq + Default>(v: &str) -> Result<Option<T>, String> {
    if v == "auto" {
        return Ok(None);
    }
    let x: T = num(v)?;
    Ok(if x == T::default() { None } else { Some(x) })
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, ConfigErrors> {
        let mut config = RunConfig::default();
        let mut errors = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            match line.split_once('=') {
                Some((k, v)) => {
                    if let Err(e) = config.set(k.trim(), v.trim()) {
                        errors.push(format!("line {}: {e}", i + 1));
                    }
                }
                None => errors.push(format!("line {}: expected `key = value`, found {line:?}", i + 1)),
            }
        }
        errors.extend(config.problems());
        if errors.is_empty() {
            Ok(config)
        } else {
            Err(ConfigErrors(errors))
        }
    }

    /// Sets one key; used by the file parser and by command-line overrides.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), String> {
        let r: Result<(), String> = (|| {
            match key {
                "seed" => self.seed = num(value)?,
                "seeds" => self.seeds = num(value)?,
                "data.kind" => {
                    self.dataset = match value {
                        "auto" => None,
                        "standard" => Some(DatasetKind::Standard),
                        "shared-groups" => Some(DatasetKind::SharedGroups),
                        _ => return Err(format!("expected standard, shared-groups or auto, found {value:?}")),
                    }
                }
                "data.samples_per_cluster" => self.samples_per_cluster = auto(value)?,
                // Zero noise is meaningful, so only `auto` unsets it.
                "data.noise_sigma" => self.noise_sigma = if value == "auto" { None } else { Some(num(value)?) },
                "data.train_fraction" => self.train_fraction = num(value)?,
                "watershed.k" => self.watershed_k = auto(value)?,
                "watershed.min_size" => self.min_supersample = num(value)?,
                "watershed.persistence" => self.persistence = num(value)?,
                "adr.bandwidth" => {
                    self.bandwidth = match value {
                        "median-distance" => BandwidthRule::MedianDistance,
                        "median-squared-distance" => BandwidthRule::MedianSquaredDistance,
                        _ => {
                            return Err(format!("expected median-distance or median-squared-distance, found {value:?}"))
                        }
                    }
                }
                "adr.sigma" => self.sigma = auto(value)?,
                "adr.bins" => self.bins = auto(value)?,
                "adr.sensitivity" => self.sensitivity = num(value)?,
                "adr.tol" => self.jd_tol = num(value)?,
                "adr.max_iter" => self.jd_max_iter = num(value)?,
                "tree.max_depth" => self.max_depth = num(value)?,
                "tree.min_leaf" => self.min_leaf = num(value)?,
                "ensemble.trees" => self.trees = list(value)?,
                "ensemble.lambda" => self.lambda = auto(value)?,
                "ablation.trees" => self.ablation_trees = list(value)?,
                "svm.c_grid" => self.c_grid = list(value)?,
                "svm.gamma_scale" => self.gamma_scale = list(value)?,
                "svm.folds" => self.folds = num(value)?,
                "transfer.source_fractions" => self.source_fractions = list(value)?,
                "transfer.classifier" => {
                    self.transfer_learner = match value {
                        "svm" => TransferLearner::Svm,
                        "1nn" => TransferLearner::NearestNeighbor,
                        _ => return Err(format!("expected svm or 1nn, found {value:?}")),
                    }
                }
                "transfer.fallback" => self.transfer_fallback = num(value)?,
                _ => return Err("unknown key".into()),
            }
            Ok(())
        })();
        r.map_err(|e| format!("{key}: {e}"))
    }

    /// Range problems, one message per offending key.
    pub fn problems(&self) -> Vec<String> {
        let mut p = Vec::new();
        let mut check = |ok: bool, msg: String| {
            if !ok {
                p.push(msg);
            }
        };
        check(self.seeds >= 1, "seeds: must be at least 1".into());
        if let Some(s) = self.noise_sigma {
            check(s >= 0.0 && s.is_finite(), format!("data.noise_sigma: {s} must be >= 0"));
        }
        let tf = self.train_fraction;
        check(tf > 0.0 && tf < 1.0, format!("data.train_fraction: {tf} must lie in (0, 1)"));
        check(self.min_supersample >= 1, "watershed.min_size: must be at least 1".into());
        let pers = self.persistence;
        check((0.0..=1.0).contains(&pers), format!("watershed.persistence: {pers} must lie in [0, 1]"));
        if let Some(s) = self.sigma {
            check(s > 0.0 && s.is_finite(), format!("adr.sigma: {s} must be positive"));
        }
        if let Some(b) = self.bins {
            check(b >= 2, format!("adr.bins: {b} must be at least 2"));
        }
        check(self.sensitivity >= 0.0, format!("adr.sensitivity: {} must be >= 0", self.sensitivity));
        check(self.jd_tol > 0.0, format!("adr.tol: {} must be positive", self.jd_tol));
        check(self.jd_max_iter >= 1, "adr.max_iter: must be at least 1".into());
        check(self.max_depth >= 1, "tree.max_depth: must be at least 1".into());
        check(self.min_leaf >= 1, "tree.min_leaf: must be at least 1".into());
        check(
            !self.trees.is_empty() && self.trees.iter().all(|&t| t >= 1),
            "ensemble.trees: need positive counts".into(),
        );
        check(
            !self.ablation_trees.is_empty() && self.ablation_trees.iter().all(|&t| t >= 1),
            "ablation.trees: need positive counts".into(),
        );
        let positive = |v: &[f64]| !v.is_empty() && v.iter().all(|x| *x > 0.0 && x.is_finite());
        check(positive(&self.c_grid), "svm.c_grid: need positive values".into());
        check(positive(&self.gamma_scale), "svm.gamma_scale: need positive values".into());
        check(self.folds >= 2, format!("svm.folds: {} must be at least 2", self.folds));
        check(
            !self.source_fractions.is_empty() && self.source_fractions.iter().all(|f| *f > 0.0 && *f < 1.0),
            "transfer.source_fractions: values must lie in (0, 1)".into(),
        );
        p
    }

    pub fn validate(&self) -> Result<(), ConfigErrors> {
        let p = self.problems();
        if p.is_empty() {
            Ok(())
        } else {
            Err(ConfigErrors(p))
        }
    }

    pub fn dataset_or(&self, default: DatasetKind) -> DatasetKind {
        self.dataset.unwrap_or(default)
    }

    pub fn spc_for(&self, kind: DatasetKind) -> usize {
        self.samples_per_cluster.unwrap_or_else(|| kind.default_samples_per_cluster())
    }

    pub fn noise_for(&self, kind: DatasetKind) -> f64 {
        self.noise_sigma.unwrap_or_else(|| kind.default_noise_sigma())
    }

    pub fn watershed(&self, n_samples: usize) -> WatershedConfig {
        WatershedConfig {
            k: self.watershed_k.unwrap_or_else(|| default_k(n_samples)),
            min_size: self.min_supersample,
            persistence: self.persistence,
        }
    }

    pub fn adr(&self, seed: u64) -> AdrConfig {
        let bandwidth = match (self.sigma, self.bandwidth) {
            (Some(s), _) => Bandwidth::Fixed(s),
            (None, BandwidthRule::MedianDistance) => Bandwidth::MedianDistance,
            (None, BandwidthRule::MedianSquaredDistance) => Bandwidth::MedianSquaredDistance,
        };
        AdrConfig {
            bandwidth,
            bins: self.bins,
            sensitivity: self.sensitivity,
            tol: self.jd_tol,
            max_iter: self.jd_max_iter,
            seed,
        }
    }

    pub fn tree(&self) -> TreeConfig {
        TreeConfig { max_depth: self.max_depth, min_leaf: self.min_leaf, max_features: None }
    }

    /// `None` keeps the library grid, whose gamma values scale with each
    /// subset's size; a custom grid scales by `n_features` instead.
    pub fn grid_override(&self, n_features: usize) -> Option<GridSearchSpec> {
        let standard = self.c_grid == GridSearchSpec::DEFAULT_C
            && self.gamma_scale == GridSearchSpec::DEFAULT_GAMMA_SCALE
            && self.folds == 5;
        if standard {
            return None;
        }
        let f = n_features.max(1) as f64;
        Some(GridSearchSpec {
            c_grid: self.c_grid.clone(),
            gamma_grid: self.gamma_scale.iter().map(|g| g / f).collect(),
            folds: self.folds,
        })
    }

    pub fn transfer(&self, seed: u64, n_features: usize) -> TransferConfig {
        TransferConfig {
            classifier: match self.transfer_learner {
                TransferLearner::Svm => TransferClassifier::Svm(self.grid_override(n_features)),
                TransferLearner::NearestNeighbor => TransferClassifier::NearestNeighbor,
            },
            allow_fallback: self.transfer_fallback,
            seed,
        }
    }

    /// Canonical `key = value` listing of every setting.
    pub fn to_text(&self) -> String {
        fn join<T: fmt::Display>(v: &[T]) -> String {
            v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
        }
        fn opt<T: fmt::Display>(v: &Option<T>) -> String {
            v.as_ref().map_or("auto".into(), |x| x.to_string())
        }
        let lines = [
            format!("seed = {}", self.seed),
            format!("seeds = {}", self.seeds),
            format!("data.kind = {}", self.dataset.map_or("auto", DatasetKind::name)),
            format!("data.samples_per_cluster = {}", opt(&self.samples_per_cluster)),
            format!("data.noise_sigma = {}", opt(&self.noise_sigma)),
            format!("data.train_fraction = {}", self.train_fraction),
            format!("watershed.k = {}", opt(&self.watershed_k)),
            format!("watershed.min_size = {}", self.min_supersample),
            format!("watershed.persistence = {}", self.persistence),
            format!(
                "adr.bandwidth = {}",
                match self.bandwidth {
                    BandwidthRule::MedianDistance => "median-distance",
                    BandwidthRule::MedianSquaredDistance => "median-squared-distance",
                }
            ),
            format!("adr.sigma = {}", opt(&self.sigma)),
            format!("adr.bins = {}", opt(&self.bins)),
            format!("adr.sensitivity = {}", self.sensitivity),
            format!("adr.tol = {:e}", self.jd_tol),
            format!("adr.max_iter = {}", self.jd_max_iter),
            format!("tree.max_depth = {}", self.max_depth),
            format!("tree.min_leaf = {}", self.min_leaf),
            format!("ensemble.trees = {}", join(&self.trees)),
            format!("ensemble.lambda = {}", opt(&self.lambda)),
            format!("ablation.trees = {}", join(&self.ablation_trees)),
            format!("svm.c_grid = {}", join(&self.c_grid)),
            format!("svm.gamma_scale = {}", join(&self.gamma_scale)),
            format!("svm.folds = {}", self.folds),
            format!("transfer.source_fractions = {}", join(&self.source_fractions)),
            format!(
                "transfer.classifier = {}",
                match self.transfer_learner {
                    TransferLearner::Svm => "svm",
                    TransferLearner::NearestNeighbor => "1nn",
                }
            ),
            format!("transfer.fallback = {}", self.transfer_fallback),
        ];
        let mut s = lines.join("\n");
        s.push('\n');
        s
    }
}
