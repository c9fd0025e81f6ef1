//! `dqgnn crossvalidate | train | eval`.
//!
//! Exit status: 0 success, 1 usage or configuration error, 2 data error
//! (missing or malformed dataset or checkpoint), 3 internal failure.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graphdata::{parse_tudataset, Dataset, Graph, GraphError};
use crate::mapping::{self, MappingError, MappingParams};
use crate::model::{
    self, classify, count_parameters, graph_embedding, Checkpoint, Entanglement, ForwardConfig, ModelError,
    ModelParams,
};
use crate::optim::OptResult;

/// Parameter count published for the reference architecture with encoder.
pub const PUBLISHED_PARAMETER_COUNT: usize = 43;
pub const PARAMETER_COUNT_NOTE: &str = "parameter_count is 6 angles per layer (center and shared-neighbor triples) plus 2 centroids plus one encoder angle per feature; the published figure of 43 for the same setting cannot be reproduced under shared neighbor angles";

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Dataset(#[from] GraphError),
    #[error("{0}")]
    Data(String),
    #[error("checkpoint encoder expects {expected} features, dataset has {found}")]
    CheckpointDimensionMismatch { expected: usize, found: usize },
    #[error("{0}")]
    Internal(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Dataset(_) | CliError::Data(_) | CliError::CheckpointDimensionMismatch { .. } => 2,
            CliError::Internal(_) => 3,
        }
    }
}

impl From<ModelError> for CliError {
    fn from(e: ModelError) -> Self {
        match e {
            ModelError::Checkpoint { .. } | ModelError::Io { .. } => CliError::Data(e.to_string()),
            ModelError::Capacity { .. } | ModelError::NoLayers => CliError::Usage(e.to_string()),
            ModelError::Graph(g) => CliError::Dataset(g),
            other => CliError::Internal(other.to_string()),
        }
    }
}

impl From<MappingError> for CliError {
    fn from(e: MappingError) -> Self {
        CliError::Internal(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, CliError>;

#[derive(Debug, Parser)]
#[command(name = "dqgnn", version, about = "Decompositional quantum graph neural network (classically simulated)")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Stratified k-fold cross-validation; writes a JSON report.
    Crossvalidate(RunArgs),
    /// Train on the whole dataset; writes a model checkpoint.
    Train(RunArgs),
    /// Accuracy of a checkpoint on a dataset; writes a JSON report.
    Eval(EvalArgs),
}

#[derive(Debug, Clone, Args)]
pub struct RunArgs {
    /// Directory holding the `<NAME>_*.txt` files [default: data/<NAME>]
    #[arg(long)]
    pub dataset_dir: Option<PathBuf>,
    #[arg(long, default_value = "MUTAG")]
    pub dataset: String,
    #[arg(long, default_value_t = model::DEFAULT_LAYERS)]
    pub layers: usize,
    /// Qubits per device-sized computation.
    #[arg(long, default_value_t = model::DEFAULT_CAPACITY)]
    pub capacity: usize,
    /// full, ring or off
    #[arg(long, default_value = "full")]
    pub entanglement: Entanglement,
    #[arg(long, default_value_t = 10)]
    pub folds: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 500)]
    pub mapping_budget: usize,
    #[arg(long, default_value_t = 2000)]
    pub model_budget: usize,
    /// Report (crossvalidate) or checkpoint (train) path.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Worker threads [default: all cores]
    #[arg(long)]
    pub workers: Option<usize>,
    /// Store wall-clock time in the report (makes it run-dependent).
    #[arg(long)]
    pub record_timing: bool,
    /// Write per-fold optimizer traces as CSV into this directory.
    #[arg(long)]
    pub trace_dir: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct EvalArgs {
    #[arg(long)]
    pub checkpoint: PathBuf,
    #[arg(long)]
    pub dataset_dir: Option<PathBuf>,
    #[arg(long, default_value = "MUTAG")]
    pub dataset: String,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub workers: Option<usize>,
    #[arg(long)]
    pub record_timing: bool,
}

/// Validated settings of one run; echoed verbatim in reports.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub dataset_dir: PathBuf,
    pub dataset_name: String,
    pub layers: usize,
    pub capacity: usize,
    pub entanglement: Entanglement,
    pub folds: usize,
    pub seed: u64,
    pub mapping_budget: usize,
    pub model_budget: usize,
    pub output_path: PathBuf,
    #[serde(skip)]
    pub record_timing: bool,
    #[serde(skip)]
    pub trace_dir: Option<PathBuf>,
}

impl RunConfig {
    /// Defaults for `dataset` under `data/<dataset>`.
    pub fn new(dataset_dir: impl Into<PathBuf>, dataset: &str, output_path: impl Into<PathBuf>) -> Self {
        Self {
            dataset_dir: dataset_dir.into(),
            dataset_name: dataset.to_owned(),
            layers: model::DEFAULT_LAYERS,
            capacity: model::DEFAULT_CAPACITY,
            entanglement: Entanglement::Full,
            folds: 10,
            seed: 0,
            mapping_budget: 500,
            model_budget: 2000,
            output_path: output_path.into(),
            record_timing: false,
            trace_dir: None,
        }
    }

    fn from_args(a: RunArgs, default_out: &str) -> Self {
        Self {
            dataset_dir: a.dataset_dir.unwrap_or_else(|| Path::new("data").join(&a.dataset)),
            dataset_name: a.dataset,
            layers: a.layers,
            capacity: a.capacity,
            entanglement: a.entanglement,
            folds: a.folds,
            seed: a.seed,
            mapping_budget: a.mapping_budget,
            model_budget: a.model_budget,
            output_path: a.out.unwrap_or_else(|| default_out.into()),
            record_timing: a.record_timing,
            trace_dir: a.trace_dir,
        }
    }

    pub fn validate(&self) -> Result<ForwardConfig> {
        if self.layers == 0 {
            return Err(CliError::Usage("--layers must be at least 1".into()));
        }
        if self.folds < 2 {
            return Err(CliError::Usage("--folds must be at least 2".into()));
        }
        ForwardConfig::new(self.capacity, self.entanglement).map_err(|e| CliError::Usage(e.to_string()))
    }

    fn train_settings(&self, forward: ForwardConfig, seed: u64) -> TrainSettings {
        TrainSettings {
            layers: self.layers,
            mapping_budget: self.mapping_budget,
            model_budget: self.model_budget,
            forward,
            seed,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub command: String,
    pub dataset: String,
    pub seed: u64,
    pub per_fold_accuracy: Vec<f64>,
    /// Held-out graphs per fold.
    pub fold_sizes: Vec<usize>,
    pub mean_accuracy: f64,
    /// Sample standard deviation over folds (n − 1 denominator).
    pub std_accuracy: f64,
    /// `std_accuracy / sqrt(folds)`.
    pub std_error: f64,
    pub parameter_count: usize,
    pub published_parameter_count: usize,
    pub parameter_count_note: String,
    pub stratified_folds: bool,
    pub encoder_retrained_per_fold: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wall_time_seconds: Option<f64>,
    pub config: RunConfig,
}

impl Report {
    fn new(command: &str, config: &RunConfig, accuracies: Vec<f64>, fold_sizes: Vec<usize>, parameter_count: usize) -> Self {
        let (mean, std) = mean_and_sample_std(&accuracies);
        Self {
            command: command.to_owned(),
            dataset: config.dataset_name.clone(),
            seed: config.seed,
            std_error: std / (accuracies.len() as f64).sqrt(),
            per_fold_accuracy: accuracies,
            fold_sizes,
            mean_accuracy: mean,
            std_accuracy: std,
            parameter_count,
            published_parameter_count: PUBLISHED_PARAMETER_COUNT,
            parameter_count_note: PARAMETER_COUNT_NOTE.to_owned(),
            stratified_folds: command == "crossvalidate",
            encoder_retrained_per_fold: command == "crossvalidate",
            wall_time_seconds: None,
            config: config.clone(),
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_json())
            .map_err(|e| CliError::Usage(format!("cannot write report {}: {e}", path.display())))
    }
}

/// Mean and sample standard deviation; the deviation is 0 for one value.
pub fn mean_and_sample_std(xs: &[f64]) -> (f64, f64) {
    if xs.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

/// Held-out index sets of a stratified k-fold split.
///
/// Each class is shuffled with `seed`, then dealt round-robin into the
/// folds, the deal continuing where the previous class stopped so fold
/// sizes differ by at most one.
pub fn stratified_folds(labels: &[u8], folds: usize, seed: u64) -> Result<Vec<Vec<usize>>> {
    if folds < 2 {
        return Err(CliError::Usage("--folds must be at least 2".into()));
    }
    if labels.len() < folds {
        return Err(CliError::Data(format!(
            "{} folds requested but the dataset has only {} graphs",
            folds,
            labels.len()
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = vec![Vec::new(); folds];
    let mut next = 0;
    for class in 0..2u8 {
        let mut members: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == class).collect();
        members.shuffle(&mut rng);
        for i in members {
            out[next].push(i);
            next = (next + 1) % folds;
        }
    }
    for fold in &mut out {
        fold.sort_unstable();
    }
    Ok(out)
}

fn load_dataset(config: &RunConfig) -> Result<Dataset> {
    let ds = parse_tudataset(&config.dataset_dir, &config.dataset_name)?;
    let counts = ds.class_counts();
    if counts.contains(&0) {
        return Err(CliError::Data(format!(
            "dataset {} needs two classes, found graph counts {counts:?}",
            ds.name
        )));
    }
    Ok(ds)
}

fn node_features<'a>(graphs: impl IntoIterator<Item = &'a Graph>) -> Vec<Vec<f64>> {
    mapping::distinct_features(graphs.into_iter().flat_map(|g| g.features().iter().map(Vec::as_slice)))
}

/// Budgets and shape for training an encoder and classifier together.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainSettings {
    pub layers: usize,
    pub mapping_budget: usize,
    pub model_budget: usize,
    pub forward: ForwardConfig,
    pub seed: u64,
}

/// Encoder then model, both trained on the same graphs.
#[derive(Debug, Clone)]
pub struct Trained {
    pub params: ModelParams,
    pub mapping_trace: Option<OptResult>,
    pub model_trace: Option<OptResult>,
    pub warning: Option<String>,
}

/// Trains the encoder on the distinct node features of `graphs`, then the
/// layers and centroids with that encoder fixed.
pub fn train_classifier(graphs: &[&Graph], feature_dim: usize, settings: &TrainSettings) -> Result<Trained> {
    let seed = settings.seed;
    let features = node_features(graphs.iter().copied());
    let (mapping, mapping_trace) = if features.is_empty() {
        (MappingParams::random(feature_dim, seed), None)
    } else {
        match mapping::train_mapping(&features, seed, settings.mapping_budget) {
            Ok(t) => {
                let trace = t.trace();
                (t.params, trace)
            }
            Err(MappingError::Training { best, .. }) => (best, None),
            Err(e) => return Err(e.into()),
        }
    };
    let t = model::train_model(graphs, mapping, settings.layers, seed, settings.model_budget, &settings.forward)?;
    Ok(Trained {
        params: t.params,
        mapping_trace,
        model_trace: t.optimizer,
        warning: t.warning,
    })
}

/// Fraction of `graphs` the classifier labels correctly.
pub fn accuracy(graphs: &[&Graph], params: &ModelParams, config: &ForwardConfig) -> Result<f64> {
    let correct = graphs
        .par_iter()
        .map(|g| Ok(classify(graph_embedding(g, params, config)?, params) == g.label()))
        .collect::<std::result::Result<Vec<bool>, ModelError>>()?
        .into_iter()
        .filter(|&c| c)
        .count();
    Ok(correct as f64 / graphs.len() as f64)
}

fn fold_seed(seed: u64, fold: usize) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(fold as u64 + 1);
    rng.random()
}

fn write_trace(dir: &Option<PathBuf>, name: &str, trace: &Option<OptResult>) -> Result<()> {
    if let (Some(dir), Some(trace)) = (dir, trace) {
        fs::create_dir_all(dir)
            .and_then(|_| trace.write_trace_csv(dir.join(name)))
            .map_err(|e| CliError::Usage(format!("cannot write trace into {}: {e}", dir.display())))?;
    }
    Ok(())
}

fn say(line: String) {
    let mut out = std::io::stdout().lock();
    let _ = writeln!(out, "{line}");
}

pub fn cmd_crossvalidate(config: &RunConfig) -> Result<Report> {
    let start = Instant::now();
    let forward = config.validate()?;
    let ds = load_dataset(config)?;
    let labels: Vec<u8> = ds.graphs.iter().map(Graph::label).collect();
    let folds = stratified_folds(&labels, config.folds, config.seed)?;

    let results = folds
        .par_iter()
        .enumerate()
        .map(|(k, held_out)| -> Result<(f64, usize, usize)> {
            let mut is_test = vec![false; ds.graphs.len()];
            for &i in held_out {
                is_test[i] = true;
            }
            let train: Vec<&Graph> = ds.graphs.iter().zip(&is_test).filter(|(_, t)| !**t).map(|(g, _)| g).collect();
            let test: Vec<&Graph> = held_out.iter().map(|&i| &ds.graphs[i]).collect();
            let seed = fold_seed(config.seed, k);
            let trained = train_classifier(&train, ds.feature_dim(), &config.train_settings(forward, seed))?;
            write_trace(&config.trace_dir, &format!("fold{k}_model.csv"), &trained.model_trace)?;
            write_trace(&config.trace_dir, &format!("fold{k}_mapping.csv"), &trained.mapping_trace)?;
            let acc = accuracy(&test, &trained.params, &forward)?;
            let warn = trained.warning.map(|w| format!(" [{w}]")).unwrap_or_default();
            say(format!("fold {}/{}: accuracy {acc:.4} on {} graphs{warn}", k + 1, folds.len(), test.len()));
            Ok((acc, test.len(), count_parameters(&trained.params)))
        })
        .collect::<Result<Vec<_>>>()?;

    let parameter_count = results[0].2;
    let mut report = Report::new(
        "crossvalidate",
        config,
        results.iter().map(|r| r.0).collect(),
        results.iter().map(|r| r.1).collect(),
        parameter_count,
    );
    if config.record_timing {
        report.wall_time_seconds = Some(start.elapsed().as_secs_f64());
    }
    report.write(&config.output_path)?;
    say(format!(
        "{} seed {}: mean accuracy {:.4}, std {:.4}, std error {:.4} over {} folds; {} parameters (published: {})",
        ds.name,
        config.seed,
        report.mean_accuracy,
        report.std_accuracy,
        report.std_error,
        folds.len(),
        parameter_count,
        PUBLISHED_PARAMETER_COUNT
    ));
    Ok(report)
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainSummary {
    pub checkpoint: Checkpoint,
    pub parameter_count: usize,
    pub training_accuracy: f64,
}

pub fn cmd_train(config: &RunConfig) -> Result<TrainSummary> {
    let forward = config.validate()?;
    let ds = load_dataset(config)?;
    let graphs: Vec<&Graph> = ds.graphs.iter().collect();
    let trained = train_classifier(&graphs, ds.feature_dim(), &config.train_settings(forward, config.seed))?;
    write_trace(&config.trace_dir, "model.csv", &trained.model_trace)?;
    let checkpoint = Checkpoint {
        params: trained.params,
        config: forward,
        seed: config.seed,
    };
    checkpoint
        .save(&config.output_path)
        .map_err(|e| CliError::Usage(e.to_string()))?;
    let parameter_count = count_parameters(&checkpoint.params);
    let training_accuracy = accuracy(&graphs, &checkpoint.params, &forward)?;
    if let Some(w) = trained.warning {
        say(format!("warning: {w}"));
    }
    say(format!(
        "parameter_count {parameter_count} (published: {PUBLISHED_PARAMETER_COUNT}); training accuracy {training_accuracy:.4}; checkpoint {}",
        config.output_path.display()
    ));
    Ok(TrainSummary {
        checkpoint,
        parameter_count,
        training_accuracy,
    })
}

pub fn cmd_eval(checkpoint: &Path, config: &RunConfig) -> Result<Report> {
    let start = Instant::now();
    let cp = Checkpoint::load(checkpoint)?;
    let ds = load_dataset(config)?;
    if cp.params.mapping.dimension() != ds.feature_dim() {
        return Err(CliError::CheckpointDimensionMismatch {
            expected: cp.params.mapping.dimension(),
            found: ds.feature_dim(),
        });
    }
    let graphs: Vec<&Graph> = ds.graphs.iter().collect();
    let acc = accuracy(&graphs, &cp.params, &cp.config)?;
    let mut echo = config.clone();
    echo.layers = cp.params.layer_count();
    echo.capacity = cp.config.capacity;
    echo.entanglement = cp.config.entanglement;
    echo.seed = cp.seed;
    let mut report = Report::new("eval", &echo, vec![acc], vec![graphs.len()], count_parameters(&cp.params));
    if config.record_timing {
        report.wall_time_seconds = Some(start.elapsed().as_secs_f64());
    }
    report.write(&config.output_path)?;
    say(format!("{}: accuracy {acc:.4} on {} graphs", ds.name, graphs.len()));
    Ok(report)
}

fn with_workers<T: Send>(workers: Option<usize>, f: impl FnOnce() -> Result<T> + Send) -> Result<T> {
    match workers {
        None => f(),
        Some(0) => Err(CliError::Usage("--workers must be at least 1".into())),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| CliError::Internal(e.to_string()))?
            .install(f),
    }
}

/// Parses `args` (program name first), runs the command and returns the
/// process exit status. Errors are printed to standard error.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let result = match cli.command {
        Command::Crossvalidate(a) => {
            let workers = a.workers;
            let config = RunConfig::from_args(a, "report.json");
            with_workers(workers, || cmd_crossvalidate(&config).map(|_| ()))
        }
        Command::Train(a) => {
            let workers = a.workers;
            let config = RunConfig::from_args(a, "model.ckpt");
            with_workers(workers, || cmd_train(&config).map(|_| ()))
        }
        Command::Eval(a) => {
            let mut config = RunConfig::new(
                a.dataset_dir.unwrap_or_else(|| Path::new("data").join(&a.dataset)),
                &a.dataset,
                a.out.unwrap_or_else(|| "eval.json".into()),
            );
            config.record_timing = a.record_timing;
            with_workers(a.workers, || cmd_eval(&a.checkpoint, &config).map(|_| ()))
        }
    };
    match result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graphdata::testing::write_dataset;
    use proptest::prelude::*;

    #[test]
    fn stats_cases() {
        let (m, s) = mean_and_sample_std(&[0.5, 0.7, 0.9]);
        assert!((m - 0.7).abs() < 1e-15);
        assert!((s - 0.2).abs() < 1e-15);
        assert_eq!(mean_and_sample_std(&[0.25]), (0.25, 0.0));
    }

    #[test]
    fn two_folds_on_three_graphs() {
        let folds = stratified_folds(&[0, 1, 0], 2, 7).unwrap();
        let mut sizes: Vec<usize> = folds.iter().map(Vec::len).collect();
        sizes.sort();
        assert_eq!(sizes, vec![1, 2]);
        assert!(stratified_folds(&[0, 1], 3, 0).is_err());
        assert!(matches!(stratified_folds(&[0, 1], 1, 0), Err(CliError::Usage(_))));
    }

    proptest! {
        #[test]
        fn folds_partition_and_stratify(labels in prop::collection::vec(0u8..2, 2..200), k in 2usize..12, seed in any::<u64>()) {
            prop_assume!(labels.len() >= k);
            let folds = stratified_folds(&labels, k, seed).unwrap();
            let mut all: Vec<usize> = folds.iter().flatten().copied().collect();
            all.sort();
            prop_assert_eq!(all, (0..labels.len()).collect::<Vec<_>>());
            let sizes: Vec<usize> = folds.iter().map(Vec::len).collect();
            prop_assert!(sizes.iter().max().unwrap() - sizes.iter().min().unwrap() <= 1);
            let ones = labels.iter().filter(|&&l| l == 1).count() as f64;
            let ratio = ones / labels.len() as f64;
            for f in &folds {
                let fold_ones = f.iter().filter(|&&i| labels[i] == 1).count() as f64;
                prop_assert!((fold_ones - ratio * f.len() as f64).abs() <= 1.0 + 1e-9);
            }
            prop_assert_eq!(folds.clone(), stratified_folds(&labels, k, seed).unwrap());
        }
    }

    /// Ten graphs whose class tracks size: paths of 2 nodes against paths
    /// of 8 nodes.
    fn write_toy(dir: &Path) {
        let mut a = String::new();
        let mut ind = String::new();
        let mut gl = String::new();
        let mut nl = String::new();
        let mut base = 1;
        for g in 0..10 {
            let n = if g % 2 == 0 { 2 } else { 8 };
            for v in 0..n {
                ind.push_str(&format!("{}\n", g + 1));
                nl.push_str(&format!("{}\n", v % 3));
                if v + 1 < n {
                    a.push_str(&format!("{}, {}\n{}, {}\n", base + v, base + v + 1, base + v + 1, base + v));
                }
            }
            gl.push_str(if g % 2 == 0 { "-1\n" } else { "1\n" });
            base += n;
        }
        write_dataset(dir, "TOY", &a, &ind, &gl, &nl);
    }

    fn toy_config(dir: &Path) -> RunConfig {
        let mut c = RunConfig::new(dir, "TOY", dir.join("report.json"));
        c.folds = 5;
        c.seed = 3;
        c.layers = 1;
        c.mapping_budget = 60;
        c.model_budget = 150;
        c
    }

    #[test]
    fn separable_toy_set_cross_validates_perfectly() {
        let dir = tempfile::tempdir().unwrap();
        write_toy(dir.path());
        let report = cmd_crossvalidate(&toy_config(dir.path())).unwrap();
        assert_eq!(report.per_fold_accuracy.len(), 5);
        assert_eq!(report.mean_accuracy, 1.0, "{report:?}");
        assert_eq!(report.fold_sizes, vec![2; 5]);
        let written: Report = serde_json::from_str(&fs::read_to_string(dir.path().join("report.json")).unwrap()).unwrap();
        assert_eq!(written, report);
        assert!(written.wall_time_seconds.is_none());
    }

    #[test]
    fn train_then_eval_agree() {
        let dir = tempfile::tempdir().unwrap();
        write_toy(dir.path());
        let mut c = toy_config(dir.path());
        c.output_path = dir.path().join("m.ckpt");
        let summary = cmd_train(&c).unwrap();
        assert_eq!(summary.parameter_count, 6 + 2 + 3);
        let mut e = c.clone();
        e.output_path = dir.path().join("eval.json");
        let report = cmd_eval(&c.output_path, &e).unwrap();
        assert_eq!(report.mean_accuracy, summary.training_accuracy);
        assert_eq!(report.parameter_count, summary.parameter_count);
        assert_eq!(report.published_parameter_count, 43);
    }

    #[test]
    fn zero_budget_train_writes_initial_checkpoint() {
        let dir = tempfile::tempdir().unwrap();
        write_toy(dir.path());
        let mut c = toy_config(dir.path());
        c.mapping_budget = 0;
        c.model_budget = 0;
        c.output_path = dir.path().join("m.ckpt");
        let summary = cmd_train(&c).unwrap();
        assert_eq!(Checkpoint::load(&c.output_path).unwrap(), summary.checkpoint);
        assert_eq!(summary.checkpoint.params.mapping, MappingParams::random(3, 3));
    }

    #[test]
    fn error_kinds_map_to_exit_codes() {
        let dir = tempfile::tempdir().unwrap();
        let c = toy_config(dir.path());
        let e = cmd_crossvalidate(&c).unwrap_err();
        assert_eq!(e.exit_code(), 2);
        assert!(e.to_string().contains("TOY_A.txt"), "{e}");

        write_toy(dir.path());
        let mut bad = toy_config(dir.path());
        bad.folds = 1;
        assert_eq!(cmd_crossvalidate(&bad).unwrap_err().exit_code(), 1);
        bad.folds = 11;
        assert_eq!(cmd_crossvalidate(&bad).unwrap_err().exit_code(), 2);
        let mut bad = toy_config(dir.path());
        bad.capacity = 0;
        assert_eq!(cmd_train(&bad).unwrap_err().exit_code(), 1);
    }

    #[test]
    fn eval_rejects_mismatched_checkpoint() {
        let dir = tempfile::tempdir().unwrap();
        write_toy(dir.path());
        let cp = Checkpoint {
            params: ModelParams::random(3, MappingParams::identity(7), 1).unwrap(),
            config: ForwardConfig::default(),
            seed: 1,
        };
        let path = dir.path().join("d7.ckpt");
        cp.save(&path).unwrap();
        let e = cmd_eval(&path, &toy_config(dir.path())).unwrap_err();
        assert!(matches!(e, CliError::CheckpointDimensionMismatch { expected: 7, found: 3 }));
        assert_eq!(e.exit_code(), 2);
    }
}
