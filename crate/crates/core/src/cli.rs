//! Command-line front end.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand};
use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

use crate::classifiers::{write_importance_csv, ModelKind, ModelParams, TrainedModel};
use crate::data::{load_dataset, MtsDataset};
use crate::error::{Error, Result};
use crate::evaluation::{accuracy, summarize, ResultsTable, TieConvention};
use crate::features::FeatureCatalog;
use crate::interpret::{self, VarianceKind};
use crate::preprocess::{self, FittedPreprocessor, ImputationMode, Split};
use crate::tabular::{extract_dataset, read_feature_csv, split_column_name, write_feature_csv, FeatureMatrix};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Parser)]
#[command(
    name = "cmfmts",
    version,
    about = "Feature-based multivariate time series classification"
)]
pub struct Cli {
    /// Worker threads for extraction and forest training.
    #[arg(long, global = true, env = "CMFMTS_JOBS")]
    pub jobs: Option<usize>,

    /// Omit wall-clock timestamps from log files.
    #[arg(long, global = true)]
    pub no_timestamp: bool,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Compute per-channel feature matrices from .ts or long CSV files.
    Extract(ExtractArgs),
    /// Fit the cleaning/imputation step on train features and apply it.
    Preprocess(PreprocessArgs),
    /// Train one classifier on a cleaned feature CSV.
    Fit(FitArgs),
    /// Predict labels for a cleaned feature CSV.
    Predict(PredictArgs),
    /// Full pipeline: extract, preprocess, fit, predict and report.
    Run(RunArgs),
    /// Average ranks, Win/Loss/Tie and critical difference from results.
    Rank(RankArgs),
    /// Importance reports across one or more fitted forests.
    Importance(ImportanceArgs),
    /// Print the feature catalog reference as markdown.
    Catalog(CatalogArgs),
}

#[derive(Debug, Args)]
pub struct ExtractArgs {
    #[arg(long)]
    pub train: PathBuf,
    #[arg(long)]
    pub test: Option<PathBuf>,
    #[arg(short, long)]
    pub out: PathBuf,
    /// `all` or a comma-separated list of feature names.
    #[arg(long, default_value = "all")]
    pub features: String,
}

#[derive(Debug, Args)]
pub struct PreprocessArgs {
    #[arg(long)]
    pub train_features: PathBuf,
    #[arg(long)]
    pub test_features: Option<PathBuf>,
    #[arg(short, long)]
    pub out: PathBuf,
    /// `per-split` or `train-means`.
    #[arg(long, default_value = "per-split")]
    pub imputation: String,
}

#[derive(Debug, Args, Default, Clone)]
pub struct ModelArgs {
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub n_trees: Option<usize>,
    #[arg(long)]
    pub mtry: Option<usize>,
    #[arg(long)]
    pub min_leaf: Option<usize>,
    #[arg(long)]
    pub max_depth: Option<usize>,
    #[arg(long)]
    pub n_rounds: Option<usize>,
    /// Train every forest tree on the full training set.
    #[arg(long)]
    pub no_bootstrap: bool,
}

#[derive(Debug, Args)]
pub struct FitArgs {
    /// Cleaned training feature CSV.
    #[arg(long)]
    pub train_features: PathBuf,
    /// tree, boosted, rf or 1nn.
    #[arg(long)]
    pub model: String,
    #[arg(short, long)]
    pub out: PathBuf,
    #[arg(long)]
    pub dataset: Option<String>,
    /// Number of channels; inferred from column names when omitted.
    #[arg(long)]
    pub dims: Option<usize>,
    #[arg(long, default_value = "all")]
    pub features: String,
    /// Also write forest importances to this CSV.
    #[arg(long)]
    pub importance: Option<PathBuf>,
    #[command(flatten)]
    pub params: ModelArgs,
}

#[derive(Debug, Args)]
pub struct PredictArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub features: PathBuf,
    #[arg(short, long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    /// Flat JSON config; command-line flags override its values.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub train: Option<PathBuf>,
    #[arg(long)]
    pub test: Option<PathBuf>,
    #[arg(short, long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub dataset: Option<String>,
    /// Comma-separated list of models.
    #[arg(long)]
    pub models: Option<String>,
    #[arg(long)]
    pub features: Option<String>,
    #[arg(long)]
    pub imputation: Option<String>,
    #[command(flatten)]
    pub params: ModelArgs,
}

#[derive(Debug, Args)]
pub struct RankArgs {
    /// Long-form `dataset,method,accuracy` CSV.
    #[arg(long)]
    pub results: PathBuf,
    #[arg(long, default_value_t = 0.05)]
    pub alpha: f64,
    /// `exclusive` or `inclusive`.
    #[arg(long, default_value = "exclusive")]
    pub tie_convention: String,
    #[arg(short, long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct ImportanceArgs {
    /// Forest model files, one per dataset.
    #[arg(long, required = true, num_args = 1..)]
    pub models: Vec<PathBuf>,
    #[arg(short, long)]
    pub out: PathBuf,
    /// `sample` or `population`.
    #[arg(long, default_value = "sample")]
    pub variance: String,
    #[arg(long, default_value_t = 10)]
    pub bins: usize,
}

#[derive(Debug, Args)]
pub struct CatalogArgs {
    #[arg(long, default_value = "all")]
    pub features: String,
    #[arg(short, long)]
    pub out: Option<PathBuf>,
}

/// Settings for `run`, as read from a JSON config file.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub train: Option<PathBuf>,
    pub test: Option<PathBuf>,
    pub out: Option<PathBuf>,
    pub dataset: Option<String>,
    pub models: Option<Vec<String>>,
    pub features: Option<String>,
    pub imputation: Option<String>,
    pub seed: Option<u64>,
    pub n_trees: Option<usize>,
    pub mtry: Option<usize>,
    pub min_leaf: Option<usize>,
    pub max_depth: Option<usize>,
    pub n_rounds: Option<usize>,
    pub bootstrap: Option<bool>,
    pub jobs: Option<usize>,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<RunConfig> {
        let text = read_text(path)?;
        serde_json::from_str(&text).map_err(|e| Error::Config(format!("config {}: {e}", path.display())))
    }

    /// Flag values win over config values.
    fn merge(mut self, args: &RunArgs, jobs: Option<usize>) -> RunConfig {
        let p = &args.params;
        self.train = args.train.clone().or(self.train);
        self.test = args.test.clone().or(self.test);
        self.out = args.out.clone().or(self.out);
        self.dataset = args.dataset.clone().or(self.dataset);
        self.models = args
            .models
            .as_ref()
            .map(|m| {
                m.split(',')
                    .map(|s| s.trim().to_string())
                    .filter(|s| !s.is_empty())
                    .collect()
            })
            .or(self.models);
        self.features = args.features.clone().or(self.features);
        self.imputation = args.imputation.clone().or(self.imputation);
        self.seed = p.seed.or(self.seed);
        self.n_trees = p.n_trees.or(self.n_trees);
        self.mtry = p.mtry.or(self.mtry);
        self.min_leaf = p.min_leaf.or(self.min_leaf);
        self.max_depth = p.max_depth.or(self.max_depth);
        self.n_rounds = p.n_rounds.or(self.n_rounds);
        if p.no_bootstrap {
            self.bootstrap = Some(false);
        }
        self.jobs = jobs.or(self.jobs);
        self
    }
}

#[derive(Debug, Serialize)]
struct Manifest<'a> {
    tool: &'static str,
    version: &'static str,
    command: &'static str,
    config: &'a RunConfig,
    seed: Option<u64>,
    catalog: Vec<&'static str>,
    catalog_hash: String,
}

fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

fn write_bytes(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

fn write_with(path: &Path, f: impl FnOnce(&mut Vec<u8>) -> Result<()>) -> Result<()> {
    let mut buf = Vec::new();
    f(&mut buf)?;
    write_bytes(path, &buf)
}

fn ensure_exists(path: &Path) -> Result<()> {
    fs::metadata(path).map(|_| ()).map_err(|e| Error::io(path, e))
}

fn read_matrix(path: &Path) -> Result<FeatureMatrix> {
    let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_feature_csv(file, None)
}

/// Log text with an optional timestamp header line.
struct Log {
    text: String,
}

impl Log {
    fn new(command: &str, timestamp: bool) -> Log {
        let mut text = format!("cmfmts {VERSION} {command}\n");
        if timestamp {
            let secs = SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs());
            text.push_str(&format!("started_unix {secs}\n"));
        }
        Log { text }
    }

    fn line(&mut self, s: impl AsRef<str>) {
        self.text.push_str(s.as_ref());
        self.text.push('\n');
    }
}

fn dataset_name(ds: &MtsDataset) -> String {
    let name = ds.name.as_str();
    for suffix in ["_TRAIN", "_train", "_Train"] {
        if let Some(stem) = name.strip_suffix(suffix) {
            return stem.to_string();
        }
    }
    name.to_string()
}

fn na_counts_by_feature(matrix: &FeatureMatrix) -> IndexMap<String, usize> {
    let mut out = IndexMap::new();
    for j in 0..matrix.n_cols() {
        let name = &matrix.column_names[j];
        let feature = split_column_name(name).map_or(name.as_str(), |(_, f)| f);
        let na = matrix.rows.iter().filter(|r| r[j].is_none()).count();
        *out.entry(feature.to_string()).or_insert(0) += na;
    }
    out
}

fn log_na_counts(log: &mut Log, split: &str, matrix: &FeatureMatrix) {
    for (f, n) in na_counts_by_feature(matrix) {
        log.line(format!("na\t{split}\t{f}\t{n}"));
    }
}

fn infer_dims(columns: &[String]) -> usize {
    columns
        .iter()
        .filter_map(|c| split_column_name(c))
        .map(|(d, _)| d)
        .max()
        .unwrap_or(0)
}

fn model_params(cfg: &RunConfig) -> ModelParams {
    let mut p = ModelParams::default();
    if let Some(v) = cfg.min_leaf {
        p.tree.min_leaf = v;
        p.boost.tree.min_leaf = v;
        p.forest.min_leaf = v;
    }
    if let Some(v) = cfg.max_depth {
        p.tree.max_depth = Some(v);
        p.boost.tree.max_depth = Some(v);
        p.forest.max_depth = Some(v);
    }
    if let Some(v) = cfg.n_trees {
        p.forest.n_trees = v;
    }
    p.forest.mtry = cfg.mtry.or(p.forest.mtry);
    if let Some(v) = cfg.n_rounds {
        p.boost.n_rounds = v;
    }
    if let Some(b) = cfg.bootstrap {
        p.forest.bootstrap = b;
    }
    if let Some(s) = cfg.seed {
        p.forest.seed = s;
    }
    p
}

fn params_from_args(args: &ModelArgs) -> RunConfig {
    RunConfig {
        seed: args.seed,
        n_trees: args.n_trees,
        mtry: args.mtry,
        min_leaf: args.min_leaf,
        max_depth: args.max_depth,
        n_rounds: args.n_rounds,
        bootstrap: args.no_bootstrap.then_some(false),
        ..RunConfig::default()
    }
}

fn parse_models(names: &[String]) -> Result<Vec<ModelKind>> {
    if names.is_empty() {
        return Err(Error::Config("no models configured".into()));
    }
    names.iter().map(|n| n.parse()).collect()
}

fn require_seed(kinds: &[ModelKind], seed: Option<u64>) -> Result<()> {
    if kinds.contains(&ModelKind::Forest) && seed.is_none() {
        return Err(Error::Config(
            "a seed is required for random forest models (--seed)".into(),
        ));
    }
    Ok(())
}

fn write_predictions(path: &Path, matrix: &FeatureMatrix, predicted: &[String]) -> Result<()> {
    write_with(path, |buf| {
        let mut w = csv::Writer::from_writer(buf);
        w.write_record(["id", "label", "predicted"])?;
        for ((id, label), p) in matrix.instance_ids.iter().zip(&matrix.labels).zip(predicted) {
            w.write_record([id, label, p])?;
        }
        w.flush().map_err(|e| Error::io(path, e))
    })
}

fn write_forest_reports(dir: &Path, model: &TrainedModel, bins: usize) -> Result<()> {
    let importance = model.importance().expect("forest model");
    write_with(&dir.join("importance_columns.csv"), |b| {
        write_importance_csv(&model.columns, importance, b)
    })?;
    let features = [interpret::feature_importance_of_model(model)?];
    write_with(&dir.join("feature_importance.csv"), |b| {
        interpret::write_heatmap_csv(&features, b)
    })?;
    let variables = [interpret::variable_importance_of_model(model, VarianceKind::default())?];
    write_with(&dir.join("variable_importance.csv"), |b| {
        interpret::write_variable_csv(&variables, b)
    })?;
    write_with(&dir.join("variable_stats.csv"), |b| {
        interpret::write_stats_csv(&variables, b)
    })?;
    write_with(&dir.join("variable_histogram.csv"), |b| {
        interpret::write_histogram_csv(&variables, bins, b)
    })
}

fn cmd_extract(args: &ExtractArgs, timestamp: bool) -> Result<()> {
    ensure_exists(&args.train)?;
    if let Some(t) = &args.test {
        ensure_exists(t)?;
    }
    let catalog = FeatureCatalog::parse(&args.features)?;
    let mut log = Log::new("extract", timestamp);
    log.line(format!("catalog_hash {}", catalog.hash()));
    let mut splits = vec![("train", &args.train)];
    if let Some(t) = &args.test {
        splits.push(("test", t));
    }
    for (split, path) in splits {
        let ds = load_dataset(path)?;
        let matrix = extract_dataset(&ds, &catalog);
        log.line(format!("{split} rows {} columns {}", matrix.n_rows(), matrix.n_cols()));
        log_na_counts(&mut log, split, &matrix);
        let out = args.out.join(format!("{split}_features.csv"));
        write_with(&out, |b| write_feature_csv(&matrix, b))?;
        println!(
            "{split}: {} x {} -> {}",
            matrix.n_rows(),
            matrix.n_cols(),
            out.display()
        );
    }
    write_bytes(&args.out.join("extraction_log.txt"), log.text.as_bytes())
}

fn cmd_preprocess(args: &PreprocessArgs) -> Result<()> {
    let mode: ImputationMode = args.imputation.parse()?;
    let train = read_matrix(&args.train_features)?;
    let test = args.test_features.as_deref().map(read_matrix).transpose()?;
    let pre = preprocess::fit(&train)?;
    write_bytes(&args.out.join("preprocessor.json"), pre.to_json()?.as_bytes())?;
    let clean = pre.transform(&train, Split::Train, mode)?;
    write_with(&args.out.join("train_clean.csv"), |b| write_feature_csv(&clean, b))?;
    if let Some(test) = test {
        let clean = pre.transform(&test, Split::Test, mode)?;
        write_with(&args.out.join("test_clean.csv"), |b| write_feature_csv(&clean, b))?;
    }
    println!(
        "kept {} columns, dropped {} all-NA and {} constant",
        pre.train_means.len(),
        pre.dropped_all_na.len(),
        pre.dropped_constant.len()
    );
    Ok(())
}

fn cmd_fit(args: &FitArgs) -> Result<()> {
    let kind: ModelKind = args.model.parse()?;
    require_seed(&[kind], args.params.seed)?;
    let catalog = FeatureCatalog::parse(&args.features)?;
    let train = read_matrix(&args.train_features)?;
    let dims = args.dims.unwrap_or_else(|| infer_dims(&train.column_names));
    let dataset = args.dataset.clone().unwrap_or_else(|| {
        args.train_features
            .file_stem()
            .map_or_else(String::new, |s| s.to_string_lossy().into_owned())
    });
    let names: Vec<String> = catalog.names().into_iter().map(String::from).collect();
    let params = model_params(&params_from_args(&args.params));
    let model = TrainedModel::fit(kind, &train, &params, &dataset, dims, &names)?;
    write_bytes(&args.out, model.to_json()?.as_bytes())?;
    if let (Some(path), Some(imp)) = (&args.importance, model.importance()) {
        write_with(path, |b| write_importance_csv(&model.columns, imp, b))?;
    }
    println!("fitted {kind} on {} rows -> {}", train.n_rows(), args.out.display());
    Ok(())
}

fn cmd_predict(args: &PredictArgs) -> Result<()> {
    let model = TrainedModel::from_json(&read_text(&args.model)?)?;
    let matrix = read_matrix(&args.features)?;
    let predicted = model.predict(&matrix)?;
    write_predictions(&args.out, &matrix, &predicted)?;
    if !matrix.labels.is_empty() && matrix.labels.iter().all(|l| !l.is_empty()) {
        println!("accuracy {:.6}", accuracy(&predicted, &matrix.labels)?);
    }
    Ok(())
}

/// Runs the whole pipeline for a resolved configuration.
pub fn run_pipeline(cfg: &RunConfig, timestamp: bool) -> Result<Vec<(ModelKind, f64)>> {
    let train_path = cfg
        .train
        .as_deref()
        .ok_or_else(|| Error::Config("missing train path".into()))?;
    let test_path = cfg
        .test
        .as_deref()
        .ok_or_else(|| Error::Config("missing test path".into()))?;
    let out = cfg
        .out
        .as_deref()
        .ok_or_else(|| Error::Config("missing output directory".into()))?;
    ensure_exists(train_path)?;
    ensure_exists(test_path)?;
    let default_models = vec!["rf".to_string()];
    let kinds = parse_models(cfg.models.as_ref().unwrap_or(&default_models))?;
    require_seed(&kinds, cfg.seed)?;
    let catalog = FeatureCatalog::parse(cfg.features.as_deref().unwrap_or("all"))?;
    let mode: ImputationMode = cfg.imputation.as_deref().unwrap_or("per-split").parse()?;
    let params = model_params(cfg);

    let mut log = Log::new("run", timestamp);
    let train = load_dataset(train_path).map_err(|e| e.in_stage("load"))?;
    let test = load_dataset(test_path).map_err(|e| e.in_stage("load"))?;
    if train.dims != test.dims {
        return Err(
            Error::Dataset(format!("train has {} channels but test has {}", train.dims, test.dims)).in_stage("load"),
        );
    }
    let dataset = cfg.dataset.clone().unwrap_or_else(|| dataset_name(&train));
    log.line(format!(
        "dataset {dataset} train {} test {} dims {}",
        train.len(),
        test.len(),
        train.dims
    ));

    let train_m = extract_dataset(&train, &catalog);
    let test_m = extract_dataset(&test, &catalog);
    log_na_counts(&mut log, "train", &train_m);
    log_na_counts(&mut log, "test", &test_m);
    let feat_dir = out.join("features");
    write_with(&feat_dir.join("train_features.csv"), |b| write_feature_csv(&train_m, b))?;
    write_with(&feat_dir.join("test_features.csv"), |b| write_feature_csv(&test_m, b))?;

    let pre: FittedPreprocessor = preprocess::fit(&train_m).map_err(|e| e.in_stage("preprocess"))?;
    let train_c = pre
        .transform(&train_m, Split::Train, mode)
        .map_err(|e| e.in_stage("preprocess"))?;
    let test_c = pre
        .transform(&test_m, Split::Test, mode)
        .map_err(|e| e.in_stage("preprocess"))?;
    write_bytes(&out.join("preprocessor.json"), pre.to_json()?.as_bytes())?;
    log.line(format!(
        "preprocess kept {} dropped_all_na {} dropped_constant {}",
        pre.train_means.len(),
        pre.dropped_all_na.len(),
        pre.dropped_constant.len()
    ));

    let names: Vec<String> = catalog.names().into_iter().map(String::from).collect();
    let mut results = Vec::new();
    let mut results_csv = String::from("dataset,method,accuracy\n");
    for kind in kinds {
        let model =
            TrainedModel::fit(kind, &train_c, &params, &dataset, train.dims, &names).map_err(|e| e.in_stage("fit"))?;
        let predicted = model.predict(&test_c).map_err(|e| e.in_stage("predict"))?;
        let acc = accuracy(&predicted, &test_c.labels).map_err(|e| e.in_stage("evaluate"))?;
        write_bytes(&out.join(format!("model_{kind}.json")), model.to_json()?.as_bytes())?;
        write_predictions(&out.join(format!("predictions_{kind}.csv")), &test_c, &predicted)?;
        if model.importance().is_some() {
            write_forest_reports(out, &model, 10).map_err(|e| e.in_stage("importance"))?;
        }
        log.line(format!("accuracy {kind} {acc:.6}"));
        results_csv.push_str(&format!("{dataset},{kind},{acc}\n"));
        println!("{dataset} {kind} accuracy {acc:.4}");
        results.push((kind, acc));
    }
    write_bytes(&out.join("results.csv"), results_csv.as_bytes())?;

    let manifest = Manifest {
        tool: "cmfmts",
        version: VERSION,
        command: "run",
        config: cfg,
        seed: cfg.seed,
        catalog: catalog.names(),
        catalog_hash: catalog.hash(),
    };
    write_bytes(
        &out.join("manifest.json"),
        serde_json::to_string_pretty(&manifest)?.as_bytes(),
    )?;
    write_bytes(&out.join("run.log"), log.text.as_bytes())?;
    Ok(results)
}

fn cmd_run(args: &RunArgs, jobs: Option<usize>, timestamp: bool) -> Result<()> {
    let base = match &args.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    let cfg = base.merge(args, jobs);
    with_jobs(cfg.jobs, || run_pipeline(&cfg, timestamp)).map(|_| ())
}

fn cmd_rank(args: &RankArgs) -> Result<()> {
    let convention: TieConvention = args.tie_convention.parse()?;
    let file = fs::File::open(&args.results).map_err(|e| Error::io(&args.results, e))?;
    let table = ResultsTable::read_csv(file)?;
    if table.k() < 2 {
        return Err(Error::Evaluation("ranking needs at least 2 methods".into()));
    }
    let summary = summarize(&table, args.alpha, convention)?;
    write_with(&args.out.join("summary.csv"), |b| summary.write_summary_csv(b))?;
    write_with(&args.out.join("cd.csv"), |b| summary.write_cd_csv(b))?;
    for (i, m) in summary.methods.iter().enumerate() {
        let w = summary.win_loss_tie[i];
        println!(
            "{m}\trank {:.3}\t{}/{}/{}",
            summary.average_rank[i], w.wins, w.losses, w.ties
        );
    }
    println!(
        "friedman {:.3}  cd({}) {:.3}",
        summary.friedman_statistic, summary.alpha, summary.cd
    );
    Ok(())
}

fn cmd_importance(args: &ImportanceArgs) -> Result<()> {
    let kind: VarianceKind = args.variance.parse()?;
    let mut features = Vec::new();
    let mut variables = Vec::new();
    for path in &args.models {
        let model = TrainedModel::from_json(&read_text(path)?)?;
        features.push(interpret::feature_importance_of_model(&model)?);
        variables.push(interpret::variable_importance_of_model(&model, kind)?);
    }
    let average = interpret::average_feature_importance(&features)?;
    let out = &args.out;
    write_with(&out.join("feature_importance.csv"), |b| {
        interpret::write_heatmap_csv(&features, b)
    })?;
    write_with(&out.join("feature_importance_ordered.csv"), |b| {
        interpret::write_ordered_heatmap_csv(&features, b)
    })?;
    write_with(&out.join("feature_importance_average.csv"), |b| {
        interpret::write_average_csv(&average, b)
    })?;
    write_with(&out.join("variable_importance.csv"), |b| {
        interpret::write_variable_csv(&variables, b)
    })?;
    write_with(&out.join("variable_stats.csv"), |b| {
        interpret::write_stats_csv(&variables, b)
    })?;
    write_with(&out.join("variable_histogram.csv"), |b| {
        interpret::write_histogram_csv(&variables, args.bins, b)
    })?;
    for f in features.iter().filter(|f| f.degenerate) {
        eprintln!("warning: {} has equal importance for every feature", f.dataset);
    }
    println!(
        "wrote importance reports for {} datasets to {}",
        features.len(),
        out.display()
    );
    Ok(())
}

fn cmd_catalog(args: &CatalogArgs) -> Result<()> {
    let md = FeatureCatalog::parse(&args.features)?.reference_markdown();
    match &args.out {
        Some(p) => write_bytes(p, md.as_bytes()),
        None => {
            print!("{md}");
            Ok(())
        }
    }
}

fn with_jobs<T: Send>(jobs: Option<usize>, f: impl FnOnce() -> Result<T> + Send) -> Result<T> {
    match jobs {
        Some(0) => Err(Error::Config("--jobs must be at least 1".into())),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Error::Config(format!("cannot start {n} worker threads: {e}")))?
            .install(f),
        None => f(),
    }
}

pub fn execute(cli: Cli) -> Result<()> {
    let timestamp = !cli.no_timestamp;
    match &cli.command {
        Command::Run(args) => cmd_run(args, cli.jobs, timestamp),
        other => with_jobs(cli.jobs, || match other {
            Command::Extract(a) => cmd_extract(a, timestamp),
            Command::Preprocess(a) => cmd_preprocess(a),
            Command::Fit(a) => cmd_fit(a),
            Command::Predict(a) => cmd_predict(a),
            Command::Rank(a) => cmd_rank(a),
            Command::Importance(a) => cmd_importance(a),
            Command::Catalog(a) => cmd_catalog(a),
            Command::Run(_) => unreachable!(),
        }),
    }
}

/// Parses arguments, runs the command and returns the process exit code:
/// 0 on success, 1 for computation failures, 2 for bad input.
pub fn main_exit() -> i32 {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_input_error() {
                2
            } else {
                1
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn cli_definition_is_valid() {
        Cli::command().debug_assert();
    }

    #[test]
    fn flags_override_config() {
        let cfg = RunConfig {
            seed: Some(1),
            n_trees: Some(50),
            models: Some(vec!["rf".into()]),
            ..RunConfig::default()
        };
        let args = RunArgs {
            config: None,
            train: None,
            test: None,
            out: None,
            dataset: None,
            models: Some("rf, 1nn".into()),
            features: None,
            imputation: None,
            params: ModelArgs {
                seed: Some(9),
                ..ModelArgs::default()
            },
        };
        let merged = cfg.merge(&args, Some(2));
        assert_eq!(merged.seed, Some(9));
        assert_eq!(merged.n_trees, Some(50));
        assert_eq!(merged.models, Some(vec!["rf".to_string(), "1nn".to_string()]));
        assert_eq!(merged.jobs, Some(2));
    }

    #[test]
    fn unknown_config_keys_are_rejected() {
        assert!(serde_json::from_str::<RunConfig>(r#"{"sed": 1}"#).is_err());
    }

    #[test]
    fn rf_needs_a_seed() {
        assert!(require_seed(&[ModelKind::Forest], None).is_err());
        assert!(require_seed(&[ModelKind::Nn], None).is_ok());
    }

    #[test]
    fn dims_inferred_from_columns() {
        assert_eq!(infer_dims(&["var3_trend".into(), "var1_x_acf1".into()]), 3);
    }
}
