//! `contour-bench` command line: dataset conversion, composition stats,
//! manifest validation, baseline prediction and evaluation.
//!
//! Exit codes: 0 success, 1 data errors, 2 usage errors.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use contour_bench::baseline::{predict_gradient, BaselineConfig, Normalize};
use contour_bench::dataset::{
    build_manifest, read_records, stats, validate_manifest, BuildOptions, Split, TripletRecord,
};
use contour_bench::m2c::{ClassTable, Connectivity};
use contour_bench::matching::SizeRule;
use contour_bench::metrics::{
    evaluate, EvalParams, EvalReport, MatchMode, DEFAULT_D_MAX, DEFAULT_IOU_KERNEL,
    DEFAULT_THRESHOLDS,
};
use contour_bench::raster::{load_contour, load_gray, load_prob, save_prob, ContourMap, ProbMap, SeShape};
use contour_bench::Error;

pub const EXIT_OK: i32 = 0;
pub const EXIT_DATA: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const WORKERS_ENV: &str = "CONTOUR_BENCH_WORKERS";

#[derive(Debug, Parser)]
#[command(name = "contour-bench", version, about = "Semantic contour dataset and evaluation toolkit")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Convert mask datasets into contour maps and a triplet manifest
    Convert(ConvertArgs),
    /// Print per-source and per-class sample composition of a manifest
    Stats(StatsArgs),
    /// Check a manifest for schema, file, duplicate and prompt problems
    Validate(ValidateArgs),
    /// Write gradient-baseline probability maps for every manifest record
    PredictBaseline(PredictArgs),
    /// Score probability maps against a manifest (ODS, OIS, LineIoU)
    Eval(EvalArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Thinning {
    On,
    Off,
    Both,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum KernelShape {
    Square,
    Disk,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SideRule {
    Max,
    Min,
}

fn parse_connectivity(s: &str) -> Result<Connectivity, String> {
    s.parse::<u8>()
        .map_err(|e| e.to_string())
        .and_then(Connectivity::try_from)
}

fn parse_positive(s: &str) -> Result<usize, String> {
    match s.parse::<usize>() {
        Ok(0) => Err("must be at least 1".into()),
        Ok(n) => Ok(n),
        Err(e) => Err(e.to_string()),
    }
}

#[derive(Debug, Clone, Args)]
pub struct WorkerArgs {
    /// Worker threads [default: logical CPU count]
    #[arg(long, env = WORKERS_ENV, value_parser = parse_positive)]
    pub workers: Option<usize>,
}

impl WorkerArgs {
    pub fn resolve(&self) -> usize {
        self.workers.unwrap_or_else(|| {
            std::thread::available_parallelism()
                .map(|n| n.get())
                .unwrap_or(1)
        })
    }
}

#[derive(Debug, Args)]
pub struct ConvertArgs {
    #[arg(long)]
    pub images: PathBuf,
    #[arg(long)]
    pub masks: PathBuf,
    /// JSON list of {"index", "name"} objects
    #[arg(long)]
    pub classes: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value = "custom")]
    pub source: String,
    #[arg(long, default_value = "train")]
    pub split: Split,
    #[arg(long, default_value = "4", value_parser = parse_connectivity)]
    pub connectivity: Connectivity,
    #[arg(long)]
    pub ignore_index: Option<u8>,
    #[command(flatten)]
    pub workers: WorkerArgs,
}

#[derive(Debug, Args)]
pub struct StatsArgs {
    #[arg(long)]
    pub manifest: PathBuf,
    /// Emit JSON instead of a table
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Args)]
pub struct ValidateArgs {
    #[arg(long)]
    pub manifest: PathBuf,
}

#[derive(Debug, Args)]
pub struct PredictArgs {
    #[arg(long)]
    pub manifest: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 1)]
    pub blur_radius: u32,
    /// `max` or `pNN` (percentile in (50, 100])
    #[arg(long, default_value = "max", value_parser = parse_normalize)]
    pub normalize: Normalize,
    #[command(flatten)]
    pub workers: WorkerArgs,
}

fn parse_normalize(s: &str) -> Result<Normalize, String> {
    if s == "max" {
        return Ok(Normalize::GlobalMax);
    }
    let p: f64 = s
        .strip_prefix('p')
        .ok_or_else(|| format!("expected `max` or `pNN`, got {s:?}"))?
        .parse()
        .map_err(|e| format!("{e}"))?;
    if !(p > 50.0 && p <= 100.0) {
        return Err(format!("percentile must be in (50, 100], got {p}"));
    }
    Ok(Normalize::Percentile(p))
}

fn parse_odd_kernel(s: &str) -> Result<u32, String> {
    let k: u32 = s.parse().map_err(|e| format!("{e}"))?;
    if k.is_multiple_of(2) {
        return Err(format!("kernel size must be odd, got {k}"));
    }
    Ok(k)
}

fn parse_thresholds(s: &str) -> Result<usize, String> {
    let k: usize = s.parse().map_err(|e| format!("{e}"))?;
    if k < 2 {
        return Err(format!("need at least 2 thresholds, got {k}"));
    }
    Ok(k)
}

fn parse_d_max(s: &str) -> Result<f64, String> {
    let d: f64 = s.parse().map_err(|e| format!("{e}"))?;
    if !(d > 0.0 && d.is_finite()) {
        return Err(format!("d_max must be positive, got {d}"));
    }
    Ok(d)
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[arg(long)]
    pub manifest: PathBuf,
    /// Directory of `<image_stem>__<class_name>.png` probability maps
    #[arg(long)]
    pub predictions: PathBuf,
    /// Report path (JSON)
    #[arg(long)]
    pub output: PathBuf,
    #[arg(long, default_value_t = DEFAULT_D_MAX, value_parser = parse_d_max)]
    pub d_max: f64,
    #[arg(long, default_value_t = DEFAULT_THRESHOLDS, value_parser = parse_thresholds)]
    pub thresholds: usize,
    #[arg(long, default_value_t = DEFAULT_IOU_KERNEL, value_parser = parse_odd_kernel)]
    pub iou_kernel: u32,
    #[arg(long, value_enum, default_value = "square")]
    pub iou_kernel_shape: KernelShape,
    #[arg(long, value_enum, default_value = "off")]
    pub thinning: Thinning,
    /// Existence-test matching instead of one-to-one (comparison only)
    #[arg(long)]
    pub loose: bool,
    #[arg(long, value_enum, default_value = "max")]
    pub size_rule: SideRule,
    #[arg(long, default_value = "4", value_parser = parse_connectivity)]
    pub connectivity: Connectivity,
    #[command(flatten)]
    pub workers: WorkerArgs,
}

/// Effective evaluation settings echoed into every report.
#[derive(Debug, Clone, Serialize)]
pub struct RunConfig {
    pub command: &'static str,
    pub d_max: f64,
    pub thresholds: usize,
    pub iou_kernel: u32,
    pub iou_kernel_shape: SeShape,
    pub thinning: Thinning,
    pub loose: bool,
    pub size_rule: SizeRule,
    pub connectivity: Connectivity,
    pub workers: usize,
}

#[derive(Debug, Serialize)]
struct CliReport<'a> {
    #[serde(flatten)]
    report: &'a EvalReport<f64>,
    run_config: &'a RunConfig,
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    let result = match cli.command {
        Command::Convert(a) => cmd_convert(&a),
        Command::Stats(a) => cmd_stats(&a),
        Command::Validate(a) => cmd_validate(&a),
        Command::PredictBaseline(a) => cmd_predict_baseline(&a),
        Command::Eval(a) => cmd_eval(&a),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::Domain(_) | Error::Class(_) => EXIT_USAGE,
                _ => EXIT_DATA,
            }
        }
    }
}

pub fn cmd_convert(a: &ConvertArgs) -> Result<i32, Error> {
    let table = ClassTable::load(&a.classes)?;
    let opts = BuildOptions {
        connectivity: a.connectivity,
        source_dataset: a.source.clone(),
        split: a.split,
        ignore_index: a.ignore_index,
        workers: Some(a.workers.resolve()),
        ..BuildOptions::default()
    };
    let outcome = build_manifest(&a.images, &a.masks, &table, &a.out, &opts)?;
    println!("manifest: {}", outcome.manifest_path.display());
    println!("records written: {}", outcome.manifest.records.len());
    println!("pairs skipped (no foreground): {}", outcome.skipped.len());
    println!("errors: {}", outcome.errors.len());
    for e in &outcome.errors {
        eprintln!("  {}: {}", e.path, e.message);
    }
    Ok(if outcome.errors.is_empty() { EXIT_OK } else { EXIT_DATA })
}

pub fn cmd_stats(a: &StatsArgs) -> Result<i32, Error> {
    let records = read_records(&a.manifest)?;
    let comp = stats(&records);
    if a.json {
        let text = serde_json::to_string_pretty(&comp).map_err(|e| Error::Json {
            path: a.manifest.clone(),
            source: e,
        })?;
        println!("{text}");
    } else {
        print!("{}", comp.render_table());
    }
    Ok(EXIT_OK)
}

pub fn cmd_validate(a: &ValidateArgs) -> Result<i32, Error> {
    let violations = validate_manifest(&a.manifest)?;
    if violations.is_empty() {
        println!("{}: ok", a.manifest.display());
        return Ok(EXIT_OK);
    }
    for v in &violations {
        println!("{v}");
    }
    println!("{} violation(s)", violations.len());
    Ok(EXIT_DATA)
}

fn resolve(base: &Path, p: &str) -> PathBuf {
    let p = Path::new(p);
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        base.join(p)
    }
}

fn manifest_base(manifest: &Path) -> PathBuf {
    manifest.parent().map(Path::to_path_buf).unwrap_or_default()
}

/// File name a prediction for `r` is expected under.
pub fn prediction_name(r: &TripletRecord) -> String {
    format!("{}__{}.png", r.image_stem(), r.class_name)
}

pub fn cmd_predict_baseline(a: &PredictArgs) -> Result<i32, Error> {
    let records = read_records(&a.manifest)?;
    let base = manifest_base(&a.manifest);
    let cfg = BaselineConfig {
        blur_radius: a.blur_radius,
        normalize: a.normalize,
    };
    cfg.validate()?;
    fs::create_dir_all(&a.out).map_err(|e| Error::Io {
        path: a.out.clone(),
        source: e,
    })?;
    // the baseline ignores the prompt, so predict once per image
    let mut by_image: BTreeMap<&str, Vec<&TripletRecord>> = BTreeMap::new();
    for r in &records {
        by_image.entry(r.image_path.as_str()).or_default().push(r);
    }
    let pool = rayon_pool(a.workers.resolve())?;
    let results: Vec<Result<usize, Error>> = pool.install(|| {
        use rayon::prelude::*;
        by_image
            .par_iter()
            .map(|(image, recs)| {
                let img = load_gray::<f64>(resolve(&base, image))?;
                let pred = predict_gradient(&img, &cfg)?;
                for r in recs {
                    save_prob(&pred, a.out.join(prediction_name(r)))?;
                }
                Ok(recs.len())
            })
            .collect()
    });
    let mut written = 0;
    let mut failed = 0;
    for r in results {
        match r {
            Ok(n) => written += n,
            Err(e) => {
                failed += 1;
                eprintln!("  {e}");
            }
        }
    }
    println!("predictions written: {written}");
    println!("errors: {failed}");
    Ok(if failed == 0 { EXIT_OK } else { EXIT_DATA })
}

fn rayon_pool(workers: usize) -> Result<rayon::ThreadPool, Error> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::Invalid(format!("cannot build worker pool: {e}")))
}

/// Predictions and ground truth, index-aligned.
pub type EvalInputs = (Vec<ProbMap<f64>>, Vec<ContourMap>);

/// Ground truth and predictions for every manifest record, in manifest
/// order. Missing or unreadable predictions are returned as a list.
pub fn load_eval_inputs(
    manifest: &Path,
    predictions: &Path,
) -> Result<Result<EvalInputs, Vec<String>>, Error> {
    let records = read_records(manifest)?;
    let base = manifest_base(manifest);
    let mut preds = Vec::with_capacity(records.len());
    let mut gts = Vec::with_capacity(records.len());
    let mut problems = Vec::new();
    for r in &records {
        let gt = load_contour(resolve(&base, &r.contour_path))?;
        let path = predictions.join(prediction_name(r));
        if !path.is_file() {
            problems.push(format!("missing prediction {}", path.display()));
            continue;
        }
        match load_prob::<f64>(&path) {
            Ok(p) => {
                preds.push(p);
                gts.push(gt);
            }
            Err(e) => problems.push(e.to_string()),
        }
    }
    if problems.is_empty() {
        Ok(Ok((preds, gts)))
    } else {
        Ok(Err(problems))
    }
}

/// Three decimals with the leading zero dropped (`.772`).
pub fn format_score(x: f64) -> String {
    let s = format!("{x:.3}");
    match s.strip_prefix("0.") {
        Some(rest) => format!(".{rest}"),
        None => s,
    }
}

pub fn score_row(r: &EvalReport<f64>) -> String {
    format!(
        "{:<8}{:<8}{:<8}",
        format_score(r.ods_f),
        format_score(r.ois_f),
        format_score(r.line_iou)
    )
}

fn write_report(path: &Path, report: &EvalReport<f64>, cfg: &RunConfig) -> Result<(), Error> {
    let doc = CliReport {
        report,
        run_config: cfg,
    };
    let mut text = serde_json::to_string_pretty(&doc).map_err(|e| Error::Json {
        path: path.to_path_buf(),
        source: e,
    })?;
    text.push('\n');
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(|e| Error::Io {
            path: parent.to_path_buf(),
            source: e,
        })?;
    }
    fs::write(path, text).map_err(|e| Error::Io {
        path: path.to_path_buf(),
        source: e,
    })
}

/// Report path for the thinned run when `--thinning both` is requested.
pub fn thinned_report_path(output: &Path) -> PathBuf {
    let stem = output
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "report".into());
    output.with_file_name(format!("{stem}.thinning.json"))
}

pub fn eval_params(a: &EvalArgs, thinning: bool) -> EvalParams {
    EvalParams {
        d_max: a.d_max,
        thresholds: a.thresholds,
        iou_kernel: a.iou_kernel,
        iou_kernel_shape: match a.iou_kernel_shape {
            KernelShape::Square => SeShape::Square,
            KernelShape::Disk => SeShape::Disk,
        },
        thinning,
        matching: if a.loose { MatchMode::Loose } else { MatchMode::OneToOne },
        size_rule: match a.size_rule {
            SideRule::Max => SizeRule::MaxSide,
            SideRule::Min => SizeRule::MinSide,
        },
    }
}

pub fn cmd_eval(a: &EvalArgs) -> Result<i32, Error> {
    let (preds, gts) = match load_eval_inputs(&a.manifest, &a.predictions)? {
        Ok(v) => v,
        Err(problems) => {
            for p in &problems {
                eprintln!("  {p}");
            }
            eprintln!("{} record(s) without a usable prediction", problems.len());
            return Ok(EXIT_DATA);
        }
    };
    let workers = a.workers.resolve();
    let cfg = RunConfig {
        command: "eval",
        d_max: a.d_max,
        thresholds: a.thresholds,
        iou_kernel: a.iou_kernel,
        iou_kernel_shape: eval_params(a, false).iou_kernel_shape,
        thinning: a.thinning,
        loose: a.loose,
        size_rule: eval_params(a, false).size_rule,
        connectivity: a.connectivity,
        workers,
    };
    let runs: Vec<(bool, PathBuf)> = match a.thinning {
        Thinning::Off => vec![(false, a.output.clone())],
        Thinning::On => vec![(true, a.output.clone())],
        Thinning::Both => vec![(false, a.output.clone()), (true, thinned_report_path(&a.output))],
    };
    let header = format!("{:<8}{:<8}{:<8}", "ODS", "OIS", format!("LineIoU@{}", a.iou_kernel));
    for (thinning, path) in runs {
        let report = evaluate(&preds, &gts, &eval_params(a, thinning), Some(workers))?;
        write_report(&path, &report, &cfg)?;
        if a.thinning == Thinning::Both {
            println!("thinning {}:", if thinning { "on" } else { "off" });
        }
        println!("{}", header.trim_end());
        println!("{}", score_row(&report).trim_end());
        println!("report: {}", path.display());
    }
    Ok(EXIT_OK)
}
