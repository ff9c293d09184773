//! Batch CLI wiring the toolkit end to end: synthesize datasets, fit the
//! center-bias prior, run models, score frames and emit CSV plus SVG
//! artifacts.

use std::collections::HashMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use saliency::centerbias::{evaluate_f, fit_center_bias, CenterBiasModel};
use saliency::core::{minmax_normalize, pixels_per_degree, SaliencyMap, Viewing};
use saliency::error::Error;
use saliency::ingest::{load_bundles, ParseMode, SequenceBundle};
use saliency::metrics::{score_frame, MetricConfig, MetricId, ScoreContext};
use saliency::models::{build_model, MODEL_IDS};
use saliency::report::{heatmap_svg, summary_bar_chart};
use saliency::stats::{aggregate, rank_sequences, top_performers, ScoreRecord, ScoreTable};
use saliency::synth::{generate, write_bundle, write_manifest, SynthSpec};

#[derive(Parser)]
#[command(name = "saliency", version, about = "Compressed-domain saliency toolkit")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run models over a manifest, score against gaze, write CSVs and plots.
    Evaluate(EvaluateArgs),
    /// Generate a synthetic dataset with planted saliency.
    Synth(SynthArgs),
    /// Fit the center-bias Gaussian over all gaze in a manifest.
    FitBias(FitBiasArgs),
    /// Rank sequences by mean score from an existing scores.csv.
    Rank(RankArgs),
    /// Count top-performer appearances from an existing scores.csv.
    Top(TopArgs),
}

#[derive(Args)]
struct ParseFlags {
    /// Reject unknown keys in input files (default).
    #[arg(long, conflicts_with = "lenient_parse")]
    strict_parse: bool,
    /// Warn about unknown keys instead of failing.
    #[arg(long)]
    lenient_parse: bool,
}

impl ParseFlags {
    fn mode(&self) -> ParseMode {
        if self.lenient_parse {
            ParseMode::Lenient
        } else {
            ParseMode::Strict
        }
    }
}

#[derive(Args)]
struct EvaluateArgs {
    /// Dataset manifest (TOML).
    #[arg(long)]
    manifest: PathBuf,
    /// Run configuration (TOML); defaults apply when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory for all artifacts.
    #[arg(long)]
    out: PathBuf,
    /// Base seed for control sampling; overrides the config value.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker thread count; 0 uses all cores.
    #[arg(long, default_value_t = 0)]
    workers: usize,
    #[command(flatten)]
    parse: ParseFlags,
}

#[derive(Args)]
struct SynthArgs {
    /// Synth configuration (TOML, `[[sequence]]` array of specs);
    /// omitted = built-in five-sequence suite.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory for the dataset and its manifest.
    #[arg(long)]
    out: PathBuf,
    /// Base seed; sequence k uses seed + k. Overrides config seeds.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct FitBiasArgs {
    #[arg(long)]
    manifest: PathBuf,
    /// Output path for the fitted model (TOML).
    #[arg(long)]
    out: PathBuf,
    #[command(flatten)]
    parse: ParseFlags,
}

#[derive(Args)]
struct RankArgs {
    /// Existing scores.csv from an evaluate run.
    #[arg(long)]
    scores: PathBuf,
    #[arg(long)]
    metric: String,
    /// Model ids to exclude, comma separated.
    #[arg(long, default_value = "io,gauss", value_delimiter = ',')]
    exclude: Vec<String>,
    /// Optional CSV output path; stdout otherwise.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct TopArgs {
    #[arg(long)]
    scores: PathBuf,
    #[arg(long)]
    metric: String,
    /// Model ids to exclude, comma separated.
    #[arg(long, default_value = "io", value_delimiter = ',')]
    exclude: Vec<String>,
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Evaluate-run settings beyond the CLI flags.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct RunConfig {
    models: Vec<String>,
    metrics: Vec<String>,
    bootstrap: usize,
    bins: usize,
    radius_deg: f64,
    seed: u64,
    /// "fit" or a path to a serialized center-bias model.
    bias: String,
    split_frame_types: bool,
    plots: bool,
    model_params: HashMap<String, toml::Table>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            models: MODEL_IDS.iter().map(|s| s.to_string()).collect(),
            metrics: MetricId::DEFAULT.iter().map(|m| m.as_str().to_string()).collect(),
            bootstrap: 100,
            bins: 16,
            radius_deg: 0.5,
            seed: 0,
            bias: "fit".to_string(),
            split_frame_types: true,
            plots: true,
            model_params: HashMap::new(),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

/// 2 = config error, 3 = ingest error, 4 = internal invariant failure.
fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Config(_) | Error::InvalidParameter { .. } | Error::InvalidGeometry(_) => 2,
        Error::Parse { .. }
        | Error::InvalidFrame { .. }
        | Error::Manifest(_)
        | Error::Io(_) => 3,
        _ => 4,
    }
}

fn run(cli: Cli) -> Result<(), Error> {
    match cli.cmd {
        Cmd::Evaluate(args) => cmd_evaluate(args),
        Cmd::Synth(args) => cmd_synth(args),
        Cmd::FitBias(args) => cmd_fit_bias(args),
        Cmd::Rank(args) => cmd_rank(args),
        Cmd::Top(args) => cmd_top(args),
    }
}

// ---------------------------------------------------------------------------
// evaluate

fn fnv1a(bytes: &[u8]) -> u64 {
    let mut h = 0xcbf2_9ce4_8422_2325u64;
    for b in bytes {
        h ^= *b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    let mut z = x;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Per-frame control-sampling seed; shared by every model on the frame
/// so comparisons are paired.
fn frame_seed(base: u64, sequence_id: &str, frame: usize) -> u64 {
    splitmix64(base ^ fnv1a(sequence_id.as_bytes()) ^ (frame as u64).rotate_left(17))
}

fn load_run_config(args: &EvaluateArgs) -> Result<RunConfig, Error> {
    let mut cfg = match &args.config {
        None => RunConfig::default(),
        Some(path) => {
            let text = std::fs::read_to_string(path)?;
            toml::from_str(&text)
                .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?
        }
    };
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    if cfg.bootstrap == 0 || cfg.bins == 0 {
        return Err(Error::Config("bootstrap and bins must be >= 1".into()));
    }
    if !(cfg.radius_deg >= 0.0) {
        return Err(Error::Config(format!(
            "radius_deg must be >= 0, got {}",
            cfg.radius_deg
        )));
    }
    if cfg.models.is_empty() || cfg.metrics.is_empty() {
        return Err(Error::Config("need at least one model and one metric".into()));
    }
    for id in &cfg.models {
        if !MODEL_IDS.contains(&id.as_str()) {
            return Err(Error::Config(format!("unknown model id {id:?}")));
        }
    }
    for m in &cfg.metrics {
        MetricId::parse(m)?;
    }
    Ok(cfg)
}

/// Normalized gaze from every sequence, both viewings, for the bias fit.
fn collect_normalized_gaze(bundles: &[SequenceBundle]) -> Vec<(f64, f64)> {
    let mut points = Vec::new();
    for b in bundles {
        let (w, h) = (
            b.geometry.display_w_px as f64,
            b.geometry.display_h_px as f64,
        );
        for p in b.gaze.points() {
            points.push((p.x / w, p.y / h));
        }
    }
    points
}

fn resolve_bias(
    cfg: &RunConfig,
    bundles: &[SequenceBundle],
    needed: bool,
) -> Result<Option<CenterBiasModel>, Error> {
    if !needed {
        return Ok(None);
    }
    let model = if cfg.bias == "fit" {
        fit_center_bias(&collect_normalized_gaze(bundles))?
    } else {
        CenterBiasModel::load(&cfg.bias)?
    };
    Ok(Some(model))
}

struct SequenceJob<'a> {
    bundle: &'a SequenceBundle,
    density: Option<SaliencyMap>,
    radius_px: f64,
    gt_sigma_px: f64,
}

fn score_model_on_sequence(
    model_id: &str,
    job: &SequenceJob,
    cfg: &RunConfig,
    metric_cfg: &MetricConfig,
    bias: Option<&CenterBiasModel>,
) -> Result<Vec<ScoreRecord>, Error> {
    let params = cfg.model_params.get(model_id).cloned().unwrap_or_default();
    let model = build_model(model_id, &params)?;
    let output = model.score_sequence(job.bundle)?;
    let mut records = Vec::new();
    for (frame, map) in output.scored_frames() {
        let normalized = minmax_normalize(map);
        let gaze = job.bundle.map_gaze(frame, Viewing::Primary);
        let ctx = ScoreContext {
            radius_px: job.radius_px,
            gt_sigma_px: job.gt_sigma_px,
            bias: match (bias, &job.density) {
                (Some(m), Some(d)) => Some((m, d)),
                _ => None,
            },
            seed: frame_seed(cfg.seed, &job.bundle.sequence_id, frame),
        };
        let scores = score_frame(&normalized, &gaze, metric_cfg, &ctx)?;
        for (metric, value) in &scores.values {
            records.push(ScoreRecord {
                model: model_id.to_string(),
                sequence: job.bundle.sequence_id.clone(),
                frame,
                frame_type: job.bundle.frames[frame].frame_type,
                metric: *metric,
                value: value.value(),
            });
        }
    }
    Ok(records)
}

fn cmd_evaluate(args: EvaluateArgs) -> Result<(), Error> {
    let cfg = load_run_config(&args)?;
    let metrics: Vec<MetricId> = cfg
        .metrics
        .iter()
        .map(|m| MetricId::parse(m))
        .collect::<Result<_, _>>()?;
    let bundles = load_bundles(&args.manifest, args.parse.mode())?;
    let needs_bias = metrics.iter().any(|m| m.needs_bias());
    let bias = resolve_bias(&cfg, &bundles, needs_bias)?;

    let metric_cfg = MetricConfig {
        metrics: metrics.clone(),
        bootstrap: cfg.bootstrap,
        bins: cfg.bins,
        radius_deg: cfg.radius_deg,
        seed: cfg.seed,
    };

    // per-sequence derived context
    let jobs: Vec<SequenceJob> = bundles
        .iter()
        .map(|b| {
            let (mw, mh) = b.map_dims();
            // pixels per degree at map resolution
            let ppd = pixels_per_degree(&b.geometry)? * b.gaze_to_map_scale;
            let density = match &bias {
                Some(model) => Some(evaluate_f(model, mw, mh)?),
                None => None,
            };
            Ok(SequenceJob {
                bundle: b,
                density,
                radius_px: cfg.radius_deg * ppd,
                gt_sigma_px: ppd,
            })
        })
        .collect::<Result<_, Error>>()?;

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(args.workers)
        .build()
        .map_err(|e| Error::Config(format!("worker pool: {e}")))?;

    let pairs: Vec<(usize, &str)> = jobs
        .iter()
        .enumerate()
        .flat_map(|(i, _)| cfg.models.iter().map(move |m| (i, m.as_str())))
        .collect();
    let results: Vec<Result<Vec<ScoreRecord>, Error>> = pool.install(|| {
        pairs
            .par_iter()
            .map(|(i, model_id)| {
                score_model_on_sequence(model_id, &jobs[*i], &cfg, &metric_cfg, bias.as_ref())
            })
            .collect()
    });

    let mut table = ScoreTable::new();
    for r in results {
        for record in r? {
            table.push(record)?;
        }
    }
    table.sort_canonical();

    std::fs::create_dir_all(&args.out)?;
    table.save(&args.out.join("scores.csv"))?;

    let summary = aggregate(&table, cfg.split_frame_types)?;
    summary.save(&args.out.join("summary.csv"))?;

    write_ranking(&summary, &metrics, &args.out.join("ranking.csv"))?;
    write_top(&summary, &metrics, &args.out.join("top_performers.csv"))?;

    if cfg.plots {
        write_plots(&summary, &jobs, &metrics, &args.out.join("plots"))?;
    }
    write_metadata(&args, &cfg, &table, &args.out.join("run_metadata.toml"))?;
    Ok(())
}

/// Per-metric sequence ranking, models IO and GAUSS excluded.
fn write_ranking(
    summary: &saliency::stats::Summary,
    metrics: &[MetricId],
    path: &Path,
) -> Result<(), Error> {
    let mut out = String::from("metric,rank,sequence,mean\n");
    for metric in metrics {
        let ranked = rank_sequences(summary, *metric, &["io", "gauss"])?;
        for (i, (sequence, mean)) in ranked.iter().enumerate() {
            out.push_str(&format!("{metric},{},{sequence},{mean}\n", i + 1));
        }
    }
    std::fs::write(path, out)?;
    Ok(())
}

/// Per-metric top-performer counts, model IO excluded.
fn write_top(
    summary: &saliency::stats::Summary,
    metrics: &[MetricId],
    path: &Path,
) -> Result<(), Error> {
    let mut out = String::from("metric,model,count\n");
    for metric in metrics {
        for (model, count) in top_performers(summary, *metric, &["io"])? {
            out.push_str(&format!("{metric},{model},{count}\n"));
        }
    }
    std::fs::write(path, out)?;
    Ok(())
}

fn write_plots(
    summary: &saliency::stats::Summary,
    jobs: &[SequenceJob],
    metrics: &[MetricId],
    dir: &Path,
) -> Result<(), Error> {
    std::fs::create_dir_all(dir)?;
    for job in jobs {
        let seq = &job.bundle.sequence_id;
        for metric in metrics {
            let mut cells: Vec<&saliency::stats::SummaryCell> = summary
                .cells
                .iter()
                .filter(|c| {
                    c.frame_type.is_none() && c.metric == *metric && &c.sequence == seq
                })
                .collect();
            cells.sort_by(|a, b| a.model.cmp(&b.model));
            if cells.is_empty() {
                continue;
            }
            let svg = summary_bar_chart(seq, metric.as_str(), &cells);
            std::fs::write(dir.join(format!("bars_{seq}_{metric}.svg")), svg)?;
        }
        if let Some(density) = &job.density {
            let svg = heatmap_svg(&format!("center bias on {seq}"), density, 128);
            std::fs::write(dir.join(format!("bias_{seq}.svg")), svg)?;
        }
    }
    Ok(())
}

fn write_metadata(
    args: &EvaluateArgs,
    cfg: &RunConfig,
    table: &ScoreTable,
    path: &Path,
) -> Result<(), Error> {
    #[derive(Serialize)]
    struct Metadata<'a> {
        toolkit_version: &'a str,
        manifest: String,
        parse_mode: &'a str,
        scored_records: usize,
        degenerate_records: usize,
        config: &'a RunConfig,
    }
    let degenerate = table.records().iter().filter(|r| r.value.is_none()).count();
    let meta = Metadata {
        toolkit_version: env!("CARGO_PKG_VERSION"),
        manifest: args.manifest.display().to_string(),
        parse_mode: if args.parse.lenient_parse { "lenient" } else { "strict" },
        scored_records: table.records().len() - degenerate,
        degenerate_records: degenerate,
        config: cfg,
    };
    let text = toml::to_string(&meta).map_err(|e| Error::Config(e.to_string()))?;
    std::fs::write(path, text)?;
    Ok(())
}

// ---------------------------------------------------------------------------
// synth

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SynthConfig {
    #[serde(rename = "sequence")]
    sequences: Vec<SynthSpec>,
}

/// Five CIF sequences with half-fixating observers, varied seeds and
/// orbit phases.
fn default_synth_suite(base_seed: u64) -> Vec<SynthSpec> {
    (0..5)
        .map(|k| SynthSpec {
            frame_count: 300,
            mixture_w: 0.5,
            orbit_radius: 30.0 + 6.0 * k as f64,
            orbit_period: 150.0 + 25.0 * k as f64,
            ..SynthSpec::cif(&format!("synth{k:02}"), base_seed + k)
        })
        .collect()
}

fn cmd_synth(args: SynthArgs) -> Result<(), Error> {
    let mut specs = match &args.config {
        None => default_synth_suite(args.seed.unwrap_or(0)),
        Some(path) => {
            let text = std::fs::read_to_string(path)?;
            let cfg: SynthConfig = toml::from_str(&text)
                .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
            cfg.sequences
        }
    };
    if args.config.is_some() {
        if let Some(base) = args.seed {
            for (k, spec) in specs.iter_mut().enumerate() {
                spec.seed = base + k as u64;
            }
        }
    }
    if specs.is_empty() {
        return Err(Error::Config("synth config lists no sequences".into()));
    }
    std::fs::create_dir_all(&args.out)?;
    let mut entries = Vec::new();
    for spec in &specs {
        let bundle = generate(spec)?;
        entries.push(write_bundle(&bundle, &args.out)?);
    }
    write_manifest(entries, &args.out.join("manifest.toml"))?;
    Ok(())
}

// ---------------------------------------------------------------------------
// fit-bias, rank, top

fn cmd_fit_bias(args: FitBiasArgs) -> Result<(), Error> {
    let bundles = load_bundles(&args.manifest, args.parse.mode())?;
    let model = fit_center_bias(&collect_normalized_gaze(&bundles))?;
    model.save(&args.out)?;
    Ok(())
}

fn load_summary(scores: &Path) -> Result<saliency::stats::Summary, Error> {
    let table = ScoreTable::load(scores)?;
    aggregate(&table, false)
}

fn emit(out: Option<&PathBuf>, text: &str) -> Result<(), Error> {
    match out {
        Some(path) => std::fs::write(path, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

fn cmd_rank(args: RankArgs) -> Result<(), Error> {
    let metric = MetricId::parse(&args.metric)?;
    let summary = load_summary(&args.scores)?;
    let exclude: Vec<&str> = args.exclude.iter().map(String::as_str).collect();
    let ranked = rank_sequences(&summary, metric, &exclude)?;
    let mut text = String::from("rank,sequence,mean\n");
    for (i, (sequence, mean)) in ranked.iter().enumerate() {
        text.push_str(&format!("{},{sequence},{mean}\n", i + 1));
    }
    emit(args.out.as_ref(), &text)
}

fn cmd_top(args: TopArgs) -> Result<(), Error> {
    let metric = MetricId::parse(&args.metric)?;
    let summary = load_summary(&args.scores)?;
    let exclude: Vec<&str> = args.exclude.iter().map(String::as_str).collect();
    let counts = top_performers(&summary, metric, &exclude)?;
    let mut text = String::from("model,count\n");
    for (model, count) in counts {
        text.push_str(&format!("{model},{count}\n"));
    }
    emit(args.out.as_ref(), &text)
}
