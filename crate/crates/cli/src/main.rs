use std::fs;
use std::io::{self, BufReader, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};

use fixscope_core::batch::{read_manifest, run_batch, threads_from_env, write_batch_dir, BatchError};
use fixscope_core::fxm::{read_map_file, write_map_file};
use fixscope_core::gaze::{parse_gaze, write_gaze, RecordingMeta};
use fixscope_core::map::{BuildOptions, ScaleSpec};
use fixscope_core::report::{run_report, write_report_dir, AnalysisConfig};
use fixscope_core::synth::{generate, parse_dims, Scenario, ScenarioKind};
use fixscope_core::{build_map, filter_attentive, rescale, NeighborhoodSpec};

#[derive(Parser)]
#[command(name = "fixscope", version, about = "Eye-fixation maps and their spatiotemporal information content")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Accumulate gaze recordings into a fixation map.
    Build(BuildArgs),
    /// Block-sum a map over non-overlapping windows.
    Rescale(RescaleArgs),
    /// Run all analyses on one map and write a report directory.
    Analyze(AnalyzeArgs),
    /// Generate a synthetic map.
    Synth(SynthArgs),
    /// Analyze every map in a manifest and aggregate per category.
    Batch(BatchArgs),
}

#[derive(Args)]
struct BuildArgs {
    /// Gaze file; repeat to pool several subjects.
    #[arg(long, required = true)]
    gaze: Vec<PathBuf>,
    /// Recording metadata (`width= height= fps= hz=` lines).
    #[arg(long)]
    meta: PathBuf,
    #[arg(long)]
    frames: usize,
    #[arg(long)]
    out: PathBuf,
    /// Block size, e.g. 40x40.
    #[arg(long)]
    scale: Option<ScaleSpec>,
    /// Drop samples outside the frame instead of failing.
    #[arg(long)]
    skip_oob: bool,
    /// Drop samples past the last frame instead of failing.
    #[arg(long)]
    truncate: bool,
}

#[derive(Args)]
struct RescaleArgs {
    #[arg(long)]
    map: PathBuf,
    #[arg(long)]
    scale: ScaleSpec,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Clone)]
struct AnalysisArgs {
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Analyze at the stored resolution.
    #[arg(long, conflicts_with = "scale")]
    full_res: bool,
    /// Block size applied before analysis.
    #[arg(long, default_value = "40x40")]
    scale: ScaleSpec,
    /// ALL26, SPATIAL8 or TEMPORAL2.
    #[arg(long, default_value = "ALL26", value_parser = parse_neighborhood)]
    neighborhood: NeighborhoodSpec,
    /// Frame distances, as a list (1,2,4) or range (1-15).
    #[arg(long, default_value = "1-15", value_parser = parse_extents)]
    distances: Extents,
    /// Window sizes, as a list or range.
    #[arg(long, default_value = "1-12", value_parser = parse_extents)]
    windows: Extents,
}

impl AnalysisArgs {
    fn config(&self) -> AnalysisConfig {
        AnalysisConfig {
            scale: (!self.full_res).then_some(self.scale),
            neighborhood: self.neighborhood.clone(),
            distances: self.distances.0.clone(),
            window_sizes: self.windows.0.clone(),
            seed: self.seed,
        }
    }
}

#[derive(Args)]
struct AnalyzeArgs {
    #[arg(long)]
    map: PathBuf,
    /// Report directory.
    #[arg(long)]
    out: PathBuf,
    #[command(flatten)]
    analysis: AnalysisArgs,
}

#[derive(Args)]
struct SynthArgs {
    /// center-bias, smooth-pursuit, static-dot-jumps, uniform-noise, iid-frames or identical-frames.
    #[arg(long)]
    scenario: ScenarioKind,
    /// MxNxK.
    #[arg(long, value_parser = parse_dims_arg)]
    dims: (usize, usize, usize),
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
    /// Also write the generated gaze samples.
    #[arg(long)]
    emit_gaze: Option<PathBuf>,
    /// Also write the matching metadata file.
    #[arg(long)]
    emit_meta: Option<PathBuf>,
    #[arg(long)]
    subjects: Option<u32>,
    /// Gaze jitter standard deviation, in cells.
    #[arg(long)]
    dispersion: Option<f64>,
}

#[derive(Args)]
struct BatchArgs {
    /// Lines of `path,category`; relative paths resolve against the manifest's directory.
    #[arg(long)]
    manifest: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[command(flatten)]
    analysis: AnalysisArgs,
}

#[derive(Clone, Debug)]
struct Extents(Vec<usize>);

fn parse_extents(s: &str) -> Result<Extents, String> {
    let bad = || format!("expected a list like 1,2,4 or a range like 1-15, got {s:?}");
    let values: Vec<usize> = if let Some((a, b)) = s.split_once('-') {
        let a: usize = a.trim().parse().map_err(|_| bad())?;
        let b: usize = b.trim().parse().map_err(|_| bad())?;
        (a..=b).collect()
    } else {
        s.split(',').map(|v| v.trim().parse().map_err(|_| bad())).collect::<Result<_, _>>()?
    };
    if values.is_empty() || values[0] == 0 || values.windows(2).any(|w| w[0] >= w[1]) {
        return Err(format!("values must be positive and strictly increasing, got {s:?}"));
    }
    Ok(Extents(values))
}

fn parse_neighborhood(s: &str) -> Result<NeighborhoodSpec, String> {
    NeighborhoodSpec::preset(s).ok_or_else(|| format!("unknown neighborhood {s:?}; expected ALL26, SPATIAL8 or TEMPORAL2"))
}

fn parse_dims_arg(s: &str) -> Result<(usize, usize, usize), String> {
    parse_dims(s).map_err(|e| e.to_string())
}

/// Marks a failure that should exit with the usage status.
#[derive(Debug)]
struct UsageError(String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

fn build(args: BuildArgs) -> Result<()> {
    let meta_text = fs::read_to_string(&args.meta).with_context(|| format!("reading {}", args.meta.display()))?;
    let meta = RecordingMeta::parse_sidecar(&meta_text).with_context(|| format!("{}", args.meta.display()))?;
    let mut samples = Vec::new();
    for path in &args.gaze {
        let file = fs::File::open(path).with_context(|| format!("opening {}", path.display()))?;
        let parsed = parse_gaze(BufReader::new(file), &meta).with_context(|| format!("{}", path.display()))?;
        for (label, count) in &parsed.unknown_labels {
            eprintln!("warning: {}: {count} samples with unrecognized label {label:?}", path.display());
        }
        samples.extend(filter_attentive(&parsed.samples));
    }
    let options = BuildOptions { skip_out_of_bounds: args.skip_oob, truncate: args.truncate };
    let built = build_map(&samples, &meta, args.frames, options)?;
    if built.dropped_out_of_bounds > 0 {
        eprintln!("dropped {} out-of-bounds samples", built.dropped_out_of_bounds);
    }
    if built.dropped_past_end > 0 {
        eprintln!("dropped {} samples past frame {}", built.dropped_past_end, args.frames);
    }
    let map = match args.scale {
        Some(spec) => rescale(&built.map, spec)?.map,
        None => built.map,
    };
    write_map_file(&map, &args.out)?;
    eprintln!("{} samples -> {} ({}x{}x{})", built.retained, args.out.display(), map.rows(), map.cols(), map.frames());
    Ok(())
}

fn rescale_cmd(args: RescaleArgs) -> Result<()> {
    let map = read_map_file(&args.map).with_context(|| format!("{}", args.map.display()))?;
    let r = rescale(&map, args.scale)?;
    if !r.exact_tiling() {
        eprintln!("warning: dropped {} partial rows and {} partial columns", r.dropped_rows, r.dropped_cols);
    }
    write_map_file(&r.map, &args.out)?;
    Ok(())
}

fn warn_skipped(what: &str, skipped: &[usize], frames: usize) {
    if !skipped.is_empty() {
        eprintln!("warning: skipped {what} {skipped:?}: need more than 2x frames, map has {frames}");
    }
}

fn analyze(args: AnalyzeArgs) -> Result<()> {
    let map = read_map_file(&args.map).with_context(|| format!("{}", args.map.display()))?;
    let source = args.map.display().to_string();
    let report = run_report(&map, &args.analysis.config(), Some(&source))?;
    if report.scale.requested.is_some() && !report.scale.applied {
        eprintln!("warning: map is smaller than the scale window; analyzing at stored resolution");
    }
    warn_skipped("distances", &report.skipped_distances, report.analyzed.frames);
    warn_skipped("window sizes", &report.skipped_window_sizes, report.analyzed.frames);
    write_report_dir(&report, &args.out)?;
    Ok(())
}

fn synth(args: SynthArgs) -> Result<()> {
    let (rows, cols, frames) = args.dims;
    let mut scenario = Scenario::new(args.scenario, rows, cols, frames, args.seed);
    if let Some(s) = args.subjects {
        scenario = scenario.with_subjects(s);
    }
    if let Some(d) = args.dispersion {
        scenario = scenario.with_dispersion(d);
    }
    let out = generate(&scenario)?;
    write_map_file(&out.map, &args.out)?;
    if let Some(path) = &args.emit_gaze {
        write_file(path, write_gaze(&out.samples).as_bytes())?;
    }
    if let Some(path) = &args.emit_meta {
        write_file(path, out.meta.to_sidecar().as_bytes())?;
    }
    Ok(())
}

fn batch(args: BatchArgs) -> Result<()> {
    let threads = threads_from_env()?;
    let entries = match read_manifest(&args.manifest) {
        Err(BatchError::EmptyManifest) => {
            return Err(UsageError(format!("{}: manifest lists no videos", args.manifest.display())).into())
        }
        other => other?,
    };
    let output = run_batch(&entries, &args.analysis.config(), threads)?;
    write_batch_dir(&output, &args.out)?;
    let stats = &output.summary.replication;
    eprintln!(
        "{} videos, mean reduction {:.4} bits (variance {:.3e})",
        stats.videos, stats.reduction_mean, stats.reduction_variance
    );
    Ok(())
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    let mut f = fs::File::create(path).with_context(|| format!("creating {}", path.display()))?;
    f.write_all(bytes).with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Build(a) => build(a),
        Command::Rescale(a) => rescale_cmd(a),
        Command::Analyze(a) => analyze(a),
        Command::Synth(a) => synth(a),
        Command::Batch(a) => batch(a),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let _ = writeln!(io::stderr(), "error: {e:#}");
            if e.downcast_ref::<UsageError>().is_some() {
                ExitCode::from(1)
            } else {
                ExitCode::from(2)
            }
        }
    }
}

