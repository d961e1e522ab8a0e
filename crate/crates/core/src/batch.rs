//! Multi-video runs driven by a manifest of `path,category` lines.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::correlation::{category_mean, Aggregation, TemporalMiCurve};
use crate::fxm::read_map_file;
use crate::io_util::write_atomic_bytes;
use crate::report::{curve_csv, run_report, write_report_dir, AnalysisConfig, AnalysisReport, ReportError, TOOL_NAME, TOOL_VERSION};
use crate::rng::derive_seed;

/// Environment variable holding the worker thread count for batch runs.
pub const THREADS_ENV: &str = "FIXSCOPE_THREADS";

/// Published mean and variance of the all-neighbors entropy reduction, for comparison only.
pub const REFERENCE_REDUCTION_MEAN: f64 = 0.0815;
pub const REFERENCE_REDUCTION_VARIANCE: f64 = 3.2416e-05;
pub const REFERENCE_TOLERANCE: f64 = 0.02;

#[derive(Debug, Error)]
pub enum BatchError {
    #[error("manifest lists no videos")]
    EmptyManifest,
    #[error("manifest line {line}: {message}")]
    Malformed { line: usize, message: String },
    #[error("manifest line {line}: no such file {path}")]
    MissingFile { line: usize, path: String },
    #[error("{path}: {source}")]
    Video { path: String, source: ReportError },
    #[error("invalid {THREADS_ENV} value {0:?}")]
    Threads(String),
    #[error("thread pool: {0}")]
    Pool(String),
    #[error(transparent)]
    Report(#[from] ReportError),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ManifestEntry {
    /// 1-based line in the manifest.
    pub line: usize,
    /// Path as written in the manifest.
    pub name: String,
    /// Resolved against the manifest directory.
    pub path: PathBuf,
    pub category: String,
}

/// Parses manifest text. Relative paths resolve against `base_dir`; existence is not checked.
pub fn parse_manifest(text: &str, base_dir: &Path) -> Result<Vec<ManifestEntry>, BatchError> {
    let mut entries = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let (path, category) = trimmed.split_once(',').ok_or_else(|| BatchError::Malformed {
            line,
            message: "expected `path,category`".into(),
        })?;
        let (path, category) = (path.trim(), category.trim());
        if path.is_empty() || category.is_empty() || category.contains(',') {
            return Err(BatchError::Malformed { line, message: "expected `path,category`".into() });
        }
        entries.push(ManifestEntry {
            line,
            name: path.to_string(),
            path: base_dir.join(path),
            category: category.to_string(),
        });
    }
    if entries.is_empty() {
        return Err(BatchError::EmptyManifest);
    }
    Ok(entries)
}

/// Reads and parses a manifest file, checking that every listed map exists.
pub fn read_manifest(path: &Path) -> Result<Vec<ManifestEntry>, BatchError> {
    let text = fs::read_to_string(path).map_err(|e| ReportError::io(path, e))?;
    let base = path.parent().unwrap_or(Path::new(""));
    let entries = parse_manifest(&text, base)?;
    for e in &entries {
        if !e.path.is_file() {
            return Err(BatchError::MissingFile { line: e.line, path: e.path.display().to_string() });
        }
    }
    Ok(entries)
}

/// Thread count from [`THREADS_ENV`], or `None` when unset.
pub fn threads_from_env() -> Result<Option<usize>, BatchError> {
    match std::env::var(THREADS_ENV) {
        Err(_) => Ok(None),
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(BatchError::Threads(v)),
        },
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VideoResult {
    pub entry: ManifestEntry,
    pub report: AnalysisReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplicationStats {
    pub videos: usize,
    pub reduction_mean: f64,
    /// Population variance over videos.
    pub reduction_variance: f64,
    pub reference_mean: f64,
    pub reference_variance: f64,
    pub tolerance: f64,
    pub mean_within_tolerance: bool,
}

impl ReplicationStats {
    pub fn from_reductions(values: &[f64]) -> Self {
        let n = values.len().max(1) as f64;
        let mean = values.iter().sum::<f64>() / n;
        let variance = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
        Self {
            videos: values.len(),
            reduction_mean: mean,
            reduction_variance: variance,
            reference_mean: REFERENCE_REDUCTION_MEAN,
            reference_variance: REFERENCE_REDUCTION_VARIANCE,
            tolerance: REFERENCE_TOLERANCE,
            mean_within_tolerance: (mean - REFERENCE_REDUCTION_MEAN).abs() <= REFERENCE_TOLERANCE,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CategorySummary {
    pub category: String,
    pub videos: usize,
    pub temporal_pair: Option<TemporalMiCurve<f64>>,
    pub temporal_window: Option<TemporalMiCurve<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BatchSummary {
    pub tool: String,
    pub version: String,
    pub seed: u64,
    pub videos: Vec<String>,
    pub categories: Vec<CategorySummary>,
    pub replication: ReplicationStats,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BatchOutput {
    pub results: Vec<VideoResult>,
    pub summary: BatchSummary,
}

/// Analyzes every entry, in parallel, with a per-video seed derived from `config.seed` and
/// the entry's position. Results keep manifest order.
pub fn run_batch(entries: &[ManifestEntry], config: &AnalysisConfig, threads: Option<usize>) -> Result<BatchOutput, BatchError> {
    if entries.is_empty() {
        return Err(BatchError::EmptyManifest);
    }
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = threads {
        builder = builder.num_threads(n);
    }
    let pool = builder.build().map_err(|e| BatchError::Pool(e.to_string()))?;

    let results = pool.install(|| {
        entries
            .par_iter()
            .enumerate()
            .map(|(i, entry)| {
                let video_err = |source: ReportError| BatchError::Video { path: entry.path.display().to_string(), source };
                let map = read_map_file(&entry.path).map_err(|e| video_err(e.into()))?;
                let cfg = AnalysisConfig { seed: derive_seed(config.seed, i as u64), ..config.clone() };
                let report = run_report(&map, &cfg, Some(&entry.name)).map_err(video_err)?;
                Ok(VideoResult { entry: entry.clone(), report })
            })
            .collect::<Result<Vec<_>, BatchError>>()
    })?;

    let mut by_category: BTreeMap<&str, Vec<&AnalysisReport>> = BTreeMap::new();
    for r in &results {
        by_category.entry(&r.entry.category).or_default().push(&r.report);
    }
    let categories = by_category
        .into_iter()
        .map(|(name, reports)| {
            let pair = common_mean(reports.iter().map(|r| r.temporal_pair.as_ref()), name)?;
            let window = common_mean(reports.iter().map(|r| r.temporal_window.as_ref()), name)?;
            Ok(CategorySummary { category: name.to_string(), videos: reports.len(), temporal_pair: pair, temporal_window: window })
        })
        .collect::<Result<Vec<_>, ReportError>>()?;

    let reductions: Vec<f64> = results.iter().map(|r| r.report.all_neighbors.reduction).collect();
    let summary = BatchSummary {
        tool: TOOL_NAME.to_string(),
        version: TOOL_VERSION.to_string(),
        seed: config.seed,
        videos: results.iter().map(|r| r.entry.name.clone()).collect(),
        categories,
        replication: ReplicationStats::from_reductions(&reductions),
    };
    Ok(BatchOutput { results, summary })
}

/// Category mean restricted to the distances every curve has. `None` if any video has no
/// curve or the curves share no distance.
fn common_mean<'a>(
    curves: impl Iterator<Item = Option<&'a TemporalMiCurve<f64>>>,
    category: &str,
) -> Result<Option<TemporalMiCurve<f64>>, ReportError> {
    let Some(curves) = curves.collect::<Option<Vec<_>>>() else {
        return Ok(None);
    };
    let mut common = curves[0].distances.clone();
    for c in &curves[1..] {
        common.retain(|d| c.distances.contains(d));
    }
    if common.is_empty() {
        return Ok(None);
    }
    let restricted: Vec<TemporalMiCurve<f64>> = curves
        .iter()
        .map(|c| TemporalMiCurve {
            mode: c.mode,
            distances: common.clone(),
            mi: common.iter().map(|&d| c.value_at(d).unwrap_or_default()).collect(),
            aggregation: Aggregation::PerVideo,
        })
        .collect();
    let refs: Vec<&TemporalMiCurve<f64>> = restricted.iter().collect();
    Ok(Some(category_mean(&refs, category)?))
}

/// `video,category,h_x,h_x_given_z,h_x_given_u,reduction`, one row per video in manifest order.
pub fn entropy_table_csv(results: &[VideoResult]) -> String {
    let mut out = String::from("video,category,h_x,h_x_given_z,h_x_given_u,reduction\n");
    for r in results {
        let a = &r.report.all_neighbors;
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            r.entry.name, r.entry.category, a.h_x, a.h_x_given_z, a.h_x_given_u, a.reduction
        );
    }
    out
}

/// Replaces anything but ASCII alphanumerics, `-` and `_` so a category can be a file name.
pub fn file_stem(category: &str) -> String {
    category
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '_' { c } else { '_' })
        .collect()
}

/// Writes `entropy_table.csv`, `summary.json`, per-category curve CSVs and one report
/// directory per video under `videos/`.
pub fn write_batch_dir(output: &BatchOutput, dir: &Path) -> Result<(), BatchError> {
    fs::create_dir_all(dir).map_err(|e| ReportError::io(dir, e))?;
    let put = |name: &str, body: &str| -> Result<(), BatchError> {
        let path = dir.join(name);
        write_atomic_bytes(&path, body.as_bytes()).map_err(|e| ReportError::io(&path, e))?;
        Ok(())
    };
    put("entropy_table.csv", &entropy_table_csv(&output.results))?;
    for c in &output.summary.categories {
        let stem = file_stem(&c.category);
        if let Some(curve) = &c.temporal_pair {
            put(&format!("category_{stem}_temporal_pair.csv"), &curve_csv(curve))?;
        }
        if let Some(curve) = &c.temporal_window {
            put(&format!("category_{stem}_temporal_window.csv"), &curve_csv(curve))?;
        }
    }
    let mut json = serde_json::to_string_pretty(&output.summary).map_err(ReportError::from)?;
    json.push('\n');
    put("summary.json", &json)?;
    for (i, r) in output.results.iter().enumerate() {
        write_report_dir(&r.report, &dir.join("videos").join(format!("{i:03}")))?;
    }
    Ok(())
}
