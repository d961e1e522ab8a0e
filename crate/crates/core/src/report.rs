//! Per-video analysis report and its file exports.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::correlation::{
    all_neighbors_entropy, spatial_mi_map, temporal_mi_pair, temporal_mi_window, AnalysisError,
    NeighborhoodSpec, SpatialMiMap, TemporalMiCurve, TemporalMode,
};
use crate::fxm::FormatError;
use crate::io_util::write_atomic_bytes;
use crate::map::{rescale, FixationMap, MapError, ScaleSpec};
use crate::rng::derive_seed;

pub const TOOL_NAME: &str = "fixscope";
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Sub-seed stream used for the uniform baseline of the all-neighbors study.
const BASELINE_STREAM: u64 = 1;

#[derive(Debug, Error)]
pub enum ReportError {
    #[error(transparent)]
    Map(#[from] MapError),
    #[error(transparent)]
    Analysis(#[from] AnalysisError),
    #[error(transparent)]
    Format(#[from] FormatError),
    #[error("report serialization: {0}")]
    Json(#[from] serde_json::Error),
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
}

impl ReportError {
    pub(crate) fn io(path: &Path, source: std::io::Error) -> Self {
        ReportError::Io { path: path.display().to_string(), source }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisConfig {
    /// Block size for scale reduction; `None` analyzes at full resolution.
    pub scale: Option<ScaleSpec>,
    pub neighborhood: NeighborhoodSpec,
    pub distances: Vec<usize>,
    pub window_sizes: Vec<usize>,
    pub seed: u64,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        Self {
            scale: Some(ScaleSpec::default_analysis()),
            neighborhood: NeighborhoodSpec::all26(),
            distances: (1..=15).collect(),
            window_sizes: (1..=12).collect(),
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MapSummary {
    pub rows: usize,
    pub cols: usize,
    pub frames: usize,
    pub max_symbol: u16,
    pub total_count: u64,
    pub nonzero: usize,
}

impl MapSummary {
    pub fn of(map: &FixationMap) -> Self {
        Self {
            rows: map.rows(),
            cols: map.cols(),
            frames: map.frames(),
            max_symbol: map.max_symbol(),
            total_count: map.total(),
            nonzero: map.nonzero_count(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScaleSummary {
    pub requested: Option<ScaleSpec>,
    /// False when no scale was requested or the window is larger than the frame.
    pub applied: bool,
    pub dropped_rows: usize,
    pub dropped_cols: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AllNeighborsSection {
    pub neighborhood: String,
    pub samples: u64,
    pub h_x: f64,
    pub h_x_given_z: f64,
    pub h_x_given_u: f64,
    pub reduction: f64,
    pub baseline_reduction: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisReport {
    pub tool: String,
    pub version: String,
    pub source: Option<String>,
    pub seed: u64,
    pub baseline_seed: u64,
    pub input: MapSummary,
    pub scale: ScaleSummary,
    pub analyzed: MapSummary,
    pub all_neighbors: AllNeighborsSection,
    pub spatial_mi: SpatialMiMap<f64>,
    pub temporal_pair: Option<TemporalMiCurve<f64>>,
    /// Requested distances the map has too few frames for.
    pub skipped_distances: Vec<usize>,
    pub temporal_window: Option<TemporalMiCurve<f64>>,
    pub skipped_window_sizes: Vec<usize>,
}

impl AnalysisReport {
    pub fn to_json(&self) -> Result<String, ReportError> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }

    pub fn from_json(text: &str) -> Result<Self, ReportError> {
        Ok(serde_json::from_str(text)?)
    }
}

/// Splits a requested extent list into the values `frames` can support and the rest.
fn feasible(values: &[usize], frames: usize) -> (Vec<usize>, Vec<usize>) {
    values.iter().partition(|&&d| frames > 2 * d)
}

/// Runs all three studies on `map` and bundles the results.
///
/// The configured scale is applied when its window fits inside the frame; smaller maps are
/// analyzed as given. Temporal extents the map is too short for are listed as skipped.
pub fn run_report(map: &FixationMap, config: &AnalysisConfig, source: Option<&str>) -> Result<AnalysisReport, ReportError> {
    let mut scale = ScaleSummary { requested: config.scale, applied: false, dropped_rows: 0, dropped_cols: 0 };
    let rescaled;
    let analyzed = match config.scale {
        Some(spec) if spec.rows <= map.rows() && spec.cols <= map.cols() => {
            let r = rescale(map, spec)?;
            scale.applied = true;
            scale.dropped_rows = r.dropped_rows;
            scale.dropped_cols = r.dropped_cols;
            rescaled = r.map;
            &rescaled
        }
        _ => map,
    };

    let baseline_seed = derive_seed(config.seed, BASELINE_STREAM);
    let an = all_neighbors_entropy::<f64>(analyzed, &config.neighborhood, baseline_seed)?;
    let spatial = spatial_mi_map::<f64>(analyzed)?;

    let (distances, skipped_distances) = feasible(&config.distances, analyzed.frames());
    let temporal_pair = if distances.is_empty() {
        None
    } else {
        Some(temporal_mi_pair::<f64>(analyzed, &distances)?)
    };
    let (windows, skipped_window_sizes) = feasible(&config.window_sizes, analyzed.frames());
    let temporal_window = if windows.is_empty() {
        None
    } else {
        Some(temporal_mi_window::<f64>(analyzed, &windows)?)
    };

    Ok(AnalysisReport {
        tool: TOOL_NAME.to_string(),
        version: TOOL_VERSION.to_string(),
        source: source.map(str::to_string),
        seed: config.seed,
        baseline_seed,
        input: MapSummary::of(map),
        scale,
        analyzed: MapSummary::of(analyzed),
        all_neighbors: AllNeighborsSection {
            neighborhood: config.neighborhood.name().to_string(),
            samples: an.samples,
            h_x: an.h_x,
            h_x_given_z: an.h_x_given_z,
            h_x_given_u: an.h_x_given_u,
            reduction: an.reduction(),
            baseline_reduction: an.baseline_reduction(),
        },
        spatial_mi: spatial,
        temporal_pair,
        skipped_distances,
        temporal_window,
        skipped_window_sizes,
    })
}

/// `D,mi_bits` (or `N,mi_bits` for window curves), one row per entry.
pub fn curve_csv(curve: &TemporalMiCurve<f64>) -> String {
    let key = match curve.mode {
        TemporalMode::PairAtDistance => "D",
        TemporalMode::AveragedWindow => "N",
    };
    let mut out = format!("{key},mi_bits\n");
    for (d, mi) in curve.distances.iter().zip(&curve.mi) {
        let _ = writeln!(out, "{d},{mi}");
    }
    out
}

/// `m,n,mi_bits`, with an empty field at border locations.
pub fn spatial_csv(map: &SpatialMiMap<f64>) -> String {
    let mut out = String::from("m,n,mi_bits\n");
    for m in 0..map.rows {
        for n in 0..map.cols {
            match map.get(m, n) {
                Some(v) => {
                    let _ = writeln!(out, "{m},{n},{v}");
                }
                None => {
                    let _ = writeln!(out, "{m},{n},");
                }
            }
        }
    }
    out
}

/// Plain-text 8-bit PGM, scaled so the largest value maps to 255. The scale constant is
/// kept in a comment line; missing values are written as 0.
pub fn spatial_pgm(map: &SpatialMiMap<f64>) -> String {
    let max = map.max().unwrap_or(0.0).max(0.0);
    let mut out = format!("P2\n# max_mi_bits={max}\n{} {}\n255\n", map.cols, map.rows);
    for m in 0..map.rows {
        let row: Vec<String> = (0..map.cols)
            .map(|n| {
                let v = map.get(m, n).unwrap_or(0.0).max(0.0);
                let level = if max > 0.0 { (v / max * 255.0).round() as u8 } else { 0 };
                level.to_string()
            })
            .collect();
        out.push_str(&row.join(" "));
        out.push('\n');
    }
    out
}

pub const REPORT_FILE: &str = "report.json";
pub const PAIR_CSV: &str = "temporal_pair.csv";
pub const WINDOW_CSV: &str = "temporal_window.csv";
pub const SPATIAL_CSV: &str = "spatial_mi.csv";
pub const SPATIAL_PGM: &str = "spatial_mi.pgm";

/// Writes the report and its CSV/PGM exports into `dir`, creating it if needed.
pub fn write_report_dir(report: &AnalysisReport, dir: &Path) -> Result<(), ReportError> {
    fs::create_dir_all(dir).map_err(|e| ReportError::io(dir, e))?;
    let put = |name: &str, body: &str| {
        let path = dir.join(name);
        write_atomic_bytes(&path, body.as_bytes()).map_err(|e| ReportError::io(&path, e))
    };
    put(REPORT_FILE, &report.to_json()?)?;
    if let Some(c) = &report.temporal_pair {
        put(PAIR_CSV, &curve_csv(c))?;
    }
    if let Some(c) = &report.temporal_window {
        put(WINDOW_CSV, &curve_csv(c))?;
    }
    put(SPATIAL_CSV, &spatial_csv(&report.spatial_mi))?;
    put(SPATIAL_PGM, &spatial_pgm(&report.spatial_mi))?;
    Ok(())
}
