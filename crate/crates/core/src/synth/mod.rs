//! Seeded synthetic recordings.
//!
//! Gaze-driven scenarios simulate `subjects` viewers sampled at 240 Hz over a 30 fps video
//! whose frame is the map grid itself, then run the samples through the regular
//! filter-and-build path. Positions are tracked in 1/16-cell fixed point; jitter is a
//! centered binomial added before flooring to a cell, so no float rounding reaches a count.
//!
//! Pixel-level scenarios (`IidFrames`, `IdenticalFrames`) draw map values directly and emit
//! one fixation sample per unit of count.

pub mod oracle;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::gaze::{filter_attentive, EventLabel, GazeSample, RecordingMeta};
use crate::map::{build_map, BuildOptions, FixationMap, MapError};
use crate::rng::{binomial_bits_for_sigma, SplitMix64};

const SUBCELL: i64 = 16;
const FRAME_RATE: f64 = 30.0;
const SAMPLE_RATE: f64 = 240.0;
const SAMPLES_PER_FRAME: u64 = 8;

#[derive(Debug, Error)]
pub enum SynthError {
    #[error("scenario dimensions must be positive, got {0}x{1}x{2}")]
    ZeroDimension(usize, usize, usize),
    #[error("scenario needs at least one subject")]
    NoSubjects,
    #[error("dispersion must be finite and non-negative, got {0}")]
    BadDispersion(f64),
    #[error("unknown scenario `{0}`")]
    UnknownScenario(String),
    #[error("invalid dims `{0}`, expected MxNxK")]
    BadDims(String),
    #[error("map of {rows}x{cols}x{frames} exceeds the oracle size limit of 64x64x64")]
    TooLargeForOracle { rows: usize, cols: usize, frames: usize },
    #[error(transparent)]
    Map(#[from] MapError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ScenarioKind {
    /// Gaze clustered around the grid center.
    CenterBias,
    /// Gaze tracking a target moving diagonally at constant speed.
    SmoothPursuit,
    /// A static target that teleports at fixed intervals.
    StaticDotJumps,
    /// Gaze samples spread uniformly over the frame.
    UniformNoise,
    /// Independent random pixels in every frame.
    IidFrames,
    /// One random frame repeated.
    IdenticalFrames,
}

impl ScenarioKind {
    pub const ALL: [ScenarioKind; 6] = [
        ScenarioKind::CenterBias,
        ScenarioKind::SmoothPursuit,
        ScenarioKind::StaticDotJumps,
        ScenarioKind::UniformNoise,
        ScenarioKind::IidFrames,
        ScenarioKind::IdenticalFrames,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ScenarioKind::CenterBias => "center-bias",
            ScenarioKind::SmoothPursuit => "smooth-pursuit",
            ScenarioKind::StaticDotJumps => "static-dot-jumps",
            ScenarioKind::UniformNoise => "uniform-noise",
            ScenarioKind::IidFrames => "iid-frames",
            ScenarioKind::IdenticalFrames => "identical-frames",
        }
    }
}

impl fmt::Display for ScenarioKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ScenarioKind {
    type Err = SynthError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let key: String = s.chars().filter(|c| c.is_ascii_alphanumeric()).collect::<String>().to_ascii_lowercase();
        ScenarioKind::ALL
            .into_iter()
            .find(|k| k.name().replace('-', "") == key)
            .ok_or_else(|| SynthError::UnknownScenario(s.to_string()))
    }
}

/// Parses `MxNxK` (rows, columns, frames).
pub fn parse_dims(s: &str) -> Result<(usize, usize, usize), SynthError> {
    let bad = || SynthError::BadDims(s.to_string());
    let parts: Vec<usize> = s
        .split(['x', 'X'])
        .map(|p| p.trim().parse::<usize>().map_err(|_| bad()))
        .collect::<Result<_, _>>()?;
    match parts[..] {
        [m, n, k] => Ok((m, n, k)),
        _ => Err(bad()),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub kind: ScenarioKind,
    pub rows: usize,
    pub cols: usize,
    pub frames: usize,
    pub subjects: u32,
    /// Standard deviation of gaze jitter, in cells.
    pub dispersion: f64,
    pub seed: u64,
}

impl Scenario {
    /// Eight subjects with a jitter of two cells.
    pub fn new(kind: ScenarioKind, rows: usize, cols: usize, frames: usize, seed: u64) -> Self {
        Self { kind, rows, cols, frames, subjects: 8, dispersion: 2.0, seed }
    }

    pub fn with_dispersion(mut self, dispersion: f64) -> Self {
        self.dispersion = dispersion;
        self
    }

    pub fn with_subjects(mut self, subjects: u32) -> Self {
        self.subjects = subjects;
        self
    }

    fn validate(&self) -> Result<(), SynthError> {
        if self.rows == 0 || self.cols == 0 || self.frames == 0 {
            return Err(SynthError::ZeroDimension(self.rows, self.cols, self.frames));
        }
        if self.subjects == 0 {
            return Err(SynthError::NoSubjects);
        }
        if !(self.dispersion.is_finite() && self.dispersion >= 0.0) {
            return Err(SynthError::BadDispersion(self.dispersion));
        }
        Ok(())
    }

    pub fn meta(&self) -> RecordingMeta {
        RecordingMeta {
            frame_width: self.cols as u32,
            frame_height: self.rows as u32,
            frame_rate: FRAME_RATE,
            sample_rate: SAMPLE_RATE,
            subject_id: format!("synth-{}", self.kind),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthOutput {
    pub map: FixationMap,
    /// Every generated sample, attentive or not, all subjects merged into one time-ordered stream.
    pub samples: Vec<GazeSample>,
    pub meta: RecordingMeta,
}

pub fn generate(scenario: &Scenario) -> Result<SynthOutput, SynthError> {
    scenario.validate()?;
    let meta = scenario.meta();
    let mut rng = SplitMix64::new(scenario.seed);
    let samples = match scenario.kind {
        ScenarioKind::IidFrames | ScenarioKind::IdenticalFrames => {
            let map = pixel_scenario(scenario, &mut rng)?;
            let samples = samples_from_map(&map);
            return Ok(SynthOutput { map, samples, meta });
        }
        _ => gaze_scenario(scenario, &mut rng),
    };
    let built = build_map(&filter_attentive(&samples), &meta, scenario.frames, BuildOptions::default())?;
    Ok(SynthOutput { map: built.map, samples, meta })
}

fn pixel_scenario(s: &Scenario, rng: &mut SplitMix64) -> Result<FixationMap, SynthError> {
    let fl = s.rows * s.cols;
    // 0 with probability 3/4, otherwise 1, or 2 with probability 1/16
    let draw = |rng: &mut SplitMix64| match rng.below(16) {
        0..=11 => 0u16,
        12..=14 => 1,
        _ => 2,
    };
    let values: Vec<u16> = match s.kind {
        ScenarioKind::IidFrames => (0..fl * s.frames).map(|_| draw(rng)).collect(),
        _ => {
            let frame: Vec<u16> = (0..fl).map(|_| draw(rng)).collect();
            frame.iter().copied().cycle().take(fl * s.frames).collect()
        }
    };
    Ok(FixationMap::from_dense(s.rows, s.cols, s.frames, values)?)
}

fn samples_from_map(map: &FixationMap) -> Vec<GazeSample> {
    let mut out = Vec::new();
    for (index, count) in map.nonzeros() {
        let (m, n, k) = map.coords(index);
        for _ in 0..count {
            out.push(GazeSample::new(k as u64 * SAMPLES_PER_FRAME, n as u32, m as u32, EventLabel::Fixation));
        }
    }
    out
}

/// Target position in sub-cell units, one entry per frame.
fn target_path(s: &Scenario, rng: &mut SplitMix64) -> Vec<(i64, i64)> {
    let cell_center = |c: usize| c as i64 * SUBCELL + SUBCELL / 2;
    match s.kind {
        ScenarioKind::CenterBias => vec![(cell_center(s.rows / 2), cell_center(s.cols / 2)); s.frames],
        ScenarioKind::SmoothPursuit => {
            let mut m = rng.below(s.rows as u64) as i64;
            let mut n = rng.below(s.cols as u64) as i64;
            let (mut dm, mut dn) = (1i64, 1i64);
            let mut path = Vec::with_capacity(s.frames);
            for _ in 0..s.frames {
                path.push((cell_center(m as usize), cell_center(n as usize)));
                (m, dm) = bounce(m, dm, s.rows as i64);
                (n, dn) = bounce(n, dn, s.cols as i64);
            }
            path
        }
        ScenarioKind::StaticDotJumps => {
            let mut path = Vec::with_capacity(s.frames);
            let mut here = (0, 0);
            for k in 0..s.frames {
                if k % JUMP_SPAN == 0 {
                    here = (
                        cell_center(rng.below(s.rows as u64) as usize),
                        cell_center(rng.below(s.cols as u64) as usize),
                    );
                }
                path.push(here);
            }
            path
        }
        _ => Vec::new(),
    }
}

/// Frames a static target holds its position.
const JUMP_SPAN: usize = 10;

fn bounce(pos: i64, dir: i64, len: i64) -> (i64, i64) {
    if len == 1 {
        return (0, dir);
    }
    let next = pos + dir;
    if next < 0 || next >= len {
        (pos - dir, -dir)
    } else {
        (next, dir)
    }
}

fn gaze_scenario(s: &Scenario, rng: &mut SplitMix64) -> Vec<GazeSample> {
    let path = target_path(s, rng);
    let bits = binomial_bits_for_sigma(s.dispersion * SUBCELL as f64);
    let (rows, cols) = (s.rows as i64, s.cols as i64);
    let attentive = if s.kind == ScenarioKind::SmoothPursuit {
        EventLabel::SmoothPursuit
    } else {
        EventLabel::Fixation
    };
    let mut samples = Vec::new();
    for _subject in 0..s.subjects {
        for k in 0..s.frames {
            // a subject is looking away (saccading or blinking) for a quarter of the frames
            let engaged = rng.chance(3, 4);
            let away = if rng.chance(1, 2) { EventLabel::Saccade } else { EventLabel::Blink };
            for j in 0..SAMPLES_PER_FRAME {
                let t = k as u64 * SAMPLES_PER_FRAME + j;
                let (m, n) = match s.kind {
                    ScenarioKind::UniformNoise => (rng.below(rows as u64) as i64, rng.below(cols as u64) as i64),
                    _ => jittered_cell(path[k], bits, rows, cols, rng),
                };
                let label = if engaged {
                    attentive.clone()
                } else {
                    away.clone()
                };
                samples.push(GazeSample::new(t, n as u32, m as u32, label));
            }
        }
    }
    samples.sort_by_key(|s| s.t);
    samples
}

/// Adds binomial jitter to a sub-cell target and floors to a cell, redrawing positions that
/// leave the grid. Falls back to the target cell after 64 misses.
fn jittered_cell(target: (i64, i64), bits: u32, rows: i64, cols: i64, rng: &mut SplitMix64) -> (i64, i64) {
    for _ in 0..64 {
        let m = (target.0 + rng.centered_binomial(bits)).div_euclid(SUBCELL);
        let n = (target.1 + rng.centered_binomial(bits)).div_euclid(SUBCELL);
        if (0..rows).contains(&m) && (0..cols).contains(&n) {
            return (m, n);
        }
    }
    (target.0.div_euclid(SUBCELL), target.1.div_euclid(SUBCELL))
}
