//! Gaze record parsing.
//!
//! One record per line, whitespace separated: `t x y LABEL`. Lines starting with `#` and
//! blank lines are ignored. `t` is the tracker sample index, `x`/`y` are screen pixels with
//! the origin at the top-left corner.

use std::collections::BTreeMap;
use std::fmt;
use std::io::BufRead;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum GazeError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("metadata: {0}")]
    Meta(String),
    #[error("reading gaze stream: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum EventLabel {
    Fixation,
    SmoothPursuit,
    Saccade,
    Blink,
    LossOfTracking,
    Other(String),
}

impl EventLabel {
    /// Fixations and smooth pursuit are the only samples that contribute to a fixation map.
    pub fn is_attentive(&self) -> bool {
        matches!(self, EventLabel::Fixation | EventLabel::SmoothPursuit)
    }

    pub fn parse(tag: &str) -> Self {
        match tag {
            "FIX" => EventLabel::Fixation,
            "SP" | "SMP" => EventLabel::SmoothPursuit,
            "SAC" => EventLabel::Saccade,
            "BLINK" => EventLabel::Blink,
            "LOST" => EventLabel::LossOfTracking,
            other => EventLabel::Other(other.to_string()),
        }
    }

    pub fn tag(&self) -> &str {
        match self {
            EventLabel::Fixation => "FIX",
            EventLabel::SmoothPursuit => "SP",
            EventLabel::Saccade => "SAC",
            EventLabel::Blink => "BLINK",
            EventLabel::LossOfTracking => "LOST",
            EventLabel::Other(tag) => tag,
        }
    }
}

impl fmt::Display for EventLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GazeSample {
    pub t: u64,
    pub x: u32,
    pub y: u32,
    pub label: EventLabel,
}

impl GazeSample {
    pub fn new(t: u64, x: u32, y: u32, label: EventLabel) -> Self {
        Self { t, x, y, label }
    }

    pub fn in_bounds(&self, meta: &RecordingMeta) -> bool {
        self.x < meta.frame_width && self.y < meta.frame_height
    }
}

/// Acquisition parameters for one recording.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecordingMeta {
    pub frame_width: u32,
    pub frame_height: u32,
    /// Video frames per second.
    pub frame_rate: f64,
    /// Tracker samples per second.
    pub sample_rate: f64,
    pub subject_id: String,
}

impl RecordingMeta {
    pub fn new(
        frame_width: u32,
        frame_height: u32,
        frame_rate: f64,
        sample_rate: f64,
    ) -> Result<Self, GazeError> {
        let meta = Self {
            frame_width,
            frame_height,
            frame_rate,
            sample_rate,
            subject_id: String::from("unknown"),
        };
        meta.validate()?;
        Ok(meta)
    }

    /// 640x480 at 30 fps with a 240 Hz tracker.
    pub fn crcns() -> Self {
        Self::new(640, 480, 30.0, 240.0).expect("valid preset")
    }

    pub fn validate(&self) -> Result<(), GazeError> {
        if self.frame_width == 0 || self.frame_height == 0 {
            return Err(GazeError::Meta("frame dimensions must be positive".into()));
        }
        if !(self.frame_rate.is_finite() && self.frame_rate > 0.0)
            || !(self.sample_rate.is_finite() && self.sample_rate > 0.0)
        {
            return Err(GazeError::Meta("rates must be positive".into()));
        }
        if self.sample_rate < self.frame_rate {
            return Err(GazeError::Meta(format!(
                "sample rate {} Hz is below frame rate {} fps",
                self.sample_rate, self.frame_rate
            )));
        }
        Ok(())
    }

    /// Parses a `key=value` sidecar such as `width=640 height=480 fps=30 hz=240`.
    /// Pairs may be separated by any whitespace; `#` starts a comment.
    pub fn parse_sidecar(text: &str) -> Result<Self, GazeError> {
        let mut width = None;
        let mut height = None;
        let mut fps = None;
        let mut hz = None;
        let mut subject = None;
        for token in text
            .lines()
            .map(|l| l.split('#').next().unwrap_or(""))
            .flat_map(str::split_whitespace)
        {
            let (key, value) = token
                .split_once('=')
                .ok_or_else(|| GazeError::Meta(format!("expected key=value, got `{token}`")))?;
            let bad = || GazeError::Meta(format!("invalid value for `{key}`: `{value}`"));
            match key {
                "width" => width = Some(value.parse::<u32>().map_err(|_| bad())?),
                "height" => height = Some(value.parse::<u32>().map_err(|_| bad())?),
                "fps" => fps = Some(value.parse::<f64>().map_err(|_| bad())?),
                "hz" => hz = Some(value.parse::<f64>().map_err(|_| bad())?),
                "subject" => subject = Some(value.to_string()),
                other => return Err(GazeError::Meta(format!("unknown key `{other}`"))),
            }
        }
        let missing = |k: &str| GazeError::Meta(format!("missing `{k}`"));
        let mut meta = Self::new(
            width.ok_or_else(|| missing("width"))?,
            height.ok_or_else(|| missing("height"))?,
            fps.ok_or_else(|| missing("fps"))?,
            hz.ok_or_else(|| missing("hz"))?,
        )?;
        if let Some(s) = subject {
            meta.subject_id = s;
        }
        Ok(meta)
    }

    pub fn to_sidecar(&self) -> String {
        format!(
            "width={} height={} fps={} hz={} subject={}\n",
            self.frame_width, self.frame_height, self.frame_rate, self.sample_rate, self.subject_id
        )
    }

    pub fn samples_per_frame(&self) -> f64 {
        self.sample_rate / self.frame_rate
    }
}

impl FromStr for RecordingMeta {
    type Err = GazeError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::parse_sidecar(s)
    }
}

/// Samples read from one stream, plus what was noticed while reading them.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ParsedGaze {
    pub samples: Vec<GazeSample>,
    /// Occurrences of each label tag outside the known vocabulary.
    pub unknown_labels: BTreeMap<String, usize>,
    /// 1-based line numbers of samples lying outside the declared frame.
    pub out_of_bounds_lines: Vec<usize>,
}

impl ParsedGaze {
    pub fn unknown_label_count(&self) -> usize {
        self.unknown_labels.values().sum()
    }
}

pub fn parse_gaze_str(text: &str, meta: &RecordingMeta) -> Result<ParsedGaze, GazeError> {
    parse_gaze(text.as_bytes(), meta)
}

/// Reads gaze records in file order. Unknown labels become [`EventLabel::Other`] and are
/// tallied; coordinates outside the frame are kept but reported by line.
pub fn parse_gaze<R: BufRead>(reader: R, meta: &RecordingMeta) -> Result<ParsedGaze, GazeError> {
    let mut out = ParsedGaze::default();
    let mut last_t: Option<u64> = None;
    for (i, line) in reader.lines().enumerate() {
        let lineno = i + 1;
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let err = |message: String| GazeError::Parse { line: lineno, message };
        let fields: Vec<&str> = trimmed.split_whitespace().collect();
        if fields.len() != 4 {
            return Err(err(format!("expected 4 fields, found {}", fields.len())));
        }
        let t = parse_int(fields[0], "t").map_err(err)?;
        let x = parse_int(fields[1], "x").map_err(err)?;
        let y = parse_int(fields[2], "y").map_err(err)?;
        if t < 0 {
            return Err(err(format!("negative sample index {t}")));
        }
        if x < 0 || y < 0 {
            return Err(err(format!("negative coordinate ({x}, {y})")));
        }
        let t = t as u64;
        if let Some(prev) = last_t {
            if t < prev {
                return Err(err(format!("sample index {t} decreases after {prev}")));
            }
        }
        last_t = Some(t);
        let (x, y) = match (u32::try_from(x), u32::try_from(y)) {
            (Ok(x), Ok(y)) => (x, y),
            _ => return Err(err(format!("coordinate ({x}, {y}) out of range"))),
        };
        let label = EventLabel::parse(fields[3]);
        if let EventLabel::Other(tag) = &label {
            *out.unknown_labels.entry(tag.clone()).or_insert(0) += 1;
        }
        let sample = GazeSample { t, x, y, label };
        if !sample.in_bounds(meta) {
            out.out_of_bounds_lines.push(lineno);
        }
        out.samples.push(sample);
    }
    Ok(out)
}

fn parse_int(field: &str, name: &str) -> Result<i64, String> {
    field
        .parse::<i64>()
        .map_err(|_| format!("field `{name}` is not an integer: `{field}`"))
}

/// Writes samples in the record format accepted by [`parse_gaze`].
pub fn write_gaze(samples: &[GazeSample]) -> String {
    let mut out = String::with_capacity(samples.len() * 16);
    for s in samples {
        out.push_str(&format!("{} {} {} {}\n", s.t, s.x, s.y, s.label));
    }
    out
}

/// Frame index of a tracker sample: `floor(t * frame_rate / sample_rate)`.
pub fn sample_to_frame(t: u64, meta: &RecordingMeta) -> u64 {
    ((t as f64) * meta.frame_rate / meta.sample_rate).floor() as u64
}

pub fn filter_attentive(samples: &[GazeSample]) -> Vec<GazeSample> {
    samples.iter().filter(|s| s.label.is_attentive()).cloned().collect()
}
