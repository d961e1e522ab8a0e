//! The eye-fixation count volume.
//!
//! A map has `rows x cols` pixels per frame and `frames` frames. Values are attentive-sample
//! counts. Linear indices run frame-major, then row-major: `(k * rows + m) * cols + n`.
//!
//! Storage is chosen automatically: volumes with fewer than 1% non-zero pixels are kept as a
//! sorted coordinate list, everything else as a dense `u16` buffer. The two representations
//! compare equal when their contents are equal.

use std::borrow::Cow;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::gaze::{sample_to_frame, GazeSample, RecordingMeta};

/// Non-zero fraction below which the coordinate-list representation is used.
pub const SPARSE_DENSITY_THRESHOLD: f64 = 0.01;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MapError {
    #[error("map dimensions must be positive, got {rows}x{cols}x{frames}")]
    EmptyDimensions { rows: usize, cols: usize, frames: usize },
    #[error("map dimensions {rows}x{cols}x{frames} overflow the addressable size")]
    DimensionOverflow { rows: usize, cols: usize, frames: usize },
    #[error("value buffer holds {got} entries, expected {expected}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("sparse entry index {index} outside volume of {len} pixels")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("count at pixel index {index} exceeds the u16 ceiling")]
    CountOverflow { index: usize },
    #[error("sample at t={t} ({x}, {y}) lies outside the {width}x{height} frame")]
    SampleOutOfBounds { t: u64, x: u32, y: u32, width: u32, height: u32 },
    #[error("sample at t={t} maps to frame {frame}, but the map has {frames} frames")]
    FrameOutOfRange { t: u64, frame: u64, frames: usize },
    #[error("scale window {win_rows}x{win_cols} does not fit a {rows}x{cols} frame")]
    WindowTooLarge { win_rows: usize, win_cols: usize, rows: usize, cols: usize },
    #[error("invalid scale `{0}`, expected ROWSxCOLS with positive integers")]
    InvalidScale(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StorageKind {
    Dense,
    Sparse,
}

#[derive(Clone)]
enum Storage {
    Dense(Vec<u16>),
    /// Sorted by linear index, no zero values, no duplicate indices.
    Sparse(Vec<(usize, u16)>),
}

#[derive(Clone)]
pub struct FixationMap {
    rows: usize,
    cols: usize,
    frames: usize,
    storage: Storage,
    max_symbol: u16,
}

fn checked_len(rows: usize, cols: usize, frames: usize) -> Result<usize, MapError> {
    if rows == 0 || cols == 0 || frames == 0 {
        return Err(MapError::EmptyDimensions { rows, cols, frames });
    }
    rows.checked_mul(cols)
        .and_then(|p| p.checked_mul(frames))
        .ok_or(MapError::DimensionOverflow { rows, cols, frames })
}

fn prefer_sparse(nonzero: usize, len: usize) -> bool {
    (nonzero as f64) < SPARSE_DENSITY_THRESHOLD * (len as f64)
}

impl FixationMap {
    pub fn zeros(rows: usize, cols: usize, frames: usize) -> Result<Self, MapError> {
        checked_len(rows, cols, frames)?;
        Ok(Self { rows, cols, frames, storage: Storage::Sparse(Vec::new()), max_symbol: 0 })
    }

    /// Builds a map from a full frame-major buffer, picking the storage by density.
    pub fn from_dense(
        rows: usize,
        cols: usize,
        frames: usize,
        values: Vec<u16>,
    ) -> Result<Self, MapError> {
        let len = checked_len(rows, cols, frames)?;
        if values.len() != len {
            return Err(MapError::LengthMismatch { expected: len, got: values.len() });
        }
        let max_symbol = values.iter().copied().max().unwrap_or(0);
        let map = Self { rows, cols, frames, storage: Storage::Dense(values), max_symbol };
        Ok(map.auto_storage())
    }

    /// Builds a map from `(linear index, count)` entries. Entries may be unsorted; repeated
    /// indices are summed and zero counts discarded.
    pub fn from_entries(
        rows: usize,
        cols: usize,
        frames: usize,
        mut entries: Vec<(usize, u16)>,
    ) -> Result<Self, MapError> {
        let len = checked_len(rows, cols, frames)?;
        entries.sort_unstable_by_key(|e| e.0);
        let mut merged: Vec<(usize, u16)> = Vec::with_capacity(entries.len());
        for (index, value) in entries {
            if index >= len {
                return Err(MapError::IndexOutOfRange { index, len });
            }
            match merged.last_mut() {
                Some(last) if last.0 == index => {
                    last.1 = last.1.checked_add(value).ok_or(MapError::CountOverflow { index })?;
                }
                _ => merged.push((index, value)),
            }
        }
        merged.retain(|e| e.1 != 0);
        let max_symbol = merged.iter().map(|e| e.1).max().unwrap_or(0);
        let map = Self { rows, cols, frames, storage: Storage::Sparse(merged), max_symbol };
        Ok(map.auto_storage())
    }

    pub fn from_fn(
        rows: usize,
        cols: usize,
        frames: usize,
        mut f: impl FnMut(usize, usize, usize) -> u16,
    ) -> Result<Self, MapError> {
        let len = checked_len(rows, cols, frames)?;
        let mut values = Vec::with_capacity(len);
        for k in 0..frames {
            for m in 0..rows {
                for n in 0..cols {
                    values.push(f(m, n, k));
                }
            }
        }
        Self::from_dense(rows, cols, frames, values)
    }

    fn auto_storage(self) -> Self {
        let kind = if prefer_sparse(self.nonzero_count(), self.len()) {
            StorageKind::Sparse
        } else {
            StorageKind::Dense
        };
        self.with_storage(kind)
    }

    /// Converts to the requested representation. Contents are unchanged.
    pub fn with_storage(self, kind: StorageKind) -> Self {
        let len = self.len();
        let storage = match (self.storage, kind) {
            (Storage::Dense(v), StorageKind::Sparse) => Storage::Sparse(
                v.into_iter().enumerate().filter(|e| e.1 != 0).collect(),
            ),
            (Storage::Sparse(entries), StorageKind::Dense) => {
                let mut v = vec![0u16; len];
                for (i, c) in entries {
                    v[i] = c;
                }
                Storage::Dense(v)
            }
            (s, _) => s,
        };
        Self { storage, ..self }
    }

    pub fn storage_kind(&self) -> StorageKind {
        match self.storage {
            Storage::Dense(_) => StorageKind::Dense,
            Storage::Sparse(_) => StorageKind::Sparse,
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn frames(&self) -> usize {
        self.frames
    }

    pub fn frame_len(&self) -> usize {
        self.rows * self.cols
    }

    pub fn len(&self) -> usize {
        self.rows * self.cols * self.frames
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Largest count present (`L`); the alphabet is `0..=L`.
    pub fn max_symbol(&self) -> u16 {
        self.max_symbol
    }

    pub fn index(&self, m: usize, n: usize, k: usize) -> usize {
        debug_assert!(m < self.rows && n < self.cols && k < self.frames);
        (k * self.rows + m) * self.cols + n
    }

    pub fn coords(&self, index: usize) -> (usize, usize, usize) {
        let n = index % self.cols;
        let rest = index / self.cols;
        (rest % self.rows, n, rest / self.rows)
    }

    pub fn get(&self, m: usize, n: usize, k: usize) -> u16 {
        self.get_index(self.index(m, n, k))
    }

    pub fn get_index(&self, index: usize) -> u16 {
        match &self.storage {
            Storage::Dense(v) => v[index],
            Storage::Sparse(e) => match e.binary_search_by_key(&index, |x| x.0) {
                Ok(i) => e[i].1,
                Err(_) => 0,
            },
        }
    }

    /// The backing buffer when stored densely.
    pub(crate) fn dense_values(&self) -> Option<&[u16]> {
        match &self.storage {
            Storage::Dense(v) => Some(v),
            Storage::Sparse(_) => None,
        }
    }

    pub fn nonzero_count(&self) -> usize {
        match &self.storage {
            Storage::Dense(v) => v.iter().filter(|&&c| c != 0).count(),
            Storage::Sparse(e) => e.len(),
        }
    }

    /// Non-zero pixels as `(linear index, count)` in index order.
    pub fn nonzeros(&self) -> Box<dyn Iterator<Item = (usize, u16)> + '_> {
        match &self.storage {
            Storage::Dense(v) => {
                Box::new(v.iter().copied().enumerate().filter(|e| e.1 != 0))
            }
            Storage::Sparse(e) => Box::new(e.iter().copied()),
        }
    }

    /// Non-zero pixels of frame `k` as `(index within frame, count)`.
    pub fn frame_nonzeros(&self, k: usize) -> Vec<(usize, u16)> {
        let fl = self.frame_len();
        let base = k * fl;
        match &self.storage {
            Storage::Dense(v) => v[base..base + fl]
                .iter()
                .copied()
                .enumerate()
                .filter(|e| e.1 != 0)
                .collect(),
            Storage::Sparse(e) => {
                let lo = e.partition_point(|x| x.0 < base);
                let hi = e.partition_point(|x| x.0 < base + fl);
                e[lo..hi].iter().map(|&(i, c)| (i - base, c)).collect()
            }
        }
    }

    /// Frame `k` as a row-major slice; borrowed for dense storage.
    pub fn frame(&self, k: usize) -> Cow<'_, [u16]> {
        let fl = self.frame_len();
        match &self.storage {
            Storage::Dense(v) => Cow::Borrowed(&v[k * fl..(k + 1) * fl]),
            Storage::Sparse(_) => {
                let mut buf = vec![0u16; fl];
                for (i, c) in self.frame_nonzeros(k) {
                    buf[i] = c;
                }
                Cow::Owned(buf)
            }
        }
    }

    pub fn to_dense_vec(&self) -> Vec<u16> {
        match &self.storage {
            Storage::Dense(v) => v.clone(),
            Storage::Sparse(_) => (0..self.frames).flat_map(|k| self.frame(k).into_owned()).collect(),
        }
    }

    pub fn total(&self) -> u64 {
        self.nonzeros().map(|e| e.1 as u64).sum()
    }

    pub fn frame_sum(&self, k: usize) -> u64 {
        self.frame_nonzeros(k).iter().map(|e| e.1 as u64).sum()
    }
}

impl PartialEq for FixationMap {
    fn eq(&self, other: &Self) -> bool {
        self.rows == other.rows
            && self.cols == other.cols
            && self.frames == other.frames
            && self.nonzeros().eq(other.nonzeros())
    }
}

impl Eq for FixationMap {}

impl fmt::Debug for FixationMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FixationMap")
            .field("rows", &self.rows)
            .field("cols", &self.cols)
            .field("frames", &self.frames)
            .field("storage", &self.storage_kind())
            .field("nonzero", &self.nonzero_count())
            .field("max_symbol", &self.max_symbol)
            .finish()
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct BuildOptions {
    /// Drop samples outside the frame instead of failing.
    pub skip_out_of_bounds: bool,
    /// Drop samples past the last frame instead of failing.
    pub truncate: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BuiltMap {
    pub map: FixationMap,
    /// Samples that contributed a count.
    pub retained: usize,
    pub dropped_out_of_bounds: usize,
    pub dropped_past_end: usize,
}

/// Accumulates attentive samples into a `height x width x num_frames` count volume.
///
/// Samples are expected to be filtered already; every sample passed in is counted at its
/// pixel in the frame given by [`sample_to_frame`].
pub fn build_map(
    samples: &[GazeSample],
    meta: &RecordingMeta,
    num_frames: usize,
    options: BuildOptions,
) -> Result<BuiltMap, MapError> {
    let rows = meta.frame_height as usize;
    let cols = meta.frame_width as usize;
    checked_len(rows, cols, num_frames)?;
    let mut indices = Vec::with_capacity(samples.len());
    let mut dropped_out_of_bounds = 0;
    let mut dropped_past_end = 0;
    for s in samples {
        if !s.in_bounds(meta) {
            if options.skip_out_of_bounds {
                dropped_out_of_bounds += 1;
                continue;
            }
            return Err(MapError::SampleOutOfBounds {
                t: s.t,
                x: s.x,
                y: s.y,
                width: meta.frame_width,
                height: meta.frame_height,
            });
        }
        let frame = sample_to_frame(s.t, meta);
        if frame >= num_frames as u64 {
            if options.truncate {
                dropped_past_end += 1;
                continue;
            }
            return Err(MapError::FrameOutOfRange { t: s.t, frame, frames: num_frames });
        }
        let k = frame as usize;
        indices.push((k * rows + s.y as usize) * cols + s.x as usize);
    }
    let retained = indices.len();
    indices.sort_unstable();
    let mut entries: Vec<(usize, u16)> = Vec::new();
    for index in indices {
        match entries.last_mut() {
            Some(last) if last.0 == index => {
                last.1 = last.1.checked_add(1).ok_or(MapError::CountOverflow { index })?;
            }
            _ => entries.push((index, 1)),
        }
    }
    let map = FixationMap::from_entries(rows, cols, num_frames, entries)?;
    Ok(BuiltMap { map, retained, dropped_out_of_bounds, dropped_past_end })
}

/// Block size for scale reduction, in source pixels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScaleSpec {
    pub rows: usize,
    pub cols: usize,
}

impl ScaleSpec {
    pub fn new(rows: usize, cols: usize) -> Result<Self, MapError> {
        if rows == 0 || cols == 0 {
            return Err(MapError::InvalidScale(format!("{rows}x{cols}")));
        }
        Ok(Self { rows, cols })
    }

    /// The 40x40 block used for the default analysis scale.
    pub fn default_analysis() -> Self {
        Self { rows: 40, cols: 40 }
    }
}

impl FromStr for ScaleSpec {
    type Err = MapError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || MapError::InvalidScale(s.to_string());
        let (r, c) = s.split_once(['x', 'X']).ok_or_else(bad)?;
        let rows = r.trim().parse().map_err(|_| bad())?;
        let cols = c.trim().parse().map_err(|_| bad())?;
        Self::new(rows, cols).map_err(|_| bad())
    }
}

impl fmt::Display for ScaleSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}x{}", self.rows, self.cols)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Rescaled {
    pub map: FixationMap,
    /// Source rows past the last whole window, dropped.
    pub dropped_rows: usize,
    /// Source columns past the last whole window, dropped.
    pub dropped_cols: usize,
}

impl Rescaled {
    pub fn exact_tiling(&self) -> bool {
        self.dropped_rows == 0 && self.dropped_cols == 0
    }
}

/// Block-sums each frame over non-overlapping windows. Trailing partial windows are dropped.
pub fn rescale(map: &FixationMap, spec: ScaleSpec) -> Result<Rescaled, MapError> {
    if spec.rows == 0 || spec.cols == 0 {
        return Err(MapError::InvalidScale(spec.to_string()));
    }
    if spec.rows > map.rows || spec.cols > map.cols {
        return Err(MapError::WindowTooLarge {
            win_rows: spec.rows,
            win_cols: spec.cols,
            rows: map.rows,
            cols: map.cols,
        });
    }
    let out_rows = map.rows / spec.rows;
    let out_cols = map.cols / spec.cols;
    let used_rows = out_rows * spec.rows;
    let used_cols = out_cols * spec.cols;
    let mut sums: Vec<(usize, u32)> = Vec::new();
    for (index, c) in map.nonzeros() {
        let (m, n, k) = map.coords(index);
        if m >= used_rows || n >= used_cols {
            continue;
        }
        let out = (k * out_rows + m / spec.rows) * out_cols + n / spec.cols;
        sums.push((out, c as u32));
    }
    sums.sort_unstable_by_key(|e| e.0);
    let mut entries: Vec<(usize, u16)> = Vec::new();
    let mut acc: Option<(usize, u32)> = None;
    let flush = |acc: (usize, u32), entries: &mut Vec<(usize, u16)>| -> Result<(), MapError> {
        let value = u16::try_from(acc.1).map_err(|_| MapError::CountOverflow { index: acc.0 })?;
        entries.push((acc.0, value));
        Ok(())
    };
    for (index, c) in sums {
        acc = match acc {
            Some((i, total)) if i == index => Some((i, total + c)),
            Some(done) => {
                flush(done, &mut entries)?;
                Some((index, c))
            }
            None => Some((index, c)),
        };
    }
    if let Some(done) = acc {
        flush(done, &mut entries)?;
    }
    Ok(Rescaled {
        map: FixationMap::from_entries(out_rows, out_cols, map.frames, entries)?,
        dropped_rows: map.rows - used_rows,
        dropped_cols: map.cols - used_cols,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gaze::EventLabel;
    use proptest::prelude::*;

    fn fix(t: u64, x: u32, y: u32) -> GazeSample {
        GazeSample::new(t, x, y, EventLabel::Fixation)
    }

    #[test]
    fn coinciding_samples_accumulate() {
        let built = build_map(&[fix(0, 10, 10), fix(1, 10, 10)], &RecordingMeta::crcns(), 1, BuildOptions::default()).unwrap();
        assert_eq!(built.map.get(10, 10, 0), 2);
        assert_eq!(built.map.total(), 2);
        assert_eq!(built.map.max_symbol(), 2);
    }

    #[test]
    fn empty_samples_give_zero_volume() {
        let built = build_map(&[], &RecordingMeta::crcns(), 3, BuildOptions::default()).unwrap();
        let map = built.map;
        assert_eq!((map.rows(), map.cols(), map.frames()), (480, 640, 3));
        assert_eq!(map.total(), 0);
        assert_eq!(map.max_symbol(), 0);
        assert_eq!(map.storage_kind(), StorageKind::Sparse);
    }

    #[test]
    fn eight_subjects_one_pixel() {
        // one sample per subject, all at the same place in frame 2
        let samples: Vec<_> = (0..8).map(|_| fix(17, 100, 200)).collect();
        let built = build_map(&samples, &RecordingMeta::crcns(), 4, BuildOptions::default()).unwrap();
        let mut expected = vec![0u16; 480 * 640 * 4];
        for s in &samples {
            expected[(2 * 480 + s.y as usize) * 640 + s.x as usize] += 1;
        }
        assert_eq!(built.map.to_dense_vec(), expected);
        assert_eq!(built.map.get(200, 100, 2), 8);
    }

    #[test]
    fn sample_past_last_frame() {
        let meta = RecordingMeta::crcns();
        let err = build_map(&[fix(8, 0, 0)], &meta, 1, BuildOptions::default()).unwrap_err();
        assert!(matches!(err, MapError::FrameOutOfRange { frame: 1, .. }));
        let built = build_map(&[fix(8, 0, 0), fix(0, 0, 0)], &meta, 1, BuildOptions { truncate: true, ..Default::default() }).unwrap();
        assert_eq!(built.dropped_past_end, 1);
        assert_eq!(built.retained, 1);
    }

    #[test]
    fn out_of_bounds_sample() {
        let meta = RecordingMeta::crcns();
        let err = build_map(&[fix(0, 640, 0)], &meta, 1, BuildOptions::default()).unwrap_err();
        assert!(matches!(err, MapError::SampleOutOfBounds { .. }));
        let built = build_map(&[fix(0, 640, 0)], &meta, 1, BuildOptions { skip_out_of_bounds: true, ..Default::default() }).unwrap();
        assert_eq!(built.dropped_out_of_bounds, 1);
        assert_eq!(built.map.total(), 0);
    }

    #[test]
    fn count_ceiling_is_an_error() {
        let meta = RecordingMeta::new(2, 2, 30.0, 240.0).unwrap();
        let samples = vec![fix(0, 0, 0); 65536];
        let err = build_map(&samples, &meta, 1, BuildOptions::default()).unwrap_err();
        assert!(matches!(err, MapError::CountOverflow { .. }));
    }

    #[test]
    fn rescale_full_frame_geometry() {
        let map = FixationMap::zeros(480, 640, 2).unwrap();
        let r = rescale(&map, ScaleSpec::default_analysis()).unwrap();
        assert_eq!((r.map.rows(), r.map.cols(), r.map.frames()), (12, 16, 2));
        assert!(r.exact_tiling());
        assert_eq!(r.map.total(), 0);
    }

    #[test]
    fn rescale_all_ones() {
        let map = FixationMap::from_dense(4, 4, 1, vec![1; 16]).unwrap();
        let r = rescale(&map, ScaleSpec::new(2, 2).unwrap()).unwrap();
        assert_eq!(r.map, FixationMap::from_dense(2, 2, 1, vec![4; 4]).unwrap());
    }

    #[test]
    fn rescale_drops_partial_windows() {
        let map = FixationMap::from_dense(5, 3, 1, vec![1; 15]).unwrap();
        let r = rescale(&map, ScaleSpec::new(2, 2).unwrap()).unwrap();
        assert_eq!((r.dropped_rows, r.dropped_cols), (1, 1));
        assert_eq!(r.map.to_dense_vec(), vec![4, 4]);
    }

    #[test]
    fn rescale_window_too_large() {
        let map = FixationMap::zeros(4, 4, 1).unwrap();
        assert!(matches!(
            rescale(&map, ScaleSpec::new(5, 1).unwrap()),
            Err(MapError::WindowTooLarge { .. })
        ));
    }

    #[test]
    fn rescale_overflow() {
        let map = FixationMap::from_dense(2, 1, 1, vec![40000, 40000]).unwrap();
        assert!(matches!(
            rescale(&map, ScaleSpec::new(2, 1).unwrap()),
            Err(MapError::CountOverflow { .. })
        ));
    }

    #[test]
    fn scale_parsing() {
        assert_eq!("40x40".parse::<ScaleSpec>().unwrap(), ScaleSpec::new(40, 40).unwrap());
        assert_eq!("2X3".parse::<ScaleSpec>().unwrap(), ScaleSpec::new(2, 3).unwrap());
        assert!("0x4".parse::<ScaleSpec>().is_err());
        assert!("40".parse::<ScaleSpec>().is_err());
    }

    #[test]
    fn storage_switch_preserves_contents() {
        let map = FixationMap::from_fn(3, 4, 5, |m, n, k| ((m * 7 + n * 3 + k) % 4) as u16).unwrap();
        assert_eq!(map.storage_kind(), StorageKind::Dense);
        let sparse = map.clone().with_storage(StorageKind::Sparse);
        assert_eq!(sparse, map);
        for k in 0..5 {
            assert_eq!(sparse.frame(k), map.frame(k));
            assert_eq!(sparse.frame_nonzeros(k), map.frame_nonzeros(k));
        }
        assert_eq!(sparse.get(2, 3, 4), map.get(2, 3, 4));
    }

    fn sample_stream() -> impl Strategy<Value = Vec<GazeSample>> {
        prop::collection::vec((0u64..64, 0u32..12, 0u32..10), 0..200)
            .prop_map(|v| v.into_iter().map(|(t, x, y)| fix(t, x, y)).collect())
    }

    fn small_meta() -> RecordingMeta {
        RecordingMeta::new(12, 10, 30.0, 240.0).unwrap()
    }

    proptest! {
        #[test]
        fn count_conservation(samples in sample_stream()) {
            let built = build_map(&samples, &small_meta(), 8, BuildOptions::default()).unwrap();
            prop_assert_eq!(built.map.total(), samples.len() as u64);
            prop_assert_eq!(built.retained, samples.len());
        }

        #[test]
        fn build_is_order_invariant(samples in sample_stream(), seed in any::<u64>()) {
            let mut shuffled = samples.clone();
            // deterministic Fisher-Yates driven by a tiny LCG
            let mut state = seed;
            for i in (1..shuffled.len()).rev() {
                state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                shuffled.swap(i, (state >> 33) as usize % (i + 1));
            }
            let a = build_map(&samples, &small_meta(), 8, BuildOptions::default()).unwrap();
            let b = build_map(&shuffled, &small_meta(), 8, BuildOptions::default()).unwrap();
            prop_assert_eq!(a.map, b.map);
        }

        #[test]
        fn rescale_preserves_frame_sums(values in prop::collection::vec(0u16..5, 8 * 12 * 3)) {
            let map = FixationMap::from_dense(8, 12, 3, values).unwrap();
            let r = rescale(&map, ScaleSpec::new(4, 3).unwrap()).unwrap();
            prop_assert!(r.exact_tiling());
            for k in 0..3 {
                prop_assert_eq!(r.map.frame_sum(k), map.frame_sum(k));
            }
        }

        #[test]
        fn rescale_windows_compose(values in prop::collection::vec(0u16..3, 8 * 12 * 2)) {
            let map = FixationMap::from_dense(8, 12, 2, values).unwrap();
            let twice = rescale(&rescale(&map, ScaleSpec::new(2, 3).unwrap()).unwrap().map, ScaleSpec::new(2, 2).unwrap()).unwrap();
            let once = rescale(&map, ScaleSpec::new(4, 6).unwrap()).unwrap();
            prop_assert_eq!(twice.map, once.map);
        }
    }
}
