//! Pixel-versus-neighborhood correlation studies on a fixation map.
//!
//! Three studies are provided:
//!
//! * [`all_neighbors_entropy`]: entropy of every interior pixel, conditioned on the aggregate
//!   of its spatiotemporal neighbors, next to a baseline conditioned on a uniform variable.
//! * [`spatial_mi_map`]: per location, mutual information between the pixel's value across
//!   frames and the aggregate of its eight spatial neighbors.
//! * [`temporal_mi_pair`] / [`temporal_mi_window`]: per frame, mutual information between the
//!   frame and the pixel-wise aggregate of temporally adjacent frames, averaged over frames.
//!
//! Neighbor aggregates are encoded as the integer sum of the neighbor values. The arithmetic
//! mean is that sum divided by a constant, an injective relabeling, so every information
//! value is the same under either encoding; [`AggregateEncoding::MeanGrid`] computes with the
//! exact rational mean for comparison.
//!
//! Pixels without a complete neighborhood are left out of the sample rather than padded.
//! Sparse maps are processed by scattering only the non-zero pixels; all-zero pairs are then
//! counted in bulk.

use std::collections::HashMap;
use std::fmt;
use std::ops::Range;

use num_rational::Ratio;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::info::{
    conditional_entropy, entropy, mutual_information, InfoError, JointHistogram, Symbol,
};
use crate::map::FixationMap;
use crate::rng::SplitMix64;
use crate::scalar::Scalar;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AnalysisError {
    #[error("map of {rows}x{cols}x{frames} is too small: {need}")]
    MapTooSmall { rows: usize, cols: usize, frames: usize, need: &'static str },
    #[error("{what} {offending:?} too large for a map of {frames} frames")]
    RangeTooLarge { what: &'static str, offending: Vec<usize>, frames: usize },
    #[error("{what} must be a non-empty, strictly increasing list of positive integers")]
    InvalidRange { what: &'static str },
    #[error("invalid neighborhood offset ({dm}, {dn}, {dk})")]
    InvalidOffset { dm: i8, dn: i8, dk: i8 },
    #[error("neighborhood has no offsets")]
    EmptyNeighborhood,
    #[error("curves cannot be averaged: {0}")]
    CurveMismatch(&'static str),
    #[error(transparent)]
    Info(#[from] InfoError),
}

/// Displacement of one neighbor relative to the center pixel.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Offset {
    pub dm: i8,
    pub dn: i8,
    pub dk: i8,
}

impl Offset {
    pub const fn new(dm: i8, dn: i8, dk: i8) -> Self {
        Self { dm, dn, dk }
    }
}

/// Set of direct neighbors taking part in an aggregate.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NeighborhoodSpec {
    name: String,
    offsets: Vec<Offset>,
}

impl NeighborhoodSpec {
    pub fn new(name: impl Into<String>, offsets: impl IntoIterator<Item = Offset>) -> Result<Self, AnalysisError> {
        let mut offsets: Vec<Offset> = offsets.into_iter().collect();
        for o in &offsets {
            let in_unit = |d: i8| (-1..=1).contains(&d);
            if !(in_unit(o.dm) && in_unit(o.dn) && in_unit(o.dk)) || (o.dm, o.dn, o.dk) == (0, 0, 0) {
                return Err(AnalysisError::InvalidOffset { dm: o.dm, dn: o.dn, dk: o.dk });
            }
        }
        offsets.sort();
        offsets.dedup();
        if offsets.is_empty() {
            return Err(AnalysisError::EmptyNeighborhood);
        }
        Ok(Self { name: name.into(), offsets })
    }

    fn cube(name: &str, keep: impl Fn(i8, i8, i8) -> bool) -> Self {
        let mut offsets = Vec::new();
        for dk in -1..=1 {
            for dm in -1..=1 {
                for dn in -1..=1 {
                    if (dm, dn, dk) != (0, 0, 0) && keep(dm, dn, dk) {
                        offsets.push(Offset::new(dm, dn, dk));
                    }
                }
            }
        }
        Self::new(name, offsets).expect("preset offsets are valid")
    }

    /// Every pixel of the 3x3x3 cube around the center.
    pub fn all26() -> Self {
        Self::cube("ALL26", |_, _, _| true)
    }

    /// The eight neighbors in the same frame.
    pub fn spatial8() -> Self {
        Self::cube("SPATIAL8", |_, _, dk| dk == 0)
    }

    /// Same pixel in the previous and the next frame.
    pub fn temporal2() -> Self {
        Self::cube("TEMPORAL2", |dm, dn, _| dm == 0 && dn == 0)
    }

    pub fn preset(name: &str) -> Option<Self> {
        match name.to_ascii_uppercase().as_str() {
            "ALL26" => Some(Self::all26()),
            "SPATIAL8" => Some(Self::spatial8()),
            "TEMPORAL2" => Some(Self::temporal2()),
            _ => None,
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn offsets(&self) -> &[Offset] {
        &self.offsets
    }

    pub fn len(&self) -> usize {
        self.offsets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.offsets.is_empty()
    }

    /// Region of `map` whose pixels have every neighbor in bounds.
    fn interior(&self, map: &FixationMap) -> Option<Interior> {
        let axis = |len: usize, d: fn(&Offset) -> i8| -> Option<Range<usize>> {
            let lo = self.offsets.iter().map(|o| (-d(o)).max(0)).max().unwrap_or(0) as usize;
            let hi = self.offsets.iter().map(|o| d(o).max(0)).max().unwrap_or(0) as usize;
            (len >= lo + hi + 1).then(|| lo..len - hi)
        };
        Some(Interior {
            m: axis(map.rows(), |o| o.dm)?,
            n: axis(map.cols(), |o| o.dn)?,
            k: axis(map.frames(), |o| o.dk)?,
        })
    }
}

impl fmt::Display for NeighborhoodSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name)
    }
}

#[derive(Debug, Clone)]
struct Interior {
    m: Range<usize>,
    n: Range<usize>,
    k: Range<usize>,
}

impl Interior {
    fn pixels_per_frame(&self) -> u64 {
        (self.m.len() * self.n.len()) as u64
    }

    fn contains(&self, m: usize, n: usize) -> bool {
        self.m.contains(&m) && self.n.contains(&n)
    }
}

/// How the neighbor aggregate is turned into a symbol.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AggregateEncoding {
    /// Integer sum of the neighbor values.
    #[default]
    Sum,
    /// Exact arithmetic mean, `sum / members` as a reduced fraction.
    MeanGrid,
}

struct Functionals<T> {
    h_x: T,
    h_x_given_z: T,
    mi: T,
}

fn functionals_of<T: Scalar, B: Symbol>(joint: &JointHistogram<u16, B>) -> Result<Functionals<T>, InfoError> {
    let pmf = joint.to_pmf::<T>()?;
    Ok(Functionals {
        h_x: entropy(&pmf.first_marginal()),
        h_x_given_z: conditional_entropy(&pmf),
        mi: mutual_information(&pmf),
    })
}

fn functionals<T: Scalar>(
    joint: &JointHistogram<u16, u32>,
    encoding: AggregateEncoding,
    members: u32,
) -> Result<Functionals<T>, InfoError> {
    match encoding {
        AggregateEncoding::Sum => functionals_of(joint),
        AggregateEncoding::MeanGrid => {
            functionals_of(&joint.map_symbols(|x| *x, |z| Ratio::new(*z, members)))
        }
    }
}

/// Entropies from the all-neighbors study, in bits.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AllNeighborsResult<T> {
    /// Entropy of the interior pixels.
    pub h_x: T,
    /// Conditioned on the neighbor aggregate.
    pub h_x_given_z: T,
    /// Conditioned on an independent uniform draw over `0..=L`.
    pub h_x_given_u: T,
    /// Number of interior pixels in the sample.
    pub samples: u64,
}

impl<T: Scalar> AllNeighborsResult<T> {
    pub fn reduction(&self) -> T {
        self.h_x - self.h_x_given_z
    }

    pub fn baseline_reduction(&self) -> T {
        self.h_x - self.h_x_given_u
    }
}

/// Joint counts of (center pixel, neighbor sum) over the interior of `map`.
pub fn neighbor_joint(map: &FixationMap, spec: &NeighborhoodSpec) -> Result<JointHistogram<u16, u32>, AnalysisError> {
    let interior = spec.interior(map).ok_or(AnalysisError::MapTooSmall {
        rows: map.rows(),
        cols: map.cols(),
        frames: map.frames(),
        need: "no pixel has a complete neighborhood",
    })?;
    let per_frame: Vec<JointHistogram<u16, u32>> = match map.dense_values() {
        Some(values) => {
            let (rows, cols) = (map.rows() as isize, map.cols() as isize);
            let deltas: Vec<isize> = spec
                .offsets
                .iter()
                .map(|o| (o.dk as isize * rows + o.dm as isize) * cols + o.dn as isize)
                .collect();
            interior
                .k
                .clone()
                .into_par_iter()
                .map(|k| {
                    let mut h = JointHistogram::new();
                    for m in interior.m.clone() {
                        for n in interior.n.clone() {
                            let center = map.index(m, n, k);
                            let z: u32 = deltas
                                .iter()
                                .map(|&d| values[(center as isize + d) as usize] as u32)
                                .sum();
                            h.add(values[center], z);
                        }
                    }
                    h
                })
                .collect()
        }
        None => interior
            .k
            .clone()
            .into_par_iter()
            .map(|k| scatter_frame(map, spec, &interior, k))
            .collect(),
    };
    let mut joint = JointHistogram::new();
    for h in &per_frame {
        joint.merge(h);
    }
    Ok(joint)
}

/// Sparse path: only pixels that are non-zero or have a non-zero neighbor are visited.
fn scatter_frame(map: &FixationMap, spec: &NeighborhoodSpec, interior: &Interior, k: usize) -> JointHistogram<u16, u32> {
    let cols = map.cols();
    let mut touched: HashMap<usize, (u16, u32)> = HashMap::new();
    for (p, v) in map.frame_nonzeros(k) {
        if interior.contains(p / cols, p % cols) {
            touched.entry(p).or_default().0 = v;
        }
    }
    let mut by_frame: HashMap<i8, Vec<(usize, u16)>> = HashMap::new();
    for o in &spec.offsets {
        let src = by_frame
            .entry(o.dk)
            .or_insert_with(|| map.frame_nonzeros((k as isize + o.dk as isize) as usize));
        for &(p, v) in src.iter() {
            let m = (p / cols) as isize - o.dm as isize;
            let n = (p % cols) as isize - o.dn as isize;
            if m < 0 || n < 0 || !interior.contains(m as usize, n as usize) {
                continue;
            }
            touched.entry(m as usize * cols + n as usize).or_default().1 += v as u32;
        }
    }
    let mut h = JointHistogram::new();
    for &(x, z) in touched.values() {
        h.add(x, z);
    }
    h.add_n(0, 0, interior.pixels_per_frame() - touched.len() as u64);
    h
}

/// Joint counts of (interior pixel, uniform draw over `0..=L`), drawing in `(k, m, n)` order.
fn uniform_baseline_joint(map: &FixationMap, interior: &Interior, seed: u64) -> JointHistogram<u16, u16> {
    let alphabet = map.max_symbol() as usize + 1;
    let mut table = vec![0u64; alphabet * alphabet];
    let mut rng = SplitMix64::new(seed);
    let cols = map.cols();
    for k in interior.k.clone() {
        let frame = map.frame(k);
        for m in interior.m.clone() {
            for n in interior.n.clone() {
                let x = frame[m * cols + n] as usize;
                let u = rng.below(alphabet as u64) as usize;
                table[x * alphabet + u] += 1;
            }
        }
    }
    let mut joint = JointHistogram::new();
    for (i, &c) in table.iter().enumerate() {
        joint.add_n((i / alphabet) as u16, (i % alphabet) as u16, c);
    }
    joint
}

/// Entropy of the interior pixels, conditioned on their neighbor aggregate and on a uniform
/// baseline variable seeded with `seed`.
pub fn all_neighbors_entropy<T: Scalar>(
    map: &FixationMap,
    spec: &NeighborhoodSpec,
    seed: u64,
) -> Result<AllNeighborsResult<T>, AnalysisError> {
    all_neighbors_entropy_encoded(map, spec, seed, AggregateEncoding::Sum)
}

pub fn all_neighbors_entropy_encoded<T: Scalar>(
    map: &FixationMap,
    spec: &NeighborhoodSpec,
    seed: u64,
    encoding: AggregateEncoding,
) -> Result<AllNeighborsResult<T>, AnalysisError> {
    let joint = neighbor_joint(map, spec)?;
    let interior = spec.interior(map).expect("checked by neighbor_joint");
    let f = functionals::<T>(&joint, encoding, spec.len() as u32)?;
    let baseline = uniform_baseline_joint(map, &interior, seed);
    let h_x_given_u = conditional_entropy(&baseline.to_pmf::<T>()?);
    Ok(AllNeighborsResult { h_x: f.h_x, h_x_given_z: f.h_x_given_z, h_x_given_u, samples: joint.total() })
}

/// Mutual information per spatial location. Border locations are `None`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpatialMiMap<T> {
    pub rows: usize,
    pub cols: usize,
    /// Row-major.
    pub values: Vec<Option<T>>,
}

impl<T: Scalar> SpatialMiMap<T> {
    pub fn get(&self, m: usize, n: usize) -> Option<T> {
        self.values[m * self.cols + n]
    }

    /// Location of the largest value; the first one in row-major order on ties.
    pub fn argmax(&self) -> Option<(usize, usize)> {
        let mut best: Option<(usize, T)> = None;
        for (i, v) in self.values.iter().enumerate() {
            if let Some(v) = *v {
                if best.map_or(true, |(_, b)| v > b) {
                    best = Some((i, v));
                }
            }
        }
        best.map(|(i, _)| (i / self.cols, i % self.cols))
    }

    pub fn max(&self) -> Option<T> {
        self.values.iter().flatten().copied().fold(None, |acc, v| match acc {
            Some(a) if a >= v => Some(a),
            _ => Some(v),
        })
    }
}

/// Per-location joint counts of (pixel value, spatial neighbor sum) across all frames.
pub fn spatial_joints(map: &FixationMap) -> Result<Vec<Option<JointHistogram<u16, u32>>>, AnalysisError> {
    let spec = NeighborhoodSpec::spatial8();
    if map.rows() < 3 || map.cols() < 3 || map.frames() < 2 {
        return Err(AnalysisError::MapTooSmall {
            rows: map.rows(),
            cols: map.cols(),
            frames: map.frames(),
            need: "at least 3x3 pixels and 2 frames",
        });
    }
    let interior = spec.interior(map).expect("dimensions checked");
    let (rows, cols, frames) = (map.rows(), map.cols(), map.frames());
    let locations: Vec<(usize, usize)> = (0..rows)
        .flat_map(|m| (0..cols).map(move |n| (m, n)))
        .collect();
    match map.dense_values() {
        Some(values) => {
            let deltas: Vec<isize> = spec
                .offsets
                .iter()
                .map(|o| o.dm as isize * cols as isize + o.dn as isize)
                .collect();
            Ok(locations
                .into_par_iter()
                .map(|(m, n)| {
                    if !interior.contains(m, n) {
                        return None;
                    }
                    let mut h = JointHistogram::new();
                    for k in 0..frames {
                        let center = map.index(m, n, k);
                        let q: u32 = deltas
                            .iter()
                            .map(|&d| values[(center as isize + d) as usize] as u32)
                            .sum();
                        h.add(values[center], q);
                    }
                    Some(h)
                })
                .collect())
        }
        None => {
            let mut triples: Vec<(usize, u16, u32)> = (0..frames)
                .into_par_iter()
                .flat_map_iter(|k| {
                    let interior = Interior { k: k..k + 1, ..interior.clone() };
                    let mut touched: HashMap<usize, (u16, u32)> = HashMap::new();
                    let nonzeros = map.frame_nonzeros(k);
                    for &(p, v) in &nonzeros {
                        if interior.contains(p / cols, p % cols) {
                            touched.entry(p).or_default().0 = v;
                        }
                    }
                    for o in &spec.offsets {
                        for &(p, v) in &nonzeros {
                            let m = (p / cols) as isize - o.dm as isize;
                            let n = (p % cols) as isize - o.dn as isize;
                            if m >= 0 && n >= 0 && interior.contains(m as usize, n as usize) {
                                touched.entry(m as usize * cols + n as usize).or_default().1 += v as u32;
                            }
                        }
                    }
                    touched.into_iter().map(|(p, (x, q))| (p, x, q))
                })
                .collect();
            triples.sort_unstable();
            let mut out: Vec<Option<JointHistogram<u16, u32>>> = locations
                .iter()
                .map(|&(m, n)| {
                    interior.contains(m, n).then(|| {
                        let mut h = JointHistogram::new();
                        h.add_n(0, 0, frames as u64);
                        h
                    })
                })
                .collect();
            for chunk in triples.chunk_by(|a, b| a.0 == b.0) {
                let p = chunk[0].0;
                let mut h = JointHistogram::new();
                for &(_, x, q) in chunk {
                    h.add(x, q);
                }
                h.add_n(0, 0, (frames - chunk.len()) as u64);
                out[p] = Some(h);
            }
            Ok(out)
        }
    }
}

/// Mutual information between each location's value across frames and the sum of its eight
/// spatial neighbors.
pub fn spatial_mi_map<T: Scalar>(map: &FixationMap) -> Result<SpatialMiMap<T>, AnalysisError> {
    spatial_mi_map_encoded(map, AggregateEncoding::Sum)
}

pub fn spatial_mi_map_encoded<T: Scalar>(
    map: &FixationMap,
    encoding: AggregateEncoding,
) -> Result<SpatialMiMap<T>, AnalysisError> {
    let joints = spatial_joints(map)?;
    let values = joints
        .par_iter()
        .map(|j| match j {
            Some(j) => functionals::<T>(j, encoding, 8).map(|f| Some(f.mi)),
            None => Ok(None),
        })
        .collect::<Result<Vec<_>, InfoError>>()?;
    Ok(SpatialMiMap { rows: map.rows(), cols: map.cols(), values })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TemporalMode {
    /// Aggregate of the two frames at distance `D` on either side.
    PairAtDistance,
    /// Aggregate of all frames at distances `1..=N` on either side.
    AveragedWindow,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Aggregation {
    PerVideo,
    PerCategory(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TemporalMiCurve<T> {
    pub mode: TemporalMode,
    /// Frame distances `D` or window sizes `N`, strictly increasing.
    pub distances: Vec<usize>,
    /// Bits, one per entry of `distances`.
    pub mi: Vec<T>,
    pub aggregation: Aggregation,
}

impl<T: Scalar> TemporalMiCurve<T> {
    pub fn value_at(&self, distance: usize) -> Option<T> {
        self.distances.iter().position(|&d| d == distance).map(|i| self.mi[i])
    }
}

/// Joint counts of (frame `k` pixel, pixel-wise sum over `sources` frames).
pub fn frame_joint(map: &FixationMap, k: usize, sources: &[usize]) -> JointHistogram<u16, u32> {
    let mut h = JointHistogram::new();
    match map.dense_values() {
        Some(values) => {
            let fl = map.frame_len();
            let mut w = vec![0u32; fl];
            for &s in sources {
                for (acc, &v) in w.iter_mut().zip(&values[s * fl..(s + 1) * fl]) {
                    *acc += v as u32;
                }
            }
            for (&x, &w) in values[k * fl..(k + 1) * fl].iter().zip(&w) {
                h.add(x, w);
            }
        }
        None => {
            let mut touched: HashMap<usize, (u16, u32)> = HashMap::new();
            for (p, v) in map.frame_nonzeros(k) {
                touched.entry(p).or_default().0 = v;
            }
            for &s in sources {
                for (p, v) in map.frame_nonzeros(s) {
                    touched.entry(p).or_default().1 += v as u32;
                }
            }
            for &(x, w) in touched.values() {
                h.add(x, w);
            }
            h.add_n(0, 0, (map.frame_len() - touched.len()) as u64);
        }
    }
    h
}

fn validate_range(values: &[usize], what: &'static str) -> Result<(), AnalysisError> {
    let increasing = values.windows(2).all(|w| w[0] < w[1]);
    if values.is_empty() || values[0] == 0 || !increasing {
        return Err(AnalysisError::InvalidRange { what });
    }
    Ok(())
}

fn temporal_curve<T: Scalar>(
    map: &FixationMap,
    extents: &[usize],
    mode: TemporalMode,
    encoding: AggregateEncoding,
) -> Result<TemporalMiCurve<T>, AnalysisError> {
    let what = match mode {
        TemporalMode::PairAtDistance => "distances",
        TemporalMode::AveragedWindow => "window sizes",
    };
    validate_range(extents, what)?;
    let frames = map.frames();
    let offending: Vec<usize> = extents.iter().copied().filter(|&d| frames <= 2 * d).collect();
    if !offending.is_empty() {
        return Err(AnalysisError::RangeTooLarge { what, offending, frames });
    }
    let mut mi = Vec::with_capacity(extents.len());
    for &d in extents {
        let members = match mode {
            TemporalMode::PairAtDistance => 2,
            TemporalMode::AveragedWindow => 2 * d as u32,
        };
        let per_frame = (d..frames - d)
            .into_par_iter()
            .map(|k| {
                let sources: Vec<usize> = match mode {
                    TemporalMode::PairAtDistance => vec![k - d, k + d],
                    TemporalMode::AveragedWindow => (1..=d).flat_map(|j| [k - j, k + j]).collect(),
                };
                functionals::<T>(&frame_joint(map, k, &sources), encoding, members).map(|f| f.mi)
            })
            .collect::<Result<Vec<T>, InfoError>>()?;
        let count = T::from_count(per_frame.len() as u64);
        mi.push(per_frame.into_iter().fold(T::zero(), |a, b| a + b) / count);
    }
    Ok(TemporalMiCurve { mode, distances: extents.to_vec(), mi, aggregation: Aggregation::PerVideo })
}

/// Mean over frames `k` of `I(F(k); F(k-D) + F(k+D))` for each distance `D`.
pub fn temporal_mi_pair<T: Scalar>(map: &FixationMap, distances: &[usize]) -> Result<TemporalMiCurve<T>, AnalysisError> {
    temporal_curve(map, distances, TemporalMode::PairAtDistance, AggregateEncoding::Sum)
}

pub fn temporal_mi_pair_encoded<T: Scalar>(
    map: &FixationMap,
    distances: &[usize],
    encoding: AggregateEncoding,
) -> Result<TemporalMiCurve<T>, AnalysisError> {
    temporal_curve(map, distances, TemporalMode::PairAtDistance, encoding)
}

/// Mean over frames `k` of `I(F(k); sum of F(k±j) for j in 1..=N)` for each window size `N`.
pub fn temporal_mi_window<T: Scalar>(map: &FixationMap, window_sizes: &[usize]) -> Result<TemporalMiCurve<T>, AnalysisError> {
    temporal_curve(map, window_sizes, TemporalMode::AveragedWindow, AggregateEncoding::Sum)
}

pub fn temporal_mi_window_encoded<T: Scalar>(
    map: &FixationMap,
    window_sizes: &[usize],
    encoding: AggregateEncoding,
) -> Result<TemporalMiCurve<T>, AnalysisError> {
    temporal_curve(map, window_sizes, TemporalMode::AveragedWindow, encoding)
}

/// Unweighted mean of per-video curves. Curves must share mode and distances.
pub fn category_mean<T: Scalar>(curves: &[&TemporalMiCurve<T>], category: &str) -> Result<TemporalMiCurve<T>, AnalysisError> {
    let first = curves.first().ok_or(AnalysisError::CurveMismatch("no curves"))?;
    if curves.iter().any(|c| c.mode != first.mode) {
        return Err(AnalysisError::CurveMismatch("modes differ"));
    }
    if curves.iter().any(|c| c.distances != first.distances) {
        return Err(AnalysisError::CurveMismatch("distances differ"));
    }
    let count = T::from_count(curves.len() as u64);
    let mi = (0..first.distances.len())
        .map(|i| curves.iter().fold(T::zero(), |acc, c| acc + c.mi[i]) / count)
        .collect();
    Ok(TemporalMiCurve {
        mode: first.mode,
        distances: first.distances.clone(),
        mi,
        aggregation: Aggregation::PerCategory(category.to_string()),
    })
}
