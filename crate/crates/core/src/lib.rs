//! Eye-fixation maps from gaze recordings, and information-theoretic measures of how strongly
//! a map pixel is predicted by its spatial and temporal neighbors.
//!
//! Information functionals are generic over the float type via [`Scalar`]; the aliases below
//! fix it to `f64`, which is what reports and the CLI use.

pub mod batch;
pub mod correlation;
pub mod fxm;
pub mod gaze;
pub mod info;
mod io_util;
pub mod map;
pub mod report;
pub mod rng;
pub mod synth;
pub mod scalar;

pub use correlation::{
    all_neighbors_entropy, spatial_mi_map, temporal_mi_pair, temporal_mi_window, AggregateEncoding,
    AnalysisError, NeighborhoodSpec,
};
pub use gaze::{filter_attentive, parse_gaze, sample_to_frame, EventLabel, GazeSample, RecordingMeta};
pub use info::{conditional_entropy, entropy, estimate_pmf, joint_from_pairs, mutual_information};
pub use map::{build_map, rescale, FixationMap, ScaleSpec};
pub use scalar::Scalar;

/// Information quantities are reported in bits.
pub type Bits = f64;
pub type Pmf = info::Pmf<f64>;
pub type JointPmf = info::JointPmf<f64>;
pub type AllNeighborsResult = correlation::AllNeighborsResult<f64>;
pub type SpatialMiMap = correlation::SpatialMiMap<f64>;
pub type TemporalMiCurve = correlation::TemporalMiCurve<f64>;
