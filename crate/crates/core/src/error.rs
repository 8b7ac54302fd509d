use alloc::string::String;

use crate::seeds::Label;
use crate::volume::{Dims, Voxel};

pub type Result<T> = core::result::Result<T, Error>;

/// Everything that can go wrong in the core crate is a caller input problem;
/// there are no internal failure modes.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("dimensions must be positive, got {0}")]
    EmptyDims(Dims),
    #[error("voxel data has {actual} values but dims {dims} need {expected}")]
    DataLength {
        dims: Dims,
        expected: usize,
        actual: usize,
    },
    #[error("spacing components must be finite and > 0, got {0:?}")]
    BadSpacing([f64; 3]),
    #[error("intensity at linear index {index} is {value}; intensities must be finite and non-negative")]
    BadIntensity { index: usize, value: f32 },
    #[error("voxel {voxel} is outside dims {dims}")]
    OutOfBounds { voxel: Voxel, dims: Dims },
    #[error("dims mismatch: {left} vs {right}")]
    DimsMismatch { left: Dims, right: Dims },
    #[error("region of interest {lo}..={hi} is not valid for dims {dims}")]
    BadRoi { lo: Voxel, hi: Voxel, dims: Dims },
    #[error("seed set is empty")]
    EmptySeeds,
    #[error("no {0} seeds given; at least one foreground and one background seed are required")]
    MissingLabel(Label),
    #[error("polygon has {0} vertices; at least 3 are required")]
    DegeneratePolygon(usize),
    #[error("polygon vertex ({0}, {1}) is not finite")]
    NonFiniteVertex(f64, f64),
    #[error("slice index {index} out of range for axis of length {len}")]
    SliceOutOfRange { index: usize, len: usize },
    #[error("distance {d} exceeds normalisation constant {d_max}")]
    DistanceExceedsRange { d: f64, d_max: f64 },
    #[error("mask is empty")]
    EmptyMask,
    #[error("measure is undefined: {0}")]
    UndefinedMeasure(&'static str),
    #[error("sample list is empty")]
    EmptySample,
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}
