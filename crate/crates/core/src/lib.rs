//! GrowCut segmentation of 3D volumes.
//!
//! The crate is `no_std` (it needs `alloc`). The default `std` feature only
//! adds multithreaded sweeps to the optimised engine; results are identical
//! with or without it.

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod contour;
pub mod engine;
mod error;
pub mod metrics;
pub mod morphology;
pub mod phantom;
pub mod seeds;
pub mod volume;

pub use contour::{voxelize_contours, Axis, ContourSet, ContourSlice, Polygon};
pub use engine::{run, run_reference, AutomatonState, CellLabel, CellState, GrowCutConfig, Segmentation};
pub use error::{Error, Result};
pub use seeds::{compute_roi, Label, SeedSet};
pub use volume::{crop, neighbors, uncrop, BinaryMask, Connectivity, Dims, Roi, Spacing, VolumeGrid, Voxel};
