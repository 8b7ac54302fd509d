//! The GrowCut cellular automaton.
//!
//! Every cell carries a label and a strength in `[0, 1]`; seeds start at
//! strength 1. In each synchronous sweep a cell `p` is attacked by each
//! neighbour `q` with force `g(|C[p] - C[q]|) * s[q]` and is conquered when
//! that force strictly exceeds its current strength. `g(d) = 1 - d / d_max`
//! where `d_max` is the intensity range inside the region of interest.
//!
//! Two drivers produce identical labels:
//!
//! * [`run_reference`] sweeps the whole ROI every iteration, single threaded,
//!   computing every attenuation on the fly.
//! * [`run`] keeps an active set of cells that can still change, skips
//!   saturated cells, optionally caches edge attenuations and splits each
//!   sweep into output tiles processed in parallel.

mod automaton;
mod exec;
mod reference;

use alloc::vec::Vec;

pub use automaton::AutomatonState;
pub use reference::run_reference;

use crate::error::{Error, Result};
use crate::seeds::{compute_roi, Label, SeedSet};
use crate::volume::{crop, BinaryMask, Connectivity, Dims, Roi, VolumeGrid};

/// Label of a cell in the automaton.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
#[repr(u8)]
pub enum CellLabel {
    #[default]
    Unlabeled = 0,
    Background = 1,
    Foreground = 2,
}

impl From<Label> for CellLabel {
    fn from(l: Label) -> Self {
        match l {
            Label::Foreground => CellLabel::Foreground,
            Label::Background => CellLabel::Background,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct CellState {
    pub label: CellLabel,
    pub strength: f32,
}

/// Engine parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct GrowCutConfig {
    pub connectivity: Connectivity,
    /// Relative margin added around the seed bounding box, per axis.
    pub margin_fraction: f64,
    /// Sweep limit; `None` means twice the ROI extent sum.
    pub max_iterations: Option<usize>,
    /// Precompute attenuations for every directed ROI edge.
    pub distance_cache: bool,
    /// The cache is declined when it would need more than this many bytes.
    pub cache_budget_bytes: usize,
    /// Voxels per parallel work unit.
    pub tile_size: usize,
    pub thread_count: usize,
}

impl Default for GrowCutConfig {
    fn default() -> Self {
        Self {
            connectivity: Connectivity::TwentySix,
            margin_fraction: 0.05,
            max_iterations: None,
            distance_cache: true,
            cache_budget_bytes: 512 << 20,
            tile_size: 4096,
            thread_count: 1,
        }
    }
}

impl GrowCutConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidParameter(m.into()));
        if !self.margin_fraction.is_finite() || self.margin_fraction < 0.0 {
            return bad("margin fraction must be finite and >= 0");
        }
        if self.max_iterations == Some(0) {
            return bad("max_iterations must be >= 1");
        }
        if self.tile_size == 0 {
            return bad("tile_size must be >= 1");
        }
        if self.thread_count == 0 {
            return bad("thread_count must be >= 1");
        }
        Ok(())
    }

    pub fn iteration_limit(&self, roi: &Roi) -> usize {
        self.max_iterations.unwrap_or(2 * roi.extent_sum())
    }
}

/// Outcome of a segmentation run.
#[derive(Debug, Clone, PartialEq)]
pub struct Segmentation {
    /// Full-volume mask: foreground cells true, everything else false.
    pub mask: BinaryMask,
    pub roi: Roi,
    /// Final labels of the ROI cells, in ROI-local linear order.
    pub roi_labels: Vec<CellLabel>,
    /// Sweeps executed, including the final sweep that changed nothing.
    pub iterations: usize,
    /// The last sweep changed no cell.
    pub converged: bool,
    pub distance_cache_used: bool,
    /// A cache was requested but would have exceeded the memory budget.
    pub distance_cache_declined: bool,
}

/// Absolute intensity difference.
pub fn dist(c1: f64, c2: f64) -> f64 {
    let d = c1 - c2;
    if d < 0.0 {
        -d
    } else {
        d
    }
}

/// Attenuation `1 - d / d_max`. A zero range means a constant image, where
/// every attenuation is 1.
pub fn g(d: f64, d_max: f64) -> Result<f64> {
    if d_max <= 0.0 {
        return Ok(1.0);
    }
    if !(0.0..=d_max).contains(&d) {
        return Err(Error::DistanceExceedsRange { d, d_max });
    }
    Ok(1.0 - d / d_max)
}

/// Attenuation along one edge, rounded to the f32 precision both engines use.
#[inline]
pub(crate) fn edge_weight(c1: f32, c2: f32, d_max: f64) -> f32 {
    if d_max <= 0.0 {
        return 1.0;
    }
    (1.0 - dist(c1 as f64, c2 as f64) / d_max) as f32
}

/// Inputs shared by both drivers after validation.
pub(crate) struct Prepared {
    pub roi: Roi,
    pub grid: Dims,
    pub intensities: Vec<f32>,
    pub d_max: f64,
    pub labels: Vec<CellLabel>,
    pub strengths: Vec<f32>,
    pub max_iterations: usize,
}

pub(crate) fn prepare(volume: &VolumeGrid, seeds: &SeedSet, config: &GrowCutConfig) -> Result<Prepared> {
    config.validate()?;
    seeds.validate_for_segmentation(volume.dims())?;
    let roi = compute_roi(seeds, volume.dims(), config.margin_fraction)?;
    let sub = crop(volume, roi)?;
    let grid = sub.dims();
    let d_max = sub.intensity_range();
    let mut labels = alloc::vec![CellLabel::Unlabeled; grid.len()];
    let mut strengths = alloc::vec![0.0f32; grid.len()];
    for (v, l) in seeds.iter() {
        let i = grid.linear(roi.to_local(v));
        labels[i] = l.into();
        strengths[i] = 1.0;
    }
    Ok(Prepared {
        roi,
        grid,
        intensities: sub.into_data(),
        d_max,
        labels,
        strengths,
        max_iterations: config.iteration_limit(&roi),
    })
}

pub(crate) fn labels_to_mask(labels: &[CellLabel], roi: Roi, dims: Dims) -> BinaryMask {
    let grid = roi.dims();
    let mut mask = BinaryMask::empty(dims);
    for (i, l) in labels.iter().enumerate() {
        if *l == CellLabel::Foreground {
            mask.set(roi.to_global(grid.voxel(i)), true);
        }
    }
    mask
}

/// Optimised GrowCut. Produces exactly the labels of [`run_reference`].
pub fn run(volume: &VolumeGrid, seeds: &SeedSet, config: &GrowCutConfig) -> Result<Segmentation> {
    let mut state = AutomatonState::initialize(volume, seeds, config)?;
    let limit = state.max_iterations();
    let mut converged = false;
    while state.iteration() < limit {
        if state.step() == 0 {
            converged = true;
            break;
        }
    }
    Ok(state.finish(volume.dims(), converged))
}
