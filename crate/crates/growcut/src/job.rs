//! Segmentation and morphology jobs shared by the command line and the
//! service.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use growcut_core::morphology::{dilate, erode, remove_islands, StructuringElement};
use growcut_core::{run, BinaryMask, Connectivity, GrowCutConfig, Result, SeedSet, Segmentation, VolumeGrid};

/// Optional overrides of engine parameters.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EngineOverrides {
    pub connectivity: Option<u32>,
    pub margin: Option<f64>,
    pub max_iterations: Option<usize>,
    pub threads: Option<usize>,
    pub distance_cache: Option<bool>,
    pub tile_size: Option<usize>,
}

impl EngineOverrides {
    pub fn apply(&self, base: &GrowCutConfig) -> Result<GrowCutConfig> {
        let mut c = base.clone();
        if let Some(n) = self.connectivity {
            c.connectivity = Connectivity::from_count(n)?;
        }
        if let Some(m) = self.margin {
            c.margin_fraction = m;
        }
        if self.max_iterations.is_some() {
            c.max_iterations = self.max_iterations;
        }
        if let Some(t) = self.threads {
            c.thread_count = t;
        }
        if let Some(d) = self.distance_cache {
            c.distance_cache = d;
        }
        if let Some(t) = self.tile_size {
            c.tile_size = t;
        }
        c.validate()?;
        Ok(c)
    }
}

/// Run metadata. `segmentation_seconds` covers the engine call only.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunStats {
    pub iterations: usize,
    pub converged: bool,
    pub segmentation_seconds: f64,
    pub foreground_voxels: usize,
    pub roi_lo: [usize; 3],
    pub roi_hi: [usize; 3],
    pub distance_cache_used: bool,
}

pub fn timed_run(volume: &VolumeGrid, seeds: &SeedSet, config: &GrowCutConfig) -> Result<(Segmentation, RunStats)> {
    let start = Instant::now();
    let seg = run(volume, seeds, config)?;
    let seconds = start.elapsed().as_secs_f64();
    let stats = RunStats {
        iterations: seg.iterations,
        converged: seg.converged,
        segmentation_seconds: seconds,
        foreground_voxels: seg.mask.count(),
        roi_lo: seg.roi.lo.as_array(),
        roi_hi: seg.roi.hi.as_array(),
        distance_cache_used: seg.distance_cache_used,
    };
    Ok((seg, stats))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum MorphOp {
    Dilate,
    Erode,
    /// Keep only the largest connected component.
    Islands,
}

/// `radius` is ignored by `islands`.
pub fn apply_morph(mask: &BinaryMask, op: MorphOp, connectivity: Connectivity, radius: u32) -> Result<BinaryMask> {
    Ok(match op {
        MorphOp::Dilate => dilate(mask, StructuringElement::new(connectivity, radius)?),
        MorphOp::Erode => erode(mask, StructuringElement::new(connectivity, radius)?),
        MorphOp::Islands => remove_islands(mask, connectivity),
    })
}
