use alloc::vec;

use super::{edge_weight, labels_to_mask, prepare, CellLabel, GrowCutConfig, Segmentation};
use crate::error::Result;
use crate::seeds::SeedSet;
use crate::volume::{neighbors, VolumeGrid};

/// Naive GrowCut: every ROI cell is swept every iteration, single threaded,
/// with attenuations recomputed on each visit. Serves as the oracle for [`super::run`].
pub fn run_reference(volume: &VolumeGrid, seeds: &SeedSet, config: &GrowCutConfig) -> Result<Segmentation> {
    let prep = prepare(volume, seeds, config)?;
    let grid = prep.grid;
    let c = &prep.intensities;
    let mut labels = prep.labels;
    let mut strengths = prep.strengths;
    let mut next_labels = vec![CellLabel::Unlabeled; grid.len()];
    let mut next_strengths = vec![0.0f32; grid.len()];

    let mut iterations = 0;
    let mut converged = false;
    while iterations < prep.max_iterations {
        let mut changed = 0usize;
        for i in 0..grid.len() {
            let mut l = labels[i];
            let mut s = strengths[i];
            for q in neighbors(grid.voxel(i), config.connectivity, grid)? {
                let j = grid.linear(q);
                let attack = edge_weight(c[i], c[j], prep.d_max) * strengths[j];
                if attack > s {
                    l = labels[j];
                    s = attack;
                }
            }
            if l != labels[i] || s != strengths[i] {
                changed += 1;
            }
            next_labels[i] = l;
            next_strengths[i] = s;
        }
        core::mem::swap(&mut labels, &mut next_labels);
        core::mem::swap(&mut strengths, &mut next_strengths);
        iterations += 1;
        if changed == 0 {
            converged = true;
            break;
        }
    }

    Ok(Segmentation {
        mask: labels_to_mask(&labels, prep.roi, volume.dims()),
        roi: prep.roi,
        roi_labels: labels,
        iterations,
        converged,
        distance_cache_used: false,
        distance_cache_declined: false,
    })
}
