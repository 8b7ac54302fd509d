use alloc::vec;
use alloc::vec::Vec;

use super::exec::run_jobs;
use super::{edge_weight, labels_to_mask, prepare, CellLabel, CellState, GrowCutConfig, Segmentation};
use crate::error::Result;
use crate::seeds::SeedSet;
use crate::volume::{Dims, Roi, VolumeGrid};

/// Structure-of-arrays cell buffer.
#[derive(Debug, Clone)]
struct Cells {
    labels: Vec<CellLabel>,
    strengths: Vec<f32>,
}

/// Read-only view of everything a sweep needs besides the output tile.
struct SweepCtx<'a> {
    grid: Dims,
    offsets: &'static [[i32; 3]],
    intensities: &'a [f32],
    d_max: f64,
    weights: Option<&'a [f32]>,
    current: &'a Cells,
}

impl SweepCtx<'_> {
    /// New state of cell `i` given the current buffer.
    #[inline]
    fn update(&self, i: usize) -> (CellLabel, f32) {
        let cur = self.current;
        let mut l = cur.labels[i];
        let mut s = cur.strengths[i];
        let p = self.grid.voxel(i);
        let k_count = self.offsets.len();
        for (k, off) in self.offsets.iter().enumerate() {
            let Some(q) = p.offset(*off, self.grid) else {
                continue;
            };
            let j = self.grid.linear(q);
            let sq = cur.strengths[j];
            // A zero-strength attacker can never win a strict comparison.
            if sq == 0.0 {
                continue;
            }
            let w = match self.weights {
                Some(w) => w[i * k_count + k],
                None => edge_weight(self.intensities[i], self.intensities[j], self.d_max),
            };
            let attack = w * sq;
            if attack > s {
                l = cur.labels[j];
                s = attack;
            }
        }
        (l, s)
    }
}

/// One parallel work unit: a contiguous slice of the output buffer and the
/// active cells falling in it.
struct Tile<'a> {
    start: usize,
    labels: &'a mut [CellLabel],
    strengths: &'a mut [f32],
    active: &'a [u32],
}

/// Double-buffered automaton over a region of interest.
///
/// Between sweeps `current` and `next` hold identical contents, so a sweep
/// only writes the cells it visits. The active set lists every cell whose
/// state can change in the next sweep: cells that changed in the last sweep
/// and their neighbours, excluding saturated cells (strength 1).
#[derive(Debug, Clone)]
pub struct AutomatonState {
    roi: Roi,
    grid: Dims,
    connectivity_offsets: &'static [[i32; 3]],
    intensities: Vec<f32>,
    d_max: f64,
    weights: Option<Vec<f32>>,
    cache_declined: bool,
    current: Cells,
    next: Cells,
    active: Vec<u32>,
    stamp: Vec<u32>,
    epoch: u32,
    iteration: usize,
    max_iterations: usize,
    tile_size: usize,
    thread_count: usize,
}

impl AutomatonState {
    /// Seeds the automaton. Seed cells get strength 1, all other ROI cells
    /// start unlabeled with strength 0, and the active set is every non-seed
    /// cell adjacent to a seed.
    pub fn initialize(volume: &VolumeGrid, seeds: &SeedSet, config: &GrowCutConfig) -> Result<Self> {
        let prep = prepare(volume, seeds, config)?;
        let grid = prep.grid;
        let offsets = config.connectivity.offsets();

        let cache_bytes = grid
            .len()
            .saturating_mul(offsets.len())
            .saturating_mul(core::mem::size_of::<f32>());
        let cache_declined = config.distance_cache && cache_bytes > config.cache_budget_bytes;
        let weights = (config.distance_cache && !cache_declined)
            .then(|| precompute_weights(grid, offsets, &prep.intensities, prep.d_max));

        let current = Cells {
            labels: prep.labels,
            strengths: prep.strengths,
        };
        let seeded: Vec<u32> = (0..grid.len() as u32)
            .filter(|&i| current.strengths[i as usize] > 0.0)
            .collect();
        let mut state = Self {
            roi: prep.roi,
            grid,
            connectivity_offsets: offsets,
            intensities: prep.intensities,
            d_max: prep.d_max,
            weights,
            cache_declined,
            next: current.clone(),
            current,
            active: Vec::new(),
            stamp: vec![0; grid.len()],
            epoch: 0,
            iteration: 0,
            max_iterations: prep.max_iterations,
            tile_size: config.tile_size,
            thread_count: config.thread_count,
        };
        state.active = state.neighbourhood_of(&seeded);
        Ok(state)
    }

    pub fn roi(&self) -> Roi {
        self.roi
    }

    pub fn iteration(&self) -> usize {
        self.iteration
    }

    pub fn max_iterations(&self) -> usize {
        self.max_iterations
    }

    /// Cells that the next sweep will examine, ROI-local linear indices, ascending.
    pub fn active(&self) -> &[u32] {
        &self.active
    }

    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }

    pub fn cell(&self, i: usize) -> CellState {
        CellState {
            label: self.current.labels[i],
            strength: self.current.strengths[i],
        }
    }

    pub fn labels(&self) -> &[CellLabel] {
        &self.current.labels
    }

    pub fn strengths(&self) -> &[f32] {
        &self.current.strengths
    }

    pub fn distance_cache_used(&self) -> bool {
        self.weights.is_some()
    }

    /// Runs one synchronous sweep and returns how many cells changed.
    pub fn step(&mut self) -> usize {
        let ctx = SweepCtx {
            grid: self.grid,
            offsets: self.connectivity_offsets,
            intensities: &self.intensities,
            d_max: self.d_max,
            weights: self.weights.as_deref(),
            current: &self.current,
        };

        let ts = self.tile_size;
        let active = &self.active[..];
        let mut tiles = Vec::new();
        for (t, (labels, strengths)) in self
            .next
            .labels
            .chunks_mut(ts)
            .zip(self.next.strengths.chunks_mut(ts))
            .enumerate()
        {
            let start = t * ts;
            let end = start + labels.len();
            let lo = active.partition_point(|&i| (i as usize) < start);
            let hi = active.partition_point(|&i| (i as usize) < end);
            if lo < hi {
                tiles.push(Tile {
                    start,
                    labels,
                    strengths,
                    active: &active[lo..hi],
                });
            }
        }

        let changed_per_tile = run_jobs(tiles, self.thread_count, |tile: Tile<'_>| {
            let mut changed = Vec::new();
            for &i in tile.active {
                let i = i as usize;
                let (l, s) = ctx.update(i);
                let local = i - tile.start;
                if l != tile.labels[local] || s != tile.strengths[local] {
                    tile.labels[local] = l;
                    tile.strengths[local] = s;
                    changed.push(i as u32);
                }
            }
            changed
        });
        let changed: Vec<u32> = changed_per_tile.into_iter().flatten().collect();

        core::mem::swap(&mut self.current, &mut self.next);
        for &i in &changed {
            let i = i as usize;
            self.next.labels[i] = self.current.labels[i];
            self.next.strengths[i] = self.current.strengths[i];
        }
        self.active = self.neighbourhood_of(&changed);
        self.iteration += 1;
        changed.len()
    }

    /// Cells in `cells` or adjacent to them that are not saturated, sorted.
    fn neighbourhood_of(&mut self, cells: &[u32]) -> Vec<u32> {
        self.epoch = self.epoch.wrapping_add(1);
        if self.epoch == 0 {
            self.stamp.fill(0);
            self.epoch = 1;
        }
        let (grid, epoch) = (self.grid, self.epoch);
        let stamp = &mut self.stamp;
        let strengths = &self.current.strengths;
        let mut out = Vec::new();
        let mut mark = |j: usize| {
            if stamp[j] != epoch && strengths[j] < 1.0 {
                stamp[j] = epoch;
                out.push(j as u32);
            }
        };
        for &i in cells {
            let i = i as usize;
            mark(i);
            let p = grid.voxel(i);
            for off in self.connectivity_offsets {
                if let Some(q) = p.offset(*off, grid) {
                    mark(grid.linear(q));
                }
            }
        }
        out.sort_unstable();
        out
    }

    pub(crate) fn finish(self, dims: Dims, converged: bool) -> Segmentation {
        Segmentation {
            mask: labels_to_mask(&self.current.labels, self.roi, dims),
            roi: self.roi,
            iterations: self.iteration,
            converged,
            distance_cache_used: self.weights.is_some(),
            distance_cache_declined: self.cache_declined,
            roi_labels: self.current.labels,
        }
    }
}

/// Attenuation for every directed edge `(cell, offset)`; out-of-ROI edges hold 0.
fn precompute_weights(grid: Dims, offsets: &[[i32; 3]], c: &[f32], d_max: f64) -> Vec<f32> {
    let k = offsets.len();
    let mut w = vec![0.0f32; grid.len() * k];
    for i in 0..grid.len() {
        let p = grid.voxel(i);
        for (kk, off) in offsets.iter().enumerate() {
            if let Some(q) = p.offset(*off, grid) {
                w[i * k + kk] = edge_weight(c[i], c[grid.linear(q)], d_max);
            }
        }
    }
    w
}
