use alloc::collections::BTreeMap;
use core::fmt;

use crate::error::{Error, Result};
use crate::volume::{Dims, Roi, Voxel};

/// Seed label painted by the user (or generated automatically).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Label {
    Background,
    Foreground,
}

impl Label {
    pub fn opposite(self) -> Self {
        match self {
            Label::Background => Label::Foreground,
            Label::Foreground => Label::Background,
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Label::Background => "background",
            Label::Foreground => "foreground",
        })
    }
}

/// Sparse voxel labels. Each voxel appears at most once; inserting the same
/// voxel again overwrites its label.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SeedSet {
    entries: BTreeMap<Voxel, Label>,
}

impl SeedSet {
    pub fn new() -> Self {
        Self::default()
    }

    /// Returns the previous label of the voxel, if any.
    pub fn insert(&mut self, voxel: Voxel, label: Label) -> Option<Label> {
        self.entries.insert(voxel, label)
    }

    pub fn get(&self, voxel: Voxel) -> Option<Label> {
        self.entries.get(&voxel).copied()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn count(&self, label: Label) -> usize {
        self.entries.values().filter(|l| **l == label).count()
    }

    /// Entries in linear voxel order.
    pub fn iter(&self) -> impl Iterator<Item = (Voxel, Label)> + '_ {
        self.entries.iter().map(|(v, l)| (*v, *l))
    }

    pub fn validate_bounds(&self, dims: Dims) -> Result<()> {
        self.entries.keys().try_for_each(|v| dims.check(*v))
    }

    /// Checks the preconditions for running a segmentation.
    pub fn validate_for_segmentation(&self, dims: Dims) -> Result<()> {
        self.validate_bounds(dims)?;
        for label in [Label::Foreground, Label::Background] {
            if self.count(label) == 0 {
                return Err(Error::MissingLabel(label));
            }
        }
        Ok(())
    }

    pub fn swapped(&self) -> Self {
        self.iter().map(|(v, l)| (v, l.opposite())).collect()
    }
}

impl FromIterator<(Voxel, Label)> for SeedSet {
    fn from_iter<T: IntoIterator<Item = (Voxel, Label)>>(iter: T) -> Self {
        let mut s = SeedSet::new();
        for (v, l) in iter {
            s.insert(v, l);
        }
        s
    }
}

/// Per-axis margin: `ceil(fraction * extent)`. A zero fraction gives no margin.
pub fn margin_for_extent(fraction: f64, extent: usize) -> usize {
    if fraction <= 0.0 {
        return 0;
    }
    // The tolerance keeps products like 0.07 * 100 = 7.000000000000001 at 7.
    libm::ceil(fraction * extent as f64 - 1e-9) as usize
}

/// Bounding box of all seeds, grown per axis by the margin and clamped to `dims`.
pub fn compute_roi(seeds: &SeedSet, dims: Dims, margin_fraction: f64) -> Result<Roi> {
    if !margin_fraction.is_finite() || margin_fraction < 0.0 {
        return Err(Error::InvalidParameter(alloc::format!(
            "margin fraction must be finite and >= 0, got {margin_fraction}"
        )));
    }
    dims.validate()?;
    seeds.validate_bounds(dims)?;
    let mut it = seeds.iter().map(|(v, _)| v.as_array());
    let first = it.next().ok_or(Error::EmptySeeds)?;
    let (mut lo, mut hi) = (first, first);
    for v in it {
        for a in 0..3 {
            lo[a] = lo[a].min(v[a]);
            hi[a] = hi[a].max(v[a]);
        }
    }
    for a in 0..3 {
        let m = margin_for_extent(margin_fraction, hi[a] - lo[a] + 1);
        lo[a] = lo[a].saturating_sub(m);
        hi[a] = (hi[a] + m).min(dims.axis_len(a) - 1);
    }
    Roi::new(Voxel::from_array(lo), Voxel::from_array(hi), dims)
}
