//! Binary post-editing: dilation, erosion and island removal.

use alloc::collections::VecDeque;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::volume::{BinaryMask, Connectivity};

/// Unit neighbourhood applied `radius` times.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StructuringElement {
    pub connectivity: Connectivity,
    pub radius: u32,
}

impl StructuringElement {
    pub fn new(connectivity: Connectivity, radius: u32) -> Result<Self> {
        if radius == 0 {
            return Err(Error::InvalidParameter("structuring element radius must be >= 1".into()));
        }
        Ok(Self {
            connectivity,
            radius,
        })
    }

    pub fn unit(connectivity: Connectivity) -> Self {
        Self {
            connectivity,
            radius: 1,
        }
    }
}

fn dilate_once(mask: &BinaryMask, connectivity: Connectivity) -> BinaryMask {
    let dims = mask.dims();
    let offsets = connectivity.offsets();
    BinaryMask::from_fn(dims, |v| {
        mask.get(v)
            || offsets
                .iter()
                .filter_map(|d| v.offset(*d, dims))
                .any(|q| mask.get(q))
    })
}

fn erode_once(mask: &BinaryMask, connectivity: Connectivity) -> BinaryMask {
    let dims = mask.dims();
    let offsets = connectivity.offsets();
    BinaryMask::from_fn(dims, |v| {
        mask.get(v)
            && offsets
                .iter()
                .all(|d| v.offset(*d, dims).is_some_and(|q| mask.get(q)))
    })
}

pub fn dilate(mask: &BinaryMask, se: StructuringElement) -> BinaryMask {
    let mut out = mask.clone();
    for _ in 0..se.radius {
        out = dilate_once(&out, se.connectivity);
    }
    out
}

/// Out-of-bounds neighbours count as background, so foreground touching the
/// volume border erodes away.
pub fn erode(mask: &BinaryMask, se: StructuringElement) -> BinaryMask {
    let mut out = mask.clone();
    for _ in 0..se.radius {
        out = erode_once(&out, se.connectivity);
    }
    out
}

/// Connected components of the foreground.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Components {
    /// Component id per voxel (`0` = background, ids start at 1 in order of
    /// each component's smallest linear index).
    pub labels: Vec<u32>,
    /// Size of component `id` at index `id - 1`.
    pub sizes: Vec<usize>,
}

impl Components {
    pub fn count(&self) -> usize {
        self.sizes.len()
    }
}

pub fn label_components(mask: &BinaryMask, connectivity: Connectivity) -> Components {
    let dims = mask.dims();
    let mut labels = vec![0u32; dims.len()];
    let mut sizes = Vec::new();
    let mut queue = VecDeque::new();
    for start in 0..dims.len() {
        if !mask.bits()[start] || labels[start] != 0 {
            continue;
        }
        let id = sizes.len() as u32 + 1;
        labels[start] = id;
        queue.push_back(start);
        let mut size = 0;
        while let Some(i) = queue.pop_front() {
            size += 1;
            let p = dims.voxel(i);
            for d in connectivity.offsets() {
                if let Some(q) = p.offset(*d, dims) {
                    let j = dims.linear(q);
                    if mask.bits()[j] && labels[j] == 0 {
                        labels[j] = id;
                        queue.push_back(j);
                    }
                }
            }
        }
        sizes.push(size);
    }
    Components { labels, sizes }
}

/// Keeps only the largest connected component. Equal sizes resolve to the
/// component containing the smallest linear index.
pub fn remove_islands(mask: &BinaryMask, connectivity: Connectivity) -> BinaryMask {
    let comps = label_components(mask, connectivity);
    let mut best: Option<(u32, usize)> = None;
    for (k, &size) in comps.sizes.iter().enumerate() {
        if best.is_none_or(|(_, s)| size > s) {
            best = Some((k as u32 + 1, size));
        }
    }
    let keep = best.map_or(0, |(id, _)| id);
    let bits = comps.labels.iter().map(|&l| l != 0 && l == keep).collect();
    BinaryMask::from_bits(mask.dims(), bits).expect("same dims as input")
}
