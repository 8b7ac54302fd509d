//! Per-slice closed contours and their voxelization into masks.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::volume::{BinaryMask, Dims, Voxel};

/// One of the three canonical slicing planes.
///
/// In-plane coordinates `(u, v)` map to voxels as follows:
///
/// | axis     | slice index | u | v |
/// |----------|-------------|---|---|
/// | axial    | z           | x | y |
/// | sagittal | x           | y | z |
/// | coronal  | y           | x | z |
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Axis {
    Axial,
    Sagittal,
    Coronal,
}

impl Axis {
    /// Number of slices along this axis.
    pub fn depth(self, dims: Dims) -> usize {
        match self {
            Axis::Axial => dims.nz,
            Axis::Sagittal => dims.nx,
            Axis::Coronal => dims.ny,
        }
    }

    /// In-plane `(width, height)` = extents of `(u, v)`.
    pub fn plane(self, dims: Dims) -> (usize, usize) {
        match self {
            Axis::Axial => (dims.nx, dims.ny),
            Axis::Sagittal => (dims.ny, dims.nz),
            Axis::Coronal => (dims.nx, dims.nz),
        }
    }

    pub fn voxel(self, index: usize, u: usize, v: usize) -> Voxel {
        match self {
            Axis::Axial => Voxel::new(u, v, index),
            Axis::Sagittal => Voxel::new(index, u, v),
            Axis::Coronal => Voxel::new(u, index, v),
        }
    }

    pub fn check_index(self, index: usize, dims: Dims) -> Result<()> {
        let len = self.depth(dims);
        if index < len {
            Ok(())
        } else {
            Err(Error::SliceOutOfRange { index, len })
        }
    }
}

/// Closed polygon in in-plane voxel coordinates; the last vertex connects to the first.
pub type Polygon = Vec<[f64; 2]>;

#[derive(Debug, Clone, PartialEq)]
pub struct ContourSlice {
    pub axis: Axis,
    pub index: usize,
    pub polygons: Vec<Polygon>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ContourSet {
    pub slices: Vec<ContourSlice>,
}

fn validate_polygon(poly: &[[f64; 2]]) -> Result<()> {
    if poly.len() < 3 {
        return Err(Error::DegeneratePolygon(poly.len()));
    }
    if let Some(p) = poly.iter().find(|p| !p[0].is_finite() || !p[1].is_finite()) {
        return Err(Error::NonFiniteVertex(p[0], p[1]));
    }
    Ok(())
}

fn on_segment(a: [f64; 2], b: [f64; 2], p: [f64; 2]) -> bool {
    let cross = (b[0] - a[0]) * (p[1] - a[1]) - (b[1] - a[1]) * (p[0] - a[0]);
    cross == 0.0
        && p[0] >= a[0].min(b[0])
        && p[0] <= a[0].max(b[0])
        && p[1] >= a[1].min(b[1])
        && p[1] <= a[1].max(b[1])
}

/// Even-odd containment, counting points on an edge as inside.
pub fn polygon_contains(poly: &[[f64; 2]], p: [f64; 2]) -> bool {
    let n = poly.len();
    let mut inside = false;
    for i in 0..n {
        let a = poly[i];
        let b = poly[(i + 1) % n];
        if on_segment(a, b, p) {
            return true;
        }
        if (a[1] > p[1]) != (b[1] > p[1]) {
            let x = a[0] + (p[1] - a[1]) * (b[0] - a[0]) / (b[1] - a[1]);
            if p[0] < x {
                inside = !inside;
            }
        }
    }
    inside
}

/// Fills every polygon into `mask` on its slice; voxels of other slices are untouched.
pub fn voxelize_contours(contours: &ContourSet, dims: Dims) -> Result<BinaryMask> {
    dims.validate()?;
    let mut mask = BinaryMask::empty(dims);
    for slice in &contours.slices {
        slice.axis.check_index(slice.index, dims)?;
        let (w, h) = slice.axis.plane(dims);
        for poly in &slice.polygons {
            validate_polygon(poly)?;
            let (mut lo, mut hi) = ([f64::INFINITY; 2], [f64::NEG_INFINITY; 2]);
            for p in poly {
                for a in 0..2 {
                    lo[a] = lo[a].min(p[a]);
                    hi[a] = hi[a].max(p[a]);
                }
            }
            if hi[0] < 0.0 || hi[1] < 0.0 {
                continue;
            }
            let u0 = libm::ceil(lo[0]).max(0.0) as usize;
            let v0 = libm::ceil(lo[1]).max(0.0) as usize;
            let u1 = (libm::floor(hi[0]) as usize).min(w - 1);
            let v1 = (libm::floor(hi[1]) as usize).min(h - 1);
            for v in v0..=v1 {
                for u in u0..=u1 {
                    if polygon_contains(poly, [u as f64, v as f64]) {
                        mask.set(slice.axis.voxel(slice.index, u, v), true);
                    }
                }
            }
        }
    }
    Ok(mask)
}
