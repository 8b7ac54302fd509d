//! Volumetric data model: grid geometry, intensity volumes, binary masks,
//! regions of interest and voxel neighbourhoods.
//!
//! All grids use x-fastest linear order: `index = x + nx * (y + ny * z)`.

use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;
use core::fmt;

use crate::error::{Error, Result};

/// Voxel counts along x, y and z.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Dims {
    pub nx: usize,
    pub ny: usize,
    pub nz: usize,
}

impl Dims {
    pub const fn new(nx: usize, ny: usize, nz: usize) -> Self {
        Self { nx, ny, nz }
    }

    pub fn validate(&self) -> Result<()> {
        if self.nx == 0 || self.ny == 0 || self.nz == 0 {
            return Err(Error::EmptyDims(*self));
        }
        Ok(())
    }

    pub const fn len(&self) -> usize {
        self.nx * self.ny * self.nz
    }

    pub const fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub const fn as_array(&self) -> [usize; 3] {
        [self.nx, self.ny, self.nz]
    }

    pub const fn contains(&self, v: Voxel) -> bool {
        v.x < self.nx && v.y < self.ny && v.z < self.nz
    }

    pub fn check(&self, v: Voxel) -> Result<()> {
        if self.contains(v) {
            Ok(())
        } else {
            Err(Error::OutOfBounds {
                voxel: v,
                dims: *self,
            })
        }
    }

    #[inline]
    pub const fn linear(&self, v: Voxel) -> usize {
        v.x + self.nx * (v.y + self.ny * v.z)
    }

    #[inline]
    pub const fn voxel(&self, index: usize) -> Voxel {
        let x = index % self.nx;
        let rest = index / self.nx;
        Voxel {
            x,
            y: rest % self.ny,
            z: rest / self.ny,
        }
    }

    /// Iterates every voxel in linear order.
    pub fn voxels(&self) -> impl Iterator<Item = Voxel> + '_ {
        (0..self.len()).map(move |i| self.voxel(i))
    }

    /// Length of the given axis (0 = x, 1 = y, 2 = z).
    pub const fn axis_len(&self, axis: usize) -> usize {
        match axis {
            0 => self.nx,
            1 => self.ny,
            _ => self.nz,
        }
    }
}

impl fmt::Display for Dims {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}x{}x{}", self.nx, self.ny, self.nz)
    }
}

/// A voxel index triple. Ordering follows linear (z, y, x) order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct Voxel {
    pub x: usize,
    pub y: usize,
    pub z: usize,
}

impl Voxel {
    pub const fn new(x: usize, y: usize, z: usize) -> Self {
        Self { x, y, z }
    }

    pub const fn as_array(&self) -> [usize; 3] {
        [self.x, self.y, self.z]
    }

    pub const fn from_array(a: [usize; 3]) -> Self {
        Self::new(a[0], a[1], a[2])
    }

    /// Applies an offset, returning `None` when the result leaves `dims`.
    #[inline]
    pub fn offset(&self, d: [i32; 3], dims: Dims) -> Option<Voxel> {
        let x = self.x as isize + d[0] as isize;
        let y = self.y as isize + d[1] as isize;
        let z = self.z as isize + d[2] as isize;
        if x < 0 || y < 0 || z < 0 {
            return None;
        }
        let v = Voxel::new(x as usize, y as usize, z as usize);
        dims.contains(v).then_some(v)
    }
}

impl Ord for Voxel {
    fn cmp(&self, other: &Self) -> Ordering {
        (self.z, self.y, self.x).cmp(&(other.z, other.y, other.x))
    }
}

impl PartialOrd for Voxel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Voxel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {})", self.x, self.y, self.z)
    }
}

/// Neighbourhood connectivity in 3D. `Six` is the face neighbourhood (the
/// 3D analogue of 4-connectivity), `TwentySix` the full cube (8-connectivity).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Connectivity {
    Six,
    Eighteen,
    #[default]
    TwentySix,
}

const fn build_offsets<const N: usize>(max_l1: i32) -> [[i32; 3]; N] {
    let mut out = [[0i32; 3]; N];
    let mut k = 0;
    let mut dz = -1;
    while dz <= 1 {
        let mut dy = -1;
        while dy <= 1 {
            let mut dx = -1;
            while dx <= 1 {
                let l1 = (dx * dx) + (dy * dy) + (dz * dz);
                if l1 != 0 && l1 <= max_l1 {
                    out[k] = [dx, dy, dz];
                    k += 1;
                }
                dx += 1;
            }
            dy += 1;
        }
        dz += 1;
    }
    assert!(k == N);
    out
}

static OFFSETS_6: [[i32; 3]; 6] = build_offsets::<6>(1);
static OFFSETS_18: [[i32; 3]; 18] = build_offsets::<18>(2);
static OFFSETS_26: [[i32; 3]; 26] = build_offsets::<26>(3);

impl Connectivity {
    pub fn from_count(n: u32) -> Result<Self> {
        match n {
            6 => Ok(Self::Six),
            18 => Ok(Self::Eighteen),
            26 => Ok(Self::TwentySix),
            other => Err(Error::InvalidParameter(alloc::format!(
                "connectivity must be 6, 18 or 26, got {other}"
            ))),
        }
    }

    pub const fn count(self) -> u32 {
        match self {
            Self::Six => 6,
            Self::Eighteen => 18,
            Self::TwentySix => 26,
        }
    }

    /// `[dx, dy, dz]` offsets in ascending (dz, dy, dx) lexicographic order.
    pub fn offsets(self) -> &'static [[i32; 3]] {
        match self {
            Self::Six => &OFFSETS_6,
            Self::Eighteen => &OFFSETS_18,
            Self::TwentySix => &OFFSETS_26,
        }
    }
}

/// All in-bounds neighbours of `index`, in fixed offset order.
pub fn neighbors(index: Voxel, connectivity: Connectivity, dims: Dims) -> Result<Vec<Voxel>> {
    dims.check(index)?;
    Ok(connectivity
        .offsets()
        .iter()
        .filter_map(|&d| index.offset(d, dims))
        .collect())
}

/// Millimetres per voxel along x, y and z.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Spacing(pub [f64; 3]);

impl Spacing {
    pub const UNIT: Spacing = Spacing([1.0, 1.0, 1.0]);

    pub fn new(s: [f64; 3]) -> Result<Self> {
        if s.iter().all(|c| c.is_finite() && *c > 0.0) {
            Ok(Self(s))
        } else {
            Err(Error::BadSpacing(s))
        }
    }

    pub fn voxel_volume(&self) -> f64 {
        self.0[0] * self.0[1] * self.0[2]
    }
}

impl Default for Spacing {
    fn default() -> Self {
        Self::UNIT
    }
}

/// Storage type of voxel samples on disk.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum SampleType {
    #[default]
    U8,
    U16,
    F32,
}

impl SampleType {
    /// Largest representable sample.
    pub fn max_value(self) -> f64 {
        match self {
            SampleType::U8 => u8::MAX as f64,
            SampleType::U16 => u16::MAX as f64,
            SampleType::F32 => f32::MAX as f64,
        }
    }

    /// Clamps to `[0, max]`; integer types also round to nearest.
    pub fn quantize(self, v: f64) -> f32 {
        let v = v.clamp(0.0, self.max_value());
        match self {
            SampleType::F32 => v as f32,
            _ => libm::round(v) as f32,
        }
    }
}

/// A scalar intensity image with voxel spacing.
#[derive(Debug, Clone, PartialEq)]
pub struct VolumeGrid {
    dims: Dims,
    spacing: Spacing,
    data: Vec<f32>,
}

impl VolumeGrid {
    pub fn new(dims: Dims, spacing: Spacing, data: Vec<f32>) -> Result<Self> {
        dims.validate()?;
        if data.len() != dims.len() {
            return Err(Error::DataLength {
                dims,
                expected: dims.len(),
                actual: data.len(),
            });
        }
        if let Some((index, &value)) = data
            .iter()
            .enumerate()
            .find(|(_, v)| !v.is_finite() || **v < 0.0)
        {
            return Err(Error::BadIntensity { index, value });
        }
        Ok(Self {
            dims,
            spacing,
            data,
        })
    }

    pub fn filled(dims: Dims, spacing: Spacing, value: f32) -> Result<Self> {
        Self::new(dims, spacing, vec![value; dims.len()])
    }

    pub fn dims(&self) -> Dims {
        self.dims
    }

    pub fn spacing(&self) -> Spacing {
        self.spacing
    }

    pub fn data(&self) -> &[f32] {
        &self.data
    }

    pub fn into_data(self) -> Vec<f32> {
        self.data
    }

    pub fn get(&self, v: Voxel) -> f32 {
        self.data[self.dims.linear(v)]
    }

    /// `(min, max)` over all voxels.
    pub fn min_max(&self) -> (f32, f32) {
        self.data
            .iter()
            .fold((f32::INFINITY, f32::NEG_INFINITY), |(lo, hi), &v| {
                (lo.min(v), hi.max(v))
            })
    }

    /// `max - min`; zero for constant images.
    pub fn intensity_range(&self) -> f64 {
        let (lo, hi) = self.min_max();
        hi as f64 - lo as f64
    }
}

/// Foreground/background map over a grid.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BinaryMask {
    dims: Dims,
    bits: Vec<bool>,
}

impl BinaryMask {
    pub fn empty(dims: Dims) -> Self {
        Self {
            dims,
            bits: vec![false; dims.len()],
        }
    }

    pub fn full(dims: Dims) -> Self {
        Self {
            dims,
            bits: vec![true; dims.len()],
        }
    }

    pub fn from_bits(dims: Dims, bits: Vec<bool>) -> Result<Self> {
        dims.validate()?;
        if bits.len() != dims.len() {
            return Err(Error::DataLength {
                dims,
                expected: dims.len(),
                actual: bits.len(),
            });
        }
        Ok(Self { dims, bits })
    }

    pub fn from_fn(dims: Dims, mut f: impl FnMut(Voxel) -> bool) -> Self {
        let bits = dims.voxels().map(&mut f).collect();
        Self { dims, bits }
    }

    pub fn dims(&self) -> Dims {
        self.dims
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn into_bits(self) -> Vec<bool> {
        self.bits
    }

    pub fn get(&self, v: Voxel) -> bool {
        self.bits[self.dims.linear(v)]
    }

    pub fn set(&mut self, v: Voxel, value: bool) {
        let i = self.dims.linear(v);
        self.bits[i] = value;
    }

    pub fn count(&self) -> usize {
        self.bits.iter().filter(|b| **b).count()
    }

    pub fn is_all_background(&self) -> bool {
        !self.bits.iter().any(|b| *b)
    }

    pub fn foreground(&self) -> impl Iterator<Item = Voxel> + '_ {
        self.bits
            .iter()
            .enumerate()
            .filter(|(_, b)| **b)
            .map(|(i, _)| self.dims.voxel(i))
    }

    pub fn complement(&self) -> Self {
        Self {
            dims: self.dims,
            bits: self.bits.iter().map(|b| !b).collect(),
        }
    }

    /// True when every foreground voxel of `self` is foreground in `other`.
    pub fn is_subset_of(&self, other: &BinaryMask) -> bool {
        self.dims == other.dims && self.bits.iter().zip(&other.bits).all(|(a, b)| !a || *b)
    }

    pub fn ensure_same_dims(&self, other: &BinaryMask) -> Result<()> {
        if self.dims != other.dims {
            return Err(Error::DimsMismatch {
                left: self.dims,
                right: other.dims,
            });
        }
        Ok(())
    }
}

/// Axis-aligned box with inclusive corners.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Roi {
    pub lo: Voxel,
    pub hi: Voxel,
}

impl Roi {
    pub fn new(lo: Voxel, hi: Voxel, dims: Dims) -> Result<Self> {
        let roi = Self { lo, hi };
        roi.validate(dims)?;
        Ok(roi)
    }

    pub fn whole(dims: Dims) -> Self {
        Self {
            lo: Voxel::default(),
            hi: Voxel::new(dims.nx - 1, dims.ny - 1, dims.nz - 1),
        }
    }

    pub fn validate(&self, dims: Dims) -> Result<()> {
        let ok = self.lo.x <= self.hi.x
            && self.lo.y <= self.hi.y
            && self.lo.z <= self.hi.z
            && dims.contains(self.hi);
        if ok {
            Ok(())
        } else {
            Err(Error::BadRoi {
                lo: self.lo,
                hi: self.hi,
                dims,
            })
        }
    }

    /// Shape of the box as its own grid.
    pub fn dims(&self) -> Dims {
        Dims::new(
            self.hi.x - self.lo.x + 1,
            self.hi.y - self.lo.y + 1,
            self.hi.z - self.lo.z + 1,
        )
    }

    pub fn contains(&self, v: Voxel) -> bool {
        (self.lo.x..=self.hi.x).contains(&v.x)
            && (self.lo.y..=self.hi.y).contains(&v.y)
            && (self.lo.z..=self.hi.z).contains(&v.z)
    }

    /// Sum of the per-axis extents.
    pub fn extent_sum(&self) -> usize {
        let d = self.dims();
        d.nx + d.ny + d.nz
    }

    /// Maps a global voxel to ROI-local coordinates.
    pub fn to_local(&self, v: Voxel) -> Voxel {
        Voxel::new(v.x - self.lo.x, v.y - self.lo.y, v.z - self.lo.z)
    }

    pub fn to_global(&self, v: Voxel) -> Voxel {
        Voxel::new(v.x + self.lo.x, v.y + self.lo.y, v.z + self.lo.z)
    }
}

/// Extracts the sub-volume covered by `roi`.
pub fn crop(volume: &VolumeGrid, roi: Roi) -> Result<VolumeGrid> {
    roi.validate(volume.dims())?;
    let sub = roi.dims();
    let data = sub
        .voxels()
        .map(|v| volume.get(roi.to_global(v)))
        .collect();
    Ok(VolumeGrid {
        dims: sub,
        spacing: volume.spacing(),
        data,
    })
}

/// Extracts the part of a mask covered by `roi`.
pub fn crop_mask(mask: &BinaryMask, roi: Roi) -> Result<BinaryMask> {
    roi.validate(mask.dims())?;
    let sub = roi.dims();
    Ok(BinaryMask::from_fn(sub, |v| mask.get(roi.to_global(v))))
}

/// Embeds an ROI-shaped mask into a full grid, background outside the ROI.
pub fn uncrop(mask: &BinaryMask, roi: Roi, dims: Dims) -> Result<BinaryMask> {
    roi.validate(dims)?;
    if mask.dims() != roi.dims() {
        return Err(Error::DimsMismatch {
            left: mask.dims(),
            right: roi.dims(),
        });
    }
    let mut out = BinaryMask::empty(dims);
    for v in mask.foreground() {
        out.set(roi.to_global(v), true);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn brute_neighbors(v: Voxel, max_l1: i64, dims: Dims) -> usize {
        let mut n = 0;
        for z in 0..dims.nz as i64 {
            for y in 0..dims.ny as i64 {
                for x in 0..dims.nx as i64 {
                    let d = [x - v.x as i64, y - v.y as i64, z - v.z as i64];
                    let cheb = d.iter().map(|c| c.abs()).max().unwrap();
                    let l1: i64 = d.iter().map(|c| c.abs()).sum();
                    if cheb == 1 && l1 <= max_l1 {
                        n += 1;
                    }
                }
            }
        }
        n
    }

    #[test]
    fn offsets_are_lexicographic() {
        for c in [Connectivity::Six, Connectivity::Eighteen, Connectivity::TwentySix] {
            let offs = c.offsets();
            assert_eq!(offs.len(), c.count() as usize);
            let keys: Vec<_> = offs.iter().map(|o| (o[2], o[1], o[0])).collect();
            let mut sorted = keys.clone();
            sorted.sort();
            assert_eq!(keys, sorted);
        }
    }

    #[test]
    fn neighbor_counts() {
        let d3 = Dims::new(3, 3, 3);
        assert_eq!(neighbors(Voxel::new(1, 1, 1), Connectivity::Six, d3).unwrap().len(), 6);
        let d4 = Dims::new(4, 5, 6);
        assert_eq!(
            neighbors(Voxel::new(0, 0, 0), Connectivity::TwentySix, d4).unwrap().len(),
            7
        );
        let v = Voxel::new(0, 1, 1);
        assert_eq!(brute_neighbors(v, 2, d3), 13);
        assert_eq!(neighbors(v, Connectivity::Eighteen, d3).unwrap().len(), 13);
    }

    #[test]
    fn neighbors_match_brute_force_everywhere() {
        let dims = Dims::new(3, 4, 2);
        for (c, l1) in [
            (Connectivity::Six, 1),
            (Connectivity::Eighteen, 2),
            (Connectivity::TwentySix, 3),
        ] {
            for v in dims.voxels() {
                assert_eq!(neighbors(v, c, dims).unwrap().len(), brute_neighbors(v, l1, dims));
            }
        }
    }

    #[test]
    fn neighbors_are_symmetric() {
        let dims = Dims::new(4, 3, 3);
        for c in [Connectivity::Six, Connectivity::Eighteen, Connectivity::TwentySix] {
            for p in dims.voxels() {
                for q in neighbors(p, c, dims).unwrap() {
                    assert!(neighbors(q, c, dims).unwrap().contains(&p));
                }
            }
        }
    }

    #[test]
    fn neighbors_reject_out_of_bounds() {
        let dims = Dims::new(2, 2, 2);
        assert!(matches!(
            neighbors(Voxel::new(2, 0, 0), Connectivity::Six, dims),
            Err(Error::OutOfBounds { .. })
        ));
    }

    #[test]
    fn volume_validation() {
        let dims = Dims::new(2, 1, 1);
        assert!(VolumeGrid::new(dims, Spacing::UNIT, vec![1.0]).is_err());
        assert!(VolumeGrid::new(dims, Spacing::UNIT, vec![1.0, f32::NAN]).is_err());
        assert!(VolumeGrid::new(dims, Spacing::UNIT, vec![1.0, -1.0]).is_err());
        assert!(Spacing::new([1.0, 0.0, 1.0]).is_err());
        let v = VolumeGrid::new(dims, Spacing::UNIT, vec![3.0, 3.0]).unwrap();
        assert_eq!(v.intensity_range(), 0.0);
    }

    #[test]
    fn crop_whole_is_identity() {
        let dims = Dims::new(3, 2, 2);
        let vol = VolumeGrid::new(dims, Spacing::UNIT, (0..12).map(|i| i as f32).collect()).unwrap();
        assert_eq!(crop(&vol, Roi::whole(dims)).unwrap(), vol);
    }

    #[test]
    fn uncrop_of_empty_is_empty() {
        let dims = Dims::new(5, 5, 5);
        let roi = Roi::new(Voxel::new(1, 1, 1), Voxel::new(3, 2, 4), dims).unwrap();
        let m = uncrop(&BinaryMask::empty(roi.dims()), roi, dims).unwrap();
        assert!(m.is_all_background());
    }

    #[test]
    fn crop_uncrop_full_mask_marks_roi_exactly() {
        let dims = Dims::new(6, 5, 4);
        let roi = Roi::new(Voxel::new(1, 0, 2), Voxel::new(4, 3, 3), dims).unwrap();
        let m = uncrop(&BinaryMask::full(roi.dims()), roi, dims).unwrap();
        for v in dims.voxels() {
            let inside = (1..=4).contains(&v.x) && v.y <= 3 && (2..=3).contains(&v.z);
            assert_eq!(m.get(v), inside, "{v}");
        }
    }

    #[test]
    fn crop_preserves_values() {
        let dims = Dims::new(5, 4, 3);
        let vol = VolumeGrid::new(dims, Spacing::UNIT, (0..60).map(|i| i as f32).collect()).unwrap();
        let roi = Roi::new(Voxel::new(1, 1, 0), Voxel::new(3, 2, 2), dims).unwrap();
        let sub = crop(&vol, roi).unwrap();
        for v in sub.dims().voxels() {
            assert_eq!(sub.get(v), vol.get(roi.to_global(v)));
        }
    }

    #[test]
    fn uncrop_rejects_shape_mismatch() {
        let dims = Dims::new(5, 5, 5);
        let roi = Roi::new(Voxel::new(1, 1, 1), Voxel::new(2, 2, 2), dims).unwrap();
        assert!(uncrop(&BinaryMask::empty(Dims::new(3, 2, 2)), roi, dims).is_err());
        assert!(Roi::new(Voxel::new(2, 0, 0), Voxel::new(1, 0, 0), dims).is_err());
        assert!(Roi::new(Voxel::new(0, 0, 0), Voxel::new(5, 0, 0), dims).is_err());
    }
}
