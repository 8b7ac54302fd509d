//! Segmentation evaluation: Dice overlap, Hausdorff distance, physical
//! volume and summary statistics.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::volume::{BinaryMask, Connectivity, Dims, Spacing};

/// `2 |A ∩ R| / (|A| + |R|)`.
pub fn dice(a: &BinaryMask, r: &BinaryMask) -> Result<f64> {
    a.ensure_same_dims(r)?;
    let (mut inter, mut na, mut nr) = (0usize, 0usize, 0usize);
    for (&x, &y) in a.bits().iter().zip(r.bits()) {
        na += x as usize;
        nr += y as usize;
        inter += (x && y) as usize;
    }
    if na + nr == 0 {
        return Err(Error::UndefinedMeasure("Dice coefficient of two empty masks"));
    }
    Ok(2.0 * inter as f64 / (na + nr) as f64)
}

/// Foreground count times the voxel volume.
pub fn volume_mm3(mask: &BinaryMask, spacing: Spacing) -> f64 {
    mask.count() as f64 * spacing.voxel_volume()
}

/// Which voxels enter the Hausdorff point sets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum HausdorffMode {
    /// Every foreground voxel.
    #[default]
    FullSet,
    /// Foreground voxels with at least one background face neighbour; voxels
    /// on the volume border count as boundary.
    Boundary,
}

/// The point set the given mode selects from `mask`.
pub fn point_set(mask: &BinaryMask, mode: HausdorffMode) -> BinaryMask {
    match mode {
        HausdorffMode::FullSet => mask.clone(),
        HausdorffMode::Boundary => {
            let dims = mask.dims();
            BinaryMask::from_fn(dims, |v| {
                mask.get(v)
                    && Connectivity::Six
                        .offsets()
                        .iter()
                        .any(|d| v.offset(*d, dims).is_none_or(|q| !mask.get(q)))
            })
        }
    }
}

fn check_pair(a: &BinaryMask, r: &BinaryMask) -> Result<()> {
    a.ensure_same_dims(r)?;
    if a.is_all_background() || r.is_all_background() {
        return Err(Error::EmptyMask);
    }
    Ok(())
}

/// Squared Euclidean distance transform of `features`: for every voxel, the
/// squared distance (in index units) to the nearest feature voxel.
///
/// Separable lower-envelope-of-parabolas algorithm, one pass per axis.
/// Values are exact integers as long as `features` is non-empty.
pub fn squared_distance_transform(features: &BinaryMask) -> Vec<f64> {
    const FAR: f64 = 1e20;
    let dims = features.dims();
    let mut d: Vec<f64> = features.bits().iter().map(|&b| if b { 0.0 } else { FAR }).collect();
    let longest = dims.nx.max(dims.ny).max(dims.nz);
    let mut line = vec![0.0; longest];
    let mut out = vec![0.0; longest];
    let mut hull = vec![0usize; longest];
    let mut bounds = vec![0.0; longest + 1];

    let strides = [1, dims.nx, dims.nx * dims.ny];
    for (axis, &stride) in strides.iter().enumerate() {
        let n = dims.axis_len(axis);
        for start in line_starts(dims, axis) {
            for k in 0..n {
                line[k] = d[start + k * stride];
            }
            envelope_1d(&line[..n], &mut out[..n], &mut hull, &mut bounds);
            for k in 0..n {
                d[start + k * stride] = out[k];
            }
        }
    }
    d
}

fn line_starts(dims: Dims, axis: usize) -> impl Iterator<Item = usize> {
    let (nx, ny, nz) = (dims.nx, dims.ny, dims.nz);
    let (a, b) = match axis {
        0 => (ny, nz),
        1 => (nx, nz),
        _ => (nx, ny),
    };
    (0..a * b).map(move |k| {
        let (i, j) = (k % a, k / a);
        match axis {
            0 => nx * (i + ny * j),
            1 => i + nx * ny * j,
            _ => i + nx * j,
        }
    })
}

fn envelope_1d(f: &[f64], out: &mut [f64], hull: &mut [usize], bounds: &mut [f64]) {
    let n = f.len();
    let sq = |q: usize| (q * q) as f64;
    let mut k = 0;
    hull[0] = 0;
    bounds[0] = f64::NEG_INFINITY;
    bounds[1] = f64::INFINITY;
    for q in 1..n {
        let intersect = |v: usize| ((f[q] + sq(q)) - (f[v] + sq(v))) / (2.0 * q as f64 - 2.0 * v as f64);
        let mut s = intersect(hull[k]);
        while s <= bounds[k] {
            k -= 1;
            s = intersect(hull[k]);
        }
        k += 1;
        hull[k] = q;
        bounds[k] = s;
        bounds[k + 1] = f64::INFINITY;
    }
    k = 0;
    for (p, o) in out.iter_mut().enumerate() {
        while bounds[k + 1] < p as f64 {
            k += 1;
        }
        let v = hull[k];
        let dp = p as f64 - v as f64;
        *o = dp * dp + f[v];
    }
}

/// Hausdorff distance in voxel units, accelerated with distance transforms.
pub fn hausdorff(a: &BinaryMask, r: &BinaryMask, mode: HausdorffMode) -> Result<f64> {
    check_pair(a, r)?;
    let pa = point_set(a, mode);
    let pr = point_set(r, mode);
    let directed = |from: &BinaryMask, to: &BinaryMask| {
        let dt = squared_distance_transform(to);
        from.bits()
            .iter()
            .zip(&dt)
            .filter(|(b, _)| **b)
            .fold(0.0f64, |m, (_, d)| m.max(*d))
    };
    let sq = directed(&pa, &pr).max(directed(&pr, &pa));
    Ok(libm::sqrt(sq))
}

/// `O(|A| |R|)` Hausdorff distance, for cross-checking [`hausdorff`].
pub fn hausdorff_brute_force(a: &BinaryMask, r: &BinaryMask, mode: HausdorffMode) -> Result<f64> {
    check_pair(a, r)?;
    let pts = |m: &BinaryMask| -> Vec<[i64; 3]> {
        point_set(m, mode)
            .foreground()
            .map(|v| [v.x as i64, v.y as i64, v.z as i64])
            .collect()
    };
    let (pa, pr) = (pts(a), pts(r));
    let directed = |xs: &[[i64; 3]], ys: &[[i64; 3]]| {
        xs.iter()
            .map(|x| {
                ys.iter()
                    .map(|y| (0..3).map(|k| (x[k] - y[k]).pow(2)).sum::<i64>())
                    .min()
                    .unwrap_or(0)
            })
            .max()
            .unwrap_or(0)
    };
    let sq = directed(&pa, &pr).max(directed(&pr, &pa));
    Ok(libm::sqrt(sq as f64))
}

/// Per-case comparison of a segmentation `A` against a reference `R`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvaluationReport {
    pub dsc: f64,
    pub hausdorff_voxel: f64,
    pub volume_a_mm3: f64,
    pub volume_b_mm3: f64,
}

pub fn evaluate(a: &BinaryMask, r: &BinaryMask, spacing: Spacing, mode: HausdorffMode) -> Result<EvaluationReport> {
    Ok(EvaluationReport {
        dsc: dice(a, r)?,
        hausdorff_voxel: hausdorff(a, r, mode)?,
        volume_a_mm3: volume_mm3(a, spacing),
        volume_b_mm3: volume_mm3(r, spacing),
    })
}

/// Minimum, maximum, mean and sample standard deviation (`n - 1` denominator).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SummaryStats {
    pub n: usize,
    pub minimum: f64,
    pub maximum: f64,
    pub mean: f64,
    /// `None` for a single sample.
    pub sample_std: Option<f64>,
}

pub fn summarize(values: &[f64]) -> Result<SummaryStats> {
    if values.is_empty() {
        return Err(Error::EmptySample);
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidParameter("summary values must be finite".into()));
    }
    let n = values.len();
    let minimum = values.iter().copied().fold(f64::INFINITY, f64::min);
    let maximum = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mean = values.iter().sum::<f64>() / n as f64;
    let sample_std = (n >= 2).then(|| {
        let ss: f64 = values.iter().map(|v| (v - mean) * (v - mean)).sum();
        libm::sqrt(ss / (n - 1) as f64)
    });
    Ok(SummaryStats {
        n,
        minimum,
        maximum,
        mean,
        sample_std,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::volume::Voxel;

    fn block(dims: Dims, lo: [usize; 3], hi: [usize; 3]) -> BinaryMask {
        BinaryMask::from_fn(dims, |v| {
            (lo[0]..=hi[0]).contains(&v.x) && (lo[1]..=hi[1]).contains(&v.y) && (lo[2]..=hi[2]).contains(&v.z)
        })
    }

    #[test]
    fn dice_examples() {
        let dims = Dims::new(6, 6, 6);
        let a = block(dims, [0, 0, 0], [1, 1, 1]);
        assert_eq!(dice(&a, &a).unwrap(), 1.0);
        let far = block(dims, [4, 4, 4], [5, 5, 5]);
        assert_eq!(dice(&a, &far).unwrap(), 0.0);
        let half = block(dims, [1, 0, 0], [2, 1, 1]);
        assert_eq!(a.count(), 8);
        assert_eq!(half.count(), 8);
        assert_eq!(dice(&a, &half).unwrap(), 0.5);
    }

    #[test]
    fn dice_errors() {
        let d = Dims::new(2, 2, 2);
        assert!(matches!(
            dice(&BinaryMask::empty(d), &BinaryMask::empty(d)),
            Err(Error::UndefinedMeasure(_))
        ));
        assert!(matches!(
            dice(&BinaryMask::full(d), &BinaryMask::full(Dims::new(2, 2, 3))),
            Err(Error::DimsMismatch { .. })
        ));
    }

    #[test]
    fn hausdorff_examples() {
        let dims = Dims::new(5, 5, 2);
        let mut a = BinaryMask::empty(dims);
        a.set(Voxel::new(0, 0, 0), true);
        let mut r = BinaryMask::empty(dims);
        r.set(Voxel::new(3, 4, 0), true);
        for mode in [HausdorffMode::FullSet, HausdorffMode::Boundary] {
            assert_eq!(hausdorff(&a, &r, mode).unwrap(), 5.0);
            assert_eq!(hausdorff_brute_force(&a, &r, mode).unwrap(), 5.0);
            assert_eq!(hausdorff(&a, &a, mode).unwrap(), 0.0);
        }
        assert_eq!(hausdorff(&a, &BinaryMask::empty(dims), HausdorffMode::FullSet), Err(Error::EmptyMask));
    }

    #[test]
    fn boundary_mode_drops_interior() {
        let dims = Dims::new(7, 7, 7);
        let full = block(dims, [1, 1, 1], [5, 5, 5]);
        let b = point_set(&full, HausdorffMode::Boundary);
        assert_eq!(b.count(), 125 - 27);
        // Interior point: full-set distance to a far singleton differs from boundary-only.
        let mut single = BinaryMask::empty(dims);
        single.set(Voxel::new(3, 3, 3), true);
        assert_eq!(hausdorff(&single, &full, HausdorffMode::FullSet).unwrap(), libm::sqrt(12.0));
        assert_eq!(hausdorff(&single, &full, HausdorffMode::Boundary).unwrap(), libm::sqrt(12.0));
    }

    #[test]
    fn distance_transform_matches_brute_force() {
        let dims = Dims::new(7, 5, 4);
        let mut f = BinaryMask::empty(dims);
        f.set(Voxel::new(1, 1, 1), true);
        f.set(Voxel::new(6, 0, 3), true);
        f.set(Voxel::new(3, 4, 0), true);
        let dt = squared_distance_transform(&f);
        for v in dims.voxels() {
            let best = f
                .foreground()
                .map(|y| {
                    let d = [v.x as f64 - y.x as f64, v.y as f64 - y.y as f64, v.z as f64 - y.z as f64];
                    d[0] * d[0] + d[1] * d[1] + d[2] * d[2]
                })
                .fold(f64::INFINITY, f64::min);
            assert_eq!(dt[dims.linear(v)], best, "{v}");
        }
    }

    #[test]
    fn volume_examples() {
        let dims = Dims::new(10, 10, 10);
        assert_eq!(volume_mm3(&BinaryMask::empty(dims), Spacing::new([0.63; 3]).unwrap()), 0.0);
        let v = volume_mm3(&BinaryMask::full(dims), Spacing::new([0.63; 3]).unwrap());
        assert!((v - 250.047).abs() < 1e-9);
        assert_eq!(volume_mm3(&BinaryMask::full(dims), Spacing::UNIT), 1000.0);
    }

    #[test]
    fn summarize_basics() {
        assert_eq!(summarize(&[]), Err(Error::EmptySample));
        let one = summarize(&[4.0]).unwrap();
        assert_eq!((one.minimum, one.maximum, one.mean, one.sample_std), (4.0, 4.0, 4.0, None));
        let s = summarize(&[2.0, 4.0, 4.0, 4.0, 5.0, 5.0, 7.0, 9.0]).unwrap();
        assert_eq!(s.mean, 5.0);
        assert!((s.sample_std.unwrap() - libm::sqrt(32.0 / 7.0)).abs() < 1e-12);
    }
}
