//! Brush strokes to seed voxels.
//!
//! Consecutive polyline vertices are joined with an integer line walk
//! (Bresenham), then every walked pixel is stamped with the in-plane disc
//! `du² + dv² <= radius²`, clipped to the slice.

use std::collections::BTreeSet;

use serde::Deserialize;

use growcut_core::{Axis, Dims, Voxel};

use crate::io::json::{AxisName, LabelName};

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Stroke {
    pub axis: AxisName,
    pub index: usize,
    pub points: Vec<[i64; 2]>,
    #[serde(default)]
    pub radius: u32,
    pub label: LabelName,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StrokeBatch {
    pub strokes: Vec<Stroke>,
}

/// Pixels on the segment from `a` to `b`, both ends included.
pub fn line_walk(a: [i64; 2], b: [i64; 2]) -> Vec<[i64; 2]> {
    let (dx, dy) = ((b[0] - a[0]).abs(), -(b[1] - a[1]).abs());
    let (sx, sy) = ((b[0] - a[0]).signum(), (b[1] - a[1]).signum());
    let mut err = dx + dy;
    let mut p = a;
    let mut out = vec![p];
    while p != b {
        let e2 = 2 * err;
        if e2 >= dy {
            err += dy;
            p[0] += sx;
        }
        if e2 <= dx {
            err += dx;
            p[1] += sy;
        }
        out.push(p);
    }
    out
}

/// Voxels painted by one stroke, in linear order. Every vertex must lie on
/// the slice.
pub fn rasterize(stroke: &Stroke, dims: Dims) -> Result<Vec<Voxel>, String> {
    let axis: Axis = stroke.axis.into();
    let depth = axis.depth(dims);
    if stroke.index >= depth {
        return Err(format!("slice index {} is outside 0..{depth}", stroke.index));
    }
    let (w, h) = axis.plane(dims);
    if stroke.points.is_empty() {
        return Err("stroke has no points".into());
    }
    if let Some(p) = stroke
        .points
        .iter()
        .find(|p| p[0] < 0 || p[1] < 0 || p[0] >= w as i64 || p[1] >= h as i64)
    {
        return Err(format!("point ({}, {}) is outside the {w}x{h} slice", p[0], p[1]));
    }
    if stroke.radius as usize > w.max(h) {
        return Err(format!("radius {} exceeds the slice size", stroke.radius));
    }
    let mut centre = vec![stroke.points[0]];
    for pair in stroke.points.windows(2) {
        centre.extend(line_walk(pair[0], pair[1]).into_iter().skip(1));
    }
    let r = stroke.radius as i64;
    let mut pixels = BTreeSet::new();
    for c in centre {
        for dv in -r..=r {
            for du in -r..=r {
                let (u, v) = (c[0] + du, c[1] + dv);
                if du * du + dv * dv <= r * r && u >= 0 && v >= 0 && u < w as i64 && v < h as i64 {
                    pixels.insert(axis.voxel(stroke.index, u as usize, v as usize));
                }
            }
        }
    }
    Ok(pixels.into_iter().collect())
}
