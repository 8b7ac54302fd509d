//! Slice rasters.
//!
//! Intensities map linearly from the volume's global `[min, max]` onto
//! `0..=255` (all zero for a constant volume). Without an overlay the PNG is
//! 8-bit grayscale; with one it is 8-bit RGB where foreground seeds are
//! `(0, 255, 0)`, background seeds `(255, 255, 0)`, and mask voxels are the
//! gray value blended half-and-half with pure green.

use growcut_core::{Axis, BinaryMask, Label, Result, SeedSet, VolumeGrid};

pub const FOREGROUND_RGB: [u8; 3] = [0, 255, 0];
pub const BACKGROUND_RGB: [u8; 3] = [255, 255, 0];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Overlay {
    None,
    Seeds,
    Mask,
}

pub enum OverlayData<'a> {
    None,
    Seeds(&'a SeedSet),
    Mask(&'a BinaryMask),
}

pub fn mask_rgb(gray: u8) -> [u8; 3] {
    let g = gray as u16;
    [(g / 2) as u8, ((g + 255) / 2) as u8, (g / 2) as u8]
}

/// Row-major pixels, `u` along rows, `v` down the image.
pub fn gray_slice(volume: &VolumeGrid, axis: Axis, index: usize) -> Result<(usize, usize, Vec<u8>)> {
    let dims = volume.dims();
    axis.check_index(index, dims)?;
    let (w, h) = axis.plane(dims);
    let (lo, hi) = volume.min_max();
    let (lo, range) = (lo as f64, hi as f64 - lo as f64);
    let mut px = Vec::with_capacity(w * h);
    for v in 0..h {
        for u in 0..w {
            let c = volume.get(axis.voxel(index, u, v)) as f64;
            let g = if range > 0.0 { ((c - lo) / range * 255.0).round() } else { 0.0 };
            px.push(g as u8);
        }
    }
    Ok((w, h, px))
}

pub fn render_png(volume: &VolumeGrid, axis: Axis, index: usize, overlay: OverlayData<'_>) -> Result<Vec<u8>> {
    let (w, h, gray) = gray_slice(volume, axis, index)?;
    let (color, data) = match overlay {
        OverlayData::None => (png::ColorType::Grayscale, gray),
        OverlayData::Seeds(seeds) => {
            let rgb = colorize(w, &gray, |u, v, g| match seeds.get(axis.voxel(index, u, v)) {
                Some(Label::Foreground) => FOREGROUND_RGB,
                Some(Label::Background) => BACKGROUND_RGB,
                None => [g; 3],
            });
            (png::ColorType::Rgb, rgb)
        }
        OverlayData::Mask(mask) => {
            let rgb = colorize(w, &gray, |u, v, g| {
                if mask.get(axis.voxel(index, u, v)) {
                    mask_rgb(g)
                } else {
                    [g; 3]
                }
            });
            (png::ColorType::Rgb, rgb)
        }
    };
    Ok(encode_png(w as u32, h as u32, color, &data))
}

fn colorize(w: usize, gray: &[u8], f: impl Fn(usize, usize, u8) -> [u8; 3]) -> Vec<u8> {
    let mut out = Vec::with_capacity(gray.len() * 3);
    for (i, &g) in gray.iter().enumerate() {
        out.extend_from_slice(&f(i % w, i / w, g));
    }
    out
}

fn encode_png(w: u32, h: u32, color: png::ColorType, data: &[u8]) -> Vec<u8> {
    let mut buf = Vec::new();
    {
        let mut enc = png::Encoder::new(&mut buf, w, h);
        enc.set_color(color);
        enc.set_depth(png::BitDepth::Eight);
        let mut writer = enc.write_header().expect("in-memory PNG header");
        writer.write_image_data(data).expect("in-memory PNG data");
    }
    buf
}

#[cfg(test)]
mod tests {
    use super::*;
    use growcut_core::{Dims, Spacing};

    #[test]
    fn window_spans_global_range() {
        let dims = Dims::new(2, 1, 2);
        let vol = VolumeGrid::new(dims, Spacing::UNIT, vec![10.0, 20.0, 30.0, 110.0]).unwrap();
        let (_, _, px) = gray_slice(&vol, Axis::Axial, 0).unwrap();
        assert_eq!(px, vec![0, 26]);
        let (_, _, px) = gray_slice(&vol, Axis::Axial, 1).unwrap();
        assert_eq!(px, vec![51, 255]);
        // Sagittal plane of x = 1: u = y, v = z.
        let (w, h, px) = gray_slice(&vol, Axis::Sagittal, 1).unwrap();
        assert_eq!((w, h), (1, 2));
        assert_eq!(px, vec![26, 255]);
        assert!(gray_slice(&vol, Axis::Sagittal, 2).is_err());
    }

    #[test]
    fn blend_never_looks_gray() {
        for g in 0..=255u8 {
            let c = mask_rgb(g);
            assert!(c[1] > c[0] && c[0] == c[2]);
        }
    }
}
