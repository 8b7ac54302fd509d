//! Synthetic volumes with exact ground truth, and automatic seeding from a
//! ground-truth mask.
//!
//! Noise is additive Gaussian drawn from `rand_distr::Normal` driven by a
//! ChaCha8 generator seeded with `rng_seed` (`SeedableRng::seed_from_u64`).
//! One sample is drawn per voxel in linear order, and only when
//! `noise_sigma > 0`. Noisy values are clamped to the sample type's range
//! and rounded for integer types.

use alloc::vec::Vec;

use rand_chacha::ChaCha8Rng;
use rand_core::SeedableRng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::morphology::{dilate, erode, StructuringElement};
use crate::seeds::{Label, SeedSet};
use crate::volume::{BinaryMask, Connectivity, Dims, SampleType, Spacing, VolumeGrid, Voxel};

/// Solid membership tested at voxel centres (integer coordinates).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Shape {
    /// `|p - center| <= semi` on every axis.
    Box { center: [f64; 3], semi: [f64; 3] },
    /// `sum(((p - center) / semi)^2) <= 1`.
    Ellipsoid { center: [f64; 3], semi: [f64; 3] },
}

impl Shape {
    fn parts(&self) -> ([f64; 3], [f64; 3]) {
        match *self {
            Shape::Box { center, semi } | Shape::Ellipsoid { center, semi } => (center, semi),
        }
    }

    pub fn contains(&self, v: Voxel) -> bool {
        let p = [v.x as f64, v.y as f64, v.z as f64];
        match *self {
            Shape::Box { center, semi } => (0..3).all(|a| {
                let d = p[a] - center[a];
                d <= semi[a] && -d <= semi[a]
            }),
            Shape::Ellipsoid { center, semi } => {
                let s: f64 = (0..3)
                    .map(|a| {
                        let t = (p[a] - center[a]) / semi[a];
                        t * t
                    })
                    .sum();
                s <= 1.0
            }
        }
    }

    /// The shape's bounding box must lie within the grid.
    pub fn validate(&self, dims: Dims) -> Result<()> {
        let (center, semi) = self.parts();
        for a in 0..3 {
            let ok = center[a].is_finite()
                && semi[a].is_finite()
                && semi[a] >= 0.0
                && !(matches!(self, Shape::Ellipsoid { .. }) && semi[a] == 0.0)
                && center[a] - semi[a] >= 0.0
                && center[a] + semi[a] <= (dims.axis_len(a) - 1) as f64;
            if !ok {
                return Err(Error::InvalidParameter(alloc::format!(
                    "shape {self:?} does not fit inside {dims}"
                )));
            }
        }
        Ok(())
    }
}

/// Second object with its own intensity, painted outside the body.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Distractor {
    pub shape: Shape,
    pub intensity: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PhantomSpec {
    pub dims: Dims,
    pub spacing: Spacing,
    pub body: Shape,
    pub fg_intensity: f64,
    pub bg_intensity: f64,
    pub noise_sigma: f64,
    pub distractor: Option<Distractor>,
    pub rng_seed: u64,
    pub sample_type: SampleType,
}

impl PhantomSpec {
    /// 64³ box phantom at 0.63 mm spacing with contrast 100 (background 50,
    /// foreground 150), stored as 8-bit samples.
    pub fn desk_box(noise_sigma: f64, rng_seed: u64) -> Self {
        Self {
            dims: Dims::new(64, 64, 64),
            spacing: Spacing([0.63; 3]),
            body: Shape::Box {
                center: [32.0, 32.0, 32.0],
                semi: [12.0, 10.0, 8.0],
            },
            fg_intensity: 150.0,
            bg_intensity: 50.0,
            noise_sigma,
            distractor: None,
            rng_seed,
            sample_type: SampleType::U8,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.dims.validate()?;
        Spacing::new(self.spacing.0)?;
        self.body.validate(self.dims)?;
        if let Some(d) = &self.distractor {
            d.shape.validate(self.dims)?;
            if !d.intensity.is_finite() {
                return Err(Error::InvalidParameter("distractor intensity must be finite".into()));
            }
        }
        if !self.fg_intensity.is_finite() || !self.bg_intensity.is_finite() {
            return Err(Error::InvalidParameter("intensities must be finite".into()));
        }
        if self.fg_intensity == self.bg_intensity {
            return Err(Error::InvalidParameter(
                "foreground and background intensities must differ".into(),
            ));
        }
        if !self.noise_sigma.is_finite() || self.noise_sigma < 0.0 {
            return Err(Error::InvalidParameter("noise sigma must be finite and >= 0".into()));
        }
        Ok(())
    }
}

/// Builds the phantom volume and its exact ground-truth mask.
pub fn generate(spec: &PhantomSpec) -> Result<(VolumeGrid, BinaryMask)> {
    spec.validate()?;
    let dims = spec.dims;
    let truth = BinaryMask::from_fn(dims, |v| spec.body.contains(v));
    let mut rng = ChaCha8Rng::seed_from_u64(spec.rng_seed);
    let noise = (spec.noise_sigma > 0.0)
        .then(|| Normal::new(0.0, spec.noise_sigma).expect("sigma validated"));
    let data: Vec<f32> = (0..dims.len())
        .map(|i| {
            let v = dims.voxel(i);
            let mean = if truth.bits()[i] {
                spec.fg_intensity
            } else {
                match &spec.distractor {
                    Some(d) if d.shape.contains(v) => d.intensity,
                    _ => spec.bg_intensity,
                }
            };
            let n = noise.as_ref().map_or(0.0, |n| n.sample(&mut rng));
            spec.sample_type.quantize(mean + n)
        })
        .collect();
    Ok((VolumeGrid::new(dims, spec.spacing, data)?, truth))
}

/// Seeds mimicking user strokes: foreground is the ground truth eroded by
/// `inner_margin`, background is the one-voxel shell just outside the ground
/// truth dilated by `outer_margin`. Both use the 26-neighbourhood.
pub fn auto_seeds(ground_truth: &BinaryMask, inner_margin: u32, outer_margin: u32) -> Result<SeedSet> {
    if inner_margin == 0 {
        return Err(Error::InvalidParameter(
            "inner margin must be >= 1 so foreground seeds stay off the object boundary".into(),
        ));
    }
    let conn = Connectivity::TwentySix;
    let inner = erode(ground_truth, StructuringElement::new(conn, inner_margin)?);
    if inner.is_all_background() {
        return Err(Error::InvalidParameter(alloc::format!(
            "eroding the ground truth by {inner_margin} leaves no foreground seeds"
        )));
    }
    let grown = if outer_margin == 0 {
        ground_truth.clone()
    } else {
        dilate(ground_truth, StructuringElement::new(conn, outer_margin)?)
    };
    let shell = dilate(&grown, StructuringElement::unit(conn));

    let mut seeds = SeedSet::new();
    for v in inner.foreground() {
        seeds.insert(v, Label::Foreground);
    }
    for (i, (&s, &g)) in shell.bits().iter().zip(grown.bits()).enumerate() {
        if s && !g {
            seeds.insert(ground_truth.dims().voxel(i), Label::Background);
        }
    }
    if seeds.count(Label::Background) == 0 {
        return Err(Error::MissingLabel(Label::Background));
    }
    Ok(seeds)
}
