//! JSON documents.
//!
//! Seeds:
//!
//! ```json
//! {"seeds": [{"voxel": [x, y, z], "label": "foreground"}]}
//! ```
//!
//! Contours:
//!
//! ```json
//! {"slices": [{"axis": "axial", "index": 3, "polygons": [[[u, v], [u, v], [u, v]]]}]}
//! ```
//!
//! Phantom specification: see [`PhantomDoc`].

use std::path::Path;

use serde::{Deserialize, Serialize};

use growcut_core::phantom::{Distractor, PhantomSpec, Shape};
use growcut_core::volume::SampleType;
use growcut_core::{Axis, ContourSet, ContourSlice, Dims, Label, SeedSet, Spacing, Voxel};

use super::{format_err, parse_sample_type, read_file, sample_type_name, write_file, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LabelName {
    #[serde(alias = "fg")]
    Foreground,
    #[serde(alias = "bg")]
    Background,
}

impl From<LabelName> for Label {
    fn from(l: LabelName) -> Self {
        match l {
            LabelName::Foreground => Label::Foreground,
            LabelName::Background => Label::Background,
        }
    }
}

impl From<Label> for LabelName {
    fn from(l: Label) -> Self {
        match l {
            Label::Foreground => LabelName::Foreground,
            Label::Background => LabelName::Background,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AxisName {
    Axial,
    Sagittal,
    Coronal,
}

impl From<AxisName> for Axis {
    fn from(a: AxisName) -> Self {
        match a {
            AxisName::Axial => Axis::Axial,
            AxisName::Sagittal => Axis::Sagittal,
            AxisName::Coronal => Axis::Coronal,
        }
    }
}

impl From<Axis> for AxisName {
    fn from(a: Axis) -> Self {
        match a {
            Axis::Axial => AxisName::Axial,
            Axis::Sagittal => AxisName::Sagittal,
            Axis::Coronal => AxisName::Coronal,
        }
    }
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SeedEntry {
    voxel: [usize; 3],
    label: LabelName,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SeedsDoc {
    seeds: Vec<SeedEntry>,
}

fn json_err(what: &str, e: serde_json::Error) -> super::IoError {
    format_err(format!("invalid {what} document: {e}"))
}

/// A voxel listed twice is rejected; bounds are checked by the consumer.
pub fn seeds_from_json(text: &str) -> Result<SeedSet> {
    let doc: SeedsDoc = serde_json::from_str(text).map_err(|e| json_err("seeds", e))?;
    let mut seeds = SeedSet::new();
    for e in doc.seeds {
        let v = Voxel::from_array(e.voxel);
        if seeds.insert(v, e.label.into()).is_some() {
            return Err(format_err(format!("seed voxel {v} is listed more than once")));
        }
    }
    Ok(seeds)
}

/// Entries are written in linear voxel order.
pub fn seeds_to_json(seeds: &SeedSet) -> String {
    let doc = SeedsDoc {
        seeds: seeds
            .iter()
            .map(|(v, l)| SeedEntry {
                voxel: v.as_array(),
                label: l.into(),
            })
            .collect(),
    };
    serde_json::to_string_pretty(&doc).expect("seed document serializes")
}

pub fn read_seeds(path: &Path) -> Result<SeedSet> {
    seeds_from_json(&read_text(path)?).map_err(|e| format_err(format!("{}: {e}", path.display())))
}

pub fn write_seeds(path: &Path, seeds: &SeedSet) -> Result<()> {
    write_file(path, seeds_to_json(seeds).as_bytes())
}

fn read_text(path: &Path) -> Result<String> {
    String::from_utf8(read_file(path)?).map_err(|_| format_err(format!("{}: not valid UTF-8", path.display())))
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SliceDoc {
    axis: AxisName,
    index: usize,
    polygons: Vec<Vec<[f64; 2]>>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ContoursDoc {
    slices: Vec<SliceDoc>,
}

pub fn contours_from_json(text: &str) -> Result<ContourSet> {
    let doc: ContoursDoc = serde_json::from_str(text).map_err(|e| json_err("contours", e))?;
    Ok(ContourSet {
        slices: doc
            .slices
            .into_iter()
            .map(|s| ContourSlice {
                axis: s.axis.into(),
                index: s.index,
                polygons: s.polygons,
            })
            .collect(),
    })
}

pub fn contours_to_json(contours: &ContourSet) -> String {
    let doc = ContoursDoc {
        slices: contours
            .slices
            .iter()
            .map(|s| SliceDoc {
                axis: s.axis.into(),
                index: s.index,
                polygons: s.polygons.clone(),
            })
            .collect(),
    };
    serde_json::to_string_pretty(&doc).expect("contour document serializes")
}

pub fn read_contours(path: &Path) -> Result<ContourSet> {
    contours_from_json(&read_text(path)?).map_err(|e| format_err(format!("{}: {e}", path.display())))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "lowercase", deny_unknown_fields)]
pub enum ShapeDoc {
    Box { center: [f64; 3], semi_extents: [f64; 3] },
    Ellipsoid { center: [f64; 3], semi_extents: [f64; 3] },
}

impl From<ShapeDoc> for Shape {
    fn from(s: ShapeDoc) -> Self {
        match s {
            ShapeDoc::Box { center, semi_extents } => Shape::Box {
                center,
                semi: semi_extents,
            },
            ShapeDoc::Ellipsoid { center, semi_extents } => Shape::Ellipsoid {
                center,
                semi: semi_extents,
            },
        }
    }
}

impl From<Shape> for ShapeDoc {
    fn from(s: Shape) -> Self {
        match s {
            Shape::Box { center, semi } => ShapeDoc::Box {
                center,
                semi_extents: semi,
            },
            Shape::Ellipsoid { center, semi } => ShapeDoc::Ellipsoid {
                center,
                semi_extents: semi,
            },
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DistractorDoc {
    #[serde(flatten)]
    pub shape: ShapeDoc,
    pub intensity: f64,
}

/// Phantom specification document.
///
/// ```json
/// {
///   "dims": [64, 64, 64],
///   "spacing": [0.63, 0.63, 0.63],
///   "body": {"shape": "box", "center": [32, 32, 32], "semi_extents": [12, 10, 8]},
///   "fg_intensity": 150,
///   "bg_intensity": 50,
///   "noise_sigma": 5,
///   "distractor": {"shape": "ellipsoid", "center": [32, 32, 52], "semi_extents": [8, 8, 4], "intensity": 140},
///   "rng_seed": 1,
///   "dtype": "uint8"
/// }
/// ```
///
/// `spacing` defaults to 1 mm, `noise_sigma` and `rng_seed` to 0, `dtype`
/// to `uint8`, and `distractor` may be omitted.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhantomDoc {
    pub dims: [usize; 3],
    #[serde(default = "unit_spacing")]
    pub spacing: [f64; 3],
    pub body: ShapeDoc,
    pub fg_intensity: f64,
    pub bg_intensity: f64,
    #[serde(default)]
    pub noise_sigma: f64,
    #[serde(default)]
    pub distractor: Option<DistractorDoc>,
    #[serde(default)]
    pub rng_seed: u64,
    #[serde(default = "default_dtype")]
    pub dtype: String,
}

fn unit_spacing() -> [f64; 3] {
    [1.0; 3]
}

fn default_dtype() -> String {
    "uint8".into()
}

impl PhantomDoc {
    pub fn to_spec(&self) -> Result<PhantomSpec> {
        let sample_type: SampleType = parse_sample_type(&self.dtype)
            .ok_or_else(|| format_err(format!("unsupported dtype '{}'", self.dtype)))?;
        let [nx, ny, nz] = self.dims;
        let spec = PhantomSpec {
            dims: Dims::new(nx, ny, nz),
            spacing: Spacing(self.spacing),
            body: self.body.clone().into(),
            fg_intensity: self.fg_intensity,
            bg_intensity: self.bg_intensity,
            noise_sigma: self.noise_sigma,
            distractor: self.distractor.clone().map(|d| Distractor {
                shape: d.shape.into(),
                intensity: d.intensity,
            }),
            rng_seed: self.rng_seed,
            sample_type,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn from_spec(spec: &PhantomSpec) -> Self {
        Self {
            dims: spec.dims.as_array(),
            spacing: spec.spacing.0,
            body: spec.body.into(),
            fg_intensity: spec.fg_intensity,
            bg_intensity: spec.bg_intensity,
            noise_sigma: spec.noise_sigma,
            distractor: spec.distractor.map(|d| DistractorDoc {
                shape: d.shape.into(),
                intensity: d.intensity,
            }),
            rng_seed: spec.rng_seed,
            dtype: sample_type_name(spec.sample_type).into(),
        }
    }
}

pub fn phantom_spec_from_json(text: &str) -> Result<PhantomSpec> {
    let doc: PhantomDoc = serde_json::from_str(text).map_err(|e| json_err("phantom", e))?;
    doc.to_spec()
}

pub fn phantom_spec_to_json(spec: &PhantomSpec) -> String {
    serde_json::to_string_pretty(&PhantomDoc::from_spec(spec)).expect("phantom document serializes")
}

pub fn read_phantom_spec(path: &Path) -> Result<PhantomSpec> {
    phantom_spec_from_json(&read_text(path)?).map_err(|e| format_err(format!("{}: {e}", path.display())))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seeds_round_trip_and_duplicates() {
        let text = r#"{"seeds": [{"voxel": [1, 2, 3], "label": "fg"}, {"voxel": [0, 0, 0], "label": "background"}]}"#;
        let seeds = seeds_from_json(text).unwrap();
        assert_eq!(seeds.get(Voxel::new(1, 2, 3)), Some(Label::Foreground));
        assert_eq!(seeds_from_json(&seeds_to_json(&seeds)).unwrap(), seeds);
        let dup = r#"{"seeds": [{"voxel": [1, 2, 3], "label": "fg"}, {"voxel": [1, 2, 3], "label": "bg"}]}"#;
        assert!(seeds_from_json(dup).is_err());
        assert!(seeds_from_json(r#"{"seeds": [{"voxel": [1, 2], "label": "fg"}]}"#).is_err());
    }

    #[test]
    fn phantom_round_trip() {
        let mut spec = PhantomSpec::desk_box(5.0, 9);
        spec.distractor = Some(Distractor {
            shape: Shape::Ellipsoid {
                center: [32.0, 32.0, 52.0],
                semi: [8.0, 8.0, 4.0],
            },
            intensity: 140.0,
        });
        assert_eq!(phantom_spec_from_json(&phantom_spec_to_json(&spec)).unwrap(), spec);
        let minimal = r#"{"dims": [8, 8, 8], "body": {"shape": "box", "center": [4, 4, 4], "semi_extents": [1, 1, 1]}, "fg_intensity": 10, "bg_intensity": 0}"#;
        let spec = phantom_spec_from_json(minimal).unwrap();
        assert_eq!(spec.spacing, Spacing::UNIT);
        assert_eq!(spec.noise_sigma, 0.0);
    }

    #[test]
    fn contours_round_trip() {
        let text = r#"{"slices": [{"axis": "coronal", "index": 2, "polygons": [[[0, 0], [4, 0], [4, 4]]]}]}"#;
        let c = contours_from_json(text).unwrap();
        assert_eq!(c.slices[0].axis, Axis::Coronal);
        assert_eq!(contours_from_json(&contours_to_json(&c)).unwrap(), c);
    }
}
