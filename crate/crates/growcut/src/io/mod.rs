//! Volume and mask files, plus the JSON documents for seeds, contours and
//! phantom specifications.
//!
//! The on-disk format is chosen by extension:
//!
//! * `.nrrd` is NRRD with the header and raw data in one file,
//! * `.nhdr` is a detached NRRD header next to a `.raw` data file,
//! * `.vhdr` is the native `key=value` header next to a `.raw` data file.
//!
//! All writers emit little-endian raw samples. Masks are stored as `uint8`
//! with values 0 and 1.

pub mod json;
mod native;
pub mod nrrd;

use std::path::{Path, PathBuf};

use growcut_core::volume::SampleType;
use growcut_core::{BinaryMask, Dims, Spacing, VolumeGrid};

pub use json::{
    contours_from_json, contours_to_json, phantom_spec_from_json, phantom_spec_to_json, read_contours,
    read_phantom_spec, read_seeds, seeds_from_json, seeds_to_json, write_seeds,
};

#[derive(Debug, thiserror::Error)]
pub enum IoError {
    #[error("{}: {source}", path.display())]
    File { path: PathBuf, source: std::io::Error },
    #[error("{0}")]
    Format(String),
    #[error("unrecognised volume extension for {}; expected .nrrd, .nhdr or .vhdr", .0.display())]
    Extension(PathBuf),
    #[error(transparent)]
    Core(#[from] growcut_core::Error),
}

pub type Result<T> = std::result::Result<T, IoError>;

pub(crate) fn format_err(msg: impl Into<String>) -> IoError {
    IoError::Format(msg.into())
}

pub(crate) fn read_file(path: &Path) -> Result<Vec<u8>> {
    std::fs::read(path).map_err(|source| IoError::File {
        path: path.to_path_buf(),
        source,
    })
}

pub(crate) fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    std::fs::write(path, bytes).map_err(|source| IoError::File {
        path: path.to_path_buf(),
        source,
    })
}

/// Decoded samples before they are interpreted as intensities or labels.
#[derive(Debug, Clone, PartialEq)]
pub struct RawVolume {
    pub dims: Dims,
    pub spacing: Spacing,
    pub sample_type: SampleType,
    pub data: Vec<f32>,
}

impl RawVolume {
    pub fn into_volume(self) -> Result<VolumeGrid> {
        Ok(VolumeGrid::new(self.dims, self.spacing, self.data)?)
    }

    /// Every sample must be 0 or 1.
    pub fn into_mask(self) -> Result<BinaryMask> {
        if let Some((i, v)) = self.data.iter().enumerate().find(|(_, &v)| v != 0.0 && v != 1.0) {
            return Err(format_err(format!(
                "mask sample {i} is {v}; mask values must be 0 or 1"
            )));
        }
        let bits = self.data.iter().map(|&v| v == 1.0).collect();
        Ok(BinaryMask::from_bits(self.dims, bits)?)
    }
}

pub fn sample_type_name(t: SampleType) -> &'static str {
    match t {
        SampleType::U8 => "uint8",
        SampleType::U16 => "uint16",
        SampleType::F32 => "float32",
    }
}

pub fn parse_sample_type(name: &str) -> Option<SampleType> {
    match name {
        "uint8" | "u8" => Some(SampleType::U8),
        "uint16" | "u16" => Some(SampleType::U16),
        "float32" | "float" | "f32" => Some(SampleType::F32),
        _ => None,
    }
}

pub(crate) fn sample_width(t: SampleType) -> usize {
    match t {
        SampleType::U8 => 1,
        SampleType::U16 => 2,
        SampleType::F32 => 4,
    }
}

/// Little-endian encoding; integer types are rounded and saturated.
pub(crate) fn encode_samples(data: &[f32], t: SampleType) -> Vec<u8> {
    let mut out = Vec::with_capacity(data.len() * sample_width(t));
    for &v in data {
        match t {
            SampleType::U8 => out.push(v.round() as u8),
            SampleType::U16 => out.extend_from_slice(&(v.round() as u16).to_le_bytes()),
            SampleType::F32 => out.extend_from_slice(&v.to_le_bytes()),
        }
    }
    out
}

pub(crate) fn decode_samples(bytes: &[u8], t: SampleType, big_endian: bool) -> Vec<f32> {
    match t {
        SampleType::U8 => bytes.iter().map(|&b| b as f32).collect(),
        SampleType::U16 => bytes
            .chunks_exact(2)
            .map(|c| {
                let a = [c[0], c[1]];
                (if big_endian { u16::from_be_bytes(a) } else { u16::from_le_bytes(a) }) as f32
            })
            .collect(),
        SampleType::F32 => bytes
            .chunks_exact(4)
            .map(|c| {
                let a = [c[0], c[1], c[2], c[3]];
                if big_endian {
                    f32::from_be_bytes(a)
                } else {
                    f32::from_le_bytes(a)
                }
            })
            .collect(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VolumeFormat {
    NrrdAttached,
    NrrdDetached,
    Native,
}

impl VolumeFormat {
    pub fn from_path(path: &Path) -> Result<Self> {
        let ext = path.extension().and_then(|e| e.to_str()).map(str::to_ascii_lowercase);
        match ext.as_deref() {
            Some("nrrd") => Ok(Self::NrrdAttached),
            Some("nhdr") => Ok(Self::NrrdDetached),
            Some("vhdr") => Ok(Self::Native),
            _ => Err(IoError::Extension(path.to_path_buf())),
        }
    }
}

/// Path of the `.raw` file paired with a detached header.
pub(crate) fn companion_raw(header: &Path) -> PathBuf {
    header.with_extension("raw")
}

pub fn read_raw(path: &Path) -> Result<RawVolume> {
    match VolumeFormat::from_path(path)? {
        VolumeFormat::NrrdAttached | VolumeFormat::NrrdDetached => nrrd::read(path),
        VolumeFormat::Native => native::read(path),
    }
}

pub fn write_raw(path: &Path, raw: &RawVolume) -> Result<()> {
    match VolumeFormat::from_path(path)? {
        VolumeFormat::NrrdAttached => write_file(path, &nrrd::encode_attached(raw)),
        VolumeFormat::NrrdDetached => nrrd::write_detached(path, raw),
        VolumeFormat::Native => native::write(path, raw),
    }
}

/// Reads an intensity volume along with its stored sample type.
pub fn read_volume(path: &Path) -> Result<(VolumeGrid, SampleType)> {
    let raw = read_raw(path)?;
    let t = raw.sample_type;
    Ok((raw.into_volume()?, t))
}

pub fn write_volume(path: &Path, volume: &VolumeGrid, sample_type: SampleType) -> Result<()> {
    write_raw(path, &volume_to_raw(volume, sample_type))
}

/// Reads a mask and the voxel spacing recorded with it.
pub fn read_mask(path: &Path) -> Result<(BinaryMask, Spacing)> {
    let raw = read_raw(path)?;
    let spacing = raw.spacing;
    Ok((raw.into_mask()?, spacing))
}

pub fn write_mask(path: &Path, mask: &BinaryMask, spacing: Spacing) -> Result<()> {
    write_raw(path, &mask_to_raw(mask, spacing))
}

pub fn volume_to_raw(volume: &VolumeGrid, sample_type: SampleType) -> RawVolume {
    RawVolume {
        dims: volume.dims(),
        spacing: volume.spacing(),
        sample_type,
        data: volume.data().to_vec(),
    }
}

pub fn mask_to_raw(mask: &BinaryMask, spacing: Spacing) -> RawVolume {
    RawVolume {
        dims: mask.dims(),
        spacing,
        sample_type: SampleType::U8,
        data: mask.bits().iter().map(|&b| if b { 1.0 } else { 0.0 }).collect(),
    }
}
