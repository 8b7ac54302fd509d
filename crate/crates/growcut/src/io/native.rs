//! Minimal native format: a text header of `key=value` lines and a raw
//! little-endian sample file.
//!
//! ```text
//! dims=64 64 64
//! spacing=0.63 0.63 0.63
//! dtype=uint8
//! data=phantom.raw
//! ```
//!
//! `data` is optional and defaults to the header name with a `.raw`
//! extension, resolved relative to the header. Lines starting with `#` are
//! comments.

use std::path::Path;

use growcut_core::{Dims, Spacing};

use super::{
    companion_raw, decode_samples, encode_samples, format_err, parse_sample_type, read_file, sample_type_name,
    sample_width, write_file, RawVolume, Result,
};

fn numbers<T: std::str::FromStr>(key: &str, value: &str) -> Result<[T; 3]> {
    let bad = || format_err(format!("header key '{key}' needs three numbers, got '{value}'"));
    let parsed: Vec<T> = value
        .split_whitespace()
        .map(|p| p.parse().map_err(|_| bad()))
        .collect::<Result<_>>()?;
    parsed.try_into().map_err(|_| bad())
}

pub fn read(path: &Path) -> Result<RawVolume> {
    let text = String::from_utf8(read_file(path)?)
        .map_err(|_| format_err(format!("{}: header is not valid text", path.display())))?;
    let (mut dims, mut spacing, mut dtype, mut data) = (None, None, None, None);
    for line in text.lines().map(str::trim) {
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| format_err(format!("{}: malformed header line '{line}'", path.display())))?;
        let (key, value) = (key.trim(), value.trim());
        match key {
            "dims" => dims = Some(numbers::<usize>(key, value)?),
            "spacing" => spacing = Some(numbers::<f64>(key, value)?),
            "dtype" => {
                dtype = Some(
                    parse_sample_type(value)
                        .ok_or_else(|| format_err(format!("unsupported dtype '{value}'")))?,
                )
            }
            "data" => data = Some(value.to_string()),
            other => return Err(format_err(format!("{}: unknown header key '{other}'", path.display()))),
        }
    }
    let missing = |k: &str| format_err(format!("{}: header has no '{k}' line", path.display()));
    let [nx, ny, nz] = dims.ok_or_else(|| missing("dims"))?;
    let dims = Dims::new(nx, ny, nz);
    dims.validate()?;
    let spacing = Spacing::new(spacing.ok_or_else(|| missing("spacing"))?)?;
    let sample_type = dtype.ok_or_else(|| missing("dtype"))?;
    let data_path = match data {
        Some(name) => path.parent().unwrap_or(Path::new(".")).join(name),
        None => companion_raw(path),
    };
    let bytes = read_file(&data_path)?;
    let need = dims.len() * sample_width(sample_type);
    if bytes.len() != need {
        return Err(format_err(format!(
            "{}: expected {need} bytes for {dims} {} samples, found {}",
            data_path.display(),
            sample_type_name(sample_type),
            bytes.len()
        )));
    }
    Ok(RawVolume {
        dims,
        spacing,
        sample_type,
        data: decode_samples(&bytes, sample_type, false),
    })
}

pub fn write(path: &Path, raw: &RawVolume) -> Result<()> {
    let data_path = companion_raw(path);
    let name = data_path
        .file_name()
        .and_then(|n| n.to_str())
        .ok_or_else(|| format_err("data file name is not valid text"))?;
    let d = raw.dims;
    let s = raw.spacing.0;
    let header = format!(
        "dims={} {} {}\nspacing={} {} {}\ndtype={}\ndata={name}\n",
        d.nx,
        d.ny,
        d.nz,
        s[0],
        s[1],
        s[2],
        sample_type_name(raw.sample_type)
    );
    write_file(&data_path, &encode_samples(&raw.data, raw.sample_type))?;
    write_file(path, header.as_bytes())
}
