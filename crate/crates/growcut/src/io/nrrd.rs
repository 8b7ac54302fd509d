//! NRRD with raw encoding, attached or detached.
//!
//! Reading accepts `uint8`, `uint16` and `float` samples in either byte
//! order, `spacings` or `space directions`, and the `data file`, `byte skip`
//! and `line skip` fields. Writing always produces little-endian raw data.

use std::path::Path;

use growcut_core::volume::SampleType;
use growcut_core::{Dims, Spacing};

use super::{companion_raw, decode_samples, encode_samples, format_err, read_file, sample_width, write_file};
use super::{RawVolume, Result};

#[derive(Debug, Default)]
struct Header {
    sample_type: Option<SampleType>,
    dimension: Option<usize>,
    sizes: Option<[usize; 3]>,
    spacing: Option<[f64; 3]>,
    raw_encoding: Option<bool>,
    big_endian: bool,
    data_file: Option<String>,
    byte_skip: i64,
    line_skip: usize,
}

fn parse_type(s: &str) -> Result<SampleType> {
    match s {
        "uchar" | "unsigned char" | "uint8" | "uint8_t" => Ok(SampleType::U8),
        "ushort" | "unsigned short" | "unsigned short int" | "uint16" | "uint16_t" => Ok(SampleType::U16),
        "float" => Ok(SampleType::F32),
        other => Err(format_err(format!(
            "unsupported NRRD type '{other}'; expected uint8, uint16 or float"
        ))),
    }
}

fn type_name(t: SampleType) -> &'static str {
    match t {
        SampleType::U8 => "uint8",
        SampleType::U16 => "uint16",
        SampleType::F32 => "float",
    }
}

fn three<T: std::str::FromStr>(field: &str, value: &str) -> Result<[T; 3]> {
    let parts: Vec<&str> = value.split_whitespace().collect();
    let bad = || format_err(format!("NRRD field '{field}' needs three numbers, got '{value}'"));
    if parts.len() != 3 {
        return Err(bad());
    }
    let mut out = Vec::with_capacity(3);
    for p in parts {
        out.push(p.parse::<T>().map_err(|_| bad())?);
    }
    out.try_into().map_err(|_| bad())
}

/// Spacing is the length of each axis direction vector.
fn parse_space_directions(value: &str) -> Result<[f64; 3]> {
    let bad = || format_err(format!("cannot parse space directions '{value}'"));
    let vectors: Vec<&str> = value.split_whitespace().collect();
    if vectors.len() != 3 {
        return Err(bad());
    }
    let mut out = [0.0; 3];
    for (slot, vec) in out.iter_mut().zip(vectors) {
        let inner = vec.strip_prefix('(').and_then(|v| v.strip_suffix(')')).ok_or_else(bad)?;
        let mut sq = 0.0;
        for c in inner.split(',') {
            let x: f64 = c.trim().parse().map_err(|_| bad())?;
            sq += x * x;
        }
        *slot = sq.sqrt();
    }
    Ok(out)
}

/// Header lines and the offset just past the blank separator line, if any.
fn split_header(bytes: &[u8]) -> Result<(Vec<String>, Option<usize>)> {
    let mut lines = Vec::new();
    let mut pos = 0;
    while pos < bytes.len() {
        let end = bytes[pos..].iter().position(|&b| b == b'\n').map(|i| pos + i);
        let stop = end.unwrap_or(bytes.len());
        let mut line = &bytes[pos..stop];
        if line.last() == Some(&b'\r') {
            line = &line[..line.len() - 1];
        }
        pos = end.map_or(bytes.len(), |e| e + 1);
        if line.is_empty() {
            return Ok((lines, Some(pos)));
        }
        let text = std::str::from_utf8(line).map_err(|_| format_err("NRRD header is not valid text"))?;
        lines.push(text.to_string());
    }
    Ok((lines, None))
}

fn parse_header(lines: &[String]) -> Result<Header> {
    let magic = lines.first().map(String::as_str).unwrap_or("");
    let version_ok = magic
        .strip_prefix("NRRD000")
        .is_some_and(|v| matches!(v, "1" | "2" | "3" | "4" | "5"));
    if !version_ok {
        return Err(format_err("missing NRRD magic line"));
    }
    let mut h = Header::default();
    for line in &lines[1..] {
        if line.starts_with('#') {
            continue;
        }
        let field = line.find(": ");
        let key_value = line.find(":=");
        let idx = match (field, key_value) {
            (_, Some(kv)) if field.is_none_or(|f| kv < f) => continue,
            (Some(f), _) => f,
            _ => return Err(format_err(format!("malformed NRRD header line '{line}'"))),
        };
        let (key, value) = (&line[..idx], line[idx + 2..].trim());
        match key {
            "type" => h.sample_type = Some(parse_type(value)?),
            "dimension" => {
                h.dimension = Some(value.parse().map_err(|_| format_err(format!("bad dimension '{value}'")))?)
            }
            "sizes" => h.sizes = Some(three("sizes", value)?),
            "spacings" => h.spacing = Some(three("spacings", value)?),
            "space directions" => h.spacing = Some(parse_space_directions(value)?),
            "encoding" => h.raw_encoding = Some(value == "raw"),
            "endian" => {
                h.big_endian = match value {
                    "little" => false,
                    "big" => true,
                    _ => return Err(format_err(format!("bad endian '{value}'"))),
                }
            }
            "data file" | "datafile" => h.data_file = Some(value.to_string()),
            "byte skip" | "byteskip" => {
                h.byte_skip = value.parse().map_err(|_| format_err(format!("bad byte skip '{value}'")))?;
                if h.byte_skip < -1 {
                    return Err(format_err("byte skip must be -1 or non-negative"));
                }
            }
            "line skip" | "lineskip" => {
                h.line_skip = value.parse().map_err(|_| format_err(format!("bad line skip '{value}'")))?
            }
            _ => {}
        }
    }
    if h.dimension != Some(3) {
        return Err(format_err("only 3-dimensional NRRD volumes are supported"));
    }
    match h.raw_encoding {
        None => return Err(format_err("NRRD header has no encoding field")),
        Some(false) => return Err(format_err("only raw NRRD encoding is supported")),
        Some(true) => {}
    }
    if h.sample_type.is_none() {
        return Err(format_err("NRRD header has no type field"));
    }
    if h.sizes.is_none() {
        return Err(format_err("NRRD header has no sizes field"));
    }
    Ok(h)
}

fn skip_lines(data: &[u8], n: usize) -> Result<&[u8]> {
    let mut rest = data;
    for _ in 0..n {
        let i = rest
            .iter()
            .position(|&b| b == b'\n')
            .ok_or_else(|| format_err("line skip runs past the end of the data"))?;
        rest = &rest[i + 1..];
    }
    Ok(rest)
}

/// Decodes an NRRD byte stream. Detached data files are resolved against
/// `base_dir`; without one only attached data is accepted.
pub fn parse(bytes: &[u8], base_dir: Option<&Path>) -> Result<RawVolume> {
    let (lines, data_start) = split_header(bytes)?;
    let h = parse_header(&lines)?;
    let sample_type = h.sample_type.expect("checked");
    let [nx, ny, nz] = h.sizes.expect("checked");
    let dims = Dims::new(nx, ny, nz);
    dims.validate()?;
    let spacing = Spacing::new(h.spacing.unwrap_or([1.0; 3]))?;

    let detached;
    let stream: &[u8] = match &h.data_file {
        Some(name) => {
            let dir = base_dir.ok_or_else(|| format_err("detached NRRD data is not accepted here"))?;
            detached = read_file(&dir.join(name))?;
            skip_lines(&detached, h.line_skip)?
        }
        None => {
            let start = data_start.ok_or_else(|| format_err("NRRD stream has no attached data"))?;
            skip_lines(&bytes[start..], h.line_skip)?
        }
    };

    let need = dims.len() * sample_width(sample_type);
    let payload = if h.byte_skip == -1 {
        if stream.len() < need {
            return Err(truncated(need, stream.len()));
        }
        &stream[stream.len() - need..]
    } else {
        let skip = h.byte_skip as usize;
        let rest = stream.get(skip..).unwrap_or(&[]);
        if rest.len() < need {
            return Err(truncated(need, rest.len()));
        }
        if rest.len() > need {
            return Err(format_err(format!(
                "NRRD data has {} bytes but {dims} {} samples need {need}",
                rest.len(),
                type_name(sample_type)
            )));
        }
        rest
    };
    Ok(RawVolume {
        dims,
        spacing,
        sample_type,
        data: decode_samples(payload, sample_type, h.big_endian),
    })
}

fn truncated(need: usize, got: usize) -> super::IoError {
    format_err(format!("truncated NRRD data: expected {need} bytes, found {got}"))
}

pub fn read(path: &Path) -> Result<RawVolume> {
    let bytes = read_file(path)?;
    parse(&bytes, Some(path.parent().unwrap_or(Path::new("."))))
        .map_err(|e| format_err(format!("{}: {e}", path.display())))
}

fn header_text(raw: &RawVolume, data_file: Option<&str>) -> String {
    let d = raw.dims;
    let s = raw.spacing.0;
    let mut h = format!(
        "NRRD0004\ntype: {}\ndimension: 3\nsizes: {} {} {}\nspacings: {} {} {}\nkinds: domain domain domain\nendian: little\nencoding: raw\n",
        type_name(raw.sample_type),
        d.nx,
        d.ny,
        d.nz,
        s[0],
        s[1],
        s[2]
    );
    if let Some(f) = data_file {
        h.push_str(&format!("data file: {f}\n"));
    }
    h
}

/// Header, blank line, then the samples.
pub fn encode_attached(raw: &RawVolume) -> Vec<u8> {
    let mut out = header_text(raw, None).into_bytes();
    out.push(b'\n');
    out.extend_from_slice(&encode_samples(&raw.data, raw.sample_type));
    out
}

pub fn write_detached(path: &Path, raw: &RawVolume) -> Result<()> {
    let data_path = companion_raw(path);
    let name = data_path
        .file_name()
        .and_then(|n| n.to_str())
        .ok_or_else(|| format_err("data file name is not valid text"))?;
    write_file(&data_path, &encode_samples(&raw.data, raw.sample_type))?;
    write_file(path, header_text(raw, Some(name)).as_bytes())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> RawVolume {
        RawVolume {
            dims: Dims::new(3, 2, 2),
            spacing: Spacing([0.5, 0.75, 2.0]),
            sample_type: SampleType::U16,
            data: (0..12).map(|i| (i * 300) as f32).collect(),
        }
    }

    #[test]
    fn attached_round_trip() {
        let raw = sample();
        assert_eq!(parse(&encode_attached(&raw), None).unwrap(), raw);
    }

    #[test]
    fn big_endian_and_space_directions() {
        let mut bytes = b"NRRD0005\n# c\ntype: unsigned short\ndimension: 3\nsizes: 2 1 1\nspace: left-posterior-superior\nspace directions: (0,0.5,0) (2,0,0) (0,0,3)\nendian: big\nencoding: raw\nfoo:=bar: baz\n\n".to_vec();
        bytes.extend_from_slice(&[1, 2, 0, 7]);
        let raw = parse(&bytes, None).unwrap();
        assert_eq!(raw.data, vec![258.0, 7.0]);
        assert_eq!(raw.spacing, Spacing([0.5, 2.0, 3.0]));
    }

    #[test]
    fn rejects_bad_streams() {
        let good = encode_attached(&sample());
        assert!(parse(&good[..good.len() - 1], None).is_err());
        let mut long = good.clone();
        long.push(0);
        assert!(parse(&long, None).is_err());
        assert!(parse(b"P6\n", None).is_err());
        let gz = String::from_utf8_lossy(&good).replace("encoding: raw", "encoding: gzip");
        assert!(parse(gz.as_bytes(), None).is_err());
        let two_d = b"NRRD0004\ntype: uint8\ndimension: 2\nsizes: 1 1\nencoding: raw\n\n\x00";
        assert!(parse(two_d, None).is_err());
        let detached = b"NRRD0004\ntype: uint8\ndimension: 3\nsizes: 1 1 1\nencoding: raw\ndata file: x.raw\n";
        assert!(parse(detached, None).is_err());
    }

    #[test]
    fn trailing_skip() {
        let mut bytes = b"NRRD0004\ntype: uint8\ndimension: 3\nsizes: 2 1 1\nencoding: raw\nbyte skip: -1\n\n".to_vec();
        bytes.extend_from_slice(&[9, 9, 4, 5]);
        assert_eq!(parse(&bytes, None).unwrap().data, vec![4.0, 5.0]);
    }
}
