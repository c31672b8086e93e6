//! Binary containers: a JSON header file plus a raw little-endian payload.
//!
//! `name.json` holds [`Header`]; `name.bin` holds `prod(shape)` values in
//! row-major order, each `f64` (8 bytes) or `complex128` (16 bytes: real then
//! imaginary part), all little-endian, no padding.

use crate::error::{invalid, Error, Result};
use crate::C64;
use serde::{de::DeserializeOwned, Deserialize, Serialize};
use std::fs;
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Dtype {
    Float64,
    Complex128,
}

impl Dtype {
    pub fn width(self) -> usize {
        match self {
            Dtype::Float64 => 8,
            Dtype::Complex128 => 16,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Header {
    pub kind: String,
    pub shape: Vec<usize>,
    pub dtype: Dtype,
    pub endianness: String,
    /// Grid spacing per axis, when meaningful.
    #[serde(default)]
    pub spacing: Vec<f64>,
    /// Kind-specific metadata (grid, frame, degree...).
    #[serde(default)]
    pub meta: serde_json::Value,
}

pub fn paths(stem: &Path) -> (PathBuf, PathBuf) {
    (stem.with_extension("json"), stem.with_extension("bin"))
}

fn check(header: &Header, count: usize) -> Result<()> {
    if header.shape.iter().product::<usize>() != count {
        return Err(Error::Format(format!(
            "shape {:?} does not hold {count} values",
            header.shape
        )));
    }
    Ok(())
}

pub fn write_real(stem: &Path, header: &Header, data: &[f64]) -> Result<()> {
    if header.dtype != Dtype::Float64 {
        return Err(invalid("header dtype must be float64"));
    }
    check(header, data.len())?;
    let (j, b) = paths(stem);
    fs::write(j, serde_json::to_vec_pretty(header)?)?;
    fs::write(b, data.iter().flat_map(|x| x.to_le_bytes()).collect::<Vec<u8>>())?;
    Ok(())
}

pub fn write_complex(stem: &Path, header: &Header, data: &[C64]) -> Result<()> {
    if header.dtype != Dtype::Complex128 {
        return Err(invalid("header dtype must be complex128"));
    }
    check(header, data.len())?;
    let (j, b) = paths(stem);
    fs::write(j, serde_json::to_vec_pretty(header)?)?;
    let bytes: Vec<u8> = data
        .iter()
        .flat_map(|z| z.re.to_le_bytes().into_iter().chain(z.im.to_le_bytes()))
        .collect();
    fs::write(b, bytes)?;
    Ok(())
}

fn read_payload(stem: &Path, want: Dtype) -> Result<(Header, Vec<u8>)> {
    let (j, b) = paths(stem);
    let header: Header = serde_json::from_slice(&fs::read(j)?)?;
    if header.endianness != "little" {
        return Err(Error::Format(format!("unsupported endianness {}", header.endianness)));
    }
    if header.dtype != want {
        return Err(Error::Format(format!("expected {want:?}, found {:?}", header.dtype)));
    }
    let bytes = fs::read(b)?;
    let count: usize = header.shape.iter().product();
    if bytes.len() != count * want.width() {
        return Err(Error::Format(format!(
            "payload has {} bytes, header implies {}",
            bytes.len(),
            count * want.width()
        )));
    }
    Ok((header, bytes))
}

pub fn read_real(stem: &Path) -> Result<(Header, Vec<f64>)> {
    let (h, bytes) = read_payload(stem, Dtype::Float64)?;
    let data = bytes.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().unwrap())).collect();
    Ok((h, data))
}

pub fn read_complex(stem: &Path) -> Result<(Header, Vec<C64>)> {
    let (h, bytes) = read_payload(stem, Dtype::Complex128)?;
    let data = bytes
        .chunks_exact(16)
        .map(|c| C64::new(f64::from_le_bytes(c[..8].try_into().unwrap()), f64::from_le_bytes(c[8..].try_into().unwrap())))
        .collect();
    Ok((h, data))
}

pub fn header(kind: &str, shape: Vec<usize>, dtype: Dtype, spacing: Vec<f64>, meta: impl Serialize) -> Result<Header> {
    Ok(Header {
        kind: kind.to_string(),
        shape,
        dtype,
        endianness: "little".into(),
        spacing,
        meta: serde_json::to_value(meta)?,
    })
}

pub fn meta<T: DeserializeOwned>(h: &Header) -> Result<T> {
    Ok(serde_json::from_value(h.meta.clone())?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn complex_round_trip_is_bitwise() {
        let dir = tempfile::tempdir().unwrap();
        let stem = dir.path().join("field");
        let data: Vec<C64> = (0..6).map(|i| C64::new(i as f64 * 0.1, -1.0 / (i as f64 + 1.0))).collect();
        let h = header("test", vec![2, 3], Dtype::Complex128, vec![], ()).unwrap();
        write_complex(&stem, &h, &data).unwrap();
        let (h2, back) = read_complex(&stem).unwrap();
        assert_eq!(h, h2);
        assert_eq!(data, back);
        assert_eq!(fs::metadata(stem.with_extension("bin")).unwrap().len(), 96);
    }

    #[test]
    fn shape_mismatch_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let h = header("test", vec![4], Dtype::Float64, vec![], ()).unwrap();
        assert!(write_real(&dir.path().join("x"), &h, &[1.0, 2.0]).is_err());
    }

    #[test]
    fn truncated_payload_detected() {
        let dir = tempfile::tempdir().unwrap();
        let stem = dir.path().join("x");
        let h = header("test", vec![2], Dtype::Float64, vec![0.5], ()).unwrap();
        write_real(&stem, &h, &[1.0, 2.0]).unwrap();
        fs::write(stem.with_extension("bin"), [0u8; 9]).unwrap();
        assert!(matches!(read_real(&stem), Err(Error::Format(_))));
    }
}
