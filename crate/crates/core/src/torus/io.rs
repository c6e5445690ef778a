//! The `TORUS v1` grid file format.
//!
//! A single ASCII header line `TORUS v1 <dims> <n1> [<n2>]` followed by the samples
//! in row-major order as little-endian `f64` pairs `(re, im)`.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use num_complex::Complex64;

use super::{Grid1D, Sampled, Shape, TorusFn1D, TorusFn2D};
use crate::error::{Error, Result};

/// Contents of a torus file.
#[derive(Debug, Clone, PartialEq)]
pub enum TorusData {
    One(TorusFn1D),
    Two(TorusFn2D),
}

impl TorusData {
    pub fn shape(&self) -> Shape {
        match self {
            TorusData::One(f) => f.sample_shape(),
            TorusData::Two(f) => f.sample_shape(),
        }
    }

    pub fn values(&self) -> &[Complex64] {
        match self {
            TorusData::One(f) => f.values(),
            TorusData::Two(f) => f.values(),
        }
    }
}

pub fn write_samples<W: Write>(mut out: W, shape: Shape, values: &[Complex64]) -> Result<()> {
    match shape {
        Shape::One(n) => writeln!(out, "TORUS v1 1 {n}")?,
        Shape::Two(a, b) => writeln!(out, "TORUS v1 2 {a} {b}")?,
    }
    let mut buf = Vec::with_capacity(values.len() * 16);
    for v in values {
        buf.extend_from_slice(&v.re.to_le_bytes());
        buf.extend_from_slice(&v.im.to_le_bytes());
    }
    out.write_all(&buf)?;
    out.flush()?;
    Ok(())
}

pub fn write_torus<W: Write, F: Sampled + ?Sized>(out: W, f: &F) -> Result<()> {
    write_samples(out, f.sample_shape(), f.samples())
}

/// Real samples (weights) written with zero imaginary parts.
pub fn write_real<W: Write>(out: W, shape: Shape, values: &[f64]) -> Result<()> {
    let complex: Vec<Complex64> = values.iter().map(|&x| Complex64::new(x, 0.0)).collect();
    write_samples(out, shape, &complex)
}

pub fn read_torus<R: Read>(input: R) -> Result<TorusData> {
    let mut reader = BufReader::new(input);
    let mut header = String::new();
    reader.read_line(&mut header)?;
    let fields: Vec<&str> = header.split_whitespace().collect();
    if fields.len() < 4 || fields[0] != "TORUS" || fields[1] != "v1" {
        return Err(Error::Format(format!("bad header {:?}", header.trim_end())));
    }
    let parse = |s: &str| {
        s.parse::<usize>()
            .map_err(|_| Error::Format(format!("bad size field {s:?}")))
    };
    let shape = match (fields[2], fields.len()) {
        ("1", 4) => Shape::One(parse(fields[3])?),
        ("2", 5) => Shape::Two(parse(fields[3])?, parse(fields[4])?),
        _ => return Err(Error::Format(format!("bad header {:?}", header.trim_end()))),
    };
    let mut bytes = Vec::new();
    reader.read_to_end(&mut bytes)?;
    if bytes.len() != shape.len() * 16 {
        return Err(Error::Format(format!(
            "payload holds {} bytes, expected {}",
            bytes.len(),
            shape.len() * 16
        )));
    }
    let values: Vec<Complex64> = bytes
        .chunks_exact(16)
        .map(|c| {
            let re = f64::from_le_bytes(c[..8].try_into().expect("chunk of 16"));
            let im = f64::from_le_bytes(c[8..].try_into().expect("chunk of 16"));
            Complex64::new(re, im)
        })
        .collect();
    match shape {
        Shape::One(n) => Ok(TorusData::One(TorusFn1D::new(Grid1D::new(n)?, values)?)),
        Shape::Two(a, b) => Ok(TorusData::Two(TorusFn2D::new(
            Grid1D::new(a)?,
            Grid1D::new(b)?,
            values,
        )?)),
    }
}

pub fn save<F: Sampled + ?Sized>(path: &Path, f: &F) -> Result<()> {
    let file = File::create(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    write_torus(BufWriter::new(file), f)
}

pub fn load(path: &Path) -> Result<TorusData> {
    let file = File::open(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    read_torus(file)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_2d() {
        let g1 = Grid1D::new(8).unwrap();
        let g2 = Grid1D::new(16).unwrap();
        let f = TorusFn2D::from_fn(g1, g2, |a, b| Complex64::new(a.sin(), b * 0.5)).unwrap();
        let mut buf = Vec::new();
        write_torus(&mut buf, &f).unwrap();
        assert!(buf.starts_with(b"TORUS v1 2 8 16\n"));
        assert_eq!(read_torus(&buf[..]).unwrap(), TorusData::Two(f));
    }

    #[test]
    fn rejects_truncated_payload() {
        let f = TorusFn1D::monomial(Grid1D::new(8).unwrap(), 2);
        let mut buf = Vec::new();
        write_torus(&mut buf, &f).unwrap();
        buf.pop();
        assert!(read_torus(&buf[..]).is_err());
        assert!(read_torus(&b"TORUS v2 1 8\n"[..]).is_err());
    }
}
