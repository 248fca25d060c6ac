//! PHPYR1: binary pyramid dumps.
//!
//! Layout (all little-endian): magic `PHPYR1\0`, then u32 width, u32 height,
//! u8 channels, u8 scales, u8 orientations, u8 precision (0 = f64, 1 = f32).
//! Per channel: scale-major/orientation-minor bands, each {u32 w, u32 h,
//! interleaved re/im samples}, then the highpass residual {u32 w, u32 h,
//! real samples}, then the lowpass residual likewise.

use crate::error::{Error, Result};
use crate::pyramid::{ComplexSubband, Pyramid, PyramidSpec, RealGrid};
use num_complex::Complex64;
use std::fs;
use std::path::Path;

const MAGIC: &[u8; 7] = b"PHPYR1\0";

/// Sample storage width in the dump. Analysis always runs in f64.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Precision {
    #[default]
    F64,
    F32,
}

impl Precision {
    fn tag(self) -> u8 {
        match self {
            Precision::F64 => 0,
            Precision::F32 => 1,
        }
    }

    fn from_tag(tag: u8) -> Result<Self> {
        match tag {
            0 => Ok(Precision::F64),
            1 => Ok(Precision::F32),
            other => Err(Error::Format(format!("unknown precision tag {other}"))),
        }
    }

    fn sample_bytes(self) -> usize {
        match self {
            Precision::F64 => 8,
            Precision::F32 => 4,
        }
    }
}

struct Writer {
    buf: Vec<u8>,
    precision: Precision,
}

impl Writer {
    fn put_u32(&mut self, v: u32) {
        self.buf.extend_from_slice(&v.to_le_bytes());
    }

    fn put_sample(&mut self, v: f64) {
        match self.precision {
            Precision::F64 => self.buf.extend_from_slice(&v.to_le_bytes()),
            Precision::F32 => self.buf.extend_from_slice(&(v as f32).to_le_bytes()),
        }
    }

    fn put_grid(&mut self, w: usize, h: usize, data: impl Iterator<Item = f64>) {
        self.put_u32(w as u32);
        self.put_u32(h as u32);
        for v in data {
            self.put_sample(v);
        }
    }
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
    precision: Precision,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        if self.pos + n > self.buf.len() {
            return Err(Error::Format("truncated pyramid dump".into()));
        }
        let s = &self.buf[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    fn u32(&mut self) -> Result<u32> {
        let b = self.take(4)?;
        Ok(u32::from_le_bytes(b.try_into().unwrap()))
    }

    fn samples(&mut self, count: usize) -> Result<Vec<f64>> {
        let bytes = self.take(count * self.precision.sample_bytes())?;
        let out = match self.precision {
            Precision::F64 => bytes
                .chunks_exact(8)
                .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
                .collect(),
            Precision::F32 => bytes
                .chunks_exact(4)
                .map(|c| f32::from_le_bytes(c.try_into().unwrap()) as f64)
                .collect(),
        };
        Ok(out)
    }

    fn grid_header(&mut self, label: &str) -> Result<(usize, usize)> {
        let w = self.u32()? as usize;
        let h = self.u32()? as usize;
        // Guard against absurd headers before allocating.
        let remaining = self.buf.len() - self.pos;
        if w == 0 || h == 0 || w.saturating_mul(h) > remaining {
            return Err(Error::Format(format!(
                "implausible {label} dims {w}x{h} in pyramid dump"
            )));
        }
        Ok((w, h))
    }
}

/// Serialize per-channel pyramids of one frame to a PHPYR1 file.
pub fn write_pyramids(path: &Path, channels: &[Pyramid], precision: Precision) -> Result<()> {
    fs::write(path, encode_pyramids(channels, precision)?)?;
    Ok(())
}

pub(crate) fn encode_pyramids(channels: &[Pyramid], precision: Precision) -> Result<Vec<u8>> {
    if channels.is_empty() || (channels.len() != 1 && channels.len() != 3) {
        return Err(Error::Usage(format!(
            "PHPYR1 holds 1 or 3 channels, got {}",
            channels.len()
        )));
    }
    let first = &channels[0];
    let spec = first.spec;
    if spec.scales > u8::MAX as usize || spec.orientations > u8::MAX as usize {
        return Err(Error::Usage(
            "scale/orientation counts exceed format range".into(),
        ));
    }
    for p in channels {
        if p.spec.scales != spec.scales
            || p.spec.orientations != spec.orientations
            || (p.width, p.height) != (first.width, first.height)
        {
            return Err(Error::Structure(
                "all channel pyramids must share spec and dims".into(),
            ));
        }
    }

    let mut w = Writer {
        buf: Vec::new(),
        precision,
    };
    w.buf.extend_from_slice(MAGIC);
    w.put_u32(first.width as u32);
    w.put_u32(first.height as u32);
    w.buf.push(channels.len() as u8);
    w.buf.push(spec.scales as u8);
    w.buf.push(spec.orientations as u8);
    w.buf.push(precision.tag());

    for p in channels {
        for band in &p.bands {
            w.put_u32(band.width as u32);
            w.put_u32(band.height as u32);
            for c in &band.coefficients {
                w.put_sample(c.re);
                w.put_sample(c.im);
            }
        }
        w.put_grid(
            p.highpass.width,
            p.highpass.height,
            p.highpass.data.iter().copied(),
        );
        w.put_grid(
            p.lowpass.width,
            p.lowpass.height,
            p.lowpass.data.iter().copied(),
        );
    }
    Ok(w.buf)
}

/// Read a PHPYR1 file back into per-channel pyramids.
pub fn read_pyramids(path: &Path) -> Result<(Vec<Pyramid>, Precision)> {
    let bytes = fs::read(path)?;
    decode_pyramids(&bytes)
}

pub(crate) fn decode_pyramids(bytes: &[u8]) -> Result<(Vec<Pyramid>, Precision)> {
    if bytes.len() < MAGIC.len() + 12 || &bytes[..MAGIC.len()] != MAGIC {
        return Err(Error::Format("not a PHPYR1 file (bad magic)".into()));
    }
    let mut r = Reader {
        buf: bytes,
        pos: MAGIC.len(),
        precision: Precision::F64,
    };
    let width = r.u32()? as usize;
    let height = r.u32()? as usize;
    let header = r.take(4)?;
    let (channels, scales, orientations) =
        (header[0] as usize, header[1] as usize, header[2] as usize);
    r.precision = Precision::from_tag(header[3])?;
    let precision = r.precision;
    if channels != 1 && channels != 3 {
        return Err(Error::Format(format!(
            "PHPYR1 channel count must be 1 or 3, got {channels}"
        )));
    }
    if scales < 1 || orientations < 2 {
        return Err(Error::Format(format!(
            "implausible pyramid shape: {scales} scales, {orientations} orientations"
        )));
    }
    // min_band is a construction-time constraint, not stored in the dump.
    let spec = PyramidSpec {
        scales,
        orientations,
        min_band: 1,
    };

    let mut out = Vec::with_capacity(channels);
    for _ in 0..channels {
        let mut bands = Vec::with_capacity(scales * orientations);
        for s in 0..scales {
            for k in 0..orientations {
                let (w, h) = r.grid_header("band")?;
                let raw = r.samples(w * h * 2)?;
                let coefficients = raw
                    .chunks_exact(2)
                    .map(|c| Complex64::new(c[0], c[1]))
                    .collect();
                bands.push(ComplexSubband {
                    scale: s,
                    orientation: k,
                    width: w,
                    height: h,
                    coefficients,
                });
            }
        }
        let (hw, hh) = r.grid_header("highpass")?;
        let highpass = RealGrid {
            width: hw,
            height: hh,
            data: r.samples(hw * hh)?,
        };
        let (lw, lh) = r.grid_header("lowpass")?;
        let lowpass = RealGrid {
            width: lw,
            height: lh,
            data: r.samples(lw * lh)?,
        };
        out.push(Pyramid {
            spec,
            width,
            height,
            bands,
            highpass,
            lowpass,
        });
    }
    if r.pos != bytes.len() {
        return Err(Error::Format("trailing bytes after pyramid dump".into()));
    }
    Ok((out, precision))
}
