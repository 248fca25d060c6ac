//! PHFLO1: binary flow fields, plus the conventional color-wheel rendering.
//!
//! Layout (little-endian): magic `PHFLO1\0`, u32 width, u32 height, then per
//! pixel f32 u, f32 v, u8 valid, row-major.

use crate::error::{Error, Result};
use crate::motion::FlowField;
use std::fs;
use std::path::Path;

const MAGIC: &[u8; 7] = b"PHFLO1\0";

pub fn write_flow(path: &Path, flow: &FlowField) -> Result<()> {
    fs::write(path, encode_flow(flow))?;
    Ok(())
}

pub(crate) fn encode_flow(flow: &FlowField) -> Vec<u8> {
    let mut buf = Vec::with_capacity(MAGIC.len() + 8 + flow.u.len() * 9);
    buf.extend_from_slice(MAGIC);
    buf.extend_from_slice(&(flow.width as u32).to_le_bytes());
    buf.extend_from_slice(&(flow.height as u32).to_le_bytes());
    for i in 0..flow.u.len() {
        buf.extend_from_slice(&(flow.u[i] as f32).to_le_bytes());
        buf.extend_from_slice(&(flow.v[i] as f32).to_le_bytes());
        buf.push(flow.valid[i] as u8);
    }
    buf
}

pub fn read_flow(path: &Path) -> Result<FlowField> {
    decode_flow(&fs::read(path)?)
}

pub(crate) fn decode_flow(bytes: &[u8]) -> Result<FlowField> {
    if bytes.len() < MAGIC.len() + 8 || &bytes[..MAGIC.len()] != MAGIC {
        return Err(Error::Format("not a PHFLO1 file (bad magic)".into()));
    }
    let w = u32::from_le_bytes(bytes[7..11].try_into().unwrap()) as usize;
    let h = u32::from_le_bytes(bytes[11..15].try_into().unwrap()) as usize;
    let expected = MAGIC.len() + 8 + w.saturating_mul(h).saturating_mul(9);
    if w == 0 || h == 0 || bytes.len() != expected {
        return Err(Error::Format(format!(
            "flow payload does not match {w}x{h} header"
        )));
    }
    let mut flow = FlowField::zeros(w, h);
    let mut pos = MAGIC.len() + 8;
    for i in 0..w * h {
        flow.u[i] = f32::from_le_bytes(bytes[pos..pos + 4].try_into().unwrap()) as f64;
        flow.v[i] = f32::from_le_bytes(bytes[pos + 4..pos + 8].try_into().unwrap()) as f64;
        flow.valid[i] = bytes[pos + 8] != 0;
        pos += 9;
    }
    Ok(flow)
}

/// The standard optical-flow color wheel (six hue transitions). Angle picks
/// the hue, magnitude (relative to the valid maximum) the saturation;
/// invalid pixels render black.
pub fn flow_to_rgb(flow: &FlowField) -> Vec<u8> {
    let wheel = color_wheel();
    let ncols = wheel.len() as f64;
    let max_mag = flow
        .u
        .iter()
        .zip(&flow.v)
        .zip(&flow.valid)
        .filter(|&(_, &valid)| valid)
        .map(|((u, v), _)| (u * u + v * v).sqrt())
        .fold(0.0, f64::max)
        .max(1e-12);

    let mut rgb = Vec::with_capacity(flow.u.len() * 3);
    for i in 0..flow.u.len() {
        if !flow.valid[i] {
            rgb.extend_from_slice(&[0, 0, 0]);
            continue;
        }
        let (u, v) = (flow.u[i], flow.v[i]);
        let mag = (u * u + v * v).sqrt() / max_mag;
        let angle = (-v).atan2(-u) / std::f64::consts::PI;
        let fk = (angle + 1.0) / 2.0 * (ncols - 1.0);
        let k0 = fk.floor() as usize % wheel.len();
        let k1 = (k0 + 1) % wheel.len();
        let f = fk - fk.floor();
        for (&c0, &c1) in wheel[k0].iter().zip(&wheel[k1]) {
            let col0 = c0 as f64 / 255.0;
            let col1 = c1 as f64 / 255.0;
            let mut col = (1.0 - f) * col0 + f * col1;
            // Saturate toward white at low magnitude.
            col = 1.0 - mag * (1.0 - col);
            rgb.push((col * 255.0).round() as u8);
        }
    }
    rgb
}

/// Write the color rendering as an 8-bit RGB PNG.
pub fn write_flow_png(path: &Path, flow: &FlowField) -> Result<()> {
    let rgb = flow_to_rgb(flow);
    let img = image::RgbImage::from_raw(flow.width as u32, flow.height as u32, rgb)
        .expect("buffer sized to dims");
    img.save_with_format(path, image::ImageFormat::Png)
        .map_err(|e| Error::Io(std::io::Error::other(e)))?;
    Ok(())
}

/// Baker et al. flow wheel: RY 15, YG 6, GC 4, CB 11, BM 13, MR 6 segments.
fn color_wheel() -> Vec<[u8; 3]> {
    const SEGMENTS: [(usize, [f64; 3], [f64; 3]); 6] = [
        (15, [255.0, 0.0, 0.0], [255.0, 255.0, 0.0]),
        (6, [255.0, 255.0, 0.0], [0.0, 255.0, 0.0]),
        (4, [0.0, 255.0, 0.0], [0.0, 255.0, 255.0]),
        (11, [0.0, 255.0, 255.0], [0.0, 0.0, 255.0]),
        (13, [0.0, 0.0, 255.0], [255.0, 0.0, 255.0]),
        (6, [255.0, 0.0, 255.0], [255.0, 0.0, 0.0]),
    ];
    let mut wheel = Vec::with_capacity(55);
    for (count, from, to) in SEGMENTS {
        for i in 0..count {
            let t = i as f64 / count as f64;
            wheel.push([
                (from[0] + t * (to[0] - from[0])).round() as u8,
                (from[1] + t * (to[1] - from[1])).round() as u8,
                (from[2] + t * (to[2] - from[2])).round() as u8,
            ]);
        }
    }
    wheel
}
