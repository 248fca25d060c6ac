//! Frame-sequence directories: zero-padded numbered PNGs plus an optional
//! `manifest.txt` naming the files in order, one per line.

use crate::error::{Error, Result};
use crate::frame::Frame;
use image::DynamicImage;
use std::fs;
use std::path::{Path, PathBuf};

/// Output sample depth for written PNGs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BitDepth {
    #[default]
    Eight,
    Sixteen,
}

/// Load one image file (8/16-bit PNG or PGM/PPM), normalized to \[0,1\].
pub fn read_frame(path: &Path) -> Result<Frame> {
    let img = image::open(path)
        .map_err(|e| Error::Format(format!("cannot read image {}: {e}", path.display())))?;
    let (w, h) = (img.width() as usize, img.height() as usize);
    let frame = match img {
        DynamicImage::ImageLuma8(buf) => {
            let data = buf.into_raw().iter().map(|&v| v as f64 / 255.0).collect();
            Frame::new(w, h, 1, data)?
        }
        DynamicImage::ImageLuma16(buf) => {
            let data = buf.into_raw().iter().map(|&v| v as f64 / 65535.0).collect();
            Frame::new(w, h, 1, data)?
        }
        DynamicImage::ImageRgb8(buf) => {
            let raw = buf.into_raw();
            let mut data = vec![0.0; w * h * 3];
            for (i, px) in raw.chunks_exact(3).enumerate() {
                for c in 0..3 {
                    data[c * w * h + i] = px[c] as f64 / 255.0;
                }
            }
            Frame::new(w, h, 3, data)?
        }
        DynamicImage::ImageRgb16(buf) => {
            let raw = buf.into_raw();
            let mut data = vec![0.0; w * h * 3];
            for (i, px) in raw.chunks_exact(3).enumerate() {
                for c in 0..3 {
                    data[c * w * h + i] = px[c] as f64 / 65535.0;
                }
            }
            Frame::new(w, h, 3, data)?
        }
        other => {
            return Err(Error::Format(format!(
                "{}: unsupported pixel layout {:?}; expected 8/16-bit gray or RGB",
                path.display(),
                other.color()
            )))
        }
    };
    Ok(frame)
}

/// Write one frame as PNG at the requested depth, clamping to \[0,1\].
pub fn write_frame(path: &Path, frame: &Frame, depth: BitDepth) -> Result<()> {
    let (w, h) = frame.dims();
    let img: DynamicImage = match (frame.channels(), depth) {
        (1, BitDepth::Eight) => {
            let data = frame
                .plane(0)
                .iter()
                .map(|v| (v.clamp(0.0, 1.0) * 255.0).round() as u8)
                .collect();
            DynamicImage::ImageLuma8(
                image::GrayImage::from_raw(w as u32, h as u32, data).expect("sized buffer"),
            )
        }
        (1, BitDepth::Sixteen) => {
            let data = frame
                .plane(0)
                .iter()
                .map(|v| (v.clamp(0.0, 1.0) * 65535.0).round() as u16)
                .collect();
            DynamicImage::ImageLuma16(
                image::ImageBuffer::from_raw(w as u32, h as u32, data).expect("sized buffer"),
            )
        }
        (3, BitDepth::Eight) => {
            let mut data = Vec::with_capacity(w * h * 3);
            for i in 0..w * h {
                for c in 0..3 {
                    data.push((frame.plane(c)[i].clamp(0.0, 1.0) * 255.0).round() as u8);
                }
            }
            DynamicImage::ImageRgb8(
                image::RgbImage::from_raw(w as u32, h as u32, data).expect("sized buffer"),
            )
        }
        (3, BitDepth::Sixteen) => {
            let mut data = Vec::with_capacity(w * h * 3);
            for i in 0..w * h {
                for c in 0..3 {
                    data.push((frame.plane(c)[i].clamp(0.0, 1.0) * 65535.0).round() as u16);
                }
            }
            DynamicImage::ImageRgb16(
                image::ImageBuffer::from_raw(w as u32, h as u32, data).expect("sized buffer"),
            )
        }
        (other, _) => return Err(Error::Format(format!("cannot write {other}-channel frame"))),
    };
    img.save_with_format(path, image::ImageFormat::Png)
        .map_err(|e| Error::Io(std::io::Error::other(e)))?;
    Ok(())
}

fn is_frame_file(path: &Path) -> bool {
    matches!(
        path.extension().and_then(|e| e.to_str()).map(|e| e.to_ascii_lowercase()),
        Some(ref e) if ["png", "pgm", "ppm", "pnm"].contains(&e.as_str())
    )
}

/// Read an ordered frame sequence from a directory. Ordering comes from
/// `manifest.txt` when present, else lexicographic file names. Every frame
/// must share dims and channel count.
pub fn read_frames(dir: &Path) -> Result<Vec<Frame>> {
    if !dir.is_dir() {
        return Err(Error::Usage(format!(
            "{} is not a readable directory",
            dir.display()
        )));
    }
    let manifest = dir.join("manifest.txt");
    let files: Vec<PathBuf> = if manifest.is_file() {
        fs::read_to_string(&manifest)?
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty())
            .map(|name| dir.join(name))
            .collect()
    } else {
        let mut files: Vec<PathBuf> = fs::read_dir(dir)?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.is_file() && is_frame_file(p))
            .collect();
        files.sort();
        files
    };
    if files.is_empty() {
        return Err(Error::Usage(format!(
            "no frames found in {}",
            dir.display()
        )));
    }
    let mut frames = Vec::with_capacity(files.len());
    for path in &files {
        let f = read_frame(path)?;
        if let Some(first) = frames.first() {
            let first: &Frame = first;
            if f.dims() != first.dims() || f.channels() != first.channels() {
                return Err(Error::Structure(format!(
                    "{}: {}x{}x{} does not match the sequence's {}x{}x{}",
                    path.display(),
                    f.width(),
                    f.height(),
                    f.channels(),
                    first.width(),
                    first.height(),
                    first.channels()
                )));
            }
        }
        frames.push(f);
    }
    Ok(frames)
}

/// Write a frame sequence as zero-padded PNGs plus a manifest.
pub fn write_frames(dir: &Path, frames: &[Frame], depth: BitDepth) -> Result<()> {
    if frames.is_empty() {
        return Err(Error::Usage("refusing to write an empty sequence".into()));
    }
    fs::create_dir_all(dir)?;
    let mut manifest = String::new();
    for (i, f) in frames.iter().enumerate() {
        let name = format!("{i:06}.png");
        write_frame(&dir.join(&name), f, depth)?;
        manifest.push_str(&name);
        manifest.push('\n');
    }
    fs::write(dir.join("manifest.txt"), manifest)?;
    Ok(())
}
