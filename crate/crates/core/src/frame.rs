//! Real-valued image frames: the raw input/output unit of every pipeline.

use crate::error::{Error, Result};

/// Luma weights for RGB -> gray conversion (ITU-R BT.601).
pub const LUMA_WEIGHTS: [f64; 3] = [0.299, 0.587, 0.114];

/// A real-valued 2D intensity grid with 1 (gray) or 3 (RGB) channels.
///
/// Samples are stored as one row-major plane per channel, nominally in \[0,1\].
#[derive(Debug, Clone, PartialEq)]
pub struct Frame {
    width: usize,
    height: usize,
    channels: usize,
    data: Vec<f64>,
}

impl Frame {
    pub fn new(width: usize, height: usize, channels: usize, data: Vec<f64>) -> Result<Self> {
        if channels != 1 && channels != 3 {
            return Err(Error::Format(format!(
                "frame must have 1 or 3 channels, got {channels}"
            )));
        }
        if data.len() != width * height * channels {
            return Err(Error::Structure(format!(
                "frame data length {} does not match {}x{}x{}",
                data.len(),
                width,
                height,
                channels
            )));
        }
        if !data.iter().all(|v| v.is_finite()) {
            return Err(Error::Data("frame contains non-finite samples".into()));
        }
        Ok(Self {
            width,
            height,
            channels,
            data,
        })
    }

    pub fn zeros(width: usize, height: usize, channels: usize) -> Self {
        Self::new(
            width,
            height,
            channels,
            vec![0.0; width * height * channels],
        )
        .expect("zero frame is always valid")
    }

    pub fn constant(width: usize, height: usize, value: f64) -> Self {
        Self::new(width, height, 1, vec![value; width * height]).expect("constant frame")
    }

    /// Build a single-channel frame by evaluating `f(x, y)` at every pixel.
    pub fn from_fn(width: usize, height: usize, f: impl Fn(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                data.push(f(x, y));
            }
        }
        Self::new(width, height, 1, data).expect("generated frame must be finite")
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn plane(&self, c: usize) -> &[f64] {
        let n = self.width * self.height;
        &self.data[c * n..(c + 1) * n]
    }

    pub fn plane_mut(&mut self, c: usize) -> &mut [f64] {
        let n = self.width * self.height;
        &mut self.data[c * n..(c + 1) * n]
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    #[inline]
    pub fn get(&self, c: usize, x: usize, y: usize) -> f64 {
        self.data[c * self.width * self.height + y * self.width + x]
    }

    /// Clamp every sample into \[0,1\] in place.
    pub fn clip_unit(&mut self) {
        for v in self.data.iter_mut() {
            *v = v.clamp(0.0, 1.0);
        }
    }

    /// Per-channel bilinear resize. Edge samples are clamped.
    pub fn resize(&self, new_width: usize, new_height: usize) -> Frame {
        if (new_width, new_height) == (self.width, self.height) {
            return self.clone();
        }
        let sx = self.width as f64 / new_width as f64;
        let sy = self.height as f64 / new_height as f64;
        let mut data = Vec::with_capacity(new_width * new_height * self.channels);
        for c in 0..self.channels {
            let plane = self.plane(c);
            for y in 0..new_height {
                for x in 0..new_width {
                    let src_x = (x as f64 + 0.5) * sx - 0.5;
                    let src_y = (y as f64 + 0.5) * sy - 0.5;
                    data.push(sample_bilinear(
                        plane,
                        self.width,
                        self.height,
                        src_x,
                        src_y,
                    ));
                }
            }
        }
        Frame::new(new_width, new_height, self.channels, data).expect("resized frame")
    }

    /// Warp by an affine map: output pixel p takes the value at A*p + t in the
    /// source, sampled bilinearly with edge clamping. `m` is row-major
    /// [a, b, tx, c, d, ty].
    pub fn warp_affine(&self, m: [f64; 6]) -> Frame {
        let mut data = Vec::with_capacity(self.data.len());
        for c in 0..self.channels {
            let plane = self.plane(c);
            for y in 0..self.height {
                for x in 0..self.width {
                    let xf = x as f64;
                    let yf = y as f64;
                    let src_x = m[0] * xf + m[1] * yf + m[2];
                    let src_y = m[3] * xf + m[4] * yf + m[5];
                    data.push(sample_bilinear(
                        plane,
                        self.width,
                        self.height,
                        src_x,
                        src_y,
                    ));
                }
            }
        }
        Frame::new(self.width, self.height, self.channels, data).expect("warped frame")
    }
}

/// Bilinear sample of a row-major plane with coordinates clamped to the grid.
pub fn sample_bilinear(plane: &[f64], width: usize, height: usize, x: f64, y: f64) -> f64 {
    let x = x.clamp(0.0, (width - 1) as f64);
    let y = y.clamp(0.0, (height - 1) as f64);
    let x0 = x.floor() as usize;
    let y0 = y.floor() as usize;
    let x1 = (x0 + 1).min(width - 1);
    let y1 = (y0 + 1).min(height - 1);
    let fx = x - x0 as f64;
    let fy = y - y0 as f64;
    let v00 = plane[y0 * width + x0];
    let v01 = plane[y0 * width + x1];
    let v10 = plane[y1 * width + x0];
    let v11 = plane[y1 * width + x1];
    v00 * (1.0 - fx) * (1.0 - fy) + v01 * fx * (1.0 - fy) + v10 * (1.0 - fx) * fy + v11 * fx * fy
}

/// Split a frame into its luma plane and the per-channel planes used by the
/// synthesis paths. Single-channel input passes through unchanged.
pub fn split_channels(frame: &Frame) -> Result<(Frame, Vec<Frame>)> {
    match frame.channels() {
        1 => Ok((frame.clone(), vec![frame.clone()])),
        3 => {
            let n = frame.width() * frame.height();
            let mut luma = vec![0.0; n];
            for (c, w) in LUMA_WEIGHTS.iter().enumerate() {
                for (l, &v) in luma.iter_mut().zip(frame.plane(c)) {
                    *l += w * v;
                }
            }
            let luma = Frame::new(frame.width(), frame.height(), 1, luma)?;
            let planes = (0..3)
                .map(|c| {
                    Frame::new(frame.width(), frame.height(), 1, frame.plane(c).to_vec())
                        .expect("plane of valid frame")
                })
                .collect();
            Ok((luma, planes))
        }
        other => Err(Error::Format(format!(
            "split_channels expects 1 or 3 channels, got {other}"
        ))),
    }
}

/// Reassemble single-channel planes into one frame (1 or 3 planes).
pub fn merge_channels(planes: &[Frame]) -> Result<Frame> {
    if planes.is_empty() || (planes.len() != 1 && planes.len() != 3) {
        return Err(Error::Format(format!(
            "merge_channels expects 1 or 3 planes, got {}",
            planes.len()
        )));
    }
    let (w, h) = planes[0].dims();
    let mut data = Vec::with_capacity(w * h * planes.len());
    for p in planes {
        if p.dims() != (w, h) || p.channels() != 1 {
            return Err(Error::Structure(
                "merge_channels: planes must be single-channel with equal dims".into(),
            ));
        }
        data.extend_from_slice(p.plane(0));
    }
    Frame::new(w, h, planes.len(), data)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_channel_counts() {
        assert!(matches!(
            Frame::new(2, 2, 2, vec![0.0; 8]),
            Err(Error::Format(_))
        ));
    }

    #[test]
    fn rejects_non_finite() {
        assert!(matches!(
            Frame::new(2, 2, 1, vec![0.0, f64::NAN, 0.0, 0.0]),
            Err(Error::Data(_))
        ));
    }

    #[test]
    fn luma_of_gray_rgb_is_value() {
        let v = 0.42;
        let mut data = Vec::new();
        for _ in 0..3 {
            data.extend(std::iter::repeat_n(v, 4));
        }
        let f = Frame::new(2, 2, 3, data).unwrap();
        let (luma, planes) = split_channels(&f).unwrap();
        assert_eq!(planes.len(), 3);
        for &s in luma.plane(0) {
            assert!((s - v).abs() < 1e-12);
        }
    }

    #[test]
    fn luma_of_pure_red() {
        let mut data = vec![1.0; 4];
        data.extend(vec![0.0; 8]);
        let f = Frame::new(2, 2, 3, data).unwrap();
        let (luma, _) = split_channels(&f).unwrap();
        for &s in luma.plane(0) {
            assert!((s - 0.299).abs() < 1e-12);
        }
    }

    #[test]
    fn single_channel_passthrough() {
        let f = Frame::from_fn(3, 2, |x, y| (x + y) as f64 * 0.1);
        let (luma, planes) = split_channels(&f).unwrap();
        assert_eq!(luma, f);
        assert_eq!(planes, vec![f]);
    }

    #[test]
    fn merge_inverts_split() {
        let data: Vec<f64> = (0..2 * 2 * 3).map(|i| i as f64 / 12.0).collect();
        let f = Frame::new(2, 2, 3, data).unwrap();
        let (_, planes) = split_channels(&f).unwrap();
        assert_eq!(merge_channels(&planes).unwrap(), f);
    }

    #[test]
    fn identity_warp_is_identity() {
        let f = Frame::from_fn(5, 4, |x, y| ((x * 7 + y * 3) % 10) as f64 / 10.0);
        let w = f.warp_affine([1.0, 0.0, 0.0, 0.0, 1.0, 0.0]);
        assert_eq!(w, f);
    }
}
