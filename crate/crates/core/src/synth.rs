//! Synthetic ground-truth sequences and metrics.
//!
//! Subpixel motion is realized by frequency-domain phase ramps, which are
//! exact circular shifts for integer displacements and exact translations of
//! the band-limited interpolant otherwise, so oracle values carry no
//! interpolation bias.

use crate::error::{Error, Result};
use crate::fft::{bin_frequency, fft2_real, ifft2};
use crate::frame::{sample_bilinear, Frame};
use crate::motion::FlowField;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Base texture of a synthetic sequence.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Texture {
    /// Seeded uniform noise, lowpass-smoothed (Gaussian, sigma 1.5 px) and
    /// normalized into [0.05, 0.95]. Smoothing keeps the energy inside the
    /// oriented passbands rather than the unoriented highpass residual.
    Noise { seed: u64 },
    /// 0.5 + 0.4 cos(wx*x + wy*y), frequencies in radians/pixel.
    Sinusoid { wx: f64, wy: f64 },
    /// Alternating 0.25 / 0.75 blocks of the given side.
    Checker { size: usize },
}

/// Motion law of a synthetic sequence.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Motion {
    Static,
    /// Uniform translation, pixels/frame.
    Translate {
        vx: f64,
        vy: f64,
    },
    /// Sinusoidal displacement of the given amplitude (px) and period
    /// (frames): d(t) = a * sin(2 pi t / period).
    Oscillate {
        ax: f64,
        ay: f64,
        period: f64,
    },
    /// Rotation about the image center, degrees/frame (bilinear resampling;
    /// not exact, intended for qualitative use).
    Rotate {
        deg_per_frame: f64,
    },
}

/// Full description of a synthetic sequence.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SynthSpec {
    pub motion: Motion,
    pub texture: Texture,
    pub width: usize,
    pub height: usize,
    pub frames: usize,
}

impl SynthSpec {
    fn validate(&self) -> Result<()> {
        if self.frames == 0 {
            return Err(Error::Usage("frame count must be at least 1".into()));
        }
        if self.width == 0 || self.height == 0 {
            return Err(Error::Usage("dims must be nonzero".into()));
        }
        let finite = match self.motion {
            Motion::Static => true,
            Motion::Translate { vx, vy } => vx.is_finite() && vy.is_finite(),
            Motion::Oscillate { ax, ay, period } => {
                ax.is_finite() && ay.is_finite() && period.is_finite() && period > 0.0
            }
            Motion::Rotate { deg_per_frame } => deg_per_frame.is_finite(),
        };
        if !finite {
            return Err(Error::Usage("motion parameters must be finite".into()));
        }
        if let Texture::Sinusoid { wx, wy } = self.texture {
            if !wx.is_finite() || !wy.is_finite() {
                return Err(Error::Usage("sinusoid frequencies must be finite".into()));
            }
        }
        if let Texture::Checker { size } = self.texture {
            if size == 0 {
                return Err(Error::Usage("checker size must be nonzero".into()));
            }
        }
        Ok(())
    }
}

/// Circularly shift a frame by (dx, dy) pixels via a frequency-domain phase
/// ramp. Exact for integer shifts; for fractional shifts this translates the
/// band-limited interpolant (the imaginary residue from the ambiguous
/// Nyquist bins is discarded by taking the real part).
pub fn fourier_shift(frame: &Frame, dx: f64, dy: f64) -> Frame {
    let (w, h) = frame.dims();
    let mut planes = Vec::with_capacity(frame.channels());
    for c in 0..frame.channels() {
        let mut spec = fft2_real(w, h, frame.plane(c));
        for y in 0..h {
            let wy = bin_frequency(y, h);
            for x in 0..w {
                let wx = bin_frequency(x, w);
                spec[y * w + x] *= Complex64::from_polar(1.0, -(wx * dx + wy * dy));
            }
        }
        ifft2(w, h, &mut spec);
        planes.push(spec.iter().map(|v| v.re).collect::<Vec<f64>>());
    }
    let data = planes.concat();
    Frame::new(w, h, frame.channels(), data).expect("shifted frame stays finite")
}

fn base_texture(spec: &SynthSpec) -> Frame {
    let (w, h) = (spec.width, spec.height);
    match spec.texture {
        Texture::Noise { seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let raw: Vec<f64> = (0..w * h).map(|_| rng.gen::<f64>()).collect();
            // Gaussian lowpass in the frequency domain, then range-normalize.
            let sigma = 1.5f64;
            let mut spec_buf = fft2_real(w, h, &raw);
            for y in 0..h {
                let wy = bin_frequency(y, h);
                for x in 0..w {
                    let wx = bin_frequency(x, w);
                    let g = (-(wx * wx + wy * wy) * sigma * sigma / 2.0).exp();
                    spec_buf[y * w + x] *= g;
                }
            }
            ifft2(w, h, &mut spec_buf);
            let smooth: Vec<f64> = spec_buf.iter().map(|v| v.re).collect();
            let lo = smooth.iter().cloned().fold(f64::INFINITY, f64::min);
            let hi = smooth.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let span = if hi > lo { hi - lo } else { 1.0 };
            let data = smooth
                .iter()
                .map(|v| 0.05 + 0.9 * (v - lo) / span)
                .collect();
            Frame::new(w, h, 1, data).expect("noise texture")
        }
        Texture::Sinusoid { wx, wy } => Frame::from_fn(w, h, |x, y| {
            0.5 + 0.4 * (wx * x as f64 + wy * y as f64).cos()
        }),
        Texture::Checker { size } => Frame::from_fn(w, h, |x, y| {
            if ((x / size) + (y / size)) % 2 == 0 {
                0.25
            } else {
                0.75
            }
        }),
    }
}

fn displacement(motion: Motion, t: usize) -> (f64, f64) {
    match motion {
        Motion::Static | Motion::Rotate { .. } => (0.0, 0.0),
        Motion::Translate { vx, vy } => (vx * t as f64, vy * t as f64),
        Motion::Oscillate { ax, ay, period } => {
            let s = (2.0 * std::f64::consts::PI * t as f64 / period).sin();
            (ax * s, ay * s)
        }
    }
}

fn rotate_frame(base: &Frame, degrees: f64) -> Frame {
    let (w, h) = base.dims();
    let cx = (w as f64 - 1.0) / 2.0;
    let cy = (h as f64 - 1.0) / 2.0;
    let a = degrees.to_radians();
    let (sin, cos) = a.sin_cos();
    let plane = base.plane(0);
    Frame::from_fn(w, h, |x, y| {
        // Inverse map: sample where this pixel came from.
        let rx = x as f64 - cx;
        let ry = y as f64 - cy;
        let sx = cos * rx + sin * ry + cx;
        let sy = -sin * rx + cos * ry + cy;
        sample_bilinear(plane, w, h, sx, sy)
    })
}

/// Generate a deterministic frame sequence plus per-step ground-truth flow
/// ("pixels move by (u,v) from frame t to t+1").
pub fn generate(spec: &SynthSpec) -> Result<(Vec<Frame>, Vec<FlowField>)> {
    spec.validate()?;
    let base = base_texture(spec);
    let (w, h) = (spec.width, spec.height);

    let mut frames = Vec::with_capacity(spec.frames);
    for t in 0..spec.frames {
        let f = match spec.motion {
            Motion::Static => base.clone(),
            Motion::Translate { .. } | Motion::Oscillate { .. } => {
                let (dx, dy) = displacement(spec.motion, t);
                if dx == 0.0 && dy == 0.0 {
                    base.clone()
                } else {
                    fourier_shift(&base, dx, dy)
                }
            }
            Motion::Rotate { deg_per_frame } => rotate_frame(&base, deg_per_frame * t as f64),
        };
        frames.push(f);
    }

    let steps = spec.frames.saturating_sub(1);
    let mut flows = Vec::with_capacity(steps);
    for t in 0..steps {
        let flow = match spec.motion {
            Motion::Static => {
                let mut f = FlowField::zeros(w, h);
                f.u.fill(0.0);
                f.v.fill(0.0);
                f
            }
            Motion::Translate { .. } | Motion::Oscillate { .. } => {
                let (x0, y0) = displacement(spec.motion, t);
                let (x1, y1) = displacement(spec.motion, t + 1);
                let mut f = FlowField::zeros(w, h);
                f.u.fill(x1 - x0);
                f.v.fill(y1 - y0);
                f
            }
            Motion::Rotate { deg_per_frame } => {
                let cx = (w as f64 - 1.0) / 2.0;
                let cy = (h as f64 - 1.0) / 2.0;
                let a = deg_per_frame.to_radians();
                let (sin, cos) = a.sin_cos();
                let mut f = FlowField::zeros(w, h);
                for y in 0..h {
                    for x in 0..w {
                        let rx = x as f64 - cx;
                        let ry = y as f64 - cy;
                        f.u[y * w + x] = (cos * rx - sin * ry) - rx;
                        f.v[y * w + x] = (sin * rx + cos * ry) - ry;
                    }
                }
                f
            }
        };
        flows.push(flow);
    }
    Ok((frames, flows))
}

/// Peak signal-to-noise ratio in dB over the interior (margin pixels skipped
/// on every side), peak value 1.0. Identical interiors report +infinity.
pub fn psnr(a: &Frame, b: &Frame, interior_margin: usize) -> Result<f64> {
    if a.dims() != b.dims() || a.channels() != b.channels() {
        return Err(Error::Structure(format!(
            "psnr dims mismatch: {}x{}x{} vs {}x{}x{}",
            a.width(),
            a.height(),
            a.channels(),
            b.width(),
            b.height(),
            b.channels()
        )));
    }
    let (w, h) = a.dims();
    if interior_margin * 2 >= w.min(h) {
        return Err(Error::Usage(format!(
            "interior margin {interior_margin} leaves no pixels in a {w}x{h} frame"
        )));
    }
    let mut sum = 0.0;
    let mut count = 0usize;
    for c in 0..a.channels() {
        let pa = a.plane(c);
        let pb = b.plane(c);
        for y in interior_margin..h - interior_margin {
            for x in interior_margin..w - interior_margin {
                let d = pa[y * w + x] - pb[y * w + x];
                sum += d * d;
                count += 1;
            }
        }
    }
    let mse = sum / count as f64;
    if mse == 0.0 {
        Ok(f64::INFINITY)
    } else {
        Ok(10.0 * (1.0 / mse).log10())
    }
}

/// Flow comparison over mutually valid pixels.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlowErrorStats {
    /// Mean endpoint error: mean of sqrt(du^2 + dv^2), px.
    pub epe: f64,
    /// Mean absolute component error: mean of (|du| + |dv|) / 2, px.
    pub mae: f64,
    /// Fraction of compared pixels that were valid in both fields.
    pub valid_fraction: f64,
}

/// Compare an estimated flow field against ground truth.
pub fn flow_error(est: &FlowField, gt: &FlowField) -> Result<FlowErrorStats> {
    flow_error_interior(est, gt, 0)
}

/// As `flow_error`, restricted to the interior (margin pixels skipped on
/// every side).
pub fn flow_error_interior(
    est: &FlowField,
    gt: &FlowField,
    margin: usize,
) -> Result<FlowErrorStats> {
    if (est.width, est.height) != (gt.width, gt.height) {
        return Err(Error::Structure(format!(
            "flow dims mismatch: {}x{} vs {}x{}",
            est.width, est.height, gt.width, gt.height
        )));
    }
    let (w, h) = (est.width, est.height);
    if margin * 2 >= w.min(h) {
        return Err(Error::Usage(format!(
            "interior margin {margin} leaves no pixels in a {w}x{h} field"
        )));
    }
    let mut epe = 0.0;
    let mut mae = 0.0;
    let mut valid = 0usize;
    let mut total = 0usize;
    for y in margin..h - margin {
        for x in margin..w - margin {
            let i = y * w + x;
            total += 1;
            if est.valid[i] && gt.valid[i] {
                valid += 1;
                let du = est.u[i] - gt.u[i];
                let dv = est.v[i] - gt.v[i];
                epe += (du * du + dv * dv).sqrt();
                mae += (du.abs() + dv.abs()) / 2.0;
            }
        }
    }
    if valid > 0 {
        epe /= valid as f64;
        mae /= valid as f64;
    }
    Ok(FlowErrorStats {
        epe,
        mae,
        valid_fraction: valid as f64 / total as f64,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn static_sequence_is_constant_with_zero_flow() {
        let spec = SynthSpec {
            motion: Motion::Static,
            texture: Texture::Noise { seed: 4 },
            width: 48,
            height: 48,
            frames: 3,
        };
        let (frames, flows) = generate(&spec).unwrap();
        assert_eq!(frames.len(), 3);
        assert_eq!(flows.len(), 2);
        assert_eq!(frames[0], frames[1]);
        assert!(flows[0].u.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn integer_translation_is_exact_circular_shift() {
        let spec = SynthSpec {
            motion: Motion::Translate { vx: 1.0, vy: 0.0 },
            texture: Texture::Noise { seed: 9 },
            width: 40,
            height: 32,
            frames: 3,
        };
        let (frames, _) = generate(&spec).unwrap();
        let (w, h) = (40usize, 32usize);
        for t in 0..2 {
            for y in 0..h {
                for x in 0..w {
                    let expect = frames[t].get(0, (x + w - 1) % w, y);
                    let got = frames[t + 1].get(0, x, y);
                    assert!((got - expect).abs() < 1e-10, "t={t} ({x},{y})");
                }
            }
        }
    }

    #[test]
    fn subpixel_shift_of_sinusoid_matches_closed_form() {
        let w0 = 2.0 * std::f64::consts::PI * 4.0 / 32.0;
        let spec = SynthSpec {
            motion: Motion::Translate { vx: 0.25, vy: 0.0 },
            texture: Texture::Sinusoid { wx: w0, wy: 0.0 },
            width: 32,
            height: 32,
            frames: 2,
        };
        let (frames, _) = generate(&spec).unwrap();
        for y in 0..32 {
            for x in 0..32 {
                let expect = 0.5 + 0.4 * (w0 * (x as f64 - 0.25)).cos();
                assert!((frames[1].get(0, x, y) - expect).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn generator_is_deterministic() {
        let spec = SynthSpec {
            motion: Motion::Translate { vx: 0.5, vy: -0.25 },
            texture: Texture::Noise { seed: 1234 },
            width: 32,
            height: 32,
            frames: 4,
        };
        let (a, _) = generate(&spec).unwrap();
        let (b, _) = generate(&spec).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn psnr_identical_is_infinite() {
        let f = Frame::constant(32, 32, 0.5);
        assert_eq!(psnr(&f, &f, 0).unwrap(), f64::INFINITY);
    }

    #[test]
    fn psnr_uniform_tenth_is_twenty_db() {
        let a = Frame::constant(32, 32, 0.5);
        let b = Frame::constant(32, 32, 0.6);
        assert!((psnr(&a, &b, 0).unwrap() - 20.0).abs() < 1e-9);
    }

    #[test]
    fn psnr_matches_brute_force_and_is_symmetric() {
        let a = Frame::from_fn(20, 20, |x, y| ((x * 13 + y * 7) % 29) as f64 / 29.0);
        let b = Frame::from_fn(20, 20, |x, y| ((x * 5 + y * 11) % 31) as f64 / 31.0);
        let margin = 3usize;
        let mut sum = 0.0;
        let mut n = 0;
        for y in margin..20 - margin {
            for x in margin..20 - margin {
                let d = a.get(0, x, y) - b.get(0, x, y);
                sum += d * d;
                n += 1;
            }
        }
        let expect = 10.0 * (n as f64 / sum).log10();
        assert!((psnr(&a, &b, margin).unwrap() - expect).abs() < 1e-9);
        assert_eq!(psnr(&a, &b, margin).unwrap(), psnr(&b, &a, margin).unwrap());
    }

    #[test]
    fn psnr_rejects_dim_mismatch() {
        let a = Frame::constant(32, 32, 0.1);
        let b = Frame::constant(32, 16, 0.1);
        assert!(matches!(psnr(&a, &b, 0), Err(Error::Structure(_))));
    }

    #[test]
    fn flow_error_identity_and_three_four_five() {
        let mut gt = FlowField::zeros(16, 16);
        gt.u.fill(1.0);
        gt.v.fill(-0.5);
        let stats = flow_error(&gt, &gt).unwrap();
        assert_eq!(stats.epe, 0.0);
        assert_eq!(stats.valid_fraction, 1.0);

        let mut est = gt.clone();
        for v in est.u.iter_mut() {
            *v += 0.3;
        }
        for v in est.v.iter_mut() {
            *v += 0.4;
        }
        let stats = flow_error(&est, &gt).unwrap();
        assert!((stats.epe - 0.5).abs() < 1e-12);
        assert!((stats.mae - 0.35).abs() < 1e-12);
    }

    #[test]
    fn flow_error_matches_brute_force() {
        let (w, h) = (9usize, 7usize);
        let mut est = FlowField::zeros(w, h);
        let mut gt = FlowField::zeros(w, h);
        for i in 0..w * h {
            est.u[i] = ((i * 7) % 13) as f64 / 13.0 - 0.5;
            est.v[i] = ((i * 5) % 11) as f64 / 11.0 - 0.5;
            gt.u[i] = ((i * 3) % 17) as f64 / 17.0 - 0.5;
            gt.v[i] = ((i * 2) % 19) as f64 / 19.0 - 0.5;
            est.valid[i] = i % 4 != 0;
            gt.valid[i] = i % 3 != 0;
        }
        let stats = flow_error(&est, &gt).unwrap();
        let mut epe = 0.0;
        let mut n = 0;
        for i in 0..w * h {
            if est.valid[i] && gt.valid[i] {
                let du = est.u[i] - gt.u[i];
                let dv = est.v[i] - gt.v[i];
                epe += (du * du + dv * dv).sqrt();
                n += 1;
            }
        }
        epe /= n as f64;
        assert!((stats.epe - epe).abs() < 1e-12);
        assert!((stats.valid_fraction - n as f64 / (w * h) as f64).abs() < 1e-12);
        // Symmetry.
        let rev = flow_error(&gt, &est).unwrap();
        assert!((rev.epe - stats.epe).abs() < 1e-12);
    }

    #[test]
    fn invalid_specs_are_usage_errors() {
        let bad = SynthSpec {
            motion: Motion::Translate {
                vx: f64::NAN,
                vy: 0.0,
            },
            texture: Texture::Noise { seed: 0 },
            width: 32,
            height: 32,
            frames: 2,
        };
        assert!(matches!(generate(&bad), Err(Error::Usage(_))));
        let empty = SynthSpec {
            motion: Motion::Static,
            texture: Texture::Noise { seed: 0 },
            width: 32,
            height: 32,
            frames: 0,
        };
        assert!(matches!(generate(&empty), Err(Error::Usage(_))));
    }
}
