//! Complex steerable pyramid: frequency-domain analysis and synthesis.
//!
//! A frame is decomposed into S x K oriented complex subbands plus real
//! highpass and lowpass residuals. Oriented bands live on the positive
//! frequency half-plane only, so their coefficients are analytic signals
//! whose argument is the local phase and whose magnitude is the local
//! amplitude. Bands at scale s are stored downsampled by 2^s via exact
//! frequency-domain cropping; the raised-cosine masks vanish outside the
//! cropped box, so no aliasing is introduced and synthesis reproduces the
//! input to floating-point accuracy.

mod bank;

pub use bank::FilterBank;

use crate::error::{Error, Result};
use crate::fft::{fft2, fft2_real, ifft2, signed_index};
use crate::frame::Frame;
use num_complex::Complex64;
use rayon::prelude::*;

/// Shape of a pyramid: scale count, orientation count, and the smallest
/// oriented-subband side the decomposition may produce.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PyramidSpec {
    pub scales: usize,
    pub orientations: usize,
    pub min_band: usize,
}

impl Default for PyramidSpec {
    fn default() -> Self {
        Self {
            scales: 4,
            orientations: 4,
            min_band: 16,
        }
    }
}

impl PyramidSpec {
    pub fn new(scales: usize, orientations: usize, min_band: usize) -> Result<Self> {
        if scales < 1 {
            return Err(Error::Usage("pyramid needs at least 1 scale".into()));
        }
        if orientations < 2 {
            return Err(Error::Usage(
                "orientation steering requires at least 2 bands".into(),
            ));
        }
        if min_band < 1 {
            return Err(Error::Usage("min_band must be at least 1 pixel".into()));
        }
        Ok(Self {
            scales,
            orientations,
            min_band,
        })
    }

    /// Check that a `width` x `height` frame supports this many scales: the
    /// frame must be at least 32 px on a side and the coarsest oriented
    /// subband (scale S-1) must be at least `min_band` px on a side.
    /// The spec itself is re-checked since the fields are public.
    pub fn validate_dims(&self, width: usize, height: usize) -> Result<()> {
        if self.scales < 1 || self.orientations < 2 {
            return Err(Error::Usage(format!(
                "invalid pyramid shape: {} scales, {} orientations",
                self.scales, self.orientations
            )));
        }
        if width < 32 || height < 32 {
            return Err(Error::Size(format!(
                "frame {width}x{height} below the 32x32 decomposition minimum"
            )));
        }
        let coarsest = width.min(height) >> (self.scales - 1);
        if coarsest < self.min_band {
            return Err(Error::Size(format!(
                "{width}x{height} frame cannot hold {} scales: coarsest band side {} < min_band {}",
                self.scales, coarsest, self.min_band
            )));
        }
        Ok(())
    }
}

/// One complex coefficient grid at a (scale, orientation) pair.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexSubband {
    pub scale: usize,
    pub orientation: usize,
    pub width: usize,
    pub height: usize,
    pub coefficients: Vec<Complex64>,
}

impl ComplexSubband {
    pub fn amplitude(&self, x: usize, y: usize) -> f64 {
        self.coefficients[y * self.width + x].norm()
    }

    pub fn phase(&self, x: usize, y: usize) -> f64 {
        self.coefficients[y * self.width + x].arg()
    }
}

/// A real residual grid (highpass or lowpass).
#[derive(Debug, Clone, PartialEq)]
pub struct RealGrid {
    pub width: usize,
    pub height: usize,
    pub data: Vec<f64>,
}

/// Full single-channel decomposition.
#[derive(Debug, Clone, PartialEq)]
pub struct Pyramid {
    pub spec: PyramidSpec,
    pub width: usize,
    pub height: usize,
    /// S*K bands, scale-major then orientation.
    pub bands: Vec<ComplexSubband>,
    pub highpass: RealGrid,
    pub lowpass: RealGrid,
}

impl Pyramid {
    pub fn band(&self, scale: usize, orientation: usize) -> &ComplexSubband {
        &self.bands[scale * self.spec.orientations + orientation]
    }

    pub fn band_mut(&mut self, scale: usize, orientation: usize) -> &mut ComplexSubband {
        &mut self.bands[scale * self.spec.orientations + orientation]
    }

    fn check_well_formed(&self) -> Result<()> {
        let expected = self.spec.scales * self.spec.orientations;
        if self.bands.len() != expected {
            return Err(Error::Structure(format!(
                "pyramid has {} bands, spec requires {}",
                self.bands.len(),
                expected
            )));
        }
        for s in 0..self.spec.scales {
            let d = 1usize << s;
            let (w, h) = (self.width.div_ceil(d), self.height.div_ceil(d));
            for k in 0..self.spec.orientations {
                let b = self.band(s, k);
                if (b.width, b.height) != (w, h) || b.coefficients.len() != w * h {
                    return Err(Error::Structure(format!(
                        "band ({s},{k}) is {}x{}, expected {w}x{h}",
                        b.width, b.height
                    )));
                }
            }
        }
        if (self.highpass.width, self.highpass.height) != (self.width, self.height) {
            return Err(Error::Structure("highpass residual dims mismatch".into()));
        }
        let d = 1usize << self.spec.scales;
        if (self.lowpass.width, self.lowpass.height)
            != (self.width.div_ceil(d), self.height.div_ceil(d))
        {
            return Err(Error::Structure("lowpass residual dims mismatch".into()));
        }
        Ok(())
    }
}

/// Copy the central (in signed-frequency terms) `sw` x `sh` block of a
/// `bw` x `bh` spectrum. Inverse of `paste_spectrum`.
fn crop_spectrum(big: &[Complex64], bw: usize, bh: usize, sw: usize, sh: usize) -> Vec<Complex64> {
    let mut out = vec![Complex64::default(); sw * sh];
    for y in 0..sh {
        let by = signed_index(y, sh).rem_euclid(bh as i64) as usize;
        for x in 0..sw {
            let bx = signed_index(x, sw).rem_euclid(bw as i64) as usize;
            out[y * sw + x] = big[by * bw + bx];
        }
    }
    out
}

fn paste_spectrum(
    small: &[Complex64],
    sw: usize,
    sh: usize,
    big: &mut [Complex64],
    bw: usize,
    bh: usize,
) {
    for y in 0..sh {
        let by = signed_index(y, sh).rem_euclid(bh as i64) as usize;
        for x in 0..sw {
            let bx = signed_index(x, sw).rem_euclid(bw as i64) as usize;
            big[by * bw + bx] = small[y * sw + x];
        }
    }
}

fn extract_band(
    spectrum: &[Complex64],
    bank: &FilterBank,
    scale: usize,
    orientation: usize,
) -> ComplexSubband {
    let (bw, bh) = (bank.width(), bank.height());
    let (sw, sh) = bank.band_dims(scale);
    let radial = bank.radial_mask(scale);
    let angular = bank.angular_mask(orientation);
    let mut masked = vec![Complex64::default(); bw * bh];
    for i in 0..bw * bh {
        let m = radial[i] * angular[i];
        if m != 0.0 {
            masked[i] = spectrum[i] * m;
        }
    }
    let mut small = crop_spectrum(&masked, bw, bh, sw, sh);
    ifft2(sw, sh, &mut small);
    // Keep coefficients on the scale of the full-resolution filter response.
    let gain = (sw * sh) as f64 / (bw * bh) as f64;
    for v in small.iter_mut() {
        *v *= gain;
    }
    ComplexSubband {
        scale,
        orientation,
        width: sw,
        height: sh,
        coefficients: small,
    }
}

fn extract_real_residual(
    spectrum: &[Complex64],
    mask: &[f64],
    bw: usize,
    bh: usize,
    sw: usize,
    sh: usize,
) -> RealGrid {
    let mut masked = vec![Complex64::default(); bw * bh];
    for i in 0..bw * bh {
        if mask[i] != 0.0 {
            masked[i] = spectrum[i] * mask[i];
        }
    }
    let mut small = crop_spectrum(&masked, bw, bh, sw, sh);
    ifft2(sw, sh, &mut small);
    let gain = (sw * sh) as f64 / (bw * bh) as f64;
    RealGrid {
        width: sw,
        height: sh,
        data: small.iter().map(|v| v.re * gain).collect(),
    }
}

/// Decompose a single-channel frame into a complex steerable pyramid using
/// a prebuilt filter bank (which pins the spec and dims).
pub fn decompose_with_bank(
    frame: &Frame,
    bank: &FilterBank,
    spec: &PyramidSpec,
) -> Result<Pyramid> {
    if frame.channels() != 1 {
        return Err(Error::Usage(
            "decompose expects a single-channel frame; split color first".into(),
        ));
    }
    if frame.dims() != (bank.width(), bank.height()) {
        return Err(Error::Structure(format!(
            "frame {}x{} does not match bank {}x{}",
            frame.width(),
            frame.height(),
            bank.width(),
            bank.height()
        )));
    }
    if !frame.plane(0).iter().all(|v| v.is_finite()) {
        return Err(Error::Data("frame contains non-finite samples".into()));
    }

    let (w, h) = frame.dims();
    let spectrum = fft2_real(w, h, frame.plane(0));

    let pairs: Vec<(usize, usize)> = (0..spec.scales)
        .flat_map(|s| (0..spec.orientations).map(move |k| (s, k)))
        .collect();
    let bands: Vec<ComplexSubband> = pairs
        .par_iter()
        .map(|&(s, k)| extract_band(&spectrum, bank, s, k))
        .collect();

    let highpass = extract_real_residual(&spectrum, bank.highpass_mask(), w, h, w, h);
    let d = 1usize << spec.scales;
    let (lw, lh) = (w.div_ceil(d), h.div_ceil(d));
    let lowpass = extract_real_residual(&spectrum, bank.lowpass_mask(), w, h, lw, lh);

    Ok(Pyramid {
        spec: *spec,
        width: w,
        height: h,
        bands,
        highpass,
        lowpass,
    })
}

/// Decompose a single-channel frame, building the filter bank internally.
pub fn decompose(frame: &Frame, spec: &PyramidSpec) -> Result<Pyramid> {
    let bank = FilterBank::new(spec, frame.width(), frame.height())?;
    decompose_with_bank(frame, &bank, spec)
}

/// Invert a pyramid back to a frame using a prebuilt bank.
pub fn reconstruct_with_bank(pyr: &Pyramid, bank: &FilterBank) -> Result<Frame> {
    pyr.check_well_formed()?;
    if (bank.width(), bank.height()) != (pyr.width, pyr.height)
        || bank.scales() != pyr.spec.scales
        || bank.orientations() != pyr.spec.orientations
    {
        return Err(Error::Structure(
            "filter bank does not match pyramid".into(),
        ));
    }
    let (w, h) = (pyr.width, pyr.height);
    let n = w * h;

    // Per-band synthesis contributions, computed in parallel but accumulated
    // in band order so the result is independent of the schedule.
    let contributions: Vec<Vec<Complex64>> = pyr
        .bands
        .par_iter()
        .map(|band| {
            let (sw, sh) = (band.width, band.height);
            let mut spec_small = band.coefficients.clone();
            fft2(sw, sh, &mut spec_small);
            let gain = (w * h) as f64 / (sw * sh) as f64;
            for v in spec_small.iter_mut() {
                *v *= gain;
            }
            let mut full = vec![Complex64::default(); n];
            paste_spectrum(&spec_small, sw, sh, &mut full, w, h);
            let radial = bank.radial_mask(band.scale);
            let angular = bank.angular_mask(band.orientation);
            for i in 0..n {
                let m = radial[i] * angular[i];
                full[i] = if m != 0.0 {
                    full[i] * m
                } else {
                    Complex64::default()
                };
            }
            full
        })
        .collect();

    let mut acc = vec![Complex64::default(); n];
    for c in &contributions {
        for i in 0..n {
            acc[i] += c[i];
        }
    }

    // Oriented bands carry only the positive-frequency half; a real signal
    // needs the conjugate-mirrored half added back (the "2 x real part").
    let mut total = vec![Complex64::default(); n];
    for y in 0..h {
        let ym = (h - y) % h;
        for x in 0..w {
            let xm = (w - x) % w;
            total[y * w + x] = acc[y * w + x] + acc[ym * w + xm].conj();
        }
    }

    // Residuals use symmetric masks and contribute directly.
    let mut hi_spec = fft2_real(w, h, &pyr.highpass.data);
    let hp = bank.highpass_mask();
    for i in 0..n {
        total[i] += hi_spec[i] * hp[i];
        hi_spec[i] = Complex64::default();
    }
    let (lw, lh) = (pyr.lowpass.width, pyr.lowpass.height);
    let mut lo_small = fft2_real(lw, lh, &pyr.lowpass.data);
    let gain = (w * h) as f64 / (lw * lh) as f64;
    for v in lo_small.iter_mut() {
        *v *= gain;
    }
    let mut lo_full = vec![Complex64::default(); n];
    paste_spectrum(&lo_small, lw, lh, &mut lo_full, w, h);
    let lp = bank.lowpass_mask();
    for i in 0..n {
        total[i] += lo_full[i] * lp[i];
    }

    ifft2(w, h, &mut total);
    let data: Vec<f64> = total.iter().map(|v| v.re).collect();
    Frame::new(w, h, 1, data)
}

/// Invert a pyramid back to a frame, building the filter bank internally.
pub fn reconstruct(pyr: &Pyramid) -> Result<Frame> {
    let bank = FilterBank::new(&pyr.spec, pyr.width, pyr.height)?;
    reconstruct_with_bank(pyr, &bank)
}

/// Relative L2 distance between two equal-sized frames.
pub fn relative_l2(a: &Frame, b: &Frame) -> f64 {
    let num: f64 = a
        .data()
        .iter()
        .zip(b.data())
        .map(|(x, y)| (x - y) * (x - y))
        .sum();
    let den: f64 = a.data().iter().map(|x| x * x).sum();
    if den == 0.0 {
        num.sqrt()
    } else {
        (num / den).sqrt()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn noise_frame(w: usize, h: usize, seed: u64) -> Frame {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Frame::new(w, h, 1, (0..w * h).map(|_| rng.gen::<f64>()).collect()).unwrap()
    }

    #[test]
    fn zero_frame_decomposes_to_zeros() {
        let f = Frame::zeros(32, 32, 1);
        let spec = PyramidSpec::new(1, 2, 16).unwrap();
        let p = decompose(&f, &spec).unwrap();
        for b in &p.bands {
            assert!(b.coefficients.iter().all(|c| c.norm() == 0.0));
        }
        assert!(p.highpass.data.iter().all(|&v| v == 0.0));
        assert!(p.lowpass.data.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn constant_frame_lands_in_lowpass() {
        let c = 0.37;
        let f = Frame::constant(64, 64, c);
        let spec = PyramidSpec::new(2, 4, 16).unwrap();
        let p = decompose(&f, &spec).unwrap();
        for b in &p.bands {
            for v in &b.coefficients {
                assert!(v.norm() < 1e-12);
            }
        }
        for &v in &p.highpass.data {
            assert!(v.abs() < 1e-12);
        }
        for &v in &p.lowpass.data {
            assert!((v - c).abs() < 1e-12);
        }
    }

    #[test]
    fn roundtrip_error_is_tiny() {
        let f = noise_frame(128, 128, 7);
        let spec = PyramidSpec::default();
        let p = decompose(&f, &spec).unwrap();
        let r = reconstruct(&p).unwrap();
        assert!(relative_l2(&r, &f) < 1e-6);
    }

    #[test]
    fn roundtrip_on_awkward_dims() {
        // Odd and non-power-of-two sizes exercise the ceil cropping rule.
        for &(w, h) in &[(96usize, 80usize), (100, 68), (130, 94)] {
            let f = noise_frame(w, h, w as u64 * 1000 + h as u64);
            let spec = PyramidSpec::new(3, 4, 8).unwrap();
            let p = decompose(&f, &spec).unwrap();
            assert_eq!(p.band(2, 0).width, w.div_ceil(4));
            assert_eq!(p.band(2, 0).height, h.div_ceil(4));
            let r = reconstruct(&p).unwrap();
            assert!(
                relative_l2(&r, &f) < 1e-6,
                "{w}x{h}: {}",
                relative_l2(&r, &f)
            );
        }
    }

    #[test]
    fn zero_pyramid_reconstructs_to_zero() {
        let f = Frame::zeros(32, 32, 1);
        let spec = PyramidSpec::new(1, 2, 16).unwrap();
        let p = decompose(&f, &spec).unwrap();
        let r = reconstruct(&p).unwrap();
        assert!(r.data().iter().all(|&v| v.abs() < 1e-15));
    }

    #[test]
    fn identity_phase_edit_changes_nothing() {
        let f = noise_frame(64, 64, 3);
        let spec = PyramidSpec::new(2, 4, 16).unwrap();
        let mut p = decompose(&f, &spec).unwrap();
        let phase_shift = Complex64::from_polar(1.0, 0.0);
        for c in p.band_mut(0, 1).coefficients.iter_mut() {
            *c *= phase_shift;
        }
        let before = reconstruct(&decompose(&f, &spec).unwrap()).unwrap();
        let after = reconstruct(&p).unwrap();
        assert_eq!(before, after);
    }

    #[test]
    fn sinusoid_concentrates_in_matching_band_with_correct_phase_ramp() {
        // 32 cycles over 128 px -> wx = pi/2, the peak of scale 0; horizontal
        // structure means orientation 0.
        let (w, h) = (128, 128);
        let w0 = 2.0 * std::f64::consts::PI * 32.0 / w as f64;
        let f = Frame::from_fn(w, h, |x, _| 0.5 + 0.4 * (w0 * x as f64).cos());
        let spec = PyramidSpec::default();
        let p = decompose(&f, &spec).unwrap();

        let energy =
            |b: &ComplexSubband| -> f64 { b.coefficients.iter().map(|c| c.norm_sqr()).sum() };
        let target = energy(p.band(0, 0));
        // Other scales have zero mask response at wx = pi/2; neighboring
        // orientations overlap by cos^6(pi/4) = 0.125, and the orthogonal
        // orientation not at all.
        for s in 1..4 {
            for k in 0..4 {
                assert!(
                    energy(p.band(s, k)) < target * 1e-6,
                    "band ({s},{k}) unexpectedly energetic"
                );
            }
        }
        for k in [1, 3] {
            let ratio = energy(p.band(0, k)) / target;
            assert!((ratio - 0.125).abs() < 1e-3, "orientation {k}: {ratio}");
        }
        assert!(energy(p.band(0, 2)) < target * 1e-9);

        // Phase ramp slope along x measured from adjacent-coefficient
        // conjugate products, where amplitude is high.
        let b = p.band(0, 0);
        let max_amp = b.coefficients.iter().map(|c| c.norm()).fold(0.0, f64::max);
        let mut slopes = Vec::new();
        for y in 0..b.height {
            for x in 0..b.width - 1 {
                let c0 = b.coefficients[y * b.width + x];
                let c1 = b.coefficients[y * b.width + x + 1];
                if c0.norm() > 0.5 * max_amp && c1.norm() > 0.5 * max_amp {
                    slopes.push((c1 * c0.conj()).arg());
                }
            }
        }
        let mean: f64 = slopes.iter().sum::<f64>() / slopes.len() as f64;
        assert!(
            (mean - w0).abs() < 0.01 * w0,
            "phase ramp {mean} vs sinusoid frequency {w0}"
        );
    }

    #[test]
    fn decompose_is_linear() {
        let f = noise_frame(48, 48, 1);
        let g = noise_frame(48, 48, 2);
        let (a, b) = (0.7, -1.3);
        let combo = Frame::new(
            48,
            48,
            1,
            f.plane(0)
                .iter()
                .zip(g.plane(0))
                .map(|(x, y)| a * x + b * y)
                .collect(),
        )
        .unwrap();
        let spec = PyramidSpec::new(2, 3, 8).unwrap();
        let pf = decompose(&f, &spec).unwrap();
        let pg = decompose(&g, &spec).unwrap();
        let pc = decompose(&combo, &spec).unwrap();
        let max_amp = pc
            .bands
            .iter()
            .flat_map(|band| band.coefficients.iter())
            .map(|c| c.norm())
            .fold(0.0, f64::max);
        for ((bc, bf), bg) in pc.bands.iter().zip(&pf.bands).zip(&pg.bands) {
            for i in 0..bc.coefficients.len() {
                let expect = a * bf.coefficients[i] + b * bg.coefficients[i];
                assert!((bc.coefficients[i] - expect).norm() / max_amp < 1e-12);
            }
        }
    }

    #[test]
    fn shift_covariance_at_full_resolution() {
        let (w, h) = (64, 64);
        let f = noise_frame(w, h, 11);
        let (dx, dy) = (5usize, 3usize);
        let shifted = Frame::from_fn(w, h, |x, y| f.get(0, (x + w - dx) % w, (y + h - dy) % h));
        let spec = PyramidSpec::new(2, 4, 16).unwrap();
        let p0 = decompose(&f, &spec).unwrap();
        let p1 = decompose(&shifted, &spec).unwrap();
        for k in 0..4 {
            let b0 = p0.band(0, k);
            let b1 = p1.band(0, k);
            for y in 0..h {
                for x in 0..w {
                    let expect = b0.coefficients[((y + h - dy) % h) * w + (x + w - dx) % w];
                    let got = b1.coefficients[y * w + x];
                    assert!((got - expect).norm() < 1e-10);
                }
            }
        }
    }

    #[test]
    fn rejects_non_finite_samples() {
        let mut f = Frame::constant(32, 32, 0.5);
        f.plane_mut(0)[10] = f64::NAN;
        let spec = PyramidSpec::new(1, 2, 16).unwrap();
        assert!(matches!(decompose(&f, &spec), Err(Error::Data(_))));
    }

    #[test]
    fn reconstruct_rejects_malformed_pyramid() {
        let f = noise_frame(64, 64, 5);
        let spec = PyramidSpec::new(2, 4, 16).unwrap();
        let mut p = decompose(&f, &spec).unwrap();
        p.bands.pop();
        assert!(matches!(reconstruct(&p), Err(Error::Structure(_))));
    }
}
