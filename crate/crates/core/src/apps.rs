//! Phase-edit applications: Eulerian frame prediction, motion magnification,
//! and motion transfer onto images or other videos.
//!
//! Every application follows the same pattern: read wrapped phase deltas off
//! luma pyramids, then rewrite the phase of each color channel's pyramid and
//! reconstruct. Phase analysis always runs on luma; chroma channels only
//! receive the edits, which keeps their noisier phase out of the motion path.

use crate::error::{Error, Result};
use crate::frame::{merge_channels, split_channels, Frame, LUMA_WEIGHTS};
use crate::loss::{correlation, phase_features};
use crate::motion::{smooth_deltas, wrap, PhaseDelta};
use crate::pyramid::{
    decompose_with_bank, reconstruct_with_bank, FilterBank, Pyramid, PyramidSpec,
};
use num_complex::Complex64;
use std::f64::consts::{FRAC_PI_2, PI};

/// Settings for single- and multi-step frame prediction.
#[derive(Debug, Clone, Copy)]
pub struct PredictionConfig {
    /// How many frames to extrapolate.
    pub steps: usize,
    /// Amplitude-weighted Gaussian sigma applied to the deltas before
    /// extrapolation, in band-grid pixels. 0 disables smoothing.
    pub delta_smoothing_radius: f64,
    /// Largest phase step applied per band; deltas beyond this are clamped.
    /// Steps near pi are alias-ambiguous, so the default stays well below.
    pub clamp: f64,
}

impl Default for PredictionConfig {
    fn default() -> Self {
        Self {
            steps: 1,
            delta_smoothing_radius: 0.0,
            clamp: FRAC_PI_2,
        }
    }
}

impl PredictionConfig {
    fn validate(&self) -> Result<()> {
        if self.steps < 1 {
            return Err(Error::Usage("prediction needs at least 1 step".into()));
        }
        if !(self.clamp > 0.0 && self.clamp <= PI) {
            return Err(Error::Usage(format!(
                "phase-step clamp must lie in (0, pi], got {}",
                self.clamp
            )));
        }
        if self.delta_smoothing_radius.is_nan() || self.delta_smoothing_radius < 0.0 {
            return Err(Error::Usage("smoothing radius must be >= 0".into()));
        }
        Ok(())
    }
}

/// Settings for motion transfer.
#[derive(Debug, Clone, Copy)]
pub struct TransferConfig {
    /// Motion gain: 1 transfers faithfully, >1 magnifies, negative inverts.
    pub alpha: f64,
    /// Deltas are zeroed where source amplitude falls below this fraction of
    /// the per-band maximum.
    pub amplitude_gate: f64,
    /// Temporal smoothing strength for injected deltas in video transfer;
    /// 0 disables smoothing.
    pub lambda_t: f64,
    /// Pyramid scale whose responses feed the appearance-correlation map.
    pub correlation_layer: usize,
    /// Scale injected deltas per position by the target/source appearance
    /// correlation at `correlation_layer`.
    pub use_correlation_weighting: bool,
}

impl Default for TransferConfig {
    fn default() -> Self {
        Self {
            alpha: 1.0,
            amplitude_gate: 0.05,
            lambda_t: 0.0,
            correlation_layer: 3,
            use_correlation_weighting: false,
        }
    }
}

impl TransferConfig {
    fn validate(&self, spec: &PyramidSpec) -> Result<()> {
        if !self.alpha.is_finite() {
            return Err(Error::Usage("alpha must be finite".into()));
        }
        if !(0.0..=1.0).contains(&self.amplitude_gate) {
            return Err(Error::Usage(format!(
                "amplitude gate must lie in [0,1], got {}",
                self.amplitude_gate
            )));
        }
        if !(self.lambda_t >= 0.0 && self.lambda_t.is_finite()) {
            return Err(Error::Usage("lambda_t must be finite and >= 0".into()));
        }
        if self.use_correlation_weighting && self.correlation_layer >= spec.scales {
            return Err(Error::Usage(format!(
                "correlation layer {} out of range for {} scales",
                self.correlation_layer, spec.scales
            )));
        }
        Ok(())
    }
}

/// Per-channel pyramids of one frame, plus the luma pyramid derived from
/// them by linearity of the decomposition.
pub struct FrameStack {
    pub channels: Vec<Pyramid>,
    pub luma: Pyramid,
}

/// Decompose every channel of a frame, reusing one filter bank.
pub fn decompose_stack(frame: &Frame, bank: &FilterBank, spec: &PyramidSpec) -> Result<FrameStack> {
    let (_, planes) = split_channels(frame)?;
    let channels = planes
        .iter()
        .map(|p| decompose_with_bank(p, bank, spec))
        .collect::<Result<Vec<_>>>()?;
    let luma = if channels.len() == 1 {
        channels[0].clone()
    } else {
        // Weighted sum of the channel pyramids equals the luma decomposition.
        let mut luma = channels[0].clone();
        scale_pyramid(&mut luma, LUMA_WEIGHTS[0]);
        for (c, &w) in channels.iter().zip(&LUMA_WEIGHTS).skip(1) {
            add_scaled(&mut luma, c, w);
        }
        luma
    };
    Ok(FrameStack { channels, luma })
}

fn scale_pyramid(p: &mut Pyramid, s: f64) {
    for b in &mut p.bands {
        for c in b.coefficients.iter_mut() {
            *c *= s;
        }
    }
    for v in p.highpass.data.iter_mut() {
        *v *= s;
    }
    for v in p.lowpass.data.iter_mut() {
        *v *= s;
    }
}

fn add_scaled(dst: &mut Pyramid, src: &Pyramid, s: f64) {
    for (db, sb) in dst.bands.iter_mut().zip(&src.bands) {
        for (d, c) in db.coefficients.iter_mut().zip(&sb.coefficients) {
            *d += c * s;
        }
    }
    for (d, v) in dst.highpass.data.iter_mut().zip(&src.highpass.data) {
        *d += v * s;
    }
    for (d, v) in dst.lowpass.data.iter_mut().zip(&src.lowpass.data) {
        *d += v * s;
    }
}

/// Rotate every band of `stack`'s channels by the per-band phase multipliers
/// and reconstruct a clipped frame. Residuals pass through unchanged.
fn synthesize_with_phase_edit(
    stack: &FrameStack,
    bank: &FilterBank,
    multipliers: &[Vec<Complex64>],
) -> Result<Frame> {
    let mut planes = Vec::with_capacity(stack.channels.len());
    for chan in &stack.channels {
        let mut edited = chan.clone();
        for (band, mult) in edited.bands.iter_mut().zip(multipliers) {
            for (c, m) in band.coefficients.iter_mut().zip(mult) {
                *c *= m;
            }
        }
        planes.push(reconstruct_with_bank(&edited, bank)?);
    }
    let mut out = merge_channels(&planes)?;
    out.clip_unit();
    Ok(out)
}

fn multipliers_from_deltas(
    deltas: &PhaseDelta,
    map: impl Fn(usize, f64) -> f64,
) -> Vec<Vec<Complex64>> {
    deltas
        .bands
        .iter()
        .enumerate()
        .map(|(bi, band)| {
            band.delta
                .iter()
                .map(|&d| Complex64::from_polar(1.0, map(bi, d)))
                .collect()
        })
        .collect()
}

fn check_same_dims(frames: &[&Frame]) -> Result<()> {
    let first = frames
        .first()
        .ok_or_else(|| Error::Usage("empty frame sequence".into()))?;
    for f in frames {
        if f.dims() != first.dims() || f.channels() != first.channels() {
            return Err(Error::Structure(
                "all frames must share dims and channel count".into(),
            ));
        }
    }
    Ok(())
}

/// Predict the next frame from the last two observed frames by advancing
/// each band's phase by its clamped temporal delta.
pub fn predict_next(
    prev: &Frame,
    current: &Frame,
    cfg: &PredictionConfig,
    spec: &PyramidSpec,
) -> Result<Frame> {
    cfg.validate()?;
    check_same_dims(&[prev, current])?;
    let bank = FilterBank::new(spec, current.width(), current.height())?;
    let out = predict_step(prev, current, cfg, &bank, spec)?;
    Ok(out)
}

fn predict_step(
    prev: &Frame,
    current: &Frame,
    cfg: &PredictionConfig,
    bank: &FilterBank,
    spec: &PyramidSpec,
) -> Result<Frame> {
    let prev_stack = decompose_stack(prev, bank, spec)?;
    let cur_stack = decompose_stack(current, bank, spec)?;
    let mut deltas = crate::motion::phase_delta(&prev_stack.luma, &cur_stack.luma)?;
    if cfg.delta_smoothing_radius > 0.0 {
        smooth_deltas(&mut deltas, cfg.delta_smoothing_radius);
    }
    let clamp = cfg.clamp;
    let mult = multipliers_from_deltas(&deltas, |_, d| d.clamp(-clamp, clamp));
    synthesize_with_phase_edit(&cur_stack, bank, &mult)
}

/// Recursively apply the single-step predictor, re-decomposing each
/// predicted frame, and return the `cfg.steps` predicted frames.
pub fn predict_rollout(
    prev: &Frame,
    current: &Frame,
    cfg: &PredictionConfig,
    spec: &PyramidSpec,
) -> Result<Vec<Frame>> {
    cfg.validate()?;
    check_same_dims(&[prev, current])?;
    let bank = FilterBank::new(spec, current.width(), current.height())?;
    let mut history = (prev.clone(), current.clone());
    let mut out = Vec::with_capacity(cfg.steps);
    for _ in 0..cfg.steps {
        let next = predict_step(&history.0, &history.1, cfg, &bank, spec)?;
        history = (history.1, next.clone());
        out.push(next);
    }
    Ok(out)
}

/// Optional temporal passband for magnification, in cycles/frame.
#[derive(Debug, Clone, Copy)]
pub struct TemporalBand {
    pub low: f64,
    pub high: f64,
}

/// Motion magnification: per band, the phase excursion from the first frame
/// is scaled by `alpha` (optionally after an ideal temporal bandpass on the
/// phase signal) while amplitudes stay those of the current frame.
pub fn magnify(
    frames: &[Frame],
    alpha: f64,
    band: Option<TemporalBand>,
    spec: &PyramidSpec,
) -> Result<Vec<Frame>> {
    if frames.len() < 2 {
        return Err(Error::Usage("magnify needs at least 2 frames".into()));
    }
    if !alpha.is_finite() {
        return Err(Error::Usage("alpha must be finite".into()));
    }
    let refs: Vec<&Frame> = frames.iter().collect();
    check_same_dims(&refs)?;
    let bank = FilterBank::new(spec, frames[0].width(), frames[0].height())?;

    let stacks = frames
        .iter()
        .map(|f| decompose_stack(f, &bank, spec))
        .collect::<Result<Vec<_>>>()?;
    // Phase excursions of every frame against the first.
    let mut excursions: Vec<PhaseDelta> = stacks
        .iter()
        .map(|s| crate::motion::phase_delta(&stacks[0].luma, &s.luma))
        .collect::<Result<Vec<_>>>()?;

    if let Some(tb) = band {
        let band_ok = (0.0..=0.5).contains(&tb.low) && tb.high > tb.low && tb.high <= 0.5;
        if !band_ok {
            return Err(Error::Usage(format!(
                "temporal band must satisfy 0 <= low < high <= 0.5 cycles/frame, got {}..{}",
                tb.low, tb.high
            )));
        }
        temporal_bandpass(&mut excursions, tb);
    }

    let mut out = Vec::with_capacity(frames.len());
    for (stack, exc) in stacks.iter().zip(&excursions) {
        let mult = multipliers_from_deltas(exc, |_, d| (alpha - 1.0) * d);
        out.push(synthesize_with_phase_edit(stack, &bank, &mult)?);
    }
    Ok(out)
}

/// Ideal DFT bandpass over the time axis of each coefficient's phase signal.
fn temporal_bandpass(excursions: &mut [PhaseDelta], band: TemporalBand) {
    let t_len = excursions.len();
    let mut planner = rustfft::FftPlanner::new();
    let forward = planner.plan_fft_forward(t_len);
    let inverse = planner.plan_fft_inverse(t_len);
    let keep: Vec<bool> = (0..t_len)
        .map(|f| {
            let cyc = if f <= t_len / 2 {
                f as f64 / t_len as f64
            } else {
                (t_len - f) as f64 / t_len as f64
            };
            (band.low..=band.high).contains(&cyc)
        })
        .collect();

    let n_bands = excursions[0].bands.len();
    for bi in 0..n_bands {
        let len = excursions[0].bands[bi].delta.len();
        for i in 0..len {
            let mut series: Vec<Complex64> = (0..t_len)
                .map(|t| Complex64::new(excursions[t].bands[bi].delta[i], 0.0))
                .collect();
            forward.process(&mut series);
            for (v, &k) in series.iter_mut().zip(&keep) {
                if !k {
                    *v = Complex64::default();
                }
            }
            inverse.process(&mut series);
            for (t, v) in series.iter().enumerate() {
                excursions[t].bands[bi].delta[i] = v.re / t_len as f64;
            }
        }
    }
}

/// Zero deltas where the source amplitude (sqrt of the weight product) falls
/// below `gate` times the per-band maximum.
fn gate_deltas(deltas: &mut PhaseDelta, gate: f64) {
    if gate <= 0.0 {
        return;
    }
    for band in &mut deltas.bands {
        let max_amp = band.weight.iter().map(|w| w.sqrt()).fold(0.0, f64::max);
        let floor = gate * max_amp;
        for i in 0..band.delta.len() {
            if band.weight[i].sqrt() < floor {
                band.delta[i] = 0.0;
            }
        }
    }
}

/// Per-position correlation between target and source appearance at the
/// configured layer, clamped to [0,1] and resampled (nearest neighbor) to
/// each band's grid. Negative correlation means no appearance evidence, so
/// it gates rather than inverts.
fn correlation_scale_maps(
    target_luma: &Pyramid,
    source_luma: &Pyramid,
    layer: usize,
    deltas: &PhaseDelta,
) -> Result<Vec<Vec<f64>>> {
    let ft = phase_features(target_luma, layer);
    let fs = phase_features(source_luma, layer);
    let k = correlation(&ft, &fs)?;
    let lw = target_luma.band(layer, 0).width;
    let lh = target_luma.band(layer, 0).height;
    let maps = deltas
        .bands
        .iter()
        .map(|band| {
            let mut m = Vec::with_capacity(band.delta.len());
            for y in 0..band.height {
                for x in 0..band.width {
                    let sx = (x * lw) / band.width;
                    let sy = (y * lh) / band.height;
                    let v = k.values[sy.min(lh - 1) * lw + sx.min(lw - 1)];
                    m.push(v.clamp(0.0, 1.0));
                }
            }
            m
        })
        .collect();
    Ok(maps)
}

/// Animate a still image with the motion of a source sequence.
///
/// Per source step, gated luma deltas are accumulated (wrapped) and the
/// accumulated phase advance, scaled by alpha, is applied to the fixed
/// target pyramid. One output frame per source step.
pub fn transfer_to_image(
    target: &Frame,
    source: &[Frame],
    cfg: &TransferConfig,
    spec: &PyramidSpec,
) -> Result<Vec<Frame>> {
    if source.len() < 2 {
        return Err(Error::Usage(
            "motion transfer needs a source of at least 2 frames".into(),
        ));
    }
    cfg.validate(spec)?;
    let bank = FilterBank::new(spec, target.width(), target.height())?;
    let target_stack = decompose_stack(target, &bank, spec)?;

    // Source is resampled onto the target grid before analysis.
    let resampled: Vec<Frame> = source
        .iter()
        .map(|f| f.resize(target.width(), target.height()))
        .collect();
    let (luma0, _) = split_channels(&resampled[0])?;
    let mut prev_luma = decompose_with_bank(&luma0, &bank, spec)?;

    let mut acc: Vec<Vec<f64>> = target_stack
        .luma
        .bands
        .iter()
        .map(|b| vec![0.0; b.coefficients.len()])
        .collect();
    let mut out = Vec::with_capacity(resampled.len() - 1);

    for frame in &resampled[1..] {
        let (luma_f, _) = split_channels(frame)?;
        let next_luma = decompose_with_bank(&luma_f, &bank, spec)?;
        let mut deltas = crate::motion::phase_delta(&prev_luma, &next_luma)?;
        gate_deltas(&mut deltas, cfg.amplitude_gate);
        if cfg.use_correlation_weighting {
            let maps = correlation_scale_maps(
                &target_stack.luma,
                &prev_luma,
                cfg.correlation_layer,
                &deltas,
            )?;
            for (band, map) in deltas.bands.iter_mut().zip(&maps) {
                for (d, m) in band.delta.iter_mut().zip(map) {
                    *d *= m;
                }
            }
        }
        for (a, band) in acc.iter_mut().zip(&deltas.bands) {
            for (av, dv) in a.iter_mut().zip(&band.delta) {
                *av = wrap(*av + dv);
            }
        }
        let mult: Vec<Vec<Complex64>> = acc
            .iter()
            .map(|a| {
                a.iter()
                    .map(|&v| Complex64::from_polar(1.0, cfg.alpha * v))
                    .collect()
            })
            .collect();
        out.push(synthesize_with_phase_edit(&target_stack, &bank, &mult)?);
        prev_luma = next_luma;
    }
    Ok(out)
}

/// Blend a source sequence's motion into a target sequence.
///
/// Per step the target's own deltas plus alpha times the gated (and
/// exponentially smoothed, when lambda_t > 0) source deltas accumulate onto
/// the first target frame's pyramid. Sequences of unequal length truncate to
/// the shorter.
pub fn transfer_to_video(
    target: &[Frame],
    source: &[Frame],
    cfg: &TransferConfig,
    spec: &PyramidSpec,
) -> Result<Vec<Frame>> {
    if target.len() < 2 || source.len() < 2 {
        return Err(Error::Usage(
            "video transfer needs target and source of at least 2 frames".into(),
        ));
    }
    cfg.validate(spec)?;
    let steps = target.len().min(source.len()) - 1;
    let t0 = &target[0];
    let bank = FilterBank::new(spec, t0.width(), t0.height())?;
    let base_stack = decompose_stack(t0, &bank, spec)?;

    let smoothing = cfg.lambda_t / (1.0 + cfg.lambda_t);

    let mut prev_target_luma = base_stack.luma.clone();
    let (sluma0, _) = split_channels(&source[0].resize(t0.width(), t0.height()))?;
    let mut prev_source_luma = decompose_with_bank(&sluma0, &bank, spec)?;

    let mut acc: Vec<Vec<f64>> = base_stack
        .luma
        .bands
        .iter()
        .map(|b| vec![0.0; b.coefficients.len()])
        .collect();
    let mut smoothed: Vec<Vec<f64>> = acc.clone();
    let mut out = Vec::with_capacity(steps);

    for step in 1..=steps {
        let (tluma, _) = split_channels(&target[step])?;
        let next_target_luma = decompose_with_bank(&tluma, &bank, spec)?;
        let target_deltas = crate::motion::phase_delta(&prev_target_luma, &next_target_luma)?;

        let (sluma, _) = split_channels(&source[step].resize(t0.width(), t0.height()))?;
        let next_source_luma = decompose_with_bank(&sluma, &bank, spec)?;
        let mut source_deltas = crate::motion::phase_delta(&prev_source_luma, &next_source_luma)?;
        gate_deltas(&mut source_deltas, cfg.amplitude_gate);
        if cfg.use_correlation_weighting {
            let maps = correlation_scale_maps(
                &base_stack.luma,
                &prev_source_luma,
                cfg.correlation_layer,
                &source_deltas,
            )?;
            for (band, map) in source_deltas.bands.iter_mut().zip(&maps) {
                for (d, m) in band.delta.iter_mut().zip(map) {
                    *d *= m;
                }
            }
        }

        for bi in 0..acc.len() {
            let td = &target_deltas.bands[bi].delta;
            let sd = &source_deltas.bands[bi].delta;
            let sm = &mut smoothed[bi];
            let a = &mut acc[bi];
            for i in 0..a.len() {
                let injected = cfg.alpha * sd[i];
                sm[i] = (1.0 - smoothing) * injected + smoothing * sm[i];
                a[i] = wrap(a[i] + td[i] + sm[i]);
            }
        }

        let mult: Vec<Vec<Complex64>> = acc
            .iter()
            .map(|a| a.iter().map(|&v| Complex64::from_polar(1.0, v)).collect())
            .collect();
        out.push(synthesize_with_phase_edit(&base_stack, &bank, &mult)?);
        prev_target_luma = next_target_luma;
        prev_source_luma = next_source_luma;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth::{generate, psnr, Motion, SynthSpec, Texture};

    fn translating(vx: f64, vy: f64, frames: usize) -> Vec<Frame> {
        let spec = SynthSpec {
            motion: Motion::Translate { vx, vy },
            texture: Texture::Noise { seed: 77 },
            width: 128,
            height: 128,
            frames,
        };
        generate(&spec).unwrap().0
    }

    #[test]
    fn static_prediction_is_near_exact() {
        let f = translating(0.0, 0.0, 1).remove(0);
        let spec = PyramidSpec::default();
        let pred = predict_next(&f, &f, &PredictionConfig::default(), &spec).unwrap();
        assert!(psnr(&pred, &f, 0).unwrap() > 50.0);
    }

    #[test]
    fn rollout_with_one_step_equals_predict_next() {
        let frames = translating(0.5, 0.0, 2);
        let spec = PyramidSpec::default();
        let cfg = PredictionConfig::default();
        let single = predict_next(&frames[0], &frames[1], &cfg, &spec).unwrap();
        let rolled = predict_rollout(&frames[0], &frames[1], &cfg, &spec).unwrap();
        assert_eq!(rolled.len(), 1);
        assert_eq!(rolled[0], single);
    }

    #[test]
    fn prediction_rejects_dim_mismatch() {
        let a = Frame::zeros(64, 64, 1);
        let b = Frame::zeros(64, 32, 1);
        let spec = PyramidSpec::new(2, 4, 16).unwrap();
        assert!(matches!(
            predict_next(&a, &b, &PredictionConfig::default(), &spec),
            Err(Error::Structure(_))
        ));
    }

    #[test]
    fn magnify_alpha_one_is_identity_up_to_roundtrip() {
        let frames = translating(0.3, 0.1, 3);
        let spec = PyramidSpec::default();
        let out = magnify(&frames, 1.0, None, &spec).unwrap();
        for (o, f) in out.iter().zip(&frames) {
            assert!(psnr(o, f, 0).unwrap() > 100.0);
        }
    }

    #[test]
    fn magnify_alpha_zero_freezes_sinusoid() {
        // A translating pure sinusoid has a constant amplitude envelope, so
        // freezing phase reproduces the first frame exactly.
        let spec = SynthSpec {
            motion: Motion::Translate { vx: 0.4, vy: 0.0 },
            texture: Texture::Sinusoid {
                wx: 2.0 * PI * 16.0 / 128.0,
                wy: 2.0 * PI * 8.0 / 128.0,
            },
            width: 128,
            height: 128,
            frames: 4,
        };
        let frames = generate(&spec).unwrap().0;
        let pspec = PyramidSpec::default();
        let out = magnify(&frames, 0.0, None, &pspec).unwrap();
        let first = &out[0];
        for o in &out[1..] {
            assert!(psnr(o, first, 4).unwrap() > 45.0);
        }
    }

    #[test]
    fn magnify_rejects_empty_and_single() {
        let spec = PyramidSpec::default();
        assert!(matches!(
            magnify(&[], 2.0, None, &spec),
            Err(Error::Usage(_))
        ));
        let f = Frame::zeros(64, 64, 1);
        assert!(matches!(
            magnify(&[f], 2.0, None, &spec),
            Err(Error::Usage(_))
        ));
    }

    #[test]
    fn transfer_static_source_reproduces_target() {
        let target = translating(0.0, 0.0, 1).remove(0);
        let source = vec![target.clone(), target.clone(), target.clone()];
        let spec = PyramidSpec::default();
        let out = transfer_to_image(&target, &source, &TransferConfig::default(), &spec).unwrap();
        assert_eq!(out.len(), 2);
        for o in &out {
            assert!(psnr(o, &target, 0).unwrap() > 50.0);
        }
    }

    #[test]
    fn transfer_alpha_zero_is_static() {
        let frames = translating(0.6, -0.4, 4);
        let target = frames[0].clone();
        let cfg = TransferConfig {
            alpha: 0.0,
            ..Default::default()
        };
        let spec = PyramidSpec::default();
        let out = transfer_to_image(&target, &frames, &cfg, &spec).unwrap();
        for o in &out {
            assert!(psnr(o, &target, 0).unwrap() > 50.0);
        }
    }

    #[test]
    fn transfer_rejects_single_frame_source() {
        let f = Frame::zeros(64, 64, 1);
        let spec = PyramidSpec::new(2, 4, 16).unwrap();
        assert!(matches!(
            transfer_to_image(
                &f,
                std::slice::from_ref(&f),
                &TransferConfig::default(),
                &spec
            ),
            Err(Error::Usage(_))
        ));
    }

    #[test]
    fn video_transfer_alpha_zero_tracks_target() {
        let frames = translating(0.4, 0.0, 4);
        let cfg = TransferConfig {
            alpha: 0.0,
            ..Default::default()
        };
        let spec = PyramidSpec::default();
        let out = transfer_to_video(&frames, &frames, &cfg, &spec).unwrap();
        assert_eq!(out.len(), 3);
        for (t, o) in out.iter().enumerate() {
            let p = psnr(o, &frames[t + 1], 8).unwrap();
            assert!(p > 28.0, "step {t}: psnr {p}");
        }
    }

    #[test]
    fn outputs_stay_bounded() {
        let frames = translating(1.0, 1.0, 3);
        let spec = PyramidSpec::default();
        let out = magnify(&frames, 8.0, None, &spec).unwrap();
        for o in &out {
            assert!(o.data().iter().all(|&v| (0.0..=1.0).contains(&v)));
        }
    }
}
