//! Correlation-weighted Gram losses over pyramid-phase features, with
//! analytic gradients, plus the descent loop that drives iterative motion
//! transfer.
//!
//! "Layer responses" here are pyramid subband channels: per scale, one
//! amplitude channel and one wrapped-phase channel per orientation. The
//! feature boundary is a plain matrix, so learned features can be swapped in
//! without touching the losses.

use crate::error::{Error, Result};
use crate::frame::{split_channels, Frame};
use crate::pyramid::{
    decompose_with_bank, reconstruct_with_bank, FilterBank, Pyramid, PyramidSpec,
};
use num_complex::Complex64;

/// A channels x positions response matrix at one layer.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMap {
    pub layer: usize,
    pub channels: usize,
    pub positions: usize,
    /// Row-major: values[c * positions + j].
    pub values: Vec<f64>,
}

impl FeatureMap {
    pub fn new(layer: usize, channels: usize, positions: usize, values: Vec<f64>) -> Result<Self> {
        if channels == 0 || positions == 0 {
            return Err(Error::Structure(
                "feature map needs at least one channel and position".into(),
            ));
        }
        if values.len() != channels * positions {
            return Err(Error::Structure(format!(
                "feature values length {} does not match {}x{}",
                values.len(),
                channels,
                positions
            )));
        }
        if !values.iter().all(|v| v.is_finite()) {
            return Err(Error::Data("feature map contains non-finite values".into()));
        }
        Ok(Self {
            layer,
            channels,
            positions,
            values,
        })
    }

    #[inline]
    pub fn get(&self, c: usize, j: usize) -> f64 {
        self.values[c * self.positions + j]
    }

    fn same_shape(&self, other: &FeatureMap) -> bool {
        self.channels == other.channels && self.positions == other.positions
    }
}

/// Per-position appearance correlation in [-1, 1].
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationMap {
    pub layer: usize,
    pub values: Vec<f64>,
}

/// Column-wise normalized correlation between two response matrices.
/// Positions where either column has zero norm carry zero correlation
/// (no appearance evidence, no weight).
pub fn correlation(c: &FeatureMap, d: &FeatureMap) -> Result<CorrelationMap> {
    if !c.same_shape(d) {
        return Err(Error::Structure(format!(
            "correlation shape mismatch: {}x{} vs {}x{}",
            c.channels, c.positions, d.channels, d.positions
        )));
    }
    let mut values = Vec::with_capacity(c.positions);
    for j in 0..c.positions {
        let mut dot = 0.0;
        let mut nc = 0.0;
        let mut nd = 0.0;
        for i in 0..c.channels {
            let a = c.get(i, j);
            let b = d.get(i, j);
            dot += a * b;
            nc += a * a;
            nd += b * b;
        }
        values.push(if nc > 0.0 && nd > 0.0 {
            dot / (nc.sqrt() * nd.sqrt())
        } else {
            0.0
        });
    }
    Ok(CorrelationMap {
        layer: c.layer,
        values,
    })
}

/// Correlation-weighted Gram matrix: `G[i][j] = sum_k K_k F[i,k] F[j,k]`,
/// returned row-major N x N. Symmetric by construction.
pub fn weighted_gram(f: &FeatureMap, k: &CorrelationMap) -> Result<Vec<f64>> {
    if k.values.len() != f.positions {
        return Err(Error::Structure(format!(
            "correlation map length {} does not match {} positions",
            k.values.len(),
            f.positions
        )));
    }
    let n = f.channels;
    let m = f.positions;
    let mut gram = vec![0.0; n * n];
    for i in 0..n {
        let fi = &f.values[i * m..(i + 1) * m];
        for j in i..n {
            let fj = &f.values[j * m..(j + 1) * m];
            let acc: f64 = k
                .values
                .iter()
                .zip(fi)
                .zip(fj)
                .map(|((kv, a), b)| kv * a * b)
                .sum();
            gram[i * n + j] = acc;
            gram[j * n + i] = acc;
        }
    }
    Ok(gram)
}

/// How the squared Gram discrepancy is weighted outside the Grams.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum OuterWeighting {
    /// No outer factor; the correlation already weights inside the Grams.
    #[default]
    None,
    /// Experimental: reuse the position-mean of the correlation map as a
    /// per-column factor on the squared differences.
    ChannelAggregated,
}

/// Motion-style loss between generated features F and video-frame features P
/// across phase scales, with the analytic gradient with respect to F.
///
/// Per scale: `L = 1/(N^2 M^2) * sum_ij W_ij (G[ij] - A[ij])^2` with G, A the
/// correlation-weighted Grams of F and P. Returns the summed loss and one
/// gradient buffer per scale.
pub fn style_loss(
    f_scales: &[FeatureMap],
    p_scales: &[FeatureMap],
    k: &CorrelationMap,
    outer: OuterWeighting,
) -> Result<(f64, Vec<Vec<f64>>)> {
    if f_scales.len() != p_scales.len() || f_scales.is_empty() {
        return Err(Error::Structure(
            "style loss needs matching, nonempty per-scale feature lists".into(),
        ));
    }
    for (f, p) in f_scales.iter().zip(p_scales) {
        if !f.same_shape(p) || f.positions != k.values.len() {
            return Err(Error::Structure(
                "style loss per-scale shapes must match each other and the correlation map".into(),
            ));
        }
        if f.channels != f_scales[0].channels || f.positions != f_scales[0].positions {
            return Err(Error::Structure(
                "style loss scales must share one shape".into(),
            ));
        }
    }

    let n = f_scales[0].channels;
    let m = f_scales[0].positions;
    let norm = 1.0 / ((n * n) as f64 * (m * m) as f64);

    let outer_weight: Vec<f64> = match outer {
        OuterWeighting::None => vec![1.0; n],
        OuterWeighting::ChannelAggregated => {
            let mean = k.values.iter().sum::<f64>() / m as f64;
            vec![mean; n]
        }
    };

    let mut total = 0.0;
    let mut grads = Vec::with_capacity(f_scales.len());
    for (f, p) in f_scales.iter().zip(p_scales) {
        let g = weighted_gram(f, k)?;
        let a = weighted_gram(p, k)?;
        let mut loss = 0.0;
        let mut err = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                let e = g[i * n + j] - a[i * n + j];
                err[i * n + j] = e;
                loss += outer_weight[j] * e * e;
            }
        }
        total += norm * loss;

        // dL/dF[p,q] = 2 norm K_q sum_j (W[p,j] + W[j,p]) E[p,j] F[j,q]
        // with W[i,j] = outer_weight[j] (E is symmetric).
        let mut grad = vec![0.0; n * m];
        for pch in 0..n {
            for j in 0..n {
                let coeff = 2.0 * norm * (outer_weight[j] + outer_weight[pch]) * err[pch * n + j];
                if coeff == 0.0 {
                    continue;
                }
                for q in 0..m {
                    grad[pch * m + q] += coeff * k.values[q] * f.get(j, q);
                }
            }
        }
        grads.push(grad);
    }
    Ok((total, grads))
}

/// Mean squared feature difference: 1/(N M) sum (F - C)^2 and its gradient
/// with respect to F.
pub fn content_loss(f: &FeatureMap, c: &FeatureMap) -> Result<(f64, Vec<f64>)> {
    if !f.same_shape(c) {
        return Err(Error::Structure(format!(
            "content loss shape mismatch: {}x{} vs {}x{}",
            f.channels, f.positions, c.channels, c.positions
        )));
    }
    let norm = 1.0 / (f.channels * f.positions) as f64;
    let mut loss = 0.0;
    let mut grad = Vec::with_capacity(f.values.len());
    for (a, b) in f.values.iter().zip(&c.values) {
        let d = a - b;
        loss += d * d;
        grad.push(2.0 * norm * d);
    }
    Ok((loss * norm, grad))
}

/// Temporal coherence term between consecutive generated-frame features;
/// same form as the content loss, gradient with respect to the current
/// features.
pub fn temporal_loss(g_t: &FeatureMap, g_prev: &FeatureMap) -> Result<(f64, Vec<f64>)> {
    content_loss(g_t, g_prev)
}

/// Extract the response matrix of one pyramid scale: K amplitude channels
/// followed by K wrapped-phase channels, positions in row-major grid order.
pub fn phase_features(pyr: &Pyramid, scale: usize) -> FeatureMap {
    let k = pyr.spec.orientations;
    let b0 = pyr.band(scale, 0);
    let m = b0.width * b0.height;
    let mut values = Vec::with_capacity(2 * k * m);
    for orient in 0..k {
        let band = pyr.band(scale, orient);
        values.extend(band.coefficients.iter().map(|c| c.norm()));
    }
    for orient in 0..k {
        let band = pyr.band(scale, orient);
        values.extend(band.coefficients.iter().map(|c| c.arg()));
    }
    FeatureMap::new(scale, 2 * k, m, values).expect("pyramid features are finite")
}

/// Write amplitude/phase feature rows back into the pyramid's bands.
fn apply_features(pyr: &mut Pyramid, scale: usize, f: &FeatureMap) {
    let k = pyr.spec.orientations;
    let m = f.positions;
    for orient in 0..k {
        let amps = &f.values[orient * m..(orient + 1) * m];
        let phases = &f.values[(k + orient) * m..(k + orient + 1) * m];
        let band = pyr.band_mut(scale, orient);
        for (c, (&a, &ph)) in band.coefficients.iter_mut().zip(amps.iter().zip(phases)) {
            *c = Complex64::from_polar(a, ph);
        }
    }
}

/// Relative weights of the three loss terms.
#[derive(Debug, Clone, Copy)]
pub struct LossWeights {
    pub style: f64,
    pub content: f64,
    pub temporal: f64,
}

impl Default for LossWeights {
    fn default() -> Self {
        Self {
            style: 1.0,
            content: 1.0,
            temporal: 0.0,
        }
    }
}

/// One row of the optimizer's loss trajectory.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceRow {
    pub iter: usize,
    pub style: f64,
    pub content: f64,
    pub temporal: f64,
    pub total: f64,
}

/// Result of `optimize_transfer`.
#[derive(Debug, Clone)]
pub struct OptimizeResult {
    pub frame: Frame,
    pub trace: Vec<TraceRow>,
}

struct ScaleProblem {
    f: FeatureMap,
    p: FeatureMap,
    t: FeatureMap,
    k: CorrelationMap,
}

fn eval_scale(
    sp: &ScaleProblem,
    f: &FeatureMap,
    weights: &LossWeights,
) -> Result<(f64, f64, f64, Vec<f64>)> {
    let mut grad = vec![0.0; f.values.len()];
    let mut style = 0.0;
    if weights.style != 0.0 {
        let (l, g) = style_loss(
            std::slice::from_ref(f),
            std::slice::from_ref(&sp.p),
            &sp.k,
            OuterWeighting::None,
        )?;
        style = l;
        for (dst, s) in grad.iter_mut().zip(&g[0]) {
            *dst += weights.style * s;
        }
    }
    let mut content = 0.0;
    if weights.content != 0.0 {
        let (l, g) = content_loss(f, &sp.p)?;
        content = l;
        for (dst, s) in grad.iter_mut().zip(&g) {
            *dst += weights.content * s;
        }
    }
    let mut temporal = 0.0;
    if weights.temporal != 0.0 {
        let (l, g) = temporal_loss(f, &sp.t)?;
        temporal = l;
        for (dst, s) in grad.iter_mut().zip(&g) {
            *dst += weights.temporal * s;
        }
    }
    Ok((style, content, temporal, grad))
}

fn scale_total(style: f64, content: f64, temporal: f64, w: &LossWeights) -> f64 {
    w.style * style + w.content * content + w.temporal * temporal
}

/// Gradient descent on the generated image's pyramid-phase features.
///
/// Style and content anchor to the video frame; the temporal term anchors to
/// the starting image's features (its role as the previous generated frame).
/// Each scale descends independently with a fixed trial step and up to 20
/// backtracking halvings, so the total loss never increases. Inputs are
/// converted to luma internally.
pub fn optimize_transfer(
    init: &Frame,
    video_frame: &Frame,
    weights: &LossWeights,
    iters: usize,
    step: f64,
    spec: &PyramidSpec,
) -> Result<OptimizeResult> {
    if !(step >= 0.0 && step.is_finite()) {
        return Err(Error::Usage("step must be finite and >= 0".into()));
    }
    if init.dims() != video_frame.dims() {
        return Err(Error::Structure(
            "init and video frame must share dims".into(),
        ));
    }
    let (init_luma, _) = split_channels(init)?;
    let (video_luma, _) = split_channels(video_frame)?;
    let bank = FilterBank::new(spec, init.width(), init.height())?;
    let init_pyr = decompose_with_bank(&init_luma, &bank, spec)?;
    let video_pyr = decompose_with_bank(&video_luma, &bank, spec)?;

    let mut problems = Vec::with_capacity(spec.scales);
    for s in 0..spec.scales {
        let f = phase_features(&init_pyr, s);
        let p = phase_features(&video_pyr, s);
        let k = correlation(&f, &p)?;
        problems.push(ScaleProblem {
            t: f.clone(),
            f,
            p,
            k,
        });
    }

    let mut trace = Vec::with_capacity(iters + 1);
    let mut current: Vec<(f64, f64, f64, Vec<f64>)> = Vec::with_capacity(problems.len());
    for sp in &problems {
        current.push(eval_scale(sp, &sp.f, weights)?);
    }
    let record = |iter: usize, current: &[(f64, f64, f64, Vec<f64>)]| -> TraceRow {
        let style: f64 = current.iter().map(|c| c.0).sum();
        let content: f64 = current.iter().map(|c| c.1).sum();
        let temporal: f64 = current.iter().map(|c| c.2).sum();
        TraceRow {
            iter,
            style,
            content,
            temporal,
            total: weights.style * style + weights.content * content + weights.temporal * temporal,
        }
    };
    let row = record(0, &current);
    if !row.total.is_finite() {
        return Err(Error::Divergence { iteration: 0 });
    }
    trace.push(row);

    for iter in 1..=iters {
        for (si, sp) in problems.iter_mut().enumerate() {
            let (style, content, temporal, grad) = current[si].clone();
            let old_total = scale_total(style, content, temporal, weights);
            let mut t = step;
            for _ in 0..=20 {
                if t == 0.0 {
                    break;
                }
                let mut cand = sp.f.clone();
                for (v, g) in cand.values.iter_mut().zip(&grad) {
                    *v -= t * g;
                }
                let eval = eval_scale(sp, &cand, weights)?;
                let new_total = scale_total(eval.0, eval.1, eval.2, weights);
                if new_total.is_finite() && new_total < old_total {
                    sp.f = cand;
                    current[si] = eval;
                    break;
                }
                t /= 2.0;
            }
        }
        let row = record(iter, &current);
        if !row.total.is_finite() {
            return Err(Error::Divergence { iteration: iter });
        }
        trace.push(row);
    }

    let mut out_pyr = init_pyr;
    for (s, sp) in problems.iter().enumerate() {
        apply_features(&mut out_pyr, s, &sp.f);
    }
    let mut frame = reconstruct_with_bank(&out_pyr, &bank)?;
    frame.clip_unit();
    Ok(OptimizeResult { frame, trace })
}
