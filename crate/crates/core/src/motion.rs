//! Temporal phase differences and the phase -> motion link.
//!
//! Translating image content by d multiplies each subband coefficient by
//! exp(-i w.d) where w is the coefficient's spatial frequency, so wrapped
//! temporal phase differences carry local motion. Per pixel, a weighted
//! least squares over all bands of the constraint w.(u,v) = -delta recovers
//! the flow, with the band's spectral centroid standing in for the local
//! spatial phase gradient.

use crate::error::{Error, Result};
use crate::pyramid::{FilterBank, Pyramid, PyramidSpec};
use num_complex::Complex64;
use rayon::prelude::*;
use std::f64::consts::PI;

/// Wrap into [-pi, pi). Non-finite input is a data error.
pub fn wrap_angle(x: f64) -> Result<f64> {
    if !x.is_finite() {
        return Err(Error::Data(format!("cannot wrap non-finite angle {x}")));
    }
    Ok(wrap(x))
}

#[inline]
pub(crate) fn wrap(x: f64) -> f64 {
    let mut v = (x + PI).rem_euclid(2.0 * PI) - PI;
    if v >= PI {
        v = -PI;
    }
    v
}

/// Per-band wrapped phase difference between two pyramids, with amplitude
/// weights.
#[derive(Debug, Clone, PartialEq)]
pub struct DeltaBand {
    pub scale: usize,
    pub orientation: usize,
    pub width: usize,
    pub height: usize,
    /// arg(c_next * conj(c_prev)), in [-pi, pi).
    pub delta: Vec<f64>,
    /// |c_next| * |c_prev|, >= 0.
    pub weight: Vec<f64>,
}

/// Wrapped temporal phase deltas for every band of a pyramid pair.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseDelta {
    pub spec: PyramidSpec,
    pub width: usize,
    pub height: usize,
    pub bands: Vec<DeltaBand>,
}

impl PhaseDelta {
    pub fn band(&self, scale: usize, orientation: usize) -> &DeltaBand {
        &self.bands[scale * self.spec.orientations + orientation]
    }

    pub fn band_mut(&mut self, scale: usize, orientation: usize) -> &mut DeltaBand {
        &mut self.bands[scale * self.spec.orientations + orientation]
    }
}

/// Compute wrapped per-band phase deltas from `prev` to `next`.
///
/// The delta is taken from the conjugate product, never as a difference of
/// two arctangents, so it is exact modulo 2*pi by construction.
pub fn phase_delta(prev: &Pyramid, next: &Pyramid) -> Result<PhaseDelta> {
    // min_band is a construction-time constraint, not a structural property,
    // so pyramids read from dumps compare equal to freshly built ones.
    if prev.spec.scales != next.spec.scales
        || prev.spec.orientations != next.spec.orientations
        || (prev.width, prev.height) != (next.width, next.height)
    {
        return Err(Error::Structure(
            "phase_delta requires pyramids with identical specs and dims".into(),
        ));
    }
    let bands = prev
        .bands
        .iter()
        .zip(&next.bands)
        .map(|(a, b)| {
            let mut delta = Vec::with_capacity(a.coefficients.len());
            let mut weight = Vec::with_capacity(a.coefficients.len());
            for (ca, cb) in a.coefficients.iter().zip(&b.coefficients) {
                delta.push((cb * ca.conj()).arg());
                weight.push(cb.norm() * ca.norm());
            }
            DeltaBand {
                scale: a.scale,
                orientation: a.orientation,
                width: a.width,
                height: a.height,
                delta,
                weight,
            }
        })
        .collect();
    Ok(PhaseDelta {
        spec: prev.spec,
        width: prev.width,
        height: prev.height,
        bands,
    })
}

/// Smooth each band's deltas with an amplitude-weighted circular Gaussian of
/// standard deviation `sigma` (in that band's own grid units). The weighted
/// complex phasor is smoothed and re-argued, which is safe across the wrap
/// discontinuity; weights are smoothed alongside.
pub fn smooth_deltas(deltas: &mut PhaseDelta, sigma: f64) {
    if sigma <= 0.0 {
        return;
    }
    let half = (3.0 * sigma).ceil() as i64;
    let kernel: Vec<f64> = (-half..=half)
        .map(|i| (-(i * i) as f64 / (2.0 * sigma * sigma)).exp())
        .collect();
    let ksum: f64 = kernel.iter().sum();
    let kernel: Vec<f64> = kernel.iter().map(|v| v / ksum).collect();

    for band in &mut deltas.bands {
        let (w, h) = (band.width, band.height);
        let phasor: Vec<Complex64> = band
            .delta
            .iter()
            .zip(&band.weight)
            .map(|(&d, &a)| Complex64::from_polar(a, d))
            .collect();
        let blur = |src: &[Complex64]| -> Vec<Complex64> {
            // Separable circular convolution: rows then columns.
            let mut tmp = vec![Complex64::default(); w * h];
            for y in 0..h {
                for x in 0..w {
                    let mut acc = Complex64::default();
                    for (ki, &kv) in kernel.iter().enumerate() {
                        let dx = ki as i64 - half;
                        let sx = (x as i64 + dx).rem_euclid(w as i64) as usize;
                        acc += src[y * w + sx] * kv;
                    }
                    tmp[y * w + x] = acc;
                }
            }
            let mut out = vec![Complex64::default(); w * h];
            for y in 0..h {
                for x in 0..w {
                    let mut acc = Complex64::default();
                    for (ki, &kv) in kernel.iter().enumerate() {
                        let dy = ki as i64 - half;
                        let sy = (y as i64 + dy).rem_euclid(h as i64) as usize;
                        acc += tmp[sy * w + x] * kv;
                    }
                    out[y * w + x] = acc;
                }
            }
            out
        };
        let smoothed = blur(&phasor);
        for ((d, wt), s) in band
            .delta
            .iter_mut()
            .zip(band.weight.iter_mut())
            .zip(&smoothed)
        {
            *d = if s.norm() > 0.0 { s.arg() } else { 0.0 };
            *wt = s.norm();
        }
    }
}

/// Dense per-pixel flow with a validity flag.
#[derive(Debug, Clone, PartialEq)]
pub struct FlowField {
    pub width: usize,
    pub height: usize,
    pub u: Vec<f64>,
    pub v: Vec<f64>,
    pub valid: Vec<bool>,
}

impl FlowField {
    pub fn zeros(width: usize, height: usize) -> Self {
        Self {
            width,
            height,
            u: vec![0.0; width * height],
            v: vec![0.0; width * height],
            valid: vec![true; width * height],
        }
    }
}

/// Tunables for the per-pixel least-squares flow solve.
#[derive(Debug, Clone, Copy)]
pub struct FlowParams {
    /// Pixels whose total constraint weight falls below this fraction of the
    /// image maximum are marked invalid.
    pub eps_amp: f64,
    /// Condition-number ceiling for the 2x2 normal matrix.
    pub kappa_max: f64,
}

impl Default for FlowParams {
    fn default() -> Self {
        Self {
            eps_amp: 0.05,
            kappa_max: 1e4,
        }
    }
}

/// Recover dense flow from phase deltas.
///
/// Content moving by +d produces delta = wrap(-w.d), so the solver negates:
/// output flow means "pixels move by (u,v) from prev to next". Coarse-scale
/// deltas are spread to full resolution by nearest neighbor (interpolating
/// wrapped angles would be wrong). Degraded pixels are marked invalid and
/// carry zero flow; the solve never fails.
pub fn flow_from_phase(delta: &PhaseDelta, params: &FlowParams) -> FlowField {
    match FilterBank::new(&delta.spec, delta.width, delta.height) {
        Ok(bank) => flow_from_phase_with_bank(delta, &bank, params),
        // Degraded input (e.g. a dump whose dims cannot hold the spec):
        // report everything invalid rather than failing.
        Err(_) => {
            let mut flow = FlowField::zeros(delta.width, delta.height);
            flow.valid.fill(false);
            flow
        }
    }
}

/// As `flow_from_phase` but reusing a prebuilt bank for its band centroids.
pub fn flow_from_phase_with_bank(
    delta: &PhaseDelta,
    bank: &FilterBank,
    params: &FlowParams,
) -> FlowField {
    let (w, h) = (delta.width, delta.height);

    struct BandRef<'a> {
        band: &'a DeltaBand,
        wx: f64,
        wy: f64,
        shift: usize,
    }
    let bands: Vec<BandRef> = delta
        .bands
        .iter()
        .map(|band| {
            let (wx, wy) = bank
                .band_center_frequency(band.scale, band.orientation)
                .expect("band indices come from the pyramid layout");
            BandRef {
                band,
                wx,
                wy,
                shift: band.scale,
            }
        })
        .collect();

    // Per-pixel normal equations (a11, a12, a22, b1, b2, total weight),
    // rows in parallel.
    type NormalRow = Vec<(f64, f64, f64, f64, f64, f64)>;
    let rows: Vec<NormalRow> = (0..h)
        .into_par_iter()
        .map(|y| {
            let mut row = Vec::with_capacity(w);
            for x in 0..w {
                let (mut a11, mut a12, mut a22, mut b1, mut b2, mut tw) =
                    (0.0, 0.0, 0.0, 0.0, 0.0, 0.0);
                for br in &bands {
                    let bx = x >> br.shift;
                    let by = y >> br.shift;
                    let i = by * br.band.width + bx;
                    let wt = br.band.weight[i];
                    if wt <= 0.0 {
                        continue;
                    }
                    let d = br.band.delta[i];
                    a11 += wt * br.wx * br.wx;
                    a12 += wt * br.wx * br.wy;
                    a22 += wt * br.wy * br.wy;
                    b1 -= wt * br.wx * d;
                    b2 -= wt * br.wy * d;
                    tw += wt;
                }
                row.push((a11, a12, a22, b1, b2, tw));
            }
            row
        })
        .collect();

    let max_tw = rows
        .iter()
        .flat_map(|r| r.iter().map(|t| t.5))
        .fold(0.0, f64::max);
    let weight_floor = params.eps_amp * max_tw;

    let mut flow = FlowField::zeros(w, h);
    for (y, row) in rows.iter().enumerate() {
        for (x, &(a11, a12, a22, b1, b2, tw)) in row.iter().enumerate() {
            let i = y * w + x;
            let trace = a11 + a22;
            let disc = ((a11 - a22) * (a11 - a22) + 4.0 * a12 * a12).sqrt();
            let lmax = 0.5 * (trace + disc);
            let lmin = 0.5 * (trace - disc);
            let ok =
                tw >= weight_floor && tw > 0.0 && lmin > 0.0 && lmax / lmin <= params.kappa_max;
            if ok {
                let det = a11 * a22 - a12 * a12;
                flow.u[i] = (a22 * b1 - a12 * b2) / det;
                flow.v[i] = (a11 * b2 - a12 * b1) / det;
                flow.valid[i] = true;
            } else {
                flow.u[i] = 0.0;
                flow.v[i] = 0.0;
                flow.valid[i] = false;
            }
        }
    }
    flow
}
