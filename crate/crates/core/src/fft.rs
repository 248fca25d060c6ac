//! 2D FFT helpers on row-major complex buffers, built on rustfft.

use num_complex::Complex64;
use rustfft::{Fft, FftDirection, FftPlanner};
use std::sync::Arc;

fn plan(len: usize, direction: FftDirection) -> Arc<dyn Fft<f64>> {
    // Planner construction is cheap relative to the transforms at the sizes
    // this crate works with, so no cache is kept; this also keeps every call
    // free of shared mutable state.
    let mut planner = FftPlanner::new();
    planner.plan_fft(len, direction)
}

fn fft_2d_inplace(width: usize, height: usize, data: &mut [Complex64], direction: FftDirection) {
    assert_eq!(data.len(), width * height);
    let row_fft = plan(width, direction);
    let mut scratch = vec![Complex64::default(); row_fft.get_inplace_scratch_len()];
    for row in data.chunks_exact_mut(width) {
        row_fft.process_with_scratch(row, &mut scratch);
    }

    // Columns: transpose, transform rows, transpose back.
    let mut t = vec![Complex64::default(); width * height];
    transpose(width, height, data, &mut t);
    let col_fft = plan(height, direction);
    let mut scratch = vec![Complex64::default(); col_fft.get_inplace_scratch_len()];
    for row in t.chunks_exact_mut(height) {
        col_fft.process_with_scratch(row, &mut scratch);
    }
    transpose(height, width, &t, data);
}

fn transpose(width: usize, height: usize, src: &[Complex64], dst: &mut [Complex64]) {
    for y in 0..height {
        for x in 0..width {
            dst[x * height + y] = src[y * width + x];
        }
    }
}

/// Forward 2D DFT, unnormalized.
pub fn fft2(width: usize, height: usize, data: &mut [Complex64]) {
    fft_2d_inplace(width, height, data, FftDirection::Forward);
}

/// Inverse 2D DFT, normalized by 1/(width*height) so that ifft2(fft2(x)) == x.
pub fn ifft2(width: usize, height: usize, data: &mut [Complex64]) {
    fft_2d_inplace(width, height, data, FftDirection::Inverse);
    let scale = 1.0 / (width * height) as f64;
    for v in data.iter_mut() {
        *v *= scale;
    }
}

/// Forward 2D DFT of a real buffer into a fresh complex buffer.
pub fn fft2_real(width: usize, height: usize, data: &[f64]) -> Vec<Complex64> {
    let mut out: Vec<Complex64> = data.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    fft2(width, height, &mut out);
    out
}

/// Signed frequency index of DFT bin `i` for transform size `n`:
/// 0, 1, ..., n/2-ish, then negative. Matches the usual fftfreq layout.
#[inline]
pub fn signed_index(i: usize, n: usize) -> i64 {
    let i = i as i64;
    let n = n as i64;
    if i <= (n - 1) / 2 {
        i
    } else {
        i - n
    }
}

/// Angular frequency in radians/sample of DFT bin `i` for size `n`.
#[inline]
pub fn bin_frequency(i: usize, n: usize) -> f64 {
    2.0 * std::f64::consts::PI * signed_index(i, n) as f64 / n as f64
}
