//! Internal FFT plumbing shared by the spectral operations.
//!
//! Conventions: row-major `[i_q][i_p]` layout, forward transforms are
//! unnormalized (`rustfft` default), signed mode index `m` lives in
//! `-n/2 ..= n/2-1` and carries angular wavenumber `2*pi*m / L`.

use num_complex::Complex64;
use rustfft::FftPlanner;
use std::cell::RefCell;
use std::collections::HashMap;
use std::sync::Arc;

thread_local! {
    static PLANS: RefCell<HashMap<(usize, bool), Arc<dyn rustfft::Fft<f64>>>> =
        RefCell::new(HashMap::new());
}

fn plan(len: usize, inverse: bool) -> Arc<dyn rustfft::Fft<f64>> {
    PLANS.with(|cache| {
        cache
            .borrow_mut()
            .entry((len, inverse))
            .or_insert_with(|| {
                let mut planner = FftPlanner::new();
                if inverse {
                    planner.plan_fft_inverse(len)
                } else {
                    planner.plan_fft_forward(len)
                }
            })
            .clone()
    })
}

/// Signed mode index for FFT bin `i` of a length-`n` transform.
#[inline]
pub fn signed_mode(i: usize, n: usize) -> i64 {
    if i < n / 2 {
        i as i64
    } else {
        i as i64 - n as i64
    }
}

/// FFT bin holding signed mode `m` of a length-`n` transform.
#[inline]
pub fn mode_bin(m: i64, n: usize) -> usize {
    m.rem_euclid(n as i64) as usize
}

pub fn fft_in_place(buf: &mut [Complex64], inverse: bool) {
    plan(buf.len(), inverse).process(buf);
}

/// Forward 2D DFT of a row-major `n_q x n_p` array, normalized by `1/(n_q*n_p)`
/// so the coefficients are plane-wave amplitudes.
pub fn fft2_forward(values: &[Complex64], n_q: usize, n_p: usize) -> Vec<Complex64> {
    let mut out = values.to_vec();
    // rows: transform along p
    for row in out.chunks_mut(n_p) {
        fft_in_place(row, false);
    }
    // columns: transform along q
    let mut col = vec![Complex64::default(); n_q];
    for j in 0..n_p {
        for i in 0..n_q {
            col[i] = out[i * n_p + j];
        }
        fft_in_place(&mut col, false);
        for i in 0..n_q {
            out[i * n_p + j] = col[i];
        }
    }
    let scale = 1.0 / (n_q * n_p) as f64;
    for v in &mut out {
        *v *= scale;
    }
    out
}

/// Inverse of [`fft2_forward`] (unnormalized inverse of the normalized forward).
pub fn fft2_inverse(modes: &[Complex64], n_q: usize, n_p: usize) -> Vec<Complex64> {
    let mut out = modes.to_vec();
    for row in out.chunks_mut(n_p) {
        fft_in_place(row, true);
    }
    let mut col = vec![Complex64::default(); n_q];
    for j in 0..n_p {
        for i in 0..n_q {
            col[i] = out[i * n_p + j];
        }
        fft_in_place(&mut col, true);
        for i in 0..n_q {
            out[i * n_p + j] = col[i];
        }
    }
    out
}

pub fn to_complex(values: &[f64]) -> Vec<Complex64> {
    values.iter().map(|&v| Complex64::new(v, 0.0)).collect()
}

pub fn real_part(values: &[Complex64]) -> Vec<f64> {
    values.iter().map(|v| v.re).collect()
}

pub fn max_imag(values: &[Complex64]) -> f64 {
    values.iter().fold(0.0f64, |m, v| m.max(v.im.abs()))
}

/// Upsample a length-`n` mode vector to `2n` bins, splitting the Nyquist
/// coefficient symmetrically so the trigonometric interpolant is real for
/// real input.
pub fn zero_pad_double(modes: &[Complex64]) -> Vec<Complex64> {
    let n = modes.len();
    let mut out = vec![Complex64::default(); 2 * n];
    for i in 0..n {
        let m = signed_mode(i, n);
        if m == -(n as i64) / 2 {
            let half = 0.5 * modes[i];
            out[mode_bin(m, 2 * n)] = half;
            out[mode_bin(-m, 2 * n)] = half;
        } else {
            out[mode_bin(m, 2 * n)] = modes[i];
        }
    }
    out
}
