//! Thread-local FFT plans and frequency-grid helpers.

use std::cell::RefCell;

use num_complex::Complex64;
use rustfft::FftPlanner;

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

/// In-place unnormalized forward transform, `X[k] = Σ x[n] e^{-2πikn/N}`.
pub fn forward(data: &mut [Complex64]) {
    if data.is_empty() {
        return;
    }
    let fft = PLANNER.with(|p| p.borrow_mut().plan_fft_forward(data.len()));
    fft.process(data);
}

/// In-place unnormalized inverse transform, `x[n] = Σ X[k] e^{2πikn/N}`.
pub fn inverse(data: &mut [Complex64]) {
    if data.is_empty() {
        return;
    }
    let fft = PLANNER.with(|p| p.borrow_mut().plan_fft_inverse(data.len()));
    fft.process(data);
}

/// Signed frequency index of bin `k` on an `n`-point grid.
pub fn signed_bin(k: usize, n: usize) -> i64 {
    if k < n.div_ceil(2) {
        k as i64
    } else {
        k as i64 - n as i64
    }
}

/// Storage index of signed bin `b` on an `n`-point grid.
pub fn bin_index(b: i64, n: usize) -> usize {
    b.rem_euclid(n as i64) as usize
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let orig: Vec<Complex64> = (0..12).map(|i| Complex64::new(i as f64, -(i as f64) / 3.0)).collect();
        let mut d = orig.clone();
        forward(&mut d);
        inverse(&mut d);
        for (a, b) in d.iter().zip(&orig) {
            assert!((a / 12.0 - b).norm() < 1e-12);
        }
    }

    #[test]
    fn signed_bins() {
        assert_eq!(signed_bin(0, 8), 0);
        assert_eq!(signed_bin(3, 8), 3);
        assert_eq!(signed_bin(4, 8), -4);
        assert_eq!(signed_bin(7, 8), -1);
        assert_eq!(signed_bin(2, 5), 2);
        assert_eq!(signed_bin(3, 5), -2);
        assert_eq!(bin_index(-1, 8), 7);
        assert_eq!(bin_index(3, 8), 3);
    }
}
