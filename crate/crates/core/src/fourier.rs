//! Small Fourier utilities: exact-phase roots of unity and DFT helpers.

use num_complex::Complex64;
use rustfft::FftPlanner;
use std::cell::RefCell;
use std::f64::consts::PI;

thread_local! {
    // plans for prime lengths are costly; reuse them per thread
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

/// `e^{2πi·num/den}` with the fraction reduced in integer arithmetic first,
/// so large numerators never lose phase accuracy.
pub fn root_of_unity(num: i128, den: i128) -> Complex64 {
    debug_assert!(den > 0);
    let r = num.rem_euclid(den);
    // fold into (-den/2, den/2] to keep the float argument small
    let r = if 2 * r > den { r - den } else { r };
    let x = 2.0 * PI * (r as f64) / (den as f64);
    Complex64::new(x.cos(), x.sin())
}

/// Forward DFT `F_k = Σ_j f_j e^{-2πijk/n}` by direct summation.
/// O(n²); kept as an oracle and for tiny sizes.
pub fn dft_direct(f: &[Complex64]) -> Vec<Complex64> {
    let n = f.len() as i128;
    (0..n)
        .map(|k| {
            f.iter()
                .enumerate()
                .map(|(j, &v)| v * root_of_unity(-(j as i128) * k, n))
                .sum()
        })
        .collect()
}

/// Forward DFT with the same sign convention as [`dft_direct`].
pub fn dft(f: &[Complex64]) -> Vec<Complex64> {
    let mut buf = f.to_vec();
    if buf.is_empty() {
        return buf;
    }
    let plan = PLANNER.with(|p| p.borrow_mut().plan_fft_forward(buf.len()));
    plan.process(&mut buf);
    buf
}

/// Unnormalised backward DFT `Σ_j f_j e^{+2πijk/n}`.
pub fn dft_backward(f: &[Complex64]) -> Vec<Complex64> {
    let mut buf = f.to_vec();
    if buf.is_empty() {
        return buf;
    }
    let plan = PLANNER.with(|p| p.borrow_mut().plan_fft_inverse(buf.len()));
    plan.process(&mut buf);
    buf
}

/// Signed index in `[-n/2, n/2)` for a DFT bin.
pub fn signed_index(k: usize, n: usize) -> i64 {
    if 2 * k >= n {
        k as i64 - n as i64
    } else {
        k as i64
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fft_matches_direct() {
        for n in [1usize, 2, 7, 12, 31, 64] {
            let f: Vec<Complex64> = (0..n)
                .map(|j| Complex64::new((j as f64 * 0.37).sin(), (j as f64 * 1.3).cos()))
                .collect();
            let a = dft(&f);
            let b = dft_direct(&f);
            for (x, y) in a.iter().zip(&b) {
                assert!((x - y).norm() < 1e-11, "n = {n}");
            }
        }
    }

    #[test]
    fn root_of_unity_reduces_large_numerators() {
        let z = root_of_unity(1_000_000_000_000_007, 1_000_000_000_000);
        let w = root_of_unity(7, 1_000_000_000_000);
        assert!((z - w).norm() < 1e-15);
        assert!((root_of_unity(1, 4) - Complex64::i()).norm() < 1e-15);
    }
}
