//! Iterative radix-2 FFT, enough for correlation and PAPR on codes up to a few
//! thousand chips.

use alloc::vec::Vec;
use num_complex::Complex64;

use crate::math;

/// In-place transform; `inverse` uses the positive exponent and does not
/// scale by `1/n`. Panics if the length is not a power of two.
pub fn fft_in_place(buf: &mut [Complex64], inverse: bool) {
    let n = buf.len();
    assert!(n.is_power_of_two(), "fft length {n} is not a power of two");
    if n < 2 {
        return;
    }
    let bits = n.trailing_zeros();
    for i in 0..n {
        let j = i.reverse_bits() >> (usize::BITS - bits);
        if j > i {
            buf.swap(i, j);
        }
    }
    let sign = if inverse { 1.0 } else { -1.0 };
    let mut len = 2;
    while len <= n {
        let ang = sign * 2.0 * core::f64::consts::PI / len as f64;
        let half = len / 2;
        let twiddles: Vec<Complex64> = (0..half)
            .map(|k| {
                let a = ang * k as f64;
                Complex64::new(math::cos(a), math::sin(a))
            })
            .collect();
        for start in (0..n).step_by(len) {
            for k in 0..half {
                let u = buf[start + k];
                let v = buf[start + k + half] * twiddles[k];
                buf[start + k] = u + v;
                buf[start + k + half] = u - v;
            }
        }
        len <<= 1;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn naive_dft(x: &[Complex64]) -> Vec<Complex64> {
        let n = x.len();
        (0..n)
            .map(|k| {
                x.iter().enumerate().fold(Complex64::new(0.0, 0.0), |acc, (t, v)| {
                    let a = -2.0 * core::f64::consts::PI * (k * t) as f64 / n as f64;
                    acc + v * Complex64::new(math::cos(a), math::sin(a))
                })
            })
            .collect()
    }

    #[test]
    fn matches_naive_dft() {
        let x: Vec<Complex64> = (0..16)
            .map(|i| Complex64::new((i as f64 * 0.7).sin(), (i as f64 * 1.3).cos()))
            .collect();
        let mut y = x.clone();
        fft_in_place(&mut y, false);
        for (a, b) in y.iter().zip(naive_dft(&x)) {
            assert!((a - b).norm() < 1e-9);
        }
    }

    #[test]
    fn inverse_round_trip() {
        let x = vec![Complex64::new(1.0, 0.0), Complex64::new(-1.0, 0.0), Complex64::new(1.0, 0.0), Complex64::new(1.0, 0.0)];
        let mut y = x.clone();
        fft_in_place(&mut y, false);
        fft_in_place(&mut y, true);
        for (a, b) in y.iter().zip(&x) {
            assert!((a / 4.0 - b).norm() < 1e-12);
        }
    }
}
