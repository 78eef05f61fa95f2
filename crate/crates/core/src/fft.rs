//! In-place radix-2 FFT for power-of-two lengths.
//!
//! Only what the outer-function construction needs: a forward transform with
//! kernel `exp(−2πikn/N)` and the unnormalized inverse.

use alloc::vec::Vec;

use num_complex::Complex64;

use crate::unit::unimodular;

#[derive(Clone, Copy, PartialEq, Eq)]
pub(crate) enum Direction {
    Forward,
    Inverse,
}

pub(crate) fn transform(data: &mut [Complex64], direction: Direction) {
    let n = data.len();
    assert!(n.is_power_of_two(), "FFT length must be a power of two");
    if n < 2 {
        return;
    }

    let bits = n.trailing_zeros();
    for i in 0..n {
        let j = i.reverse_bits() >> (usize::BITS - bits);
        if j > i {
            data.swap(i, j);
        }
    }

    let sign = match direction {
        Direction::Forward => -1.0,
        Direction::Inverse => 1.0,
    };
    // Twiddles computed directly rather than by recurrence to keep them exact to
    // a few ulps at N = 2^22.
    let twiddles: Vec<Complex64> = (0..n / 2)
        .map(|k| unimodular(sign * core::f64::consts::TAU * k as f64 / n as f64))
        .collect();

    let mut len = 2;
    while len <= n {
        let half = len / 2;
        let stride = n / len;
        for chunk in data.chunks_exact_mut(len) {
            let (lo, hi) = chunk.split_at_mut(half);
            for (k, (a, b)) in lo.iter_mut().zip(hi.iter_mut()).enumerate() {
                let t = *b * twiddles[k * stride];
                *b = *a - t;
                *a += t;
            }
        }
        len <<= 1;
    }
}

/// Circular conjugate function (discrete Hilbert transform) of a real periodic
/// sequence: multiplies Fourier coefficient `n` by `−i·sign(n)`. The mean and the
/// Nyquist mode are dropped.
pub(crate) fn conjugate_function(samples: &[f64]) -> Vec<f64> {
    let n = samples.len();
    let mut spectrum: Vec<Complex64> = samples.iter().map(|&x| Complex64::new(x, 0.0)).collect();
    transform(&mut spectrum, Direction::Forward);
    let minus_i = Complex64::new(0.0, -1.0);
    for (k, c) in spectrum.iter_mut().enumerate() {
        *c = if k == 0 || 2 * k == n {
            Complex64::new(0.0, 0.0)
        } else if 2 * k < n {
            *c * minus_i
        } else {
            *c * -minus_i
        };
    }
    transform(&mut spectrum, Direction::Inverse);
    let scale = 1.0 / n as f64;
    spectrum.iter().map(|c| c.re * scale).collect()
}
