//! Small helpers for points on the unit circle.

use core::f64::consts::TAU;

use num_complex::Complex64;

/// Maps an angle into `[0, 2π)`.
pub fn normalize_angle(theta: f64) -> f64 {
    let t = theta % TAU;
    let t = if t < 0.0 { t + TAU } else { t };
    // `-tiny % TAU + TAU` rounds to TAU.
    if t >= TAU {
        0.0
    } else {
        t
    }
}

/// `exp(iθ)`.
pub fn unimodular(theta: f64) -> Complex64 {
    Complex64::new(libm::cos(theta), libm::sin(theta))
}

/// Chordal distance `|e^{ia} − e^{ib}| = 2|sin((a − b)/2)|`.
pub fn chordal_distance(a: f64, b: f64) -> f64 {
    2.0 * libm::fabs(libm::sin(0.5 * (a - b)))
}

/// `exp(2πik/n)`.
pub(crate) fn grid_point(k: usize, n: usize) -> Complex64 {
    unimodular(TAU * k as f64 / n as f64)
}

pub(crate) fn grid_angle(k: usize, n: usize) -> f64 {
    TAU * k as f64 / n as f64
}
