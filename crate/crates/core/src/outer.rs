//! The weight `φ`: an outer function whose boundary modulus is `d^p`, where `d`
//! is the chordal distance to the Carleson set.
//!
//! Everything lives on the uniform grid `θ_k = 2πk/N`. The boundary phase is the
//! conjugate function of `log |φ|`, computed spectrally, and interior values come
//! from trapezoidal quadrature of the Herglotz integral
//! `φ(z) = exp((1/2π) ∫ (e^{iθ} + z)/(e^{iθ} − z) log w(θ) dθ)`.

use alloc::vec::Vec;

use num_complex::Complex64;

use crate::carleson::{distance_to_set_angle, CarlesonSet, NodeFamily};
use crate::fft::conjugate_function;
use crate::unit::{grid_angle, grid_point};
use crate::{Error, Result};

pub const MIN_GRID: usize = 256;
pub const MAX_GRID: usize = 1 << 22;
/// Largest `|z|` accepted by [`OuterFunction::evaluate_inside`].
pub const INTERIOR_LIMIT: f64 = 0.999;
/// Smallest mean of `log w` accepted as finite.
const LOG_MEAN_FLOOR: f64 = -700.0;

/// Samples of the boundary modulus `w(θ_k) = max(d(θ_k)^p, floor)`.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightGrid {
    modulus: Vec<f64>,
    exponent: f64,
    floor: f64,
}

impl WeightGrid {
    /// Wraps explicit samples. The length must be a power of two and every
    /// sample positive and finite.
    pub fn from_samples(modulus: Vec<f64>, exponent: f64, floor: f64) -> Result<Self> {
        let n = modulus.len();
        if n < 2 || !n.is_power_of_two() {
            return Err(Error::range("grid size", alloc::format!("{n} is not a power of two >= 2")));
        }
        if !(exponent >= 1.0 && exponent.is_finite()) {
            return Err(Error::range("exponent", alloc::format!("{exponent} < 1")));
        }
        if !(floor > 0.0 && floor.is_finite()) {
            return Err(Error::range("floor", alloc::format!("{floor}")));
        }
        if let Some((k, w)) = modulus
            .iter()
            .enumerate()
            .find(|(_, w)| !(w.is_finite() && **w > 0.0))
        {
            return Err(Error::Construction(alloc::format!(
                "weight sample {k} is {w}"
            )));
        }
        Ok(WeightGrid {
            modulus,
            exponent,
            floor,
        })
    }

    pub fn grid_size(&self) -> usize {
        self.modulus.len()
    }

    pub fn modulus(&self) -> &[f64] {
        &self.modulus
    }

    pub fn exponent(&self) -> f64 {
        self.exponent
    }

    pub fn floor(&self) -> f64 {
        self.floor
    }

    /// Whether sample `k` sits on the clamp floor.
    pub fn is_clamped(&self, k: usize) -> bool {
        self.modulus[k] <= self.floor
    }

    pub fn mean_log(&self) -> f64 {
        self.modulus.iter().map(|w| libm::log(*w)).sum::<f64>() / self.grid_size() as f64
    }
}

/// `w(θ_k) = max(d(θ_k)^p, (2π/N)^p)` on the `N`-point grid.
pub fn boundary_weight(set: &CarlesonSet, exponent: f64, grid_size: usize) -> Result<WeightGrid> {
    if !grid_size.is_power_of_two() || !(MIN_GRID..=MAX_GRID).contains(&grid_size) {
        return Err(Error::range(
            "grid size",
            alloc::format!("{grid_size} must be a power of two in [{MIN_GRID}, {MAX_GRID}]"),
        ));
    }
    if !(exponent >= 1.0 && exponent.is_finite()) {
        return Err(Error::range("exponent", alloc::format!("{exponent} < 1")));
    }
    if let Some(smallest) = set.smallest_arc() {
        if smallest < 4.0 / grid_size as f64 {
            let required = libm::ceil(4.0 / smallest) as usize;
            return Err(Error::Resolution {
                grid_size,
                arc_length: smallest,
                required_grid: required.next_power_of_two(),
            });
        }
    }
    let floor = libm::pow(core::f64::consts::TAU / grid_size as f64, exponent);
    let modulus = (0..grid_size)
        .map(|k| {
            let d = distance_to_set_angle(grid_angle(k, grid_size), set);
            libm::pow(d, exponent).max(floor)
        })
        .collect();
    WeightGrid::from_samples(modulus, exponent, floor)
}

/// Outer function with prescribed boundary modulus, sampled on the grid.
#[derive(Debug, Clone, PartialEq)]
pub struct OuterFunction {
    weight: WeightGrid,
    log_modulus: Vec<f64>,
    phase: Vec<f64>,
    value_at_zero: Complex64,
}

impl OuterFunction {
    pub fn weight(&self) -> &WeightGrid {
        &self.weight
    }

    /// `arg φ(e^{iθ_k})`.
    pub fn phase(&self) -> &[f64] {
        &self.phase
    }

    /// `φ(0) = exp(mean log w)`, real and positive.
    pub fn value_at_zero(&self) -> Complex64 {
        self.value_at_zero
    }

    pub fn grid_size(&self) -> usize {
        self.weight.grid_size()
    }

    /// Boundary value `φ(e^{iθ_k}) = w_k e^{i·phase_k}`.
    pub fn boundary_value(&self, k: usize) -> Complex64 {
        Complex64::from_polar(self.weight.modulus[k], self.phase[k])
    }

    /// Rebuilds an outer function from stored boundary samples, keeping them
    /// exactly as given.
    pub fn from_parts(weight: WeightGrid, phase: Vec<f64>, value_at_zero: Complex64) -> Result<Self> {
        if phase.len() != weight.grid_size() {
            return Err(Error::Mismatch(alloc::format!(
                "{} phase samples for a grid of {}",
                phase.len(),
                weight.grid_size()
            )));
        }
        let log_modulus = weight.modulus.iter().map(|w| libm::log(*w)).collect();
        Ok(OuterFunction {
            weight,
            log_modulus,
            phase,
            value_at_zero,
        })
    }

    /// Trapezoidal Herglotz integral for `|z| <= 0.999`. The relative error
    /// grows roughly like `((1 − |z|) N)^{-1}` as `z` approaches the circle.
    pub fn evaluate_inside(&self, z: Complex64) -> Result<Complex64> {
        let r = z.norm();
        if r > INTERIOR_LIMIT {
            return Err(Error::OutOfDomain {
                modulus: r,
                limit: INTERIOR_LIMIT,
            });
        }
        let n = self.grid_size();
        let sum: Complex64 = self
            .log_modulus
            .iter()
            .enumerate()
            .map(|(k, &lw)| {
                let zeta = grid_point(k, n);
                (zeta + z) / (zeta - z) * lw
            })
            .sum();
        Ok((sum / n as f64).exp())
    }
}

/// Builds `φ` from its boundary modulus.
pub fn outer_function(weight: WeightGrid) -> Result<OuterFunction> {
    let log_modulus: Vec<f64> = weight.modulus.iter().map(|w| libm::log(*w)).collect();
    if let Some(k) = log_modulus.iter().position(|l| !l.is_finite()) {
        return Err(Error::Construction(alloc::format!(
            "log weight is not finite at sample {k}"
        )));
    }
    let mean = log_modulus.iter().sum::<f64>() / log_modulus.len() as f64;
    if mean <= LOG_MEAN_FLOOR {
        return Err(Error::Construction(alloc::format!(
            "mean log weight {mean} is numerically -infinity"
        )));
    }
    let phase = conjugate_function(&log_modulus);
    Ok(OuterFunction {
        weight,
        log_modulus,
        phase,
        value_at_zero: Complex64::new(libm::exp(mean), 0.0),
    })
}

/// Result of [`boundedness_certificate`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundednessCertificate {
    /// `max_{k, j} w_k / |e^{iθ_k} − λ_j|`.
    pub supremum: f64,
    /// `2^{p−1}`.
    pub bound: f64,
    pub within_bound: bool,
}

/// Grid estimate of `sup |φ(z)/(z − λ)|` over `z ∈ T` and the nodes.
///
/// Clamped samples are skipped, except when every sample is clamped; zero
/// distances are always skipped.
pub fn boundedness_certificate(outer: &OuterFunction, nodes: &NodeFamily) -> Result<BoundednessCertificate> {
    let weight = outer.weight();
    let p = weight.exponent;
    if p < 2.0 {
        return Err(Error::CertificateRefused { exponent: p });
    }
    let n = weight.grid_size();
    let all_clamped = (0..n).all(|k| weight.is_clamped(k));
    let mut supremum = 0.0f64;
    for k in 0..n {
        if weight.is_clamped(k) && !all_clamped {
            continue;
        }
        let zeta = grid_point(k, n);
        for &lambda in nodes.nodes() {
            let dist = (zeta - lambda).norm();
            if dist > 0.0 {
                supremum = supremum.max(weight.modulus[k] / dist);
            }
        }
    }
    let bound = libm::pow(2.0, p - 1.0);
    Ok(BoundednessCertificate {
        supremum,
        bound,
        within_bound: supremum.is_finite() && supremum <= bound * (1.0 + 1e-12),
    })
}
