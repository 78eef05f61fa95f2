//! Clark measures of inner functions.
//!
//! For `|α| = 1`, `Re((α + Θ)/(α − Θ))` is the Poisson integral of a positive
//! singular measure `μ_α`, written here with the factor `1/π`:
//! `Re((α + Θ(z))/(α − Θ(z))) = (1/π) ∫ (1 − |z|²)/|τ − z|² dμ_α(τ)`.
//! For a finite Blaschke product of degree `d`, `μ_α` has exactly `d` atoms at
//! the solutions of `Θ(τ) = α`, with masses `π/|Θ'(τ)|`. Dividing the masses by
//! `π` gives the convention with normalized Lebesgue measure.

use alloc::vec::Vec;
use core::f64::consts::{PI, TAU};

use num_complex::Complex64;

use crate::unit::{normalize_angle, unimodular};
use crate::{Error, Result};

/// Zeros must satisfy `|a| < 1 − ZERO_MARGIN`.
pub const ZERO_MARGIN: f64 = 1e-12;
/// Evaluation is refused this close to a singular point.
pub const SINGULAR_EXCLUSION: f64 = 1e-8;
/// Pass threshold for [`verify_herglotz`].
pub const HERGLOTZ_TOLERANCE: f64 = 1e-8;
/// Largest sample modulus accepted by [`verify_herglotz`].
pub const SAMPLE_LIMIT: f64 = 0.95;
/// Minimum phase-tracking grid.
pub const MIN_TRACKING_GRID: usize = 1 << 14;

const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// `front · Π_k b_{a_k}(z) · Π_j exp(−m_j (τ_j + z)/(τ_j − z))`.
#[derive(Debug, Clone, PartialEq)]
pub struct InnerFunction {
    zeros: Vec<Complex64>,
    front: Complex64,
    singular: Vec<(Complex64, f64)>,
}

impl InnerFunction {
    pub fn new(zeros: Vec<Complex64>, front: Complex64, singular: Vec<(Complex64, f64)>) -> Result<Self> {
        if let Some(a) = zeros.iter().find(|a| !(a.norm() < 1.0 - ZERO_MARGIN)) {
            return Err(Error::range("zero", alloc::format!("|{a}| is not below 1")));
        }
        if !((front.norm() - 1.0).abs() <= 1e-12) {
            return Err(Error::range("front", alloc::format!("|{front}| != 1")));
        }
        for (tau, mass) in &singular {
            if !((tau.norm() - 1.0).abs() <= 1e-12) || !(*mass >= 0.0) || !mass.is_finite() {
                return Err(Error::range(
                    "singular factor",
                    alloc::format!("point {tau}, mass {mass}"),
                ));
            }
        }
        Ok(InnerFunction { zeros, front, singular })
    }

    /// Finite Blaschke product with front 1.
    pub fn blaschke(zeros: Vec<Complex64>) -> Result<Self> {
        Self::new(zeros, ONE, Vec::new())
    }

    pub fn zeros(&self) -> &[Complex64] {
        &self.zeros
    }

    pub fn front(&self) -> Complex64 {
        self.front
    }

    pub fn singular_factors(&self) -> &[(Complex64, f64)] {
        &self.singular
    }

    pub fn degree(&self) -> usize {
        self.zeros.len()
    }

    pub fn is_finite_blaschke(&self) -> bool {
        self.singular.iter().all(|(_, m)| *m == 0.0)
    }

    /// `|Θ'(τ)| = Σ (1 − |a|²)/|τ − a|²` at a unimodular `τ` (finite Blaschke part).
    pub fn boundary_derivative_modulus(&self, tau: Complex64) -> f64 {
        self.zeros
            .iter()
            .map(|a| (1.0 - a.norm_sqr()) / (tau - a).norm_sqr())
            .sum()
    }
}

fn blaschke_factor(a: Complex64, z: Complex64) -> Complex64 {
    let r = a.norm();
    if r == 0.0 {
        z
    } else {
        (a.conj() / r) * (a - z) / (ONE - a.conj() * z)
    }
}

pub fn evaluate_inner(theta: &InnerFunction, z: Complex64) -> Result<Complex64> {
    let modulus = z.norm();
    if !(modulus <= 1.0 + 1e-12) {
        return Err(Error::OutOfDomain { modulus, limit: 1.0 });
    }
    let mut value = theta.front;
    for &a in &theta.zeros {
        value *= blaschke_factor(a, z);
    }
    for &(tau, mass) in &theta.singular {
        if mass == 0.0 {
            continue;
        }
        if (tau - z).norm() < SINGULAR_EXCLUSION {
            return Err(Error::InvalidInput(alloc::format!("{z} is at the singular point {tau}")));
        }
        value *= (-(tau + z) / (tau - z) * mass).exp();
    }
    Ok(value)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClarkAtom {
    pub tau: Complex64,
    pub mass: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClarkMeasure {
    pub alpha: Complex64,
    /// Sorted by `arg τ ∈ [0, 2π)`.
    pub atoms: Vec<ClarkAtom>,
    pub total_mass: f64,
}

/// `π · Re((α + Θ(0))/(α − Θ(0)))`, the total mass of `μ_α`.
pub fn expected_total_mass(theta: &InnerFunction, alpha: Complex64) -> Result<f64> {
    let b = evaluate_inner(theta, Complex64::new(0.0, 0.0))?;
    Ok(PI * ((alpha + b) / (alpha - b)).re)
}

fn tracking_grid(theta: &InnerFunction) -> usize {
    let steepest: f64 = theta.zeros.iter().map(|a| (1.0 + a.norm()) / (1.0 - a.norm())).sum();
    let wanted = libm::ceil(8.0 * steepest);
    if wanted >= (1u64 << 40) as f64 {
        return 1 << 40;
    }
    (wanted as usize).next_power_of_two().max(MIN_TRACKING_GRID)
}

fn principal(x: f64) -> f64 {
    let y = crate::normalize_angle(x);
    if y > PI {
        y - TAU
    } else {
        y
    }
}

/// Atoms of `μ_α` for a finite Blaschke product.
///
/// The boundary phase is sampled on a grid fine enough that each step advances
/// it by less than `π/4`, so every solution of `Θ(τ) = α` is bracketed by one
/// grid interval and then refined by bisection.
pub fn clark_measure(theta: &InnerFunction, alpha: Complex64) -> Result<ClarkMeasure> {
    if !theta.is_finite_blaschke() {
        return Err(Error::Unsupported("Clark atoms are computed for finite Blaschke products only".into()));
    }
    if !((alpha.norm() - 1.0).abs() <= 1e-12) {
        return Err(Error::range("alpha", alloc::format!("|{alpha}| != 1")));
    }
    let d = theta.degree();
    if d == 0 {
        return Err(Error::InsufficientData("constant inner function has no Clark atoms".into()));
    }
    let target = alpha.arg();
    // g(t) = arg(Θ(e^{it})/α) in (−π, π]; it rises through 0 at each root and
    // drops by 2π where the phase passes the antipode of α.
    let g = |t: f64| -> Result<f64> { Ok(principal(evaluate_inner(theta, unimodular(t))?.arg() - target)) };

    let m = tracking_grid(theta);
    let step = TAU / m as f64;
    let mut atoms = Vec::with_capacity(d);
    let mut g0 = g(0.0)?;
    for i in 0..m {
        let (t0, t1) = (i as f64 * step, (i + 1) as f64 * step);
        let g1 = g(t1)?;
        // Half-open [t0, t1) so a root at a grid point is counted once.
        if g0 <= 0.0 && g1 > 0.0 && g1 - g0 < PI {
            let (mut lo, mut hi) = (t0, t1);
            if g0 == 0.0 {
                hi = lo;
            }
            while 0.5 * (lo + hi) > lo && 0.5 * (lo + hi) < hi {
                let mid = 0.5 * (lo + hi);
                if g(mid)? <= 0.0 {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            let tau = unimodular(normalize_angle(0.5 * (lo + hi)));
            atoms.push(ClarkAtom {
                tau,
                mass: PI / theta.boundary_derivative_modulus(tau),
            });
        }
        g0 = g1;
    }
    if atoms.len() != d {
        return Err(Error::RootTracking {
            found: atoms.len(),
            expected: d,
        });
    }
    atoms.sort_by(|a, b| normalize_angle(a.tau.arg()).total_cmp(&normalize_angle(b.tau.arg())));
    let total_mass = atoms.iter().map(|a| a.mass).sum();
    Ok(ClarkMeasure {
        alpha,
        atoms,
        total_mass,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct HerglotzReport {
    pub max_relative_error: f64,
    pub points_used: usize,
    /// Indices of samples with `α − Θ(z)` numerically zero.
    pub skipped: Vec<usize>,
    pub passed: bool,
}

/// `(1/π) Σ w_k (1 − |z|²)/|τ_k − z|²`.
pub fn poisson_integral(measure: &ClarkMeasure, z: Complex64) -> f64 {
    let weight = 1.0 - z.norm_sqr();
    measure
        .atoms
        .iter()
        .map(|a| a.mass * weight / (a.tau - z).norm_sqr())
        .sum::<f64>()
        / PI
}

pub fn verify_herglotz(theta: &InnerFunction, measure: &ClarkMeasure, samples: &[Complex64]) -> Result<HerglotzReport> {
    if let Some(z) = samples.iter().find(|z| !(z.norm() <= SAMPLE_LIMIT)) {
        return Err(Error::range(
            "sample",
            alloc::format!("|{z}| exceeds {SAMPLE_LIMIT}"),
        ));
    }
    let alpha = measure.alpha;
    let mut worst = 0.0f64;
    let mut used = 0;
    let mut skipped = Vec::new();
    for (i, &z) in samples.iter().enumerate() {
        let v = evaluate_inner(theta, z)?;
        if (alpha - v).norm() < 1e-12 {
            skipped.push(i);
            continue;
        }
        let lhs = ((alpha + v) / (alpha - v)).re;
        let rhs = poisson_integral(measure, z);
        worst = worst.max((lhs - rhs).abs() / lhs.abs().max(1e-300));
        used += 1;
    }
    Ok(HerglotzReport {
        max_relative_error: worst,
        points_used: used,
        passed: worst <= HERGLOTZ_TOLERANCE,
        skipped,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClarkFamilyReport {
    /// The distinct alphas, in first-seen order.
    pub alphas: Vec<Complex64>,
    pub measures: Vec<ClarkMeasure>,
    pub duplicates_removed: usize,
    /// Every pair of atom sets alternates strictly around the circle.
    pub interlaced: bool,
}

fn strictly_interlaced(a: &[f64], b: &[f64]) -> bool {
    if a.len() != b.len() {
        return false;
    }
    let mut merged: Vec<(f64, bool)> = a.iter().map(|&t| (t, false)).chain(b.iter().map(|&t| (t, true))).collect();
    merged.sort_by(|x, y| x.0.total_cmp(&y.0));
    let alternating = merged.windows(2).all(|w| w[0].1 != w[1].1 && w[1].0 > w[0].0);
    let wraps = merged.first().map(|f| f.1) != merged.last().map(|l| l.1);
    alternating && wraps
}

pub fn clark_family_spectra(theta: &InnerFunction, alphas: &[Complex64]) -> Result<ClarkFamilyReport> {
    let mut distinct: Vec<Complex64> = Vec::new();
    for &a in alphas {
        if !distinct.iter().any(|d| (d - a).norm() <= 1e-12) {
            distinct.push(a);
        }
    }
    let measures = distinct
        .iter()
        .map(|&a| clark_measure(theta, a))
        .collect::<Result<Vec<_>>>()?;
    let angles: Vec<Vec<f64>> = measures
        .iter()
        .map(|m| m.atoms.iter().map(|a| normalize_angle(a.tau.arg())).collect())
        .collect();
    let interlaced = (0..angles.len()).all(|i| (i + 1..angles.len()).all(|j| strictly_interlaced(&angles[i], &angles[j])));
    Ok(ClarkFamilyReport {
        duplicates_removed: alphas.len() - distinct.len(),
        alphas: distinct,
        measures,
        interlaced,
    })
}
