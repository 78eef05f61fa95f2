//! Finitary checks of the three hypotheses of Grivaux's criterion for the
//! truncated backward shift: unimodular distinct eigenvalues, a complete
//! eigenvector family, and approximability of each eigenvector by others.

use alloc::vec::Vec;

use num_complex::Complex64;

use crate::carleson::{closest_pair, least_squares, NodeFamily};
use crate::hstar::{GramMatrix, KernelCoefficients};
use crate::operator::TruncatedOperator;
use crate::unit::chordal_distance;
use crate::{CVector, Error, Result};

/// Allowed deviation of `|1/λ_j|` from 1.
pub const UNIMODULAR_TOLERANCE: f64 = 1e-12;
/// Eigenvalues closer than this (chordally) count as repeated.
pub const DISTINCT_TOLERANCE: f64 = 1e-12;
/// Upper limit on orbit iterations.
pub const MAX_ORBIT_STEPS: u64 = 1_000_000;
/// Torus radius (max over the support of `|d_j^n − 1|`) counted as a return.
pub const RETURN_RADIUS: f64 = 0.1;

#[derive(Debug, Clone, PartialEq)]
pub struct EigenvectorReport {
    /// `1/λ_j` in node order.
    pub eigenvalues: Vec<Complex64>,
    pub max_modulus_defect: f64,
    /// `max_j ‖T e_j − (1/λ_j) e_j‖`.
    pub max_action_residual: f64,
    /// Smallest chordal gap between eigenvalues and the pair attaining it.
    pub min_gap: f64,
    pub min_gap_pair: Option<(usize, usize)>,
    pub passed: bool,
}

/// Unimodularity and distinctness of a list of eigenvalues `1/λ_j`.
///
/// A repeated eigenvalue is an error naming the pair.
pub fn check_eigenvalues(eigenvalues: &[Complex64]) -> Result<EigenvectorReport> {
    if eigenvalues.is_empty() {
        return Err(Error::InsufficientData("no eigenvalues".into()));
    }
    let max_modulus_defect = eigenvalues.iter().map(|e| (e.norm() - 1.0).abs()).fold(0.0, f64::max);
    let angles: Vec<f64> = eigenvalues.iter().map(|e| e.arg()).collect();
    let (min_gap, min_gap_pair) = match closest_pair(&angles) {
        Some((i, j, d)) if d <= DISTINCT_TOLERANCE => return Err(Error::DuplicateNodes(i.min(j), i.max(j))),
        Some((i, j, d)) => (d, Some((i.min(j), i.max(j)))),
        None => (f64::INFINITY, None),
    };
    Ok(EigenvectorReport {
        eigenvalues: eigenvalues.to_vec(),
        max_modulus_defect,
        max_action_residual: 0.0,
        min_gap,
        min_gap_pair,
        passed: max_modulus_defect <= UNIMODULAR_TOLERANCE,
    })
}

pub fn check_eigenvectors(op: &TruncatedOperator) -> Result<EigenvectorReport> {
    let n = op.dim();
    let mut residual = 0.0f64;
    for j in 0..n {
        let mut e = CVector::zeros(n);
        e[j] = Complex64::new(1.0, 0.0);
        let mut image = op.apply(&e);
        image[j] -= op.diagonal()[j];
        residual = residual.max(image.norm());
    }
    let eigenvalues: Vec<Complex64> = op.diagonal().iter().copied().collect();
    let mut report = check_eigenvalues(&eigenvalues)?;
    report.max_action_residual = residual;
    report.passed &= residual == 0.0;
    Ok(report)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CompletenessReport {
    pub dimension: usize,
    pub min_eigenvalue: f64,
    pub max_eigenvalue: f64,
    pub condition_number: f64,
    /// The Gram matrix is below the conditioning floor.
    pub alarm: bool,
    /// Positive definite and above the conditioning floor.
    pub complete: bool,
}

pub fn check_completeness(gram: &GramMatrix) -> CompletenessReport {
    let alarm = !gram.is_well_conditioned();
    CompletenessReport {
        dimension: gram.dim(),
        min_eigenvalue: gram.min_eigenvalue(),
        max_eigenvalue: gram.max_eigenvalue(),
        condition_number: gram.condition_number(),
        alarm,
        complete: gram.min_eigenvalue() > 0.0 && !alarm,
    }
}

/// `‖k_{λ_i} − k_{λ_j}‖` from the Gram form.
pub fn kernel_gap(gram: &GramMatrix, i: usize, j: usize) -> f64 {
    if i == j {
        return 0.0;
    }
    let (i, j) = (i.min(j), i.max(j));
    let g = gram.entries();
    let sq = g[(i, i)].re - 2.0 * g[(i, j)].re + g[(j, j)].re;
    libm::sqrt(sq.max(0.0))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContinuityRow {
    pub n: usize,
    pub m: usize,
    pub chordal_gap: f64,
    pub kernel_gap: f64,
}

/// Nearest-partner kernel gaps with a power-law fit
/// `kernel_gap ≈ C · chordal_gap^β`.
#[derive(Debug, Clone, PartialEq)]
pub struct ContinuityTable {
    pub rows: Vec<ContinuityRow>,
    /// `(β, C)`; `None` when the rows have fewer than two distinct chordal gaps.
    pub modulus_fit: Option<(f64, f64)>,
}

impl ContinuityTable {
    /// Nearest-partner kernel gap of node `n`.
    pub fn gap_of(&self, n: usize) -> Option<f64> {
        self.rows.iter().find(|r| r.n == n).map(|r| r.kernel_gap)
    }
}

pub fn continuity_table(nodes: &NodeFamily, gram: &GramMatrix) -> Result<ContinuityTable> {
    let len = nodes.len();
    if len < 2 {
        return Err(Error::InsufficientData("continuity table needs two nodes".into()));
    }
    if nodes != gram.nodes() {
        return Err(Error::Mismatch("Gram matrix was built over different nodes".into()));
    }
    let angles = nodes.angles();
    let mut rows: Vec<ContinuityRow> = (0..len)
        .map(|n| {
            let (m, chordal_gap) = (0..len)
                .filter(|&m| m != n)
                .map(|m| (m, chordal_distance(angles[n], angles[m])))
                .min_by(|a, b| a.1.total_cmp(&b.1))
                .expect("at least two nodes");
            ContinuityRow {
                n,
                m,
                chordal_gap,
                kernel_gap: kernel_gap(gram, n, m),
            }
        })
        .collect();
    rows.sort_by(|a, b| b.chordal_gap.total_cmp(&a.chordal_gap).then(a.n.cmp(&b.n)));

    let points: Vec<(f64, f64)> = rows
        .iter()
        .filter(|r| r.kernel_gap > 0.0)
        .map(|r| (libm::log(r.chordal_gap), libm::log(r.kernel_gap)))
        .collect();
    let spread = points.iter().map(|p| p.0).fold(f64::NEG_INFINITY, f64::max)
        - points.iter().map(|p| p.0).fold(f64::INFINITY, f64::min);
    let modulus_fit = if points.len() >= 2 && spread > 1e-9 {
        let (beta, intercept) = least_squares(&points);
        Some((beta, libm::exp(intercept)))
    } else {
        None
    };
    Ok(ContinuityTable { rows, modulus_fit })
}

#[derive(Debug, Clone, PartialEq)]
pub struct EpsilonReport {
    pub epsilon: f64,
    pub passing: Vec<usize>,
    pub failing: Vec<usize>,
    pub all_pass: bool,
}

/// Nodes whose nearest-partner kernel gap is below `epsilon`.
pub fn epsilon_certificate(table: &ContinuityTable, epsilon: f64) -> Result<EpsilonReport> {
    if table.rows.is_empty() {
        return Err(Error::InsufficientData("empty continuity table".into()));
    }
    if !(epsilon >= 0.0) {
        return Err(Error::range("epsilon", alloc::format!("{epsilon} is not nonnegative")));
    }
    let mut passing = Vec::new();
    let mut failing = Vec::new();
    for r in &table.rows {
        if r.kernel_gap < epsilon {
            passing.push(r.n);
        } else {
            failing.push(r.n);
        }
    }
    passing.sort_unstable();
    failing.sort_unstable();
    Ok(EpsilonReport {
        epsilon,
        all_pass: failing.is_empty(),
        passing,
        failing,
    })
}

/// First generation (in the given order) whose table passes at `epsilon`.
pub fn minimal_passing_generation(tables: &[(u32, ContinuityTable)], epsilon: f64) -> Result<Option<u32>> {
    for (generation, table) in tables {
        if epsilon_certificate(table, epsilon)?.all_pass {
            return Ok(Some(*generation));
        }
    }
    Ok(None)
}

/// Finite-step orbit statistics. Never evidence of hypercyclicity.
#[derive(Debug, Clone, PartialEq)]
pub struct OrbitReport {
    pub heuristic: bool,
    pub steps: u64,
    /// `min_{0 ≤ n ≤ steps} ‖Tⁿ f − t‖_G` per target.
    pub min_distances: Vec<f64>,
    /// The first `n` attaining each minimum.
    pub argmin_steps: Vec<u64>,
    /// Steps `n ≥ 1` at which every eigenphase on the support of `f` is within
    /// [`RETURN_RADIUS`] of 1.
    pub return_count: u64,
    pub first_return: Option<u64>,
}

pub fn orbit_diagnostics(
    op: &TruncatedOperator,
    start: &KernelCoefficients,
    steps: u64,
    targets: &[KernelCoefficients],
) -> Result<OrbitReport> {
    if steps > MAX_ORBIT_STEPS {
        return Err(Error::range("steps", alloc::format!("{steps} exceeds {MAX_ORBIT_STEPS}")));
    }
    let nodes = op.nodes();
    if start.nodes() != nodes || targets.iter().any(|t| t.nodes() != nodes) {
        return Err(Error::Mismatch("orbit vectors use different nodes".into()));
    }
    let n = op.dim();
    let root = op.gram().sqrt();
    let framed_targets: Vec<CVector> = targets.iter().map(|t| &root * t.coeffs()).collect();
    // T^k acts by e^{−ikθ_j}.
    let phases: Vec<f64> = nodes.angles().iter().map(|a| -a).collect();
    let support: Vec<usize> = (0..n).filter(|&j| start.coeffs()[j].norm() > 0.0).collect();

    let mut min_distances = alloc::vec![f64::INFINITY; targets.len()];
    let mut argmin_steps = alloc::vec![0u64; targets.len()];
    let mut return_count = 0;
    let mut first_return = None;
    let mut iterate = CVector::zeros(n);
    for step in 0..=steps {
        let k = step as f64;
        for j in 0..n {
            iterate[j] = start.coeffs()[j] * crate::unit::unimodular(k * phases[j]);
        }
        let framed = &root * &iterate;
        for (t, target) in framed_targets.iter().enumerate() {
            let d = (&framed - target).norm();
            if d < min_distances[t] {
                min_distances[t] = d;
                argmin_steps[t] = step;
            }
        }
        if step > 0 && !support.is_empty() {
            let radius = support
                .iter()
                .map(|&j| (crate::unit::unimodular(k * phases[j]) - Complex64::new(1.0, 0.0)).norm())
                .fold(0.0, f64::max);
            if radius < RETURN_RADIUS {
                return_count += 1;
                first_return.get_or_insert(step);
            }
        }
    }
    Ok(OrbitReport {
        heuristic: true,
        steps,
        min_distances,
        argmin_steps,
        return_count,
        first_return,
    })
}
