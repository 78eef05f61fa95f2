//! The span `H_0` of Cauchy kernels `k_λ(z) = 1/(z − λ)`, `λ ∈ E`, with the norm
//! `‖f‖ = ‖fφ‖_{H²}`.
//!
//! An element `f = Σ c_j/(z − λ_j)` is stored by its coefficients. The metric is
//! the Gram matrix `G[j, k] = ⟨k_{λ_k}, k_{λ_j}⟩`, so `‖f‖² = cᴴ G c`, assembled
//! by trapezoidal quadrature on the weight grid.

use alloc::vec::Vec;

use nalgebra::SymmetricEigen;
use num_complex::Complex64;

use crate::carleson::{distance_to_set, CarlesonSet, NodeFamily, CHORD_TOLERANCE};
use crate::outer::{OuterFunction, WeightGrid};
use crate::unit::grid_point;
use crate::{CMatrix, CVector, Error, Result};

/// Relative eigenvalue floor: `G` is rejected when `λ_min <= 10 ε λ_max`.
pub const CONDITIONING_FLOOR: f64 = 10.0 * f64::EPSILON;
/// Minimal chordal distance from a node for [`KernelCoefficients::evaluate`].
pub const POLE_TOLERANCE: f64 = 1e-10;
/// Quadratic forms below `−NEGATIVE_FORM_TOLERANCE · ‖G‖ ‖c‖²` are corruption.
pub const NEGATIVE_FORM_TOLERANCE: f64 = 1e-10;
/// Slack allowed in the point-evaluation bound.
pub const EVALUATION_SLACK: f64 = 0.05;

/// Rows of the quadrature matrix assembled per block.
const QUADRATURE_BLOCK: usize = 4096;

/// `f = Σ_j c_j/(z − λ_j)`.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelCoefficients {
    nodes: NodeFamily,
    coeffs: CVector,
}

impl KernelCoefficients {
    pub fn new(nodes: NodeFamily, coeffs: CVector) -> Result<Self> {
        if coeffs.len() != nodes.len() {
            return Err(Error::Mismatch(alloc::format!(
                "{} coefficients for {} nodes",
                coeffs.len(),
                nodes.len()
            )));
        }
        Ok(KernelCoefficients { nodes, coeffs })
    }

    /// The kernel `k_{λ_j}` itself.
    pub fn kernel(nodes: NodeFamily, j: usize) -> Self {
        let mut coeffs = CVector::zeros(nodes.len());
        coeffs[j] = Complex64::new(1.0, 0.0);
        KernelCoefficients { nodes, coeffs }
    }

    pub fn nodes(&self) -> &NodeFamily {
        &self.nodes
    }

    pub fn coeffs(&self) -> &CVector {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> CVector {
        self.coeffs
    }

    /// `f(0) = −Σ c_j/λ_j`.
    pub fn value_at_zero(&self) -> Complex64 {
        value_at_zero(self.nodes.nodes(), &self.coeffs)
    }

    /// `(zf)_∞ = lim_{z→∞} z f(z) = Σ c_j`.
    pub fn value_at_infinity(&self) -> Complex64 {
        value_at_infinity(&self.coeffs)
    }

    /// `Σ c_j/(z − λ_j)` by direct rational evaluation.
    pub fn evaluate(&self, z: Complex64) -> Result<Complex64> {
        evaluate(self.nodes.nodes(), &self.coeffs, z)
    }
}

pub fn value_at_zero(nodes: &[Complex64], coeffs: &CVector) -> Complex64 {
    -nodes
        .iter()
        .zip(coeffs.iter())
        .map(|(l, c)| c / l)
        .sum::<Complex64>()
}

pub fn value_at_infinity(coeffs: &CVector) -> Complex64 {
    coeffs.iter().sum()
}

pub fn evaluate(nodes: &[Complex64], coeffs: &CVector, z: Complex64) -> Result<Complex64> {
    let mut sum = Complex64::new(0.0, 0.0);
    for (j, (l, c)) in nodes.iter().zip(coeffs.iter()).enumerate() {
        let gap = z - l;
        if gap.norm() <= POLE_TOLERANCE {
            return Err(Error::Pole(j));
        }
        sum += c / gap;
    }
    Ok(sum)
}

/// Hermitian positive-definite Gram matrix of the kernels at a node family,
/// with its eigendecomposition.
#[derive(Debug, Clone)]
pub struct GramMatrix {
    nodes: NodeFamily,
    entries: CMatrix,
    eigenvalues: Vec<f64>,
    eigenvectors: CMatrix,
    grid_size: usize,
}

impl GramMatrix {
    /// Quadrature assembly without the conditioning check.
    ///
    /// Grid points that coincide with a node contribute nothing: there the
    /// integrand `|φ|²/|ζ − λ|²` tends to 0 because `φ` vanishes on `E` faster
    /// than the kernel blows up.
    pub fn assemble(nodes: &NodeFamily, weight: &WeightGrid) -> Self {
        let n = nodes.len();
        let grid = weight.grid_size();
        let mut entries = CMatrix::zeros(n, n);
        let mut block = CMatrix::zeros(QUADRATURE_BLOCK.min(grid), n);
        let mut row0 = 0;
        while row0 < grid {
            let rows = QUADRATURE_BLOCK.min(grid - row0);
            if rows != block.nrows() {
                block = CMatrix::zeros(rows, n);
            }
            for r in 0..rows {
                let m = row0 + r;
                let zeta = grid_point(m, grid);
                let w = weight.modulus()[m];
                for (j, &lambda) in nodes.nodes().iter().enumerate() {
                    let gap = zeta - lambda;
                    block[(r, j)] = if gap.norm() <= CHORD_TOLERANCE {
                        Complex64::new(0.0, 0.0)
                    } else {
                        w / gap
                    };
                }
            }
            entries.gemm_ad(Complex64::new(1.0, 0.0), &block, &block, Complex64::new(1.0, 0.0));
            row0 += rows;
        }
        entries /= Complex64::new(grid as f64, 0.0);
        Self::from_entries_unchecked(nodes.clone(), entries, grid)
    }

    /// Wraps an explicit Hermitian matrix (symmetrized on entry).
    pub fn from_entries(nodes: NodeFamily, entries: CMatrix) -> Result<Self> {
        if entries.nrows() != nodes.len() || entries.ncols() != nodes.len() {
            return Err(Error::Mismatch(alloc::format!(
                "{}x{} Gram matrix for {} nodes",
                entries.nrows(),
                entries.ncols(),
                nodes.len()
            )));
        }
        Ok(Self::from_entries_unchecked(nodes, entries, 0))
    }

    fn from_entries_unchecked(nodes: NodeFamily, entries: CMatrix, grid_size: usize) -> Self {
        let entries = (&entries + entries.adjoint()) * Complex64::new(0.5, 0.0);
        let eigen = SymmetricEigen::new(entries.clone());
        // Sort ascending so eigenvalues[0] is the minimum.
        let mut order: Vec<usize> = (0..eigen.eigenvalues.len()).collect();
        order.sort_by(|&a, &b| eigen.eigenvalues[a].total_cmp(&eigen.eigenvalues[b]));
        let eigenvalues = order.iter().map(|&i| eigen.eigenvalues[i]).collect();
        let eigenvectors = CMatrix::from_fn(entries.nrows(), order.len(), |r, c| {
            eigen.eigenvectors[(r, order[c])]
        });
        GramMatrix {
            nodes,
            entries,
            eigenvalues,
            eigenvectors,
            grid_size,
        }
    }

    pub fn nodes(&self) -> &NodeFamily {
        &self.nodes
    }

    pub fn entries(&self) -> &CMatrix {
        &self.entries
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    /// Quadrature grid size, or 0 for matrices given explicitly.
    pub fn grid_size(&self) -> usize {
        self.grid_size
    }

    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues[0]
    }

    pub fn max_eigenvalue(&self) -> f64 {
        *self.eigenvalues.last().expect("Gram matrix is nonempty")
    }

    pub fn condition_number(&self) -> f64 {
        let min = self.min_eigenvalue();
        if min <= 0.0 {
            f64::INFINITY
        } else {
            self.max_eigenvalue() / min
        }
    }

    pub fn is_well_conditioned(&self) -> bool {
        self.min_eigenvalue() > CONDITIONING_FLOOR * self.max_eigenvalue()
    }

    fn spectral_function(&self, f: impl Fn(f64) -> f64) -> CMatrix {
        let scaled = CMatrix::from_fn(self.dim(), self.dim(), |r, c| {
            self.eigenvectors[(r, c)] * f(self.eigenvalues[c])
        });
        scaled * self.eigenvectors.adjoint()
    }

    /// Symmetric square root `G^{1/2}`.
    pub fn sqrt(&self) -> CMatrix {
        self.spectral_function(|l| libm::sqrt(l.max(0.0)))
    }

    /// `G^{-1/2}`; meaningful only when [`Self::is_well_conditioned`].
    pub fn inv_sqrt(&self) -> CMatrix {
        self.spectral_function(|l| 1.0 / libm::sqrt(l))
    }

    /// `⟨a, b⟩_G = bᴴ G a`.
    pub fn inner(&self, a: &CVector, b: &CVector) -> Complex64 {
        (b.adjoint() * &self.entries * a)[(0, 0)]
    }

    /// Raw quadratic form `cᴴ G c`.
    pub fn quadratic_form(&self, c: &CVector) -> f64 {
        self.inner(c, c).re
    }

    /// `sqrt(cᴴ G c)`, with small negative rounding clipped to 0.
    pub fn norm_of(&self, c: &CVector) -> Result<f64> {
        let q = self.quadratic_form(c);
        let scale = self.max_eigenvalue().abs() * c.norm_squared();
        if q < -NEGATIVE_FORM_TOLERANCE * scale {
            return Err(Error::MetricCorruption(q));
        }
        Ok(libm::sqrt(q.max(0.0)))
    }
}

/// Gram matrix of the kernels at `nodes` in the metric of `weight`, rejecting
/// numerically singular results.
pub fn gram_matrix(nodes: &NodeFamily, weight: &OuterFunction) -> Result<GramMatrix> {
    let gram = GramMatrix::assemble(nodes, weight.weight());
    if !gram.is_well_conditioned() {
        return Err(Error::IllConditioned {
            min_eigenvalue: gram.min_eigenvalue(),
            max_eigenvalue: gram.max_eigenvalue(),
            closest: nodes.closest_pair().unwrap_or((0, 0)),
        });
    }
    Ok(gram)
}

/// `‖f‖_{H_*} = sqrt(cᴴ G c)`.
pub fn norm(f: &KernelCoefficients, gram: &GramMatrix) -> Result<f64> {
    if f.nodes() != gram.nodes() {
        return Err(Error::Mismatch("coefficients and Gram matrix use different nodes".into()));
    }
    gram.norm_of(f.coeffs())
}

/// Both sides of the point-evaluation bound at `μ ∈ T ∖ E`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvaluationBound {
    /// `|f(μ)|`.
    pub value: f64,
    /// `‖f‖ / (√π ε δ)`.
    pub bound: f64,
    /// `dist(μ, E)/2`.
    pub epsilon: f64,
    /// Minimum of `w` over grid points within chordal distance `ε` of `μ`.
    pub delta: f64,
    /// `None` when `δ` could not be determined away from the clamp floor.
    pub holds: Option<bool>,
}

/// Checks `|f(μ)| <= (1 + slack) ‖f‖ / (√π ε δ)` with `ε = dist(μ, E)/2`.
pub fn evaluation_bound_check(
    f: &KernelCoefficients,
    mu: Complex64,
    gram: &GramMatrix,
    weight: &OuterFunction,
    set: &CarlesonSet,
) -> Result<EvaluationBound> {
    let dist = distance_to_set(mu, set);
    if dist <= 0.0 {
        return Err(Error::InvalidInput("evaluation point lies in E".into()));
    }
    evaluation_bound_with_epsilon(f, mu, 0.5 * dist, gram, weight)
}

/// [`evaluation_bound_check`] with an explicit radius `0 < ε <= dist(μ, E)/2`.
pub fn evaluation_bound_with_epsilon(
    f: &KernelCoefficients,
    mu: Complex64,
    epsilon: f64,
    gram: &GramMatrix,
    weight: &OuterFunction,
) -> Result<EvaluationBound> {
    let value = f.evaluate(mu)?.norm();
    let f_norm = norm(f, gram)?;
    let w = weight.weight();
    let n = w.grid_size();
    let mut delta = f64::INFINITY;
    let mut touches_floor = false;
    for k in 0..n {
        if (grid_point(k, n) - mu).norm() < epsilon {
            delta = delta.min(w.modulus()[k]);
            touches_floor |= w.is_clamped(k);
        }
    }
    if !delta.is_finite() || touches_floor {
        return Ok(EvaluationBound {
            value,
            bound: f64::NAN,
            epsilon,
            delta: if delta.is_finite() { delta } else { f64::NAN },
            holds: None,
        });
    }
    let bound = f_norm / (libm::sqrt(core::f64::consts::PI) * epsilon * delta);
    Ok(EvaluationBound {
        value,
        bound,
        epsilon,
        delta,
        holds: Some(value <= bound * (1.0 + EVALUATION_SLACK)),
    })
}
