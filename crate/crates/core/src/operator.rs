//! The backward shift `S*f = (f − f(0))/z` on the kernel span.
//!
//! Each kernel is an eigenvector, `S* k_λ = (1/λ) k_λ`, so in kernel coordinates
//! `S*` is the diagonal matrix `diag(1/λ_j)`. Around it this module builds the
//! codimension-one subspaces `H_1 = {f(0) = 0}` and `H̃_1 = {(zf)_∞ = 0}`, the
//! unitary `U` that agrees with `S*` on `H_1`, the rank-one defect `R = S* − U`,
//! the resolvent and the spectral report.

use alloc::vec::Vec;
use core::f64::consts::TAU;

use nalgebra::{SymmetricEigen, QR};
use num_complex::Complex64;

use crate::carleson::{distance_to_set, CarlesonSet, NodeFamily};
use crate::hstar::{GramMatrix, KernelCoefficients};
use crate::unit::{chordal_distance, normalize_angle};
use crate::{CMatrix, CVector, Error, Result};

/// Rank tolerance (relative to the largest singular value) for the subspace
/// identities.
pub const RANK_TOLERANCE: f64 = 1e-10;
/// Residual tolerance for the subspace identities.
pub const LEMMA_TOLERANCE: f64 = 1e-10;
/// Resolvent admissibility margin around the eigenvalues.
pub const SPECTRUM_MARGIN: f64 = 1e-8;
/// Relative size below which a complement direction counts as degenerate.
pub const COMPLEMENT_FLOOR: f64 = 1e-8;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// `S*` restricted to the kernel span at a node family.
#[derive(Debug, Clone)]
pub struct TruncatedOperator {
    gram: GramMatrix,
    diagonal: CVector,
}

impl TruncatedOperator {
    pub fn nodes(&self) -> &NodeFamily {
        self.gram.nodes()
    }

    pub fn gram(&self) -> &GramMatrix {
        &self.gram
    }

    /// `(1/λ_j)`, the eigenvalues in node order.
    pub fn diagonal(&self) -> &CVector {
        &self.diagonal
    }

    pub fn dim(&self) -> usize {
        self.diagonal.len()
    }

    pub fn matrix(&self) -> CMatrix {
        CMatrix::from_diagonal(&self.diagonal)
    }

    /// Coefficientwise `c_j ↦ c_j/λ_j`.
    pub fn apply(&self, c: &CVector) -> CVector {
        c.component_mul(&self.diagonal)
    }

    /// The functional `c ↦ f(0) = −Σ c_j/λ_j` as a row of coefficients.
    fn zero_functional(&self) -> CVector {
        -self.diagonal.clone()
    }

    /// The functional `c ↦ (zf)_∞ = Σ c_j`.
    fn infinity_functional(&self) -> CVector {
        CVector::from_element(self.dim(), ONE)
    }
}

/// Pairs the diagonal action with the Gram matrix built over the same nodes.
pub fn build_truncation(nodes: &NodeFamily, gram: GramMatrix) -> Result<TruncatedOperator> {
    if nodes != gram.nodes() {
        return Err(Error::Mismatch("Gram matrix was built over different nodes".into()));
    }
    let diagonal = CVector::from_iterator(nodes.len(), nodes.nodes().iter().map(|l| l.inv()));
    Ok(TruncatedOperator { gram, diagonal })
}

/// Largest pointwise deviation between the coefficient image of `S*` and the
/// function-level definition `(f(ζ) − f(0))/ζ`, relative to `max(1, |·|)`.
pub fn eigen_relation_residual(op: &TruncatedOperator, f: &KernelCoefficients, points: &[Complex64]) -> Result<f64> {
    let image = KernelCoefficients::new(op.nodes().clone(), op.apply(f.coeffs()))?;
    let f0 = f.value_at_zero();
    let mut worst = 0.0f64;
    for &z in points {
        let direct = (f.evaluate(z)? - f0) / z;
        let diagonal = image.evaluate(z)?;
        worst = worst.max((direct - diagonal).norm() / direct.norm().max(1.0));
    }
    Ok(worst)
}

/// `|‖S*c‖_G / ‖c‖_G − 1|`.
pub fn isometry_defect(op: &TruncatedOperator, c: &CVector) -> Result<f64> {
    let before = op.gram.norm_of(c)?;
    let after = op.gram.norm_of(&op.apply(c))?;
    Ok((after / before - 1.0).abs())
}

/// Orthonormal bases (in coefficient space) of `H_1` and `H̃_1`.
#[derive(Debug, Clone, PartialEq)]
pub struct SubspacePair {
    /// `n × (n−1)`, columns span `{c : −Σ c_j/λ_j = 0}`.
    pub h1_basis: CMatrix,
    /// `n × (n−1)`, columns span `{c : Σ c_j = 0}`.
    pub h1tilde_basis: CMatrix,
}

/// Null-space bases of the two boundary functionals.
pub fn subspaces(op: &TruncatedOperator) -> Result<SubspacePair> {
    if op.dim() < 2 {
        return Err(Error::TrivialSubspace);
    }
    Ok(SubspacePair {
        h1_basis: null_space_of_functional(&op.zero_functional()),
        h1tilde_basis: null_space_of_functional(&op.infinity_functional()),
    })
}

/// Orthonormal basis of `{c : aᵀc = 0}` from the Householder reflector that maps
/// `conj(a)` onto the first axis; its remaining columns are orthogonal to
/// `conj(a)`.
fn null_space_of_functional(a: &CVector) -> CMatrix {
    let n = a.len();
    let v = a.map(|x| x.conj());
    let v_norm = v.norm();
    let phase = if v[0].norm() > 0.0 { v[0] / v[0].norm() } else { ONE };
    let mut u = v.clone();
    u[0] += phase * v_norm;
    let u_norm_sq = u.norm_squared();
    let mut basis = CMatrix::zeros(n, n - 1);
    for col in 1..n {
        // H e_col = e_col − 2 u (u_colᴴ)/‖u‖², with u_colᴴ = conj(u[col]).
        let scale = u[col].conj() * 2.0 / u_norm_sq;
        for row in 0..n {
            let identity = if row == col { ONE } else { ZERO };
            basis[(row, col - 1)] = identity - u[row] * scale;
        }
    }
    basis
}

/// Outcome of the finitary check `S* H_1 = H̃_1`.
#[derive(Debug, Clone, PartialEq)]
pub struct Lemma2Report {
    pub dimension: usize,
    /// `max |(z S* h)_∞|` over the `H_1` basis (inclusion direction).
    pub inclusion_residual: f64,
    /// For each `f` in the `H̃_1` basis, `g = (λ_j c_j)` must satisfy `g(0) = 0`
    /// and `S* g = f`; the largest violation.
    pub preimage_residual: f64,
    pub image_rank: usize,
    pub h1tilde_rank: usize,
    /// Basis columns whose image leaves `H̃_1`.
    pub offending_columns: Vec<usize>,
    pub passed: bool,
}

fn numerical_rank(m: &CMatrix, tolerance: f64) -> usize {
    let sv = m.clone().singular_values();
    let max = sv.iter().cloned().fold(0.0, f64::max);
    sv.iter().filter(|s| **s > tolerance * max).count()
}

pub fn verify_lemma2(op: &TruncatedOperator, spaces: &SubspacePair) -> Lemma2Report {
    let n = op.dim();
    let image = CMatrix::from_diagonal(&op.diagonal) * &spaces.h1_basis;
    let mut offending_columns = Vec::new();
    let mut inclusion_residual = 0.0f64;
    for (k, col) in image.column_iter().enumerate() {
        let r = col.iter().sum::<Complex64>().norm();
        if r > LEMMA_TOLERANCE {
            offending_columns.push(k);
        }
        inclusion_residual = inclusion_residual.max(r);
    }

    let nodes = CVector::from_column_slice(op.nodes().nodes());
    let mut preimage_residual = 0.0f64;
    for col in spaces.h1tilde_basis.column_iter() {
        let f = col.into_owned();
        let g = f.component_mul(&nodes);
        let g0 = crate::hstar::value_at_zero(op.nodes().nodes(), &g).norm();
        let back = (op.apply(&g) - &f).norm();
        preimage_residual = preimage_residual.max(g0).max(back);
    }

    let image_rank = numerical_rank(&image, RANK_TOLERANCE);
    let h1tilde_rank = numerical_rank(&spaces.h1tilde_basis, RANK_TOLERANCE);
    let passed = offending_columns.is_empty()
        && preimage_residual <= LEMMA_TOLERANCE
        && image_rank == n - 1
        && h1tilde_rank == n - 1;
    Lemma2Report {
        dimension: n,
        inclusion_residual,
        preimage_residual,
        image_rank,
        h1tilde_rank,
        offending_columns,
        passed,
    }
}

/// `S* = U + R` on the truncation.
#[derive(Debug, Clone)]
pub struct UnitaryDecomposition {
    unitary: CMatrix,
    /// `R c = u ⟨c, v⟩_G`.
    u: CVector,
    v: CVector,
    /// `a` with `R = u aᵀ`, i.e. `aᵀc = f(0)`.
    functional: CVector,
    alpha: Complex64,
    generator: KernelCoefficients,
    complement: CVector,
    image_complement: CVector,
}

impl UnitaryDecomposition {
    pub fn unitary(&self) -> &CMatrix {
        &self.unitary
    }

    pub fn alpha(&self) -> Complex64 {
        self.alpha
    }

    /// `g` with `g(0) = 1` spanning `H_2`.
    pub fn generator(&self) -> &KernelCoefficients {
        &self.generator
    }

    /// `(u, v)` with `R c = u ⟨c, v⟩_G`.
    pub fn rank_one_factors(&self) -> (&CVector, &CVector) {
        (&self.u, &self.v)
    }

    /// `R = u aᵀ` assembled from the factors.
    pub fn rank_one_matrix(&self) -> CMatrix {
        &self.u * self.functional.transpose()
    }

    /// The `G`-orthogonal complement of `H_1`, normalized by `g'(0) = 1`.
    pub fn complement(&self) -> &CVector {
        &self.complement
    }

    /// Unit-`G`-norm-scaled image direction, `G`-orthogonal to `S* H_1`.
    pub fn image_complement(&self) -> &CVector {
        &self.image_complement
    }

    /// `‖Uᴴ G U − G‖₂ / ‖G‖₂`.
    pub fn unitarity_defect(&self, gram: &GramMatrix) -> f64 {
        let g = gram.entries();
        let diff = self.unitary.adjoint() * g * &self.unitary - g;
        let diff = (&diff + diff.adjoint()) * Complex64::new(0.5, 0.0);
        let eig = SymmetricEigen::new(diff).eigenvalues;
        let worst = eig.iter().map(|x| x.abs()).fold(0.0, f64::max);
        worst / gram.max_eigenvalue()
    }

    /// `max ‖(S* − U) h‖` over the `H_1` basis columns.
    pub fn agreement_on_h1(&self, op: &TruncatedOperator, spaces: &SubspacePair) -> f64 {
        let defect = (op.matrix() - &self.unitary) * &spaces.h1_basis;
        defect.column_iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// Singular values of `G^{1/2} (S* − U) G^{−1/2}`, descending.
    pub fn framed_defect_singular_values(&self, op: &TruncatedOperator) -> Vec<f64> {
        let gram = op.gram();
        let framed = gram.sqrt() * (op.matrix() - &self.unitary) * gram.inv_sqrt();
        let mut sv: Vec<f64> = framed.singular_values().iter().cloned().collect();
        sv.sort_by(|a, b| b.total_cmp(a));
        sv
    }

    /// Number of framed singular values above `tolerance · σ_max`.
    pub fn defect_rank(&self, op: &TruncatedOperator, tolerance: f64) -> usize {
        let sv = self.framed_defect_singular_values(op);
        let max = sv.first().copied().unwrap_or(0.0);
        sv.iter().filter(|s| **s > tolerance * max).count()
    }
}

/// Unit vector orthogonal to the columns of `span`, seeded with `seed` and
/// cleaned by two rounds of projection. `None` when the seed lies numerically
/// inside the span.
fn orthogonal_complement(span: &CMatrix, seed: &CVector) -> Option<CVector> {
    let q = QR::new(span.clone()).q();
    let mut y = seed.clone();
    let seed_norm = seed.norm();
    for _ in 0..2 {
        let coeffs = q.adjoint() * &y;
        y -= &q * coeffs;
    }
    let y_norm = y.norm();
    if !(y_norm > COMPLEMENT_FLOOR * seed_norm) {
        return None;
    }
    Some(y / Complex64::new(y_norm, 0.0))
}

/// Builds `U` with `U = S*` on `H_1` and `U g' = α (‖g'‖_G/‖w‖_G) w`, where `g'`
/// is the `G`-orthogonal complement of `H_1` normalized by `g'(0) = 1` and `w`
/// spans the `G`-orthogonal complement of `S* H_1`.
///
/// The complements are computed in the frame `x = G^{1/2} c`, where the metric
/// is Euclidean. Since `c = h + f(0) g'` with `h ∈ H_1`,
/// `U c = S* c + f(0) (β w − S* g')`, which agrees with `S*` on `H_1` by
/// construction.
pub fn build_unitary(op: &TruncatedOperator, spaces: &SubspacePair, alpha: Complex64) -> Result<UnitaryDecomposition> {
    if (alpha.norm() - 1.0).abs() > 1e-12 {
        return Err(Error::InvalidInput(alloc::format!("|alpha| = {} != 1", alpha.norm())));
    }
    let n = op.dim();
    if n < 2 {
        return Err(Error::TrivialSubspace);
    }
    let gram = op.gram();
    let root = gram.sqrt();
    let inv_root = gram.inv_sqrt();
    let functional = op.zero_functional();
    let conj_functional = functional.map(|x| x.conj());

    // In the frame, the complement of G^{1/2} H_1 is spanned by G^{-1/2} conj(a).
    let framed_h1 = &root * &spaces.h1_basis;
    let y_g = orthogonal_complement(&framed_h1, &(&inv_root * &conj_functional))
        .ok_or(Error::DegenerateComplement(0.0))?;
    let mut complement = &inv_root * y_g;
    let scale = functional.dot(&complement);
    if scale.norm() == 0.0 {
        return Err(Error::DegenerateComplement(0.0));
    }
    complement /= scale;

    let framed_image = &root * op.matrix() * &spaces.h1_basis;
    let seed = &inv_root * op.infinity_functional();
    let y_w = orthogonal_complement(&framed_image, &seed).ok_or(Error::DegenerateComplement(0.0))?;
    let w = &inv_root * y_w;
    let w_norm = gram.norm_of(&w)?;
    if !(w_norm > COMPLEMENT_FLOOR) {
        return Err(Error::DegenerateComplement(w_norm));
    }
    let g_norm = gram.norm_of(&complement)?;
    let beta = alpha * (g_norm / w_norm);
    let image_complement = &w * beta;

    // U = S* + (β w − S* g') aᵀ, and R = S* − U = (S* g' − β w) aᵀ.
    let u = op.apply(&complement) - &image_complement;
    let unitary = op.matrix() - &u * functional.transpose();

    // R c = u ⟨c, v⟩_G requires G v = conj(a).
    let v = &inv_root * (&inv_root * &conj_functional);

    let first = op.nodes().nodes()[0];
    let mut generator = CVector::zeros(n);
    generator[0] = -first;
    let generator = KernelCoefficients::new(op.nodes().clone(), generator)?;

    Ok(UnitaryDecomposition {
        unitary,
        u,
        v,
        functional,
        alpha,
        generator,
        complement,
        image_complement,
    })
}

/// Solves `(S* − λ) f = g` coefficientwise: `f_j = c_j / (1/λ_j − λ)`.
pub fn resolve(op: &TruncatedOperator, lambda: Complex64, g: &KernelCoefficients) -> Result<KernelCoefficients> {
    if g.nodes() != op.nodes() {
        return Err(Error::Mismatch("right-hand side uses different nodes".into()));
    }
    let mut f = CVector::zeros(op.dim());
    for (j, (d, c)) in op.diagonal.iter().zip(g.coeffs().iter()).enumerate() {
        let gap = d - lambda;
        if gap.norm() <= SPECTRUM_MARGIN {
            return Err(Error::ResolventSingular {
                node: j,
                margin: gap.norm(),
            });
        }
        f[j] = c / gap;
    }
    KernelCoefficients::new(op.nodes().clone(), f)
}

/// The resolvent solution from the function-space formula
/// `f = (z g + f(0)) / (1 − λz)` with `f(0) = −c`, `c = μ g(μ)`, `μ = 1/λ`.
///
/// For `λ = 0` this is `f = z g − (zg)_∞`.
pub fn resolvent_by_formula(g: &KernelCoefficients, lambda: Complex64, z: Complex64) -> Result<Complex64> {
    let zg = z * g.evaluate(z)?;
    if lambda == ZERO {
        return Ok(zg - g.value_at_infinity());
    }
    let mu = lambda.inv();
    let c = mu * g.evaluate(mu)?;
    Ok((zg - c) / (ONE - lambda * z))
}

/// Agreement of the two resolvent routes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResolventCheck {
    pub max_relative_error: f64,
    pub points_used: usize,
    pub points_skipped: usize,
}

/// Compares [`resolve`] with [`resolvent_by_formula`] at `points`, skipping
/// points within `0.05` of `1/λ` (removable singularity) or of a node.
pub fn resolvent_cross_check(
    op: &TruncatedOperator,
    lambda: Complex64,
    g: &KernelCoefficients,
    points: &[Complex64],
) -> Result<ResolventCheck> {
    let f = resolve(op, lambda, g)?;
    let mu = if lambda == ZERO { None } else { Some(lambda.inv()) };
    let mut worst = 0.0f64;
    let mut used = 0;
    let mut skipped = 0;
    for &z in points {
        let near_mu = mu.is_some_and(|m| (z - m).norm() < 0.05);
        let near_node = op.nodes().nodes().iter().any(|l| (z - l).norm() < 0.05);
        if near_mu || near_node {
            skipped += 1;
            continue;
        }
        let a = f.evaluate(z)?;
        let b = resolvent_by_formula(g, lambda, z)?;
        let scale = a.norm().max(b.norm());
        if scale > 0.0 {
            worst = worst.max((a - b).norm() / scale);
        }
        used += 1;
    }
    Ok(ResolventCheck {
        max_relative_error: worst,
        points_used: used,
        points_skipped: skipped,
    })
}

/// Point spectrum of the truncation and its distance to `Ē`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumReport {
    pub generation: Option<u32>,
    /// `conj(λ_j)` in node order.
    pub eigenvalues: Vec<Complex64>,
    /// `max_j dist(conj λ_j, Ē)`; zero when every node lies in `E`.
    pub hausdorff_to_e: f64,
    /// `sup_{x ∈ Ē} min_j |x − conj λ_j|`, the covering distance.
    pub hausdorff_from_e: f64,
}

pub fn spectrum_report(op: &TruncatedOperator, set: &CarlesonSet) -> SpectrumReport {
    let eigenvalues: Vec<Complex64> = op.diagonal.iter().copied().collect();
    // Conjugation is an isometry of T, so distances are measured on E itself.
    let hausdorff_to_e = op
        .nodes()
        .nodes()
        .iter()
        .map(|&l| distance_to_set(l, set))
        .fold(0.0, f64::max);
    SpectrumReport {
        generation: op.nodes().generation(),
        eigenvalues,
        hausdorff_to_e,
        hausdorff_from_e: covering_distance(op.nodes().angles(), set),
    }
}

/// `sup_{x ∈ E} min_j |x − e^{iθ_j}|`.
///
/// Between consecutive nodes `a < b` the distance to the nearer node increases
/// up to the angular midpoint and decreases after it, so the supremum over
/// `E ∩ [a, b]` is attained at the midpoint when it lies in `E`, and otherwise at
/// an endpoint of the complementary arc containing the midpoint.
pub fn covering_distance(node_angles: &[f64], set: &CarlesonSet) -> f64 {
    let mut angles: Vec<f64> = node_angles.iter().map(|&a| normalize_angle(a)).collect();
    angles.sort_by(|a, b| a.total_cmp(b));
    let m = angles.len();
    let mut worst = 0.0f64;
    for k in 0..m {
        let a = angles[k];
        let b = if k + 1 < m { angles[k + 1] } else { angles[0] + TAU };
        if b - a <= 0.0 {
            continue;
        }
        let nearest = |x: f64| chordal_distance(x, a).min(chordal_distance(x, b));
        let mid = 0.5 * (a + b);
        let gap_best = match set.containing_arc(mid) {
            None => nearest(mid),
            Some(i) => {
                let arc = set.arcs()[i];
                // Unwrap the arc endpoints into the window [a, b].
                let mut s = arc.start;
                while s > mid {
                    s -= TAU;
                }
                while s + TAU <= mid {
                    s += TAU;
                }
                let e = s + TAU * arc.length;
                let mut best = 0.0f64;
                if s >= a {
                    best = best.max(nearest(s));
                }
                if e <= b {
                    best = best.max(nearest(e));
                }
                best
            }
        };
        worst = worst.max(gap_best);
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::carleson::{cantor_like_set, sample_nodes, Arc};
    use crate::hstar::gram_matrix;
    use crate::outer::{boundary_weight, outer_function};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::vec;

    fn cantor_operator(depth: u32, generation: u32, grid: usize) -> (CarlesonSet, TruncatedOperator) {
        let set = cantor_like_set(depth, 1.0 / 3.0, Arc::full_circle()).unwrap();
        let phi = outer_function(boundary_weight(&set, 2.0, grid).unwrap()).unwrap();
        let nodes = sample_nodes(&set, generation, usize::MAX).unwrap();
        let gram = gram_matrix(&nodes, &phi).unwrap();
        let op = build_truncation(&nodes, gram).unwrap();
        (set, op)
    }

    fn random_coeffs(rng: &mut ChaCha8Rng, n: usize) -> CVector {
        CVector::from_fn(n, |_, _| {
            Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
        })
    }

    fn identity_gram(angles: &[f64]) -> GramMatrix {
        let nodes = NodeFamily::from_angles(angles).unwrap();
        GramMatrix::from_entries(nodes.clone(), CMatrix::identity(nodes.len(), nodes.len())).unwrap()
    }

    #[test]
    fn diagonal_at_i() {
        let gram = identity_gram(&[core::f64::consts::FRAC_PI_2]);
        let op = build_truncation(&gram.nodes().clone(), gram).unwrap();
        assert!((op.diagonal()[0] - Complex64::new(0.0, -1.0)).norm() < 1e-15);
        let image = op.apply(&CVector::from_element(1, ONE));
        assert!((image[0] - Complex64::new(0.0, -1.0)).norm() < 1e-15);
    }

    #[test]
    fn mismatched_nodes_rejected() {
        let gram = identity_gram(&[0.1, 0.2]);
        let other = NodeFamily::from_angles(&[0.1, 0.3]).unwrap();
        assert!(matches!(build_truncation(&other, gram), Err(Error::Mismatch(_))));
    }

    #[test]
    fn diagonal_is_conjugate_and_unimodular() {
        let (_, op) = cantor_operator(5, 4, 1 << 12);
        for (d, l) in op.diagonal().iter().zip(op.nodes().nodes()) {
            assert!((d.norm() - 1.0).abs() < 1e-12);
            assert!((d - l.conj()).norm() < 1e-12);
        }
    }

    #[test]
    fn eigen_relation_on_boundary_grid() {
        let (_, op) = cantor_operator(6, 4, 1 << 12);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        // 10^4 points on T, offset from the nodes.
        let points: Vec<Complex64> = (0..10_000)
            .map(|k| crate::unimodular(TAU * (k as f64 + 0.5) / 10_000.0))
            .collect();
        for _ in 0..5 {
            let f = KernelCoefficients::new(op.nodes().clone(), random_coeffs(&mut rng, op.dim())).unwrap();
            assert!(eigen_relation_residual(&op, &f, &points).unwrap() < 1e-10);
        }
    }

    #[test]
    fn two_node_subspaces() {
        let gram = identity_gram(&[0.7, 2.9]);
        let op = build_truncation(&gram.nodes().clone(), gram).unwrap();
        let s = subspaces(&op).unwrap();
        let (l1, l2) = (op.nodes().nodes()[0], op.nodes().nodes()[1]);
        // H_1 is spanned by (λ_1, −λ_2), H̃_1 by (1, −1).
        let h = s.h1_basis.column(0);
        assert!((h[0] * l2 + h[1] * l1).norm() < 1e-15);
        let t = s.h1tilde_basis.column(0);
        assert!((t[0] + t[1]).norm() < 1e-15);
        // S*(λ_1, −λ_2) = (1, −1).
        let image = op.apply(&CVector::from_vec(vec![l1, -l2]));
        assert!((image[0] - ONE).norm() < 1e-15 && (image[1] + ONE).norm() < 1e-15);
    }

    #[test]
    fn subspace_bases_are_orthonormal_null_spaces() {
        let (_, op) = cantor_operator(6, 4, 1 << 12);
        let s = subspaces(&op).unwrap();
        let n = op.dim();
        for basis in [&s.h1_basis, &s.h1tilde_basis] {
            assert_eq!(basis.ncols(), n - 1);
            let gram = basis.adjoint() * basis;
            assert!((gram - CMatrix::identity(n - 1, n - 1)).norm() < 1e-13);
        }
        for col in s.h1_basis.column_iter() {
            assert!(crate::hstar::value_at_zero(op.nodes().nodes(), &col.into_owned()).norm() < 1e-12);
        }
        for col in s.h1tilde_basis.column_iter() {
            assert!(col.iter().sum::<Complex64>().norm() < 1e-12);
        }
        let single = identity_gram(&[1.0]);
        let op1 = build_truncation(&single.nodes().clone(), single).unwrap();
        assert!(matches!(subspaces(&op1), Err(Error::TrivialSubspace)));
    }

    #[test]
    fn lemma2_on_cantor_nodes() {
        let (_, op) = cantor_operator(4, 2, 1 << 12);
        assert_eq!(op.dim(), 6);
        let (_, op8) = cantor_operator(6, 3, 1 << 12);
        for op in [op, op8] {
            let s = subspaces(&op).unwrap();
            let r = verify_lemma2(&op, &s);
            assert!(r.passed, "{r:?}");
            assert_eq!(r.image_rank, op.dim() - 1);
        }
    }

    #[test]
    fn lemma2_preimage_formula() {
        let (_, op) = cantor_operator(5, 3, 1 << 12);
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let s = subspaces(&op).unwrap();
        let c = &s.h1tilde_basis * random_coeffs(&mut rng, op.dim() - 1);
        let nodes = CVector::from_column_slice(op.nodes().nodes());
        let g = c.component_mul(&nodes);
        assert!(crate::hstar::value_at_zero(op.nodes().nodes(), &g).norm() < 1e-13);
        assert!((op.apply(&g) - c).norm() < 1e-13);
    }

    #[test]
    fn isometric_on_h1_but_not_elsewhere() {
        let (_, op) = cantor_operator(6, 3, 1 << 13);
        let s = subspaces(&op).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..20 {
            let h = &s.h1_basis * random_coeffs(&mut rng, op.dim() - 1);
            assert!(isometry_defect(&op, &h).unwrap() < 1e-8);
            let c = random_coeffs(&mut rng, op.dim());
            assert!(isometry_defect(&op, &c).unwrap() > 1e-4);
        }
    }

    #[test]
    fn unitary_decomposition_structure() {
        let (_, op) = cantor_operator(7, 4, 1 << 14);
        let s = subspaces(&op).unwrap();
        let d = build_unitary(&op, &s, ONE).unwrap();
        assert!(d.unitarity_defect(op.gram()) < 1e-8, "{}", d.unitarity_defect(op.gram()));
        assert!(d.agreement_on_h1(&op, &s) < 1e-10);
        assert_eq!(d.defect_rank(&op, 1e-8), 1);
        assert!((d.generator().value_at_zero() - ONE).norm() < 1e-15);
        assert!((d.complement().dot(&-op.diagonal()) - ONE).norm() < 1e-12);

        // R = S* − U, and R c = u ⟨c, v⟩_G.
        let r = op.matrix() - d.unitary();
        assert!((&r - d.rank_one_matrix()).norm() < 1e-10 * r.norm());
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let c = random_coeffs(&mut rng, op.dim());
        let (u, v) = d.rank_one_factors();
        let via_factors = u * op.gram().inner(&c, v);
        assert!((&r * &c - via_factors).norm() < 1e-8 * (&r * &c).norm());

        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for _ in 0..10 {
            let h = &s.h1_basis * random_coeffs(&mut rng, op.dim() - 1);
            let uh = d.unitary() * &h;
            let (a, b) = (op.gram().norm_of(&uh).unwrap(), op.gram().norm_of(&h).unwrap());
            assert!((a / b - 1.0).abs() < 1e-8);
        }
    }

    #[test]
    fn alpha_only_moves_the_rank_one_part() {
        let (_, op) = cantor_operator(6, 3, 1 << 13);
        let s = subspaces(&op).unwrap();
        let d1 = build_unitary(&op, &s, ONE).unwrap();
        let d2 = build_unitary(&op, &s, Complex64::from_polar(1.0, 2.0)).unwrap();
        let on_h1 = (d1.unitary() * &s.h1_basis - d2.unitary() * &s.h1_basis).norm();
        assert!(on_h1 < 1e-10);
        assert!((d1.rank_one_matrix() - d2.rank_one_matrix()).norm() > 1e-3);
        assert!(d2.unitarity_defect(op.gram()) < 1e-8);
        assert!(build_unitary(&op, &s, Complex64::new(2.0, 0.0)).is_err());
    }

    #[test]
    fn resolvent_examples() {
        let (_, op) = cantor_operator(5, 3, 1 << 12);
        let n = op.dim();
        let two = Complex64::new(2.0, 0.0);
        let k0 = KernelCoefficients::kernel(op.nodes().clone(), 0);
        let f = resolve(&op, two, &k0).unwrap();
        let want = (op.nodes().nodes()[0].inv() - two).inv();
        assert!((f.coeffs()[0] - want).norm() < 1e-15);
        assert!(f.coeffs().iter().skip(1).all(|c| c.norm() == 0.0));

        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let g = KernelCoefficients::new(op.nodes().clone(), random_coeffs(&mut rng, n)).unwrap();
        let f0 = resolve(&op, ZERO, &g).unwrap();
        for j in 0..n {
            assert!((f0.coeffs()[j] - op.nodes().nodes()[j] * g.coeffs()[j]).norm() < 1e-15);
        }
        for lambda in [ZERO, two, Complex64::new(0.0, 3.0), Complex64::new(0.3, 0.2)] {
            let f = resolve(&op, lambda, &g).unwrap();
            let back = op.apply(f.coeffs()) - f.coeffs() * lambda;
            assert!((back - g.coeffs()).norm() < 1e-10);
        }
        let near = op.diagonal()[2] + Complex64::new(1e-9, 0.0);
        assert!(matches!(
            resolve(&op, near, &g),
            Err(Error::ResolventSingular { node: 2, .. })
        ));
    }

    #[test]
    fn resolvent_routes_agree() {
        let (_, op) = cantor_operator(5, 3, 1 << 12);
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let points: Vec<Complex64> = (0..100)
            .map(|_| Complex64::from_polar(rng.random_range(0.0..0.9), rng.random_range(0.0..TAU)))
            .collect();
        let g = KernelCoefficients::new(op.nodes().clone(), random_coeffs(&mut rng, op.dim())).unwrap();
        for lambda in [ZERO, Complex64::new(2.0, 0.0), Complex64::new(0.0, 3.0), Complex64::new(0.5, -0.25)] {
            let r = resolvent_cross_check(&op, lambda, &g, &points).unwrap();
            assert!(r.max_relative_error < 1e-8, "{lambda}: {r:?}");
            assert!(r.points_used >= 90);
        }
    }

    // Oracle: the surviving arcs of generation g, merged across angle 0, and
    // the half-chord 2 sin(π ℓ/2) of the longest one.
    fn largest_surviving_half_chord(set: &CarlesonSet, generation: u32) -> f64 {
        let mut removed: Vec<(f64, f64)> = set
            .arcs()
            .iter()
            .filter(|a| a.generation <= generation)
            .map(|a| (a.start / TAU, a.start / TAU + a.length))
            .collect();
        removed.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut longest = 0.0f64;
        for k in 0..removed.len() {
            let next = if k + 1 < removed.len() { removed[k + 1].0 } else { removed[0].0 + 1.0 };
            longest = longest.max(next - removed[k].1);
        }
        2.0 * libm::sin(core::f64::consts::PI * longest / 2.0)
    }

    #[test]
    fn spectrum_localization_and_covering() {
        let set = cantor_like_set(8, 1.0 / 3.0, Arc::full_circle()).unwrap();
        let phi = outer_function(boundary_weight(&set, 2.0, 1 << 16).unwrap()).unwrap();
        let mut prev = f64::INFINITY;
        for generation in 2..=6 {
            let nodes = sample_nodes(&set, generation, usize::MAX).unwrap();
            let op = build_truncation(&nodes, gram_matrix(&nodes, &phi).unwrap()).unwrap();
            let r = spectrum_report(&op, &set);
            assert_eq!(r.generation, Some(generation));
            for (e, l) in r.eigenvalues.iter().zip(nodes.nodes()) {
                assert!((e - l.conj()).norm() < 1e-15);
            }
            assert!(r.hausdorff_to_e <= 1e-12);
            let oracle = largest_surviving_half_chord(&set, generation);
            assert!((r.hausdorff_from_e - oracle).abs() <= 1e-6 * oracle);
            assert!(r.hausdorff_from_e < prev);
            prev = r.hausdorff_from_e;
        }
    }

    #[test]
    fn covering_distance_brute_force() {
        // Dense sampling of E against the exact gap formula.
        let set = cantor_like_set(5, 0.4, Arc::new(0.3, 0.8).unwrap()).unwrap();
        let nodes = sample_nodes(&set, 3, usize::MAX).unwrap();
        let exact = covering_distance(nodes.angles(), &set);
        let mut brute = 0.0f64;
        for k in 0..200_000 {
            let t = TAU * k as f64 / 200_000.0;
            if set.contains_angle(t) {
                let d = nodes
                    .angles()
                    .iter()
                    .map(|&a| chordal_distance(t, a))
                    .fold(f64::INFINITY, f64::min);
                brute = brute.max(d);
            }
        }
        assert!(brute <= exact + 1e-12);
        assert!(exact - brute < 1e-4);
    }
}
