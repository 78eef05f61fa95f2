//! Acceptance run: one PASS/FAIL line per criterion, nonzero exit on failure.

use std::f64::consts::{PI, TAU};
use std::process::ExitCode;
use std::time::Instant;

use hypercyclic_core::carleson::{cantor_like_set, carleson_margin, distance_to_set, sample_nodes, Arc, CarlesonSet, NodeFamily};
use hypercyclic_core::clark::{clark_measure, evaluate_inner, expected_total_mass, verify_herglotz, InnerFunction};
use hypercyclic_core::grivaux::{continuity_table, kernel_gap, minimal_passing_generation};
use hypercyclic_core::hstar::{evaluation_bound_check, gram_matrix, GramMatrix, KernelCoefficients};
use hypercyclic_core::operator::{
    build_truncation, build_unitary, eigen_relation_residual, isometry_defect, resolvent_cross_check, spectrum_report,
    subspaces, verify_lemma2, TruncatedOperator,
};
use hypercyclic_core::outer::{boundary_weight, outer_function, OuterFunction};
use hypercyclic_core::{unimodular, CVector, Complex64};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const GRID: usize = 1 << 16;
const DEPTH: u32 = 8;

struct Setup {
    set: CarlesonSet,
    phi: OuterFunction,
}

impl Setup {
    fn new() -> Self {
        let set = cantor_like_set(DEPTH, 1.0 / 3.0, Arc::full_circle()).unwrap();
        let phi = outer_function(boundary_weight(&set, 2.0, GRID).unwrap()).unwrap();
        Setup { set, phi }
    }

    fn nodes(&self, generation: u32) -> NodeFamily {
        sample_nodes(&self.set, generation, usize::MAX).unwrap()
    }

    /// Conditioned Gram for the operator checks that need `G^{-1/2}`.
    fn operator(&self, generation: u32) -> Result<TruncatedOperator, String> {
        let nodes = self.nodes(generation);
        let gram = gram_matrix(&nodes, &self.phi).map_err(|e| format!("generation {generation}: {e}"))?;
        build_truncation(&nodes, gram).map_err(|e| e.to_string())
    }

    /// Unchecked Gram for checks that only read entries or the diagonal action.
    fn raw_operator(&self, generation: u32) -> TruncatedOperator {
        let nodes = self.nodes(generation);
        let gram = GramMatrix::assemble(&nodes, self.phi.weight());
        build_truncation(&nodes, gram).unwrap()
    }
}

fn random_coeffs(rng: &mut ChaCha8Rng, n: usize) -> CVector {
    CVector::from_fn(n, |_, _| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
}

fn random_disk_point(rng: &mut ChaCha8Rng, radius: f64) -> Complex64 {
    Complex64::from_polar(radius * rng.random_range(0.0f64..1.0).sqrt(), rng.random_range(0.0..TAU))
}

type Outcome = Result<String, String>;

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn eigen_relation(s: &Setup) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let points: Vec<Complex64> = (0..10_000).map(|k| unimodular(TAU * (k as f64 + 0.5) / 10_000.0)).collect();
    let mut worst = 0.0f64;
    for generation in 1..=6 {
        let op = s.raw_operator(generation);
        for _ in 0..3 {
            let f = KernelCoefficients::new(op.nodes().clone(), random_coeffs(&mut rng, op.dim())).unwrap();
            worst = worst.max(eigen_relation_residual(&op, &f, &points).map_err(|e| e.to_string())?);
        }
    }
    check(worst <= 1e-10, format!("max pointwise residual {worst:.3e} (generations 1-6, 10^4 points)"))
}

fn isometry(s: &Setup) -> Outcome {
    let op = s.operator(5)?;
    let spaces = subspaces(&op).map_err(|e| e.to_string())?;
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let h = &spaces.h1_basis * random_coeffs(&mut rng, op.dim() - 1);
        worst = worst.max(isometry_defect(&op, &h).map_err(|e| e.to_string())?);
    }
    check(worst <= 1e-8, format!("max |‖S*f‖/‖f‖ − 1| = {worst:.3e} over 100 f in H_1, n = {}", op.dim()))
}

fn shift_image(s: &Setup) -> Outcome {
    let mut details = Vec::new();
    let mut ok = true;
    for generation in 2..=5 {
        let op = s.operator(generation)?;
        let r = verify_lemma2(&op, &subspaces(&op).map_err(|e| e.to_string())?);
        ok &= r.passed;
        details.push(format!(
            "n={} ranks {}/{} incl {:.1e} pre {:.1e}",
            r.dimension, r.image_rank, r.h1tilde_rank, r.inclusion_residual, r.preimage_residual
        ));
    }
    check(ok, details.join("; "))
}

fn unitary_rank_one(s: &Setup) -> Outcome {
    let mut details = Vec::new();
    let mut ok = true;
    for generation in 2..=5 {
        let op = s.operator(generation)?;
        let spaces = subspaces(&op).map_err(|e| e.to_string())?;
        let d = build_unitary(&op, &spaces, Complex64::new(1.0, 0.0)).map_err(|e| e.to_string())?;
        let defect = d.unitarity_defect(op.gram());
        let rank = d.defect_rank(&op, 1e-8);
        ok &= defect <= 1e-8 && rank == 1;
        details.push(format!("n={} defect {defect:.2e} rank {rank}", op.dim()));
    }
    check(ok, details.join("; "))
}

/// Half-chord of the longest arc of T left after removing the generation ≤ g arcs.
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
    2.0 * (PI * longest / 2.0).sin()
}

fn spectrum(s: &Setup) -> Outcome {
    let mut ok = true;
    let mut previous = f64::INFINITY;
    let mut values = Vec::new();
    for generation in 2..=6 {
        let op = s.raw_operator(generation);
        let r = spectrum_report(&op, &s.set);
        let in_e = r.eigenvalues.iter().all(|e| distance_to_set(*e, &s.set) <= 1e-12) && r.hausdorff_to_e <= 1e-12;
        let oracle = largest_surviving_half_chord(&s.set, generation);
        ok &= in_e && r.hausdorff_from_e < previous && (r.hausdorff_from_e - oracle).abs() <= 1e-6 * oracle;
        previous = r.hausdorff_from_e;
        values.push(format!("{:.6}", r.hausdorff_from_e));
    }
    check(ok, format!("covering distances {}", values.join(" > ")))
}

fn kernel_continuity(s: &Setup) -> Outcome {
    let mut tables = Vec::new();
    let mut ok = true;
    let mut previous: Option<(usize, Vec<f64>)> = None;
    for generation in 2..=6 {
        let op = s.raw_operator(generation);
        let gram = op.gram();
        let t = continuity_table(op.nodes(), gram).map_err(|e| e.to_string())?;
        ok &= t.rows.iter().all(|r| r.kernel_gap > 0.0);
        ok &= t.rows.iter().all(|r| kernel_gap(gram, r.n, r.m) == kernel_gap(gram, r.m, r.n));
        let gaps: Vec<f64> = (0..op.dim()).map(|n| t.gap_of(n).unwrap()).collect();
        if let Some((len, old)) = &previous {
            ok &= (0..*len).all(|n| gaps[n] <= old[n] * (1.0 + 1e-9));
        }
        previous = Some((op.dim(), gaps));
        tables.push((generation, t));
    }
    let first = minimal_passing_generation(&tables, 0.1).map_err(|e| e.to_string())?;
    ok &= first.is_some();
    check(ok, format!("positive, symmetric, nonincreasing; eps = 0.1 first passes at generation {first:?}"))
}

fn resolvent(s: &Setup) -> Outcome {
    let op = s.operator(5)?;
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let g = KernelCoefficients::new(op.nodes().clone(), random_coeffs(&mut rng, op.dim())).unwrap();
    let mut worst = 0.0f64;
    for lambda in [Complex64::new(0.0, 0.0), Complex64::new(2.0, 0.0), Complex64::new(0.0, 3.0)] {
        let mu = if lambda.norm() > 0.0 { Some(lambda.inv()) } else { None };
        let mut points = Vec::new();
        while points.len() < 100 {
            let z = random_disk_point(&mut rng, 0.9);
            if mu.is_none_or(|m| (z - m).norm() >= 0.05) {
                points.push(z);
            }
        }
        let r = resolvent_cross_check(&op, lambda, &g, &points).map_err(|e| e.to_string())?;
        if r.points_used != 100 {
            return Err(format!("only {} points usable at λ = {lambda}", r.points_used));
        }
        worst = worst.max(r.max_relative_error);
    }
    check(worst <= 1e-8, format!("max relative disagreement {worst:.3e} for λ in {{0, 2, 3i}}"))
}

fn closed_forms() -> Outcome {
    let point = CarlesonSet::single_point(0.0);
    let phi = outer_function(boundary_weight(&point, 2.0, GRID).unwrap()).unwrap();
    let nodes = NodeFamily::from_angles(&[0.0]).unwrap();
    let g = gram_matrix(&nodes, &phi).map_err(|e| e.to_string())?.entries()[(0, 0)].re;
    let modulus = phi.weight().modulus();
    let phi_sq = modulus.iter().map(|w| w * w).sum::<f64>() / modulus.len() as f64;

    let sets: Vec<CarlesonSet> = (0..=12).map(|d| cantor_like_set(d, 1.0 / 3.0, Arc::full_circle()).unwrap()).collect();
    let margin = carleson_margin(&sets).map_err(|e| e.to_string())?;
    let limit = 3.0 * 3.0f64.ln();
    let sums = &margin.partial_sums;
    let approaching = sums.windows(2).all(|w| w[1] > w[0]) && sums.iter().all(|s| *s < limit);
    // Increment at depth j is (1/2)(2/3)^j · j log 3, so consecutive ratios are (2/3)(j + 1)/j.
    let ratios_match = margin
        .increment_ratios
        .iter()
        .enumerate()
        .all(|(k, r)| (r - 2.0 / 3.0 * (k + 2) as f64 / (k + 1) as f64).abs() <= 1e-9);
    let ok = (g - 2.0).abs() <= 2e-6 && (phi_sq - 6.0).abs() <= 6e-6 && approaching && ratios_match && margin.carleson_consistent;
    check(
        ok,
        format!(
            "G = {g:.9}, ‖φ‖² = {phi_sq:.9}, entropy at depth 12 = {:.6} (limit {limit:.6}), ratios match: {ratios_match}",
            sums.last().unwrap()
        ),
    )
}

fn clark() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let zero = Complex64::new(0.0, 0.0);
    let random: Vec<Complex64> = (0..5).map(|_| random_disk_point(&mut rng, 0.9)).collect();
    let cases = [
        (InnerFunction::blaschke(vec![zero]).unwrap(), Complex64::new(1.0, 0.0)),
        (InnerFunction::blaschke(vec![zero; 2]).unwrap(), Complex64::new(-1.0, 0.0)),
        (InnerFunction::blaschke(random).unwrap(), unimodular(rng.random_range(0.0..TAU))),
    ];
    let mut worst_herglotz = 0.0f64;
    let mut worst_mass = 0.0f64;
    for (theta, alpha) in &cases {
        let m = clark_measure(theta, *alpha).map_err(|e| e.to_string())?;
        let samples: Vec<Complex64> = (0..50).map(|_| random_disk_point(&mut rng, 0.95)).collect();
        let r = verify_herglotz(theta, &m, &samples).map_err(|e| e.to_string())?;
        worst_herglotz = worst_herglotz.max(r.max_relative_error);
        let b = evaluate_inner(theta, zero).map_err(|e| e.to_string())?;
        let law = ((alpha + b) / (alpha - b)).re;
        let expected = expected_total_mass(theta, *alpha).map_err(|e| e.to_string())? / PI;
        worst_mass = worst_mass.max((m.total_mass / PI - law).abs() / law).max((expected - law).abs() / law);
    }
    check(
        worst_herglotz <= 1e-8 && worst_mass <= 1e-8,
        format!("Herglotz {worst_herglotz:.3e}, total-mass law {worst_mass:.3e}"),
    )
}

fn evaluation_bound(s: &Setup) -> Outcome {
    let nodes = s.nodes(3);
    let gram = gram_matrix(&nodes, &s.phi).map_err(|e| e.to_string())?;
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let mut held = 0;
    let mut inconclusive = 0;
    let mut worst_ratio = 0.0f64;
    for _ in 0..100 {
        let mu = loop {
            let z = unimodular(rng.random_range(0.0..TAU));
            if distance_to_set(z, &s.set) >= 0.1 {
                break z;
            }
        };
        let f = KernelCoefficients::new(nodes.clone(), random_coeffs(&mut rng, nodes.len())).unwrap();
        let r = evaluation_bound_check(&f, mu, &gram, &s.phi, &s.set).map_err(|e| e.to_string())?;
        match r.holds {
            Some(true) => held += 1,
            Some(false) => {}
            None => inconclusive += 1,
        }
        if r.bound.is_finite() {
            worst_ratio = worst_ratio.max(r.value / r.bound);
        }
    }
    check(
        held == 100,
        format!("{held}/100 hold, {inconclusive} inconclusive, max |f(μ)|/bound = {worst_ratio:.3}"),
    )
}

type Criterion = (&'static str, fn(&Setup) -> Outcome);

fn main() -> ExitCode {
    let started = Instant::now();
    let setup = Setup::new();
    let criteria: [Criterion; 10] = [
        ("1 eigen-relation", eigen_relation),
        ("2 isometry on H_1", isometry),
        ("3 S* H_1 = H~_1", shift_image),
        ("4 unitary + rank one", unitary_rank_one),
        ("5 spectrum", spectrum),
        ("6 kernel-gap continuity", kernel_continuity),
        ("7 resolvent routes", resolvent),
        ("8 closed forms", |_| closed_forms()),
        ("9 Clark round-trip", |_| clark()),
        ("10 evaluation bound", evaluation_bound),
    ];
    let mut failures = 0;
    for (name, run) in &criteria {
        let t = Instant::now();
        let outcome = run(&setup);
        let elapsed = t.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS criterion {name}: {detail} [{elapsed:.1}s]"),
            Err(detail) => {
                failures += 1;
                println!("FAIL criterion {name}: {detail} [{elapsed:.1}s]");
            }
        }
    }
    println!("{} of 10 criteria passed in {:.1}s", 10 - failures, started.elapsed().as_secs_f64());
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
