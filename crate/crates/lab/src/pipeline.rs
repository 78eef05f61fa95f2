//! End-to-end run: set → weight → Gram → truncation → subspaces → S* H_1 = H̃_1
//! → unitary → spectrum → resolvent → Grivaux checks, one JSON report per stage
//! plus `summary.json`.

use std::f64::consts::TAU;
use std::path::{Path, PathBuf};

use hypercyclic_core::carleson::{cantor_like_set, entropy, sample_nodes, Arc, CarlesonSet, NodeFamily};
use hypercyclic_core::grivaux::{
    check_completeness, check_eigenvalues, check_eigenvectors, continuity_table, epsilon_certificate,
    minimal_passing_generation, orbit_diagnostics, ContinuityTable,
};
use hypercyclic_core::hstar::{gram_matrix, GramMatrix, KernelCoefficients};
use hypercyclic_core::operator::{
    build_truncation, build_unitary, eigen_relation_residual, isometry_defect, resolvent_cross_check, spectrum_report,
    subspaces, verify_lemma2,
};
use hypercyclic_core::outer::{boundary_weight, boundedness_certificate, outer_function};
use hypercyclic_core::{unimodular, CVector, Complex64};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::config::PipelineConfig;
use crate::formats::{
    pair, write_continuity_csv, write_json, ContinuityFile, GramFile, Header, OrbitFile, OuterFile, SetFile,
    SpectrumFile,
};
use crate::{io_error, LabError};

pub const EIGEN_RELATION_TOLERANCE: f64 = 1e-10;
pub const ISOMETRY_TOLERANCE: f64 = 1e-8;
pub const UNITARITY_TOLERANCE: f64 = 1e-8;
pub const DEFECT_RANK_TOLERANCE: f64 = 1e-8;
pub const AGREEMENT_TOLERANCE: f64 = 1e-10;
pub const SPECTRUM_TOLERANCE: f64 = 1e-12;
pub const RESOLVENT_TOLERANCE: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckRecord {
    pub name: String,
    pub passed: bool,
    pub heuristic: bool,
    pub value: Option<f64>,
    pub threshold: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub checks: Vec<CheckRecord>,
    /// All non-heuristic checks passed and no stage failed.
    pub all_passed: bool,
    pub failed_stage: Option<String>,
    pub error: Option<String>,
}

struct Run {
    out: PathBuf,
    header: Header,
    checks: Vec<CheckRecord>,
}

impl Run {
    fn write<T: Serialize>(&self, name: &str, body: &T) -> Result<(), LabError> {
        let path = self.out.join(name);
        write_json(&path, &self.header, body).map_err(io_error(&path))
    }

    fn check(&mut self, name: impl Into<String>, passed: bool, value: f64, threshold: Option<f64>) {
        self.checks.push(CheckRecord {
            name: name.into(),
            passed,
            heuristic: false,
            value: Some(value),
            threshold,
        });
    }

    fn at_most(&mut self, name: &str, value: f64, threshold: f64) {
        self.check(name, value <= threshold, value, Some(threshold));
    }

    fn summary(&self, failure: Option<(&str, String)>) -> Summary {
        Summary {
            all_passed: failure.is_none() && self.checks.iter().all(|c| c.heuristic || c.passed),
            checks: self.checks.clone(),
            failed_stage: failure.as_ref().map(|f| f.0.to_string()),
            error: failure.map(|f| f.1),
        }
    }

    /// Records a stage failure in `summary.json` before propagating it.
    fn stage<T>(&self, stage: &'static str, result: hypercyclic_core::Result<T>) -> Result<T, LabError> {
        result.map_err(|source| {
            let summary = self.summary(Some((stage, source.to_string())));
            // The stage error is what gets reported; a failed summary write is secondary.
            let _ = self.write("summary.json", &summary);
            LabError::Stage { stage, source }
        })
    }
}

fn random_coeffs(rng: &mut ChaCha8Rng, n: usize) -> CVector {
    CVector::from_fn(n, |_, _| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
}

fn random_disk_point(rng: &mut ChaCha8Rng, radius: f64) -> Complex64 {
    Complex64::from_polar(radius * rng.random_range(0.0f64..1.0).sqrt(), rng.random_range(0.0..TAU))
}

pub fn build_set(config: &PipelineConfig) -> hypercyclic_core::Result<CarlesonSet> {
    let s = &config.set;
    let base = if s.base_length == 1.0 {
        Arc::full_circle()
    } else {
        Arc::new(s.base_start, s.base_length)?
    };
    cantor_like_set(s.depth, s.ratio, base)
}

/// Runs every stage, writing reports under `out`. Returns the summary when all
/// non-heuristic checks pass.
pub fn run_pipeline(config: &PipelineConfig, out: &Path) -> Result<Summary, LabError> {
    config.validate().map_err(LabError::Usage)?;
    std::fs::create_dir_all(out).map_err(io_error(out))?;
    let mut run = Run {
        out: out.to_path_buf(),
        header: Header::new("pipeline", config.to_value()),
        checks: Vec::new(),
    };
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let samples = config.checks.samples;

    let set = run.stage("carleson_set", build_set(config))?;
    run.write("set.json", &SetFile::from(&set))?;
    let weight = run.stage("boundary_weight", boundary_weight(&set, config.weight.p, config.weight.grid_size))?;
    let phi = run.stage("outer_function", outer_function(weight))?;
    run.write("outer.json", &OuterFile::from(&phi))?;

    let cap = config.nodes.cap.unwrap_or(usize::MAX);
    let sampled = match &config.nodes.angles {
        Some(_) => None,
        None => Some(run.stage("nodes", sample_nodes(&set, config.nodes.generation, cap))?),
    };
    let raw_angles: Vec<f64> = match (&config.nodes.angles, &sampled) {
        (Some(a), _) => a.clone(),
        (None, Some(nodes)) => nodes.angles().to_vec(),
        (None, None) => unreachable!(),
    };
    // Distinctness is a hypothesis on the eigenvalues 1/λ = conj(λ), checked
    // before anything is built on the nodes.
    let conjugates: Vec<Complex64> = raw_angles.iter().map(|&a| unimodular(-a)).collect();
    run.stage("grivaux_eigenvectors", check_eigenvalues(&conjugates))?;
    let nodes = match sampled {
        Some(nodes) => nodes,
        None => run.stage("nodes", NodeFamily::from_angles(&raw_angles))?,
    };

    let certificate = run.stage("boundedness_certificate", boundedness_certificate(&phi, &nodes))?;
    run.write(
        "certificate.json",
        &json!({
            "supremum": certificate.supremum,
            "bound": certificate.bound,
            "within_bound": certificate.within_bound,
        }),
    )?;
    run.check("boundedness_certificate", certificate.within_bound, certificate.supremum, Some(certificate.bound));

    let gram = run.stage("gram", gram_matrix(&nodes, &phi))?;
    run.write("gram.json", &GramFile::from(&gram))?;
    let op = run.stage("truncation", build_truncation(&nodes, gram))?;

    let points: Vec<Complex64> = (0..10_000).map(|k| unimodular(TAU * (k as f64 + 0.5) / 10_000.0)).collect();
    let mut relation = 0.0f64;
    for _ in 0..3 {
        let f = run.stage("truncation", KernelCoefficients::new(nodes.clone(), random_coeffs(&mut rng, op.dim())))?;
        relation = relation.max(run.stage("truncation", eigen_relation_residual(&op, &f, &points))?);
    }
    run.at_most("eigen_relation", relation, EIGEN_RELATION_TOLERANCE);

    let eig = run.stage("grivaux_eigenvectors", check_eigenvectors(&op))?;
    run.write(
        "eigenvectors.json",
        &json!({
            "eigenvalues": eig.eigenvalues.iter().map(|e| pair(*e)).collect::<Vec<_>>(),
            "max_modulus_defect": eig.max_modulus_defect,
            "max_action_residual": eig.max_action_residual,
            "min_gap": eig.min_gap,
            "min_gap_pair": eig.min_gap_pair,
            "passed": eig.passed,
        }),
    )?;
    run.check("eigenvectors", eig.passed, eig.max_modulus_defect, None);

    let completeness = check_completeness(op.gram());
    run.write(
        "completeness.json",
        &json!({
            "dimension": completeness.dimension,
            "min_eigenvalue": completeness.min_eigenvalue,
            "max_eigenvalue": completeness.max_eigenvalue,
            "condition_number": completeness.condition_number,
            "alarm": completeness.alarm,
            "complete": completeness.complete,
        }),
    )?;
    run.check("completeness", completeness.complete, completeness.min_eigenvalue, None);

    let spaces = run.stage("subspaces", subspaces(&op))?;
    let lemma = verify_lemma2(&op, &spaces);
    run.write(
        "lemma2.json",
        &json!({
            "dimension": lemma.dimension,
            "inclusion_residual": lemma.inclusion_residual,
            "preimage_residual": lemma.preimage_residual,
            "image_rank": lemma.image_rank,
            "h1tilde_rank": lemma.h1tilde_rank,
            "offending_columns": lemma.offending_columns,
            "passed": lemma.passed,
        }),
    )?;
    run.check("lemma2", lemma.passed, lemma.inclusion_residual.max(lemma.preimage_residual), None);

    let mut isometry = 0.0f64;
    for _ in 0..samples {
        let h = &spaces.h1_basis * random_coeffs(&mut rng, op.dim() - 1);
        isometry = isometry.max(run.stage("isometry", isometry_defect(&op, &h))?);
    }
    run.write("isometry.json", &json!({ "samples": samples, "max_defect": isometry }))?;
    run.at_most("isometry_on_h1", isometry, ISOMETRY_TOLERANCE);

    let alpha = unimodular(config.operator.alpha_phase);
    let decomposition = run.stage("unitary", build_unitary(&op, &spaces, alpha))?;
    let other = run.stage("unitary", build_unitary(&op, &spaces, -alpha))?;
    let unitarity = decomposition.unitarity_defect(op.gram());
    let agreement = decomposition.agreement_on_h1(&op, &spaces);
    let singular_values = decomposition.framed_defect_singular_values(&op);
    let rank = decomposition.defect_rank(&op, DEFECT_RANK_TOLERANCE);
    let independence = (decomposition.unitary() * &spaces.h1_basis - other.unitary() * &spaces.h1_basis)
        .column_iter()
        .map(|c| c.norm())
        .fold(0.0, f64::max);
    let (u, v) = decomposition.rank_one_factors();
    run.write(
        "unitary.json",
        &json!({
            "alpha": pair(alpha),
            "unitarity_defect": unitarity,
            "agreement_on_h1": agreement,
            "alpha_independence_on_h1": independence,
            "defect_singular_values": singular_values,
            "defect_rank": rank,
            "u": u.iter().map(|c| pair(*c)).collect::<Vec<_>>(),
            "v": v.iter().map(|c| pair(*c)).collect::<Vec<_>>(),
        }),
    )?;
    run.at_most("unitarity", unitarity, UNITARITY_TOLERANCE);
    run.check("rank_one_defect", rank == 1, rank as f64, Some(1.0));
    run.at_most("agreement_on_h1", agreement, AGREEMENT_TOLERANCE);
    run.at_most("alpha_independence_on_h1", independence, AGREEMENT_TOLERANCE);

    let spectrum = spectrum_report(&op, &set);
    run.write("spectrum.json", &SpectrumFile::from(&spectrum))?;
    run.at_most("spectrum_in_E", spectrum.hausdorff_to_e, SPECTRUM_TOLERANCE);

    let g = run.stage("resolvent", KernelCoefficients::new(nodes.clone(), random_coeffs(&mut rng, op.dim())))?;
    let mut resolvent_rows = Vec::new();
    let mut resolvent = 0.0f64;
    for lambda in [Complex64::new(0.0, 0.0), Complex64::new(2.0, 0.0), Complex64::new(0.0, 3.0)] {
        let mu = (lambda.norm() > 0.0).then(|| lambda.inv());
        let mut pts = Vec::with_capacity(samples);
        while pts.len() < samples {
            let z = random_disk_point(&mut rng, 0.9);
            if mu.is_none_or(|m| (z - m).norm() >= 0.05) {
                pts.push(z);
            }
        }
        let r = run.stage("resolvent", resolvent_cross_check(&op, lambda, &g, &pts))?;
        resolvent = resolvent.max(r.max_relative_error);
        resolvent_rows.push(json!({
            "lambda": pair(lambda),
            "max_relative_error": r.max_relative_error,
            "points_used": r.points_used,
        }));
    }
    run.write("resolvent.json", &json!({ "checks": resolvent_rows }))?;
    run.at_most("resolvent_routes", resolvent, RESOLVENT_TOLERANCE);

    let table = run.stage("continuity", continuity_table(&nodes, op.gram()))?;
    run.write("continuity.json", &ContinuityFile::new(&table, nodes.generation()))?;
    let csv_path = out.join("continuity.csv");
    let file = std::fs::File::create(&csv_path).map_err(io_error(&csv_path))?;
    write_continuity_csv(file, &ContinuityFile::new(&table, None).rows)
        .map_err(|e| LabError::Io { path: csv_path.clone(), source: std::io::Error::other(e) })?;
    let min_gap = table.rows.iter().map(|r| r.kernel_gap).fold(f64::INFINITY, f64::min);
    run.check("continuity_positive", min_gap > 0.0, min_gap, None);

    let mut sweep: Vec<(u32, ContinuityTable)> = Vec::new();
    let mut sweep_files = Vec::new();
    let mut increase = 0.0f64;
    let mut previous: Option<Vec<f64>> = None;
    for generation in config.continuity_generations() {
        let family = run.stage("continuity", sample_nodes(&set, generation, usize::MAX))?;
        let g = GramMatrix::assemble(&family, phi.weight());
        let t = run.stage("continuity", continuity_table(&family, &g))?;
        let gaps: Vec<f64> = (0..family.len()).map(|n| t.gap_of(n).unwrap_or(f64::NAN)).collect();
        if let Some(old) = &previous {
            for (n, o) in old.iter().enumerate() {
                increase = increase.max(gaps[n] / o - 1.0);
            }
        }
        previous = Some(gaps);
        sweep_files.push(ContinuityFile::new(&t, Some(generation)));
        sweep.push((generation, t));
    }
    run.write("continuity_sweep.json", &json!({ "tables": sweep_files }))?;
    if sweep.len() >= 2 {
        run.check("continuity_nonincreasing", increase <= 1e-9, increase, Some(1e-9));
    }

    let mut epsilon_rows = Vec::new();
    for &eps in &config.checks.epsilons {
        let here = run.stage("epsilon", epsilon_certificate(&table, eps))?;
        let first = run.stage("epsilon", minimal_passing_generation(&sweep, eps))?;
        epsilon_rows.push(json!({
            "epsilon": eps,
            "passing": here.passing,
            "failing": here.failing,
            "all_pass": here.all_pass,
            "minimal_passing_generation": first,
        }));
        run.check(
            format!("epsilon_{eps}"),
            first.is_some(),
            first.map_or(f64::NAN, f64::from),
            None,
        );
    }
    run.write("epsilon.json", &json!({ "certificates": epsilon_rows }))?;

    let start = run.stage(
        "orbit",
        KernelCoefficients::new(nodes.clone(), CVector::from_element(op.dim(), Complex64::new(1.0, 0.0))),
    )?;
    let targets = (0..3)
        .map(|_| {
            let phases = CVector::from_fn(op.dim(), |_, _| unimodular(rng.random_range(0.0..TAU)));
            KernelCoefficients::new(nodes.clone(), phases)
        })
        .collect::<hypercyclic_core::Result<Vec<_>>>();
    let targets = run.stage("orbit", targets)?;
    let orbit = run.stage("orbit", orbit_diagnostics(&op, &start, config.checks.orbit_steps, &targets))?;
    run.write("orbit.json", &OrbitFile::from(&orbit))?;
    run.checks.push(CheckRecord {
        name: "orbit".into(),
        passed: true,
        heuristic: true,
        value: orbit.min_distances.iter().cloned().reduce(f64::min),
        threshold: None,
    });

    let entropy_value = entropy(&set).value;
    run.checks.push(CheckRecord {
        name: "entropy_partial_sum".into(),
        passed: entropy_value.is_finite(),
        heuristic: false,
        value: Some(entropy_value),
        threshold: None,
    });

    let summary = run.summary(None);
    run.write("summary.json", &summary)?;
    if summary.all_passed {
        Ok(summary)
    } else {
        Err(LabError::ChecksFailed(
            summary.checks.iter().filter(|c| !c.heuristic && !c.passed).map(|c| c.name.clone()).collect(),
        ))
    }
}
