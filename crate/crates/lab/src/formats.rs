//! JSON and CSV representations of the core types.
//!
//! Complex numbers are written as `[re, im]`. Floats round-trip exactly.

use std::io::Write;
use std::path::Path;

use hypercyclic_core::carleson::{Arc, CarlesonSet, NodeFamily};
use hypercyclic_core::clark::ClarkMeasure;
use hypercyclic_core::grivaux::{ContinuityTable, OrbitReport};
use hypercyclic_core::hstar::{GramMatrix, KernelCoefficients};
use hypercyclic_core::operator::SpectrumReport;
use hypercyclic_core::outer::{OuterFunction, WeightGrid};
use hypercyclic_core::{CMatrix, CVector, Complex64};
use serde::{Deserialize, Serialize};

pub type Pair = [f64; 2];

pub fn pair(z: Complex64) -> Pair {
    [z.re, z.im]
}

pub fn complex(p: Pair) -> Complex64 {
    Complex64::new(p[0], p[1])
}

/// Provenance block at the top of every report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Header {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub config: serde_json::Value,
}

impl Header {
    pub fn new(command: &str, config: serde_json::Value) -> Self {
        Header {
            tool: env!("CARGO_PKG_NAME").to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            command: command.to_string(),
            config,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Envelope<T> {
    pub header: Header,
    #[serde(flatten)]
    pub body: T,
}

pub fn write_json<T: Serialize>(path: &Path, header: &Header, body: &T) -> std::io::Result<()> {
    let mut text = serde_json::to_string_pretty(&Envelope { header: header.clone(), body })
        .map_err(std::io::Error::other)?;
    text.push('\n');
    std::fs::write(path, text)
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> std::io::Result<Envelope<T>> {
    let text = std::fs::read_to_string(path)?;
    serde_json::from_str(&text).map_err(std::io::Error::other)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArcRecord {
    pub start: f64,
    pub length: f64,
    #[serde(default)]
    pub generation: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SetFile {
    pub arcs: Vec<ArcRecord>,
    pub depth: u32,
    pub tag: String,
}

impl From<&CarlesonSet> for SetFile {
    fn from(set: &CarlesonSet) -> Self {
        SetFile {
            arcs: set
                .arcs()
                .iter()
                .map(|a| ArcRecord {
                    start: a.start,
                    length: a.length,
                    generation: a.generation,
                })
                .collect(),
            depth: set.depth(),
            tag: set.tag().to_string(),
        }
    }
}

impl SetFile {
    pub fn to_set(&self) -> hypercyclic_core::Result<CarlesonSet> {
        let arcs = self
            .arcs
            .iter()
            .map(|a| Arc::with_generation(a.start, a.length, a.generation))
            .collect::<hypercyclic_core::Result<Vec<_>>>()?;
        CarlesonSet::from_arcs(arcs, self.depth, self.tag.clone())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OuterFile {
    #[serde(rename = "N")]
    pub grid_size: usize,
    pub p: f64,
    pub floor: f64,
    pub modulus: Vec<f64>,
    pub phase: Vec<f64>,
    pub phi0: Pair,
}

impl From<&OuterFunction> for OuterFile {
    fn from(phi: &OuterFunction) -> Self {
        let w = phi.weight();
        OuterFile {
            grid_size: w.grid_size(),
            p: w.exponent(),
            floor: w.floor(),
            modulus: w.modulus().to_vec(),
            phase: phi.phase().to_vec(),
            phi0: pair(phi.value_at_zero()),
        }
    }
}

impl OuterFile {
    pub fn to_outer(&self) -> hypercyclic_core::Result<OuterFunction> {
        if self.modulus.len() != self.grid_size {
            return Err(hypercyclic_core::Error::Mismatch(format!(
                "N = {} but {} modulus samples",
                self.grid_size,
                self.modulus.len()
            )));
        }
        let weight = WeightGrid::from_samples(self.modulus.clone(), self.p, self.floor)?;
        OuterFunction::from_parts(weight, self.phase.clone(), complex(self.phi0))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GramFile {
    pub nodes: Vec<f64>,
    pub grid_size: usize,
    /// Row-major.
    pub entries: Vec<Vec<Pair>>,
    pub eigenvalues: Vec<f64>,
}

impl From<&GramMatrix> for GramFile {
    fn from(g: &GramMatrix) -> Self {
        let e = g.entries();
        GramFile {
            nodes: g.nodes().angles().to_vec(),
            grid_size: g.grid_size(),
            entries: (0..e.nrows()).map(|r| (0..e.ncols()).map(|c| pair(e[(r, c)])).collect()).collect(),
            eigenvalues: g.eigenvalues().to_vec(),
        }
    }
}

impl GramFile {
    pub fn to_gram(&self) -> hypercyclic_core::Result<GramMatrix> {
        let nodes = NodeFamily::from_angles(&self.nodes)?;
        let n = self.entries.len();
        if self.entries.iter().any(|row| row.len() != n) {
            return Err(hypercyclic_core::Error::Mismatch("Gram matrix rows are ragged".into()));
        }
        let entries = CMatrix::from_fn(n, n, |r, c| complex(self.entries[r][c]));
        GramMatrix::from_entries(nodes, entries)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelFile {
    pub nodes: Vec<f64>,
    pub coeffs: Vec<Pair>,
}

impl From<&KernelCoefficients> for KernelFile {
    fn from(f: &KernelCoefficients) -> Self {
        KernelFile {
            nodes: f.nodes().angles().to_vec(),
            coeffs: f.coeffs().iter().map(|c| pair(*c)).collect(),
        }
    }
}

impl KernelFile {
    pub fn to_coefficients(&self) -> hypercyclic_core::Result<KernelCoefficients> {
        let nodes = NodeFamily::from_angles(&self.nodes)?;
        let coeffs = CVector::from_iterator(self.coeffs.len(), self.coeffs.iter().map(|p| complex(*p)));
        KernelCoefficients::new(nodes, coeffs)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumFile {
    pub generation: Option<u32>,
    #[serde(rename = "hausdorff_to_E")]
    pub hausdorff_to_e: f64,
    #[serde(rename = "hausdorff_from_E")]
    pub hausdorff_from_e: f64,
    pub eigenvalues: Vec<Pair>,
}

impl From<&SpectrumReport> for SpectrumFile {
    fn from(r: &SpectrumReport) -> Self {
        SpectrumFile {
            generation: r.generation,
            hausdorff_to_e: r.hausdorff_to_e,
            hausdorff_from_e: r.hausdorff_from_e,
            eigenvalues: r.eigenvalues.iter().map(|e| pair(*e)).collect(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ContinuityRecord {
    pub n: usize,
    pub m: usize,
    pub chordal_gap: f64,
    pub kernel_gap: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModulusFit {
    pub beta: f64,
    #[serde(rename = "C")]
    pub constant: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContinuityFile {
    pub generation: Option<u32>,
    pub rows: Vec<ContinuityRecord>,
    pub modulus_fit: Option<ModulusFit>,
}

impl ContinuityFile {
    pub fn new(table: &ContinuityTable, generation: Option<u32>) -> Self {
        ContinuityFile {
            generation,
            rows: table
                .rows
                .iter()
                .map(|r| ContinuityRecord {
                    n: r.n,
                    m: r.m,
                    chordal_gap: r.chordal_gap,
                    kernel_gap: r.kernel_gap,
                })
                .collect(),
            modulus_fit: table.modulus_fit.map(|(beta, constant)| ModulusFit { beta, constant }),
        }
    }
}

/// CSV with header `n,m,chordal_gap,kernel_gap`.
pub fn write_continuity_csv<W: Write>(writer: W, rows: &[ContinuityRecord]) -> csv::Result<()> {
    let mut csv = csv::Writer::from_writer(writer);
    for r in rows {
        csv.serialize(r)?;
    }
    if rows.is_empty() {
        csv.write_record(["n", "m", "chordal_gap", "kernel_gap"])?;
    }
    csv.flush()?;
    Ok(())
}

pub fn read_continuity_csv<R: std::io::Read>(reader: R) -> csv::Result<Vec<ContinuityRecord>> {
    csv::Reader::from_reader(reader).deserialize().collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrbitFile {
    pub heuristic: bool,
    pub steps: u64,
    pub min_distances: Vec<f64>,
    pub argmin_steps: Vec<u64>,
    pub return_count: u64,
    pub first_return: Option<u64>,
}

impl From<&OrbitReport> for OrbitFile {
    fn from(r: &OrbitReport) -> Self {
        OrbitFile {
            heuristic: r.heuristic,
            steps: r.steps,
            min_distances: r.min_distances.clone(),
            argmin_steps: r.argmin_steps.clone(),
            return_count: r.return_count,
            first_return: r.first_return,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AtomRecord {
    pub tau: Pair,
    pub mass: f64,
}

pub const CLARK_NORMALIZATION: &str = "paper-1-over-pi";

/// Masses carry the factor `1/π` of the Poisson representation; divide by `π`
/// for the normalized-Lebesgue convention.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClarkFile {
    pub alpha: Pair,
    pub atoms: Vec<AtomRecord>,
    pub total_mass: f64,
    pub normalization: String,
}

impl From<&ClarkMeasure> for ClarkFile {
    fn from(m: &ClarkMeasure) -> Self {
        ClarkFile {
            alpha: pair(m.alpha),
            atoms: m
                .atoms
                .iter()
                .map(|a| AtomRecord {
                    tau: pair(a.tau),
                    mass: a.mass,
                })
                .collect(),
            total_mass: m.total_mass,
            normalization: CLARK_NORMALIZATION.to_string(),
        }
    }
}
