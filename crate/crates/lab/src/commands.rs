//! Standalone commands other than `pipeline`.

use std::f64::consts::TAU;
use std::path::Path;

use hypercyclic_core::carleson::{carleson_margin, entropy, sample_nodes};
use hypercyclic_core::clark::{clark_family_spectra, clark_measure, verify_herglotz, InnerFunction};
use hypercyclic_core::grivaux::continuity_table;
use hypercyclic_core::hstar::GramMatrix;
use hypercyclic_core::operator::{build_truncation, spectrum_report};
use hypercyclic_core::outer::boundary_weight;
use hypercyclic_core::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use crate::config::PipelineConfig;
use crate::formats::{pair, write_continuity_csv, write_json, ClarkFile, ContinuityFile, Header, SetFile, SpectrumFile};
use crate::pipeline::build_set;
use crate::{io_error, LabError};

fn write<T: serde::Serialize>(out: &Path, name: &str, header: &Header, body: &T) -> Result<(), LabError> {
    std::fs::create_dir_all(out).map_err(io_error(out))?;
    let path = out.join(name);
    write_json(&path, header, body).map_err(io_error(&path))
}

/// Writes `set.json` and returns the lines to print.
pub fn gen_set(config: &PipelineConfig, out: &Path) -> Result<Vec<String>, LabError> {
    let set = build_set(config).map_err(|e| LabError::classify("carleson_set", e))?;
    let header = Header::new("gen-set", json!({ "set": config.to_value()["set"] }));
    write(out, "set.json", &header, &SetFile::from(&set))?;

    let e = entropy(&set);
    let mut lines = vec![format!("entropy partial sum: {:.12}", e.value)];
    if e.empty_complement {
        lines.push("warning: empty complement, the set is the whole circle".into());
    }
    if set.depth() >= 3 {
        let mut truncations = Vec::new();
        for depth in 1..=set.depth() {
            let mut c = config.clone();
            c.set.depth = depth;
            truncations.push(build_set(&c).map_err(|e| LabError::classify("carleson_set", e))?);
        }
        let margin = carleson_margin(&truncations).map_err(|e| LabError::classify("carleson_margin", e))?;
        lines.push(format!(
            "carleson margin: fitted ratio {:.6}, consistent {}",
            margin.fitted_ratio, margin.carleson_consistent
        ));
    } else {
        lines.push("carleson margin: needs depth >= 3".into());
    }
    Ok(lines)
}

/// Parses `a`, `bi`, `a+bi`, `a-bi` (also with `j`).
pub fn parse_complex(text: &str) -> Result<Complex64, String> {
    let s: String = text.chars().filter(|c| !c.is_whitespace()).collect();
    let bad = || format!("cannot parse complex number {text:?}");
    if s.is_empty() {
        return Err(bad());
    }
    let Some(body) = s.strip_suffix('i').or_else(|| s.strip_suffix('j')) else {
        return s.parse::<f64>().map(|re| Complex64::new(re, 0.0)).map_err(|_| bad());
    };
    // Split at the last sign that is not leading and not part of an exponent.
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&k| matches!(bytes[k], b'+' | b'-') && !matches!(bytes[k - 1], b'e' | b'E'));
    let (re, im) = match split {
        Some(k) => (&body[..k], &body[k..]),
        None => ("0", body),
    };
    let im = match im {
        "" | "+" => 1.0,
        "-" => -1.0,
        t => t.parse::<f64>().map_err(|_| bad())?,
    };
    let re = re.parse::<f64>().map_err(|_| bad())?;
    Ok(Complex64::new(re, im))
}

pub fn parse_complex_list(text: &str) -> Result<Vec<Complex64>, String> {
    if text.trim().is_empty() {
        return Ok(Vec::new());
    }
    text.split(',').map(parse_complex).collect()
}

/// Writes `clark_alpha_k.json`, `herglotz.json` and `family.json`.
pub fn clark(zeros: &[Complex64], alphas: &[Complex64], seed: u64, out: &Path) -> Result<Vec<String>, LabError> {
    let theta = InnerFunction::blaschke(zeros.to_vec()).map_err(|e| LabError::classify("clark", e))?;
    let header = Header::new(
        "clark",
        json!({
            "zeros": zeros.iter().map(|z| pair(*z)).collect::<Vec<_>>(),
            "alphas": alphas.iter().map(|a| pair(*a)).collect::<Vec<_>>(),
            "seed": seed,
        }),
    );
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let samples: Vec<Complex64> = (0..100)
        .map(|_| Complex64::from_polar(0.9 * rng.random_range(0.0f64..1.0).sqrt(), rng.random_range(0.0..TAU)))
        .collect();

    let mut lines = Vec::new();
    let mut herglotz = Vec::new();
    for (k, &alpha) in alphas.iter().enumerate() {
        let measure = clark_measure(&theta, alpha).map_err(|e| LabError::classify("clark", e))?;
        let report = verify_herglotz(&theta, &measure, &samples).map_err(|e| LabError::classify("clark", e))?;
        write(out, &format!("clark_alpha_{k}.json"), &header, &ClarkFile::from(&measure))?;
        for atom in &measure.atoms {
            lines.push(format!(
                "alpha {k}: atom ({:.12}, {:.12}) mass {:.12}",
                atom.tau.re, atom.tau.im, atom.mass
            ));
        }
        herglotz.push(json!({
            "alpha": pair(alpha),
            "max_relative_error": report.max_relative_error,
            "points_used": report.points_used,
            "skipped": report.skipped,
            "passed": report.passed,
        }));
    }
    write(out, "herglotz.json", &header, &json!({ "reports": herglotz }))?;

    let family = clark_family_spectra(&theta, alphas).map_err(|e| LabError::classify("clark", e))?;
    write(
        out,
        "family.json",
        &header,
        &json!({
            "alphas": family.alphas.iter().map(|a| pair(*a)).collect::<Vec<_>>(),
            "measures": family.measures.iter().map(ClarkFile::from).collect::<Vec<_>>(),
            "duplicates_removed": family.duplicates_removed,
            "interlaced": family.interlaced,
        }),
    )?;
    Ok(lines)
}

fn unchecked_operator(
    config: &PipelineConfig,
) -> Result<(hypercyclic_core::carleson::CarlesonSet, hypercyclic_core::operator::TruncatedOperator), LabError> {
    config.validate().map_err(LabError::Usage)?;
    let set = build_set(config).map_err(|e| LabError::classify("carleson_set", e))?;
    let weight = boundary_weight(&set, config.weight.p, config.weight.grid_size)
        .map_err(|e| LabError::classify("boundary_weight", e))?;
    let nodes = sample_nodes(&set, config.nodes.generation, config.nodes.cap.unwrap_or(usize::MAX))
        .map_err(|e| LabError::classify("nodes", e))?;
    let gram = GramMatrix::assemble(&nodes, &weight);
    let op = build_truncation(&nodes, gram).map_err(|e| LabError::classify("truncation", e))?;
    Ok((set, op))
}

/// Writes `continuity.json` and `continuity.csv`.
pub fn continuity(config: &PipelineConfig, out: &Path) -> Result<Vec<String>, LabError> {
    let (_, op) = unchecked_operator(config)?;
    let table = continuity_table(op.nodes(), op.gram()).map_err(|e| LabError::classify("continuity", e))?;
    let header = Header::new("continuity", config.to_value());
    let file = ContinuityFile::new(&table, Some(config.nodes.generation));
    write(out, "continuity.json", &header, &file)?;
    let csv_path = out.join("continuity.csv");
    let handle = std::fs::File::create(&csv_path).map_err(io_error(&csv_path))?;
    write_continuity_csv(handle, &file.rows).map_err(|e| LabError::Io {
        path: csv_path.clone(),
        source: std::io::Error::other(e),
    })?;
    let mut lines = vec![format!("{} rows", table.rows.len())];
    if let Some((beta, c)) = table.modulus_fit {
        lines.push(format!("modulus fit: beta {beta:.6}, C {c:.6}"));
    }
    Ok(lines)
}

/// Writes `spectrum.json`.
pub fn spectrum(config: &PipelineConfig, out: &Path) -> Result<Vec<String>, LabError> {
    let (set, op) = unchecked_operator(config)?;
    let report = spectrum_report(&op, &set);
    write(out, "spectrum.json", &Header::new("spectrum", config.to_value()), &SpectrumFile::from(&report))?;
    Ok(vec![
        format!("hausdorff to E: {:e}", report.hausdorff_to_e),
        format!("hausdorff from E: {:.12}", report.hausdorff_from_e),
    ])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_complex_forms() {
        let c = |re, im| Complex64::new(re, im);
        assert_eq!(parse_complex("0.5").unwrap(), c(0.5, 0.0));
        assert_eq!(parse_complex("-i").unwrap(), c(0.0, -1.0));
        assert_eq!(parse_complex("0.3-0.2i").unwrap(), c(0.3, -0.2));
        assert_eq!(parse_complex("1e-3+2e-1j").unwrap(), c(1e-3, 0.2));
        assert_eq!(parse_complex("-2.5i").unwrap(), c(0.0, -2.5));
        assert!(parse_complex("x").is_err());
        assert_eq!(parse_complex_list("0,0").unwrap().len(), 2);
    }
}
