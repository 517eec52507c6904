//! CSV and manifest writers.
//!
//! Floating-point values are serialized with 17 significant digits so every
//! number round-trips bit-exactly; identical runs therefore produce
//! byte-identical artifacts. The manifest lists each written file with its
//! SHA-256.

use serde::Serialize;
use sg_lattice::{
    DiagramLine, EnergyRecord, Snapshot, StabilityReport, ThresholdResult,
};
use std::io::Write;
use std::path::Path;

/// 17 significant digits: exact round-trip for f64.
pub fn fmt_g(x: f64) -> String {
    format!("{x:.16e}")
}

#[derive(Debug, Clone, Serialize)]
pub struct Artifact {
    pub file: String,
    pub sha256: String,
    pub rows: usize,
}

fn write_artifact(dir: &Path, name: &str, contents: &str, rows: usize) -> std::io::Result<Artifact> {
    std::fs::write(dir.join(name), contents)?;
    use sha2::Digest;
    let hash = sha2::Sha256::digest(contents.as_bytes());
    let sha256 = hash.iter().map(|b| format!("{b:02x}")).collect();
    Ok(Artifact {
        file: name.to_string(),
        sha256,
        rows,
    })
}

pub fn write_energy_csv(dir: &Path, records: &[EnergyRecord]) -> std::io::Result<Artifact> {
    let mut s = String::from("step,time,E,rate_lhs,rate_rhs,boundary_flux,diss_beta,diss_gamma,I_out\n");
    for r in records {
        s.push_str(&format!(
            "{},{},{},{},{},{},{},{},{}\n",
            r.step,
            fmt_g(r.time),
            fmt_g(r.e_total),
            fmt_g(r.rate_lhs),
            fmt_g(r.rate_rhs),
            fmt_g(r.boundary_flux),
            fmt_g(r.diss_beta),
            fmt_g(r.diss_gamma),
            fmt_g(r.i_out),
        ));
    }
    write_artifact(dir, "energy.csv", &s, records.len())
}

/// One row per stored site (ghosts 0 and N+1 included, so energies can be
/// recomputed from consecutive snapshots).
pub fn write_snapshots_csv(dir: &Path, snapshots: &[Snapshot]) -> std::io::Result<Artifact> {
    let mut s = String::from("step,n,u\n");
    let mut rows = 0;
    for snap in snapshots {
        for (n, u) in snap.u.iter().enumerate() {
            s.push_str(&format!("{},{},{}\n", snap.step, n, fmt_g(*u)));
            rows += 1;
        }
    }
    write_artifact(dir, "snapshots.csv", &s, rows)
}

pub fn write_sweep_csv(dir: &Path, result: &ThresholdResult) -> std::io::Result<Artifact> {
    let mut s = String::from("value,E_final,is_threshold\n");
    for (i, (&value, &e)) in result.grid.iter().zip(&result.energies).enumerate() {
        s.push_str(&format!(
            "{},{},{}\n",
            fmt_g(value),
            fmt_g(e),
            result.threshold_index == Some(i),
        ));
    }
    write_artifact(dir, "sweep.csv", &s, result.grid.len())
}

pub fn write_thresholds_csv(dir: &Path, line: &DiagramLine) -> std::io::Result<Artifact> {
    let mut s = String::from("omega,threshold,detected\n");
    for (omega, threshold) in &line.points {
        s.push_str(&format!(
            "{},{},{}\n",
            fmt_g(*omega),
            threshold.map(fmt_g).unwrap_or_default(),
            threshold.is_some(),
        ));
    }
    write_artifact(dir, "thresholds.csv", &s, line.points.len())
}

pub fn write_stability_csv(dir: &Path, report: &StabilityReport) -> std::io::Result<Artifact> {
    let mut s = String::from("xi,rho,inf_norm\n");
    for i in 0..report.xi.len() {
        s.push_str(&format!(
            "{},{},{}\n",
            fmt_g(report.xi[i]),
            fmt_g(report.rho[i]),
            fmt_g(report.inf_norm[i]),
        ));
    }
    write_artifact(dir, "stability.csv", &s, report.xi.len())
}

/// Reproducibility record: the command, the fully resolved configuration,
/// run summary values, and checksums of every artifact.
pub fn write_manifest(
    dir: &Path,
    command: &str,
    config: &crate::config::RunConfig,
    summary: serde_json::Value,
    artifacts: &[Artifact],
) -> std::io::Result<()> {
    let manifest = serde_json::json!({
        "command": command,
        "scheme": config.scheme,
        "config": config,
        "summary": summary,
        "artifacts": artifacts,
    });
    let mut file = std::fs::File::create(dir.join("manifest.json"))?;
    writeln!(file, "{}", serde_json::to_string_pretty(&manifest)?)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seventeen_digit_round_trip() {
        for x in [0.1, 1.0 / 3.0, 2.0f64.sqrt(), -1.23e-300, 0.0, 6.02e23] {
            let s = fmt_g(x);
            assert_eq!(s.parse::<f64>().unwrap().to_bits(), x.to_bits(), "{s}");
        }
    }
}
