//! CSV series, SVG plot and run manifests.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use mowave_core::energy::RatePoint;
use mowave_core::{DecayCertificate, EnergySeries, Trajectory};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::exit::{HarnessError, Result};

#[derive(Serialize)]
struct EnergyRow {
    t: f64,
    #[serde(rename = "E")]
    e: f64,
    kinetic: f64,
    gradient: f64,
    restoring: f64,
    nonlinear: f64,
    flux: f64,
    bound: Option<f64>,
}

/// `t,E,kinetic,gradient,restoring,nonlinear,flux,bound`; `bound` is
/// C E(0) e^{−λt} when a certificate exists, empty otherwise.
pub fn write_energy_csv(path: &Path, series: &EnergySeries, cert: Option<&DecayCertificate>) -> Result<()> {
    let e0 = series.initial().unwrap_or(0.0);
    let mut w = csv::Writer::from_path(path)?;
    for s in &series.samples {
        w.serialize(EnergyRow {
            t: s.t,
            e: s.total,
            kinetic: s.kinetic,
            gradient: s.gradient,
            restoring: s.restoring,
            nonlinear: s.nonlinear,
            flux: s.flux,
            bound: cert.map(|c| e0 * c.envelope(s.t)),
        })?;
    }
    w.flush().map_err(|e| HarnessError::io(path, e))?;
    Ok(())
}

pub fn write_identity_csv(path: &Path, profile: &[RatePoint]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    if profile.is_empty() {
        w.write_record(["t", "dE_dt", "rate_rhs", "residual"])?;
    }
    for p in profile {
        w.serialize(p)?;
    }
    w.flush().map_err(|e| HarnessError::io(path, e))?;
    Ok(())
}

/// Nodal values of every snapshot: `t,y,x,v,w`.
pub fn write_trajectory_csv(path: &Path, traj: &Trajectory) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["t", "y", "x", "v", "w"])?;
    for s in &traj.snapshots {
        let length = traj.spec.alpha.eval(s.t).0;
        for i in 0..traj.grid.nodes() {
            let y = traj.grid.y(i);
            w.write_record(&[
                s.t.to_string(),
                y.to_string(),
                (y * length).to_string(),
                s.v[i].to_string(),
                s.w[i].to_string(),
            ])?;
        }
    }
    w.flush().map_err(|e| HarnessError::io(path, e))?;
    Ok(())
}

/// Log-scale energy history with the certified envelope as a dashed line.
pub fn decay_svg(series: &EnergySeries, cert: Option<&DecayCertificate>) -> String {
    const W: f64 = 800.0;
    const H: f64 = 500.0;
    const M: f64 = 60.0;
    let e0 = series.initial().unwrap_or(0.0);
    let pts: Vec<(f64, f64)> = series
        .samples
        .iter()
        .filter(|s| s.total > 0.0)
        .map(|s| (s.t, s.total.log10()))
        .collect();
    let t_max = series.samples.last().map_or(1.0, |s| s.t).max(f64::MIN_POSITIVE);
    let bound_at = |t: f64| cert.filter(|_| e0 > 0.0).map(|c| (e0 * c.envelope(t)).log10());

    let mut lo = pts.iter().map(|p| p.1).fold(f64::INFINITY, f64::min);
    let mut hi = pts.iter().map(|p| p.1).fold(f64::NEG_INFINITY, f64::max);
    for t in [0.0, t_max] {
        if let Some(b) = bound_at(t) {
            lo = lo.min(b);
            hi = hi.max(b);
        }
    }
    if !lo.is_finite() || !hi.is_finite() {
        lo = -1.0;
        hi = 1.0;
    }
    if hi - lo < 1e-12 {
        hi += 0.5;
        lo -= 0.5;
    }
    let sx = |t: f64| M + (W - 2.0 * M) * t / t_max;
    let sy = |v: f64| H - M - (H - 2.0 * M) * (v - lo) / (hi - lo);

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(svg, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    let _ = writeln!(
        svg,
        r#"<path d="M{M} {M} V{} H{}" fill="none" stroke="black"/>"#,
        H - M,
        W - M
    );
    for i in 0..=4 {
        let v = lo + (hi - lo) * i as f64 / 4.0;
        let t = t_max * i as f64 / 4.0;
        let _ = writeln!(svg, r#"<text x="{}" y="{:.1}" text-anchor="end">{v:.2}</text>"#, M - 6.0, sy(v) + 4.0);
        let _ = writeln!(svg, r#"<text x="{:.1}" y="{}" text-anchor="middle">{t:.2}</text>"#, sx(t), H - M + 18.0);
    }
    let _ = writeln!(svg, r#"<text x="{}" y="{}" text-anchor="middle">t</text>"#, W / 2.0, H - 15.0);
    let _ = writeln!(
        svg,
        r#"<text x="15" y="{}" transform="rotate(-90 15 {})" text-anchor="middle">log10 E(t)</text>"#,
        H / 2.0,
        H / 2.0
    );
    if !pts.is_empty() {
        let mut d = String::new();
        for (i, (t, v)) in pts.iter().enumerate() {
            let _ = write!(d, "{}{:.2} {:.2}", if i == 0 { "M" } else { " L" }, sx(*t), sy(*v));
        }
        let _ = writeln!(svg, r##"<path d="{d}" fill="none" stroke="#1f77b4" stroke-width="1.5"/>"##);
    }
    if let (Some(b0), Some(b1), Some(c)) = (bound_at(0.0), bound_at(t_max), cert) {
        let _ = writeln!(
            svg,
            r##"<line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="#d62728" stroke-dasharray="6 4" stroke-width="1.5"/>"##,
            sx(0.0),
            sy(b0),
            sx(t_max),
            sy(b1)
        );
        let _ = writeln!(
            svg,
            r##"<text x="{}" y="{}" fill="#d62728">C E(0) e^(-λt), λ = {:.4}, C = {:.3}</text>"##,
            W - M - 260.0,
            M - 10.0,
            c.lambda,
            c.c
        );
    }
    svg.push_str("</svg>\n");
    svg
}

pub fn sha256_file(path: &Path) -> Result<String> {
    let bytes = fs::read(path).map_err(|e| HarnessError::io(path, e))?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}

pub fn sha256_str(s: &str) -> String {
    hex::encode(Sha256::digest(s.as_bytes()))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutputFile {
    pub file: String,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridInfo {
    pub n: usize,
    pub dt: f64,
    pub cfl: f64,
    pub sample_every: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

/// Record tying a problem to the files it produced.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    /// SHA-256 of the canonical JSON of the problem actually run.
    pub config_hash: String,
    pub spec: serde_json::Value,
    pub grid: GridInfo,
    pub outputs: Vec<OutputFile>,
    pub wall_clock_seconds: f64,
    pub exit_code: i32,
    pub checks: Vec<CheckResult>,
    /// Certificate, fit, bound report and identity breakdown.
    pub details: serde_json::Value,
}

pub const MANIFEST_FILE: &str = "manifest.json";

pub fn write_manifest(dir: &Path, manifest: &RunManifest) -> Result<PathBuf> {
    let path = dir.join(MANIFEST_FILE);
    let text = serde_json::to_string_pretty(manifest).map_err(|source| HarnessError::Json {
        path: path.display().to_string(),
        source,
    })?;
    fs::write(&path, text).map_err(|e| HarnessError::io(&path, e))?;
    Ok(path)
}

/// Re-hashes every output listed in `dir/manifest.json`; returns the names of
/// files that are missing or whose checksum no longer matches.
pub fn verify_manifest(dir: &Path) -> Result<Vec<String>> {
    let path = dir.join(MANIFEST_FILE);
    let text = fs::read_to_string(&path).map_err(|e| HarnessError::io(&path, e))?;
    let manifest: RunManifest = serde_json::from_str(&text).map_err(|source| HarnessError::Json {
        path: path.display().to_string(),
        source,
    })?;
    let mut bad = Vec::new();
    for out in &manifest.outputs {
        match sha256_file(&dir.join(&out.file)) {
            Ok(h) if h == out.sha256 => {}
            _ => bad.push(out.file.clone()),
        }
    }
    Ok(bad)
}

#[cfg(test)]
mod tests {
    use super::*;
    use mowave_core::EnergySample;

    fn series(values: &[f64]) -> EnergySeries {
        EnergySeries::new(
            values
                .iter()
                .enumerate()
                .map(|(i, &e)| EnergySample {
                    t: i as f64 * 0.5,
                    total: e,
                    kinetic: e,
                    gradient: 0.0,
                    restoring: 0.0,
                    nonlinear: 0.0,
                    flux: 0.0,
                })
                .collect(),
        )
    }

    #[test]
    fn svg_handles_zero_and_positive_series() {
        let zero = decay_svg(&series(&[0.0, 0.0, 0.0]), None);
        assert!(zero.starts_with("<svg") && zero.trim_end().ends_with("</svg>"));
        let pos = decay_svg(&series(&[1.0, 0.5, 0.25]), None);
        assert!(pos.contains("stroke=\"#1f77b4\""));
        assert!(!pos.contains("stroke-dasharray"));
    }

    #[test]
    fn hashes_are_stable() {
        assert_eq!(
            sha256_str("abc"),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
    }
}
