//! JSON configuration files.

use std::fs;
use std::path::Path;

use mowave_core::{BetaFamily, ProblemSpec};
use serde::{Deserialize, Serialize};

use crate::exit::{HarnessError, Result};

pub fn load_spec(path: &Path) -> Result<ProblemSpec> {
    let text = fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
    serde_json::from_str(&text).map_err(|source| HarnessError::Json {
        path: path.display().to_string(),
        source,
    })
}

/// Parameter axes of a sweep. Absent axes keep the base value.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepAxes {
    #[serde(default)]
    pub mu: Vec<f64>,
    #[serde(default)]
    pub rho: Vec<f64>,
    #[serde(default)]
    pub k: Vec<f64>,
    #[serde(default)]
    pub a: Vec<f64>,
    #[serde(default)]
    pub b: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub base: ProblemSpec,
    #[serde(default)]
    pub axes: SweepAxes,
}

pub fn load_sweep(path: &Path) -> Result<SweepConfig> {
    let text = fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
    serde_json::from_str(&text).map_err(|source| HarnessError::Json {
        path: path.display().to_string(),
        source,
    })
}

/// One point of the Cartesian product, in a fixed nesting order
/// (μ outermost, then ρ, k, a, b).
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct CellParams {
    pub mu: Option<f64>,
    pub rho: Option<f64>,
    pub k: Option<f64>,
    pub a: Option<f64>,
    pub b: Option<f64>,
}

impl SweepConfig {
    pub fn cells(&self) -> Vec<CellParams> {
        fn axis(values: &[f64]) -> Vec<Option<f64>> {
            if values.is_empty() {
                vec![None]
            } else {
                values.iter().copied().map(Some).collect()
            }
        }
        let ax = &self.axes;
        let mut out = Vec::new();
        for &mu in &axis(&ax.mu) {
            for &rho in &axis(&ax.rho) {
                for &k in &axis(&ax.k) {
                    for &a in &axis(&ax.a) {
                        for &b in &axis(&ax.b) {
                            out.push(CellParams { mu, rho, k, a, b });
                        }
                    }
                }
            }
        }
        out
    }

    pub fn spec_for(&self, cell: &CellParams) -> ProblemSpec {
        let mut spec = self.base.clone();
        if let Some(mu) = cell.mu {
            let beta0 = match spec.beta {
                BetaFamily::Exponential { beta0, .. } => beta0,
                _ => 1.0,
            };
            spec.beta = BetaFamily::Exponential { beta0, mu };
        }
        if let Some(rho) = cell.rho {
            spec.damping.rho = rho;
        }
        if let Some(k) = cell.k {
            spec.alpha = spec.alpha.with_k(k);
        }
        if let Some(a) = cell.a {
            spec.damping.a = a;
        }
        if let Some(b) = cell.b {
            spec.damping.b = b;
        }
        spec
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use mowave_core::AlphaFamily;

    const BASE: &str = r#"{
        "damping": {"a": 1, "b": 1, "rho": 1},
        "beta": {"variant": "constant", "c": 1},
        "alpha": {"variant": "constant"},
        "init": {"variant": "sine_mode", "m": 1, "amp_u0": 1, "amp_u1": 0},
        "horizon": 2
    }"#;

    #[test]
    fn empty_axes_give_single_base_cell() {
        let cfg: SweepConfig = serde_json::from_str(&format!(r#"{{"base": {BASE}}}"#)).unwrap();
        let cells = cfg.cells();
        assert_eq!(cells.len(), 1);
        assert_eq!(cfg.spec_for(&cells[0]), cfg.base);
    }

    #[test]
    fn cartesian_product_and_overrides() {
        let cfg: SweepConfig = serde_json::from_str(&format!(
            r#"{{"base": {BASE}, "axes": {{"mu": [0, 0.5], "k": [0.1, 0.2, 0.3]}}}}"#
        ))
        .unwrap();
        let cells = cfg.cells();
        assert_eq!(cells.len(), 6);
        let spec = cfg.spec_for(&cells[5]);
        assert_eq!(spec.beta, BetaFamily::Exponential { beta0: 1.0, mu: 0.5 });
        assert_eq!(spec.alpha, AlphaFamily::Affine { k: 0.3 });
    }

    #[test]
    fn unknown_axis_is_rejected() {
        let r: std::result::Result<SweepConfig, _> =
            serde_json::from_str(&format!(r#"{{"base": {BASE}, "axes": {{"tau": [1]}}}}"#));
        assert!(r.is_err());
    }
}
