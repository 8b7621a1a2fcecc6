//! Problem definition: damping parameters, the coefficient families for the
//! boundary motion α(t) and the nonlinearity weight β(t), initial data, and the
//! assumption checks every problem must pass before it is simulated.
//!
//! The physical domain is Ω_t = (0, α(t)) with α(0) = 1, and the equation is
//!
//! ```text
//! u_tt − u_xx + a u_t + b u + β(t)|u|^ρ u = f
//! ```
//!
//! with homogeneous Dirichlet data on both endpoints. `f` is zero unless a
//! manufactured field is attached for verification.

use std::f64::consts::PI;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DampingParams {
    /// Linear damping coefficient, must be positive.
    pub a: f64,
    /// Restoring coefficient; zero selects the Poincaré branch of the certificate.
    pub b: f64,
    /// Nonlinearity exponent ρ.
    pub rho: f64,
}

impl DampingParams {
    pub fn new(a: f64, b: f64, rho: f64) -> Self {
        Self { a, b, rho }
    }
}

/// Weight of the nonlinear term, β(t).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "variant", rename_all = "snake_case", deny_unknown_fields)]
pub enum BetaFamily {
    Constant { c: f64 },
    /// β(t) = beta0 · e^{μ t}
    Exponential { beta0: f64, mu: f64 },
    /// β(t) = Σ coeffs[i] · t^i
    Polynomial { coeffs: Vec<f64> },
}

impl BetaFamily {
    /// Returns (β(t), β′(t)).
    pub fn eval(&self, t: f64) -> (f64, f64) {
        match self {
            BetaFamily::Constant { c } => (*c, 0.0),
            BetaFamily::Exponential { beta0, mu } => {
                let b = beta0 * (mu * t).exp();
                (b, mu * b)
            }
            BetaFamily::Polynomial { coeffs } => {
                // Horner for the value and the derivative together.
                let mut p = 0.0;
                let mut dp = 0.0;
                for &c in coeffs.iter().rev() {
                    dp = dp * t + p;
                    p = p * t + c;
                }
                (p, dp)
            }
        }
    }

    fn check(&self) -> std::result::Result<(), String> {
        match self {
            BetaFamily::Constant { c } => {
                if !(c.is_finite() && *c > 0.0) {
                    return Err(format!("constant β requires c > 0, got c = {c}"));
                }
            }
            BetaFamily::Exponential { beta0, mu } => {
                if !(beta0.is_finite() && *beta0 > 0.0) {
                    return Err(format!("exponential β requires beta0 > 0, got {beta0}"));
                }
                if !(mu.is_finite() && *mu >= 0.0) {
                    return Err(format!("exponential β requires μ ≥ 0 so that β′ ≥ 0, got μ = {mu}"));
                }
            }
            BetaFamily::Polynomial { coeffs } => {
                let Some(&a0) = coeffs.first() else {
                    return Err("polynomial β needs at least one coefficient".into());
                };
                if !(a0.is_finite() && a0 > 0.0) {
                    return Err(format!("polynomial β requires a_0 > 0, got {a0}"));
                }
                if let Some((i, c)) = coeffs
                    .iter()
                    .enumerate()
                    .find(|(_, c)| !(c.is_finite() && **c >= 0.0))
                {
                    return Err(format!(
                        "polynomial β requires a_i ≥ 0 so that β(t),β'(t)≥0; a_{i} = {c}"
                    ));
                }
            }
        }
        Ok(())
    }
}

/// Right endpoint α(t) of the physical domain (0, α(t)).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "variant", rename_all = "snake_case", deny_unknown_fields)]
pub enum AlphaFamily {
    Constant,
    /// α(t) = 1 + k t
    Affine { k: f64 },
    /// α(t) = 1 + k (1 − e^{−t/τ})
    Saturating { k: f64, tau: f64 },
}

impl AlphaFamily {
    /// Returns (α(t), α′(t), α″(t)).
    pub fn eval(&self, t: f64) -> (f64, f64, f64) {
        match *self {
            AlphaFamily::Constant => (1.0, 0.0, 0.0),
            AlphaFamily::Affine { k } => (1.0 + k * t, k, 0.0),
            AlphaFamily::Saturating { k, tau } => {
                let e = (-t / tau).exp();
                (1.0 + k * (1.0 - e), k / tau * e, -k / (tau * tau) * e)
            }
        }
    }

    /// Closed-form sup of α′ over [0, T]. Every family here has a
    /// nonincreasing α′, so the supremum sits at t = 0.
    pub fn sup_speed(&self, _horizon: f64) -> f64 {
        match *self {
            AlphaFamily::Constant => 0.0,
            AlphaFamily::Affine { k } => k,
            AlphaFamily::Saturating { k, tau } => k / tau,
        }
    }

    /// Replace the growth parameter `k`, turning a constant domain into an affine one.
    pub fn with_k(&self, k: f64) -> Self {
        match *self {
            AlphaFamily::Constant | AlphaFamily::Affine { .. } => AlphaFamily::Affine { k },
            AlphaFamily::Saturating { tau, .. } => AlphaFamily::Saturating { k, tau },
        }
    }

    pub fn k(&self) -> Option<f64> {
        match *self {
            AlphaFamily::Constant => None,
            AlphaFamily::Affine { k } | AlphaFamily::Saturating { k, .. } => Some(k),
        }
    }

    fn check(&self, horizon: f64) -> std::result::Result<(), String> {
        let (a0, _, _) = self.eval(0.0);
        if (a0 - 1.0).abs() > 1e-15 {
            return Err(format!("α(0)=1 violated: α(0) = {a0}"));
        }
        match *self {
            AlphaFamily::Constant => {}
            AlphaFamily::Affine { k } => {
                if !(k.is_finite() && k >= 0.0) {
                    return Err(format!("α'(t)≥0 violated: affine slope k = {k}"));
                }
            }
            AlphaFamily::Saturating { k, tau } => {
                if !(tau.is_finite() && tau > 0.0) {
                    return Err(format!("saturating α requires τ > 0, got τ = {tau}"));
                }
                if !(k.is_finite() && k >= 0.0) {
                    return Err(format!("α'(t)≥0 violated: saturating amplitude k = {k}"));
                }
            }
        }
        let sup = self.sup_speed(horizon);
        if sup >= 1.0 {
            return Err(format!(
                "sup α'(t)<1 violated: sup α'(t) = {sup} on [0, {horizon}]"
            ));
        }
        Ok(())
    }
}

/// Initial displacement and velocity on the reference interval (0, 1).
///
/// Because α(0) = 1 the reference and physical coordinates coincide at t = 0.
/// The velocity is taken as the reference-frame velocity v_t(y, 0); see
/// [`crate::solver::initialize`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "variant", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialData {
    /// u0 = amp_u0 sin(mπy), u1 = amp_u1 sin(mπy)
    SineMode { m: u32, amp_u0: f64, amp_u1: f64 },
    /// Smooth compactly supported bump for u0; zero velocity.
    Bump { center: f64, width: f64, amp: f64 },
    /// Nodal values on the simulation grid (length N + 1).
    GridSamples { u0: Vec<f64>, u1: Vec<f64> },
}

impl InitialData {
    /// Nodal values (u0, u1) on the uniform grid with `n` intervals.
    pub fn nodal_values(&self, n: usize) -> Result<(Vec<f64>, Vec<f64>)> {
        let dy = 1.0 / n as f64;
        match self {
            InitialData::SineMode { m, amp_u0, amp_u1 } => {
                let shape: Vec<f64> = (0..=n)
                    .map(|i| (*m as f64 * PI * i as f64 * dy).sin())
                    .collect();
                Ok((
                    shape.iter().map(|s| amp_u0 * s).collect(),
                    shape.iter().map(|s| amp_u1 * s).collect(),
                ))
            }
            InitialData::Bump { center, width, amp } => {
                let u0 = (0..=n)
                    .map(|i| amp * bump((i as f64 * dy - center) / width))
                    .collect();
                Ok((u0, vec![0.0; n + 1]))
            }
            InitialData::GridSamples { u0, u1 } => {
                if u0.len() != n + 1 || u1.len() != n + 1 {
                    return Err(Error::Config(format!(
                        "grid samples have lengths ({}, {}), expected N + 1 = {}",
                        u0.len(),
                        u1.len(),
                        n + 1
                    )));
                }
                Ok((u0.clone(), u1.clone()))
            }
        }
    }

    fn check(&self) -> std::result::Result<(), String> {
        match self {
            InitialData::SineMode { m, amp_u0, amp_u1 } => {
                if *m == 0 {
                    return Err("sine mode index m must be ≥ 1".into());
                }
                if !(amp_u0.is_finite() && amp_u1.is_finite()) {
                    return Err("sine mode amplitudes must be finite".into());
                }
            }
            InitialData::Bump { width, amp, center } => {
                if !(width.is_finite() && *width > 0.0) {
                    return Err(format!("bump width must be positive, got {width}"));
                }
                if !(amp.is_finite() && center.is_finite()) {
                    return Err("bump center and amplitude must be finite".into());
                }
            }
            InitialData::GridSamples { u0, u1 } => {
                if u0.len() < 2 || u1.len() < 2 {
                    return Err("grid samples need at least two nodes".into());
                }
                if u0.iter().chain(u1).any(|v| !v.is_finite()) {
                    return Err("grid samples contain non-finite values".into());
                }
                let ends = [u0[0], u0[u0.len() - 1], u1[0], u1[u1.len() - 1]];
                if ends.iter().any(|v| v.abs() > 1e-12) {
                    return Err(format!(
                        "initial data must vanish at both endpoints (u=0 on the boundary), got {ends:?}"
                    ));
                }
            }
        }
        Ok(())
    }
}

fn bump(r: f64) -> f64 {
    if r.abs() >= 1.0 {
        0.0
    } else {
        (1.0 - 1.0 / (1.0 - r * r)).exp()
    }
}

/// Exact field u(x, t) = amplitude · sin(mode·π·x/α(t)) · e^{−decay·t} used for
/// manufactured-solution verification. It vanishes on both endpoints for every α.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ManufacturedField {
    pub mode: u32,
    pub amplitude: f64,
    pub decay: f64,
}

impl Default for ManufacturedField {
    fn default() -> Self {
        Self {
            mode: 1,
            amplitude: 1.0,
            decay: 1.0,
        }
    }
}

/// One complete experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemSpec {
    pub damping: DampingParams,
    pub beta: BetaFamily,
    pub alpha: AlphaFamily,
    pub init: InitialData,
    pub horizon: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub manufactured: Option<ManufacturedField>,
    /// Drops the nonlinear term entirely. Only meant for oracle runs; it lies
    /// outside the assumptions and is flagged as such in validation reports.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub linear_mode: bool,
    /// Use ½u² for the restoring energy instead of (b/2)u².
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub paper_literal_energy: bool,
}

impl ProblemSpec {
    pub fn new(
        damping: DampingParams,
        beta: BetaFamily,
        alpha: AlphaFamily,
        init: InitialData,
        horizon: f64,
    ) -> Self {
        Self {
            damping,
            beta,
            alpha,
            init,
            horizon,
            manufactured: None,
            linear_mode: false,
            paper_literal_energy: false,
        }
    }

    /// (β, β′) at time t, or zeros in linear mode.
    pub fn beta_at(&self, t: f64) -> (f64, f64) {
        if self.linear_mode {
            (0.0, 0.0)
        } else {
            self.beta.eval(t)
        }
    }
}

/// Convenience wrapper matching the operation name used throughout the docs.
pub fn eval_alpha(alpha: &AlphaFamily, t: f64) -> (f64, f64, f64) {
    alpha.eval(t)
}

pub fn eval_beta(beta: &BetaFamily, t: f64) -> (f64, f64) {
    beta.eval(t)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Assumption {
    /// Boundary motion: α(0)=1, α′ ≥ 0, sup α′ < 1.
    A1,
    /// Nonlinearity weight: β > 0, β′ ≥ 0.
    A2,
    /// Exponent: ρ > 0 in one space dimension.
    A3,
    Damping,
    Horizon,
    InitialData,
}

impl fmt::Display for Assumption {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Assumption::A1 => "A1",
            Assumption::A2 => "A2",
            Assumption::A3 => "A3",
            Assumption::Damping => "damping",
            Assumption::Horizon => "horizon",
            Assumption::InitialData => "initial-data",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AssumptionCheck {
    pub assumption: Assumption,
    pub passed: bool,
    pub diagnostic: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub checks: Vec<AssumptionCheck>,
    /// Informational remarks that do not fail validation.
    pub notes: Vec<String>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn check(&self, which: Assumption) -> Option<&AssumptionCheck> {
        self.checks.iter().find(|c| c.assumption == which)
    }

    pub fn failures(&self) -> impl Iterator<Item = &AssumptionCheck> {
        self.checks.iter().filter(|c| !c.passed)
    }

    /// Turns a failing report into an error listing every failure.
    pub fn into_result(self) -> Result<Self> {
        if self.is_ok() {
            return Ok(self);
        }
        let msg = self
            .failures()
            .map(|c| format!("({}) {}", c.assumption, c.diagnostic))
            .collect::<Vec<_>>()
            .join("; ");
        Err(Error::Validation(msg))
    }
}

fn entry(assumption: Assumption, outcome: std::result::Result<(), String>) -> AssumptionCheck {
    match outcome {
        Ok(()) => AssumptionCheck {
            assumption,
            passed: true,
            diagnostic: "ok".into(),
        },
        Err(diagnostic) => AssumptionCheck {
            assumption,
            passed: false,
            diagnostic,
        },
    }
}

/// Checks (A1)–(A3) plus the basic well-formedness of the problem. Never
/// fails; every problem is reported in the returned value.
pub fn validate_assumptions(spec: &ProblemSpec) -> ValidationReport {
    let d = &spec.damping;
    let mut checks = Vec::with_capacity(6);
    checks.push(entry(Assumption::A1, spec.alpha.check(spec.horizon)));
    checks.push(entry(Assumption::A2, spec.beta.check()));
    checks.push(entry(
        Assumption::A3,
        if d.rho.is_finite() && d.rho > 0.0 {
            Ok(())
        } else {
            Err(format!("0<ρ<∞ violated: ρ = {}", d.rho))
        },
    ));
    checks.push(entry(
        Assumption::Damping,
        if !(d.a.is_finite() && d.a > 0.0) {
            Err(format!("damping requires a > 0, got a = {}", d.a))
        } else if !(d.b.is_finite() && d.b >= 0.0) {
            Err(format!("damping requires b ≥ 0, got b = {}", d.b))
        } else {
            Ok(())
        },
    ));
    checks.push(entry(
        Assumption::Horizon,
        if spec.horizon.is_finite() && spec.horizon > 0.0 {
            Ok(())
        } else {
            Err(format!("horizon must be positive and finite, got {}", spec.horizon))
        },
    ));
    checks.push(entry(Assumption::InitialData, spec.init.check()));

    let mut notes = Vec::new();
    if spec.linear_mode {
        notes.push("linear_mode: nonlinear term disabled, outside the well-posedness assumptions".into());
    }
    if d.b == 0.0 {
        notes.push("b = 0: certificate uses the Poincaré branch".into());
    }
    if spec.manufactured.is_some() {
        notes.push("manufactured forcing attached; decay bound does not apply".into());
    }
    ValidationReport { checks, notes }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn baseline() -> ProblemSpec {
        ProblemSpec::new(
            DampingParams::new(1.0, 1.0, 1.0),
            BetaFamily::Constant { c: 1.0 },
            AlphaFamily::Constant,
            InitialData::SineMode {
                m: 1,
                amp_u0: 1.0,
                amp_u1: 0.0,
            },
            1.0,
        )
    }

    #[test]
    fn cylindrical_baseline_passes_everything() {
        let report = validate_assumptions(&baseline());
        assert!(report.is_ok(), "{report:?}");
        assert_eq!(report.checks.len(), 6);
    }

    #[test]
    fn affine_unit_slope_fails_a1() {
        let mut spec = baseline();
        spec.alpha = AlphaFamily::Affine { k: 1.0 };
        let report = validate_assumptions(&spec);
        let a1 = report.check(Assumption::A1).unwrap();
        assert!(!a1.passed);
        assert!(a1.diagnostic.contains("sup α'(t)<1"), "{}", a1.diagnostic);
        assert!(report.check(Assumption::A2).unwrap().passed);
        assert!(report.into_result().is_err());
    }

    #[test]
    fn saturating_speed_limit() {
        let mut spec = baseline();
        spec.alpha = AlphaFamily::Saturating { k: 0.9, tau: 1.0 };
        assert!(validate_assumptions(&spec).is_ok());
        spec.alpha = AlphaFamily::Saturating { k: 0.5, tau: 0.5 };
        assert!(!validate_assumptions(&spec).check(Assumption::A1).unwrap().passed);
        spec.alpha = AlphaFamily::Saturating { k: 0.5, tau: 0.0 };
        assert!(!validate_assumptions(&spec).is_ok());
    }

    #[test]
    fn negative_polynomial_coefficient_fails_a2() {
        let mut spec = baseline();
        spec.beta = BetaFamily::Polynomial {
            coeffs: vec![1.0, -0.5],
        };
        let report = validate_assumptions(&spec);
        assert!(!report.check(Assumption::A2).unwrap().passed);
        assert!(report.check(Assumption::A1).unwrap().passed);
    }

    #[test]
    fn other_rejections() {
        let mut spec = baseline();
        spec.beta = BetaFamily::Exponential { beta0: 1.0, mu: -0.1 };
        assert!(!validate_assumptions(&spec).check(Assumption::A2).unwrap().passed);

        let mut spec = baseline();
        spec.damping.rho = 0.0;
        assert!(!validate_assumptions(&spec).check(Assumption::A3).unwrap().passed);

        let mut spec = baseline();
        spec.damping.a = 0.0;
        assert!(!validate_assumptions(&spec).check(Assumption::Damping).unwrap().passed);

        let mut spec = baseline();
        spec.damping.b = 0.0;
        let report = validate_assumptions(&spec);
        assert!(report.is_ok());
        assert!(report.notes.iter().any(|n| n.contains("Poincaré")));

        let mut spec = baseline();
        spec.init = InitialData::GridSamples {
            u0: vec![0.0, 1.0, 0.5],
            u1: vec![0.0, 0.0, 0.0],
        };
        assert!(!validate_assumptions(&spec).check(Assumption::InitialData).unwrap().passed);
    }

    #[test]
    fn linear_mode_is_flagged_not_rejected() {
        let mut spec = baseline();
        spec.linear_mode = true;
        let report = validate_assumptions(&spec);
        assert!(report.is_ok());
        assert!(report.notes[0].contains("outside the well-posedness assumptions"));
        assert_eq!(spec.beta_at(3.0), (0.0, 0.0));
    }

    #[test]
    fn alpha_closed_forms() {
        assert_eq!(eval_alpha(&AlphaFamily::Affine { k: 0.5 }, 2.0), (2.0, 0.5, 0.0));
        assert_eq!(eval_alpha(&AlphaFamily::Constant, 17.0), (1.0, 0.0, 0.0));
        let (a, da, dda) = eval_alpha(&AlphaFamily::Saturating { k: 0.5, tau: 1.0 }, 0.0);
        assert_abs_diff_eq!(a, 1.0);
        assert_abs_diff_eq!(da, 0.5);
        assert_abs_diff_eq!(dda, -0.5);
    }

    #[test]
    fn beta_closed_forms() {
        let (b, db) = eval_beta(&BetaFamily::Exponential { beta0: 1.0, mu: 0.2 }, 0.0);
        assert_abs_diff_eq!(b, 1.0);
        assert_abs_diff_eq!(db, 0.2);
        assert_eq!(eval_beta(&BetaFamily::Constant { c: 3.0 }, 7.0), (3.0, 0.0));
        assert_eq!(
            eval_beta(&BetaFamily::Polynomial { coeffs: vec![1.0, 2.0] }, 1.0),
            (3.0, 2.0)
        );
        assert_eq!(
            eval_beta(&BetaFamily::Polynomial { coeffs: vec![1.0, 0.0, 3.0] }, 2.0),
            (13.0, 12.0)
        );
    }

    #[test]
    fn sine_initial_data() {
        let (u0, u1) = InitialData::SineMode {
            m: 1,
            amp_u0: 1.0,
            amp_u1: 0.0,
        }
        .nodal_values(8)
        .unwrap();
        assert_abs_diff_eq!(u0[2], 0.5f64.sqrt(), epsilon = 1e-15);
        assert_abs_diff_eq!(u0[4], 1.0, epsilon = 1e-15);
        assert!(u1.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn grid_samples_length_mismatch() {
        let init = InitialData::GridSamples {
            u0: vec![0.0; 5],
            u1: vec![0.0; 5],
        };
        assert!(matches!(init.nodal_values(8), Err(Error::Config(_))));
    }

    #[test]
    fn json_round_trip_and_unknown_keys() {
        let json = r#"{
            "damping": {"a": 1, "b": 1, "rho": 1},
            "beta": {"variant": "exponential", "beta0": 1, "mu": 0.1},
            "alpha": {"variant": "saturating", "k": 0.5, "tau": 1},
            "init": {"variant": "sine_mode", "m": 1, "amp_u0": 1, "amp_u1": 0},
            "horizon": 10
        }"#;
        let spec: ProblemSpec = serde_json::from_str(json).unwrap();
        assert_eq!(spec.alpha, AlphaFamily::Saturating { k: 0.5, tau: 1.0 });
        let back: ProblemSpec = serde_json::from_str(&serde_json::to_string(&spec).unwrap()).unwrap();
        assert_eq!(back, spec);

        let bad = json.replace("\"horizon\": 10", "\"horizon\": 10, \"extra\": 1");
        assert!(serde_json::from_str::<ProblemSpec>(&bad).is_err());
        let bad = json.replace("\"mu\": 0.1", "\"mu\": 0.1, \"nu\": 2");
        assert!(serde_json::from_str::<ProblemSpec>(&bad).is_err());
    }
}
