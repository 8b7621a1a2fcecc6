//! Decay certificates: an admissible rate window [λ_lo, λ_hi], the constant C
//! in E(t) ≤ C E(0) e^{−λt}, and the comparison with measured decay.
//!
//! λ_lo comes from the growth condition λ(ρ+1)β(t) ≥ β′(t). λ_hi is the end
//! of the interval starting at 0 on which every bulk coefficient of the
//! multiplier inequality (with φ = e^{λt}) is nonpositive and the multiplier
//! functional stays equivalent to the energy.

use serde::Serialize;

use crate::energy::EnergySeries;
use crate::error::{Error, Result};
use crate::model::{AlphaFamily, BetaFamily, DampingParams, ProblemSpec};

/// Coercivity headroom: λ is kept at most (1 − δ) of the value where the
/// multiplier functional degenerates.
pub const COERCIVITY_MARGIN: f64 = 0.1;
pub const LAMBDA_TOLERANCE: f64 = 1e-10;
const SCAN_POINTS: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Branch {
    /// b > 0: the restoring term controls the mixed term directly.
    Standard,
    /// b = 0: Poincaré inequality on the largest domain Ω* = (0, α(T)).
    Remark1,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Condition {
    pub name: String,
    /// Slack of the inequality at the certified λ; nonnegative when satisfied.
    pub value: f64,
    pub satisfied: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecayCertificate {
    pub branch: Branch,
    pub lambda_lo: f64,
    pub lambda_hi: f64,
    pub lambda: f64,
    #[serde(rename = "C")]
    pub c: f64,
    /// |Ω*| used by the Poincaré branch.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub omega_star: Option<f64>,
    pub conditions: Vec<Condition>,
}

impl DecayCertificate {
    /// C e^{−λt}, the certified envelope of E(t)/E(0).
    pub fn envelope(&self, t: f64) -> f64 {
        self.c * (-self.lambda * t).exp()
    }
}

/// Both ends of the window, even when it is empty.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LambdaBounds {
    pub branch: Branch,
    pub lambda_lo: f64,
    pub lambda_hi: f64,
    pub omega_star: Option<f64>,
}

impl LambdaBounds {
    pub fn is_empty(&self) -> bool {
        self.lambda_lo > self.lambda_hi
    }
}

/// sup_{t∈[0,T]} β′(t)/((ρ+1)β(t)).
pub fn lambda_lo(beta: &BetaFamily, rho: f64, horizon: f64) -> f64 {
    let ratio_sup = match beta {
        BetaFamily::Constant { .. } => 0.0,
        BetaFamily::Exponential { mu, .. } => *mu,
        BetaFamily::Polynomial { .. } => {
            let ratio = |t: f64| {
                let (b, db) = beta.eval(t);
                db / b
            };
            sup_on_interval(ratio, 0.0, horizon)
        }
    };
    ratio_sup / (rho + 1.0)
}

/// Dense sampling followed by golden-section refinement around the best sample.
fn sup_on_interval(f: impl Fn(f64) -> f64, lo: f64, hi: f64) -> f64 {
    if hi <= lo {
        return f(lo);
    }
    let samples = 2048;
    let h = (hi - lo) / samples as f64;
    let (best_i, best) = (0..=samples)
        .map(|i| (i, f(lo + i as f64 * h)))
        .fold((0, f64::NEG_INFINITY), |acc, x| if x.1 > acc.1 { x } else { acc });
    let mut a = (lo + (best_i as f64 - 1.0) * h).max(lo);
    let mut b = (lo + (best_i as f64 + 1.0) * h).min(hi);
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    for _ in 0..100 {
        if f(c) > f(d) {
            b = d;
        } else {
            a = c;
        }
        c = b - inv_phi * (b - a);
        d = a + inv_phi * (b - a);
        if (b - a).abs() < 1e-14 {
            break;
        }
    }
    best.max(f(0.5 * (a + b)))
}

/// Sign conditions of the standard branch at rate λ, as slacks (≥ 0 ⇔ satisfied).
fn standard_slacks(p: &DampingParams, lambda: f64) -> [(&'static str, f64); 3] {
    let a = p.a;
    let b = p.b;
    [
        ("ut2_coefficient: 3λ/2 ≤ a", a - 1.5 * lambda),
        (
            "mixed_block_determinant: 2b(a − 3λ/2) ≥ λ(λ − a)²",
            2.0 * b * (a - 1.5 * lambda) - lambda * (lambda - a).powi(2),
        ),
        (
            "coercivity: λ ≤ (1 − δ)√b",
            (1.0 - COERCIVITY_MARGIN) * b.sqrt() - lambda,
        ),
    ]
}

fn poincare_slacks(p: &DampingParams, omega: f64, lambda: f64) -> [(&'static str, f64, bool); 4] {
    let a = p.a;
    [
        ("ut2_coefficient: 3λ/2 ≤ a", a - 1.5 * lambda, false),
        ("poincare: aλ|Ω*|² < 1", 1.0 - a * lambda * omega * omega, true),
        (
            "young_absorption: λ(3/2 + a²|Ω*|²/2) ≤ a/2",
            0.5 * a - lambda * (1.5 + 0.5 * a * a * omega * omega),
            false,
        ),
        (
            "coercivity: λ|Ω*| ≤ 1 − δ",
            (1.0 - COERCIVITY_MARGIN) - lambda * omega,
            false,
        ),
    ]
}

fn feasible(p: &DampingParams, omega: Option<f64>, lambda: f64) -> bool {
    match omega {
        None => standard_slacks(p, lambda).iter().all(|(_, s)| *s >= 0.0),
        Some(om) => poincare_slacks(p, om, lambda)
            .iter()
            .all(|(_, s, strict)| if *strict { *s > 0.0 } else { *s >= 0.0 }),
    }
}

/// Right end of the feasible interval that starts at λ = 0: scan for the first
/// failure below the hard cap, then bisect.
fn feasible_end(p: &DampingParams, omega: Option<f64>) -> f64 {
    let cap = 2.0 * p.a / 3.0;
    if !feasible(p, omega, 0.0) {
        return 0.0;
    }
    let h = cap / SCAN_POINTS as f64;
    let mut good = 0.0;
    let mut bad = None;
    for i in 1..=SCAN_POINTS {
        let l = i as f64 * h;
        if feasible(p, omega, l) {
            good = l;
        } else {
            bad = Some(l);
            break;
        }
    }
    let Some(mut bad) = bad else {
        return cap;
    };
    while bad - good > LAMBDA_TOLERANCE {
        let mid = 0.5 * (good + bad);
        if feasible(p, omega, mid) {
            good = mid;
        } else {
            bad = mid;
        }
    }
    good
}

fn omega_star(alpha: &AlphaFamily, horizon: f64) -> Result<f64> {
    if horizon.is_finite() {
        return Ok(alpha.eval(horizon).0);
    }
    match *alpha {
        AlphaFamily::Constant => Ok(1.0),
        AlphaFamily::Saturating { k, .. } => Ok(1.0 + k),
        AlphaFamily::Affine { k: 0.0 } => Ok(1.0),
        AlphaFamily::Affine { .. } => Err(Error::Unsupported(
            "b = 0 needs a bounded domain; an affine boundary on an unbounded horizon has no finite |Ω*|"
                .into(),
        )),
    }
}

pub fn lambda_bounds(
    params: &DampingParams,
    beta: &BetaFamily,
    alpha: &AlphaFamily,
    horizon: f64,
) -> Result<LambdaBounds> {
    let lo = lambda_lo(beta, params.rho, if horizon.is_finite() { horizon } else { 1e3 });
    if params.b > 0.0 {
        Ok(LambdaBounds {
            branch: Branch::Standard,
            lambda_lo: lo,
            lambda_hi: feasible_end(params, None),
            omega_star: None,
        })
    } else {
        let om = omega_star(alpha, horizon)?;
        Ok(LambdaBounds {
            branch: Branch::Remark1,
            lambda_lo: lo,
            lambda_hi: feasible_end(params, Some(om)),
            omega_star: Some(om),
        })
    }
}

/// Admissible (λ_lo, λ_hi), or `None` when the growth of β forces λ_lo above λ_hi.
pub fn lambda_window(
    params: &DampingParams,
    beta: &BetaFamily,
    alpha: &AlphaFamily,
    horizon: f64,
) -> Result<Option<(f64, f64)>> {
    let b = lambda_bounds(params, beta, alpha, horizon)?;
    Ok((!b.is_empty()).then_some((b.lambda_lo, b.lambda_hi)))
}

/// Equivalence constant between the multiplier functional and the energy,
/// from |λuu_t| ≤ (λ/√b)(½u_t² + (b/2)u²).
pub fn constant_c(params: &DampingParams, lambda: f64) -> Result<f64> {
    if !(params.b > 0.0) {
        return Err(Error::Precondition(
            "constant_c needs b > 0; use constant_c_poincare for b = 0".into(),
        ));
    }
    let r = lambda / params.b.sqrt();
    if !(0.0..1.0).contains(&r) {
        return Err(Error::Precondition(format!(
            "λ = {lambda} must lie in [0, √b) = [0, {})",
            params.b.sqrt()
        )));
    }
    Ok((1.0 + r) / (1.0 - r))
}

/// b = 0 analogue using ‖u‖ ≤ |Ω*| ‖u_x‖.
pub fn constant_c_poincare(lambda: f64, omega_star: f64) -> Result<f64> {
    let r = lambda * omega_star;
    if !(0.0..1.0).contains(&r) {
        return Err(Error::Precondition(format!(
            "λ|Ω*| = {r} must lie in [0, 1)"
        )));
    }
    Ok((1.0 + r) / (1.0 - r))
}

/// Builds the certificate at λ = λ_hi, or `None` for an empty window.
pub fn certify(
    params: &DampingParams,
    beta: &BetaFamily,
    alpha: &AlphaFamily,
    horizon: f64,
) -> Result<Option<DecayCertificate>> {
    let bounds = lambda_bounds(params, beta, alpha, horizon)?;
    if bounds.is_empty() {
        return Ok(None);
    }
    let lambda = bounds.lambda_hi;
    let mut conditions = vec![Condition {
        name: "beta_growth: λ(ρ+1)β(t) ≥ β′(t)".into(),
        value: lambda - bounds.lambda_lo,
        satisfied: lambda >= bounds.lambda_lo,
    }];
    let c = match bounds.omega_star {
        None => {
            conditions.extend(standard_slacks(params, lambda).iter().map(|(n, s)| Condition {
                name: (*n).into(),
                value: *s,
                satisfied: *s >= 0.0,
            }));
            constant_c(params, lambda)?
        }
        Some(om) => {
            conditions.extend(poincare_slacks(params, om, lambda).iter().map(|(n, s, strict)| {
                Condition {
                    name: (*n).into(),
                    value: *s,
                    satisfied: if *strict { *s > 0.0 } else { *s >= 0.0 },
                }
            }));
            constant_c_poincare(lambda, om)?
        }
    };
    Ok(Some(DecayCertificate {
        branch: bounds.branch,
        lambda_lo: bounds.lambda_lo,
        lambda_hi: bounds.lambda_hi,
        lambda,
        c,
        omega_star: bounds.omega_star,
        conditions,
    }))
}

pub fn certify_spec(spec: &ProblemSpec) -> Result<Option<DecayCertificate>> {
    certify(&spec.damping, &spec.beta, &spec.alpha, spec.horizon)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EmpiricalDecay {
    pub lambda_fit: f64,
    pub c_fit: f64,
    pub r_squared: f64,
    /// Time interval covered by the samples used in the fit.
    pub window: (f64, f64),
}

pub const FIT_FLOOR: f64 = 1e-12;
pub const FIT_MIN_SAMPLES: usize = 10;

/// Least-squares line through (t, ln E) over the samples above the floor
/// 10⁻¹² E(0).
pub fn fit_decay(series: &EnergySeries) -> Result<EmpiricalDecay> {
    let e0 = series
        .initial()
        .ok_or_else(|| Error::DegenerateData("empty energy series".into()))?;
    if !(e0 > 0.0 && e0.is_finite()) {
        return Err(Error::DegenerateData(format!("initial energy {e0} is not positive")));
    }
    let floor = FIT_FLOOR * e0;
    let pts: Vec<(f64, f64)> = series
        .samples
        .iter()
        .filter(|s| s.total > floor)
        .map(|s| (s.t, s.total.ln()))
        .collect();
    if pts.len() < FIT_MIN_SAMPLES {
        return Err(Error::DegenerateData(format!(
            "only {} samples above the floor, need {FIT_MIN_SAMPLES}",
            pts.len()
        )));
    }
    let n = pts.len() as f64;
    let mean_t = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let mean_y = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let stt: f64 = pts.iter().map(|p| (p.0 - mean_t).powi(2)).sum();
    let sty: f64 = pts.iter().map(|p| (p.0 - mean_t) * (p.1 - mean_y)).sum();
    if stt == 0.0 {
        return Err(Error::DegenerateData("all samples share one time".into()));
    }
    let slope = sty / stt;
    let intercept = mean_y - slope * mean_t;
    let ss_tot: f64 = pts.iter().map(|p| (p.1 - mean_y).powi(2)).sum();
    let ss_res: f64 = pts
        .iter()
        .map(|p| (p.1 - intercept - slope * p.0).powi(2))
        .sum();
    let r_squared = if ss_tot > 0.0 { 1.0 - ss_res / ss_tot } else { 1.0 };
    Ok(EmpiricalDecay {
        lambda_fit: -slope,
        c_fit: intercept.exp() / e0,
        r_squared,
        window: (pts[0].0, pts[pts.len() - 1].0),
    })
}

/// Relative slack granted to the decay bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundTolerance {
    pub relative: f64,
    /// Discretization allowance added on top of `relative`.
    pub allowance: f64,
}

impl Default for BoundTolerance {
    fn default() -> Self {
        Self {
            relative: 1e-6,
            allowance: 0.0,
        }
    }
}

impl BoundTolerance {
    /// 10⁻⁶ plus 10·dt², the latter inflated by the energy-rate residual
    /// measured relative to E(0).
    pub fn for_run(dt: f64, residual_rate: f64, e0: f64) -> Self {
        let scale = if e0 > 0.0 { 1.0 + residual_rate / e0 } else { 1.0 };
        Self {
            relative: 1e-6,
            allowance: 10.0 * dt * dt * scale,
        }
    }

    pub fn total(&self) -> f64 {
        self.relative + self.allowance
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundReport {
    pub holds: bool,
    /// max_k E(t_k) / (C E(0) e^{−λ t_k}).
    pub worst_margin: f64,
    pub first_violation: Option<f64>,
}

pub fn check_decay_bound(series: &EnergySeries, cert: &DecayCertificate, tol: &BoundTolerance) -> BoundReport {
    let e0 = series.initial().unwrap_or(0.0);
    let slack = 1.0 + tol.total();
    let mut worst: f64 = 0.0;
    let mut first_violation = None;
    for s in &series.samples {
        let bound = e0 * cert.envelope(s.t);
        let ratio = if bound > 0.0 {
            s.total / bound
        } else if s.total > 0.0 {
            f64::INFINITY
        } else {
            0.0
        };
        worst = worst.max(ratio);
        if ratio > slack && first_violation.is_none() {
            first_violation = Some(s.t);
        }
    }
    BoundReport {
        holds: first_violation.is_none(),
        worst_margin: worst,
        first_violation,
    }
}
