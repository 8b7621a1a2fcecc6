//! Energy functional and the numerical checks of the identities behind the
//! decay estimate.
//!
//! Physical derivatives are reconstructed from the reference state through
//! u_t = w − (yα′/α) v_y and u_x = v_y/α, and every spatial integral over
//! Ω_t = (0, α) is computed as α ∫₀¹ (·) dy with composite Simpson.
//!
//! The energy-rate identity, obtained by multiplying the equation by u_t and
//! differentiating under the moving integral, reads
//!
//! ```text
//! dE/dt = −a ∫ u_t² − ½α′(1 − α′²) u_x(α)² + β′/(ρ+2) ∫ |u|^{ρ+2} + ∫ f u_t
//! ```
//!
//! where the second term is the boundary flux returned by [`boundary_flux`].

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::ProblemSpec;
use crate::quadrature::{gradient, simpson, three_point_derivative, trapezoid};
use crate::solver::{manufactured_forcing, Forcing, Grid, ReferenceState, Trajectory};
use crate::transform::frame_velocity;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EnergySample {
    pub t: f64,
    #[serde(rename = "E")]
    pub total: f64,
    pub kinetic: f64,
    pub gradient: f64,
    pub restoring: f64,
    pub nonlinear: f64,
    /// Boundary flux at the moving endpoint, without the φ weight.
    pub flux: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct EnergySeries {
    pub samples: Vec<EnergySample>,
}

impl EnergySeries {
    pub fn new(samples: Vec<EnergySample>) -> Self {
        Self { samples }
    }

    pub fn times(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.t).collect()
    }

    pub fn values(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.total).collect()
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn initial(&self) -> Option<f64> {
        self.samples.first().map(|s| s.total)
    }
}

/// Physical u_t, u_x at every node plus α, α′ at the state's time.
struct PhysicalFields {
    alpha: f64,
    dalpha: f64,
    u_t: Vec<f64>,
    u_x: Vec<f64>,
}

fn grid_of(state: &ReferenceState) -> Grid {
    Grid::new(state.v.len() - 1).expect("reference states come from a valid grid")
}

fn physical_fields(state: &ReferenceState, spec: &ProblemSpec) -> PhysicalFields {
    let grid = grid_of(state);
    let (alpha, dalpha, _) = spec.alpha.eval(state.t);
    let mut v_y = vec![0.0; grid.nodes()];
    gradient(&state.v, grid.dy(), &mut v_y);
    let u_t = v_y
        .iter()
        .zip(&state.w)
        .enumerate()
        .map(|(i, (vy, w))| w - frame_velocity(grid.y(i), alpha, dalpha) * vy)
        .collect();
    let u_x = v_y.iter().map(|vy| vy / alpha).collect();
    PhysicalFields {
        alpha,
        dalpha,
        u_t,
        u_x,
    }
}

/// ∫_{Ω_t} g dx for nodal values g on the reference grid.
fn integrate(alpha: f64, dy: f64, values: &[f64]) -> f64 {
    alpha * simpson(values, dy)
}

/// ½ α′ (1 − α′²) u_x²: the net outflow of energy through a boundary moving
/// at speed α′ on which u = 0 (so u_t = −α′ u_x). Nonnegative whenever
/// 0 ≤ α′ < 1.
pub fn flux_formula(dalpha: f64, u_x: f64) -> f64 {
    0.5 * dalpha * (1.0 - dalpha * dalpha) * u_x * u_x
}

pub fn boundary_flux(state: &ReferenceState, spec: &ProblemSpec) -> f64 {
    let grid = grid_of(state);
    let n = grid.intervals();
    let (alpha, dalpha, _) = spec.alpha.eval(state.t);
    if dalpha == 0.0 {
        return 0.0;
    }
    let v = &state.v;
    let v_y = (3.0 * v[n] - 4.0 * v[n - 1] + v[n - 2]) * 0.5 / grid.dy();
    flux_formula(dalpha, v_y / alpha)
}

fn energy_parts(state: &ReferenceState, spec: &ProblemSpec, literal: bool) -> EnergySample {
    let grid = grid_of(state);
    let dy = grid.dy();
    let f = physical_fields(state, spec);
    let (beta, _) = spec.beta_at(state.t);
    let rho = spec.damping.rho;
    let b = if literal { 1.0 } else { spec.damping.b };

    let sq = |xs: &[f64]| xs.iter().map(|x| 0.5 * x * x).collect::<Vec<_>>();
    let kinetic = integrate(f.alpha, dy, &sq(&f.u_t));
    let gradient = integrate(f.alpha, dy, &sq(&f.u_x));
    let restoring = b * integrate(f.alpha, dy, &sq(&state.v));
    let nonlinear = if beta == 0.0 {
        0.0
    } else {
        let p: Vec<f64> = state.v.iter().map(|v| v.abs().powf(rho + 2.0)).collect();
        beta / (rho + 2.0) * integrate(f.alpha, dy, &p)
    };
    EnergySample {
        t: state.t,
        total: kinetic + gradient + restoring + nonlinear,
        kinetic,
        gradient,
        restoring,
        nonlinear,
        flux: boundary_flux(state, spec),
    }
}

/// E(t) = ∫_{Ω_t} ½u_t² + ½u_x² + (b/2)u² + β/(ρ+2)|u|^{ρ+2} dx, or with ½u²
/// for the restoring part when the spec asks for the literal convention.
pub fn energy(state: &ReferenceState, spec: &ProblemSpec) -> EnergySample {
    energy_parts(state, spec, spec.paper_literal_energy)
}

pub fn energy_series(traj: &Trajectory) -> EnergySeries {
    EnergySeries::new(traj.snapshots.iter().map(|s| energy(s, &traj.spec)).collect())
}

/// Spatial integrals of one snapshot used by both identity checks.
#[derive(Debug, Clone, Copy)]
struct SnapshotIntegrals {
    t: f64,
    dalpha: f64,
    beta: f64,
    dbeta: f64,
    /// b-weighted energy.
    energy: f64,
    ut2: f64,
    uut: f64,
    ux2: f64,
    u2: f64,
    potential: f64,
    f_ut: f64,
    f_u: f64,
    /// u_x u_t at x = α minus the same at x = 0.
    flux_product: f64,
    ut_end: f64,
    ux_end: f64,
    flux: f64,
}

fn snapshot_integrals(state: &ReferenceState, spec: &ProblemSpec, forcing: Option<&Forcing>) -> SnapshotIntegrals {
    let grid = grid_of(state);
    let n = grid.intervals();
    let dy = grid.dy();
    let f = physical_fields(state, spec);
    let (beta, dbeta) = spec.beta_at(state.t);
    let rho = spec.damping.rho;
    let int = |g: &dyn Fn(usize) -> f64| {
        let vals: Vec<f64> = (0..=n).map(g).collect();
        integrate(f.alpha, dy, &vals)
    };
    let (f_ut, f_u) = match forcing {
        Some(src) => {
            let fv: Vec<f64> = (0..=n).map(|i| src.at(grid.y(i), state.t)).collect();
            (int(&|i| fv[i] * f.u_t[i]), int(&|i| fv[i] * state.v[i]))
        }
        None => (0.0, 0.0),
    };
    let energy = energy_parts(state, spec, false).total;
    SnapshotIntegrals {
        t: state.t,
        dalpha: f.dalpha,
        beta,
        dbeta,
        energy,
        ut2: int(&|i| f.u_t[i] * f.u_t[i]),
        uut: int(&|i| state.v[i] * f.u_t[i]),
        ux2: int(&|i| f.u_x[i] * f.u_x[i]),
        u2: int(&|i| state.v[i] * state.v[i]),
        potential: int(&|i| state.v[i].abs().powf(rho + 2.0)),
        f_ut,
        f_u,
        flux_product: f.u_x[n] * f.u_t[n] - f.u_x[0] * f.u_t[0],
        ut_end: f.u_t[n],
        ux_end: f.u_x[n],
        flux: boundary_flux(state, spec),
    }
}

fn trajectory_integrals(traj: &Trajectory) -> Vec<SnapshotIntegrals> {
    let forcing = traj.spec.manufactured.map(|m| manufactured_forcing(&m, &traj.spec));
    traj.snapshots
        .iter()
        .map(|s| snapshot_integrals(s, &traj.spec, forcing.as_ref()))
        .collect()
}

/// One interior sample of the energy-rate check.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RatePoint {
    pub t: f64,
    /// Three-point difference quotient of E.
    #[serde(rename = "dE_dt")]
    pub de_dt: f64,
    /// Right-hand side of the energy-rate identity.
    pub rate_rhs: f64,
    pub residual: f64,
}

/// Pointwise energy-rate defect at every interior sample.
pub fn energy_rate_profile(traj: &Trajectory) -> Result<Vec<RatePoint>> {
    if traj.snapshots.len() < 3 {
        return Err(Error::Usage(format!(
            "energy-rate check needs at least 3 snapshots, got {}",
            traj.snapshots.len()
        )));
    }
    let d = &traj.spec.damping;
    let ints = trajectory_integrals(traj);
    Ok(ints
        .windows(3)
        .map(|w| {
            let de_dt = three_point_derivative([w[0].t, w[1].t, w[2].t], [w[0].energy, w[1].energy, w[2].energy]);
            let s = &w[1];
            let rate_rhs = -d.a * s.ut2 - s.flux + s.dbeta / (d.rho + 2.0) * s.potential + s.f_ut;
            RatePoint {
                t: s.t,
                de_dt,
                rate_rhs,
                residual: de_dt - rate_rhs,
            }
        })
        .collect())
}

/// sup_k |dE/dt(t_k) − rate(t_k)| over interior samples.
pub fn energy_rate_residual(traj: &Trajectory) -> Result<f64> {
    Ok(energy_rate_profile(traj)?
        .iter()
        .map(|p| p.residual.abs())
        .fold(0.0, f64::max))
}

/// Source term in the multiplier identity that a term comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TermGroup {
    /// u_tt (u_t + λu) φ
    Inertia,
    /// −u_xx (u_t + λu) φ
    Elastic,
    /// a u_t (u_t + λu) φ
    Damping,
    /// b u (u_t + λu) φ
    Restoring,
    /// β|u|^ρ u (u_t + λu) φ
    Nonlinear,
    /// −f (u_t + λu) φ
    Forcing,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IdentityTerm {
    pub group: TermGroup,
    pub name: &'static str,
    pub value: f64,
    /// Lateral-boundary term (part of the sign-checked boundary group).
    pub boundary: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IdentityReport {
    /// Energy-rate defect, when the trajectory has at least three snapshots.
    pub residual_rate: Option<f64>,
    /// Signed sum of every multiplier-identity term; zero for an exact solution.
    pub residual_plu: f64,
    /// |residual_plu| / Σ|terms|.
    pub relative_plu: f64,
    /// Sum of the lateral-boundary terms; nonnegative on expanding domains.
    pub boundary_group: f64,
    /// Σ|terms|, the scale against which residuals are judged.
    pub scale: f64,
    pub term_breakdown: Vec<IdentityTerm>,
}

/// Evaluates every term of the integrated multiplier identity obtained from
/// (u_t + λu)φ(t) with φ(t) = e^{st}, over [0, T] × Ω_t.
///
/// Space integrals use Simpson, time integrals the trapezoid rule over the
/// snapshot times. On the moving endpoint the lateral measure reduces to
/// n_t dσ = −α′ dt and n_x dσ = dt; on the fixed endpoint n_t = 0.
pub fn multiplier_identity_residual(traj: &Trajectory, lambda: f64, s: f64) -> IdentityReport {
    let spec = &traj.spec;
    let d = spec.damping;
    let rho2 = d.rho + 2.0;
    let ints = trajectory_integrals(traj);
    let times: Vec<f64> = ints.iter().map(|i| i.t).collect();
    let phi = |t: f64| (s * t).exp();
    let first = ints.first().expect("trajectory is never empty");
    let last = ints.last().expect("trajectory is never empty");

    // [g φ] between t = 0 and t = T.
    let ends = |g: &dyn Fn(&SnapshotIntegrals) -> f64| g(last) * phi(last.t) - g(first) * phi(first.t);
    // ∫₀ᵀ g φ dt.
    let over_time = |g: &dyn Fn(&SnapshotIntegrals) -> f64| {
        let vals: Vec<f64> = ints.iter().map(|i| g(i) * phi(i.t)).collect();
        trapezoid(&times, &vals)
    };

    use TermGroup::*;
    let mut terms = Vec::with_capacity(21);
    let mut push = |group, name, value, boundary| {
        terms.push(IdentityTerm {
            group,
            name,
            value,
            boundary,
        })
    };

    push(Inertia, "[½u_t²φ]", ends(&|i| 0.5 * i.ut2), false);
    push(Inertia, "[λφuu_t]", ends(&|i| lambda * i.uut), false);
    push(Inertia, "∫Γ ½u_t²φ n_t", over_time(&|i| -0.5 * i.dalpha * i.ut_end * i.ut_end), true);
    push(Inertia, "−∫∫λφu_t²", -over_time(&|i| lambda * i.ut2), false);
    push(Inertia, "−∫∫λφ′uu_t", -over_time(&|i| lambda * s * i.uut), false);
    push(Inertia, "−∫∫½φ′u_t²", -over_time(&|i| 0.5 * s * i.ut2), false);

    push(Elastic, "−∫∫(u_xu_tφ)_x", -over_time(&|i| i.flux_product), true);
    push(Elastic, "[½u_x²φ]", ends(&|i| 0.5 * i.ux2), false);
    push(Elastic, "∫Γ ½u_x²φ n_t", over_time(&|i| -0.5 * i.dalpha * i.ux_end * i.ux_end), true);
    push(Elastic, "−∫∫½φ′u_x²", -over_time(&|i| 0.5 * s * i.ux2), false);
    push(Elastic, "∫∫λφu_x²", over_time(&|i| lambda * i.ux2), false);

    push(Damping, "∫∫aφu_t²", over_time(&|i| d.a * i.ut2), false);
    push(Damping, "∫∫aλφuu_t", over_time(&|i| d.a * lambda * i.uut), false);

    push(Restoring, "[½bu²φ]", ends(&|i| 0.5 * d.b * i.u2), false);
    push(Restoring, "−∫∫(b/2)φ′u²", -over_time(&|i| 0.5 * d.b * s * i.u2), false);
    push(Restoring, "∫∫bλφu²", over_time(&|i| d.b * lambda * i.u2), false);

    push(Nonlinear, "[βφ|u|^(ρ+2)/(ρ+2)]", ends(&|i| i.beta * i.potential / rho2), false);
    push(Nonlinear, "−∫∫β′φ|u|^(ρ+2)/(ρ+2)", -over_time(&|i| i.dbeta * i.potential / rho2), false);
    push(Nonlinear, "−∫∫βφ′|u|^(ρ+2)/(ρ+2)", -over_time(&|i| i.beta * s * i.potential / rho2), false);
    push(Nonlinear, "∫∫λβφ|u|^(ρ+2)", over_time(&|i| lambda * i.beta * i.potential), false);

    push(Forcing, "−∫∫fφ(u_t+λu)", -over_time(&|i| i.f_ut + lambda * i.f_u), false);

    let residual: f64 = terms.iter().map(|t| t.value).sum();
    let scale: f64 = terms.iter().map(|t| t.value.abs()).sum();
    let boundary_group = terms.iter().filter(|t| t.boundary).map(|t| t.value).sum();
    let residual_rate = energy_rate_residual(traj).ok();
    IdentityReport {
        residual_rate,
        residual_plu: residual,
        relative_plu: if scale > 0.0 { residual.abs() / scale } else { 0.0 },
        boundary_group,
        scale,
        term_breakdown: terms,
    }
}

/// ∫₀ᵀ φ(t) · flux(t) dt: the closed form of the boundary group in one
/// dimension, where u_t = −α′u_x on the moving endpoint.
pub fn weighted_flux_integral(traj: &Trajectory, s: f64) -> f64 {
    let times = traj.times();
    let vals: Vec<f64> = traj
        .snapshots
        .iter()
        .map(|st| (s * st.t).exp() * boundary_flux(st, &traj.spec))
        .collect();
    trapezoid(&times, &vals)
}
