//! Method-of-lines integrator for the transformed equation on the reference
//! grid y_i = i/N.
//!
//! The state is the pair (v, w = v_t). Spatial derivatives are second-order
//! central differences and time is advanced with classical RK4 at a fixed
//! step derived from the CFL number and the fastest characteristic speed.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::model::{validate_assumptions, ManufacturedField, ProblemSpec};
use crate::quadrature::simpson;
use crate::transform::{coefficients_from, frame_velocity, hyperbolicity_check};

pub const DEFAULT_CFL: f64 = 0.5;
pub const DEFAULT_SNAPSHOT_CAP: usize = 2_000_000;

/// Uniform grid with `n` intervals (n + 1 nodes) on [0, 1].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Grid {
    n: usize,
}

impl Grid {
    pub const MIN_INTERVALS: usize = 8;

    pub fn new(n: usize) -> Result<Self> {
        if n < Self::MIN_INTERVALS {
            return Err(Error::Config(format!(
                "grid needs at least {} intervals, got {n}",
                Self::MIN_INTERVALS
            )));
        }
        Ok(Self { n })
    }

    pub fn intervals(&self) -> usize {
        self.n
    }

    pub fn nodes(&self) -> usize {
        self.n + 1
    }

    pub fn dy(&self) -> f64 {
        1.0 / self.n as f64
    }

    pub fn y(&self, i: usize) -> f64 {
        i as f64 / self.n as f64
    }
}

/// Solution on the reference grid at one instant.
#[derive(Debug, Clone, PartialEq)]
pub struct ReferenceState {
    pub t: f64,
    /// Transformed displacement v(y, t) = u(yα(t), t).
    pub v: Vec<f64>,
    /// Reference-frame velocity v_t.
    pub w: Vec<f64>,
}

impl ReferenceState {
    pub fn zeros(grid: &Grid) -> Self {
        Self {
            t: 0.0,
            v: vec![0.0; grid.nodes()],
            w: vec![0.0; grid.nodes()],
        }
    }

    pub fn is_finite(&self) -> bool {
        self.v.iter().chain(&self.w).all(|x| x.is_finite())
    }
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub spec: ProblemSpec,
    pub grid: Grid,
    /// Fixed time step used for the run (the last step may be shorter).
    pub dt: f64,
    pub snapshots: Vec<ReferenceState>,
}

impl Trajectory {
    pub fn times(&self) -> Vec<f64> {
        self.snapshots.iter().map(|s| s.t).collect()
    }

    pub fn last(&self) -> &ReferenceState {
        self.snapshots.last().expect("trajectory is never empty")
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimOptions {
    pub cfl: f64,
    /// Record a snapshot every this many steps (plus t = 0 and t = T).
    pub sample_every: usize,
    pub max_snapshots: usize,
}

impl Default for SimOptions {
    fn default() -> Self {
        Self {
            cfl: DEFAULT_CFL,
            sample_every: 1,
            max_snapshots: DEFAULT_SNAPSHOT_CAP,
        }
    }
}

/// Source term that makes a [`ManufacturedField`] an exact solution.
///
/// Evaluated in physical coordinates by differentiating
/// u = A sin(θ) e^{−rt}, θ = mπx/α(t), directly in x and t; it does not go
/// through the transformed coefficients, so it can be used to check them.
#[derive(Debug, Clone)]
pub struct Forcing {
    field: ManufacturedField,
    spec: ProblemSpec,
}

impl Forcing {
    pub fn field(&self) -> &ManufacturedField {
        &self.field
    }

    /// f at reference coordinate y and time t.
    pub fn at(&self, y: f64, t: f64) -> f64 {
        let (al, dal, ddal) = self.spec.alpha.eval(t);
        let ManufacturedField {
            mode,
            amplitude,
            decay,
        } = self.field;
        let k = mode as f64 * PI;
        let x = y * al;
        let theta = k * x / al;
        let (s, c) = theta.sin_cos();
        let g = amplitude * (-decay * t).exp();
        let dg = -decay * g;
        let ddg = decay * decay * g;
        let r = dal / al;
        let theta_t = -theta * r;
        let theta_tt = theta * (2.0 * r * r - ddal / al);

        let u = s * g;
        let u_t = c * theta_t * g + s * dg;
        let u_tt = -s * theta_t * theta_t * g + c * theta_tt * g + 2.0 * c * theta_t * dg + s * ddg;
        let u_xx = -(k / al) * (k / al) * u;

        let d = &self.spec.damping;
        let (beta, _) = self.spec.beta_at(t);
        u_tt - u_xx + d.a * u_t + d.b * u + beta * u * u.abs().powf(d.rho)
    }
}

impl ManufacturedField {
    /// Exact v(y, t) in reference coordinates.
    pub fn reference_value(&self, y: f64, t: f64) -> f64 {
        self.amplitude * (self.mode as f64 * PI * y).sin() * (-self.decay * t).exp()
    }

    /// Exact v_t(y, t) in reference coordinates.
    pub fn reference_velocity(&self, y: f64, t: f64) -> f64 {
        -self.decay * self.reference_value(y, t)
    }
}

/// Builds the forcing for `exact` under the damping, β and α of `spec`.
pub fn manufactured_forcing(exact: &ManufacturedField, spec: &ProblemSpec) -> Forcing {
    Forcing {
        field: *exact,
        spec: spec.clone(),
    }
}

fn forcing_of(spec: &ProblemSpec) -> Option<Forcing> {
    spec.manufactured.map(|m| manufactured_forcing(&m, spec))
}

/// State at t = 0.
///
/// α(0) = 1, so positions coincide and v = u0. The velocity data is read as
/// the reference-frame velocity v_t(·, 0), which vanishes at both endpoints
/// for compatible data. Endpoints are clamped to zero. When the problem carries
/// a manufactured field, its exact values replace `init`.
pub fn initialize(spec: &ProblemSpec, grid: &Grid) -> Result<ReferenceState> {
    let n = grid.intervals();
    let (mut v, mut w) = match &spec.manufactured {
        Some(m) => (0..=n)
            .map(|i| (m.reference_value(grid.y(i), 0.0), m.reference_velocity(grid.y(i), 0.0)))
            .unzip(),
        None => spec.init.nodal_values(n)?,
    };
    v[0] = 0.0;
    v[n] = 0.0;
    w[0] = 0.0;
    w[n] = 0.0;
    Ok(ReferenceState { t: 0.0, v, w })
}

/// Fixed time step CFL · dy / (1 + sup α′). Since α ≥ 1 the characteristic
/// speeds |yα′ ± 1|/α never exceed 1 + sup α′.
pub fn step_size(spec: &ProblemSpec, grid: &Grid, cfl: f64) -> f64 {
    let s_max = 1.0 + spec.alpha.sup_speed(spec.horizon);
    cfl * grid.dy() / s_max
}

/// Evaluates the semi-discrete right-hand side into `dv`, `dw`.
fn eval_rhs(
    spec: &ProblemSpec,
    grid: &Grid,
    forcing: Option<&Forcing>,
    t: f64,
    v: &[f64],
    w: &[f64],
    dv: &mut [f64],
    dw: &mut [f64],
) -> Result<()> {
    let n = grid.intervals();
    let dy = grid.dy();
    let inv2dy = 0.5 / dy;
    let invdy2 = 1.0 / (dy * dy);
    let (al, dal, ddal) = spec.alpha.eval(t);
    let (beta, _) = spec.beta_at(t);
    let d = &spec.damping;

    dv[0] = 0.0;
    dw[0] = 0.0;
    dv[n] = 0.0;
    dw[n] = 0.0;
    for i in 1..n {
        let y = grid.y(i);
        let c = coefficients_from(y, al, dal, ddal);
        let v_y = (v[i + 1] - v[i - 1]) * inv2dy;
        let v_yy = (v[i + 1] - 2.0 * v[i] + v[i - 1]) * invdy2;
        let w_y = (w[i + 1] - w[i - 1]) * inv2dy;
        let u_t = w[i] - frame_velocity(y, al, dal) * v_y;
        let mut acc = -c.c_yt * w_y - c.c_yy * v_yy - c.c_y * v_y - d.a * u_t - d.b * v[i];
        if beta != 0.0 {
            acc -= beta * v[i] * v[i].abs().powf(d.rho);
        }
        if let Some(f) = forcing {
            acc += f.at(y, t);
        }
        dv[i] = w[i];
        dw[i] = acc;
        if !acc.is_finite() || !w[i].is_finite() {
            return Err(Error::BlowUp { t });
        }
    }
    Ok(())
}

/// Time derivative (v_t, w_t) of `state`. Boundary rows are zero.
pub fn rhs(state: &ReferenceState, spec: &ProblemSpec, grid: &Grid) -> Result<(Vec<f64>, Vec<f64>)> {
    let forcing = forcing_of(spec);
    let mut dv = vec![0.0; grid.nodes()];
    let mut dw = vec![0.0; grid.nodes()];
    eval_rhs(spec, grid, forcing.as_ref(), state.t, &state.v, &state.w, &mut dv, &mut dw)?;
    Ok((dv, dw))
}

/// Scratch space for one RK4 step.
struct Rk4 {
    k: [(Vec<f64>, Vec<f64>); 4],
    tmp_v: Vec<f64>,
    tmp_w: Vec<f64>,
}

impl Rk4 {
    fn new(nodes: usize) -> Self {
        let pair = || (vec![0.0; nodes], vec![0.0; nodes]);
        Self {
            k: [pair(), pair(), pair(), pair()],
            tmp_v: vec![0.0; nodes],
            tmp_w: vec![0.0; nodes],
        }
    }

    fn step(
        &mut self,
        spec: &ProblemSpec,
        grid: &Grid,
        forcing: Option<&Forcing>,
        state: &mut ReferenceState,
        dt: f64,
    ) -> Result<()> {
        let t = state.t;
        let stages = [(0.0, 0.0), (0.5, 0.5), (0.5, 0.5), (1.0, 1.0)];
        for s in 0..4 {
            let (c_t, c_prev) = stages[s];
            if s == 0 {
                self.tmp_v.copy_from_slice(&state.v);
                self.tmp_w.copy_from_slice(&state.w);
            } else {
                let (pv, pw) = &self.k[s - 1];
                for i in 0..state.v.len() {
                    self.tmp_v[i] = state.v[i] + c_prev * dt * pv[i];
                    self.tmp_w[i] = state.w[i] + c_prev * dt * pw[i];
                }
            }
            let (kv, kw) = &mut self.k[s];
            eval_rhs(spec, grid, forcing, t + c_t * dt, &self.tmp_v, &self.tmp_w, kv, kw)?;
        }
        let [(k1v, k1w), (k2v, k2w), (k3v, k3w), (k4v, k4w)] = &self.k;
        let h6 = dt / 6.0;
        for i in 0..state.v.len() {
            state.v[i] += h6 * (k1v[i] + 2.0 * k2v[i] + 2.0 * k3v[i] + k4v[i]);
            state.w[i] += h6 * (k1w[i] + 2.0 * k2w[i] + 2.0 * k3w[i] + k4w[i]);
        }
        Ok(())
    }
}

/// Integrates from t = 0 to the horizon with classical RK4 at the fixed step
/// from [`step_size`], shortening the last step to land on T.
pub fn simulate(spec: &ProblemSpec, grid: &Grid, opts: &SimOptions) -> Result<Trajectory> {
    validate_assumptions(spec).into_result()?;
    hyperbolicity_check(&spec.alpha, spec.horizon)?;
    if !(opts.cfl.is_finite() && opts.cfl > 0.0) {
        return Err(Error::Config(format!("CFL number must be positive, got {}", opts.cfl)));
    }
    if opts.sample_every == 0 {
        return Err(Error::Config("sample_every must be at least 1".into()));
    }

    let horizon = spec.horizon;
    let dt = step_size(spec, grid, opts.cfl);
    let full_steps = (horizon / dt).floor() as usize;
    // A remainder below round-off is absorbed into the last full step.
    let remainder = horizon - full_steps as f64 * dt;
    let (steps, last_dt) = if remainder > 1e-9 * dt {
        (full_steps + 1, remainder)
    } else {
        (full_steps.max(1), dt + remainder)
    };
    let expected = steps / opts.sample_every + 2;
    if expected > opts.max_snapshots {
        return Err(Error::Resource {
            requested: expected,
            cap: opts.max_snapshots,
        });
    }

    let forcing = forcing_of(spec);
    let mut state = initialize(spec, grid)?;
    let mut snapshots = Vec::with_capacity(expected);
    snapshots.push(state.clone());
    let mut rk = Rk4::new(grid.nodes());
    for step in 1..=steps {
        let h = if step == steps { last_dt } else { dt };
        rk.step(spec, grid, forcing.as_ref(), &mut state, h)?;
        state.t = if step == steps { horizon } else { step as f64 * dt };
        if !state.is_finite() {
            return Err(Error::BlowUp { t: state.t });
        }
        if step % opts.sample_every == 0 || step == steps {
            snapshots.push(state.clone());
        }
    }

    Ok(Trajectory {
        spec: spec.clone(),
        grid: *grid,
        dt,
        snapshots,
    })
}

/// Physical L² distance ‖u − u_exact‖ on Ω_t, with u_exact given in
/// reference coordinates.
pub fn l2_error(
    state: &ReferenceState,
    spec: &ProblemSpec,
    grid: &Grid,
    exact: impl Fn(f64, f64) -> f64,
) -> f64 {
    let (al, _, _) = spec.alpha.eval(state.t);
    let sq: Vec<f64> = state
        .v
        .iter()
        .enumerate()
        .map(|(i, v)| (v - exact(grid.y(i), state.t)).powi(2))
        .collect();
    (al * simpson(&sq, grid.dy())).sqrt()
}
