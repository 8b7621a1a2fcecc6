#![allow(dead_code)]

use std::f64::consts::PI;

use mowave_core::{AlphaFamily, BetaFamily, DampingParams, InitialData, ManufacturedField, ProblemSpec};

/// Cylindrical linear problem whose solution is the single damped mode
/// e^{−at/2} cos(ωt) sin(πx), ω² = π² + b − a²/4.
pub fn modal_spec(a: f64, b: f64, horizon: f64) -> ProblemSpec {
    let mut spec = ProblemSpec::new(
        DampingParams::new(a, b, 1.0),
        BetaFamily::Constant { c: 1.0 },
        AlphaFamily::Constant,
        InitialData::SineMode {
            m: 1,
            amp_u0: 1.0,
            amp_u1: -0.5 * a,
        },
        horizon,
    );
    spec.linear_mode = true;
    spec
}

/// Closed-form modal solution: real part of e^{σt} sin(πy), σ² + aσ + (π² + b) = 0.
pub fn modal_exact(a: f64, b: f64) -> impl Fn(f64, f64) -> f64 {
    let omega = (PI * PI + b - 0.25 * a * a).sqrt();
    move |y, t| (-0.5 * a * t).exp() * (omega * t).cos() * (PI * y).sin()
}

pub fn manufactured_spec(k: f64, horizon: f64) -> ProblemSpec {
    let mut spec = ProblemSpec::new(
        DampingParams::new(1.0, 1.0, 1.0),
        BetaFamily::Exponential { beta0: 1.0, mu: 0.1 },
        AlphaFamily::Affine { k },
        InitialData::SineMode {
            m: 1,
            amp_u0: 1.0,
            amp_u1: 0.0,
        },
        horizon,
    );
    spec.manufactured = Some(ManufacturedField::default());
    spec
}

/// a = b = ρ = 1, β = e^{0.1t}, α = 1 + 0.5(1 − e^{−t}), sine data, T = 10.
pub fn reference_spec() -> ProblemSpec {
    ProblemSpec::new(
        DampingParams::new(1.0, 1.0, 1.0),
        BetaFamily::Exponential { beta0: 1.0, mu: 0.1 },
        AlphaFamily::Saturating { k: 0.5, tau: 1.0 },
        InitialData::SineMode {
            m: 1,
            amp_u0: 1.0,
            amp_u1: 0.0,
        },
        10.0,
    )
}

pub fn order(coarse: f64, fine: f64) -> f64 {
    (coarse / fine).log2()
}
