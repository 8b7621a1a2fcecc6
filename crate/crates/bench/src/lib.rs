//! Fixtures shared by the benchmarks.

use mowave_core::{AlphaFamily, BetaFamily, DampingParams, InitialData, ProblemSpec};

/// a = b = ρ = 1, β = e^{0.1t}, α = 1 + 0.5(1 − e^{−t}), sine data.
pub fn reference(horizon: f64) -> ProblemSpec {
    ProblemSpec::new(
        DampingParams::new(1.0, 1.0, 1.0),
        BetaFamily::Exponential { beta0: 1.0, mu: 0.1 },
        AlphaFamily::Saturating { k: 0.5, tau: 1.0 },
        InitialData::SineMode {
            m: 1,
            amp_u0: 1.0,
            amp_u1: 0.0,
        },
        horizon,
    )
}
