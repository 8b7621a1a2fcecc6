//! Damped nonlinear wave equation on expanding one-dimensional domains.
//!
//! The crate solves
//!
//! ```text
//! u_tt − u_xx + a u_t + b u + β(t)|u|^ρ u = 0   on (0, α(t)),   u = 0 on both ends,
//! ```
//!
//! by mapping the moving interval onto (0, 1) ([`transform`]) and integrating
//! the resulting system with central differences and RK4 ([`solver`]). The
//! [`energy`] module measures the energy and checks the identities that
//! underlie exponential decay, and [`certify`] builds and tests decay
//! certificates E(t) ≤ C E(0) e^{−λt}.

pub mod certify;
pub mod energy;
pub mod error;
pub mod model;
pub mod quadrature;
pub mod solver;
pub mod transform;

pub use certify::{
    certify, certify_spec, check_decay_bound, constant_c, fit_decay, lambda_bounds, lambda_window,
    BoundReport, BoundTolerance, Branch, DecayCertificate, EmpiricalDecay, LambdaBounds,
};
pub use energy::{
    boundary_flux, energy, energy_rate_residual, energy_series, multiplier_identity_residual,
    EnergySample, EnergySeries, IdentityReport,
};
pub use error::{Error, Result};
pub use model::{
    validate_assumptions, AlphaFamily, BetaFamily, DampingParams, InitialData, ManufacturedField,
    ProblemSpec, ValidationReport,
};
pub use solver::{simulate, Grid, ReferenceState, SimOptions, Trajectory};
