//! Domain-fixing change of variables y = x/α(t).
//!
//! Writing u(x, t) = v(x/α(t), t) turns the wave operator on the moving
//! interval (0, α(t)) into
//!
//! ```text
//! u_tt − u_xx = v_tt + c_yt v_yt + c_yy v_yy + c_y v_y
//! ```
//!
//! on the fixed interval (0, 1), and the physical derivatives are recovered as
//! u_t = v_t − (yα′/α) v_y and u_x = v_y/α.

use crate::error::{Error, Result};
use crate::model::AlphaFamily;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransformedCoeffs {
    pub c_yt: f64,
    pub c_yy: f64,
    pub c_y: f64,
}

pub fn to_reference(x: f64, t: f64, alpha: &AlphaFamily) -> Result<f64> {
    let (length, _, _) = alpha.eval(t);
    if !(0.0..=length).contains(&x) {
        return Err(Error::OutsideDomain { x, t, length });
    }
    Ok(x / length)
}

pub fn from_reference(y: f64, t: f64, alpha: &AlphaFamily) -> f64 {
    y * alpha.eval(t).0
}

/// Grid velocity factor yα′/α: the amount of v_y that separates the
/// reference-frame velocity from the physical one.
#[inline]
pub fn frame_velocity(y: f64, alpha: f64, dalpha: f64) -> f64 {
    y * dalpha / alpha
}

/// Coefficients for given α, α′, α″ values; the hot path of the solver uses
/// this to avoid re-evaluating the family at every node.
#[inline]
pub fn coefficients_from(y: f64, alpha: f64, dalpha: f64, ddalpha: f64) -> TransformedCoeffs {
    let r = dalpha / alpha;
    let g = y * r;
    TransformedCoeffs {
        c_yt: -2.0 * g,
        c_yy: g * g - 1.0 / (alpha * alpha),
        c_y: -(y * ddalpha / alpha - 2.0 * y * r * r),
    }
}

pub fn transformed_coefficients(y: f64, t: f64, alpha: &AlphaFamily) -> TransformedCoeffs {
    let (a, da, dda) = alpha.eval(t);
    coefficients_from(y, a, da, dda)
}

/// Minimum over the space-time grid of 1 − yα′. The worst point is y = 1, so
/// this is 1 − sup α′ on [0, T]. Rejects the family if the margin is not positive.
pub fn hyperbolicity_check(alpha: &AlphaFamily, horizon: f64) -> Result<f64> {
    let margin = 1.0 - alpha.sup_speed(horizon);
    if margin <= 0.0 {
        return Err(Error::Validation(format!(
            "boundary is not time-like: hyperbolicity margin {margin} ≤ 0"
        )));
    }
    Ok(margin)
}

/// Characteristic speeds (yα′ ± 1)/α of the transformed operator at (y, t).
pub fn characteristic_speeds(y: f64, t: f64, alpha: &AlphaFamily) -> (f64, f64) {
    let (a, da, _) = alpha.eval(t);
    ((y * da - 1.0) / a, (y * da + 1.0) / a)
}
