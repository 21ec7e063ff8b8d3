//! Compatibility of the fitted exponents with `tau ~ exp(sqrt(delta^-nu))`.

use serde::{Deserialize, Serialize};

use super::collapse::ScalingFitResult;

/// The exponent `b` for which `ln tau ~ xi^b` with `xi ~ delta^-nu` gives
/// `tau ~ exp(sqrt(delta^-nu))`.
pub const SQRT_EXPONENT: f64 = 0.5;
/// Smallest half-width of the acceptance band around 1/2.
pub const MIN_BAND: f64 = 0.1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CsdReport {
    pub nu: f64,
    pub nu_err: f64,
    pub b: f64,
    pub b_err: f64,
    /// Exponent of `ln tau ~ delta^{-nu b}`.
    pub nu_b: f64,
    pub nu_b_err: f64,
    /// `|b - 1/2| <= max(2 sigma_b, 0.1)`.
    pub consistent: bool,
}

pub fn csd_consistency(fit_1d: &ScalingFitResult, fit_2d: &ScalingFitResult) -> CsdReport {
    let nu = fit_1d.nu;
    let nu_err = fit_1d.errors.get("nu").copied().unwrap_or(0.0);
    let b = fit_2d.b.unwrap_or(f64::NAN);
    let b_err = fit_2d.errors.get("b").copied().unwrap_or(0.0);
    let nu_b = nu * b;
    let nu_b_err = ((b * nu_err).powi(2) + (nu * b_err).powi(2)).sqrt();
    let band = (2.0 * b_err).max(MIN_BAND);
    CsdReport {
        nu,
        nu_err,
        b,
        b_err,
        nu_b,
        nu_b_err,
        consistent: (b - SQRT_EXPONENT).abs() <= band,
    }
}
