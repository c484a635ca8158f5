//! Feasibility estimates in cavity form: signal-to-noise ratio, number of
//! Rayleigh-scattered photons, and the intermediate-coupling condition
//! `g² > Γκ/2`.

use crate::error::{ensure, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct EstimateInput {
    pub g: f64,
    pub kappa: f64,
    pub gamma: f64,
    pub delta_omega: f64,
    pub alpha_in: f64,
}

impl EstimateInput {
    pub fn validate(&self) -> Result<()> {
        ensure(self.g >= 0.0, "g", self.g, "must be non-negative")?;
        ensure(self.kappa > 0.0, "kappa", self.kappa, "must be positive")?;
        ensure(self.gamma >= 0.0, "gamma", self.gamma, "must be non-negative")?;
        ensure(self.delta_omega > 0.0, "delta_omega", self.delta_omega, "must be positive")?;
        ensure(self.alpha_in >= 0.0, "alpha_in", self.alpha_in, "must be non-negative")
    }
}

/// Small-angle distinguishability `4g²α_IN/(κΔω)`.
pub fn snr_estimate(e: &EstimateInput) -> f64 {
    4.0 * e.g * e.g / (e.kappa * e.delta_omega) * e.alpha_in
}

/// Photons scattered on one polarization channel in steady state,
/// `(α_IN²/2)·4g²Γ/(κΔω²)`.
pub fn n_scatt_estimate(e: &EstimateInput) -> f64 {
    0.5 * e.alpha_in * e.alpha_in * 4.0 * e.g * e.g * e.gamma / (e.kappa * e.delta_omega * e.delta_omega)
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct RegimeCheck {
    /// `g²/(κΓ)`.
    pub ratio: f64,
    /// `ratio > 1/2`.
    pub ok: bool,
}

pub fn regime_check(e: &EstimateInput) -> RegimeCheck {
    let ratio = e.g * e.g / (e.kappa * e.gamma);
    RegimeCheck { ratio, ok: ratio > 0.5 }
}
