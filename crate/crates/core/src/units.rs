//! Parameter containers and unit conventions.
//!
//! Energies, rates and frequencies are in meV; magnetic fields in T; pulse
//! times in ps. Every time/energy conversion goes through [`HBAR_MEV_PS`].
//! Downstream code consumes [`SignedDetunings`] rather than raw transition
//! frequencies.

use crate::error::{ensure, Error, Result};

/// Reduced Planck constant in meV·ps.
pub const HBAR_MEV_PS: f64 = 0.6582119514;
/// Bohr magneton in meV/T.
pub const MU_B_MEV_PER_T: f64 = 0.057883818;
/// Detunings closer to resonance than this (meV) are rejected.
pub const RESONANCE_GUARD_MEV: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PhysicalConstants {
    pub hbar: f64,
    pub mu_b: f64,
}

impl PhysicalConstants {
    pub const SI_DERIVED: PhysicalConstants = PhysicalConstants { hbar: HBAR_MEV_PS, mu_b: MU_B_MEV_PER_T };
}

impl Default for PhysicalConstants {
    fn default() -> Self {
        Self::SI_DERIVED
    }
}

/// Converts a duration in ps to natural time units (1/meV with ħ = 1).
#[inline]
pub fn ps_to_natural(t_ps: f64) -> f64 {
    t_ps / HBAR_MEV_PS
}

#[inline]
pub fn natural_to_ps(t: f64) -> f64 {
    t * HBAR_MEV_PS
}

/// Dimensionless product `rate·t/ħ` of a rate in meV and a duration in ps.
#[inline]
pub fn rate_time_product(rate_mev: f64, t_ps: f64) -> f64 {
    rate_mev * ps_to_natural(t_ps)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum Sidedness {
    /// One output mirror: the light is reflected back.
    #[default]
    OneSided,
    /// Two identical mirrors: the light is transmitted to the next cavity.
    TwoSided,
}

/// One quantum dot in its microcavity.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SubsystemParams {
    /// Dot–cavity coupling (meV).
    pub g: f64,
    /// Cavity field decay rate (meV).
    pub kappa: f64,
    /// Trion radiative linewidth (meV).
    pub gamma: f64,
    /// Bare trion transition energy (meV).
    pub nu: f64,
    pub g_e: f64,
    pub g_h: f64,
    /// External magnetic field (T).
    pub b_ext: f64,
    /// Quasistatic Overhauser field (T).
    pub b_nuc: f64,
    /// Heavy–light hole splitting (meV); `None` disables light holes.
    pub delta_omega_hl: Option<f64>,
    /// Laser minus cavity frequency (meV).
    pub cavity_detuning: f64,
    pub sidedness: Sidedness,
}

impl SubsystemParams {
    pub const DEFAULT_G_E: f64 = -0.6;
    pub const DEFAULT_G_H: f64 = 1.8;

    pub fn new(g: f64, kappa: f64, gamma: f64, nu: f64) -> Self {
        SubsystemParams {
            g,
            kappa,
            gamma,
            nu,
            g_e: Self::DEFAULT_G_E,
            g_h: Self::DEFAULT_G_H,
            b_ext: 0.0,
            b_nuc: 0.0,
            delta_omega_hl: None,
            cavity_detuning: 0.0,
            sidedness: Sidedness::OneSided,
        }
    }

    /// A subsystem whose bare transition sits `detuning` above the laser.
    pub fn detuned(g: f64, kappa: f64, gamma: f64, omega_l: f64, detuning: f64) -> Self {
        Self::new(g, kappa, gamma, omega_l + detuning)
    }

    pub fn with_fields(mut self, b_ext: f64, b_nuc: f64) -> Self {
        self.b_ext = b_ext;
        self.b_nuc = b_nuc;
        self
    }

    pub fn with_light_holes(mut self, delta_omega_hl: Option<f64>) -> Self {
        self.delta_omega_hl = delta_omega_hl;
        self
    }

    pub fn with_cavity_detuning(mut self, delta: f64) -> Self {
        self.cavity_detuning = delta;
        self
    }

    pub fn with_sidedness(mut self, sidedness: Sidedness) -> Self {
        self.sidedness = sidedness;
        self
    }

    /// Range checks. `g = 0` is accepted: it describes the empty reference cavity.
    pub fn validate(&self) -> Result<()> {
        ensure(self.g.is_finite() && self.g >= 0.0, "g", self.g, "must be finite and non-negative")?;
        ensure(self.kappa.is_finite() && self.kappa > 0.0, "kappa", self.kappa, "must be positive")?;
        ensure(self.gamma.is_finite() && self.gamma >= 0.0, "gamma", self.gamma, "must be non-negative")?;
        ensure(self.nu.is_finite(), "nu", self.nu, "must be finite")?;
        ensure(self.g_e.is_finite(), "g_e", self.g_e, "must be finite")?;
        ensure(self.g_h.is_finite(), "g_h", self.g_h, "must be finite")?;
        ensure(self.b_ext.is_finite(), "b_ext", self.b_ext, "must be finite")?;
        ensure(self.b_nuc.is_finite(), "b_nuc", self.b_nuc, "must be finite")?;
        ensure(self.cavity_detuning.is_finite(), "cavity_detuning", self.cavity_detuning, "must be finite")?;
        if let Some(hl) = self.delta_omega_hl {
            ensure(hl.is_finite() && hl > 0.0, "delta_omega_hl", hl, "must be positive when present")?;
        }
        Ok(())
    }
}

/// Zeeman-shifted transition energies `(ν₀, ν₁)`.
///
/// `ν_q = ν − (−1)^q (g_h − g_e) μ_B B_ext + (−1)^q g_e μ_B B_nuc`; the nuclear
/// field acts on the electron only.
pub fn zeeman_frequencies(p: &SubsystemParams) -> (f64, f64) {
    let shift = |q: i32| {
        let sign = if q == 0 { 1.0 } else { -1.0 };
        p.nu - sign * (p.g_h - p.g_e) * MU_B_MEV_PER_T * p.b_ext + sign * p.g_e * MU_B_MEV_PER_T * p.b_nuc
    };
    (shift(0), shift(1))
}

/// Signed detunings per circular polarization `q`.
///
/// Positive values mean the laser is red of the transition. The light-hole
/// detuning is `Δω̃_q = Δω_HL + Δω_q`, so a blueshifted dot sits closer to its
/// light-hole line.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SignedDetunings {
    pub heavy: [f64; 2],
    pub light: Option<[f64; 2]>,
}

impl SignedDetunings {
    pub fn heavy(&self, q: usize) -> f64 {
        self.heavy[q]
    }

    pub fn light(&self, q: usize) -> Option<f64> {
        self.light.map(|l| l[q])
    }

    /// Sign of the heavy-hole detuning shared by both polarizations.
    pub fn side(&self) -> f64 {
        if self.heavy[0] + self.heavy[1] >= 0.0 {
            1.0
        } else {
            -1.0
        }
    }
}

pub fn detunings(p: &SubsystemParams, omega_l: f64) -> Result<SignedDetunings> {
    let (nu0, nu1) = zeeman_frequencies(p);
    let heavy = [nu0 - omega_l, nu1 - omega_l];
    for &d in &heavy {
        if !(d.abs() >= RESONANCE_GUARD_MEV) {
            return Err(Error::ResonantDrive { detuning: d });
        }
    }
    let light = match p.delta_omega_hl {
        Some(hl) => {
            let l = [hl + heavy[0], hl + heavy[1]];
            for &d in &l {
                if !(d.abs() >= RESONANCE_GUARD_MEV) {
                    return Err(Error::ResonantLightHole { detuning: d });
                }
            }
            Some(l)
        }
        None => None,
    };
    Ok(SignedDetunings { heavy, light })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn zero_field_leaves_transitions_degenerate() {
        let p = SubsystemParams::new(0.15, 0.05, 0.002, 1300.0);
        assert_eq!(zeeman_frequencies(&p), (1300.0, 1300.0));
    }

    #[test]
    fn external_field_splits_by_electron_and_hole_g_factors() {
        let p = SubsystemParams::new(0.15, 0.05, 0.002, 1300.0).with_fields(1.0, 0.0);
        let (nu0, nu1) = zeeman_frequencies(&p);
        assert_relative_eq!(nu1, 1300.1389211632, epsilon = 1e-9);
        assert_relative_eq!(nu0, 1299.8610788368, epsilon = 1e-9);
    }

    #[test]
    fn nuclear_field_acts_through_electron_g_factor() {
        let p = SubsystemParams::new(0.15, 0.05, 0.002, 1300.0).with_fields(0.0, 0.015);
        let (nu0, nu1) = zeeman_frequencies(&p);
        // (−1)^1 · g_e · μ_B · B_nuc = +0.6 · μ_B · 0.015
        assert_relative_eq!(nu1, 1300.000520954362, epsilon = 1e-10);
        assert_relative_eq!(nu0, 1299.999479045638, epsilon = 1e-10);
    }

    #[test]
    fn detuning_sign_convention() {
        let red = SubsystemParams::new(0.15, 0.05, 0.002, 1305.0);
        assert_relative_eq!(detunings(&red, 1300.0).unwrap().heavy(0), 5.0);
        let blue = SubsystemParams::new(0.15, 0.05, 0.002, 1295.0);
        assert_relative_eq!(detunings(&blue, 1300.0).unwrap().heavy(1), -5.0);
        let lh = red.with_light_holes(Some(10.0));
        assert_relative_eq!(detunings(&lh, 1300.0).unwrap().light(0).unwrap(), 15.0);
    }

    #[test]
    fn resonant_laser_is_rejected() {
        let p = SubsystemParams::new(0.15, 0.05, 0.002, 1300.0);
        assert!(matches!(detunings(&p, 1300.0), Err(Error::ResonantDrive { .. })));
        assert!(matches!(detunings(&p, 1300.0 - 5e-7), Err(Error::ResonantDrive { .. })));
        let lh = SubsystemParams::new(0.15, 0.05, 0.002, 1290.0).with_light_holes(Some(10.0));
        assert!(matches!(detunings(&lh, 1300.0), Err(Error::ResonantLightHole { .. })));
    }

    #[test]
    fn rate_time_products() {
        assert_relative_eq!(rate_time_product(0.05, 1000.0), 75.96337303455411, epsilon = 1e-10);
        assert_relative_eq!(rate_time_product(0.05, 100.0), 7.596337303455411, epsilon = 1e-11);
        assert_eq!(rate_time_product(0.05, 0.0), 0.0);
    }

    #[test]
    fn validation_rejects_bad_ranges() {
        let ok = SubsystemParams::new(0.15, 0.05, 0.002, 1300.0);
        assert!(ok.validate().is_ok());
        assert!(SubsystemParams { kappa: 0.0, ..ok }.validate().is_err());
        assert!(SubsystemParams { gamma: -1.0, ..ok }.validate().is_err());
        assert!(ok.with_light_holes(Some(0.0)).validate().is_err());
    }

    proptest! {
        #[test]
        fn field_reversal_swaps_polarizations(b in -3.0f64..3.0, bn in -0.05f64..0.05) {
            let p = SubsystemParams::new(0.15, 0.05, 0.002, 1300.0).with_fields(b, bn);
            let m = SubsystemParams::new(0.15, 0.05, 0.002, 1300.0).with_fields(-b, -bn);
            let (a0, a1) = zeeman_frequencies(&p);
            let (b0, b1) = zeeman_frequencies(&m);
            prop_assert!((a0 - b1).abs() < 1e-9 && (a1 - b0).abs() < 1e-9);
        }

        #[test]
        fn detuning_flips_sign_across_transition(nu in 1200.0f64..1400.0, off in 1e-3f64..20.0) {
            let p = SubsystemParams::new(0.15, 0.05, 0.002, nu);
            prop_assert!(detunings(&p, nu - off).unwrap().heavy(0) > 0.0);
            prop_assert!(detunings(&p, nu + off).unwrap().heavy(0) < 0.0);
        }
    }
}
