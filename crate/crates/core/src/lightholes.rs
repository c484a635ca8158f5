//! Light-hole corrections.
//!
//! Light-hole transitions sit `Δω_HL` above the heavy-hole ones, couple with
//! `g/√3` and radiate with `Γ/3`. Each circular polarization then addresses
//! both spin ground states, which shrinks the spin-dependent Stark shift and
//! the spin information carried by scattered photons. Both effects enter the
//! model as multiplicative factors per subsystem and polarization.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::units::{SignedDetunings, RESONANCE_GUARD_MEV};

/// Dipole (coupling) reduction of light-hole relative to heavy-hole transitions.
pub const COUPLING_REDUCTION: f64 = 0.577_350_269_189_625_8; // 1/√3
/// Radiative linewidth reduction of light-hole transitions.
pub const LINEWIDTH_REDUCTION: f64 = 1.0 / 3.0;

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct LightHoleConfig {
    /// Heavy–light hole splitting (meV).
    pub delta_omega_hl: f64,
}

impl LightHoleConfig {
    pub fn coupling_reduction(&self) -> f64 {
        COUPLING_REDUCTION
    }

    pub fn linewidth_reduction(&self) -> f64 {
        LINEWIDTH_REDUCTION
    }
}

/// Factor multiplying `g²/Δω`: `1 − (1/3)·Δω/Δω̃`.
///
/// A blueshifted dot (`Δω < 0`) gets a factor above one: both of its lines
/// shift the phase the same way.
pub fn stark_correction(dw: f64, dw_tilde: f64) -> Result<f64> {
    if !(dw_tilde.abs() >= RESONANCE_GUARD_MEV) {
        return Err(Error::ResonantLightHole { detuning: dw_tilde });
    }
    Ok(1.0 - COUPLING_REDUCTION * COUPLING_REDUCTION * dw / dw_tilde)
}

/// Factor multiplying the Rayleigh rate `Γ^R_q`; always the square of
/// [`stark_correction`].
pub fn rayleigh_correction(dw: f64, dw_tilde: f64) -> Result<f64> {
    stark_correction(dw, dw_tilde).map(|f| f * f)
}

/// Stark factor for polarization `q`, or 1 without light holes.
pub fn stark_factor(dets: &SignedDetunings, q: usize) -> Result<f64> {
    match dets.light(q) {
        Some(lt) => stark_correction(dets.heavy(q), lt),
        None => Ok(1.0),
    }
}

pub fn rayleigh_factor(dets: &SignedDetunings, q: usize) -> Result<f64> {
    stark_factor(dets, q).map(|f| f * f)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum HoleKind {
    Heavy,
    Light,
}

/// One optical transition of the six-level scheme.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Transition {
    pub ground_spin: usize,
    pub polarization: usize,
    pub kind: HoleKind,
    /// Transition minus laser frequency (meV).
    pub detuning: f64,
    /// Coupling relative to the heavy-hole `g`.
    pub coupling_factor: f64,
    /// Linewidth relative to the heavy-hole `Γ`.
    pub linewidth_factor: f64,
}

/// Lists the transitions addressed by each circular polarization: the
/// heavy-hole line of spin `q` and, when configured, the light-hole line of
/// the opposite spin.
pub fn level_scheme(dets: &SignedDetunings) -> Vec<Transition> {
    let mut out = Vec::with_capacity(4);
    for q in 0..2 {
        out.push(Transition {
            ground_spin: q,
            polarization: q,
            kind: HoleKind::Heavy,
            detuning: dets.heavy(q),
            coupling_factor: 1.0,
            linewidth_factor: 1.0,
        });
        if let Some(lt) = dets.light(q) {
            out.push(Transition {
                ground_spin: 1 - q,
                polarization: q,
                kind: HoleKind::Light,
                detuning: lt,
                coupling_factor: COUPLING_REDUCTION,
                linewidth_factor: LINEWIDTH_REDUCTION,
            });
        }
    }
    out
}
