//! Fidelity and success probability of measurement-induced Bell-state
//! generation between two quantum-dot spins in optical microcavities.
//!
//! The crate is `no_std` (it needs `alloc` for traces and scan grids). Energies
//! and rates are in meV, pulse times in ps, and `ħ` converts between the two.
//!
//! Module map:
//!
//! - [`units`]: parameter containers, Zeeman-shifted transitions, signed detunings.
//! - [`estimates`]: back-of-envelope SNR, scattered photons and regime check.
//! - [`cavity`]: pulse shapes, steady and transient cavity response, γ amplitudes.
//! - [`fidelity`]: distinguishabilities, Rayleigh decay and the windowed fidelity.
//! - [`lightholes`]: light-hole corrections to Stark shift and scattering.
//! - [`semiclassical`]: optical Bloch equations retaining the trion states.
//! - [`optimizer`]: grid search plus coordinate refinement over the model.
#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod cavity;
pub mod error;
pub mod estimates;
pub mod fidelity;
pub mod integrate;
pub mod lightholes;
pub mod math;
pub mod optimizer;
pub mod semiclassical;
pub mod units;

pub use error::{Error, Result};
pub use units::{PhysicalConstants, Sidedness, SignedDetunings, SubsystemParams, HBAR_MEV_PS, MU_B_MEV_PER_T};
