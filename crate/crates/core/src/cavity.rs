//! Pulse shapes and the cavity response to them.
//!
//! Times handed in and out of this module are in ps. The field equations are
//! integrated in natural time `t/ħ` (1/meV), where the normalized pulse obeys
//! `∫|F|² dt = 1` as well; [`PulseSpec::natural_pulse`] converts.
//!
//! The intracavity amplitude is written `α̃(t) = (α_IN/√2)·S(t)`. For a
//! one-sided cavity `S` obeys `Ṡ = (iX − κ/2)S + √κ F` and the reflected field
//! is `√κ S − F`. A two-sided cavity loses `κ` through each mirror, so
//! `Ṡ = (iX − κ)S + √κ F` and the transmitted field is `√κ S`. Here
//! `X = δω + g²f/Δω` is the cavity detuning plus the dispersive shift of the
//! addressed spin.

use alloc::vec::Vec;

use num_complex::Complex64;

use crate::error::{ensure, Result};
use crate::integrate::{integrate_dense, Stats, Tolerances};
use crate::lightholes::stark_factor;
use crate::math::{linspace, trapezoid};
use crate::units::{detunings, SignedDetunings, Sidedness, SubsystemParams, HBAR_MEV_PS};

const FOURTH_ROOT_2PI: f64 = 1.583_233_487_086_159_5; // (2π)^{1/4}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PulseSpec {
    pub alpha_in: f64,
    /// Pulse length (ps).
    pub tau_p: f64,
    /// Pulse center (ps).
    pub t0: f64,
    /// Propagation delay between the two cavities (ps).
    pub t_prop: f64,
}

impl PulseSpec {
    /// Pulse centered at `5τ_P` without propagation delay.
    pub fn new(alpha_in: f64, tau_p: f64) -> Self {
        PulseSpec { alpha_in, tau_p, t0: 5.0 * tau_p, t_prop: 0.0 }
    }

    pub fn with_t_prop(mut self, t_prop: f64) -> Self {
        self.t_prop = t_prop;
        self
    }

    pub fn validate(&self) -> Result<()> {
        ensure(self.alpha_in.is_finite() && self.alpha_in >= 0.0, "alpha_in", self.alpha_in, "must be non-negative")?;
        ensure(self.tau_p.is_finite() && self.tau_p > 0.0, "tau_p", self.tau_p, "must be positive")?;
        ensure(self.t0.is_finite(), "t0", self.t0, "must be finite")?;
        ensure(self.t_prop.is_finite() && self.t_prop >= 0.0, "t_prop", self.t_prop, "must be non-negative")
    }

    /// `(τ, t₀)` in natural time.
    pub fn natural_pulse(&self) -> (f64, f64) {
        (self.tau_p / HBAR_MEV_PS, self.t0 / HBAR_MEV_PS)
    }

    /// End of the simulation window (ps) for a cavity with linewidth `kappa`.
    pub fn window_end(&self, kappa: f64) -> f64 {
        self.t0 + 6.0 * self.tau_p + 10.0 * HBAR_MEV_PS / kappa
    }
}

/// Normalized Gaussian `F_IN(t)`, in ps^{-1/2}.
pub fn input_pulse(t: f64, p: &PulseSpec) -> f64 {
    gaussian(t, p.tau_p, p.t0)
}

/// The same Gaussian for any consistent time unit.
pub(crate) fn gaussian(t: f64, tau: f64, t0: f64) -> f64 {
    let x = t - t0;
    libm::exp(-x * x / (4.0 * tau * tau)) / (FOURTH_ROOT_2PI * libm::sqrt(tau))
}

/// Steady-state output factor for total detuning `x`: the reflection
/// `(κ/2 + iX)/(κ/2 − iX)` or the transmission `κ/(κ − iX)`.
pub fn cavity_response(kappa: f64, x: f64, sidedness: Sidedness) -> Complex64 {
    match sidedness {
        Sidedness::OneSided => Complex64::new(kappa / 2.0, x) / Complex64::new(kappa / 2.0, -x),
        Sidedness::TwoSided => Complex64::new(kappa, 0.0) / Complex64::new(kappa, -x),
    }
}

/// Steady-state `S/F` for total detuning `x`.
pub fn steady_field(kappa: f64, x: f64, sidedness: Sidedness) -> Complex64 {
    let loss = match sidedness {
        Sidedness::OneSided => kappa / 2.0,
        Sidedness::TwoSided => kappa,
    };
    Complex64::new(libm::sqrt(kappa), 0.0) / Complex64::new(loss, -x)
}

/// Dispersive shift `g²/Δω`. Zero coupling gives zero for any detuning.
pub fn dispersive_shift(g: f64, dw: f64) -> f64 {
    if g == 0.0 {
        0.0
    } else {
        g * g / dw
    }
}

/// One-sided reflection amplitude `κ/(κ/2 − i(δω + g²/Δω)) − 1`.
pub fn steady_reflection(g: f64, kappa: f64, dw: f64, dcav: f64) -> Complex64 {
    cavity_response(kappa, dcav + dispersive_shift(g, dw), Sidedness::OneSided)
}

/// Two-sided transmission amplitude `κ/(κ − i(δω + g²/Δω))`.
pub fn steady_transmission(g: f64, kappa: f64, dw: f64, dcav: f64) -> Complex64 {
    cavity_response(kappa, dcav + dispersive_shift(g, dw), Sidedness::TwoSided)
}

/// Stark shift `g²f_q/Δω_q` felt by polarization `q`, light holes included.
pub fn stark_shift(p: &SubsystemParams, dets: &SignedDetunings, q: usize) -> Result<f64> {
    Ok(dispersive_shift(p.g, dets.heavy(q)) * stark_factor(dets, q)?)
}

/// Everything the field equation needs about one cavity and spin state.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CavityDrive {
    pub kappa: f64,
    /// Dispersive shift of the addressed spin state (meV).
    pub stark: f64,
    pub cavity_detuning: f64,
    pub sidedness: Sidedness,
}

impl CavityDrive {
    pub fn new(g: f64, kappa: f64, dw: f64, dcav: f64) -> Self {
        CavityDrive { kappa, stark: dispersive_shift(g, dw), cavity_detuning: dcav, sidedness: Sidedness::OneSided }
    }

    pub fn empty(kappa: f64, sidedness: Sidedness) -> Self {
        CavityDrive { kappa, stark: 0.0, cavity_detuning: 0.0, sidedness }
    }

    /// Drive seen by spin state `q` of a full subsystem.
    pub fn for_spin(p: &SubsystemParams, omega_l: f64, q: usize) -> Result<Self> {
        p.validate()?;
        let dets = detunings(p, omega_l)?;
        Ok(CavityDrive {
            kappa: p.kappa,
            stark: stark_shift(p, &dets, q)?,
            cavity_detuning: p.cavity_detuning,
            sidedness: p.sidedness,
        })
    }

    pub fn total_detuning(&self) -> f64 {
        self.cavity_detuning + self.stark
    }

    fn loss(&self) -> f64 {
        match self.sidedness {
            Sidedness::OneSided => self.kappa / 2.0,
            Sidedness::TwoSided => self.kappa,
        }
    }

    fn validate(&self) -> Result<()> {
        ensure(self.kappa.is_finite() && self.kappa > 0.0, "kappa", self.kappa, "must be positive")?;
        ensure(self.stark.is_finite(), "stark", self.stark, "must be finite")?;
        ensure(self.cavity_detuning.is_finite(), "cavity_detuning", self.cavity_detuning, "must be finite")
    }
}

pub const MIN_TRACE_SAMPLES: usize = 2048;
pub const DEFAULT_TRACE_SAMPLES: usize = 4096;

/// Sampled cavity response to one pulse.
#[derive(Debug, Clone, PartialEq)]
pub struct CavityTrace {
    /// Uniform time grid (ps).
    pub t_ps: Vec<f64>,
    /// `S(t)` in natural units; the intracavity amplitude is `scale · S`.
    pub field: Vec<Complex64>,
    /// Output field (reflected or transmitted), natural units.
    pub output: Vec<Complex64>,
    /// Output envelope normalized to unit norm over the ps grid.
    pub f_out: Vec<f64>,
    /// Phase of the output relative to the real input (rad).
    pub phase: Vec<f64>,
    /// `α_IN/√2`.
    pub scale: f64,
    /// `∫|S|² dt` in 1/meV.
    pub pulse_area: f64,
    pub stats: Stats,
}

impl CavityTrace {
    /// Intracavity amplitude `α̃` at sample `i`.
    pub fn amplitude(&self, i: usize) -> Complex64 {
        self.field[i] * self.scale
    }

    /// Homodyne mode overlap `∫F_IN F_OUT dt`.
    pub fn homodyne_overlap(&self, p: &PulseSpec) -> f64 {
        let dt = self.t_ps[1] - self.t_ps[0];
        let prod: Vec<f64> = self.t_ps.iter().zip(&self.f_out).map(|(&t, &f)| input_pulse(t, p) * f).collect();
        trapezoid(&prod, dt)
    }

    pub fn mean_phase(&self) -> MeanPhase {
        let dt = self.t_ps[1] - self.t_ps[0];
        let w: Vec<f64> = self.f_out.iter().map(|f| f * f).collect();
        mean_phase(&w, &self.phase, dt)
    }

    /// A trace built from the steady-state response at every instant.
    pub fn steady(p: &PulseSpec, drive: &CavityDrive, samples: usize) -> Result<Self> {
        p.validate()?;
        drive.validate()?;
        ensure(samples >= MIN_TRACE_SAMPLES, "samples", samples as f64, "too few samples to resolve the pulse")?;
        let t_ps = linspace(0.0, p.window_end(drive.kappa), samples);
        let s = steady_field(drive.kappa, drive.total_detuning(), drive.sidedness);
        let field: Vec<Complex64> =
            t_ps.iter().map(|&t| s * (input_pulse(t, p) * libm::sqrt(HBAR_MEV_PS))).collect();
        Ok(Self::assemble(p, drive, t_ps, field, Stats::default()))
    }

    fn assemble(p: &PulseSpec, drive: &CavityDrive, t_ps: Vec<f64>, field: Vec<Complex64>, stats: Stats) -> Self {
        let sk = libm::sqrt(drive.kappa);
        let output: Vec<Complex64> = t_ps
            .iter()
            .zip(&field)
            .map(|(&t, &s)| match drive.sidedness {
                Sidedness::OneSided => s * sk - input_pulse(t, p) * libm::sqrt(HBAR_MEV_PS),
                Sidedness::TwoSided => s * sk,
            })
            .collect();
        let dt = t_ps[1] - t_ps[0];
        let mags: Vec<f64> = output.iter().map(|o| o.norm_sqr()).collect();
        let norm = libm::sqrt(trapezoid(&mags, dt));
        let f_out = output.iter().map(|o| if norm > 0.0 { o.norm() / norm } else { 0.0 }).collect();
        let phase = output.iter().map(|o| o.arg()).collect();
        let areas: Vec<f64> = field.iter().map(|s| s.norm_sqr()).collect();
        let pulse_area = trapezoid(&areas, dt / HBAR_MEV_PS);
        CavityTrace { t_ps, field, output, f_out, phase, scale: p.alpha_in / core::f64::consts::SQRT_2, pulse_area, stats }
    }
}

/// Integrates the mean-field cavity equation for one pulse on a uniform grid
/// of `samples` points spanning `[0, t₀ + 6τ_P + 10ħ/κ]`.
pub fn transient_cavity_field(p: &PulseSpec, drive: &CavityDrive, samples: usize) -> Result<CavityTrace> {
    transient_cavity_field_with(p, drive, samples, &Tolerances::default())
}

pub fn transient_cavity_field_with(
    p: &PulseSpec,
    drive: &CavityDrive,
    samples: usize,
    tol: &Tolerances,
) -> Result<CavityTrace> {
    p.validate()?;
    drive.validate()?;
    ensure(samples >= MIN_TRACE_SAMPLES, "samples", samples as f64, "too few samples to resolve the pulse")?;
    let t_ps = linspace(0.0, p.window_end(drive.kappa), samples);
    let grid: Vec<f64> = t_ps.iter().map(|t| t / HBAR_MEV_PS).collect();
    let (tau, t0) = p.natural_pulse();
    let (x, loss, sk) = (drive.total_detuning(), drive.loss(), libm::sqrt(drive.kappa));
    let rhs = |t: f64, y: &[f64; 2]| {
        let f = sk * gaussian(t, tau, t0);
        [-loss * y[0] - x * y[1] + f, x * y[0] - loss * y[1]]
    };
    let tol = tol.with_h_max(tol.h_max.min(tau / 4.0));
    let sol = integrate_dense(rhs, 0.0, [0.0; 2], &grid, &tol)?;
    let field = sol.states.iter().map(|y| Complex64::new(y[0], y[1])).collect();
    Ok(CavityTrace::assemble(p, drive, t_ps, field, sol.stats))
}

/// Power-weighted mean phase `arg ∫ w e^{iθ} dt`, with `|∫ w e^{iθ} dt|` as
/// its coherence (`w` normalized to unit integral internally).
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct MeanPhase {
    pub phase: f64,
    pub coherence: f64,
}

pub const PHASE_COHERENCE_WARNING: f64 = 0.9;

impl MeanPhase {
    /// The instantaneous phase spreads so much that a single mean is a poor summary.
    pub fn is_dispersed(&self) -> bool {
        self.coherence < PHASE_COHERENCE_WARNING
    }
}

pub fn mean_phase(weights: &[f64], phases: &[f64], dt: f64) -> MeanPhase {
    let re: Vec<f64> = weights.iter().zip(phases).map(|(w, p)| w * libm::cos(*p)).collect();
    let im: Vec<f64> = weights.iter().zip(phases).map(|(w, p)| w * libm::sin(*p)).collect();
    let total = trapezoid(weights, dt);
    let m = Complex64::new(trapezoid(&re, dt), trapezoid(&im, dt)) / total;
    MeanPhase { phase: m.arg(), coherence: m.norm() }
}

/// How `Φ = ∫|S|² dt` is obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum PulseAreaMode {
    #[default]
    Steady,
    /// Quadrature of the simulated empty-cavity field.
    Transient,
}

/// Steady pulse area: `4/κ` one-sided, `1/κ` two-sided (1/meV).
pub fn steady_pulse_area(kappa: f64, sidedness: Sidedness) -> f64 {
    match sidedness {
        Sidedness::OneSided => 4.0 / kappa,
        Sidedness::TwoSided => 1.0 / kappa,
    }
}

pub fn pulse_area(mode: PulseAreaMode, kappa: f64, sidedness: Sidedness, p: &PulseSpec) -> Result<f64> {
    match mode {
        PulseAreaMode::Steady => {
            ensure(kappa.is_finite() && kappa > 0.0, "kappa", kappa, "must be positive")?;
            Ok(steady_pulse_area(kappa, sidedness))
        }
        PulseAreaMode::Transient => {
            let drive = CavityDrive::empty(kappa, sidedness);
            Ok(transient_cavity_field(p, &drive, DEFAULT_TRACE_SAMPLES)?.pulse_area)
        }
    }
}

/// `I_ol = ∫F_IN(t)F_IN(t − 2t_prop)dt = exp(−t_prop²/(2τ²))`.
pub fn overlap_integral(p: &PulseSpec) -> f64 {
    let r = p.t_prop / p.tau_p;
    libm::exp(-0.5 * r * r)
}

/// Reflection or transmission factors `γ^p_{q₁q₂}`, indexed `[p][q₁][q₂]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GammaSet {
    pub amp: [[[Complex64; 2]; 2]; 2],
}

impl GammaSet {
    pub fn get(&self, p: usize, q1: usize, q2: usize) -> Complex64 {
        self.amp[p][q1][q2]
    }

    /// Builds the set from per-cavity Stark shifts `[q]` and cavity detunings.
    ///
    /// Polarization `p` picks up the shift of cavity `x` only if spin `x` is
    /// in state `p`; otherwise that cavity is empty (bar its detuning).
    pub fn from_shifts(
        kappa: [f64; 2],
        stark_a: [f64; 2],
        stark_b: [f64; 2],
        dcav: [f64; 2],
        sidedness: Sidedness,
    ) -> Self {
        let mut amp = [[[Complex64::new(0.0, 0.0); 2]; 2]; 2];
        for (p, by_p) in amp.iter_mut().enumerate() {
            for (q1, row) in by_p.iter_mut().enumerate() {
                for (q2, g) in row.iter_mut().enumerate() {
                    let xa = dcav[0] + if q1 == p { stark_a[p] } else { 0.0 };
                    let xb = dcav[1] + if q2 == p { stark_b[p] } else { 0.0 };
                    *g = cavity_response(kappa[0], xa, sidedness) * cavity_response(kappa[1], xb, sidedness);
                }
            }
        }
        GammaSet { amp }
    }

    /// Builds the set from accumulated phases `θ[x][q]` of unit-modulus factors.
    pub fn from_phases(theta_a: [f64; 2], theta_b: [f64; 2]) -> Self {
        let mut amp = [[[Complex64::new(0.0, 0.0); 2]; 2]; 2];
        for (p, by_p) in amp.iter_mut().enumerate() {
            for (q1, row) in by_p.iter_mut().enumerate() {
                for (q2, g) in row.iter_mut().enumerate() {
                    let a = if q1 == p { theta_a[p] } else { 0.0 };
                    let b = if q2 == p { theta_b[p] } else { 0.0 };
                    *g = crate::math::cis(a + b);
                }
            }
        }
        GammaSet { amp }
    }
}

/// Per-subsystem Stark shifts for both polarizations.
pub fn stark_shifts(p: &SubsystemParams, dets: &SignedDetunings) -> Result<[f64; 2]> {
    Ok([stark_shift(p, dets, 0)?, stark_shift(p, dets, 1)?])
}

/// All eight `γ` amplitudes for subsystems `a` and `b` driven at `omega_l`.
///
/// Strategies enter only through the transition energies, the laser and the
/// cavity detunings; a blueshifted dot contributes a negative Stark shift.
pub fn gamma_amplitudes(a: &SubsystemParams, b: &SubsystemParams, omega_l: f64) -> Result<GammaSet> {
    a.validate()?;
    b.validate()?;
    ensure(
        a.sidedness == b.sidedness,
        "sidedness",
        0.0,
        "both cavities must be of the same kind",
    )?;
    let (da, db) = (detunings(a, omega_l)?, detunings(b, omega_l)?);
    Ok(GammaSet::from_shifts(
        [a.kappa, b.kappa],
        stark_shifts(a, &da)?,
        stark_shifts(b, &db)?,
        [a.cavity_detuning, b.cavity_detuning],
        a.sidedness,
    ))
}
