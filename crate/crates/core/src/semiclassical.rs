//! Mean-field optical Bloch equations that keep the trion populations.
//!
//! This is a cross-check of the dispersive model: instead of assuming a
//! Stark shift `g²/Δω` and a Rayleigh rate, the cavity field is coupled to the
//! two-level system `|g_q⟩, |e_q⟩` of the addressed spin directly. Everything
//! runs in the frame where the ground states are degenerate and the trion sits
//! at `Δω`:
//!
//! ```text
//! ρ̇_ee = ig(ρ_eg α̃* − ρ_eg* α̃) − Γρ_ee
//! ρ̇_eg = igα̃(2ρ_ee − ρ_gg(0)) − (Γ/2 + iΔω)ρ_eg
//! α̃̇   = (iδω − κ/2)α̃ + √κ(α_IN/√2)F_IN − igρ_eg
//! ```
//!
//! The ground-state coherence `c = ρ_{g₁g₀}` couples to `u = ρ_{g₁e₀}`
//! through the mean of the empty and loaded cavity fields `ᾱ`:
//!
//! ```text
//! ċ = igᾱu
//! u̇ = (iΔω − Γ/2)u + igᾱ*c
//! ```

use alloc::vec::Vec;

use num_complex::Complex64;

use crate::cavity::{gaussian, mean_phase, MeanPhase, PulseSpec, DEFAULT_TRACE_SAMPLES};
use crate::error::{ensure, Result};
use crate::fidelity::{distinguishabilities, fidelity, BellTarget, DecayFactors, FidelityReport};
use crate::cavity::GammaSet;
use crate::integrate::{integrate_dense, Stats, Tolerances};
use crate::math::linspace;
use crate::units::{detunings, Sidedness, SubsystemParams, HBAR_MEV_PS};

/// One optical transition driven through its cavity.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ObeDrive {
    pub g: f64,
    pub kappa: f64,
    pub gamma: f64,
    /// Signed trion detuning `Δω_q` (meV).
    pub detuning: f64,
    pub cavity_detuning: f64,
}

impl ObeDrive {
    pub fn new(g: f64, kappa: f64, gamma: f64, detuning: f64) -> Self {
        ObeDrive { g, kappa, gamma, detuning, cavity_detuning: 0.0 }
    }

    /// The transition addressed by polarization `q`.
    pub fn for_transition(p: &SubsystemParams, omega_l: f64, q: usize) -> Result<Self> {
        p.validate()?;
        ensure(p.delta_omega_hl.is_none(), "delta_omega_hl", p.delta_omega_hl.unwrap_or(0.0), "light holes are not modelled here")?;
        ensure(p.sidedness == Sidedness::OneSided, "sidedness", 2.0, "only one-sided cavities are modelled here")?;
        let d = detunings(p, omega_l)?;
        Ok(ObeDrive { g: p.g, kappa: p.kappa, gamma: p.gamma, detuning: d.heavy(q), cavity_detuning: p.cavity_detuning })
    }

    fn validate(&self) -> Result<()> {
        ensure(self.g.is_finite() && self.g >= 0.0, "g", self.g, "must be non-negative")?;
        ensure(self.kappa.is_finite() && self.kappa > 0.0, "kappa", self.kappa, "must be positive")?;
        ensure(self.gamma.is_finite() && self.gamma >= 0.0, "gamma", self.gamma, "must be non-negative")?;
        ensure(self.detuning.is_finite(), "detuning", self.detuning, "must be finite")?;
        ensure(self.cavity_detuning.is_finite(), "cavity_detuning", self.cavity_detuning, "must be finite")
    }

    /// Dispersive reflection phase `2 atan(2(δω + g²/Δω)/κ)`.
    pub fn dispersive_phase(&self) -> f64 {
        let x = self.cavity_detuning + crate::cavity::dispersive_shift(self.g, self.detuning);
        2.0 * libm::atan(2.0 * x / self.kappa)
    }

    /// Damping of the ground-state coherence predicted by the dispersive model
    /// for this transition alone, `exp(−(α_IN²/2)(Γ^R/2)(4/κ))`.
    pub fn dispersive_damping(&self, alpha_in: f64) -> f64 {
        let rate = self.g * self.g * self.gamma / (self.detuning * self.detuning);
        libm::exp(-0.25 * alpha_in * alpha_in * rate * 4.0 / self.kappa)
    }
}

/// End of the integration window (ps): ring-down of both cavity and trion.
pub fn t_end(pulse: &PulseSpec, drive: &ObeDrive) -> f64 {
    let mut slow = HBAR_MEV_PS / drive.kappa;
    if drive.gamma > 0.0 {
        slow = slow.max(HBAR_MEV_PS / drive.gamma);
    }
    pulse.t0 + 6.0 * pulse.tau_p + 20.0 * slow
}

/// Solution of the single-transition equations.
#[derive(Debug, Clone, PartialEq)]
pub struct ObeTrace {
    pub t_ps: Vec<f64>,
    pub rho_ee: Vec<f64>,
    pub rho_eg: Vec<Complex64>,
    pub alpha: Vec<Complex64>,
    /// Reflected field `√κ α̃ − (α_IN/√2)F_IN`.
    pub output: Vec<Complex64>,
    pub phase: Vec<f64>,
    pub mean_phase: MeanPhase,
    pub stats: Stats,
}

impl ObeTrace {
    /// Ratio of the simulated mean phase to the dispersive reflection phase.
    pub fn phase_ratio(&self, drive: &ObeDrive) -> f64 {
        self.mean_phase.phase / drive.dispersive_phase()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ObeDamping {
    pub t_ps: Vec<f64>,
    /// `|c(t)|/|c(0)|`. Dips while the pulse admixes the trion and partly
    /// recovers as it leaves.
    pub coherence: Vec<f64>,
    /// `√(|c|² + |u|²)`, which only ever decays (at rate `Γ|u|²`).
    pub row_norm: Vec<f64>,
    /// Coherence retained at the end of the window.
    pub damping: f64,
    /// Largest trion population of the loaded cavity.
    pub rho_ee_max: f64,
    pub stats: Stats,
}

struct Rhs {
    g: f64,
    gamma: f64,
    dw: f64,
    dcav: f64,
    kappa: f64,
    drive: f64,
    tau: f64,
    t0: f64,
    rho_gg0: f64,
}

impl Rhs {
    fn new(d: &ObeDrive, pulse: &PulseSpec, rho_gg0: f64) -> Self {
        let (tau, t0) = pulse.natural_pulse();
        Rhs {
            g: d.g,
            gamma: d.gamma,
            dw: d.detuning,
            dcav: d.cavity_detuning,
            kappa: d.kappa,
            drive: libm::sqrt(d.kappa) * pulse.alpha_in / core::f64::consts::SQRT_2,
            tau,
            t0,
            rho_gg0,
        }
    }

    fn input(&self, t: f64) -> f64 {
        self.drive * gaussian(t, self.tau, self.t0)
    }

    /// Derivatives of `(ρ_ee, ρ_eg, α̃)` packed as five reals.
    fn two_level(&self, inp: f64, y: &[f64]) -> [f64; 5] {
        let ree = y[0];
        let eg = Complex64::new(y[1], y[2]);
        let a = Complex64::new(y[3], y[4]);
        let i = Complex64::i();
        let d_ee = (i * self.g * (eg * a.conj() - eg.conj() * a)).re - self.gamma * ree;
        let d_eg = i * self.g * a * (2.0 * ree - self.rho_gg0) - Complex64::new(self.gamma / 2.0, self.dw) * eg;
        let d_a = Complex64::new(-self.kappa / 2.0, self.dcav) * a + inp - i * self.g * eg;
        [d_ee, d_eg.re, d_eg.im, d_a.re, d_a.im]
    }
}

fn window(pulse: &PulseSpec, drive: &ObeDrive, samples: usize) -> Result<Vec<f64>> {
    pulse.validate()?;
    drive.validate()?;
    ensure(samples >= 16, "samples", samples as f64, "too few samples")?;
    Ok(linspace(0.0, t_end(pulse, drive), samples))
}

fn tolerances(pulse: &PulseSpec) -> Tolerances {
    Tolerances::default().with_h_max(pulse.natural_pulse().0 / 4.0)
}

pub fn integrate_obe1(drive: &ObeDrive, pulse: &PulseSpec, rho_gg0: f64) -> Result<ObeTrace> {
    integrate_obe1_sampled(drive, pulse, rho_gg0, DEFAULT_TRACE_SAMPLES)
}

pub fn integrate_obe1_sampled(drive: &ObeDrive, pulse: &PulseSpec, rho_gg0: f64, samples: usize) -> Result<ObeTrace> {
    ensure((0.0..=1.0).contains(&rho_gg0), "rho_gg0", rho_gg0, "must be a population in [0, 1]")?;
    let t_ps = window(pulse, drive, samples)?;
    let grid: Vec<f64> = t_ps.iter().map(|t| t / HBAR_MEV_PS).collect();
    let rhs = Rhs::new(drive, pulse, rho_gg0);
    let sol = integrate_dense(|t, y: &[f64; 5]| rhs.two_level(rhs.input(t), y), 0.0, [0.0; 5], &grid, &tolerances(pulse))?;
    let rho_ee: Vec<f64> = sol.states.iter().map(|y| y[0]).collect();
    let rho_eg = sol.states.iter().map(|y| Complex64::new(y[1], y[2])).collect();
    let alpha: Vec<Complex64> = sol.states.iter().map(|y| Complex64::new(y[3], y[4])).collect();
    let sk = libm::sqrt(drive.kappa);
    let output: Vec<Complex64> = grid.iter().zip(&alpha).map(|(&t, &a)| a * sk - rhs.input(t) / sk).collect();
    let phase: Vec<f64> = output.iter().map(|o| o.arg()).collect();
    let weights: Vec<f64> = output.iter().map(|o| o.norm_sqr()).collect();
    let mp = if weights.iter().any(|&w| w > 0.0) {
        mean_phase(&weights, &phase, t_ps[1] - t_ps[0])
    } else {
        MeanPhase { phase: 0.0, coherence: 1.0 }
    };
    Ok(ObeTrace { t_ps, rho_ee, rho_eg, alpha, output, phase, mean_phase: mp, stats: sol.stats })
}

/// Damping of the ground-state coherence by one transition.
///
/// The loaded cavity (`ρ_gg(0) = 1`), the empty cavity and the coherence pair
/// are integrated together so all of them share one adaptive step sequence.
pub fn integrate_obe2(drive: &ObeDrive, pulse: &PulseSpec) -> Result<ObeDamping> {
    integrate_obe2_sampled(drive, pulse, DEFAULT_TRACE_SAMPLES)
}

pub fn integrate_obe2_sampled(drive: &ObeDrive, pulse: &PulseSpec, samples: usize) -> Result<ObeDamping> {
    let t_ps = window(pulse, drive, samples)?;
    let grid: Vec<f64> = t_ps.iter().map(|t| t / HBAR_MEV_PS).collect();
    let rhs = Rhs::new(drive, pulse, 1.0);
    let i = Complex64::i();
    let f = |t: f64, y: &[f64; 11]| {
        let inp = rhs.input(t);
        let tl = rhs.two_level(inp, &y[..5]);
        let empty = Complex64::new(y[5], y[6]);
        let d_empty = Complex64::new(-rhs.kappa / 2.0, rhs.dcav) * empty + inp;
        let bar = 0.5 * (empty + Complex64::new(y[3], y[4]));
        let c = Complex64::new(y[7], y[8]);
        let u = Complex64::new(y[9], y[10]);
        let dc = i * rhs.g * bar * u;
        let du = Complex64::new(-rhs.gamma / 2.0, rhs.dw) * u + i * rhs.g * bar.conj() * c;
        [tl[0], tl[1], tl[2], tl[3], tl[4], d_empty.re, d_empty.im, dc.re, dc.im, du.re, du.im]
    };
    let mut y0 = [0.0; 11];
    y0[7] = 1.0;
    let sol = integrate_dense(f, 0.0, y0, &grid, &tolerances(pulse))?;
    let coherence: Vec<f64> = sol.states.iter().map(|y| libm::hypot(y[7], y[8])).collect();
    let row_norm = sol.states.iter().map(|y| libm::sqrt(y[7] * y[7] + y[8] * y[8] + y[9] * y[9] + y[10] * y[10])).collect();
    let rho_ee_max = sol.states.iter().map(|y| y[0]).fold(0.0, f64::max);
    let damping = *coherence.last().unwrap_or(&1.0);
    Ok(ObeDamping { t_ps, coherence, row_norm, damping, rho_ee_max, stats: sol.stats })
}

/// Fidelity assembled from simulated phases and dampings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SemiclassicalReport {
    pub report: FidelityReport,
    /// Mean reflection phase per cavity and polarization `[x][q]`.
    pub phases: [[f64; 2]; 2],
    /// Retained ground-state coherence per transition `[x][q]`.
    pub damping: [[f64; 2]; 2],
}

/// Phases from the loaded-cavity runs enter the distinguishabilities; the
/// product of all four transition dampings multiplies the coherence.
pub fn semiclassical_fidelity(
    a: &SubsystemParams,
    b: &SubsystemParams,
    omega_l: f64,
    pulse: &PulseSpec,
    x_c: f64,
) -> Result<SemiclassicalReport> {
    let mut phases = [[0.0; 2]; 2];
    let mut damping = [[1.0; 2]; 2];
    let mut sides = [0.0; 2];
    for (x, p) in [a, b].into_iter().enumerate() {
        ensure(p.cavity_detuning == 0.0, "cavity_detuning", p.cavity_detuning, "cavity must be resonant with the laser here")?;
        sides[x] = detunings(p, omega_l)?.side();
        for q in 0..2 {
            let drive = ObeDrive::for_transition(p, omega_l, q)?;
            phases[x][q] = integrate_obe1(&drive, pulse, 1.0)?.mean_phase.phase;
            damping[x][q] = integrate_obe2(&drive, pulse)?.damping;
        }
    }
    let gammas = GammaSet::from_phases(phases[0], phases[1]);
    let d = distinguishabilities(&gammas, pulse.alpha_in, BellTarget::from_sides(sides[0], sides[1]));
    let total: f64 = damping.iter().flatten().product();
    let decay = DecayFactors {
        rayleigh_exponent: -libm::log(total),
        rates: [[0.0; 2]; 2],
        pulse_areas: [0.0; 2],
        two_sided_overlap: 1.0,
    };
    Ok(SemiclassicalReport { report: fidelity(&d, &decay, x_c)?, phases, damping })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fidelity::{evaluate, Scenario};
    use approx::assert_relative_eq;

    #[test]
    fn decoupled_transition_is_empty_cavity() {
        let d = ObeDrive::new(0.0, 0.05, 0.002, 2.0);
        let p = PulseSpec::new(4.0, 1000.0);
        let tr = integrate_obe1_sampled(&d, &p, 1.0, 2048).unwrap();
        assert!(tr.rho_ee.iter().all(|&r| r == 0.0));
        assert!(tr.mean_phase.phase.abs() < 1e-9);
        let steady = crate::cavity::steady_field(0.05, 0.0, Sidedness::OneSided).re;
        for (t, a) in tr.t_ps.iter().zip(&tr.alpha) {
            let expect = 4.0 / core::f64::consts::SQRT_2 * steady * crate::cavity::input_pulse(*t, &p) * libm::sqrt(HBAR_MEV_PS);
            assert!((a.norm() - expect).abs() < 0.02 * 4.0 * steady / libm::sqrt(1000.0 / HBAR_MEV_PS));
        }
    }

    #[test]
    fn low_excitation_adiabatic() {
        let d = ObeDrive::new(0.15, 0.05, 0.002, 2.0);
        let tr = integrate_obe1(&d, &PulseSpec::new(4.0, 100.0), 1.0).unwrap();
        let max_ee = tr.rho_ee.iter().cloned().fold(0.0, f64::max);
        assert!(max_ee < 0.05, "{max_ee}");
        assert!(tr.rho_ee.iter().all(|&r| (-1e-9..=1.0).contains(&r)));
        assert!(*tr.rho_ee.last().unwrap() < 1e-3 * max_ee.max(1e-12));
        // ρ_eg ≈ −gα̃/Δω at the pulse peak.
        let k = tr.t_ps.iter().position(|&t| t >= 500.0).unwrap();
        let adiabatic = -tr.alpha[k] * (0.15 / 2.0);
        assert!((tr.rho_eg[k] - adiabatic).norm() / adiabatic.norm() < 0.05);
    }

    #[test]
    fn weak_coupling_phase_matches_dispersive() {
        let d = ObeDrive::new(0.002, 0.05, 0.0, 2.0);
        let tr = integrate_obe1(&d, &PulseSpec::new(4.0, 1000.0), 1.0).unwrap();
        assert!((tr.phase_ratio(&d) - 1.0).abs() < 1e-3, "{}", tr.phase_ratio(&d));
    }

    #[test]
    fn no_dissipation_no_damping() {
        let d = ObeDrive::new(0.15, 0.05, 0.0, 4.0);
        let r = integrate_obe2_sampled(&d, &PulseSpec::new(8.0, 100.0), 2048).unwrap();
        assert!((r.damping - 1.0).abs() < 1e-9, "{}", r.damping);
        let dark = integrate_obe2_sampled(&ObeDrive::new(0.15, 0.05, 0.002, 4.0), &PulseSpec::new(0.0, 100.0), 2048);
        assert_eq!(dark.unwrap().damping, 1.0);
    }

    #[test]
    fn coherence_never_recovers() {
        let d = ObeDrive::new(0.15, 0.05, 0.002, 2.0);
        let p = PulseSpec::new(10.0, 100.0);
        let r = integrate_obe2_sampled(&d, &p, 4096).unwrap();
        assert!(r.row_norm.windows(2).all(|w| w[1] <= w[0] + 1e-10));
        let gone = p.window_end(d.kappa);
        let after: Vec<f64> = r.t_ps.iter().zip(&r.coherence).filter(|(t, _)| **t >= gone).map(|(_, c)| *c).collect();
        assert!(after.len() > 100);
        assert!(after.windows(2).all(|w| w[1] <= w[0] + 1e-10));
        assert!(r.damping < 1.0);
    }

    #[test]
    fn damping_close_to_dispersive_at_large_detuning() {
        let d = ObeDrive::new(0.15, 0.05, 0.002, 10.0);
        let p = PulseSpec::new(10.0, 1000.0);
        let semi = integrate_obe2(&d, &p).unwrap().damping;
        let ana = d.dispersive_damping(10.0);
        assert!((libm::log(semi) / libm::log(ana) - 1.0).abs() < 0.05, "{semi} {ana}");
    }

    #[test]
    fn pure_measurement_limit_matches_analytic() {
        let a = SubsystemParams::detuned(0.0, 0.05, 0.0, 1300.0, 5.0);
        let pulse = PulseSpec::new(6.0, 100.0);
        let semi = semiclassical_fidelity(&a, &a, 1300.0, &pulse, 0.3).unwrap().report;
        let ana = evaluate(&Scenario::new(a, a, 1300.0, pulse, 0.3)).unwrap();
        assert_relative_eq!(semi.fidelity, ana.fidelity, epsilon = 1e-9);
        assert_relative_eq!(semi.p_succ, ana.p_succ, epsilon = 1e-9);
    }
}
