//! Homodyne measurement model and the resulting Bell-state fidelity.
//!
//! After both cavities the reflected light carries a y-quadrature
//! displacement `d_{q₁q₂}` that depends on the spin configuration. Accepting
//! only outcomes `|x| ≤ x_c` keeps the two configurations whose displacements
//! stay near zero and projects onto an entangled state. The initial spins are
//! the product of two equal superpositions: every diagonal element is `1/4`
//! and the coherence between the two retained configurations is `−1/4`.
//!
//! With `e(d) = erf(√2(x_c − d)) + erf(√2(x_c + d))` the accepted probability
//! is `P = (1/8)Σ e(d)` over all four configurations, and for the retained
//! pair `(a, b)` with coherence factor `C`
//!
//! `F·P = (1/8){(e(a) + e(b))/2 + C·e^{−(a−b)²/2}[erf((a+b+2x_c)/√2) − erf((a+b−2x_c)/√2)]}`.

use num_complex::Complex64;

use crate::cavity::{
    gamma_amplitudes, overlap_integral, pulse_area, stark_shifts, GammaSet, PulseAreaMode, PulseSpec,
};
use crate::error::{ensure, Error, Result};
use crate::lightholes::rayleigh_factor;
use crate::math::{erf, erfc};
use crate::units::{detunings, SignedDetunings, Sidedness, SubsystemParams};

/// Acceptance probabilities below this are reported as [`Error::NoAcceptance`].
pub const MIN_ACCEPTANCE: f64 = 1e-9;

/// Which pair of spin configurations the window is meant to keep.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum BellTarget {
    /// Keeps `|10⟩, |01⟩`: both dots detuned to the same side of the laser.
    Singlet,
    /// Keeps `|11⟩, |00⟩`: the laser sits between the two dots and the
    /// Stark shifts have opposite signs.
    Triplet,
}

impl BellTarget {
    /// Retained configurations `(q₁, q₂)`.
    pub fn pair(self) -> [(usize, usize); 2] {
        match self {
            BellTarget::Singlet => [(1, 0), (0, 1)],
            BellTarget::Triplet => [(1, 1), (0, 0)],
        }
    }

    pub fn from_sides(side_a: f64, side_b: f64) -> Self {
        if side_a * side_b >= 0.0 {
            BellTarget::Singlet
        } else {
            BellTarget::Triplet
        }
    }

    pub fn from_detunings(a: &SignedDetunings, b: &SignedDetunings) -> Self {
        Self::from_sides(a.side(), b.side())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Distinguishabilities {
    pub d11: f64,
    pub d00: f64,
    pub d10: f64,
    pub d01: f64,
    pub target: BellTarget,
}

impl Distinguishabilities {
    pub fn get(&self, q1: usize, q2: usize) -> f64 {
        match (q1, q2) {
            (1, 1) => self.d11,
            (0, 0) => self.d00,
            (1, 0) => self.d10,
            _ => self.d01,
        }
    }

    /// Displacements of the two retained configurations.
    pub fn retained(&self) -> (f64, f64) {
        let [(a1, a2), (b1, b2)] = self.target.pair();
        (self.get(a1, a2), self.get(b1, b2))
    }

    pub fn all(&self) -> [f64; 4] {
        [self.d11, self.d00, self.d10, self.d01]
    }
}

/// `d_{q₁q₂} = −(α_IN/2)·Im(γ¹_{q₁q₂} − γ⁰_{q₁q₂})`.
pub fn distinguishabilities(gammas: &GammaSet, alpha_in: f64, target: BellTarget) -> Distinguishabilities {
    let d = |q1: usize, q2: usize| {
        let diff: Complex64 = gammas.get(1, q1, q2) - gammas.get(0, q1, q2);
        -0.5 * alpha_in * diff.im
    };
    Distinguishabilities { d11: d(1, 1), d00: d(0, 0), d10: d(1, 0), d01: d(0, 1), target }
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct DecayFactors {
    /// `(α_IN²/2)Σ_{xq}(Γ^R_{xq}/2)Φ_x`.
    pub rayleigh_exponent: f64,
    /// `Γ^R_{xq}` (meV), indexed `[x][q]`.
    pub rates: [[f64; 2]; 2],
    /// `Φ_x` (1/meV).
    pub pulse_areas: [f64; 2],
    /// Overlap of the reflected light states; 1 for one-sided cavities.
    pub two_sided_overlap: f64,
}

impl DecayFactors {
    /// Total factor multiplying the retained coherence.
    pub fn coherence_factor(&self) -> f64 {
        libm::exp(-self.rayleigh_exponent) * self.two_sided_overlap
    }

    /// Mean number of scattered photons per channel `[x][q]`.
    pub fn scattered_photons(&self, alpha_in: f64) -> [[f64; 2]; 2] {
        let mut n = [[0.0; 2]; 2];
        for x in 0..2 {
            for q in 0..2 {
                n[x][q] = 0.5 * alpha_in * alpha_in * self.rates[x][q] * self.pulse_areas[x];
            }
        }
        n
    }
}

/// Rayleigh scattering rate `Γ^R_q = g²Γ/Δω_q²`, light holes included.
pub fn rayleigh_rate(p: &SubsystemParams, dets: &SignedDetunings, q: usize) -> Result<f64> {
    let dw = dets.heavy(q);
    Ok(p.g * p.g * p.gamma / (dw * dw) * rayleigh_factor(dets, q)?)
}

pub fn rayleigh_decay(
    a: &SubsystemParams,
    b: &SubsystemParams,
    dets: [&SignedDetunings; 2],
    alpha_in: f64,
    phi: [f64; 2],
) -> Result<DecayFactors> {
    for &f in &phi {
        ensure(f.is_finite() && f >= 0.0, "pulse_area", f, "must be non-negative")?;
    }
    let mut rates = [[0.0; 2]; 2];
    let mut exponent = 0.0;
    for (x, p) in [a, b].into_iter().enumerate() {
        for q in 0..2 {
            rates[x][q] = rayleigh_rate(p, dets[x], q)?;
            exponent += 0.5 * alpha_in * alpha_in * 0.5 * rates[x][q] * phi[x];
        }
    }
    Ok(DecayFactors { rayleigh_exponent: exponent, rates, pulse_areas: phi, two_sided_overlap: 1.0 })
}

/// Signed `d̃_q = (α_IN/2)·S_q/κ` of the light reflected off a two-sided cavity.
pub fn reflected_displacements(p: &SubsystemParams, dets: &SignedDetunings, alpha_in: f64) -> Result<[f64; 2]> {
    let s = stark_shifts(p, dets)?;
    Ok([0.5 * alpha_in * s[0] / p.kappa, 0.5 * alpha_in * s[1] / p.kappa])
}

/// `|⟨β^a|β^b⟩|` between the reflected light of the two retained configurations.
///
/// Light reflected off cavity `x` in spin state `q` has amplitude
/// `±d̃_{xq}` (`+` for `q = 1`), and the light from the second cavity arrives
/// `2t_prop` later, so only the fraction `I_ol` of it overlaps in time.
pub fn two_sided_overlap(d_tilde: [[f64; 2]; 2], i_ol: f64, target: BellTarget) -> f64 {
    let s = |q: usize| if q == 1 { 1.0 } else { -1.0 };
    let [(a1, a2), (b1, b2)] = target.pair();
    let u = s(a1) * d_tilde[0][a1] - s(b1) * d_tilde[0][b1];
    let v = s(a2) * d_tilde[1][a2] - s(b2) * d_tilde[1][b2];
    libm::exp(-0.5 * (u * u + v * v + 2.0 * i_ol * u * v))
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct FidelityReport {
    pub fidelity: f64,
    pub p_succ: f64,
    pub x_c: f64,
    pub decay: DecayFactors,
    pub d: Distinguishabilities,
}

/// `erf(hi) − erf(lo)` without cancellation in the tails.
fn erf_diff(hi: f64, lo: f64) -> f64 {
    if lo >= 0.0 {
        erfc(lo) - erfc(hi)
    } else if hi <= 0.0 {
        erfc(-hi) - erfc(-lo)
    } else {
        erf(hi) - erf(lo)
    }
}

/// `∫_{−x_c}^{x_c} |G(x − d)|² dx` times two.
fn window_weight(d: f64, x_c: f64) -> f64 {
    let (u, v) = (core::f64::consts::SQRT_2 * d.abs(), core::f64::consts::SQRT_2 * x_c);
    erf_diff(u + v, u - v)
}

/// Windowed fidelity and acceptance probability.
pub fn fidelity(d: &Distinguishabilities, decay: &DecayFactors, x_c: f64) -> Result<FidelityReport> {
    ensure(x_c.is_finite() && x_c > 0.0, "x_c", x_c, "window half-width must be positive")?;
    for v in d.all() {
        ensure(v.is_finite(), "d", v, "displacement must be finite")?;
    }
    let p_succ = d.all().iter().map(|&v| window_weight(v, x_c)).sum::<f64>() / 8.0;
    if !(p_succ >= MIN_ACCEPTANCE) {
        return Err(Error::NoAcceptance { p_succ });
    }
    let (a, b) = d.retained();
    let s = (a + b) / core::f64::consts::SQRT_2;
    let w = core::f64::consts::SQRT_2 * x_c;
    let cross = libm::exp(-0.5 * (a - b) * (a - b)) * erf_diff(s + w, s - w) * decay.coherence_factor();
    let num = (0.5 * (window_weight(a, x_c) + window_weight(b, x_c)) + cross) / 8.0;
    Ok(FidelityReport { fidelity: (num / p_succ).clamp(0.0, 1.0), p_succ: p_succ.min(1.0), x_c, decay: *decay, d: *d })
}

/// A complete two-cavity setup.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Scenario {
    pub a: SubsystemParams,
    pub b: SubsystemParams,
    /// Laser frequency (meV).
    pub omega_l: f64,
    pub pulse: PulseSpec,
    pub x_c: f64,
    pub area: PulseAreaMode,
    /// Retained pair; chosen from the detuning signs when absent.
    pub target: Option<BellTarget>,
}

impl Scenario {
    pub fn new(a: SubsystemParams, b: SubsystemParams, omega_l: f64, pulse: PulseSpec, x_c: f64) -> Self {
        Scenario { a, b, omega_l, pulse, x_c, area: PulseAreaMode::Steady, target: None }
    }

    pub fn swapped(&self) -> Self {
        Scenario { a: self.b, b: self.a, ..*self }
    }
}

/// Everything that does not depend on the window.
pub fn decay_and_displacements(s: &Scenario) -> Result<(Distinguishabilities, DecayFactors)> {
    s.pulse.validate()?;
    let gammas = gamma_amplitudes(&s.a, &s.b, s.omega_l)?;
    let (da, db) = (detunings(&s.a, s.omega_l)?, detunings(&s.b, s.omega_l)?);
    let target = s.target.unwrap_or_else(|| BellTarget::from_detunings(&da, &db));
    let d = distinguishabilities(&gammas, s.pulse.alpha_in, target);
    let sided = s.a.sidedness;
    let phi = [
        pulse_area(s.area, s.a.kappa, sided, &s.pulse)?,
        pulse_area(s.area, s.b.kappa, sided, &s.pulse)?,
    ];
    let mut decay = rayleigh_decay(&s.a, &s.b, [&da, &db], s.pulse.alpha_in, phi)?;
    if sided == Sidedness::TwoSided {
        let dt = [
            reflected_displacements(&s.a, &da, s.pulse.alpha_in)?,
            reflected_displacements(&s.b, &db, s.pulse.alpha_in)?,
        ];
        decay.two_sided_overlap = two_sided_overlap(dt, overlap_integral(&s.pulse), target);
    }
    Ok((d, decay))
}

pub fn evaluate(s: &Scenario) -> Result<FidelityReport> {
    let (d, decay) = decay_and_displacements(s)?;
    fidelity(&d, &decay, s.x_c)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::estimates::{n_scatt_estimate, EstimateInput};
    use crate::units::Sidedness;
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use std::vec::Vec;

    fn no_decay() -> DecayFactors {
        DecayFactors { rayleigh_exponent: 0.0, rates: [[0.0; 2]; 2], pulse_areas: [0.0; 2], two_sided_overlap: 1.0 }
    }

    fn with_factor(c: f64) -> DecayFactors {
        DecayFactors { rayleigh_exponent: -libm::log(c), ..no_decay() }
    }

    fn singlet(d11: f64, d00: f64, d10: f64, d01: f64) -> Distinguishabilities {
        Distinguishabilities { d11, d00, d10, d01, target: BellTarget::Singlet }
    }

    /// Direct x-quadrature of the projected density matrix (Simpson rule).
    fn brute_force(d: &Distinguishabilities, c: f64, x_c: f64) -> (f64, f64) {
        let n = 100_000;
        let h = 2.0 * x_c / n as f64;
        let g = |x: f64| libm::pow(2.0 / core::f64::consts::PI, 0.25) * libm::exp(-x * x);
        let (a, b) = d.retained();
        let (mut p, mut num) = (0.0, 0.0);
        for i in 0..=n {
            let x = -x_c + i as f64 * h;
            let w = if i == 0 || i == n { 1.0 } else if i % 2 == 1 { 4.0 } else { 2.0 };
            let diag: f64 = d.all().iter().map(|&v| g(x - v).powi(2)).sum::<f64>() / 4.0;
            let ga = g(x - a);
            let gb = g(x - b);
            p += w * diag;
            num += w * 0.5 * (ga * ga / 4.0 + gb * gb / 4.0 + 2.0 * c * ga * gb / 4.0);
        }
        (num / p, p * h / 3.0)
    }

    #[test]
    fn perfect_discrimination() {
        let d = singlet(-30.0, 30.0, 0.0, 0.0);
        let r = fidelity(&d, &no_decay(), 0.3).unwrap();
        assert!((r.fidelity - 1.0).abs() < 1e-9);
        assert_relative_eq!(r.p_succ, erf(core::f64::consts::SQRT_2 * 0.3) / 2.0, epsilon = 1e-15);
        assert!((r.p_succ - 0.2257).abs() < 1e-4);
    }

    #[test]
    fn total_decay_gives_half() {
        let d = singlet(-30.0, 30.0, 0.0, 0.0);
        let r = fidelity(&d, &with_factor(1e-300), 0.3).unwrap();
        assert!((r.fidelity - 0.5).abs() < 1e-12);
    }

    #[test]
    fn no_signal_gives_half() {
        let d = singlet(0.0, 0.0, 0.0, 0.0);
        let r = fidelity(&d, &no_decay(), 0.3).unwrap();
        assert_relative_eq!(r.fidelity, 0.5, epsilon = 1e-15);
        assert_relative_eq!(r.p_succ, erf(core::f64::consts::SQRT_2 * 0.3), epsilon = 1e-15);
    }

    #[test]
    fn wide_window_accepts_everything() {
        let d = singlet(-3.0, 3.0, 0.2, -0.1);
        let r = fidelity(&d, &no_decay(), 60.0).unwrap();
        assert_relative_eq!(r.p_succ, 1.0, epsilon = 1e-14);
        let (fb, pb) = brute_force(&d, 1.0, 60.0);
        assert!((r.fidelity - fb).abs() < 1e-6 && (r.p_succ - pb).abs() < 1e-6);
    }

    #[test]
    fn empty_window_rejected() {
        let d = singlet(-40.0, 40.0, 40.0, -40.0);
        assert!(matches!(fidelity(&d, &no_decay(), 0.3), Err(Error::NoAcceptance { .. })));
        assert!(fidelity(&d, &no_decay(), 0.0).unwrap_err().is_validation());
    }

    #[test]
    fn closed_form_matches_quadrature_for_random_draws() {
        use proptest::strategy::ValueTree;
        use proptest::test_runner::TestRunner;
        let mut runner = TestRunner::deterministic();
        let strat = (
            prop::array::uniform4(-4.0f64..4.0),
            0.0f64..1.0,
            0.05f64..3.0,
            prop::bool::ANY,
        );
        for _ in 0..100 {
            let (dv, c, x_c, trip) = strat.new_tree(&mut runner).unwrap().current();
            let mut d = singlet(dv[0], dv[1], dv[2], dv[3]);
            if trip {
                d.target = BellTarget::Triplet;
            }
            let Ok(r) = fidelity(&d, &with_factor(c.max(1e-12)), x_c) else { continue };
            let (fb, pb) = brute_force(&d, c.max(1e-12), x_c);
            assert!((r.fidelity - fb).abs() < 1e-8, "{d:?} {c} {x_c}: {} vs {fb}", r.fidelity);
            assert!((r.p_succ - pb).abs() < 1e-8);
        }
    }

    #[test]
    fn small_angle_signal() {
        let kappa = 0.05;
        let a = SubsystemParams::detuned(0.03, kappa, 0.0, 1300.0, 10.0);
        let g = gamma_amplitudes(&a, &a, 1300.0).unwrap();
        let d = distinguishabilities(&g, 8.0, BellTarget::Singlet);
        let theta = steady_phase(0.03, kappa, 10.0);
        assert!(theta < 0.1);
        assert!((d.d11 + 4.0 * libm::sin(2.0 * theta)).abs() < 1e-3);
        assert!((d.d00 - 4.0 * libm::sin(2.0 * theta)).abs() < 1e-3);
        assert_eq!(d.d10, 0.0);
        assert_eq!(d.d01, 0.0);
    }

    fn steady_phase(g: f64, kappa: f64, dw: f64) -> f64 {
        2.0 * libm::atan(2.0 * g * g / (kappa * dw))
    }

    #[test]
    fn no_light_no_signal() {
        let a = SubsystemParams::detuned(0.15, 0.05, 0.002, 1300.0, 5.0);
        let g = gamma_amplitudes(&a, &a, 1300.0).unwrap();
        let d = distinguishabilities(&g, 0.0, BellTarget::Singlet);
        assert_eq!(d.all(), [0.0; 4]);
    }

    #[test]
    fn tune_between_reverses_roles() {
        let a = SubsystemParams::detuned(0.15, 0.05, 0.0, 1300.0, 4.0);
        let b = SubsystemParams::detuned(0.15, 0.05, 0.0, 1300.0, -4.0);
        let g = gamma_amplitudes(&a, &b, 1300.0).unwrap();
        let d = distinguishabilities(&g, 8.0, BellTarget::Triplet);
        assert!(d.d11.abs() < 1e-15 && d.d00.abs() < 1e-15);
        assert!(d.d10.abs() > 1.0 && d.d01.abs() > 1.0);
        let (da, db) = (detunings(&a, 1300.0).unwrap(), detunings(&b, 1300.0).unwrap());
        assert_eq!(BellTarget::from_detunings(&da, &db), BellTarget::Triplet);
    }

    #[test]
    fn rayleigh_exponent_is_twice_n_scatt() {
        let (g, kappa, gamma, dw, alpha) = (0.15, 0.05, 0.002, 5.0, 8.0);
        let a = SubsystemParams::detuned(g, kappa, gamma, 1300.0, dw);
        let d = detunings(&a, 1300.0).unwrap();
        let phi = crate::cavity::steady_pulse_area(kappa, Sidedness::OneSided);
        let r = rayleigh_decay(&a, &a, [&d, &d], alpha, [phi, phi]).unwrap();
        let n = n_scatt_estimate(&EstimateInput { g, kappa, gamma, delta_omega: dw, alpha_in: alpha });
        assert_relative_eq!(r.rayleigh_exponent, 2.0 * n, max_relative = 1e-12);
        assert_relative_eq!(r.scattered_photons(alpha)[0][0], n, max_relative = 1e-12);
        let dark = SubsystemParams { gamma: 0.0, ..a };
        let none = rayleigh_decay(&dark, &dark, [&d, &d], alpha, [phi, phi]).unwrap();
        assert_eq!(none.coherence_factor(), 1.0);
    }

    #[test]
    fn two_sided_overlap_examples() {
        let s = BellTarget::Singlet;
        assert_eq!(two_sided_overlap([[0.0; 2]; 2], 0.3, s), 1.0);
        let dt = 0.7;
        assert_relative_eq!(two_sided_overlap([[0.0, dt], [dt, 0.0]], 0.0, s), libm::exp(-dt * dt), epsilon = 1e-15);
        // Identical cavities: full cancellation needs complete temporal overlap.
        assert_relative_eq!(two_sided_overlap([[dt, dt], [dt, dt]], 1.0, s), 1.0, epsilon = 1e-15);
        assert_relative_eq!(
            two_sided_overlap([[dt, dt], [dt, dt]], 0.5, s),
            libm::exp(-4.0 * dt * dt * 0.5),
            epsilon = 1e-15
        );
    }

    #[test]
    fn two_sided_overlap_expanded_form() {
        // Expanded exponent for the singlet pair, written out term by term.
        let expanded = |d: [[f64; 2]; 2], i: f64| {
            let (a0, a1, b0, b1) = (d[0][0], d[0][1], d[1][0], d[1][1]);
            libm::exp(
                -0.5 * (a1 * a1 + a0 * a0 + b0 * b0 + b1 * b1 + 2.0 * a1 * a0 + 2.0 * b0 * b1
                    - 2.0 * i * (a1 * b0 + a1 * b1 + a0 * b0 + a0 * b1)),
            )
        };
        let cases = [[[0.3, 0.2], [0.5, 0.1]], [[1.0, 0.0], [0.0, 2.0]], [[0.4, 0.4], [0.4, 0.4]]];
        for d in cases {
            for i in [0.0, 0.3, 1.0] {
                assert_relative_eq!(two_sided_overlap(d, i, BellTarget::Singlet), expanded(d, i), epsilon = 1e-14);
            }
        }
    }

    #[test]
    fn evaluate_two_sided_includes_overlap() {
        let a = SubsystemParams::detuned(0.15, 0.05, 0.002, 1300.0, 5.0).with_sidedness(Sidedness::TwoSided);
        let b = SubsystemParams::detuned(0.15, 0.05, 0.002, 1300.0, 6.0).with_sidedness(Sidedness::TwoSided);
        let long = Scenario::new(a, b, 1300.0, PulseSpec::new(8.0, 1000.0).with_t_prop(1.0), 0.3);
        let (_, d) = decay_and_displacements(&long).unwrap();
        assert!(d.two_sided_overlap < 1.0 && d.two_sided_overlap > 0.99);
        let one = Scenario::new(
            a.with_sidedness(Sidedness::OneSided),
            b.with_sidedness(Sidedness::OneSided),
            1300.0,
            long.pulse,
            0.3,
        );
        assert_eq!(decay_and_displacements(&one).unwrap().1.two_sided_overlap, 1.0);
    }

    fn identical(gamma: f64, dw: f64, alpha: f64, x_c: f64) -> Scenario {
        let a = SubsystemParams::detuned(0.15, 0.05, gamma, 1300.0, dw);
        Scenario::new(a, a, 1300.0, PulseSpec::new(alpha, 1000.0), x_c)
    }

    #[test]
    fn reference_optimum_point() {
        let r = evaluate(&identical(0.002, 10.0, 12.05, 0.3)).unwrap();
        assert!(r.fidelity > 0.997 && r.fidelity < 0.9972, "{}", r.fidelity);
    }

    proptest! {
        #[test]
        fn fidelity_non_increasing_in_gamma(g1 in 0.0f64..0.01, g2 in 0.0f64..0.01, dw in 1.0f64..10.0, alpha in 0.5f64..20.0) {
            let (lo, hi) = if g1 < g2 { (g1, g2) } else { (g2, g1) };
            let f_lo = evaluate(&identical(lo, dw, alpha, 0.3));
            let f_hi = evaluate(&identical(hi, dw, alpha, 0.3));
            if let (Ok(a), Ok(b)) = (f_lo, f_hi) {
                prop_assert!(b.fidelity <= a.fidelity + 1e-15);
            }
        }

        #[test]
        fn acceptance_non_decreasing_in_window(dv in prop::array::uniform4(-5.0f64..5.0), x1 in 0.05f64..5.0, x2 in 0.05f64..5.0) {
            let d = singlet(dv[0], dv[1], dv[2], dv[3]);
            let (lo, hi) = if x1 < x2 { (x1, x2) } else { (x2, x1) };
            if let (Ok(a), Ok(b)) = (fidelity(&d, &no_decay(), lo), fidelity(&d, &no_decay(), hi)) {
                prop_assert!(a.p_succ <= b.p_succ + 1e-15);
            }
        }

        #[test]
        fn swapping_subsystems_is_symmetric(
            dwa in 1.0f64..10.0, dwb in 1.0f64..10.0, ga in 0.05f64..0.3, gb in 0.05f64..0.3,
            alpha in 0.5f64..15.0, b_ext in 0.0f64..2.0, x_c in 0.1f64..1.5,
        ) {
            let a = SubsystemParams::detuned(ga, 0.05, 0.002, 1300.0, dwa).with_fields(b_ext, 0.0);
            let b = SubsystemParams::detuned(gb, 0.07, 0.002, 1300.0, dwb).with_fields(b_ext, 0.0);
            let s = Scenario::new(a, b, 1300.0, PulseSpec::new(alpha, 1000.0), x_c);
            if let (Ok(r1), Ok(r2)) = (evaluate(&s), evaluate(&s.swapped())) {
                prop_assert!((r1.fidelity - r2.fidelity).abs() < 1e-12);
                prop_assert!((r1.p_succ - r2.p_succ).abs() < 1e-12);
                prop_assert!((r1.d.d10 - r2.d.d01).abs() < 1e-12);
            }
        }

        #[test]
        fn report_is_bounded(dv in prop::array::uniform4(-6.0f64..6.0), c in 0.0f64..1.0, x_c in 0.01f64..4.0) {
            if let Ok(r) = fidelity(&singlet(dv[0], dv[1], dv[2], dv[3]), &with_factor(c.max(1e-300)), x_c) {
                prop_assert!((0.0..=1.0).contains(&r.fidelity));
                prop_assert!((0.0..=1.0).contains(&r.p_succ));
            }
        }
    }

    #[test]
    fn wide_window_limit_monotone() {
        let d = singlet(-2.0, 2.0, 0.5, -0.5);
        let ps: Vec<f64> = [0.5, 1.0, 2.0, 4.0, 8.0].iter().map(|&x| fidelity(&d, &no_decay(), x).unwrap().p_succ).collect();
        assert!(ps.windows(2).all(|w| w[0] <= w[1]));
        assert!((ps[4] - 1.0).abs() < 1e-12);
    }
}
