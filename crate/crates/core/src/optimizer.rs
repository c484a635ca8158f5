//! Parameter searches over the analytic model.
//!
//! Every search is a deterministic grid scan followed by coordinate
//! refinement. The grid is visited in lexicographic order with the pulse
//! amplitude outermost and only strict improvements are kept, so ties resolve
//! toward the smallest `α_IN`. Refinement starts from the best grid point with
//! the grid spacing as step, tries `±step` along each axis, and halves the step
//! whenever no move improves, stopping below `1e-3` (in the axis coordinate:
//! the value itself for linear axes, its logarithm for log axes).

use alloc::vec::Vec;

use crate::cavity::{overlap_integral, PulseAreaMode, PulseSpec};
use crate::error::{Error, Result};
use crate::fidelity::{evaluate, FidelityReport, Scenario};
use crate::units::{Sidedness, SubsystemParams};

/// Laser energy used when only detunings matter (meV).
pub const REFERENCE_LASER_MEV: f64 = 1300.0;
/// Points whose acceptance probability falls below this are not candidates.
pub const DEFAULT_P_FLOOR: f64 = 1e-3;
pub const REFINE_STEP: f64 = 1e-3;

/// One search dimension.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Axis {
    pub lo: f64,
    pub hi: f64,
    pub points: usize,
    pub log: bool,
}

impl Axis {
    /// Uniform grid whose spacing does not exceed `max_step`.
    pub fn linear(lo: f64, hi: f64, max_step: f64) -> Self {
        Axis { lo, hi, points: crate::math::points_for_step(lo, hi, max_step), log: false }
    }

    pub fn linear_n(lo: f64, hi: f64, points: usize) -> Self {
        Axis { lo, hi, points, log: false }
    }

    pub fn log(lo: f64, hi: f64, points: usize) -> Self {
        Axis { lo, hi, points, log: true }
    }

    pub fn fixed(v: f64) -> Self {
        Axis { lo: v, hi: v, points: 1, log: false }
    }

    pub fn validate(&self, name: &'static str) -> Result<()> {
        let ok = self.lo.is_finite() && self.hi.is_finite() && self.lo <= self.hi && self.points >= 1;
        crate::error::ensure(ok, name, self.lo, "axis must be a non-empty finite range")?;
        crate::error::ensure(!self.log || self.lo > 0.0, name, self.lo, "log axis must be positive")?;
        crate::error::ensure(self.points > 1 || self.lo == self.hi, name, self.hi, "a range needs at least two points")
    }

    fn to_u(&self, x: f64) -> f64 {
        if self.log {
            libm::log(x)
        } else {
            x
        }
    }

    fn from_u(&self, u: f64) -> f64 {
        if self.log {
            libm::exp(u)
        } else {
            u
        }
    }

    fn u_bounds(&self) -> (f64, f64) {
        (self.to_u(self.lo), self.to_u(self.hi))
    }

    fn u_step(&self) -> f64 {
        let (a, b) = self.u_bounds();
        if self.points > 1 {
            (b - a) / (self.points - 1) as f64
        } else {
            0.0
        }
    }

    pub fn values(&self) -> Vec<f64> {
        if self.points == 1 {
            return alloc::vec![self.lo];
        }
        let (a, _) = self.u_bounds();
        let h = self.u_step();
        (0..self.points)
            .map(|i| match i {
                0 => self.lo,
                i if i + 1 == self.points => self.hi,
                i => self.from_u(a + h * i as f64).clamp(self.lo, self.hi),
            })
            .collect()
    }

    fn is_edge(&self, x: f64) -> bool {
        self.points > 1 && (x <= self.lo || x >= self.hi)
    }
}

/// Evaluation settings shared by all searches.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct EvalSettings {
    pub x_c: f64,
    pub tau_p: f64,
    pub t_prop: f64,
    pub area: PulseAreaMode,
    pub p_floor: f64,
}

impl Default for EvalSettings {
    fn default() -> Self {
        EvalSettings { x_c: 0.3, tau_p: 1000.0, t_prop: 0.0, area: PulseAreaMode::Steady, p_floor: DEFAULT_P_FLOOR }
    }
}

impl EvalSettings {
    pub fn with_x_c(mut self, x_c: f64) -> Self {
        self.x_c = x_c;
        self
    }

    fn pulse(&self, alpha_in: f64) -> PulseSpec {
        PulseSpec::new(alpha_in, self.tau_p).with_t_prop(self.t_prop)
    }

    fn scenario(&self, a: SubsystemParams, b: SubsystemParams, omega_l: f64, alpha_in: f64) -> Scenario {
        let mut s = Scenario::new(a, b, omega_l, self.pulse(alpha_in), self.x_c);
        s.area = self.area;
        s
    }

    /// `None` for points that fail to evaluate or fall below the acceptance floor.
    fn score(&self, s: &Scenario) -> Option<FidelityReport> {
        evaluate(s).ok().filter(|r| r.p_succ >= self.p_floor && r.fidelity.is_finite())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SearchResult<const D: usize> {
    pub x: [f64; D],
    pub report: FidelityReport,
    pub grid_x: [f64; D],
    pub grid_fidelity: f64,
    pub evaluations: usize,
    pub at_boundary: bool,
}

/// Grid scan plus coordinate refinement maximizing `F`.
pub fn search<const D: usize, F>(axes: &[Axis; D], mut f: F) -> Result<SearchResult<D>>
where
    F: FnMut(&[f64; D]) -> Option<FidelityReport>,
{
    for ax in axes {
        ax.validate("axis")?;
    }
    let values: Vec<Vec<f64>> = axes.iter().map(Axis::values).collect();
    let total: usize = values.iter().map(Vec::len).product();
    let mut best: Option<([f64; D], FidelityReport)> = None;
    let mut evaluations = 0;
    let mut idx = [0usize; D];
    for _ in 0..total {
        let mut x = [0.0; D];
        for d in 0..D {
            x[d] = values[d][idx[d]];
        }
        evaluations += 1;
        if let Some(r) = f(&x) {
            if best.as_ref().map_or(true, |(_, b)| r.fidelity > b.fidelity) {
                best = Some((x, r));
            }
        }
        for d in (0..D).rev() {
            idx[d] += 1;
            if idx[d] < values[d].len() {
                break;
            }
            idx[d] = 0;
        }
    }
    let Some((grid_x, grid_report)) = best else {
        return Err(Error::Infeasible { reason: "no grid point reaches the acceptance floor" });
    };

    let (mut x, mut report) = (grid_x, grid_report);
    let mut u: [f64; D] = core::array::from_fn(|d| axes[d].to_u(x[d]));
    let mut step: [f64; D] = core::array::from_fn(|d| axes[d].u_step());
    while step.iter().any(|&h| h >= REFINE_STEP) {
        let mut moved = false;
        for d in 0..D {
            if step[d] < REFINE_STEP {
                continue;
            }
            let (lo, hi) = axes[d].u_bounds();
            for dir in [-1.0, 1.0] {
                let cand_u = (u[d] + dir * step[d]).clamp(lo, hi);
                if cand_u == u[d] {
                    continue;
                }
                let mut cand = x;
                cand[d] = axes[d].from_u(cand_u).clamp(axes[d].lo, axes[d].hi);
                evaluations += 1;
                if let Some(r) = f(&cand) {
                    if r.fidelity > report.fidelity {
                        x = cand;
                        u[d] = cand_u;
                        report = r;
                        moved = true;
                        break;
                    }
                }
            }
        }
        if !moved {
            for h in step.iter_mut() {
                *h /= 2.0;
            }
        }
    }
    debug_assert!(report.fidelity >= grid_report.fidelity);
    let at_boundary = (0..D).any(|d| axes[d].is_edge(x[d]));
    Ok(SearchResult { x, report, grid_x, grid_fidelity: grid_report.fidelity, evaluations, at_boundary })
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct OptimumRecord {
    pub alpha_in: f64,
    pub omega_l: f64,
    /// `ν_x − ω_L` for both subsystems (meV).
    pub detunings: [f64; 2],
    /// `(|ν_B − ω_L| − |ν_A − ω_L|)/2`, tune-between only.
    pub asym_offset: Option<f64>,
    /// Cavity detuning applied to the nearer subsystem, cavity-detune only.
    pub cavity_detuning: Option<f64>,
    pub report: FidelityReport,
    pub grid_fidelity: f64,
    pub evaluations: usize,
    /// The optimum sits on the edge of a search range.
    pub at_boundary: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct IdenticalRanges {
    pub alpha: Axis,
    pub detuning: Axis,
}

impl Default for IdenticalRanges {
    fn default() -> Self {
        IdenticalRanges { alpha: Axis::linear(0.25, 30.0, 0.25), detuning: Axis::linear(1.0, 10.0, 0.25) }
    }
}

/// Both subsystems share `g, κ, Γ` and the same redshift `Δω`.
pub fn optimize_identical(
    g: f64,
    kappa: f64,
    gamma: f64,
    ranges: &IdenticalRanges,
    settings: &EvalSettings,
) -> Result<OptimumRecord> {
    let omega = REFERENCE_LASER_MEV;
    let res = search(&[ranges.alpha, ranges.detuning], |x| {
        let a = SubsystemParams::detuned(g, kappa, gamma, omega, x[1]);
        settings.score(&settings.scenario(a, a, omega, x[0]))
    })?;
    Ok(OptimumRecord {
        alpha_in: res.x[0],
        omega_l: omega,
        detunings: [res.x[1]; 2],
        asym_offset: None,
        cavity_detuning: None,
        report: res.report,
        grid_fidelity: res.grid_fidelity,
        evaluations: res.evaluations,
        at_boundary: res.at_boundary,
    })
}

/// Same as [`optimize_identical`] for two-sided cavities.
pub fn optimize_identical_two_sided(
    g: f64,
    kappa: f64,
    gamma: f64,
    ranges: &IdenticalRanges,
    settings: &EvalSettings,
) -> Result<OptimumRecord> {
    let omega = REFERENCE_LASER_MEV;
    let res = search(&[ranges.alpha, ranges.detuning], |x| {
        let a = SubsystemParams::detuned(g, kappa, gamma, omega, x[1]).with_sidedness(Sidedness::TwoSided);
        settings.score(&settings.scenario(a, a, omega, x[0]))
    })?;
    Ok(OptimumRecord {
        alpha_in: res.x[0],
        omega_l: omega,
        detunings: [res.x[1]; 2],
        asym_offset: None,
        cavity_detuning: None,
        report: res.report,
        grid_fidelity: res.grid_fidelity,
        evaluations: res.evaluations,
        at_boundary: res.at_boundary,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CouplingPoint {
    /// `g²/(κΓ)`.
    pub ratio: f64,
    pub g: f64,
    pub optimum: OptimumRecord,
}

pub const COUPLING_SCAN_GAMMA: f64 = 0.002;
pub const COUPLING_SCAN_KAPPA: f64 = 0.05;

/// Axes wide enough for weak coupling, where the best pulses are very bright,
/// and for strong coupling, where the best detuning lies beyond 10 meV.
pub fn coupling_scan_ranges() -> IdenticalRanges {
    IdenticalRanges { alpha: Axis::log(0.25, 1e4, 161), detuning: Axis::linear(1.0, 40.0, 0.25) }
}

/// Best fidelity for each ratio `g²/(κΓ)` at `Γ = 0.002`, `κ = 0.05` meV.
pub fn max_fidelity_vs_coupling(ratios: &[f64], settings: &EvalSettings) -> Result<Vec<CouplingPoint>> {
    max_fidelity_vs_coupling_with(ratios, settings, &coupling_scan_ranges())
}

pub fn max_fidelity_vs_coupling_with(
    ratios: &[f64],
    settings: &EvalSettings,
    ranges: &IdenticalRanges,
) -> Result<Vec<CouplingPoint>> {
    ratios
        .iter()
        .map(|&ratio| {
            crate::error::ensure(ratio.is_finite() && ratio > 0.0, "ratio", ratio, "must be positive")?;
            let g = libm::sqrt(ratio * COUPLING_SCAN_KAPPA * COUPLING_SCAN_GAMMA);
            let optimum = optimize_identical(g, COUPLING_SCAN_KAPPA, COUPLING_SCAN_GAMMA, ranges, settings)?;
            Ok(CouplingPoint { ratio, g, optimum })
        })
        .collect()
}

/// How the laser (and possibly one cavity) is placed for non-identical dots.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum Strategy {
    /// Laser below both transitions; the farther dot is at most
    /// `max_detuning` away and the laser position is optimized.
    Redshift { max_detuning: f64 },
    /// Laser between the two transitions.
    TuneBetween { asym: AsymOffset },
    /// Farther dot at `max_detuning`; the cavity of the nearer dot is detuned
    /// by `δω ∈ [lo, hi]`, each sign searched separately.
    CavityDetune { max_detuning: f64, lo: f64, hi: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum AsymOffset {
    Fixed(f64),
    Auto,
}

pub const DEFAULT_MAX_DETUNING: f64 = 10.0;
pub const CAVITY_DETUNING_STEP: f64 = 0.005;

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct StrategyConfig {
    pub strategy: Strategy,
    pub settings: EvalSettings,
    pub alpha: Axis,
    /// Lower end doubles as the smallest admissible detuning.
    pub detuning: Axis,
    /// Spacing of the tune-between offset and cavity-detuning grids.
    pub offset_step: f64,
}

impl StrategyConfig {
    pub fn new(strategy: Strategy, x_c: f64) -> Self {
        let offset_step = match strategy {
            Strategy::CavityDetune { .. } => CAVITY_DETUNING_STEP,
            _ => 0.25,
        };
        StrategyConfig {
            strategy,
            settings: EvalSettings::default().with_x_c(x_c),
            alpha: Axis::linear(0.25, 30.0, 0.25),
            detuning: Axis::linear(1.0, DEFAULT_MAX_DETUNING, 0.25),
            offset_step,
        }
    }
}

fn mean_nu(p: &SubsystemParams) -> f64 {
    let (n0, n1) = crate::units::zeeman_frequencies(p);
    0.5 * (n0 + n1)
}

fn record(
    x_alpha: f64,
    omega_l: f64,
    a: &SubsystemParams,
    b: &SubsystemParams,
    asym_offset: Option<f64>,
    cavity_detuning: Option<f64>,
    res_grid: f64,
    evaluations: usize,
    at_boundary: bool,
    report: FidelityReport,
) -> OptimumRecord {
    OptimumRecord {
        alpha_in: x_alpha,
        omega_l,
        detunings: [mean_nu(a) - omega_l, mean_nu(b) - omega_l],
        asym_offset,
        cavity_detuning,
        report,
        grid_fidelity: res_grid,
        evaluations,
        at_boundary,
    }
}

/// Optimum for two dots that may differ in transition energy and coupling.
pub fn optimize_strategy(a: &SubsystemParams, b: &SubsystemParams, cfg: &StrategyConfig) -> Result<OptimumRecord> {
    a.validate()?;
    b.validate()?;
    let s = &cfg.settings;
    let (na, nb) = (mean_nu(a), mean_nu(b));
    match cfg.strategy {
        Strategy::Redshift { max_detuning } => {
            let top = na.max(nb);
            let lo = cfg.detuning.lo + (na - nb).abs();
            if lo > max_detuning {
                return Err(Error::Infeasible { reason: "splitting exceeds the allowed redshift range" });
            }
            let far = if lo == max_detuning {
                Axis::fixed(lo)
            } else {
                Axis::linear(lo, max_detuning, cfg.detuning.u_step().max(REFINE_STEP))
            };
            let res = search(&[cfg.alpha, far], |x| s.score(&s.scenario(*a, *b, top - x[1], x[0])))?;
            let omega = top - res.x[1];
            Ok(record(res.x[0], omega, a, b, None, None, res.grid_fidelity, res.evaluations, res.at_boundary, res.report))
        }
        Strategy::TuneBetween { asym } => {
            let split = (na - nb).abs();
            if split < 2.0 * crate::units::RESONANCE_GUARD_MEV {
                return Err(Error::Infeasible { reason: "tune-between needs distinct transition energies" });
            }
            let mid = 0.5 * (na + nb);
            // ω_L = mid − Δω_asy keeps the redder dot at |Δω| = split/2 − Δω_asy.
            let sign = if na <= nb { 1.0 } else { -1.0 };
            let offset_axis = match asym {
                AsymOffset::Fixed(v) => Axis::fixed(v),
                AsymOffset::Auto => {
                    let reach = 0.45 * split;
                    let n = crate::math::points_for_step(-reach, reach, cfg.offset_step).max(21);
                    Axis::linear_n(-reach, reach, n)
                }
            };
            let res = search(&[cfg.alpha, offset_axis], |x| {
                let omega = mid - sign * x[1];
                s.score(&s.scenario(*a, *b, omega, x[0]))
            })?;
            let omega = mid - sign * res.x[1];
            let asym_report = 0.5 * ((nb - omega).abs() - (na - omega).abs());
            Ok(record(
                res.x[0],
                omega,
                a,
                b,
                Some(asym_report),
                None,
                res.grid_fidelity,
                res.evaluations,
                res.at_boundary,
                res.report,
            ))
        }
        Strategy::CavityDetune { .. } => {
            let [lo, hi] = cavity_detune_candidates(a, b, cfg)?;
            match (lo, hi) {
                (Some(l), Some(h)) => Ok(if h.report.fidelity > l.report.fidelity { h } else { l }),
                (Some(l), None) => Ok(l),
                (None, Some(h)) => Ok(h),
                (None, None) => Err(Error::Infeasible { reason: "no cavity detuning reaches the acceptance floor" }),
            }
        }
    }
}

/// Best optimum with `δω ≤ 0` and with `δω ≥ 0` (either may be infeasible).
pub fn cavity_detune_candidates(
    a: &SubsystemParams,
    b: &SubsystemParams,
    cfg: &StrategyConfig,
) -> Result<[Option<OptimumRecord>; 2]> {
    let Strategy::CavityDetune { max_detuning, lo, hi } = cfg.strategy else {
        return Err(Error::InvalidParameter { name: "strategy", value: 0.0, reason: "expected cavity-detune" });
    };
    crate::error::ensure(lo <= 0.0 && hi >= 0.0, "cavity_detuning_range", lo, "range must contain zero")?;
    let s = &cfg.settings;
    let (na, nb) = (mean_nu(a), mean_nu(b));
    let omega = na.max(nb) - max_detuning;
    // The nearer dot (smaller |Δω|) gets the detuned cavity.
    let a_near = (na - omega).abs() <= (nb - omega).abs();
    let mut out = [None, None];
    for (k, (from, to)) in [(lo, 0.0), (0.0, hi)].into_iter().enumerate() {
        if from == to {
            continue;
        }
        let axis = Axis::linear(from, to, cfg.offset_step);
        let res = search(&[cfg.alpha, axis], |x| {
            let (pa, pb) = detune_near(a, b, a_near, x[1]);
            s.score(&s.scenario(pa, pb, omega, x[0]))
        });
        match res {
            Ok(r) => {
                let (pa, pb) = detune_near(a, b, a_near, r.x[1]);
                out[k] = Some(record(r.x[0], omega, &pa, &pb, None, Some(r.x[1]), r.grid_fidelity, r.evaluations, r.at_boundary, r.report));
            }
            Err(Error::Infeasible { .. }) => {}
            Err(e) => return Err(e),
        }
    }
    Ok(out)
}

fn detune_near(a: &SubsystemParams, b: &SubsystemParams, a_near: bool, dcav: f64) -> (SubsystemParams, SubsystemParams) {
    if a_near {
        (a.with_cavity_detuning(dcav), *b)
    } else {
        (*a, b.with_cavity_detuning(dcav))
    }
}

/// Where the laser sits in a region scan.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum RegionKind {
    /// Identical dots both redshifted by `Δω`.
    Redshift,
    /// Dots at `ω_L ± Δω` (shifted together by the offset `s`, i.e.
    /// `Δω_A = Δω + s`, `Δω_B = −Δω + s`).
    TuneBetween { asym: AsymOffset },
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct RegionConfig {
    pub g: f64,
    pub kappa: f64,
    pub gamma: f64,
    pub kind: RegionKind,
    pub detuning: Axis,
    pub alpha: Axis,
    pub threshold: f64,
    /// Acceptance probability a point must exceed to count as inside.
    pub p_min: f64,
    pub settings: EvalSettings,
    /// Light-hole splittings to evaluate; `None` means no light holes.
    pub light_holes: Vec<Option<f64>>,
    /// Grid points for the automatic offset at each scan point.
    pub offset_points: usize,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct RegionPoint {
    pub detuning: f64,
    pub alpha_in: f64,
    /// Offset `s` used for every light-hole configuration at this point.
    pub offset: f64,
    /// Per light-hole configuration; NaN where the point cannot be evaluated.
    pub fidelity: Vec<f64>,
    pub p_succ: Vec<f64>,
}

impl RegionPoint {
    pub fn inside(&self, k: usize, threshold: f64, p_floor: f64) -> bool {
        self.fidelity[k] > threshold && self.p_succ[k] > p_floor
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct RegionScan {
    pub detuning: Vec<f64>,
    pub alpha: Vec<f64>,
    /// Row-major: detuning outer, amplitude inner.
    pub points: Vec<RegionPoint>,
    pub masks: Vec<Vec<bool>>,
    pub intersection: Vec<bool>,
}

impl RegionScan {
    pub fn assemble(cfg: &RegionConfig, points: Vec<RegionPoint>) -> Self {
        let n = cfg.light_holes.len();
        let masks: Vec<Vec<bool>> = (0..n)
            .map(|k| points.iter().map(|p| p.inside(k, cfg.threshold, cfg.p_min)).collect())
            .collect();
        let intersection = (0..points.len()).map(|i| masks.iter().all(|m| m[i])).collect();
        RegionScan { detuning: cfg.detuning.values(), alpha: cfg.alpha.values(), points, masks, intersection }
    }

    pub fn intersection_count(&self) -> usize {
        self.intersection.iter().filter(|&&b| b).count()
    }

    /// Smallest acceptance probability over every configuration inside the intersection.
    pub fn min_p_in_intersection(&self) -> Option<f64> {
        self.points
            .iter()
            .zip(&self.intersection)
            .filter(|(_, &m)| m)
            .flat_map(|(p, _)| p.p_succ.iter().copied())
            .reduce(f64::min)
    }
}

fn region_pair(cfg: &RegionConfig, dw: f64, offset: f64, hl: Option<f64>) -> (SubsystemParams, SubsystemParams) {
    let omega = REFERENCE_LASER_MEV;
    let base = |d: f64| SubsystemParams::detuned(cfg.g, cfg.kappa, cfg.gamma, omega, d).with_light_holes(hl);
    match cfg.kind {
        RegionKind::Redshift => (base(dw + offset), base(dw + offset)),
        RegionKind::TuneBetween { .. } => (base(dw + offset), base(-dw + offset)),
    }
}

/// Worst configuration at a fixed offset; `None` if any configuration fails.
fn region_eval(cfg: &RegionConfig, dw: f64, alpha: f64, offset: f64) -> Option<(f64, Vec<f64>, Vec<f64>)> {
    let s = &cfg.settings;
    let mut fs = Vec::with_capacity(cfg.light_holes.len());
    let mut ps = Vec::with_capacity(cfg.light_holes.len());
    for &hl in &cfg.light_holes {
        let (a, b) = region_pair(cfg, dw, offset, hl);
        let r = s.score(&s.scenario(a, b, REFERENCE_LASER_MEV, alpha))?;
        fs.push(r.fidelity);
        ps.push(r.p_succ);
    }
    let worst = fs.iter().copied().fold(f64::INFINITY, f64::min);
    Some((worst, fs, ps))
}

/// Evaluates one scan point, choosing the offset that maximizes the worst
/// fidelity over all light-hole configurations when it is automatic.
pub fn region_point(cfg: &RegionConfig, dw: f64, alpha: f64) -> RegionPoint {
    let nan = || alloc::vec![f64::NAN; cfg.light_holes.len()];
    let offset = match cfg.kind {
        RegionKind::Redshift => Some(0.0),
        RegionKind::TuneBetween { asym: AsymOffset::Fixed(v) } => Some(v),
        RegionKind::TuneBetween { asym: AsymOffset::Auto } => best_offset(cfg, dw, alpha),
    };
    match offset.and_then(|o| region_eval(cfg, dw, alpha, o).map(|e| (o, e))) {
        Some((offset, (_, fidelity, p_succ))) => RegionPoint { detuning: dw, alpha_in: alpha, offset, fidelity, p_succ },
        None => RegionPoint { detuning: dw, alpha_in: alpha, offset: 0.0, fidelity: nan(), p_succ: nan() },
    }
}

fn best_offset(cfg: &RegionConfig, dw: f64, alpha: f64) -> Option<f64> {
    let reach = 0.5 * dw;
    let axis = Axis::linear_n(-reach, reach, cfg.offset_points.max(3));
    let score = |s: f64| region_eval(cfg, dw, alpha, s).map(|e| e.0);
    let mut best: Option<(f64, f64)> = None;
    for s in axis.values() {
        if let Some(v) = score(s) {
            if best.map_or(true, |(_, b)| v > b) {
                best = Some((s, v));
            }
        }
    }
    let (mut s, mut v) = best?;
    let mut h = axis.u_step();
    while h >= REFINE_STEP {
        let mut moved = false;
        for cand in [s - h, s + h] {
            let cand = cand.clamp(-reach, reach);
            if let Some(c) = score(cand) {
                if c > v {
                    s = cand;
                    v = c;
                    moved = true;
                    break;
                }
            }
        }
        if !moved {
            h /= 2.0;
        }
    }
    Some(s)
}

/// Full scan; front ends may instead call [`region_point`] in parallel and
/// pass the points to [`RegionScan::assemble`].
pub fn region_scan(cfg: &RegionConfig) -> Result<RegionScan> {
    cfg.detuning.validate("detuning")?;
    cfg.alpha.validate("alpha")?;
    crate::error::ensure(!cfg.light_holes.is_empty(), "light_holes", 0.0, "need at least one configuration")?;
    let mut points = Vec::with_capacity(cfg.detuning.points * cfg.alpha.points);
    for dw in cfg.detuning.values() {
        for alpha in cfg.alpha.values() {
            points.push(region_point(cfg, dw, alpha));
        }
    }
    Ok(RegionScan::assemble(cfg, points))
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TwoSidedPoint {
    pub tau_p: f64,
    pub i_ol: f64,
    pub optimum: OptimumRecord,
}

/// Best fidelity over `α_IN` for identical two-sided cavities at each pulse length.
pub fn two_sided_curve(
    g: f64,
    kappa: f64,
    gamma: f64,
    detuning: f64,
    taus: &[f64],
    t_prop: f64,
    alpha: Axis,
    x_c: f64,
) -> Result<Vec<TwoSidedPoint>> {
    taus.iter()
        .map(|&tau_p| {
            let settings = EvalSettings { x_c, tau_p, t_prop, ..EvalSettings::default() };
            let ranges = IdenticalRanges { alpha, detuning: Axis::fixed(detuning) };
            let optimum = optimize_identical_two_sided(g, kappa, gamma, &ranges, &settings)?;
            let i_ol = overlap_integral(&PulseSpec::new(1.0, tau_p).with_t_prop(t_prop));
            Ok(TwoSidedPoint { tau_p, i_ol, optimum })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fidelity::evaluate;

    fn reference() -> OptimumRecord {
        optimize_identical(0.15, 0.05, 0.002, &IdenticalRanges::default(), &EvalSettings::default()).unwrap()
    }

    #[test]
    fn axis_values_hit_both_ends() {
        let a = Axis::linear(0.25, 30.0, 0.25);
        let v = a.values();
        assert_eq!(v.len(), 120);
        assert_eq!(v[0], 0.25);
        assert_eq!(*v.last().unwrap(), 30.0);
        let l = Axis::log(0.25, 1e4, 50).values();
        assert_eq!(l[0], 0.25);
        assert!((l[49] - 1e4).abs() < 1e-9);
        assert!(l.windows(2).all(|w| w[0] < w[1]));
        assert_eq!(Axis::fixed(3.0).values(), alloc::vec![3.0]);
    }

    #[test]
    fn identical_optimum_high_fidelity() {
        let r = reference();
        assert!(r.report.fidelity >= 0.99, "{r:?}");
        assert!(r.report.fidelity >= r.grid_fidelity);
    }

    #[test]
    fn optimum_dominates_grid() {
        let ranges = IdenticalRanges { alpha: Axis::linear(1.0, 20.0, 1.0), detuning: Axis::linear(2.0, 8.0, 1.0) };
        let s = EvalSettings::default();
        let r = optimize_identical(0.15, 0.05, 0.002, &ranges, &s).unwrap();
        for dw in ranges.detuning.values() {
            for al in ranges.alpha.values() {
                let a = SubsystemParams::detuned(0.15, 0.05, 0.002, REFERENCE_LASER_MEV, dw);
                if let Some(p) = s.score(&s.scenario(a, a, REFERENCE_LASER_MEV, al)) {
                    assert!(r.report.fidelity >= p.fidelity);
                }
            }
        }
    }

    #[test]
    fn lossless_fidelity_saturates_with_amplitude() {
        let r = optimize_identical(0.15, 0.05, 0.0, &IdenticalRanges::default(), &EvalSettings::default()).unwrap();
        assert!(r.report.fidelity > 1.0 - 1e-12);
        let s = EvalSettings::default();
        let a = SubsystemParams::detuned(0.15, 0.05, 0.0, REFERENCE_LASER_MEV, 5.0);
        let f: Vec<f64> = Axis::linear(0.25, 30.0, 0.25)
            .values()
            .iter()
            .map(|&al| s.score(&s.scenario(a, a, REFERENCE_LASER_MEV, al)).unwrap().fidelity)
            .collect();
        assert!(f.windows(2).all(|w| w[1] >= w[0] - 1e-15));
        // Ties at F = 1 resolve toward the weakest pulse.
        let first_one = f.iter().position(|&v| v == r.report.fidelity);
        assert!(first_one.map_or(true, |i| i + 1 < f.len()));
    }

    #[test]
    fn redshift_without_splitting_matches_identical() {
        let id = reference();
        let a = SubsystemParams::detuned(0.15, 0.05, 0.002, REFERENCE_LASER_MEV, 0.0);
        let cfg = StrategyConfig::new(Strategy::Redshift { max_detuning: 10.0 }, 0.3);
        let r = optimize_strategy(&a, &a, &cfg).unwrap();
        assert!((r.report.fidelity - id.report.fidelity).abs() < 1e-6);
    }

    #[test]
    fn tune_between_without_splitting_is_infeasible() {
        let a = SubsystemParams::detuned(0.15, 0.05, 0.002, REFERENCE_LASER_MEV, 0.0);
        let cfg = StrategyConfig::new(Strategy::TuneBetween { asym: AsymOffset::Fixed(0.0) }, 0.3);
        assert!(matches!(optimize_strategy(&a, &a, &cfg), Err(Error::Infeasible { .. })));
    }

    #[test]
    fn tune_between_symmetric_under_exchange() {
        let a = SubsystemParams::detuned(0.15, 0.05, 0.002, REFERENCE_LASER_MEV, 0.0);
        let b = SubsystemParams::detuned(0.15, 0.05, 0.002, REFERENCE_LASER_MEV, 3.0);
        let mut cfg = StrategyConfig::new(Strategy::TuneBetween { asym: AsymOffset::Auto }, 0.3);
        cfg.alpha = Axis::linear(0.5, 20.0, 0.5);
        let r1 = optimize_strategy(&a, &b, &cfg).unwrap();
        let r2 = optimize_strategy(&b, &a, &cfg).unwrap();
        assert!((r1.report.fidelity - r2.report.fidelity).abs() < 1e-9);
        assert!((r1.asym_offset.unwrap() - r2.asym_offset.unwrap()).abs() < 1e-9);
    }

    #[test]
    fn cavity_detune_keeps_both_signs() {
        let a = SubsystemParams::detuned(0.15, 0.05, 0.002, REFERENCE_LASER_MEV, 0.0);
        let b = SubsystemParams::detuned(0.15, 0.05, 0.002, REFERENCE_LASER_MEV, 2.0);
        let mut cfg = StrategyConfig::new(Strategy::CavityDetune { max_detuning: 10.0, lo: -0.2, hi: 0.2 }, 0.3);
        cfg.alpha = Axis::linear(1.0, 20.0, 1.0);
        let [neg, pos] = cavity_detune_candidates(&a, &b, &cfg).unwrap();
        let (neg, pos) = (neg.unwrap(), pos.unwrap());
        assert!(neg.cavity_detuning.unwrap() <= 0.0 && pos.cavity_detuning.unwrap() >= 0.0);
        let best = optimize_strategy(&a, &b, &cfg).unwrap();
        assert_eq!(best.report.fidelity, neg.report.fidelity.max(pos.report.fidelity));
        // Laser 10 meV below the upper dot.
        assert!((best.detunings[1] - 10.0).abs() < 1e-9);
    }

    #[test]
    fn two_sided_long_pulse_limit() {
        let alpha = Axis::linear(0.5, 30.0, 0.5);
        let c = two_sided_curve(0.15, 0.05, 0.002, 10.0, &[1e5], 10.0, alpha, 0.7).unwrap();
        let unit = two_sided_curve(0.15, 0.05, 0.002, 10.0, &[1e5], 0.0, alpha, 0.7).unwrap();
        assert!((c[0].optimum.report.fidelity - unit[0].optimum.report.fidelity).abs() < 1e-6);
    }

    #[test]
    fn region_point_offset_auto_beats_fixed() {
        let cfg = RegionConfig {
            g: 0.15,
            kappa: 0.05,
            gamma: 0.002,
            kind: RegionKind::TuneBetween { asym: AsymOffset::Auto },
            detuning: Axis::linear_n(2.0, 4.0, 3),
            alpha: Axis::linear_n(3.0, 6.0, 3),
            threshold: 0.99,
            p_min: 0.35,
            settings: EvalSettings::default().with_x_c(0.6),
            light_holes: alloc::vec![Some(10.0)],
            offset_points: 21,
        };
        let auto = region_point(&cfg, 3.0, 4.0);
        let fixed = RegionConfig { kind: RegionKind::TuneBetween { asym: AsymOffset::Fixed(0.0) }, ..cfg.clone() };
        let sym = region_point(&fixed, 3.0, 4.0);
        assert!(auto.fidelity[0] >= sym.fidelity[0]);
        let scan = region_scan(&cfg).unwrap();
        assert_eq!(scan.points.len(), 9);
        assert_eq!(scan.masks.len(), 1);
    }

    #[test]
    fn region_masks_shrink_with_gamma() {
        let mk = |gamma: f64| RegionConfig {
            g: 0.15,
            kappa: 0.05,
            gamma,
            kind: RegionKind::Redshift,
            detuning: Axis::linear_n(1.0, 10.0, 10),
            alpha: Axis::linear_n(1.0, 15.0, 10),
            threshold: 0.99,
            p_min: 0.47,
            settings: EvalSettings::default().with_x_c(1.0),
            light_holes: alloc::vec![None, Some(10.0)],
            offset_points: 11,
        };
        let lo = region_scan(&mk(0.002)).unwrap();
        let hi = region_scan(&mk(0.004)).unwrap();
        for (k, m) in hi.masks.iter().enumerate() {
            for (i, &inside) in m.iter().enumerate() {
                assert!(!inside || lo.masks[k][i]);
            }
        }
        assert!(lo.intersection_count() > 0);
    }

    #[test]
    fn evaluate_agrees_with_record() {
        let r = reference();
        let a = SubsystemParams::detuned(0.15, 0.05, 0.002, REFERENCE_LASER_MEV, r.detunings[0]);
        let s = Scenario::new(a, a, REFERENCE_LASER_MEV, PulseSpec::new(r.alpha_in, 1000.0), 0.3);
        assert_eq!(evaluate(&s).unwrap().fidelity, r.report.fidelity);
    }
}
