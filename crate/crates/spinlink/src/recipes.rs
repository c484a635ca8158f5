//! Named figure recipes `fig1` … `fig13`.
//!
//! Each recipe fixes its parameters in code (documented on the function) and
//! returns one plot-ready table. Unless stated otherwise: `g = 0.15`,
//! `κ = 0.05`, `Γ = 0.002` meV, `τ_P = 1 ns`, one-sided cavities, no magnetic
//! field, laser at 1300 meV.

use rayon::prelude::*;
use spinlink_core::cavity::{
    transient_cavity_field, CavityDrive, CavityTrace, GammaSet, PulseSpec, MIN_TRACE_SAMPLES,
};
use spinlink_core::estimates::{n_scatt_estimate, snr_estimate, EstimateInput};
use spinlink_core::fidelity::{evaluate, Scenario};
use spinlink_core::lightholes::{level_scheme, stark_factor, HoleKind};
use spinlink_core::optimizer::{
    max_fidelity_vs_coupling, optimize_identical, optimize_strategy, two_sided_curve, AsymOffset, Axis,
    EvalSettings, IdenticalRanges, RegionConfig, RegionKind, Strategy, StrategyConfig, COUPLING_SCAN_GAMMA,
    COUPLING_SCAN_KAPPA, REFERENCE_LASER_MEV,
};
use spinlink_core::semiclassical::{integrate_obe1_sampled, ObeDrive};
use spinlink_core::units::{detunings, Sidedness};
use spinlink_core::SubsystemParams;

use crate::commands::{
    analytic_optimal_alpha, hl_label, parallel_region_scan, region_rows, semiclassical_point, semiclassical_row,
    with_threads,
};
use crate::error::{AppError, AppResult};
use crate::output::{echo_scenario, echo_subsystem, missing_report_columns, put, report_columns, Row, Table};

pub const G: f64 = 0.15;
pub const KAPPA: f64 = 0.05;
pub const GAMMA: f64 = 0.002;
const OMEGA: f64 = REFERENCE_LASER_MEV;

/// Propagation delay assumed for the two-sided recipes (ps).
pub const TWO_SIDED_T_PROP_PS: f64 = 100.0;

pub const RECIPES: &[(&str, &str)] = &[
    ("fig1", "empty and loaded cavity response to 1 ns, 100 ps and 10 ps pulses"),
    ("fig2", "fidelity and acceptance over amplitude and detuning, identical dots"),
    ("fig3", "SNR, scattered photons and fidelity at 5 meV; best fidelity versus g^2/(kappa Gamma)"),
    ("fig4", "best fidelity and acceptance versus window for 2, 4, 6, 10 meV"),
    ("fig5", "overlap integral and best two-sided fidelity versus pulse length"),
    ("fig6", "non-identical dot strategies versus splitting, x_c = 0.3"),
    ("fig7", "non-identical dot strategies versus splitting, x_c = 1"),
    ("fig8", "level scheme with light holes"),
    ("fig9", "F > 0.99 regions with and without light holes (redshift, tune-between)"),
    ("fig10", "F > 0.99 / 0.98 regions common to 10 and 20 meV light-hole splittings"),
    ("fig11", "single-transition Bloch-equation trace, 100 ps, alpha = 4, 2 meV"),
    ("fig12", "semiclassical versus dispersive phase, damping and fidelity"),
    ("fig13", "arg gamma amplitudes versus cavity-laser detuning"),
];

pub fn run_recipe(name: &str, threads: Option<usize>) -> AppResult<Table> {
    with_threads(threads, || match name {
        "fig1" => fig1(),
        "fig2" => fig2(),
        "fig3" => fig3(),
        "fig4" => fig4(),
        "fig5" => fig5(),
        "fig6" => strategies(0.3, true),
        "fig7" => strategies(1.0, false),
        "fig8" => fig8(),
        "fig9" => fig9(threads),
        "fig10" => fig10(threads),
        "fig11" => fig11(),
        "fig12" => fig12(),
        "fig13" => fig13(),
        other => Err(AppError::config(
            "recipe",
            format!("unknown recipe `{other}`; known: {}", RECIPES.iter().map(|r| r.0).collect::<Vec<_>>().join(", ")),
        )),
    })?
}

fn identical(dw: f64) -> SubsystemParams {
    SubsystemParams::detuned(G, KAPPA, GAMMA, OMEGA, dw)
}

fn collect<T>(v: Vec<AppResult<T>>) -> AppResult<Vec<T>> {
    v.into_iter().collect()
}

/// `g = 0.15`, `Δω = 5` meV, `α_IN = 8`; 2048 samples per trace, every fourth written.
fn fig1() -> AppResult<Table> {
    let dw = 5.0;
    let alpha = 8.0;
    let mut rows = Vec::new();
    for tau in [1000.0, 100.0, 10.0] {
        let pulse = PulseSpec::new(alpha, tau);
        let drive = CavityDrive::new(G, KAPPA, dw, 0.0);
        let empty = transient_cavity_field(&pulse, &CavityDrive::empty(KAPPA, Sidedness::OneSided), MIN_TRACE_SAMPLES)?;
        let loaded = transient_cavity_field(&pulse, &drive, MIN_TRACE_SAMPLES)?;
        let steady = CavityTrace::steady(&pulse, &drive, MIN_TRACE_SAMPLES)?;
        let theta_small = 4.0 * G * G / (KAPPA * dw);
        let to_kappa_units = 1.0 / KAPPA.sqrt();
        for i in (0..MIN_TRACE_SAMPLES).step_by(4) {
            let mut row = Row::new();
            put(&mut row, "g_meV", G);
            put(&mut row, "kappa_meV", KAPPA);
            put(&mut row, "detuning_meV", dw);
            put(&mut row, "alpha_in", alpha);
            put(&mut row, "tau_p_ps", tau);
            put(&mut row, "t0_ps", pulse.t0);
            put(&mut row, "t_ps", loaded.t_ps[i]);
            put(&mut row, "S_empty_abs", empty.amplitude(i).norm());
            put(&mut row, "S_loaded_abs", loaded.amplitude(i).norm());
            put(&mut row, "S_steady_abs", steady.amplitude(i).norm());
            put(&mut row, "out_abs_kappa_units", loaded.output[i].norm() * loaded.scale * to_kappa_units);
            put(&mut row, "out_steady_abs_kappa_units", steady.output[i].norm() * steady.scale * to_kappa_units);
            put(&mut row, "phase", loaded.phase[i]);
            put(&mut row, "phase_steady", steady.phase[i]);
            put(&mut row, "theta_small_angle", theta_small);
            rows.push(row);
        }
    }
    Ok(Table::new(rows))
}

/// Identical dots, `B_ext = 1` T, `x_c = 0.3`; `α_IN ∈ [0.25, 30]` and
/// `Δω ∈ [1, 10]` meV in steps of 0.25.
fn fig2() -> AppResult<Table> {
    let alphas = Axis::linear(0.25, 30.0, 0.25).values();
    let dws = Axis::linear(1.0, 10.0, 0.25).values();
    let grid: Vec<(f64, f64)> = dws.iter().flat_map(|&d| alphas.iter().map(move |&a| (d, a))).collect();
    let rows = grid
        .par_iter()
        .map(|&(dw, alpha)| {
            let p = identical(dw).with_fields(1.0, 0.0);
            let s = Scenario::new(p, p, OMEGA, PulseSpec::new(alpha, 1000.0), 0.3);
            let mut row = echo_scenario(&s);
            match evaluate(&s) {
                Ok(r) => report_columns(&mut row, &r, alpha),
                Err(_) => missing_report_columns(&mut row),
            }
            row
        })
        .collect();
    Ok(Table::new(rows))
}

/// Series `snr`: `Δω = 5` meV, `α_IN ∈ [0.25, 30]`. Series `coupling`: best
/// fidelity for 25 log-spaced `g²/(κΓ) ∈ [0.1, 1000]` at `κ = 0.05`,
/// `Γ = 0.002` meV, amplitudes up to `10⁴`.
fn fig3() -> AppResult<Table> {
    let settings = EvalSettings::default();
    let mut rows = Vec::new();
    for alpha in Axis::linear(0.25, 30.0, 0.25).values() {
        let dw = 5.0;
        let p = identical(dw);
        let s = Scenario::new(p, p, OMEGA, PulseSpec::new(alpha, settings.tau_p), settings.x_c);
        let r = evaluate(&s)?;
        let e = EstimateInput { g: G, kappa: KAPPA, gamma: GAMMA, delta_omega: dw, alpha_in: alpha };
        rows.push(fig3_row("snr", G * G / (KAPPA * GAMMA), G, dw, alpha, &settings, &e, Some(&r), false));
    }
    let ratios = Axis::log(0.1, 1000.0, 25).values();
    let curve = collect(
        ratios
            .par_iter()
            .map(|&r| max_fidelity_vs_coupling(&[r], &settings).map(|mut v| v.remove(0)).map_err(AppError::from))
            .collect(),
    )?;
    for pt in curve {
        let o = &pt.optimum;
        let e = EstimateInput {
            g: pt.g,
            kappa: COUPLING_SCAN_KAPPA,
            gamma: COUPLING_SCAN_GAMMA,
            delta_omega: o.detunings[0],
            alpha_in: o.alpha_in,
        };
        rows.push(fig3_row("coupling", pt.ratio, pt.g, o.detunings[0], o.alpha_in, &settings, &e, Some(&o.report), o.at_boundary));
    }
    Ok(Table::new(rows))
}

#[allow(clippy::too_many_arguments)]
fn fig3_row(
    series: &str,
    ratio: f64,
    g: f64,
    dw: f64,
    alpha: f64,
    s: &EvalSettings,
    e: &EstimateInput,
    r: Option<&spinlink_core::fidelity::FidelityReport>,
    at_boundary: bool,
) -> Row {
    let mut row = Row::new();
    put(&mut row, "series", series);
    put(&mut row, "ratio", ratio);
    put(&mut row, "g_meV", g);
    put(&mut row, "kappa_meV", e.kappa);
    put(&mut row, "gamma_meV", e.gamma);
    put(&mut row, "tau_p_ps", s.tau_p);
    put(&mut row, "x_c", s.x_c);
    put(&mut row, "detuning_meV", dw);
    put(&mut row, "alpha_in", alpha);
    put(&mut row, "snr", snr_estimate(e));
    put(&mut row, "n_scatt_estimate", n_scatt_estimate(e));
    let total = r.map(|r| r.decay.scattered_photons(alpha).iter().flatten().sum::<f64>());
    put(&mut row, "n_scatt_total", total);
    put(&mut row, "F", r.map(|r| r.fidelity));
    put(&mut row, "P_succ", r.map(|r| r.p_succ));
    put(&mut row, "at_boundary", at_boundary);
    row
}

/// `Δω ∈ {2, 4, 6, 10}` meV; `x_c ∈ [0.05, 3]` step 0.05; amplitude optimized
/// over `[0.25, 30]` at each point.
fn fig4() -> AppResult<Table> {
    let xcs = Axis::linear(0.05, 3.0, 0.05).values();
    let grid: Vec<(f64, f64)> = [2.0, 4.0, 6.0, 10.0].iter().flat_map(|&d| xcs.iter().map(move |&x| (d, x))).collect();
    let rows = collect(
        grid.par_iter()
            .map(|&(dw, x_c)| {
                let ranges = IdenticalRanges { alpha: Axis::linear(0.25, 30.0, 0.25), detuning: Axis::fixed(dw) };
                let settings = EvalSettings::default().with_x_c(x_c);
                let o = optimize_identical(G, KAPPA, GAMMA, &ranges, &settings)?;
                let p = identical(dw);
                let s = Scenario::new(p, p, OMEGA, PulseSpec::new(o.alpha_in, settings.tau_p), x_c);
                let mut row = echo_scenario(&s);
                report_columns(&mut row, &o.report, o.alpha_in);
                put(&mut row, "at_boundary", o.at_boundary);
                Ok(row)
            })
            .collect(),
    )?;
    Ok(Table::new(rows))
}

/// Two-sided cavities, `t_prop = 100` ps, `x_c = 0.7`; `τ_P` log-spaced over
/// `[10 ps, 100 ns]`; best amplitude in `[0.25, 30]` for `Δω ∈ {2, 10}` meV.
fn fig5() -> AppResult<Table> {
    let taus = Axis::log(10.0, 1e5, 41).values();
    let alpha = Axis::linear(0.25, 30.0, 0.25);
    let jobs: Vec<(f64, f64)> = [2.0, 10.0].iter().flat_map(|&d| taus.iter().map(move |&t| (d, t))).collect();
    let pts = collect(
        jobs.par_iter()
            .map(|&(dw, tau)| {
                two_sided_curve(G, KAPPA, GAMMA, dw, &[tau], TWO_SIDED_T_PROP_PS, alpha, 0.7)
                    .map(|mut v| (dw, v.remove(0)))
                    .map_err(AppError::from)
            })
            .collect(),
    )?;
    let rows = pts
        .iter()
        .map(|(dw, pt)| {
            let p = identical(*dw).with_sidedness(Sidedness::TwoSided);
            let pulse = PulseSpec::new(pt.optimum.alpha_in, pt.tau_p).with_t_prop(TWO_SIDED_T_PROP_PS);
            let mut row = echo_scenario(&Scenario::new(p, p, OMEGA, pulse, 0.7));
            put(&mut row, "I_ol", pt.i_ol);
            report_columns(&mut row, &pt.optimum.report, pt.optimum.alpha_in);
            put(&mut row, "at_boundary", pt.optimum.at_boundary);
            row
        })
        .collect();
    Ok(Table::new(rows))
}

struct Series {
    name: &'static str,
    strategy: Strategy,
    x_c: f64,
    g_a: f64,
    g_b: f64,
}

/// Dot A sits `Δν ∈ [0, 10]` meV (step 0.5) above dot B (1300 meV).
/// Redshift keeps both dots within 10 meV of the laser; cavity detuning fixes
/// the far dot at 10 meV and searches `δω ∈ [−2, 2]` meV. The `g = 0.14`
/// series lower one coupling.
fn strategies(x_c: f64, narrow_windows: bool) -> AppResult<Table> {
    let red = Strategy::Redshift { max_detuning: 10.0 };
    let tb = Strategy::TuneBetween { asym: AsymOffset::Auto };
    let cd = Strategy::CavityDetune { max_detuning: 10.0, lo: -2.0, hi: 2.0 };
    let mut series = vec![
        Series { name: "redshift", strategy: red, x_c, g_a: G, g_b: G },
        Series { name: "tune-between", strategy: tb, x_c, g_a: G, g_b: G },
        Series { name: "cavity-detune", strategy: cd, x_c, g_a: G, g_b: G },
        Series { name: "redshift-gA0.14", strategy: red, x_c, g_a: 0.14, g_b: G },
        Series { name: "tune-between-gA0.14", strategy: tb, x_c, g_a: 0.14, g_b: G },
        Series { name: "redshift-gB0.14", strategy: red, x_c, g_a: G, g_b: 0.14 },
        Series { name: "tune-between-gB0.14", strategy: tb, x_c, g_a: G, g_b: 0.14 },
    ];
    if narrow_windows {
        series.push(Series { name: "redshift-xc0.2", strategy: red, x_c: 0.2, g_a: G, g_b: G });
        series.push(Series { name: "redshift-gB0.14-xc0.1", strategy: red, x_c: 0.1, g_a: G, g_b: 0.14 });
    }
    let splits = Axis::linear(0.0, 10.0, 0.5).values();
    let jobs: Vec<(&Series, f64)> = series.iter().flat_map(|s| splits.iter().map(move |&d| (s, d))).collect();
    let rows = collect(
        jobs.par_iter()
            .map(|&(se, dnu)| {
                let b = SubsystemParams::new(se.g_b, KAPPA, GAMMA, OMEGA);
                let a = SubsystemParams::new(se.g_a, KAPPA, GAMMA, OMEGA + dnu);
                let cfg = StrategyConfig::new(se.strategy, se.x_c);
                let mut row = Row::new();
                put(&mut row, "series", se.name);
                put(&mut row, "delta_nu_meV", dnu);
                match optimize_strategy(&a, &b, &cfg) {
                    Ok(o) => {
                        let (mut pa, mut pb) = (a, b);
                        if let Some(d) = o.cavity_detuning {
                            if o.detunings[0].abs() <= o.detunings[1].abs() {
                                pa.cavity_detuning = d;
                            } else {
                                pb.cavity_detuning = d;
                            }
                        }
                        let s = Scenario::new(pa, pb, o.omega_l, PulseSpec::new(o.alpha_in, cfg.settings.tau_p), se.x_c);
                        row.extend(echo_scenario(&s));
                        put(&mut row, "asym_offset_meV", o.asym_offset);
                        put(&mut row, "cavity_detuning_meV", o.cavity_detuning);
                        report_columns(&mut row, &o.report, o.alpha_in);
                        put(&mut row, "at_boundary", o.at_boundary);
                        put(&mut row, "status", "ok");
                    }
                    Err(e) if e.is_validation() => return Err(AppError::from(e)),
                    Err(e) => {
                        let s = Scenario::new(a, b, f64::NAN, PulseSpec::new(f64::NAN, cfg.settings.tau_p), se.x_c);
                        row.extend(echo_scenario(&s));
                        put(&mut row, "asym_offset_meV", f64::NAN);
                        put(&mut row, "cavity_detuning_meV", f64::NAN);
                        missing_report_columns(&mut row);
                        put(&mut row, "at_boundary", false);
                        put(&mut row, "status", e.kind());
                    }
                }
                Ok(row)
            })
            .collect(),
    )?;
    Ok(Table::new(rows))
}

/// `Δω_HL = 10` meV, `B_ext = 1` T; a redshifted (+5 meV) and a blueshifted
/// (−5 meV) dot.
fn fig8() -> AppResult<Table> {
    let mut rows = Vec::new();
    for (case, dw) in [("redshift", 5.0), ("blueshift", -5.0)] {
        let p = SubsystemParams::detuned(G, KAPPA, GAMMA, OMEGA, dw).with_fields(1.0, 0.0).with_light_holes(Some(10.0));
        let dets = detunings(&p, OMEGA)?;
        for t in level_scheme(&dets) {
            let mut row = Row::new();
            put(&mut row, "case", case);
            echo_subsystem(&mut row, "x", &p, OMEGA);
            put(&mut row, "ground_spin", t.ground_spin);
            put(&mut row, "polarization", t.polarization);
            put(&mut row, "hole", if t.kind == HoleKind::Heavy { "heavy" } else { "light" });
            put(&mut row, "transition_detuning_meV", t.detuning);
            put(&mut row, "coupling_factor", t.coupling_factor);
            put(&mut row, "linewidth_factor", t.linewidth_factor);
            let f = stark_factor(&dets, t.polarization)?;
            put(&mut row, "stark_factor", f);
            put(&mut row, "rayleigh_factor", f * f);
            rows.push(row);
        }
    }
    Ok(Table::new(rows))
}

/// Redshift region: `x_c = 1`, `P_succ > 0.47`, `Δω ∈ [0.5, 20]`, `α_IN ∈ [0.25, 30]`.
pub fn fig9a_region(points: usize) -> RegionConfig {
    RegionConfig {
        g: G,
        kappa: KAPPA,
        gamma: GAMMA,
        kind: RegionKind::Redshift,
        detuning: Axis::linear_n(0.5, 20.0, points),
        alpha: Axis::linear_n(0.25, 30.0, points),
        threshold: 0.99,
        p_min: 0.47,
        settings: EvalSettings::default().with_x_c(1.0),
        light_holes: vec![Some(10.0), None],
        offset_points: 21,
    }
}

/// Tune-between region (dots at `ω_L ± Δω` plus the best common offset):
/// `x_c = 0.6`, `P_succ > 0.35`, `Δω ∈ [0.5, 10]`, `α_IN ∈ [0.25, 30]`.
pub fn fig9b_region(points: usize) -> RegionConfig {
    RegionConfig {
        kind: RegionKind::TuneBetween { asym: AsymOffset::Auto },
        detuning: Axis::linear_n(0.5, 10.0, points),
        p_min: 0.35,
        settings: EvalSettings::default().with_x_c(0.6),
        ..fig9a_region(points)
    }
}

/// Tune-between, light holes at 10 and 20 meV, `x_c = 1.3`, `P_succ > 0.49`;
/// `Δω ∈ [0.5, 6]` step 0.05, `α_IN ∈ [0.25, 10]` step 0.125.
pub fn fig10_region() -> RegionConfig {
    RegionConfig {
        g: G,
        kappa: KAPPA,
        gamma: GAMMA,
        kind: RegionKind::TuneBetween { asym: AsymOffset::Auto },
        detuning: Axis::linear(0.5, 6.0, 0.05),
        alpha: Axis::linear(0.25, 10.0, 0.125),
        threshold: 0.99,
        p_min: 0.49,
        settings: EvalSettings::default().with_x_c(1.3),
        light_holes: vec![Some(10.0), Some(20.0)],
        offset_points: 21,
    }
}

fn fig9(threads: Option<usize>) -> AppResult<Table> {
    let mut rows = Vec::new();
    for (panel, region) in [("a", fig9a_region(60)), ("b", fig9b_region(60))] {
        let scan = parallel_region_scan(&region, threads)?;
        for mut r in region_rows(&region, &scan) {
            r.insert(0, ("panel".into(), panel.into()));
            rows.push(r);
        }
    }
    Ok(Table::new(rows))
}

fn fig10(threads: Option<usize>) -> AppResult<Table> {
    let region = fig10_region();
    let scan = parallel_region_scan(&region, threads)?;
    let mut rows = region_rows(&region, &scan);
    for (row, p) in rows.iter_mut().zip(&scan.points) {
        let inside: Vec<bool> = (0..region.light_holes.len()).map(|k| p.inside(k, 0.98, region.p_min)).collect();
        for (k, &hl) in region.light_holes.iter().enumerate() {
            put(row, format!("inside98_{}", hl_label(hl)), inside[k]);
        }
        put(row, "intersection98", inside.iter().all(|&b| b));
    }
    Ok(Table::new(rows))
}

/// One transition: `Δω = 2` meV, `τ_P = 100` ps, `α_IN = 4`, `ρ_gg(0) = 1`.
fn fig11() -> AppResult<Table> {
    let drive = ObeDrive::new(G, KAPPA, GAMMA, 2.0);
    let pulse = PulseSpec::new(4.0, 100.0);
    let tr = integrate_obe1_sampled(&drive, &pulse, 1.0, MIN_TRACE_SAMPLES)?;
    let rows = (0..tr.t_ps.len())
        .step_by(4)
        .map(|i| {
            let mut row = Row::new();
            put(&mut row, "g_meV", G);
            put(&mut row, "kappa_meV", KAPPA);
            put(&mut row, "gamma_meV", GAMMA);
            put(&mut row, "detuning_meV", drive.detuning);
            put(&mut row, "alpha_in", pulse.alpha_in);
            put(&mut row, "tau_p_ps", pulse.tau_p);
            put(&mut row, "t_ps", tr.t_ps[i]);
            put(&mut row, "phase", tr.phase[i]);
            put(&mut row, "rho_ee", tr.rho_ee[i]);
            put(&mut row, "rho_eg_re", tr.rho_eg[i].re);
            put(&mut row, "rho_eg_im", tr.rho_eg[i].im);
            put(&mut row, "rho_eg_abs", tr.rho_eg[i].norm());
            put(&mut row, "cavity_abs", tr.alpha[i].norm());
            put(&mut row, "mean_phase", tr.mean_phase.phase);
            put(&mut row, "dispersive_phase", drive.dispersive_phase());
            row
        })
        .collect();
    Ok(Table::new(rows))
}

/// `Δω ∈ {1, 2, 4, 6, 8, 10}` meV, `α_IN ∈ {3, 6, 9, 12, 15}`,
/// `τ_P ∈ {100 ps, 1 ns}`, `x_c = 0.3`, redshift and tune-between; the
/// `optimal` rows use the amplitude maximizing the dispersive fidelity.
fn fig12() -> AppResult<Table> {
    let base = SubsystemParams::new(G, KAPPA, GAMMA, OMEGA);
    let x_c = 0.3;
    let mut jobs = Vec::new();
    for tb in [false, true] {
        for dw in [1.0, 2.0, 4.0, 6.0, 8.0, 10.0] {
            for tau in [100.0, 1000.0] {
                for alpha in [3.0, 6.0, 9.0, 12.0, 15.0] {
                    jobs.push((tb, dw, tau, Some(alpha)));
                }
                jobs.push((tb, dw, tau, None));
            }
        }
    }
    let rows = collect(
        jobs.par_iter()
            .map(|&(tb, dw, tau, fixed)| {
                let alpha = match fixed {
                    Some(a) => a,
                    None => analytic_optimal_alpha(&base, OMEGA, dw, tau, x_c, tb, Axis::linear(0.25, 30.0, 0.25))?.0,
                };
                let p = semiclassical_point(&base, OMEGA, dw, alpha, tau, x_c, tb)?;
                let mode = match (tb, fixed.is_none()) {
                    (false, false) => "redshift",
                    (true, false) => "tune-between",
                    (false, true) => "redshift-optimal",
                    (true, true) => "tune-between-optimal",
                };
                Ok(semiclassical_row(&p, &base, OMEGA, x_c, mode))
            })
            .collect(),
    )?;
    Ok(Table::new(rows))
}

/// `arg γ¹₁₀` for `Δω_A ∈ {8, 6, 4}` meV against `arg γ⁰₁₀` with `Δω_B = 10`
/// meV, `B = 0`, cavity A detuned by `δω ∈ [−0.2, 0.2]` meV (step 5·10⁻⁴).
/// Rows with `series = root` list the crossings.
fn fig13() -> AppResult<Table> {
    let dws = [8.0, 6.0, 4.0];
    let dcavs = Axis::linear(-0.2, 0.2, 5e-4).values();
    let mut rows = Vec::new();
    for &dwa in &dws {
        for &dc in &dcavs {
            let (g1, g0) = arg_pair(dwa, 10.0, dc);
            rows.push(fig13_row("curve", dwa, dc, g1, g0));
        }
        for root in arg_crossings(dwa, 10.0, -0.2, 0.2) {
            let (g1, g0) = arg_pair(dwa, 10.0, root);
            rows.push(fig13_row("root", dwa, root, g1, g0));
        }
    }
    Ok(Table::new(rows))
}

fn fig13_row(series: &str, dwa: f64, dc: f64, g1: f64, g0: f64) -> Row {
    let mut row = Row::new();
    put(&mut row, "series", series);
    put(&mut row, "g_meV", G);
    put(&mut row, "kappa_meV", KAPPA);
    put(&mut row, "detuning_a_meV", dwa);
    put(&mut row, "detuning_b_meV", 10.0);
    put(&mut row, "cavity_detuning_a_meV", dc);
    put(&mut row, "arg_gamma1_10", g1);
    put(&mut row, "arg_gamma0_10", g0);
    put(&mut row, "difference", wrap(g1 - g0));
    row
}

fn wrap(x: f64) -> f64 {
    let t = std::f64::consts::TAU;
    x - t * ((x + std::f64::consts::PI) / t).floor()
}

/// `(arg γ¹₁₀, arg γ⁰₁₀)` with cavity A detuned by `dcav`.
pub fn arg_pair(dwa: f64, dwb: f64, dcav: f64) -> (f64, f64) {
    let sa = G * G / dwa;
    let sb = G * G / dwb;
    let gs = GammaSet::from_shifts([KAPPA; 2], [sa; 2], [sb; 2], [dcav, 0.0], Sidedness::OneSided);
    (gs.get(1, 1, 0).arg(), gs.get(0, 1, 0).arg())
}

/// Cavity detunings where the two phases coincide (bisection on sign changes,
/// ignoring 2π wraps).
pub fn arg_crossings(dwa: f64, dwb: f64, lo: f64, hi: f64) -> Vec<f64> {
    let f = |d: f64| {
        let (a, b) = arg_pair(dwa, dwb, d);
        wrap(a - b)
    };
    let xs = Axis::linear(lo, hi, 1e-4).values();
    let mut out = Vec::new();
    for w in xs.windows(2) {
        let (fa, fb) = (f(w[0]), f(w[1]));
        if fa == 0.0 {
            out.push(w[0]);
            continue;
        }
        if fa * fb < 0.0 && (fa - fb).abs() < 1.0 {
            let (mut a, mut b, mut va) = (w[0], w[1], fa);
            for _ in 0..80 {
                let m = 0.5 * (a + b);
                let vm = f(m);
                if vm * va <= 0.0 {
                    b = m;
                } else {
                    a = m;
                    va = vm;
                }
            }
            out.push(0.5 * (a + b));
        }
    }
    out
}
