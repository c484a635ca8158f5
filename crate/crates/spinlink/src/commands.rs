//! One function per subcommand; each returns the table to write.

use log::{debug, info, warn};
use rayon::prelude::*;
use spinlink_core::cavity::PulseSpec;
use spinlink_core::estimates::{n_scatt_estimate, regime_check, snr_estimate, EstimateInput};
use spinlink_core::fidelity::{evaluate, FidelityReport, Scenario};
use spinlink_core::optimizer::{
    cavity_detune_candidates, optimize_strategy, region_point, search, two_sided_curve, AsymOffset, Axis,
    OptimumRecord, RegionConfig, RegionKind, RegionScan, Strategy,
};
use spinlink_core::semiclassical::{semiclassical_fidelity, ObeDrive};
use spinlink_core::{Error as ModelError, Sidedness, SubsystemParams};

use crate::config::{mean_detuning, OptimizeKind, RunConfig};
use crate::error::{AppError, AppResult};
use crate::output::{echo_scenario, missing_report_columns, put, report_columns, Row, Table};

/// Runs `f` inside a pool of the configured size.
pub fn with_threads<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> AppResult<T> {
    match threads {
        None | Some(0) => Ok(f()),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| AppError::usage(format!("thread pool: {e}")))?;
            Ok(pool.install(f))
        }
    }
}

pub fn estimate(cfg: &RunConfig) -> AppResult<Table> {
    let e = EstimateInput {
        g: cfg.a.g,
        kappa: cfg.a.kappa,
        gamma: cfg.a.gamma,
        delta_omega: mean_detuning(&cfg.a, cfg.omega_l).abs(),
        alpha_in: cfg.pulse.alpha_in,
    };
    e.validate()?;
    let reg = regime_check(&e);
    let mut row = echo_scenario(&cfg.scenario());
    put(&mut row, "snr", snr_estimate(&e));
    put(&mut row, "n_scatt", n_scatt_estimate(&e));
    put(&mut row, "ratio", reg.ratio);
    put(&mut row, "ok", reg.ok);
    Ok(Table::new(vec![row]))
}

pub fn fidelity(cfg: &RunConfig) -> AppResult<Table> {
    let s = cfg.scenario();
    let r = evaluate(&s)?;
    let mut row = echo_scenario(&s);
    report_columns(&mut row, &r, s.pulse.alpha_in);
    Ok(Table::new(vec![row]))
}

/// Whether a per-point failure aborts a sweep or is recorded in its row.
fn fatal(e: &ModelError) -> bool {
    matches!(e, ModelError::InvalidParameter { .. })
}

pub fn sweep(cfg: &RunConfig) -> AppResult<Table> {
    let Some(x) = cfg.sweep.first() else {
        return Err(AppError::config("sweep.x", "missing; name the config key to sweep"));
    };
    let y = cfg.sweep.get(1);
    let ys: Vec<Option<f64>> = match y {
        Some(ax) => ax.values.iter().copied().map(Some).collect(),
        None => vec![None],
    };
    let grid: Vec<(f64, Option<f64>)> = x.values.iter().flat_map(|&xv| ys.iter().map(move |&yv| (xv, yv))).collect();
    info!("sweep over {} points", grid.len());
    let rows: Vec<AppResult<Row>> = with_threads(cfg.threads, || {
        grid.par_iter()
            .map(|&(xv, yv)| {
                let mut point = cfg.with_value(&x.key, xv)?;
                if let (Some(ax), Some(v)) = (y, yv) {
                    point = point.with_value(&ax.key, v)?;
                }
                let s = point.scenario();
                let mut row = Row::new();
                put(&mut row, "param1", x.key.as_str());
                put(&mut row, "param1_value", xv);
                put(&mut row, "param2", y.map_or("", |a| a.key.as_str()));
                put(&mut row, "param2_value", yv);
                row.extend(echo_scenario(&s));
                match evaluate(&s) {
                    Ok(r) => {
                        report_columns(&mut row, &r, s.pulse.alpha_in);
                        put(&mut row, "status", "ok");
                    }
                    Err(e) if fatal(&e) => return Err(e.into()),
                    Err(e) => {
                        debug!("sweep point ({xv}, {yv:?}): {e}");
                        missing_report_columns(&mut row);
                        put(&mut row, "status", e.kind());
                    }
                }
                Ok(row)
            })
            .collect()
    })?;
    Ok(Table::new(rows.into_iter().collect::<AppResult<Vec<_>>>()?))
}

fn axis_columns(row: &mut Row, name: &str, a: &Axis) {
    put(row, format!("{name}_lo"), a.lo);
    put(row, format!("{name}_hi"), a.hi);
    put(row, format!("{name}_points"), a.points);
    put(row, format!("{name}_log"), a.log);
}

fn strategy_name(k: &OptimizeKind) -> String {
    match k {
        OptimizeKind::Identical => "identical".into(),
        OptimizeKind::Strategy(Strategy::Redshift { max_detuning }) => format!("redshift(max={max_detuning})"),
        OptimizeKind::Strategy(Strategy::TuneBetween { asym: AsymOffset::Auto }) => "tune-between(auto)".into(),
        OptimizeKind::Strategy(Strategy::TuneBetween { asym: AsymOffset::Fixed(v) }) => format!("tune-between({v})"),
        OptimizeKind::Strategy(Strategy::CavityDetune { max_detuning, lo, hi }) => {
            format!("cavity-detune(max={max_detuning};{lo}..{hi})")
        }
    }
}

/// Identical dots: copies of subsystem A sharing a common redshift.
pub fn optimize_identical_full(cfg: &RunConfig) -> AppResult<(OptimumRecord, Scenario)> {
    let (omega, base, settings) = (cfg.omega_l, cfg.a, cfg.settings());
    let build = |alpha: f64, dw: f64| {
        let p = SubsystemParams { nu: omega + dw, ..base };
        let mut s = Scenario::new(p, p, omega, PulseSpec::new(alpha, settings.tau_p).with_t_prop(settings.t_prop), settings.x_c);
        s.area = settings.area;
        s
    };
    let score = |s: &Scenario| evaluate(s).ok().filter(|r| r.p_succ >= settings.p_floor && r.fidelity.is_finite());
    let res = search(&[cfg.alpha_axis, cfg.detuning_axis], |x| score(&build(x[0], x[1])))?;
    let s = build(res.x[0], res.x[1]);
    let rec = OptimumRecord {
        alpha_in: res.x[0],
        omega_l: omega,
        detunings: [mean_detuning(&s.a, omega); 2],
        asym_offset: None,
        cavity_detuning: None,
        report: res.report,
        grid_fidelity: res.grid_fidelity,
        evaluations: res.evaluations,
        at_boundary: res.at_boundary,
    };
    Ok((rec, s))
}

/// Scenario reproducing a strategy optimum.
pub fn optimum_scenario(cfg: &RunConfig, rec: &OptimumRecord) -> Scenario {
    let (mut a, mut b) = (cfg.a, cfg.b);
    if let Some(d) = rec.cavity_detuning {
        if rec.detunings[0].abs() <= rec.detunings[1].abs() {
            a.cavity_detuning = d;
        } else {
            b.cavity_detuning = d;
        }
    }
    let pulse = PulseSpec::new(rec.alpha_in, cfg.pulse.tau_p).with_t_prop(cfg.pulse.t_prop);
    let mut s = Scenario::new(a, b, rec.omega_l, pulse, cfg.x_c);
    s.area = cfg.area;
    s
}

fn optimum_row(cfg: &RunConfig, candidate: &str, rec: &OptimumRecord, s: &Scenario) -> Row {
    let mut row = Row::new();
    put(&mut row, "strategy", strategy_name(&cfg.optimize));
    put(&mut row, "candidate", candidate);
    axis_columns(&mut row, "alpha", &cfg.alpha_axis);
    axis_columns(&mut row, "detuning", &cfg.detuning_axis);
    put(&mut row, "p_floor", cfg.p_floor);
    row.extend(echo_scenario(s));
    put(&mut row, "asym_offset_meV", rec.asym_offset);
    put(&mut row, "cavity_detuning_meV", rec.cavity_detuning);
    report_columns(&mut row, &rec.report, rec.alpha_in);
    put(&mut row, "grid_F", rec.grid_fidelity);
    put(&mut row, "evaluations", rec.evaluations);
    put(&mut row, "at_boundary", rec.at_boundary);
    row
}

pub fn optimize(cfg: &RunConfig) -> AppResult<Table> {
    match cfg.optimize {
        OptimizeKind::Identical => {
            if cfg.a != cfg.b {
                warn!("identical optimization uses subsystem A for both dots");
            }
            let (rec, s) = optimize_identical_full(cfg)?;
            Ok(Table::new(vec![optimum_row(cfg, "best", &rec, &s)]))
        }
        OptimizeKind::Strategy(st @ Strategy::CavityDetune { .. }) => {
            let sc = cfg.strategy_config(st);
            let cands = cavity_detune_candidates(&cfg.a, &cfg.b, &sc)?;
            let rows: Vec<Row> = cands
                .iter()
                .zip(["negative", "positive"])
                .filter_map(|(c, name)| c.as_ref().map(|r| optimum_row(cfg, name, r, &optimum_scenario(cfg, r))))
                .collect();
            if rows.is_empty() {
                return Err(ModelError::Infeasible { reason: "no cavity detuning reaches the acceptance floor" }.into());
            }
            Ok(Table::new(rows))
        }
        OptimizeKind::Strategy(st) => {
            let rec = optimize_strategy(&cfg.a, &cfg.b, &cfg.strategy_config(st))?;
            Ok(Table::new(vec![optimum_row(cfg, "best", &rec, &optimum_scenario(cfg, &rec))]))
        }
    }
}

/// Region scan with the grid points evaluated in parallel.
pub fn parallel_region_scan(region: &RegionConfig, threads: Option<usize>) -> AppResult<RegionScan> {
    region.detuning.validate("scan.detuning")?;
    region.alpha.validate("scan.alpha")?;
    let grid: Vec<(f64, f64)> = region
        .detuning
        .values()
        .into_iter()
        .flat_map(|d| region.alpha.values().into_iter().map(move |a| (d, a)))
        .collect();
    let points = with_threads(threads, || grid.par_iter().map(|&(d, a)| region_point(region, d, a)).collect())?;
    Ok(RegionScan::assemble(region, points))
}

pub fn hl_label(hl: Option<f64>) -> String {
    match hl {
        Some(v) => format!("hl{v}"),
        None => "nolh".into(),
    }
}

pub fn region_rows(region: &RegionConfig, scan: &RegionScan) -> Vec<Row> {
    let kind = match region.kind {
        RegionKind::Redshift => "redshift".to_string(),
        RegionKind::TuneBetween { asym: AsymOffset::Auto } => "tune-between(auto)".to_string(),
        RegionKind::TuneBetween { asym: AsymOffset::Fixed(v) } => format!("tune-between({v})"),
    };
    let configs = region.light_holes.iter().map(|&h| hl_label(h)).collect::<Vec<_>>().join(";");
    scan.points
        .iter()
        .enumerate()
        .map(|(i, p)| {
            let mut row = Row::new();
            put(&mut row, "kind", kind.as_str());
            put(&mut row, "g_meV", region.g);
            put(&mut row, "kappa_meV", region.kappa);
            put(&mut row, "gamma_meV", region.gamma);
            put(&mut row, "tau_p_ps", region.settings.tau_p);
            put(&mut row, "x_c", region.settings.x_c);
            put(&mut row, "threshold", region.threshold);
            put(&mut row, "p_min", region.p_min);
            put(&mut row, "configs", configs.as_str());
            put(&mut row, "detuning_meV", p.detuning);
            put(&mut row, "alpha_in", p.alpha_in);
            put(&mut row, "offset_meV", p.offset);
            for (k, &hl) in region.light_holes.iter().enumerate() {
                let l = hl_label(hl);
                put(&mut row, format!("F_{l}"), p.fidelity[k]);
                put(&mut row, format!("P_{l}"), p.p_succ[k]);
                put(&mut row, format!("inside_{l}"), scan.masks[k][i]);
            }
            put(&mut row, "intersection", scan.intersection[i]);
            row
        })
        .collect()
}

pub fn scan(cfg: &RunConfig) -> AppResult<Table> {
    let s = parallel_region_scan(&cfg.region, cfg.threads)?;
    info!("scan: {} of {} points inside every mask", s.intersection_count(), s.points.len());
    Ok(Table::new(region_rows(&cfg.region, &s)))
}

/// One point of the semiclassical comparison.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SemiclassicalPoint {
    pub detuning: f64,
    pub alpha_in: f64,
    pub tau_p: f64,
    /// Mean simulated phase over the dispersive phase, transition `A, q = 0`.
    pub phase_ratio: f64,
    /// Coherence retained by transition `A, q = 0` in the simulation.
    pub damping_semi: f64,
    /// Same from the dispersive scattering rate.
    pub damping_analytic: f64,
    pub f_semi: f64,
    pub p_semi: f64,
    pub f_analytic: f64,
    pub p_analytic: f64,
}

/// Dots at `ω_L + Δω` (both, redshift) or `ω_L ± Δω` (tune-between).
pub fn semiclassical_pair(base: &SubsystemParams, omega_l: f64, dw: f64, tune_between: bool) -> (SubsystemParams, SubsystemParams) {
    let a = SubsystemParams { nu: omega_l + dw, ..*base };
    let b = SubsystemParams { nu: omega_l + if tune_between { -dw } else { dw }, ..*base };
    (a, b)
}

pub fn semiclassical_point(
    base: &SubsystemParams,
    omega_l: f64,
    dw: f64,
    alpha_in: f64,
    tau_p: f64,
    x_c: f64,
    tune_between: bool,
) -> AppResult<SemiclassicalPoint> {
    let (a, b) = semiclassical_pair(base, omega_l, dw, tune_between);
    let pulse = PulseSpec::new(alpha_in, tau_p);
    let semi = semiclassical_fidelity(&a, &b, omega_l, &pulse, x_c)?;
    let analytic = evaluate(&Scenario::new(a, b, omega_l, pulse, x_c))?;
    let drive = ObeDrive::for_transition(&a, omega_l, 0)?;
    Ok(SemiclassicalPoint {
        detuning: dw,
        alpha_in,
        tau_p,
        phase_ratio: semi.phases[0][0] / drive.dispersive_phase(),
        damping_semi: semi.damping[0][0],
        damping_analytic: drive.dispersive_damping(alpha_in),
        f_semi: semi.report.fidelity,
        p_semi: semi.report.p_succ,
        f_analytic: analytic.fidelity,
        p_analytic: analytic.p_succ,
    })
}

/// Amplitude maximizing the analytic fidelity for the semiclassical pair.
pub fn analytic_optimal_alpha(
    base: &SubsystemParams,
    omega_l: f64,
    dw: f64,
    tau_p: f64,
    x_c: f64,
    tune_between: bool,
    alpha: Axis,
) -> AppResult<(f64, FidelityReport)> {
    let (a, b) = semiclassical_pair(base, omega_l, dw, tune_between);
    let res = search(&[alpha], |x| evaluate(&Scenario::new(a, b, omega_l, PulseSpec::new(x[0], tau_p), x_c)).ok())?;
    Ok((res.x[0], res.report))
}

pub fn semiclassical_row(p: &SemiclassicalPoint, base: &SubsystemParams, omega_l: f64, x_c: f64, mode: &str) -> Row {
    let mut row = Row::new();
    put(&mut row, "mode", mode);
    put(&mut row, "g_meV", base.g);
    put(&mut row, "kappa_meV", base.kappa);
    put(&mut row, "gamma_meV", base.gamma);
    put(&mut row, "B_ext_T", base.b_ext);
    put(&mut row, "omega_L_meV", omega_l);
    put(&mut row, "x_c", x_c);
    put(&mut row, "detuning_meV", p.detuning);
    put(&mut row, "alpha_in", p.alpha_in);
    put(&mut row, "tau_p_ps", p.tau_p);
    put(&mut row, "phase_ratio", p.phase_ratio);
    put(&mut row, "damping_semi", p.damping_semi);
    put(&mut row, "damping_analytic", p.damping_analytic);
    put(&mut row, "F_semi", p.f_semi);
    put(&mut row, "P_semi", p.p_semi);
    put(&mut row, "F_analytic", p.f_analytic);
    put(&mut row, "P_analytic", p.p_analytic);
    row
}

pub fn semiclassical(cfg: &RunConfig) -> AppResult<Table> {
    let sp = &cfg.semiclassical;
    if cfg.a.sidedness != Sidedness::OneSided || cfg.a.delta_omega_hl.is_some() || cfg.a.cavity_detuning != 0.0 {
        return Err(AppError::usage(
            "semiclassical runs need a one-sided, resonant cavity without light holes (subsystem A is used for both dots)",
        ));
    }
    let mut grid = Vec::new();
    for &dw in &sp.detunings {
        for &al in &sp.alphas {
            for &tau in &sp.taus {
                grid.push((dw, al, tau));
            }
        }
    }
    let mode = if sp.tune_between { "tune-between" } else { "redshift" };
    let rows: Vec<AppResult<Row>> = with_threads(cfg.threads, || {
        grid.par_iter()
            .map(|&(dw, al, tau)| {
                let p = semiclassical_point(&cfg.a, cfg.omega_l, dw, al, tau, cfg.x_c, sp.tune_between)?;
                Ok(semiclassical_row(&p, &cfg.a, cfg.omega_l, cfg.x_c, mode))
            })
            .collect()
    })?;
    Ok(Table::new(rows.into_iter().collect::<AppResult<Vec<_>>>()?))
}

pub fn two_sided(cfg: &RunConfig) -> AppResult<Table> {
    let (g, kappa, gamma) = (cfg.a.g, cfg.a.kappa, cfg.a.gamma);
    let dw = cfg.two_sided_detuning;
    let curve: Vec<AppResult<_>> = with_threads(cfg.threads, || {
        cfg.two_sided_taus
            .par_iter()
            .map(|&tau| {
                two_sided_curve(g, kappa, gamma, dw, &[tau], cfg.pulse.t_prop, cfg.alpha_axis, cfg.x_c)
                    .map(|mut v| v.remove(0))
                    .map_err(AppError::from)
            })
            .collect()
    })?;
    let mut rows = Vec::new();
    for pt in curve {
        let pt = pt?;
        let p = SubsystemParams::detuned(g, kappa, gamma, pt.optimum.omega_l, dw).with_sidedness(Sidedness::TwoSided);
        let pulse = PulseSpec::new(pt.optimum.alpha_in, pt.tau_p).with_t_prop(cfg.pulse.t_prop);
        let s = Scenario::new(p, p, pt.optimum.omega_l, pulse, cfg.x_c);
        let mut row = Row::new();
        axis_columns(&mut row, "alpha", &cfg.alpha_axis);
        row.extend(echo_scenario(&s));
        put(&mut row, "I_ol", pt.i_ol);
        report_columns(&mut row, &pt.optimum.report, pt.optimum.alpha_in);
        put(&mut row, "at_boundary", pt.optimum.at_boundary);
        rows.push(row);
    }
    Ok(Table::new(rows))
}
