//! Acceptance suite: one PASS/FAIL line per criterion, with the raw numbers.
//!
//! Runs as a plain binary (`harness = false`) so the report stays readable and
//! every criterion is evaluated even after an earlier one fails.

use std::process::Command;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use spinlink::commands::{analytic_optimal_alpha, parallel_region_scan, semiclassical_point};
use spinlink::recipes::{fig10_region, fig9a_region, fig9b_region};
use spinlink_core::cavity::{
    cavity_response, overlap_integral, transient_cavity_field, CavityDrive, CavityTrace, PulseSpec,
    DEFAULT_TRACE_SAMPLES,
};
use spinlink_core::fidelity::{evaluate, fidelity, BellTarget, DecayFactors, Distinguishabilities, Scenario};
use spinlink_core::math::erf;
use spinlink_core::optimizer::{
    cavity_detune_candidates, max_fidelity_vs_coupling, optimize_identical, optimize_strategy, two_sided_curve, Axis,
    AsymOffset, EvalSettings, IdenticalRanges, RegionConfig, Strategy, StrategyConfig,
};
use spinlink_core::{Sidedness, SubsystemParams};

const G: f64 = 0.15;
const KAPPA: f64 = 0.05;
const GAMMA: f64 = 0.002;
const OMEGA: f64 = 1300.0;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn within(elapsed: Duration, limit_s: f64) -> bool {
    elapsed.as_secs_f64() < limit_s
}

fn c1_high_fidelity_point() -> Outcome {
    let t = Instant::now();
    let ranges = IdenticalRanges { alpha: Axis::linear(0.25, 30.0, 0.25), detuning: Axis::linear(2.0, 10.0, 0.25) };
    let r = optimize_identical(G, KAPPA, GAMMA, &ranges, &EvalSettings::default().with_x_c(0.3)).unwrap();
    let el = t.elapsed();
    let (f, p) = (r.report.fidelity, r.report.p_succ);
    outcome(
        f >= 0.99 && p >= 0.25 && within(el, 10.0),
        format!("F={f:.6} (>=0.99) P_succ={p:.6} (>=0.25) alpha={:.4} dw={:.4} in {el:.2?} (<10s)", r.alpha_in, r.detunings[0]),
    )
}

fn c2_coupling_border() -> Outcome {
    let t = Instant::now();
    let s = EvalSettings::default();
    let ratios = Axis::log(0.1, 1000.0, 41).values();
    let curve: Vec<f64> = ratios
        .par_iter()
        .map(|&r| max_fidelity_vs_coupling(&[r], &s).unwrap()[0].optimum.report.fidelity)
        .collect();
    let border = max_fidelity_vs_coupling(&[0.5], &s).unwrap()[0].optimum.report.fidelity;
    let el = t.elapsed();
    let worst_drop = curve.windows(2).map(|w| w[0] - w[1]).fold(f64::NEG_INFINITY, f64::max);
    let monotone = worst_drop <= 0.0;
    outcome(
        (border - 0.70).abs() <= 0.05 && monotone && within(el, 60.0),
        format!(
            "F(g^2/kG=0.5)={border:.4} (0.70+-0.05) monotone={monotone} (largest step down {worst_drop:.2e}) F(0.1)={:.4} F(1000)={:.4} in {el:.2?} (<60s)",
            curve[0],
            curve[curve.len() - 1]
        ),
    )
}

/// `(2/π)^{1/4} e^{−(x−d)²}`, the homodyne peak of a coherent state displaced by `d`.
fn peak(x: f64, d: f64) -> f64 {
    (2.0 / std::f64::consts::PI).powf(0.25) * (-(x - d) * (x - d)).exp()
}

fn simpson(f: impl Fn(f64) -> f64, lo: f64, hi: f64, n: usize) -> f64 {
    let n = n + n % 2;
    let h = (hi - lo) / n as f64;
    let mut s = f(lo) + f(hi);
    for i in 1..n {
        s += f(lo + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    s * h / 3.0
}

/// Fidelity and acceptance from the projected density matrix, integrated
/// over the window: diagonal populations 1/4, retained coherence `−c/4`.
fn brute_force(d: &Distinguishabilities, c: f64, x_c: f64) -> (f64, f64) {
    let n = 40_000;
    let p = simpson(
        |x| 0.25 * [d.d11, d.d00, d.d10, d.d01].iter().map(|&v| peak(x, v).powi(2)).sum::<f64>(),
        -x_c,
        x_c,
        n,
    );
    // The pair left inside the window by the target Bell state.
    let (a, b) = d.retained();
    let num = simpson(
        |x| 0.5 * (0.25 * peak(x, a).powi(2) + 0.25 * peak(x, b).powi(2) + 2.0 * 0.25 * c * peak(x, a) * peak(x, b)),
        -x_c,
        x_c,
        n,
    );
    (num / p, p)
}

fn c3_closed_form_vs_quadrature() -> Outcome {
    let t = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0003);
    let mut worst_f: f64 = 0.0;
    let mut worst_p: f64 = 0.0;
    let mut used = 0;
    while used < 100 {
        let g = rng.gen_range(0.02..0.3);
        let kappa = rng.gen_range(0.02..0.2);
        let gamma = rng.gen_range(0.0005..0.005);
        let dw = rng.gen_range(1.0..12.0);
        let b_ext = rng.gen_range(0.0..2.0);
        let alpha = rng.gen_range(0.5..30.0);
        let x_c = rng.gen_range(0.05..3.0);
        let a = SubsystemParams::detuned(g, kappa, gamma, OMEGA, dw).with_fields(b_ext, 0.0);
        let b = SubsystemParams::detuned(rng.gen_range(0.02..0.3), kappa, gamma, OMEGA, rng.gen_range(1.0..12.0))
            .with_fields(b_ext, 0.0);
        let Ok(r) = evaluate(&Scenario::new(a, b, OMEGA, PulseSpec::new(alpha, 1000.0), x_c)) else { continue };
        if r.p_succ < 1e-6 {
            continue;
        }
        let (f, p) = brute_force(&r.d, r.decay.coherence_factor(), x_c);
        worst_f = worst_f.max((f - r.fidelity).abs());
        worst_p = worst_p.max((p - r.p_succ).abs());
        used += 1;
    }
    let el = t.elapsed();
    outcome(
        worst_f <= 1e-8 && worst_p <= 1e-8 && within(el, 30.0),
        format!("100 draws: max|dF|={worst_f:.2e} max|dP|={worst_p:.2e} (<=1e-8) in {el:.2?} (<30s)"),
    )
}

fn c4_zero_signal_window() -> Outcome {
    let zero = Distinguishabilities { d11: 0.0, d00: 0.0, d10: 0.0, d01: 0.0, target: BellTarget::Singlet };
    let none = DecayFactors { rayleigh_exponent: 0.0, rates: [[0.0; 2]; 2], pulse_areas: [0.0; 2], two_sided_overlap: 1.0 };
    let mut worst: f64 = 0.0;
    let mut parts = Vec::new();
    for x_c in [0.1, 0.3, 1.0, 3.0] {
        let r = fidelity(&zero, &none, x_c).unwrap();
        let expect = erf(std::f64::consts::SQRT_2 * x_c) / 2.0;
        worst = worst.max((r.p_succ - expect).abs());
        parts.push(format!("x_c={x_c}: P={:.6} vs {expect:.6}", r.p_succ));
    }
    outcome(worst <= 1e-12, format!("{} max dev {worst:.2e} (<=1e-12)", parts.join(", ")))
}

fn c5_two_sided_limits() -> Outcome {
    let t = Instant::now();
    let pulse = PulseSpec::new(8.0, 1000.0).with_t_prop(100.0);
    let matched = SubsystemParams::detuned(G, KAPPA, GAMMA, OMEGA, 5.0).with_sidedness(Sidedness::TwoSided);
    let same = evaluate(&Scenario::new(matched, matched, OMEGA, pulse, 0.7)).unwrap().decay.two_sided_overlap;
    let fielded = matched.with_fields(1.0, 0.0);
    let split = evaluate(&Scenario::new(fielded, fielded, OMEGA, pulse, 0.7)).unwrap().decay.two_sided_overlap;
    let other = SubsystemParams::detuned(0.14, KAPPA, GAMMA, OMEGA, 6.0).with_sidedness(Sidedness::TwoSided);
    let mismatched = evaluate(&Scenario::new(matched, other, OMEGA, pulse, 0.7)).unwrap().decay.two_sided_overlap;
    let exact_one = same == 1.0 && split < 1.0 && mismatched < 1.0;

    // Pulses far shorter than the round trip, at the top of the default
    // amplitude range: the reflected light reveals the spins.
    let short = PulseSpec::new(30.0, 1.0).with_t_prop(100.0);
    let f_short = evaluate(&Scenario::new(fielded, fielded, OMEGA, short, 0.7)).unwrap().fidelity;

    let taus = Axis::log(10.0, 1e5, 25).values();
    let mut monotone = true;
    let mut ends = Vec::new();
    for dw in [2.0, 10.0] {
        let curve: Vec<f64> = taus
            .par_iter()
            .map(|&tau| {
                two_sided_curve(G, KAPPA, GAMMA, dw, &[tau], 100.0, Axis::linear(0.25, 30.0, 0.25), 0.7).unwrap()[0]
                    .optimum
                    .report
                    .fidelity
            })
            .collect();
        monotone &= curve.windows(2).all(|w| w[1] >= w[0]);
        ends.push(format!("dw={dw}: F({})={:.4}..F({})={:.4}", taus[0], curve[0], taus[taus.len() - 1], curve[curve.len() - 1]));
    }
    let el = t.elapsed();
    let i_ol = overlap_integral(&pulse);
    outcome(
        exact_one && (f_short - 0.5).abs() <= 0.02 && monotone && within(el, 60.0),
        format!(
            "overlap matched B=0 {same:.12} (I_ol={i_ol:.6}), B=1T {split:.6}, mismatched {mismatched:.6}; F(tau=1ps)={f_short:.4} (0.5+-0.02); monotone={monotone} [{}] in {el:.2?} (<60s)",
            ends.join("; ")
        ),
    )
}

fn c6_semiclassical() -> Outcome {
    let t = Instant::now();
    let base = SubsystemParams::new(G, KAPPA, GAMMA, OMEGA);
    let dws = [2.0, 4.0, 6.0, 8.0, 10.0];
    let alphas = [3.0, 6.0, 9.0, 12.0, 15.0];
    let taus = [100.0, 1000.0];
    let mut jobs = Vec::new();
    for &d in &dws {
        for &a in &alphas {
            for &t in &taus {
                jobs.push((d, a, t));
            }
        }
    }
    let points: Vec<_> = jobs
        .par_iter()
        .map(|&(dw, alpha, tau)| semiclassical_point(&base, OMEGA, dw, alpha, tau, 0.3, false).unwrap())
        .collect();
    let worst_phase = points
        .iter()
        .max_by(|a, b| (a.phase_ratio - 1.0).abs().total_cmp(&(b.phase_ratio - 1.0).abs()))
        .unwrap();
    let phase_ok = points.iter().all(|p| (p.phase_ratio - 1.0).abs() <= 0.10);

    let opt: Vec<(f64, f64, f64)> = [4.0, 6.0, 8.0, 10.0]
        .iter()
        .flat_map(|&d| taus.iter().map(move |&t| (d, t)))
        .collect::<Vec<_>>()
        .par_iter()
        .map(|&(dw, tau)| {
            let (alpha, _) = analytic_optimal_alpha(&base, OMEGA, dw, tau, 0.3, false, Axis::linear(0.25, 30.0, 0.25)).unwrap();
            let p = semiclassical_point(&base, OMEGA, dw, alpha, tau, 0.3, false).unwrap();
            (dw, tau, (p.f_semi - p.f_analytic).abs())
        })
        .collect();
    let worst_f = opt.iter().map(|o| o.2).fold(0.0, f64::max);

    // Decoherence lost to scattering: semiclassical no larger than the dispersive estimate.
    let low: Vec<_> = points.iter().filter(|p| p.detuning <= 2.0).collect();
    let damping_ok = low.iter().all(|p| 1.0 - p.damping_semi <= 1.0 - p.damping_analytic);
    let el = t.elapsed();
    outcome(
        phase_ok && worst_f <= 0.02 && damping_ok && within(el, 600.0),
        format!(
            "phase ratio worst {:.4} at dw={} alpha={} tau={} (within 10%: {phase_ok}); max|F_semi-F_an| at optimal alpha, dw>=4: {worst_f:.4} (<=0.02); damping semi<=analytic at dw<=2: {damping_ok}; in {el:.2?} (<600s)",
            worst_phase.phase_ratio, worst_phase.detuning, worst_phase.alpha_in, worst_phase.tau_p
        ),
    )
}

fn c7_strategies() -> Outcome {
    let b = SubsystemParams::new(G, KAPPA, GAMMA, OMEGA);
    let tb = optimize_strategy(
        &SubsystemParams::new(G, KAPPA, GAMMA, OMEGA + 8.0),
        &b,
        &StrategyConfig::new(Strategy::TuneBetween { asym: AsymOffset::Auto }, 0.3),
    )
    .unwrap();
    let red = optimize_strategy(
        &SubsystemParams::new(G, KAPPA, GAMMA, OMEGA + 1.0),
        &b,
        &StrategyConfig::new(Strategy::Redshift { max_detuning: 10.0 }, 0.3),
    )
    .unwrap();
    let cfg = StrategyConfig::new(Strategy::CavityDetune { max_detuning: 10.0, lo: -2.0, hi: 2.0 }, 0.3);
    let cands = cavity_detune_candidates(
        &SubsystemParams::new(G, KAPPA, GAMMA, OMEGA + 4.0),
        &SubsystemParams::new(G, KAPPA, GAMMA, OMEGA + 10.0),
        &cfg,
    )
    .unwrap();
    let dcav: Vec<Option<f64>> = cands.iter().map(|c| c.and_then(|r| r.cavity_detuning)).collect();
    let opposite = matches!((dcav[0], dcav[1]), (Some(n), Some(p)) if n < 0.0 && p > 0.0);
    let (ft, fr) = (tb.report.fidelity, red.report.fidelity);
    outcome(
        ft >= 0.98 && fr >= 0.98 && opposite,
        format!("tune-between dnu=8: F={ft:.4} (>=0.98); redshift(10) dnu=1: F={fr:.4} (>=0.98); cavity-detune candidates {dcav:?} (opposite signs: {opposite})"),
    )
}

fn region_summary(name: &str, cfg: &RegionConfig, ks: &[usize]) -> (bool, String) {
    let scan = parallel_region_scan(cfg, None).unwrap();
    let inside: Vec<&_> =
        scan.points.iter().filter(|p| ks.iter().all(|&k| p.inside(k, cfg.threshold, cfg.p_min))).collect();
    let min_p = inside.iter().flat_map(|p| ks.iter().map(|&k| p.p_succ[k])).fold(f64::INFINITY, f64::min);
    let ok = !inside.is_empty() && inside.iter().all(|p| ks.iter().all(|&k| p.fidelity[k] > cfg.threshold && p.p_succ[k] > cfg.p_min));
    (ok, format!("{name}: {} points with F>{} and P_succ>{} (min P {min_p:.4})", inside.len(), cfg.threshold, cfg.p_min))
}

fn c8_light_hole_regions() -> Outcome {
    let t = Instant::now();
    let (a, da) = region_summary("redshift hl10 x_c=1", &fig9a_region(60), &[0]);
    let (b, db) = region_summary("tune-between hl10 x_c=0.6", &fig9b_region(60), &[0]);
    let (c, dc) = region_summary("tune-between hl10&hl20 x_c=1.3", &fig10_region(), &[0, 1]);
    let el = t.elapsed();
    outcome(a && b && c && within(el, 300.0), format!("{da}; {db}; {dc}; in {el:.2?} (<300s)"))
}

fn c9_cavity_invariants() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0009);
    let mut worst_norm: f64 = 0.0;
    let mut worst_rel: f64 = 0.0;
    let mut small = 0;
    for _ in 0..1000 {
        let kappa = rng.gen_range(0.005..1.0);
        let g = rng.gen_range(0.0..0.5);
        let dw = rng.gen_range(0.5..20.0) * if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
        let dcav = rng.gen_range(-1.0..1.0);
        let r = cavity_response(kappa, dcav + g * g / dw, Sidedness::OneSided);
        worst_norm = worst_norm.max((r.norm() - 1.0).abs());
        let approx = 4.0 * g * g / (kappa * dw);
        if approx.abs() < 0.4 {
            let exact = cavity_response(kappa, g * g / dw, Sidedness::OneSided).arg();
            if exact != 0.0 {
                worst_rel = worst_rel.max((approx / exact - 1.0).abs());
                small += 1;
            }
        }
    }
    let p = PulseSpec::new(1.0, 1000.0);
    let drive = CavityDrive::new(G, KAPPA, 5.0, 0.0);
    let tr = transient_cavity_field(&p, &drive, DEFAULT_TRACE_SAMPLES).unwrap();
    let st = CavityTrace::steady(&p, &drive, DEFAULT_TRACE_SAMPLES).unwrap();
    let peak = st.field.iter().map(|s| s.norm()).fold(0.0, f64::max);
    let dev = tr.field.iter().zip(&st.field).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max) / peak;
    outcome(
        worst_norm <= 1e-12 && worst_rel <= 0.05 && dev < 0.02,
        format!("max||r|-1|={worst_norm:.2e} (<=1e-12); small-angle worst {:.2}% over {small} draws (<=5%); transient vs steady {:.3}% (<2%)", 100.0 * worst_rel, 100.0 * dev),
    )
}

fn c10_determinism() -> Outcome {
    let exe = env!("CARGO_BIN_EXE_spinlink");
    let run = |recipe: &str| {
        let out = Command::new(exe).args(["fig", recipe]).output().expect("spawn spinlink");
        assert!(out.status.success(), "{recipe}: {}", String::from_utf8_lossy(&out.stderr));
        out.stdout
    };
    let mut parts = Vec::new();
    let mut ok = true;
    for recipe in ["fig1", "fig2", "fig6", "fig9", "fig13"] {
        let (a, b) = (run(recipe), run(recipe));
        let same = a == b && !a.is_empty();
        ok &= same;
        parts.push(format!("{recipe} {} bytes {}", a.len(), if same { "identical" } else { "DIFFER" }));
    }
    outcome(ok, parts.join(", "))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("1 high-fidelity identical optimum", c1_high_fidelity_point),
        ("2 coupling border", c2_coupling_border),
        ("3 closed form vs quadrature", c3_closed_form_vs_quadrature),
        ("4 zero-signal window law", c4_zero_signal_window),
        ("5 two-sided limits", c5_two_sided_limits),
        ("6 semiclassical oracle", c6_semiclassical),
        ("7 nonidentical strategies", c7_strategies),
        ("8 light-hole regions", c8_light_hole_regions),
        ("9 cavity-response invariants", c9_cavity_invariants),
        ("10 recipe determinism", c10_determinism),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for (name, f) in criteria {
        if !filter.is_empty() && !filter.iter().any(|p| name.starts_with(p.as_str())) {
            continue;
        }
        let o = f();
        println!("{} criterion {name}: {}", if o.pass { "PASS" } else { "FAIL" }, o.detail);
        failed += usize::from(!o.pass);
    }
    println!("acceptance: {failed} failed");
    if failed > 0 {
        std::process::exit(1);
    }
}
