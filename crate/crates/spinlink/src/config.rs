//! Flat key-value run configuration.
//!
//! A TOML file is flattened into dotted keys (`[pulse] alpha_in = 8` becomes
//! `pulse.alpha_in`), then `--set key=value` overrides are applied on top.
//! Every key carries its unit in the name suffix (`_meV`, `_ps`, `_T`).
//! Unknown keys are rejected so typos never fall back to defaults silently.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use spinlink_core::cavity::{PulseAreaMode, PulseSpec};
use spinlink_core::fidelity::Scenario;
use spinlink_core::optimizer::{
    AsymOffset, Axis, EvalSettings, IdenticalRanges, RegionConfig, RegionKind, Strategy, StrategyConfig,
    CAVITY_DETUNING_STEP, DEFAULT_MAX_DETUNING, DEFAULT_P_FLOOR, REFERENCE_LASER_MEV,
};
use spinlink_core::units::{detunings, zeeman_frequencies};
use spinlink_core::{Sidedness, SubsystemParams};
use toml::Value;

use crate::error::{AppError, AppResult};

pub type FlatMap = BTreeMap<String, Value>;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KeyKind {
    Num,
    Int,
    Bool,
    Str,
    NumList,
    /// A number or the string `"auto"`.
    NumOrAuto,
}

#[derive(Debug, Clone)]
pub struct KeySpec {
    pub key: String,
    pub kind: KeyKind,
    pub doc: &'static str,
}

const SUBSYSTEM_KEYS: &[(&str, KeyKind, &str)] = &[
    ("g_meV", KeyKind::Num, "dot-cavity coupling g (default 0.15)"),
    ("kappa_meV", KeyKind::Num, "cavity decay rate (default 0.05)"),
    ("gamma_meV", KeyKind::Num, "trion linewidth (default 0.002)"),
    ("detuning_meV", KeyKind::Num, "bare transition minus laser, positive = laser red (default 5)"),
    ("g_e", KeyKind::Num, "electron g-factor (default -0.6)"),
    ("g_h", KeyKind::Num, "hole g-factor (default 1.8)"),
    ("B_ext_T", KeyKind::Num, "external magnetic field (default 0)"),
    ("B_nuc_T", KeyKind::Num, "Overhauser field (default 0)"),
    ("delta_omega_cav_meV", KeyKind::Num, "laser minus cavity frequency (default 0)"),
];

const OTHER_KEYS: &[(&str, KeyKind, &str)] = &[
    ("a.nu_meV", KeyKind::Num, "bare transition of A; overrides a.detuning_meV"),
    ("b.nu_meV", KeyKind::Num, "bare transition of B; overrides b.detuning_meV"),
    ("a.delta_omega_HL_meV", KeyKind::Num, "heavy-light splitting of A"),
    ("b.delta_omega_HL_meV", KeyKind::Num, "heavy-light splitting of B"),
    ("light_holes.delta_omega_HL_meV", KeyKind::Num, "heavy-light splitting for both dots (absent = no light holes)"),
    ("system.sidedness", KeyKind::Str, "one-sided | two-sided"),
    ("laser.omega_L_meV", KeyKind::Num, "laser frequency (default 1300)"),
    ("pulse.alpha_in", KeyKind::Num, "coherent amplitude, alpha_in^2 = photon number (default 8)"),
    ("pulse.tau_p_ps", KeyKind::Num, "pulse length (default 1000)"),
    ("pulse.t0_ps", KeyKind::Num, "pulse center (default 5 tau_p)"),
    ("pulse.t_prop_ps", KeyKind::Num, "propagation delay between cavities (default 0)"),
    ("pulse.area", KeyKind::Str, "steady | transient pulse-area evaluation"),
    ("window.x_c", KeyKind::Num, "homodyne acceptance half-width (default 0.3)"),
    ("strategy.kind", KeyKind::Str, "identical | redshift | tune-between | cavity-detune"),
    ("strategy.max_detuning_meV", KeyKind::Num, "largest allowed redshift (default 10)"),
    ("strategy.asym_offset_meV", KeyKind::NumOrAuto, "tune-between offset or \"auto\" (default auto)"),
    ("strategy.cavity_detuning_lo_meV", KeyKind::Num, "cavity-detune search lower end (default -2)"),
    ("strategy.cavity_detuning_hi_meV", KeyKind::Num, "cavity-detune search upper end (default 2)"),
    ("strategy.offset_step_meV", KeyKind::Num, "offset / cavity detuning grid spacing"),
    ("search.alpha_lo", KeyKind::Num, "amplitude range start (default 0.25)"),
    ("search.alpha_hi", KeyKind::Num, "amplitude range end (default 30)"),
    ("search.alpha_step", KeyKind::Num, "amplitude grid spacing (default 0.25)"),
    ("search.alpha_log_points", KeyKind::Int, "use a log amplitude axis with this many points"),
    ("search.detuning_lo_meV", KeyKind::Num, "detuning range start (default 1)"),
    ("search.detuning_hi_meV", KeyKind::Num, "detuning range end (default 10)"),
    ("search.detuning_step_meV", KeyKind::Num, "detuning grid spacing (default 0.25)"),
    ("search.p_floor", KeyKind::Num, "points with smaller acceptance are infeasible (default 1e-3)"),
    ("sweep.x", KeyKind::Str, "numeric config key swept on the first axis"),
    ("sweep.x_lo", KeyKind::Num, "first axis start"),
    ("sweep.x_hi", KeyKind::Num, "first axis end"),
    ("sweep.x_points", KeyKind::Int, "first axis points"),
    ("sweep.x_log", KeyKind::Bool, "log spacing on the first axis"),
    ("sweep.y", KeyKind::Str, "numeric config key swept on the second axis (optional)"),
    ("sweep.y_lo", KeyKind::Num, "second axis start"),
    ("sweep.y_hi", KeyKind::Num, "second axis end"),
    ("sweep.y_points", KeyKind::Int, "second axis points"),
    ("sweep.y_log", KeyKind::Bool, "log spacing on the second axis"),
    ("scan.kind", KeyKind::Str, "redshift | tune-between"),
    ("scan.asym_offset_meV", KeyKind::NumOrAuto, "tune-between offset or \"auto\" (default auto)"),
    ("scan.offset_points", KeyKind::Int, "grid for the automatic offset (default 21)"),
    ("scan.threshold", KeyKind::Num, "fidelity a point must exceed (default 0.99)"),
    ("scan.p_min", KeyKind::Num, "acceptance a point must exceed (default 0)"),
    ("scan.delta_omega_HL_meV", KeyKind::NumList, "light-hole splittings to compare (default [10])"),
    ("scan.include_no_light_holes", KeyKind::Bool, "also evaluate without light holes (default true)"),
    ("scan.detuning_lo_meV", KeyKind::Num, "scan detuning start (default 1)"),
    ("scan.detuning_hi_meV", KeyKind::Num, "scan detuning end (default 10)"),
    ("scan.detuning_points", KeyKind::Int, "scan detuning points (default 50)"),
    ("scan.alpha_lo", KeyKind::Num, "scan amplitude start (default 0.25)"),
    ("scan.alpha_hi", KeyKind::Num, "scan amplitude end (default 30)"),
    ("scan.alpha_points", KeyKind::Int, "scan amplitude points (default 50)"),
    ("semiclassical.mode", KeyKind::Str, "redshift | tune-between (default redshift)"),
    ("semiclassical.detunings_meV", KeyKind::NumList, "default [2, 4, 6, 8, 10]"),
    ("semiclassical.alphas", KeyKind::NumList, "default [3, 6, 9, 12, 15]"),
    ("semiclassical.taus_ps", KeyKind::NumList, "default [100, 1000]"),
    ("two_sided.taus_ps", KeyKind::NumList, "pulse lengths (default log grid 10 ps .. 100 ns)"),
    ("two_sided.detuning_meV", KeyKind::Num, "common redshift (default: detuning of A)"),
    ("output.format", KeyKind::Str, "csv | json (default csv)"),
    ("output.path", KeyKind::Str, "output file (default stdout)"),
    ("run.threads", KeyKind::Int, "worker threads (default: all cores)"),
];

/// Every accepted key with its type and documentation.
pub fn key_specs() -> Vec<KeySpec> {
    let mut out = Vec::new();
    for prefix in ["system", "a", "b"] {
        for &(k, kind, doc) in SUBSYSTEM_KEYS {
            out.push(KeySpec { key: format!("{prefix}.{k}"), kind, doc });
        }
    }
    out.extend(OTHER_KEYS.iter().map(|&(k, kind, doc)| KeySpec { key: k.to_string(), kind, doc }));
    out
}

pub fn key_kind(key: &str) -> Option<KeyKind> {
    key_specs().into_iter().find(|s| s.key == key).map(|s| s.kind)
}

fn flatten_into(prefix: &str, table: &toml::Table, out: &mut FlatMap) {
    for (k, v) in table {
        let key = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
        match v {
            Value::Table(t) => flatten_into(&key, t, out),
            other => {
                out.insert(key, other.clone());
            }
        }
    }
}

pub fn flatten(table: &toml::Table) -> FlatMap {
    let mut out = FlatMap::new();
    flatten_into("", table, &mut out);
    out
}

pub fn parse_toml(text: &str) -> AppResult<FlatMap> {
    let table: toml::Table = text.parse().map_err(|e: toml::de::Error| AppError::usage(format!("config: {e}")))?;
    Ok(flatten(&table))
}

pub fn load_file(path: &Path) -> AppResult<FlatMap> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| AppError::Io { path: path.display().to_string(), message: e.to_string() })?;
    parse_toml(&text)
}

/// `key=value`; the value is read as a TOML literal and falls back to a bare string.
pub fn parse_override(s: &str) -> AppResult<(String, Value)> {
    let (k, v) = s
        .split_once('=')
        .ok_or_else(|| AppError::usage(format!("override `{s}` is not of the form key=value")))?;
    let (k, v) = (k.trim(), v.trim());
    let value = format!("v = {v}")
        .parse::<toml::Table>()
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| Value::String(v.to_string()));
    Ok((k.to_string(), value))
}

/// Rejects unknown keys and values of the wrong type.
pub fn check_keys(map: &FlatMap) -> AppResult<()> {
    for (k, v) in map {
        let kind = key_kind(k).ok_or_else(|| AppError::config(k, "unknown key"))?;
        let ok = match kind {
            KeyKind::Num => as_f64(v).is_some(),
            KeyKind::Int => v.as_integer().is_some(),
            KeyKind::Bool => v.as_bool().is_some(),
            KeyKind::Str => v.as_str().is_some(),
            KeyKind::NumList => v.as_array().is_some_and(|a| a.iter().all(|x| as_f64(x).is_some())),
            KeyKind::NumOrAuto => as_f64(v).is_some() || v.as_str() == Some("auto"),
        };
        if !ok {
            return Err(AppError::config(k, format!("expected {kind:?}, got {v}")));
        }
    }
    Ok(())
}

fn as_f64(v: &Value) -> Option<f64> {
    match v {
        Value::Float(x) => Some(*x),
        Value::Integer(i) => Some(*i as f64),
        _ => None,
    }
}

struct Reader<'a>(&'a FlatMap);

impl Reader<'_> {
    fn num(&self, key: &str) -> Option<f64> {
        self.0.get(key).and_then(as_f64)
    }

    fn num_or(&self, key: &str, default: f64) -> f64 {
        self.num(key).unwrap_or(default)
    }

    fn int(&self, key: &str) -> AppResult<Option<usize>> {
        match self.0.get(key).and_then(Value::as_integer) {
            Some(i) if i < 0 => Err(AppError::config(key, "must be non-negative")),
            Some(i) => Ok(Some(i as usize)),
            None => Ok(None),
        }
    }

    fn str(&self, key: &str) -> Option<&str> {
        self.0.get(key).and_then(Value::as_str)
    }

    fn flag(&self, key: &str, default: bool) -> bool {
        self.0.get(key).and_then(Value::as_bool).unwrap_or(default)
    }

    fn list(&self, key: &str) -> Option<Vec<f64>> {
        self.0.get(key).and_then(Value::as_array).map(|a| a.iter().filter_map(as_f64).collect())
    }

    fn auto(&self, key: &str) -> AsymOffset {
        self.num(key).map_or(AsymOffset::Auto, AsymOffset::Fixed)
    }

    /// Per-subsystem key, falling back to the shared `system.` value.
    fn sub(&self, x: &str, field: &str, default: f64) -> f64 {
        self.num(&format!("{x}.{field}")).or_else(|| self.num(&format!("system.{field}"))).unwrap_or(default)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum OptimizeKind {
    Identical,
    Strategy(Strategy),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepAxis {
    pub key: String,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SemiclassicalSpec {
    pub tune_between: bool,
    pub detunings: Vec<f64>,
    pub alphas: Vec<f64>,
    pub taus: Vec<f64>,
}

/// Validated configuration shared by all subcommands.
#[derive(Debug, Clone)]
pub struct RunConfig {
    /// Flattened input, kept for sweeps that rebuild the config per point.
    pub raw: FlatMap,
    pub a: SubsystemParams,
    pub b: SubsystemParams,
    pub omega_l: f64,
    pub pulse: PulseSpec,
    pub x_c: f64,
    pub area: PulseAreaMode,
    pub optimize: OptimizeKind,
    pub alpha_axis: Axis,
    pub detuning_axis: Axis,
    pub p_floor: f64,
    pub offset_step: Option<f64>,
    pub sweep: Vec<SweepAxis>,
    pub region: RegionConfig,
    pub semiclassical: SemiclassicalSpec,
    pub two_sided_taus: Vec<f64>,
    pub two_sided_detuning: f64,
    pub format: OutputFormat,
    pub output: Option<PathBuf>,
    pub threads: Option<usize>,
}

fn positive(key: &str, v: f64) -> AppResult<f64> {
    if v.is_finite() && v > 0.0 {
        Ok(v)
    } else {
        Err(AppError::config(key, format!("must be positive, got {v}")))
    }
}

fn range_axis(r: &Reader, lo_key: &str, hi_key: &str, lo: f64, hi: f64) -> AppResult<(f64, f64)> {
    let (lo, hi) = (r.num_or(lo_key, lo), r.num_or(hi_key, hi));
    if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
        return Err(AppError::config(lo_key, format!("range [{lo}, {hi}] is empty")));
    }
    Ok((lo, hi))
}

fn points_axis(r: &Reader, stem: &str, lo: f64, hi: f64, n: usize) -> AppResult<Axis> {
    let (lo, hi) = range_axis(r, &format!("{stem}_lo{}", unit(stem)), &format!("{stem}_hi{}", unit(stem)), lo, hi)?;
    let key = format!("{stem}_points");
    let n = r.int(&key)?.unwrap_or(n);
    if n < 1 || (n == 1 && lo != hi) || (n > 1 && lo == hi) {
        return Err(AppError::config(key, "point count does not match the range"));
    }
    Ok(if n == 1 { Axis::fixed(lo) } else { Axis::linear_n(lo, hi, n) })
}

fn unit(stem: &str) -> &'static str {
    if stem.ends_with("detuning") {
        "_meV"
    } else {
        ""
    }
}

fn subsystem(r: &Reader, x: &str, omega_l: f64, sidedness: Sidedness) -> SubsystemParams {
    let detuning = r.sub(x, "detuning_meV", 5.0);
    let nu = r.num(&format!("{x}.nu_meV")).unwrap_or(omega_l + detuning);
    let hl = r.num(&format!("{x}.delta_omega_HL_meV")).or_else(|| r.num("light_holes.delta_omega_HL_meV"));
    SubsystemParams {
        g: r.sub(x, "g_meV", 0.15),
        kappa: r.sub(x, "kappa_meV", 0.05),
        gamma: r.sub(x, "gamma_meV", 0.002),
        nu,
        g_e: r.sub(x, "g_e", SubsystemParams::DEFAULT_G_E),
        g_h: r.sub(x, "g_h", SubsystemParams::DEFAULT_G_H),
        b_ext: r.sub(x, "B_ext_T", 0.0),
        b_nuc: r.sub(x, "B_nuc_T", 0.0),
        delta_omega_hl: hl,
        cavity_detuning: r.sub(x, "delta_omega_cav_meV", 0.0),
        sidedness,
    }
}

/// Mean detuning `ν − ω_L` of a subsystem (meV).
pub fn mean_detuning(p: &SubsystemParams, omega_l: f64) -> f64 {
    let (n0, n1) = zeeman_frequencies(p);
    0.5 * (n0 + n1) - omega_l
}

impl RunConfig {
    pub fn from_map(raw: FlatMap) -> AppResult<Self> {
        check_keys(&raw)?;
        let r = Reader(&raw);

        let sidedness = match r.str("system.sidedness").unwrap_or("one-sided") {
            "one-sided" => Sidedness::OneSided,
            "two-sided" => Sidedness::TwoSided,
            other => return Err(AppError::config("system.sidedness", format!("unknown value `{other}`"))),
        };
        let omega_l = r.num_or("laser.omega_L_meV", REFERENCE_LASER_MEV);
        if !omega_l.is_finite() {
            return Err(AppError::config("laser.omega_L_meV", "must be finite"));
        }
        let a = subsystem(&r, "a", omega_l, sidedness);
        let b = subsystem(&r, "b", omega_l, sidedness);
        for p in [&a, &b] {
            p.validate()?;
        }

        let tau_p = positive("pulse.tau_p_ps", r.num_or("pulse.tau_p_ps", 1000.0))?;
        let mut pulse = PulseSpec::new(r.num_or("pulse.alpha_in", 8.0), tau_p).with_t_prop(r.num_or("pulse.t_prop_ps", 0.0));
        if let Some(t0) = r.num("pulse.t0_ps") {
            pulse.t0 = t0;
        }
        pulse.validate()?;
        let area = match r.str("pulse.area").unwrap_or("steady") {
            "steady" => PulseAreaMode::Steady,
            "transient" => PulseAreaMode::Transient,
            other => return Err(AppError::config("pulse.area", format!("unknown value `{other}`"))),
        };
        let x_c = positive("window.x_c", r.num_or("window.x_c", 0.3))?;

        let optimize = match r.str("strategy.kind").unwrap_or("identical") {
            "identical" => OptimizeKind::Identical,
            "redshift" => OptimizeKind::Strategy(Strategy::Redshift {
                max_detuning: positive("strategy.max_detuning_meV", r.num_or("strategy.max_detuning_meV", DEFAULT_MAX_DETUNING))?,
            }),
            "tune-between" => OptimizeKind::Strategy(Strategy::TuneBetween { asym: r.auto("strategy.asym_offset_meV") }),
            "cavity-detune" => {
                let (lo, hi) = range_axis(&r, "strategy.cavity_detuning_lo_meV", "strategy.cavity_detuning_hi_meV", -2.0, 2.0)?;
                if lo > 0.0 || hi < 0.0 {
                    return Err(AppError::config("strategy.cavity_detuning_lo_meV", "range must contain zero"));
                }
                OptimizeKind::Strategy(Strategy::CavityDetune {
                    max_detuning: positive("strategy.max_detuning_meV", r.num_or("strategy.max_detuning_meV", DEFAULT_MAX_DETUNING))?,
                    lo,
                    hi,
                })
            }
            other => return Err(AppError::config("strategy.kind", format!("unknown value `{other}`"))),
        };
        // Strategies place the laser themselves; otherwise it must be off resonance.
        if optimize == OptimizeKind::Identical {
            for p in [&a, &b] {
                detunings(p, omega_l)?;
            }
        }
        let offset_step = r.num("strategy.offset_step_meV").map(|v| positive("strategy.offset_step_meV", v)).transpose()?;

        let (alo, ahi) = range_axis(&r, "search.alpha_lo", "search.alpha_hi", 0.25, 30.0)?;
        let alpha_axis = match r.int("search.alpha_log_points")? {
            Some(n) => {
                if alo <= 0.0 || n < 2 {
                    return Err(AppError::config("search.alpha_log_points", "log axis needs alpha_lo > 0 and two points"));
                }
                Axis::log(alo, ahi, n)
            }
            None => Axis::linear(alo, ahi, positive("search.alpha_step", r.num_or("search.alpha_step", 0.25))?),
        };
        let (dlo, dhi) = range_axis(&r, "search.detuning_lo_meV", "search.detuning_hi_meV", 1.0, 10.0)?;
        let detuning_axis = Axis::linear(dlo, dhi, positive("search.detuning_step_meV", r.num_or("search.detuning_step_meV", 0.25))?);
        let p_floor = r.num_or("search.p_floor", DEFAULT_P_FLOOR);
        if !(0.0..1.0).contains(&p_floor) {
            return Err(AppError::config("search.p_floor", "must lie in [0, 1)"));
        }

        let mut sweep = Vec::new();
        for ax in ["x", "y"] {
            let Some(key) = r.str(&format!("sweep.{ax}")) else { continue };
            if key_kind(key) != Some(KeyKind::Num) || key.starts_with("sweep.") {
                return Err(AppError::config(format!("sweep.{ax}"), format!("`{key}` is not a numeric parameter key")));
            }
            let lo = r.num(&format!("sweep.{ax}_lo")).ok_or_else(|| AppError::config(format!("sweep.{ax}_lo"), "missing"))?;
            let hi = r.num(&format!("sweep.{ax}_hi")).ok_or_else(|| AppError::config(format!("sweep.{ax}_hi"), "missing"))?;
            let n = r.int(&format!("sweep.{ax}_points"))?.unwrap_or(11);
            let log = r.flag(&format!("sweep.{ax}_log"), false);
            let axis = if n == 1 {
                Axis::fixed(lo)
            } else if log {
                Axis::log(lo, hi, n)
            } else {
                Axis::linear_n(lo, hi, n)
            };
            axis.validate("sweep").map_err(|e| AppError::config(format!("sweep.{ax}"), e.to_string()))?;
            sweep.push(SweepAxis { key: key.to_string(), values: axis.values() });
        }
        if sweep.is_empty() && r.str("sweep.y").is_some() {
            return Err(AppError::config("sweep.y", "needs sweep.x"));
        }

        let kind = match r.str("scan.kind").unwrap_or("redshift") {
            "redshift" => RegionKind::Redshift,
            "tune-between" => RegionKind::TuneBetween { asym: r.auto("scan.asym_offset_meV") },
            other => return Err(AppError::config("scan.kind", format!("unknown value `{other}`"))),
        };
        let mut light_holes: Vec<Option<f64>> =
            r.list("scan.delta_omega_HL_meV").unwrap_or_else(|| vec![10.0]).into_iter().map(Some).collect();
        for hl in light_holes.iter().flatten() {
            positive("scan.delta_omega_HL_meV", *hl)?;
        }
        if r.flag("scan.include_no_light_holes", true) {
            light_holes.push(None);
        }
        if light_holes.is_empty() {
            return Err(AppError::config("scan.delta_omega_HL_meV", "no configuration to scan"));
        }
        let region = RegionConfig {
            g: a.g,
            kappa: a.kappa,
            gamma: a.gamma,
            kind,
            detuning: points_axis(&r, "scan.detuning", 1.0, 10.0, 50)?,
            alpha: points_axis(&r, "scan.alpha", 0.25, 30.0, 50)?,
            threshold: r.num_or("scan.threshold", 0.99),
            p_min: r.num_or("scan.p_min", 0.0),
            settings: EvalSettings { x_c, tau_p, t_prop: pulse.t_prop, area, p_floor },
            light_holes,
            offset_points: r.int("scan.offset_points")?.unwrap_or(21).max(3),
        };
        if region.detuning.lo <= 0.0 {
            return Err(AppError::config("scan.detuning_lo_meV", "must be positive"));
        }

        let tune_between = match r.str("semiclassical.mode").unwrap_or("redshift") {
            "redshift" => false,
            "tune-between" => true,
            other => return Err(AppError::config("semiclassical.mode", format!("unknown value `{other}`"))),
        };
        let semiclassical = SemiclassicalSpec {
            tune_between,
            detunings: r.list("semiclassical.detunings_meV").unwrap_or_else(|| vec![2.0, 4.0, 6.0, 8.0, 10.0]),
            alphas: r.list("semiclassical.alphas").unwrap_or_else(|| vec![3.0, 6.0, 9.0, 12.0, 15.0]),
            taus: r.list("semiclassical.taus_ps").unwrap_or_else(|| vec![100.0, 1000.0]),
        };
        for &t in &semiclassical.taus {
            positive("semiclassical.taus_ps", t)?;
        }
        for &d in &semiclassical.detunings {
            positive("semiclassical.detunings_meV", d)?;
        }

        let two_sided_taus = r.list("two_sided.taus_ps").unwrap_or_else(|| Axis::log(10.0, 1e5, 25).values());
        for &t in &two_sided_taus {
            positive("two_sided.taus_ps", t)?;
        }
        let two_sided_detuning = r.num("two_sided.detuning_meV").unwrap_or_else(|| mean_detuning(&a, omega_l));

        let format = match r.str("output.format").unwrap_or("csv") {
            "csv" => OutputFormat::Csv,
            "json" => OutputFormat::Json,
            other => return Err(AppError::config("output.format", format!("unknown value `{other}`"))),
        };
        let output = r.str("output.path").map(PathBuf::from);
        let threads = r.int("run.threads")?;

        Ok(RunConfig {
            a,
            b,
            omega_l,
            pulse,
            x_c,
            area,
            optimize,
            alpha_axis,
            detuning_axis,
            p_floor,
            offset_step,
            sweep,
            region,
            semiclassical,
            two_sided_taus,
            two_sided_detuning,
            format,
            output,
            threads,
            raw,
        })
    }

    /// Config with one numeric key replaced, revalidated.
    pub fn with_value(&self, key: &str, value: f64) -> AppResult<Self> {
        let mut raw = self.raw.clone();
        raw.insert(key.to_string(), Value::Float(value));
        Self::from_map(raw)
    }

    pub fn settings(&self) -> EvalSettings {
        EvalSettings { x_c: self.x_c, tau_p: self.pulse.tau_p, t_prop: self.pulse.t_prop, area: self.area, p_floor: self.p_floor }
    }

    pub fn scenario(&self) -> Scenario {
        let mut s = Scenario::new(self.a, self.b, self.omega_l, self.pulse, self.x_c);
        s.area = self.area;
        s
    }

    pub fn identical_ranges(&self) -> IdenticalRanges {
        IdenticalRanges { alpha: self.alpha_axis, detuning: self.detuning_axis }
    }

    pub fn strategy_config(&self, strategy: Strategy) -> StrategyConfig {
        let mut cfg = StrategyConfig::new(strategy, self.x_c);
        cfg.settings = self.settings();
        cfg.alpha = self.alpha_axis;
        cfg.detuning = self.detuning_axis;
        cfg.offset_step = self.offset_step.unwrap_or(match strategy {
            Strategy::CavityDetune { .. } => CAVITY_DETUNING_STEP,
            _ => 0.25,
        });
        cfg
    }
}
