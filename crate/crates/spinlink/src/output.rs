//! Tables written as CSV or JSON.
//!
//! Floats are printed with twelve significant digits in scientific notation so
//! repeated runs give byte-identical files.

use std::io::Write;
use std::path::Path;

use serde_json::{json, Map, Value};
use spinlink_core::fidelity::{FidelityReport, Scenario};
use spinlink_core::units::zeeman_frequencies;
use spinlink_core::{Sidedness, SubsystemParams};

use crate::config::OutputFormat;
use crate::error::{AppError, AppResult};

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(i64),
    Bool(bool),
    Text(String),
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Num(x) => format_float(*x),
            Cell::Int(i) => i.to_string(),
            Cell::Bool(b) => b.to_string(),
            Cell::Text(s) if s.contains([',', '"', '\n']) => format!("\"{}\"", s.replace('"', "\"\"")),
            Cell::Text(s) => s.clone(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Num(x) if x.is_finite() => json!(x),
            Cell::Num(_) => Value::Null,
            Cell::Int(i) => json!(i),
            Cell::Bool(b) => json!(b),
            Cell::Text(s) => json!(s),
        }
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Num(x)
    }
}

impl From<usize> for Cell {
    fn from(x: usize) -> Self {
        Cell::Int(x as i64)
    }
}

impl From<bool> for Cell {
    fn from(b: bool) -> Self {
        Cell::Bool(b)
    }
}

impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Cell::Text(s.to_string())
    }
}

impl From<String> for Cell {
    fn from(s: String) -> Self {
        Cell::Text(s)
    }
}

impl From<Option<f64>> for Cell {
    fn from(x: Option<f64>) -> Self {
        Cell::Num(x.unwrap_or(f64::NAN))
    }
}

/// `{:.11e}`, with fixed spellings for the non-finite values.
pub fn format_float(x: f64) -> String {
    if x.is_nan() {
        "NaN".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf" } else { "-inf" }.into()
    } else {
        format!("{x:.11e}")
    }
}

pub type Row = Vec<(String, Cell)>;

/// Appends `(name, value)` pairs.
pub fn put(row: &mut Row, name: impl Into<String>, value: impl Into<Cell>) {
    row.push((name.into(), value.into()));
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Table {
    pub rows: Vec<Row>,
}

impl Table {
    pub fn new(rows: Vec<Row>) -> Self {
        Table { rows }
    }

    pub fn columns(&self) -> Vec<&str> {
        self.rows.first().map(|r| r.iter().map(|(k, _)| k.as_str()).collect()).unwrap_or_default()
    }

    /// Column values by name.
    pub fn column(&self, name: &str) -> Vec<&Cell> {
        self.rows.iter().filter_map(|r| r.iter().find(|(k, _)| k == name).map(|(_, v)| v)).collect()
    }

    pub fn numbers(&self, name: &str) -> Vec<f64> {
        self.column(name)
            .into_iter()
            .map(|c| match c {
                Cell::Num(x) => *x,
                Cell::Int(i) => *i as f64,
                _ => f64::NAN,
            })
            .collect()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        let cols = self.columns();
        out.push_str(&cols.join(","));
        out.push('\n');
        for row in &self.rows {
            assert_eq!(row.len(), cols.len(), "ragged table row");
            let line: Vec<String> = row.iter().map(|(_, c)| c.csv()).collect();
            out.push_str(&line.join(","));
            out.push('\n');
        }
        out
    }

    pub fn to_json(&self) -> Value {
        Value::Array(
            self.rows
                .iter()
                .map(|r| Value::Object(r.iter().map(|(k, v)| (k.clone(), v.json())).collect::<Map<_, _>>()))
                .collect(),
        )
    }

    pub fn render(&self, format: OutputFormat) -> String {
        match format {
            OutputFormat::Csv => self.to_csv(),
            OutputFormat::Json => {
                let mut s = serde_json::to_string_pretty(&self.to_json()).expect("tables always serialize");
                s.push('\n');
                s
            }
        }
    }

    /// Writes to `path`, or to stdout when absent.
    pub fn write(&self, format: OutputFormat, path: Option<&Path>) -> AppResult<()> {
        let text = self.render(format);
        match path {
            Some(p) => std::fs::write(p, text).map_err(|e| AppError::Io { path: p.display().to_string(), message: e.to_string() }),
            None => {
                let mut out = std::io::stdout().lock();
                out.write_all(text.as_bytes())
                    .and_then(|_| out.flush())
                    .map_err(|e| AppError::Io { path: "<stdout>".into(), message: e.to_string() })
            }
        }
    }
}

pub fn sidedness_name(s: Sidedness) -> &'static str {
    match s {
        Sidedness::OneSided => "one-sided",
        Sidedness::TwoSided => "two-sided",
    }
}

/// Every field of one subsystem, prefixed with `x_`.
pub fn echo_subsystem(row: &mut Row, x: &str, p: &SubsystemParams, omega_l: f64) {
    let (n0, n1) = zeeman_frequencies(p);
    put(row, format!("{x}_g_meV"), p.g);
    put(row, format!("{x}_kappa_meV"), p.kappa);
    put(row, format!("{x}_gamma_meV"), p.gamma);
    put(row, format!("{x}_nu_meV"), p.nu);
    put(row, format!("{x}_detuning_meV"), 0.5 * (n0 + n1) - omega_l);
    put(row, format!("{x}_g_e"), p.g_e);
    put(row, format!("{x}_g_h"), p.g_h);
    put(row, format!("{x}_B_ext_T"), p.b_ext);
    put(row, format!("{x}_B_nuc_T"), p.b_nuc);
    put(row, format!("{x}_delta_omega_HL_meV"), p.delta_omega_hl);
    put(row, format!("{x}_delta_omega_cav_meV"), p.cavity_detuning);
}

/// The complete input of one fidelity evaluation.
pub fn echo_scenario(s: &Scenario) -> Row {
    let mut row = Row::new();
    put(&mut row, "omega_L_meV", s.omega_l);
    echo_subsystem(&mut row, "a", &s.a, s.omega_l);
    echo_subsystem(&mut row, "b", &s.b, s.omega_l);
    put(&mut row, "sidedness", sidedness_name(s.a.sidedness));
    put(&mut row, "alpha_in", s.pulse.alpha_in);
    put(&mut row, "tau_p_ps", s.pulse.tau_p);
    put(&mut row, "t0_ps", s.pulse.t0);
    put(&mut row, "t_prop_ps", s.pulse.t_prop);
    put(&mut row, "x_c", s.x_c);
    put(&mut row, "area", format!("{:?}", s.area).to_lowercase());
    row
}

/// Result columns of a fidelity report.
pub fn report_columns(row: &mut Row, r: &FidelityReport, alpha_in: f64) {
    put(row, "F", r.fidelity);
    put(row, "P_succ", r.p_succ);
    put(row, "decay_exponent", r.decay.rayleigh_exponent);
    put(row, "coherence_factor", r.decay.coherence_factor());
    put(row, "two_sided_overlap", r.decay.two_sided_overlap);
    put(row, "target", format!("{:?}", r.d.target).to_lowercase());
    put(row, "d11", r.d.d11);
    put(row, "d00", r.d.d00);
    put(row, "d10", r.d.d10);
    put(row, "d01", r.d.d01);
    let n = r.decay.scattered_photons(alpha_in);
    put(row, "n_scatt_a0", n[0][0]);
    put(row, "n_scatt_a1", n[0][1]);
    put(row, "n_scatt_b0", n[1][0]);
    put(row, "n_scatt_b1", n[1][1]);
}

/// Same columns filled with NaN, for points that failed to evaluate.
pub fn missing_report_columns(row: &mut Row) {
    for k in ["F", "P_succ", "decay_exponent", "coherence_factor", "two_sided_overlap"] {
        put(row, k, f64::NAN);
    }
    put(row, "target", "none");
    for k in ["d11", "d00", "d10", "d01", "n_scatt_a0", "n_scatt_a1", "n_scatt_b0", "n_scatt_b1"] {
        put(row, k, f64::NAN);
    }
}
