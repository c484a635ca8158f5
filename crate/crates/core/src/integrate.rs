//! Adaptive Dormand–Prince 5(4) integrator with continuous (dense) output.
//!
//! The state is a fixed-size real array; complex quantities are packed as
//! consecutive (re, im) pairs by the callers. Samples are produced on a caller
//! supplied grid through the fourth-order continuous extension, so the grid
//! never constrains the step size.

use alloc::vec::Vec;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    pub rtol: f64,
    pub atol: f64,
    /// Upper bound on the step size (same units as `t`).
    pub h_max: f64,
    pub max_steps: usize,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances { rtol: 1e-8, atol: 1e-12, h_max: f64::INFINITY, max_steps: 20_000_000 }
    }
}

impl Tolerances {
    pub fn with_h_max(mut self, h_max: f64) -> Self {
        self.h_max = h_max;
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Stats {
    pub accepted: usize,
    pub rejected: usize,
    pub evaluations: usize,
    /// Largest scaled error norm among accepted steps (≤ 1 by construction).
    pub worst_error: f64,
}

#[derive(Debug, Clone)]
pub struct DenseSolution<const N: usize> {
    pub times: Vec<f64>,
    pub states: Vec<[f64; N]>,
    pub stats: Stats,
}

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;

const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

#[inline]
fn axpy<const N: usize>(y: &[f64; N], h: f64, terms: &[(f64, &[f64; N])]) -> [f64; N] {
    let mut out = *y;
    for (i, o) in out.iter_mut().enumerate() {
        let mut acc = 0.0;
        for (c, k) in terms {
            acc += c * k[i];
        }
        *o += h * acc;
    }
    out
}

fn initial_step<const N: usize, F>(f: &mut F, t: f64, y: &[f64; N], k1: &[f64; N], tol: &Tolerances) -> f64
where
    F: FnMut(f64, &[f64; N]) -> [f64; N],
{
    let scale = |v: f64| tol.atol + tol.rtol * v.abs();
    let d0 = rms(y.iter().map(|v| v / scale(*v)));
    let d1 = rms(k1.iter().zip(y).map(|(k, v)| k / scale(*v)));
    let h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
    let h0 = h0.min(tol.h_max);
    let y1 = axpy(y, h0, &[(1.0, k1)]);
    let k2 = f(t + h0, &y1);
    let d2 = rms(k2.iter().zip(k1).zip(y).map(|((a, b), v)| (a - b) / scale(*v))) / h0;
    let h1 = if d1.max(d2) <= 1e-15 {
        (h0 * 1e-3).max(1e-6)
    } else {
        libm::pow(0.01 / d1.max(d2), 0.2)
    };
    (100.0 * h0).min(h1).min(tol.h_max)
}

fn rms(it: impl Iterator<Item = f64>) -> f64 {
    let mut n = 0usize;
    let mut s = 0.0;
    for v in it {
        s += v * v;
        n += 1;
    }
    if n == 0 {
        0.0
    } else {
        libm::sqrt(s / n as f64)
    }
}

/// Integrates `y' = f(t, y)` from `t0` and samples the solution at every time
/// in `grid` (ascending, all `≥ t0`).
pub fn integrate_dense<const N: usize, F>(
    mut f: F,
    t0: f64,
    y0: [f64; N],
    grid: &[f64],
    tol: &Tolerances,
) -> Result<DenseSolution<N>>
where
    F: FnMut(f64, &[f64; N]) -> [f64; N],
{
    let mut times = Vec::with_capacity(grid.len());
    let mut states = Vec::with_capacity(grid.len());
    let mut stats = Stats::default();
    let Some(&t_end) = grid.last() else {
        return Ok(DenseSolution { times, states, stats });
    };

    let mut next = 0usize;
    while next < grid.len() && grid[next] <= t0 {
        times.push(grid[next]);
        states.push(y0);
        next += 1;
    }

    let mut t = t0;
    let mut y = y0;
    let mut k1 = f(t, &y);
    stats.evaluations += 1;
    let mut h = initial_step(&mut f, t, &y, &k1, tol);
    stats.evaluations += 1;
    let mut last_rejected = false;

    while next < grid.len() {
        if stats.accepted + stats.rejected >= tol.max_steps {
            return Err(Error::TooManySteps { t, steps: tol.max_steps, worst_error: stats.worst_error });
        }
        h = h.min(tol.h_max).min(t_end - t);
        if h <= 1e-14 * libm::fabs(t).max(1.0) {
            // Floating-point leftover at the very end of the interval.
            if t_end - t <= 1e-12 * libm::fabs(t_end).max(1.0) {
                while next < grid.len() {
                    times.push(grid[next]);
                    states.push(y);
                    next += 1;
                }
                break;
            }
            return Err(Error::StepSizeUnderflow { t, step: h, error_norm: f64::NAN });
        }

        let y2 = axpy(&y, h, &[(A21, &k1)]);
        let k2 = f(t + C2 * h, &y2);
        let y3 = axpy(&y, h, &[(A31, &k1), (A32, &k2)]);
        let k3 = f(t + C3 * h, &y3);
        let y4 = axpy(&y, h, &[(A41, &k1), (A42, &k2), (A43, &k3)]);
        let k4 = f(t + C4 * h, &y4);
        let y5 = axpy(&y, h, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]);
        let k5 = f(t + C5 * h, &y5);
        let y6 = axpy(&y, h, &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)]);
        let k6 = f(t + h, &y6);
        let y_new = axpy(&y, h, &[(A71, &k1), (A73, &k3), (A74, &k4), (A75, &k5), (A76, &k6)]);
        let k7 = f(t + h, &y_new);
        stats.evaluations += 6;

        let mut err_acc = 0.0;
        for i in 0..N {
            let e = h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
            let sc = tol.atol + tol.rtol * libm::fabs(y[i]).max(libm::fabs(y_new[i]));
            err_acc += (e / sc) * (e / sc);
        }
        let err = libm::sqrt(err_acc / N as f64);
        if !err.is_finite() {
            return Err(Error::StepSizeUnderflow { t, step: h, error_norm: err });
        }

        if err <= 1.0 {
            stats.accepted += 1;
            stats.worst_error = stats.worst_error.max(err);
            let t_new = t + h;
            // Dense output on [t, t_new].
            if next < grid.len() && grid[next] <= t_new {
                let mut r2 = [0.0; N];
                let mut r3 = [0.0; N];
                let mut r4 = [0.0; N];
                let mut r5 = [0.0; N];
                for i in 0..N {
                    r2[i] = y_new[i] - y[i];
                    r3[i] = h * k1[i] - r2[i];
                    r4[i] = r2[i] - h * k7[i] - r3[i];
                    r5[i] = h
                        * (D1 * k1[i] + D3 * k3[i] + D4 * k4[i] + D5 * k5[i] + D6 * k6[i] + D7 * k7[i]);
                }
                while next < grid.len() && grid[next] <= t_new {
                    let th = ((grid[next] - t) / h).clamp(0.0, 1.0);
                    let th1 = 1.0 - th;
                    let mut s = [0.0; N];
                    for i in 0..N {
                        s[i] = y[i] + th * (r2[i] + th1 * (r3[i] + th * (r4[i] + th1 * r5[i])));
                    }
                    times.push(grid[next]);
                    states.push(s);
                    next += 1;
                }
            }
            t = t_new;
            y = y_new;
            k1 = k7;
            let mut fac = 0.9 * libm::pow(err.max(1e-10), -0.2);
            fac = fac.clamp(0.2, 10.0);
            if last_rejected {
                fac = fac.min(1.0);
            }
            h *= fac;
            last_rejected = false;
        } else {
            stats.rejected += 1;
            h *= (0.9 * libm::pow(err, -0.2)).max(0.2);
            last_rejected = true;
            if h < 1e-14 * libm::fabs(t).max(1.0) {
                return Err(Error::StepSizeUnderflow { t, step: h, error_norm: err });
            }
        }
    }

    Ok(DenseSolution { times, states, stats })
}
