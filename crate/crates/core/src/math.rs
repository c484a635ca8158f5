//! Small numeric helpers shared across modules.

use num_complex::Complex64;

/// Error function, backed by the `libm` port of the FreeBSD/Sun `s_erf.c`
/// routine (documented max error below 1 ulp).
#[inline]
pub fn erf(x: f64) -> f64 {
    libm::erf(x)
}

#[inline]
pub fn erfc(x: f64) -> f64 {
    libm::erfc(x)
}

#[inline]
pub(crate) fn cis(phase: f64) -> Complex64 {
    Complex64::from_polar(1.0, phase)
}

/// Composite trapezoid rule on a uniform grid.
pub fn trapezoid(samples: &[f64], dx: f64) -> f64 {
    match samples.len() {
        0 | 1 => 0.0,
        n => {
            let inner: f64 = samples[1..n - 1].iter().sum();
            dx * (inner + 0.5 * (samples[0] + samples[n - 1]))
        }
    }
}

/// Evenly spaced values including both ends.
pub fn linspace(lo: f64, hi: f64, n: usize) -> alloc::vec::Vec<f64> {
    match n {
        0 => alloc::vec::Vec::new(),
        1 => alloc::vec![lo],
        _ => (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect(),
    }
}

/// Number of grid points needed so that the spacing over `[lo, hi]` does not exceed `max_step`.
pub fn points_for_step(lo: f64, hi: f64, max_step: f64) -> usize {
    let span = (hi - lo).abs();
    if span == 0.0 {
        return 1;
    }
    libm::ceil(span / max_step) as usize + 1
}
