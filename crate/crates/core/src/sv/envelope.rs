//! Monotone-envelope test of the slowly varying property.
//!
//! For `ε > 0`, `t^ε b(t)` must be equivalent to a nondecreasing function and
//! `t^{-ε} b(t)` to a nonincreasing one. The smallest such envelopes are the
//! running maximum and the running minimum from the left, so the test measures
//! how far the raw function falls below (resp. rises above) them.
//!
//! A finite window always yields a finite bracket, so the verdict looks at how
//! the log-deficit grows as the window widens: bounded deficits saturate, while
//! a genuine power behaviour grows linearly with the window.

use serde::Serialize;

use super::SvDescriptor;
use crate::bracket::Bracket;
use crate::error::{invalid, Result};
use crate::grid::LogGrid;
use crate::scalar::Scalar;

const GROWTH_LIMIT: f64 = 1.5;
const NEGLIGIBLE: f64 = 1e-9;
const WIDENINGS: usize = 4;

#[derive(Clone, Debug, Serialize)]
#[serde(bound = "")]
pub struct EnvelopeReport<T: Scalar> {
    pub eps: T,
    /// `t^ε b(t)` over its running maximum (values in `(0, 1]`).
    pub rising: Bracket<T>,
    /// `t^{-ε} b(t)` over its running minimum (values in `[1, ∞)`).
    pub falling: Bracket<T>,
    /// Deficit ratio between the widest and the next window.
    pub rising_growth: T,
    pub falling_growth: T,
    pub passed: bool,
}

/// Largest log-gap below the running max and above the running min.
fn deficits<T: Scalar>(xs: &[T], ln_b: &[T], eps: T) -> (T, T) {
    let mut max = T::neg_infinity();
    let mut min = T::infinity();
    let (mut rise, mut fall) = (T::zero(), T::zero());
    for (&x, &lb) in xs.iter().zip(ln_b) {
        let up = eps * x + lb;
        let down = -eps * x + lb;
        max = max.max(up);
        min = min.min(down);
        rise = rise.max(max - up);
        fall = fall.max(down - min);
    }
    (rise, fall)
}

fn growth<T: Scalar>(wide: T, narrow: T) -> T {
    if wide <= T::lit(NEGLIGIBLE) {
        T::one()
    } else if narrow <= T::zero() {
        T::infinity()
    } else {
        wide / narrow
    }
}

fn report<T: Scalar>(eps: T, base: (T, T), narrow: (T, T), wide: (T, T)) -> EnvelopeReport<T> {
    let rising_growth = growth(wide.0, narrow.0);
    let falling_growth = growth(wide.1, narrow.1);
    let limit = T::lit(GROWTH_LIMIT);
    EnvelopeReport {
        eps,
        rising: Bracket { inf: (-base.0).exp(), sup: T::one() },
        falling: Bracket { inf: T::one(), sup: base.1.exp() },
        rising_growth,
        falling_growth,
        passed: rising_growth < limit && falling_growth < limit,
    }
}

/// Envelope test of a descriptor over `grid`, with the window widened
/// geometrically around the grid centre to watch the deficits settle.
pub fn check_sv_envelope<T: Scalar>(b: &SvDescriptor<T>, eps: T, grid: &LogGrid<T>) -> Result<EnvelopeReport<T>> {
    if !(eps > T::zero()) {
        return Err(invalid(format!("ε must be positive, got {eps}")));
    }
    let xs = grid.log_points();
    let (lo, hi) = (xs[0], xs[xs.len() - 1]);
    let centre = (lo + hi) / T::lit(2.0);
    let half = (hi - lo) / T::lit(2.0);
    let step = (hi - lo) / T::from_usize_lossy(xs.len() - 1);
    let mut per_window = Vec::with_capacity(WIDENINGS + 1);
    for k in 0..=WIDENINGS {
        let h = half * T::lit(2f64.powi(k as i32));
        let n = (T::lit(2.0) * h / step).round().to_usize().unwrap_or(1).max(1);
        let wx: Vec<T> = (0..=n)
            .map(|i| centre - h + T::lit(2.0) * h * T::from_usize_lossy(i) / T::from_usize_lossy(n))
            .collect();
        let lb: Vec<T> = wx.iter().map(|&x| b.ln_at(x)).collect();
        per_window.push(deficits(&wx, &lb, eps));
    }
    Ok(report(eps, per_window[0], per_window[WIDENINGS - 1], per_window[WIDENINGS]))
}

/// Envelope test of raw samples `(t_i, b(t_i))`; compares the full sample
/// range with its central half.
pub fn check_envelope_samples<T: Scalar>(ts: &[T], values: &[T], eps: T) -> Result<EnvelopeReport<T>> {
    if ts.len() != values.len() || ts.len() < 4 {
        return Err(invalid("need at least four (t, b(t)) samples of matching length"));
    }
    if !(eps > T::zero()) {
        return Err(invalid(format!("ε must be positive, got {eps}")));
    }
    if ts.windows(2).any(|w| !(w[0] < w[1])) || !(ts[0] > T::zero()) {
        return Err(invalid("sample abscissae must be positive and strictly increasing"));
    }
    if values.iter().any(|v| !(*v > T::zero() && v.is_finite())) {
        return Err(invalid("sample values must be positive and finite"));
    }
    let xs: Vec<T> = ts.iter().map(|t| t.ln()).collect();
    let lb: Vec<T> = values.iter().map(|v| v.ln()).collect();
    let (lo, hi) = (xs[0], xs[xs.len() - 1]);
    let centre = (lo + hi) / T::lit(2.0);
    let quarter = (hi - lo) / T::lit(4.0);
    let inner: Vec<usize> = (0..xs.len()).filter(|&i| (xs[i] - centre).abs() <= quarter).collect();
    let (a, z) = (inner[0], inner[inner.len() - 1] + 1);
    let full = deficits(&xs, &lb, eps);
    let half = deficits(&xs[a..z], &lb[a..z], eps);
    Ok(report(eps, full, half, full))
}
