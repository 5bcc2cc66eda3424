//! Composite Gauss–Legendre quadrature in the logarithmic variable.
//!
//! Every integral in this crate has the form `∫ F(s) ds/s`, which becomes
//! `∫ F(e^x) dx` after `x = ln s`. Integrands are supplied as `x ↦ ln F(e^x)`
//! and results are returned as logarithms, so weights such as `t^{-θ}` and
//! K-profiles can be evaluated at `|x| ~ 10^13` without overflow.
//!
//! Mesh: around every finite endpoint the panels have uniform width
//! `ln 10 / panels_per_decade` out to distance `uniform_reach`; beyond that the
//! panels double (`[R·2^k, R·2^{k+1}]`). Infinite ends stop at `max_extent`.
//! Cusps (derivative singularities such as `exp|x|^α`) get an extra geometric
//! refinement towards the singular point.
//!
//! Divergence: on an infinite end the contributions of the doubling panels
//! are compared. A non-decaying sequence, or a geometric remainder estimate
//! above `divergence_threshold` of the total, reports `+∞`.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use crate::scalar::{ln_add, Scalar};

/// A point where the integrand is not smooth.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Kink<T> {
    pub x: T,
    /// Unbounded derivative at `x`; triggers geometric refinement.
    pub cusp: bool,
}

impl<T: Scalar> Kink<T> {
    pub fn at(x: T) -> Self {
        Kink { x, cusp: false }
    }

    pub fn cusp(x: T) -> Self {
        Kink { x, cusp: true }
    }
}

/// Sorted, deduplicated kinks; cusp flags are merged.
pub fn merge_kinks<T: Scalar>(mut kinks: Vec<Kink<T>>) -> Vec<Kink<T>> {
    kinks.retain(|k| k.x.is_finite());
    kinks.sort_by(|a, b| a.x.partial_cmp(&b.x).expect("finite kinks"));
    let mut out: Vec<Kink<T>> = Vec::with_capacity(kinks.len());
    for k in kinks {
        match out.last_mut() {
            Some(last) if (k.x - last.x).abs() <= T::epsilon() * (T::one() + k.x.abs()) => {
                last.cusp |= k.cusp;
            }
            _ => out.push(k),
        }
    }
    out
}

#[derive(Clone, Debug, PartialEq)]
pub struct Quadrature<T> {
    pub panels_per_decade: usize,
    /// Gauss–Legendre points per panel.
    pub order: usize,
    pub uniform_reach: T,
    pub max_extent: T,
    pub divergence_threshold: T,
    pub cusp_levels: usize,
}

impl<T: Scalar> Default for Quadrature<T> {
    fn default() -> Self {
        Quadrature {
            panels_per_decade: 8,
            order: 12,
            uniform_reach: T::lit(16.0),
            max_extent: T::lit(7.0e13),
            divergence_threshold: T::lit(1e-3),
            cusp_levels: 24,
        }
    }
}

type Rule = Arc<[(f64, f64)]>;

/// Nodes and weights on `[-1, 1]`, computed once per order.
fn legendre_rule(order: usize) -> Rule {
    static CACHE: OnceLock<Mutex<HashMap<usize, Rule>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut guard = cache.lock().expect("legendre cache poisoned");
    guard.entry(order).or_insert_with(|| compute_legendre(order).into()).clone()
}

/// Newton iteration on `P_n` from the Chebyshev-like initial guesses.
fn compute_legendre(n: usize) -> Vec<(f64, f64)> {
    let nf = n as f64;
    let mut rule = Vec::with_capacity(n);
    for i in 0..n {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            if n == 1 {
                p0 = 1.0;
            }
            dp = nf * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        rule.push((x, 2.0 / ((1.0 - x * x) * dp * dp)));
    }
    rule.reverse();
    rule
}

/// Running `ln Σ e^{v_i}`.
#[derive(Clone, Copy, Debug)]
struct LnSum<T> {
    max: T,
    scaled: T,
}

impl<T: Scalar> LnSum<T> {
    fn empty() -> Self {
        LnSum { max: T::neg_infinity(), scaled: T::zero() }
    }

    fn push(&mut self, lv: T) {
        if lv == T::neg_infinity() {
            return;
        }
        if lv > self.max {
            self.scaled = self.scaled * (self.max - lv).exp() + T::one();
            self.max = lv;
        } else {
            self.scaled = self.scaled + (lv - self.max).exp();
        }
    }

    fn merge(&mut self, other: &LnSum<T>) {
        if other.scaled == T::zero() {
            return;
        }
        self.push_scaled(other.max, other.scaled);
    }

    fn push_scaled(&mut self, max: T, scaled: T) {
        if max > self.max {
            self.scaled = self.scaled * (self.max - max).exp() + scaled;
            self.max = max;
        } else {
            self.scaled = self.scaled + scaled * (max - self.max).exp();
        }
    }

    fn ln(&self) -> T {
        if self.scaled == T::zero() {
            T::neg_infinity()
        } else {
            self.max + self.scaled.ln()
        }
    }
}

/// Integrand produced a non-finite log-value.
struct Blowup;

impl<T: Scalar> Quadrature<T> {
    pub fn panel_width(&self) -> T {
        T::LN_10() / T::from_usize_lossy(self.panels_per_decade)
    }

    /// Same rule at twice the panel density.
    pub fn refined(&self) -> Self {
        Quadrature { panels_per_decade: self.panels_per_decade * 2, ..self.clone() }
    }

    fn panel<F: Fn(T) -> T>(&self, f: &F, a: T, b: T, rule: &[(f64, f64)]) -> Result<LnSum<T>, Blowup> {
        let half = (b - a) / T::lit(2.0);
        let mid = (a + b) / T::lit(2.0);
        let mut acc = LnSum::empty();
        if half <= T::zero() {
            return Ok(acc);
        }
        let ln_half = half.ln();
        for &(node, w) in rule {
            let x = mid + half * T::lit(node);
            let lv = f(x);
            if lv.is_nan() || lv == T::infinity() {
                return Err(Blowup);
            }
            acc.push(lv + T::lit(w).ln() + ln_half);
        }
        Ok(acc)
    }

    /// Distances from an endpoint at which panel edges sit, up to `limit`.
    fn half_mesh(&self, limit: T, cusp: bool) -> (Vec<T>, usize) {
        let h = self.panel_width();
        let reach = self.uniform_reach.min(limit);
        let n_uniform = (reach / h).ceil().to_usize().unwrap_or(1).max(1);
        let step = reach / T::from_usize_lossy(n_uniform);
        let mut d = vec![T::zero()];
        if cusp {
            for j in (1..=self.cusp_levels).rev() {
                d.push(step * T::lit(0.5f64.powi(j as i32)));
            }
        }
        for i in 1..=n_uniform {
            d.push(step * T::from_usize_lossy(i));
        }
        let uniform_edges = d.len();
        let mut r = reach * T::lit(2.0);
        while r < limit {
            d.push(r);
            r = r * T::lit(2.0);
        }
        if *d.last().expect("non-empty mesh") < limit {
            d.push(limit);
        }
        (d, uniform_edges)
    }

    fn segment<F: Fn(T) -> T>(
        &self,
        f: &F,
        a: T,
        b: T,
        cusp_a: bool,
        cusp_b: bool,
        rule: &[(f64, f64)],
    ) -> Result<LnSum<T>, Blowup> {
        let len = b - a;
        let mut acc = LnSum::empty();
        if len <= T::zero() {
            return Ok(acc);
        }
        let half = len / T::lit(2.0);
        let edges: Vec<T> = if len <= T::lit(2.0) * self.uniform_reach && !cusp_a && !cusp_b {
            let n = (len / self.panel_width()).ceil().to_usize().unwrap_or(1).max(1);
            (0..=n)
                .map(|i| if i == n { b } else { a + len * T::from_usize_lossy(i) / T::from_usize_lossy(n) })
                .collect()
        } else {
            let (left, _) = self.half_mesh(half, cusp_a);
            let (right, _) = self.half_mesh(half, cusp_b);
            let mut e: Vec<T> = left.iter().map(|&d| a + d).collect();
            e.pop();
            e.push(a + half);
            e.extend(right.iter().rev().skip(1).map(|&d| b - d));
            let last = e.len() - 1;
            e[last] = b;
            e
        };
        for w in edges.windows(2) {
            acc.merge(&self.panel(f, w[0], w[1], rule)?);
        }
        Ok(acc)
    }

    /// Semi-infinite piece from `x0` in direction `dir` (`±1`), with
    /// convergence/divergence detection. `core` is the mass integrated so far.
    fn tail<F: Fn(T) -> T>(
        &self,
        f: &F,
        x0: T,
        dir: T,
        cusp: bool,
        core: &LnSum<T>,
        rule: &[(f64, f64)],
    ) -> Result<LnSum<T>, Blowup> {
        let (dist, uniform_edges) = self.half_mesh(self.max_extent, cusp);
        let tiny = T::lit(1e-17).ln();
        let mut acc = LnSum::empty();
        let mut far: Vec<T> = Vec::new();
        let mut small_run = 0usize;
        for (i, w) in dist.windows(2).enumerate() {
            let (p, q) = if dir > T::zero() { (x0 + w[0], x0 + w[1]) } else { (x0 - w[1], x0 - w[0]) };
            let c = self.panel(f, p, q, rule)?;
            acc.merge(&c);
            let c_ln = c.ln();
            if i + 1 >= uniform_edges {
                far.push(c_ln);
            }
            let mut total = *core;
            total.merge(&acc);
            if w[1] >= T::lit(2.0) && c_ln - total.ln() < tiny {
                small_run += 1;
                if small_run >= 2 {
                    return Ok(acc);
                }
            } else {
                small_run = 0;
            }
        }
        // The sweep reached max_extent without the integrand dying out.
        if far.len() < 2 {
            return Err(Blowup);
        }
        let last = far[far.len() - 1];
        let prev = far[far.len() - 2];
        if last == T::neg_infinity() {
            return Ok(acc);
        }
        let ln_r = last - prev;
        if !(ln_r < T::zero()) {
            return Err(Blowup);
        }
        let r = ln_r.exp();
        let ln_rest = last + (r / (T::one() - r)).ln();
        let mut total = *core;
        total.merge(&acc);
        if ln_rest - total.ln() > self.divergence_threshold.ln() {
            return Err(Blowup);
        }
        acc.push(ln_rest);
        Ok(acc)
    }

    /// `ln ∫_lo^hi e^{ln_f(x)} dx`; `lo`/`hi` may be infinite.
    ///
    /// Returns `-∞` for a zero integral and `+∞` on divergence.
    pub fn ln_integral<F: Fn(T) -> T>(&self, ln_f: F, lo: T, hi: T, kinks: &[Kink<T>]) -> T {
        if !(lo < hi) {
            return T::neg_infinity();
        }
        let rule = legendre_rule(self.order);
        let inside: Vec<Kink<T>> = kinks.iter().copied().filter(|k| k.x >= lo && k.x <= hi).collect();
        let mut points: Vec<Kink<T>> = Vec::new();
        if lo.is_finite() {
            points.push(Kink::at(lo));
        }
        points.extend(inside);
        if hi.is_finite() {
            points.push(Kink::at(hi));
        }
        let mut points = merge_kinks(points);
        if points.is_empty() {
            points.push(Kink::at(T::zero()));
        }
        let run = || -> Result<LnSum<T>, Blowup> {
            let mut total = LnSum::empty();
            for w in points.windows(2) {
                total.merge(&self.segment(&ln_f, w[0].x, w[1].x, w[0].cusp, w[1].cusp, &rule)?);
            }
            if lo == T::neg_infinity() {
                let first = points[0];
                let t = self.tail(&ln_f, first.x, -T::one(), first.cusp, &total, &rule)?;
                total.merge(&t);
            }
            if hi == T::infinity() {
                let last = points[points.len() - 1];
                let t = self.tail(&ln_f, last.x, T::one(), last.cusp, &total, &rule)?;
                total.merge(&t);
            }
            Ok(total)
        };
        match run() {
            Ok(total) => total.ln(),
            Err(Blowup) => T::infinity(),
        }
    }

    /// `∫_lo^hi e^{ln_f(x)} dx` as a plain value (`+∞` on divergence).
    pub fn integral<F: Fn(T) -> T>(&self, ln_f: F, lo: T, hi: T, kinks: &[Kink<T>]) -> T {
        self.ln_integral(ln_f, lo, hi, kinks).exp()
    }

    /// Cumulative integrals at the sorted points `xs`.
    ///
    /// `from_left`: `ln ∫_{-∞}^{x_k}`; otherwise `ln ∫_{x_k}^{∞}`. Segments between
    /// consecutive points are independent and evaluated in parallel.
    pub fn ln_cumulative<F>(&self, ln_f: F, xs: &[T], kinks: &[Kink<T>], from_left: bool) -> Vec<T>
    where
        F: Fn(T) -> T + Sync,
    {
        use rayon::prelude::*;
        if xs.is_empty() {
            return Vec::new();
        }
        let n = xs.len();
        let pieces: Vec<T> = (0..=n)
            .into_par_iter()
            .map(|i| match (from_left, i) {
                (true, 0) => self.ln_integral(&ln_f, T::neg_infinity(), xs[0], kinks),
                (true, i) if i < n => self.ln_integral(&ln_f, xs[i - 1], xs[i], kinks),
                (false, i) if i == n => self.ln_integral(&ln_f, xs[n - 1], T::infinity(), kinks),
                (false, i) if i < n - 1 => self.ln_integral(&ln_f, xs[i], xs[i + 1], kinks),
                _ => T::neg_infinity(),
            })
            .collect();
        let mut out = vec![T::neg_infinity(); n];
        if from_left {
            let mut acc = T::neg_infinity();
            for i in 0..n {
                acc = ln_add(acc, pieces[i]);
                out[i] = acc;
            }
        } else {
            let mut acc = pieces[n];
            out[n - 1] = acc;
            for i in (0..n - 1).rev() {
                acc = ln_add(acc, pieces[i]);
                out[i] = acc;
            }
        }
        out
    }

    /// `ln sup` of `e^{ln_f}` over `[lo, hi]`, sampled at `candidates` (clipped to
    /// the interval), kinks, finite endpoints, and geometric probes towards any
    /// infinite end. Growth between the two outermost probes beyond the
    /// divergence threshold reports `+∞`.
    pub fn ln_sup<F: Fn(T) -> T>(&self, ln_f: F, lo: T, hi: T, candidates: &[T], kinks: &[Kink<T>]) -> T {
        if !(lo <= hi) {
            return T::neg_infinity();
        }
        let mut xs: Vec<T> = candidates.iter().copied().filter(|&x| x >= lo && x <= hi).collect();
        xs.extend(kinks.iter().map(|k| k.x).filter(|&x| x >= lo && x <= hi));
        if lo.is_finite() {
            xs.push(lo);
        }
        if hi.is_finite() {
            xs.push(hi);
        }
        let mut best = T::neg_infinity();
        for &x in &xs {
            let v = ln_f(x);
            if v.is_nan() {
                return T::infinity();
            }
            best = best.max(v);
        }
        let anchor_lo = xs.iter().copied().fold(T::infinity(), T::min);
        let anchor_hi = xs.iter().copied().fold(T::neg_infinity(), T::max);
        let anchor_lo = if anchor_lo.is_finite() { anchor_lo } else { T::zero() };
        let anchor_hi = if anchor_hi.is_finite() { anchor_hi } else { T::zero() };
        let grow = (T::one() + self.divergence_threshold).ln();
        for (infinite, anchor, dir) in [(lo == T::neg_infinity(), anchor_lo, -T::one()), (hi == T::infinity(), anchor_hi, T::one())] {
            if !infinite {
                continue;
            }
            let mut d = T::lit(0.25);
            let mut probes = Vec::new();
            while d <= self.max_extent {
                let v = ln_f(anchor + dir * d);
                if v.is_nan() || v == T::infinity() {
                    return T::infinity();
                }
                probes.push(v);
                best = best.max(v);
                d = d * T::lit(2.0);
            }
            let k = probes.len();
            if k >= 2 && probes[k - 1] - probes[k - 2] > grow && probes[k - 1] > T::neg_infinity() {
                return T::infinity();
            }
        }
        best
    }
}
