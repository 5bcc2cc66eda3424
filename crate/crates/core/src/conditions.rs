//! The canonical weight `ρ` and grid checks of the separation conditions.
//!
//! Every check produces per-`t` rows `(t, lhs, rhs, lhs/rhs)`; a check passes
//! when the ratio stays below the budget at every grid point.

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::{invalid, Error, Result};
use crate::grid::LogGrid;
use crate::phi::{Exponent, PhiParam};
use crate::quadrature::{merge_kinks, Quadrature};
use crate::report::{fmt_num, json_num};
use crate::scalar::{ln_add, Scalar};
use crate::sv::SvDescriptor;

pub const DEFAULT_BUDGET: f64 = 64.0;
/// Largest relative change of a nested-quadrature check under mesh refinement.
pub const CONVERGENCE_TOL: f64 = 1e-2;

/// Condition families a scenario may request.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Check {
    C1,
    C2,
    C3,
    C4,
    #[serde(rename = "SV_sufficient")]
    SvSufficient,
}

impl FromStr for Check {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "C1" => Ok(Check::C1),
            "C2" => Ok(Check::C2),
            "C3" => Ok(Check::C3),
            "C4" => Ok(Check::C4),
            "SV_sufficient" => Ok(Check::SvSufficient),
            other => Err(invalid(format!("unknown check {other:?}; expected C1, C2, C3, C4 or SV_sufficient"))),
        }
    }
}

/// Identifier of a single report.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ConditionId {
    #[serde(rename = "C1_lower")]
    C1Lower,
    #[serde(rename = "C1_upper")]
    C1Upper,
    C2,
    C3,
    C4,
    #[serde(rename = "SV_sufficient")]
    SvSufficient,
}

impl ConditionId {
    pub fn name(self) -> &'static str {
        match self {
            ConditionId::C1Lower => "C1_lower",
            ConditionId::C1Upper => "C1_upper",
            ConditionId::C2 => "C2",
            ConditionId::C3 => "C3",
            ConditionId::C4 => "C4",
            ConditionId::SvSufficient => "SV_sufficient",
        }
    }
}

impl fmt::Display for ConditionId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// `ρ` sampled on a grid, stored as logarithms.
#[derive(Clone, Debug, PartialEq)]
pub struct RhoTable<T: Scalar> {
    grid: LogGrid<T>,
    xs: Vec<T>,
    ln_rho: Vec<T>,
}

impl<T: Scalar> RhoTable<T> {
    /// `ρ(t) = ‖min(u,t)‖_{Φ0} / ‖min(u,t)‖_{Φ1}`.
    pub fn canonical(p0: &PhiParam<T>, p1: &PhiParam<T>, grid: &LogGrid<T>) -> Result<Self> {
        p0.require_membership()?;
        p1.require_membership()?;
        let xs = grid.log_points();
        let ln_rho: Vec<T> = xs.par_iter().map(|&x| p0.ln_norm_min(x) - p1.ln_norm_min(x)).collect();
        if let Some(i) = ln_rho.iter().position(|v| !v.is_finite()) {
            return Err(Error::Membership(format!("‖min(u, t)‖ is not finite at t = {}", xs[i].exp())));
        }
        Ok(RhoTable { grid: grid.clone(), xs, ln_rho })
    }

    /// Arbitrary weight, given as `t ↦ ρ(t)`.
    pub fn from_fn(grid: &LogGrid<T>, rho: impl Fn(T) -> T) -> Result<Self> {
        let xs = grid.log_points();
        let ln_rho: Vec<T> = grid.points().into_iter().map(|t| rho(t).ln()).collect();
        if ln_rho.iter().any(|v| !v.is_finite()) {
            return Err(invalid("ρ must be positive and finite on the grid"));
        }
        Ok(RhoTable { grid: grid.clone(), xs, ln_rho })
    }

    /// `t^r ρ(t)`.
    pub fn times_power(&self, r: T) -> Self {
        let ln_rho = self.xs.iter().zip(&self.ln_rho).map(|(&x, &l)| l + r * x).collect();
        RhoTable { ln_rho, ..self.clone() }
    }

    /// `1 / ρ(1/t)`, on the reflected grid.
    pub fn mirrored(&self) -> Self {
        let grid = LogGrid::new(self.grid.t_max().recip(), self.grid.t_min().recip(), self.grid.points_per_decade())
            .expect("reflected grid is valid");
        let xs = self.xs.iter().rev().map(|&x| -x).collect();
        let ln_rho = self.ln_rho.iter().rev().map(|&l| -l).collect();
        RhoTable { grid, xs, ln_rho }
    }

    pub fn grid(&self) -> &LogGrid<T> {
        &self.grid
    }

    pub fn log_points(&self) -> &[T] {
        &self.xs
    }

    pub fn ln_values(&self) -> &[T] {
        &self.ln_rho
    }

    pub fn values(&self) -> Vec<T> {
        self.ln_rho.iter().map(|l| l.exp()).collect()
    }
}

/// `ρ(t)` at a single point.
pub fn rho_canonical<T: Scalar>(p0: &PhiParam<T>, p1: &PhiParam<T>, t: T) -> Result<T> {
    Ok(p0.norm_min(t)? / p1.norm_min(t)?)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(bound = "")]
pub struct ConditionRow<T: Scalar> {
    pub t: T,
    pub lhs: T,
    pub rhs: T,
    pub ratio: T,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConditionReport<T: Scalar> {
    pub id: ConditionId,
    pub grid: LogGrid<T>,
    pub rows: Vec<ConditionRow<T>>,
    pub sup_ratio: T,
    pub budget: T,
    /// Nested-quadrature results stable under mesh refinement.
    pub converged: bool,
    pub passed: bool,
}

impl<T: Scalar> ConditionReport<T> {
    fn from_logs(id: ConditionId, grid: &LogGrid<T>, xs: &[T], ln_lhs: &[T], ln_rhs: &[T], budget: T) -> Self {
        debug_assert_eq!(xs.len(), grid.len());
        let rows: Vec<ConditionRow<T>> = grid
            .points()
            .into_iter()
            .zip(ln_lhs.iter().zip(ln_rhs))
            .map(|(t, (&a, &b))| ConditionRow { t, lhs: a.exp(), rhs: b.exp(), ratio: ln_ratio(a, b).exp() })
            .collect();
        let sup_ratio = rows.iter().map(|r| r.ratio).fold(T::neg_infinity(), |m, v| if v.is_nan() { v } else { m.max(v) });
        ConditionReport { id, grid: grid.clone(), rows, sup_ratio, budget, converged: true, passed: false }.settle()
    }

    fn settle(mut self) -> Self {
        self.passed = self.converged && self.sup_ratio.is_finite() && self.sup_ratio <= self.budget;
        self
    }

    pub fn write_csv<W: Write>(&self, w: W) -> std::io::Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["t", "lhs", "rhs", "ratio"])?;
        for r in &self.rows {
            out.write_record([fmt_num(r.t), fmt_num(r.lhs), fmt_num(r.rhs), fmt_num(r.ratio)])?;
        }
        out.flush()
    }

    pub fn summary_json(&self) -> Value {
        json!({
            "condition": self.id.name(),
            "sup_ratio": json_num(self.sup_ratio),
            "budget": json_num(self.budget),
            "converged": self.converged,
            "verdict": if self.passed { "pass" } else { "fail" },
            "grid": grid_json(&self.grid),
        })
    }
}

pub fn grid_json<T: Scalar>(g: &LogGrid<T>) -> Value {
    json!({
        "t_min": json_num(g.t_min()),
        "t_max": json_num(g.t_max()),
        "points_per_decade": g.points_per_decade(),
    })
}

/// `ln(e^a / e^b)` with `0/x = 0` and `x/0 = ∞`.
fn ln_ratio<T: Scalar>(a: T, b: T) -> T {
    if a == T::neg_infinity() {
        T::neg_infinity()
    } else if b == T::neg_infinity() || a == T::infinity() {
        T::infinity()
    } else {
        a - b
    }
}

fn memberships<T: Scalar>(p0: &PhiParam<T>, p1: &PhiParam<T>) -> Result<()> {
    p0.require_membership()?;
    p1.require_membership()
}

/// Both inequalities of (C1): `t‖χ_(t,∞)‖_{Φ0} / ‖min(u,t)‖_{Φ1} ≲ ρ(t)` and
/// `ρ(t) ≲ ‖min(u,t)‖_{Φ0} / ‖u χ_(0,t)‖_{Φ1}`.
pub fn check_c1<T: Scalar>(
    p0: &PhiParam<T>,
    p1: &PhiParam<T>,
    rho: &RhoTable<T>,
    budget: T,
) -> Result<(ConditionReport<T>, ConditionReport<T>)> {
    memberships(p0, p1)?;
    let xs = rho.log_points();
    let parts: Vec<(T, T, T, T)> = xs
        .par_iter()
        .map(|&x| (p0.ln_norm_tail_char(x), p1.ln_norm_min(x), p0.ln_norm_min(x), p1.ln_norm_head_u(x)))
        .collect();
    let lower_lhs: Vec<T> = xs.iter().zip(&parts).map(|(&x, p)| x + p.0 - p.1).collect();
    let upper_rhs: Vec<T> = parts.iter().map(|p| p.2 - p.3).collect();
    let lower = ConditionReport::from_logs(ConditionId::C1Lower, rho.grid(), xs, &lower_lhs, rho.ln_values(), budget);
    let upper = ConditionReport::from_logs(ConditionId::C1Upper, rho.grid(), xs, rho.ln_values(), &upper_rhs, budget);
    Ok((lower, upper))
}

/// `ln ‖χ_side(u) · u / ‖min(s,u)‖_{inner}‖_{outer}` at every grid point.
fn nested_profile<T: Scalar>(outer: &PhiParam<T>, inner: &PhiParam<T>, xs: &[T], head: bool) -> Vec<T> {
    let f = |y: T| outer.ln_weight(y) + y - inner.ln_norm_min(y);
    let mut kinks = outer.b().kinks();
    kinks.extend(inner.b().kinks());
    let kinks = merge_kinks(kinks);
    let quad = outer.quadrature();
    match outer.q() {
        Exponent::Finite(q) => {
            quad.ln_cumulative(|y| q * f(y), xs, &kinks, head).into_iter().map(|v| v / q).collect()
        }
        Exponent::Infinite => xs
            .par_iter()
            .map(|&x| {
                let (lo, hi) = if head { (T::neg_infinity(), x) } else { (x, T::infinity()) };
                quad.ln_sup(f, lo, hi, xs, &kinks)
            })
            .collect(),
    }
}

fn stable<T: Scalar>(coarse: &[T], fine: &[T]) -> bool {
    coarse.iter().zip(fine).all(|(&a, &b)| {
        if a.is_finite() && b.is_finite() {
            ((a - b).exp() - T::one()).abs() < T::lit(CONVERGENCE_TOL)
        } else {
            a == b
        }
    })
}

fn nested_check<T: Scalar>(
    id: ConditionId,
    p0: &PhiParam<T>,
    p1: &PhiParam<T>,
    rho: &RhoTable<T>,
    budget: T,
) -> Result<ConditionReport<T>> {
    memberships(p0, p1)?;
    let xs = rho.log_points();
    let run = |a: &PhiParam<T>, b: &PhiParam<T>| match id {
        ConditionId::C2 => nested_profile(a, b, xs, true),
        _ => nested_profile(b, a, xs, false),
    };
    let lhs = run(p0, p1);
    let fine = run(&p0.refined(), &p1.refined());
    let target: Vec<T> = match id {
        ConditionId::C2 => rho.ln_values().to_vec(),
        _ => rho.ln_values().iter().map(|&l| -l).collect(),
    };
    let mut report = ConditionReport::from_logs(id, rho.grid(), xs, &lhs, &target, budget);
    report.converged = stable(&lhs, &fine);
    Ok(report.settle())
}

/// (C2): `‖χ_(0,t)(u) u / ‖min(s,u)‖_{Φ1}‖_{Φ0} ≲ ρ(t)`.
pub fn check_c2<T: Scalar>(p0: &PhiParam<T>, p1: &PhiParam<T>, rho: &RhoTable<T>, budget: T) -> Result<ConditionReport<T>> {
    nested_check(ConditionId::C2, p0, p1, rho, budget)
}

/// (C3): `‖χ_(t,∞)(u) u / ‖min(s,u)‖_{Φ0}‖_{Φ1} ≲ 1/ρ(t)`.
pub fn check_c3<T: Scalar>(p0: &PhiParam<T>, p1: &PhiParam<T>, rho: &RhoTable<T>, budget: T) -> Result<ConditionReport<T>> {
    nested_check(ConditionId::C3, p0, p1, rho, budget)
}

/// (C4): `t‖χ_(t,∞)‖_{Φ0} ≲ ‖u χ_(0,t)‖_{Φ0} + t ρ(t) ‖χ_(t,∞)‖_{Φ1}`.
pub fn check_c4<T: Scalar>(p0: &PhiParam<T>, p1: &PhiParam<T>, rho: &RhoTable<T>, budget: T) -> Result<ConditionReport<T>> {
    memberships(p0, p1)?;
    let xs = rho.log_points();
    let sides: Vec<(T, T)> = xs
        .par_iter()
        .zip(rho.ln_values())
        .map(|(&x, &lr)| {
            let lhs = x + p0.ln_norm_tail_char(x);
            let rhs = ln_add(p0.ln_norm_head_u(x), x + lr + p1.ln_norm_tail_char(x));
            (lhs, rhs)
        })
        .collect();
    let (lhs, rhs): (Vec<T>, Vec<T>) = sides.into_iter().unzip();
    Ok(ConditionReport::from_logs(ConditionId::C4, rho.grid(), xs, &lhs, &rhs, budget))
}

/// Monotonicity test of `h(t) = B̃0(t)^{(1+ε)/q0} / B̃1(t)^{1/q1}` with
/// `B̃j(t) = ∫_t^∞ bj^{qj} ds/s`: rows compare the running maximum of `h`
/// (lhs) with `h` (rhs).
#[allow(clippy::too_many_arguments)]
pub fn check_sv_sufficient<T: Scalar>(
    b0: &SvDescriptor<T>,
    q0: T,
    b1: &SvDescriptor<T>,
    q1: T,
    eps: T,
    grid: &LogGrid<T>,
    budget: T,
    quad: &Quadrature<T>,
) -> Result<ConditionReport<T>> {
    if !(q0 > T::zero() && q0.is_finite() && q1 > T::zero() && q1.is_finite()) {
        return Err(invalid("the sufficient condition needs finite positive q0, q1"));
    }
    if !(eps > T::zero()) {
        return Err(invalid(format!("ε must be positive, got {eps}")));
    }
    let xs = grid.log_points();
    let tail = |b: &SvDescriptor<T>, q: T| -> Result<Vec<T>> {
        let v = quad.ln_cumulative(|y| q * b.ln_at(y), &xs, &b.kinks(), false);
        if v.iter().any(|l| !l.is_finite()) {
            return Err(Error::Divergent("∫_t^∞ b^q ds/s".into()));
        }
        Ok(v)
    };
    let l0 = tail(b0, q0)?;
    let l1 = tail(b1, q1)?;
    let ln_h: Vec<T> = l0.iter().zip(&l1).map(|(&a, &b)| (T::one() + eps) / q0 * a - b / q1).collect();
    let mut env = Vec::with_capacity(ln_h.len());
    let mut m = T::neg_infinity();
    for &v in &ln_h {
        m = m.max(v);
        env.push(m);
    }
    Ok(ConditionReport::from_logs(ConditionId::SvSufficient, grid, &xs, &env, &ln_h, budget))
}

#[cfg(test)]
mod tests {
    use super::*;

    type Phi = PhiParam<f64>;
    type Sv = SvDescriptor<f64>;

    fn phi(theta: f64, b: Sv) -> Phi {
        Phi::new(theta, Exponent::Finite(1.0), b).unwrap()
    }

    fn grid() -> LogGrid<f64> {
        LogGrid::new(1e-4, 1e4, 4).unwrap()
    }

    fn classical() -> (Phi, Phi, RhoTable<f64>) {
        let (p0, p1) = (phi(0.25, Sv::one()), phi(0.75, Sv::one()));
        let rho = RhoTable::canonical(&p0, &p1, &grid()).unwrap();
        (p0, p1, rho)
    }

    fn constant_ratio(r: &ConditionReport<f64>, expected: f64, tol: f64) {
        for row in &r.rows {
            assert!((row.ratio - expected).abs() < tol, "{} at t={}: {}", r.id, row.t, row.ratio);
        }
    }

    #[test]
    fn canonical_rho_is_square_root() {
        let (_, _, rho) = classical();
        for (t, r) in grid().points().into_iter().zip(rho.values()) {
            assert!((r / t.sqrt() - 1.0).abs() < 1e-13);
        }
        let p = phi(0.4, Sv::broken_log(1.0, -1.0));
        let same = RhoTable::canonical(&p, &p, &grid()).unwrap();
        assert!(same.values().iter().all(|&v| v == 1.0));
    }

    #[test]
    fn classical_pair_constants() {
        let (p0, p1, rho) = classical();
        let (lo, up) = check_c1(&p0, &p1, &rho, 64.0).unwrap();
        constant_ratio(&lo, 0.75, 1e-12);
        constant_ratio(&up, 0.75, 1e-12);
        let c2 = check_c2(&p0, &p1, &rho, 64.0).unwrap();
        constant_ratio(&c2, 0.375, 1e-6);
        assert!(c2.passed && c2.converged);
        let c3 = check_c3(&p0, &p1, &rho, 64.0).unwrap();
        constant_ratio(&c3, 0.375, 1e-6);
        let c4 = check_c4(&p0, &p1, &rho, 64.0).unwrap();
        constant_ratio(&c4, 1.5, 1e-12);
        assert!(lo.passed && up.passed && c3.passed && c4.passed);
    }

    #[test]
    fn inflated_rho_breaks_c1_upper() {
        let (p0, p1, rho) = classical();
        let (_, up) = check_c1(&p0, &p1, &rho.times_power(0.5), 64.0).unwrap();
        assert!(!up.passed);
        assert!((up.rows.last().unwrap().ratio - 75.0).abs() < 1e-9);
    }

    #[test]
    fn identical_parameters_fail_c2() {
        let p = phi(0.5, Sv::one());
        let rho = RhoTable::canonical(&p, &p, &grid()).unwrap();
        let (lo, up) = check_c1(&p, &p, &rho, 64.0).unwrap();
        assert!(lo.sup_ratio <= 1.0 && up.sup_ratio <= 1.0);
        let c2 = check_c2(&p, &p, &rho, 64.0).unwrap();
        assert!(!c2.passed);
        assert_eq!(c2.sup_ratio, f64::INFINITY);
    }

    #[test]
    fn swapped_exponents_fail_c3() {
        let (p0, p1) = (phi(0.75, Sv::one()), phi(0.25, Sv::one()));
        let rho = RhoTable::canonical(&p0, &p1, &grid()).unwrap();
        assert!(!check_c3(&p0, &p1, &rho, 64.0).unwrap().passed);
    }

    #[test]
    fn non_members_are_rejected() {
        let p0 = phi(0.0, Sv::one());
        let p1 = phi(0.5, Sv::one());
        let rho = RhoTable::from_fn(&grid(), |_| 1.0).unwrap();
        assert!(matches!(check_c4(&p0, &p1, &rho, 64.0), Err(Error::Membership(_))));
        assert!(RhoTable::canonical(&p0, &p1, &grid()).is_err());
    }

    #[test]
    fn sufficient_condition_constant_case() {
        // (1+ε)/q0 = 1/q1 and b0^{q0} = b1^{q1}: h is constant.
        let b = Sv::broken_log(-2.0, -2.0);
        let q = Quadrature::default();
        let b0 = Sv::power(b.clone(), 1.0 / 1.1);
        let r = check_sv_sufficient(&b0, 1.1, &b, 1.0, 0.1, &grid(), 64.0, &q).unwrap();
        assert!(r.passed);
        assert!(r.sup_ratio < 1.0 + 1e-9);
        // equal parameters: h = B̃^ε is decreasing, with no equivalent nondecreasing function
        let r = check_sv_sufficient(&b, 1.0, &b, 1.0, 0.1, &LogGrid::default(), 1.2, &q).unwrap();
        assert!(!r.passed);
        assert!(matches!(
            check_sv_sufficient(&Sv::one(), 1.0, &b, 1.0, 0.1, &grid(), 64.0, &q),
            Err(Error::Divergent(_))
        ));
    }

    #[test]
    fn check_names_parse() {
        assert_eq!("C2".parse::<Check>().unwrap(), Check::C2);
        assert_eq!(" SV_sufficient".parse::<Check>().unwrap(), Check::SvSufficient);
        assert!("C5".parse::<Check>().is_err());
        let v: Vec<Check> = serde_json::from_str(r#"["C1","SV_sufficient"]"#).unwrap();
        assert_eq!(v, vec![Check::C1, Check::SvSufficient]);
    }

    #[test]
    fn csv_and_summary() {
        let (p0, p1, rho) = classical();
        let c4 = check_c4(&p0, &p1, &rho, 64.0).unwrap();
        let mut buf = Vec::new();
        c4.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("t,lhs,rhs,ratio\n"));
        assert_eq!(text.lines().count(), grid().len() + 1);
        let s = c4.summary_json();
        assert_eq!(s["condition"], "C4");
        assert_eq!(s["verdict"], "pass");
    }
}
