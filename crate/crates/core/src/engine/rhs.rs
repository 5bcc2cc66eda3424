//! Right-hand sides of the two-sided estimates.

use serde::{Deserialize, Serialize};

use crate::couples::LogProfile;
use crate::error::{invalid, Result};
use crate::phi::{Exponent, PhiParam, Side};
use crate::scalar::Scalar;
use crate::sv::SvDescriptor;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    /// Four terms.
    Lemma,
    /// Three terms.
    ThmI,
    /// Two terms.
    ThmIi,
    /// Power-weight formula with `t^{θ1-θ0}` in place of `ρ`.
    Classical,
}

impl Variant {
    pub fn name(self) -> &'static str {
        match self {
            Variant::Lemma => "lemma",
            Variant::ThmI => "thm_i",
            Variant::ThmIi => "thm_ii",
            Variant::Classical => "classical",
        }
    }
}

impl std::str::FromStr for Variant {
    type Err = crate::Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "lemma" => Ok(Variant::Lemma),
            "thm_i" => Ok(Variant::ThmI),
            "thm_ii" => Ok(Variant::ThmIi),
            "classical" => Ok(Variant::Classical),
            other => Err(invalid(format!("unknown variant {other:?}; expected lemma, thm_i, thm_ii or classical"))),
        }
    }
}

/// The four nonnegative terms at one `t`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RhsTerms<T> {
    /// `‖χ_(0,t) K‖_{Φ0}`
    pub head_k0: T,
    /// `ρ(t) ‖χ_(t,∞) K‖_{Φ1}`
    pub tail_k1: T,
    /// `‖χ_(t,∞)‖_{Φ0} K(t)`
    pub tail_char0: T,
    /// `ρ(t) ‖u χ_(0,t)‖_{Φ1} K(t)/t`
    pub head_u1: T,
}

impl<T: Scalar> RhsTerms<T> {
    pub fn compute<P: LogProfile<T> + ?Sized>(p0: &PhiParam<T>, p1: &PhiParam<T>, rho_t: T, k: &P, t: T) -> Self {
        let x = t.ln();
        let ln_k = k.ln_value(x);
        let ln_rho = rho_t.ln();
        let term = |v: T| v.exp();
        let product = |a: T, b: T| if a == T::neg_infinity() || b == T::neg_infinity() { T::zero() } else { (a + b).exp() };
        RhsTerms {
            head_k0: term(p0.ln_norm_trunc_profile(k, Side::Head, x)),
            tail_k1: product(ln_rho, p1.ln_norm_trunc_profile(k, Side::Tail, x)),
            tail_char0: product(p0.ln_norm_tail_char(x), ln_k),
            head_u1: product(ln_rho + p1.ln_norm_head_u(x) - x, ln_k),
        }
    }

    /// Two-term sum.
    pub fn thm_ii(&self) -> T {
        self.head_k0 + self.tail_k1
    }

    /// `thm_ii` plus the tail-indicator term; never below `thm_ii`.
    pub fn thm_i(&self) -> T {
        self.thm_ii() + self.tail_char0
    }

    /// `thm_i` plus the head term; never below `thm_i`.
    pub fn lemma(&self) -> T {
        self.thm_i() + self.head_u1
    }
}

pub fn rhs_lemma<T: Scalar, P: LogProfile<T> + ?Sized>(p0: &PhiParam<T>, p1: &PhiParam<T>, rho_t: T, k: &P, t: T) -> T {
    RhsTerms::compute(p0, p1, rho_t, k, t).lemma()
}

pub fn rhs_thm_i<T: Scalar, P: LogProfile<T> + ?Sized>(p0: &PhiParam<T>, p1: &PhiParam<T>, rho_t: T, k: &P, t: T) -> T {
    RhsTerms::compute(p0, p1, rho_t, k, t).thm_i()
}

pub fn rhs_thm_ii<T: Scalar, P: LogProfile<T> + ?Sized>(p0: &PhiParam<T>, p1: &PhiParam<T>, rho_t: T, k: &P, t: T) -> T {
    RhsTerms::compute(p0, p1, rho_t, k, t).thm_ii()
}

/// `‖u^{-θ0-1/q0} K‖_{L^{q0}(0,t)} + t^{θ1-θ0} ‖u^{-θ1-1/q1} K‖_{L^{q1}(t,∞)}`,
/// defined for `0 < θ0 < θ1 < 1`.
pub fn classical_rhs<T: Scalar, P: LogProfile<T> + ?Sized>(
    theta0: T,
    q0: Exponent<T>,
    theta1: T,
    q1: Exponent<T>,
    k: &P,
    t: T,
) -> Result<T> {
    if !(T::zero() < theta0 && theta0 < theta1 && theta1 < T::one()) {
        return Err(invalid(format!("the classical formula needs 0 < θ0 < θ1 < 1, got θ0 = {theta0}, θ1 = {theta1}")));
    }
    let p0 = PhiParam::new(theta0, q0, SvDescriptor::one())?;
    let p1 = PhiParam::new(theta1, q1, SvDescriptor::one())?;
    Ok(RhsTerms::compute(&p0, &p1, t.powf(theta1 - theta0), k, t).thm_ii())
}
