//! Slowly varying functions built from a small closed set of operations.

mod envelope;
mod integrals;

pub use envelope::{check_envelope_samples, check_sv_envelope, EnvelopeReport};
pub use integrals::{integral_b, integral_b_tilde, power_integral_lower, power_integral_upper};

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::quadrature::{merge_kinks, Kink, Quadrature};
use crate::scalar::Scalar;

/// A slowly varying function on `(0, ∞)`.
///
/// Numerical routines use `ln_at`, which works in `x = ln t` and returns
/// `ln b(e^x)`. `eval` composes products and powers in value space.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SvRepr<T>", into = "SvRepr<T>", bound = "")]
pub struct SvDescriptor<T: Scalar> {
    node: Node<T>,
}

#[derive(Clone, Debug, PartialEq)]
enum Node<T: Scalar> {
    Constant(T),
    /// `(1 - ln t)^{a0}` on `(0, 1]`, `(1 + ln t)^{a_inf}` on `(1, ∞)`.
    BrokenLog { a0: T, a_inf: T },
    /// `exp(sign · |ln t|^alpha)`.
    ExpLogPow { alpha: T, sign: i8 },
    Product(Box<SvDescriptor<T>>, Box<SvDescriptor<T>>),
    Power(Box<SvDescriptor<T>>, T),
    /// `∫_0^t b(s) ds/s`.
    PrimitiveB(Box<SvDescriptor<T>>),
    /// `∫_t^∞ b(s) ds/s`.
    PrimitiveBTilde(Box<SvDescriptor<T>>),
}

impl<T: Scalar> SvDescriptor<T> {
    pub fn constant(c: T) -> Result<Self> {
        if !(c > T::zero() && c.is_finite()) {
            return Err(invalid(format!("constant weight must be positive and finite, got {c}")));
        }
        Ok(Self { node: Node::Constant(c) })
    }

    pub fn one() -> Self {
        Self { node: Node::Constant(T::one()) }
    }

    pub fn broken_log(a0: T, a_inf: T) -> Self {
        Self { node: Node::BrokenLog { a0, a_inf } }
    }

    pub fn exp_log_pow(alpha: T, sign: i8) -> Result<Self> {
        if !(alpha > T::zero() && alpha < T::one()) {
            return Err(invalid(format!("exp|ln t|^alpha needs alpha in (0, 1), got {alpha}")));
        }
        if sign != 1 && sign != -1 {
            return Err(invalid(format!("sign must be +1 or -1, got {sign}")));
        }
        Ok(Self { node: Node::ExpLogPow { alpha, sign } })
    }

    pub fn product(left: Self, right: Self) -> Self {
        Self { node: Node::Product(Box::new(left), Box::new(right)) }
    }

    pub fn power(base: Self, r: T) -> Self {
        Self { node: Node::Power(Box::new(base), r) }
    }

    /// `B(t) = ∫_0^t b(s) ds/s`; fails when `∫_0^1 b(s) ds/s` diverges.
    pub fn primitive_b(base: Self) -> Result<Self> {
        let q = Quadrature::default();
        let kinks = base.kinks();
        let v = q.ln_integral(|x| base.ln_at(x), T::neg_infinity(), T::zero(), &kinks);
        if !v.is_finite() {
            return Err(Error::Divergent("∫_0^1 b(s) ds/s".into()));
        }
        Ok(Self { node: Node::PrimitiveB(Box::new(base)) })
    }

    /// `B̃(t) = ∫_t^∞ b(s) ds/s`; fails when `∫_1^∞ b(s) ds/s` diverges.
    pub fn primitive_b_tilde(base: Self) -> Result<Self> {
        let q = Quadrature::default();
        let kinks = base.kinks();
        let v = q.ln_integral(|x| base.ln_at(x), T::zero(), T::infinity(), &kinks);
        if !v.is_finite() {
            return Err(Error::Divergent("∫_1^∞ b(s) ds/s".into()));
        }
        Ok(Self { node: Node::PrimitiveBTilde(Box::new(base)) })
    }

    /// `ln b(e^x)`.
    pub fn ln_at(&self, x: T) -> T {
        match &self.node {
            Node::Constant(c) => c.ln(),
            Node::BrokenLog { a0, a_inf } => {
                let (a, y) = if x <= T::zero() { (*a0, -x) } else { (*a_inf, x) };
                if a == T::zero() {
                    T::zero()
                } else {
                    a * y.ln_1p()
                }
            }
            Node::ExpLogPow { alpha, sign } => T::lit(f64::from(*sign)) * x.abs().powf(*alpha),
            Node::Product(l, r) => l.ln_at(x) + r.ln_at(x),
            Node::Power(b, r) => {
                if *r == T::zero() {
                    T::zero()
                } else {
                    *r * b.ln_at(x)
                }
            }
            Node::PrimitiveB(b) => {
                let kinks = b.kinks();
                Quadrature::default().ln_integral(|y| b.ln_at(y), T::neg_infinity(), x, &kinks)
            }
            Node::PrimitiveBTilde(b) => {
                let kinks = b.kinks();
                Quadrature::default().ln_integral(|y| b.ln_at(y), x, T::infinity(), &kinks)
            }
        }
    }

    /// `b(t)`, or a range error when the value is not a positive finite number.
    pub fn eval(&self, t: T) -> Result<T> {
        if !(t > T::zero() && t.is_finite()) {
            return Err(invalid(format!("slowly varying functions live on (0, ∞), got t = {t}")));
        }
        let ok = |v: T| v > T::zero() && v.is_finite();
        let v = self.value_at(t);
        if ok(v) {
            return Ok(v);
        }
        let v = self.ln_at(t.ln()).exp();
        if ok(v) {
            Ok(v)
        } else {
            Err(Error::Range { what: format!("b({t})") })
        }
    }

    fn value_at(&self, t: T) -> T {
        match &self.node {
            Node::Product(l, r) => l.value_at(t) * r.value_at(t),
            Node::Power(b, r) => b.value_at(t).powf(*r),
            _ => self.ln_at(t.ln()).exp(),
        }
    }

    /// Points in `x = ln t` where the function is not smooth.
    pub fn kinks(&self) -> Vec<Kink<T>> {
        let mut out = Vec::new();
        self.collect_kinks(&mut out);
        merge_kinks(out)
    }

    fn collect_kinks(&self, out: &mut Vec<Kink<T>>) {
        match &self.node {
            Node::Constant(_) => {}
            Node::BrokenLog { a0, a_inf } => {
                if *a0 != T::zero() || *a_inf != T::zero() {
                    out.push(Kink::at(T::zero()));
                }
            }
            Node::ExpLogPow { .. } => out.push(Kink::cusp(T::zero())),
            Node::Product(l, r) => {
                l.collect_kinks(out);
                r.collect_kinks(out);
            }
            Node::Power(b, _) | Node::PrimitiveB(b) | Node::PrimitiveBTilde(b) => b.collect_kinks(out),
        }
    }

    /// `Some(c)` when the function is identically `c`.
    pub fn constant_value(&self) -> Option<T> {
        match &self.node {
            Node::Constant(c) => Some(*c),
            Node::BrokenLog { a0, a_inf } if *a0 == T::zero() && *a_inf == T::zero() => Some(T::one()),
            Node::Product(l, r) => Some(l.constant_value()? * r.constant_value()?),
            Node::Power(b, r) => Some(b.constant_value()?.powf(*r)),
            _ => None,
        }
    }

    /// `t ↦ b(1/t)`.
    pub fn reflect(&self) -> Self {
        let node = match &self.node {
            Node::Constant(c) => Node::Constant(*c),
            Node::BrokenLog { a0, a_inf } => Node::BrokenLog { a0: *a_inf, a_inf: *a0 },
            Node::ExpLogPow { alpha, sign } => Node::ExpLogPow { alpha: *alpha, sign: *sign },
            Node::Product(l, r) => Node::Product(Box::new(l.reflect()), Box::new(r.reflect())),
            Node::Power(b, r) => Node::Power(Box::new(b.reflect()), *r),
            Node::PrimitiveB(b) => Node::PrimitiveBTilde(Box::new(b.reflect())),
            Node::PrimitiveBTilde(b) => Node::PrimitiveB(Box::new(b.reflect())),
        };
        Self { node }
    }
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "kind", bound = "")]
enum SvRepr<T: Scalar> {
    Constant {
        c: T,
    },
    BrokenLog {
        a0: T,
        #[serde(rename = "aInf")]
        a_inf: T,
    },
    ExpLogPow {
        alpha: T,
        sign: i8,
    },
    Product {
        left: Box<SvDescriptor<T>>,
        right: Box<SvDescriptor<T>>,
    },
    Power {
        base: Box<SvDescriptor<T>>,
        r: T,
    },
    PrimitiveB {
        base: Box<SvDescriptor<T>>,
    },
    PrimitiveBTilde {
        base: Box<SvDescriptor<T>>,
    },
}

impl<T: Scalar> TryFrom<SvRepr<T>> for SvDescriptor<T> {
    type Error = Error;

    fn try_from(r: SvRepr<T>) -> Result<Self> {
        let finite = |v: T, name: &str| {
            if v.is_finite() {
                Ok(v)
            } else {
                Err(invalid(format!("{name} must be finite")))
            }
        };
        match r {
            SvRepr::Constant { c } => Self::constant(c),
            SvRepr::BrokenLog { a0, a_inf } => Ok(Self::broken_log(finite(a0, "a0")?, finite(a_inf, "aInf")?)),
            SvRepr::ExpLogPow { alpha, sign } => Self::exp_log_pow(alpha, sign),
            SvRepr::Product { left, right } => Ok(Self::product(*left, *right)),
            SvRepr::Power { base, r } => Ok(Self::power(*base, finite(r, "r")?)),
            SvRepr::PrimitiveB { base } => Self::primitive_b(*base),
            SvRepr::PrimitiveBTilde { base } => Self::primitive_b_tilde(*base),
        }
    }
}

impl<T: Scalar> From<SvDescriptor<T>> for SvRepr<T> {
    fn from(d: SvDescriptor<T>) -> Self {
        match d.node {
            Node::Constant(c) => SvRepr::Constant { c },
            Node::BrokenLog { a0, a_inf } => SvRepr::BrokenLog { a0, a_inf },
            Node::ExpLogPow { alpha, sign } => SvRepr::ExpLogPow { alpha, sign },
            Node::Product(left, right) => SvRepr::Product { left, right },
            Node::Power(base, r) => SvRepr::Power { base, r },
            Node::PrimitiveB(base) => SvRepr::PrimitiveB { base },
            Node::PrimitiveBTilde(base) => SvRepr::PrimitiveBTilde { base },
        }
    }
}
