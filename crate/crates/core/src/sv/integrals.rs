//! Integral transforms of slowly varying functions.

use super::SvDescriptor;
use crate::error::{invalid, Error, Result};
use crate::quadrature::Quadrature;
use crate::scalar::Scalar;

fn positive_t<T: Scalar>(t: T) -> Result<T> {
    if t > T::zero() && t.is_finite() {
        Ok(t.ln())
    } else {
        Err(invalid(format!("t must be positive and finite, got {t}")))
    }
}

fn finish<T: Scalar>(ln_v: T, what: &str) -> Result<T> {
    if ln_v == T::infinity() {
        return Err(Error::Divergent(what.into()));
    }
    let v = ln_v.exp();
    if v > T::zero() && v.is_finite() {
        Ok(v)
    } else {
        Err(Error::Range { what: what.into() })
    }
}

/// `B(t) = ∫_0^t b(s) ds/s`.
pub fn integral_b<T: Scalar>(b: &SvDescriptor<T>, t: T, quad: &Quadrature<T>) -> Result<T> {
    let x = positive_t(t)?;
    let ln_v = quad.ln_integral(|y| b.ln_at(y), T::neg_infinity(), x, &b.kinks());
    finish(ln_v, "∫_0^t b(s) ds/s")
}

/// `B̃(t) = ∫_t^∞ b(s) ds/s`.
pub fn integral_b_tilde<T: Scalar>(b: &SvDescriptor<T>, t: T, quad: &Quadrature<T>) -> Result<T> {
    let x = positive_t(t)?;
    let ln_v = quad.ln_integral(|y| b.ln_at(y), x, T::infinity(), &b.kinks());
    finish(ln_v, "∫_t^∞ b(s) ds/s")
}

/// `∫_0^t s^α b(s) ds/s`, comparable to `t^α b(t)`.
pub fn power_integral_lower<T: Scalar>(b: &SvDescriptor<T>, alpha: T, t: T, quad: &Quadrature<T>) -> Result<T> {
    if !(alpha > T::zero()) {
        return Err(invalid(format!("power must be positive, got {alpha}")));
    }
    let x = positive_t(t)?;
    let ln_v = quad.ln_integral(|y| alpha * y + b.ln_at(y), T::neg_infinity(), x, &b.kinks());
    finish(ln_v, "∫_0^t s^α b(s) ds/s")
}

/// `∫_t^∞ s^{-α} b(s) ds/s`, comparable to `t^{-α} b(t)`.
pub fn power_integral_upper<T: Scalar>(b: &SvDescriptor<T>, alpha: T, t: T, quad: &Quadrature<T>) -> Result<T> {
    if !(alpha > T::zero()) {
        return Err(invalid(format!("power must be positive, got {alpha}")));
    }
    let x = positive_t(t)?;
    let ln_v = quad.ln_integral(|y| -alpha * y + b.ln_at(y), x, T::infinity(), &b.kinks());
    finish(ln_v, "∫_t^∞ s^{-α} b(s) ds/s")
}

#[cfg(test)]
mod tests {
    use super::*;

    type Sv = SvDescriptor<f64>;
    const E: f64 = std::f64::consts::E;

    fn q() -> Quadrature<f64> {
        Quadrature::default()
    }

    #[test]
    fn primitive_of_inverse_square_log() {
        let b = Sv::broken_log(-2.0, -2.0);
        assert!((integral_b(&b, 1.0, &q()).unwrap() - 1.0).abs() < 1e-9);
        assert!((integral_b(&b, 1.0 / E, &q()).unwrap() - 0.5).abs() < 1e-9);
        assert!((integral_b_tilde(&b, 1.0, &q()).unwrap() - 1.0).abs() < 1e-9);
        assert!((integral_b_tilde(&b, E, &q()).unwrap() - 0.5).abs() < 1e-9);
    }

    #[test]
    fn primitive_shrinks_towards_zero() {
        let b = Sv::broken_log(-2.0, -2.0);
        let vals: Vec<f64> = [1e-2, 1e-5, 1e-10, 1e-40].iter().map(|&t| integral_b(&b, t, &q()).unwrap()).collect();
        for w in vals.windows(2) {
            assert!(w[1] < w[0]);
        }
        assert!(vals[3] < 0.011);
    }

    #[test]
    fn divergent_primitive() {
        assert!(matches!(integral_b(&Sv::one(), 1.0, &q()), Err(Error::Divergent(_))));
    }

    #[test]
    fn power_integrals_elementary() {
        let one = Sv::one();
        assert!((power_integral_lower(&one, 1.0, 5.0, &q()).unwrap() - 5.0).abs() < 1e-12);
        assert!((power_integral_upper(&one, 1.0, 2.0, &q()).unwrap() - 0.5).abs() < 1e-12);
        let b = Sv::broken_log(1.0, 1.0);
        assert!((power_integral_lower(&b, 1.0, 1.0, &q()).unwrap() - 2.0).abs() < 1e-10);
        assert!((power_integral_upper(&b, 1.0, 1.0, &q()).unwrap() - 2.0).abs() < 1e-10);
        assert!(power_integral_lower(&b, 0.0, 1.0, &q()).is_err());
    }
}
