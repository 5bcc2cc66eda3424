//! Weighted `L^q(dt/t)` interpolation parameters
//! `‖g‖ = (∫_0^∞ [t^{-θ} b(t) |g(t)|]^q dt/t)^{1/q}`.

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::couples::LogProfile;
use crate::error::{invalid, Error, Result};
use crate::grid::LogGrid;
use crate::quadrature::{merge_kinks, Kink, Quadrature};
use crate::scalar::Scalar;
use crate::sv::SvDescriptor;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Exponent<T> {
    Finite(T),
    Infinite,
}

impl<T: Scalar> Exponent<T> {
    pub fn finite(self) -> Option<T> {
        match self {
            Exponent::Finite(q) => Some(q),
            Exponent::Infinite => None,
        }
    }
}

impl<T: Scalar> Serialize for Exponent<T> {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Exponent::Finite(q) => q.serialize(s),
            Exponent::Infinite => s.serialize_str("inf"),
        }
    }
}

impl<'de, T: Scalar> Deserialize<'de> for Exponent<T> {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged, bound = "")]
        enum Raw<T: Scalar> {
            Num(T),
            Text(String),
        }
        match Raw::<T>::deserialize(d)? {
            Raw::Num(q) => Ok(Exponent::Finite(q)),
            Raw::Text(s) if s == "inf" => Ok(Exponent::Infinite),
            Raw::Text(s) => Err(serde::de::Error::custom(format!("q must be a number or \"inf\", got {s:?}"))),
        }
    }
}

/// Integration range `(lo, hi) ⊆ (0, ∞)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Support<T> {
    lo: T,
    hi: T,
}

impl<T: Scalar> Support<T> {
    pub fn all() -> Self {
        Support { lo: T::zero(), hi: T::infinity() }
    }

    /// `(0, t)`.
    pub fn head(t: T) -> Self {
        Support { lo: T::zero(), hi: t }
    }

    /// `(t, ∞)`.
    pub fn tail(t: T) -> Self {
        Support { lo: t, hi: T::infinity() }
    }

    pub fn new(lo: T, hi: T) -> Result<Self> {
        if !(lo >= T::zero() && lo < hi) {
            return Err(invalid(format!("support must satisfy 0 <= lo < hi, got ({lo}, {hi})")));
        }
        Ok(Support { lo, hi })
    }

    fn log_bounds(&self) -> (T, T) {
        (self.lo.ln(), self.hi.ln())
    }
}

/// `u ↦ min(u, t)`.
#[derive(Clone, Copy, Debug)]
pub struct MinProfile<T> {
    pub t: T,
}

impl<T: Scalar> LogProfile<T> for MinProfile<T> {
    fn ln_value(&self, x: T) -> T {
        x.min(self.t.ln())
    }

    fn kinks(&self) -> Vec<Kink<T>> {
        vec![Kink::at(self.t.ln())]
    }
}

/// Which part of a truncated norm to take.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    /// `(0, t)`
    Head,
    /// `(t, ∞)`
    Tail,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PhiRepr<T>", into = "PhiRepr<T>", bound = "")]
pub struct PhiParam<T: Scalar> {
    theta: T,
    q: Exponent<T>,
    b: SvDescriptor<T>,
    grid: LogGrid<T>,
    quad: Quadrature<T>,
}

#[derive(Serialize, Deserialize)]
#[serde(bound = "", deny_unknown_fields)]
struct PhiRepr<T: Scalar> {
    theta: T,
    q: Exponent<T>,
    b: SvDescriptor<T>,
    #[serde(default)]
    grid: LogGrid<T>,
}

impl<T: Scalar> TryFrom<PhiRepr<T>> for PhiParam<T> {
    type Error = Error;
    fn try_from(r: PhiRepr<T>) -> Result<Self> {
        Ok(PhiParam::new(r.theta, r.q, r.b)?.with_grid(r.grid))
    }
}

impl<T: Scalar> From<PhiParam<T>> for PhiRepr<T> {
    fn from(p: PhiParam<T>) -> Self {
        PhiRepr { theta: p.theta, q: p.q, b: p.b, grid: p.grid }
    }
}

impl<T: Scalar> PhiParam<T> {
    pub fn new(theta: T, q: Exponent<T>, b: SvDescriptor<T>) -> Result<Self> {
        if !(theta >= T::zero() && theta <= T::one()) {
            return Err(invalid(format!("theta must lie in [0, 1], got {theta}")));
        }
        if let Exponent::Finite(q) = q {
            if !(q > T::zero() && q.is_finite()) {
                return Err(invalid(format!("q must be positive, got {q}")));
            }
        }
        Ok(PhiParam { theta, q, b, grid: LogGrid::default(), quad: Quadrature::default() })
    }

    pub fn with_grid(mut self, grid: LogGrid<T>) -> Self {
        self.grid = grid;
        self
    }

    pub fn with_quadrature(mut self, quad: Quadrature<T>) -> Self {
        self.quad = quad;
        self
    }

    /// Same parameter with a twice denser quadrature mesh.
    pub fn refined(&self) -> Self {
        self.clone().with_quadrature(self.quad.refined())
    }

    pub fn theta(&self) -> T {
        self.theta
    }

    pub fn q(&self) -> Exponent<T> {
        self.q
    }

    pub fn b(&self) -> &SvDescriptor<T> {
        &self.b
    }

    pub fn grid(&self) -> &LogGrid<T> {
        &self.grid
    }

    pub fn quadrature(&self) -> &Quadrature<T> {
        &self.quad
    }

    /// `ln(t^{-θ} b(t))` at `t = e^x`.
    pub fn ln_weight(&self, x: T) -> T {
        -self.theta * x + self.b.ln_at(x)
    }

    /// Parameter seen through `t ↦ 1/t`: `(1 - θ, q, b(1/·))`. The norm of
    /// `u g(1/u)` in the mirror equals the norm of `g`.
    pub fn mirrored(&self) -> Self {
        PhiParam { theta: T::one() - self.theta, b: self.b.reflect(), ..self.clone() }
    }

    /// `ln ‖g‖` over `support`, where `ln_g(x) = ln g(e^x)`.
    pub fn ln_norm_with<F>(&self, ln_g: F, g_kinks: &[Kink<T>], support: Support<T>) -> T
    where
        F: Fn(T) -> T,
    {
        let (lo, hi) = support.log_bounds();
        let mut kinks = self.b.kinks();
        kinks.extend_from_slice(g_kinks);
        let kinks = merge_kinks(kinks);
        match self.q {
            Exponent::Finite(q) => {
                let v = self.quad.ln_integral(|x| q * (self.ln_weight(x) + ln_g(x)), lo, hi, &kinks);
                v / q
            }
            Exponent::Infinite => {
                let candidates = self.grid.log_points();
                self.quad.ln_sup(|x| self.ln_weight(x) + ln_g(x), lo, hi, &candidates, &kinks)
            }
        }
    }

    pub fn ln_norm<P: LogProfile<T> + ?Sized>(&self, g: &P, support: Support<T>) -> T {
        self.ln_norm_with(|x| g.ln_value(x), &g.kinks(), support)
    }

    /// `‖g χ_support‖`; `+∞` when the integral diverges.
    pub fn phi_norm<P: LogProfile<T> + ?Sized>(&self, g: &P, support: Support<T>) -> T {
        self.ln_norm(g, support).exp()
    }

    /// `(c, 0 < θ < 1)` when a closed form applies.
    fn closed_form_data(&self) -> Option<(T, T)> {
        let c = self.b.constant_value()?;
        (self.theta > T::zero() && self.theta < T::one()).then_some((c, self.q.finite()?))
    }

    /// `ln ‖min(u, e^x)‖`, `+∞` when `min(1, ·)` is not in the space.
    pub fn ln_norm_min(&self, x: T) -> T {
        match self.closed_form_data() {
            Some((c, q)) => {
                let th = self.theta;
                let k = (T::one() / ((T::one() - th) * q) + T::one() / (th * q)).ln() / q;
                c.ln() + (T::one() - th) * x + k
            }
            None => self.ln_norm_min_by_quadrature(x),
        }
    }

    pub fn ln_norm_min_by_quadrature(&self, x: T) -> T {
        self.ln_norm_with(|y| y.min(x), &[Kink::at(x)], Support::all())
    }

    /// `‖min(u, t)‖`.
    pub fn norm_min(&self, t: T) -> Result<T> {
        let v = self.ln_norm_min(check_t(t)?).exp();
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::Membership(format!("‖min(u, {t})‖ diverges for θ = {}", self.theta)))
        }
    }

    pub fn norm_min_by_quadrature(&self, t: T) -> Result<T> {
        Ok(self.ln_norm_min_by_quadrature(check_t(t)?).exp())
    }

    /// `ln ‖χ_(e^x, ∞)‖`.
    pub fn ln_norm_tail_char(&self, x: T) -> T {
        match self.closed_form_data() {
            Some((c, q)) => c.ln() - self.theta * x - (self.theta * q).ln() / q,
            None => self.ln_norm_with(|_| T::zero(), &[], Support::tail(x.exp())),
        }
    }

    /// `ln ‖u χ_(0, e^x)(u)‖`.
    pub fn ln_norm_head_u(&self, x: T) -> T {
        match self.closed_form_data() {
            Some((c, q)) => {
                let a = T::one() - self.theta;
                c.ln() + a * x - (a * q).ln() / q
            }
            None => self.ln_norm_with(|y| y, &[], Support::head(x.exp())),
        }
    }

    /// `‖χ_(t, ∞)‖`.
    pub fn norm_tail_char(&self, t: T) -> Result<T> {
        Ok(self.ln_norm_tail_char(check_t(t)?).exp())
    }

    /// `‖u χ_(0, t)(u)‖`.
    pub fn norm_head_u(&self, t: T) -> Result<T> {
        Ok(self.ln_norm_head_u(check_t(t)?).exp())
    }

    /// `ln ‖K χ_side‖` with the cut at `e^x`.
    pub fn ln_norm_trunc_profile<P: LogProfile<T> + ?Sized>(&self, k: &P, side: Side, x: T) -> T {
        let support = match side {
            Side::Head => Support { lo: T::zero(), hi: x.exp() },
            Side::Tail => Support { lo: x.exp(), hi: T::infinity() },
        };
        let mut kinks = k.kinks();
        kinks.push(Kink::at(x));
        self.ln_norm_with(|y| k.ln_value(y), &kinks, support)
    }

    pub fn norm_trunc_profile<P: LogProfile<T> + ?Sized>(&self, k: &P, side: Side, t: T) -> Result<T> {
        Ok(self.ln_norm_trunc_profile(k, side, check_t(t)?).exp())
    }

    /// Whether `min(1, t)` has finite norm.
    pub fn membership_min1(&self) -> bool {
        self.ln_norm_min_by_quadrature(T::zero()).is_finite()
    }

    pub fn require_membership(&self) -> Result<()> {
        if self.membership_min1() {
            Ok(())
        } else {
            Err(Error::Membership(format!("‖min(1, u)‖ diverges for θ = {}", self.theta)))
        }
    }
}

fn check_t<T: Scalar>(t: T) -> Result<T> {
    if t > T::zero() && t.is_finite() {
        Ok(t.ln())
    } else {
        Err(invalid(format!("t must be positive and finite, got {t}")))
    }
}
