use serde::Serialize;

use crate::scalar::Scalar;

/// Infimum and supremum of a family of ratios.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(bound = "")]
pub struct Bracket<T: Scalar> {
    pub inf: T,
    pub sup: T,
}

impl<T: Scalar> Bracket<T> {
    pub fn empty() -> Self {
        Bracket { inf: T::infinity(), sup: T::neg_infinity() }
    }

    pub fn include(&mut self, v: T) {
        if v.is_nan() {
            self.inf = T::nan();
            self.sup = T::nan();
            return;
        }
        self.inf = self.inf.min(v);
        self.sup = self.sup.max(v);
    }

    /// Finite and bounded away from zero.
    pub fn is_bounded(&self) -> bool {
        self.inf > T::zero() && self.sup.is_finite() && self.inf <= self.sup
    }

    /// `sup / inf`, the spread of the equivalence.
    pub fn spread(&self) -> T {
        self.sup / self.inf
    }

    pub fn within(&self, budget: T) -> bool {
        self.is_bounded() && self.inf >= budget.recip() && self.sup <= budget
    }
}

impl<T: Scalar> FromIterator<T> for Bracket<T> {
    fn from_iter<I: IntoIterator<Item = T>>(iter: I) -> Self {
        let mut b = Bracket::empty();
        for v in iter {
            b.include(v);
        }
        b
    }
}
