use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::quadrature::{merge_kinks, Kink};
use crate::scalar::Scalar;

/// Nonnegative step function `Σ values[i] χ_[breaks[i], breaks[i+1])` in the
/// couple `(L¹, L∞)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "StepRepr<T>", into = "StepRepr<T>", bound = "")]
pub struct StepFn<T: Scalar> {
    breaks: Vec<T>,
    values: Vec<T>,
    /// Decreasing rearrangement: `(value, length)` sorted by value.
    sorted: Vec<(T, T)>,
    cum_len: Vec<T>,
    cum_int: Vec<T>,
}

#[derive(Serialize, Deserialize)]
#[serde(bound = "")]
struct StepRepr<T: Scalar> {
    breaks: Vec<T>,
    values: Vec<T>,
}

impl<T: Scalar> TryFrom<StepRepr<T>> for StepFn<T> {
    type Error = crate::Error;
    fn try_from(r: StepRepr<T>) -> Result<Self> {
        StepFn::new(r.breaks, r.values)
    }
}

impl<T: Scalar> From<StepFn<T>> for StepRepr<T> {
    fn from(s: StepFn<T>) -> Self {
        StepRepr { breaks: s.breaks, values: s.values }
    }
}

impl<T: Scalar> StepFn<T> {
    pub fn new(breaks: Vec<T>, values: Vec<T>) -> Result<Self> {
        if values.is_empty() || breaks.len() != values.len() + 1 {
            return Err(invalid(format!(
                "a step function with m pieces needs m + 1 breaks, got {} breaks for {} values",
                breaks.len(),
                values.len()
            )));
        }
        if !(breaks[0] >= T::zero()) || breaks.iter().any(|b| !b.is_finite()) {
            return Err(invalid("breaks must be finite and nonnegative"));
        }
        if breaks.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(invalid("breaks must be strictly increasing"));
        }
        if values.iter().any(|v| !(*v >= T::zero() && v.is_finite())) {
            return Err(invalid("values must be nonnegative and finite"));
        }
        let mut sorted: Vec<(T, T)> = values.iter().zip(breaks.windows(2)).map(|(&v, w)| (v, w[1] - w[0])).collect();
        sorted.sort_by(|a, b| b.0.partial_cmp(&a.0).expect("finite values"));
        let mut cum_len = vec![T::zero()];
        let mut cum_int = vec![T::zero()];
        for &(v, l) in &sorted {
            cum_len.push(*cum_len.last().expect("seeded") + l);
            cum_int.push(*cum_int.last().expect("seeded") + v * l);
        }
        Ok(StepFn { breaks, values, sorted, cum_len, cum_int })
    }

    pub fn breaks(&self) -> &[T] {
        &self.breaks
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn with_values(&self, values: Vec<T>) -> Self {
        StepFn::new(self.breaks.clone(), values).expect("same breaks, nonnegative values")
    }

    pub fn scaled(&self, lambda: T) -> Self {
        self.with_values(self.values.iter().map(|&v| v * lambda.abs()).collect())
    }

    /// `K(t) = ∫_0^t f*(s) ds`.
    pub fn k(&self, t: T) -> T {
        let n = self.sorted.len();
        if t >= self.cum_len[n] {
            return self.cum_int[n];
        }
        let j = self.cum_len.partition_point(|&c| c <= t) - 1;
        self.cum_int[j] + self.sorted[j].0 * (t - self.cum_len[j])
    }

    pub fn ln_k(&self, x: T) -> T {
        let (v0, l0) = self.sorted[0];
        if v0 == T::zero() {
            return T::neg_infinity();
        }
        if x <= l0.ln() {
            return x + v0.ln();
        }
        self.k(x.exp()).ln()
    }

    /// `‖f‖_{L¹}`.
    pub fn norm0(&self) -> T {
        self.cum_int[self.sorted.len()]
    }

    /// `‖f‖_{L∞}`.
    pub fn norm1(&self) -> T {
        self.sorted[0].0
    }

    /// Distinct positive values, decreasing.
    pub fn levels(&self) -> Vec<T> {
        let mut out: Vec<T> = self.sorted.iter().map(|p| p.0).filter(|&v| v > T::zero()).collect();
        out.dedup();
        out
    }

    pub fn kinks(&self) -> Vec<Kink<T>> {
        let ks = (1..self.cum_len.len())
            .filter(|&j| self.sorted[j - 1].0 > T::zero())
            .map(|j| Kink::at(self.cum_len[j].ln()))
            .collect();
        merge_kinks(ks)
    }

    /// `((f - λ)_+, min(f, λ))`.
    pub fn truncate(&self, lambda: T) -> (Self, Self) {
        let hi = self.values.iter().map(|&v| (v - lambda).max(T::zero())).collect();
        let lo = self.values.iter().map(|&v| v.min(lambda)).collect();
        (self.with_values(hi), self.with_values(lo))
    }
}
