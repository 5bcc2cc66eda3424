use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::quadrature::{merge_kinks, Kink};
use crate::scalar::{ln_add, Scalar};

/// Finite sequence in the couple `(ℓ¹(w0), ℓ¹(w1))`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SeqRepr<T>", into = "SeqRepr<T>", bound = "")]
pub struct WeightedSeq<T: Scalar> {
    coeffs: Vec<T>,
    w0: Vec<T>,
    w1: Vec<T>,
}

#[derive(Serialize, Deserialize)]
#[serde(bound = "")]
struct SeqRepr<T: Scalar> {
    coeffs: Vec<T>,
    w0: Vec<T>,
    w1: Vec<T>,
}

impl<T: Scalar> TryFrom<SeqRepr<T>> for WeightedSeq<T> {
    type Error = crate::Error;
    fn try_from(r: SeqRepr<T>) -> Result<Self> {
        WeightedSeq::new(r.coeffs, r.w0, r.w1)
    }
}

impl<T: Scalar> From<WeightedSeq<T>> for SeqRepr<T> {
    fn from(s: WeightedSeq<T>) -> Self {
        SeqRepr { coeffs: s.coeffs, w0: s.w0, w1: s.w1 }
    }
}

impl<T: Scalar> WeightedSeq<T> {
    pub fn new(coeffs: Vec<T>, w0: Vec<T>, w1: Vec<T>) -> Result<Self> {
        let n = coeffs.len();
        if n == 0 || w0.len() != n || w1.len() != n {
            return Err(invalid(format!(
                "coeffs, w0 and w1 must share a nonzero length, got {}, {}, {}",
                n,
                w0.len(),
                w1.len()
            )));
        }
        if coeffs.iter().any(|c| !c.is_finite()) {
            return Err(invalid("coefficients must be finite"));
        }
        if w0.iter().chain(&w1).any(|w| !(*w > T::zero() && w.is_finite())) {
            return Err(invalid("weights must be positive and finite"));
        }
        Ok(WeightedSeq { coeffs, w0, w1 })
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn coeffs(&self) -> &[T] {
        &self.coeffs
    }

    pub fn w0(&self) -> &[T] {
        &self.w0
    }

    pub fn w1(&self) -> &[T] {
        &self.w1
    }

    /// Same weights, new coefficients.
    pub fn with_coeffs(&self, coeffs: Vec<T>) -> Self {
        assert_eq!(coeffs.len(), self.len(), "coefficient count must match the weights");
        WeightedSeq { coeffs, ..self.clone() }
    }

    pub fn scaled(&self, lambda: T) -> Self {
        self.with_coeffs(self.coeffs.iter().map(|&c| c * lambda).collect())
    }

    /// `K(t) = Σ |c_i| min(w0_i, t w1_i)`.
    pub fn k(&self, t: T) -> T {
        self.coeffs
            .iter()
            .zip(self.w0.iter().zip(&self.w1))
            .map(|(&c, (&a, &b))| c.abs() * a.min(t * b))
            .fold(T::zero(), |acc, v| acc + v)
    }

    /// `ln K(e^x)`, safe for large `|x|`.
    pub fn ln_k(&self, x: T) -> T {
        self.coeffs
            .iter()
            .zip(self.w0.iter().zip(&self.w1))
            .filter(|(c, _)| **c != T::zero())
            .map(|(&c, (&a, &b))| c.abs().ln() + a.ln().min(x + b.ln()))
            .fold(T::neg_infinity(), ln_add)
    }

    pub fn norm0(&self) -> T {
        self.coeffs.iter().zip(&self.w0).map(|(&c, &w)| c.abs() * w).fold(T::zero(), |a, v| a + v)
    }

    pub fn norm1(&self) -> T {
        self.coeffs.iter().zip(&self.w1).map(|(&c, &w)| c.abs() * w).fold(T::zero(), |a, v| a + v)
    }

    pub fn kinks(&self) -> Vec<Kink<T>> {
        let ks = self
            .coeffs
            .iter()
            .zip(self.w0.iter().zip(&self.w1))
            .filter(|(c, _)| **c != T::zero())
            .map(|(_, (&a, &b))| Kink::at(a.ln() - b.ln()))
            .collect();
        merge_kinks(ks)
    }

    /// Splits every coordinate into whichever space is cheaper at scale `s`;
    /// the cost `‖f0‖ + s‖f1‖` equals `K(s)`.
    pub fn optimal_split(&self, s: T) -> (Self, Self) {
        let mut f0 = vec![T::zero(); self.len()];
        let mut f1 = vec![T::zero(); self.len()];
        for i in 0..self.len() {
            if self.w0[i] <= s * self.w1[i] {
                f0[i] = self.coeffs[i];
            } else {
                f1[i] = self.coeffs[i];
            }
        }
        (self.with_coeffs(f0), self.with_coeffs(f1))
    }
}
