//! Concrete couples with exact K-functionals, and K-profiles built from them
//! or from sampled data.

mod oracle;
mod step;
mod weighted;

pub use oracle::k_oracle_bruteforce;
pub use step::StepFn;
pub use weighted::WeightedSeq;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::grid::LogGrid;
use crate::quadrature::{merge_kinks, Kink};
use crate::scalar::Scalar;

/// Anything that can be read as `x ↦ ln F(e^x)`.
pub trait LogProfile<T: Scalar>: Sync {
    fn ln_value(&self, x: T) -> T;

    fn kinks(&self) -> Vec<Kink<T>>;

    fn value(&self, t: T) -> T {
        self.ln_value(t.ln()).exp()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", bound = "")]
pub enum CoupleElement<T: Scalar> {
    WeightedSeq(WeightedSeq<T>),
    StepFn(StepFn<T>),
}

impl<T: Scalar> CoupleElement<T> {
    pub fn k(&self, t: T) -> T {
        match self {
            CoupleElement::WeightedSeq(e) => e.k(t),
            CoupleElement::StepFn(f) => f.k(t),
        }
    }

    /// `‖f‖_{A0}`.
    pub fn norm0(&self) -> T {
        match self {
            CoupleElement::WeightedSeq(e) => e.norm0(),
            CoupleElement::StepFn(f) => f.norm0(),
        }
    }

    /// `‖f‖_{A1}`.
    pub fn norm1(&self) -> T {
        match self {
            CoupleElement::WeightedSeq(e) => e.norm1(),
            CoupleElement::StepFn(f) => f.norm1(),
        }
    }

    pub fn scaled(&self, lambda: T) -> Self {
        match self {
            CoupleElement::WeightedSeq(e) => CoupleElement::WeightedSeq(e.scaled(lambda)),
            CoupleElement::StepFn(f) => CoupleElement::StepFn(f.scaled(lambda)),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.norm0() == T::zero() && self.norm1() == T::zero()
    }
}

impl<T: Scalar> LogProfile<T> for CoupleElement<T> {
    fn ln_value(&self, x: T) -> T {
        match self {
            CoupleElement::WeightedSeq(e) => e.ln_k(x),
            CoupleElement::StepFn(f) => f.ln_k(x),
        }
    }

    fn kinks(&self) -> Vec<Kink<T>> {
        match self {
            CoupleElement::WeightedSeq(e) => e.kinks(),
            CoupleElement::StepFn(f) => f.kinks(),
        }
    }
}

/// Quasi-concave samples `(t_i, K_i)`, interpolated linearly in log-log
/// coordinates and extended by `K(t_0) t/t_0` below and `K(t_n)` above.
#[derive(Clone, Debug, PartialEq)]
pub struct SyntheticProfile<T: Scalar> {
    xs: Vec<T>,
    ln_k: Vec<T>,
    samples: Vec<(T, T)>,
}

impl<T: Scalar> SyntheticProfile<T> {
    pub fn new(samples: Vec<(T, T)>) -> Result<Self> {
        if samples.len() < 2 {
            return Err(invalid("a synthetic K-profile needs at least two samples"));
        }
        if samples.iter().any(|&(t, k)| !(t > T::zero() && t.is_finite() && k >= T::zero() && k.is_finite())) {
            return Err(invalid("samples need positive finite t and nonnegative finite K"));
        }
        if samples.windows(2).any(|w| !(w[0].0 < w[1].0)) {
            return Err(invalid("sample abscissae must be strictly increasing"));
        }
        let zeros: Vec<f64> = samples.iter().filter(|s| s.1 == T::zero()).map(|s| s.0.as_f64()).collect();
        if !zeros.is_empty() && zeros.len() < samples.len() {
            return Err(Error::InvariantViolation {
                reason: "a quasi-concave profile vanishing at one point vanishes everywhere".into(),
                points: zeros,
            });
        }
        Ok(SyntheticProfile {
            xs: samples.iter().map(|s| s.0.ln()).collect(),
            ln_k: samples.iter().map(|s| s.1.ln()).collect(),
            samples,
        })
    }

    pub fn samples(&self) -> &[(T, T)] {
        &self.samples
    }
}

impl<T: Scalar> LogProfile<T> for SyntheticProfile<T> {
    fn ln_value(&self, x: T) -> T {
        let n = self.xs.len();
        if self.ln_k[0] == T::neg_infinity() {
            return T::neg_infinity();
        }
        if x <= self.xs[0] {
            return self.ln_k[0] + (x - self.xs[0]);
        }
        if x >= self.xs[n - 1] {
            return self.ln_k[n - 1];
        }
        let j = self.xs.partition_point(|&v| v <= x) - 1;
        let s = (x - self.xs[j]) / (self.xs[j + 1] - self.xs[j]);
        self.ln_k[j] * (T::one() - s) + self.ln_k[j + 1] * s
    }

    fn kinks(&self) -> Vec<Kink<T>> {
        merge_kinks(self.xs.iter().map(|&x| Kink::at(x)).collect())
    }
}

/// `t ↦ K(t, f)`, exact for couple elements, interpolated for samples.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ProfileRepr<T>", into = "ProfileRepr<T>", bound = "")]
pub enum KProfile<T: Scalar> {
    FromElement(CoupleElement<T>),
    Synthetic(SyntheticProfile<T>),
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "kind", bound = "")]
enum ProfileRepr<T: Scalar> {
    WeightedSeq(WeightedSeq<T>),
    StepFn(StepFn<T>),
    Synthetic { samples: Vec<(T, T)> },
}

impl<T: Scalar> TryFrom<ProfileRepr<T>> for KProfile<T> {
    type Error = Error;
    fn try_from(r: ProfileRepr<T>) -> Result<Self> {
        Ok(match r {
            ProfileRepr::WeightedSeq(e) => KProfile::FromElement(CoupleElement::WeightedSeq(e)),
            ProfileRepr::StepFn(f) => KProfile::FromElement(CoupleElement::StepFn(f)),
            ProfileRepr::Synthetic { samples } => KProfile::Synthetic(SyntheticProfile::new(samples)?),
        })
    }
}

impl<T: Scalar> From<KProfile<T>> for ProfileRepr<T> {
    fn from(p: KProfile<T>) -> Self {
        match p {
            KProfile::FromElement(CoupleElement::WeightedSeq(e)) => ProfileRepr::WeightedSeq(e),
            KProfile::FromElement(CoupleElement::StepFn(f)) => ProfileRepr::StepFn(f),
            KProfile::Synthetic(s) => ProfileRepr::Synthetic { samples: s.samples },
        }
    }
}

impl<T: Scalar> KProfile<T> {
    pub fn element(&self) -> Option<&CoupleElement<T>> {
        match self {
            KProfile::FromElement(e) => Some(e),
            KProfile::Synthetic(_) => None,
        }
    }
}

impl<T: Scalar> LogProfile<T> for KProfile<T> {
    fn ln_value(&self, x: T) -> T {
        match self {
            KProfile::FromElement(e) => e.ln_value(x),
            KProfile::Synthetic(s) => s.ln_value(x),
        }
    }

    fn kinks(&self) -> Vec<Kink<T>> {
        match self {
            KProfile::FromElement(e) => e.kinks(),
            KProfile::Synthetic(s) => s.kinks(),
        }
    }
}

const SHAPE_TOL: f64 = 1e-12;

/// Checks that `K ≥ 0`, `K` is nondecreasing and `K(t)/t` is nonincreasing on
/// the grid (and at the sample points of a synthetic profile).
pub fn validate_kprofile<T: Scalar>(p: &KProfile<T>, grid: &LogGrid<T>) -> Result<()> {
    let mut xs = grid.log_points();
    if let KProfile::Synthetic(s) = p {
        xs.extend(s.xs.iter().copied());
        xs.sort_by(|a, b| a.partial_cmp(b).expect("finite abscissae"));
        xs.dedup();
    }
    let ln_k: Vec<T> = xs.iter().map(|&x| p.ln_value(x)).collect();
    let mut bad = Vec::new();
    let mut reasons: Vec<&str> = Vec::new();
    for (i, &v) in ln_k.iter().enumerate() {
        if v.is_nan() || v == T::infinity() {
            bad.push(xs[i].exp().as_f64());
            reasons.push("K is not a finite nonnegative number");
        }
    }
    let tol = T::lit(SHAPE_TOL);
    for i in 1..xs.len() {
        let (a, b) = (ln_k[i - 1], ln_k[i]);
        if a == T::neg_infinity() && b == T::neg_infinity() {
            continue;
        }
        if b < a - tol {
            bad.push(xs[i].exp().as_f64());
            reasons.push("K decreases");
        } else if b - xs[i] > a - xs[i - 1] + tol {
            bad.push(xs[i].exp().as_f64());
            reasons.push("K(t)/t increases");
        }
    }
    if bad.is_empty() {
        Ok(())
    } else {
        reasons.sort_unstable();
        reasons.dedup();
        Err(Error::InvariantViolation { reason: reasons.join("; "), points: bad })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn samples(f: impl Fn(f64) -> f64) -> Vec<(f64, f64)> {
        LogGrid::new(1e-3, 1e3, 8).unwrap().points().into_iter().map(|t| (t, f(t))).collect()
    }

    #[test]
    fn canonical_profile_passes() {
        let p = KProfile::Synthetic(SyntheticProfile::new(samples(|t| t.min(1.0))).unwrap());
        assert!(validate_kprofile(&p, &LogGrid::default()).is_ok());
    }

    #[test]
    fn square_fails_quasi_concavity() {
        let p = KProfile::Synthetic(SyntheticProfile::new(samples(|t| t * t)).unwrap());
        match validate_kprofile(&p, &LogGrid::new(1e-2, 1e2, 4).unwrap()) {
            Err(Error::InvariantViolation { reason, points }) => {
                assert!(reason.contains("K(t)/t increases"));
                assert!(!points.is_empty());
            }
            other => panic!("expected violation, got {other:?}"),
        }
    }

    #[test]
    fn element_profiles_pass() {
        let e = WeightedSeq::new(vec![1.0, -2.0, 0.5], vec![1.0, 30.0, 1e-3], vec![2.0, 0.1, 1.0]).unwrap();
        let p = KProfile::FromElement(CoupleElement::WeightedSeq(e));
        assert!(validate_kprofile(&p, &LogGrid::default()).is_ok());
        let f = StepFn::new(vec![0.0, 1.0, 3.0], vec![2.0, 5.0]).unwrap();
        let p = KProfile::FromElement(CoupleElement::StepFn(f));
        assert!(validate_kprofile(&p, &LogGrid::default()).is_ok());
    }

    #[test]
    fn synthetic_extension() {
        let s = SyntheticProfile::<f64>::new(vec![(1.0, 2.0), (10.0, 4.0)]).unwrap();
        assert!((s.value(0.1) - 0.2).abs() < 1e-15);
        assert!((s.value(1e5) - 4.0).abs() < 1e-14);
        assert!((s.value(10f64.sqrt()) - 8f64.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn json_schemas() {
        let p: KProfile<f64> = serde_json::from_str(r#"{"kind":"WeightedSeq","coeffs":[1],"w0":[1],"w1":[1]}"#).unwrap();
        assert_eq!(p.value(0.5), 0.5);
        let p: KProfile<f64> = serde_json::from_str(r#"{"kind":"StepFn","breaks":[0,1,2],"values":[3,1]}"#).unwrap();
        assert_eq!(p.element().unwrap().k(1.5), 3.5);
        let p: KProfile<f64> = serde_json::from_str(r#"{"kind":"Synthetic","samples":[[1,1],[2,1]]}"#).unwrap();
        assert!(p.element().is_none());
        assert!(serde_json::from_str::<KProfile<f64>>(r#"{"kind":"Synthetic","samples":[[1,0],[2,1]]}"#).is_err());
        let e: CoupleElement<f64> = serde_json::from_str(r#"{"kind":"StepFn","breaks":[0,1],"values":[2]}"#).unwrap();
        assert_eq!(e.norm0(), 2.0);
    }
}
