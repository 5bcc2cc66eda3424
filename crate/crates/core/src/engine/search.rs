//! Upper bounds for the outer K-functional by searching over decompositions.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::couples::{CoupleElement, StepFn, WeightedSeq};
use crate::error::{Error, Result};
use crate::phi::{PhiParam, Support};
use crate::scalar::Scalar;

const MAX_SPLIT_COORDS: usize = 6;
const MAX_SPLIT_CANDIDATES: usize = 200_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Strategy {
    /// Optimal base-level splits `f = f0 + f1` at every grid scale.
    TruncationFamily,
    /// Coordinate-wise fractions `f0_i = α_i c_i` on a uniform `α` grid.
    SplitGrid { steps: usize },
    /// Union of both families.
    Combined { steps: usize },
}

impl Default for Strategy {
    fn default() -> Self {
        Strategy::Combined { steps: 11 }
    }
}

/// Costs `(‖K(·,f0)‖_{Φ0}, ‖K(·,f1)‖_{Φ1})` of a fixed candidate list; the
/// outer K-functional at any `σ` is bounded by `min cost0 + σ cost1`.
#[derive(Clone, Debug, PartialEq)]
pub struct DecompositionSearch<T> {
    costs: Vec<(T, T)>,
}

fn truncation_family<T: Scalar>(e: &CoupleElement<T>, scales: &[T]) -> Vec<(CoupleElement<T>, CoupleElement<T>)> {
    match e {
        CoupleElement::WeightedSeq(w) => {
            let mut seen: Vec<Vec<bool>> = Vec::new();
            let mut out = Vec::new();
            for &s in scales {
                let pattern: Vec<bool> = (0..w.len()).map(|i| w.w0()[i] <= s * w.w1()[i]).collect();
                if seen.contains(&pattern) {
                    continue;
                }
                seen.push(pattern);
                let (f0, f1) = w.optimal_split(s);
                out.push((CoupleElement::WeightedSeq(f0), CoupleElement::WeightedSeq(f1)));
            }
            out
        }
        CoupleElement::StepFn(f) => step_levels(f)
            .into_iter()
            .map(|lambda| {
                let (hi, lo) = f.truncate(lambda);
                (CoupleElement::StepFn(hi), CoupleElement::StepFn(lo))
            })
            .collect(),
    }
}

/// Truncation levels: zero, every value, and geometric midpoints between values.
fn step_levels<T: Scalar>(f: &StepFn<T>) -> Vec<T> {
    let levels = f.levels();
    let mut out = vec![T::zero()];
    for (i, &v) in levels.iter().enumerate() {
        out.push(v);
        if let Some(&next) = levels.get(i + 1) {
            out.push((v * next).sqrt());
        }
    }
    if let Some(&last) = levels.last() {
        out.push(last / T::lit(2.0));
    }
    out
}

fn split_grid<T: Scalar>(w: &WeightedSeq<T>, steps: usize) -> Result<Vec<(CoupleElement<T>, CoupleElement<T>)>> {
    let n = w.len();
    if n > MAX_SPLIT_COORDS {
        return Err(Error::Guard(format!("split grid is limited to {MAX_SPLIT_COORDS} coordinates, got {n}")));
    }
    if steps < 2 {
        return Err(Error::Guard(format!("need at least 2 split steps, got {steps}")));
    }
    let total = steps.checked_pow(n as u32).filter(|&c| c <= MAX_SPLIT_CANDIDATES).ok_or_else(|| {
        Error::Guard(format!("{steps}^{n} split candidates exceed the limit of {MAX_SPLIT_CANDIDATES}"))
    })?;
    let alpha = |j: usize| if j + 1 == steps { T::one() } else { T::from_usize_lossy(j) / T::from_usize_lossy(steps - 1) };
    let mut out = Vec::with_capacity(total);
    let mut idx = vec![0usize; n];
    for _ in 0..total {
        let c0: Vec<T> = (0..n).map(|i| alpha(idx[i]) * w.coeffs()[i]).collect();
        let c1: Vec<T> = (0..n).map(|i| w.coeffs()[i] - c0[i]).collect();
        out.push((CoupleElement::WeightedSeq(w.with_coeffs(c0)), CoupleElement::WeightedSeq(w.with_coeffs(c1))));
        for slot in idx.iter_mut() {
            *slot += 1;
            if *slot < steps {
                break;
            }
            *slot = 0;
        }
    }
    Ok(out)
}

impl<T: Scalar> DecompositionSearch<T> {
    pub fn new(p0: &PhiParam<T>, p1: &PhiParam<T>, e: &CoupleElement<T>, scales: &[T], strategy: Strategy) -> Result<Self> {
        let zero = e.scaled(T::zero());
        let mut candidates = vec![(e.clone(), zero.clone()), (zero, e.clone())];
        match strategy {
            Strategy::TruncationFamily => candidates.extend(truncation_family(e, scales)),
            Strategy::SplitGrid { steps } => match e {
                CoupleElement::WeightedSeq(w) => candidates.extend(split_grid(w, steps)?),
                CoupleElement::StepFn(_) => {
                    return Err(Error::Guard("split grid applies to weighted sequences only".into()));
                }
            },
            Strategy::Combined { steps } => {
                candidates.extend(truncation_family(e, scales));
                if let CoupleElement::WeightedSeq(w) = e {
                    if w.len() <= MAX_SPLIT_COORDS {
                        if let Ok(more) = split_grid(w, steps) {
                            candidates.extend(more);
                        }
                    }
                }
            }
        }
        let costs = candidates
            .par_iter()
            .map(|(f0, f1)| (p0.phi_norm(f0, Support::all()), p1.phi_norm(f1, Support::all())))
            .collect();
        Ok(DecompositionSearch { costs })
    }

    pub fn costs(&self) -> &[(T, T)] {
        &self.costs
    }

    /// `min cost0 + σ cost1` over candidates with finite cost.
    pub fn lhs(&self, sigma: T) -> Result<T> {
        self.costs
            .iter()
            .map(|&(a, b)| if b == T::zero() { a } else { a + sigma * b })
            .filter(|v| v.is_finite())
            .fold(None, |best: Option<T>, v| Some(best.map_or(v, |b| b.min(v))))
            .ok_or(Error::EmptyCandidates)
    }
}

/// `K(σ, f; Ā_{Φ0}, Ā_{Φ1})` from above, using `scales` for the truncation family.
pub fn lhs_outer_k<T: Scalar>(
    p0: &PhiParam<T>,
    p1: &PhiParam<T>,
    e: &CoupleElement<T>,
    sigma: T,
    scales: &[T],
    strategy: Strategy,
) -> Result<T> {
    DecompositionSearch::new(p0, p1, e, scales, strategy)?.lhs(sigma)
}
