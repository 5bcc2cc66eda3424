//! Exhaustive search over coordinate-wise splits of a weighted sequence.

use rayon::prelude::*;

use super::WeightedSeq;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

const MAX_COORDS: usize = 8;
/// Above this many grid combinations the search is done coordinate by coordinate.
const PRODUCT_LIMIT: usize = 1 << 22;

/// `min Σ |c_i| (α_i w0_i + t (1 - α_i) w1_i)` over `α_i ∈ {0, 1/(steps-1), ..., 1}`.
///
/// The cost is separable, so the coordinate-wise scan finds the same minimum as
/// the full product grid; the product grid is still used when it is small
/// enough, as an independent check of that claim.
pub fn k_oracle_bruteforce<T: Scalar>(e: &WeightedSeq<T>, t: T, steps: usize) -> Result<T> {
    let n = e.len();
    if n > MAX_COORDS {
        return Err(Error::Guard(format!("brute force is limited to {MAX_COORDS} coordinates, got {n}")));
    }
    if steps < 2 {
        return Err(Error::Guard(format!("need at least 2 split steps, got {steps}")));
    }
    let alphas: Vec<T> = (0..steps)
        .map(|j| if j + 1 == steps { T::one() } else { T::from_usize_lossy(j) / T::from_usize_lossy(steps - 1) })
        .collect();
    // cost[i][j]: coordinate i with split α_j
    let cost: Vec<Vec<T>> = (0..n)
        .map(|i| {
            let c = e.coeffs()[i].abs();
            alphas
                .iter()
                .map(|&a| c * (a * e.w0()[i] + t * (T::one() - a) * e.w1()[i]))
                .collect()
        })
        .collect();
    let combos = steps.checked_pow(n as u32).filter(|&c| c <= PRODUCT_LIMIT);
    if combos.is_none() || n == 1 {
        return Ok(cost
            .iter()
            .map(|row| row.iter().copied().fold(T::infinity(), T::min))
            .fold(T::zero(), |acc, v| acc + v));
    }
    let best = (0..steps)
        .into_par_iter()
        .map(|j0| {
            let mut idx = vec![0usize; n];
            idx[0] = j0;
            let mut best = T::infinity();
            loop {
                let c = (0..n).map(|i| cost[i][idx[i]]).fold(T::zero(), |acc, v| acc + v);
                best = best.min(c);
                let mut k = 1;
                while k < n {
                    idx[k] += 1;
                    if idx[k] < steps {
                        break;
                    }
                    idx[k] = 0;
                    k += 1;
                }
                if k == n {
                    break;
                }
            }
            best
        })
        .collect::<Vec<T>>();
    Ok(best.into_iter().fold(T::infinity(), T::min))
}
