//! Geometric evaluation grids.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::scalar::Scalar;

/// Geometric grid `t_min = t_0 < t_1 < ... < t_n = t_max`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "GridRepr<T>", into = "GridRepr<T>", bound = "")]
pub struct LogGrid<T: Scalar> {
    t_min: T,
    t_max: T,
    points_per_decade: usize,
}

#[derive(Clone, Serialize, Deserialize)]
#[serde(bound = "")]
struct GridRepr<T: Scalar> {
    t_min: T,
    t_max: T,
    points_per_decade: usize,
}

impl<T: Scalar> TryFrom<GridRepr<T>> for LogGrid<T> {
    type Error = crate::Error;
    fn try_from(r: GridRepr<T>) -> Result<Self> {
        LogGrid::new(r.t_min, r.t_max, r.points_per_decade)
    }
}

impl<T: Scalar> From<LogGrid<T>> for GridRepr<T> {
    fn from(g: LogGrid<T>) -> Self {
        GridRepr { t_min: g.t_min, t_max: g.t_max, points_per_decade: g.points_per_decade }
    }
}

impl<T: Scalar> Default for LogGrid<T> {
    fn default() -> Self {
        LogGrid { t_min: T::lit(1e-8), t_max: T::lit(1e8), points_per_decade: 16 }
    }
}

impl<T: Scalar> LogGrid<T> {
    pub fn new(t_min: T, t_max: T, points_per_decade: usize) -> Result<Self> {
        if !(t_min > T::zero() && t_min.is_finite() && t_max.is_finite()) {
            return Err(invalid(format!("grid bounds must be positive and finite, got [{t_min}, {t_max}]")));
        }
        if !(t_min < t_max) {
            return Err(invalid(format!("grid requires t_min < t_max, got [{t_min}, {t_max}]")));
        }
        if points_per_decade == 0 {
            return Err(invalid("grid needs at least one point per decade"));
        }
        Ok(LogGrid { t_min, t_max, points_per_decade })
    }

    /// Grid symmetric under `t -> 1/t`: `[10^-d, 10^d]`.
    pub fn symmetric(decades: T, points_per_decade: usize) -> Result<Self> {
        let ten = T::lit(10.0);
        Self::new(ten.powf(-decades), ten.powf(decades), points_per_decade)
    }

    pub fn t_min(&self) -> T {
        self.t_min
    }

    pub fn t_max(&self) -> T {
        self.t_max
    }

    pub fn points_per_decade(&self) -> usize {
        self.points_per_decade
    }

    /// Number of intervals; the grid has `intervals() + 1` points.
    pub fn intervals(&self) -> usize {
        let decades = (self.t_max / self.t_min).log10();
        let n = (decades * T::from_usize_lossy(self.points_per_decade)).round();
        n.to_usize().unwrap_or(1).max(1)
    }

    /// Exponents `log10 t` of the nodes; whole decades are hit exactly.
    fn decade_exponents(&self) -> Vec<T> {
        let n = self.intervals();
        let (a, b) = (self.t_min.log10(), self.t_max.log10());
        let nn = T::from_usize_lossy(n);
        (0..=n)
            .map(|k| {
                let s = T::from_usize_lossy(k) / nn;
                a * (T::one() - s) + b * s
            })
            .collect()
    }

    /// Grid nodes in the logarithmic variable `x = ln t`.
    pub fn log_points(&self) -> Vec<T> {
        let mut xs: Vec<T> = self.decade_exponents().into_iter().map(|l| l * T::LN_10()).collect();
        let last = xs.len() - 1;
        xs[0] = self.t_min.ln();
        xs[last] = self.t_max.ln();
        xs
    }

    pub fn points(&self) -> Vec<T> {
        let ten = T::lit(10.0);
        let mut pts: Vec<T> = self.decade_exponents().into_iter().map(|l| ten.powf(l)).collect();
        let last = pts.len() - 1;
        pts[0] = self.t_min;
        pts[last] = self.t_max;
        pts
    }

    pub fn len(&self) -> usize {
        self.intervals() + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Same range, `factor` times the density.
    pub fn densified(&self, factor: usize) -> Self {
        LogGrid { points_per_decade: self.points_per_decade * factor.max(1), ..self.clone() }
    }
}
