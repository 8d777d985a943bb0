use rayon::prelude::*;

use crate::error::{BeamError, Result};
use crate::fit;
use crate::model::State;
use crate::norms::DiagonalNorm;

/// Finite set of phase-space states measured in one diagonal norm.
#[derive(Debug, Clone, PartialEq)]
pub struct PointCloud {
    pub states: Vec<State>,
    pub norm: DiagonalNorm,
}

impl PointCloud {
    pub fn new(states: Vec<State>, norm: DiagonalNorm) -> Result<Self> {
        let m = norm.y_weight.len();
        if let Some(s) = states.iter().find(|s| s.y.len() != m || s.v.len() != m) {
            return Err(BeamError::DimensionMismatch {
                expected: m,
                found: s.y.len(),
            });
        }
        Ok(Self { states, norm })
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    /// Same states measured in another norm.
    pub fn with_norm(&self, norm: DiagonalNorm) -> Result<Self> {
        Self::new(self.states.clone(), norm)
    }

    /// Merge clouds sharing a norm, in order.
    pub fn merge(clouds: Vec<PointCloud>) -> Result<Self> {
        let mut it = clouds.into_iter();
        let mut first = it.next().ok_or(BeamError::EmptyCloud)?;
        for c in it {
            if c.norm != first.norm {
                return Err(BeamError::invalid("cannot merge clouds measured in different norms"));
            }
            first.states.extend(c.states);
        }
        Ok(first)
    }

    /// First `d` modal displacement coordinates of every state.
    pub fn project_displacement(&self, d: usize) -> Result<Vec<Vec<f64>>> {
        let m = self.norm.y_weight.len();
        if d == 0 || d > m {
            return Err(BeamError::invalid(format!("projection dimension {d} outside 1..={m}")));
        }
        Ok(self.states.iter().map(|s| s.y.as_slice()[..d].to_vec()).collect())
    }
}

/// `h(A, B) = sup_{a∈A} min_{b∈B} ‖a − b‖` by exhaustive search.
pub fn hausdorff_semidistance(a: &PointCloud, b: &PointCloud) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(BeamError::EmptyCloud);
    }
    if a.norm != b.norm {
        return Err(BeamError::invalid("clouds are measured in different norms"));
    }
    let norm = &a.norm;
    let sup_sq = a
        .states
        .par_iter()
        .map(|x| {
            b.states
                .iter()
                .map(|y| norm.distance_sq(x, y))
                .fold(f64::INFINITY, f64::min)
        })
        .reduce(|| 0.0, f64::max);
    Ok(sup_sq.sqrt())
}

/// Box-counting estimate: the fitted slope and the `(ε, n(ε))` table.
#[derive(Debug, Clone, PartialEq)]
pub struct BoxCount {
    pub dimension: f64,
    pub counts: Vec<(f64, usize)>,
}

/// `ε = 2^{−k}` for `k = k_lo..=k_hi`.
pub fn dyadic_scales(k_lo: i32, k_hi: i32) -> Vec<f64> {
    (k_lo..=k_hi).map(|k| 2f64.powi(-k)).collect()
}

/// Grid-cover counts `n(ε)` of points in `ℝ^d` (`d ≤ 8`) and the least-squares
/// slope of `log n` against `log(1/ε)`.
///
/// The grid is anchored at the componentwise minimum of the points, so the
/// counts do not depend on where the set sits.
pub fn box_counting_dimension(points: &[Vec<f64>], scales: &[f64]) -> Result<BoxCount> {
    if points.is_empty() {
        return Err(BeamError::EmptyCloud);
    }
    let d = points[0].len();
    if d == 0 || d > 8 {
        return Err(BeamError::invalid(format!("projection dimension {d} outside 1..=8")));
    }
    if points.iter().any(|p| p.len() != d) {
        return Err(BeamError::invalid("points have mixed dimensions"));
    }
    let mut eps: Vec<f64> = scales.to_vec();
    if eps.iter().any(|e| !(*e > 0.0 && e.is_finite())) {
        return Err(BeamError::DegenerateRange("scales must be positive and finite".into()));
    }
    eps.sort_by(|a, b| b.total_cmp(a));
    eps.dedup();
    if eps.len() < 4 {
        return Err(BeamError::DegenerateRange(format!(
            "need at least 4 distinct scales, got {}",
            eps.len()
        )));
    }
    let origin: Vec<f64> = (0..d)
        .map(|k| points.iter().map(|p| p[k]).fold(f64::INFINITY, f64::min))
        .collect();
    let counts: Vec<(f64, usize)> = eps
        .iter()
        .map(|&e| {
            let mut cells: Vec<Vec<i64>> = points
                .iter()
                .map(|p| {
                    p.iter()
                        .zip(&origin)
                        .map(|(x, o)| ((x - o) / e).floor() as i64)
                        .collect()
                })
                .collect();
            cells.sort_unstable();
            cells.dedup();
            (e, cells.len())
        })
        .collect();
    let pts: Vec<(f64, f64)> = counts
        .iter()
        .map(|&(e, n)| ((1.0 / e).ln(), (n as f64).ln()))
        .collect();
    let (dimension, _, _) = fit::linear_regression(&pts);
    Ok(BoxCount { dimension, counts })
}
