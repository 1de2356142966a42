//! Weighted point clouds in R^d.

use crate::error::{Error, Result};

const WEIGHT_SUM_TOL: f64 = 1e-12;

/// A finitely supported probability measure: points in R^d with strictly
/// positive weights summing to one.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteMeasure {
    points: Vec<Vec<f64>>,
    weights: Vec<f64>,
    dim: usize,
}

impl DiscreteMeasure {
    /// Build a measure, enforcing the construction invariants: nonempty,
    /// consistent dimension, finite coordinates, strictly positive weights
    /// (zero-weight atoms are rejected) summing to 1 within 1e-12.
    pub fn new(points: Vec<Vec<f64>>, weights: Vec<f64>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::InvalidMeasure("no atoms".into()));
        }
        if points.len() != weights.len() {
            return Err(Error::InvalidMeasure(format!(
                "{} points but {} weights",
                points.len(),
                weights.len()
            )));
        }
        let dim = points[0].len();
        if dim == 0 {
            return Err(Error::InvalidMeasure("zero-dimensional points".into()));
        }
        for (i, p) in points.iter().enumerate() {
            if p.len() != dim {
                return Err(Error::InvalidMeasure(format!(
                    "atom {i} has dimension {} (expected {dim})",
                    p.len()
                )));
            }
            if p.iter().any(|c| !c.is_finite()) {
                return Err(Error::InvalidMeasure(format!("atom {i} has non-finite coordinate")));
            }
        }
        for (i, &w) in weights.iter().enumerate() {
            if !w.is_finite() || w <= 0.0 {
                return Err(Error::InvalidMeasure(format!(
                    "atom {i} has weight {w}; weights must be strictly positive"
                )));
            }
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > WEIGHT_SUM_TOL {
            return Err(Error::InvalidMeasure(format!(
                "weights sum to {total}, not 1 (tolerance {WEIGHT_SUM_TOL})"
            )));
        }
        Ok(Self { points, weights, dim })
    }

    /// Uniform weights 1/n on the given points.
    pub fn uniform(points: Vec<Vec<f64>>) -> Result<Self> {
        let n = points.len();
        if n == 0 {
            return Err(Error::InvalidMeasure("no atoms".into()));
        }
        let w = 1.0 / n as f64;
        let mut weights = vec![w; n];
        // Make the sum exactly representable by absorbing rounding into the
        // last weight; keeps the 1e-12 invariant for any n.
        let sum_first: f64 = weights[..n - 1].iter().sum();
        weights[n - 1] = 1.0 - sum_first;
        Self::new(points, weights)
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn points(&self) -> &[Vec<f64>] {
        &self.points
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.points[i]
    }

    pub fn weight(&self, i: usize) -> f64 {
        self.weights[i]
    }

    /// True when every atom carries weight 1/n (within 1e-12); such pairs
    /// route to the assignment solver when sizes also match.
    pub fn is_uniform(&self) -> bool {
        let w = 1.0 / self.len() as f64;
        self.weights.iter().all(|&x| (x - w).abs() <= 1e-12)
    }

    /// Weighted mean of the atoms.
    pub fn mean(&self) -> Vec<f64> {
        let mut m = vec![0.0; self.dim];
        for (p, &w) in self.points.iter().zip(&self.weights) {
            for k in 0..self.dim {
                m[k] += w * p[k];
            }
        }
        m
    }

    /// Pushforward: apply `f` to every atom, keeping weights.
    pub fn pushforward(&self, f: impl Fn(&[f64]) -> Vec<f64>) -> Result<Self> {
        let points = self.points.iter().map(|p| f(p)).collect();
        Self::new(points, self.weights.clone())
    }

    /// Weighted second moment sum_i w_i ||x_i||^2.
    pub fn second_moment(&self) -> f64 {
        self.points
            .iter()
            .zip(&self.weights)
            .map(|(p, &w)| w * crate::numeric::norm_sq(p))
            .sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_construction() {
        assert!(DiscreteMeasure::new(vec![], vec![]).is_err());
        assert!(DiscreteMeasure::new(vec![vec![0.0]], vec![0.5]).is_err());
        assert!(DiscreteMeasure::new(vec![vec![0.0], vec![1.0, 2.0]], vec![0.5, 0.5]).is_err());
        // zero-weight atom is forbidden
        assert!(DiscreteMeasure::new(vec![vec![0.0], vec![1.0]], vec![1.0, 0.0]).is_err());
        assert!(DiscreteMeasure::new(vec![vec![f64::NAN]], vec![1.0]).is_err());
    }

    #[test]
    fn uniform_sums_to_one_exactly_enough() {
        for n in [1usize, 3, 7, 1000, 4097] {
            let pts = (0..n).map(|i| vec![i as f64]).collect();
            let m = DiscreteMeasure::uniform(pts).unwrap();
            assert!((m.weights().iter().sum::<f64>() - 1.0).abs() <= 1e-12);
            assert!(m.is_uniform());
        }
    }

    #[test]
    fn mean_and_pushforward() {
        let m = DiscreteMeasure::uniform(vec![vec![0.0, 0.0], vec![2.0, 4.0]]).unwrap();
        assert_eq!(m.mean(), vec![1.0, 2.0]);
        let shifted = m.pushforward(|p| vec![p[0] + 1.0, p[1]]).unwrap();
        assert_eq!(shifted.mean(), vec![2.0, 2.0]);
    }
}
