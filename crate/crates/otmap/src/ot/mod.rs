//! Exact discrete optimal transport under squared Euclidean cost.
//!
//! `solve_ot` routes equal-weight, equal-size instances to a shortest
//! augmenting path assignment solver and everything else to a
//! transportation-network simplex. Both produce an optimal vertex of the
//! transportation polytope together with LP dual potentials, which are
//! converted to values of the convex potential and its Legendre dual.
//! `brute_force_ot` re-solves tiny instances by exhaustive enumeration and
//! serves as the testing oracle.

mod assignment;
mod brute;
mod simplex;

pub use assignment::solve_assignment;

use crate::error::{Error, Result};
use crate::measure::DiscreteMeasure;
use crate::numeric::{dot, norm_sq, sqdist};

/// Marginal / mass tolerance for plan invariants.
pub const PLAN_TOL: f64 = 1e-9;
/// Tolerance for the primal-dual gap identity.
pub const GAP_TOL: f64 = 1e-7;

/// Dense squared-distance matrix, row-major.
#[derive(Debug, Clone)]
pub struct CostMatrix {
    pub rows: usize,
    pub cols: usize,
    data: Vec<f64>,
}

impl CostMatrix {
    #[inline]
    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |a, &b| a.max(b.abs()))
    }
}

/// Values of the optimal convex potential at source atoms (`psi`) and of its
/// Legendre dual at target atoms (`psi_star`), normalized so `psi[0] == 0`.
#[derive(Debug, Clone)]
pub struct DualPotentials {
    pub psi: Vec<f64>,
    pub psi_star: Vec<f64>,
}

/// An optimal coupling between two discrete measures.
#[derive(Debug, Clone)]
pub struct TransportPlan {
    /// Sparse entries `(source index, target index, mass)`, mass > 0.
    pub entries: Vec<(usize, usize, f64)>,
    /// Optimal squared-Euclidean transport cost.
    pub cost: f64,
    pub source: DiscreteMeasure,
    pub target: DiscreteMeasure,
    pub duals: DualPotentials,
}

/// C[i][j] = ||x_i - y_j||^2.
pub fn cost_matrix(src: &DiscreteMeasure, tgt: &DiscreteMeasure) -> Result<CostMatrix> {
    if src.dim() != tgt.dim() {
        return Err(Error::DimensionMismatch { left: src.dim(), right: tgt.dim() });
    }
    let (m, n) = (src.len(), tgt.len());
    let mut data = vec![0.0; m * n];
    for i in 0..m {
        let xi = src.point(i);
        let row = &mut data[i * n..(i + 1) * n];
        for (j, slot) in row.iter_mut().enumerate() {
            *slot = sqdist(xi, tgt.point(j));
        }
    }
    Ok(CostMatrix { rows: m, cols: n, data })
}

/// Exact optimal transport between two discrete measures.
pub fn solve_ot(src: &DiscreteMeasure, tgt: &DiscreteMeasure) -> Result<TransportPlan> {
    let cost = cost_matrix(src, tgt)?;
    let (entries, u, v) = if src.dim() == 1 {
        solve_1d_monotone(src, tgt, &cost)
    } else if src.len() == tgt.len() && src.is_uniform() && tgt.is_uniform() {
        let res = assignment::solve_assignment(&cost);
        let mass = 1.0 / src.len() as f64;
        let entries: Vec<(usize, usize, f64)> = res
            .row_to_col
            .iter()
            .enumerate()
            .map(|(i, &j)| (i, j, mass))
            .collect();
        // Assignment duals price one unit per pair; the transportation LP
        // prices per unit mass, so the potentials carry over unchanged.
        (entries, res.u, res.v)
    } else {
        let res = simplex::solve_transportation(src.weights(), tgt.weights(), &cost)?;
        (res.flows, res.u, res.v)
    };
    let plan = finish_plan(src, tgt, entries, u, v);
    #[cfg(debug_assertions)]
    plan.validate().expect("solver returned an invalid plan");
    Ok(plan)
}

/// W2^2 = optimal cost of `solve_ot`.
pub fn w2_squared(src: &DiscreteMeasure, tgt: &DiscreteMeasure) -> Result<f64> {
    Ok(solve_ot(src, tgt)?.cost)
}

/// Globally optimal plan by exhaustive search; the testing oracle.
///
/// Equal-weight same-size instances with at most 6 atoms are enumerated over
/// permutations; general instances with at most 5 atoms per side are
/// enumerated over all vertices (spanning trees) of the transportation
/// polytope.
pub fn brute_force_ot(src: &DiscreteMeasure, tgt: &DiscreteMeasure) -> Result<TransportPlan> {
    let cost = cost_matrix(src, tgt)?;
    let equal = src.len() == tgt.len() && src.is_uniform() && tgt.is_uniform();
    let entries = if equal && src.len() <= 6 {
        brute::best_permutation(&cost, src.len())
    } else if src.len() <= 5 && tgt.len() <= 5 {
        brute::best_vertex(src.weights(), tgt.weights(), &cost)?
    } else {
        return Err(Error::InstanceTooLarge {
            atoms: src.len().max(tgt.len()),
            limit: if equal { 6 } else { 5 },
        });
    };
    let (u, v) = brute::duals_from_plan(&entries, &cost)?;
    Ok(finish_plan(src, tgt, entries, u, v))
}

/// One-dimensional fast path: the monotone (sorted) coupling is optimal for
/// the squared cost, and the staircase basis it induces carries feasible
/// duals because sorted squared distances form a Monge matrix.
fn solve_1d_monotone(
    src: &DiscreteMeasure,
    tgt: &DiscreteMeasure,
    cost: &CostMatrix,
) -> (Vec<(usize, usize, f64)>, Vec<f64>, Vec<f64>) {
    let (m, n) = (src.len(), tgt.len());
    let mut src_order: Vec<usize> = (0..m).collect();
    src_order.sort_by(|&a, &b| src.point(a)[0].total_cmp(&src.point(b)[0]));
    let mut tgt_order: Vec<usize> = (0..n).collect();
    tgt_order.sort_by(|&a, &b| tgt.point(a)[0].total_cmp(&tgt.point(b)[0]));
    let supplies: Vec<f64> = src_order.iter().map(|&i| src.weight(i)).collect();
    let demands: Vec<f64> = tgt_order.iter().map(|&j| tgt.weight(j)).collect();
    let basis = simplex::northwest_corner(&supplies, &demands);
    // Propagate duals along the staircase: consecutive basic cells share a
    // row or a column, so each step determines one new potential.
    let mut u = vec![f64::NAN; m];
    let mut v = vec![f64::NAN; n];
    let mut entries = Vec::with_capacity(basis.len());
    for arc in &basis {
        let i = src_order[arc.row];
        let j = tgt_order[arc.col];
        let c = cost.at(i, j);
        if u[i].is_nan() && v[j].is_nan() {
            u[i] = 0.0;
        }
        if u[i].is_nan() {
            u[i] = c - v[j];
        } else if v[j].is_nan() {
            v[j] = c - u[i];
        }
        if arc.flow > 0.0 {
            entries.push((i, j, arc.flow));
        }
    }
    (entries, u, v)
}

/// Discrete Legendre transform of `psi` over the given support points:
/// `max_i <x_i, y> - psi[i]`. Evaluates the dual potential anywhere.
pub fn legendre_transform(points: &[Vec<f64>], psi: &[f64], y: &[f64]) -> f64 {
    points
        .iter()
        .zip(psi)
        .map(|(x, &p)| dot(x, y) - p)
        .fold(f64::NEG_INFINITY, f64::max)
}

fn finish_plan(
    src: &DiscreteMeasure,
    tgt: &DiscreteMeasure,
    raw_entries: Vec<(usize, usize, f64)>,
    u: Vec<f64>,
    v: Vec<f64>,
) -> TransportPlan {
    let entries: Vec<(usize, usize, f64)> = raw_entries
        .into_iter()
        .filter(|&(_, _, w)| w > 1e-15)
        .collect();
    let mut cost = 0.0;
    for &(i, j, w) in &entries {
        cost += w * sqdist(src.point(i), tgt.point(j));
    }
    // LP duals (u_i + v_j <= ||x_i - y_j||^2) to potential values
    // (psi_i + psi*_j >= <x_i, y_j>), anchored at psi[0] = 0.
    let mut psi: Vec<f64> = src
        .points()
        .iter()
        .zip(&u)
        .map(|(x, &ui)| 0.5 * (norm_sq(x) - ui))
        .collect();
    let mut psi_star: Vec<f64> = tgt
        .points()
        .iter()
        .zip(&v)
        .map(|(y, &vj)| 0.5 * (norm_sq(y) - vj))
        .collect();
    let anchor = psi[0];
    for p in &mut psi {
        *p -= anchor;
    }
    for p in &mut psi_star {
        *p += anchor;
    }
    TransportPlan {
        entries,
        cost,
        source: src.clone(),
        target: tgt.clone(),
        duals: DualPotentials { psi, psi_star },
    }
}

impl TransportPlan {
    /// Evaluate the Legendre dual of `psi` at an arbitrary point, consistent
    /// with `duals.psi_star` on the target atoms.
    pub fn psi_star_at(&self, y: &[f64]) -> f64 {
        legendre_transform(self.source.points(), &self.duals.psi, y)
    }

    /// Check every plan and dual invariant: marginals, nonnegative masses,
    /// cost consistency, dual feasibility, complementary slackness and the
    /// primal-dual gap identity.
    pub fn validate(&self) -> Result<()> {
        let (m, n) = (self.source.len(), self.target.len());
        let mut row = vec![0.0; m];
        let mut col = vec![0.0; n];
        let mut cost = 0.0;
        for &(i, j, w) in &self.entries {
            if w < 0.0 {
                return Err(Error::InvalidMeasure(format!("negative mass at ({i},{j})")));
            }
            row[i] += w;
            col[j] += w;
            cost += w * sqdist(self.source.point(i), self.target.point(j));
        }
        for i in 0..m {
            if (row[i] - self.source.weight(i)).abs() > PLAN_TOL {
                return Err(Error::InvalidMeasure(format!(
                    "row {i} marginal {} != {}",
                    row[i],
                    self.source.weight(i)
                )));
            }
        }
        for j in 0..n {
            if (col[j] - self.target.weight(j)).abs() > PLAN_TOL {
                return Err(Error::InvalidMeasure(format!(
                    "col {j} marginal {} != {}",
                    col[j],
                    self.target.weight(j)
                )));
            }
        }
        if (cost - self.cost).abs() > PLAN_TOL * (1.0 + cost.abs()) {
            return Err(Error::InvalidMeasure(format!(
                "stored cost {} != recomputed {cost}",
                self.cost
            )));
        }
        self.validate_duals()
    }

    fn validate_duals(&self) -> Result<()> {
        let psi = &self.duals.psi;
        let psi_star = &self.duals.psi_star;
        let scale = 1.0 + self.source.second_moment() + self.target.second_moment();
        let tol = PLAN_TOL * scale;
        for (i, x) in self.source.points().iter().enumerate() {
            for (j, y) in self.target.points().iter().enumerate() {
                if psi[i] + psi_star[j] < dot(x, y) - tol {
                    return Err(Error::InvalidMeasure(format!(
                        "dual infeasible at ({i},{j}): {} < {}",
                        psi[i] + psi_star[j],
                        dot(x, y)
                    )));
                }
            }
        }
        for &(i, j, _) in &self.entries {
            let gap = psi[i] + psi_star[j] - dot(self.source.point(i), self.target.point(j));
            if gap.abs() > tol {
                return Err(Error::InvalidMeasure(format!(
                    "complementary slackness violated at ({i},{j}): gap {gap}"
                )));
            }
        }
        // 1/2 sum w||x||^2 + 1/2 sum v||y||^2 - S(psi) = 1/2 cost
        let s: f64 = self
            .source
            .weights()
            .iter()
            .zip(psi)
            .map(|(&w, &p)| w * p)
            .sum::<f64>()
            + self
                .target
                .weights()
                .iter()
                .zip(psi_star)
                .map(|(&w, &p)| w * p)
                .sum::<f64>();
        let primal = 0.5 * self.source.second_moment() + 0.5 * self.target.second_moment();
        if (primal - s - 0.5 * self.cost).abs() > GAP_TOL * scale {
            return Err(Error::InvalidMeasure(format!(
                "duality gap: {} != {}",
                primal - s,
                0.5 * self.cost
            )));
        }
        Ok(())
    }
}
