//! Transportation-network simplex on the complete bipartite graph.
//!
//! The basis is a spanning tree over m source and n sink nodes. Pivots use
//! Dantzig pricing with a rotating block scan; if the iteration budget is
//! exhausted (degenerate cycling), the solver switches to Bland's rule,
//! which terminates finitely.

use super::CostMatrix;
use crate::error::{Error, Result};

pub struct SimplexResult {
    pub flows: Vec<(usize, usize, f64)>,
    pub u: Vec<f64>,
    pub v: Vec<f64>,
}

#[derive(Debug, Clone, Copy)]
pub(super) struct Arc {
    pub(super) row: usize,
    pub(super) col: usize,
    pub(super) flow: f64,
}

pub fn solve_transportation(
    supplies: &[f64],
    demands: &[f64],
    cost: &CostMatrix,
) -> Result<SimplexResult> {
    let m = supplies.len();
    let n = demands.len();
    assert_eq!(cost.rows, m);
    assert_eq!(cost.cols, n);
    let tol_rc = 1e-11 * (1.0 + cost.max_abs());

    let mut basis = northwest_corner(supplies, demands);
    debug_assert_eq!(basis.len(), m + n - 1);

    let nodes = m + n;
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); nodes];
    let mut u = vec![0.0; m];
    let mut v = vec![0.0; n];
    let mut parent_node = vec![usize::MAX; nodes];
    let mut parent_arc = vec![usize::MAX; nodes];
    let mut depth = vec![0usize; nodes];
    let mut order = Vec::with_capacity(nodes);

    let dantzig_budget = 80 * (m + n) + 2000;
    let total_budget = 2000 * (m + n) + 200_000;
    let mut cursor = 0usize;
    let block = (m * n / 8).clamp(256, 16_384);

    for iter in 0..total_budget {
        // Rebuild tree structure and duals from the current basis.
        rebuild_tree(&basis, m, nodes, &mut adj, &mut parent_node, &mut parent_arc, &mut depth, &mut order);
        compute_duals(&basis, cost, m, &order, &parent_arc, &mut u, &mut v);

        let entering = if iter < dantzig_budget {
            price_block(cost, &u, &v, tol_rc, &mut cursor, block)
        } else {
            price_bland(cost, &u, &v, tol_rc)
        };
        let Some((ei, ej)) = entering else {
            return Ok(finish(basis, u, v));
        };

        // Cycle: tree path from row node ei to col node m + ej, plus the
        // entering arc. Flow alternates -theta, +theta, ... along the path.
        let path = tree_path(ei, m + ej, &parent_node, &parent_arc, &depth);
        let mut theta = f64::INFINITY;
        let mut leave_pos = usize::MAX;
        for (pos, &arc_idx) in path.iter().enumerate() {
            if pos % 2 == 0 {
                let f = basis[arc_idx].flow;
                if f < theta {
                    theta = f;
                    leave_pos = pos;
                }
            }
        }
        debug_assert!(leave_pos != usize::MAX);
        let leaving = path[leave_pos];
        for (pos, &arc_idx) in path.iter().enumerate() {
            if pos % 2 == 0 {
                basis[arc_idx].flow = (basis[arc_idx].flow - theta).max(0.0);
            } else {
                basis[arc_idx].flow += theta;
            }
        }
        basis[leaving] = Arc { row: ei, col: ej, flow: theta };
    }
    Err(Error::SolverStalled(format!(
        "transportation simplex exceeded {total_budget} pivots on a {m}x{n} instance"
    )))
}

/// North-west corner initial basic feasible solution. When a row and a
/// column exhaust simultaneously, a zero-flow basic cell keeps the basis a
/// spanning tree of m + n - 1 arcs.
pub(super) fn northwest_corner(supplies: &[f64], demands: &[f64]) -> Vec<Arc> {
    let (m, n) = (supplies.len(), demands.len());
    let mut a = supplies.to_vec();
    let mut b = demands.to_vec();
    let mut basis = Vec::with_capacity(m + n - 1);
    let (mut i, mut j) = (0usize, 0usize);
    let eps = 1e-14 * (1.0 + supplies.iter().sum::<f64>());
    loop {
        let x = a[i].min(b[j]);
        basis.push(Arc { row: i, col: j, flow: x.max(0.0) });
        a[i] -= x;
        b[j] -= x;
        if i == m - 1 && j == n - 1 {
            break;
        }
        let row_done = a[i] <= eps;
        let col_done = b[j] <= eps;
        if row_done && (!col_done || j == n - 1) {
            i += 1;
        } else {
            j += 1;
        }
    }
    basis
}

#[allow(clippy::too_many_arguments)]
fn rebuild_tree(
    basis: &[Arc],
    m: usize,
    nodes: usize,
    adj: &mut [Vec<usize>],
    parent_node: &mut [usize],
    parent_arc: &mut [usize],
    depth: &mut [usize],
    order: &mut Vec<usize>,
) {
    for l in adj.iter_mut() {
        l.clear();
    }
    for (idx, arc) in basis.iter().enumerate() {
        adj[arc.row].push(idx);
        adj[m + arc.col].push(idx);
    }
    parent_arc.fill(usize::MAX);
    parent_node[0] = 0;
    depth[0] = 0;
    order.clear();
    order.push(0);
    let mut head = 0;
    while head < order.len() {
        let node = order[head];
        head += 1;
        for &arc_idx in &adj[node] {
            let arc = &basis[arc_idx];
            let other = if node == arc.row { m + arc.col } else { arc.row };
            if other != 0 && parent_arc[other] == usize::MAX {
                parent_node[other] = node;
                parent_arc[other] = arc_idx;
                depth[other] = depth[node] + 1;
                order.push(other);
            }
        }
    }
    debug_assert_eq!(order.len(), nodes, "basis is not a spanning tree");
}

fn compute_duals(
    basis: &[Arc],
    cost: &CostMatrix,
    m: usize,
    order: &[usize],
    parent_arc: &[usize],
    u: &mut [f64],
    v: &mut [f64],
) {
    u[0] = 0.0;
    for &node in &order[1..] {
        let arc = &basis[parent_arc[node]];
        if node >= m {
            // col node: v_j = c_ij - u_i
            v[node - m] = cost.at(arc.row, arc.col) - u[arc.row];
        } else {
            u[node] = cost.at(arc.row, arc.col) - v[arc.col];
        }
    }
}

/// Rotating block Dantzig pricing: returns the most negative reduced-cost
/// cell within the first block (starting at `cursor`) that contains one.
fn price_block(
    cost: &CostMatrix,
    u: &[f64],
    v: &[f64],
    tol: f64,
    cursor: &mut usize,
    block: usize,
) -> Option<(usize, usize)> {
    let total = cost.rows * cost.cols;
    let mut scanned = 0usize;
    while scanned < total {
        let mut best: Option<(usize, usize)> = None;
        let mut best_rc = -tol;
        let end = (*cursor + block).min(*cursor + (total - scanned));
        for raw in *cursor..end {
            let cell = raw % total;
            let i = cell / cost.cols;
            let j = cell % cost.cols;
            let rc = cost.at(i, j) - u[i] - v[j];
            if rc < best_rc {
                best_rc = rc;
                best = Some((i, j));
            }
        }
        scanned += end - *cursor;
        *cursor = end % total;
        if best.is_some() {
            return best;
        }
    }
    None
}

fn price_bland(cost: &CostMatrix, u: &[f64], v: &[f64], tol: f64) -> Option<(usize, usize)> {
    for i in 0..cost.rows {
        for j in 0..cost.cols {
            if cost.at(i, j) - u[i] - v[j] < -tol {
                return Some((i, j));
            }
        }
    }
    None
}

/// Arcs on the tree path from `a` to `b`, ordered so that even positions are
/// the arcs whose flow decreases when pushing along the cycle closed by the
/// entering arc (a = entering row, b = entering col node).
fn tree_path(
    a: usize,
    b: usize,
    parent_node: &[usize],
    parent_arc: &[usize],
    depth: &[usize],
) -> Vec<usize> {
    let mut up_a = Vec::new();
    let mut up_b = Vec::new();
    let (mut x, mut y) = (a, b);
    while depth[x] > depth[y] {
        up_a.push(parent_arc[x]);
        x = parent_node[x];
    }
    while depth[y] > depth[x] {
        up_b.push(parent_arc[y]);
        y = parent_node[y];
    }
    while x != y {
        up_a.push(parent_arc[x]);
        x = parent_node[x];
        up_b.push(parent_arc[y]);
        y = parent_node[y];
    }
    // Path a -> apex -> b: arcs from a upward, then from apex down to b.
    up_b.reverse();
    up_a.extend(up_b);
    up_a
}

fn finish(basis: Vec<Arc>, u: Vec<f64>, v: Vec<f64>) -> SimplexResult {
    let flows = basis
        .into_iter()
        .map(|arc| (arc.row, arc.col, arc.flow))
        .collect();
    SimplexResult { flows, u, v }
}
