//! Exhaustive-search oracle for tiny transport instances.
//!
//! Equal-weight same-size instances are minimized over all permutations.
//! General instances are minimized over every vertex of the transportation
//! polytope: each vertex is the basic solution of a spanning tree of the
//! complete bipartite support graph, so enumerating spanning trees and
//! keeping the best feasible one is a complete search. Dual potentials are
//! recovered afterwards from difference constraints by Bellman-Ford, which
//! keeps the oracle independent of the production solvers.

use super::CostMatrix;
use crate::error::{Error, Result};

/// Best permutation plan for an equal-weight instance with n atoms per side.
pub fn best_permutation(cost: &CostMatrix, n: usize) -> Vec<(usize, usize, f64)> {
    let mut perm: Vec<usize> = (0..n).collect();
    let mut best_perm = perm.clone();
    let mut best = eval_perm(cost, &perm);
    heaps(&mut perm, n, cost, &mut best, &mut best_perm);
    let mass = 1.0 / n as f64;
    best_perm.iter().enumerate().map(|(i, &j)| (i, j, mass)).collect()
}

fn eval_perm(cost: &CostMatrix, perm: &[usize]) -> f64 {
    perm.iter().enumerate().map(|(i, &j)| cost.at(i, j)).sum()
}

fn heaps(perm: &mut Vec<usize>, k: usize, cost: &CostMatrix, best: &mut f64, best_perm: &mut Vec<usize>) {
    if k == 1 {
        let c = eval_perm(cost, perm);
        if c < *best {
            *best = c;
            best_perm.copy_from_slice(perm);
        }
        return;
    }
    for i in 0..k {
        heaps(perm, k - 1, cost, best, best_perm);
        if k % 2 == 0 {
            perm.swap(i, k - 1);
        } else {
            perm.swap(0, k - 1);
        }
    }
}

struct TreeSearch<'a> {
    m: usize,
    n: usize,
    cost: &'a CostMatrix,
    supplies: &'a [f64],
    demands: &'a [f64],
    chosen: Vec<(usize, usize)>,
    // union-find with rollback (union by size, no path compression)
    parent: Vec<usize>,
    size: Vec<usize>,
    undo: Vec<(usize, usize)>,
    best_cost: f64,
    best_flows: Vec<(usize, usize, f64)>,
}

impl<'a> TreeSearch<'a> {
    fn find(&self, mut x: usize) -> usize {
        while self.parent[x] != x {
            x = self.parent[x];
        }
        x
    }

    /// Union two components; returns false (and records nothing) on a cycle.
    fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        let (child, root) = if self.size[ra] < self.size[rb] { (ra, rb) } else { (rb, ra) };
        self.undo.push((child, root));
        self.parent[child] = root;
        self.size[root] += self.size[child];
        true
    }

    fn rollback(&mut self) {
        let (child, root) = self.undo.pop().expect("rollback without union");
        self.parent[child] = child;
        self.size[root] -= self.size[child];
    }

    fn recurse(&mut self, next_edge: usize) {
        let needed = (self.m + self.n - 1) - self.chosen.len();
        if needed == 0 {
            self.evaluate();
            return;
        }
        if next_edge + needed > self.m * self.n {
            return;
        }
        let (i, j) = (next_edge / self.n, next_edge % self.n);
        if self.union(i, self.m + j) {
            self.chosen.push((i, j));
            self.recurse(next_edge + 1);
            self.chosen.pop();
            self.rollback();
        }
        self.recurse(next_edge + 1);
    }

    /// Solve the tree's basic solution by leaf stripping; keep it if feasible
    /// and cheaper than the incumbent.
    fn evaluate(&mut self) {
        let nodes = self.m + self.n;
        let mut degree = vec![0usize; nodes];
        let mut net = vec![0.0f64; nodes];
        for i in 0..self.m {
            net[i] = self.supplies[i];
        }
        for j in 0..self.n {
            net[self.m + j] = self.demands[j];
        }
        // adjacency over exactly m+n-1 arcs: store (arc index, other node)
        let mut adj: Vec<Vec<(usize, usize)>> = vec![Vec::new(); nodes];
        for (idx, &(i, j)) in self.chosen.iter().enumerate() {
            degree[i] += 1;
            degree[self.m + j] += 1;
            adj[i].push((idx, self.m + j));
            adj[self.m + j].push((idx, i));
        }
        let mut removed_arc = vec![false; self.chosen.len()];
        let mut removed_node = vec![false; nodes];
        let mut stack: Vec<usize> = (0..nodes).filter(|&v| degree[v] == 1).collect();
        let mut flows = vec![0.0f64; self.chosen.len()];
        let mut cost_acc = 0.0;
        let tol = -1e-12 * (1.0 + self.supplies.iter().sum::<f64>());
        let mut processed = 0;
        while let Some(node) = stack.pop() {
            if removed_node[node] || degree[node] != 1 {
                continue;
            }
            let Some(&(arc, other)) = adj[node]
                .iter()
                .find(|&&(arc, _)| !removed_arc[arc])
            else {
                continue;
            };
            let f = net[node];
            if f < tol {
                return; // infeasible vertex
            }
            let f = f.max(0.0);
            flows[arc] = f;
            let (i, j) = self.chosen[arc];
            cost_acc += f * self.cost.at(i, j);
            if cost_acc > self.best_cost {
                // nonnegative costs: a partial sum over budget is final
                return;
            }
            net[node] = 0.0;
            net[other] -= f;
            if net[other] < tol {
                return;
            }
            removed_arc[arc] = true;
            removed_node[node] = true;
            degree[node] -= 1;
            degree[other] -= 1;
            if degree[other] == 1 {
                stack.push(other);
            }
            processed += 1;
        }
        if processed != self.chosen.len() {
            return;
        }
        if cost_acc < self.best_cost {
            self.best_cost = cost_acc;
            self.best_flows = self
                .chosen
                .iter()
                .zip(&flows)
                .map(|(&(i, j), &f)| (i, j, f))
                .collect();
        }
    }
}

/// Minimum-cost vertex of the transportation polytope by spanning-tree
/// enumeration.
pub fn best_vertex(
    supplies: &[f64],
    demands: &[f64],
    cost: &CostMatrix,
) -> Result<Vec<(usize, usize, f64)>> {
    let (m, n) = (supplies.len(), demands.len());
    let nodes = m + n;
    let mut search = TreeSearch {
        m,
        n,
        cost,
        supplies,
        demands,
        chosen: Vec::with_capacity(nodes - 1),
        parent: (0..nodes).collect(),
        size: vec![1; nodes],
        undo: Vec::with_capacity(nodes),
        best_cost: f64::INFINITY,
        best_flows: Vec::new(),
    };
    search.recurse(0);
    if search.best_flows.is_empty() {
        return Err(Error::SolverStalled("no feasible vertex found".into()));
    }
    Ok(search.best_flows)
}

/// Recover optimal LP duals from an optimal plan via difference constraints.
///
/// Feasibility `u_i + v_j <= c_ij` for all cells and equality on the support
/// is a shortest-path system: with `x_i = -u_i` and `x_{m+j} = v_j`, every
/// cell gives the arc `i -> m+j` of weight `c_ij` and every support cell the
/// reverse arc of weight `-c_ij`. Bellman-Ford from a virtual source solves
/// it; a negative cycle would contradict optimality of the plan.
pub fn duals_from_plan(
    entries: &[(usize, usize, f64)],
    cost: &CostMatrix,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let (m, n) = (cost.rows, cost.cols);
    let nodes = m + n;
    let scale = 1.0 + cost.max_abs();
    let eps = 1e-12 * scale;
    let mut dist = vec![0.0f64; nodes];
    let support: Vec<(usize, usize)> = entries
        .iter()
        .filter(|&&(_, _, w)| w > 1e-15)
        .map(|&(i, j, _)| (i, j))
        .collect();
    // Alternative equal-length paths can keep relaxing by rounding noise, so
    // the loop runs a bounded number of rounds and the result is verified
    // against the constraints directly instead of trusting quiescence.
    for _ in 0..2 * nodes + 10 {
        let mut changed = false;
        for i in 0..m {
            for j in 0..n {
                let w = dist[i] + cost.at(i, j);
                if w < dist[m + j] - eps {
                    dist[m + j] = w;
                    changed = true;
                }
            }
        }
        for &(i, j) in &support {
            let w = dist[m + j] - cost.at(i, j);
            if w < dist[i] - eps {
                dist[i] = w;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    let u: Vec<f64> = (0..m).map(|i| -dist[i]).collect();
    let v: Vec<f64> = (0..n).map(|j| dist[m + j]).collect();
    let tol = 1e-9 * scale;
    for i in 0..m {
        for j in 0..n {
            if u[i] + v[j] > cost.at(i, j) + tol {
                return Err(Error::SolverStalled(
                    "dual recovery infeasible; plan is not optimal".into(),
                ));
            }
        }
    }
    for &(i, j) in &support {
        if (u[i] + v[j] - cost.at(i, j)).abs() > tol {
            return Err(Error::SolverStalled(
                "complementary slackness unattainable; plan is not optimal".into(),
            ));
        }
    }
    Ok((u, v))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cm(rows: Vec<Vec<f64>>) -> CostMatrix {
        let m = rows.len();
        let n = rows[0].len();
        CostMatrix { rows: m, cols: n, data: rows.into_iter().flatten().collect() }
    }

    #[test]
    fn vertex_enumeration_beats_staircases() {
        // same double-star instance as the simplex test
        let cost = cm(vec![
            vec![4.81, 0.01, 5.21],
            vec![1.0, 4.0, 1.0],
            vec![5.21, 0.01, 4.81],
        ]);
        let flows = best_vertex(&[0.15, 0.7, 0.15], &[0.3, 0.4, 0.3], &cost).unwrap();
        let total: f64 = flows.iter().map(|&(i, j, f)| f * cost.at(i, j)).sum();
        assert!((total - 1.003).abs() < 1e-12);
        let (u, v) = duals_from_plan(&flows, &cost).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                assert!(u[i] + v[j] <= cost.at(i, j) + 1e-9);
            }
        }
    }

    #[test]
    fn permutation_oracle_small() {
        let cost = cm(vec![
            vec![0.0, 4.0],
            vec![1.0, 1.0],
        ]);
        let plan = best_permutation(&cost, 2);
        let total: f64 = plan.iter().map(|&(i, j, f)| f * cost.at(i, j)).sum();
        assert!((total - 0.5).abs() < 1e-15);
    }
}
