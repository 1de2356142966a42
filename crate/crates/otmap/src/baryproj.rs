//! Barycentric projection of transport plans, map error functionals, and a
//! numerical evaluator of the stability inequality that bounds the map error
//! by dual-potential test integrals.

use crate::error::Result;
use crate::measure::DiscreteMeasure;
use crate::ot::{solve_ot, TransportPlan};
use crate::numeric::sqdist;
use crate::synthetic::SyntheticProblem;

/// Slack added to the right hand side when deciding whether the stability
/// inequality holds; absorbs floating-point error in the two LP solves.
pub const STABILITY_SLACK: f64 = 1e-7;

/// The barycentric projection of a plan: one image per source atom, the
/// conditional mean of the target under the coupling.
#[derive(Debug, Clone)]
pub struct BarycentricMap {
    pub source: DiscreteMeasure,
    pub images: Vec<Vec<f64>>,
}

impl BarycentricMap {
    pub fn image(&self, i: usize) -> &[f64] {
        &self.images[i]
    }
}

/// images[i] = sum_j mass(i,j) y_j / sum_j mass(i,j).
pub fn barycentric_projection(plan: &TransportPlan) -> BarycentricMap {
    let m = plan.source.len();
    let d = plan.source.dim();
    let mut sums = vec![vec![0.0; d]; m];
    let mut mass = vec![0.0; m];
    for &(i, j, w) in &plan.entries {
        let y = plan.target.point(j);
        for k in 0..d {
            sums[i][k] += w * y[k];
        }
        mass[i] += w;
    }
    let images = sums
        .into_iter()
        .zip(&mass)
        .map(|(mut s, &w)| {
            debug_assert!(w > 0.0, "source atom with zero plan mass");
            for v in &mut s {
                *v /= w;
            }
            s
        })
        .collect();
    BarycentricMap { source: plan.source.clone(), images }
}

/// Weighted squared error of the projected map against a ground-truth map:
/// sum_i w_i ||images[i] - t0(x_i)||^2.
pub fn map_l2_error(map: &BarycentricMap, t0: impl Fn(&[f64]) -> Vec<f64>) -> f64 {
    map.source
        .points()
        .iter()
        .zip(map.source.weights())
        .zip(&map.images)
        .map(|((x, &w), img)| w * sqdist(img, &t0(x)))
        .sum()
}

/// Both sides of the stability inequality evaluated on one instance.
#[derive(Debug, Clone)]
pub struct StabilityReport {
    /// Map error of the barycentric projection at the returned optimal plan.
    pub lhs: f64,
    /// 2L * max of the two dual-potential test integrals against
    /// (target - pushforward). The factor 2L is what the strong-convexity
    /// argument yields; with L alone the inequality is falsifiable on
    /// ordinary random instances (the phi term below is signed and can go
    /// negative by more than L * max).
    pub rhs_max_term: f64,
    /// 2L * integral of the ground-truth conjugate against the same signed
    /// measure.
    pub rhs_phi_term: f64,
    pub holds: bool,
}

/// Evaluate both sides of the stability inequality exactly as finite sums.
///
/// Solves the plug-in problem (src, tgt) and the oracle problem
/// (src, T0 # src); the dual potentials of each are extended off their
/// native atoms by the discrete Legendre transform over the source atoms.
pub fn stability_report(
    src: &DiscreteMeasure,
    tgt: &DiscreteMeasure,
    problem: &SyntheticProblem,
) -> Result<StabilityReport> {
    let pushed = src.pushforward(|x| problem.t0(x))?;
    let plan_plugin = solve_ot(src, tgt)?;
    let plan_oracle = solve_ot(src, &pushed)?;

    let lhs = map_l2_error(&barycentric_projection(&plan_plugin), |x| problem.t0(x));

    // signed integral against (tgt - pushed); additive constants in f cancel
    let signed_integral = |f: &dyn Fn(&[f64]) -> f64| -> f64 {
        let plus: f64 =
            tgt.points().iter().zip(tgt.weights()).map(|(y, &w)| w * f(y)).sum();
        let minus: f64 =
            pushed.points().iter().zip(pushed.weights()).map(|(y, &w)| w * f(y)).sum();
        plus - minus
    };

    let term_plugin = signed_integral(&|y| plan_plugin.psi_star_at(y)).abs();
    let term_oracle = signed_integral(&|y| plan_oracle.psi_star_at(y)).abs();
    let phi_term = signed_integral(&|y| problem.conjugate(y));

    let l = problem.lipschitz();
    let rhs_max_term = 2.0 * l * term_plugin.max(term_oracle);
    let rhs_phi_term = 2.0 * l * phi_term;
    let holds = lhs <= rhs_max_term + rhs_phi_term + STABILITY_SLACK;
    Ok(StabilityReport { lhs, rhs_max_term, rhs_phi_term, holds })
}
