//! Plug-in Wasserstein barycenter between two discrete measures: the
//! midpoint pushforward of the source atoms along the barycentric
//! projection.

use crate::baryproj::barycentric_projection;
use crate::error::{Error, Result};
use crate::measure::DiscreteMeasure;
use crate::numeric::quadrature::integrate;
use crate::ot::solve_ot;

/// Atoms (x_i + That(x_i)) / 2 with the source weights.
#[derive(Debug, Clone)]
pub struct BarycenterEstimate {
    pub atoms: Vec<Vec<f64>>,
    pub weights: Vec<f64>,
}

impl BarycenterEstimate {
    pub fn to_measure(&self) -> Result<DiscreteMeasure> {
        DiscreteMeasure::new(self.atoms.clone(), self.weights.clone())
    }
}

/// Solve the pair, project, and push the source atoms to the midpoint.
pub fn plugin_barycenter(
    src: &DiscreteMeasure,
    tgt: &DiscreteMeasure,
) -> Result<BarycenterEstimate> {
    let plan = solve_ot(src, tgt)?;
    let map = barycentric_projection(&plan);
    let atoms = src
        .points()
        .iter()
        .zip(&map.images)
        .map(|(x, img)| x.iter().zip(img).map(|(&a, &b)| 0.5 * (a + b)).collect())
        .collect();
    Ok(BarycenterEstimate { atoms, weights: src.weights().to_vec() })
}

/// Exact 1-d squared Wasserstein distance between a discrete measure and a
/// continuous law given by its quantile function, via the quantile coupling
/// integral over each atom's mass interval.
pub fn w2sq_to_quantile_law_1d(
    m: &DiscreteMeasure,
    quantile: impl Fn(f64) -> f64,
) -> Result<f64> {
    if m.dim() != 1 {
        return Err(Error::DimensionMismatch { left: m.dim(), right: 1 });
    }
    let mut order: Vec<usize> = (0..m.len()).collect();
    order.sort_by(|&a, &b| m.point(a)[0].total_cmp(&m.point(b)[0]));
    let mut acc = 0.0;
    let mut t0 = 0.0;
    for &i in &order {
        let a = m.point(i)[0];
        let t1 = t0 + m.weight(i);
        acc += integrate(|t| (a - quantile(t)) * (a - quantile(t)), t0, t1, 1e-11);
        t0 = t1;
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::median;
    use crate::seeding::derive;
    use crate::synthetic::{make_linear_problem, MuLaw};

    fn m1d(xs: &[f64]) -> DiscreteMeasure {
        DiscreteMeasure::uniform(xs.iter().map(|&x| vec![x]).collect()).unwrap()
    }

    #[test]
    fn two_atom_exact_case() {
        // mu = (d0 + d1)/2, nu = (d0 + d2)/2: atoms {0, 1.5}
        let b = plugin_barycenter(&m1d(&[0.0, 1.0]), &m1d(&[0.0, 2.0])).unwrap();
        let mut atoms: Vec<f64> = b.atoms.iter().map(|p| p[0]).collect();
        atoms.sort_by(|a, c| a.total_cmp(c));
        assert_eq!(atoms, vec![0.0, 1.5]);
        assert_eq!(b.weights, vec![0.5, 0.5]);
    }

    #[test]
    fn identical_measures_return_source_atoms() {
        let m = m1d(&[0.2, 0.4, 0.9]);
        let b = plugin_barycenter(&m, &m).unwrap();
        assert_eq!(b.atoms, m.points());
    }

    #[test]
    fn two_atom_case_is_equidistant_from_both_marginals() {
        let src = m1d(&[0.0, 1.0]);
        let tgt = m1d(&[0.0, 2.0]);
        let b = plugin_barycenter(&src, &tgt).unwrap().to_measure().unwrap();
        let to_src = crate::ot::w2_squared(&b, &src).unwrap();
        let to_tgt = crate::ot::w2_squared(&b, &tgt).unwrap();
        assert!((to_src - to_tgt).abs() < 1e-9, "{to_src} vs {to_tgt}");
    }

    #[test]
    fn quantile_law_distance_on_matching_grid() {
        // discrete uniform on n cell midpoints vs U[0,1]:
        // W2^2 = n * int_{cell} (midpoint - t)^2 dt = 1/(12 n^2)
        let n = 50;
        let pts: Vec<f64> = (0..n).map(|i| (i as f64 + 0.5) / n as f64).collect();
        let m = m1d(&pts);
        let w = w2sq_to_quantile_law_1d(&m, |t| t).unwrap();
        assert!((w - 1.0 / (12.0 * (n * n) as f64)).abs() < 1e-12);
    }

    #[test]
    fn barycenter_converges_for_shifted_uniforms() {
        // mu = U[0,1], nu = U[2,4] via T0(x) = 2x + 2: barycenter is
        // U[1, 2.5] with quantile 1 + 1.5 t
        let p = make_linear_problem(
            vec![vec![2.0]],
            vec![2.0],
            MuLaw::BoxUniform { lo: vec![0.0], hi: vec![1.0] },
        )
        .unwrap();
        let quantile = |t: f64| 1.0 + 1.5 * t;
        let mut small = Vec::new();
        let mut large = Vec::new();
        for rep in 0..20 {
            for (n, out) in [(128usize, &mut small), (1024, &mut large)] {
                let (src, tgt) = p.sample_pair(n, n, derive(60, rep * 2 + n as u64)).unwrap();
                let b = plugin_barycenter(&src, &tgt).unwrap().to_measure().unwrap();
                out.push(w2sq_to_quantile_law_1d(&b, quantile).unwrap());
            }
        }
        let (ms, ml) = (median(&small), median(&large));
        assert!(ml < ms, "median W2^2 at n=1024 ({ml}) should beat n=128 ({ms})");
    }
}
