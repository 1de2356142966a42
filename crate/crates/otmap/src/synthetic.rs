//! Ground-truth transport problems.
//!
//! Each problem ships a samplable compactly supported source law, a map that
//! is the gradient of a convex potential, the potential's convex conjugate in
//! closed form, its Lipschitz constant, and the true squared Wasserstein
//! distance between the source law and its pushforward. That is everything
//! needed to evaluate estimator errors exactly.

use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measure::DiscreteMeasure;
use crate::numeric::linalg::{cholesky, mat_vec, spd_inverse, sym_eigenvalues};
use crate::numeric::quadrature::integrate;
use crate::numeric::{dot, normal_cdf, normal_quantile};
use crate::seeding::{rng_for, StreamRole};

/// A strictly increasing smooth map of one coordinate.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "map", rename_all = "snake_case", deny_unknown_fields)]
pub enum CoordMap {
    /// g(x) = scale * x + shift, scale > 0
    Affine { scale: f64, shift: f64 },
    /// g(x) = x + coef * x^3 / 3, coef >= 0
    Cubic { coef: f64 },
    /// g(x) = x + amp * sin(x), |amp| < 1 (globally Lipschitz, derivative
    /// bounded away from 0)
    SineBend { amp: f64 },
}

impl CoordMap {
    pub fn eval(&self, x: f64) -> f64 {
        match *self {
            CoordMap::Affine { scale, shift } => scale * x + shift,
            CoordMap::Cubic { coef } => x + coef * x * x * x / 3.0,
            CoordMap::SineBend { amp } => x + amp * x.sin(),
        }
    }

    pub fn deriv(&self, x: f64) -> f64 {
        match *self {
            CoordMap::Affine { scale, .. } => scale,
            CoordMap::Cubic { coef } => 1.0 + coef * x * x,
            CoordMap::SineBend { amp } => 1.0 + amp * x.cos(),
        }
    }

    /// Antiderivative G with G' = g; the per-coordinate convex potential.
    pub fn antideriv(&self, x: f64) -> f64 {
        match *self {
            CoordMap::Affine { scale, shift } => 0.5 * scale * x * x + shift * x,
            CoordMap::Cubic { coef } => 0.5 * x * x + coef * x.powi(4) / 12.0,
            CoordMap::SineBend { amp } => 0.5 * x * x - amp * x.cos(),
        }
    }

    /// g^{-1}(y) by expanding-bracket bisection (the maps are globally
    /// strictly increasing for valid parameters).
    pub fn invert(&self, y: f64) -> f64 {
        if let CoordMap::Affine { scale, shift } = *self {
            return (y - shift) / scale;
        }
        let mut lo = -1.0;
        let mut hi = 1.0;
        let mut grow = 1.0;
        while self.eval(lo) > y {
            lo -= grow;
            grow *= 2.0;
        }
        grow = 1.0;
        while self.eval(hi) < y {
            hi += grow;
            grow *= 2.0;
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if self.eval(mid) < y {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo < 1e-13 * (1.0 + lo.abs() + hi.abs()) {
                break;
            }
        }
        0.5 * (lo + hi)
    }
}

/// Compactly supported source laws with independent coordinates.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "law", rename_all = "snake_case", deny_unknown_fields)]
pub enum MuLaw {
    BoxUniform { lo: Vec<f64>, hi: Vec<f64> },
    /// Normal(center, sd) conditioned on the box [lo, hi].
    TruncGauss { center: Vec<f64>, sd: Vec<f64>, lo: Vec<f64>, hi: Vec<f64> },
}

impl MuLaw {
    pub fn dim(&self) -> usize {
        match self {
            MuLaw::BoxUniform { lo, .. } | MuLaw::TruncGauss { lo, .. } => lo.len(),
        }
    }

    pub fn support(&self) -> (&[f64], &[f64]) {
        match self {
            MuLaw::BoxUniform { lo, hi } | MuLaw::TruncGauss { lo, hi, .. } => (lo, hi),
        }
    }

    fn validate(&self) -> Result<()> {
        let (lo, hi) = self.support();
        if lo.len() != hi.len() || lo.is_empty() {
            return Err(Error::InvalidParameter("support box dimensions disagree".into()));
        }
        if lo.iter().zip(hi).any(|(&a, &b)| !(a < b)) {
            return Err(Error::InvalidParameter("support box must have positive volume".into()));
        }
        if let MuLaw::TruncGauss { center, sd, lo, .. } = self {
            if center.len() != lo.len() || sd.len() != lo.len() {
                return Err(Error::InvalidParameter("center/sd dimensions disagree".into()));
            }
            if sd.iter().any(|&s| s <= 0.0) {
                return Err(Error::InvalidParameter("sd must be positive".into()));
            }
        }
        Ok(())
    }

    pub fn sample(&self, rng: &mut impl Rng) -> Vec<f64> {
        match self {
            MuLaw::BoxUniform { lo, hi } => {
                lo.iter().zip(hi).map(|(&a, &b)| rng.gen_range(a..b)).collect()
            }
            MuLaw::TruncGauss { center, sd, lo, hi } => {
                let d = lo.len();
                let mut x = vec![0.0; d];
                for k in 0..d {
                    let normal = Normal::new(center[k], sd[k]).expect("validated sd");
                    loop {
                        let v = normal.sample(rng);
                        if v >= lo[k] && v <= hi[k] {
                            x[k] = v;
                            break;
                        }
                    }
                }
                x
            }
        }
    }

    /// Mean of coordinate k.
    pub fn coord_mean(&self, k: usize) -> f64 {
        match self {
            MuLaw::BoxUniform { lo, hi } => 0.5 * (lo[k] + hi[k]),
            MuLaw::TruncGauss { center, sd, lo, hi } => {
                let (a, b) = standardized(center[k], sd[k], lo[k], hi[k]);
                let z = normal_cdf(b) - normal_cdf(a);
                center[k] + sd[k] * (phi(a) - phi(b)) / z
            }
        }
    }

    /// Variance of coordinate k.
    pub fn coord_var(&self, k: usize) -> f64 {
        match self {
            MuLaw::BoxUniform { lo, hi } => (hi[k] - lo[k]).powi(2) / 12.0,
            MuLaw::TruncGauss { center, sd, lo, hi } => {
                let (a, b) = standardized(center[k], sd[k], lo[k], hi[k]);
                let z = normal_cdf(b) - normal_cdf(a);
                let r = (phi(a) - phi(b)) / z;
                sd[k] * sd[k] * (1.0 + (a * phi(a) - b * phi(b)) / z - r * r)
            }
        }
    }

    /// Density of coordinate k at x.
    pub fn coord_pdf(&self, k: usize, x: f64) -> f64 {
        let (lo, hi) = self.support();
        if x < lo[k] || x > hi[k] {
            return 0.0;
        }
        match self {
            MuLaw::BoxUniform { lo, hi } => 1.0 / (hi[k] - lo[k]),
            MuLaw::TruncGauss { center, sd, lo, hi } => {
                let (a, b) = standardized(center[k], sd[k], lo[k], hi[k]);
                let z = normal_cdf(b) - normal_cdf(a);
                phi((x - center[k]) / sd[k]) / (sd[k] * z)
            }
        }
    }

    /// CDF of coordinate k at x.
    pub fn coord_cdf(&self, k: usize, x: f64) -> f64 {
        let (lo, hi) = self.support();
        if x <= lo[k] {
            return 0.0;
        }
        if x >= hi[k] {
            return 1.0;
        }
        match self {
            MuLaw::BoxUniform { lo, hi } => (x - lo[k]) / (hi[k] - lo[k]),
            MuLaw::TruncGauss { center, sd, lo, hi } => {
                let (a, b) = standardized(center[k], sd[k], lo[k], hi[k]);
                let z = normal_cdf(b) - normal_cdf(a);
                (normal_cdf((x - center[k]) / sd[k]) - normal_cdf(a)) / z
            }
        }
    }

    /// Quantile of coordinate k.
    pub fn coord_quantile(&self, k: usize, t: f64) -> f64 {
        let t = t.clamp(0.0, 1.0);
        match self {
            MuLaw::BoxUniform { lo, hi } => lo[k] + t * (hi[k] - lo[k]),
            MuLaw::TruncGauss { center, sd, lo, hi } => {
                if t <= 0.0 {
                    return lo[k];
                }
                if t >= 1.0 {
                    return hi[k];
                }
                let (a, b) = standardized(center[k], sd[k], lo[k], hi[k]);
                let za = normal_cdf(a);
                let z = normal_cdf(b) - za;
                center[k] + sd[k] * normal_quantile(za + t * z)
            }
        }
    }
}

fn phi(z: f64) -> f64 {
    (-0.5 * z * z).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

fn standardized(center: f64, sd: f64, lo: f64, hi: f64) -> (f64, f64) {
    ((lo - center) / sd, (hi - center) / sd)
}

#[derive(Debug, Clone)]
enum Kind {
    Linear { a: Vec<Vec<f64>>, b: Vec<f64>, a_inv: Vec<Vec<f64>> },
    Separable { maps: Vec<CoordMap> },
}

/// A ground-truth pair (mu, T0) with closed-form potential data.
#[derive(Debug, Clone)]
pub struct SyntheticProblem {
    kind: Kind,
    mu: MuLaw,
    dim: usize,
    lipschitz: f64,
    true_w2sq: f64,
}

/// Serializable description of a problem (JSON config form).
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ProblemConfig {
    Linear { a: Vec<Vec<f64>>, b: Vec<f64>, mu: MuLaw },
    Separable { maps: Vec<CoordMap>, mu: MuLaw },
}

impl ProblemConfig {
    pub fn build(&self) -> Result<SyntheticProblem> {
        match self {
            ProblemConfig::Linear { a, b, mu } => {
                make_linear_problem(a.clone(), b.clone(), mu.clone())
            }
            ProblemConfig::Separable { maps, mu } => {
                make_separable_problem(maps.clone(), mu.clone())
            }
        }
    }
}

/// T0(x) = Ax + b with A symmetric positive definite.
pub fn make_linear_problem(a: Vec<Vec<f64>>, b: Vec<f64>, mu: MuLaw) -> Result<SyntheticProblem> {
    mu.validate()?;
    let d = mu.dim();
    if a.len() != d || a.iter().any(|row| row.len() != d) || b.len() != d {
        return Err(Error::InvalidParameter("A/b dimensions disagree with support".into()));
    }
    let l_factor = cholesky(&a).ok_or(Error::NotSpd)?;
    let a_inv = spd_inverse(&l_factor);
    let eigen = sym_eigenvalues(&a);
    let lipschitz = *eigen.last().expect("nonempty");
    // true W2^2 = E ||(A - I)x + b||^2 over independent coordinates
    let mut true_w2sq = 0.0;
    let mean: Vec<f64> = (0..d).map(|k| mu.coord_mean(k)).collect();
    for r in 0..d {
        let mut shift = b[r];
        let mut var_term = 0.0;
        for c in 0..d {
            let m_rc = a[r][c] - if r == c { 1.0 } else { 0.0 };
            shift += m_rc * mean[c];
            var_term += m_rc * m_rc * mu.coord_var(c);
        }
        true_w2sq += var_term + shift * shift;
    }
    Ok(SyntheticProblem { kind: Kind::Linear { a, b, a_inv }, mu, dim: d, lipschitz, true_w2sq })
}

/// T0(x)_k = g_k(x_k) with each g_k strictly increasing and smooth.
pub fn make_separable_problem(maps: Vec<CoordMap>, mu: MuLaw) -> Result<SyntheticProblem> {
    mu.validate()?;
    let d = mu.dim();
    if maps.len() != d {
        return Err(Error::InvalidParameter("one coordinate map per dimension required".into()));
    }
    let (lo, hi) = mu.support();
    let mut sup_deriv: f64 = 0.0;
    let mut inf_deriv = f64::INFINITY;
    for (k, g) in maps.iter().enumerate() {
        let mut prev = f64::NEG_INFINITY;
        for t in 0..=1000 {
            let x = lo[k] + (hi[k] - lo[k]) * t as f64 / 1000.0;
            let dv = g.deriv(x);
            if dv <= 0.0 {
                return Err(Error::NotMonotone);
            }
            let gx = g.eval(x);
            if gx <= prev {
                return Err(Error::NotMonotone);
            }
            prev = gx;
            sup_deriv = sup_deriv.max(dv);
            inf_deriv = inf_deriv.min(dv);
        }
    }
    let lipschitz = sup_deriv.max(1.0 / inf_deriv);
    let mut true_w2sq = 0.0;
    for (k, g) in maps.iter().enumerate() {
        true_w2sq += integrate(
            |x| {
                let dlt = g.eval(x) - x;
                dlt * dlt * mu.coord_pdf(k, x)
            },
            lo[k],
            hi[k],
            1e-12,
        );
    }
    Ok(SyntheticProblem { kind: Kind::Separable { maps }, mu, dim: d, lipschitz, true_w2sq })
}

impl SyntheticProblem {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn mu(&self) -> &MuLaw {
        &self.mu
    }

    /// Lipschitz constant of T0 (known, not estimated).
    pub fn lipschitz(&self) -> f64 {
        self.lipschitz
    }

    pub fn true_w2sq(&self) -> f64 {
        self.true_w2sq
    }

    /// The transport map T0.
    pub fn t0(&self, x: &[f64]) -> Vec<f64> {
        match &self.kind {
            Kind::Linear { a, b, .. } => {
                let mut y = mat_vec(a, x);
                for k in 0..self.dim {
                    y[k] += b[k];
                }
                y
            }
            Kind::Separable { maps } => maps.iter().zip(x).map(|(g, &v)| g.eval(v)).collect(),
        }
    }

    /// Convex potential with gradient T0.
    pub fn potential(&self, x: &[f64]) -> f64 {
        match &self.kind {
            Kind::Linear { a, b, .. } => 0.5 * dot(x, &mat_vec(a, x)) + dot(b, x),
            Kind::Separable { maps } => maps.iter().zip(x).map(|(g, &v)| g.antideriv(v)).sum(),
        }
    }

    /// Legendre-Fenchel conjugate of the potential, in closed form.
    pub fn conjugate(&self, y: &[f64]) -> f64 {
        match &self.kind {
            Kind::Linear { b, a_inv, .. } => {
                let z: Vec<f64> = y.iter().zip(b).map(|(&yi, &bi)| yi - bi).collect();
                0.5 * dot(&z, &mat_vec(a_inv, &z))
            }
            Kind::Separable { maps } => maps
                .iter()
                .zip(y)
                .map(|(g, &v)| {
                    let x = g.invert(v);
                    v * x - g.antideriv(x)
                })
                .sum(),
        }
    }

    /// Gradient of the conjugate; inverts T0.
    pub fn grad_conjugate(&self, y: &[f64]) -> Vec<f64> {
        match &self.kind {
            Kind::Linear { b, a_inv, .. } => {
                let z: Vec<f64> = y.iter().zip(b).map(|(&yi, &bi)| yi - bi).collect();
                mat_vec(a_inv, &z)
            }
            Kind::Separable { maps } => maps.iter().zip(y).map(|(g, &v)| g.invert(v)).collect(),
        }
    }

    /// Draw `count` i.i.d. points from mu.
    pub fn sample_mu(&self, count: usize, rng: &mut impl Rng) -> Vec<Vec<f64>> {
        (0..count).map(|_| self.mu.sample(rng)).collect()
    }

    /// Draw an X-sample of size m from mu and an independent Y-sample of
    /// size n from nu = T0 # mu (a fresh mu-draw pushed through T0), both
    /// deterministic given the seed.
    pub fn sample_pair(
        &self,
        m: usize,
        n: usize,
        seed: u64,
    ) -> Result<(DiscreteMeasure, DiscreteMeasure)> {
        if m == 0 || n == 0 {
            return Err(Error::EmptySample);
        }
        let mut rx = rng_for(seed, StreamRole::SourceSample, 0);
        let mut ry = rng_for(seed, StreamRole::TargetSample, 0);
        let xs = self.sample_mu(m, &mut rx);
        let ys: Vec<Vec<f64>> = self.sample_mu(n, &mut ry).iter().map(|x| self.t0(x)).collect();
        Ok((DiscreteMeasure::uniform(xs)?, DiscreteMeasure::uniform(ys)?))
    }

    /// Draw only the Y-side sample of size n (same stream as the Y side of
    /// `sample_pair`, so semi-discrete runs see the sample a paired run
    /// would).
    pub fn sample_nu(&self, n: usize, seed: u64) -> Result<DiscreteMeasure> {
        if n == 0 {
            return Err(Error::EmptySample);
        }
        let mut ry = rng_for(seed, StreamRole::TargetSample, 0);
        let ys: Vec<Vec<f64>> = self.sample_mu(n, &mut ry).iter().map(|x| self.t0(x)).collect();
        DiscreteMeasure::uniform(ys)
    }

    /// Config form for serialization.
    pub fn config(&self) -> ProblemConfig {
        match &self.kind {
            Kind::Linear { a, b, .. } => {
                ProblemConfig::Linear { a: a.clone(), b: b.clone(), mu: self.mu.clone() }
            }
            Kind::Separable { maps } => {
                ProblemConfig::Separable { maps: maps.clone(), mu: self.mu.clone() }
            }
        }
    }
}

/// Convenience constructors used across tests, experiments and the CLI.
pub mod presets {
    use super::*;

    /// Identity map on the unit box.
    pub fn identity(d: usize) -> SyntheticProblem {
        make_linear_problem(eye(d), vec![0.0; d], unit_box(d)).expect("identity is SPD")
    }

    /// Diagonal linear map diag(2, 1, ..., 1) on the unit box.
    pub fn diag_linear(d: usize) -> SyntheticProblem {
        let mut a = eye(d);
        a[0][0] = 2.0;
        make_linear_problem(a, vec![0.0; d], unit_box(d)).expect("diagonal SPD")
    }

    /// Smooth separable bend g(x) = x + amp * sin(x) per coordinate.
    pub fn sine_separable(d: usize, amp: f64) -> SyntheticProblem {
        let maps = vec![CoordMap::SineBend { amp }; d];
        make_separable_problem(maps, unit_box(d)).expect("monotone for |amp| < 1")
    }

    pub fn unit_box(d: usize) -> MuLaw {
        MuLaw::BoxUniform { lo: vec![0.0; d], hi: vec![1.0; d] }
    }

    pub fn eye(d: usize) -> Vec<Vec<f64>> {
        (0..d).map(|i| (0..d).map(|j| if i == j { 1.0 } else { 0.0 }).collect()).collect()
    }
}
