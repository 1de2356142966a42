//! Truncated tensor-Haar wavelet density estimation on a rescaled unit box.
//!
//! Coefficients are empirical means of the basis functions. Summing the
//! series through detail level J-1 telescopes to the histogram on the level-J
//! dyadic grid, which makes the raw estimate a genuine probability density
//! (nonnegative, integrates to one exactly) and gives an exact sampler.

use rand::Rng;

use crate::error::{Error, Result};
use crate::seeding::{rng_for, StreamRole};
use crate::smoothing::kde::DensityMode;

/// Hard cap on the number of level-J cells (memory guard).
const MAX_CELLS: usize = 1 << 24;

/// Tensor-Haar series estimate of a density, fitted on data rescaled into
/// the unit box.
#[derive(Debug, Clone)]
pub struct WaveletDensity {
    dim: usize,
    level: u32,
    /// rescale: u = (x - lo) / scale, recorded for the inverse mapping
    lo: Vec<f64>,
    scale: Vec<f64>,
    /// scaling coefficient of the constant basis function (always 1 here
    /// since all rescaled data lies in the box)
    scaling_coeff: f64,
    /// per level j = 0..J-1, dense coefficients indexed
    /// cell * (2^d - 1) + (pattern - 1)
    details: Vec<Vec<f64>>,
    /// level-J histogram counts per cell
    cell_count: Vec<u64>,
    /// level-J histogram mass per cell (counts / m)
    cell_mass: Vec<f64>,
    sample_size: usize,
    mode: DensityMode,
}

/// Fit a tensor-Haar density at the truncation level implied by the sample
/// size and smoothness: 2^J between m^{1/(d+2s)} and m^{1/d}, taking the
/// smallest integer level at least the lower end (falling back to the upper
/// end when the window contains no integer).
pub fn haar_wavelet_fit(sample: &[Vec<f64>], s: usize, mode: DensityMode) -> Result<WaveletDensity> {
    if sample.is_empty() {
        return Err(Error::EmptySample);
    }
    let dim = sample[0].len();
    if dim == 0 || sample.iter().any(|p| p.len() != dim) {
        return Err(Error::InvalidParameter("inconsistent sample dimensions".into()));
    }
    let m = sample.len() as f64;
    let lo_exp = m.log2() / (dim + 2 * s) as f64;
    let hi_exp = m.log2() / dim as f64;
    let mut level = lo_exp.ceil() as i64;
    if level as f64 > hi_exp {
        level = hi_exp.floor() as i64;
    }
    let level = level.max(0) as u32;
    fit_at_level(sample, level, mode)
}

/// Fit at an explicit level (exposed for tests and the harness).
pub fn fit_at_level(sample: &[Vec<f64>], level: u32, mode: DensityMode) -> Result<WaveletDensity> {
    if sample.is_empty() {
        return Err(Error::EmptySample);
    }
    let dim = sample[0].len();
    let cells_per_axis = 1usize << level;
    let total_cells = cells_per_axis
        .checked_pow(dim as u32)
        .filter(|&c| c <= MAX_CELLS)
        .ok_or_else(|| Error::InvalidParameter(format!("level {level} too fine in d={dim}")))?;

    // Rescale into [0,1)^d; degenerate widths get a unit box around the value.
    let mut lo = sample[0].clone();
    let mut hi = sample[0].clone();
    for p in sample {
        for k in 0..dim {
            lo[k] = lo[k].min(p[k]);
            hi[k] = hi[k].max(p[k]);
        }
    }
    let mut scale = vec![0.0; dim];
    for k in 0..dim {
        let width = hi[k] - lo[k];
        if width > 0.0 {
            scale[k] = width * (1.0 + 1e-9);
        } else {
            lo[k] -= 0.5;
            scale[k] = 1.0;
        }
    }

    let m = sample.len() as f64;
    let patterns = (1usize << dim) - 1;
    let mut details: Vec<Vec<f64>> = (0..level)
        .map(|j| vec![0.0; (1usize << (j as usize * dim)) * patterns])
        .collect();
    let mut cell_count = vec![0u64; total_cells];

    let mut unit = vec![0.0; dim];
    for p in sample {
        for k in 0..dim {
            unit[k] = ((p[k] - lo[k]) / scale[k]).clamp(0.0, 1.0 - 1e-12);
        }
        for j in 0..level {
            let side = 1usize << j;
            let (cell, signs) = locate(&unit, side);
            let norm = (side as f64).powi(dim as i32).sqrt(); // 2^{jd/2}
            let base = cell * patterns;
            for pat in 1..=patterns {
                let mut v = norm / m;
                for k in 0..dim {
                    if pat >> k & 1 == 1 && signs >> k & 1 == 1 {
                        v = -v;
                    }
                }
                details[j as usize][base + pat - 1] += v;
            }
        }
        let side = 1usize << level;
        let (cell, _) = locate(&unit, side);
        cell_count[cell] += 1;
    }
    let cell_mass: Vec<f64> = cell_count.iter().map(|&c| c as f64 / m).collect();

    Ok(WaveletDensity {
        dim,
        level,
        lo,
        scale,
        scaling_coeff: 1.0,
        details,
        cell_count,
        cell_mass,
        sample_size: sample.len(),
        mode,
    })
}

/// Cell index (row-major over coordinates) and the per-coordinate half flags
/// of a unit-box point on a dyadic grid with `side` cells per axis.
fn locate(unit: &[f64], side: usize) -> (usize, usize) {
    let mut cell = 0usize;
    let mut signs = 0usize;
    for (k, &u) in unit.iter().enumerate() {
        let t = u * side as f64;
        let idx = (t as usize).min(side - 1);
        cell = cell * side + idx;
        if t - idx as f64 >= 0.5 {
            signs |= 1 << k;
        }
    }
    (cell, signs)
}

impl WaveletDensity {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn mode(&self) -> DensityMode {
        self.mode
    }

    pub fn scaling_coeff(&self) -> f64 {
        self.scaling_coeff
    }

    pub fn detail_coeffs(&self, level: u32) -> &[f64] {
        &self.details[level as usize]
    }

    /// Level-J histogram mass per cell; sums to 1 exactly.
    pub fn cell_masses(&self) -> &[f64] {
        &self.cell_mass
    }

    /// Evaluate the truncated series term by term at a point in original
    /// coordinates. Zero outside the fitted box.
    pub fn eval_series(&self, x: &[f64]) -> f64 {
        debug_assert_eq!(x.len(), self.dim);
        let mut unit = vec![0.0; self.dim];
        for k in 0..self.dim {
            let u = (x[k] - self.lo[k]) / self.scale[k];
            if !(0.0..1.0).contains(&u) {
                return 0.0;
            }
            unit[k] = u;
        }
        let patterns = (1usize << self.dim) - 1;
        let mut acc = self.scaling_coeff;
        for j in 0..self.level {
            let side = 1usize << j;
            let (cell, signs) = locate(&unit, side);
            let norm = (side as f64).powi(self.dim as i32).sqrt();
            let base = cell * patterns;
            for pat in 1..=patterns {
                let mut v = norm;
                for k in 0..self.dim {
                    if pat >> k & 1 == 1 && signs >> k & 1 == 1 {
                        v = -v;
                    }
                }
                acc += self.details[j as usize][base + pat - 1] * v;
            }
        }
        // density transform back to original coordinates
        acc / self.volume()
    }

    /// Histogram value at a point (identical to the series by telescoping).
    pub fn eval(&self, x: &[f64]) -> f64 {
        debug_assert_eq!(x.len(), self.dim);
        let mut unit = vec![0.0; self.dim];
        for k in 0..self.dim {
            let u = (x[k] - self.lo[k]) / self.scale[k];
            if !(0.0..1.0).contains(&u) {
                return 0.0;
            }
            unit[k] = u;
        }
        let side = 1usize << self.level;
        let (cell, _) = locate(&unit, side);
        self.cell_mass[cell] * (side as f64).powi(self.dim as i32) / self.volume()
    }

    fn volume(&self) -> f64 {
        self.scale.iter().product()
    }

    /// Integral of the raw series; exact by integer count bookkeeping.
    pub fn total_mass(&self) -> f64 {
        self.cell_count.iter().sum::<u64>() as f64 / self.sample_size as f64
    }

    /// Exact sampler: multinomial over level-J cells, uniform within a cell,
    /// mapped back to original coordinates. Deterministic given the seed.
    pub fn sample(&self, count: usize, seed: u64) -> Vec<Vec<f64>> {
        let mut rng = rng_for(seed, StreamRole::Discretize, 0);
        let mut cum = Vec::with_capacity(self.cell_mass.len());
        let mut acc = 0.0;
        for &w in &self.cell_mass {
            acc += w;
            cum.push(acc);
        }
        let side = 1usize << self.level;
        let mut out = Vec::with_capacity(count);
        for _ in 0..count {
            let t = rng.gen::<f64>() * acc;
            let mut cell = cum.partition_point(|&c| c <= t);
            if cell >= cum.len() {
                cell = cum.len() - 1;
            }
            // decode row-major cell index to per-axis indices
            let mut idx = vec![0usize; self.dim];
            let mut rem = cell;
            for k in (0..self.dim).rev() {
                idx[k] = rem % side;
                rem /= side;
            }
            let p: Vec<f64> = (0..self.dim)
                .map(|k| {
                    let u = (idx[k] as f64 + rng.gen::<f64>()) / side as f64;
                    self.lo[k] + u * self.scale[k]
                })
                .collect();
            out.push(p);
        }
        out
    }
}
