//! Point-cloud CSV reading and writing.
//!
//! Format: one row per atom, columns x1..xd with an optional trailing weight
//! column; a missing weight column means uniform weights. Parse errors name
//! the offending line.

use std::path::Path;

use anyhow::{bail, Context, Result};
use otmap::DiscreteMeasure;

/// Read a point cloud. `weighted` columns are detected from a `# weighted`
/// comment header or the `has_weights` flag: when `None`, rows with one more
/// column than the first row's dimension guess are treated as weighted if the
/// file starts with the header `# weighted`.
pub fn read_point_cloud(path: &Path, has_weights: Option<bool>) -> Result<DiscreteMeasure> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading point cloud {}", path.display()))?;
    let mut points: Vec<Vec<f64>> = Vec::new();
    let mut weights: Vec<f64> = Vec::new();
    let mut weighted = has_weights;
    let mut width: Option<usize> = None;
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        if line.starts_with('#') {
            if lineno == 0 && line.contains("weighted") {
                weighted = Some(true);
            }
            continue;
        }
        let cols: Vec<&str> = line.split(',').map(str::trim).collect();
        let vals: Vec<f64> = cols
            .iter()
            .enumerate()
            .map(|(c, v)| {
                v.parse::<f64>().map_err(|e| {
                    anyhow::anyhow!(
                        "{}:{}: column {} ({v:?}) is not a number: {e}",
                        path.display(),
                        lineno + 1,
                        c + 1
                    )
                })
            })
            .collect::<Result<_>>()?;
        match width {
            None => width = Some(vals.len()),
            Some(w) if w != vals.len() => {
                bail!(
                    "{}:{}: row has {} columns, expected {w}",
                    path.display(),
                    lineno + 1,
                    vals.len()
                );
            }
            _ => {}
        }
        if weighted == Some(true) {
            let (w, coords) = vals.split_last().expect("nonempty row");
            points.push(coords.to_vec());
            weights.push(*w);
        } else {
            points.push(vals);
        }
    }
    if points.is_empty() {
        bail!("{}: no atoms", path.display());
    }
    let measure = if weighted == Some(true) {
        let total: f64 = weights.iter().sum();
        if total <= 0.0 {
            bail!("{}: weights sum to {total}", path.display());
        }
        let weights = weights.into_iter().map(|w| w / total).collect();
        DiscreteMeasure::new(points, weights)
    } else {
        DiscreteMeasure::uniform(points)
    };
    measure.with_context(|| format!("{}: invalid measure", path.display()))
}

pub fn write_plan_csv(path: &Path, plan: &otmap::TransportPlan) -> Result<()> {
    let mut out = String::from("i,j,mass\n");
    for &(i, j, w) in &plan.entries {
        out.push_str(&format!("{i},{j},{w}\n"));
    }
    std::fs::write(path, out).with_context(|| format!("writing {}", path.display()))
}

pub fn write_potentials_csv(path: &Path, plan: &otmap::TransportPlan) -> Result<()> {
    let mut out = String::from("side,index,value\n");
    for (i, v) in plan.duals.psi.iter().enumerate() {
        out.push_str(&format!("source,{i},{v}\n"));
    }
    for (j, v) in plan.duals.psi_star.iter().enumerate() {
        out.push_str(&format!("target,{j},{v}\n"));
    }
    std::fs::write(path, out).with_context(|| format!("writing {}", path.display()))
}

pub fn write_atoms_csv(path: &Path, atoms: &[Vec<f64>], weights: &[f64]) -> Result<()> {
    let mut out = String::new();
    for (p, w) in atoms.iter().zip(weights) {
        let coords: Vec<String> = p.iter().map(|c| c.to_string()).collect();
        out.push_str(&coords.join(","));
        out.push_str(&format!(",{w}\n"));
    }
    std::fs::write(path, out).with_context(|| format!("writing {}", path.display()))
}
