//! Empirical smoothness estimators for an embedding space.
//!
//! Three curves over a grid of neighborhood sizes:
//!
//! * label curve — how often nearby points carry a different label;
//! * coverage curve — how often nearby points differ in whether a source
//!   abstains, averaged over sources;
//! * local-label-change curve — for each source, the fraction of its support
//!   points that have an off-support point with a different label within
//!   radius `r`, averaged over sources (monotone in `r` by construction).
//!
//! Neighborhoods are defined either by a radius or by a count of nearest
//! neighbors. Points with empty neighborhoods are excluded from averages
//! rather than counted as zero, which would deflate curves at small radii
//! in sparse regions.

use rayon::prelude::*;

use crate::data::{EmbeddingDataset, LabelVector, VoteMatrix};
use crate::error::{LigerError, Result};

/// Neighborhood grid: radii or nearest-neighbor counts.
#[derive(Debug, Clone)]
pub enum NeighborhoodSpec {
    RadiusGrid(Vec<f64>),
    KnnGrid(Vec<usize>),
}

impl NeighborhoodSpec {
    fn validate(&self) -> Result<()> {
        let empty = match self {
            NeighborhoodSpec::RadiusGrid(g) => g.is_empty(),
            NeighborhoodSpec::KnnGrid(g) => g.is_empty(),
        };
        if empty {
            return Err(LigerError::Argument("neighborhood grid is empty".into()));
        }
        Ok(())
    }

    /// Grid values as reals, for reports and CSV emission.
    pub fn grid_values(&self) -> Vec<f64> {
        match self {
            NeighborhoodSpec::RadiusGrid(g) => g.clone(),
            NeighborhoodSpec::KnnGrid(g) => g.iter().map(|&k| k as f64).collect(),
        }
    }

    fn len(&self) -> usize {
        match self {
            NeighborhoodSpec::RadiusGrid(g) => g.len(),
            NeighborhoodSpec::KnnGrid(g) => g.len(),
        }
    }
}

/// All pairwise distances from one point, reused across grid values.
fn distances_from(emb: &EmbeddingDataset, p: usize) -> Vec<(usize, f64)> {
    (0..emb.n())
        .filter(|&q| q != p)
        .map(|q| (q, emb.row_distance(p, q)))
        .collect()
}

/// Neighborhood members of `p` at grid position `g`: all other points within
/// the radius, or the `k` nearest (ties at the cut take the lowest index;
/// fewer than `k` candidates means all of them).
fn neighborhood(dists: &[(usize, f64)], spec: &NeighborhoodSpec, g: usize) -> Vec<usize> {
    match spec {
        NeighborhoodSpec::RadiusGrid(grid) => {
            let r = grid[g];
            dists
                .iter()
                .filter(|(_, d)| *d <= r)
                .map(|(q, _)| *q)
                .collect()
        }
        NeighborhoodSpec::KnnGrid(grid) => {
            let k = grid[g].min(dists.len());
            if k == 0 {
                return Vec::new();
            }
            let mut sorted: Vec<(usize, f64)> = dists.to_vec();
            sorted.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap().then(a.0.cmp(&b.0)));
            sorted[..k].iter().map(|(q, _)| *q).collect()
        }
    }
}

/// Mean fraction of neighbors whose label differs from the point's own.
pub fn label_lipschitz_curve(
    emb: &EmbeddingDataset,
    labels: &LabelVector,
    spec: &NeighborhoodSpec,
) -> Result<Vec<f64>> {
    spec.validate()?;
    if labels.n() != emb.n() {
        return Err(LigerError::shape("labels row count", emb.n(), labels.n()));
    }
    let per_point: Vec<Vec<Option<f64>>> = (0..emb.n())
        .into_par_iter()
        .map(|p| {
            let dists = distances_from(emb, p);
            (0..spec.len())
                .map(|g| {
                    let hood = neighborhood(&dists, spec, g);
                    if hood.is_empty() {
                        None
                    } else {
                        let diff = hood
                            .iter()
                            .filter(|&&q| labels.get(q) != labels.get(p))
                            .count();
                        Some(diff as f64 / hood.len() as f64)
                    }
                })
                .collect()
        })
        .collect();
    Ok(average_over_points(&per_point, spec.len()))
}

/// Mean fraction of neighbors whose abstain indicator differs, per source,
/// averaged over sources.
pub fn coverage_lipschitz_curve(
    emb: &EmbeddingDataset,
    votes: &VoteMatrix,
    spec: &NeighborhoodSpec,
) -> Result<Vec<f64>> {
    spec.validate()?;
    if votes.n() != emb.n() {
        return Err(LigerError::shape("votes row count", emb.n(), votes.n()));
    }
    let m = votes.m();
    // Per point and grid value, the mean over sources of the indicator
    // disagreement fraction; empty neighborhoods are excluded entirely.
    let per_point: Vec<Vec<Option<f64>>> = (0..emb.n())
        .into_par_iter()
        .map(|p| {
            let dists = distances_from(emb, p);
            (0..spec.len())
                .map(|g| {
                    let hood = neighborhood(&dists, spec, g);
                    if hood.is_empty() {
                        return None;
                    }
                    let mut total = 0.0;
                    for source in 0..m {
                        let own = votes.get(p, source) != 0;
                        let diff = hood
                            .iter()
                            .filter(|&&q| (votes.get(q, source) != 0) != own)
                            .count();
                        total += diff as f64 / hood.len() as f64;
                    }
                    Some(total / m as f64)
                })
                .collect()
        })
        .collect();
    Ok(average_over_points(&per_point, spec.len()))
}

/// For each source: the fraction of its support points that have an
/// off-support, differently-labeled point within radius `r`; averaged over
/// sources with non-empty support. Monotone non-decreasing in `r`.
pub fn local_pl_curve(
    emb: &EmbeddingDataset,
    labels: &LabelVector,
    votes: &VoteMatrix,
    radius_grid: &[f64],
) -> Result<Vec<f64>> {
    if radius_grid.is_empty() {
        return Err(LigerError::Argument("radius grid is empty".into()));
    }
    if radius_grid.windows(2).any(|w| w[1] < w[0]) {
        return Err(LigerError::Argument("radius grid must ascend".into()));
    }
    if labels.n() != emb.n() {
        return Err(LigerError::shape("labels row count", emb.n(), labels.n()));
    }
    if votes.n() != emb.n() {
        return Err(LigerError::shape("votes row count", emb.n(), votes.n()));
    }
    let m = votes.m();
    let mut curve = vec![0.0f64; radius_grid.len()];
    let mut sources_with_support = 0usize;
    for source in 0..m {
        let support: Vec<usize> = (0..emb.n()).filter(|&p| votes.get(p, source) != 0).collect();
        if support.is_empty() {
            continue;
        }
        sources_with_support += 1;
        // Distance from each support point to its nearest off-support point
        // with a different label; the existence event at radius r is then a
        // simple threshold, monotone in r.
        let witness_dist: Vec<f64> = support
            .par_iter()
            .map(|&p| {
                let mut best = f64::INFINITY;
                for q in 0..emb.n() {
                    if votes.get(q, source) != 0 || labels.get(q) == labels.get(p) {
                        continue;
                    }
                    let d = emb.row_distance(p, q);
                    if d < best {
                        best = d;
                    }
                }
                best
            })
            .collect();
        for (g, &r) in radius_grid.iter().enumerate() {
            let hits = witness_dist.iter().filter(|&&d| d <= r).count();
            curve[g] += hits as f64 / support.len() as f64;
        }
    }
    if sources_with_support > 0 {
        for v in &mut curve {
            *v /= sources_with_support as f64;
        }
    }
    Ok(curve)
}

fn average_over_points(per_point: &[Vec<Option<f64>>], grid_len: usize) -> Vec<f64> {
    let mut curve = vec![0.0f64; grid_len];
    for g in 0..grid_len {
        let mut total = 0.0;
        let mut count = 0usize;
        for point in per_point {
            if let Some(v) = point[g] {
                total += v;
                count += 1;
            }
        }
        if count > 0 {
            curve[g] = total / count as f64;
        }
    }
    curve
}

/// All three curves on a shared radius grid, ready for CSV emission as
/// `grid_value,label_curve,coverage_curve,pl_curve`.
#[derive(Debug, Clone)]
pub struct SmoothnessReport {
    pub grid: Vec<f64>,
    pub label_curve: Vec<f64>,
    pub coverage_curve: Vec<f64>,
    pub pl_curve: Vec<f64>,
}

pub fn smoothness_report(
    emb: &EmbeddingDataset,
    labels: &LabelVector,
    votes: &VoteMatrix,
    radius_grid: &[f64],
) -> Result<SmoothnessReport> {
    let spec = NeighborhoodSpec::RadiusGrid(radius_grid.to_vec());
    Ok(SmoothnessReport {
        grid: radius_grid.to_vec(),
        label_curve: label_lipschitz_curve(emb, labels, &spec)?,
        coverage_curve: coverage_lipschitz_curve(emb, votes, &spec)?,
        pl_curve: local_pl_curve(emb, labels, votes, radius_grid)?,
    })
}
