//! Embedding-space partitioning via Lloyd's algorithm.
//!
//! The partition is the unit over which source accuracies and coverages are
//! estimated. Fitting is fully deterministic for a fixed `(dataset, s, seed)`:
//! the first center is drawn from the seeded generator and the remaining
//! centers are chosen greedily as the point farthest from the chosen set,
//! ties always breaking toward the lowest index.
//!
//! Under the cosine metric, rows are normalized to unit norm and Lloyd runs
//! in squared-euclidean space with centroids re-normalized after every update
//! (spherical k-means). On unit vectors `1 - cos` is monotone in euclidean
//! distance, so nearest-centroid assignments agree with the cosine metric.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::{EmbeddingDataset, Metric};
use crate::error::{LigerError, Result};
use crate::rng::SplitMix64;

/// Assignment of dataset points to `s` parts with explicit centroids.
#[derive(Debug, Clone, PartialEq)]
pub struct Partition {
    s: usize,
    metric: Metric,
    /// `s x d`, unit-norm under cosine.
    centroids: Vec<Vec<f64>>,
    assignment: Vec<usize>,
    part_sizes: Vec<usize>,
}

/// On-disk form of a [`Partition`]; `part_sizes` is derived on load.
#[derive(Debug, Serialize, Deserialize)]
pub struct PartitionDoc {
    pub s: usize,
    pub metric: Metric,
    pub centroids: Vec<Vec<f64>>,
    pub assignment: Vec<usize>,
}

impl Partition {
    /// Builds a partition from explicit centroids and assignment, validating
    /// shape invariants (sizes sum to n, no empty part, indices in range).
    pub fn from_parts(
        metric: Metric,
        centroids: Vec<Vec<f64>>,
        assignment: Vec<usize>,
    ) -> Result<Self> {
        let s = centroids.len();
        if s == 0 {
            return Err(LigerError::Argument("partition needs at least one part".into()));
        }
        let d = centroids[0].len();
        if centroids.iter().any(|c| c.len() != d) {
            return Err(LigerError::validation("centroids", "ragged centroid matrix"));
        }
        let mut part_sizes = vec![0usize; s];
        for &a in &assignment {
            if a >= s {
                return Err(LigerError::validation(
                    "assignment",
                    format!("part index {a} out of range for s = {s}"),
                ));
            }
            part_sizes[a] += 1;
        }
        if part_sizes.contains(&0) {
            return Err(LigerError::validation("assignment", "empty part"));
        }
        Ok(Partition {
            s,
            metric,
            centroids,
            assignment,
            part_sizes,
        })
    }

    pub fn from_doc(doc: PartitionDoc) -> Result<Self> {
        Partition::from_parts(doc.metric, doc.centroids, doc.assignment)
    }

    pub fn to_doc(&self) -> PartitionDoc {
        PartitionDoc {
            s: self.s,
            metric: self.metric,
            centroids: self.centroids.clone(),
            assignment: self.assignment.clone(),
        }
    }

    pub fn s(&self) -> usize {
        self.s
    }

    pub fn metric(&self) -> Metric {
        self.metric
    }

    pub fn d(&self) -> usize {
        self.centroids[0].len()
    }

    pub fn n(&self) -> usize {
        self.assignment.len()
    }

    pub fn centroids(&self) -> &[Vec<f64>] {
        &self.centroids
    }

    pub fn assignment(&self) -> &[usize] {
        &self.assignment
    }

    pub fn part_sizes(&self) -> &[usize] {
        &self.part_sizes
    }

    /// Part index of the nearest centroid; ties break toward the lowest
    /// index. Under cosine the query is normalized first.
    pub fn assign_point(&self, point: &[f32]) -> Result<usize> {
        if point.len() != self.d() {
            return Err(LigerError::shape("point dimension", self.d(), point.len()));
        }
        let q = prepare_query(self.metric, point)?;
        Ok(nearest_centroid(&q, &self.centroids))
    }

    /// Points of the dataset that belong to part `j`, in ascending order.
    pub fn members(&self, j: usize) -> impl Iterator<Item = usize> + '_ {
        self.assignment
            .iter()
            .enumerate()
            .filter(move |(_, &a)| a == j)
            .map(|(i, _)| i)
    }
}

fn prepare_query(metric: Metric, point: &[f32]) -> Result<Vec<f64>> {
    let mut q: Vec<f64> = point.iter().map(|&v| v as f64).collect();
    if metric == Metric::Cosine {
        let norm = q.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm <= 0.0 {
            return Err(LigerError::validation(
                "point",
                "zero-norm query invalid under the cosine metric",
            ));
        }
        for v in &mut q {
            *v /= norm;
        }
    }
    Ok(q)
}

fn squared_dist(a: &[f64], b: &[f64]) -> f64 {
    let mut acc = 0.0;
    for (x, y) in a.iter().zip(b.iter()) {
        let d = x - y;
        acc += d * d;
    }
    acc
}

fn nearest_centroid(q: &[f64], centroids: &[Vec<f64>]) -> usize {
    let mut best = 0usize;
    let mut best_d = f64::INFINITY;
    for (j, c) in centroids.iter().enumerate() {
        let d = squared_dist(q, c);
        if d < best_d {
            best_d = d;
            best = j;
        }
    }
    best
}

/// A fitted partition plus per-iteration diagnostics.
#[derive(Debug)]
pub struct KmeansRun {
    pub partition: Partition,
    /// Lloyd objective (sum of squared distances to the assigned centroid,
    /// in the normalized space under cosine) after each assignment step.
    pub objective_history: Vec<f64>,
    pub iterations: usize,
}

/// Lloyd's algorithm with the crate's deterministic seeding and defaults.
pub fn kmeans_fit(emb: &EmbeddingDataset, s: usize, seed: u64) -> Result<Partition> {
    kmeans_fit_with(emb, s, seed, 100, 1e-6).map(|run| run.partition)
}

/// Lloyd's algorithm with explicit iteration cap and tolerance.
///
/// Convergence: `sqrt(sum_j ||c_new_j - c_old_j||^2) / (1 + sqrt(sum_j ||c_old_j||^2))`
/// drops below `tol`. Empty clusters are repaired by moving in the point
/// farthest from its assigned centroid.
pub fn kmeans_fit_with(
    emb: &EmbeddingDataset,
    s: usize,
    seed: u64,
    max_iters: usize,
    tol: f64,
) -> Result<KmeansRun> {
    let n = emb.n();
    let d = emb.d();
    if s == 0 {
        return Err(LigerError::Argument("s must be at least 1".into()));
    }
    if s > n {
        return Err(LigerError::Argument(format!(
            "s = {s} exceeds the number of points n = {n}"
        )));
    }

    // Work in f64; normalize rows under cosine.
    let points: Vec<Vec<f64>> = (0..n)
        .map(|i| prepare_query(emb.metric(), emb.row(i)))
        .collect::<Result<_>>()?;

    let mut centroids = seed_centroids(&points, s, seed);
    let mut assignment = vec![0usize; n];
    let mut history = Vec::new();
    let mut iterations = 0;

    for _ in 0..max_iters.max(1) {
        iterations += 1;
        let (assign, objective) = assign_all(&points, &centroids);
        assignment = assign;
        history.push(objective);
        repair_empty_parts(&points, &centroids, &mut assignment, s);

        let new_centroids = update_centroids(&points, &assignment, s, d, emb.metric());
        let movement: f64 = centroids
            .iter()
            .zip(new_centroids.iter())
            .map(|(a, b)| squared_dist(a, b))
            .sum();
        let scale: f64 = centroids.iter().map(|c| c.iter().map(|v| v * v).sum::<f64>()).sum();
        let rel = movement.sqrt() / (1.0 + scale.sqrt());
        centroids = new_centroids;
        if rel < tol {
            break;
        }
    }

    // Final assignment against the final centroids so the nearest-centroid
    // invariant holds exactly; bounded repair loop for degenerate data.
    for _ in 0..16 {
        let (assign, objective) = assign_all(&points, &centroids);
        assignment = assign;
        history.push(objective);
        let mut sizes = vec![0usize; s];
        for &a in &assignment {
            sizes[a] += 1;
        }
        if sizes.iter().all(|&c| c > 0) {
            break;
        }
        repair_empty_parts(&points, &centroids, &mut assignment, s);
        centroids = update_centroids(&points, &assignment, s, d, emb.metric());
    }

    let mut part_sizes = vec![0usize; s];
    for &a in &assignment {
        part_sizes[a] += 1;
    }
    if part_sizes.contains(&0) {
        return Err(LigerError::Internal(
            "empty part survived repair (degenerate duplicate data?)".into(),
        ));
    }

    Ok(KmeansRun {
        partition: Partition {
            s,
            metric: emb.metric(),
            centroids,
            assignment,
            part_sizes,
        },
        objective_history: history,
        iterations,
    })
}

/// First center from the seeded generator, the rest greedy farthest-point.
fn seed_centroids(points: &[Vec<f64>], s: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = SplitMix64::new(seed);
    let first = rng.next_index(points.len());
    let mut centroids = vec![points[first].clone()];
    let mut min_d: Vec<f64> = points.iter().map(|p| squared_dist(p, &centroids[0])).collect();
    while centroids.len() < s {
        let mut best = 0usize;
        let mut best_d = -1.0f64;
        for (i, &dist) in min_d.iter().enumerate() {
            if dist > best_d {
                best_d = dist;
                best = i;
            }
        }
        let chosen = points[best].clone();
        for (i, p) in points.iter().enumerate() {
            let d = squared_dist(p, &chosen);
            if d < min_d[i] {
                min_d[i] = d;
            }
        }
        centroids.push(chosen);
    }
    centroids
}

fn assign_all(points: &[Vec<f64>], centroids: &[Vec<f64>]) -> (Vec<usize>, f64) {
    let pairs: Vec<(usize, f64)> = points
        .par_iter()
        .map(|p| {
            let j = nearest_centroid(p, centroids);
            (j, squared_dist(p, &centroids[j]))
        })
        .collect();
    // Objective is summed sequentially in index order for determinism.
    let objective = pairs.iter().map(|(_, d)| d).sum();
    (pairs.into_iter().map(|(j, _)| j).collect(), objective)
}

fn repair_empty_parts(
    points: &[Vec<f64>],
    centroids: &[Vec<f64>],
    assignment: &mut [usize],
    s: usize,
) {
    let mut sizes = vec![0usize; s];
    for &a in assignment.iter() {
        sizes[a] += 1;
    }
    for j in 0..s {
        if sizes[j] > 0 {
            continue;
        }
        let mut best: Option<usize> = None;
        let mut best_d = -1.0f64;
        for (i, &a) in assignment.iter().enumerate() {
            if sizes[a] <= 1 {
                continue;
            }
            let d = squared_dist(&points[i], &centroids[a]);
            if d > best_d {
                best_d = d;
                best = Some(i);
            }
        }
        if let Some(i) = best {
            sizes[assignment[i]] -= 1;
            assignment[i] = j;
            sizes[j] += 1;
        }
    }
}

fn update_centroids(
    points: &[Vec<f64>],
    assignment: &[usize],
    s: usize,
    d: usize,
    metric: Metric,
) -> Vec<Vec<f64>> {
    let mut sums = vec![vec![0.0f64; d]; s];
    let mut counts = vec![0usize; s];
    for (i, &a) in assignment.iter().enumerate() {
        counts[a] += 1;
        for (acc, v) in sums[a].iter_mut().zip(points[i].iter()) {
            *acc += v;
        }
    }
    for (j, c) in sums.iter_mut().enumerate() {
        if counts[j] > 0 {
            for v in c.iter_mut() {
                *v /= counts[j] as f64;
            }
        }
        if metric == Metric::Cosine {
            let norm = c.iter().map(|v| v * v).sum::<f64>().sqrt();
            if norm > 0.0 {
                for v in c.iter_mut() {
                    *v /= norm;
                }
            }
        }
    }
    sums
}

/// Per-part exact diameters and their probability-mass-weighted average.
#[derive(Debug, Clone, Serialize)]
pub struct PartDiameters {
    pub per_part: Vec<f64>,
    /// Average weighted by `part_size / n`.
    pub average: f64,
}

/// Exact maximum pairwise distance within each part, under the dataset metric.
pub fn part_diameters(emb: &EmbeddingDataset, partition: &Partition) -> Result<PartDiameters> {
    if partition.n() != emb.n() {
        return Err(LigerError::shape("partition size", emb.n(), partition.n()));
    }
    let members: Vec<Vec<usize>> = (0..partition.s())
        .map(|j| partition.members(j).collect())
        .collect();
    let per_part: Vec<f64> = members
        .par_iter()
        .map(|pts| {
            let mut diameter = 0.0f64;
            for (idx, &a) in pts.iter().enumerate() {
                for &b in &pts[idx + 1..] {
                    let d = emb.row_distance(a, b);
                    if d > diameter {
                        diameter = d;
                    }
                }
            }
            diameter
        })
        .collect();
    let n = emb.n() as f64;
    let average = per_part
        .iter()
        .zip(partition.part_sizes().iter())
        .map(|(d, &sz)| d * sz as f64 / n)
        .sum();
    Ok(PartDiameters { per_part, average })
}
