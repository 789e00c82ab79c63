//! Typed containers for embeddings, votes, labels, and engine configuration.
//!
//! All containers are immutable after construction and validated on entry:
//! embeddings must be finite (and non-degenerate under the cosine metric),
//! votes live in `{-1, 0, +1}` with `0` meaning the source abstained, and
//! labels live in `{-1, +1}`.

use serde::{Deserialize, Serialize};

use crate::error::{LigerError, Result};

/// Distance function declared for an embedding space.
///
/// `Cosine` is realized as the distance `1 - cosine_similarity` so that all
/// downstream code consumes a single distance function; similarity thresholds
/// `t` convert to radii as `r = 1 - t`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Metric {
    Euclidean,
    Cosine,
}

impl Metric {
    pub fn parse(s: &str) -> Result<Metric> {
        match s {
            "euclidean" => Ok(Metric::Euclidean),
            "cosine" => Ok(Metric::Cosine),
            other => Err(LigerError::validation(
                "metric",
                format!("unknown metric `{other}` (expected euclidean or cosine)"),
            )),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Metric::Euclidean => "euclidean",
            Metric::Cosine => "cosine",
        }
    }
}

/// Distance between two points under `metric`, accumulated in f64.
pub fn distance(metric: Metric, a: &[f32], b: &[f32]) -> f64 {
    match metric {
        Metric::Euclidean => {
            let mut acc = 0.0f64;
            for (x, y) in a.iter().zip(b.iter()) {
                let d = *x as f64 - *y as f64;
                acc += d * d;
            }
            acc.sqrt()
        }
        Metric::Cosine => {
            let (mut dot, mut na, mut nb) = (0.0f64, 0.0f64, 0.0f64);
            for (x, y) in a.iter().zip(b.iter()) {
                let (x, y) = (*x as f64, *y as f64);
                dot += x * y;
                na += x * x;
                nb += y * y;
            }
            1.0 - dot / (na.sqrt() * nb.sqrt())
        }
    }
}

/// An `n x d` matrix of finite reals with a declared metric: the embedded
/// view of the dataset that every distance computation runs against.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingDataset {
    n: usize,
    d: usize,
    data: Vec<f32>,
    metric: Metric,
}

impl EmbeddingDataset {
    /// Validates finiteness and, under cosine, strictly positive row norms.
    pub fn new(data: Vec<f32>, d: usize, metric: Metric) -> Result<Self> {
        if d == 0 {
            return Err(LigerError::validation("d", "dimension must be positive"));
        }
        if !data.len().is_multiple_of(d) {
            return Err(LigerError::shape(
                "embedding data length",
                d * (data.len() / d),
                data.len(),
            ));
        }
        let n = data.len() / d;
        for (i, v) in data.iter().enumerate() {
            if !v.is_finite() {
                return Err(LigerError::validation(
                    "data",
                    format!("non-finite entry {v} at row {}, column {}", i / d, i % d),
                ));
            }
        }
        if metric == Metric::Cosine {
            for row in 0..n {
                let norm: f64 = data[row * d..(row + 1) * d]
                    .iter()
                    .map(|v| (*v as f64) * (*v as f64))
                    .sum();
                if norm <= 0.0 {
                    return Err(LigerError::validation(
                        "data",
                        format!("row {row} has zero norm, invalid under the cosine metric"),
                    ));
                }
            }
        }
        Ok(EmbeddingDataset { n, d, data, metric })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn metric(&self) -> Metric {
        self.metric
    }

    pub fn row(&self, i: usize) -> &[f32] {
        &self.data[i * self.d..(i + 1) * self.d]
    }

    pub fn data(&self) -> &[f32] {
        &self.data
    }

    /// Distance between two stored rows under the dataset metric.
    pub fn row_distance(&self, a: usize, b: usize) -> f64 {
        distance(self.metric, self.row(a), self.row(b))
    }

    /// Distance from a stored row to an arbitrary point.
    pub fn distance_to(&self, row: usize, point: &[f32]) -> f64 {
        distance(self.metric, self.row(row), point)
    }
}

/// An `n x m` matrix of votes over `{-1, 0, +1}`; `0` is an abstain.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VoteMatrix {
    n: usize,
    m: usize,
    votes: Vec<i8>,
}

impl VoteMatrix {
    pub fn new(votes: Vec<i8>, m: usize) -> Result<Self> {
        if m == 0 {
            return Err(LigerError::validation("m", "source count must be positive"));
        }
        if !votes.len().is_multiple_of(m) {
            return Err(LigerError::shape(
                "vote data length",
                m * (votes.len() / m),
                votes.len(),
            ));
        }
        for (i, v) in votes.iter().enumerate() {
            if !matches!(v, -1..=1) {
                return Err(LigerError::validation(
                    "votes",
                    format!("value {} at row {}, source {} not in {{-1,0,1}}", v, i / m, i % m),
                ));
            }
        }
        let n = votes.len() / m;
        Ok(VoteMatrix { n, m, votes })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn get(&self, point: usize, source: usize) -> i8 {
        self.votes[point * self.m + source]
    }

    pub fn row(&self, point: usize) -> &[i8] {
        &self.votes[point * self.m..(point + 1) * self.m]
    }

    pub fn data(&self) -> &[i8] {
        &self.votes
    }

    /// Fraction of points on which `source` does not abstain.
    pub fn coverage(&self, source: usize) -> f64 {
        let covered = (0..self.n).filter(|&p| self.get(p, source) != 0).count();
        covered as f64 / self.n as f64
    }
}

/// Ground-truth labels over `{-1, +1}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelVector {
    labels: Vec<i8>,
}

impl LabelVector {
    pub fn new(labels: Vec<i8>) -> Result<Self> {
        for (i, v) in labels.iter().enumerate() {
            if !matches!(v, -1 | 1) {
                return Err(LigerError::validation(
                    "labels",
                    format!("value {v} at row {i} not in {{-1,1}}"),
                ));
            }
        }
        Ok(LabelVector { labels })
    }

    pub fn n(&self) -> usize {
        self.labels.len()
    }

    pub fn get(&self, i: usize) -> i8 {
        self.labels[i]
    }

    pub fn data(&self) -> &[i8] {
        &self.labels
    }

    /// Fraction of labels equal to +1.
    pub fn positive_prior(&self) -> f64 {
        let pos = self.labels.iter().filter(|&&v| v == 1).count();
        pos as f64 / self.labels.len() as f64
    }
}

/// How per-part class balances `Pr(y = 1 | part)` are obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClassBalanceMode {
    /// Every part gets balance 0.5.
    Uniform,
    /// One value estimated from dev labels, shared by all parts.
    GlobalFromDev,
    /// Dev labels bucketed by part, Laplace-smoothed with pseudo-count 1.
    PerPartFromDev,
    /// Caller-supplied per-part list.
    Explicit,
}

fn default_clamp() -> f64 {
    0.001
}

fn default_kmeans_max_iters() -> usize {
    100
}

fn default_kmeans_tol() -> f64 {
    1e-6
}

fn default_s() -> usize {
    1
}

fn default_metric() -> Metric {
    Metric::Euclidean
}

fn default_balance_mode() -> ClassBalanceMode {
    ClassBalanceMode::Uniform
}

/// Engine configuration; the on-disk document mirrors these field names.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EngineConfig {
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_s")]
    pub s: usize,
    /// Per-source extension radii; empty means "no extension for any source".
    #[serde(default)]
    pub radii: Vec<f64>,
    #[serde(default = "default_metric")]
    pub metric: Metric,
    #[serde(default = "default_balance_mode")]
    pub class_balance_mode: ClassBalanceMode,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub explicit_balances: Option<Vec<f64>>,
    #[serde(default = "default_clamp")]
    pub accuracy_clamp: f64,
    #[serde(default = "default_kmeans_max_iters")]
    pub kmeans_max_iters: usize,
    #[serde(default = "default_kmeans_tol")]
    pub kmeans_tol: f64,
}

impl Default for EngineConfig {
    fn default() -> Self {
        EngineConfig {
            seed: 0,
            s: 1,
            radii: Vec::new(),
            metric: Metric::Euclidean,
            class_balance_mode: ClassBalanceMode::Uniform,
            explicit_balances: None,
            accuracy_clamp: default_clamp(),
            kmeans_max_iters: default_kmeans_max_iters(),
            kmeans_tol: default_kmeans_tol(),
        }
    }
}

impl EngineConfig {
    pub fn validate(&self) -> Result<()> {
        if self.s < 1 {
            return Err(LigerError::validation("s", "part count must be >= 1"));
        }
        if self.radii.iter().any(|r| r.is_nan() || *r < 0.0) {
            return Err(LigerError::validation("radii", "radii must be non-negative"));
        }
        if !(self.accuracy_clamp > 0.0 && self.accuracy_clamp < 0.5) {
            return Err(LigerError::validation(
                "accuracy_clamp",
                "clamp must lie strictly inside (0, 0.5)",
            ));
        }
        match (self.class_balance_mode, &self.explicit_balances) {
            (ClassBalanceMode::Explicit, None) => Err(LigerError::validation(
                "explicit_balances",
                "required when class_balance_mode = explicit",
            )),
            (mode, Some(_)) if mode != ClassBalanceMode::Explicit => Err(LigerError::validation(
                "explicit_balances",
                "only allowed when class_balance_mode = explicit",
            )),
            (ClassBalanceMode::Explicit, Some(b)) => {
                if b.len() != self.s {
                    return Err(LigerError::shape("explicit_balances", self.s, b.len()));
                }
                if b.iter().any(|v| !(*v > 0.0 && *v < 1.0)) {
                    return Err(LigerError::validation(
                        "explicit_balances",
                        "balances must lie strictly inside (0, 1)",
                    ));
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    /// The radii vector expanded to `m` entries (empty config means all 0).
    pub fn radii_for(&self, m: usize) -> Result<Vec<f64>> {
        if self.radii.is_empty() {
            Ok(vec![0.0; m])
        } else if self.radii.len() == m {
            Ok(self.radii.clone())
        } else {
            Err(LigerError::shape("radii", m, self.radii.len()))
        }
    }
}

/// Summary produced by [`validate_bundle`].
#[derive(Debug, Clone, Serialize)]
pub struct DiagnosticsSummary {
    pub n: usize,
    pub m: usize,
    /// Per-source fraction of points with a non-abstain vote.
    pub coverage: Vec<f64>,
    /// Fraction of +1 labels, when labels are provided.
    pub positive_prior: Option<f64>,
}

/// Checks that embeddings, votes, and optional labels agree on `n` and
/// reports coverage and class-prior statistics.
pub fn validate_bundle(
    emb: &EmbeddingDataset,
    votes: &VoteMatrix,
    labels: Option<&LabelVector>,
) -> Result<DiagnosticsSummary> {
    if votes.n() != emb.n() {
        return Err(LigerError::shape("votes row count", emb.n(), votes.n()));
    }
    if let Some(l) = labels {
        if l.n() != emb.n() {
            return Err(LigerError::shape("labels row count", emb.n(), l.n()));
        }
    }
    let coverage = (0..votes.m()).map(|s| votes.coverage(s)).collect();
    Ok(DiagnosticsSummary {
        n: emb.n(),
        m: votes.m(),
        coverage,
        positive_prior: labels.map(LabelVector::positive_prior),
    })
}
