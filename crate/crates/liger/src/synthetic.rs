//! Exact samplers for the binary label-plus-votes graphical model and the
//! two-dimensional checkerboard benchmark tasks.
//!
//! The generative model has canonical parameters `theta_y` (class balance),
//! `theta[i]` (source accuracy), and `theta_abstain[i]` (abstain rate):
//!
//! ```text
//! Pr(lambda_i = v | y) = exp(theta_i * v * y + theta_abstain_i * 1{v = 0}) / Z_i(y)
//! Pr(y) ∝ exp(theta_y * y) * prod_i Z_i(y)
//! ```
//!
//! with `Z_i(y)` summing the numerator over `v ∈ {-1, 0, +1}`.
//!
//! Sampling bit-stream (shared by reimplementations): one `SplitMix64`
//! stream seeded with the given seed; per point, one `next_f64` draw decides
//! `y` (`+1` iff `u < Pr(y = +1)`), then one draw per source in ascending
//! order walks the cumulative distribution over votes in the fixed order
//! `-1, 0, +1`.

use crate::data::{EmbeddingDataset, LabelVector, Metric, VoteMatrix};
use crate::error::{LigerError, Result};
use crate::rng::{derive, SplitMix64};

/// Canonical parameters of one population.
#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticModelSpec {
    pub m: usize,
    pub theta_y: f64,
    pub theta: Vec<f64>,
    pub theta_abstain: Vec<f64>,
}

impl SyntheticModelSpec {
    pub fn validate(&self) -> Result<()> {
        if self.theta.len() != self.m || self.theta_abstain.len() != self.m {
            return Err(LigerError::shape("theta length", self.m, self.theta.len()));
        }
        if !self.theta_y.is_finite()
            || self.theta.iter().any(|t| !t.is_finite())
            || self.theta_abstain.iter().any(|t| !t.is_finite())
        {
            return Err(LigerError::validation("theta", "parameters must be finite"));
        }
        Ok(())
    }
}

/// Exact conditional probability tables implied by a spec.
///
/// Vote probabilities are indexed `[source][y][v]` with `y` in order
/// `(+1, -1)` and `v` in order `(-1, 0, +1)`.
#[derive(Debug, Clone)]
pub struct ConditionalTables {
    pub prob_y_pos: f64,
    pub vote_given_y: Vec<[[f64; 3]; 2]>,
}

impl ConditionalTables {
    /// `Pr(lambda_i = v | y)`.
    pub fn vote_prob(&self, source: usize, y: i8, v: i8) -> f64 {
        let yi = if y == 1 { 0 } else { 1 };
        let vi = (v + 1) as usize; // -1 -> 0, 0 -> 1, +1 -> 2
        self.vote_given_y[source][yi][vi]
    }

    /// Analytic accuracy `E[lambda_i * y | lambda_i != 0]`.
    pub fn accuracy(&self, source: usize) -> f64 {
        let mut signal = 0.0;
        let mut mass = 0.0;
        for (y, py) in [(1i8, self.prob_y_pos), (-1i8, 1.0 - self.prob_y_pos)] {
            let yv = y as f64;
            signal += py
                * (self.vote_prob(source, y, 1) * yv - self.vote_prob(source, y, -1) * yv);
            mass += py * (1.0 - self.vote_prob(source, y, 0));
        }
        signal / mass
    }

    /// Analytic coverage `Pr(lambda_i != 0)`.
    pub fn coverage(&self, source: usize) -> f64 {
        let mut mass = 0.0;
        for (y, py) in [(1i8, self.prob_y_pos), (-1i8, 1.0 - self.prob_y_pos)] {
            mass += py * (1.0 - self.vote_prob(source, y, 0));
        }
        mass
    }

    /// Analytic agreement `E[lambda_i * lambda_k | both != 0]`.
    pub fn pair_agreement(&self, i: usize, k: usize) -> f64 {
        let mut signal = 0.0;
        let mut mass = 0.0;
        for (y, py) in [(1i8, self.prob_y_pos), (-1i8, 1.0 - self.prob_y_pos)] {
            let ei = self.vote_prob(i, y, 1) - self.vote_prob(i, y, -1);
            let ek = self.vote_prob(k, y, 1) - self.vote_prob(k, y, -1);
            signal += py * ei * ek;
            mass += py * (1.0 - self.vote_prob(i, y, 0)) * (1.0 - self.vote_prob(k, y, 0));
        }
        signal / mass
    }

    pub fn accuracies(&self) -> Vec<f64> {
        (0..self.vote_given_y.len()).map(|i| self.accuracy(i)).collect()
    }
}

/// Exact tables for a spec; log-space normalization for the class prior so
/// large parameter magnitudes cannot overflow.
pub fn conditional_tables(spec: &SyntheticModelSpec) -> Result<ConditionalTables> {
    spec.validate()?;
    let mut vote_given_y = Vec::with_capacity(spec.m);
    let mut log_z = [0.0f64; 2]; // per y in (+1, -1)
    for i in 0..spec.m {
        let mut rows = [[0.0f64; 3]; 2];
        for (yi, y) in [(0usize, 1.0f64), (1usize, -1.0f64)] {
            let mut weights = [0.0f64; 3];
            for (vi, v) in [(0usize, -1.0f64), (1usize, 0.0f64), (2usize, 1.0f64)] {
                let abstain = if v == 0.0 { spec.theta_abstain[i] } else { 0.0 };
                weights[vi] = (spec.theta[i] * v * y + abstain).exp();
            }
            let z: f64 = weights.iter().sum();
            for vi in 0..3 {
                rows[yi][vi] = weights[vi] / z;
            }
            log_z[yi] += z.ln();
        }
        vote_given_y.push(rows);
    }
    let log_pos = spec.theta_y + log_z[0];
    let log_neg = -spec.theta_y + log_z[1];
    let prob_y_pos = 1.0 / (1.0 + (log_neg - log_pos).exp());
    Ok(ConditionalTables {
        prob_y_pos,
        vote_given_y,
    })
}

/// Inverts target accuracy and abstain rate to canonical parameters.
///
/// `theta[i]` is found by bisection (tolerance 1e-10) on the analytic
/// accuracy computed from the tables; given it, the abstain parameter has
/// the closed form `ln(2 cosh(theta_i) * q / (1 - q))`, capped to ±50
/// (abstain rates below ~1e-20 are indistinguishable from zero).
pub fn spec_from_accuracy(
    accuracies: &[f64],
    abstain_rates: &[f64],
    theta_y: f64,
) -> Result<SyntheticModelSpec> {
    if accuracies.len() != abstain_rates.len() {
        return Err(LigerError::shape("abstain_rates", accuracies.len(), abstain_rates.len()));
    }
    let m = accuracies.len();
    let mut theta = Vec::with_capacity(m);
    let mut theta_abstain = Vec::with_capacity(m);
    for (i, (&a, &q)) in accuracies.iter().zip(abstain_rates.iter()).enumerate() {
        if !(-1.0 < a && a < 1.0) {
            return Err(LigerError::validation(
                "accuracies",
                format!("target accuracy {a} for source {i} must lie in (-1, 1)"),
            ));
        }
        if !(0.0..1.0).contains(&q) {
            return Err(LigerError::validation(
                "abstain_rates",
                format!("abstain rate {q} for source {i} must lie in [0, 1)"),
            ));
        }
        let t = bisect_theta(a)?;
        theta.push(t);
        let t0 = if q == 0.0 {
            -50.0
        } else {
            ((2.0 * t.cosh()) * q / (1.0 - q)).ln().clamp(-50.0, 50.0)
        };
        theta_abstain.push(t0);
    }
    Ok(SyntheticModelSpec {
        m,
        theta_y,
        theta,
        theta_abstain,
    })
}

fn bisect_theta(target: f64) -> Result<f64> {
    // Accuracy is increasing in theta; evaluate through the same table
    // arithmetic the samplers use.
    let acc = |t: f64| -> f64 {
        let spec = SyntheticModelSpec {
            m: 1,
            theta_y: 0.0,
            theta: vec![t],
            theta_abstain: vec![0.0],
        };
        conditional_tables(&spec).unwrap().accuracy(0)
    };
    let (mut lo, mut hi) = (-50.0f64, 50.0f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let v = acc(mid);
        if (v - target).abs() < 1e-10 {
            return Ok(mid);
        }
        if v < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// One sampled bundle plus the analytic accuracies of its generator.
#[derive(Debug, Clone)]
pub struct SampledDataset {
    pub labels: LabelVector,
    pub votes: VoteMatrix,
    pub true_accuracies: Vec<f64>,
}

/// Samples `n` points: `y` from the class prior, then each source's vote
/// independently given `y`. Deterministic per seed.
pub fn sample_dataset(spec: &SyntheticModelSpec, n: usize, seed: u64) -> Result<SampledDataset> {
    if n == 0 {
        return Err(LigerError::Argument("n must be at least 1".into()));
    }
    let tables = conditional_tables(spec)?;
    let mut rng = SplitMix64::new(seed);
    let mut labels = Vec::with_capacity(n);
    let mut votes = Vec::with_capacity(n * spec.m);
    for _ in 0..n {
        let y: i8 = if rng.next_f64() < tables.prob_y_pos { 1 } else { -1 };
        labels.push(y);
        for i in 0..spec.m {
            let u = rng.next_f64();
            let p_neg = tables.vote_prob(i, y, -1);
            let p_zero = tables.vote_prob(i, y, 0);
            let v = if u < p_neg {
                -1
            } else if u < p_neg + p_zero {
                0
            } else {
                1
            };
            votes.push(v);
        }
    }
    Ok(SampledDataset {
        labels: LabelVector::new(labels)?,
        votes: VoteMatrix::new(votes, spec.m)?,
        true_accuracies: tables.accuracies(),
    })
}

/// Two populations concatenated, with ground-truth membership flags.
#[derive(Debug, Clone)]
pub struct TwoPopulationBundle {
    pub labels: LabelVector,
    pub votes: VoteMatrix,
    /// 0 for the first population, 1 for the second.
    pub membership: Vec<u8>,
    pub tables_a: ConditionalTables,
    pub tables_b: ConditionalTables,
}

/// `n_each` samples from each spec, concatenated in order (population 0
/// first). Child seeds are `derive(seed, 0)` and `derive(seed, 1)`.
pub fn two_population_dataset(
    spec_a: &SyntheticModelSpec,
    spec_b: &SyntheticModelSpec,
    n_each: usize,
    seed: u64,
) -> Result<TwoPopulationBundle> {
    if spec_a.m != spec_b.m {
        return Err(LigerError::Argument(format!(
            "population source counts differ: {} vs {}",
            spec_a.m, spec_b.m
        )));
    }
    let a = sample_dataset(spec_a, n_each, derive(seed, 0))?;
    let b = sample_dataset(spec_b, n_each, derive(seed, 1))?;
    let mut labels = a.labels.data().to_vec();
    labels.extend_from_slice(b.labels.data());
    let mut votes = a.votes.data().to_vec();
    votes.extend_from_slice(b.votes.data());
    let mut membership = vec![0u8; n_each];
    membership.extend(vec![1u8; n_each]);
    Ok(TwoPopulationBundle {
        labels: LabelVector::new(labels)?,
        votes: VoteMatrix::new(votes, spec_a.m)?,
        membership,
        tables_a: conditional_tables(spec_a)?,
        tables_b: conditional_tables(spec_b)?,
    })
}

/// How ground-truth labels are laid out over the unit square.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LabelPattern {
    /// `g x g` tiles; `+1` on tiles whose index parity is even.
    Checkerboard { g: u32 },
    /// Independent uniform labels per point (no spatial structure).
    Random,
}

/// Where a source votes on the unit square.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SupportRegion {
    Full,
    /// `x_min <= x < x_max` and `y_min <= y < y_max`.
    Rect {
        x_min: f64,
        y_min: f64,
        x_max: f64,
        y_max: f64,
    },
    /// Each point independently belongs to the support with this
    /// probability: a scattered support, the shape real weak sources have.
    RandomFraction(f64),
}

impl SupportRegion {
    /// Membership test; `support_draw` is the point's uniform draw from the
    /// source's support stream (only consulted by `RandomFraction`).
    pub fn contains(&self, x: f64, y: f64, support_draw: f64) -> bool {
        match self {
            SupportRegion::Full => true,
            SupportRegion::Rect {
                x_min,
                y_min,
                x_max,
                y_max,
            } => x >= *x_min && x < *x_max && y >= *y_min && y < *y_max,
            SupportRegion::RandomFraction(f) => support_draw < *f,
        }
    }
}

/// One weak source on the checkerboard task.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CheckerboardSource {
    pub support: SupportRegion,
    /// In (0, 1]; the source votes the true label with probability
    /// `(1 + accuracy) / 2` inside its support.
    pub accuracy: f64,
    /// Marked for radius sweeps in the extension benchmark.
    pub extendable: bool,
}

/// Benchmark task: uniform points on the unit square, pattern labels,
/// region-supported noisy sources. The 2-D coordinates double as the
/// embedding.
#[derive(Debug, Clone, PartialEq)]
pub struct CheckerboardTaskSpec {
    pub n: usize,
    pub pattern: LabelPattern,
    pub seed: u64,
    pub sources: Vec<CheckerboardSource>,
}

#[derive(Debug, Clone)]
pub struct CheckerboardTask {
    pub embeddings: EmbeddingDataset,
    pub labels: LabelVector,
    pub votes: VoteMatrix,
}

/// Label of a point under a pattern. Tile indices floor the coordinates and
/// clamp to the last tile so `x = 1.0` stays on the board.
pub fn pattern_label(pattern: LabelPattern, x: f64, y: f64, label_draw: f64) -> i8 {
    match pattern {
        LabelPattern::Checkerboard { g } => {
            let g = g.max(1) as f64;
            let tx = ((x * g) as u32).min(g as u32 - 1);
            let ty = ((y * g) as u32).min(g as u32 - 1);
            if (tx + ty).is_multiple_of(2) {
                1
            } else {
                -1
            }
        }
        LabelPattern::Random => {
            if label_draw < 0.5 {
                1
            } else {
                -1
            }
        }
    }
}

/// Generates the task. Substreams keep variants comparable: points come from
/// `derive(seed, 0)` (two draws per point, x then y), random-pattern labels
/// from `derive(seed, 1)` (one draw per point), source `i`'s vote noise from
/// `derive(seed, 2 + i)` and its support membership from
/// `derive(seed, 2 + m + i)` (one draw per point each, consumed whether or
/// not the point is in support). Tasks sharing `n` and `seed` therefore
/// share the point cloud, and each source keeps identical support and vote
/// noise across label patterns, accuracy levels, and the other sources'
/// settings.
pub fn checkerboard_task(spec: &CheckerboardTaskSpec) -> Result<CheckerboardTask> {
    if spec.n == 0 {
        return Err(LigerError::Argument("n must be at least 1".into()));
    }
    if spec.sources.is_empty() {
        return Err(LigerError::Argument("need at least one source".into()));
    }
    for (i, src) in spec.sources.iter().enumerate() {
        if !(src.accuracy > 0.0 && src.accuracy <= 1.0) {
            return Err(LigerError::validation(
                "sources",
                format!("accuracy {} of source {i} must lie in (0, 1]", src.accuracy),
            ));
        }
        if let SupportRegion::RandomFraction(f) = src.support {
            if !(0.0..=1.0).contains(&f) {
                return Err(LigerError::validation(
                    "sources",
                    format!("support fraction {f} of source {i} must lie in [0, 1]"),
                ));
            }
        }
    }
    let m = spec.sources.len();
    let mut point_rng = SplitMix64::new(derive(spec.seed, 0));
    let mut label_rng = SplitMix64::new(derive(spec.seed, 1));
    let mut vote_rngs: Vec<SplitMix64> = (0..m)
        .map(|i| SplitMix64::new(derive(spec.seed, 2 + i as u64)))
        .collect();
    let mut support_rngs: Vec<SplitMix64> = (0..m)
        .map(|i| SplitMix64::new(derive(spec.seed, 2 + (m + i) as u64)))
        .collect();

    let mut coords = Vec::with_capacity(spec.n * 2);
    let mut labels = Vec::with_capacity(spec.n);
    let mut votes = Vec::with_capacity(spec.n * m);
    for _ in 0..spec.n {
        let x = point_rng.next_f64();
        let y = point_rng.next_f64();
        coords.push(x as f32);
        coords.push(y as f32);
        let label_draw = label_rng.next_f64();
        // Labels derive from the stored f32 coordinates so re-evaluating the
        // pattern on the emitted embedding reproduces them exactly.
        let (px, py) = (coords[coords.len() - 2] as f64, coords[coords.len() - 1] as f64);
        let label = pattern_label(spec.pattern, px, py, label_draw);
        labels.push(label);
        for (i, src) in spec.sources.iter().enumerate() {
            let u = vote_rngs[i].next_f64();
            let support_draw = support_rngs[i].next_f64();
            let v = if src.support.contains(px, py, support_draw) {
                if u < (1.0 + src.accuracy) / 2.0 {
                    label
                } else {
                    -label
                }
            } else {
                0
            };
            votes.push(v);
        }
    }
    Ok(CheckerboardTask {
        embeddings: EmbeddingDataset::new(coords, 2, Metric::Euclidean)?,
        labels: LabelVector::new(labels)?,
        votes: VoteMatrix::new(votes, m)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_thetas_give_uniform_tables() {
        let spec = SyntheticModelSpec {
            m: 2,
            theta_y: 0.0,
            theta: vec![0.0, 0.0],
            theta_abstain: vec![0.0, 0.0],
        };
        let t = conditional_tables(&spec).unwrap();
        assert!((t.prob_y_pos - 0.5).abs() < 1e-15);
        for i in 0..2 {
            for v in [-1i8, 0, 1] {
                assert!((t.vote_prob(i, 1, v) - 1.0 / 3.0).abs() < 1e-15);
                assert!((t.vote_prob(i, -1, v) - 1.0 / 3.0).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn closed_form_normalization_fixture() {
        let spec = SyntheticModelSpec {
            m: 1,
            theta_y: 0.0,
            theta: vec![1.0],
            theta_abstain: vec![0.0],
        };
        let t = conditional_tables(&spec).unwrap();
        let e = 1.0f64.exp();
        let want = e / (e + (-1.0f64).exp() + 1.0);
        assert!((t.vote_prob(0, 1, 1) - want).abs() < 1e-12);
        assert!((want - 0.66524).abs() < 1e-5);
    }

    #[test]
    fn flipping_theta_swaps_vote_probabilities() {
        let pos = SyntheticModelSpec {
            m: 1,
            theta_y: 0.3,
            theta: vec![0.8],
            theta_abstain: vec![-0.2],
        };
        let neg = SyntheticModelSpec {
            theta: vec![-0.8],
            ..pos.clone()
        };
        let tp = conditional_tables(&pos).unwrap();
        let tn = conditional_tables(&neg).unwrap();
        assert!((tp.vote_prob(0, 1, 1) - tn.vote_prob(0, 1, -1)).abs() < 1e-15);
        assert!((tp.vote_prob(0, -1, 1) - tn.vote_prob(0, -1, -1)).abs() < 1e-15);
    }

    #[test]
    fn tables_are_normalized() {
        let spec = SyntheticModelSpec {
            m: 3,
            theta_y: 0.4,
            theta: vec![1.2, -0.3, 0.7],
            theta_abstain: vec![0.5, -1.0, 0.0],
        };
        let t = conditional_tables(&spec).unwrap();
        for i in 0..3 {
            for y in [1i8, -1] {
                let total: f64 = [-1i8, 0, 1].iter().map(|&v| t.vote_prob(i, y, v)).sum();
                assert!((total - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn near_infinite_theta_makes_votes_equal_labels() {
        let spec = SyntheticModelSpec {
            m: 1,
            theta_y: 0.0,
            theta: vec![20.0],
            theta_abstain: vec![-20.0],
        };
        let t = conditional_tables(&spec).unwrap();
        assert!((t.vote_prob(0, 1, 1) - 1.0).abs() < 1e-8);
        assert!((t.vote_prob(0, -1, -1) - 1.0).abs() < 1e-8);
        let d = sample_dataset(&spec, 2000, 5).unwrap();
        for p in 0..2000 {
            assert_eq!(d.votes.get(p, 0), d.labels.get(p));
        }
    }

    #[test]
    fn accuracy_inversion_round_trips() {
        let spec = spec_from_accuracy(&[0.8, 0.6, 0.7], &[0.0, 0.3, 0.5], 0.2).unwrap();
        let t = conditional_tables(&spec).unwrap();
        for (i, want) in [0.8, 0.6, 0.7].iter().enumerate() {
            assert!((t.accuracy(i) - want).abs() < 1e-8, "source {i}");
        }
        assert!((1.0 - t.coverage(1) - 0.3).abs() < 1e-8);
        assert!((1.0 - t.coverage(2) - 0.5).abs() < 1e-8);
    }

    #[test]
    fn sampling_is_deterministic_per_seed() {
        let spec = spec_from_accuracy(&[0.8, 0.6, 0.7], &[0.1, 0.2, 0.0], 0.0).unwrap();
        let a = sample_dataset(&spec, 500, 42).unwrap();
        let b = sample_dataset(&spec, 500, 42).unwrap();
        assert_eq!(a.labels, b.labels);
        assert_eq!(a.votes, b.votes);
        let c = sample_dataset(&spec, 500, 43).unwrap();
        assert_ne!(a.votes, c.votes);
    }

    #[test]
    fn empirical_accuracy_matches_analytic() {
        let spec = spec_from_accuracy(&[0.8, 0.6, 0.7], &[0.0, 0.0, 0.0], 0.0).unwrap();
        let d = sample_dataset(&spec, 10_000, 7).unwrap();
        for i in 0..3 {
            let mut signal = 0.0;
            let mut count = 0usize;
            for p in 0..10_000 {
                let v = d.votes.get(p, i);
                if v != 0 {
                    signal += (v * d.labels.get(p)) as f64;
                    count += 1;
                }
            }
            let emp = signal / count as f64;
            assert!(
                (emp - d.true_accuracies[i]).abs() <= 0.03,
                "source {i}: emp {emp} vs {}",
                d.true_accuracies[i]
            );
        }
    }

    #[test]
    fn empirical_agreement_within_three_standard_errors() {
        let spec = spec_from_accuracy(&[0.75, 0.55, 0.65], &[0.2, 0.1, 0.3], 0.1).unwrap();
        let t = conditional_tables(&spec).unwrap();
        let d = sample_dataset(&spec, 10_000, 11).unwrap();
        for i in 0..3 {
            for k in (i + 1)..3 {
                let mut sum = 0.0;
                let mut overlap = 0usize;
                for p in 0..10_000 {
                    let (vi, vk) = (d.votes.get(p, i), d.votes.get(p, k));
                    if vi != 0 && vk != 0 {
                        sum += (vi * vk) as f64;
                        overlap += 1;
                    }
                }
                let emp = sum / overlap as f64;
                let want = t.pair_agreement(i, k);
                let se = ((1.0 - want * want) / overlap as f64).sqrt();
                assert!(
                    (emp - want).abs() <= 3.0 * se,
                    "pair ({i},{k}): emp {emp} want {want} se {se}"
                );
            }
        }
    }

    #[test]
    fn identical_populations_are_statistically_indistinguishable() {
        let spec = spec_from_accuracy(&[0.8, 0.6, 0.7], &[0.1, 0.1, 0.1], 0.0).unwrap();
        let bundle = two_population_dataset(&spec, &spec, 10_000, 3).unwrap();
        // Compare pairwise agreement moments between the two halves.
        for i in 0..3 {
            for k in (i + 1)..3 {
                let mut stats = [[0.0f64, 0.0f64]; 2];
                for p in 0..20_000 {
                    let half = bundle.membership[p] as usize;
                    let (vi, vk) = (bundle.votes.get(p, i), bundle.votes.get(p, k));
                    if vi != 0 && vk != 0 {
                        stats[half][0] += (vi * vk) as f64;
                        stats[half][1] += 1.0;
                    }
                }
                let a = stats[0][0] / stats[0][1];
                let b = stats[1][0] / stats[1][1];
                assert!((a - b).abs() <= 0.05, "pair ({i},{k}): {a} vs {b}");
            }
        }
    }

    #[test]
    fn two_population_shape_and_flags() {
        let spec = spec_from_accuracy(&[0.8, 0.6, 0.7], &[0.0, 0.0, 0.0], 0.0).unwrap();
        let bundle = two_population_dataset(&spec, &spec, 1000, 1).unwrap();
        assert_eq!(bundle.labels.n(), 2000);
        assert_eq!(bundle.membership.iter().filter(|&&f| f == 0).count(), 1000);
        assert_eq!(bundle.membership.iter().filter(|&&f| f == 1).count(), 1000);
        let other = spec_from_accuracy(&[0.8, 0.6], &[0.0, 0.0], 0.0).unwrap();
        assert!(two_population_dataset(&spec, &other, 10, 1).is_err());
    }

    #[test]
    fn single_tile_board_is_all_positive() {
        let spec = CheckerboardTaskSpec {
            n: 200,
            pattern: LabelPattern::Checkerboard { g: 1 },
            seed: 0,
            sources: vec![CheckerboardSource {
                support: SupportRegion::Full,
                accuracy: 0.9,
                extendable: false,
            }],
        };
        let task = checkerboard_task(&spec).unwrap();
        assert!(task.labels.data().iter().all(|&y| y == 1));
    }

    #[test]
    fn tile_parity_fixture() {
        assert_eq!(
            pattern_label(LabelPattern::Checkerboard { g: 10 }, 0.05, 0.05, 0.0),
            1
        );
        assert_eq!(
            pattern_label(LabelPattern::Checkerboard { g: 10 }, 0.15, 0.05, 0.0),
            -1
        );
        assert_eq!(
            pattern_label(LabelPattern::Checkerboard { g: 10 }, 0.15, 0.15, 0.0),
            1
        );
    }

    #[test]
    fn perfect_source_votes_equal_labels() {
        let spec = CheckerboardTaskSpec {
            n: 500,
            pattern: LabelPattern::Checkerboard { g: 10 },
            seed: 9,
            sources: vec![CheckerboardSource {
                support: SupportRegion::Full,
                accuracy: 1.0,
                extendable: false,
            }],
        };
        let task = checkerboard_task(&spec).unwrap();
        for p in 0..500 {
            assert_eq!(task.votes.get(p, 0), task.labels.get(p));
        }
    }

    #[test]
    fn labels_reproducible_from_stored_coordinates() {
        let spec = CheckerboardTaskSpec {
            n: 300,
            pattern: LabelPattern::Checkerboard { g: 7 },
            seed: 4,
            sources: vec![CheckerboardSource {
                support: SupportRegion::Rect {
                    x_min: 0.0,
                    y_min: 0.0,
                    x_max: 1.0,
                    y_max: 0.5,
                },
                accuracy: 0.8,
                extendable: true,
            }],
        };
        let task = checkerboard_task(&spec).unwrap();
        for p in 0..300 {
            let row = task.embeddings.row(p);
            let again =
                pattern_label(spec.pattern, row[0] as f64, row[1] as f64, 0.0);
            assert_eq!(task.labels.get(p), again);
        }
    }

    #[test]
    fn accuracy_variants_share_everything_but_the_varied_source() {
        let base = CheckerboardTaskSpec {
            n: 400,
            pattern: LabelPattern::Checkerboard { g: 10 },
            seed: 21,
            sources: vec![
                CheckerboardSource {
                    support: SupportRegion::Rect {
                        x_min: 0.0,
                        y_min: 0.0,
                        x_max: 1.0,
                        y_max: 0.45,
                    },
                    accuracy: 0.89,
                    extendable: true,
                },
                CheckerboardSource {
                    support: SupportRegion::Full,
                    accuracy: 0.6,
                    extendable: false,
                },
            ],
        };
        let mut variant = base.clone();
        variant.sources[0].accuracy = 0.53;
        let a = checkerboard_task(&base).unwrap();
        let b = checkerboard_task(&variant).unwrap();
        assert_eq!(a.embeddings, b.embeddings);
        assert_eq!(a.labels, b.labels);
        for p in 0..400 {
            assert_eq!(a.votes.get(p, 1), b.votes.get(p, 1));
            // Support is shared even where vote values differ.
            assert_eq!(a.votes.get(p, 0) == 0, b.votes.get(p, 0) == 0);
        }
    }
}
