//! Label model: per-part source accuracies from pairwise agreement moments,
//! and posterior pseudolabel inference.
//!
//! Accuracy recovery uses the closed-form triplet identity: for three
//! conditionally independent sources, the product of two agreement moments
//! over the third gives the squared accuracy of the shared source. Estimates
//! are averaged over all usable pairs, the sign is taken positive, and the
//! probability-scale value `(1 + a) / 2` is clamped into
//! `[clamp, 1 - clamp]` so no likelihood factor can reach zero.
//!
//! Inference multiplies per-source likelihood factors for the non-abstaining
//! sources only (abstains carry no signal about the label and cancel), with
//! the normalizer realized as the model-implied mixture over both labels,
//! which keeps every posterior a proper probability.

use serde::{Deserialize, Serialize};

use crate::data::{ClassBalanceMode, EmbeddingDataset, EngineConfig, LabelVector, VoteMatrix};
use crate::error::{LigerError, Result};
use crate::extend::{extend_external, ExtendedVoteMatrix};
use crate::partition::{kmeans_fit_with, Partition};

/// Pairwise agreement moments per part: the mean of `v_i * v_k` over points
/// where both sources vote, with the overlap count that backs each mean.
#[derive(Debug, Clone)]
pub struct MomentTable {
    s: usize,
    m: usize,
    /// `[part][i][k]`, `None` when the pair never overlaps in the part.
    agreements: Vec<Option<f64>>,
    overlaps: Vec<usize>,
}

impl MomentTable {
    fn idx(&self, part: usize, i: usize, k: usize) -> usize {
        (part * self.m + i) * self.m + k
    }

    pub fn s(&self) -> usize {
        self.s
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn agreement(&self, part: usize, i: usize, k: usize) -> Option<f64> {
        self.agreements[self.idx(part, i, k)]
    }

    pub fn overlap(&self, part: usize, i: usize, k: usize) -> usize {
        self.overlaps[self.idx(part, i, k)]
    }

    /// Builds a single-part table from exact agreement values; used when the
    /// moments are known analytically rather than estimated from votes.
    pub fn from_exact(m: usize, agreement: impl Fn(usize, usize) -> f64) -> MomentTable {
        let mut table = MomentTable {
            s: 1,
            m,
            agreements: vec![None; m * m],
            overlaps: vec![0; m * m],
        };
        for i in 0..m {
            for k in 0..m {
                if i != k {
                    let idx = table.idx(0, i, k);
                    table.agreements[idx] = Some(agreement(i, k));
                    table.overlaps[idx] = usize::MAX;
                }
            }
        }
        table
    }

    /// Smallest absolute agreement across parts and pairs, where present.
    /// Reported as the `b_min` diagnostic.
    pub fn min_abs_agreement(&self) -> Option<f64> {
        self.agreements
            .iter()
            .flatten()
            .map(|a| a.abs())
            .min_by(|a, b| a.partial_cmp(b).unwrap())
    }
}

/// Agreement moments of `votes` within each part of `partition`.
pub fn pairwise_agreements(votes: &ExtendedVoteMatrix, partition: &Partition) -> Result<MomentTable> {
    if partition.n() != votes.n() {
        return Err(LigerError::shape("partition size", votes.n(), partition.n()));
    }
    Ok(agreements_for_assignment(votes, partition.s(), partition.assignment()))
}

fn agreements_for_assignment(votes: &ExtendedVoteMatrix, s: usize, assignment: &[usize]) -> MomentTable {
    let m = votes.m();
    let mut table = MomentTable {
        s,
        m,
        agreements: vec![None; s * m * m],
        overlaps: vec![0; s * m * m],
    };
    for i in 0..m {
        for k in (i + 1)..m {
            let mut sums = vec![0.0f64; s];
            let mut counts = vec![0usize; s];
            for (p, &part) in assignment.iter().enumerate() {
                let vi = votes.get(p, i);
                let vk = votes.get(p, k);
                if vi != 0 && vk != 0 {
                    sums[part] += (vi * vk) as f64;
                    counts[part] += 1;
                }
            }
            for part in 0..s {
                if counts[part] > 0 {
                    let mean = sums[part] / counts[part] as f64;
                    let a = table.idx(part, i, k);
                    let b = table.idx(part, k, i);
                    table.agreements[a] = Some(mean);
                    table.agreements[b] = Some(mean);
                    table.overlaps[a] = counts[part];
                    table.overlaps[b] = counts[part];
                }
            }
        }
    }
    table
}

/// Clamps an accuracy through the probability scale:
/// `(1 + a) / 2` is forced into `[clamp, 1 - clamp]`.
pub fn clamp_accuracy(a: f64, clamp: f64) -> f64 {
    let p = (0.5 * (1.0 + a)).clamp(clamp, 1.0 - clamp);
    2.0 * p - 1.0
}

/// Triplet-identity accuracy of `source` in `part`: the mean of
/// `sqrt(|M_ik * M_il / M_kl|)` over all pairs `(k, l)` of other sources
/// whose three moments are present and whose denominator satisfies
/// `|M_kl| >= clamp`, then clamped. `None` when no pair is usable.
pub fn triplet_accuracy(
    moments: &MomentTable,
    part: usize,
    source: usize,
    clamp: f64,
) -> Option<f64> {
    let m = moments.m();
    let mut sum = 0.0f64;
    let mut used = 0usize;
    for k in 0..m {
        if k == source {
            continue;
        }
        for l in (k + 1)..m {
            if l == source {
                continue;
            }
            let (mik, mil, mkl) = match (
                moments.agreement(part, source, k),
                moments.agreement(part, source, l),
                moments.agreement(part, k, l),
            ) {
                (Some(a), Some(b), Some(c)) => (a, b, c),
                _ => continue,
            };
            if mkl.abs() < clamp {
                continue;
            }
            sum += (mik * mil / mkl).abs().sqrt();
            used += 1;
        }
    }
    if used == 0 {
        None
    } else {
        Some(clamp_accuracy(sum / used as f64, clamp))
    }
}

/// Fitted per-part parameters plus everything needed to score new points.
#[derive(Debug, Clone)]
pub struct LabelModel {
    s: usize,
    m: usize,
    /// `s x m`, row-major; strictly inside (-1, 1) after clamping.
    accuracies: Vec<f64>,
    /// `s x m`, row-major; empirical `Pr(vote != 0 | part)`.
    coverages: Vec<f64>,
    /// Per-part `Pr(y = +1 | part)`, strictly inside (0, 1).
    class_balances: Vec<f64>,
    partition: Partition,
    radii: Vec<f64>,
    clamp: f64,
    seed: u64,
}

/// On-disk form of a [`LabelModel`].
#[derive(Debug, Serialize, Deserialize)]
pub struct LabelModelDoc {
    pub partition: crate::partition::PartitionDoc,
    /// `s` rows of `m` accuracies.
    pub accuracies: Vec<Vec<f64>>,
    pub coverages: Vec<Vec<f64>>,
    pub class_balances: Vec<f64>,
    pub radii: Vec<f64>,
    pub clamp: f64,
    pub seed: u64,
}

impl LabelModel {
    pub fn s(&self) -> usize {
        self.s
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn accuracy(&self, part: usize, source: usize) -> f64 {
        self.accuracies[part * self.m + source]
    }

    pub fn coverage(&self, part: usize, source: usize) -> f64 {
        self.coverages[part * self.m + source]
    }

    pub fn class_balance(&self, part: usize) -> f64 {
        self.class_balances[part]
    }

    pub fn partition(&self) -> &Partition {
        &self.partition
    }

    pub fn radii(&self) -> &[f64] {
        &self.radii
    }

    pub fn clamp(&self) -> f64 {
        self.clamp
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Mean fitted accuracy over all parts and sources.
    pub fn mean_accuracy(&self) -> f64 {
        self.accuracies.iter().sum::<f64>() / self.accuracies.len() as f64
    }

    /// Minimum average source coverage over parts, the `p_min` diagnostic.
    pub fn min_mean_coverage(&self) -> f64 {
        let n: usize = self.partition.part_sizes().iter().sum();
        (0..self.m)
            .map(|i| {
                (0..self.s)
                    .map(|j| {
                        self.coverage(j, i) * self.partition.part_sizes()[j] as f64 / n as f64
                    })
                    .sum::<f64>()
            })
            .fold(f64::INFINITY, f64::min)
    }

    /// Maximum fitted accuracy, the `a_max` diagnostic.
    pub fn max_accuracy(&self) -> f64 {
        self.accuracies.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn to_doc(&self) -> LabelModelDoc {
        LabelModelDoc {
            partition: self.partition.to_doc(),
            accuracies: (0..self.s)
                .map(|j| self.accuracies[j * self.m..(j + 1) * self.m].to_vec())
                .collect(),
            coverages: (0..self.s)
                .map(|j| self.coverages[j * self.m..(j + 1) * self.m].to_vec())
                .collect(),
            class_balances: self.class_balances.clone(),
            radii: self.radii.clone(),
            clamp: self.clamp,
            seed: self.seed,
        }
    }

    pub fn from_doc(doc: LabelModelDoc) -> Result<LabelModel> {
        let partition = Partition::from_doc(doc.partition)?;
        let s = partition.s();
        let m = doc.radii.len();
        if doc.accuracies.len() != s || doc.coverages.len() != s || doc.class_balances.len() != s {
            return Err(LigerError::shape("model parameter rows", s, doc.accuracies.len()));
        }
        let mut accuracies = Vec::with_capacity(s * m);
        let mut coverages = Vec::with_capacity(s * m);
        for j in 0..s {
            if doc.accuracies[j].len() != m || doc.coverages[j].len() != m {
                return Err(LigerError::shape("model parameter columns", m, doc.accuracies[j].len()));
            }
            accuracies.extend_from_slice(&doc.accuracies[j]);
            coverages.extend_from_slice(&doc.coverages[j]);
        }
        Ok(LabelModel {
            s,
            m,
            accuracies,
            coverages,
            class_balances: doc.class_balances,
            partition,
            radii: doc.radii,
            clamp: doc.clamp,
            seed: doc.seed,
        })
    }

    /// Posterior `Pr(y = +1 | votes, part)` for an already-extended row.
    ///
    /// Abstaining sources contribute no factor; their likelihoods are equal
    /// under both labels and cancel in the normalizer. Accumulation is in
    /// log space so wide vote matrices cannot underflow.
    pub fn posterior_in_part(&self, part: usize, votes_row: &[i8]) -> f64 {
        self.posterior_pair(part, votes_row).0
    }

    /// Both posteriors `(Pr(y = +1 | ...), Pr(y = -1 | ...))`; they sum to 1
    /// up to floating rounding.
    pub fn posterior_pair(&self, part: usize, votes_row: &[i8]) -> (f64, f64) {
        let balance = self.class_balances[part];
        if votes_row.iter().all(|&v| v == 0) {
            return (balance, 1.0 - balance);
        }
        let mut log_pos = balance.ln();
        let mut log_neg = (1.0 - balance).ln();
        for (i, &v) in votes_row.iter().enumerate() {
            if v == 0 {
                continue;
            }
            let a = self.accuracy(part, i);
            let v = v as f64;
            log_pos += (0.5 * (1.0 + v * a)).ln();
            log_neg += (0.5 * (1.0 - v * a)).ln();
        }
        (
            1.0 / (1.0 + (log_neg - log_pos).exp()),
            1.0 / (1.0 + (log_pos - log_neg).exp()),
        )
    }

    /// Posterior for an arbitrary point: assigns the part, then scores the
    /// row. The row must already be extended consistently with the training
    /// radii (see [`LabelModel::predict`] for the end-to-end path).
    pub fn posterior(&self, point: &[f32], votes_row: &[i8]) -> Result<f64> {
        if votes_row.len() != self.m {
            return Err(LigerError::shape("votes row length", self.m, votes_row.len()));
        }
        let part = self.partition.assign_point(point)?;
        Ok(self.posterior_in_part(part, votes_row))
    }

    /// Testing oracle: materializes the joint over both labels with *all*
    /// factors, including the abstain probabilities on both branches, and
    /// normalizes. No algebraic shortcuts.
    pub fn brute_force_posterior(&self, part: usize, votes_row: &[i8]) -> Result<f64> {
        if self.m > 10 {
            return Err(LigerError::Argument(format!(
                "brute-force posterior supports m <= 10, got {}",
                self.m
            )));
        }
        if votes_row.len() != self.m {
            return Err(LigerError::shape("votes row length", self.m, votes_row.len()));
        }
        let balance = self.class_balances[part];
        let mut joint = [0.0f64; 2];
        for (slot, y) in [(0usize, 1.0f64), (1usize, -1.0f64)] {
            let mut w = if y > 0.0 { balance } else { 1.0 - balance };
            for (i, &v) in votes_row.iter().enumerate() {
                let cov = self.coverage(part, i);
                let a = self.accuracy(part, i);
                w *= match v {
                    0 => 1.0 - cov,
                    v => 0.5 * (1.0 + (v as f64) * y * a) * cov,
                };
            }
            joint[slot] = w;
        }
        Ok(joint[0] / (joint[0] + joint[1]))
    }

    /// Per-point posteriors and hard labels for a test set. Test votes are
    /// raw; they are extended here against the training support with the
    /// model's radii before inference.
    pub fn predict(
        &self,
        train_emb: &EmbeddingDataset,
        train_votes: &VoteMatrix,
        test_emb: &EmbeddingDataset,
        test_votes: &VoteMatrix,
    ) -> Result<Predictions> {
        if test_emb.d() != self.partition.d() {
            return Err(LigerError::shape("test embedding dimension", self.partition.d(), test_emb.d()));
        }
        if test_votes.m() != self.m {
            return Err(LigerError::shape("test votes source count", self.m, test_votes.m()));
        }
        let extended = extend_external(train_emb, train_votes, test_emb, test_votes, &self.radii)?;
        let mut rows = Vec::with_capacity(test_emb.n());
        for p in 0..test_emb.n() {
            let part = self.partition.assign_point(test_emb.row(p))?;
            let row = extended.row(p);
            let posterior = self.posterior_in_part(part, row);
            let label = if posterior >= 0.5 { 1 } else { -1 };
            let abstains = row.iter().filter(|&&v| v == 0).count();
            rows.push(PredictionRow {
                id: p,
                part,
                posterior,
                label,
                abstains,
            });
        }
        Ok(Predictions { rows })
    }

    /// Diagnostic variant of the posterior whose normalizer is the
    /// *empirical* joint vote-pattern frequency in the part rather than the
    /// model-implied mixture. Returns `None` when the exact pattern never
    /// occurs in the part; the result need not lie in [0, 1]. Comparison
    /// only — inference always uses the model-implied normalizer.
    pub fn posterior_empirical_normalizer(
        &self,
        votes: &ExtendedVoteMatrix,
        part: usize,
        votes_row: &[i8],
    ) -> Option<f64> {
        let members: Vec<usize> = self.partition.members(part).collect();
        let matches = members
            .iter()
            .filter(|&&p| votes.row(p) == votes_row)
            .count();
        if matches == 0 {
            return None;
        }
        let empirical = matches as f64 / members.len() as f64;
        let balance = self.class_balances[part];
        let mut numerator = balance;
        for (i, &v) in votes_row.iter().enumerate() {
            let cov = self.coverage(part, i);
            let a = self.accuracy(part, i);
            numerator *= match v {
                0 => 1.0 - cov,
                v => 0.5 * (1.0 + (v as f64) * a) * cov,
            };
        }
        Some(numerator / empirical)
    }
}

/// One scored point.
#[derive(Debug, Clone, PartialEq)]
pub struct PredictionRow {
    pub id: usize,
    pub part: usize,
    pub posterior: f64,
    /// `+1` when the posterior reaches 0.5, `-1` otherwise.
    pub label: i8,
    /// Abstain count of the extended row used for inference.
    pub abstains: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Predictions {
    pub rows: Vec<PredictionRow>,
}

impl Predictions {
    pub fn posteriors(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.posterior).collect()
    }

    pub fn labels(&self) -> Vec<i8> {
        self.rows.iter().map(|r| r.label).collect()
    }
}

/// Fits the partition with k-means, then estimates per-part parameters.
/// `dev` supplies labeled points for the dev-based class-balance modes.
pub fn fit(
    emb: &EmbeddingDataset,
    votes: &ExtendedVoteMatrix,
    config: &EngineConfig,
    dev: Option<(&EmbeddingDataset, &LabelVector)>,
) -> Result<LabelModel> {
    config.validate()?;
    if votes.n() != emb.n() {
        return Err(LigerError::shape("votes row count", emb.n(), votes.n()));
    }
    let run = kmeans_fit_with(emb, config.s, config.seed, config.kmeans_max_iters, config.kmeans_tol)?;
    fit_with_partition(run.partition, votes, config, dev)
}

/// Estimates per-part parameters over an existing partition.
pub fn fit_with_partition(
    partition: Partition,
    votes: &ExtendedVoteMatrix,
    config: &EngineConfig,
    dev: Option<(&EmbeddingDataset, &LabelVector)>,
) -> Result<LabelModel> {
    config.validate()?;
    let m = votes.m();
    let s = partition.s();
    if m < 3 {
        return Err(LigerError::Argument(
            "triplet estimation needs at least three sources".into(),
        ));
    }
    if partition.n() != votes.n() {
        return Err(LigerError::shape("partition size", votes.n(), partition.n()));
    }
    let clamp = config.accuracy_clamp;

    // Pooled estimates back up parts where the triplet identity is unusable.
    let pooled = agreements_for_assignment(votes, 1, &vec![0usize; votes.n()]);
    let pooled_acc: Vec<Option<f64>> = (0..m)
        .map(|i| triplet_accuracy(&pooled, 0, i, clamp))
        .collect();

    let per_part = agreements_for_assignment(votes, s, partition.assignment());
    let mut accuracies = vec![0.0f64; s * m];
    let mut coverages = vec![0.0f64; s * m];
    for j in 0..s {
        for i in 0..m {
            let a = triplet_accuracy(&per_part, j, i, clamp)
                .or(pooled_acc[i])
                .unwrap_or(0.0);
            accuracies[j * m + i] = a;
        }
        let members: Vec<usize> = partition.members(j).collect();
        for i in 0..m {
            let covered = members.iter().filter(|&&p| votes.get(p, i) != 0).count();
            coverages[j * m + i] = covered as f64 / members.len() as f64;
        }
    }

    let class_balances = class_balances(&partition, config, dev)?;

    Ok(LabelModel {
        s,
        m,
        accuracies,
        coverages,
        class_balances,
        partition,
        radii: votes.radii().to_vec(),
        clamp,
        seed: config.seed,
    })
}

fn class_balances(
    partition: &Partition,
    config: &EngineConfig,
    dev: Option<(&EmbeddingDataset, &LabelVector)>,
) -> Result<Vec<f64>> {
    let s = partition.s();
    match config.class_balance_mode {
        ClassBalanceMode::Uniform => Ok(vec![0.5; s]),
        ClassBalanceMode::Explicit => {
            let balances = config
                .explicit_balances
                .clone()
                .ok_or_else(|| LigerError::validation("explicit_balances", "missing"))?;
            if balances.len() != s {
                return Err(LigerError::shape("explicit_balances", s, balances.len()));
            }
            Ok(balances)
        }
        ClassBalanceMode::GlobalFromDev => {
            let (_, labels) = dev.ok_or_else(|| {
                LigerError::Argument("class_balance_mode global_from_dev needs dev labels".into())
            })?;
            // Laplace smoothing keeps the balance strictly inside (0, 1).
            let pos = labels.data().iter().filter(|&&v| v == 1).count();
            let balance = (pos + 1) as f64 / (labels.n() + 2) as f64;
            Ok(vec![balance; s])
        }
        ClassBalanceMode::PerPartFromDev => {
            let (dev_emb, labels) = dev.ok_or_else(|| {
                LigerError::Argument("class_balance_mode per_part_from_dev needs dev data".into())
            })?;
            if dev_emb.n() != labels.n() {
                return Err(LigerError::shape("dev labels row count", dev_emb.n(), labels.n()));
            }
            let mut pos = vec![0usize; s];
            let mut tot = vec![0usize; s];
            for p in 0..dev_emb.n() {
                let j = partition.assign_point(dev_emb.row(p))?;
                tot[j] += 1;
                if labels.get(p) == 1 {
                    pos[j] += 1;
                }
            }
            Ok((0..s)
                .map(|j| (pos[j] + 1) as f64 / (tot[j] + 2) as f64)
                .collect())
        }
    }
}
