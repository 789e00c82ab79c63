//! Vote extension: propagate source votes to nearby abstained points.
//!
//! For each source, an abstained point inherits the vote of its nearest
//! covered neighbor when that neighbor lies within the source's radius.
//! Neighbor search is exact brute force over the training support; the
//! support is always the *original* votes, never previously extended ones,
//! so extensions do not chain.

use rayon::prelude::*;
use serde::Serialize;

use crate::data::{EmbeddingDataset, VoteMatrix};
use crate::error::{LigerError, Result};

/// Where an extended vote came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Provenance {
    /// The source voted here itself.
    Original,
    /// Copied from the nearest covered neighbor within the radius.
    Extended,
    /// Still no vote.
    Abstain,
}

impl Provenance {
    pub fn letter(&self) -> char {
        match self {
            Provenance::Original => 'O',
            Provenance::Extended => 'E',
            Provenance::Abstain => 'A',
        }
    }

    pub fn from_letter(c: char) -> Result<Provenance> {
        match c {
            'O' => Ok(Provenance::Original),
            'E' => Ok(Provenance::Extended),
            'A' => Ok(Provenance::Abstain),
            other => Err(LigerError::validation(
                "provenance",
                format!("unknown provenance letter `{other}`"),
            )),
        }
    }
}

/// Votes after extension, with per-entry provenance and the radii used.
#[derive(Debug, Clone, PartialEq)]
pub struct ExtendedVoteMatrix {
    n: usize,
    m: usize,
    votes: Vec<i8>,
    provenance: Vec<Provenance>,
    radii: Vec<f64>,
}

impl ExtendedVoteMatrix {
    /// Wraps raw votes as an extension with all radii zero.
    pub fn from_raw(votes: &VoteMatrix) -> ExtendedVoteMatrix {
        let provenance = votes
            .data()
            .iter()
            .map(|&v| {
                if v == 0 {
                    Provenance::Abstain
                } else {
                    Provenance::Original
                }
            })
            .collect();
        ExtendedVoteMatrix {
            n: votes.n(),
            m: votes.m(),
            votes: votes.data().to_vec(),
            provenance,
            radii: vec![0.0; votes.m()],
        }
    }

    pub fn from_columns(
        columns: Vec<(Vec<i8>, Vec<Provenance>)>,
        radii: Vec<f64>,
    ) -> Result<ExtendedVoteMatrix> {
        let m = columns.len();
        if m == 0 {
            return Err(LigerError::Argument("need at least one source".into()));
        }
        let n = columns[0].0.len();
        let mut votes = vec![0i8; n * m];
        let mut provenance = vec![Provenance::Abstain; n * m];
        for (i, (col, prov)) in columns.into_iter().enumerate() {
            if col.len() != n || prov.len() != n {
                return Err(LigerError::shape("extended column length", n, col.len()));
            }
            for p in 0..n {
                votes[p * m + i] = col[p];
                provenance[p * m + i] = prov[p];
            }
        }
        Ok(ExtendedVoteMatrix {
            n,
            m,
            votes,
            provenance,
            radii,
        })
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

    pub fn provenance(&self, point: usize, source: usize) -> Provenance {
        self.provenance[point * self.m + source]
    }

    pub fn radii(&self) -> &[f64] {
        &self.radii
    }

    pub fn data(&self) -> &[i8] {
        &self.votes
    }

    /// Reinterprets the extended votes as a plain vote matrix.
    pub fn to_vote_matrix(&self) -> VoteMatrix {
        VoteMatrix::new(self.votes.clone(), self.m).expect("extended votes stay in domain")
    }

    pub fn coverage(&self, source: usize) -> f64 {
        let covered = (0..self.n)
            .filter(|&p| self.get(p, source) != 0)
            .count();
        covered as f64 / self.n as f64
    }
}

/// Exact nearest covered neighbor of `point` for `source`, excluding the
/// point itself; ties break toward the lowest index. `None` when the source
/// abstains everywhere else.
pub fn nearest_covered_neighbor(
    emb: &EmbeddingDataset,
    votes: &VoteMatrix,
    source: usize,
    point: usize,
) -> Option<(usize, f64)> {
    let mut best: Option<(usize, f64)> = None;
    for cand in 0..emb.n() {
        if cand == point || votes.get(cand, source) == 0 {
            continue;
        }
        let d = emb.row_distance(point, cand);
        match best {
            Some((_, bd)) if d >= bd => {}
            _ => best = Some((cand, d)),
        }
    }
    best
}

fn nearest_in_support(
    train_emb: &EmbeddingDataset,
    train_votes: &VoteMatrix,
    source: usize,
    query: &[f32],
) -> Option<(usize, f64)> {
    let mut best: Option<(usize, f64)> = None;
    for cand in 0..train_emb.n() {
        if train_votes.get(cand, source) == 0 {
            continue;
        }
        let d = train_emb.distance_to(cand, query);
        match best {
            Some((_, bd)) if d >= bd => {}
            _ => best = Some((cand, d)),
        }
    }
    best
}

/// Precomputed nearest covered neighbors of abstained points, per source.
/// Lets radius sweeps re-threshold without repeating the O(n^2) search.
#[derive(Debug, Clone)]
pub struct ExtensionIndex {
    /// `[source][point] -> (neighbor, distance)` over the training support;
    /// `None` for covered points, whose own vote always wins.
    neighbors: Vec<Vec<Option<(usize, f64)>>>,
}

impl ExtensionIndex {
    pub fn build(emb: &EmbeddingDataset, votes: &VoteMatrix) -> Result<ExtensionIndex> {
        if votes.n() != emb.n() {
            return Err(LigerError::shape("votes row count", emb.n(), votes.n()));
        }
        let neighbors = (0..votes.m())
            .map(|source| {
                (0..emb.n())
                    .into_par_iter()
                    .map(|p| {
                        if votes.get(p, source) != 0 {
                            None
                        } else {
                            nearest_covered_neighbor(emb, votes, source, p)
                        }
                    })
                    .collect()
            })
            .collect();
        Ok(ExtensionIndex { neighbors })
    }

    /// Applies the three-case extension rule at the given radii.
    pub fn extend(&self, votes: &VoteMatrix, radii: &[f64]) -> Result<ExtendedVoteMatrix> {
        if radii.len() != votes.m() {
            return Err(LigerError::shape("radii length", votes.m(), radii.len()));
        }
        let columns = (0..votes.m())
            .map(|source| {
                let mut col = Vec::with_capacity(votes.n());
                let mut prov = Vec::with_capacity(votes.n());
                for p in 0..votes.n() {
                    let own = votes.get(p, source);
                    if own != 0 {
                        col.push(own);
                        prov.push(Provenance::Original);
                    } else {
                        match self.neighbors[source][p] {
                            Some((nn, dist)) if dist <= radii[source] => {
                                col.push(votes.get(nn, source));
                                prov.push(Provenance::Extended);
                            }
                            _ => {
                                col.push(0);
                                prov.push(Provenance::Abstain);
                            }
                        }
                    }
                }
                (col, prov)
            })
            .collect();
        ExtendedVoteMatrix::from_columns(columns, radii.to_vec())
    }
}

/// Extends a single source's column at radius `r`.
pub fn extend_source(
    emb: &EmbeddingDataset,
    votes: &VoteMatrix,
    source: usize,
    r: f64,
) -> Result<(Vec<i8>, Vec<Provenance>)> {
    if r < 0.0 || r.is_nan() {
        return Err(LigerError::Argument("radius must be non-negative".into()));
    }
    let entries: Vec<(i8, Provenance)> = (0..emb.n())
        .into_par_iter()
        .map(|p| {
            let own = votes.get(p, source);
            if own != 0 {
                return (own, Provenance::Original);
            }
            match nearest_covered_neighbor(emb, votes, source, p) {
                Some((nn, dist)) if dist <= r => (votes.get(nn, source), Provenance::Extended),
                _ => (0, Provenance::Abstain),
            }
        })
        .collect();
    Ok(entries.into_iter().unzip())
}

/// Column-wise extension of every source at its own radius.
pub fn extend_all(
    emb: &EmbeddingDataset,
    votes: &VoteMatrix,
    radii: &[f64],
) -> Result<ExtendedVoteMatrix> {
    if radii.len() != votes.m() {
        return Err(LigerError::shape("radii length", votes.m(), radii.len()));
    }
    if votes.n() != emb.n() {
        return Err(LigerError::shape("votes row count", emb.n(), votes.n()));
    }
    let columns = (0..votes.m())
        .map(|source| extend_source(emb, votes, source, radii[source]))
        .collect::<Result<Vec<_>>>()?;
    ExtendedVoteMatrix::from_columns(columns, radii.to_vec())
}

/// Extends votes on a *different* dataset against the training support:
/// a test point inherits the vote of the nearest covered training point
/// within the radius whenever its own vote abstains.
pub fn extend_external(
    train_emb: &EmbeddingDataset,
    train_votes: &VoteMatrix,
    test_emb: &EmbeddingDataset,
    test_votes: &VoteMatrix,
    radii: &[f64],
) -> Result<ExtendedVoteMatrix> {
    if train_votes.n() != train_emb.n() {
        return Err(LigerError::shape(
            "train votes row count",
            train_emb.n(),
            train_votes.n(),
        ));
    }
    if test_votes.n() != test_emb.n() {
        return Err(LigerError::shape(
            "test votes row count",
            test_emb.n(),
            test_votes.n(),
        ));
    }
    if test_votes.m() != train_votes.m() {
        return Err(LigerError::shape(
            "test votes source count",
            train_votes.m(),
            test_votes.m(),
        ));
    }
    if test_emb.d() != train_emb.d() {
        return Err(LigerError::shape("test embedding dimension", train_emb.d(), test_emb.d()));
    }
    if radii.len() != train_votes.m() {
        return Err(LigerError::shape("radii length", train_votes.m(), radii.len()));
    }
    let columns = (0..train_votes.m())
        .map(|source| {
            let entries: Vec<(i8, Provenance)> = (0..test_emb.n())
                .into_par_iter()
                .map(|p| {
                    let own = test_votes.get(p, source);
                    if own != 0 {
                        return (own, Provenance::Original);
                    }
                    match nearest_in_support(train_emb, train_votes, source, test_emb.row(p)) {
                        Some((nn, dist)) if dist <= radii[source] => {
                            (train_votes.get(nn, source), Provenance::Extended)
                        }
                        _ => (0, Provenance::Abstain),
                    }
                })
                .collect();
            entries.into_iter().unzip()
        })
        .collect();
    ExtendedVoteMatrix::from_columns(columns, radii.to_vec())
}

/// Coverage before/after extension, overall and per source.
#[derive(Debug, Clone, Serialize)]
pub struct CoverageDelta {
    /// Fraction of points with at least one non-abstain vote, before.
    pub overall_before: f64,
    pub overall_after: f64,
    pub overall_delta: f64,
    pub per_source_before: Vec<f64>,
    pub per_source_after: Vec<f64>,
    pub per_source_delta: Vec<f64>,
}

pub fn coverage_delta(before: &VoteMatrix, after: &ExtendedVoteMatrix) -> Result<CoverageDelta> {
    if before.n() != after.n() || before.m() != after.m() {
        return Err(LigerError::shape("vote matrix shape", before.n() * before.m(), after.n() * after.m()));
    }
    let n = before.n() as f64;
    let overall_before = (0..before.n())
        .filter(|&p| before.row(p).iter().any(|&v| v != 0))
        .count() as f64
        / n;
    let overall_after = (0..after.n())
        .filter(|&p| after.row(p).iter().any(|&v| v != 0))
        .count() as f64
        / n;
    let per_source_before: Vec<f64> = (0..before.m()).map(|s| before.coverage(s)).collect();
    let per_source_after: Vec<f64> = (0..after.m()).map(|s| after.coverage(s)).collect();
    let per_source_delta = per_source_before
        .iter()
        .zip(per_source_after.iter())
        .map(|(b, a)| a - b)
        .collect();
    Ok(CoverageDelta {
        overall_before,
        overall_after,
        overall_delta: overall_after - overall_before,
        per_source_before,
        per_source_after,
        per_source_delta,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::Metric;

    fn emb_1d(xs: &[f32]) -> EmbeddingDataset {
        EmbeddingDataset::new(xs.to_vec(), 1, Metric::Euclidean).unwrap()
    }

    #[test]
    fn nearest_neighbor_hand_fixture() {
        let emb = emb_1d(&[0.0, 0.5, 2.0]);
        let votes = VoteMatrix::new(vec![1, 0, 0], 1).unwrap();
        let (nn, d) = nearest_covered_neighbor(&emb, &votes, 0, 1).unwrap();
        assert_eq!(nn, 0);
        assert!((d - 0.5).abs() < 1e-12);
    }

    #[test]
    fn empty_support_has_no_neighbor() {
        let emb = emb_1d(&[0.0, 1.0]);
        let votes = VoteMatrix::new(vec![0, 0], 1).unwrap();
        assert!(nearest_covered_neighbor(&emb, &votes, 0, 0).is_none());
    }

    #[test]
    fn equidistant_neighbors_take_lowest_index() {
        let emb = emb_1d(&[0.0, 2.0, 1.0]);
        let votes = VoteMatrix::new(vec![1, 1, 0], 1).unwrap();
        let (nn, _) = nearest_covered_neighbor(&emb, &votes, 0, 2).unwrap();
        assert_eq!(nn, 0);
    }

    #[test]
    fn radius_zero_is_identity() {
        let emb = emb_1d(&[0.0, 0.5, 2.0]);
        let votes = VoteMatrix::new(vec![1, 0, 0], 1).unwrap();
        let (col, _) = extend_source(&emb, &votes, 0, 0.0).unwrap();
        assert_eq!(col, vec![1, 0, 0]);
    }

    #[test]
    fn one_dimensional_extension_fixture() {
        let emb = emb_1d(&[0.0, 0.5, 2.0]);
        let votes = VoteMatrix::new(vec![1, 0, 0], 1).unwrap();
        let (col, prov) = extend_source(&emb, &votes, 0, 1.0).unwrap();
        assert_eq!(col, vec![1, 1, 0]);
        assert_eq!(
            prov,
            vec![Provenance::Original, Provenance::Extended, Provenance::Abstain]
        );
    }

    #[test]
    fn covered_point_keeps_its_own_vote() {
        // Point 1 votes -1; its nearest covered neighbor votes +1.
        let emb = emb_1d(&[0.0, 0.1]);
        let votes = VoteMatrix::new(vec![1, -1], 1).unwrap();
        let (col, _) = extend_source(&emb, &votes, 0, 10.0).unwrap();
        assert_eq!(col, vec![1, -1]);
    }

    #[test]
    fn extend_all_is_column_independent() {
        let emb = emb_1d(&[0.0, 0.5, 2.0]);
        let votes = VoteMatrix::new(vec![1, -1, 0, 0, 0, 1], 2).unwrap();
        let ext = extend_all(&emb, &votes, &[1.0, 0.0]).unwrap();
        let (col0, _) = extend_source(&emb, &votes, 0, 1.0).unwrap();
        let (col1, _) = extend_source(&emb, &votes, 1, 0.0).unwrap();
        for p in 0..3 {
            assert_eq!(ext.get(p, 0), col0[p]);
            assert_eq!(ext.get(p, 1), col1[p]);
        }
    }

    #[test]
    fn monotone_in_radius() {
        let emb = emb_1d(&[0.0, 0.4, 1.1, 3.0, 7.0]);
        let votes = VoteMatrix::new(vec![1, 0, 0, -1, 0], 1).unwrap();
        let mut covered_prev = 0;
        for r in [0.0, 0.5, 1.0, 2.0, f64::INFINITY] {
            let (col, _) = extend_source(&emb, &votes, 0, r).unwrap();
            let covered = col.iter().filter(|&&v| v != 0).count();
            assert!(covered >= covered_prev);
            covered_prev = covered;
            // Agreement on support regardless of r.
            assert_eq!(col[0], 1);
            assert_eq!(col[3], -1);
        }
    }

    #[test]
    fn saturation_is_idempotent() {
        let emb = emb_1d(&[0.0, 0.4, 1.1, 3.0, 7.0]);
        let votes = VoteMatrix::new(vec![1, 0, 0, -1, 0, 0, 0, 0, 0, 0], 2).unwrap();
        let radii = [f64::INFINITY, f64::INFINITY];
        let once = extend_all(&emb, &votes, &radii).unwrap();
        let again = extend_all(&emb, &once.to_vote_matrix(), &radii).unwrap();
        assert_eq!(once.data(), again.data());
    }

    #[test]
    fn index_matches_direct_extension() {
        let emb = emb_1d(&[0.0, 0.4, 1.1, 3.0, 7.0]);
        let votes = VoteMatrix::new(vec![1, 0, 0, -1, 0], 1).unwrap();
        let index = ExtensionIndex::build(&emb, &votes).unwrap();
        for r in [0.0, 0.3, 0.8, 2.5] {
            let via_index = index.extend(&votes, &[r]).unwrap();
            let direct = extend_all(&emb, &votes, &[r]).unwrap();
            assert_eq!(via_index.data(), direct.data());
        }
    }

    #[test]
    fn external_extension_uses_training_support() {
        let train = emb_1d(&[0.0, 1.0]);
        let train_votes = VoteMatrix::new(vec![1, -1], 1).unwrap();
        let test = emb_1d(&[0.2, 0.9, 5.0]);
        let test_votes = VoteMatrix::new(vec![0, 0, 0], 1).unwrap();
        let ext = extend_external(&train, &train_votes, &test, &test_votes, &[0.5]).unwrap();
        assert_eq!(ext.get(0, 0), 1); // nearest train point 0.0 votes +1
        assert_eq!(ext.get(1, 0), -1); // nearest train point 1.0 votes -1
        assert_eq!(ext.get(2, 0), 0); // too far
    }

    #[test]
    fn coverage_delta_counts() {
        let before = VoteMatrix::new(vec![1, 0, 0, 0], 1).unwrap();
        let emb = emb_1d(&[0.0, 1.0, 2.0, 9.0]);
        let after = extend_all(&emb, &before, &[2.5]).unwrap();
        let delta = coverage_delta(&before, &after).unwrap();
        assert_eq!(delta.overall_before, 0.25);
        assert_eq!(delta.overall_after, 0.75);
        assert!((delta.overall_delta - 0.5).abs() < 1e-12);
    }

    #[test]
    fn no_extension_means_zero_delta() {
        let before = VoteMatrix::new(vec![1, 0, -1, 0], 2).unwrap();
        let after = ExtendedVoteMatrix::from_raw(&before);
        let delta = coverage_delta(&before, &after).unwrap();
        assert_eq!(delta.overall_delta, 0.0);
        assert!(delta.per_source_delta.iter().all(|&d| d == 0.0));
    }
}
