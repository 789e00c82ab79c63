//! Metrics and dev-set hyperparameter search.
//!
//! The search runs in three stages: a grid over one shared radius with a
//! single part, per-coordinate refinement of individual radii in descending
//! extension-volume order (multipliers 0.5/0.75/1.0/1.25/1.5 around the
//! shared optimum, accepting only strict improvements), and finally a sweep
//! of the part count with radii frozen. Sources that already cover every
//! point keep radius zero throughout. Ties always resolve toward the
//! earliest candidate, hence toward smaller radii and smaller part counts.

use serde::Serialize;

use crate::data::{EmbeddingDataset, EngineConfig, LabelVector, VoteMatrix};
use crate::error::{LigerError, Result};
use crate::extend::extend_all;
use crate::model::fit;

/// Point metrics of a posterior vector against ground truth.
#[derive(Debug, Clone, Serialize)]
pub struct MetricsReport {
    pub accuracy: f64,
    /// Positive class is +1; defined as 0 when the denominator vanishes.
    pub f1: f64,
    /// Mean negative log-probability of the true label, natural log,
    /// probabilities clamped to at least 1e-12.
    pub cross_entropy: f64,
    pub n_evaluated: usize,
}

/// Hard label at threshold 0.5 with ties toward +1.
pub fn hard_label(posterior: f64) -> i8 {
    if posterior >= 0.5 {
        1
    } else {
        -1
    }
}

pub fn compute_metrics(posteriors: &[f64], labels: &LabelVector) -> Result<MetricsReport> {
    if posteriors.len() != labels.n() {
        return Err(LigerError::shape("posteriors length", labels.n(), posteriors.len()));
    }
    if posteriors.is_empty() {
        return Err(LigerError::Argument("no points to evaluate".into()));
    }
    let mut correct = 0usize;
    let (mut tp, mut fp, mut fneg) = (0usize, 0usize, 0usize);
    let mut ce = 0.0f64;
    for (p, y) in posteriors.iter().zip(labels.data().iter()) {
        let predicted = hard_label(*p);
        if predicted == *y {
            correct += 1;
        }
        match (predicted, *y) {
            (1, 1) => tp += 1,
            (1, -1) => fp += 1,
            (-1, 1) => fneg += 1,
            _ => {}
        }
        let p_true = if *y == 1 { *p } else { 1.0 - *p };
        ce -= p_true.max(1e-12).ln();
    }
    let n = posteriors.len();
    let f1_denom = 2 * tp + fp + fneg;
    Ok(MetricsReport {
        accuracy: correct as f64 / n as f64,
        f1: if f1_denom == 0 {
            0.0
        } else {
            2.0 * tp as f64 / f1_denom as f64
        },
        cross_entropy: ce / n as f64,
        n_evaluated: n,
    })
}

/// Which metric drives the dev-set search.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DevMetric {
    F1,
    Accuracy,
}

impl DevMetric {
    pub fn parse(s: &str) -> Result<DevMetric> {
        match s {
            "f1" => Ok(DevMetric::F1),
            "accuracy" => Ok(DevMetric::Accuracy),
            other => Err(LigerError::Argument(format!(
                "unknown dev metric `{other}` (expected f1 or accuracy)"
            ))),
        }
    }

    pub fn of(&self, report: &MetricsReport) -> f64 {
        match self {
            DevMetric::F1 => report.f1,
            DevMetric::Accuracy => report.accuracy,
        }
    }
}

/// One evaluated hyperparameter setting.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TuneCandidate {
    pub radii: Vec<f64>,
    pub s: usize,
}

/// Search outcome with the full evaluation trace.
#[derive(Debug, Clone, Serialize)]
pub struct TuneResult {
    pub radii: Vec<f64>,
    pub s: usize,
    pub dev_metric: f64,
    pub search_trace: Vec<(TuneCandidate, f64)>,
}

struct TuneContext<'a> {
    train_emb: &'a EmbeddingDataset,
    train_votes: &'a VoteMatrix,
    dev_emb: &'a EmbeddingDataset,
    dev_votes: &'a VoteMatrix,
    dev_labels: &'a LabelVector,
    config: &'a EngineConfig,
    metric: DevMetric,
    trace: Vec<(TuneCandidate, f64)>,
}

impl TuneContext<'_> {
    /// Fit on the training split, predict the dev split, score. This is
    /// exactly the public fit/predict/compute_metrics composition, so the
    /// returned dev metric can be reproduced from the chosen candidate.
    fn evaluate(&mut self, radii: &[f64], s: usize) -> Result<f64> {
        let extended = extend_all(self.train_emb, self.train_votes, radii)?;
        let config = EngineConfig {
            s,
            radii: radii.to_vec(),
            ..self.config.clone()
        };
        let model = fit(
            self.train_emb,
            &extended,
            &config,
            Some((self.dev_emb, self.dev_labels)),
        )?;
        let predictions = model.predict(self.train_emb, self.train_votes, self.dev_emb, self.dev_votes)?;
        let report = compute_metrics(&predictions.posteriors(), self.dev_labels)?;
        let value = self.metric.of(&report);
        self.trace.push((
            TuneCandidate {
                radii: radii.to_vec(),
                s,
            },
            value,
        ));
        Ok(value)
    }
}

/// Dev-set search over radii and part count. `r_grid` must be non-empty;
/// radii of full-coverage sources are pinned to zero.
#[allow(clippy::too_many_arguments)]
pub fn tune(
    train_emb: &EmbeddingDataset,
    train_votes: &VoteMatrix,
    dev_emb: &EmbeddingDataset,
    dev_votes: &VoteMatrix,
    dev_labels: &LabelVector,
    config: &EngineConfig,
    r_grid: &[f64],
    s_max: usize,
    metric: DevMetric,
) -> Result<TuneResult> {
    if r_grid.is_empty() {
        return Err(LigerError::Argument("r_grid is empty".into()));
    }
    if dev_labels.n() != dev_emb.n() {
        return Err(LigerError::Argument("dev labels are required for tuning".into()));
    }
    if s_max < 1 {
        return Err(LigerError::Argument("s_max must be at least 1".into()));
    }
    let m = train_votes.m();
    let full_coverage: Vec<bool> = (0..m).map(|i| train_votes.coverage(i) >= 1.0).collect();
    let pin = |radii: &mut Vec<f64>| {
        for (r, &full) in radii.iter_mut().zip(full_coverage.iter()) {
            if full {
                *r = 0.0;
            }
        }
    };

    let mut ctx = TuneContext {
        train_emb,
        train_votes,
        dev_emb,
        dev_votes,
        dev_labels,
        config,
        metric,
        trace: Vec::new(),
    };

    // Stage 1: one shared radius, single part.
    let mut best_radii = vec![0.0; m];
    let mut best_value = f64::NEG_INFINITY;
    let mut best_shared = 0.0;
    for &r in r_grid {
        let mut radii = vec![r; m];
        pin(&mut radii);
        let value = ctx.evaluate(&radii, 1)?;
        if value > best_value {
            best_value = value;
            best_radii = radii;
            best_shared = r;
        }
    }

    // Stage 2: per-coordinate refinement, sources in descending order of
    // how many votes their extension created at the stage-1 optimum.
    let extended_at_best = extend_all(train_emb, train_votes, &best_radii)?;
    let mut volumes: Vec<(usize, usize)> = (0..m)
        .map(|i| {
            let volume = (0..train_votes.n())
                .filter(|&p| {
                    extended_at_best.provenance(p, i) == crate::extend::Provenance::Extended
                })
                .count();
            (i, volume)
        })
        .collect();
    volumes.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));

    for (source, _) in volumes {
        if full_coverage[source] || best_shared == 0.0 {
            continue;
        }
        for mult in [0.5, 0.75, 1.0, 1.25, 1.5] {
            let candidate_r = best_shared * mult;
            if candidate_r == best_radii[source] {
                continue;
            }
            let mut radii = best_radii.clone();
            radii[source] = candidate_r;
            let value = ctx.evaluate(&radii, 1)?;
            if value > best_value {
                best_value = value;
                best_radii = radii;
            }
        }
    }

    // Stage 3: sweep the part count with radii frozen.
    let mut best_s = 1;
    let mut best_s_value = f64::NEG_INFINITY;
    for s in 1..=s_max.min(train_emb.n()) {
        let value = ctx.evaluate(&best_radii, s)?;
        if value > best_s_value {
            best_s_value = value;
            best_s = s;
        }
    }

    Ok(TuneResult {
        radii: best_radii,
        s: best_s,
        dev_metric: best_s_value,
        search_trace: ctx.trace,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::Metric;
    use crate::rng::SplitMix64;

    #[test]
    fn perfect_posteriors() {
        let labels = LabelVector::new(vec![1, -1, 1]).unwrap();
        let report = compute_metrics(&[1.0, 0.0, 1.0], &labels).unwrap();
        assert_eq!(report.accuracy, 1.0);
        assert_eq!(report.f1, 1.0);
        assert_eq!(report.cross_entropy, 0.0);
    }

    #[test]
    fn uninformative_posteriors_cost_ln_two() {
        let labels = LabelVector::new(vec![1, -1, 1, -1]).unwrap();
        let report = compute_metrics(&[0.5; 4], &labels).unwrap();
        assert!((report.cross_entropy - (2.0f64).ln()).abs() < 1e-12);
    }

    #[test]
    fn f1_hand_fixture() {
        // TP = 1, FP = 1, FN = 1 -> F1 = 2 / (2 + 1 + 1) = 0.5.
        let labels = LabelVector::new(vec![1, -1, 1]).unwrap();
        let report = compute_metrics(&[0.9, 0.9, 0.1], &labels).unwrap();
        assert!((report.f1 - 0.5).abs() < 1e-12);
    }

    #[test]
    fn f1_zero_when_denominator_vanishes() {
        let labels = LabelVector::new(vec![-1, -1]).unwrap();
        let report = compute_metrics(&[0.1, 0.2], &labels).unwrap();
        assert_eq!(report.f1, 0.0);
        assert_eq!(report.accuracy, 1.0);
    }

    #[test]
    fn tie_goes_to_positive() {
        assert_eq!(hard_label(0.5), 1);
        assert_eq!(hard_label(0.499999), -1);
    }

    #[test]
    fn metrics_are_permutation_invariant() {
        let mut rng = SplitMix64::new(2);
        let n = 200;
        let posteriors: Vec<f64> = (0..n).map(|_| rng.next_f64()).collect();
        let ys: Vec<i8> = (0..n).map(|_| if rng.next_f64() < 0.5 { 1 } else { -1 }).collect();
        let report = compute_metrics(&posteriors, &LabelVector::new(ys.clone()).unwrap()).unwrap();
        // Reverse both.
        let rev_p: Vec<f64> = posteriors.iter().rev().copied().collect();
        let rev_y: Vec<i8> = ys.iter().rev().copied().collect();
        let rev = compute_metrics(&rev_p, &LabelVector::new(rev_y).unwrap()).unwrap();
        assert_eq!(report.accuracy, rev.accuracy);
        assert_eq!(report.f1, rev.f1);
        assert!((report.cross_entropy - rev.cross_entropy).abs() < 1e-12);
    }

    #[test]
    fn length_mismatch_is_shape_error() {
        let labels = LabelVector::new(vec![1, -1]).unwrap();
        assert!(matches!(
            compute_metrics(&[0.5], &labels),
            Err(LigerError::Shape { .. })
        ));
    }

    fn tiny_tune_inputs() -> (EmbeddingDataset, VoteMatrix, EmbeddingDataset, VoteMatrix, LabelVector) {
        // Two clusters; three sources, the third abstains off a band.
        let mut rng = SplitMix64::new(31);
        let n = 120;
        let mut xs = Vec::with_capacity(n);
        let mut votes = Vec::with_capacity(n * 3);
        let mut ys = Vec::with_capacity(n);
        for i in 0..n {
            let y: i8 = if i % 2 == 0 { 1 } else { -1 };
            let x = if y == 1 {
                rng.next_f64() as f32 * 0.4
            } else {
                0.6 + rng.next_f64() as f32 * 0.4
            };
            xs.push(x);
            ys.push(y);
            for a in [0.9, 0.7] {
                votes.push(if rng.next_f64() < (1.0 + a) / 2.0 { y } else { -y });
            }
            // Third source abstains on the right cluster.
            votes.push(if x < 0.5 {
                if rng.next_f64() < 0.9 { y } else { -y }
            } else {
                0
            });
        }
        let emb = EmbeddingDataset::new(xs.clone(), 1, Metric::Euclidean).unwrap();
        let votes = VoteMatrix::new(votes, 3).unwrap();
        // Dev = an identically-built smaller split.
        let mut dev_xs = Vec::new();
        let mut dev_votes = Vec::new();
        let mut dev_ys = Vec::new();
        for i in 0..40 {
            let y: i8 = if i % 2 == 0 { 1 } else { -1 };
            let x = if y == 1 {
                rng.next_f64() as f32 * 0.4
            } else {
                0.6 + rng.next_f64() as f32 * 0.4
            };
            dev_xs.push(x);
            dev_ys.push(y);
            for a in [0.9, 0.7] {
                dev_votes.push(if rng.next_f64() < (1.0 + a) / 2.0 { y } else { -y });
            }
            dev_votes.push(if x < 0.5 {
                if rng.next_f64() < 0.9 { y } else { -y }
            } else {
                0
            });
        }
        let dev_emb = EmbeddingDataset::new(dev_xs, 1, Metric::Euclidean).unwrap();
        let dev_votes = VoteMatrix::new(dev_votes, 3).unwrap();
        let dev_labels = LabelVector::new(dev_ys).unwrap();
        (emb, votes, dev_emb, dev_votes, dev_labels)
    }

    #[test]
    fn single_candidate_grid_returns_it() {
        let (emb, votes, dev_emb, dev_votes, dev_labels) = tiny_tune_inputs();
        let config = EngineConfig::default();
        let result = tune(
            &emb, &votes, &dev_emb, &dev_votes, &dev_labels, &config, &[0.05], 1, DevMetric::F1,
        )
        .unwrap();
        assert_eq!(result.s, 1);
        // Full-coverage sources 0 and 1 pinned to zero.
        assert_eq!(result.radii[0], 0.0);
        assert_eq!(result.radii[1], 0.0);
        assert_eq!(result.radii[2], 0.05);
    }

    #[test]
    fn full_coverage_sources_are_pinned_to_zero() {
        let (emb, votes, dev_emb, dev_votes, dev_labels) = tiny_tune_inputs();
        let config = EngineConfig::default();
        let result = tune(
            &emb, &votes, &dev_emb, &dev_votes, &dev_labels, &config, &[0.0, 0.02, 0.1], 3,
            DevMetric::Accuracy,
        )
        .unwrap();
        assert_eq!(result.radii[0], 0.0);
        assert_eq!(result.radii[1], 0.0);
    }

    #[test]
    fn returned_metric_is_reproducible_and_maximal_in_trace() {
        let (emb, votes, dev_emb, dev_votes, dev_labels) = tiny_tune_inputs();
        let config = EngineConfig::default();
        let result = tune(
            &emb, &votes, &dev_emb, &dev_votes, &dev_labels, &config, &[0.0, 0.05, 0.2], 3,
            DevMetric::F1,
        )
        .unwrap();
        for (_, value) in &result.search_trace {
            assert!(*value <= result.dev_metric + 1e-15);
        }
        // Re-run the public composition with the chosen hyperparameters.
        let extended = extend_all(&emb, &votes, &result.radii).unwrap();
        let refit_config = EngineConfig {
            s: result.s,
            radii: result.radii.clone(),
            ..config
        };
        let model = fit(&emb, &extended, &refit_config, Some((&dev_emb, &dev_labels))).unwrap();
        let predictions = model.predict(&emb, &votes, &dev_emb, &dev_votes).unwrap();
        let report = compute_metrics(&predictions.posteriors(), &dev_labels).unwrap();
        assert_eq!(report.f1, result.dev_metric);
    }

    #[test]
    fn missing_dev_grid_is_an_error() {
        let (emb, votes, dev_emb, dev_votes, dev_labels) = tiny_tune_inputs();
        let config = EngineConfig::default();
        assert!(tune(
            &emb, &votes, &dev_emb, &dev_votes, &dev_labels, &config, &[], 2, DevMetric::F1
        )
        .is_err());
    }
}
