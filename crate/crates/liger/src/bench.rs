//! Synthetic benchmark drivers: the part-count bias/variance sweep and the
//! extension-radius tradeoff on checkerboard tasks.

use crate::data::{ClassBalanceMode, EngineConfig, Metric};
use crate::error::{LigerError, Result};
use crate::extend::{ExtendedVoteMatrix, Provenance};
use crate::model::fit_with_partition;
use crate::partition::Partition;
use crate::rng::derive;
use crate::synthetic::{
    checkerboard_task, two_population_dataset, CheckerboardTaskSpec, LabelPattern,
    SyntheticModelSpec,
};

/// Mean cross-entropy and 95% confidence interval for one part count.
#[derive(Debug, Clone)]
pub struct BiasVarianceRow {
    pub s: usize,
    pub mean: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
}

/// Samples a two-population bundle per seed, fits the label model at each
/// part count with parts taken from the true population membership (each
/// population split evenly into `s/2` contiguous chunks), and reports the
/// spread of the resulting cross-entropy. Class balances are the analytic
/// per-population values, so the sweep isolates accuracy-estimation error.
pub fn bench_bias_variance(
    spec_a: &SyntheticModelSpec,
    spec_b: &SyntheticModelSpec,
    n_each: usize,
    s_list: &[usize],
    n_seeds: usize,
    seed: u64,
) -> Result<Vec<BiasVarianceRow>> {
    if s_list.is_empty() || n_seeds == 0 {
        return Err(LigerError::Argument("need at least one s and one seed".into()));
    }
    if s_list.windows(2).any(|w| w[1] <= w[0]) {
        return Err(LigerError::Argument("s_list must ascend".into()));
    }
    for &s in s_list {
        if s != 1 && s % 2 != 0 {
            return Err(LigerError::Argument(format!(
                "s = {s}: membership partitioning needs s = 1 or an even s"
            )));
        }
        if s > 2 * n_each {
            return Err(LigerError::Argument(format!("s = {s} exceeds the point count")));
        }
    }

    let mut per_s: Vec<Vec<f64>> = vec![Vec::with_capacity(n_seeds); s_list.len()];
    for seed_idx in 0..n_seeds {
        let bundle = two_population_dataset(spec_a, spec_b, n_each, derive(seed, seed_idx as u64))?;
        let votes = ExtendedVoteMatrix::from_raw(&bundle.votes);
        for (si, &s) in s_list.iter().enumerate() {
            let (assignment, balances) = membership_parts(
                n_each,
                s,
                bundle.tables_a.prob_y_pos,
                bundle.tables_b.prob_y_pos,
            );
            // One-dimensional placeholder embedding: the part index itself.
            let centroids: Vec<Vec<f64>> = (0..s).map(|j| vec![j as f64]).collect();
            let partition = Partition::from_parts(Metric::Euclidean, centroids, assignment.clone())?;
            let config = EngineConfig {
                s,
                class_balance_mode: ClassBalanceMode::Explicit,
                explicit_balances: Some(balances),
                ..EngineConfig::default()
            };
            let model = fit_with_partition(partition, &votes, &config, None)?;
            let mut ce = 0.0f64;
            for (p, &part) in assignment.iter().enumerate() {
                let posterior = model.posterior_in_part(part, votes.row(p));
                let p_true = if bundle.labels.get(p) == 1 {
                    posterior
                } else {
                    1.0 - posterior
                };
                ce -= p_true.max(1e-12).ln();
            }
            per_s[si].push(ce / bundle.labels.n() as f64);
        }
    }

    Ok(s_list
        .iter()
        .zip(per_s.iter())
        .map(|(&s, values)| {
            let mean = values.iter().sum::<f64>() / values.len() as f64;
            let half = if values.len() > 1 {
                let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>()
                    / (values.len() - 1) as f64;
                1.96 * (var / values.len() as f64).sqrt()
            } else {
                0.0
            };
            BiasVarianceRow {
                s,
                mean,
                ci_lo: mean - half,
                ci_hi: mean + half,
            }
        })
        .collect())
}

/// Membership-derived assignment: population 0 occupies rows `0..n_each`,
/// population 1 the rest; each population is cut into `s/2` contiguous
/// chunks (`s = 1` pools everything). Balances repeat each population's
/// analytic positive-class probability.
fn membership_parts(
    n_each: usize,
    s: usize,
    balance_a: f64,
    balance_b: f64,
) -> (Vec<usize>, Vec<f64>) {
    let n = 2 * n_each;
    if s == 1 {
        let pooled = 0.5 * (balance_a + balance_b);
        return (vec![0; n], vec![pooled]);
    }
    let chunks = s / 2;
    let mut assignment = Vec::with_capacity(n);
    for p in 0..n {
        let (pop, idx) = if p < n_each { (0, p) } else { (1, p - n_each) };
        let chunk = (idx * chunks / n_each).min(chunks - 1);
        assignment.push(pop * chunks + chunk);
    }
    let mut balances = vec![balance_a; chunks];
    balances.extend(vec![balance_b; chunks]);
    (assignment, balances)
}

/// What varies across extension-benchmark curves.
#[derive(Debug, Clone)]
pub enum ExtensionVariants {
    /// Accuracy levels of the extendable source; labels and the other
    /// sources stay fixed, so the r = 0 points coincide across curves.
    Accuracies(Vec<f64>),
    /// Label layouts at a fixed source configuration.
    Patterns(Vec<LabelPattern>),
}

/// One point of an extension curve.
#[derive(Debug, Clone)]
pub struct ExtensionCurvePoint {
    pub r: f64,
    /// Cross-entropy of the fitted model over the task points.
    pub cross_entropy: f64,
    /// Fraction of extension-created votes that match the true label;
    /// `None` when the radius created no votes.
    pub extension_accuracy: Option<f64>,
    /// Count of extension-created votes.
    pub extended_count: usize,
    /// Post-extension coverage of the extendable source.
    pub coverage: f64,
}

#[derive(Debug, Clone)]
pub struct ExtensionCurve {
    pub variant: String,
    pub points: Vec<ExtensionCurvePoint>,
}

/// Sweeps the extendable source's radius over `r_grid` for each variant:
/// single-part fit, uniform class balance, cross-entropy on the task points.
pub fn bench_extension(
    base: &CheckerboardTaskSpec,
    r_grid: &[f64],
    variants: &ExtensionVariants,
) -> Result<Vec<ExtensionCurve>> {
    if r_grid.is_empty() {
        return Err(LigerError::Argument("r_grid is empty".into()));
    }
    let extendable: Vec<usize> = base
        .sources
        .iter()
        .enumerate()
        .filter(|(_, src)| src.extendable)
        .map(|(i, _)| i)
        .collect();
    let [target] = extendable.as_slice() else {
        return Err(LigerError::Argument(format!(
            "exactly one source must be extendable, found {}",
            extendable.len()
        )));
    };
    let target = *target;

    let specs: Vec<(String, CheckerboardTaskSpec)> = match variants {
        ExtensionVariants::Accuracies(levels) => levels
            .iter()
            .map(|&a| {
                let mut spec = base.clone();
                spec.sources[target].accuracy = a;
                (format!("a={a}"), spec)
            })
            .collect(),
        ExtensionVariants::Patterns(patterns) => patterns
            .iter()
            .map(|&pattern| {
                let name = match pattern {
                    LabelPattern::Checkerboard { g } => format!("grid={g}x{g}"),
                    LabelPattern::Random => "random".to_string(),
                };
                (name, CheckerboardTaskSpec { pattern, ..base.clone() })
            })
            .collect(),
    };

    let mut curves = Vec::with_capacity(specs.len());
    for (variant, spec) in specs {
        let task = checkerboard_task(&spec)?;
        let index = crate::extend::ExtensionIndex::build(&task.embeddings, &task.votes)?;
        let m = task.votes.m();
        // Single part covering the whole square.
        let partition = Partition::from_parts(
            Metric::Euclidean,
            vec![vec![0.5, 0.5]],
            vec![0; task.votes.n()],
        )?;
        let mut points = Vec::with_capacity(r_grid.len());
        for &r in r_grid {
            let mut radii = vec![0.0; m];
            radii[target] = r;
            let extended = index.extend(&task.votes, &radii)?;
            let config = EngineConfig {
                s: 1,
                radii: radii.clone(),
                ..EngineConfig::default()
            };
            let model = fit_with_partition(partition.clone(), &extended, &config, None)?;
            let mut ce = 0.0f64;
            for p in 0..task.votes.n() {
                let posterior = model.posterior_in_part(0, extended.row(p));
                let p_true = if task.labels.get(p) == 1 {
                    posterior
                } else {
                    1.0 - posterior
                };
                ce -= p_true.max(1e-12).ln();
            }
            let mut extended_count = 0usize;
            let mut extended_correct = 0usize;
            for p in 0..task.votes.n() {
                if extended.provenance(p, target) == Provenance::Extended {
                    extended_count += 1;
                    if extended.get(p, target) == task.labels.get(p) {
                        extended_correct += 1;
                    }
                }
            }
            points.push(ExtensionCurvePoint {
                r,
                cross_entropy: ce / task.votes.n() as f64,
                extension_accuracy: if extended_count > 0 {
                    Some(extended_correct as f64 / extended_count as f64)
                } else {
                    None
                },
                extended_count,
                coverage: extended.coverage(target),
            });
        }
        curves.push(ExtensionCurve { variant, points });
    }
    Ok(curves)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synthetic::{spec_from_accuracy, CheckerboardSource, SupportRegion};

    fn small_task() -> CheckerboardTaskSpec {
        CheckerboardTaskSpec {
            n: 1500,
            pattern: LabelPattern::Checkerboard { g: 10 },
            seed: 13,
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
                    accuracy: 0.55,
                    extendable: false,
                },
                CheckerboardSource {
                    support: SupportRegion::Full,
                    accuracy: 0.5,
                    extendable: false,
                },
            ],
        }
    }

    #[test]
    fn membership_chunks_are_even() {
        let (assignment, balances) = membership_parts(1000, 8, 0.6, 0.4);
        assert_eq!(balances.len(), 8);
        let mut sizes = vec![0usize; 8];
        for a in assignment {
            sizes[a] += 1;
        }
        assert_eq!(sizes, vec![250; 8]);
    }

    #[test]
    fn bias_variance_control_prefers_one_part() {
        let spec = spec_from_accuracy(&[0.8, 0.6, 0.7], &[0.0, 0.0, 0.0], 0.0).unwrap();
        let rows = bench_bias_variance(&spec, &spec, 400, &[1, 2, 4], 6, 0).unwrap();
        assert_eq!(rows.len(), 3);
        let best = rows
            .iter()
            .min_by(|a, b| a.mean.partial_cmp(&b.mean).unwrap())
            .unwrap();
        assert_eq!(best.s, 1, "rows: {rows:?}");
    }

    #[test]
    fn s_list_must_ascend_and_be_even() {
        let spec = spec_from_accuracy(&[0.8, 0.6, 0.7], &[0.0, 0.0, 0.0], 0.0).unwrap();
        assert!(bench_bias_variance(&spec, &spec, 100, &[2, 1], 2, 0).is_err());
        assert!(bench_bias_variance(&spec, &spec, 100, &[1, 3], 2, 0).is_err());
    }

    #[test]
    fn zero_radius_matches_unextended_baseline_exactly() {
        let task_spec = small_task();
        let curves = bench_extension(
            &task_spec,
            &[0.0, 0.05],
            &ExtensionVariants::Accuracies(vec![0.89, 0.53]),
        )
        .unwrap();
        // Identical r = 0 cross-entropy across accuracy variants is checked
        // in the acceptance suite; here: r = 0 creates no votes.
        for curve in &curves {
            assert_eq!(curve.points[0].extended_count, 0);
            assert!(curve.points[0].extension_accuracy.is_none());
        }
    }

    #[test]
    fn requires_exactly_one_extendable_source() {
        let mut spec = small_task();
        spec.sources[1].extendable = true;
        assert!(bench_extension(&spec, &[0.0], &ExtensionVariants::Accuracies(vec![0.8])).is_err());
    }
}
