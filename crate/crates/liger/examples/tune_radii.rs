//! Dev-set hyperparameter search: a shared-radius grid, per-coordinate
//! refinement, then a part-count sweep with radii frozen.
//!
//! ```bash
//! cargo run --release -p liger --example tune_radii
//! ```

use liger::data::EngineConfig;
use liger::eval::{tune, DevMetric};
use liger::synthetic::{
    checkerboard_task, CheckerboardSource, CheckerboardTaskSpec, LabelPattern, SupportRegion,
};

fn spec(n: usize, seed: u64) -> CheckerboardTaskSpec {
    CheckerboardTaskSpec {
        n,
        pattern: LabelPattern::Checkerboard { g: 10 },
        seed,
        sources: vec![
            CheckerboardSource {
                support: SupportRegion::RandomFraction(0.05),
                accuracy: 0.9,
                extendable: true,
            },
            CheckerboardSource {
                support: SupportRegion::Full,
                accuracy: 0.65,
                extendable: false,
            },
            CheckerboardSource {
                support: SupportRegion::Full,
                accuracy: 0.55,
                extendable: false,
            },
        ],
    }
}

fn main() -> liger::Result<()> {
    let train = checkerboard_task(&spec(3000, 1))?;
    let dev = checkerboard_task(&spec(800, 2))?;

    let result = tune(
        &train.embeddings,
        &train.votes,
        &dev.embeddings,
        &dev.votes,
        &dev.labels,
        &EngineConfig::default(),
        &[0.0, 0.01, 0.02, 0.04, 0.08],
        4,
        DevMetric::Accuracy,
    )?;

    println!("search trace ({} evaluations):", result.search_trace.len());
    for (candidate, value) in &result.search_trace {
        println!(
            "  radii {:?} s={} -> dev accuracy {:.4}",
            candidate
                .radii
                .iter()
                .map(|r| (r * 1000.0).round() / 1000.0)
                .collect::<Vec<_>>(),
            candidate.s,
            value
        );
    }
    println!(
        "chosen: radii {:?}, s = {}, dev accuracy {:.4}",
        result.radii, result.s, result.dev_metric
    );
    println!("full-coverage sources keep radius zero; only the sparse one is extended");
    Ok(())
}
