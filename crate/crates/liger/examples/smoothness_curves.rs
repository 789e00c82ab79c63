//! Smoothness diagnostics: how fast labels and coverage change with
//! embedding distance, and how often a support point has a differing-label
//! off-support point nearby. Smooth embeddings are the ones worth
//! partitioning and extending over.
//!
//! ```bash
//! cargo run --release -p liger --example smoothness_curves
//! ```

use liger::smoothness::smoothness_report;
use liger::synthetic::{
    checkerboard_task, CheckerboardSource, CheckerboardTaskSpec, LabelPattern, SupportRegion,
};

fn main() -> liger::Result<()> {
    let grid = [0.02, 0.05, 0.1, 0.2, 0.4];
    // The same point cloud under three label layouts of decreasing
    // smoothness: 2x2 tiles, 10x10 tiles, spatially random.
    for pattern in [
        LabelPattern::Checkerboard { g: 2 },
        LabelPattern::Checkerboard { g: 10 },
        LabelPattern::Random,
    ] {
        let spec = CheckerboardTaskSpec {
            n: 2000,
            pattern,
            seed: 3,
            sources: vec![
                CheckerboardSource {
                    support: SupportRegion::RandomFraction(0.3),
                    accuracy: 0.9,
                    extendable: true,
                },
                CheckerboardSource {
                    support: SupportRegion::Full,
                    accuracy: 0.6,
                    extendable: false,
                },
            ],
        };
        let task = checkerboard_task(&spec)?;
        let report = smoothness_report(&task.embeddings, &task.labels, &task.votes, &grid)?;
        let name = match pattern {
            LabelPattern::Checkerboard { g } => format!("{g}x{g} board"),
            LabelPattern::Random => "random labels".to_string(),
        };
        println!("{name}:");
        println!("  radius      {:?}", grid);
        println!(
            "  label curve {:?}",
            rounded(&report.label_curve)
        );
        println!(
            "  cover curve {:?}",
            rounded(&report.coverage_curve)
        );
        println!(
            "  pl curve    {:?}",
            rounded(&report.pl_curve)
        );
    }
    println!("flatter curves near zero radius = smoother space = more lift available");
    Ok(())
}

fn rounded(values: &[f64]) -> Vec<f64> {
    values.iter().map(|v| (v * 1000.0).round() / 1000.0).collect()
}
