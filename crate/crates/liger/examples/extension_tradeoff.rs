//! The extension-radius tradeoff: small radii copy votes across
//! same-labeled neighborhoods and add signal; large radii cross label
//! boundaries and poison the source. Lift depends on the source's accuracy
//! and on how smooth the label layout is.
//!
//! ```bash
//! cargo run --release -p liger --example extension_tradeoff
//! ```

use liger::bench::{bench_extension, ExtensionVariants};
use liger::synthetic::{
    CheckerboardSource, CheckerboardTaskSpec, LabelPattern, SupportRegion,
};

fn main() -> liger::Result<()> {
    let base = CheckerboardTaskSpec {
        n: 10_000,
        pattern: LabelPattern::Checkerboard { g: 10 },
        seed: 808,
        sources: vec![
            CheckerboardSource {
                support: SupportRegion::RandomFraction(0.04),
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
    };
    let grid: Vec<f64> = (0..=20).map(|i| i as f64 * 0.005).collect();

    println!("sweeping the extendable source's accuracy (10x10 board):");
    let curves = bench_extension(
        &base,
        &grid,
        &ExtensionVariants::Accuracies(vec![0.89, 0.74, 0.62, 0.53]),
    )?;
    summarize(&curves);

    println!("\nsweeping label smoothness (source accuracy 0.89):");
    let curves = bench_extension(
        &base,
        &grid,
        &ExtensionVariants::Patterns(vec![
            LabelPattern::Checkerboard { g: 2 },
            LabelPattern::Checkerboard { g: 10 },
            LabelPattern::Random,
        ]),
    )?;
    summarize(&curves);
    println!("\nsmoother boards tolerate larger radii; random labels gain nothing");
    Ok(())
}

fn summarize(curves: &[liger::bench::ExtensionCurve]) {
    for curve in curves {
        let baseline = curve.points[0].cross_entropy;
        let best = curve
            .points
            .iter()
            .min_by(|a, b| a.cross_entropy.partial_cmp(&b.cross_entropy).unwrap())
            .unwrap();
        let last = curve.points.last().unwrap();
        println!(
            "  {:<12} baseline ce {:.4} | best ce {:.4} at r={:.3} | ce at r={:.3}: {:.4}",
            curve.variant, baseline, best.cross_entropy, best.r, last.r, last.cross_entropy
        );
    }
}
