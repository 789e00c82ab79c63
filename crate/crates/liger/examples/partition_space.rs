//! Partitioning the embedding space: deterministic k-means, part
//! assignment for new points, and diameter diagnostics.
//!
//! ```bash
//! cargo run --release -p liger --example partition_space
//! ```

use liger::data::{EmbeddingDataset, Metric};
use liger::partition::{kmeans_fit_with, part_diameters};
use liger::rng::SplitMix64;

fn main() -> liger::Result<()> {
    // Three well-separated blobs in 2-D.
    let mut rng = SplitMix64::new(5);
    let centers = [(0.0f32, 0.0f32), (4.0, 0.0), (2.0, 3.0)];
    let mut data = Vec::new();
    for i in 0..600 {
        let (cx, cy) = centers[i % 3];
        data.push(cx + rng.next_f64() as f32 - 0.5);
        data.push(cy + rng.next_f64() as f32 - 0.5);
    }
    let emb = EmbeddingDataset::new(data, 2, Metric::Euclidean)?;

    let run = kmeans_fit_with(&emb, 3, 42, 100, 1e-6)?;
    println!(
        "converged in {} iterations, objective history: {:?}",
        run.iterations,
        run.objective_history
            .iter()
            .map(|o| (o * 100.0).round() / 100.0)
            .collect::<Vec<_>>()
    );
    let partition = run.partition;
    println!("part sizes: {:?}", partition.part_sizes());
    for (j, c) in partition.centroids().iter().enumerate() {
        println!("centroid {j}: ({:.3}, {:.3})", c[0], c[1]);
    }

    // New points are assigned to the nearest centroid (ties -> lowest index).
    for point in [[0.2f32, 0.1], [3.9, 0.4], [2.0, 2.8]] {
        println!("point {point:?} -> part {}", partition.assign_point(&point)?);
    }

    let diameters = part_diameters(&emb, &partition)?;
    println!(
        "per-part diameters {:?}, mass-weighted average {:.3}",
        diameters
            .per_part
            .iter()
            .map(|d| (d * 1000.0).round() / 1000.0)
            .collect::<Vec<_>>(),
        diameters.average
    );

    // Refitting with the same seed reproduces the partition exactly.
    let again = kmeans_fit_with(&emb, 3, 42, 100, 1e-6)?;
    assert_eq!(again.partition.assignment(), partition.assignment());
    println!("refit with the same seed is bit-identical");
    Ok(())
}
