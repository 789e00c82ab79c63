//! Vote extension: abstained points inherit the vote of their nearest
//! covered neighbor within a per-source radius.
//!
//! ```bash
//! cargo run --release -p liger --example extend_votes
//! ```

use liger::data::{EmbeddingDataset, Metric, VoteMatrix};
use liger::extend::{coverage_delta, extend_all, nearest_covered_neighbor, Provenance};

fn main() -> liger::Result<()> {
    // A 1-D line of nine points; source 0 votes on three of them, source 1
    // votes everywhere.
    let xs: Vec<f32> = (0..9).map(|i| i as f32 * 0.5).collect();
    let emb = EmbeddingDataset::new(xs.clone(), 1, Metric::Euclidean)?;
    let votes = VoteMatrix::new(
        vec![
            1, 1, //
            0, 1, //
            0, -1, //
            -1, -1, //
            0, -1, //
            0, 1, //
            0, 1, //
            0, 1, //
            1, 1,
        ],
        2,
    )?;

    for p in [1usize, 5] {
        match nearest_covered_neighbor(&emb, &votes, 0, p) {
            Some((nn, d)) => println!(
                "point {p} (x={}): nearest covered neighbor for source 0 is point {nn} at distance {d}",
                xs[p]
            ),
            None => println!("point {p}: source 0 has no support"),
        }
    }

    for r in [0.0, 0.6, 1.2] {
        let extended = extend_all(&emb, &votes, &[r, 0.0])?;
        let row: Vec<String> = (0..9)
            .map(|p| {
                let v = extended.get(p, 0);
                let tag = match extended.provenance(p, 0) {
                    Provenance::Original => "o",
                    Provenance::Extended => "e",
                    Provenance::Abstain => " ",
                };
                format!("{v:>2}{tag}")
            })
            .collect();
        let delta = coverage_delta(&votes, &extended)?;
        println!(
            "r={r:<4} source 0 column: [{}]  coverage {:.2} -> {:.2}",
            row.join(" "),
            delta.per_source_before[0],
            delta.per_source_after[0]
        );
    }
    println!("(o = original vote, e = extension-created, blank = abstain)");
    println!("votes on the original support never change, whatever the radius");
    Ok(())
}
