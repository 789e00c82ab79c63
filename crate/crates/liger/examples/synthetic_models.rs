//! The generative model behind the synthetic benchmarks: canonical
//! parameters, exact conditional tables, accuracy inversion, and seeded
//! sampling with analytic ground truth.
//!
//! ```bash
//! cargo run --release -p liger --example synthetic_models
//! ```

use liger::synthetic::{conditional_tables, sample_dataset, spec_from_accuracy, SyntheticModelSpec};

fn main() -> liger::Result<()> {
    // Directly specified canonical parameters.
    let spec = SyntheticModelSpec {
        m: 1,
        theta_y: 0.0,
        theta: vec![1.0],
        theta_abstain: vec![0.0],
    };
    let tables = conditional_tables(&spec)?;
    println!("theta = 1, theta_abstain = 0:");
    println!("  Pr(y = +1) = {:.5}", tables.prob_y_pos);
    for v in [-1i8, 0, 1] {
        println!("  Pr(vote = {v:>2} | y = +1) = {:.5}", tables.vote_prob(0, 1, v));
    }
    println!("  analytic accuracy = {:.5}", tables.accuracy(0));

    // Usually experiments are specified the other way around: target
    // accuracies and abstain rates, inverted to canonical parameters.
    let spec = spec_from_accuracy(&[0.8, 0.6, 0.7], &[0.1, 0.3, 0.0], 0.2)?;
    let tables = conditional_tables(&spec)?;
    println!("\ninverted spec for accuracies (0.8, 0.6, 0.7), abstain rates (0.1, 0.3, 0.0):");
    println!(
        "  theta = {:?}",
        spec.theta.iter().map(|t| (t * 1e4).round() / 1e4).collect::<Vec<_>>()
    );
    println!(
        "  recovered accuracies = {:?}",
        tables
            .accuracies()
            .iter()
            .map(|a| (a * 1e4).round() / 1e4)
            .collect::<Vec<_>>()
    );

    // Seeded sampling is reproducible and carries its analytic truth.
    let sample = sample_dataset(&spec, 20_000, 99)?;
    for i in 0..3 {
        let mut signal = 0.0;
        let mut covered = 0usize;
        for p in 0..sample.labels.n() {
            let v = sample.votes.get(p, i);
            if v != 0 {
                signal += (v * sample.labels.get(p)) as f64;
                covered += 1;
            }
        }
        println!(
            "  source {i}: empirical accuracy {:.4} vs analytic {:.4} (coverage {:.3})",
            signal / covered as f64,
            sample.true_accuracies[i],
            covered as f64 / sample.labels.n() as f64
        );
    }
    Ok(())
}
