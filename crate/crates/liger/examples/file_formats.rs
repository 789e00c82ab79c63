//! The on-disk formats: LGEM embedding binary, votes/labels CSV, and the
//! JSON documents for configs, partitions, and models.
//!
//! ```bash
//! cargo run --release -p liger --example file_formats
//! ```

use liger::data::{validate_bundle, EmbeddingDataset, EngineConfig, LabelVector, Metric, VoteMatrix};
use liger::extend::ExtendedVoteMatrix;
use liger::io;
use liger::model::fit;

fn main() -> liger::Result<()> {
    let dir = std::env::temp_dir().join("liger_file_formats_example");
    std::fs::create_dir_all(&dir)?;

    // A tiny bundle: 4 points in 2-D, 3 sources, labels.
    let emb = EmbeddingDataset::new(
        vec![0.0, 0.0, 0.1, 0.0, 0.9, 1.0, 1.0, 0.9],
        2,
        Metric::Euclidean,
    )?;
    let votes = VoteMatrix::new(
        vec![
            1, 1, 0, //
            1, 0, 1, //
            -1, -1, -1, //
            0, -1, -1,
        ],
        3,
    )?;
    let labels = LabelVector::new(vec![1, 1, -1, -1])?;

    let emb_path = dir.join("embeddings.lgem");
    let votes_path = dir.join("votes.csv");
    let labels_path = dir.join("labels.csv");
    io::store_embeddings(&emb_path, &emb)?;
    io::store_votes(&votes_path, &votes)?;
    io::store_labels(&labels_path, &labels)?;

    // Round-trips are the identity; the binary one is bitwise.
    let emb_back = io::load_embeddings(&emb_path, Metric::Euclidean)?;
    assert_eq!(emb.data(), emb_back.data());
    assert_eq!(io::load_votes(&votes_path, 4)?, votes);
    assert_eq!(io::load_labels(&labels_path)?, labels);
    println!("embeddings.lgem: {} bytes, bit-exact round-trip", std::fs::metadata(&emb_path)?.len());

    let summary = validate_bundle(&emb, &votes, Some(&labels))?;
    println!(
        "bundle: n={}, m={}, coverage={:?}, positive prior={:?}",
        summary.n, summary.m, summary.coverage, summary.positive_prior
    );

    // Config and model documents are plain JSON mirroring the field names.
    let config = EngineConfig {
        s: 2,
        seed: 3,
        ..EngineConfig::default()
    };
    let config_path = dir.join("config.json");
    io::store_config(&config_path, &config)?;
    println!("config.json:\n{}", std::fs::read_to_string(&config_path)?);

    let model = fit(&emb, &ExtendedVoteMatrix::from_raw(&votes), &config, None)?;
    let model_path = dir.join("model.json");
    io::store_model(&model_path, &model)?;
    let reloaded = io::load_model(&model_path)?;
    assert_eq!(reloaded.s(), model.s());
    println!("model.json round-trips; files under {}", dir.display());
    Ok(())
}
