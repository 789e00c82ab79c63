//! Driving the pipeline through the `liger` binary's subcommands and file
//! formats instead of the library API. Everything here is also available
//! as `liger <subcommand> --flags` from a shell.
//!
//! ```bash
//! cargo run --release -p liger --example cli_pipeline
//! ```

fn run(args: &[&str]) {
    println!("$ liger {}", args.join(" "));
    let args: Vec<String> = args.iter().map(|s| s.to_string()).collect();
    let mut out = Vec::new();
    let mut err = Vec::new();
    let code = liger::cli::run(&args, &mut out, &mut err);
    print!("{}", String::from_utf8_lossy(&out));
    if code != 0 {
        eprint!("{}", String::from_utf8_lossy(&err));
        std::process::exit(code);
    }
    println!();
}

fn main() {
    let dir = std::env::temp_dir().join("liger_cli_pipeline_example");
    std::fs::create_dir_all(&dir).unwrap();
    let p = |name: &str| dir.join(name).display().to_string();
    let data = p("data");

    run(&[
        "synth", "--kind", "checkerboard", "--n", "2000", "--seed", "4", "--accuracies",
        "0.9,0.6,0.55", "--out", &data,
    ]);
    let emb = format!("{data}/embeddings.lgem");
    let votes = format!("{data}/votes.csv");
    let labels = format!("{data}/labels.csv");

    run(&["partition", "--embeddings", &emb, "--s", "4", "--seed", "0", "--out", &p("partition.json")]);
    run(&["extend", "--embeddings", &emb, "--votes", &votes, "--radii", "0.03,0,0", "--out", &p("extended.csv")]);
    run(&[
        "fit", "--embeddings", &emb, "--votes", &votes, "--radii", "0.03,0,0", "--s", "4",
        "--seed", "0", "--out", &p("model.json"),
    ]);
    run(&[
        "predict", "--model", &p("model.json"), "--embeddings", &emb, "--votes", &votes,
        "--out", &p("predictions.csv"),
    ]);
    run(&["evaluate", "--predictions", &p("predictions.csv"), "--labels", &labels]);
    run(&[
        "smoothness", "--embeddings", &emb, "--votes", &votes, "--labels", &labels,
        "--r-grid", "0.02,0.05,0.1,0.2", "--out", &p("smoothness.csv"),
    ]);
    println!("artifacts under {}", dir.display());
}
