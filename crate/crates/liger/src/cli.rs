//! Subcommand pipeline over the file formats.
//!
//! One invocation is one process: `partition`, `extend`, `fit`, `predict`,
//! `evaluate`, `tune`, `smoothness`, `synth`, and `bench` map one-to-one
//! onto the library operations. Outputs are files plus key=value lines on
//! stdout so benchmark harnesses can scrape results. Exit codes: 0 success,
//! 1 validation/data error, 2 usage error.
//!
//! Identical inputs and seed produce byte-identical output files.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use crate::bench::{bench_bias_variance, bench_extension, ExtensionVariants};
use crate::data::{EngineConfig, LabelVector, Metric};
use crate::error::LigerError;
use crate::eval::{compute_metrics, tune, DevMetric};
use crate::extend::{coverage_delta, extend_all};
use crate::io;
use crate::model::fit;
use crate::partition::{kmeans_fit_with, part_diameters};
use crate::smoothness::smoothness_report;
use crate::synthetic::{
    checkerboard_task, sample_dataset, two_population_dataset, CheckerboardSource,
    CheckerboardTaskSpec, LabelPattern, SupportRegion,
};

enum CliError {
    Usage(String),
    Run(LigerError),
}

impl From<LigerError> for CliError {
    fn from(e: LigerError) -> Self {
        CliError::Run(e)
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

const USAGE: &str = "usage: liger <partition|extend|fit|predict|evaluate|tune|smoothness|synth|bench> [--flag value]...
run `liger <subcommand> --help` is not supported; see the project README for the flag list";

/// Runs one invocation; returns the process exit code and writes output
/// through the given sinks (stdout is machine-parseable key=value lines).
pub fn run(args: &[String], stdout: &mut dyn std::io::Write, stderr: &mut dyn std::io::Write) -> i32 {
    let mut buffer = Vec::new();
    let outcome = dispatch(args, &mut buffer);
    let _ = stdout.write_all(&buffer);
    match outcome {
        Ok(()) => 0,
        Err(CliError::Usage(msg)) => {
            let _ = writeln!(stderr, "usage error: {msg}");
            let _ = writeln!(stderr, "{USAGE}");
            2
        }
        Err(CliError::Run(e)) => {
            let _ = writeln!(stderr, "error: {e}");
            1
        }
    }
}

/// Flag table: every flag takes exactly one value; unknown flags reject.
struct Flags {
    values: BTreeMap<String, String>,
}

impl Flags {
    fn parse(args: &[String], known: &[&str]) -> CliResult<Flags> {
        let mut values = BTreeMap::new();
        let mut i = 0;
        while i < args.len() {
            let arg = &args[i];
            let name = arg
                .strip_prefix("--")
                .ok_or_else(|| CliError::Usage(format!("expected --flag, found `{arg}`")))?;
            if !known.contains(&name) {
                return Err(CliError::Usage(format!("unknown flag `--{name}`")));
            }
            let value = args
                .get(i + 1)
                .ok_or_else(|| CliError::Usage(format!("flag `--{name}` needs a value")))?;
            if values.insert(name.to_string(), value.clone()).is_some() {
                return Err(CliError::Usage(format!("flag `--{name}` given twice")));
            }
            i += 2;
        }
        Ok(Flags { values })
    }

    fn get(&self, name: &str) -> Option<&str> {
        self.values.get(name).map(String::as_str)
    }

    fn require(&self, name: &str) -> CliResult<&str> {
        self.get(name)
            .ok_or_else(|| CliError::Usage(format!("missing required flag `--{name}`")))
    }

    fn path(&self, name: &str) -> CliResult<PathBuf> {
        Ok(PathBuf::from(self.require(name)?))
    }

    fn parse_value<T: std::str::FromStr>(&self, name: &str) -> CliResult<Option<T>> {
        match self.get(name) {
            None => Ok(None),
            Some(raw) => raw.parse::<T>().map(Some).map_err(|_| {
                CliError::Usage(format!("flag `--{name}`: cannot parse `{raw}`"))
            }),
        }
    }

    fn require_value<T: std::str::FromStr>(&self, name: &str) -> CliResult<T> {
        let raw = self.require(name)?;
        raw.parse::<T>()
            .map_err(|_| CliError::Usage(format!("flag `--{name}`: cannot parse `{raw}`")))
    }
}

fn parse_f64_list(name: &str, raw: &str) -> CliResult<Vec<f64>> {
    raw.split(',')
        .map(|tok| {
            tok.trim()
                .parse::<f64>()
                .map_err(|_| CliError::Usage(format!("flag `--{name}`: bad number `{tok}`")))
        })
        .collect()
}

fn parse_usize_list(name: &str, raw: &str) -> CliResult<Vec<usize>> {
    raw.split(',')
        .map(|tok| {
            tok.trim()
                .parse::<usize>()
                .map_err(|_| CliError::Usage(format!("flag `--{name}`: bad count `{tok}`")))
        })
        .collect()
}

fn dispatch(args: &[String], out: &mut Vec<u8>) -> CliResult<()> {
    let Some(subcommand) = args.first() else {
        return Err(CliError::Usage("no subcommand".into()));
    };
    let rest = &args[1..];
    let threads = thread_count(rest)?;
    let body = move |out: &mut Vec<u8>| -> CliResult<()> {
        match subcommand.as_str() {
            "partition" => cmd_partition(rest, out),
            "extend" => cmd_extend(rest, out),
            "fit" => cmd_fit(rest, out),
            "predict" => cmd_predict(rest, out),
            "evaluate" => cmd_evaluate(rest, out),
            "tune" => cmd_tune(rest, out),
            "smoothness" => cmd_smoothness(rest, out),
            "synth" => cmd_synth(rest, out),
            "bench" => cmd_bench(rest, out),
            other => Err(CliError::Usage(format!("unknown subcommand `{other}`"))),
        }
    };
    match threads {
        None => body(out),
        Some(t) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(t)
                .build()
                .map_err(|e| CliError::Run(LigerError::Internal(e.to_string())))?;
            pool.install(move || body(out))
        }
    }
}

/// `--threads` wins over the `LIGER_THREADS` environment default.
fn thread_count(args: &[String]) -> CliResult<Option<usize>> {
    for (i, arg) in args.iter().enumerate() {
        if arg == "--threads" {
            let raw = args
                .get(i + 1)
                .ok_or_else(|| CliError::Usage("flag `--threads` needs a value".into()))?;
            let t: usize = raw
                .parse()
                .map_err(|_| CliError::Usage(format!("flag `--threads`: cannot parse `{raw}`")))?;
            return Ok(Some(t.max(1)));
        }
    }
    match std::env::var("LIGER_THREADS") {
        Ok(raw) => {
            let t: usize = raw.parse().map_err(|_| {
                CliError::Usage(format!("LIGER_THREADS: cannot parse `{raw}`"))
            })?;
            Ok(Some(t.max(1)))
        }
        Err(_) => Ok(None),
    }
}

fn metric_flag(flags: &Flags) -> CliResult<Metric> {
    match flags.get("metric") {
        None => Ok(Metric::Euclidean),
        Some(raw) => Metric::parse(raw).map_err(CliError::Run),
    }
}

fn load_config_or_default(flags: &Flags) -> CliResult<EngineConfig> {
    match flags.get("config") {
        None => Ok(EngineConfig::default()),
        Some(path) => Ok(io::load_config(Path::new(path))?),
    }
}

/// Radii from `--radii` (distances) or `--sim-thresholds` (cosine
/// similarities converted as `r = 1 - t`, cosine metric required).
fn radii_flags(flags: &Flags, metric: Metric, m: usize) -> CliResult<Option<Vec<f64>>> {
    match (flags.get("radii"), flags.get("sim-thresholds")) {
        (Some(_), Some(_)) => Err(CliError::Usage(
            "give either --radii or --sim-thresholds, not both".into(),
        )),
        (Some(raw), None) => {
            let radii = parse_f64_list("radii", raw)?;
            check_len("radii", &radii, m)?;
            Ok(Some(radii))
        }
        (None, Some(raw)) => {
            if metric != Metric::Cosine {
                return Err(CliError::Usage(
                    "--sim-thresholds requires the cosine metric".into(),
                ));
            }
            let thresholds = parse_f64_list("sim-thresholds", raw)?;
            check_len("sim-thresholds", &thresholds, m)?;
            Ok(Some(thresholds.into_iter().map(|t| 1.0 - t).collect()))
        }
        (None, None) => Ok(None),
    }
}

fn check_len(name: &str, list: &[f64], m: usize) -> CliResult<()> {
    if list.len() != m {
        return Err(CliError::Usage(format!(
            "flag `--{name}`: expected {m} comma-separated values, found {}",
            list.len()
        )));
    }
    Ok(())
}

fn cmd_partition(args: &[String], out: &mut dyn std::io::Write) -> CliResult<()> {
    let flags = Flags::parse(args, &["embeddings", "s", "seed", "out", "metric", "config", "threads"])?;
    let config = load_config_or_default(&flags)?;
    let metric = metric_flag(&flags)?;
    let emb = io::load_embeddings(&flags.path("embeddings")?, metric)?;
    let s: usize = flags.require_value("s")?;
    let seed: u64 = flags.require_value("seed")?;
    let run = kmeans_fit_with(&emb, s, seed, config.kmeans_max_iters, config.kmeans_tol)?;
    io::store_partition(&flags.path("out")?, &run.partition)?;
    let diameters = part_diameters(&emb, &run.partition)?;
    let _ = writeln!(out, "n={}", emb.n());
    let _ = writeln!(out, "s={s}");
    let _ = writeln!(out, "iterations={}", run.iterations);
    let _ = writeln!(out, "objective={}", run.objective_history.last().unwrap());
    let sizes: Vec<String> = run.partition.part_sizes().iter().map(|c| c.to_string()).collect();
    let _ = writeln!(out, "part_sizes={}", sizes.join(","));
    let _ = writeln!(out, "d_c={}", diameters.average);
    Ok(())
}

fn cmd_extend(args: &[String], out: &mut dyn std::io::Write) -> CliResult<()> {
    let flags = Flags::parse(
        args,
        &["embeddings", "votes", "radii", "sim-thresholds", "out", "metric", "threads"],
    )?;
    let metric = metric_flag(&flags)?;
    let emb = io::load_embeddings(&flags.path("embeddings")?, metric)?;
    let votes = io::load_votes(&flags.path("votes")?, emb.n())?;
    let radii = radii_flags(&flags, emb.metric(), votes.m())?
        .ok_or_else(|| CliError::Usage("missing required flag `--radii`".into()))?;
    let extended = extend_all(&emb, &votes, &radii)?;
    let out_path = flags.path("out")?;
    let prov_path = provenance_path(&out_path);
    io::store_extended_votes(&out_path, &prov_path, &extended)?;
    let delta = coverage_delta(&votes, &extended)?;
    let _ = writeln!(out, "coverage_before={}", delta.overall_before);
    let _ = writeln!(out, "coverage_after={}", delta.overall_after);
    let _ = writeln!(out, "coverage_delta={}", delta.overall_delta);
    for (i, d) in delta.per_source_delta.iter().enumerate() {
        let _ = writeln!(
            out,
            "source_{i}_coverage={} source_{i}_delta={}",
            delta.per_source_after[i], d
        );
    }
    Ok(())
}

fn provenance_path(votes_out: &Path) -> PathBuf {
    let mut name = votes_out.file_stem().unwrap_or_default().to_os_string();
    name.push(".prov.csv");
    votes_out.with_file_name(name)
}

fn cmd_fit(args: &[String], out: &mut dyn std::io::Write) -> CliResult<()> {
    let flags = Flags::parse(
        args,
        &[
            "embeddings", "votes", "config", "out", "seed", "s", "radii", "sim-thresholds",
            "metric", "dev-embeddings", "dev-labels", "threads",
        ],
    )?;
    let mut config = load_config_or_default(&flags)?;
    if let Some(seed) = flags.parse_value::<u64>("seed")? {
        config.seed = seed;
    }
    if let Some(s) = flags.parse_value::<usize>("s")? {
        config.s = s;
    }
    let metric = match flags.get("metric") {
        Some(raw) => Metric::parse(raw).map_err(CliError::Run)?,
        None => config.metric,
    };
    config.metric = metric;
    let emb = io::load_embeddings(&flags.path("embeddings")?, metric)?;
    let votes = io::load_votes(&flags.path("votes")?, emb.n())?;
    if let Some(radii) = radii_flags(&flags, emb.metric(), votes.m())? {
        config.radii = radii;
    }
    let radii = config.radii_for(votes.m())?;
    config.radii = radii.clone();

    let dev = load_dev(&flags, metric)?;
    let extended = extend_all(&emb, &votes, &radii)?;
    let model = fit(&emb, &extended, &config, dev.as_ref().map(|(e, l)| (e, l)))?;
    io::store_model(&flags.path("out")?, &model)?;

    let moment_table = crate::model::pairwise_agreements(&extended, model.partition())?;
    let _ = writeln!(out, "n={}", emb.n());
    let _ = writeln!(out, "m={}", votes.m());
    let _ = writeln!(out, "s={}", model.s());
    let sizes: Vec<String> = model
        .partition()
        .part_sizes()
        .iter()
        .map(|c| c.to_string())
        .collect();
    let _ = writeln!(out, "part_sizes={}", sizes.join(","));
    let _ = writeln!(out, "mean_accuracy={}", model.mean_accuracy());
    let _ = writeln!(out, "a_max={}", model.max_accuracy());
    let _ = writeln!(out, "p_min={}", model.min_mean_coverage());
    match moment_table.min_abs_agreement() {
        Some(b) => {
            let _ = writeln!(out, "b_min={b}");
        }
        None => {
            let _ = writeln!(out, "b_min=nan");
        }
    }
    Ok(())
}

fn load_dev(flags: &Flags, metric: Metric) -> CliResult<Option<(crate::data::EmbeddingDataset, LabelVector)>> {
    match (flags.get("dev-embeddings"), flags.get("dev-labels")) {
        (Some(e), Some(l)) => {
            let emb = io::load_embeddings(Path::new(e), metric)?;
            let labels = io::load_labels(Path::new(l))?;
            if labels.n() != emb.n() {
                return Err(CliError::Run(LigerError::shape(
                    "dev labels row count",
                    emb.n(),
                    labels.n(),
                )));
            }
            Ok(Some((emb, labels)))
        }
        (None, None) => Ok(None),
        _ => Err(CliError::Usage(
            "--dev-embeddings and --dev-labels must be given together".into(),
        )),
    }
}

fn cmd_predict(args: &[String], out: &mut dyn std::io::Write) -> CliResult<()> {
    let flags = Flags::parse(
        args,
        &[
            "model", "embeddings", "votes", "train-embeddings", "train-votes", "out", "metric",
            "threads",
        ],
    )?;
    let metric = metric_flag(&flags)?;
    let model = io::load_model(&flags.path("model")?)?;
    let emb = io::load_embeddings(&flags.path("embeddings")?, metric)?;
    let votes = io::load_votes(&flags.path("votes")?, emb.n())?;
    // Without explicit training inputs the prediction inputs double as the
    // extension support (the fit-then-predict-on-train case).
    let (train_emb, train_votes) = match (flags.get("train-embeddings"), flags.get("train-votes")) {
        (Some(e), Some(v)) => {
            let train_emb = io::load_embeddings(Path::new(e), metric)?;
            let train_votes = io::load_votes(Path::new(v), train_emb.n())?;
            (train_emb, train_votes)
        }
        (None, None) => (emb.clone(), votes.clone()),
        _ => {
            return Err(CliError::Usage(
                "--train-embeddings and --train-votes must be given together".into(),
            ))
        }
    };
    let predictions = model.predict(&train_emb, &train_votes, &emb, &votes)?;
    io::store_predictions(&flags.path("out")?, &predictions)?;
    let n = predictions.rows.len();
    let mean_posterior: f64 = predictions.rows.iter().map(|r| r.posterior).sum::<f64>() / n as f64;
    let positive = predictions.rows.iter().filter(|r| r.label == 1).count();
    let _ = writeln!(out, "n={n}");
    let _ = writeln!(out, "mean_posterior={mean_posterior}");
    let _ = writeln!(out, "positive_fraction={}", positive as f64 / n as f64);
    Ok(())
}

fn cmd_evaluate(args: &[String], out: &mut dyn std::io::Write) -> CliResult<()> {
    let flags = Flags::parse(args, &["predictions", "labels", "threads"])?;
    let predictions = io::load_predictions(&flags.path("predictions")?)?;
    let labels = io::load_labels(&flags.path("labels")?)?;
    let report = compute_metrics(&predictions.posteriors(), &labels)?;
    let _ = writeln!(out, "n={}", report.n_evaluated);
    let _ = writeln!(out, "accuracy={}", report.accuracy);
    let _ = writeln!(out, "f1={}", report.f1);
    let _ = writeln!(out, "cross_entropy={}", report.cross_entropy);
    Ok(())
}

fn cmd_tune(args: &[String], out: &mut dyn std::io::Write) -> CliResult<()> {
    let flags = Flags::parse(
        args,
        &[
            "embeddings", "votes", "dev-embeddings", "dev-votes", "dev-labels", "config",
            "r-grid", "s-max", "dev-metric", "seed", "metric", "out", "threads",
        ],
    )?;
    let mut config = load_config_or_default(&flags)?;
    if let Some(seed) = flags.parse_value::<u64>("seed")? {
        config.seed = seed;
    }
    let metric = match flags.get("metric") {
        Some(raw) => Metric::parse(raw).map_err(CliError::Run)?,
        None => config.metric,
    };
    let emb = io::load_embeddings(&flags.path("embeddings")?, metric)?;
    let votes = io::load_votes(&flags.path("votes")?, emb.n())?;
    let dev_emb = io::load_embeddings(&flags.path("dev-embeddings")?, metric)?;
    let dev_votes = io::load_votes(&flags.path("dev-votes")?, dev_emb.n())?;
    let dev_labels = io::load_labels(&flags.path("dev-labels")?)?;
    let r_grid = parse_f64_list("r-grid", flags.require("r-grid")?)?;
    let s_max = flags.parse_value::<usize>("s-max")?.unwrap_or(10);
    let dev_metric = match flags.get("dev-metric") {
        None => DevMetric::F1,
        Some(raw) => DevMetric::parse(raw).map_err(CliError::Run)?,
    };
    let result = tune(
        &emb, &votes, &dev_emb, &dev_votes, &dev_labels, &config, &r_grid, s_max, dev_metric,
    )?;
    if let Some(path) = flags.get("out") {
        std::fs::write(
            path,
            format!("{}\n", serde_json::to_string_pretty(&result).unwrap()),
        )
        .map_err(LigerError::from)?;
    }
    let radii: Vec<String> = result.radii.iter().map(|r| r.to_string()).collect();
    let _ = writeln!(out, "radii={}", radii.join(","));
    let _ = writeln!(out, "s={}", result.s);
    let _ = writeln!(out, "dev_metric={}", result.dev_metric);
    let _ = writeln!(out, "evaluations={}", result.search_trace.len());
    Ok(())
}

fn cmd_smoothness(args: &[String], out: &mut dyn std::io::Write) -> CliResult<()> {
    let flags = Flags::parse(
        args,
        &["embeddings", "votes", "labels", "r-grid", "out", "metric", "threads"],
    )?;
    let metric = metric_flag(&flags)?;
    let emb = io::load_embeddings(&flags.path("embeddings")?, metric)?;
    let votes = io::load_votes(&flags.path("votes")?, emb.n())?;
    let labels = io::load_labels(&flags.path("labels")?)?;
    if labels.n() != emb.n() {
        return Err(CliError::Run(LigerError::shape("labels row count", emb.n(), labels.n())));
    }
    let grid = parse_f64_list("r-grid", flags.require("r-grid")?)?;
    let report = smoothness_report(&emb, &labels, &votes, &grid)?;
    let mut csv = String::from("grid_value,label_curve,coverage_curve,pl_curve\n");
    for (i, g) in report.grid.iter().enumerate() {
        csv.push_str(&format!(
            "{},{},{},{}\n",
            g, report.label_curve[i], report.coverage_curve[i], report.pl_curve[i]
        ));
    }
    std::fs::write(flags.path("out")?, csv).map_err(LigerError::from)?;
    let _ = writeln!(out, "grid_points={}", report.grid.len());
    let _ = writeln!(out, "label_curve_max={}", fold_max(&report.label_curve));
    let _ = writeln!(out, "coverage_curve_max={}", fold_max(&report.coverage_curve));
    let _ = writeln!(out, "pl_curve_max={}", fold_max(&report.pl_curve));
    Ok(())
}

fn fold_max(values: &[f64]) -> f64 {
    values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
}

/// `synth` writes a bundle (embeddings/votes/labels) into `--out` (a
/// directory). Kinds: `pgm` (graphical-model sampler, placeholder zero
/// embeddings), `two-population` (membership coordinate as the embedding),
/// `checkerboard` (2-D coordinates).
fn cmd_synth(args: &[String], out: &mut dyn std::io::Write) -> CliResult<()> {
    let flags = Flags::parse(
        args,
        &[
            "kind", "seed", "out", "n", "n-each", "accuracies", "accuracies-b", "coverages",
            "balance", "grid-size", "pattern", "support-top", "support-fraction", "threads",
        ],
    )?;
    let kind = flags.require("kind")?;
    let seed: u64 = flags.require_value("seed")?;
    let out_dir = flags.path("out")?;
    std::fs::create_dir_all(&out_dir).map_err(LigerError::from)?;

    let accuracies = parse_f64_list("accuracies", flags.get("accuracies").unwrap_or("0.8,0.6,0.7"))?;
    let m = accuracies.len();
    let abstain_rates = match flags.get("coverages") {
        None => vec![0.0; m],
        Some(raw) => {
            let coverages = parse_f64_list("coverages", raw)?;
            check_len("coverages", &coverages, m)?;
            coverages.into_iter().map(|c| 1.0 - c).collect()
        }
    };
    let balance = flags.parse_value::<f64>("balance")?.unwrap_or(0.5);
    if !(balance > 0.0 && balance < 1.0) {
        return Err(CliError::Usage("--balance must lie strictly inside (0, 1)".into()));
    }
    let theta_y = 0.5 * (balance / (1.0 - balance)).ln();

    match kind {
        "pgm" => {
            let n: usize = flags.require_value("n")?;
            let spec = crate::synthetic::spec_from_accuracy(&accuracies, &abstain_rates, theta_y)?;
            let sample = sample_dataset(&spec, n, seed)?;
            let emb = crate::data::EmbeddingDataset::new(vec![0.0; n], 1, Metric::Euclidean)?;
            write_bundle(&out_dir, &emb, &sample.votes, &sample.labels)?;
            let accs: Vec<String> = sample.true_accuracies.iter().map(|a| a.to_string()).collect();
            let _ = writeln!(out, "n={n}");
            let _ = writeln!(out, "true_accuracies={}", accs.join(","));
        }
        "two-population" => {
            let n_each: usize = flags.require_value("n-each")?;
            let spec_a = crate::synthetic::spec_from_accuracy(&accuracies, &abstain_rates, theta_y)?;
            let acc_b = match flags.get("accuracies-b") {
                None => accuracies.clone(),
                Some(raw) => {
                    let list = parse_f64_list("accuracies-b", raw)?;
                    check_len("accuracies-b", &list, m)?;
                    list
                }
            };
            let spec_b = crate::synthetic::spec_from_accuracy(&acc_b, &abstain_rates, theta_y)?;
            let bundle = two_population_dataset(&spec_a, &spec_b, n_each, seed)?;
            let coords: Vec<f32> = bundle.membership.iter().map(|&f| f as f32).collect();
            let emb = crate::data::EmbeddingDataset::new(coords, 1, Metric::Euclidean)?;
            write_bundle(&out_dir, &emb, &bundle.votes, &bundle.labels)?;
            let _ = writeln!(out, "n={}", 2 * n_each);
        }
        "checkerboard" => {
            let n: usize = flags.require_value("n")?;
            let spec = checkerboard_spec_from_flags(&flags, n, seed, &accuracies)?;
            let task = checkerboard_task(&spec)?;
            write_bundle(&out_dir, &task.embeddings, &task.votes, &task.labels)?;
            let _ = writeln!(out, "n={n}");
        }
        other => {
            return Err(CliError::Usage(format!(
                "unknown synth kind `{other}` (expected pgm, two-population, checkerboard)"
            )));
        }
    }
    let _ = writeln!(out, "out_dir={}", out_dir.display());
    Ok(())
}

/// Default checkerboard layout: source 0 extendable on a scattered support
/// covering `--support-fraction` of points (default 0.04); `--support-top`
/// switches it to the band `y < top`. Remaining sources are full-support.
fn checkerboard_spec_from_flags(
    flags: &Flags,
    n: usize,
    seed: u64,
    accuracies: &[f64],
) -> CliResult<CheckerboardTaskSpec> {
    let pattern = match flags.get("pattern") {
        None | Some("checkerboard") => {
            let g: u32 = flags.parse_value::<u32>("grid-size")?.unwrap_or(10);
            LabelPattern::Checkerboard { g }
        }
        Some("random") => LabelPattern::Random,
        Some(other) => {
            return Err(CliError::Usage(format!(
                "unknown pattern `{other}` (expected checkerboard or random)"
            )));
        }
    };
    let extendable_support = match (
        flags.parse_value::<f64>("support-top")?,
        flags.parse_value::<f64>("support-fraction")?,
    ) {
        (Some(_), Some(_)) => {
            return Err(CliError::Usage(
                "give either --support-top or --support-fraction, not both".into(),
            ));
        }
        (Some(top), None) => SupportRegion::Rect {
            x_min: 0.0,
            y_min: 0.0,
            x_max: 1.0,
            y_max: top,
        },
        (None, fraction) => SupportRegion::RandomFraction(fraction.unwrap_or(0.04)),
    };
    let sources = accuracies
        .iter()
        .enumerate()
        .map(|(i, &accuracy)| CheckerboardSource {
            support: if i == 0 {
                extendable_support
            } else {
                SupportRegion::Full
            },
            accuracy,
            extendable: i == 0,
        })
        .collect();
    Ok(CheckerboardTaskSpec {
        n,
        pattern,
        seed,
        sources,
    })
}

fn write_bundle(
    dir: &Path,
    emb: &crate::data::EmbeddingDataset,
    votes: &crate::data::VoteMatrix,
    labels: &LabelVector,
) -> CliResult<()> {
    io::store_embeddings(&dir.join("embeddings.lgem"), emb)?;
    io::store_votes(&dir.join("votes.csv"), votes)?;
    io::store_labels(&dir.join("labels.csv"), labels)?;
    Ok(())
}

fn cmd_bench(args: &[String], out: &mut dyn std::io::Write) -> CliResult<()> {
    let flags = Flags::parse(
        args,
        &[
            "kind", "seed", "seeds", "out", "s", "n", "n-each", "accuracies", "accuracies-b",
            "r-grid", "grid-size", "variants", "support-top", "support-fraction", "threads",
        ],
    )?;
    let kind = flags.require("kind")?;
    let seed: u64 = flags.require_value("seed")?;
    let out_path = flags.path("out")?;
    match kind {
        "bias-variance" => {
            let n_each = flags.parse_value::<usize>("n-each")?.unwrap_or(1000);
            let n_seeds = flags.parse_value::<usize>("seeds")?.unwrap_or(10);
            let s_list = parse_usize_list("s", flags.get("s").unwrap_or("1,2,4,8"))?;
            let acc_a = parse_f64_list("accuracies", flags.get("accuracies").unwrap_or("0.9,0.8,0.7"))?;
            let acc_b = parse_f64_list(
                "accuracies-b",
                flags.get("accuracies-b").unwrap_or("0.35,0.45,0.55"),
            )?;
            let spec_a = crate::synthetic::spec_from_accuracy(&acc_a, &vec![0.0; acc_a.len()], 0.0)?;
            let spec_b = crate::synthetic::spec_from_accuracy(&acc_b, &vec![0.0; acc_b.len()], 0.0)?;
            let rows = bench_bias_variance(&spec_a, &spec_b, n_each, &s_list, n_seeds, seed)?;
            let mut csv = String::from("s,mean,ci_lo,ci_hi\n");
            for row in &rows {
                csv.push_str(&format!("{},{},{},{}\n", row.s, row.mean, row.ci_lo, row.ci_hi));
            }
            std::fs::write(&out_path, csv).map_err(LigerError::from)?;
            for row in &rows {
                let _ = writeln!(out, "s={} mean={} ci_lo={} ci_hi={}", row.s, row.mean, row.ci_lo, row.ci_hi);
            }
        }
        "extension" => {
            let n = flags.parse_value::<usize>("n")?.unwrap_or(10_000);
            let r_grid = match flags.get("r-grid") {
                Some(raw) => parse_f64_list("r-grid", raw)?,
                None => (0..=20).map(|i| i as f64 * 0.005).collect(),
            };
            let base_acc = parse_f64_list("accuracies", flags.get("accuracies").unwrap_or("0.89,0.55,0.5"))?;
            let base = checkerboard_spec_from_flags(&flags, n, seed, &base_acc)?;
            let variants = match flags.get("variants") {
                None | Some("accuracies") => {
                    ExtensionVariants::Accuracies(vec![0.89, 0.74, 0.62, 0.53])
                }
                Some("granularity") => ExtensionVariants::Patterns(vec![
                    LabelPattern::Checkerboard { g: 2 },
                    LabelPattern::Checkerboard { g: 10 },
                    LabelPattern::Random,
                ]),
                Some(raw) => ExtensionVariants::Accuracies(parse_f64_list("variants", raw)?),
            };
            let curves = bench_extension(&base, &r_grid, &variants)?;
            let mut csv = String::from("r,variant,cross_entropy\n");
            for curve in &curves {
                for point in &curve.points {
                    csv.push_str(&format!("{},{},{}\n", point.r, curve.variant, point.cross_entropy));
                }
            }
            std::fs::write(&out_path, csv).map_err(LigerError::from)?;
            for curve in &curves {
                let best = curve
                    .points
                    .iter()
                    .map(|p| p.cross_entropy)
                    .fold(f64::INFINITY, f64::min);
                let _ = writeln!(
                    out,
                    "variant={} baseline={} best={}",
                    curve.variant, curve.points[0].cross_entropy, best
                );
            }
        }
        other => {
            return Err(CliError::Usage(format!(
                "unknown bench kind `{other}` (expected bias-variance, extension)"
            )));
        }
    }
    let _ = writeln!(out, "out={}", out_path.display());
    Ok(())
}
