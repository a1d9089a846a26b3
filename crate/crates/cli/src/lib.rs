//! Command-line surface over the library: data generation, training,
//! evaluation, domain-graph compression, embedding export, and the 2-D
//! separation study. Exit codes: 0 success, 1 validation error, 2 I/O error.

pub mod commands;
pub mod config;
pub mod error;
pub mod files;

use std::path::PathBuf;

use help_core::models::Side;

use crate::config::Config;
use crate::error::CliError;

const USAGE: &str = "\
usage: help-cli <command> [flags]

commands:
  generate            write a synthetic dataset (--config, --out, [--seed])
  train               train and evaluate a model (--config, --data, --out, [--seed])
  evaluate            score a checkpoint on the test split (--data, --checkpoint, --out)
  compress            project an edge list to the domain-domain graph (--input, --out)
  export-embeddings   embed a feature table with a HELP checkpoint
                      (--checkpoint, --features, --side user|domain, --out)
  separation-study    score user-group separation in 2-D
                      (--embeddings, --heldout-edges, --heldout-labels, --out,
                       [--seed], [--threshold])

common flags:
  --config PATH   flat `key = value` file; every key has a default
  --seed N        override the config seed
  --out DIR       output directory (must exist)
";

#[derive(Debug, Default)]
struct Args {
    config: Option<PathBuf>,
    seed: Option<u64>,
    out: Option<PathBuf>,
    data: Option<PathBuf>,
    input: Option<PathBuf>,
    checkpoint: Option<PathBuf>,
    features: Option<PathBuf>,
    embeddings: Option<PathBuf>,
    heldout_edges: Option<PathBuf>,
    heldout_labels: Option<PathBuf>,
    side: Option<String>,
    threshold: Option<f64>,
}

fn parse_args(args: &[String]) -> Result<Args, CliError> {
    let mut parsed = Args::default();
    let mut it = args.iter();
    while let Some(flag) = it.next() {
        let mut value = |name: &str| -> Result<String, CliError> {
            it.next()
                .cloned()
                .ok_or_else(|| CliError::validation(format!("flag {name} needs a value")))
        };
        match flag.as_str() {
            "--config" => parsed.config = Some(value("--config")?.into()),
            "--seed" => {
                let raw = value("--seed")?;
                parsed.seed = Some(raw.parse().map_err(|_| {
                    CliError::validation(format!("--seed must be an integer, got `{raw}`"))
                })?);
            }
            "--out" => parsed.out = Some(value("--out")?.into()),
            "--data" => parsed.data = Some(value("--data")?.into()),
            "--input" => parsed.input = Some(value("--input")?.into()),
            "--checkpoint" => parsed.checkpoint = Some(value("--checkpoint")?.into()),
            "--features" => parsed.features = Some(value("--features")?.into()),
            "--embeddings" => parsed.embeddings = Some(value("--embeddings")?.into()),
            "--heldout-edges" => parsed.heldout_edges = Some(value("--heldout-edges")?.into()),
            "--heldout-labels" => parsed.heldout_labels = Some(value("--heldout-labels")?.into()),
            "--side" => parsed.side = Some(value("--side")?),
            "--threshold" => {
                let raw = value("--threshold")?;
                parsed.threshold = Some(raw.parse().map_err(|_| {
                    CliError::validation(format!("--threshold must be a number, got `{raw}`"))
                })?);
            }
            other => return Err(CliError::validation(format!("unknown flag `{other}`"))),
        }
    }
    Ok(parsed)
}

fn require<T>(value: Option<T>, flag: &str, command: &str) -> Result<T, CliError> {
    value.ok_or_else(|| CliError::validation(format!("{command} requires {flag}")))
}

/// Dispatch a full command line (without the binary name).
pub fn run(args: &[String]) -> Result<(), CliError> {
    let Some((command, rest)) = args.split_first() else {
        return Err(CliError::validation(USAGE));
    };
    let args = parse_args(rest)?;
    let mut config = match &args.config {
        Some(path) => Config::load(path)?,
        None => Config::empty(),
    };
    if let Some(seed) = args.seed {
        config.override_seed(seed);
    }

    match command.as_str() {
        "generate" => {
            let out = require(args.out, "--out", "generate")?;
            commands::generate::run(&config, &out)
        }
        "train" => {
            let data = require(args.data, "--data", "train")?;
            let out = require(args.out, "--out", "train")?;
            commands::train::run(&config, &data, &out)
        }
        "evaluate" => {
            let data = require(args.data, "--data", "evaluate")?;
            let checkpoint = require(args.checkpoint, "--checkpoint", "evaluate")?;
            let out = require(args.out, "--out", "evaluate")?;
            commands::evaluate::run(&data, &checkpoint, &out)
        }
        "compress" => {
            let input = require(args.input, "--input", "compress")?;
            let out = require(args.out, "--out", "compress")?;
            commands::compress::run(&input, &out)
        }
        "export-embeddings" => {
            let checkpoint = require(args.checkpoint, "--checkpoint", "export-embeddings")?;
            let features = require(args.features, "--features", "export-embeddings")?;
            let out = require(args.out, "--out", "export-embeddings")?;
            let side_raw = require(args.side, "--side", "export-embeddings")?;
            let side = Side::from_name(&side_raw).ok_or_else(|| {
                CliError::validation(format!("--side must be user or domain, got `{side_raw}`"))
            })?;
            commands::export::run(&checkpoint, &features, side, &out)
        }
        "separation-study" => {
            let embeddings = require(args.embeddings, "--embeddings", "separation-study")?;
            let heldout_edges =
                require(args.heldout_edges, "--heldout-edges", "separation-study")?;
            let heldout_labels =
                require(args.heldout_labels, "--heldout-labels", "separation-study")?;
            let out = require(args.out, "--out", "separation-study")?;
            commands::separation::run(
                &embeddings,
                &heldout_edges,
                &heldout_labels,
                args.threshold.unwrap_or(5.0),
                args.seed.unwrap_or(0),
                &out,
            )
        }
        "help" | "--help" | "-h" => {
            println!("{USAGE}");
            Ok(())
        }
        other => Err(CliError::validation(format!("unknown command `{other}`\n\n{USAGE}"))),
    }
}
