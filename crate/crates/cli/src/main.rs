mod bench;
mod config;
mod decode;
mod encode;
mod eval;
mod fsutil;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use crate::config::SharedArgs;

/// Gaussian Vector landmark codec toolkit.
#[derive(Debug, Parser)]
#[command(name = "gvec", version, about)]
struct Cli {
    #[command(flatten)]
    shared: SharedArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Encode .pts annotations into vector label tensors.
    Encode(encode::EncodeArgs),
    /// Decode heatmap or vector tensors into image-space landmarks.
    Decode(decode::DecodeArgs),
    /// Score predictions against ground truth.
    Eval(eval::EvalArgs),
    /// Compare 2D and vector decoding cost.
    Bench(bench::BenchArgs),
    /// Write a synthetic heatmap tensor.
    Synth(bench::SynthArgs),
}

/// Per-sample failures collected by batch commands.
#[derive(Debug, Default)]
pub struct Failures(pub Vec<(PathBuf, anyhow::Error)>);

impl Failures {
    pub fn collect(missing: Vec<PathBuf>, results: Vec<(PathBuf, anyhow::Result<()>)>) -> Self {
        let mut all: Vec<_> = missing
            .into_iter()
            .map(|p| (p, anyhow::anyhow!("file not found")))
            .collect();
        all.extend(
            results
                .into_iter()
                .filter_map(|(p, r)| r.err().map(|e| (p, e))),
        );
        Self(all)
    }

    fn report(&self) {
        for (path, err) in &self.0 {
            eprintln!("error: {}: {err:#}", path.display());
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = config::RunConfig::resolve(&cli.shared).and_then(|cfg| match &cli.command {
        Command::Encode(a) => encode::run(a, &cfg),
        Command::Decode(a) => decode::run(a, &cfg),
        Command::Eval(a) => eval::run(a, &cfg),
        Command::Bench(a) => bench::run_bench(a, &cfg),
        Command::Synth(a) => bench::run_synth(a, &cfg),
    });
    match result {
        Ok(failures) => {
            failures.report();
            if failures.0.is_empty() || cli.shared.keep_going {
                ExitCode::SUCCESS
            } else {
                eprintln!("{} sample(s) failed", failures.0.len());
                ExitCode::FAILURE
            }
        }
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::FAILURE
        }
    }
}
