use anyhow::Result;
use clap::Args;
use gvec_core::bench::{bench_decode, synth_heatmap, Spike, SynthSpec};
use gvec_core::codec::HeatmapStack;
use gvec_core::io::{write_bench_report, write_tensor, Tensor};
use gvec_core::Point2;

use crate::config::{parse_list, RunConfig};
use crate::fsutil::{write_atomic, write_or_print};
use crate::Failures;

#[derive(Debug, Args)]
pub struct BenchArgs {
    #[arg(long, value_delimiter = ',', default_value = "32,64,128,256,512")]
    pub sizes: Vec<usize>,
    #[arg(long, default_value_t = 68)]
    pub landmarks: usize,
    #[arg(long, default_value_t = 5)]
    pub trials: usize,
}

pub fn run_bench(args: &BenchArgs, cfg: &RunConfig) -> Result<Failures> {
    let report = bench_decode(&args.sizes, args.landmarks, args.trials)?;
    for row in &report.rows {
        eprintln!(
            "N={:<4} ops {} vs {}  wall {} ns vs {} ns  bytes {} vs {}",
            row.n,
            row.ops_2d,
            row.ops_vec,
            row.wall_2d_ns,
            row.wall_vec_ns,
            row.bytes_2d,
            row.bytes_vec
        );
    }
    write_or_print(cfg.out.as_deref(), &write_bench_report(&report)?)?;
    Ok(Failures::default())
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    #[arg(long, default_value_t = 64)]
    pub width: usize,
    #[arg(long, default_value_t = 64)]
    pub height: usize,
    /// Peak column; defaults to the grid centre.
    #[arg(long)]
    pub cx: Option<f64>,
    /// Peak row; defaults to the grid centre.
    #[arg(long)]
    pub cy: Option<f64>,
    #[arg(long, default_value_t = 1.0)]
    pub amplitude: f64,
    /// Upper bound of the uniform noise added to every element.
    #[arg(long, default_value_t = 0.0)]
    pub noise: f64,
    /// Measure distance from the exact centre instead of its quantized cell.
    #[arg(long)]
    pub subpixel: bool,
    /// Added impulse as `col,row,magnitude`.
    #[arg(long, value_parser = parse_spike)]
    pub spike: Option<[f64; 3]>,
}

fn parse_spike(s: &str) -> std::result::Result<[f64; 3], String> {
    parse_list(s)
}

pub fn run_synth(args: &SynthArgs, cfg: &RunConfig) -> Result<Failures> {
    let out = cfg.out_or("synth")?;
    let center = Point2::new(
        args.cx.unwrap_or(args.width as f64 / 2.0),
        args.cy.unwrap_or(args.height as f64 / 2.0),
    );
    let mut spec = SynthSpec::new(args.width, args.height, center);
    spec.amplitude = args.amplitude;
    spec.label = cfg.label;
    spec.subpixel = args.subpixel;
    spec.noise = args.noise;
    spec.seed = cfg.seed;
    if let Some(s) = &args.spike {
        anyhow::ensure!(
            s[0] >= 0.0 && s[1] >= 0.0,
            "spike position must be non-negative"
        );
        spec.spike = Some(Spike {
            col: s[0] as usize,
            row: s[1] as usize,
            magnitude: s[2],
        });
    }
    let stack = HeatmapStack::from_channels(&[synth_heatmap(&spec)?])?;
    write_atomic(out, &write_tensor(&Tensor::from_heatmap_stack(&stack)))?;
    Ok(Failures::default())
}
