use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, ValueEnum};
use gvec_core::bpm::bpm_apply;
use gvec_core::decode::{decode_pair, AxisStatus};
use gvec_core::io::{read_tensor, write_pts, PtsFile};
use gvec_core::{LandmarkSet, Space};
use rayon::prelude::*;
use serde::Serialize;

use crate::config::RunConfig;
use crate::encode::CropArgs;
use crate::fsutil::{output_path, read_manifest, write_atomic, Sample};
use crate::Failures;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TensorKind {
    /// Vector layout when the shape is (L, side, 2), heatmap otherwise.
    Auto,
    Heatmap,
    Vector,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    Pts,
    Json,
}

#[derive(Debug, Args)]
pub struct DecodeArgs {
    /// CSV with header `path,x,y,width,height`; one GVT tensor and face box per row.
    pub manifest: PathBuf,
    #[arg(long, value_enum, default_value = "auto")]
    pub kind: TensorKind,
    #[arg(long, value_enum, default_value = "pts")]
    pub format: OutputFormat,
    #[command(flatten)]
    pub crop: CropArgs,
}

#[derive(Debug, Serialize)]
struct JsonPoint {
    x: f64,
    y: f64,
    x_status: AxisStatus,
    y_status: AxisStatus,
}

pub fn run(args: &DecodeArgs, cfg: &RunConfig) -> Result<Failures> {
    let out = cfg.out_or("decode")?;
    let (samples, missing) = read_manifest(&args.manifest, cfg.keep_going)?;
    let results = samples
        .par_iter()
        .map(|s| (s.path.clone(), decode_sample(s, args, cfg, out)))
        .collect();
    Ok(Failures::collect(missing, results))
}

fn decode_sample(s: &Sample, args: &DecodeArgs, cfg: &RunConfig, out: &Path) -> Result<()> {
    let bytes = std::fs::read(&s.path).with_context(|| format!("reading {}", s.path.display()))?;
    let tensor = read_tensor(&bytes)?;
    let t = args.crop.transform(s)?;
    let side = t.heatmap_side();
    let vector = match args.kind {
        TensorKind::Auto => tensor.is_vector_layout(),
        TensorKind::Heatmap => false,
        TensorKind::Vector => true,
    };
    let pairs = if vector {
        tensor.to_vector_pairs()?
    } else {
        let stack = tensor.to_heatmap_stack()?;
        if stack.height() != side || stack.width() != side {
            bail!(
                "heatmap is {}x{} but the crop transform expects {side}x{side}",
                stack.height(),
                stack.width()
            );
        }
        bpm_apply(&stack, &cfg.bpm)?
    };
    if let Some(p) = pairs.first() {
        if p.x.len() != side {
            bail!(
                "vector length {} does not match heatmap side {side}",
                p.x.len()
            );
        }
    }
    let decoded = pairs
        .iter()
        .map(|p| decode_pair(p, &cfg.decode))
        .collect::<gvec_core::Result<Vec<_>>>()?;
    let points: Vec<_> = decoded
        .iter()
        .map(|d| t.to_image_space(d.point()))
        .collect();
    match args.format {
        OutputFormat::Pts => {
            let set = LandmarkSet::new(Space::Image, points);
            let text = write_pts(&PtsFile::from_landmarks(&set, cfg.pts_origin));
            write_atomic(&output_path(out, &s.path, "pts"), text.as_bytes())
        }
        OutputFormat::Json => {
            let rows: Vec<JsonPoint> = decoded
                .iter()
                .zip(points)
                .map(|(d, p)| JsonPoint {
                    x: p.x,
                    y: p.y,
                    x_status: d.x_status,
                    y_status: d.y_status,
                })
                .collect();
            let text = serde_json::to_string_pretty(&rows)?;
            write_atomic(&output_path(out, &s.path, "json"), text.as_bytes())
        }
    }
}
