use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use clap::Args;
use gvec_core::bench::synth_vector;
use gvec_core::codec::{encode_vector_label, quantize, GaussianVectorPair};
use gvec_core::geometry::{CropTransform, DEFAULT_HEATMAP_STRIDE, DEFAULT_INPUT_SIZE};
use gvec_core::io::{read_pts, write_tensor, Tensor};
use rayon::prelude::*;

use crate::config::RunConfig;
use crate::fsutil::{output_path, read_manifest, write_atomic, Sample};
use crate::Failures;

#[derive(Debug, Args)]
pub struct EncodeArgs {
    /// CSV with header `path,x,y,width,height`; one .pts file and face box per row.
    pub manifest: PathBuf,
    #[command(flatten)]
    pub crop: CropArgs,
}

#[derive(Debug, Clone, Copy, Args)]
pub struct CropArgs {
    /// Fractional enlargement applied to the squared face box.
    #[arg(long, default_value_t = 0.0)]
    pub enlarge: f64,
    #[arg(long, default_value_t = DEFAULT_INPUT_SIZE)]
    pub input_size: u32,
    #[arg(long, default_value_t = DEFAULT_HEATMAP_STRIDE)]
    pub stride: u32,
}

impl CropArgs {
    pub fn transform(&self, s: &Sample) -> Result<CropTransform> {
        Ok(CropTransform::from_face_box(
            &s.face,
            self.enlarge,
            self.input_size,
            self.stride,
        )?)
    }
}

pub fn run(args: &EncodeArgs, cfg: &RunConfig) -> Result<Failures> {
    let out = cfg.out_or("encode")?;
    let (samples, missing) = read_manifest(&args.manifest, cfg.keep_going)?;
    let results = samples
        .par_iter()
        .map(|s| (s.path.clone(), encode_sample(s, &args.crop, cfg, out)))
        .collect();
    Ok(Failures::collect(missing, results))
}

fn encode_sample(s: &Sample, crop: &CropArgs, cfg: &RunConfig, out: &Path) -> Result<()> {
    let text = std::fs::read_to_string(&s.path)
        .with_context(|| format!("reading {}", s.path.display()))?;
    let landmarks = read_pts(&text)?.to_landmarks(cfg.pts_origin);
    let t = crop.transform(s)?;
    let side = t.heatmap_side();
    let pairs: Vec<GaussianVectorPair> = landmarks
        .points
        .iter()
        .enumerate()
        .map(|(k, p)| {
            let h = t.to_heatmap_space(*p);
            let mut pair = match encode_vector_label(h, side, side, &cfg.label) {
                Ok(pair) => pair,
                Err(gvec_core::Error::OutOfGrid { .. }) => {
                    eprintln!(
                        "warning: {}: landmark {k} at heatmap ({:.2}, {:.2}) lies outside the {side}x{side} grid; \
                         label truncated (beyond-box)",
                        s.path.display(),
                        h.x,
                        h.y
                    );
                    GaussianVectorPair::new(
                        synth_vector(side, quantize(h.x) as f64, 1.0, &cfg.label, false),
                        synth_vector(side, quantize(h.y) as f64, 1.0, &cfg.label, false),
                        k,
                    )
                }
                Err(e) => return Err(e),
            };
            pair.landmark_index = k;
            Ok(pair)
        })
        .collect::<gvec_core::Result<_>>()
        .with_context(|| format!("encoding {}", s.path.display()))?;
    let tensor = Tensor::from_vector_pairs(&pairs)?;
    write_atomic(&output_path(out, &s.path, "gvt"), &write_tensor(&tensor))
}
