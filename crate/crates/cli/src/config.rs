use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::{Args, ValueEnum};
use gvec_core::bpm::BpmConfig;
use gvec_core::codec::LabelConfig;
use gvec_core::decode::DecodeConfig;
use gvec_core::io::PtsOrigin;
use gvec_core::metrics::{NormKind, DEFAULT_AUC_THRESHOLD, DEFAULT_FR_THRESHOLD};
use serde::Deserialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NormArg {
    Ipn,
    Ion,
    BboxGm,
}

impl NormArg {
    pub fn kind(self) -> NormKind {
        match self {
            NormArg::Ipn => NormKind::InterPupil,
            NormArg::Ion => NormKind::InterOcular,
            NormArg::BboxGm => NormKind::BboxGeometricMean,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OriginArg {
    Zero,
    One,
}

impl From<OriginArg> for PtsOrigin {
    fn from(o: OriginArg) -> Self {
        match o {
            OriginArg::Zero => PtsOrigin::Zero,
            OriginArg::One => PtsOrigin::One,
        }
    }
}

/// Parses `n1,n2,...` into exactly `N` numbers.
pub fn parse_list<T: std::str::FromStr, const N: usize>(
    s: &str,
) -> std::result::Result<[T; N], String> {
    let parts: Vec<T> = s
        .split(',')
        .map(|p| {
            p.trim()
                .parse::<T>()
                .map_err(|_| format!("invalid number '{p}'"))
        })
        .collect::<std::result::Result<_, _>>()?;
    parts
        .try_into()
        .map_err(|v: Vec<T>| format!("expected {N} comma-separated values, got {}", v.len()))
}

fn parse_bandwidths(s: &str) -> std::result::Result<[usize; 2], String> {
    parse_list(s)
}

/// Flags shared by every subcommand. Each one overrides the same key in `--config`.
#[derive(Debug, Args)]
pub struct SharedArgs {
    /// JSON file with the same keys as the flags (snake_case).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true)]
    pub sigma: Option<f64>,
    #[arg(long, global = true)]
    pub theta: Option<f64>,
    /// Two odd band widths, e.g. `3,5`.
    #[arg(long, global = true, value_parser = parse_bandwidths)]
    pub bandwidths: Option<[usize; 2]>,
    #[arg(long, global = true)]
    pub alpha: Option<f64>,
    #[arg(long, global = true)]
    pub tau: Option<f64>,
    #[arg(long, global = true)]
    pub shift_delta: Option<f64>,
    /// Same as `--shift-delta 0`.
    #[arg(long, global = true, conflicts_with = "shift_delta")]
    pub no_shift: bool,
    #[arg(long, global = true, overrides_with = "no_beyond_box")]
    pub beyond_box: bool,
    #[arg(long, global = true, overrides_with = "beyond_box")]
    pub no_beyond_box: bool,
    #[arg(long, global = true, value_enum)]
    pub norm: Option<NormArg>,
    #[arg(long, global = true)]
    pub auc_t: Option<f64>,
    #[arg(long, global = true)]
    pub fr_t: Option<f64>,
    #[arg(long, global = true, value_enum)]
    pub pts_origin: Option<OriginArg>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Output file or directory, depending on the subcommand.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Exit 0 even when some samples fail.
    #[arg(long, global = true)]
    pub keep_going: bool,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    sigma: Option<f64>,
    theta: Option<f64>,
    bandwidths: Option<[usize; 2]>,
    alpha: Option<f64>,
    tau: Option<f64>,
    shift_delta: Option<f64>,
    beyond_box: Option<bool>,
    norm: Option<NormArg>,
    auc_t: Option<f64>,
    fr_t: Option<f64>,
    pts_origin: Option<OriginArg>,
    seed: Option<u64>,
    out: Option<PathBuf>,
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub label: LabelConfig,
    pub bpm: BpmConfig,
    pub decode: DecodeConfig,
    pub norm: NormArg,
    pub auc_t: f64,
    pub fr_t: f64,
    pub pts_origin: PtsOrigin,
    pub seed: u64,
    pub out: Option<PathBuf>,
    pub keep_going: bool,
}

impl RunConfig {
    pub fn resolve(args: &SharedArgs) -> Result<Self> {
        let file = match &args.config {
            Some(path) => {
                let text = std::fs::read_to_string(path)
                    .with_context(|| format!("reading config {}", path.display()))?;
                serde_json::from_str::<FileConfig>(&text)
                    .with_context(|| format!("parsing config {}", path.display()))?
            }
            None => FileConfig::default(),
        };
        let default_label = LabelConfig::default();
        let label = LabelConfig::new(
            args.sigma.or(file.sigma).unwrap_or(default_label.sigma()),
            args.theta.or(file.theta).unwrap_or(default_label.theta()),
            default_label.cutoff_multiplier(),
        )?;
        let default_bpm = BpmConfig::default();
        let [a, b] = args
            .bandwidths
            .or(file.bandwidths)
            .unwrap_or([default_bpm.bandwidth_a(), default_bpm.bandwidth_b()]);
        let bpm = BpmConfig::new(
            a,
            b,
            args.alpha.or(file.alpha).unwrap_or(default_bpm.alpha()),
        )?;
        let default_decode = DecodeConfig::default();
        let shift = if args.no_shift {
            Some(0.0)
        } else {
            args.shift_delta
        };
        let beyond = if args.beyond_box {
            Some(true)
        } else if args.no_beyond_box {
            Some(false)
        } else {
            file.beyond_box
        };
        let decode = DecodeConfig::new(
            shift
                .or(file.shift_delta)
                .unwrap_or(default_decode.shift_delta()),
            beyond.unwrap_or(default_decode.beyond_box_enabled()),
            args.tau.or(file.tau).unwrap_or(default_decode.tau()),
            label.sigma(),
        )?;
        Ok(Self {
            label,
            bpm,
            decode,
            norm: args.norm.or(file.norm).unwrap_or(NormArg::Ion),
            auc_t: args.auc_t.or(file.auc_t).unwrap_or(DEFAULT_AUC_THRESHOLD),
            fr_t: args.fr_t.or(file.fr_t).unwrap_or(DEFAULT_FR_THRESHOLD),
            pts_origin: args
                .pts_origin
                .or(file.pts_origin)
                .map(Into::into)
                .unwrap_or_default(),
            seed: args.seed.or(file.seed).unwrap_or(0),
            out: args.out.clone().or(file.out),
            keep_going: args.keep_going,
        })
    }

    pub fn out_or(&self, name: &str) -> Result<&PathBuf> {
        self.out
            .as_ref()
            .with_context(|| format!("--out is required for {name}"))
    }
}
