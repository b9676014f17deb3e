use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::Args;
use gvec_core::io::{read_pts, write_report};
use gvec_core::metrics::{nme, normalization_distance, EvalReport, NormScheme};
use gvec_core::LandmarkSet;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::RunConfig;
use crate::fsutil::write_or_print;
use crate::Failures;

#[derive(Debug, Args)]
pub struct EvalArgs {
    /// Directory of predicted .pts files.
    pub pred: PathBuf,
    /// Directory of ground-truth .pts files with matching names.
    pub gt: PathBuf,
    /// CSV with header `name,tag` assigning files to named subsets.
    #[arg(long)]
    pub tags: Option<PathBuf>,
}

#[derive(Debug, Deserialize)]
struct TagRow {
    name: String,
    tag: String,
}

#[derive(Debug, Serialize)]
struct TaggedReport {
    overall: EvalReport,
    subsets: BTreeMap<String, EvalReport>,
}

fn pts_names(dir: &Path) -> Result<BTreeSet<String>> {
    let mut names = BTreeSet::new();
    for entry in std::fs::read_dir(dir).with_context(|| format!("listing {}", dir.display()))? {
        let path = entry?.path();
        if path.extension().is_some_and(|e| e == "pts") {
            if let Some(name) = path.file_name() {
                names.insert(name.to_string_lossy().into_owned());
            }
        }
    }
    Ok(names)
}

fn load(path: &Path, cfg: &RunConfig) -> Result<LandmarkSet> {
    let text =
        std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(read_pts(&text)
        .with_context(|| format!("parsing {}", path.display()))?
        .to_landmarks(cfg.pts_origin))
}

fn score(pred: &Path, gt: &Path, cfg: &RunConfig) -> Result<f64> {
    let (p, g) = (load(pred, cfg)?, load(gt, cfg)?);
    let scheme = NormScheme::preset(cfg.norm.kind(), g.len())?;
    Ok(nme(&p, &g, normalization_distance(&g, &scheme)?)?)
}

pub fn run(args: &EvalArgs, cfg: &RunConfig) -> Result<Failures> {
    let preds = pts_names(&args.pred)?;
    let gts = pts_names(&args.gt)?;
    let mut failures = Failures::default();
    for name in preds.symmetric_difference(&gts) {
        let side = if preds.contains(name) {
            &args.pred
        } else {
            &args.gt
        };
        failures
            .0
            .push((side.join(name), anyhow::anyhow!("unpaired file")));
    }
    let paired: Vec<&String> = preds.intersection(&gts).collect();
    let scored: Vec<(String, Result<f64>)> = paired
        .par_iter()
        .map(|name| {
            (
                (*name).clone(),
                score(&args.pred.join(name), &args.gt.join(name), cfg),
            )
        })
        .collect();
    let mut errors = BTreeMap::new();
    for (name, r) in scored {
        match r {
            Ok(e) => {
                errors.insert(name, e);
            }
            Err(e) => failures.0.push((args.pred.join(&name), e)),
        }
    }
    if errors.is_empty() {
        bail!("no paired samples could be scored");
    }
    let report = |values: Vec<f64>| EvalReport::from_errors(values, cfg.auc_t, cfg.fr_t);
    let overall = report(errors.values().copied().collect())?;
    let text = match &args.tags {
        None => write_report(&overall)?,
        Some(path) => {
            let mut reader = csv::ReaderBuilder::new()
                .trim(csv::Trim::All)
                .from_path(path)
                .with_context(|| format!("reading tags {}", path.display()))?;
            let mut groups: BTreeMap<String, Vec<f64>> = BTreeMap::new();
            for row in reader.deserialize::<TagRow>() {
                let row = row.with_context(|| format!("parsing {}", path.display()))?;
                match errors.get(&row.name) {
                    Some(e) => groups.entry(row.tag).or_default().push(*e),
                    None => eprintln!("warning: tagged sample {} has no score", row.name),
                }
            }
            let subsets = groups
                .into_iter()
                .map(|(tag, v)| Ok((tag, report(v)?)))
                .collect::<Result<_>>()?;
            serde_json::to_string_pretty(&TaggedReport { overall, subsets })?
        }
    };
    write_or_print(cfg.out.as_deref(), &text)?;
    Ok(failures)
}
