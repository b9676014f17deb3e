use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use gvec_core::geometry::FaceBox;
use serde::Deserialize;

/// Writes through a temp file in the target directory, then renames into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir)
        .with_context(|| format!("creating temp file in {}", dir.display()))?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path)
        .with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

/// Writes to `path`, or stdout when absent.
pub fn write_or_print(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => write_atomic(p, text.as_bytes()),
        None => {
            let mut stdout = std::io::stdout().lock();
            match writeln!(stdout, "{text}").and_then(|_| stdout.flush()) {
                Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(e.into()),
                _ => Ok(()),
            }
        }
    }
}

#[derive(Debug, Deserialize)]
struct ManifestRow {
    path: PathBuf,
    x: f64,
    y: f64,
    width: f64,
    height: f64,
}

#[derive(Debug, Clone)]
pub struct Sample {
    pub path: PathBuf,
    pub face: FaceBox,
}

/// Reads a `path,x,y,width,height` CSV manifest. Relative paths resolve against the
/// manifest's directory. Fails up front if any listed file is missing, unless
/// `keep_going`, in which case missing files are returned separately.
pub fn read_manifest(manifest: &Path, keep_going: bool) -> Result<(Vec<Sample>, Vec<PathBuf>)> {
    let base = manifest.parent().unwrap_or(Path::new("."));
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(manifest)
        .with_context(|| format!("reading manifest {}", manifest.display()))?;
    let mut samples = Vec::new();
    let mut missing = Vec::new();
    for (line, row) in reader.deserialize::<ManifestRow>().enumerate() {
        let row = row.with_context(|| format!("{}: row {}", manifest.display(), line + 1))?;
        let path = if row.path.is_absolute() {
            row.path
        } else {
            base.join(row.path)
        };
        let face = FaceBox::new(row.x, row.y, row.width, row.height)
            .with_context(|| format!("{}: row {}", manifest.display(), line + 1))?;
        if path.is_file() {
            samples.push(Sample { path, face });
        } else {
            missing.push(path);
        }
    }
    if !missing.is_empty() && !keep_going {
        let list: Vec<String> = missing.iter().map(|p| p.display().to_string()).collect();
        bail!("missing input file(s): {}", list.join(", "));
    }
    Ok((samples, missing))
}

/// `dir/<stem of source>.<ext>`.
pub fn output_path(dir: &Path, source: &Path, ext: &str) -> PathBuf {
    let stem = source.file_stem().unwrap_or(source.as_os_str());
    dir.join(format!("{}.{ext}", stem.to_string_lossy()))
}
