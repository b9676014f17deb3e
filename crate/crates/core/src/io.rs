//! Readers and writers for `.pts` annotations, `GVT1` tensors and JSON
//! reports.
//!
//! `GVT1` layout: 4 ASCII bytes `GVT1`, `u32` LE rank, `rank` x `u32` LE
//! dims, then `prod(dims)` little-endian IEEE-754 `f32` values, row-major
//! with the last dimension fastest.

use serde::{Deserialize, Serialize};

use crate::bench::BenchReport;
use crate::codec::{GaussianVectorPair, HeatmapStack};
use crate::metrics::EvalReport;
use crate::{Error, LandmarkSet, Point2, Result, Space};

pub const GVT_MAGIC: &[u8; 4] = b"GVT1";
const MAX_RANK: usize = 8;

/// Index origin of the coordinates stored in a `.pts` file.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PtsOrigin {
    /// Coordinates are used verbatim.
    #[default]
    Zero,
    /// Coordinates are 1-based; 1.0 is subtracted on load and added on save.
    One,
}

impl PtsOrigin {
    fn offset(self) -> f64 {
        match self {
            PtsOrigin::Zero => 0.0,
            PtsOrigin::One => 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PtsFile {
    pub version: u32,
    pub points: Vec<Point2>,
}

impl PtsFile {
    pub fn new(points: Vec<Point2>) -> Self {
        Self { version: 1, points }
    }

    pub fn n_points(&self) -> usize {
        self.points.len()
    }

    pub fn to_landmarks(&self, origin: PtsOrigin) -> LandmarkSet {
        let o = origin.offset();
        LandmarkSet::new(
            Space::Image,
            self.points
                .iter()
                .map(|p| Point2::new(p.x - o, p.y - o))
                .collect(),
        )
    }

    pub fn from_landmarks(set: &LandmarkSet, origin: PtsOrigin) -> Self {
        let o = origin.offset();
        Self::new(
            set.points
                .iter()
                .map(|p| Point2::new(p.x + o, p.y + o))
                .collect(),
        )
    }
}

fn header_value<'a>(line: Option<&'a str>, key: &str) -> Result<&'a str> {
    let line = line.ok_or_else(|| Error::format("pts", format!("missing `{key}:` header")))?;
    match line.split_once(':') {
        Some((k, v)) if k.trim() == key => Ok(v.trim()),
        _ => Err(Error::format(
            "pts",
            format!("expected `{key}:` header, got {line:?}"),
        )),
    }
}

pub fn read_pts(text: &str) -> Result<PtsFile> {
    let mut lines = text.lines().map(|l| l.trim_end_matches('\r').trim());
    let version = header_value(lines.next(), "version")?
        .parse::<u32>()
        .map_err(|e| Error::format("pts", format!("bad version: {e}")))?;
    let n_points = header_value(lines.next(), "n_points")?
        .parse::<usize>()
        .map_err(|e| Error::format("pts", format!("bad n_points: {e}")))?;
    if lines.next() != Some("{") {
        return Err(Error::format("pts", "expected `{` after header"));
    }
    let mut points = Vec::with_capacity(n_points);
    let mut closed = false;
    for line in lines.by_ref() {
        if line == "}" {
            closed = true;
            break;
        }
        let mut fields = line.split_whitespace();
        let mut coord = || -> Result<f64> {
            let field = fields.next().ok_or_else(|| {
                Error::format("pts", format!("expected two coordinates, got {line:?}"))
            })?;
            field
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| Error::format("pts", format!("non-numeric coordinate {field:?}")))
        };
        let (x, y) = (coord()?, coord()?);
        if fields.next().is_some() {
            return Err(Error::format(
                "pts",
                format!("extra fields in row {line:?}"),
            ));
        }
        points.push(Point2::new(x, y));
    }
    if !closed {
        return Err(Error::format("pts", "missing closing `}`"));
    }
    if lines.any(|l| !l.is_empty()) {
        return Err(Error::format("pts", "trailing content after `}`"));
    }
    if points.len() != n_points {
        return Err(Error::format(
            "pts",
            format!(
                "n_points is {n_points} but {} rows were found",
                points.len()
            ),
        ));
    }
    Ok(PtsFile { version, points })
}

/// Coordinates use the shortest decimal form that parses back to the same
/// `f64`.
pub fn write_pts(pts: &PtsFile) -> String {
    let mut out = format!(
        "version: {}\nn_points: {}\n{{\n",
        pts.version,
        pts.n_points()
    );
    for p in &pts.points {
        out.push_str(&format!("{} {}\n", p.x, p.y));
    }
    out.push_str("}\n");
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct Tensor {
    dims: Vec<usize>,
    data: Vec<f32>,
}

fn element_count(dims: &[usize]) -> Result<usize> {
    if dims.is_empty() || dims.len() > MAX_RANK {
        return Err(Error::format(
            "GVT",
            format!("rank must be 1..={MAX_RANK}, got {}", dims.len()),
        ));
    }
    if dims.contains(&0) {
        return Err(Error::format("GVT", "dimensions must be positive"));
    }
    dims.iter()
        .try_fold(1usize, |acc, &d| acc.checked_mul(d))
        .filter(|n| n.checked_mul(4).is_some())
        .ok_or_else(|| Error::format("GVT", "dimensions overflow"))
}

impl Tensor {
    pub fn new(dims: Vec<usize>, data: Vec<f32>) -> Result<Self> {
        let n = element_count(&dims)?;
        if data.len() != n {
            return Err(Error::LengthMismatch {
                expected: n,
                actual: data.len(),
            });
        }
        Ok(Self { dims, data })
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn data(&self) -> &[f32] {
        &self.data
    }

    pub fn payload_bytes(&self) -> usize {
        self.data.len() * 4
    }

    pub fn from_heatmap_stack(stack: &HeatmapStack) -> Self {
        Self {
            dims: vec![stack.landmarks(), stack.height(), stack.width()],
            data: stack.values().iter().map(|&v| v as f32).collect(),
        }
    }

    /// Rank 3 `(L, h, w)`, or rank 2 `(h, w)` read as a single channel.
    pub fn to_heatmap_stack(&self) -> Result<HeatmapStack> {
        let (l, h, w) = match self.dims[..] {
            [h, w] => (1, h, w),
            [l, h, w] => (l, h, w),
            _ => {
                return Err(Error::format(
                    "GVT",
                    format!("heatmap tensors have rank 2 or 3, got dims {:?}", self.dims),
                ))
            }
        };
        HeatmapStack::new(l, h, w, self.data.iter().map(|&v| f64::from(v)).collect())
    }

    /// `(L, side, 2)` with the `y` vector in channel 0 and `x` in channel 1.
    pub fn from_vector_pairs(pairs: &[GaussianVectorPair]) -> Result<Self> {
        let side = pairs.first().ok_or(Error::Empty("vector pairs"))?.x.len();
        let mut data = Vec::with_capacity(pairs.len() * side * 2);
        for p in pairs {
            for v in [&p.x, &p.y] {
                if v.len() != side {
                    return Err(Error::LengthMismatch {
                        expected: side,
                        actual: v.len(),
                    });
                }
            }
            for i in 0..side {
                data.push(p.y[i] as f32);
                data.push(p.x[i] as f32);
            }
        }
        Self::new(vec![pairs.len(), side, 2], data)
    }

    pub fn to_vector_pairs(&self) -> Result<Vec<GaussianVectorPair>> {
        let [l, side, 2] = self.dims[..] else {
            return Err(Error::format(
                "GVT",
                format!("vector tensors have dims (L, side, 2), got {:?}", self.dims),
            ));
        };
        Ok((0..l)
            .map(|k| {
                let chunk = &self.data[k * side * 2..(k + 1) * side * 2];
                let y = chunk.iter().step_by(2).map(|&v| f64::from(v)).collect();
                let x = chunk
                    .iter()
                    .skip(1)
                    .step_by(2)
                    .map(|&v| f64::from(v))
                    .collect();
                GaussianVectorPair::new(x, y, k)
            })
            .collect())
    }

    /// True for the `(L, side, 2)` vector layout.
    pub fn is_vector_layout(&self) -> bool {
        matches!(self.dims[..], [_, side, 2] if side != 2)
    }
}

pub fn write_tensor(t: &Tensor) -> Vec<u8> {
    let mut out = Vec::with_capacity(8 + 4 * t.dims.len() + t.payload_bytes());
    out.extend_from_slice(GVT_MAGIC);
    out.extend_from_slice(&(t.dims.len() as u32).to_le_bytes());
    for &d in &t.dims {
        out.extend_from_slice(&(d as u32).to_le_bytes());
    }
    for v in &t.data {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

fn take<'a>(bytes: &mut &'a [u8], n: usize, what: &str) -> Result<&'a [u8]> {
    if bytes.len() < n {
        return Err(Error::format("GVT", format!("truncated {what}")));
    }
    let (head, rest) = bytes.split_at(n);
    *bytes = rest;
    Ok(head)
}

fn take_u32(bytes: &mut &[u8], what: &str) -> Result<u32> {
    let b = take(bytes, 4, what)?;
    Ok(u32::from_le_bytes([b[0], b[1], b[2], b[3]]))
}

pub fn read_tensor(mut bytes: &[u8]) -> Result<Tensor> {
    if take(&mut bytes, 4, "magic")? != GVT_MAGIC {
        return Err(Error::format("GVT", "bad magic"));
    }
    let rank = take_u32(&mut bytes, "rank")? as usize;
    if rank == 0 || rank > MAX_RANK {
        return Err(Error::format(
            "GVT",
            format!("rank must be 1..={MAX_RANK}, got {rank}"),
        ));
    }
    let dims = (0..rank)
        .map(|_| take_u32(&mut bytes, "dims").map(|d| d as usize))
        .collect::<Result<Vec<_>>>()?;
    let n = element_count(&dims)?;
    let payload = take(&mut bytes, n * 4, "payload")?;
    if !bytes.is_empty() {
        return Err(Error::format(
            "GVT",
            format!("{} trailing bytes", bytes.len()),
        ));
    }
    let data = payload
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]))
        .collect();
    Tensor::new(dims, data)
}

pub fn write_report(report: &EvalReport) -> Result<String> {
    Ok(serde_json::to_string_pretty(report)?)
}

pub fn read_report(text: &str) -> Result<EvalReport> {
    Ok(serde_json::from_str(text)?)
}

pub fn write_bench_report(report: &BenchReport) -> Result<String> {
    Ok(serde_json::to_string_pretty(report)?)
}

pub fn read_bench_report(text: &str) -> Result<BenchReport> {
    Ok(serde_json::from_str(text)?)
}
