//! Label encoding.
//!
//! A landmark at continuous heatmap coordinate `p` is encoded as a pair of 1D
//! quasi-Gaussian vectors. The coordinate is first quantized to the nearest
//! grid index (ties toward +inf). The element at that index holds `1 + theta`,
//! elements at grid distance `0 < d < cutoff * sigma` hold
//! `exp(-d^2 / (2 sigma^2))` and everything else is exactly zero. Tails are
//! clipped at the grid border and never renormalized.
//!
//! The 2D heatmap label uses the same profile over Euclidean distance and is
//! kept as the baseline for the imbalance and robustness comparisons.

use serde::{Deserialize, Serialize};

use crate::{Error, Point2, Result};

pub const DEFAULT_SIGMA: f64 = 2.0;
pub const DEFAULT_THETA: f64 = 3.0;
pub const DEFAULT_CUTOFF: f64 = 3.0;

/// Parameters of the label profile.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawLabelConfig")]
pub struct LabelConfig {
    sigma: f64,
    theta: f64,
    cutoff_multiplier: f64,
}

#[derive(Deserialize)]
struct RawLabelConfig {
    sigma: f64,
    theta: f64,
    cutoff_multiplier: f64,
}

impl TryFrom<RawLabelConfig> for LabelConfig {
    type Error = Error;

    fn try_from(raw: RawLabelConfig) -> Result<Self> {
        LabelConfig::new(raw.sigma, raw.theta, raw.cutoff_multiplier)
    }
}

impl Default for LabelConfig {
    fn default() -> Self {
        Self {
            sigma: DEFAULT_SIGMA,
            theta: DEFAULT_THETA,
            cutoff_multiplier: DEFAULT_CUTOFF,
        }
    }
}

impl LabelConfig {
    pub fn new(sigma: f64, theta: f64, cutoff_multiplier: f64) -> Result<Self> {
        if !(sigma.is_finite() && sigma > 0.0) {
            return Err(Error::config(format!("sigma must be > 0, got {sigma}")));
        }
        if !(theta.is_finite() && theta >= 0.0) {
            return Err(Error::config(format!("theta must be >= 0, got {theta}")));
        }
        if !(cutoff_multiplier.is_finite() && cutoff_multiplier > 0.0) {
            return Err(Error::config(format!(
                "cutoff multiplier must be > 0, got {cutoff_multiplier}"
            )));
        }
        Ok(Self {
            sigma,
            theta,
            cutoff_multiplier,
        })
    }

    pub fn with_sigma_theta(sigma: f64, theta: f64) -> Result<Self> {
        Self::new(sigma, theta, DEFAULT_CUTOFF)
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn cutoff_multiplier(&self) -> f64 {
        self.cutoff_multiplier
    }

    /// Foreground radius in grid pixels. The test against it is strict.
    pub fn cutoff_radius(&self) -> f64 {
        self.cutoff_multiplier * self.sigma
    }

    pub fn peak_value(&self) -> f64 {
        1.0 + self.theta
    }

    /// Label value at grid distance `d` from the quantized peak.
    pub fn response(&self, d: f64) -> f64 {
        if d == 0.0 {
            self.peak_value()
        } else if d < self.cutoff_radius() {
            (-d * d / (2.0 * self.sigma * self.sigma)).exp()
        } else {
            0.0
        }
    }
}

/// Round to nearest, ties toward +inf.
pub fn quantize(v: f64) -> i64 {
    (v + 0.5).floor() as i64
}

/// Per-landmark pair of response vectors: `x` has one element per column,
/// `y` one per row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaussianVectorPair {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub landmark_index: usize,
}

impl GaussianVectorPair {
    pub fn new(x: Vec<f64>, y: Vec<f64>, landmark_index: usize) -> Self {
        Self {
            x,
            y,
            landmark_index,
        }
    }

    pub fn zeros(width: usize, height: usize, landmark_index: usize) -> Self {
        Self::new(vec![0.0; width], vec![0.0; height], landmark_index)
    }

    pub fn len(&self) -> usize {
        self.x.len() + self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn elements(&self) -> impl Iterator<Item = &f64> {
        self.x.iter().chain(self.y.iter())
    }

    pub fn foreground_fraction(&self) -> f64 {
        foreground_fraction(self.elements())
    }
}

/// Borrowed single-channel heatmap, row-major with `y` outer.
#[derive(Debug, Clone, Copy)]
pub struct HeatmapView<'a> {
    pub height: usize,
    pub width: usize,
    pub values: &'a [f64],
}

impl<'a> HeatmapView<'a> {
    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.values[row * self.width + col]
    }

    pub fn row(&self, row: usize) -> &'a [f64] {
        &self.values[row * self.width..(row + 1) * self.width]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Heatmap {
    height: usize,
    width: usize,
    values: Vec<f64>,
}

impl Heatmap {
    pub fn new(height: usize, width: usize, values: Vec<f64>) -> Result<Self> {
        if height == 0 || width == 0 {
            return Err(Error::config("heatmap dimensions must be positive"));
        }
        if values.len() != height * width {
            return Err(Error::LengthMismatch {
                expected: height * width,
                actual: values.len(),
            });
        }
        Ok(Self {
            height,
            width,
            values,
        })
    }

    pub fn zeros(height: usize, width: usize) -> Self {
        Self {
            height,
            width,
            values: vec![0.0; height * width],
        }
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.values[row * self.width + col]
    }

    pub fn get_mut(&mut self, row: usize, col: usize) -> &mut f64 {
        &mut self.values[row * self.width + col]
    }

    pub fn view(&self) -> HeatmapView<'_> {
        HeatmapView {
            height: self.height,
            width: self.width,
            values: &self.values,
        }
    }

    pub fn foreground_fraction(&self) -> f64 {
        foreground_fraction(&self.values)
    }
}

/// `L` channels of `h x w` responses, stored `[channel][row][col]`.
#[derive(Debug, Clone, PartialEq)]
pub struct HeatmapStack {
    landmarks: usize,
    height: usize,
    width: usize,
    values: Vec<f64>,
}

impl HeatmapStack {
    pub fn new(landmarks: usize, height: usize, width: usize, values: Vec<f64>) -> Result<Self> {
        if landmarks == 0 || height == 0 || width == 0 {
            return Err(Error::config("heatmap stack dimensions must be positive"));
        }
        let expected = landmarks * height * width;
        if values.len() != expected {
            return Err(Error::LengthMismatch {
                expected,
                actual: values.len(),
            });
        }
        Ok(Self {
            landmarks,
            height,
            width,
            values,
        })
    }

    pub fn from_channels(channels: &[Heatmap]) -> Result<Self> {
        let first = channels.first().ok_or(Error::Empty("heatmap channels"))?;
        let (height, width) = (first.height, first.width);
        let mut values = Vec::with_capacity(channels.len() * height * width);
        for c in channels {
            if c.height != height || c.width != width {
                return Err(Error::LengthMismatch {
                    expected: height * width,
                    actual: c.height * c.width,
                });
            }
            values.extend_from_slice(&c.values);
        }
        Self::new(channels.len(), height, width, values)
    }

    pub fn landmarks(&self) -> usize {
        self.landmarks
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn channel(&self, k: usize) -> HeatmapView<'_> {
        let n = self.height * self.width;
        HeatmapView {
            height: self.height,
            width: self.width,
            values: &self.values[k * n..(k + 1) * n],
        }
    }

    pub fn channels(&self) -> impl Iterator<Item = HeatmapView<'_>> {
        (0..self.landmarks).map(move |k| self.channel(k))
    }
}

fn check_in_grid(p: Point2, width: usize, height: usize) -> Result<(usize, usize)> {
    if !p.is_finite() {
        return Err(Error::NonFinite("landmark coordinate"));
    }
    let cx = quantize(p.x);
    let cy = quantize(p.y);
    if cx < 0 || cy < 0 || cx >= width as i64 || cy >= height as i64 {
        return Err(Error::OutOfGrid {
            x: p.x,
            y: p.y,
            width,
            height,
        });
    }
    Ok((cx as usize, cy as usize))
}

/// 1D profile centred on integer index `center`, which may lie off the grid.
pub(crate) fn profile_vector(len: usize, center: i64, cfg: &LabelConfig) -> Vec<f64> {
    (0..len)
        .map(|i| cfg.response((i as i64 - center).unsigned_abs() as f64))
        .collect()
}

pub fn encode_vector_label(
    p: Point2,
    width: usize,
    height: usize,
    cfg: &LabelConfig,
) -> Result<GaussianVectorPair> {
    let (cx, cy) = check_in_grid(p, width, height)?;
    Ok(GaussianVectorPair::new(
        profile_vector(width, cx as i64, cfg),
        profile_vector(height, cy as i64, cfg),
        0,
    ))
}

pub fn encode_heatmap_label(
    p: Point2,
    width: usize,
    height: usize,
    cfg: &LabelConfig,
) -> Result<Heatmap> {
    let (cx, cy) = check_in_grid(p, width, height)?;
    let mut values = Vec::with_capacity(width * height);
    for row in 0..height {
        let dy = row as f64 - cy as f64;
        for col in 0..width {
            let dx = col as f64 - cx as f64;
            values.push(cfg.response(dx.hypot(dy)));
        }
    }
    Heatmap::new(height, width, values)
}

/// Mean squared error over all elements of both vectors.
pub fn mse_loss(pred: &GaussianVectorPair, label: &GaussianVectorPair) -> Result<f64> {
    for (p, l) in [(&pred.x, &label.x), (&pred.y, &label.y)] {
        if p.len() != l.len() {
            return Err(Error::LengthMismatch {
                expected: l.len(),
                actual: p.len(),
            });
        }
    }
    let n = label.len();
    if n == 0 {
        return Err(Error::Empty("label vectors"));
    }
    let sum: f64 = pred
        .elements()
        .zip(label.elements())
        .map(|(a, b)| (a - b) * (a - b))
        .sum();
    Ok(sum / n as f64)
}

/// Fraction of elements that are nonzero. An element counts as foreground
/// iff it is not exactly `0.0`; for encoded labels that is exactly the set
/// of cells strictly inside the cutoff radius.
pub fn foreground_fraction<'a>(elements: impl IntoIterator<Item = &'a f64>) -> f64 {
    let (nonzero, total) = elements.into_iter().fold((0usize, 0usize), |(nz, t), &v| {
        (nz + usize::from(v != 0.0), t + 1)
    });
    if total == 0 {
        0.0
    } else {
        nonzero as f64 / total as f64
    }
}
