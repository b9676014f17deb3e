//! Band pooling.
//!
//! A vertical band (`h x l`) slides horizontally over a heatmap and averages
//! the pixels it covers, producing the `x` vector; a horizontal band
//! (`l x w`) produces `y`. Outside the grid the band sees zeros and the
//! divisor stays `h * l` (or `w * l`) everywhere, edges included.
//!
//! Two bandwidths are fused by a convex combination.

use serde::{Deserialize, Serialize};

use crate::codec::{GaussianVectorPair, HeatmapStack, HeatmapView};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Band {
    /// `h x l` band sliding along the columns; yields the `x` vector.
    Vertical,
    /// `l x w` band sliding along the rows; yields the `y` vector.
    Horizontal,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawBpmConfig")]
pub struct BpmConfig {
    bandwidth_a: usize,
    bandwidth_b: usize,
    alpha: f64,
}

#[derive(Deserialize)]
struct RawBpmConfig {
    bandwidth_a: usize,
    bandwidth_b: usize,
    alpha: f64,
}

impl TryFrom<RawBpmConfig> for BpmConfig {
    type Error = Error;

    fn try_from(raw: RawBpmConfig) -> Result<Self> {
        BpmConfig::new(raw.bandwidth_a, raw.bandwidth_b, raw.alpha)
    }
}

impl Default for BpmConfig {
    fn default() -> Self {
        Self {
            bandwidth_a: 3,
            bandwidth_b: 5,
            alpha: 0.5,
        }
    }
}

impl BpmConfig {
    pub fn new(bandwidth_a: usize, bandwidth_b: usize, alpha: f64) -> Result<Self> {
        for l in [bandwidth_a, bandwidth_b] {
            if l == 0 || l % 2 == 0 {
                return Err(Error::config(format!(
                    "bandwidth must be an odd positive integer, got {l}"
                )));
            }
        }
        check_alpha(alpha)?;
        Ok(Self {
            bandwidth_a,
            bandwidth_b,
            alpha,
        })
    }

    /// Single-band pooling expressed as a degenerate fusion.
    pub fn single(bandwidth: usize) -> Result<Self> {
        Self::new(bandwidth, bandwidth, 0.5)
    }

    pub fn bandwidth_a(&self) -> usize {
        self.bandwidth_a
    }

    pub fn bandwidth_b(&self) -> usize {
        self.bandwidth_b
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }
}

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha < 1.0 {
        Ok(())
    } else {
        Err(Error::config(format!(
            "alpha must lie in (0, 1), got {alpha}"
        )))
    }
}

fn check_bandwidth(bandwidth: usize, side: usize) -> Result<()> {
    if bandwidth == 0 || bandwidth.is_multiple_of(2) || bandwidth > side {
        Err(Error::InvalidBandwidth { bandwidth, side })
    } else {
        Ok(())
    }
}

pub fn band_pool(h: HeatmapView<'_>, band: Band, bandwidth: usize) -> Result<Vec<f64>> {
    check_bandwidth(bandwidth, h.height.min(h.width))?;
    if h.values.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("heatmap"));
    }
    // Collapse the long side of the band first, then slide along the short one.
    let (marginal, long_side) = match band {
        Band::Vertical => {
            let mut sums = vec![0.0; h.width];
            for row in 0..h.height {
                for (s, v) in sums.iter_mut().zip(h.row(row)) {
                    *s += v;
                }
            }
            (sums, h.height)
        }
        Band::Horizontal => (
            (0..h.height).map(|r| h.row(r).iter().sum()).collect(),
            h.width,
        ),
    };
    let half = bandwidth / 2;
    let divisor = (long_side * bandwidth) as f64;
    let n = marginal.len();
    Ok((0..n)
        .map(|i| {
            let lo = i.saturating_sub(half);
            let hi = (i + half).min(n - 1);
            marginal[lo..=hi].iter().sum::<f64>() / divisor
        })
        .collect())
}

/// Elementwise `alpha * a + (1 - alpha) * b`.
pub fn aggregate(a: &[f64], b: &[f64], alpha: f64) -> Result<Vec<f64>> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch {
            expected: a.len(),
            actual: b.len(),
        });
    }
    check_alpha(alpha)?;
    Ok(a.iter()
        .zip(b)
        .map(|(x, y)| alpha * x + (1.0 - alpha) * y)
        .collect())
}

/// Band pooling plus fusion for one channel.
pub fn pool_channel(
    h: HeatmapView<'_>,
    cfg: &BpmConfig,
    landmark_index: usize,
) -> Result<GaussianVectorPair> {
    let fuse = |band| -> Result<Vec<f64>> {
        let a = band_pool(h, band, cfg.bandwidth_a)?;
        if cfg.bandwidth_a == cfg.bandwidth_b {
            return Ok(a);
        }
        let b = band_pool(h, band, cfg.bandwidth_b)?;
        aggregate(&a, &b, cfg.alpha)
    };
    Ok(GaussianVectorPair::new(
        fuse(Band::Vertical)?,
        fuse(Band::Horizontal)?,
        landmark_index,
    ))
}

pub fn bpm_apply(stack: &HeatmapStack, cfg: &BpmConfig) -> Result<Vec<GaussianVectorPair>> {
    stack
        .channels()
        .enumerate()
        .map(|(k, h)| pool_channel(h, cfg, k))
        .collect()
}
