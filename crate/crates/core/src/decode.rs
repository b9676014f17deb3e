//! Coordinate recovery from predicted vector pairs.
//!
//! Each axis is decoded independently: 1D argmax (ties to the smallest
//! index), then either a fixed quarter-pixel shift toward the larger
//! neighbour for interior maxima, or beyond-box inversion when the maximum
//! sits on an endpoint. Beyond-box treats the endpoint value as a sample of
//! `tau * exp(-d^2 / (2 sigma^2))` and solves for `d`.

use serde::{Deserialize, Serialize};

use crate::codec::GaussianVectorPair;
use crate::geometry::CropTransform;
use crate::{Error, LandmarkSet, Point2, Result, Space};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawDecodeConfig")]
pub struct DecodeConfig {
    shift_delta: f64,
    beyond_box_enabled: bool,
    tau: f64,
    sigma: f64,
}

#[derive(Deserialize)]
struct RawDecodeConfig {
    shift_delta: f64,
    beyond_box_enabled: bool,
    tau: f64,
    sigma: f64,
}

impl TryFrom<RawDecodeConfig> for DecodeConfig {
    type Error = Error;

    fn try_from(raw: RawDecodeConfig) -> Result<Self> {
        DecodeConfig::new(raw.shift_delta, raw.beyond_box_enabled, raw.tau, raw.sigma)
    }
}

impl Default for DecodeConfig {
    fn default() -> Self {
        Self {
            shift_delta: 0.25,
            beyond_box_enabled: true,
            tau: 2.0,
            sigma: 2.0,
        }
    }
}

impl DecodeConfig {
    pub fn new(shift_delta: f64, beyond_box_enabled: bool, tau: f64, sigma: f64) -> Result<Self> {
        if !(0.0..0.5).contains(&shift_delta) {
            return Err(Error::config(format!(
                "shift delta must lie in [0, 0.5), got {shift_delta}"
            )));
        }
        if !(tau.is_finite() && tau > 0.0) {
            return Err(Error::config(format!("tau must be > 0, got {tau}")));
        }
        if !(sigma.is_finite() && sigma > 0.0) {
            return Err(Error::config(format!("sigma must be > 0, got {sigma}")));
        }
        Ok(Self {
            shift_delta,
            beyond_box_enabled,
            tau,
            sigma,
        })
    }

    pub fn shift_delta(&self) -> f64 {
        self.shift_delta
    }

    pub fn beyond_box_enabled(&self) -> bool {
        self.beyond_box_enabled
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn with_shift_delta(self, shift_delta: f64) -> Result<Self> {
        Self::new(shift_delta, self.beyond_box_enabled, self.tau, self.sigma)
    }

    pub fn with_beyond_box(mut self, enabled: bool) -> Self {
        self.beyond_box_enabled = enabled;
        self
    }
}

/// How one axis of a [`DecodedPoint`] was resolved.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AxisStatus {
    /// Maximum off the endpoints; subpixel shift applied.
    Interior,
    /// Maximum on an endpoint, beyond-box disabled; endpoint returned as-is.
    Endpoint,
    /// Maximum on an endpoint and the tail was inverted.
    BeyondBox,
    /// Maximum on an endpoint but the value was not positive, so nothing
    /// could be inverted; the endpoint is returned.
    Unrecoverable,
}

impl AxisStatus {
    pub fn is_beyond_box(self) -> bool {
        matches!(self, AxisStatus::BeyondBox | AxisStatus::Unrecoverable)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecodedPoint {
    pub x: f64,
    pub y: f64,
    pub x_status: AxisStatus,
    pub y_status: AxisStatus,
    /// Maxima of the `x` and `y` vectors.
    pub peak_values: (f64, f64),
}

impl DecodedPoint {
    pub fn point(&self) -> Point2 {
        Point2::new(self.x, self.y)
    }

    pub fn beyond_box(&self) -> (bool, bool) {
        (self.x_status.is_beyond_box(), self.y_status.is_beyond_box())
    }
}

/// Smallest index attaining the maximum.
pub fn argmax_1d(v: &[f64]) -> Result<(usize, f64)> {
    let (&first, rest) = v.split_first().ok_or(Error::Empty("vector"))?;
    if !first.is_finite() {
        return Err(Error::NonFinite("vector element"));
    }
    let mut best = (0, first);
    for (i, &e) in rest.iter().enumerate() {
        if !e.is_finite() {
            return Err(Error::NonFinite("vector element"));
        }
        if e > best.1 {
            best = (i + 1, e);
        }
    }
    Ok(best)
}

/// Moves `idx` by `delta` toward the larger neighbour. Endpoints and ties
/// are left alone.
pub fn subpixel_shift(v: &[f64], idx: usize, delta: f64) -> f64 {
    let at = idx as f64;
    if idx == 0 || idx + 1 >= v.len() {
        return at;
    }
    let (left, right) = (v[idx - 1], v[idx + 1]);
    if right > left {
        at + delta
    } else if left > right {
        at - delta
    } else {
        at
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BeyondBoxEstimate {
    pub coord: f64,
    /// False when the endpoint value was not positive and the endpoint
    /// itself is returned.
    pub recovered: bool,
}

/// Inverts a truncated tail whose maximum sits at endpoint `idx` of a vector
/// of length `len`. Values above `tau` are clamped, which returns the
/// endpoint.
pub fn beyond_box(
    len: usize,
    idx: usize,
    value: f64,
    cfg: &DecodeConfig,
) -> Result<BeyondBoxEstimate> {
    let last = len.checked_sub(1).ok_or(Error::Empty("vector"))?;
    if idx != 0 && idx != last {
        return Err(Error::NotEndpoint { index: idx, len });
    }
    if value.is_nan() || value <= 0.0 {
        return Ok(BeyondBoxEstimate {
            coord: idx as f64,
            recovered: false,
        });
    }
    let ratio = value.min(cfg.tau) / cfg.tau;
    let reach = (-2.0 * cfg.sigma * cfg.sigma * ratio.ln()).max(0.0).sqrt();
    let coord = if idx == 0 {
        -reach
    } else {
        last as f64 + reach
    };
    Ok(BeyondBoxEstimate {
        coord,
        recovered: true,
    })
}

fn decode_axis(v: &[f64], cfg: &DecodeConfig) -> Result<(f64, AxisStatus, f64)> {
    let (idx, value) = argmax_1d(v)?;
    let endpoint = idx == 0 || idx + 1 == v.len();
    if !endpoint {
        return Ok((
            subpixel_shift(v, idx, cfg.shift_delta),
            AxisStatus::Interior,
            value,
        ));
    }
    if !cfg.beyond_box_enabled {
        return Ok((idx as f64, AxisStatus::Endpoint, value));
    }
    let est = beyond_box(v.len(), idx, value, cfg)?;
    let status = if est.recovered {
        AxisStatus::BeyondBox
    } else {
        AxisStatus::Unrecoverable
    };
    Ok((est.coord, status, value))
}

pub fn decode_pair(pair: &GaussianVectorPair, cfg: &DecodeConfig) -> Result<DecodedPoint> {
    let (x, x_status, px) = decode_axis(&pair.x, cfg)?;
    let (y, y_status, py) = decode_axis(&pair.y, cfg)?;
    Ok(DecodedPoint {
        x,
        y,
        x_status,
        y_status,
        peak_values: (px, py),
    })
}

/// Decodes every pair and maps the result into original-image space.
pub fn decode_stack(
    pairs: &[GaussianVectorPair],
    cfg: &DecodeConfig,
    transform: &CropTransform,
) -> Result<LandmarkSet> {
    let side = transform.heatmap_side();
    let points = pairs
        .iter()
        .map(|pair| {
            for v in [&pair.x, &pair.y] {
                if v.len() != side {
                    return Err(Error::LengthMismatch {
                        expected: side,
                        actual: v.len(),
                    });
                }
            }
            decode_pair(pair, cfg).map(|d| transform.to_image_space(d.point()))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(LandmarkSet::new(Space::Image, points))
}
