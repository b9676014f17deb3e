//! Gaussian vector landmark codec.
//!
//! Landmarks are supervised and predicted as a pair of 1D quasi-Gaussian
//! vectors per point instead of a full 2D heatmap. The crate covers the whole
//! post-processing path around that representation:
//!
//! - [`codec`] – vector labels (and baseline heatmap labels), loss and
//!   foreground statistics.
//! - [`bpm`] – band pooling that marginalizes heatmaps into vector pairs.
//! - [`decode`] – 1D argmax, quarter-pixel shift and beyond-box recovery of
//!   truncated distributions.
//! - [`geometry`] – face box squaring/enlargement and crop transforms.
//! - [`metrics`] – NME, CED, AUC and failure rate.
//! - [`io`] – `.pts` annotations, the `GVT1` tensor format and JSON reports.
//! - [`bench`] – synthetic heatmaps and the post-processing cost study.

pub mod bench;
pub mod bpm;
pub mod codec;
pub mod decode;
mod error;
pub mod geometry;
pub mod io;
pub mod metrics;
mod types;

pub use error::{Error, Result};
pub use types::{Axis, LandmarkSet, Point2, Space};
