//! Face boxes and the original-image / crop / heatmap coordinate maps.
//!
//! All maps are purely linear: a point at the box origin lands on heatmap
//! coordinate `(0, 0)` and there is no half-pixel centre offset. Boxes stay
//! in continuous coordinates and are never clipped to the image.

use serde::{Deserialize, Serialize};

use crate::{Error, Point2, Result};

pub const DEFAULT_INPUT_SIZE: u32 = 256;
pub const DEFAULT_HEATMAP_STRIDE: u32 = 4;

/// Axis-aligned box, top-left corner plus size, in original-image pixels.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FaceBox {
    pub x: f64,
    pub y: f64,
    pub width: f64,
    pub height: f64,
}

impl FaceBox {
    pub fn new(x: f64, y: f64, width: f64, height: f64) -> Result<Self> {
        if !(x.is_finite() && y.is_finite()) {
            return Err(Error::NonFinite("box origin"));
        }
        if !(width.is_finite() && width > 0.0 && height.is_finite() && height > 0.0) {
            return Err(Error::config(format!(
                "box size must be positive, got {width}x{height}"
            )));
        }
        Ok(Self {
            x,
            y,
            width,
            height,
        })
    }

    pub fn center(&self) -> Point2 {
        Point2::new(self.x + self.width / 2.0, self.y + self.height / 2.0)
    }

    pub fn is_square(&self) -> bool {
        self.width == self.height
    }

    pub fn contains_box(&self, other: &FaceBox) -> bool {
        other.x >= self.x
            && other.y >= self.y
            && other.x + other.width <= self.x + self.width
            && other.y + other.height <= self.y + self.height
    }

    fn about_center(center: Point2, width: f64, height: f64) -> Self {
        Self {
            x: center.x - width / 2.0,
            y: center.y - height / 2.0,
            width,
            height,
        }
    }
}

/// Extends the short side to the long one, keeping the centre.
pub fn square_box(b: &FaceBox) -> FaceBox {
    let side = b.width.max(b.height);
    FaceBox::about_center(b.center(), side, side)
}

/// Scales both sides by `1 + pct` about the centre.
pub fn enlarge_box(b: &FaceBox, pct: f64) -> Result<FaceBox> {
    if !(pct.is_finite() && pct >= 0.0) {
        return Err(Error::config(format!(
            "enlargement must be >= 0, got {pct}"
        )));
    }
    let s = 1.0 + pct;
    Ok(FaceBox::about_center(b.center(), b.width * s, b.height * s))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CropTransform {
    square_box: FaceBox,
    input_size: u32,
    heatmap_stride: u32,
}

impl CropTransform {
    pub fn new(square_box: FaceBox, input_size: u32, heatmap_stride: u32) -> Result<Self> {
        if !square_box.is_square() {
            return Err(Error::config("crop box must be square"));
        }
        if input_size == 0 || heatmap_stride == 0 || !input_size.is_multiple_of(heatmap_stride) {
            return Err(Error::config(format!(
                "input size {input_size} must be a positive multiple of stride {heatmap_stride}"
            )));
        }
        Ok(Self {
            square_box,
            input_size,
            heatmap_stride,
        })
    }

    /// Squares `face`, enlarges it by `enlarge` and builds the transform.
    pub fn from_face_box(
        face: &FaceBox,
        enlarge: f64,
        input_size: u32,
        heatmap_stride: u32,
    ) -> Result<Self> {
        let b = enlarge_box(&square_box(face), enlarge)?;
        Self::new(b, input_size, heatmap_stride)
    }

    pub fn square_box(&self) -> &FaceBox {
        &self.square_box
    }

    pub fn input_size(&self) -> u32 {
        self.input_size
    }

    pub fn heatmap_stride(&self) -> u32 {
        self.heatmap_stride
    }

    pub fn heatmap_side(&self) -> usize {
        (self.input_size / self.heatmap_stride) as usize
    }

    fn crop_scale(&self) -> f64 {
        self.input_size as f64 / self.square_box.width
    }

    pub fn to_crop_space(&self, p: Point2) -> Point2 {
        let s = self.crop_scale();
        Point2::new((p.x - self.square_box.x) * s, (p.y - self.square_box.y) * s)
    }

    pub fn to_heatmap_space(&self, p: Point2) -> Point2 {
        let c = self.to_crop_space(p);
        let stride = self.heatmap_stride as f64;
        Point2::new(c.x / stride, c.y / stride)
    }

    pub fn to_image_space(&self, p: Point2) -> Point2 {
        let stride = self.heatmap_stride as f64;
        let s = self.crop_scale();
        Point2::new(
            p.x * stride / s + self.square_box.x,
            p.y * stride / s + self.square_box.y,
        )
    }
}
