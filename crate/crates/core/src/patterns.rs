//! Synthetic test images for resolution measurements.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::imagecore::{HiResImage, Image};

/// Vertical sinusoidal lines `0.5 + 0.5 cos(2 pi f x)`, with `f` given as a
/// percentage of the sensor sampling frequency (100% is the fine-grid
/// Nyquist, 0.5 cycles per pixel).
pub fn line_pattern(width: usize, height: usize, rel_freq: f64) -> Result<HiResImage> {
    if !(rel_freq > 0.0 && rel_freq <= 100.0) {
        return Err(Error::InvalidArgument(format!(
            "relative frequency must be in (0, 100], got {rel_freq}"
        )));
    }
    let f = rel_freq / 100.0 * 0.5;
    HiResImage::new(Image::from_fn(width, height, |x, _| 0.5 + 0.5 * (2.0 * PI * f * x as f64).cos()))
}

/// Rotation-symmetric chirp `0.5 + 0.5 cos(pi r^2 / (2R))`, `R = max(X, Y) / 2`,
/// centred on sample `(X/2, Y/2)`. The local frequency reaches 0.5 cycles per
/// pixel at `r = R`.
pub fn zoneplate(width: usize, height: usize) -> Result<HiResImage> {
    let r_max = width.max(height) as f64 / 2.0;
    let (cx, cy) = ((width / 2) as f64, (height / 2) as f64);
    HiResImage::new(Image::from_fn(width, height, |x, y| {
        let r2 = (x as f64 - cx).powi(2) + (y as f64 - cy).powi(2);
        0.5 + 0.5 * (PI * r2 / (2.0 * r_max)).cos()
    }))
}

pub fn constant(width: usize, height: usize, value: f64) -> Result<HiResImage> {
    if !(0.0..=1.0).contains(&value) {
        return Err(Error::InvalidArgument(format!("value must be in [0, 1], got {value}")));
    }
    HiResImage::new(Image::filled(width, height, value))
}
