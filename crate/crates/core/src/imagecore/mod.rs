//! Grid-aligned image containers and the on-disk formats used to exchange
//! them: binary PGM for intensities, NSP1 for quadrant patterns.

mod pattern_file;
mod pgm;

use std::ops::{Deref, DerefMut};

pub use pattern_file::{decode_pattern, encode_pattern, load_pattern, save_pattern};
pub use pgm::{decode_pgm, encode_pgm, load_pgm, save_pgm, Maxval};

use crate::error::{Error, Result};

/// A single-channel image with row-major samples, nominally in `[0, 1]`.
#[derive(Clone, Debug, PartialEq)]
pub struct Image {
    width: usize,
    height: usize,
    data: Vec<f64>,
}

impl Image {
    pub fn new(width: usize, height: usize, data: Vec<f64>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::InvalidArgument(format!(
                "image dimensions must be non-zero, got {width}x{height}"
            )));
        }
        if data.len() != width * height {
            return Err(Error::DimensionMismatch(format!(
                "{width}x{height} image needs {} samples, got {}",
                width * height,
                data.len()
            )));
        }
        Ok(Self {
            width,
            height,
            data,
        })
    }

    pub fn filled(width: usize, height: usize, value: f64) -> Self {
        assert!(width > 0 && height > 0, "image dimensions must be non-zero");
        Self {
            width,
            height,
            data: vec![value; width * height],
        }
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        assert!(width > 0 && height > 0, "image dimensions must be non-zero");
        let mut data = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                data.push(f(x, y));
            }
        }
        Self {
            width,
            height,
            data,
        }
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.data[y * self.width + x]
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, v: f64) {
        self.data[y * self.width + x] = v;
    }

    pub fn samples(&self) -> &[f64] {
        &self.data
    }

    pub fn samples_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_samples(self) -> Vec<f64> {
        self.data
    }

    pub fn clamp_unit(&mut self) {
        for v in &mut self.data {
            *v = v.clamp(0.0, 1.0);
        }
    }

    /// Copy of the `w`x`h` window whose top-left corner is `(x0, y0)`.
    pub fn crop(&self, x0: usize, y0: usize, w: usize, h: usize) -> Result<Image> {
        if w == 0 || h == 0 || x0 + w > self.width || y0 + h > self.height {
            return Err(Error::DimensionMismatch(format!(
                "crop {w}x{h}+{x0}+{y0} outside {}x{} image",
                self.width, self.height
            )));
        }
        Ok(Image::from_fn(w, h, |x, y| self.get(x0 + x, y0 + y)))
    }

    pub fn same_dims(&self, other: &Image) -> bool {
        self.width == other.width && self.height == other.height
    }
}

/// Signal on the fine (2x) grid. Dimensions are always even so that every
/// 2x2 group maps onto one sensor pixel.
#[derive(Clone, Debug, PartialEq)]
pub struct HiResImage(Image);

impl HiResImage {
    pub fn new(image: Image) -> Result<Self> {
        if image.width % 2 != 0 || image.height % 2 != 0 {
            return Err(Error::InvalidArgument(format!(
                "fine-grid image dimensions must be even, got {}x{}",
                image.width, image.height
            )));
        }
        Ok(Self(image))
    }

    pub fn sensor_dims(&self) -> (usize, usize) {
        (self.0.width / 2, self.0.height / 2)
    }

    pub fn into_inner(self) -> Image {
        self.0
    }
}

impl Deref for HiResImage {
    type Target = Image;

    fn deref(&self) -> &Image {
        &self.0
    }
}

impl DerefMut for HiResImage {
    fn deref_mut(&mut self) -> &mut Image {
        &mut self.0
    }
}

impl TryFrom<Image> for HiResImage {
    type Error = Error;

    fn try_from(image: Image) -> Result<Self> {
        HiResImage::new(image)
    }
}

/// Low-resolution sensor output, one sample per 2x2 fine-grid group.
#[derive(Clone, Debug, PartialEq)]
pub struct SensorImage(Image);

impl SensorImage {
    pub fn new(image: Image) -> Self {
        Self(image)
    }

    pub fn fine_dims(&self) -> (usize, usize) {
        (self.0.width * 2, self.0.height * 2)
    }

    pub fn into_inner(self) -> Image {
        self.0
    }
}

impl Deref for SensorImage {
    type Target = Image;

    fn deref(&self) -> &Image {
        &self.0
    }
}

impl DerefMut for SensorImage {
    fn deref_mut(&mut self) -> &mut Image {
        &mut self.0
    }
}

impl From<Image> for SensorImage {
    fn from(image: Image) -> Self {
        SensorImage(image)
    }
}

/// Whether a pattern code names the quadrant that is masked off
/// (three-quarter layouts) or the only quadrant that collects light
/// (quarter layout).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum CodeMeaning {
    Discarded,
    Kept,
}

impl CodeMeaning {
    pub fn tag(self) -> char {
        match self {
            CodeMeaning::Discarded => 'D',
            CodeMeaning::Kept => 'K',
        }
    }

    pub fn from_tag(tag: &str) -> Option<Self> {
        match tag {
            "D" => Some(CodeMeaning::Discarded),
            "K" => Some(CodeMeaning::Kept),
            _ => None,
        }
    }
}

/// Quadrant offsets `(dx, dy)` indexed by code. Codes follow the within-group
/// scan order: top-left, bottom-left, top-right, bottom-right.
pub const QUADRANT_OFFSETS: [(usize, usize); 4] = [(0, 0), (0, 1), (1, 0), (1, 1)];

/// One quadrant code per sensor pixel.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QuadrantPattern {
    width: usize,
    height: usize,
    meaning: CodeMeaning,
    codes: Vec<u8>,
}

impl QuadrantPattern {
    pub fn new(width: usize, height: usize, meaning: CodeMeaning, codes: Vec<u8>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::InvalidArgument(format!(
                "pattern dimensions must be non-zero, got {width}x{height}"
            )));
        }
        if codes.len() != width * height {
            return Err(Error::DimensionMismatch(format!(
                "{width}x{height} pattern needs {} codes, got {}",
                width * height,
                codes.len()
            )));
        }
        if let Some((index, &code)) = codes.iter().enumerate().find(|(_, &c)| c >= 4) {
            return Err(Error::InvalidQuadrantCode { code, index });
        }
        Ok(Self {
            width,
            height,
            meaning,
            codes,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn meaning(&self) -> CodeMeaning {
        self.meaning
    }

    pub fn codes(&self) -> &[u8] {
        &self.codes
    }

    #[inline]
    pub fn code(&self, x: usize, y: usize) -> u8 {
        self.codes[y * self.width + x]
    }

    /// Mask value `m` on the fine grid at `(x, y)` for a three-quarter
    /// pattern: 1/3 on sensitive quadrants, 0 on the discarded one.
    pub fn mask(&self, x: usize, y: usize) -> f64 {
        let code = self.code(x / 2, y / 2) as usize;
        let hit = QUADRANT_OFFSETS[code] == (x % 2, y % 2);
        match (self.meaning, hit) {
            (CodeMeaning::Discarded, true) => 0.0,
            (CodeMeaning::Discarded, false) => 1.0 / 3.0,
            (CodeMeaning::Kept, true) => 1.0,
            (CodeMeaning::Kept, false) => 0.0,
        }
    }
}
