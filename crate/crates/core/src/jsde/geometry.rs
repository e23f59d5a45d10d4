//! Area layout: scan order, block partitioning and the per-block context.

use crate::error::{Error, Result};
use crate::imagecore::{CodeMeaning, QuadrantPattern, SensorImage};

/// Within-group offsets `(dm, dn)` in scan order; `m` runs down, `n` across.
pub const GROUP_OFFSETS: [(usize, usize); 4] = [(0, 0), (1, 0), (0, 1), (1, 1)];

/// Flat position of fine-grid sample `(m, n)` in an `rows x cols` area.
///
/// 2x2 groups are visited column-major and so are the four samples inside
/// each group.
pub fn scan_index(m: usize, n: usize, rows: usize, cols: usize) -> Result<usize> {
    if m >= rows || n >= cols {
        return Err(Error::InvalidArgument(format!(
            "({m}, {n}) outside {rows}x{cols} area"
        )));
    }
    if rows % 2 != 0 || cols % 2 != 0 {
        return Err(Error::InvalidArgument(format!(
            "area {rows}x{cols} must have even dimensions"
        )));
    }
    Ok(scan_index_unchecked(m, n, rows))
}

#[inline]
pub(crate) fn scan_index_unchecked(m: usize, n: usize, rows: usize) -> usize {
    4 * ((n / 2) * (rows / 2) + m / 2) + (m % 2) + 2 * (n % 2)
}

/// Inverse of [`scan_index`].
pub fn scan_position(index: usize, rows: usize, cols: usize) -> Result<(usize, usize)> {
    if index >= rows * cols || rows % 2 != 0 || cols % 2 != 0 {
        return Err(Error::InvalidArgument(format!(
            "index {index} outside {rows}x{cols} area"
        )));
    }
    Ok(scan_position_unchecked(index, rows))
}

#[inline]
pub(crate) fn scan_position_unchecked(index: usize, rows: usize) -> (usize, usize) {
    let g = index / 4;
    let (dm, dn) = GROUP_OFFSETS[index % 4];
    let half = rows / 2;
    (2 * (g % half) + dm, 2 * (g / half) + dn)
}

/// Spatial weighting applied to the residual energy.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Weighting {
    /// `decay^distance` from the area centre on sensitive samples.
    Isotropic { decay: f64 },
    /// One on every sensitive sample.
    Uniform,
}

/// Everything the model generator needs about one reconstruction area.
///
/// Vectors indexed by group (`sensor`, `codes`, `inside`) have `rows*cols/4`
/// entries in group scan order; `weights` has `rows*cols` entries in sample
/// scan order.
#[derive(Clone, Debug, PartialEq)]
pub struct BlockContext {
    /// Fine-grid position of the block's top-left sample.
    pub block_x: usize,
    pub block_y: usize,
    pub block_w: usize,
    pub block_h: usize,
    /// Fine-grid position of the area's top-left sample; negative when the
    /// area hangs over the image edge.
    pub area_x: isize,
    pub area_y: isize,
    pub rows: usize,
    pub cols: usize,
    pub sensor: Vec<f64>,
    pub codes: Vec<u8>,
    pub inside: Vec<bool>,
    pub weights: Vec<f64>,
}

impl BlockContext {
    /// Context for the block at `(block_x, block_y)` with a border of
    /// `border` samples. The area keeps its full `(block + 2*border)` size at
    /// the image edges; samples outside the image get zero weight.
    #[allow(clippy::too_many_arguments)]
    pub fn for_block(
        sensor: &SensorImage,
        pattern: &QuadrantPattern,
        block_x: usize,
        block_y: usize,
        block_size: usize,
        border: usize,
        weighting: Weighting,
    ) -> Result<Self> {
        if pattern.meaning() != CodeMeaning::Discarded {
            return Err(Error::InvalidArgument(
                "reconstruction needs a three-quarter pattern (discarded-quadrant codes)".into(),
            ));
        }
        if (sensor.width(), sensor.height()) != (pattern.width(), pattern.height()) {
            return Err(Error::DimensionMismatch(format!(
                "sensor {}x{} vs pattern {}x{}",
                sensor.width(),
                sensor.height(),
                pattern.width(),
                pattern.height()
            )));
        }
        if block_size < 2 || block_size % 2 != 0 || border % 2 != 0 {
            return Err(Error::InvalidArgument(format!(
                "block size {block_size} and border {border} must be even (block >= 2)"
            )));
        }
        let (fine_w, fine_h) = sensor.fine_dims();
        if block_x % 2 != 0 || block_y % 2 != 0 || block_x >= fine_w || block_y >= fine_h {
            return Err(Error::InvalidArgument(format!(
                "block origin ({block_x}, {block_y}) must be even and inside the image"
            )));
        }
        let side = block_size + 2 * border;
        let (rows, cols) = (side, side);
        let area_x = block_x as isize - border as isize;
        let area_y = block_y as isize - border as isize;
        let groups = rows * cols / 4;
        let half = rows / 2;
        let mut sensor_vals = vec![0.0; groups];
        let mut codes = vec![0u8; groups];
        let mut inside = vec![false; groups];
        for g in 0..groups {
            let sx = (area_x / 2) + (g / half) as isize;
            let sy = (area_y / 2) + (g % half) as isize;
            if sx >= 0 && sy >= 0 && (sx as usize) < sensor.width() && (sy as usize) < sensor.height() {
                let (sx, sy) = (sx as usize, sy as usize);
                sensor_vals[g] = sensor.get(sx, sy);
                codes[g] = pattern.code(sx, sy);
                inside[g] = true;
            }
        }
        let weights = weight_function(rows, cols, &codes, &inside, weighting);
        Ok(Self {
            block_x,
            block_y,
            block_w: block_size.min(fine_w - block_x),
            block_h: block_size.min(fine_h - block_y),
            area_x,
            area_y,
            rows,
            cols,
            sensor: sensor_vals,
            codes,
            inside,
            weights,
        })
    }

    /// Context from raw parts, with every group inside the image.
    pub fn from_parts(rows: usize, cols: usize, sensor: Vec<f64>, codes: Vec<u8>, weighting: Weighting) -> Result<Self> {
        let groups = rows * cols / 4;
        if rows % 2 != 0 || cols % 2 != 0 || rows == 0 || cols == 0 {
            return Err(Error::InvalidArgument(format!("area {rows}x{cols} must be even")));
        }
        if sensor.len() != groups || codes.len() != groups {
            return Err(Error::DimensionMismatch(format!(
                "{rows}x{cols} area needs {groups} groups, got {} values and {} codes",
                sensor.len(),
                codes.len()
            )));
        }
        if let Some((index, &code)) = codes.iter().enumerate().find(|(_, &c)| c >= 4) {
            return Err(Error::InvalidQuadrantCode { code, index });
        }
        let inside = vec![true; groups];
        let weights = weight_function(rows, cols, &codes, &inside, weighting);
        Ok(Self {
            block_x: 0,
            block_y: 0,
            block_w: cols,
            block_h: rows,
            area_x: 0,
            area_y: 0,
            rows,
            cols,
            sensor,
            codes,
            inside,
            weights,
        })
    }

    pub fn len(&self) -> usize {
        self.rows * self.cols
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn groups(&self) -> usize {
        self.rows * self.cols / 4
    }

    /// Whether sample `index` (scan order) lies on a light-sensitive quadrant
    /// inside the image.
    pub fn is_sensitive(&self, index: usize) -> bool {
        let g = index / 4;
        self.inside[g] && (index % 4) as u8 != self.codes[g]
    }

    /// Sum of the weights of the four samples of each group.
    pub fn group_weight_totals(&self) -> Vec<f64> {
        self.weights.chunks_exact(4).map(|c| c.iter().sum()).collect()
    }

    /// Area coordinates `(m, n)` of the block's top-left sample.
    pub fn block_offset(&self) -> (usize, usize) {
        (
            (self.block_y as isize - self.area_y) as usize,
            (self.block_x as isize - self.area_x) as usize,
        )
    }
}

/// Weight vector in scan order: zero on discarded quadrants and outside the
/// image, otherwise as selected by `weighting`.
pub fn weight_function(rows: usize, cols: usize, codes: &[u8], inside: &[bool], weighting: Weighting) -> Vec<f64> {
    let cm = (rows as f64 - 1.0) / 2.0;
    let cn = (cols as f64 - 1.0) / 2.0;
    (0..rows * cols)
        .map(|i| {
            let g = i / 4;
            if !inside[g] || (i % 4) as u8 == codes[g] {
                return 0.0;
            }
            match weighting {
                Weighting::Uniform => 1.0,
                Weighting::Isotropic { decay } => {
                    let (m, n) = scan_position_unchecked(i, rows);
                    let d = ((m as f64 - cm).powi(2) + (n as f64 - cn).powi(2)).sqrt();
                    decay.powf(d)
                }
            }
        })
        .collect()
}

/// Random context for tests: random sensor values, codes and decay, with
/// roughly one group in eight pushed outside the image.
#[cfg(test)]
pub(crate) fn random_context(rng: &mut impl rand::Rng, rows: usize, cols: usize) -> BlockContext {
    let groups = rows * cols / 4;
    let sensor = (0..groups).map(|_| rng.random::<f64>()).collect();
    let codes = (0..groups).map(|_| rng.random_range(0..4u8)).collect();
    let decay = rng.random_range(0.5..0.95);
    let mut ctx = BlockContext::from_parts(rows, cols, sensor, codes, Weighting::Isotropic { decay }).unwrap();
    for g in 0..groups {
        if rng.random_range(0..8) == 0 {
            ctx.inside[g] = false;
            ctx.sensor[g] = 0.0;
        }
    }
    ctx.weights = weight_function(rows, cols, &ctx.codes, &ctx.inside, Weighting::Isotropic { decay });
    ctx
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::imagecore::Image;

    #[test]
    fn within_group_order() {
        assert_eq!(scan_index(0, 0, 4, 4).unwrap(), 0);
        assert_eq!(scan_index(1, 0, 4, 4).unwrap(), 1);
        assert_eq!(scan_index(0, 1, 4, 4).unwrap(), 2);
        assert_eq!(scan_index(1, 1, 4, 4).unwrap(), 3);
        assert_eq!(scan_index(2, 0, 4, 4).unwrap(), 4);
        assert_eq!(scan_index(0, 2, 4, 4).unwrap(), 8);
    }

    #[test]
    fn scan_is_bijective() {
        let (rows, cols) = (8, 6);
        let mut seen = vec![false; rows * cols];
        for m in 0..rows {
            for n in 0..cols {
                let i = scan_index(m, n, rows, cols).unwrap();
                assert!(!seen[i]);
                seen[i] = true;
                assert_eq!(scan_position(i, rows, cols).unwrap(), (m, n));
            }
        }
    }

    #[test]
    fn scan_rejects_out_of_range() {
        assert!(scan_index(4, 0, 4, 4).is_err());
        assert!(scan_index(0, 7, 8, 6).is_err());
        assert!(scan_position(48, 8, 6).is_err());
    }

    #[test]
    fn weights_zero_on_discarded() {
        let codes = vec![1, 3, 2, 0];
        let w = weight_function(4, 4, &codes, &[true; 4], Weighting::Isotropic { decay: 0.7 });
        for (g, &c) in codes.iter().enumerate() {
            assert_eq!(w[4 * g + c as usize], 0.0);
        }
        let sensitive = w.iter().filter(|&&v| v > 0.0).count();
        assert_eq!(sensitive, 12);
    }

    #[test]
    fn weight_formula() {
        let codes = vec![3; 4];
        let w = weight_function(4, 4, &codes, &[true; 4], Weighting::Isotropic { decay: 0.7 });
        // (m, n) = (0, 2): distance sqrt(1.5^2 + 0.5^2)
        let i = scan_index(0, 2, 4, 4).unwrap();
        let d = (1.5f64 * 1.5 + 0.25).sqrt();
        assert!((w[i] - 0.7f64.powf(d)).abs() < 1e-15);
    }

    #[test]
    fn max_weight_on_32_area() {
        let codes = vec![0; 256];
        let w = weight_function(32, 32, &codes, &[true; 256], Weighting::Isotropic { decay: 0.7 });
        // exhaustive scan over the full grid with the discarded samples
        // filled back in from the formula
        let mut best: f64 = 0.0;
        let mut at = Vec::new();
        for m in 0..32 {
            for n in 0..32 {
                let d = ((m as f64 - 15.5).powi(2) + (n as f64 - 15.5).powi(2)).sqrt();
                let v = 0.7f64.powf(d);
                if v > best + 1e-15 {
                    best = v;
                    at.clear();
                }
                if (v - best).abs() <= 1e-15 {
                    at.push((m, n));
                }
            }
        }
        assert!((best - 0.7f64.powf(0.5f64.sqrt())).abs() < 1e-15);
        // 0.7^(sqrt(2)/2) = 0.77710, quoted elsewhere as 0.7772
        assert!((best - 0.7772).abs() < 2e-4);
        assert_eq!(at, vec![(15, 15), (15, 16), (16, 15), (16, 16)]);
        let wmax = w.iter().cloned().fold(0.0, f64::max);
        assert!((wmax - best).abs() < 1e-15);
    }

    #[test]
    fn border_blocks_zero_weight_outside() {
        let sensor = SensorImage::new(Image::filled(8, 8, 0.5));
        let pattern = QuadrantPattern::new(8, 8, CodeMeaning::Discarded, vec![2; 64]).unwrap();
        let ctx = BlockContext::for_block(&sensor, &pattern, 0, 0, 4, 6, Weighting::Isotropic { decay: 0.7 }).unwrap();
        assert_eq!((ctx.rows, ctx.cols), (16, 16));
        assert_eq!(ctx.block_offset(), (6, 6));
        for i in 0..ctx.len() {
            let (m, n) = scan_position_unchecked(i, ctx.rows);
            let (y, x) = (ctx.area_y + m as isize, ctx.area_x + n as isize);
            let outside = x < 0 || y < 0 || x >= 16 || y >= 16;
            if outside {
                assert_eq!(ctx.weights[i], 0.0);
                assert!(!ctx.is_sensitive(i));
            }
            assert!(ctx.weights[i] >= 0.0);
        }
        assert!(ctx.weights.iter().any(|&w| w > 0.0));
    }

    #[test]
    fn rejects_kept_patterns() {
        let sensor = SensorImage::new(Image::filled(4, 4, 0.5));
        let pattern = QuadrantPattern::new(4, 4, CodeMeaning::Kept, vec![0; 16]).unwrap();
        assert!(BlockContext::for_block(&sensor, &pattern, 0, 0, 4, 2, Weighting::Uniform).is_err());
    }
}
