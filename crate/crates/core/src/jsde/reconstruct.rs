use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::geometry::{BlockContext, Weighting};
use super::model::{ModelGenerator, SolverSettings};
use super::JsdeParams;
use crate::error::{Error, Result};
use crate::imagecore::{CodeMeaning, HiResImage, Image, QuadrantPattern, SensorImage};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    /// Weighted, prior-guided, damped model generation.
    Jsde,
    /// Plain matching pursuit: uniform weights on sensitive samples, no
    /// prior, full projection steps.
    Mp,
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Algorithm::Jsde => "jsde",
            Algorithm::Mp => "mp",
        })
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "jsde" => Ok(Algorithm::Jsde),
            "mp" => Ok(Algorithm::Mp),
            _ => Err(Error::InvalidArgument(format!("unknown sparse algorithm `{s}`"))),
        }
    }
}

#[derive(Clone, Debug)]
pub struct ReconstructionReport {
    pub image: HiResImage,
    /// Largest imaginary part among the extracted samples.
    pub max_imaginary: f64,
    /// Blocks that fell back to pixel enlargement.
    pub fallback_blocks: usize,
}

struct BlockResult {
    values: Vec<f64>,
    max_imaginary: f64,
    fallback: bool,
}

/// Reconstruct the fine grid from a three-quarter sensor image.
///
/// Blocks are processed independently, so the output does not depend on the
/// number of worker threads. Output samples are clamped to `[0, 1]`.
pub fn reconstruct(
    sensor: &SensorImage,
    pattern: &QuadrantPattern,
    params: &JsdeParams,
    algorithm: Algorithm,
) -> Result<HiResImage> {
    Ok(reconstruct_with_report(sensor, pattern, params, algorithm)?.image)
}

pub fn reconstruct_with_report(
    sensor: &SensorImage,
    pattern: &QuadrantPattern,
    params: &JsdeParams,
    algorithm: Algorithm,
) -> Result<ReconstructionReport> {
    params.validate()?;
    if pattern.meaning() != CodeMeaning::Discarded {
        return Err(Error::InvalidArgument(
            "quarter-sampling (kept-quadrant) patterns cannot be reconstructed by the sparse solver".into(),
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
    let (weighting, settings) = match algorithm {
        Algorithm::Jsde => (Weighting::Isotropic { decay: params.decay }, SolverSettings::from(params)),
        Algorithm::Mp => (Weighting::Uniform, SolverSettings::matching_pursuit(params.iterations)),
    };
    let (fine_w, fine_h) = sensor.fine_dims();
    let b = params.block_size;
    let blocks: Vec<(usize, usize)> = (0..fine_h)
        .step_by(b)
        .flat_map(|y| (0..fine_w).step_by(b).map(move |x| (x, y)))
        .collect();
    let side = params.area_side();

    let results: Vec<BlockResult> = blocks
        .par_iter()
        .map_init(
            || ModelGenerator::new(side, side),
            |generator, &(bx, by)| -> Result<BlockResult> {
                let generator = generator.as_mut().map_err(|e| Error::InvalidArgument(e.to_string()))?;
                let ctx = BlockContext::for_block(sensor, pattern, bx, by, b, params.border_width, weighting)?;
                let model = generator.generate(&ctx, settings)?;
                let (m0, n0) = ctx.block_offset();
                let mut values = Vec::with_capacity(ctx.block_w * ctx.block_h);
                let mut max_imaginary: f64 = 0.0;
                for i in 0..ctx.block_h {
                    for j in 0..ctx.block_w {
                        let v = model.value_at(m0 + i, n0 + j);
                        max_imaginary = max_imaginary.max(v.im.abs());
                        values.push(v.re);
                    }
                }
                Ok(BlockResult {
                    values,
                    max_imaginary,
                    fallback: model.is_fallback(),
                })
            },
        )
        .collect::<Result<_>>()?;

    let mut out = Image::filled(fine_w, fine_h, 0.0);
    let mut max_imaginary: f64 = 0.0;
    let mut fallback_blocks = 0;
    for (&(bx, by), res) in blocks.iter().zip(&results) {
        let bw = b.min(fine_w - bx);
        for (idx, &v) in res.values.iter().enumerate() {
            out.set(bx + idx % bw, by + idx / bw, v.clamp(0.0, 1.0));
        }
        max_imaginary = max_imaginary.max(res.max_imaginary);
        fallback_blocks += res.fallback as usize;
    }
    Ok(ReconstructionReport {
        image: HiResImage::new(out)?,
        max_imaginary,
        fallback_blocks,
    })
}
