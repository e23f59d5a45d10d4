//! Image quality and resolution measures.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::imagecore::Image;
use crate::jsde::JsdeParams;
use crate::patterns::line_pattern;
use crate::pipeline::{Experiment, Method};
use crate::sensorsim::LayoutKind;

fn check_dims(a: &Image, b: &Image) -> Result<()> {
    if !a.same_dims(b) {
        return Err(Error::DimensionMismatch(format!(
            "{}x{} vs {}x{}",
            a.width(),
            a.height(),
            b.width(),
            b.height()
        )));
    }
    Ok(())
}

/// Peak signal-to-noise ratio in dB for unit peak. Identical images give
/// `f64::INFINITY`.
pub fn psnr(a: &Image, b: &Image) -> Result<f64> {
    check_dims(a, b)?;
    let n = a.samples().len() as f64;
    let mse = a.samples().iter().zip(b.samples()).map(|(x, y)| (x - y).powi(2)).sum::<f64>() / n;
    if mse == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(-10.0 * mse.log10())
}

const SSIM_WINDOW: usize = 11;
const SSIM_SIGMA: f64 = 1.5;
const SSIM_C1: f64 = 0.01 * 0.01;
const SSIM_C2: f64 = 0.03 * 0.03;

fn gaussian_window() -> [f64; SSIM_WINDOW] {
    let c = (SSIM_WINDOW / 2) as f64;
    let mut w: [f64; SSIM_WINDOW] = std::array::from_fn(|i| (-((i as f64 - c).powi(2)) / (2.0 * SSIM_SIGMA * SSIM_SIGMA)).exp());
    let s: f64 = w.iter().sum();
    w.iter_mut().for_each(|v| *v /= s);
    w
}

/// Separable valid-region filtering of a row-major `w x h` buffer.
fn filter_valid(data: &[f64], w: usize, h: usize, k: &[f64]) -> Vec<f64> {
    let n = k.len();
    let (ow, oh) = (w + 1 - n, h + 1 - n);
    let mut tmp = vec![0.0; ow * h];
    for y in 0..h {
        let row = &data[y * w..(y + 1) * w];
        for x in 0..ow {
            tmp[y * ow + x] = k.iter().zip(&row[x..x + n]).map(|(a, b)| a * b).sum();
        }
    }
    let mut out = vec![0.0; ow * oh];
    for y in 0..oh {
        for x in 0..ow {
            out[y * ow + x] = k.iter().enumerate().map(|(i, a)| a * tmp[(y + i) * ow + x]).sum();
        }
    }
    out
}

/// Mean structural similarity with an 11x11 Gaussian window (sigma 1.5),
/// `K1 = 0.01`, `K2 = 0.03`, unit dynamic range, averaged over the positions
/// where the window fits entirely.
pub fn ssim(a: &Image, b: &Image) -> Result<f64> {
    check_dims(a, b)?;
    let (w, h) = (a.width(), a.height());
    if w < SSIM_WINDOW || h < SSIM_WINDOW {
        return Err(Error::InvalidArgument(format!(
            "SSIM needs at least {SSIM_WINDOW}x{SSIM_WINDOW}, got {w}x{h}"
        )));
    }
    let k = gaussian_window();
    let (x, y) = (a.samples(), b.samples());
    let prod = |f: &dyn Fn(f64, f64) -> f64| -> Vec<f64> { x.iter().zip(y).map(|(&p, &q)| f(p, q)).collect() };
    let mx = filter_valid(x, w, h, &k);
    let my = filter_valid(y, w, h, &k);
    let mxx = filter_valid(&prod(&|p, _| p * p), w, h, &k);
    let myy = filter_valid(&prod(&|_, q| q * q), w, h, &k);
    let mxy = filter_valid(&prod(&|p, q| p * q), w, h, &k);
    let total: f64 = (0..mx.len())
        .map(|i| {
            let (ux, uy) = (mx[i], my[i]);
            let vx = mxx[i] - ux * ux;
            let vy = myy[i] - uy * uy;
            let cxy = mxy[i] - ux * uy;
            ((2.0 * ux * uy + SSIM_C1) * (2.0 * cxy + SSIM_C2)) / ((ux * ux + uy * uy + SSIM_C1) * (vx + vy + SSIM_C2))
        })
        .sum();
    Ok(total / mx.len() as f64)
}

/// Contrast measurement at one relative frequency.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct MtfPoint {
    pub rel_freq: f64,
    pub contrast: f64,
    pub imax: f64,
    pub imin: f64,
}

fn michelson(imax: f64, imin: f64) -> f64 {
    if imax + imin > 0.0 {
        (imax - imin) / (imax + imin)
    } else {
        0.0
    }
}

fn interior(region: &Image, margin: usize) -> Result<(usize, usize)> {
    if region.width() <= 2 * margin || region.height() <= 2 * margin {
        return Err(Error::InvalidArgument(format!(
            "{}x{} region is empty after a {margin}-pixel margin",
            region.width(),
            region.height()
        )));
    }
    Ok((region.width() - margin, region.height() - margin))
}

/// `(Imax - Imin) / (Imax + Imin)` over the samples at least `margin` pixels
/// from every edge. Returns `(contrast, imax, imin)`.
pub fn contrast(region: &Image, margin: usize) -> Result<(f64, f64, f64)> {
    let (x1, y1) = interior(region, margin)?;
    let (mut imax, mut imin) = (f64::NEG_INFINITY, f64::INFINITY);
    for y in margin..y1 {
        for x in margin..x1 {
            let v = region.get(x, y);
            imax = imax.max(v);
            imin = imin.min(v);
        }
    }
    Ok((michelson(imax, imin), imax, imin))
}

/// Contrast of a vertical line pattern: each column inside the margin is
/// averaged over the interior rows first, then the extremes of that profile
/// are used. Averaging along the lines suppresses the noise-like error left
/// by non-regular sampling, which would otherwise inflate the min/max spread.
pub fn line_contrast(region: &Image, margin: usize) -> Result<(f64, f64, f64)> {
    let (x1, y1) = interior(region, margin)?;
    let rows = (y1 - margin) as f64;
    let profile = (margin..x1).map(|x| (margin..y1).map(|y| region.get(x, y)).sum::<f64>() / rows);
    let (imax, imin) = profile.fold((f64::NEG_INFINITY, f64::INFINITY), |(hi, lo), v| (hi.max(v), lo.min(v)));
    Ok((michelson(imax, imin), imax, imin))
}

/// Relative frequencies (percent of the sensor sampling rate) used by default.
pub const DEFAULT_MTF_FREQUENCIES: [f64; 8] = [2.0, 10.0, 26.0, 42.0, 58.0, 74.0, 90.0, 98.0];

/// Contrast curve: a `width x height` line pattern per frequency, captured
/// with `layout` (pattern seed `seed`) and reconstructed with `method`.
/// Contrast uses [`line_contrast`] with a margin of `B + W`.
pub fn mtf_sweep(
    layout: LayoutKind,
    method: Method,
    frequencies: &[f64],
    seed: u64,
    (width, height): (usize, usize),
    params: &JsdeParams,
) -> Result<Vec<MtfPoint>> {
    let experiment = Experiment::new(layout, method).with_params(*params).with_seed(seed);
    let margin = params.block_size + params.border_width;
    frequencies
        .iter()
        .map(|&rel_freq| {
            let truth = line_pattern(width, height, rel_freq)?;
            let out = experiment.run(&truth)?;
            let (contrast, imax, imin) = line_contrast(&out, margin)?;
            Ok(MtfPoint {
                rel_freq,
                contrast,
                imax,
                imin,
            })
        })
        .collect()
}
