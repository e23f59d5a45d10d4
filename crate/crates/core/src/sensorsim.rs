//! Sensor layouts, acquisition and noise.
//!
//! Non-regular patterns draw one quadrant per sensor pixel, i.i.d. uniform
//! over the four codes, from ChaCha20 (`rand_chacha::ChaCha20Rng`) seeded via
//! `SeedableRng::seed_from_u64`. Each code is the top two bits of one
//! `next_u32()` call, pixels visited in row-major order. Changing any of this
//! changes every generated pattern; persist patterns as NSP1 files when
//! experiments must outlive the generator.

use std::fmt;
use std::str::FromStr;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, Normal, Poisson};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::imagecore::{CodeMeaning, HiResImage, Image, QuadrantPattern, SensorImage, QUADRANT_OFFSETS};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum LayoutKind {
    #[serde(rename = "large")]
    LargePixel,
    #[serde(rename = "1q-nonreg")]
    QuarterNonReg,
    #[serde(rename = "3q-reg")]
    ThreeQuarterReg,
    #[serde(rename = "3q-nonreg")]
    ThreeQuarterNonReg,
}

impl LayoutKind {
    pub const ALL: [LayoutKind; 4] = [
        LayoutKind::LargePixel,
        LayoutKind::QuarterNonReg,
        LayoutKind::ThreeQuarterReg,
        LayoutKind::ThreeQuarterNonReg,
    ];

    /// Light-sensitive fraction of each sensor pixel.
    pub fn fill_factor(self) -> f64 {
        match self {
            LayoutKind::LargePixel => 1.0,
            LayoutKind::QuarterNonReg => 0.25,
            LayoutKind::ThreeQuarterReg | LayoutKind::ThreeQuarterNonReg => 0.75,
        }
    }

    pub fn meaning(self) -> CodeMeaning {
        match self {
            LayoutKind::QuarterNonReg => CodeMeaning::Kept,
            _ => CodeMeaning::Discarded,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            LayoutKind::LargePixel => "large",
            LayoutKind::QuarterNonReg => "1q-nonreg",
            LayoutKind::ThreeQuarterReg => "3q-reg",
            LayoutKind::ThreeQuarterNonReg => "3q-nonreg",
        }
    }
}

impl fmt::Display for LayoutKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for LayoutKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "large" | "large-pixel" => Ok(LayoutKind::LargePixel),
            "1q-nonreg" | "quarter-nonreg" => Ok(LayoutKind::QuarterNonReg),
            "3q-reg" | "three-quarter-reg" => Ok(LayoutKind::ThreeQuarterReg),
            "3q-nonreg" | "three-quarter-nonreg" => Ok(LayoutKind::ThreeQuarterNonReg),
            _ => Err(Error::InvalidArgument(format!(
                "unknown layout `{s}` (expected large, 1q-nonreg, 3q-reg or 3q-nonreg)"
            ))),
        }
    }
}

/// Shot and readout noise configuration, in electrons.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoiseParams {
    pub full_well: f64,
    pub readout_sigma: f64,
    pub enabled: bool,
}

impl Default for NoiseParams {
    fn default() -> Self {
        Self {
            full_well: 10_000.0,
            readout_sigma: 25.0,
            enabled: false,
        }
    }
}

impl NoiseParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.full_well > 0.0) || !self.full_well.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "full well must be positive, got {}",
                self.full_well
            )));
        }
        if !(self.readout_sigma >= 0.0) || !self.readout_sigma.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "readout sigma must be non-negative, got {}",
                self.readout_sigma
            )));
        }
        Ok(())
    }
}

pub fn generate_pattern(layout: LayoutKind, width: usize, height: usize, seed: u64) -> Result<QuadrantPattern> {
    if width == 0 || height == 0 {
        return Err(Error::InvalidArgument(format!(
            "pattern dimensions must be non-zero, got {width}x{height}"
        )));
    }
    let n = width * height;
    let codes = match layout {
        LayoutKind::LargePixel => vec![0; n],
        LayoutKind::ThreeQuarterReg => vec![3; n],
        LayoutKind::ThreeQuarterNonReg | LayoutKind::QuarterNonReg => {
            let mut rng = ChaCha20Rng::seed_from_u64(seed);
            (0..n).map(|_| (rng.next_u32() >> 30) as u8).collect()
        }
    };
    QuadrantPattern::new(width, height, layout.meaning(), codes)
}

/// Noiseless acquisition: each sensor pixel averages its light-sensitive
/// quadrants.
pub fn acquire(hires: &HiResImage, pattern: &QuadrantPattern, layout: LayoutKind) -> Result<SensorImage> {
    let (sw, sh) = hires.sensor_dims();
    if (sw, sh) != (pattern.width(), pattern.height()) {
        return Err(Error::DimensionMismatch(format!(
            "fine image {}x{} needs a {sw}x{sh} pattern, got {}x{}",
            hires.width(),
            hires.height(),
            pattern.width(),
            pattern.height()
        )));
    }
    if layout != LayoutKind::LargePixel && pattern.meaning() != layout.meaning() {
        return Err(Error::InvalidArgument(format!(
            "layout {layout} expects pattern meaning {:?}, got {:?}",
            layout.meaning(),
            pattern.meaning()
        )));
    }
    let out = Image::from_fn(sw, sh, |x, y| {
        let q = |c: usize| {
            let (dx, dy) = QUADRANT_OFFSETS[c];
            hires.get(2 * x + dx, 2 * y + dy)
        };
        let total = q(0) + q(1) + q(2) + q(3);
        let code = pattern.code(x, y) as usize;
        match layout {
            LayoutKind::LargePixel => total / 4.0,
            LayoutKind::QuarterNonReg => q(code),
            LayoutKind::ThreeQuarterReg | LayoutKind::ThreeQuarterNonReg => (total - q(code)) / 3.0,
        }
    });
    Ok(SensorImage::new(out))
}

/// Poisson shot noise plus Gaussian readout noise. The signal is converted to
/// electrons using the layout's fill factor so that smaller sensitive areas
/// see relatively more shot noise, then normalised back and clamped.
pub fn apply_noise(sensor: &SensorImage, layout: LayoutKind, params: &NoiseParams, seed: u64) -> Result<SensorImage> {
    if !params.enabled {
        return Ok(sensor.clone());
    }
    params.validate()?;
    let scale = params.full_well * layout.fill_factor();
    let readout = Normal::new(0.0, params.readout_sigma)
        .map_err(|e| Error::InvalidArgument(format!("readout noise: {e}")))?;
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let mut out = (**sensor).clone();
    for v in out.samples_mut() {
        let lambda = v.clamp(0.0, 1.0) * scale;
        let electrons = if lambda > 0.0 {
            Poisson::new(lambda)
                .map_err(|e| Error::InvalidArgument(format!("shot noise for lambda {lambda}: {e}")))?
                .sample(&mut rng)
        } else {
            0.0
        };
        let electrons = if params.readout_sigma > 0.0 {
            electrons + readout.sample(&mut rng)
        } else {
            electrons
        };
        *v = (electrons / scale).clamp(0.0, 1.0);
    }
    Ok(SensorImage::new(out))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn group(values: [f64; 4]) -> HiResImage {
        // values in within-group scan order
        let mut img = Image::filled(2, 2, 0.0);
        for (c, v) in values.iter().enumerate() {
            let (dx, dy) = QUADRANT_OFFSETS[c];
            img.set(dx, dy, *v);
        }
        HiResImage::new(img).unwrap()
    }

    #[test]
    fn regular_pattern_is_constant() {
        let p = generate_pattern(LayoutKind::ThreeQuarterReg, 2, 2, 99).unwrap();
        assert_eq!(p.codes(), &[3, 3, 3, 3]);
        assert_eq!(p.meaning(), CodeMeaning::Discarded);
    }

    #[test]
    fn quarter_pattern_is_kept_meaning() {
        let p = generate_pattern(LayoutKind::QuarterNonReg, 4, 4, 3).unwrap();
        assert_eq!(p.meaning(), CodeMeaning::Kept);
        let q = generate_pattern(LayoutKind::ThreeQuarterNonReg, 4, 4, 3).unwrap();
        assert_eq!(p.codes(), q.codes());
    }

    #[test]
    fn nonregular_pattern_is_deterministic() {
        let a = generate_pattern(LayoutKind::ThreeQuarterNonReg, 100, 100, 7).unwrap();
        let b = generate_pattern(LayoutKind::ThreeQuarterNonReg, 100, 100, 7).unwrap();
        let c = generate_pattern(LayoutKind::ThreeQuarterNonReg, 100, 100, 8).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn code_frequencies_are_uniform() {
        let p = generate_pattern(LayoutKind::ThreeQuarterNonReg, 1000, 1000, 1).unwrap();
        let mut counts = [0usize; 4];
        for &c in p.codes() {
            counts[c as usize] += 1;
        }
        let n = 1e6;
        let chi2: f64 = counts.iter().map(|&c| (c as f64 - n / 4.0).powi(2) / (n / 4.0)).sum();
        for c in counts {
            let f = c as f64 / n;
            assert!((0.24..=0.26).contains(&f), "frequency {f}");
        }
        // 3 degrees of freedom, p = 0.001 critical value
        assert!(chi2 < 16.27, "chi2 {chi2}");
    }

    #[test]
    fn zero_dims_rejected() {
        assert!(generate_pattern(LayoutKind::LargePixel, 0, 3, 0).is_err());
    }

    #[test]
    fn three_quarter_group_average() {
        let s = group([0.0, 0.3, 0.6, 0.9]);
        let p = QuadrantPattern::new(1, 1, CodeMeaning::Discarded, vec![1]).unwrap();
        let out = acquire(&s, &p, LayoutKind::ThreeQuarterNonReg).unwrap();
        assert!((out.get(0, 0) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn large_pixel_mean() {
        let s = group([0.2, 0.4, 0.6, 0.8]);
        let p = generate_pattern(LayoutKind::LargePixel, 1, 1, 0).unwrap();
        let out = acquire(&s, &p, LayoutKind::LargePixel).unwrap();
        assert!((out.get(0, 0) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn quarter_keeps_single_quadrant() {
        let s = group([0.2, 0.4, 0.6, 0.8]);
        let p = QuadrantPattern::new(1, 1, CodeMeaning::Kept, vec![2]).unwrap();
        let out = acquire(&s, &p, LayoutKind::QuarterNonReg).unwrap();
        assert_eq!(out.get(0, 0), 0.6);
    }

    #[test]
    fn acquire_matches_mask_definition() {
        let hires = HiResImage::new(Image::from_fn(8, 6, |x, y| ((x * 7 + y * 3) % 11) as f64 / 10.0)).unwrap();
        let p = generate_pattern(LayoutKind::ThreeQuarterNonReg, 4, 3, 5).unwrap();
        let out = acquire(&hires, &p, LayoutKind::ThreeQuarterNonReg).unwrap();
        for y in 0..3 {
            for x in 0..4 {
                let mut expect = 0.0;
                for (dx, dy) in QUADRANT_OFFSETS {
                    expect += hires.get(2 * x + dx, 2 * y + dy) * p.mask(2 * x + dx, 2 * y + dy);
                }
                assert!((out.get(x, y) - expect).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn acquire_rejects_dim_mismatch() {
        let hires = HiResImage::new(Image::filled(8, 8, 0.5)).unwrap();
        let p = generate_pattern(LayoutKind::ThreeQuarterReg, 3, 4, 0).unwrap();
        assert!(matches!(
            acquire(&hires, &p, LayoutKind::ThreeQuarterReg),
            Err(Error::DimensionMismatch(_))
        ));
    }

    #[test]
    fn noise_zero_intensity_stays_zero() {
        let s = SensorImage::new(Image::filled(16, 16, 0.0));
        let np = NoiseParams {
            readout_sigma: 0.0,
            enabled: true,
            ..Default::default()
        };
        let out = apply_noise(&s, LayoutKind::ThreeQuarterNonReg, &np, 3).unwrap();
        assert!(out.samples().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn huge_full_well_is_nearly_noiseless() {
        let s = SensorImage::new(Image::filled(32, 32, 0.5));
        let np = NoiseParams {
            full_well: 1e9,
            readout_sigma: 0.0,
            enabled: true,
        };
        let out = apply_noise(&s, LayoutKind::ThreeQuarterNonReg, &np, 11).unwrap();
        let worst = out.samples().iter().map(|v| (v - 0.5).abs()).fold(0.0, f64::max);
        assert!(worst < 1e-3, "{worst}");
    }

    #[test]
    fn noise_stddev_matches_poisson_plus_gaussian() {
        let s = SensorImage::new(Image::filled(400, 250, 0.5));
        let np = NoiseParams {
            enabled: true,
            ..Default::default()
        };
        let out = apply_noise(&s, LayoutKind::ThreeQuarterNonReg, &np, 2024).unwrap();
        let n = out.samples().len() as f64;
        let mean = out.samples().iter().sum::<f64>() / n;
        let var = out.samples().iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
        let expect = (0.5f64 * 7500.0 + 625.0).sqrt() / 7500.0;
        // the closed form gives 0.008819; the rounded 0.00866 is also met
        assert!((var.sqrt() / expect - 1.0).abs() < 0.1, "{} vs {expect}", var.sqrt());
        assert!((var.sqrt() / 0.00866 - 1.0).abs() < 0.1, "{}", var.sqrt());
    }

    #[test]
    fn noise_mean_converges_over_seeds() {
        let s = SensorImage::new(Image::new(2, 1, vec![0.3, 0.7]).unwrap());
        let np = NoiseParams {
            enabled: true,
            ..Default::default()
        };
        let layout = LayoutKind::QuarterNonReg;
        let seeds = 10_000;
        let mut sums = [0.0; 2];
        for seed in 0..seeds {
            let out = apply_noise(&s, layout, &np, seed).unwrap();
            sums[0] += out.get(0, 0);
            sums[1] += out.get(1, 0);
        }
        let scale = np.full_well * layout.fill_factor();
        for (i, v) in [0.3, 0.7].into_iter().enumerate() {
            let sd = (v * scale + np.readout_sigma.powi(2)).sqrt() / scale;
            let se = sd / (seeds as f64).sqrt();
            let mean = sums[i] / seeds as f64;
            assert!((mean - v).abs() < 3.0 * se, "mean {mean} vs {v} (se {se})");
        }
    }

    #[test]
    fn noise_is_seeded() {
        let s = SensorImage::new(Image::filled(8, 8, 0.4));
        let np = NoiseParams {
            enabled: true,
            ..Default::default()
        };
        let a = apply_noise(&s, LayoutKind::LargePixel, &np, 5).unwrap();
        let b = apply_noise(&s, LayoutKind::LargePixel, &np, 5).unwrap();
        let c = apply_noise(&s, LayoutKind::LargePixel, &np, 6).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn layout_names_round_trip() {
        for l in LayoutKind::ALL {
            assert_eq!(l.name().parse::<LayoutKind>().unwrap(), l);
        }
        assert!("4q".parse::<LayoutKind>().is_err());
    }

    proptest! {
        #[test]
        fn acquire_is_linear(
            a in prop::collection::vec(0.0f64..1.0, 64),
            b in prop::collection::vec(0.0f64..1.0, 64),
            alpha in -2.0f64..2.0,
            beta in -2.0f64..2.0,
            seed in any::<u64>(),
            layout_idx in 0usize..4,
        ) {
            let layout = LayoutKind::ALL[layout_idx];
            let p = generate_pattern(layout, 4, 4, seed).unwrap();
            let sa = HiResImage::new(Image::new(8, 8, a).unwrap()).unwrap();
            let sb = HiResImage::new(Image::new(8, 8, b).unwrap()).unwrap();
            let mix = HiResImage::new(Image::from_fn(8, 8, |x, y| alpha * sa.get(x, y) + beta * sb.get(x, y))).unwrap();
            let oa = acquire(&sa, &p, layout).unwrap();
            let ob = acquire(&sb, &p, layout).unwrap();
            let om = acquire(&mix, &p, layout).unwrap();
            for i in 0..16 {
                let lin = alpha * oa.samples()[i] + beta * ob.samples()[i];
                prop_assert!((om.samples()[i] - lin).abs() < 1e-12);
            }
        }

        #[test]
        fn acquire_preserves_constants(v in 0.0f64..=1.0, seed in any::<u64>(), layout_idx in 0usize..4) {
            let layout = LayoutKind::ALL[layout_idx];
            let p = generate_pattern(layout, 3, 5, seed).unwrap();
            let s = HiResImage::new(Image::filled(6, 10, v)).unwrap();
            let out = acquire(&s, &p, layout).unwrap();
            for &o in out.samples() {
                prop_assert!((o - v).abs() < 1e-15);
            }
        }
    }
}
