//! Acquisition followed by reconstruction, shared by the CLI, the MTF sweep
//! and the experiment tests.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::baselines::{bicubic_x2, pixel_enlargement};
use crate::error::{Error, Result};
use crate::imagecore::{HiResImage, QuadrantPattern, SensorImage};
use crate::jsde::{reconstruct, Algorithm, JsdeParams};
use crate::sensorsim::{acquire, apply_noise, generate_pattern, LayoutKind, NoiseParams};

/// Reconstruction method applied to a sensor image.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Jsde,
    Mp,
    Pe,
    Bicubic,
}

impl Method {
    pub fn needs_pattern(self) -> bool {
        matches!(self, Method::Jsde | Method::Mp)
    }

    pub fn name(self) -> &'static str {
        match self {
            Method::Jsde => "jsde",
            Method::Mp => "mp",
            Method::Pe => "pe",
            Method::Bicubic => "bicubic",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "jsde" => Ok(Method::Jsde),
            "mp" => Ok(Method::Mp),
            "pe" => Ok(Method::Pe),
            "bicubic" | "bic" => Ok(Method::Bicubic),
            _ => Err(Error::InvalidArgument(format!("unknown method `{s}`"))),
        }
    }
}

/// Upsample a sensor image with `method`. The pattern is required by the
/// sparse methods and ignored by the baselines.
pub fn reconstruct_with(
    sensor: &SensorImage,
    pattern: Option<&QuadrantPattern>,
    method: Method,
    params: &JsdeParams,
) -> Result<HiResImage> {
    let sparse = |algo| {
        let pattern = pattern.ok_or_else(|| Error::InvalidArgument(format!("method {method} needs a pattern")))?;
        reconstruct(sensor, pattern, params, algo)
    };
    match method {
        Method::Jsde => sparse(Algorithm::Jsde),
        Method::Mp => sparse(Algorithm::Mp),
        Method::Pe => Ok(pixel_enlargement(sensor)),
        Method::Bicubic => Ok(bicubic_x2(sensor)),
    }
}

/// One simulated capture: pattern, sensor readout (noisy if enabled) and
/// reconstruction.
#[derive(Clone, Debug)]
pub struct Experiment {
    pub layout: LayoutKind,
    pub method: Method,
    pub params: JsdeParams,
    pub noise: NoiseParams,
    pub seed: u64,
}

impl Experiment {
    pub fn new(layout: LayoutKind, method: Method) -> Self {
        Self {
            layout,
            method,
            params: JsdeParams::default(),
            noise: NoiseParams::default(),
            seed: 0,
        }
    }

    pub fn with_params(mut self, params: JsdeParams) -> Self {
        self.params = params;
        self
    }

    pub fn with_noise(mut self, noise: NoiseParams) -> Self {
        self.noise = noise;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    /// Pattern and sensor readout for `truth`. The pattern uses `seed`, the
    /// noise `seed + 1`.
    pub fn capture(&self, truth: &HiResImage) -> Result<(QuadrantPattern, SensorImage)> {
        let (w, h) = truth.sensor_dims();
        let pattern = generate_pattern(self.layout, w, h, self.seed)?;
        let clean = acquire(truth, &pattern, self.layout)?;
        let sensor = apply_noise(&clean, self.layout, &self.noise, self.seed.wrapping_add(1))?;
        Ok((pattern, sensor))
    }

    pub fn run(&self, truth: &HiResImage) -> Result<HiResImage> {
        let (pattern, sensor) = self.capture(truth)?;
        reconstruct_with(&sensor, Some(&pattern), self.method, &self.params)
    }
}
