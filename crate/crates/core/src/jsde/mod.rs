//! Block-wise sparse reconstruction of the fine grid from three-quarter
//! sensor data.
//!
//! Each `B x B` block is reconstructed from an area that extends `W` samples
//! beyond it on every side. Within the area the sensor values are modelled as
//! the acquisition of a sparse sum of 2-D Fourier atoms, built greedily: each
//! iteration picks the atom that most reduces the weighted residual energy
//! (scaled by a low-frequency prior), and adds a damped fraction `gamma` of
//! its least-squares coefficient. Only the block's own samples are kept.

pub mod basis;
pub mod direct;
pub mod fast;
pub mod geometry;
pub mod model;
pub mod operators;
mod reconstruct;

use serde::{Deserialize, Serialize};

pub use basis::{basis_function, frequency_prior, frequency_priors, FourierBasisIndex};
pub use fast::{denominators_all, numerators_all};
pub use geometry::{scan_index, scan_position, weight_function, BlockContext, Weighting};
pub use model::{jsde_model, ModelGenerator, SolverSettings, SparseModel};
pub use operators::{aggregate, distribute};
pub use reconstruct::{reconstruct, reconstruct_with_report, Algorithm, ReconstructionReport};

use crate::error::{Error, Result};

/// Model generation parameters. Defaults: 4x4 blocks, 14-sample border,
/// 100 iterations, weight decay 0.7, damping 0.5.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct JsdeParams {
    pub block_size: usize,
    pub border_width: usize,
    pub iterations: usize,
    pub decay: f64,
    pub odc_gamma: f64,
}

impl Default for JsdeParams {
    fn default() -> Self {
        Self {
            block_size: 4,
            border_width: 14,
            iterations: 100,
            decay: 0.7,
            odc_gamma: 0.5,
        }
    }
}

impl JsdeParams {
    pub fn validate(&self) -> Result<()> {
        if self.block_size < 2 || self.block_size % 2 != 0 {
            return Err(Error::InvalidArgument(format!(
                "block size must be even and >= 2, got {}",
                self.block_size
            )));
        }
        if self.border_width % 2 != 0 {
            return Err(Error::InvalidArgument(format!(
                "border width must be even, got {}",
                self.border_width
            )));
        }
        if self.iterations == 0 {
            return Err(Error::InvalidArgument("iterations must be >= 1".into()));
        }
        if !(self.decay > 0.0 && self.decay < 1.0) {
            return Err(Error::InvalidArgument(format!(
                "decay must be in (0, 1), got {}",
                self.decay
            )));
        }
        if !(self.odc_gamma > 0.0 && self.odc_gamma <= 1.0) {
            return Err(Error::InvalidArgument(format!(
                "gamma must be in (0, 1], got {}",
                self.odc_gamma
            )));
        }
        Ok(())
    }

    /// Side length of the square reconstruction area.
    pub fn area_side(&self) -> usize {
        self.block_size + 2 * self.border_width
    }
}
