//! Two-dimensional Fourier atoms over a reconstruction area and the
//! low-frequency prior used during atom selection.

use std::f64::consts::PI;

use num_complex::Complex64;

use super::geometry::scan_position_unchecked;
use crate::error::{Error, Result};

/// Index of one Fourier atom over a `rows x cols` area.
///
/// Vertical frequency (along `m`) is `k mod rows`, horizontal frequency
/// (along `n`) is `k / rows`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FourierBasisIndex {
    pub k: usize,
    pub rows: usize,
    pub cols: usize,
}

impl FourierBasisIndex {
    pub fn new(k: usize, rows: usize, cols: usize) -> Result<Self> {
        if k >= rows * cols {
            return Err(Error::InvalidArgument(format!(
                "basis index {k} outside {rows}x{cols} area"
            )));
        }
        Ok(Self { k, rows, cols })
    }

    pub fn freq_m(&self) -> usize {
        self.k % self.rows
    }

    pub fn freq_n(&self) -> usize {
        self.k / self.rows
    }

    /// Distances of the two frequencies from their nearest zero, using the
    /// prior's substitution. The horizontal one divides by `cols`, so the
    /// pair is only meaningful for square areas.
    pub fn folded(&self) -> (f64, f64) {
        let hm = self.rows as f64 / 2.0;
        let hn = self.cols as f64 / 2.0;
        let k1 = (self.k % self.rows) as f64;
        let k2 = (self.k / self.cols) as f64;
        (hm - (k1 - hm).abs(), hn - (k2 - hn).abs())
    }

    /// Index of the atom with negated frequencies.
    pub fn conjugate(&self) -> usize {
        let a = (self.rows - self.freq_m()) % self.rows;
        let b = (self.cols - self.freq_n()) % self.cols;
        a + self.rows * b
    }
}

/// Atom `k` sampled on the area, in scan order.
pub fn basis_function(k: usize, rows: usize, cols: usize) -> Result<Vec<Complex64>> {
    let idx = FourierBasisIndex::new(k, rows, cols)?;
    let (fm, fn_) = (idx.freq_m(), idx.freq_n());
    Ok((0..rows * cols)
        .map(|i| {
            let (m, n) = scan_position_unchecked(i, rows);
            let phase = 2.0 * PI * (((fm * m) % rows) as f64 / rows as f64 + ((fn_ * n) % cols) as f64 / cols as f64);
            Complex64::from_polar(1.0, phase)
        })
        .collect())
}

/// OTF-shaped prior: one at DC, falling to zero at the diagonal Nyquist
/// corner.
pub fn frequency_prior(k: usize, rows: usize, cols: usize) -> Result<f64> {
    let idx = FourierBasisIndex::new(k, rows, cols)?;
    Ok(prior_of(&idx))
}

fn prior_of(idx: &FourierBasisIndex) -> f64 {
    let (a, b) = idx.folded();
    let (m, n) = (idx.rows as f64, idx.cols as f64);
    let r = (a * a / (m * m) + b * b / (n * n)).sqrt();
    (1.0 - 2f64.sqrt() * r).powi(2)
}

/// Priors for every atom of a square area.
pub fn frequency_priors(rows: usize, cols: usize) -> Result<Vec<f64>> {
    if rows != cols {
        return Err(Error::InvalidArgument(format!(
            "frequency prior needs a square area, got {rows}x{cols}"
        )));
    }
    Ok((0..rows * cols)
        .map(|k| prior_of(&FourierBasisIndex { k, rows, cols }))
        .collect())
}

/// `e^{2 pi i t / len}` for `t` in `0..len`.
pub(crate) fn twiddles(len: usize) -> Vec<Complex64> {
    (0..len)
        .map(|t| Complex64::from_polar(1.0, 2.0 * PI * t as f64 / len as f64))
        .collect()
}
