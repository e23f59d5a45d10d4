//! Selection numerators and denominators for all atoms at once.
//!
//! The numerator `(D A phi_k)^H W r` collapses to a 2-D DFT: summing the
//! weighted residual over each group and spreading a third of that sum onto
//! the group's sensitive samples gives an array whose forward transform at
//! `k` is exactly the numerator. The denominator depends only on which pairs
//! of samples share a group, so it is a 3x3-tap trigonometric polynomial in
//! the two frequencies.

use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use super::basis::twiddles;
use super::geometry::{BlockContext, GROUP_OFFSETS};
use crate::error::{Error, Result};

/// FFT plans and buffers for one area size.
pub struct SpectralWorkspace {
    rows: usize,
    cols: usize,
    along_n: Arc<dyn Fft<f64>>,
    along_m: Arc<dyn Fft<f64>>,
    grid: Vec<Complex64>,
    transposed: Vec<Complex64>,
    scratch: Vec<Complex64>,
    tw_m: Vec<Complex64>,
    tw_n: Vec<Complex64>,
}

impl SpectralWorkspace {
    pub fn new(rows: usize, cols: usize) -> Self {
        let mut planner = FftPlanner::new();
        let along_n = planner.plan_fft_forward(cols);
        let along_m = planner.plan_fft_forward(rows);
        let scratch_len = along_n
            .get_inplace_scratch_len()
            .max(along_m.get_inplace_scratch_len());
        Self {
            rows,
            cols,
            along_n,
            along_m,
            grid: vec![Complex64::default(); rows * cols],
            transposed: vec![Complex64::default(); rows * cols],
            scratch: vec![Complex64::default(); scratch_len],
            tw_m: twiddles(rows),
            tw_n: twiddles(cols),
        }
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    /// Numerators from per-group weighted residual sums. Output is indexed by
    /// atom `k`.
    pub(crate) fn numerators_from_group_sums(&mut self, sums: &[Complex64], codes: &[u8], out: &mut [Complex64]) {
        let (rows, cols) = (self.rows, self.cols);
        let half = rows / 2;
        self.grid.fill(Complex64::default());
        for (g, (&s, &code)) in sums.iter().zip(codes).enumerate() {
            if s == Complex64::default() {
                continue;
            }
            let third = s / 3.0;
            let (m0, n0) = (2 * (g % half), 2 * (g / half));
            for (q, &(dm, dn)) in GROUP_OFFSETS.iter().enumerate() {
                if q as u8 != code {
                    self.grid[(m0 + dm) * cols + n0 + dn] = third;
                }
            }
        }
        self.along_n.process_with_scratch(&mut self.grid, &mut self.scratch);
        for m in 0..rows {
            for n in 0..cols {
                self.transposed[n * rows + m] = self.grid[m * cols + n];
            }
        }
        self.along_m.process_with_scratch(&mut self.transposed, &mut self.scratch);
        out.copy_from_slice(&self.transposed);
    }

    /// Denominators for every atom, computed from the nine pair-offset
    /// coefficients of the context.
    pub(crate) fn denominators(&self, ctx: &BlockContext) -> Vec<f64> {
        let taps = pair_offset_coefficients(ctx);
        let (rows, cols) = (self.rows, self.cols);
        let mut out = Vec::with_capacity(rows * cols);
        for k in 0..rows * cols {
            let (k1, k2) = (k % rows, k / rows);
            let em = [self.tw_m[(rows - k1) % rows], Complex64::new(1.0, 0.0), self.tw_m[k1]];
            let en = [self.tw_n[(cols - k2) % cols], Complex64::new(1.0, 0.0), self.tw_n[k2]];
            let mut acc = 0.0;
            for a in 0..3 {
                for b in 0..3 {
                    let c = taps[3 * a + b];
                    if c != 0.0 {
                        acc += c * (em[a] * en[b]).re;
                    }
                }
            }
            out.push(acc);
        }
        out
    }
}

/// `c_delta` for offsets `delta = (dm, dn)` in `{-1, 0, 1}^2`, stored at
/// `3 * (dm + 1) + (dn + 1)`: the weight total of every group times 1/9 times
/// the number of sensitive sample pairs at that offset.
pub fn pair_offset_coefficients(ctx: &BlockContext) -> [f64; 9] {
    let mut taps = [0.0; 9];
    for (g, total) in ctx.group_weight_totals().into_iter().enumerate() {
        if total == 0.0 {
            continue;
        }
        let code = ctx.codes[g] as usize;
        for (j, &(mj, nj)) in GROUP_OFFSETS.iter().enumerate() {
            if j == code {
                continue;
            }
            for (l, &(ml, nl)) in GROUP_OFFSETS.iter().enumerate() {
                if l == code {
                    continue;
                }
                let dm = mj as isize - ml as isize;
                let dn = nj as isize - nl as isize;
                taps[(3 * (dm + 1) + (dn + 1)) as usize] += total / 9.0;
            }
        }
    }
    taps
}

fn check_len(r: &[Complex64], ctx: &BlockContext) -> Result<()> {
    if r.len() != ctx.len() {
        return Err(Error::DimensionMismatch(format!(
            "residual has {} samples, area has {}",
            r.len(),
            ctx.len()
        )));
    }
    Ok(())
}

/// `(D A phi_k)^H W r` for every `k`, via one 2-D FFT.
pub fn numerators_all(r: &[Complex64], ctx: &BlockContext) -> Result<Vec<Complex64>> {
    check_len(r, ctx)?;
    let sums: Vec<Complex64> = r
        .chunks_exact(4)
        .zip(ctx.weights.chunks_exact(4))
        .map(|(rs, ws)| rs.iter().zip(ws).map(|(&x, &w)| x * w).sum())
        .collect();
    let mut ws = SpectralWorkspace::new(ctx.rows, ctx.cols);
    let mut out = vec![Complex64::default(); ctx.len()];
    ws.numerators_from_group_sums(&sums, &ctx.codes, &mut out);
    Ok(out)
}

/// `(D A phi_k)^H W D A phi_k` for every `k`. Raw values; tiny negative
/// rounding is not clamped here.
pub fn denominators_all(ctx: &BlockContext) -> Vec<f64> {
    SpectralWorkspace::new(ctx.rows, ctx.cols).denominators(ctx)
}
