//! Per-atom reference formulas on explicit vectors.
//!
//! These evaluate the selection and projection quantities literally, one atom
//! at a time, and cost O((MN)^2) per iteration. The model generator uses the
//! transform-domain versions in `fast`; these stay as the reference they are
//! checked against.

use num_complex::Complex64;

use super::basis::basis_function;
use super::geometry::BlockContext;
use super::operators::{aggregate, distribute};
use crate::error::{Error, Result};

/// Denominators at or below this are treated as atoms with no support under
/// the weights.
pub const DEGENERATE_DENOMINATOR: f64 = 1e-12;

/// Scores within this relative distance of the best so far count as tied, so
/// conjugate pairs of a real residual resolve to the smaller index regardless
/// of rounding.
pub const TIE_TOLERANCE: f64 = 1e-12;

/// Whether `score` beats `best` by more than the tie tolerance.
#[inline]
pub(crate) fn beats(score: f64, best: f64) -> bool {
    score > best + TIE_TOLERANCE * best.abs()
}

/// `D A phi_k`, the atom as seen through acquisition and re-expansion.
pub fn effective_atom(k: usize, ctx: &BlockContext) -> Result<Vec<Complex64>> {
    let phi = basis_function(k, ctx.rows, ctx.cols)?;
    Ok(distribute(&aggregate(&phi, &ctx.codes)?))
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

/// `(D A phi_k)^H W r`.
pub fn numerator(k: usize, r: &[Complex64], ctx: &BlockContext) -> Result<Complex64> {
    check_len(r, ctx)?;
    let atom = effective_atom(k, ctx)?;
    Ok(atom
        .iter()
        .zip(&ctx.weights)
        .zip(r)
        .map(|((a, &w), &x)| a.conj() * w * x)
        .sum())
}

/// `(D A phi_k)^H W (D A phi_k)`.
pub fn denominator(k: usize, ctx: &BlockContext) -> Result<f64> {
    let atom = effective_atom(k, ctx)?;
    Ok(atom.iter().zip(&ctx.weights).map(|(a, &w)| w * a.norm_sqr()).sum())
}

/// Weighted energy `r^H W r`.
pub fn weighted_energy(r: &[Complex64], weights: &[f64]) -> f64 {
    r.iter().zip(weights).map(|(x, &w)| w * x.norm_sqr()).sum()
}

/// Energy left after removing `p` times atom `k` from `r`.
pub fn energy_after(k: usize, p: Complex64, r: &[Complex64], ctx: &BlockContext) -> Result<f64> {
    check_len(r, ctx)?;
    let atom = effective_atom(k, ctx)?;
    let rk: Vec<Complex64> = r.iter().zip(&atom).map(|(&x, &a)| x - p * a).collect();
    Ok(weighted_energy(&rk, &ctx.weights))
}

/// Weighted least-squares projection coefficient of `r` onto atom `k`.
/// `None` when the atom has no support under the weights.
pub fn projection_coefficient(k: usize, r: &[Complex64], ctx: &BlockContext) -> Result<Option<Complex64>> {
    let den = denominator(k, ctx)?;
    if den <= DEGENERATE_DENOMINATOR {
        return Ok(None);
    }
    Ok(Some(numerator(k, r, ctx)? / den))
}

/// Selection score `q_k |num_k|^2 / den_k` for every atom; `None` marks
/// unselectable atoms.
pub fn selection_scores(r: &[Complex64], ctx: &BlockContext, priors: &[f64]) -> Result<Vec<Option<f64>>> {
    check_len(r, ctx)?;
    if priors.len() != ctx.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} priors for {} atoms",
            priors.len(),
            ctx.len()
        )));
    }
    (0..ctx.len())
        .map(|k| {
            let den = denominator(k, ctx)?;
            if den <= DEGENERATE_DENOMINATOR {
                return Ok(None);
            }
            Ok(Some(priors[k] * numerator(k, r, ctx)?.norm_sqr() / den))
        })
        .collect()
}

/// Index of the largest score; ties (within [`TIE_TOLERANCE`]) go to the
/// smallest index.
pub fn argmax_score(scores: &[Option<f64>]) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (k, s) in scores.iter().enumerate() {
        if let Some(s) = *s {
            if best.is_none_or(|(_, b)| beats(s, b)) {
                best = Some((k, s));
            }
        }
    }
    best.map(|(k, _)| k)
}

/// Atom selected by maximising the prior-weighted energy reduction.
pub fn select_basis(r: &[Complex64], ctx: &BlockContext, priors: &[f64]) -> Result<Option<usize>> {
    Ok(argmax_score(&selection_scores(r, ctx, priors)?))
}

/// Atom selected by minimising `q_k * E_{w,k}`, the prior-scaled energy that
/// remains after the best projection onto each atom, evaluated by forming
/// every candidate residual explicitly. Ties (within [`TIE_TOLERANCE`]) go
/// to the smallest index.
pub fn select_by_min_energy(r: &[Complex64], ctx: &BlockContext, priors: &[f64]) -> Result<Option<usize>> {
    let mut best: Option<(usize, f64)> = None;
    for k in 0..ctx.len() {
        let Some(p) = projection_coefficient(k, r, ctx)? else {
            continue;
        };
        let e = priors[k] * energy_after(k, p, r, ctx)?;
        if best.is_none_or(|(_, b)| beats(b, e)) {
            best = Some((k, e));
        }
    }
    Ok(best.map(|(k, _)| k))
}
