//! Iterative sparse model generation for one reconstruction area.

use std::collections::BTreeMap;

use log::warn;
use num_complex::Complex64;

use super::basis::{basis_function, frequency_priors};
use super::direct::{self, beats, DEGENERATE_DENOMINATOR};
use super::fast::SpectralWorkspace;
use super::geometry::{BlockContext, GROUP_OFFSETS};
use super::operators::{aggregate, distribute};
use super::JsdeParams;
use crate::error::{Error, Result};

/// Iteration count, update damping and whether atom selection is weighted by
/// the frequency prior.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SolverSettings {
    pub iterations: usize,
    pub gamma: f64,
    pub use_prior: bool,
}

impl From<&JsdeParams> for SolverSettings {
    fn from(p: &JsdeParams) -> Self {
        Self {
            iterations: p.iterations,
            gamma: p.odc_gamma,
            use_prior: true,
        }
    }
}

impl SolverSettings {
    /// Plain matching pursuit: full projection steps, no prior.
    pub fn matching_pursuit(iterations: usize) -> Self {
        Self {
            iterations,
            gamma: 1.0,
            use_prior: false,
        }
    }
}

/// Expansion coefficients of the selected atoms plus the current residual.
///
/// The residual is constant over each 2x2 group, so it is held per group;
/// [`SparseModel::residual`] expands it to the full area.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseModel {
    rows: usize,
    cols: usize,
    coefficients: BTreeMap<usize, Complex64>,
    residual_groups: Vec<Complex64>,
    selections: Vec<usize>,
    fallback: Option<Vec<f64>>,
}

impl SparseModel {
    fn empty(ctx: &BlockContext) -> Self {
        Self {
            rows: ctx.rows,
            cols: ctx.cols,
            coefficients: BTreeMap::new(),
            residual_groups: ctx.sensor.iter().map(|&v| Complex64::new(v, 0.0)).collect(),
            selections: Vec::new(),
            fallback: None,
        }
    }

    fn enlarged(ctx: &BlockContext) -> Self {
        let mut m = Self::empty(ctx);
        m.fallback = Some(distribute(&ctx.sensor));
        m
    }

    pub fn coefficients(&self) -> &BTreeMap<usize, Complex64> {
        &self.coefficients
    }

    /// Atom chosen in each iteration, in order.
    pub fn selections(&self) -> &[usize] {
        &self.selections
    }

    pub fn iterations(&self) -> usize {
        self.selections.len()
    }

    /// True when no atom was selectable and the area fell back to pixel
    /// enlargement.
    pub fn is_fallback(&self) -> bool {
        self.fallback.is_some()
    }

    /// The model `g` over the whole area, scan order.
    pub fn model(&self) -> Vec<Complex64> {
        if let Some(f) = &self.fallback {
            return f.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        }
        let mut g = vec![Complex64::default(); self.rows * self.cols];
        for (&k, &c) in &self.coefficients {
            let phi = basis_function(k, self.rows, self.cols).expect("coefficient index in range");
            for (gi, p) in g.iter_mut().zip(phi) {
                *gi += c * p;
            }
        }
        g
    }

    /// Residual `D f~ - D A g` over the whole area, scan order.
    pub fn residual(&self) -> Vec<Complex64> {
        distribute(&self.residual_groups)
    }

    /// Model value at area sample `(m, n)`.
    pub fn value_at(&self, m: usize, n: usize) -> Complex64 {
        if let Some(f) = &self.fallback {
            let i = super::geometry::scan_index_unchecked(m, n, self.rows);
            return Complex64::new(f[i], 0.0);
        }
        let mut acc = Complex64::default();
        for (&k, &c) in &self.coefficients {
            let (km, kn) = (k % self.rows, k / self.rows);
            let phase = 2.0
                * std::f64::consts::PI
                * (((km * m) % self.rows) as f64 / self.rows as f64 + ((kn * n) % self.cols) as f64 / self.cols as f64);
            acc += c * Complex64::from_polar(1.0, phase);
        }
        acc
    }
}

/// Reusable model generator for one area size. Holds the FFT plans and
/// scratch buffers so a reconstruction allocates them once per worker.
pub struct ModelGenerator {
    ws: SpectralWorkspace,
    priors: Vec<f64>,
    numerators: Vec<Complex64>,
    sums: Vec<Complex64>,
    phase_m: Vec<Complex64>,
    phase_n: Vec<Complex64>,
    tw_m: Vec<Complex64>,
    tw_n: Vec<Complex64>,
}

impl ModelGenerator {
    pub fn new(rows: usize, cols: usize) -> Result<Self> {
        let priors = frequency_priors(rows, cols)?;
        Ok(Self {
            ws: SpectralWorkspace::new(rows, cols),
            priors,
            numerators: vec![Complex64::default(); rows * cols],
            sums: vec![Complex64::default(); rows * cols / 4],
            phase_m: vec![Complex64::default(); rows],
            phase_n: vec![Complex64::default(); cols],
            tw_m: super::basis::twiddles(rows),
            tw_n: super::basis::twiddles(cols),
        })
    }

    pub fn generate(&mut self, ctx: &BlockContext, settings: SolverSettings) -> Result<SparseModel> {
        let (rows, cols) = self.ws.dims();
        if (ctx.rows, ctx.cols) != (rows, cols) {
            return Err(Error::DimensionMismatch(format!(
                "generator built for {rows}x{cols}, context is {}x{}",
                ctx.rows, ctx.cols
            )));
        }
        if !(settings.gamma > 0.0 && settings.gamma <= 1.0) {
            return Err(Error::InvalidArgument(format!(
                "gamma must be in (0, 1], got {}",
                settings.gamma
            )));
        }
        let totals = ctx.group_weight_totals();
        let denominators = self.ws.denominators(ctx);
        // score factor q_k / den_k; negative marks an unselectable atom
        let factors: Vec<f64> = denominators
            .iter()
            .zip(&self.priors)
            .map(|(&d, &q)| {
                if d > DEGENERATE_DENOMINATOR {
                    if settings.use_prior {
                        q / d
                    } else {
                        1.0 / d
                    }
                } else {
                    -1.0
                }
            })
            .collect();
        if factors.iter().all(|&f| f < 0.0) {
            warn!(
                "no selectable atom for block at ({}, {}); falling back to pixel enlargement",
                ctx.block_x, ctx.block_y
            );
            return Ok(SparseModel::enlarged(ctx));
        }

        let mut model = SparseModel::empty(ctx);
        let half = rows / 2;
        for _ in 0..settings.iterations {
            for ((s, &t), &r) in self.sums.iter_mut().zip(&totals).zip(&model.residual_groups) {
                *s = r * t;
            }
            self.ws
                .numerators_from_group_sums(&self.sums, &ctx.codes, &mut self.numerators);

            let mut best = usize::MAX;
            let mut best_score = 0.0;
            for (k, (&f, num)) in factors.iter().zip(&self.numerators).enumerate() {
                if f < 0.0 {
                    continue;
                }
                let s = f * num.norm_sqr();
                if best == usize::MAX || beats(s, best_score) {
                    best_score = s;
                    best = k;
                }
            }
            let u = best;
            let step = self.numerators[u] / denominators[u] * settings.gamma;
            *model.coefficients.entry(u).or_default() += step;
            model.selections.push(u);

            let (km, kn) = (u % rows, u / rows);
            for (m, p) in self.phase_m.iter_mut().enumerate() {
                *p = self.tw_m[(km * m) % rows];
            }
            for (n, p) in self.phase_n.iter_mut().enumerate() {
                *p = self.tw_n[(kn * n) % cols];
            }
            for (g, r) in model.residual_groups.iter_mut().enumerate() {
                let (m0, n0) = (2 * (g % half), 2 * (g / half));
                let code = ctx.codes[g] as usize;
                let mut acc = Complex64::default();
                for (q, &(dm, dn)) in GROUP_OFFSETS.iter().enumerate() {
                    if q != code {
                        acc += self.phase_m[m0 + dm] * self.phase_n[n0 + dn];
                    }
                }
                *r -= step * acc / 3.0;
            }
        }
        Ok(model)
    }
}

/// Model generation with the frequency prior, isotropic weights taken from
/// the context and damped updates.
pub fn jsde_model(ctx: &BlockContext, params: &JsdeParams) -> Result<SparseModel> {
    params.validate()?;
    ModelGenerator::new(ctx.rows, ctx.cols)?.generate(ctx, params.into())
}

/// Same loop driven entirely by the per-atom reference formulas. Quadratic
/// per iteration; meant for small areas and for checking [`ModelGenerator`].
pub fn reference_model(ctx: &BlockContext, settings: SolverSettings) -> Result<SparseModel> {
    let priors = if settings.use_prior {
        frequency_priors(ctx.rows, ctx.cols)?
    } else {
        vec![1.0; ctx.len()]
    };
    let mut model = SparseModel::empty(ctx);
    let mut r = model.residual();
    for _ in 0..settings.iterations {
        let Some(u) = direct::select_basis(&r, ctx, &priors)? else {
            return Ok(SparseModel::enlarged(ctx));
        };
        let p = direct::projection_coefficient(u, &r, ctx)?.expect("selected atom is selectable");
        let step = p * settings.gamma;
        *model.coefficients.entry(u).or_default() += step;
        model.selections.push(u);
        let atom = direct::effective_atom(u, ctx)?;
        for (x, a) in r.iter_mut().zip(&atom) {
            *x -= step * a;
        }
    }
    model.residual_groups = r.chunks_exact(4).map(|c| c[0]).collect();
    Ok(model)
}

/// `D f~ - D A g` recomputed from scratch for a model.
pub fn recompute_residual(ctx: &BlockContext, model: &SparseModel) -> Result<Vec<Complex64>> {
    let g = model.model();
    let ag = aggregate(&g, &ctx.codes)?;
    Ok(ctx
        .sensor
        .iter()
        .zip(&ag)
        .flat_map(|(&f, &a)| [Complex64::new(f, 0.0) - a; 4])
        .collect())
}
