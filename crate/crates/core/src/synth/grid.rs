//! Brute-force posterior moments of regression coefficients by trapezoid quadrature.
//!
//! These routines use only the model densities and never touch the sampler, so
//! they serve as an independent check on it.

use crate::error::{Error, Result};
use crate::model::nb_log_pmf;
use crate::model::prior::{normal_log_density, PriorSpec};

/// Tail mass allowed outside the grid.
pub const TAIL_LIMIT: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    pub lo: f64,
    pub hi: f64,
    pub steps: usize,
}

impl Grid {
    pub fn new(lo: f64, hi: f64, steps: usize) -> Self {
        Self { lo, hi, steps }
    }

    fn validate(&self) -> Result<()> {
        if !(self.lo < self.hi) || self.steps < 2 {
            return Err(Error::Config(format!("invalid grid {self:?}")));
        }
        Ok(())
    }

    fn width(&self) -> f64 {
        (self.hi - self.lo) / self.steps as f64
    }

    fn point(&self, i: usize) -> f64 {
        self.lo + self.width() * i as f64
    }

    pub fn doubled(&self) -> Self {
        Self { steps: self.steps * 2, ..*self }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridPosterior {
    pub mean: f64,
    pub sd: f64,
    /// ln ∫ L(y | b) π(b) db over the grid.
    pub log_evidence: f64,
    /// Upper bound on the posterior mass outside [lo, hi], assuming a log-concave tail.
    pub tail_mass_bound: f64,
}

/// Trapezoid moments of an unnormalised log density sampled on `grid`.
fn integrate(grid: &Grid, log_density: &[f64]) -> Result<GridPosterior> {
    let top = log_density.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !top.is_finite() {
        return Err(Error::Domain("log density is not finite anywhere on the grid".into()));
    }
    let h = grid.width();
    let last = log_density.len() - 1;
    let dens: Vec<f64> = log_density.iter().map(|&l| (l - top).exp()).collect();
    let weight = |i: usize| if i == 0 || i == last { 0.5 * h } else { h };
    let (mut z, mut m1, mut m2) = (0.0, 0.0, 0.0);
    for (i, &d) in dens.iter().enumerate() {
        let (b, wd) = (grid.point(i), weight(i) * d);
        z += wd;
        m1 += wd * b;
        m2 += wd * b * b;
    }
    let mean = m1 / z;
    let var = (m2 / z - mean * mean).max(0.0);
    // log-concave tail: f(edge + t) ≤ f(edge) r^(t/h) with r the last-step ratio
    let tail = |edge: f64, inner: f64| -> f64 {
        if edge == 0.0 {
            return 0.0;
        }
        let r = edge / inner;
        if !(r < 1.0) {
            return f64::INFINITY;
        }
        edge * h / -r.ln() / z
    };
    Ok(GridPosterior {
        mean,
        sd: var.sqrt(),
        log_evidence: top + z.ln(),
        tail_mass_bound: tail(dens[0], dens[1]) + tail(dens[last], dens[last - 1]),
    })
}

fn log_likelihood(y: &[u64], column: &[f64], offset: &[f64], b: f64, k: f64) -> f64 {
    let mut total = 0.0;
    for i in 0..y.len() {
        match nb_log_pmf(y[i], (offset[i] + column[i] * b).exp(), k) {
            Ok(v) => total += v,
            Err(_) => return f64::NEG_INFINITY,
        }
    }
    total
}

fn check_inputs(y: &[u64], column: &[f64], offset: &[f64], k: f64) -> Result<()> {
    if column.len() != y.len() || offset.len() != y.len() {
        return Err(Error::Shape(format!(
            "{} counts, {} covariate values, {} offsets",
            y.len(),
            column.len(),
            offset.len()
        )));
    }
    if !(k > 0.0) {
        return Err(Error::Domain(format!("k must be positive, got {k}")));
    }
    Ok(())
}

fn posterior_1d_unchecked(
    y: &[u64],
    column: &[f64],
    offset: &[f64],
    k: f64,
    priors: &PriorSpec<f64>,
    grid: &Grid,
) -> Result<GridPosterior> {
    let log_density: Vec<f64> = (0..=grid.steps)
        .map(|i| {
            let b = grid.point(i);
            log_likelihood(y, column, offset, b, k) + normal_log_density(b, priors.beta_precision)
        })
        .collect();
    integrate(grid, &log_density)
}

/// Posterior of a single free coefficient b in ln λ_i = offset_i + column_i·b,
/// with the dispersion k and everything in `offset` (φ, other terms) held fixed.
pub fn grid_posterior_1d(
    y: &[u64],
    column: &[f64],
    offset: &[f64],
    k: f64,
    priors: &PriorSpec<f64>,
    grid: Grid,
) -> Result<GridPosterior> {
    grid.validate()?;
    check_inputs(y, column, offset, k)?;
    let post = posterior_1d_unchecked(y, column, offset, k, priors, &grid)?;
    if post.tail_mass_bound > TAIL_LIMIT {
        return Err(Error::GridTooNarrow {
            bound: post.tail_mass_bound,
            limit: TAIL_LIMIT,
        });
    }
    Ok(post)
}

/// Marginal posterior of the slope in ln λ_i = φ_i + b₀ + x_i·b₁.
///
/// For each slope on `slope_grid` the intercept is integrated out with
/// [`grid_posterior_1d`]'s quadrature on `intercept_grid`.
pub fn grid_posterior_slope(
    y: &[u64],
    x: &[f64],
    phi: &[f64],
    k: f64,
    priors: &PriorSpec<f64>,
    intercept_grid: Grid,
    slope_grid: Grid,
) -> Result<GridPosterior> {
    intercept_grid.validate()?;
    slope_grid.validate()?;
    check_inputs(y, x, phi, k)?;
    let ones = vec![1.0; y.len()];
    let mut log_marginal = Vec::with_capacity(slope_grid.steps + 1);
    let mut inner_tails = Vec::with_capacity(slope_grid.steps + 1);
    let mut offset = vec![0.0; y.len()];
    for s in 0..=slope_grid.steps {
        let b1 = slope_grid.point(s);
        for i in 0..y.len() {
            offset[i] = phi[i] + x[i] * b1;
        }
        let inner = posterior_1d_unchecked(y, &ones, &offset, k, priors, &intercept_grid)?;
        log_marginal.push(inner.log_evidence + normal_log_density(b1, priors.beta_precision));
        inner_tails.push(inner.tail_mass_bound);
    }
    let mut post = integrate(&slope_grid, &log_marginal)?;
    // inner tail bounds weighted by the marginal mass at each slope
    let top = log_marginal.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let weights: Vec<f64> = log_marginal.iter().map(|&l| (l - top).exp()).collect();
    let total: f64 = weights.iter().sum();
    let inner: f64 = weights
        .iter()
        .zip(&inner_tails)
        .map(|(&w, &t)| if w == 0.0 { 0.0 } else { w * t })
        .sum::<f64>()
        / total;
    post.tail_mass_bound += inner;
    if post.tail_mass_bound > TAIL_LIMIT {
        return Err(Error::GridTooNarrow {
            bound: post.tail_mass_bound,
            limit: TAIL_LIMIT,
        });
    }
    Ok(post)
}
