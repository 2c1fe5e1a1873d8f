//! Priors on the regression coefficients, the dispersion k, and the CAR precision τ.
//!
//! All three densities keep their normalising constants, so `log_prior` is a
//! proper log density in (β, k, τ).

use crate::error::{Error, Result};
use crate::model::state::ModelState;
use crate::scalar::{ln_gamma, Real};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PriorSpec<T> {
    /// Precision of the zero-mean normal prior on every β_j.
    pub beta_precision: T,
    /// Inverse-gamma shape and rate for k.
    pub k_shape: T,
    pub k_rate: T,
    /// Gamma shape and rate for τ.
    pub tau_shape: T,
    pub tau_rate: T,
}

impl<T: Real> Default for PriorSpec<T> {
    fn default() -> Self {
        Self {
            beta_precision: T::lit(1e-5),
            k_shape: T::lit(1e-3),
            k_rate: T::lit(1e-3),
            tau_shape: T::lit(0.5),
            tau_rate: T::lit(0.0005),
        }
    }
}

impl<T: Real> PriorSpec<T> {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("beta_precision", self.beta_precision),
            ("k_shape", self.k_shape),
            ("k_rate", self.k_rate),
            ("tau_shape", self.tau_shape),
            ("tau_rate", self.tau_rate),
        ] {
            if !(v.is_finite() && v > T::zero()) {
                return Err(Error::Config(format!("{name} must be positive, got {v}")));
            }
        }
        Ok(())
    }
}

/// Log density of N(0, 1/precision) at x.
pub fn normal_log_density<T: Real>(x: T, precision: T) -> T {
    let half = T::lit(0.5);
    half * (precision / (T::lit(2.0) * T::PI())).ln() - half * precision * x * x
}

pub fn gamma_log_density<T: Real>(x: T, shape: T, rate: T) -> Result<T> {
    if !(x > T::zero()) {
        return Err(Error::Domain(format!("gamma density needs x > 0, got {x}")));
    }
    Ok(shape * rate.ln() - ln_gamma(shape) + (shape - T::one()) * x.ln() - rate * x)
}

pub fn inverse_gamma_log_density<T: Real>(x: T, shape: T, rate: T) -> Result<T> {
    if !(x > T::zero()) {
        return Err(Error::Domain(format!("inverse-gamma density needs x > 0, got {x}")));
    }
    Ok(shape * rate.ln() - ln_gamma(shape) - (shape + T::one()) * x.ln() - rate / x)
}

/// β part of the prior.
pub fn beta_log_prior<T: Real>(beta: &[T], priors: &PriorSpec<T>) -> T {
    beta.iter()
        .map(|&b| normal_log_density(b, priors.beta_precision))
        .sum()
}

pub fn log_prior<T: Real>(state: &ModelState<T>, priors: &PriorSpec<T>) -> Result<T> {
    if !(state.k > T::zero() && state.tau > T::zero()) {
        return Err(Error::Domain(format!(
            "k and tau must be positive (k = {}, tau = {})",
            state.k, state.tau
        )));
    }
    Ok(beta_log_prior(&state.beta, priors)
        + inverse_gamma_log_density(state.k, priors.k_shape, priors.k_rate)?
        + gamma_log_density(state.tau, priors.tau_shape, priors.tau_rate)?)
}
