//! One Metropolis-within-Gibbs update cycle.
//!
//! Order: each β_j (random-walk MH), each non-island φ_i (random-walk MH against
//! its NB term plus the CAR conditional), sum-to-zero recentering of φ into the
//! intercept, τ from its gamma full conditional, then k by random-walk MH on ln k.
//!
//! ψ and λ are cached on the state. They are resynchronised from (X, β, φ) at the
//! start of every sweep and updated incrementally inside it. Recentering leaves
//! the cached values of non-island zones untouched because their ψ does not
//! change; island zones have no φ to absorb the shift and are updated.

use rand::Rng;
use rand_distr::{Distribution, Gamma, StandardNormal};

use crate::error::{Error, Result};
use crate::model::icar::{icar_pair_energy, neighbor_mean};
use crate::model::negbin::{nb_count_term, nb_rate_term};
use crate::model::prior::{inverse_gamma_log_density, normal_log_density};
use crate::model::{FitData, ModelState, PriorSpec};
use crate::scalar::Real;

/// Random-walk proposal scales.
#[derive(Debug, Clone, PartialEq)]
pub struct Tuning<T> {
    pub beta: Vec<T>,
    pub phi: Vec<T>,
    pub log_k: T,
}

impl<T: Real> Tuning<T> {
    pub fn uniform(p: usize, n: usize, scale: T) -> Self {
        Self {
            beta: vec![scale; p],
            phi: vec![scale; n],
            log_k: scale,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepOptions<T> {
    pub fix_phi_at_zero: bool,
    pub fix_k: bool,
    _marker: std::marker::PhantomData<T>,
}

impl<T> SweepOptions<T> {
    pub fn new(fix_phi_at_zero: bool, fix_k: bool) -> Self {
        Self {
            fix_phi_at_zero,
            fix_k,
            _marker: std::marker::PhantomData,
        }
    }
}

impl<T> Default for SweepOptions<T> {
    fn default() -> Self {
        Self::new(false, false)
    }
}

/// Which proposals were accepted in the last sweep.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SweepOutcome {
    pub beta_accepted: Vec<bool>,
    pub phi_accepted: Vec<bool>,
    pub k_accepted: bool,
    /// Proposals rejected because the target was not finite there.
    pub nonfinite_rejections: usize,
}

/// Shape and rate of the τ full conditional given the CAR energy.
pub fn tau_conditional<T: Real>(priors: &PriorSpec<T>, energy: T, rank: usize) -> (T, T) {
    let half = T::lit(0.5);
    (
        priors.tau_shape + half * T::from_usize(rank).unwrap(),
        priors.tau_rate + half * energy,
    )
}

/// Moves the mean of the non-island effects into the intercept.
///
/// Returns the shift. Does nothing (and returns zero) without an intercept column,
/// since there the level of φ is not confounded with any coefficient.
pub fn recenter<T: Real>(state: &mut ModelState<T>, data: &FitData<T>) -> T {
    let members = data.non_islands();
    if members.is_empty() || !data.x.has_intercept() {
        return T::zero();
    }
    let m = members.iter().map(|&i| state.phi[i]).sum::<T>() / T::from_usize(members.len()).unwrap();
    for &i in members {
        state.phi[i] = state.phi[i] - m;
    }
    state.beta[0] = state.beta[0] + m;
    // Islands carry no φ to absorb the shift, so their predictor really moves.
    for i in (0..state.phi.len()).filter(|&i| data.w.is_island(i)) {
        state.psi[i] = state.psi[i] + m;
        state.lambda[i] = state.psi[i].exp();
    }
    m
}

fn standard_normal<T: Real, R: Rng + ?Sized>(rng: &mut R) -> T {
    let z: f64 = StandardNormal.sample(rng);
    T::lit(z)
}

fn log_uniform<T: Real, R: Rng + ?Sized>(rng: &mut R) -> T {
    let u: f64 = rng.random();
    T::lit(u.ln())
}

fn abort(reason: impl Into<String>) -> Error {
    Error::SamplerAbort {
        iteration: 0,
        reason: reason.into(),
        dump: String::new(),
    }
}

/// Sum of the λ-dependent NB terms over all zones.
fn rate_loglik<T: Real>(y: &[u64], lambda: &[T], k: T) -> T {
    y.iter().zip(lambda).map(|(&yi, &l)| nb_rate_term(yi, l, k)).sum()
}

/// Runs one full update cycle in place.
pub fn sweep<T: Real, R: Rng + ?Sized>(
    state: &mut ModelState<T>,
    data: &FitData<T>,
    priors: &PriorSpec<T>,
    tuning: &Tuning<T>,
    options: &SweepOptions<T>,
    rng: &mut R,
) -> Result<SweepOutcome> {
    let n = data.n();
    let p = data.p();
    let mut outcome = SweepOutcome {
        beta_accepted: vec![false; p],
        phi_accepted: vec![false; n],
        ..Default::default()
    };
    state
        .refresh(&data.x)
        .map_err(|e| abort(format!("current state is not evaluable: {e}")))?;
    let mut loglik = rate_loglik(&data.y, &state.lambda, state.k);
    if !loglik.is_finite() {
        return Err(abort("log-likelihood of the current state is not finite"));
    }
    let limit = T::max_value().ln();

    // (a) coefficients
    let mut psi_new = vec![T::zero(); n];
    let mut lambda_new = vec![T::zero(); n];
    for j in 0..p {
        let step = tuning.beta[j] * standard_normal::<T, _>(rng);
        let log_u = log_uniform::<T, _>(rng);
        let proposed = state.beta[j] + step;
        let mut finite = proposed.is_finite();
        for i in 0..n {
            let xij = data.x.get(i, j);
            if xij == T::zero() {
                psi_new[i] = state.psi[i];
                lambda_new[i] = state.lambda[i];
            } else {
                psi_new[i] = state.psi[i] + xij * step;
                finite &= psi_new[i] <= limit;
                lambda_new[i] = psi_new[i].exp();
            }
        }
        let loglik_new = if finite {
            rate_loglik(&data.y, &lambda_new, state.k)
        } else {
            T::nan()
        };
        if !loglik_new.is_finite() || !(lambda_new.iter().all(|&l| l > T::zero())) {
            outcome.nonfinite_rejections += 1;
            continue;
        }
        let log_ratio = loglik_new - loglik + normal_log_density(proposed, priors.beta_precision)
            - normal_log_density(state.beta[j], priors.beta_precision);
        if log_u < log_ratio {
            state.beta[j] = proposed;
            std::mem::swap(&mut state.psi, &mut psi_new);
            std::mem::swap(&mut state.lambda, &mut lambda_new);
            loglik = loglik_new;
            outcome.beta_accepted[j] = true;
        }
    }

    if !options.fix_phi_at_zero {
        // (b) spatial effects
        for &i in data.non_islands() {
            let mean = neighbor_mean(i, &state.phi, &data.w);
            let precision = state.tau * data.w.row_sum(i);
            let current = state.phi[i];
            let proposed = current + tuning.phi[i] * standard_normal::<T, _>(rng);
            let log_u = log_uniform::<T, _>(rng);
            let psi_prop = state.psi[i] + (proposed - current);
            if !(psi_prop.is_finite() && psi_prop <= limit) {
                outcome.nonfinite_rejections += 1;
                continue;
            }
            let lambda_prop = psi_prop.exp();
            let yi = data.y[i];
            let lik_delta = nb_rate_term(yi, lambda_prop, state.k) - nb_rate_term(yi, state.lambda[i], state.k);
            if !(lik_delta.is_finite() && lambda_prop > T::zero()) {
                outcome.nonfinite_rejections += 1;
                continue;
            }
            let half = T::lit(0.5);
            let prior_delta = -half
                * precision
                * ((proposed - mean) * (proposed - mean) - (current - mean) * (current - mean));
            if log_u < lik_delta + prior_delta {
                state.phi[i] = proposed;
                state.psi[i] = psi_prop;
                state.lambda[i] = lambda_prop;
                outcome.phi_accepted[i] = true;
            }
        }

        // (c) identification
        recenter(state, data);
    }

    // (d) CAR precision
    let energy = icar_pair_energy(&state.phi, &data.w)?;
    let (shape, rate) = tau_conditional(priors, energy, data.icar_rank());
    match Gamma::new(shape.to_f64_lossy(), 1.0 / rate.to_f64_lossy()) {
        Ok(g) => {
            let draw = T::lit(g.sample(rng));
            if draw.is_finite() && draw > T::zero() {
                state.tau = draw;
            } else {
                outcome.nonfinite_rejections += 1;
            }
        }
        Err(_) => return Err(abort(format!("invalid tau conditional Gamma({shape}, {rate})"))),
    }

    // (e) dispersion
    if !options.fix_k {
        let log_k = state.k.ln();
        let log_k_new = log_k + tuning.log_k * standard_normal::<T, _>(rng);
        let log_u = log_uniform::<T, _>(rng);
        let k_new = log_k_new.exp();
        if k_new.is_finite() && k_new > T::zero() {
            let full = |k: T| -> T {
                data.y
                    .iter()
                    .zip(&state.lambda)
                    .map(|(&yi, &l)| nb_count_term(yi, k) + nb_rate_term(yi, l, k))
                    .sum::<T>()
            };
            let prior = |k: T| inverse_gamma_log_density(k, priors.k_shape, priors.k_rate).unwrap_or(T::neg_infinity());
            let log_ratio =
                full(k_new) - full(state.k) + prior(k_new) - prior(state.k) + (log_k_new - log_k);
            if !log_ratio.is_finite() {
                outcome.nonfinite_rejections += 1;
            } else if log_u < log_ratio {
                state.k = k_new;
                outcome.k_accepted = true;
            }
        } else {
            outcome.nonfinite_rejections += 1;
        }
    }
    Ok(outcome)
}
