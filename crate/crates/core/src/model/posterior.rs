use crate::data::{Components, DesignMatrix, WeightMatrix};
use crate::error::{Error, Result};
use crate::model::icar::icar_joint_log_density_unnorm;
use crate::model::negbin::nb_log_pmf;
use crate::model::prior::{log_prior, PriorSpec};
use crate::model::state::{linear_predictor, ModelState};
use crate::scalar::Real;

/// Observed counts, design matrix, and spatial weights with consistent dimensions.
#[derive(Debug, Clone)]
pub struct FitData<T> {
    pub y: Vec<u64>,
    pub x: DesignMatrix<T>,
    pub w: WeightMatrix<T>,
    pub zone_ids: Vec<String>,
    components: Components,
    non_islands: Vec<usize>,
}

impl<T: Real> FitData<T> {
    pub fn new(y: Vec<u64>, x: DesignMatrix<T>, w: WeightMatrix<T>, zone_ids: Vec<String>) -> Result<Self> {
        let n = y.len();
        if n == 0 {
            return Err(Error::Shape("no zones to fit".into()));
        }
        if x.nrows() != n || w.dim() != n || zone_ids.len() != n {
            return Err(Error::Shape(format!(
                "{n} counts, X has {} rows, W is {}x{}, {} zone ids",
                x.nrows(),
                w.dim(),
                w.dim(),
                zone_ids.len()
            )));
        }
        let components = w.components();
        let non_islands = (0..n).filter(|&i| !w.is_island(i)).collect();
        Ok(Self {
            y,
            x,
            w,
            zone_ids,
            components,
            non_islands,
        })
    }

    pub fn n(&self) -> usize {
        self.y.len()
    }

    pub fn p(&self) -> usize {
        self.x.ncols()
    }

    pub fn components(&self) -> &Components {
        &self.components
    }

    pub fn non_islands(&self) -> &[usize] {
        &self.non_islands
    }

    /// Rank deficiency-adjusted dimension of the ICAR precision: non-islands minus components.
    pub fn icar_rank(&self) -> usize {
        self.non_islands.len() - self.components.count
    }
}

/// Σ_i log NB(y_i | λ_i, k) + ICAR joint (unnormalised) + log prior.
///
/// ψ and λ are recomputed from β and φ; the cached fields on `state` are ignored.
pub fn log_posterior_unnorm<T: Real>(
    state: &ModelState<T>,
    data: &FitData<T>,
    priors: &PriorSpec<T>,
) -> Result<T> {
    let (_, lambda) = linear_predictor(&data.x, &state.beta, &state.phi)?;
    let mut loglik = T::zero();
    for (&y, &l) in data.y.iter().zip(&lambda) {
        loglik = loglik + nb_log_pmf(y, l, state.k)?;
    }
    Ok(loglik + icar_joint_log_density_unnorm(&state.phi, &data.w, state.tau)? + log_prior(state, priors)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::prior::beta_log_prior;
    use crate::scalar::ln_gamma;

    fn three_zone() -> (FitData<f64>, ModelState<f64>) {
        let x = DesignMatrix::with_intercept(&[("a", vec![0.5, 1.5, 3.0])]).unwrap();
        let w = WeightMatrix::from_edges(3, [(0, 1, 2.0), (1, 2, 4.0)]).unwrap();
        let data = FitData::new(vec![3, 9, 0], x, w, vec!["a".into(), "b".into(), "c".into()]).unwrap();
        let state = ModelState::new(vec![1.2, 0.3], vec![0.1, -0.25, 0.15], 2.5, 1.8, &data.x).unwrap();
        (data, state)
    }

    #[test]
    fn sum_of_components() {
        let (data, s) = three_zone();
        let priors = PriorSpec::default();
        let lik: f64 = (0..3)
            .map(|i| nb_log_pmf(data.y[i], s.lambda[i], s.k).unwrap())
            .sum();
        let total = log_posterior_unnorm(&s, &data, &priors).unwrap();
        let parts = lik
            + icar_joint_log_density_unnorm(&s.phi, &data.w, s.tau).unwrap()
            + log_prior(&s, &priors).unwrap();
        assert!((total - parts).abs() < 1e-12);
    }

    #[test]
    fn straight_line_reimplementation() {
        let (_, s) = three_zone();
        let (data, _) = three_zone();
        let priors = PriorSpec::default();
        let xs = [0.5, 1.5, 3.0];
        let ys = [3.0, 9.0, 0.0];
        let mut want = 0.0;
        for i in 0..3 {
            let lam: f64 = (s.beta[0] + s.beta[1] * xs[i] + s.phi[i]).exp();
            let (y, k) = (ys[i], s.k);
            want += ln_gamma(y + k) - ln_gamma(k) - ln_gamma(y + 1.0)
                + k * (k / (k + lam)).ln()
                + y * (lam / (k + lam)).ln();
        }
        want -= s.tau / 2.0
            * (2.0 * (s.phi[0] - s.phi[1]).powi(2) + 4.0 * (s.phi[1] - s.phi[2]).powi(2));
        for b in &s.beta {
            want += 0.5 * (1e-5 / (2.0 * std::f64::consts::PI)).ln() - 0.5 * 1e-5 * b * b;
        }
        want += 1e-3 * 1e-3f64.ln() - ln_gamma(1e-3) - 1.001 * s.k.ln() - 1e-3 / s.k;
        want += 0.5 * 0.0005f64.ln() - ln_gamma(0.5) - 0.5 * s.tau.ln() - 0.0005 * s.tau;
        let got = log_posterior_unnorm(&s, &data, &priors).unwrap();
        assert!(((got - want) / want).abs() < 1e-12, "{got} vs {want}");
    }

    #[test]
    fn intercept_shift_moves_only_the_prior() {
        let (data, s) = three_zone();
        let priors = PriorSpec::default();
        let c = 0.7;
        let mut t = s.clone();
        t.phi.iter_mut().for_each(|p| *p += c);
        t.beta[0] -= c;
        let delta = log_posterior_unnorm(&t, &data, &priors).unwrap()
            - log_posterior_unnorm(&s, &data, &priors).unwrap();
        let prior_delta =
            beta_log_prior(&t.beta, &priors) - beta_log_prior(&s.beta, &priors);
        assert!((delta - prior_delta).abs() < 1e-10);
    }

    #[test]
    fn finite_over_table_ranges() {
        let (data, mut s) = three_zone();
        let priors = PriorSpec::default();
        for y in [0u64, 9, 109, 357] {
            let mut d = data.clone();
            d.y = vec![y; 3];
            s.k = 0.01;
            assert!(log_posterior_unnorm(&s, &d, &priors).unwrap().is_finite());
        }
    }

    #[test]
    fn mismatched_dimensions() {
        let x = DesignMatrix::with_intercept(&[("a", vec![0.5, 1.5])]).unwrap();
        let w = WeightMatrix::from_edges(3, [(0, 1, 2.0)]).unwrap();
        assert!(FitData::new(vec![1, 2], x, w, vec!["a".into(), "b".into()]).is_err());
    }
}
