use rand::Rng;
use rand_distr::{Distribution, Gamma, Poisson};

use crate::data::DesignMatrix;
use crate::error::{Error, Result};
use crate::model::linear_predictor;

/// NB(λ_i, k) counts as a Poisson with gamma-distributed rate λ_i·G_i, G_i ~ Gamma(k, mean 1).
pub fn simulate_crashes<R: Rng + ?Sized>(
    x: &DesignMatrix<f64>,
    beta: &[f64],
    phi: &[f64],
    k: f64,
    rng: &mut R,
) -> Result<Vec<u64>> {
    if !(k.is_finite() && k > 0.0) {
        return Err(Error::Domain(format!("k must be positive, got {k}")));
    }
    let (_, lambda) = linear_predictor(x, beta, phi)?;
    let mixing = Gamma::new(k, 1.0 / k).map_err(|e| Error::Domain(e.to_string()))?;
    lambda.iter().map(|&l| draw_count(l, &mixing, rng)).collect()
}

/// One NB(λ, k) draw given a prepared Gamma(k, 1/k) mixing law.
pub fn draw_count<R: Rng + ?Sized>(lambda: f64, mixing: &Gamma<f64>, rng: &mut R) -> Result<u64> {
    let rate = lambda * mixing.sample(rng);
    if rate == 0.0 {
        return Ok(0);
    }
    let poisson = Poisson::new(rate).map_err(|e| Error::Domain(format!("Poisson rate {rate}: {e}")))?;
    Ok(poisson.sample(rng) as u64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn ones(n: usize) -> DesignMatrix<f64> {
        DesignMatrix::from_rows(vec![vec![1.0]; n], vec!["intercept".into()], true).unwrap()
    }

    #[test]
    fn poisson_limit_moments() {
        let n = 100_000;
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let y = simulate_crashes(&ones(n), &[5f64.ln()], &vec![0.0; n], 1e6, &mut rng).unwrap();
        let mean = y.iter().sum::<u64>() as f64 / n as f64;
        let var = y.iter().map(|&v| (v as f64 - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        // SE of the mean √(5/n); SE of the variance ≈ √((μ4 − σ⁴)/n) with μ4 = 3·25 + 5 for Poisson(5)
        let se_mean = (5.0 / n as f64).sqrt();
        let se_var = ((75.0 + 5.0 - 25.0) / n as f64).sqrt();
        assert!((mean - 5.0).abs() < 3.0 * se_mean, "{mean}");
        assert!((var - 5.0).abs() < 3.0 * se_var, "{var}");
    }

    #[test]
    fn overdispersed_moments() {
        let n = 200_000;
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let (lambda, k) = (8.0f64, 2.5);
        let y = simulate_crashes(&ones(n), &[lambda.ln()], &vec![0.0; n], k, &mut rng).unwrap();
        let mean = y.iter().sum::<u64>() as f64 / n as f64;
        let var = y.iter().map(|&v| (v as f64 - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        assert!((mean - lambda).abs() < 0.05);
        assert!((var / (lambda + lambda * lambda / k) - 1.0).abs() < 0.03);
    }

    #[test]
    fn fixed_seed_is_reproducible() {
        let x = ones(50);
        let a = simulate_crashes(&x, &[2.0], &vec![0.1; 50], 3.0, &mut ChaCha8Rng::seed_from_u64(4)).unwrap();
        let b = simulate_crashes(&x, &[2.0], &vec![0.1; 50], 3.0, &mut ChaCha8Rng::seed_from_u64(4)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn overflow_is_reported() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert!(matches!(
            simulate_crashes(&ones(1), &[800.0], &[0.0], 1.0, &mut rng),
            Err(Error::NumericRange { .. })
        ));
    }
}
