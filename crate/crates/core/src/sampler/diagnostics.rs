//! Single-chain convergence diagnostics.

use crate::error::{Error, Result};
use crate::scalar::Real;

const MIN_DRAWS: usize = 100;

fn check_column<T: Real>(x: &[T]) -> Result<()> {
    if x.len() < MIN_DRAWS {
        return Err(Error::DiagnosticUndefined(format!(
            "need at least {MIN_DRAWS} draws, got {}",
            x.len()
        )));
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::DiagnosticUndefined("non-finite draw".into()));
    }
    if x.iter().all(|&v| v == x[0]) {
        return Err(Error::DiagnosticUndefined("column has zero variance".into()));
    }
    Ok(())
}

fn mean<T: Real>(x: &[T]) -> T {
    x.iter().copied().sum::<T>() / T::from_usize(x.len()).unwrap()
}

/// Variance of the window mean by non-overlapping batch means,
/// with about √m batches of equal size. Trailing remainder draws are dropped.
fn batch_mean_variance<T: Real>(window: &[T]) -> (T, T) {
    let m = window.len();
    let batches = ((m as f64).sqrt().floor() as usize).max(2);
    let size = m / batches;
    let used = &window[..batches * size];
    let means: Vec<T> = used.chunks(size).map(mean).collect();
    let grand = mean(&means);
    let b = T::from_usize(batches).unwrap();
    let var = means.iter().map(|&v| (v - grand) * (v - grand)).sum::<T>() / (b - T::one());
    (mean(window), var / b)
}

/// Geweke z-score comparing the first 10% of draws with the last 50%.
pub fn geweke_z<T: Real>(x: &[T]) -> Result<T> {
    check_column(x)?;
    let n = x.len();
    let first = &x[..n / 10];
    let last = &x[n - n / 2..];
    let (ma, va) = batch_mean_variance(first);
    let (mb, vb) = batch_mean_variance(last);
    Ok((ma - mb) / (va + vb).sqrt())
}

/// Effective sample size with Geyer's initial positive sequence truncation.
pub fn ess<T: Real>(x: &[T]) -> Result<T> {
    check_column(x)?;
    let n = x.len();
    let nt = T::from_usize(n).unwrap();
    let m = mean(x);
    let centered: Vec<T> = x.iter().map(|&v| v - m).collect();
    let autocov = |lag: usize| -> T {
        centered[..n - lag]
            .iter()
            .zip(&centered[lag..])
            .map(|(&a, &b)| a * b)
            .sum::<T>()
            / nt
    };
    let gamma0 = autocov(0);
    // pairs Γ_m = ρ_{2m} + ρ_{2m+1}, summed while positive
    let mut sum_pairs = T::zero();
    let mut lag = 0;
    while lag + 1 < n {
        let pair = (autocov(lag) + autocov(lag + 1)) / gamma0;
        if pair <= T::zero() {
            break;
        }
        sum_pairs = sum_pairs + pair;
        lag += 2;
    }
    let tau = T::lit(2.0) * sum_pairs - T::one();
    let ess = nt / tau;
    Ok(if ess.is_finite() && ess > T::zero() { ess.min(nt) } else { nt })
}

/// Monte Carlo standard error of the mean: sd / √ESS.
pub fn mcse<T: Real>(x: &[T]) -> Result<T> {
    let e = ess(x)?;
    let m = mean(x);
    let n = T::from_usize(x.len()).unwrap();
    let var = x.iter().map(|&v| (v - m) * (v - m)).sum::<T>() / (n - T::one());
    Ok((var / e).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, StandardNormal};

    fn iid(n: usize, seed: u64) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n).map(|_| StandardNormal.sample(&mut rng)).collect()
    }

    fn ar1(n: usize, rho: f64, seed: u64) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut x = Vec::with_capacity(n);
        let mut prev: f64 = StandardNormal.sample(&mut rng);
        prev /= (1.0 - rho * rho).sqrt();
        for _ in 0..n {
            let z: f64 = StandardNormal.sample(&mut rng);
            prev = rho * prev + z;
            x.push(prev);
        }
        x
    }

    #[test]
    fn constant_column_is_undefined() {
        assert!(matches!(geweke_z(&[2.0; 500]), Err(Error::DiagnosticUndefined(_))));
        assert!(matches!(ess(&[2.0; 500]), Err(Error::DiagnosticUndefined(_))));
        assert!(ess(&[1.0, 2.0]).is_err());
    }

    #[test]
    fn shifted_halves_are_flagged() {
        let mut x = iid(5000, 4);
        for v in &mut x[2500..] {
            *v += 5.0;
        }
        assert!(geweke_z(&x).unwrap().abs() > 5.0);
    }

    #[test]
    fn iid_geweke_is_small() {
        let z = geweke_z(&iid(5000, 12)).unwrap();
        assert!(z.abs() < 3.0, "{z}");
    }

    #[test]
    fn iid_ess_near_n() {
        let e = ess(&iid(5000, 2)).unwrap() / 5000.0;
        assert!((0.8..=1.2).contains(&e), "{e}");
    }

    #[test]
    fn ar1_ess_matches_analytic_rate() {
        let n = 20_000;
        let e = ess(&ar1(n, 0.9, 3)).unwrap();
        let want = n as f64 * 0.1 / 1.9;
        assert!(e > want / 1.5 && e < want * 1.5, "{e} vs {want}");
    }

    #[test]
    fn mcse_of_iid_is_sd_over_root_n() {
        let x = iid(10_000, 8);
        let m = mcse(&x).unwrap();
        assert!((m - 0.01).abs() < 0.0015, "{m}");
    }
}
