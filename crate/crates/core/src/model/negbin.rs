//! Negative binomial likelihood in mean–dispersion form.
//!
//! `y ~ NB(λ, k)` with mean λ and variance λ + λ²/k:
//!
//! ```text
//! p(y) = Γ(y+k) / (Γ(k) y!) · (k/(k+λ))^k · (λ/(k+λ))^y
//! ```
//!
//! The value is fully normalised.

use crate::error::{Error, Result};
use crate::scalar::{ln_gamma, Real};

/// Log pmf of `y` under NB(λ, k).
pub fn nb_log_pmf<T: Real>(y: u64, lambda: T, k: T) -> Result<T> {
    check_params(lambda, k)?;
    Ok(nb_count_term(y, k) + nb_rate_term(y, lambda, k))
}

/// Same as [`nb_log_pmf`] with `y` given as a signed integer; negative counts are a domain error.
pub fn nb_log_pmf_signed<T: Real>(y: i64, lambda: T, k: T) -> Result<T> {
    let y = u64::try_from(y).map_err(|_| Error::Domain(format!("negative count {y}")))?;
    nb_log_pmf(y, lambda, k)
}

fn check_params<T: Real>(lambda: T, k: T) -> Result<()> {
    if !(lambda.is_finite() && lambda > T::zero()) {
        return Err(Error::Domain(format!("NB mean must be positive and finite, got {lambda}")));
    }
    if !(k.is_finite() && k > T::zero()) {
        return Err(Error::Domain(format!("NB dispersion must be positive and finite, got {k}")));
    }
    Ok(())
}

/// `ln Γ(y+k) − ln Γ(k) − ln y!`: the part that depends on k but not λ.
pub fn nb_count_term<T: Real>(y: u64, k: T) -> T {
    let yt = T::from_u64(y).unwrap();
    ln_gamma(yt + k) - ln_gamma(k) - ln_gamma(yt + T::one())
}

/// `k ln(k/(k+λ)) + y ln(λ/(k+λ))`: the λ-dependent part.
///
/// Enough on its own for Metropolis ratios in which k is held fixed.
pub fn nb_rate_term<T: Real>(y: u64, lambda: T, k: T) -> T {
    let total = k + lambda;
    let dispersion = -k * (lambda / k).ln_1p();
    if y == 0 {
        dispersion
    } else {
        dispersion + T::from_u64(y).unwrap() * (lambda / total).ln()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_count_closed_form() {
        let v = nb_log_pmf(0, 2.0, 1.0).unwrap();
        assert!((v - (1.0f64 / 3.0).ln()).abs() < 1e-14);
    }

    #[test]
    fn k_one_is_geometric() {
        let v = nb_log_pmf(3, 2.0, 1.0).unwrap();
        assert!((v - (8.0f64 / 81.0).ln()).abs() < 1e-14);
        assert!((v - -2.315_007_612_992_602_8).abs() < 1e-13);
    }

    // 50-digit evaluation: lnΓ(111.5) − lnΓ(2.5) − lnΓ(110) + 2.5 ln(2.5/111.5) + 109 ln(109/111.5)
    #[test]
    fn table_mean_count_against_high_precision() {
        let v: f64 = nb_log_pmf(109, 109.0, 2.5).unwrap();
        let want = -5.196_659_419_049_554_9;
        assert!((v - want).abs() < 1e-11, "{v}");
    }

    #[test]
    fn invalid_parameters() {
        assert!(nb_log_pmf(1, 0.0, 1.0).is_err());
        assert!(nb_log_pmf(1, 1.0, -1.0).is_err());
        assert!(nb_log_pmf(1, f64::NAN, 1.0).is_err());
        assert!(nb_log_pmf(1, 1.0, f64::INFINITY).is_err());
        assert!(nb_log_pmf_signed::<f64>(-1, 1.0, 1.0).is_err());
        assert!(nb_log_pmf_signed::<f64>(2, 1.0, 1.0).is_ok());
    }

    #[test]
    fn finite_at_extremes() {
        for &(y, l, k) in &[(0u64, 1e-8, 1e-3), (357, 1e-3, 1e3), (0, 1e6, 1e-3), (10_000, 1.0, 1e6)] {
            assert!(nb_log_pmf::<f64>(y, l, k).unwrap().is_finite(), "{y} {l} {k}");
        }
    }

    #[test]
    fn normalisation_grid() {
        for &lambda in &[0.1f64, 1.0, 2.0, 7.5, 20.0, 50.0] {
            for &k in &[0.5, 1.0, 5.0] {
                let upper = (lambda + 40.0 * (lambda + lambda * lambda / k).sqrt() + 60.0).ceil() as u64;
                let total: f64 = (0..=upper).map(|y| nb_log_pmf(y, lambda, k).unwrap().exp()).sum();
                assert!(total > 1.0 - 1e-6 && total < 1.0 + 1e-9, "λ={lambda} k={k}: {total}");
            }
        }
    }

    #[test]
    fn pmf_moments_match_parameterisation() {
        let (lambda, k) = (6.0f64, 2.0);
        let (mut m1, mut m2) = (0.0, 0.0);
        for y in 0..2000u64 {
            let p = nb_log_pmf(y, lambda, k).unwrap().exp();
            m1 += p * y as f64;
            m2 += p * (y * y) as f64;
        }
        assert!((m1 - lambda).abs() < 1e-9);
        assert!((m2 - m1 * m1 - (lambda + lambda * lambda / k)).abs() < 1e-7);
    }

    #[test]
    fn f32_evaluation_tracks_f64() {
        let a = nb_log_pmf(12, 9.5f32, 3.0f32).unwrap() as f64;
        let b = nb_log_pmf(12, 9.5f64, 3.0f64).unwrap();
        assert!((a - b).abs() < 1e-4);
    }
}
