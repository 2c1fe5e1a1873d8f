//! Intrinsic CAR prior on the spatial effects.
//!
//! The joint log density is `−(τ/2) Σ_{i<j} w_ij (φ_i − φ_j)²`, each undirected
//! pair counted once. Under this form the full conditional of φ_i is normal with
//! mean `Σ_j w_ij φ_j / w_i+` and variance `1 / (τ w_i+)`.

use crate::data::WeightMatrix;
use crate::error::{Error, Result};
use crate::scalar::Real;

fn check_len<T: Real>(phi: &[T], w: &WeightMatrix<T>) -> Result<()> {
    if phi.len() != w.dim() {
        return Err(Error::Shape(format!(
            "phi has length {}, weight matrix is {}x{}",
            phi.len(),
            w.dim(),
            w.dim()
        )));
    }
    Ok(())
}

/// `Σ_{i<j} w_ij (φ_i − φ_j)²`.
pub fn icar_pair_energy<T: Real>(phi: &[T], w: &WeightMatrix<T>) -> Result<T> {
    check_len(phi, w)?;
    Ok(w
        .edges()
        .iter()
        .map(|&(i, j, wij)| {
            let d = phi[i] - phi[j];
            wij * d * d
        })
        .sum())
}

/// Unnormalised joint log density; the ICAR prior is improper.
pub fn icar_joint_log_density_unnorm<T: Real>(phi: &[T], w: &WeightMatrix<T>, tau: T) -> Result<T> {
    if !(tau.is_finite() && tau > T::zero()) {
        return Err(Error::Domain(format!("CAR precision must be positive, got {tau}")));
    }
    Ok(-tau / T::lit(2.0) * icar_pair_energy(phi, w)?)
}

/// Conditional (mean, variance) of φ_i given the other effects.
pub fn icar_conditional<T: Real>(i: usize, phi: &[T], w: &WeightMatrix<T>, tau: T) -> Result<(T, T)> {
    check_len(phi, w)?;
    if i >= w.dim() {
        return Err(Error::Shape(format!("zone index {i} outside dimension {}", w.dim())));
    }
    if !(tau.is_finite() && tau > T::zero()) {
        return Err(Error::Domain(format!("CAR precision must be positive, got {tau}")));
    }
    let total = w.row_sum(i);
    if total == T::zero() {
        return Err(Error::Island { zone: i });
    }
    Ok((neighbor_mean(i, phi, w), T::one() / (tau * total)))
}

/// Weighted neighbour average; caller guarantees w_i+ > 0.
#[inline]
pub(crate) fn neighbor_mean<T: Real>(i: usize, phi: &[T], w: &WeightMatrix<T>) -> T {
    let weighted: T = w.neighbors(i).iter().map(|&(j, wij)| wij * phi[j]).sum();
    weighted / w.row_sum(i)
}
