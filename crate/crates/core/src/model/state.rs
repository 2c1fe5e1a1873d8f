use crate::data::DesignMatrix;
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Parameter vector θ = (β, φ, k, τ) with the derived linear predictor ψ and mean λ = exp(ψ).
#[derive(Debug, Clone, PartialEq)]
pub struct ModelState<T> {
    pub beta: Vec<T>,
    pub phi: Vec<T>,
    pub k: T,
    pub tau: T,
    pub psi: Vec<T>,
    pub lambda: Vec<T>,
}

impl<T: Real> ModelState<T> {
    pub fn new(beta: Vec<T>, phi: Vec<T>, k: T, tau: T, x: &DesignMatrix<T>) -> Result<Self> {
        if !(k > T::zero() && tau > T::zero()) {
            return Err(Error::Domain(format!("k and tau must be positive (k = {k}, tau = {tau})")));
        }
        let (psi, lambda) = linear_predictor(x, &beta, &phi)?;
        Ok(Self {
            beta,
            phi,
            k,
            tau,
            psi,
            lambda,
        })
    }

    /// Recomputes ψ and λ from β and φ.
    pub fn refresh(&mut self, x: &DesignMatrix<T>) -> Result<()> {
        let (psi, lambda) = linear_predictor(x, &self.beta, &self.phi)?;
        self.psi = psi;
        self.lambda = lambda;
        Ok(())
    }

    /// Population standard deviation of φ.
    pub fn phi_sd(&self) -> T {
        population_sd(&self.phi)
    }
}

pub fn population_sd<T: Real>(v: &[T]) -> T {
    if v.is_empty() {
        return T::zero();
    }
    let n = T::from_usize(v.len()).unwrap();
    let mean = v.iter().copied().sum::<T>() / n;
    (v.iter().map(|&x| (x - mean) * (x - mean)).sum::<T>() / n).sqrt()
}

/// ψ = Xβ + φ and λ = exp(ψ).
pub fn linear_predictor<T: Real>(x: &DesignMatrix<T>, beta: &[T], phi: &[T]) -> Result<(Vec<T>, Vec<T>)> {
    if beta.len() != x.ncols() || phi.len() != x.nrows() {
        return Err(Error::Shape(format!(
            "X is {}x{}, beta has {} entries, phi has {}",
            x.nrows(),
            x.ncols(),
            beta.len(),
            phi.len()
        )));
    }
    if beta.iter().chain(phi).any(|v| !v.is_finite()) {
        return Err(Error::Domain("non-finite coefficient or spatial effect".into()));
    }
    let limit = T::max_value().ln();
    let mut psi = Vec::with_capacity(x.nrows());
    let mut lambda = Vec::with_capacity(x.nrows());
    for i in 0..x.nrows() {
        let p = row_dot(x.row(i), beta) + phi[i];
        if !p.is_finite() || p > limit {
            return Err(Error::NumericRange {
                zone: i,
                psi: p.to_f64_lossy(),
            });
        }
        psi.push(p);
        lambda.push(p.exp());
    }
    Ok((psi, lambda))
}

#[inline]
pub(crate) fn row_dot<T: Real>(row: &[T], beta: &[T]) -> T {
    row.iter().zip(beta).fold(T::zero(), |acc, (&a, &b)| acc + a * b)
}
