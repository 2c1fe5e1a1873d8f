//! Exact draws from the ICAR prior via the spectrum of Q = D − W.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::data::WeightMatrix;
use crate::error::{Error, Result};

/// Graph Laplacian D − W as a dense matrix.
pub fn laplacian(w: &WeightMatrix<f64>) -> DMatrix<f64> {
    let n = w.dim();
    let mut q = DMatrix::zeros(n, n);
    for &(i, j, wij) in w.edges() {
        q[(i, j)] -= wij;
        q[(j, i)] -= wij;
        q[(i, i)] += wij;
        q[(j, j)] += wij;
    }
    q
}

/// Spectral sampler for the ICAR prior restricted to the sum-to-zero subspace
/// of every connected component.
#[derive(Debug, Clone)]
pub struct IcarSampler {
    /// (eigenvalue, eigenvector) pairs with non-zero eigenvalue.
    modes: Vec<(f64, Vec<f64>)>,
    components: crate::data::Components,
    n: usize,
}

impl IcarSampler {
    /// Returns the sampler and warnings (disconnected graph, islands).
    pub fn new(w: &WeightMatrix<f64>) -> Result<(Self, Vec<String>)> {
        let n = w.dim();
        if n == 0 {
            return Err(Error::Shape("empty weight matrix".into()));
        }
        let eig = SymmetricEigen::new(laplacian(w));
        let scale = eig.eigenvalues.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let cutoff = 1e-9 * scale.max(1.0);
        let modes = (0..n)
            .filter(|&k| eig.eigenvalues[k] > cutoff)
            .map(|k| (eig.eigenvalues[k], eig.eigenvectors.column(k).iter().copied().collect()))
            .collect();
        let components = w.components();
        let mut warnings = Vec::new();
        if components.count > 1 {
            warnings.push(format!(
                "graph has {} connected components; effects are centred within each",
                components.count
            ));
        }
        let islands = w.islands().len();
        if islands > 0 {
            warnings.push(format!("{islands} island zones fixed at 0"));
        }
        Ok((Self { modes, components, n }, warnings))
    }

    pub fn draw<R: Rng + ?Sized>(&self, tau: f64, rng: &mut R) -> Result<Vec<f64>> {
        if !(tau.is_finite() && tau > 0.0) {
            return Err(Error::Domain(format!("tau must be positive, got {tau}")));
        }
        let mut phi = vec![0.0; self.n];
        for (value, vector) in &self.modes {
            let z: f64 = StandardNormal.sample(rng);
            let coef = z / (tau * value).sqrt();
            for (p, v) in phi.iter_mut().zip(vector) {
                *p += coef * v;
            }
        }
        // remove rounding residue from each component's sum; islands exactly 0
        let mut sums = vec![0.0; self.components.count];
        let mut counts = vec![0usize; self.components.count];
        for (i, label) in self.components.labels.iter().enumerate() {
            match label {
                Some(c) => {
                    sums[*c] += phi[i];
                    counts[*c] += 1;
                }
                None => phi[i] = 0.0,
            }
        }
        for (i, label) in self.components.labels.iter().enumerate() {
            if let Some(c) = label {
                phi[i] -= sums[*c] / counts[*c] as f64;
            }
        }
        Ok(phi)
    }

    /// Expected squared population SD of a draw at τ = 1: trace(Q⁺) / n.
    pub fn mean_square_at_unit_tau(&self) -> f64 {
        self.modes.iter().map(|(v, _)| 1.0 / v).sum::<f64>() / self.n as f64
    }
}

/// One exact draw; see [`IcarSampler`].
pub fn sample_icar<R: Rng + ?Sized>(w: &WeightMatrix<f64>, tau: f64, rng: &mut R) -> Result<(Vec<f64>, Vec<String>)> {
    let (sampler, warnings) = IcarSampler::new(w)?;
    Ok((sampler.draw(tau, rng)?, warnings))
}

/// τ for which the expected sample variance of φ equals `sd²`.
pub fn tau_for_target_sd(w: &WeightMatrix<f64>, sd: f64) -> Result<f64> {
    if !(sd > 0.0) {
        return Err(Error::Domain(format!("target sd must be positive, got {sd}")));
    }
    let (sampler, _) = IcarSampler::new(w)?;
    Ok(sampler.mean_square_at_unit_tau() / (sd * sd))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn grid3() -> WeightMatrix<f64> {
        let mut edges = Vec::new();
        for r in 0..3 {
            for c in 0..3 {
                let i = r * 3 + c;
                if c < 2 {
                    edges.push((i, i + 1, 1.0 + ((i * 7) % 3) as f64));
                }
                if r < 2 {
                    edges.push((i, i + 3, 2.0 + ((i * 5) % 2) as f64));
                }
            }
        }
        WeightMatrix::from_edges(9, edges).unwrap()
    }

    #[test]
    fn draws_sum_to_zero() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let (phi, w) = sample_icar(&grid3(), 0.7, &mut rng).unwrap();
        assert!(w.is_empty());
        assert!(phi.iter().sum::<f64>().abs() < 1e-10);
    }

    #[test]
    fn two_node_variance() {
        // Q has eigenvalue 2w on (1, -1)/√2, so φ₁ has variance 1/(2wτ)·½ = 1/(4wτ)
        let (w, tau) = (3.0, 0.5);
        let wm = WeightMatrix::from_edges(2, [(0, 1, w)]).unwrap();
        let (s, _) = IcarSampler::new(&wm).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let draws = 100_000;
        let mut ss = 0.0;
        for _ in 0..draws {
            let phi = s.draw(tau, &mut rng).unwrap();
            assert_eq!(phi[0], -phi[1]);
            ss += phi[0] * phi[0];
        }
        let var = ss / draws as f64;
        let want = 1.0 / (4.0 * w * tau);
        assert!((var / want - 1.0).abs() < 0.02, "{var} vs {want}");
    }

    #[test]
    fn islands_and_components() {
        let w = WeightMatrix::from_edges(5, [(0, 1, 1.0), (2, 3, 2.0)]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let (phi, warnings) = sample_icar(&w, 1.0, &mut rng).unwrap();
        assert_eq!(warnings.len(), 2);
        assert_eq!(phi[4], 0.0);
        assert!((phi[0] + phi[1]).abs() < 1e-12);
        assert!((phi[2] + phi[3]).abs() < 1e-12);
    }

    #[test]
    fn covariance_matches_pseudo_inverse() {
        let w = grid3();
        let tau = 2.0;
        let n = 9;
        // Q⁺ = (Q + J/n)⁻¹ − J/n for a connected graph
        let q = laplacian(&w);
        let j = DMatrix::from_element(n, n, 1.0 / n as f64);
        let pinv = ((&q + &j).try_inverse().unwrap() - &j) / tau;

        let (s, _) = IcarSampler::new(&w).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let draws = 100_000;
        let mut sum = DMatrix::<f64>::zeros(n, n);
        let mut sum_sq = DMatrix::<f64>::zeros(n, n);
        for _ in 0..draws {
            let phi = s.draw(tau, &mut rng).unwrap();
            for a in 0..n {
                for b in 0..n {
                    let v = phi[a] * phi[b];
                    sum[(a, b)] += v;
                    sum_sq[(a, b)] += v * v;
                }
            }
        }
        let m = draws as f64;
        for a in 0..n {
            for b in 0..n {
                let mean = sum[(a, b)] / m;
                let se = ((sum_sq[(a, b)] / m - mean * mean) / m).sqrt();
                assert!((mean - pinv[(a, b)]).abs() < 3.0 * se + 1e-12, "({a},{b}): {mean} vs {}", pinv[(a, b)]);
            }
        }
        let trace: f64 = (0..n).map(|i| pinv[(i, i)]).sum::<f64>() * tau;
        assert!((s.mean_square_at_unit_tau() - trace / n as f64).abs() < 1e-10);
    }

    #[test]
    fn relabeling_permutes_the_distribution() {
        let w = grid3();
        let perm = [4, 0, 8, 1, 2, 3, 7, 6, 5];
        let wp = w.permuted(&perm).unwrap();
        let (a, _) = IcarSampler::new(&w).unwrap();
        let (b, _) = IcarSampler::new(&wp).unwrap();
        assert!((a.mean_square_at_unit_tau() - b.mean_square_at_unit_tau()).abs() < 1e-12);
    }

    #[test]
    fn target_sd_calibration() {
        let w = grid3();
        let tau = tau_for_target_sd(&w, 0.205).unwrap();
        let (s, _) = IcarSampler::new(&w).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let reps = 20_000;
        let mut acc = 0.0;
        for _ in 0..reps {
            let phi = s.draw(tau, &mut rng).unwrap();
            acc += phi.iter().map(|p| p * p).sum::<f64>() / 9.0;
        }
        assert!(((acc / reps as f64).sqrt() - 0.205).abs() < 0.005);
    }
}
