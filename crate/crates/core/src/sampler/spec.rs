use crate::error::{Error, Result};

/// Run protocol for one chain.
#[derive(Debug, Clone, PartialEq)]
pub struct SamplerSpec {
    pub iterations: usize,
    pub burn_in: usize,
    pub thin: usize,
    pub seed: u64,
    pub target_acceptance: f64,
    pub adapt: bool,
    /// Initial random-walk scale for every Metropolis block.
    pub initial_scale: f64,
    /// Oracle mode: hold every spatial effect at zero.
    pub fix_phi_at_zero: bool,
    /// Oracle mode: hold the dispersion at this value.
    pub fix_k_at: Option<f64>,
}

impl Default for SamplerSpec {
    fn default() -> Self {
        Self {
            iterations: 20_000,
            burn_in: 2_000,
            thin: 1,
            seed: 1,
            target_acceptance: 0.44,
            adapt: true,
            initial_scale: 0.1,
            fix_phi_at_zero: false,
            fix_k_at: None,
        }
    }
}

impl SamplerSpec {
    pub fn validate(&self) -> Result<()> {
        if self.iterations == 0 {
            return Err(Error::Config("iterations must be positive".into()));
        }
        if self.burn_in >= self.iterations {
            return Err(Error::Config(format!(
                "burn_in ({}) must be smaller than iterations ({})",
                self.burn_in, self.iterations
            )));
        }
        if self.thin == 0 {
            return Err(Error::Config("thin must be at least 1".into()));
        }
        if !(self.target_acceptance > 0.0 && self.target_acceptance < 1.0) {
            return Err(Error::Config(format!(
                "target_acceptance must lie in (0, 1), got {}",
                self.target_acceptance
            )));
        }
        if !(self.initial_scale.is_finite() && self.initial_scale >= 0.0) {
            return Err(Error::Config("initial_scale must be finite and non-negative".into()));
        }
        if let Some(k) = self.fix_k_at {
            if !(k.is_finite() && k > 0.0) {
                return Err(Error::Config(format!("fix_k_at must be positive, got {k}")));
            }
        }
        Ok(())
    }

    /// Number of draws a run keeps.
    pub fn stored_draws(&self) -> usize {
        (self.iterations - self.burn_in) / self.thin
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_follow_the_run_protocol() {
        let s = SamplerSpec::default();
        assert_eq!((s.iterations, s.burn_in, s.thin), (20_000, 2_000, 1));
        assert_eq!(s.stored_draws(), 18_000);
        s.validate().unwrap();
    }

    #[test]
    fn rejects_bad_configs() {
        let bad = [
            SamplerSpec { burn_in: 20_000, ..Default::default() },
            SamplerSpec { thin: 0, ..Default::default() },
            SamplerSpec { target_acceptance: 1.0, ..Default::default() },
            SamplerSpec { fix_k_at: Some(0.0), ..Default::default() },
        ];
        for s in bad {
            assert!(s.validate().is_err(), "{s:?}");
        }
    }

    #[test]
    fn thinning_counts() {
        let s = SamplerSpec { iterations: 105, burn_in: 5, thin: 3, ..Default::default() };
        assert_eq!(s.stored_draws(), 33);
    }
}
