use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::model::{log_posterior_unnorm, FitData, ModelState, PriorSpec};
use crate::sampler::spec::SamplerSpec;
use crate::sampler::sweep::{sweep, SweepOptions, Tuning};
use crate::scalar::Real;

/// Per-chain bookkeeping attached to stored draws.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainMeta {
    pub chain: usize,
    pub seed: u64,
    pub spec: SamplerSpec,
    /// Rows of the draw matrix belonging to this chain.
    pub rows: std::ops::Range<usize>,
    /// Post-burn-in acceptance rate per parameter column; NaN where undefined.
    pub acceptance: Vec<f64>,
    pub nonfinite_rejections: usize,
}

/// Stored post-burn-in draws: one row per kept iteration.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainDraws<T> {
    pub names: Vec<String>,
    pub rows: Vec<Vec<T>>,
    /// Empty when the draws were read back from a file.
    pub chains: Vec<ChainMeta>,
}

impl<T: Real> ChainDraws<T> {
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    pub fn column(&self, j: usize) -> Vec<T> {
        self.rows.iter().map(|r| r[j]).collect()
    }

    pub fn column_by_name(&self, name: &str) -> Option<Vec<T>> {
        self.column_index(name).map(|j| self.column(j))
    }

    /// Keeps only the columns whose name passes `keep`.
    pub fn select(&self, keep: impl Fn(&str) -> bool) -> Self {
        let idx: Vec<usize> = (0..self.names.len()).filter(|&j| keep(&self.names[j])).collect();
        Self {
            names: idx.iter().map(|&j| self.names[j].clone()).collect(),
            rows: self.rows.iter().map(|r| idx.iter().map(|&j| r[j]).collect()).collect(),
            chains: self
                .chains
                .iter()
                .map(|c| ChainMeta {
                    acceptance: idx.iter().map(|&j| c.acceptance[j]).collect(),
                    ..c.clone()
                })
                .collect(),
        }
    }

    /// Draws of a single chain.
    pub fn chain(&self, c: usize) -> Self {
        let meta = &self.chains[c];
        Self {
            names: self.names.clone(),
            rows: self.rows[meta.rows.clone()].to_vec(),
            chains: vec![ChainMeta {
                rows: 0..meta.rows.len(),
                ..meta.clone()
            }],
        }
    }

    /// Stacks independent chains row-wise.
    pub fn concat(parts: Vec<Self>) -> Result<Self> {
        let mut iter = parts.into_iter();
        let mut out = iter
            .next()
            .ok_or_else(|| Error::Summary("no chains to combine".into()))?;
        for part in iter {
            if part.names != out.names {
                return Err(Error::Shape("chains have different parameter columns".into()));
            }
            let offset = out.rows.len();
            out.chains.extend(part.chains.into_iter().map(|mut c| {
                c.rows = c.rows.start + offset..c.rows.end + offset;
                c
            }));
            out.rows.extend(part.rows);
        }
        Ok(out)
    }
}

/// Column names for a fit: coefficients, `k`, `tau`, `phi[<zone>]` per zone, then `sd_phi`.
pub fn parameter_names<T: Real>(data: &FitData<T>) -> Vec<String> {
    let mut names: Vec<String> = data.x.names().to_vec();
    names.push("k".into());
    names.push("tau".into());
    names.extend(data.zone_ids.iter().map(|z| format!("phi[{z}]")));
    names.push("sd_phi".into());
    names
}

/// Starting point: intercept at ln(ȳ + 0.5), everything else at zero, k = τ = 1.
pub fn init_state<T: Real>(data: &FitData<T>, priors: &PriorSpec<T>) -> Result<ModelState<T>> {
    if data.n() == 0 {
        return Err(Error::Validation {
            row: 0,
            message: "no zones to fit".into(),
        });
    }
    priors.validate()?;
    let mut beta = vec![T::zero(); data.p()];
    if data.x.has_intercept() {
        let total: f64 = data.y.iter().map(|&y| y as f64).sum();
        beta[0] = T::lit((total / data.n() as f64 + 0.5).ln());
    }
    ModelState::new(beta, vec![T::zero(); data.n()], T::one(), T::one(), &data.x)
}

fn state_dump<T: Real>(state: &ModelState<T>) -> String {
    let (lo, hi) = state
        .phi
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), p| {
            (lo.min(p.to_f64_lossy()), hi.max(p.to_f64_lossy()))
        });
    format!(
        "beta = {:?}\nk = {}\ntau = {}\nphi range = [{lo}, {hi}]",
        state.beta, state.k, state.tau
    )
}

/// Runs one chain with the RNG stream of chain 0.
pub fn run_chain<T: Real>(spec: &SamplerSpec, data: &FitData<T>, priors: &PriorSpec<T>) -> Result<ChainDraws<T>> {
    run_chain_stream(spec, data, priors, 0)
}

/// Runs one chain on RNG stream `chain` of `spec.seed`.
pub fn run_chain_stream<T: Real>(
    spec: &SamplerSpec,
    data: &FitData<T>,
    priors: &PriorSpec<T>,
    chain: usize,
) -> Result<ChainDraws<T>> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    rng.set_stream(chain as u64);

    let mut state = init_state(data, priors)?;
    if let Some(k) = spec.fix_k_at {
        state.k = T::lit(k);
    }
    let init = log_posterior_unnorm(&state, data, priors)?;
    if !init.is_finite() {
        return Err(Error::SamplerAbort {
            iteration: 0,
            reason: "initial log posterior is not finite".into(),
            dump: state_dump(&state),
        });
    }

    let (n, p) = (data.n(), data.p());
    let mut tuning = Tuning::uniform(p, n, T::lit(spec.initial_scale));
    let options = SweepOptions::new(spec.fix_phi_at_zero, spec.fix_k_at.is_some());
    let target = T::lit(spec.target_acceptance);
    let names = parameter_names(data);
    let width = names.len();

    let mut rows = Vec::with_capacity(spec.stored_draws());
    let mut beta_acc = vec![0usize; p];
    let mut phi_acc = vec![0usize; n];
    let mut k_acc = 0usize;
    let mut nonfinite = 0usize;

    for iteration in 1..=spec.iterations {
        let outcome = sweep(&mut state, data, priors, &tuning, &options, &mut rng).map_err(|e| match e {
            Error::SamplerAbort { reason, .. } => Error::SamplerAbort {
                iteration,
                reason,
                dump: state_dump(&state),
            },
            other => other,
        })?;
        nonfinite += outcome.nonfinite_rejections;

        if iteration <= spec.burn_in {
            if spec.adapt {
                // Robbins–Monro on the log scale
                let gain = T::lit((iteration as f64).powf(-0.6));
                let adjust = |scale: &mut T, accepted: bool| {
                    let a = if accepted { T::one() } else { T::zero() };
                    *scale = *scale * (gain * (a - target)).exp();
                };
                for (s, &a) in tuning.beta.iter_mut().zip(&outcome.beta_accepted) {
                    adjust(s, a);
                }
                if !spec.fix_phi_at_zero {
                    for &i in data.non_islands() {
                        adjust(&mut tuning.phi[i], outcome.phi_accepted[i]);
                    }
                }
                if !options.fix_k {
                    adjust(&mut tuning.log_k, outcome.k_accepted);
                }
            }
            continue;
        }

        for (c, &a) in beta_acc.iter_mut().zip(&outcome.beta_accepted) {
            *c += usize::from(a);
        }
        for (c, &a) in phi_acc.iter_mut().zip(&outcome.phi_accepted) {
            *c += usize::from(a);
        }
        k_acc += usize::from(outcome.k_accepted);

        if (iteration - spec.burn_in).is_multiple_of(spec.thin) {
            let mut row = Vec::with_capacity(width);
            row.extend_from_slice(&state.beta);
            row.push(state.k);
            row.push(state.tau);
            row.extend_from_slice(&state.phi);
            row.push(state.phi_sd());
            rows.push(row);
        }
    }

    let post = (spec.iterations - spec.burn_in) as f64;
    let mut acceptance: Vec<f64> = beta_acc.iter().map(|&c| c as f64 / post).collect();
    acceptance.push(if options.fix_k { f64::NAN } else { k_acc as f64 / post });
    acceptance.push(1.0); // Gibbs
    acceptance.extend((0..n).map(|i| {
        if spec.fix_phi_at_zero || data.w.is_island(i) {
            f64::NAN
        } else {
            phi_acc[i] as f64 / post
        }
    }));
    acceptance.push(f64::NAN);

    let stored = rows.len();
    Ok(ChainDraws {
        names,
        rows,
        chains: vec![ChainMeta {
            chain,
            seed: spec.seed,
            spec: spec.clone(),
            rows: 0..stored,
            acceptance,
            nonfinite_rejections: nonfinite,
        }],
    })
}

/// Runs `chains` independent chains concurrently and stacks their draws in chain order.
pub fn run_chains<T: Real>(
    spec: &SamplerSpec,
    chains: usize,
    data: &FitData<T>,
    priors: &PriorSpec<T>,
) -> Result<ChainDraws<T>> {
    if chains == 0 {
        return Err(Error::Config("chains must be at least 1".into()));
    }
    if chains == 1 {
        return run_chain(spec, data, priors);
    }
    let results: Vec<Result<ChainDraws<T>>> = std::thread::scope(|scope| {
        let handles: Vec<_> = (0..chains)
            .map(|c| scope.spawn(move || run_chain_stream(spec, data, priors, c)))
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("chain thread panicked"))
            .collect()
    });
    ChainDraws::concat(results.into_iter().collect::<Result<Vec<_>>>()?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{DesignMatrix, WeightMatrix};
    use crate::model::population_sd;

    fn small() -> FitData<f64> {
        let x = DesignMatrix::with_intercept(&[("a", vec![0.2, 0.9, 1.4, 0.5])]).unwrap();
        let w = WeightMatrix::from_edges(4, [(0, 1, 2.0), (1, 2, 2.0), (2, 3, 4.0)]).unwrap();
        FitData::new(vec![4, 9, 15, 6], x, w, (0..4).map(|i| format!("z{i}")).collect()).unwrap()
    }

    #[test]
    fn intercept_starts_at_log_mean() {
        let x = DesignMatrix::with_intercept(&[("a", vec![0.0; 2])]).unwrap();
        let w = WeightMatrix::from_edges(2, [(0, 1, 1.0)]).unwrap();
        let d = FitData::new(vec![100, 118], x.clone(), w.clone(), vec!["a".into(), "b".into()]).unwrap();
        let s = init_state(&d, &PriorSpec::default()).unwrap();
        assert!((s.beta[0] - 109.5f64.ln()).abs() < 1e-15);
        assert!((s.beta[0] - 4.695_925).abs() < 1e-6);
        let d0 = FitData::new(vec![0, 0], x, w, vec!["a".into(), "b".into()]).unwrap();
        let s0 = init_state(&d0, &PriorSpec::default()).unwrap();
        assert!((s0.beta[0] + std::f64::consts::LN_2).abs() < 1e-15);
        assert!(log_posterior_unnorm(&s0, &d0, &PriorSpec::default()).unwrap().is_finite());
    }

    #[test]
    fn same_seed_is_bit_identical() {
        let spec = SamplerSpec { iterations: 400, burn_in: 100, seed: 77, ..Default::default() };
        let a = run_chain(&spec, &small(), &PriorSpec::default()).unwrap();
        let b = run_chain(&spec, &small(), &PriorSpec::default()).unwrap();
        assert_eq!((&a.names, &a.rows), (&b.names, &b.rows));
        let bits = |d: &ChainDraws<f64>| d.chains[0].acceptance.iter().map(|v| v.to_bits()).collect::<Vec<_>>();
        assert_eq!(bits(&a), bits(&b));
        let c = run_chain(&SamplerSpec { seed: 78, ..spec }, &small(), &PriorSpec::default()).unwrap();
        assert_ne!(a.rows, c.rows);
    }

    #[test]
    fn one_stored_draw() {
        let spec = SamplerSpec { iterations: 11, burn_in: 10, ..Default::default() };
        let d = run_chain(&spec, &small(), &PriorSpec::default()).unwrap();
        assert_eq!(d.len(), 1);
    }

    #[test]
    fn stored_columns_are_consistent() {
        let spec = SamplerSpec { iterations: 600, burn_in: 100, thin: 2, ..Default::default() };
        let d = run_chain(&spec, &small(), &PriorSpec::default()).unwrap();
        assert_eq!(d.len(), 250);
        assert_eq!(d.names.len(), 2 + 2 + 4 + 1);
        let (k, tau) = (d.column_index("k").unwrap(), d.column_index("tau").unwrap());
        let sd = d.column_index("sd_phi").unwrap();
        for row in &d.rows {
            assert!(row[k] > 0.0 && row[tau] > 0.0);
            assert_eq!(row[sd], population_sd(&row[4..8]));
        }
        assert!(d.chains[0].acceptance[0] > 0.05);
    }

    #[test]
    fn burn_in_must_leave_iterations() {
        let spec = SamplerSpec { iterations: 10, burn_in: 10, ..Default::default() };
        assert!(matches!(run_chain(&spec, &small(), &PriorSpec::default()), Err(Error::Config(_))));
    }

    #[test]
    fn chains_use_distinct_streams() {
        let spec = SamplerSpec { iterations: 300, burn_in: 100, seed: 5, ..Default::default() };
        let all = run_chains(&spec, 3, &small(), &PriorSpec::default()).unwrap();
        assert_eq!(all.len(), 600);
        assert_eq!(all.chains.len(), 3);
        let first = run_chain(&spec, &small(), &PriorSpec::default()).unwrap();
        assert_eq!(all.chain(0).rows, first.rows);
        assert_ne!(all.chain(1).rows, first.rows);
        assert_eq!(all.chain(2).chains[0].chain, 2);
    }

    #[test]
    fn runs_in_f32() {
        let x = DesignMatrix::<f32>::with_intercept(&[("a", vec![0.2, 0.9, 1.4, 0.5])]).unwrap();
        let w = WeightMatrix::from_edges(4, [(0, 1, 2.0f32), (1, 2, 2.0), (2, 3, 4.0)]).unwrap();
        let d = FitData::new(vec![4, 9, 15, 6], x, w, (0..4).map(|i| format!("z{i}")).collect()).unwrap();
        let spec = SamplerSpec { iterations: 300, burn_in: 100, ..Default::default() };
        let draws = run_chain(&spec, &d, &PriorSpec::default()).unwrap();
        assert_eq!(draws.len(), 200);
        assert!(draws.rows.iter().all(|r| r.iter().all(|v| v.is_finite())));
    }
}
