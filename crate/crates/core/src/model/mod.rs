//! Densities of the negative-binomial CAR model.
//!
//! Constant-dropping convention: the NB likelihood and the priors on β, k and τ
//! are normalised; the ICAR joint density is returned without its (improper)
//! normaliser `((n − c)/2) ln τ`, which the τ update accounts for explicitly.

pub mod icar;
pub mod negbin;
pub mod posterior;
pub mod prior;
pub mod state;

pub use icar::{icar_conditional, icar_joint_log_density_unnorm, icar_pair_energy};
pub use negbin::{nb_log_pmf, nb_log_pmf_signed};
pub use posterior::{log_posterior_unnorm, FitData};
pub use prior::{log_prior, PriorSpec};
pub use state::{linear_predictor, population_sd, ModelState};
