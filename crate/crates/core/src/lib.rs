//! Bayesian negative-binomial regression with an intrinsic CAR spatial effect
//! for zone-level crash counts.
//!
//! The numerical core is generic over [`Real`]; the aliases below fix it to `f64`.

// `!(x > 0.0)` is used on purpose so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
#![allow(clippy::excessive_precision)]

pub mod cli;
pub mod data;
pub mod error;
pub mod model;
pub mod sampler;
pub mod scalar;
pub mod synth;

pub use error::{Error, Result};
pub use scalar::Real;

pub type Weights = data::WeightMatrix<f64>;
pub type Design = data::DesignMatrix<f64>;
pub type Data = model::FitData<f64>;
pub type State = model::ModelState<f64>;
pub type Priors = model::PriorSpec<f64>;
pub type Draws = sampler::ChainDraws<f64>;
