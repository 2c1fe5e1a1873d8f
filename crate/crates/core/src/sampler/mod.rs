//! Metropolis-within-Gibbs sampler, diagnostics, and posterior summaries.

pub mod chain;
pub mod diagnostics;
pub mod draws_io;
pub mod spec;
pub mod summary;
pub mod sweep;

pub use chain::{init_state, parameter_names, run_chain, run_chain_stream, run_chains, ChainDraws, ChainMeta};
pub use diagnostics::{ess, geweke_z, mcse};
pub use draws_io::{read_draws, write_draws};
pub use spec::SamplerSpec;
pub use summary::{format_table, is_reported, summarize, write_summary, FitSummary, ParamSummary};
pub use sweep::{recenter, sweep, tau_conditional, SweepOptions, Tuning};
