//! Synthetic datasets with known truth, and brute-force oracles.

pub mod crashes;
pub mod grid;
pub mod icar_draw;
pub mod lattice;
pub mod truth;

pub use crashes::simulate_crashes;
pub use grid::{grid_posterior_1d, grid_posterior_slope, Grid, GridPosterior};
pub use icar_draw::{laplacian, sample_icar, tau_for_target_sd, IcarSampler};
pub use lattice::{lattice_zone_id, make_lattice};
pub use truth::{
    reference_fit_data, reference_zones, simulate_dataset, write_truth, SimulatedDataset, TruthSpec,
};
