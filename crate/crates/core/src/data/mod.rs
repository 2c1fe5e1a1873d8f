//! Zone tables, adjacency weights, and design matrices.

pub mod design;
pub mod stats;
pub mod weights;
pub mod zones;

pub use design::{design_matrix, encode_landuse, CovariateSpec, DesignMatrix, DEFAULT_COVARIATES};
pub use stats::{descriptive_stats, landuse_proportions, write_stats, VariableStats};
pub use weights::{
    build_weight_matrix, read_adjacency, write_adjacency, AdjacencyRecord, Components, WeightMatrix,
};
pub use zones::{read_zone_table, write_zone_table, ZoneRecord, ZoneTable, LANDUSE_NAMES};
