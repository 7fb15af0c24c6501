//! Constructive realizations of erasures.

pub mod chain;
pub mod dense;
pub mod schedule;
pub mod special;

pub use chain::{
    synthesize_complete_erasure, synthesize_landauer, ChainDescriptor, ChainMetrics,
    ChainRealization, SynthesisOptions,
};
pub use dense::{dense_oracle_check, to_dense, OracleReport};
pub use schedule::{LevelSchedule, NuFamily, SiteKind};
pub use special::{design_min_heat_erasure, swap_equality_case, swap_equality_hto};
