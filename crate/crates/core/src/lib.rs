//! Heat transfer operators of quantum channels.
//!
//! The crate computes the heat an isometric realization of a channel dumps into
//! a thermal bath, builds erasure realizations from explicit bath chains, and
//! decides which operators can arise as heat transfer operators at all.

// Guards written as `!(x > 0.0)` are meant to reject NaN too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod channel;
pub mod error;
pub mod io;
pub mod linalg;
pub mod operator;
pub mod random;
pub mod realization;
pub mod synthesis;

pub use channel::{channel_distance, convex_combine, ChoiMatrix, ExtremalityReport, KrausChannel};
pub use error::{HtoError, Result};
pub use operator::{DensityMatrix, HermitianOperator, Isometry, SpectralDecomposition, Units};
pub use realization::{compute_hto, induced_channel, DenseRealization, HeatReport};
