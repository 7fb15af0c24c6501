//! Admissibility of heat transfer operators.

pub mod heat_matrix;
pub mod lep;
pub mod optimize;
pub mod resynth;
pub mod study;
pub mod verdict;

pub use heat_matrix::{extract_heat_matrix, widen_heat_matrix, HeatCertificate, HeatTransferMatrix};
pub use lep::{check_lep, max_entropy_drop, strong_subadditivity_corollary_check, LepReport};
pub use resynth::{resynthesize_extremal, ExtremalResynthesis};
pub use study::{et_family_study, EtRow, RowStatus};
pub use verdict::{
    decide_complete_erasure_hto, decide_extremal_hto, decide_via_certificate, lep_verdict, AdmissibilityVerdict,
    Certificate, Verdict,
};
