//! Numerical certification of completely positive maps.
//!
//! Choi, Kraus and Stinespring representations, complementary pairs, PPT
//! tests, a rank-gap distillability witness and a low-rank separability
//! decision, combined into certifiers showing that PPT complementary pairs
//! and degradable PPT maps are entanglement breaking.
//!
//! All bipartite indices follow `composite = left · d_right + right`; see
//! [`linalg`].

pub mod certify;
pub mod channels;
pub mod complement;
pub mod error;
pub mod generators;
pub mod harness;
pub mod linalg;
pub mod report;

pub use certify::{
    analyze_choi, analyze_state, candidate_degrading_map, complementary_equivalence_check, degradable_ppt_check,
    degrading_map_between, eb_certificate, low_rank_separability_decision, rank_gap_distillability_witness,
    DegradingMap,
};
pub use channels::{
    apply_channel, choi_from_map_action, is_cocp, is_cp, is_ppt_map, is_trace_preserving, kraus_from_choi,
    kraus_from_stinespring, stinespring_from_kraus, ChoiMatrix, KrausSet, Output, StinespringOperator,
};
pub use complement::{
    common_purification_vector, complementary_pair_from_stinespring, rank_chain, verify_complementarity,
    ComplementaryPair, Factor, RankChain, TripartiteVector,
};
pub use error::{Error, Result};
pub use generators::{
    named_channel, random_stinespring, schur_multiplier_pair, tiles_upb_choi, tiles_upb_stinespring, GeneratorKind,
    GeneratorSpec, NamedChannel,
};
pub use linalg::{
    hermitian_eigensystem, is_psd, numerical_rank, partial_trace, partial_transpose, purify, BipartiteLayout,
    ComplexMatrix, RankInfo, Side, ToleranceConfig, C64,
};
pub use report::{CertificateReport, Reason, Verdict, VerdictValue};
