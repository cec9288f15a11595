//! Finite-dimensional computation of interpolation gauges, Schreier–Baernstein
//! norms, Davis diagonal spaces and spreading-model estimates.

// Parameter checks are written `!(x >= lo)` so that NaN is rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod davis;
pub mod error;
pub mod gauge;
pub mod harness;
pub mod norm;
pub mod schreier;
pub mod space;
pub mod spreading;
pub mod vector;

pub use error::{Error, ParseError, ParseErrorKind, Result};
pub use gauge::{
    flat_gauge, flat_gauge_oracle, gauge, gauge2_qpm, gauge_qpm, gauge_value, inner_projection, GaugeOptions,
    GaugeParams, GaugeResult, GaugeVariant,
};
pub use harness::{run_suite, CaseRecord, Provenance, Report, SUITES};
pub use vector::{lp_norm, rearrange_dec, restrict, threshold_split, FVec, Flat};
pub use norm::{FnNorm, Lp, Norm};
pub use schreier::{
    admissible_partitions, is_schreier, sb_norm, sb_norm_oracle, AdmissiblePartitions, SbMode, SbResult,
    SchreierPartition,
};
pub use davis::{davis_norm, j_map, tail_bound, DavisParams, DavisResult, DavisSpace, Schedule, Truncation};
pub use space::{
    build_chain, meta_of, norm_of, parse, Certificate, ChainBase, ChainDescriptor, ChainPolicy, EvalOptions, Evaluator,
    SpaceExpr, SpaceMeta,
};
pub use spreading::{
    cesaro_diagnostic, decompose, equiv_constants, profile_norm, singular_shift, sm_estimate, sm_exact_schreier,
    Decomposition, Profile, SequenceGenerator, SmEstimate,
};
