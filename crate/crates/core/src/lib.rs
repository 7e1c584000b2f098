//! Exact truncated power-series kernel and CR jet pullback pipeline.
//!
//! The crate computes order-k germs of real manifolds obtained by pulling a
//! real algebraic model back through a holomorphic map jet, counts jet-space
//! dimensions on both sides of that construction, and runs randomized
//! experiments (truncation stability, finite-difference Jacobian rank)
//! against it. Everything correctness-critical runs over exact Gaussian
//! rationals; floats appear only where singular values are involved.

pub mod coeff;
pub mod dimension;
pub mod document;
pub mod error;
pub mod experiments;
pub mod expr;
pub mod jets;
pub mod realify;
pub mod series;
pub mod space;

pub use coeff::{CoeffMode, Coefficient};
pub use dimension::{
    crossover_order, dim_source_maps, dim_source_models, dim_target, dimension_report,
    DimensionReport,
};
pub use document::JetDocument;
pub use error::{DocumentError, ExperimentError, ExprError, JetError, SeriesError};
pub use expr::{parse_expression, series_from_expression, ExpressionAst};
pub use experiments::{
    jacobian_rank, key_observation_check, rank_trials, sample_map, sample_model,
    ExperimentConfig, RankReport, StabilityReport,
};
pub use jets::{
    flat_model, graph_iteration, heisenberg_model, identity_map, is_jet_preimage, jet_pullback,
    normalize_linear_part, pullback_defining_series, AlgebraicModel, CrSignature, GraphGerm,
    MapJet, PullbackResult,
};
pub use series::{weighted_norm, BindingSet, MultiIndex, SeriesVector, TruncatedSeries, MAX_ORDER};
pub use space::{VarKind, VariableSpace};
