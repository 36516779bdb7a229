//! Multi-objective design-space exploration of the mode-decision process of a
//! simplified quadtree block encoder.
//!
//! A [`Genotype`] fixes, per quadtree depth, the order in which the eleven mode
//! evaluators run and a guard per position that lets a mode run only when the
//! best mode found so far matches. The [`dse`] module searches genotypes with
//! NSGA-II against four objectives that include encoding effort and an
//! estimated decoding energy; [`metrics`] compares the resulting encoder
//! configurations with Bjøntegaard deltas.
//!
//! Numeric code that does not touch pixels is generic over the scalar type
//! (see [`Scalar`]); the aliases below pin the `f64` instantiation used by the
//! encoder and the campaign tooling.

pub mod codec;
pub mod dse;
pub mod media;
pub mod metrics;
pub mod objectives;
pub mod pipeline;
pub mod scalar;

pub use codec::{CodecConfig, CodecError, ModeId, ModeResult, RdCost};
pub use media::{Frame, MediaError, Sequence, SyntheticKind};
pub use pipeline::{encode_sequence, EncodeReport, Genotype, Guard, Pipeline};
pub use scalar::Scalar;

/// Objective vector in `f64`.
pub type ObjectiveVector = objectives::ObjectiveVector<f64>;
/// Energy table in `f64` (nanojoules by convention).
pub type EnergyTable = objectives::EnergyTable<f64>;
/// Exact energy table over 128-bit rationals.
pub type ExactEnergyTable = objectives::EnergyTable<num_rational::Ratio<i128>>;
/// Rate/quality operating point in `f64`.
pub type RdPoint = metrics::RdPoint<f64>;
/// Four-QP operating curve in `f64`.
pub type RdCurve = metrics::RdCurve<f64>;
/// Pareto archive keyed by `f64` objectives.
pub type ParetoArchive = dse::ParetoArchive<f64>;
