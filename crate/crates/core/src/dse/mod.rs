//! NSGA-II search over genotypes, with the archive that collects its
//! nondominated results.

mod archive;
mod combine;
mod nsga2;
mod operators;
pub mod pareto;

pub use archive::{ArchiveEntry, ParetoArchive, ARCHIVE_CSV_HEADER};
pub use combine::{combine_across_qps, Anchor, CombinedSolution, Picker, CAMPAIGN_QPS};
pub use nsga2::{
    evaluate_genotype, rank_population, run_dse, run_dse_observed, DseConfig, DseRun,
    GenerationReport, Individual,
};
pub use operators::{crossover, mutate, order_crossover};
pub use pareto::{crowding_distance, dominates, hypervolume, nondominated_sort};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum DseError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("order vectors of depths {left} and {right} cannot be crossed")]
    DepthMismatch { left: u8, right: u8 },
    #[error("no training sequences")]
    NoSequences,
    #[error("evaluating genotype `{genotype}` failed: {reason}")]
    Evaluation { genotype: String, reason: String },
    #[error("archive for qp {0} is empty")]
    EmptyArchive(u8),
    #[error("no archive for qp {0}")]
    MissingQp(u8),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
