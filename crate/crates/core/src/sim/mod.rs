//! Simulation bench: frailty data generation, replicate comparisons of the
//! local-mixture fit against gamma-frailty EM, and the event-count binning
//! diagnostic for overdispersion.

mod bench;
mod binning;
mod generate;

pub use bench::{run_comparison, ComparisonReport, ComparisonRow, Estimate, Method, ReplicateOutcome};
pub use binning::{binning_diagnostic, count_statistics, BinningRow, CountStatistics};
pub use generate::{event_time, generate_dataset, FrailtySpec, SimConfig};
