//! Deterministic simulator of concurrent-transmission chain flooding.

mod flood;
mod profile;
mod schedule;
mod topology;

pub use flood::{run_dissemination, DisseminationResult, FloodError};
pub use profile::{
    min_ntx_full_coverage, reachability_counts, reachability_profile, NoFullCoverage,
    ReachabilityCounts, DEFAULT_REACH_THRESHOLD,
};
pub use schedule::{
    build_chain_schedule, ChainSchedule, Payload, Phase, ScheduleError, SubSlot, Variant,
};
pub use topology::{Edge, Topology, TopologyError};
