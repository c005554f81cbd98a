//! Private sum aggregation with Shamir secret sharing over simulated
//! concurrent-transmission floods.
//!
//! Every node splits its reading into polynomial shares, ships them sealed
//! to their destinations in one flooded chain, and the destinations
//! re-flood point-wise sums from which every node interpolates the total.
//! The naive variant shares with all nodes; the trimmed variant uses a low
//! degree and a small common set of aggregators reachable at low `ntx`.
//!
//! The crate is `no_std` and only needs `alloc`.

#![no_std]

extern crate alloc;

pub mod ctsim;
pub mod field;
pub mod node;
pub mod protocol;
pub mod shamir;
pub mod sscrypto;

pub use ctsim::{Phase, Topology, Variant};
pub use field::{FieldElement, FieldModulus};
pub use node::{NodeId, ParticipantMask};
