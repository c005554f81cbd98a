//! Round-based chain flooding.
//!
//! One round is the whole network relaying the chain once: every node
//! rebroadcasts, in its TDMA sub-slot, each payload it held when the round
//! began, and each neighbour lacking that payload picks it up with the
//! link's success probability. Payloads therefore advance at most one hop
//! per round, and `ntx` rounds reach exactly the nodes within `ntx` hops
//! on a loss-free graph.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use rand_core::RngCore;

use super::schedule::ChainSchedule;
use super::topology::Topology;
use crate::node::NodeId;

pub(crate) const NEVER: u16 = u16::MAX;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FloodError {
    ZeroNtx,
    NtxTooLarge(u32),
    PayloadCount { slots: usize, payloads: usize },
    OwnerOutOfRange(NodeId),
}

impl fmt::Display for FloodError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FloodError::ZeroNtx => f.write_str("ntx must be at least 1"),
            FloodError::NtxTooLarge(ntx) => write!(f, "ntx {ntx} exceeds the simulator bound"),
            FloodError::PayloadCount { slots, payloads } => {
                write!(
                    f,
                    "chain has {slots} sub-slots but {payloads} payloads were supplied"
                )
            }
            FloodError::OwnerOutOfRange(n) => write!(f, "sub-slot owner {n} not in topology"),
        }
    }
}

impl core::error::Error for FloodError {}

/// `true` with probability `p`. Draws nothing for `p >= 1`.
pub(crate) fn bernoulli<R: RngCore + ?Sized>(rng: &mut R, p: f64) -> bool {
    if p >= 1.0 {
        return true;
    }
    let u = (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64);
    u < p
}

/// First-arrival round for every (node, sub-slot); 0 at the owner.
///
/// Returned row-major by node. Unreached entries hold [`NEVER`]. The RNG is
/// consumed round by round, so a shorter run is a prefix of a longer one.
pub(crate) fn flood_arrivals<R: RngCore + ?Sized>(
    topology: &Topology,
    owners: &[usize],
    ntx: u32,
    rng: &mut R,
) -> Vec<u16> {
    let n = topology.node_count();
    let len = owners.len();
    let mut arrival = vec![NEVER; n * len];
    for (slot, &owner) in owners.iter().enumerate() {
        arrival[owner * len + slot] = 0;
    }
    for round in 1..=ntx as u16 {
        let mut changed = false;
        for v in 0..n {
            for slot in 0..len {
                // Held before this round started.
                if arrival[v * len + slot] >= round {
                    continue;
                }
                for &(u, p) in topology.adjacency(v) {
                    let cell = &mut arrival[u * len + slot];
                    if *cell == NEVER && bernoulli(rng, p) {
                        *cell = round;
                        changed = true;
                    }
                }
            }
        }
        if !changed && !arrival.contains(&NEVER) {
            break;
        }
    }
    arrival
}

/// What every node holds after a chain was flooded `ntx` times.
#[derive(Debug, Clone, PartialEq)]
pub struct DisseminationResult {
    n: usize,
    arrival: Vec<u16>,
    payloads: Vec<Vec<u8>>,
    ntx: u32,
    pub latency_ms: f64,
    pub radio_on_ms: Vec<f64>,
}

impl DisseminationResult {
    pub fn slot_count(&self) -> usize {
        self.payloads.len()
    }

    pub fn rounds_executed(&self) -> u32 {
        self.ntx
    }

    /// Round in which `node` first held `slot`; `Some(0)` for its own.
    pub fn arrival_round(&self, node: NodeId, slot: usize) -> Option<u32> {
        match self.arrival[node.index() * self.payloads.len() + slot] {
            NEVER => None,
            r => Some(r as u32),
        }
    }

    pub fn holds(&self, node: NodeId, slot: usize) -> bool {
        self.arrival_round(node, slot).is_some()
    }

    /// Payload as transmitted in `slot`, whoever holds it.
    pub fn payload(&self, slot: usize) -> &[u8] {
        &self.payloads[slot]
    }

    /// Mutable access for fault-injection in tests and experiments.
    pub fn payload_mut(&mut self, slot: usize) -> &mut Vec<u8> {
        &mut self.payloads[slot]
    }

    /// `(slot, payload)` pairs held by `node`, in chain order.
    pub fn received(&self, node: NodeId) -> impl Iterator<Item = (usize, &[u8])> + '_ {
        (0..self.payloads.len())
            .filter(move |&s| self.holds(node, s))
            .map(move |s| (s, self.payloads[s].as_slice()))
    }

    pub fn received_count(&self, node: NodeId) -> usize {
        (0..self.payloads.len())
            .filter(|&s| self.holds(node, s))
            .count()
    }

    pub fn node_count(&self) -> usize {
        self.n
    }
}

/// Floods `schedule` over `topology` for `ntx` rounds.
///
/// `payloads[i]` is originated by the owner of sub-slot `i`. Latency and
/// every node's radio-on time equal `ntx` full passes over the chain.
pub fn run_dissemination<R: RngCore + ?Sized>(
    topology: &Topology,
    schedule: &ChainSchedule,
    payloads: Vec<Vec<u8>>,
    ntx: u32,
    rng: &mut R,
) -> Result<DisseminationResult, FloodError> {
    if ntx == 0 {
        return Err(FloodError::ZeroNtx);
    }
    if ntx >= NEVER as u32 {
        return Err(FloodError::NtxTooLarge(ntx));
    }
    if payloads.len() != schedule.len() {
        return Err(FloodError::PayloadCount {
            slots: schedule.len(),
            payloads: payloads.len(),
        });
    }
    let n = topology.node_count();
    let owners = schedule
        .slots()
        .iter()
        .map(|s| {
            if s.owner.0 == 0 || s.owner.index() >= n {
                Err(FloodError::OwnerOutOfRange(s.owner))
            } else {
                Ok(s.owner.index())
            }
        })
        .collect::<Result<Vec<_>, _>>()?;
    let arrival = flood_arrivals(topology, &owners, ntx, rng);
    let phase_ms = ntx as f64 * schedule.pass_ms();
    Ok(DisseminationResult {
        n,
        arrival,
        payloads,
        ntx,
        latency_ms: phase_ms,
        radio_on_ms: vec![phase_ms; n],
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ctsim::schedule::Phase;
    use rand_chacha::rand_core::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn probe_chain(n: usize) -> (ChainSchedule, Vec<Vec<u8>>) {
        let s = ChainSchedule::one_per_node(Phase::Reconstruction, n, 4.0);
        let payloads = (0..n).map(|i| vec![i as u8]).collect();
        (s, payloads)
    }

    #[test]
    fn line_advances_one_hop_per_round() {
        let t = Topology::line(3);
        let (s, p) = probe_chain(3);
        let r = run_dissemination(&t, &s, p, 1, &mut ChaCha8Rng::seed_from_u64(0)).unwrap();
        let (a, b, c) = (NodeId(1), NodeId(2), NodeId(3));
        assert!(r.holds(b, 0) && r.holds(b, 2));
        assert!(r.holds(a, 1) && !r.holds(a, 2));
        assert!(!r.holds(c, 0));
        assert_eq!(
            r.received(b).map(|(_, p)| p[0]).collect::<Vec<_>>(),
            [0, 1, 2]
        );
        assert_eq!(r.latency_ms, 12.0);
    }

    #[test]
    fn enough_rounds_reach_everyone() {
        let t = Topology::preset("flocklab26").unwrap();
        let (s, p) = probe_chain(26);
        let r =
            run_dissemination(&t, &s, p, t.diameter(), &mut ChaCha8Rng::seed_from_u64(3)).unwrap();
        for v in t.nodes() {
            assert_eq!(r.received_count(v), 26);
        }
    }

    #[test]
    fn single_node_network() {
        let t = Topology::line(1);
        let (s, p) = probe_chain(1);
        let r = run_dissemination(&t, &s, p, 3, &mut ChaCha8Rng::seed_from_u64(0)).unwrap();
        assert_eq!(r.latency_ms, 3.0 * 1.0 * 4.0);
        assert_eq!(r.radio_on_ms, [12.0]);
        assert_eq!(r.received_count(NodeId(1)), 1);
        assert_eq!(r.rounds_executed(), 3);
    }

    #[test]
    fn rejects_bad_inputs() {
        let t = Topology::line(2);
        let (s, p) = probe_chain(2);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert_eq!(
            run_dissemination(&t, &s, p.clone(), 0, &mut rng),
            Err(FloodError::ZeroNtx)
        );
        assert_eq!(
            run_dissemination(&t, &s, p[..1].to_vec(), 1, &mut rng),
            Err(FloodError::PayloadCount {
                slots: 2,
                payloads: 1
            })
        );
        let (big, bp) = probe_chain(3);
        assert_eq!(
            run_dissemination(&t, &big, bp, 1, &mut rng),
            Err(FloodError::OwnerOutOfRange(NodeId(3)))
        );
    }

    #[test]
    fn bernoulli_certain_draws_nothing() {
        let mut a = ChaCha8Rng::seed_from_u64(1);
        assert!(bernoulli(&mut a, 1.0));
        assert_eq!(a.next_u64(), ChaCha8Rng::seed_from_u64(1).next_u64());
    }
}
