use alloc::vec::Vec;
use core::fmt;

use crate::node::NodeId;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Phase {
    Sharing,
    Reconstruction,
}

/// Naive (`S3`, every node shares with every node) or trimmed (`S4`, every
/// node shares with a small designated destination set).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Variant {
    S3,
    S4,
}

impl Variant {
    pub fn name(self) -> &'static str {
        match self {
            Variant::S3 => "s3",
            Variant::S4 => "s4",
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// What a sub-slot carries.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Payload {
    /// The owner's share for `destination`.
    ShareFor(NodeId),
    /// The owner's own contribution (a summed share, or a profiling probe).
    Own,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SubSlot {
    pub owner: NodeId,
    pub payload: Payload,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ScheduleError {
    MissingDestinations,
    /// Destination map length differs from the node count.
    DestinationMapSize {
        expected: usize,
        found: usize,
    },
    UnknownDestination(NodeId),
}

impl fmt::Display for ScheduleError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ScheduleError::MissingDestinations => {
                f.write_str("trimmed sharing chain needs a destination map")
            }
            ScheduleError::DestinationMapSize { expected, found } => {
                write!(
                    f,
                    "destination map covers {found} nodes, expected {expected}"
                )
            }
            ScheduleError::UnknownDestination(n) => write!(f, "destination {n} is not a node"),
        }
    }
}

impl core::error::Error for ScheduleError {}

/// TDMA order of packets in one chain.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainSchedule {
    phase: Phase,
    slots: Vec<SubSlot>,
    slot_duration_ms: f64,
}

impl ChainSchedule {
    /// One sub-slot per node, in id order.
    pub fn one_per_node(phase: Phase, n: usize, slot_duration_ms: f64) -> Self {
        ChainSchedule {
            phase,
            slots: (0..n)
                .map(|i| SubSlot {
                    owner: NodeId::from_index(i),
                    payload: Payload::Own,
                })
                .collect(),
            slot_duration_ms,
        }
    }

    pub fn phase(&self) -> Phase {
        self.phase
    }

    pub fn slots(&self) -> &[SubSlot] {
        &self.slots
    }

    pub fn len(&self) -> usize {
        self.slots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.slots.is_empty()
    }

    pub fn slot_duration_ms(&self) -> f64 {
        self.slot_duration_ms
    }

    /// Airtime of one full pass over the chain.
    pub fn pass_ms(&self) -> f64 {
        self.slots.len() as f64 * self.slot_duration_ms
    }

    /// Indices of the sub-slots addressed to `node`.
    pub fn addressed_to(&self, node: NodeId) -> impl Iterator<Item = (usize, &SubSlot)> + '_ {
        self.slots
            .iter()
            .enumerate()
            .filter(move |(_, s)| s.payload == Payload::ShareFor(node))
    }
}

/// Lays out a chain for one protocol phase.
///
/// Sharing chains hold one sub-slot per (owner, destination) pair ordered by
/// owner then destination: all `n` nodes for S3, the owner's entry in
/// `destinations` for S4. Reconstruction chains hold one sub-slot per node
/// regardless of variant.
pub fn build_chain_schedule(
    phase: Phase,
    variant: Variant,
    n: usize,
    destinations: Option<&[Vec<NodeId>]>,
    slot_duration_ms: f64,
) -> Result<ChainSchedule, ScheduleError> {
    if phase == Phase::Reconstruction {
        return Ok(ChainSchedule::one_per_node(phase, n, slot_duration_ms));
    }
    let mut slots = Vec::new();
    match variant {
        Variant::S3 => {
            for owner in 0..n {
                for dest in 0..n {
                    slots.push(SubSlot {
                        owner: NodeId::from_index(owner),
                        payload: Payload::ShareFor(NodeId::from_index(dest)),
                    });
                }
            }
        }
        Variant::S4 => {
            let map = destinations.ok_or(ScheduleError::MissingDestinations)?;
            if map.len() != n {
                return Err(ScheduleError::DestinationMapSize {
                    expected: n,
                    found: map.len(),
                });
            }
            for (owner, dests) in map.iter().enumerate() {
                let mut dests = dests.clone();
                dests.sort();
                dests.dedup();
                for dest in dests {
                    if dest.0 == 0 || dest.index() >= n {
                        return Err(ScheduleError::UnknownDestination(dest));
                    }
                    slots.push(SubSlot {
                        owner: NodeId::from_index(owner),
                        payload: Payload::ShareFor(dest),
                    });
                }
            }
        }
    }
    Ok(ChainSchedule {
        phase,
        slots,
        slot_duration_ms,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn aggregators(n: usize, m: u32) -> Vec<Vec<NodeId>> {
        vec![(1..=m).map(NodeId).collect(); n]
    }

    #[test]
    fn chain_lengths() {
        let s3 = build_chain_schedule(Phase::Sharing, Variant::S3, 26, None, 4.0).unwrap();
        assert_eq!(s3.len(), 676);
        for variant in [Variant::S3, Variant::S4] {
            let r = build_chain_schedule(Phase::Reconstruction, variant, 26, None, 4.0).unwrap();
            assert_eq!(r.len(), 26);
        }
        let map = aggregators(26, 9);
        let s4 = build_chain_schedule(Phase::Sharing, Variant::S4, 26, Some(&map), 4.0).unwrap();
        assert_eq!(s4.len(), 234);
        assert_eq!(s3.len() * 9, s4.len() * 26);
        assert_eq!(s4.pass_ms(), 936.0);
    }

    #[test]
    fn ordering_is_owner_then_destination() {
        let map = vec![
            vec![NodeId(3), NodeId(1)],
            vec![NodeId(2), NodeId(1)],
            vec![NodeId(1), NodeId(3)],
        ];
        let s = build_chain_schedule(Phase::Sharing, Variant::S4, 3, Some(&map), 1.0).unwrap();
        let order: Vec<_> = s
            .slots()
            .iter()
            .map(|slot| match slot.payload {
                Payload::ShareFor(d) => (slot.owner.0, d.0),
                Payload::Own => unreachable!(),
            })
            .collect();
        assert_eq!(order, [(1, 1), (1, 3), (2, 1), (2, 2), (3, 1), (3, 3)]);
        assert_eq!(
            s.addressed_to(NodeId(3))
                .map(|(i, _)| i)
                .collect::<Vec<_>>(),
            [1, 5]
        );
    }

    #[test]
    fn trimmed_chain_needs_valid_map() {
        assert_eq!(
            build_chain_schedule(Phase::Sharing, Variant::S4, 4, None, 1.0),
            Err(ScheduleError::MissingDestinations)
        );
        assert_eq!(
            build_chain_schedule(
                Phase::Sharing,
                Variant::S4,
                4,
                Some(&aggregators(3, 2)),
                1.0
            ),
            Err(ScheduleError::DestinationMapSize {
                expected: 4,
                found: 3
            })
        );
        assert_eq!(
            build_chain_schedule(
                Phase::Sharing,
                Variant::S4,
                2,
                Some(&aggregators(2, 3)),
                1.0
            ),
            Err(ScheduleError::UnknownDestination(NodeId(3)))
        );
    }
}
