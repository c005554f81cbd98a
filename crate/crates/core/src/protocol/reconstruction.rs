use alloc::vec::Vec;

use rand_core::RngCore;

use super::{NodeState, PhaseReport, ProtocolConfig, ProtocolError};
use crate::ctsim::{build_chain_schedule, run_dissemination, Phase, Topology};
use crate::field::FieldModulus;
use crate::node::{NodeId, ParticipantMask};
use crate::shamir::{reconstruct_aggregate, PublicPoint, SumShare};

/// Plaintext sub-slot encoding of a summed share: point and value as
/// 8-byte little-endian integers, then the participant bitmap over `n`
/// nodes (bit `i` of byte `i / 8` marks node `i + 1`). No sum encodes as
/// an empty packet.
pub fn encode_sum(sum: Option<&SumShare>, n: usize) -> Vec<u8> {
    let Some(sum) = sum else {
        return Vec::new();
    };
    let mut out = Vec::with_capacity(16 + n.div_ceil(8));
    out.extend_from_slice(&sum.point.x.value().to_le_bytes());
    out.extend_from_slice(&sum.value.value().to_le_bytes());
    let mut bitmap = alloc::vec![0u8; n.div_ceil(8)];
    for node in sum.mask.iter() {
        bitmap[node.index() / 8] |= 1 << (node.index() % 8);
    }
    out.extend_from_slice(&bitmap);
    out
}

/// Inverse of [`encode_sum`]; `None` for empty or malformed packets.
pub fn decode_sum(
    bytes: &[u8],
    owner: NodeId,
    n: usize,
    modulus: FieldModulus,
) -> Option<SumShare> {
    if bytes.len() != 16 + n.div_ceil(8) {
        return None;
    }
    let x = u64::from_le_bytes(bytes[..8].try_into().ok()?);
    let value = u64::from_le_bytes(bytes[8..16].try_into().ok()?);
    if x == 0 || x >= modulus.get() || value >= modulus.get() {
        return None;
    }
    let mask: ParticipantMask = (0..n)
        .filter(|i| bytes[16 + i / 8] & (1 << (i % 8)) != 0)
        .map(NodeId::from_index)
        .collect();
    if mask.is_empty() {
        return None;
    }
    Some(SumShare {
        point: PublicPoint {
            x: modulus.element(x),
            owner,
        },
        value: modulus.element(value),
        mask,
    })
}

/// Floods every node's partial sum (or an empty marker) in a chain of `n`
/// sub-slots for `ntx_recon` rounds; each node then interpolates from the
/// sums it heard.
pub fn reconstruction_phase<R: RngCore + ?Sized>(
    states: &mut [NodeState],
    topology: &Topology,
    config: &ProtocolConfig,
    rng: &mut R,
) -> Result<PhaseReport, ProtocolError> {
    let n = states.len();
    let schedule = build_chain_schedule(
        Phase::Reconstruction,
        config.variant,
        n,
        None,
        config.slot_duration_ms,
    )?;
    let payloads = states
        .iter()
        .map(|s| encode_sum(s.partial.as_ref(), n))
        .collect();
    let dissemination = run_dissemination(topology, &schedule, payloads, config.ntx_recon, rng)?;

    for state in states.iter_mut() {
        state.collected = dissemination
            .received(state.id)
            .filter_map(|(slot, bytes)| {
                decode_sum(bytes, schedule.slots()[slot].owner, n, config.modulus)
            })
            .collect();
        state.outcome = Some(reconstruct_aggregate(&state.collected, config.degree));
    }
    Ok(PhaseReport {
        dissemination,
        auth_failures: 0,
    })
}
