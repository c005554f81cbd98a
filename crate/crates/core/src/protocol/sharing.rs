use alloc::vec::Vec;

use rand_core::RngCore;

use super::{BootstrapInfo, NodeState, PhaseReport, ProtocolConfig, ProtocolError};
use crate::ctsim::{
    build_chain_schedule, run_dissemination, ChainSchedule, DisseminationResult, Payload, Phase,
    Topology,
};
use crate::shamir::{sum_shares, Share};
use crate::sscrypto::{open_share, SealedShare, SealingSession};

/// A sealed sharing chain ready to flood.
#[derive(Debug, Clone)]
pub struct SharingChain {
    pub schedule: ChainSchedule,
    /// Sealed share bytes per sub-slot. A node's sub-slot addressed to
    /// itself carries an empty packet; it keeps that share locally.
    pub payloads: Vec<Vec<u8>>,
}

/// Evaluates every node's polynomial at its destinations' points and
/// seals each share under the sender/destination pairwise key.
pub fn seal_sharing_chain(
    states: &[NodeState],
    bootstrap: &BootstrapInfo,
    config: &ProtocolConfig,
    round: u64,
) -> Result<SharingChain, ProtocolError> {
    let n = states.len();
    let schedule = build_chain_schedule(
        Phase::Sharing,
        config.variant,
        n,
        Some(&bootstrap.destinations),
        config.slot_duration_ms,
    )?;
    let mut session = SealingSession::new(round);
    let mut payloads = Vec::with_capacity(schedule.len());
    for (index, slot) in schedule.slots().iter().enumerate() {
        let Payload::ShareFor(dest) = slot.payload else {
            unreachable!("sharing chains only carry addressed shares");
        };
        if dest == slot.owner {
            payloads.push(Vec::new());
            continue;
        }
        let sender = &states[slot.owner.index()];
        let point = states[dest.index()].point;
        let share = Share {
            point,
            value: sender.polynomial.evaluate(point.x)?,
        };
        let key = bootstrap
            .keys
            .get(slot.owner, dest)
            .expect("distinct nodes have keys");
        let sealed = session.seal(key, slot.owner, dest, &share, index as u32)?;
        payloads.push(sealed.to_bytes());
    }
    Ok(SharingChain { schedule, payloads })
}

/// Each node opens the sub-slots addressed to it that it received, and
/// folds them, with its own share if it is a destination, into its
/// partial sum. Returns the number of packets that failed to open.
pub fn open_sharing_chain(
    states: &mut [NodeState],
    schedule: &ChainSchedule,
    received: &DisseminationResult,
    bootstrap: &BootstrapInfo,
    config: &ProtocolConfig,
) -> Result<u32, ProtocolError> {
    let mut failures = 0;
    for (state, dests) in states.iter_mut().zip(&bootstrap.destinations) {
        let me = state.id;
        let mut incoming = Vec::new();
        let mut node_failures = 0;
        if dests.contains(&me) {
            let own = state.polynomial.evaluate(state.point.x)?;
            incoming.push((
                me,
                Share {
                    point: state.point,
                    value: own,
                },
            ));
        }
        for (index, slot) in schedule.addressed_to(me) {
            if slot.owner == me || !received.holds(me, index) {
                continue;
            }
            let opened = SealedShare::from_bytes(received.payload(index)).and_then(|sealed| {
                if sealed.sender != slot.owner || sealed.destination != me {
                    return Err(crate::sscrypto::CryptoError::Authentication);
                }
                let key = bootstrap
                    .keys
                    .get(slot.owner, me)
                    .expect("distinct nodes have keys");
                open_share(key, &sealed, config.modulus)
            });
            match opened {
                Ok(share) if share.point.x == state.point.x => incoming.push((slot.owner, share)),
                _ => node_failures += 1,
            }
        }
        state.partial = if incoming.is_empty() {
            None
        } else {
            Some(sum_shares(&incoming)?)
        };
        state.incoming = incoming;
        state.auth_failures += node_failures;
        failures += node_failures;
    }
    Ok(failures)
}

/// Seals, floods `ntx_share` times, and opens the sharing chain.
pub fn sharing_phase<R: RngCore + ?Sized>(
    states: &mut [NodeState],
    topology: &Topology,
    bootstrap: &BootstrapInfo,
    config: &ProtocolConfig,
    round: u64,
    rng: &mut R,
) -> Result<PhaseReport, ProtocolError> {
    let chain = seal_sharing_chain(states, bootstrap, config, round)?;
    let dissemination = run_dissemination(
        topology,
        &chain.schedule,
        chain.payloads,
        config.ntx_share,
        rng,
    )?;
    let auth_failures =
        open_sharing_chain(states, &chain.schedule, &dissemination, bootstrap, config)?;
    Ok(PhaseReport {
        dissemination,
        auth_failures,
    })
}
