//! Per-node execution of one aggregation round: bootstrap, sharing,
//! local summation, reconstruction.

mod bootstrap;
mod reconstruction;
mod sharing;

use alloc::vec::Vec;
use core::fmt;

use rand_core::RngCore;

pub use bootstrap::{bootstrap, BootstrapInfo, KeyRing};
pub use reconstruction::{decode_sum, encode_sum, reconstruction_phase};
pub use sharing::{open_sharing_chain, seal_sharing_chain, sharing_phase, SharingChain};

use crate::ctsim::{DisseminationResult, FloodError, ScheduleError, Topology, Variant};
use crate::field::{FieldElement, FieldModulus};
use crate::node::{NodeId, ParticipantMask};
use crate::shamir::{PublicPoint, SecretPolynomial, ShamirError, Share, SumShare};
use crate::sscrypto::{CryptoError, MasterSecret};

#[derive(Debug, Clone, PartialEq)]
pub enum ProtocolError {
    /// A degree of at least one needs two or more nodes.
    TooFewNodes(usize),
    DegreeOutOfRange {
        degree: usize,
        n: usize,
    },
    /// Every node needs a distinct nonzero point, so `q` must exceed `n`.
    ModulusTooSmall {
        modulus: u64,
        n: usize,
    },
    ZeroNtx,
    SecretCount {
        expected: usize,
        found: usize,
    },
    /// Fewer than `degree + 1` nodes hear every sharer at `ntx_share`.
    InfeasibleDestinations {
        ntx_share: u32,
        needed: usize,
        feasible: usize,
        minimal_ntx: Option<u32>,
    },
    Schedule(ScheduleError),
    Flood(FloodError),
    Crypto(CryptoError),
    Shamir(ShamirError),
}

impl fmt::Display for ProtocolError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ProtocolError::TooFewNodes(n) => {
                write!(
                    f,
                    "{n} node(s): a degree >= 1 polynomial needs at least 2 nodes"
                )
            }
            ProtocolError::DegreeOutOfRange { degree, n } => {
                write!(f, "degree {degree} outside 1..={} for {n} nodes", n - 1)
            }
            ProtocolError::ModulusTooSmall { modulus, n } => {
                write!(f, "modulus {modulus} must exceed the node count {n}")
            }
            ProtocolError::ZeroNtx => f.write_str("ntx must be at least 1"),
            ProtocolError::SecretCount { expected, found } => {
                write!(f, "expected {expected} secrets, got {found}")
            }
            ProtocolError::InfeasibleDestinations {
                ntx_share,
                needed,
                feasible,
                minimal_ntx,
            } => {
                write!(
                    f,
                    "only {feasible} node(s) hear every sharer at ntx {ntx_share}, {needed} needed"
                )?;
                match minimal_ntx {
                    Some(ntx) => write!(f, "; minimal feasible ntx is {ntx}"),
                    None => f.write_str("; no feasible ntx found within the search bound"),
                }
            }
            ProtocolError::Schedule(e) => write!(f, "{e}"),
            ProtocolError::Flood(e) => write!(f, "{e}"),
            ProtocolError::Crypto(e) => write!(f, "{e}"),
            ProtocolError::Shamir(e) => write!(f, "{e}"),
        }
    }
}

impl core::error::Error for ProtocolError {}

impl From<ScheduleError> for ProtocolError {
    fn from(e: ScheduleError) -> Self {
        ProtocolError::Schedule(e)
    }
}

impl From<FloodError> for ProtocolError {
    fn from(e: FloodError) -> Self {
        ProtocolError::Flood(e)
    }
}

impl From<CryptoError> for ProtocolError {
    fn from(e: CryptoError) -> Self {
        ProtocolError::Crypto(e)
    }
}

impl From<ShamirError> for ProtocolError {
    fn from(e: ShamirError) -> Self {
        ProtocolError::Shamir(e)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProtocolConfig {
    pub variant: Variant,
    /// Polynomial degree `k`; any `k` colluders learn nothing.
    pub degree: usize,
    pub ntx_share: u32,
    pub ntx_recon: u32,
    pub modulus: FieldModulus,
    pub master_secret: MasterSecret,
    pub slot_duration_ms: f64,
    /// Monte-Carlo trials per bootstrap reachability profile on lossy links.
    pub profile_trials: u32,
    pub reach_threshold: f64,
}

impl ProtocolConfig {
    /// Defaults for an `n`-node network: degree `floor(n / 3)`, ntx 6 for
    /// both phases, 4 ms sub-slots.
    pub fn new(variant: Variant, n: usize) -> Self {
        ProtocolConfig {
            variant,
            degree: Self::default_degree(n),
            ntx_share: 6,
            ntx_recon: 6,
            modulus: FieldModulus::default(),
            master_secret: MasterSecret([0; 16]),
            slot_duration_ms: 4.0,
            profile_trials: 200,
            reach_threshold: crate::ctsim::DEFAULT_REACH_THRESHOLD,
        }
    }

    pub fn default_degree(n: usize) -> usize {
        (n / 3).max(1)
    }

    /// Destinations each node shares with: `n` for S3, `degree + 1` for S4.
    pub fn destinations_per_node(&self, n: usize) -> usize {
        match self.variant {
            Variant::S3 => n,
            Variant::S4 => self.degree + 1,
        }
    }

    pub fn validate(&self, n: usize) -> Result<(), ProtocolError> {
        if n < 2 {
            return Err(ProtocolError::TooFewNodes(n));
        }
        if self.degree == 0 || self.degree >= n {
            return Err(ProtocolError::DegreeOutOfRange {
                degree: self.degree,
                n,
            });
        }
        if self.modulus.get() <= n as u64 {
            return Err(ProtocolError::ModulusTooSmall {
                modulus: self.modulus.get(),
                n,
            });
        }
        if self.ntx_share == 0 || self.ntx_recon == 0 {
            return Err(ProtocolError::ZeroNtx);
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NodeState {
    pub id: NodeId,
    pub point: PublicPoint,
    pub secret: FieldElement,
    pub polynomial: SecretPolynomial,
    /// Shares addressed to this node that it could open, by sender.
    pub incoming: Vec<(NodeId, Share)>,
    pub partial: Option<SumShare>,
    pub collected: Vec<SumShare>,
    /// Set by the reconstruction phase.
    pub outcome: Option<Result<(FieldElement, ParticipantMask), ShamirError>>,
    pub auth_failures: u32,
}

impl NodeState {
    pub fn aggregate(&self) -> Option<(FieldElement, &ParticipantMask)> {
        match &self.outcome {
            Some(Ok((value, mask))) => Some((*value, mask)),
            _ => None,
        }
    }
}

/// Draws every node's polynomial, in node order.
pub fn init_states<R: RngCore + ?Sized>(
    secrets: &[FieldElement],
    config: &ProtocolConfig,
    rng: &mut R,
) -> Result<Vec<NodeState>, ProtocolError> {
    config.validate(secrets.len())?;
    secrets
        .iter()
        .enumerate()
        .map(|(i, &secret)| {
            let id = NodeId::from_index(i);
            Ok(NodeState {
                id,
                point: PublicPoint::for_node(id, config.modulus)?,
                secret,
                polynomial: SecretPolynomial::random(secret, config.degree, rng)?,
                incoming: Vec::new(),
                partial: None,
                collected: Vec::new(),
                outcome: None,
                auth_failures: 0,
            })
        })
        .collect()
}

/// Outcome of flooding one phase's chain.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseReport {
    pub dissemination: DisseminationResult,
    /// Packets addressed to a node that failed to open.
    pub auth_failures: u32,
}

impl PhaseReport {
    pub fn latency_ms(&self) -> f64 {
        self.dissemination.latency_ms
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MetricsRecord {
    pub sharing_latency_ms: f64,
    pub reconstruction_latency_ms: f64,
    pub latency_ms: f64,
    pub radio_on_ms: Vec<f64>,
    /// Fraction of nodes holding the full-network aggregate.
    pub reliability: f64,
    /// Every node that reported an aggregate reported the full-network sum.
    pub correct: bool,
    pub auth_failures: u32,
}

impl MetricsRecord {
    pub fn mean_radio_on_ms(&self) -> f64 {
        self.radio_on_ms.iter().sum::<f64>() / self.radio_on_ms.len() as f64
    }

    pub fn max_radio_on_ms(&self) -> f64 {
        self.radio_on_ms.iter().copied().fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone)]
pub struct RoundOutcome {
    pub states: Vec<NodeState>,
    pub expected: FieldElement,
    pub metrics: MetricsRecord,
    pub sharing: PhaseReport,
    pub reconstruction: PhaseReport,
}

/// Scores finished node states against the plain sum of their secrets.
pub fn score_round(states: &[NodeState]) -> (FieldElement, f64, bool) {
    let modulus = states[0].secret.modulus();
    let expected = states.iter().fold(modulus.zero(), |acc, s| acc + s.secret);
    let everyone = ParticipantMask::full(states.len());
    let mut good = 0usize;
    let mut correct = true;
    for state in states {
        if let Some((value, mask)) = state.aggregate() {
            if value == expected && *mask == everyone {
                good += 1;
            } else {
                correct = false;
            }
        }
    }
    (expected, good as f64 / states.len() as f64, correct)
}

/// One full aggregation round over a bootstrapped network.
///
/// `round` feeds the sharing-phase nonces and must not repeat under the
/// same master secret.
pub fn run_round<R: RngCore + ?Sized>(
    topology: &Topology,
    bootstrap: &BootstrapInfo,
    secrets: &[FieldElement],
    config: &ProtocolConfig,
    round: u64,
    rng: &mut R,
) -> Result<RoundOutcome, ProtocolError> {
    let n = topology.node_count();
    config.validate(n)?;
    if secrets.len() != n {
        return Err(ProtocolError::SecretCount {
            expected: n,
            found: secrets.len(),
        });
    }
    let mut states = init_states(secrets, config, rng)?;
    let sharing = sharing_phase(&mut states, topology, bootstrap, config, round, rng)?;
    let reconstruction = reconstruction_phase(&mut states, topology, config, rng)?;

    let (expected, reliability, correct) = score_round(&states);
    let radio_on_ms = sharing
        .dissemination
        .radio_on_ms
        .iter()
        .zip(&reconstruction.dissemination.radio_on_ms)
        .map(|(a, b)| a + b)
        .collect();
    let metrics = MetricsRecord {
        sharing_latency_ms: sharing.latency_ms(),
        reconstruction_latency_ms: reconstruction.latency_ms(),
        latency_ms: sharing.latency_ms() + reconstruction.latency_ms(),
        radio_on_ms,
        reliability,
        correct,
        auth_failures: sharing.auth_failures,
    };
    Ok(RoundOutcome {
        states,
        expected,
        metrics,
        sharing,
        reconstruction,
    })
}
