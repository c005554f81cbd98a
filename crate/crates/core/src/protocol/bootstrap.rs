use alloc::vec;
use alloc::vec::Vec;

use rand_core::RngCore;

use super::{ProtocolConfig, ProtocolError};
use crate::ctsim::{reachability_counts, ReachabilityCounts, Topology, Variant};
use crate::node::NodeId;
use crate::sscrypto::{derive_pairwise_key, PairwiseKey};

/// Pairwise keys for every unordered node pair.
#[derive(Debug, Clone)]
pub struct KeyRing {
    n: usize,
    // Row-major upper triangle, i < j.
    keys: Vec<PairwiseKey>,
}

impl KeyRing {
    pub fn derive(master: &crate::sscrypto::MasterSecret, n: usize) -> Self {
        let mut keys = Vec::with_capacity(n * n.saturating_sub(1) / 2);
        for i in 0..n {
            for j in i + 1..n {
                let key = derive_pairwise_key(master, NodeId::from_index(i), NodeId::from_index(j))
                    .expect("distinct nodes");
                keys.push(key);
            }
        }
        KeyRing { n, keys }
    }

    pub fn get(&self, a: NodeId, b: NodeId) -> Option<&PairwiseKey> {
        let (i, j) = (a.index().min(b.index()), a.index().max(b.index()));
        if i == j || j >= self.n {
            return None;
        }
        // Entries before row i: sum over r < i of (n - 1 - r).
        let row_start = i * (2 * self.n - i - 1) / 2;
        self.keys.get(row_start + (j - i - 1))
    }

    pub fn len(&self) -> usize {
        self.keys.len()
    }

    pub fn is_empty(&self) -> bool {
        self.keys.is_empty()
    }
}

#[derive(Debug, Clone)]
pub struct BootstrapInfo {
    pub keys: KeyRing,
    /// Nodes that receive shares, ascending. All nodes for S3; the
    /// `degree + 1` common aggregators for S4.
    pub aggregators: Vec<NodeId>,
    /// Per sharer (by index), the destinations it seals shares for.
    pub destinations: Vec<Vec<NodeId>>,
    /// Reachability estimates up to `ntx_share`; absent for S3.
    pub reachability: Option<ReachabilityCounts>,
}

impl BootstrapInfo {
    pub fn is_aggregator(&self, node: NodeId) -> bool {
        self.aggregators.binary_search(&node).is_ok()
    }
}

/// Derives keys and, for S4, picks the common aggregator set.
///
/// Candidates are nodes that every sharer reaches within `ntx_share` in at
/// least `reach_threshold` of the profiling trials. They are ranked by
/// their worst-case reception frequency, ties going to the lower id, and
/// the top `degree + 1` become aggregators for every sharer.
pub fn bootstrap<R: RngCore + ?Sized>(
    topology: &Topology,
    config: &ProtocolConfig,
    rng: &mut R,
) -> Result<BootstrapInfo, ProtocolError> {
    let n = topology.node_count();
    config.validate(n)?;
    let keys = KeyRing::derive(&config.master_secret, n);

    if config.variant == Variant::S3 {
        let everyone: Vec<NodeId> = topology.nodes().collect();
        return Ok(BootstrapInfo {
            keys,
            destinations: vec![everyone.clone(); n],
            aggregators: everyone,
            reachability: None,
        });
    }

    // Loss-free floods are deterministic; one trial says it all.
    let trials = if topology.is_lossless() {
        1
    } else {
        config.profile_trials.max(1)
    };
    let needed = config.degree + 1;
    let counts = reachability_counts(topology, config.ntx_share, trials, rng);
    let mut candidates: Vec<(f64, NodeId)> = topology
        .nodes()
        .map(|d| (counts.min_frequency(d, config.ntx_share), d))
        .filter(|&(freq, _)| freq >= config.reach_threshold)
        .collect();
    candidates.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));

    if candidates.len() < needed {
        let bound = (4 * n as u32)
            .max(config.ntx_share + 1)
            .min(u16::MAX as u32 - 1);
        let wide = reachability_counts(topology, bound, trials, rng);
        let minimal_ntx = (1..=bound).find(|&r| {
            topology
                .nodes()
                .filter(|&d| wide.min_frequency(d, r) >= config.reach_threshold)
                .count()
                >= needed
        });
        return Err(ProtocolError::InfeasibleDestinations {
            ntx_share: config.ntx_share,
            needed,
            feasible: candidates.len(),
            minimal_ntx,
        });
    }

    let mut aggregators: Vec<NodeId> = candidates[..needed].iter().map(|&(_, d)| d).collect();
    aggregators.sort();
    Ok(BootstrapInfo {
        keys,
        destinations: vec![aggregators.clone(); n],
        aggregators,
        reachability: Some(counts),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sscrypto::MasterSecret;
    use rand_chacha::rand_core::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn rng() -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(21)
    }

    fn ids(nodes: &[NodeId]) -> Vec<u32> {
        nodes.iter().map(|n| n.0).collect()
    }

    #[test]
    fn key_ring_lookup_matches_derivation() {
        let master = MasterSecret(*b"fedcba9876543210");
        let ring = KeyRing::derive(&master, 7);
        assert_eq!(ring.len(), 21);
        for i in 1..=7 {
            for j in 1..=7 {
                let got = ring.get(NodeId(i), NodeId(j));
                if i == j {
                    assert!(got.is_none());
                } else {
                    let want = derive_pairwise_key(&master, NodeId(i), NodeId(j)).unwrap();
                    assert_eq!(got, Some(&want));
                }
            }
        }
        assert!(ring.get(NodeId(1), NodeId(8)).is_none());
    }

    #[test]
    fn complete_graph_picks_lowest_ids() {
        let mut config = ProtocolConfig::new(Variant::S4, 12);
        config.ntx_share = 1;
        let boot = bootstrap(&Topology::complete(12), &config, &mut rng()).unwrap();
        assert_eq!(ids(&boot.aggregators), [1, 2, 3, 4, 5]);
        assert!(boot.destinations.iter().all(|d| d == &boot.aggregators));
        assert!(boot.is_aggregator(NodeId(5)) && !boot.is_aggregator(NodeId(6)));
    }

    #[test]
    fn s3_shares_with_everyone() {
        let config = ProtocolConfig::new(Variant::S3, 6);
        let boot = bootstrap(&Topology::line(6), &config, &mut rng()).unwrap();
        assert_eq!(boot.aggregators.len(), 6);
        assert!(boot.destinations.iter().all(|d| d.len() == 6));
        assert!(boot.reachability.is_none());
    }

    #[test]
    fn s4_prefers_central_nodes() {
        // Star centre hears everyone in one round; leaves need two.
        let mut config = ProtocolConfig::new(Variant::S4, 6);
        config.degree = 1;
        config.ntx_share = 1;
        let err = bootstrap(&Topology::star(6), &config, &mut rng()).unwrap_err();
        assert_eq!(
            err,
            ProtocolError::InfeasibleDestinations {
                ntx_share: 1,
                needed: 2,
                feasible: 1,
                minimal_ntx: Some(2)
            }
        );
        config.ntx_share = 2;
        let boot = bootstrap(&Topology::star(6), &config, &mut rng()).unwrap();
        assert_eq!(ids(&boot.aggregators), [1, 2]);
    }

    #[test]
    fn long_line_is_infeasible_at_low_ntx() {
        let mut config = ProtocolConfig::new(Variant::S4, 30);
        config.degree = 8;
        config.ntx_share = 5;
        let err = bootstrap(&Topology::line(30), &config, &mut rng()).unwrap_err();
        // Nine nodes with the smallest eccentricity: 11..=19 or 12..=20,
        // the worst of which is 19 hops from an end.
        assert_eq!(
            err,
            ProtocolError::InfeasibleDestinations {
                ntx_share: 5,
                needed: 9,
                feasible: 0,
                minimal_ntx: Some(19)
            }
        );
    }

    #[test]
    fn destinations_are_reachable_at_ntx_share() {
        let t = Topology::preset("flocklab26")
            .unwrap()
            .with_loss(0.1)
            .unwrap();
        let mut config = ProtocolConfig::new(Variant::S4, 26);
        config.profile_trials = 100;
        let boot = bootstrap(&t, &config, &mut rng()).unwrap();
        assert_eq!(boot.aggregators.len(), 9);
        let counts = boot.reachability.as_ref().unwrap();
        for &d in &boot.aggregators {
            assert_eq!(
                counts
                    .reachable(d, config.ntx_share, config.reach_threshold)
                    .len(),
                26
            );
        }
    }
}
