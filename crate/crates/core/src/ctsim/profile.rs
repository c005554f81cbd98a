//! Monte-Carlo estimates of who hears whom within a given number of chain
//! repetitions.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use rand_core::RngCore;

use super::flood::{flood_arrivals, NEVER};
use super::topology::Topology;
use crate::node::{NodeId, ParticipantMask};

/// Default fraction of trials a source must reach a node in to count as
/// reachable.
pub const DEFAULT_REACH_THRESHOLD: f64 = 0.99;

/// Per (node, source, ntx) count of trials in which the source's payload
/// had arrived at the node by the end of round `ntx`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReachabilityCounts {
    n: usize,
    max_ntx: u32,
    trials: u32,
    // [node][source][ntx - 1]
    counts: Vec<u32>,
}

impl ReachabilityCounts {
    pub fn max_ntx(&self) -> u32 {
        self.max_ntx
    }

    pub fn trials(&self) -> u32 {
        self.trials
    }

    fn cell(&self, node: NodeId, source: NodeId, ntx: u32) -> usize {
        debug_assert!(ntx >= 1 && ntx <= self.max_ntx);
        (node.index() * self.n + source.index()) * self.max_ntx as usize + ntx as usize - 1
    }

    /// Fraction of trials in which `source` reached `node` within `ntx` rounds.
    pub fn frequency(&self, node: NodeId, source: NodeId, ntx: u32) -> f64 {
        self.counts[self.cell(node, source, ntx)] as f64 / self.trials as f64
    }

    /// Least frequent source at `node` for the given `ntx`.
    pub fn min_frequency(&self, node: NodeId, ntx: u32) -> f64 {
        (0..self.n)
            .map(|s| self.frequency(node, NodeId::from_index(s), ntx))
            .fold(1.0, f64::min)
    }

    pub fn reachable(&self, node: NodeId, ntx: u32, threshold: f64) -> ParticipantMask {
        (0..self.n)
            .map(NodeId::from_index)
            .filter(|&s| self.frequency(node, s, ntx) >= threshold)
            .collect()
    }

    /// Reachable-source sets for `ntx = 1..=max_ntx`.
    pub fn profile(&self, node: NodeId, threshold: f64) -> Vec<ParticipantMask> {
        (1..=self.max_ntx)
            .map(|r| self.reachable(node, r, threshold))
            .collect()
    }
}

/// Profiles every node at once: each trial floods a chain carrying one
/// probe per node for `max_ntx` rounds.
pub fn reachability_counts<R: RngCore + ?Sized>(
    topology: &Topology,
    max_ntx: u32,
    trials: u32,
    rng: &mut R,
) -> ReachabilityCounts {
    assert!(trials >= 1, "at least one trial");
    assert!(
        max_ntx >= 1 && max_ntx < NEVER as u32,
        "ntx bound out of range"
    );
    let n = topology.node_count();
    let owners: Vec<usize> = (0..n).collect();
    let width = max_ntx as usize;
    let mut counts = vec![0u32; n * n * width];
    for _ in 0..trials {
        let arrival = flood_arrivals(topology, &owners, max_ntx, rng);
        for node in 0..n {
            for source in 0..n {
                let a = arrival[node * n + source];
                if a == NEVER {
                    continue;
                }
                let first = (a as usize).max(1) - 1;
                let base = (node * n + source) * width;
                for c in &mut counts[base + first..base + width] {
                    *c += 1;
                }
            }
        }
    }
    ReachabilityCounts {
        n,
        max_ntx,
        trials,
        counts,
    }
}

/// Sources whose payload reaches `node` in at least `threshold` of the
/// trials, for each `ntx` in `1..=max_ntx`. Sets never shrink as `ntx`
/// grows.
pub fn reachability_profile<R: RngCore + ?Sized>(
    topology: &Topology,
    node: NodeId,
    max_ntx: u32,
    trials: u32,
    threshold: f64,
    rng: &mut R,
) -> Vec<ParticipantMask> {
    reachability_counts(topology, max_ntx, trials, rng).profile(node, threshold)
}

#[derive(Debug, Clone, PartialEq)]
pub struct NoFullCoverage {
    pub max_ntx: u32,
    /// Fraction of trials fully covered at `max_ntx`.
    pub achieved: f64,
}

impl fmt::Display for NoFullCoverage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "full coverage not reached within ntx {} (only {:.3} of trials covered)",
            self.max_ntx, self.achieved
        )
    }
}

impl core::error::Error for NoFullCoverage {}

/// Smallest `ntx` at which at least `quantile` of the trials deliver every
/// node's payload to every node.
pub fn min_ntx_full_coverage<R: RngCore + ?Sized>(
    topology: &Topology,
    trials: u32,
    quantile: f64,
    max_ntx: u32,
    rng: &mut R,
) -> Result<u32, NoFullCoverage> {
    assert!(trials >= 1, "at least one trial");
    let n = topology.node_count();
    let owners: Vec<usize> = (0..n).collect();
    let bound = max_ntx.clamp(1, NEVER as u32 - 1);
    // covered_at[r] = trials fully covered exactly at round r
    let mut covered_at = vec![0u32; bound as usize + 1];
    for _ in 0..trials {
        let arrival = flood_arrivals(topology, &owners, bound, rng);
        if let Some(&last) = arrival.iter().max() {
            if last != NEVER {
                covered_at[last as usize] += 1;
            }
        }
    }
    let mut cumulative = 0u32;
    for (r, &c) in covered_at.iter().enumerate() {
        cumulative += c;
        if r >= 1 && cumulative as f64 >= quantile * trials as f64 {
            return Ok(r as u32);
        }
    }
    Err(NoFullCoverage {
        max_ntx: bound,
        achieved: cumulative as f64 / trials as f64,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand_chacha::rand_core::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn rng() -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(11)
    }

    fn ids(mask: &ParticipantMask) -> Vec<u32> {
        mask.iter().map(|n| n.0).collect()
    }

    #[test]
    fn line_profile() {
        let p = reachability_profile(&Topology::line(3), NodeId(1), 3, 1, 0.99, &mut rng());
        assert_eq!(ids(&p[0]), [1, 2]);
        assert_eq!(ids(&p[1]), [1, 2, 3]);
        assert_eq!(ids(&p[2]), [1, 2, 3]);
    }

    #[test]
    fn star_centre_hears_all_leaves_at_once() {
        let p = reachability_profile(&Topology::star(7), NodeId(1), 1, 1, 0.99, &mut rng());
        assert_eq!(p[0].len(), 7);
    }

    #[test]
    fn diameter_rounds_cover_everyone() {
        let t = Topology::preset("flocklab26").unwrap();
        let d = t.diameter();
        let counts = reachability_counts(&t, d, 1, &mut rng());
        for v in t.nodes() {
            assert_eq!(counts.reachable(v, d, 0.99).len(), 26);
        }
    }

    #[test]
    fn lossless_min_coverage_is_diameter() {
        assert_eq!(
            min_ntx_full_coverage(&Topology::complete(6), 3, 0.99, 10, &mut rng()),
            Ok(1)
        );
        assert_eq!(
            min_ntx_full_coverage(&Topology::line(5), 3, 0.99, 10, &mut rng()),
            Ok(4)
        );
        let t = Topology::preset("dcube45").unwrap();
        assert_eq!(
            min_ntx_full_coverage(&t, 2, 0.99, 40, &mut rng()),
            Ok(t.diameter())
        );
    }

    #[test]
    fn coverage_bound_is_reported() {
        let err = min_ntx_full_coverage(&Topology::line(6), 2, 0.99, 3, &mut rng()).unwrap_err();
        assert_eq!(err.max_ntx, 3);
        assert_eq!(err.achieved, 0.0);
    }

    #[test]
    fn lossy_frequencies_are_monotone() {
        let t = Topology::preset("flocklab26")
            .unwrap()
            .with_loss(0.3)
            .unwrap();
        let c = reachability_counts(&t, 6, 40, &mut rng());
        for v in t.nodes() {
            for s in t.nodes() {
                for r in 1..6 {
                    assert!(c.frequency(v, s, r) <= c.frequency(v, s, r + 1));
                }
            }
            assert_eq!(c.frequency(v, v, 1), 1.0);
        }
    }
}
