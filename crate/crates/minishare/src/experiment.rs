//! Batch runs: resolve parameters, bootstrap each variant once, then run
//! independent rounds in parallel.

use std::path::Path;

use minishare_core::ctsim::{min_ntx_full_coverage, Topology};
use minishare_core::field::FieldElement;
use minishare_core::protocol::{bootstrap, run_round, MetricsRecord, ProtocolConfig};
use minishare_core::{NodeId, Variant};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{ExperimentConfig, NtxChoice};
use crate::HarnessError;

/// Independent random streams, so changing one stage never shifts another.
#[derive(Debug, Clone, Copy)]
#[repr(u64)]
enum Stream {
    Coverage = 1,
    Bootstrap = 2,
    Secrets = 3,
    Round = 4,
}

fn variant_tag(v: Variant) -> u64 {
    match v {
        Variant::S3 => 3,
        Variant::S4 => 4,
    }
}

fn stream_rng(seed: u64, stream: Stream, variant: u64, iteration: u64) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    for (chunk, word) in key
        .chunks_exact_mut(8)
        .zip([seed, stream as u64, variant, iteration])
    {
        chunk.copy_from_slice(&word.to_le_bytes());
    }
    ChaCha8Rng::from_seed(key)
}

/// One table row per round.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsRow {
    pub variant: String,
    pub iteration: u32,
    pub latency_ms: f64,
    pub mean_radio_on_ms: f64,
    pub max_radio_on_ms: f64,
    pub reliability: f64,
    pub correct: bool,
}

impl MetricsRow {
    pub fn from_metrics(variant: Variant, iteration: u32, m: &MetricsRecord) -> Self {
        MetricsRow {
            variant: variant.name().to_string(),
            iteration,
            latency_ms: m.latency_ms,
            mean_radio_on_ms: m.mean_radio_on_ms(),
            max_radio_on_ms: m.max_radio_on_ms(),
            reliability: m.reliability,
            correct: m.correct,
        }
    }
}

/// Parameters as actually used after `auto` resolution.
#[derive(Debug, Clone, PartialEq)]
pub struct Resolved {
    pub n: usize,
    pub k: usize,
    pub ntx_share: u32,
    pub ntx_recon: u32,
    /// Set only when the naive variant runs.
    pub ntx_s3: Option<u32>,
    /// Aggregator set of the trimmed variant, when it runs.
    pub aggregators: Option<Vec<NodeId>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentResult {
    pub resolved: Resolved,
    pub rows: Vec<MetricsRow>,
}

pub fn protocol_config(
    config: &ExperimentConfig,
    variant: Variant,
    n: usize,
    k: usize,
    ntx_s3: u32,
) -> ProtocolConfig {
    let mut p = ProtocolConfig::new(variant, n);
    p.degree = k;
    p.ntx_share = match variant {
        Variant::S3 => ntx_s3,
        Variant::S4 => config.ntx_share,
    };
    p.ntx_recon = config.ntx_recon;
    p.modulus = config.q;
    p.master_secret = config.master_secret;
    p.slot_duration_ms = config.slot_ms;
    p.profile_trials = config.profile_trials;
    p.reach_threshold = config.reach_threshold;
    p
}

/// Loads the topology named by `config` and applies the configured loss.
pub fn load_or_generate_topology(
    config: &ExperimentConfig,
    base: Option<&Path>,
) -> Result<Topology, HarnessError> {
    let topology = config.topology.load(base)?;
    if let Some(n) = config.n {
        if n != topology.node_count() {
            return Err(HarnessError::Config(format!(
                "n = {n} but the topology has {} nodes",
                topology.node_count()
            )));
        }
    }
    if config.loss > 0.0 {
        Ok(topology.with_loss(config.loss)?)
    } else {
        Ok(topology)
    }
}

pub fn run_experiment(
    config: &ExperimentConfig,
    topology: &Topology,
) -> Result<ExperimentResult, HarnessError> {
    config.validate()?;
    let n = topology.node_count();
    let k = config
        .k
        .unwrap_or_else(|| ProtocolConfig::default_degree(n));
    let variants = config.variant.variants();

    let ntx_s3 = if variants.contains(&Variant::S3) {
        Some(match config.ntx_s3 {
            NtxChoice::Fixed(v) => v,
            NtxChoice::Auto => min_ntx_full_coverage(
                topology,
                config.coverage_trials,
                config.quantile,
                config.max_ntx,
                &mut stream_rng(config.seed, Stream::Coverage, 0, 0),
            )?,
        })
    } else {
        None
    };

    let secrets: Vec<Vec<FieldElement>> = (0..config.iterations)
        .map(|it| {
            let mut rng = stream_rng(config.seed, Stream::Secrets, 0, it as u64);
            (0..n)
                .map(|_| config.q.element(rng.gen_range(0..config.secret_max)))
                .collect()
        })
        .collect();

    let mut rows = Vec::with_capacity(variants.len() * config.iterations as usize);
    let mut aggregators = None;
    for &variant in variants {
        let tag = variant_tag(variant);
        let protocol = protocol_config(config, variant, n, k, ntx_s3.unwrap_or(config.ntx_share));
        let boot = bootstrap(
            topology,
            &protocol,
            &mut stream_rng(config.seed, Stream::Bootstrap, tag, 0),
        )?;
        if variant == Variant::S4 {
            aggregators = Some(boot.aggregators.clone());
        }
        let batch: Vec<MetricsRow> = secrets
            .par_iter()
            .enumerate()
            .map(|(it, s)| {
                let mut rng = stream_rng(config.seed, Stream::Round, tag, it as u64);
                let round = (tag << 32) | it as u64;
                run_round(topology, &boot, s, &protocol, round, &mut rng)
                    .map(|out| MetricsRow::from_metrics(variant, it as u32, &out.metrics))
            })
            .collect::<Result<_, _>>()?;
        rows.extend(batch);
    }

    Ok(ExperimentResult {
        resolved: Resolved {
            n,
            k,
            ntx_share: config.ntx_share,
            ntx_recon: config.ntx_recon,
            ntx_s3,
            aggregators,
        },
        rows,
    })
}
