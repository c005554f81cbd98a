//! Flat `key = value` experiment configuration.

use std::path::PathBuf;
use std::str::FromStr;

use minishare_core::field::FieldModulus;
use minishare_core::sscrypto::MasterSecret;
use minishare_core::Variant;

use crate::topology_file::TopologySource;
use crate::HarnessError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VariantSelection {
    S3,
    S4,
    Both,
}

impl VariantSelection {
    pub fn variants(self) -> &'static [Variant] {
        match self {
            VariantSelection::S3 => &[Variant::S3],
            VariantSelection::S4 => &[Variant::S4],
            VariantSelection::Both => &[Variant::S3, Variant::S4],
        }
    }
}

impl FromStr for VariantSelection {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "s3" => Ok(VariantSelection::S3),
            "s4" => Ok(VariantSelection::S4),
            "both" => Ok(VariantSelection::Both),
            _ => Err(HarnessError::Config(format!(
                "variant must be s3, s4 or both, got `{s}`"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Csv,
    Json,
}

impl FromStr for OutputFormat {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            _ => Err(HarnessError::Config(format!(
                "format must be csv or json, got `{s}`"
            ))),
        }
    }
}

/// Naive-variant sharing ntx: fixed, or the smallest ntx that covers the
/// whole network.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NtxChoice {
    Auto,
    Fixed(u32),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub topology: TopologySource,
    /// Checked against the loaded topology when set.
    pub n: Option<usize>,
    pub variant: VariantSelection,
    /// Polynomial degree; `None` means `floor(n / 3)`.
    pub k: Option<usize>,
    pub ntx_share: u32,
    pub ntx_recon: u32,
    pub ntx_s3: NtxChoice,
    pub q: FieldModulus,
    pub loss: f64,
    pub iterations: u32,
    pub seed: u64,
    pub out: PathBuf,
    pub format: OutputFormat,
    pub master_secret: MasterSecret,
    pub slot_ms: f64,
    pub profile_trials: u32,
    pub coverage_trials: u32,
    pub quantile: f64,
    pub reach_threshold: f64,
    pub max_ntx: u32,
    /// Secrets are drawn uniformly from `[0, secret_max)`.
    pub secret_max: u64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            topology: TopologySource::Preset("flocklab26".into()),
            n: None,
            variant: VariantSelection::Both,
            k: None,
            ntx_share: 6,
            ntx_recon: 6,
            ntx_s3: NtxChoice::Auto,
            q: FieldModulus::default(),
            loss: 0.0,
            iterations: 200,
            seed: 1,
            out: PathBuf::from("results.csv"),
            format: OutputFormat::Csv,
            master_secret: MasterSecret(*b"minishare-master"),
            slot_ms: 4.0,
            profile_trials: 200,
            coverage_trials: 200,
            quantile: 0.99,
            reach_threshold: 0.99,
            max_ntx: 64,
            secret_max: 1 << 16,
        }
    }
}

pub const KEYS: &[&str] = &[
    "topology",
    "n",
    "variant",
    "k",
    "ntx_share",
    "ntx_recon",
    "ntx_s3",
    "q",
    "loss",
    "iterations",
    "seed",
    "out",
    "format",
    "master_secret",
    "slot_ms",
    "profile_trials",
    "coverage_trials",
    "quantile",
    "reach_threshold",
    "max_ntx",
    "secret_max",
];

fn parse<T: FromStr>(key: &str, value: &str) -> Result<T, HarnessError> {
    value
        .parse()
        .map_err(|_| HarnessError::Config(format!("invalid value `{value}` for `{key}`")))
}

impl ExperimentConfig {
    /// Parses a config file body on top of the defaults.
    pub fn from_text(text: &str) -> Result<Self, HarnessError> {
        let mut config = ExperimentConfig::default();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                HarnessError::Config(format!("line {}: expected `key = value`", idx + 1))
            })?;
            config
                .set(key.trim(), value.trim())
                .map_err(|e| HarnessError::Config(format!("line {}: {e}", idx + 1)))?;
        }
        Ok(config)
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<(), HarnessError> {
        match key {
            "topology" => self.topology = TopologySource::parse(value)?,
            "n" => self.n = Some(parse(key, value)?),
            "variant" => self.variant = value.parse()?,
            "k" => {
                self.k = match value {
                    "auto" => None,
                    v => Some(parse(key, v)?),
                }
            }
            "ntx_share" => self.ntx_share = parse(key, value)?,
            "ntx_recon" => self.ntx_recon = parse(key, value)?,
            "ntx_s3" => {
                self.ntx_s3 = match value {
                    "auto" => NtxChoice::Auto,
                    v => NtxChoice::Fixed(parse(key, v)?),
                }
            }
            "q" => {
                self.q = FieldModulus::new(parse(key, value)?)
                    .map_err(|e| HarnessError::Config(e.to_string()))?
            }
            "loss" => self.loss = parse(key, value)?,
            "iterations" => self.iterations = parse(key, value)?,
            "seed" => self.seed = parse(key, value)?,
            "out" => self.out = PathBuf::from(value),
            "format" => self.format = value.parse()?,
            "master_secret" => {
                let bytes: [u8; 16] = hex::decode(value)
                    .ok()
                    .and_then(|b| b.try_into().ok())
                    .ok_or_else(|| {
                        HarnessError::Config("master_secret must be 32 hex characters".into())
                    })?;
                self.master_secret = MasterSecret(bytes);
            }
            "slot_ms" => self.slot_ms = parse(key, value)?,
            "profile_trials" => self.profile_trials = parse(key, value)?,
            "coverage_trials" => self.coverage_trials = parse(key, value)?,
            "quantile" => self.quantile = parse(key, value)?,
            "reach_threshold" => self.reach_threshold = parse(key, value)?,
            "max_ntx" => self.max_ntx = parse(key, value)?,
            "secret_max" => self.secret_max = parse(key, value)?,
            other => return Err(HarnessError::Config(format!("unknown key `{other}`"))),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        let fail = |m: &str| Err(HarnessError::Config(m.to_string()));
        if self.iterations == 0 {
            return fail("iterations must be at least 1");
        }
        if !(0.0..1.0).contains(&self.loss) {
            return fail("loss must lie in [0, 1)");
        }
        if self.ntx_share == 0 || self.ntx_recon == 0 || self.ntx_s3 == NtxChoice::Fixed(0) {
            return fail("ntx values must be at least 1");
        }
        if self.slot_ms.is_nan() || self.slot_ms <= 0.0 {
            return fail("slot_ms must be positive");
        }
        if !(0.0..=1.0).contains(&self.quantile) || !(0.0..=1.0).contains(&self.reach_threshold) {
            return fail("quantile and reach_threshold must lie in [0, 1]");
        }
        if self.profile_trials == 0 || self.coverage_trials == 0 {
            return fail("trial counts must be at least 1");
        }
        if self.secret_max == 0 {
            return fail("secret_max must be at least 1");
        }
        Ok(())
    }
}
