use std::io;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use minishare::config::ExperimentConfig;
use minishare::experiment::{load_or_generate_topology, run_experiment};
use minishare::report::{format_summary, write_results};
use minishare::topology_file::{format_topology, TopologySource};
use minishare::HarnessError;
use minishare_core::ctsim::{min_ntx_full_coverage, reachability_counts, Topology};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[derive(Parser)]
#[command(
    name = "minishare",
    version,
    about = "Secret-sharing aggregation over simulated floods"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
#[allow(clippy::large_enum_variant)]
enum Command {
    /// Run an experiment batch and write the per-round table.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Per-node reachability at each ntx up to --max-ntx.
    Profile {
        #[command(flatten)]
        net: NetArgs,
        #[arg(long = "max-ntx", default_value_t = 10)]
        max_ntx: u32,
        #[arg(long, default_value_t = 0.99)]
        threshold: f64,
    },
    /// Smallest ntx that floods every payload to every node.
    Mincov {
        #[command(flatten)]
        net: NetArgs,
        #[arg(long = "max-ntx", default_value_t = 64)]
        max_ntx: u32,
        #[arg(long, default_value_t = 0.99)]
        quantile: f64,
    },
    /// Print a topology in the text file format.
    Topology {
        #[arg(long)]
        topology: String,
    },
}

#[derive(Args)]
struct NetArgs {
    /// Preset name, `rgg:n=..,radius=..,seed=..`, `line:N`, `star:N`,
    /// `complete:N` or a topology file.
    #[arg(long)]
    topology: String,
    #[arg(long, default_value_t = 0.0)]
    loss: f64,
    #[arg(long, default_value_t = 200)]
    trials: u32,
    #[arg(long, default_value_t = 1)]
    seed: u64,
}

impl NetArgs {
    fn load(&self) -> Result<(Topology, ChaCha8Rng), HarnessError> {
        let t = TopologySource::parse(&self.topology)?.load(None)?;
        let t = if self.loss > 0.0 {
            t.with_loss(self.loss)?
        } else {
            t
        };
        if self.trials == 0 {
            return Err(HarnessError::Config("trials must be at least 1".into()));
        }
        Ok((t, ChaCha8Rng::seed_from_u64(self.seed)))
    }
}

/// Command-line values take precedence over the config file.
#[derive(Args, Default)]
struct Overrides {
    #[arg(long)]
    topology: Option<String>,
    #[arg(long)]
    n: Option<String>,
    #[arg(long)]
    variant: Option<String>,
    #[arg(long)]
    k: Option<String>,
    #[arg(long = "ntx_share", alias = "ntx-share")]
    ntx_share: Option<String>,
    #[arg(long = "ntx_recon", alias = "ntx-recon")]
    ntx_recon: Option<String>,
    #[arg(long = "ntx_s3", alias = "ntx-s3")]
    ntx_s3: Option<String>,
    #[arg(long)]
    q: Option<String>,
    #[arg(long)]
    loss: Option<String>,
    #[arg(long)]
    iterations: Option<String>,
    #[arg(long)]
    seed: Option<String>,
    #[arg(long)]
    out: Option<String>,
    #[arg(long)]
    format: Option<String>,
    #[arg(long = "master_secret", alias = "master-secret")]
    master_secret: Option<String>,
    #[arg(long = "slot_ms", alias = "slot-ms")]
    slot_ms: Option<String>,
    #[arg(long = "profile_trials", alias = "profile-trials")]
    profile_trials: Option<String>,
    #[arg(long = "coverage_trials", alias = "coverage-trials")]
    coverage_trials: Option<String>,
    #[arg(long)]
    quantile: Option<String>,
    #[arg(long = "reach_threshold", alias = "reach-threshold")]
    reach_threshold: Option<String>,
    #[arg(long = "max_ntx", alias = "max-ntx")]
    max_ntx: Option<String>,
    #[arg(long = "secret_max", alias = "secret-max")]
    secret_max: Option<String>,
}

impl Overrides {
    fn apply(&self, config: &mut ExperimentConfig) -> Result<(), HarnessError> {
        let pairs = [
            ("topology", &self.topology),
            ("n", &self.n),
            ("variant", &self.variant),
            ("k", &self.k),
            ("ntx_share", &self.ntx_share),
            ("ntx_recon", &self.ntx_recon),
            ("ntx_s3", &self.ntx_s3),
            ("q", &self.q),
            ("loss", &self.loss),
            ("iterations", &self.iterations),
            ("seed", &self.seed),
            ("out", &self.out),
            ("format", &self.format),
            ("master_secret", &self.master_secret),
            ("slot_ms", &self.slot_ms),
            ("profile_trials", &self.profile_trials),
            ("coverage_trials", &self.coverage_trials),
            ("quantile", &self.quantile),
            ("reach_threshold", &self.reach_threshold),
            ("max_ntx", &self.max_ntx),
            ("secret_max", &self.secret_max),
        ];
        for (key, value) in pairs {
            if let Some(v) = value {
                config.set(key, v)?;
            }
        }
        Ok(())
    }
}

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> HarnessError + '_ {
    move |source| HarnessError::Io {
        path: path.display().to_string(),
        source,
    }
}

fn run(config_path: &Path, overrides: &Overrides) -> Result<(), HarnessError> {
    let text = std::fs::read_to_string(config_path).map_err(io_err(config_path))?;
    let mut config = ExperimentConfig::from_text(&text)?;
    overrides.apply(&mut config)?;
    // Topology files in a config are relative to the config's directory;
    // a --topology flag is relative to the working directory.
    let base = match overrides.topology {
        Some(_) => None,
        None => config_path.parent(),
    };
    let topology = load_or_generate_topology(&config, base)?;
    let result = run_experiment(&config, &topology)?;

    write_results(&result.rows, &config.out, config.format)?;

    print!("{}", format_summary(&result.resolved, &result.rows));
    println!(
        "wrote {} rows to {}",
        result.rows.len(),
        config.out.display()
    );
    Ok(())
}

fn profile(net: &NetArgs, max_ntx: u32, threshold: f64) -> Result<(), HarnessError> {
    if max_ntx == 0 {
        return Err(HarnessError::Config("max-ntx must be at least 1".into()));
    }
    let (t, mut rng) = net.load()?;
    let counts = reachability_counts(&t, max_ntx, net.trials, &mut rng);
    let header: Vec<String> = (1..=max_ntx).map(|r| format!("ntx{r}")).collect();
    println!("# sources heard with frequency >= {threshold}");
    println!("node,{}", header.join(","));
    for v in t.nodes() {
        let row: Vec<String> = (1..=max_ntx)
            .map(|r| counts.reachable(v, r, threshold).len().to_string())
            .collect();
        println!("{v},{}", row.join(","));
    }
    Ok(())
}

fn mincov(net: &NetArgs, max_ntx: u32, quantile: f64) -> Result<(), HarnessError> {
    let (t, mut rng) = net.load()?;
    match min_ntx_full_coverage(&t, net.trials, quantile, max_ntx, &mut rng) {
        Ok(ntx) => println!("min ntx for full coverage at quantile {quantile}: {ntx}"),
        Err(e) => println!("{e}"),
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Run { config, overrides } => run(config, overrides),
        Command::Profile {
            net,
            max_ntx,
            threshold,
        } => profile(net, *max_ntx, *threshold),
        Command::Mincov {
            net,
            max_ntx,
            quantile,
        } => mincov(net, *max_ntx, *quantile),
        Command::Topology { topology } => TopologySource::parse(topology)
            .and_then(|s| s.load(None))
            .map(|t| print!("{}", format_topology(&t))),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
