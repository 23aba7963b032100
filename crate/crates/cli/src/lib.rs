//! Command-line driver: argument handling, exit codes and run manifests.
//!
//! Exit codes: 0 success, 1 usage or config error, 2 validation failure,
//! 3 runtime cap hit.

pub mod commands;
pub mod manifest;
pub mod settings;

use std::ffi::OsString;
use std::fmt;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};
use warmlab::graph::BlockSpec;

use crate::manifest::{now, Manifest, Outputs, MANIFEST};
use crate::settings::{read_blocks, Settings};

pub const EXIT_OK: u8 = 0;
pub const EXIT_USAGE: u8 = 1;
pub const EXIT_VALIDATION: u8 = 2;
pub const EXIT_CAP: u8 = 3;

/// A usage or configuration problem; maps to exit code 1.
#[derive(Debug)]
pub struct Usage(pub String);

impl fmt::Display for Usage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Usage {}

#[derive(Parser, Debug)]
#[command(name = "warmlab", version, about = "Simulate and check strongly reinforced WARM processes and Pólya urns")]
pub struct Cli {
    #[command(flatten)]
    pub settings: Settings,
    /// TOML file with any of the flag keys; flags take precedence
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Command {
    /// Print the parameter ledger and check its constraints
    Params,
    /// Single-urn experiments
    Urn {
        #[command(subcommand)]
        action: UrnAction,
    },
    /// Simulate WARM on a tree or a chain of trees
    Warm(WarmArgs),
    /// Merge the estimates of several runs
    Report {
        /// Run directories or estimates.json files
        inputs: Vec<PathBuf>,
    },
    /// Re-run a manifest and compare output digests
    Replay {
        #[arg(long)]
        manifest: PathBuf,
    },
}

#[derive(Subcommand, Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UrnAction {
    /// Run embedded urns with n derived from the head start m
    Simulate(SimulateArgs),
    /// Check one of the single-urn estimates
    Verify(VerifyArgs),
}

#[derive(Args, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimulateArgs {
    /// Colours required in the exactly-(m-1) class
    #[arg(long, default_value_t = warmlab::montecarlo::MIN_EXACT)]
    pub min_exact: u128,
    /// Draw all n colours explicitly (n from --n) instead of class counts
    #[arg(long)]
    pub explicit: bool,
}

#[derive(Args, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerifyArgs {
    /// One of p_S, p_Zincr, p_LargeDev, lemma_ss, p_growing, p_delta
    #[arg(long)]
    pub prop: String,
    #[arg(long)]
    pub s: Option<f64>,
    #[arg(long = "s-prime")]
    pub s_prime: Option<f64>,
    #[arg(long)]
    pub beta: Option<f64>,
    #[arg(long)]
    pub delta: Option<f64>,
    /// Grid points
    #[arg(long)]
    pub grid: Option<usize>,
    /// Comma-separated m values
    #[arg(long = "m-grid", value_delimiter = ',')]
    pub m_grid: Vec<u64>,
    /// Comma-separated x values for the simplex bounds
    #[arg(long = "x", value_delimiter = ',')]
    pub xs: Vec<f64>,
    /// Monte Carlo samples beside exact values
    #[arg(long)]
    pub samples: Option<u64>,
}

#[derive(Args, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WarmArgs {
    /// Blocks file, one `arity depth q` line per tree
    #[arg(long)]
    pub composite: Option<PathBuf>,
    /// Abort a replica after this many firings
    #[arg(long)]
    pub event_cap: Option<u64>,
    /// Replicas whose trajectories are written as CSV
    #[arg(long, default_value_t = 100)]
    pub keep_csv: u64,
    /// Choice uniforms read per vertex for the goodness ledger (default M')
    #[arg(long)]
    pub uniform_limit: Option<u64>,
}

/// A fully resolved command: what a manifest stores and replays.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Job {
    pub command: Command,
    pub settings: Settings,
    pub blocks: Option<Vec<BlockSpec>>,
}

/// Exit code for an error that escaped a command.
pub fn exit_code(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if let Some(warmlab::Error::EventCap { .. }) = cause.downcast_ref::<warmlab::Error>() {
            return EXIT_CAP;
        }
    }
    EXIT_USAGE
}

/// Parses `args` (program name first), runs, and returns the exit code.
pub fn main_with_args<I, T>(args: I) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    let argv = args.iter().skip(1).map(|a| a.to_string_lossy().into_owned()).collect();
    match run(cli, argv) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            exit_code(&e)
        }
    }
}

pub fn run(cli: Cli, argv: Vec<String>) -> anyhow::Result<u8> {
    let threads = cli.settings.threads;
    if let Command::Replay { manifest } = &cli.command {
        return replay(manifest, cli.out.as_deref(), threads);
    }
    let file = match &cli.config {
        Some(p) => Settings::from_file(p)?,
        None => Settings::default(),
    };
    let mut settings = cli.settings.clone().over(file);
    settings.threads = None;
    let blocks = match &cli.command {
        Command::Warm(WarmArgs { composite: Some(p), .. }) => Some(read_blocks(p)?),
        _ => None,
    };
    let job = Job { command: cli.command, settings, blocks };
    let out = cli.out.unwrap_or_else(|| PathBuf::from("warmlab-out"));
    let (code, _) = execute(&job, &out, threads, argv)?;
    Ok(code)
}

/// Runs `job` into `out` and writes its manifest.
pub fn execute(job: &Job, out: &Path, threads: Option<usize>, argv: Vec<String>) -> anyhow::Result<(u8, Manifest)> {
    let started = now();
    let pool = {
        let mut b = rayon::ThreadPoolBuilder::new();
        if let Some(t) = threads {
            b = b.num_threads(t);
        }
        b.build()?
    };
    let mut outputs = Outputs::create(out)?;
    let mut inputs = Default::default();
    let code = pool.install(|| commands::dispatch(job, &mut outputs, &mut inputs))?;
    let manifest = Manifest {
        artifact: env!("CARGO_PKG_NAME").into(),
        version: env!("CARGO_PKG_VERSION").into(),
        argv,
        job: job.clone(),
        seed: job.settings.seed,
        threads: pool.current_num_threads(),
        started,
        finished: now(),
        exit_code: code,
        inputs,
        outputs: outputs.digests().clone(),
    };
    manifest.write(out)?;
    Ok((code, manifest))
}

fn replay(path: &Path, out: Option<&Path>, threads: Option<usize>) -> anyhow::Result<u8> {
    let path = if path.is_dir() { path.join(MANIFEST) } else { path.to_path_buf() };
    let old = Manifest::load(&path).map_err(|e| Usage(format!("{e:#}")))?;
    if matches!(old.job.command, Command::Replay { .. }) {
        return Err(Usage("a replay manifest cannot be replayed".into()).into());
    }
    let out = match out {
        Some(o) => o.to_path_buf(),
        None => path.parent().unwrap_or(Path::new(".")).join("replay"),
    };
    let (code, new) = execute(&old.job, &out, threads.or(Some(old.threads)), old.argv.clone())?;
    let mut same = code == old.exit_code && new.outputs.len() == old.outputs.len();
    for (name, digest) in &old.outputs {
        let ok = new.outputs.get(name) == Some(digest);
        same &= ok;
        println!("{} {name}", if ok { "same   " } else { "DIFFERS" });
    }
    println!(
        "replayed into {} with {} threads: {}",
        out.display(),
        new.threads,
        if same { "identical" } else { "mismatch" }
    );
    Ok(if same { EXIT_OK } else { EXIT_VALIDATION })
}
