//! Command line and configuration-file handling.
//!
//! Values resolve in the order flag, file, default. The seed additionally
//! falls back to `MSOND_SEED` when neither a flag nor the file sets it.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use crate::channel::{Mode, NetworkConfig};
use crate::experiment::{ExperimentKind, ExperimentSpec, Strategy};
use crate::selection::FullDuplexSelection;
use crate::{db_to_linear, Error, Result};

pub const SEED_ENV: &str = "MSOND_SEED";

/// Trials per sweep point unless overridden.
pub const DEFAULT_TRIALS: usize = 10_000;
/// Trials per sweep point with `--full-scale`.
pub const FULL_SCALE_TRIALS: usize = 100_000;

#[derive(Debug, Parser)]
#[command(
    name = "msond",
    version,
    about = "MS-OND relay network Monte Carlo simulator"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub flags: Flags,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Largest selected TIL versus the number of relays.
    TilDecay,
    /// Sum rate versus snr.
    RateVsSnr,
    /// Sum rate versus the number of relays.
    RateVsN,
    /// Alternate versus full-duplex relaying over residual self-interference.
    RateVsRsinr,
    /// Best strategy per (N, snr) cell.
    Lookup,
    /// Compare metric samples with their Gamma laws.
    DistCheck,
}

impl Command {
    pub fn kind(self) -> ExperimentKind {
        match self {
            Command::TilDecay => ExperimentKind::TilDecay,
            Command::RateVsSnr => ExperimentKind::RateVsSnr,
            Command::RateVsN => ExperimentKind::RateVsN,
            Command::RateVsRsinr => ExperimentKind::RateVsRsinr,
            Command::Lookup => ExperimentKind::Lookup,
            Command::DistCheck => ExperimentKind::DistCheck,
        }
    }
}

#[derive(Debug, Clone, Default, Args)]
pub struct Flags {
    /// Source-destination pairs.
    #[arg(long, global = true)]
    pub k: Option<usize>,
    /// Relay candidates.
    #[arg(long, global = true)]
    pub n: Option<usize>,
    /// Antennas per source and destination.
    #[arg(long, global = true)]
    pub m: Option<usize>,
    /// Streams per pair.
    #[arg(long, global = true)]
    pub s: Option<usize>,
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub snr_db: Option<f64>,
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub rsinr_db: Option<f64>,
    #[arg(long, global = true)]
    pub l_slots: Option<usize>,
    #[arg(long, global = true)]
    pub trials: Option<usize>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Comma-separated modes: ar, nar, fd.
    #[arg(long, global = true, value_delimiter = ',')]
    pub mode: Option<Vec<Mode>>,
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Worker threads (0 = all CPUs).
    #[arg(long, global = true)]
    pub workers: Option<usize>,
    /// TOML configuration file.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Comma-separated sweep values (N, snr dB or RSINR dB).
    #[arg(
        long,
        global = true,
        value_delimiter = ',',
        allow_negative_numbers = true
    )]
    pub sweep: Option<Vec<f64>>,
    /// Comma-separated snr grid in dB for the lookup table.
    #[arg(
        long,
        global = true,
        value_delimiter = ',',
        allow_negative_numbers = true
    )]
    pub snr_grid_db: Option<Vec<f64>>,
    /// Comma-separated lookup strategies such as `ar:3,ar:2,ar:1,nar:1`.
    #[arg(long, global = true, value_delimiter = ',')]
    pub strategies: Option<Vec<Strategy>>,
    /// Full-duplex relay selection: `aware` or `stage1`.
    #[arg(long, global = true)]
    pub fd_selection: Option<FullDuplexSelection>,
    /// Use 10^5 trials per point unless `--trials` is given.
    #[arg(long, global = true)]
    pub full_scale: bool,
}

/// Contents of a configuration file. The resolved echo uses the same layout,
/// so it can be fed back with `--config`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub k: Option<usize>,
    pub n: Option<usize>,
    pub m: Option<usize>,
    pub s: Option<usize>,
    pub snr_db: Option<f64>,
    pub rsinr_db: Option<f64>,
    pub l_slots: Option<usize>,
    pub trials: Option<usize>,
    pub seed: Option<u64>,
    pub mode: Option<Vec<Mode>>,
    pub out: Option<PathBuf>,
    pub workers: Option<usize>,
    pub sweep: Option<Vec<f64>>,
    pub snr_grid_db: Option<Vec<f64>>,
    pub strategies: Option<Vec<String>>,
    pub fd_selection: Option<FullDuplexSelection>,
    pub full_scale: Option<bool>,
}

impl FileConfig {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| {
            let message = e.message().to_string();
            let field = backticked(&message)
                .or_else(|| e.span().map(|span| key_at(text, span.start)))
                .unwrap_or_else(|| "config".to_string());
            Error::config(field, message)
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::parse(&text)
    }
}

fn backticked(message: &str) -> Option<String> {
    let start = message.find('`')? + 1;
    let len = message[start..].find('`')?;
    Some(message[start..start + len].to_string())
}

/// Key of the `key = value` line containing byte `offset`.
fn key_at(text: &str, offset: usize) -> String {
    let line_start = text[..offset.min(text.len())]
        .rfind('\n')
        .map_or(0, |i| i + 1);
    let line = &text[line_start..];
    line.split('=')
        .next()
        .unwrap_or("config")
        .trim()
        .to_string()
}

fn env_seed() -> Result<Option<u64>> {
    match std::env::var(SEED_ENV) {
        Ok(v) => v
            .trim()
            .parse()
            .map(Some)
            .map_err(|_| Error::config(SEED_ENV, format!("`{v}` is not a 64-bit seed"))),
        Err(_) => Ok(None),
    }
}

/// Resolves flags and the optional file into a validated spec.
pub fn resolve(kind: ExperimentKind, flags: &Flags) -> Result<ExperimentSpec> {
    let file = match &flags.config {
        Some(path) => FileConfig::load(path)?,
        None => FileConfig::default(),
    };
    resolve_with(kind, flags, &file, env_seed()?)
}

/// Like [`resolve`] with the file and environment already read.
pub fn resolve_with(
    kind: ExperimentKind,
    flags: &Flags,
    file: &FileConfig,
    env_seed: Option<u64>,
) -> Result<ExperimentSpec> {
    let defaults = NetworkConfig::default();
    let snr_db = flags.snr_db.or(file.snr_db).unwrap_or(15.0);
    let rsinr_db = flags.rsinr_db.or(file.rsinr_db).unwrap_or(0.0);
    let base = NetworkConfig {
        k: flags.k.or(file.k).unwrap_or(defaults.k),
        n: flags.n.or(file.n).unwrap_or(defaults.n),
        m: flags.m.or(file.m).unwrap_or(defaults.m),
        s: flags.s.or(file.s).unwrap_or(defaults.s),
        snr: db_to_linear(snr_db),
        l_slots: flags.l_slots.or(file.l_slots).unwrap_or(defaults.l_slots),
        rsinr: db_to_linear(rsinr_db),
    };
    if !snr_db.is_finite() {
        return Err(Error::config("snr_db", "must be finite"));
    }
    if !rsinr_db.is_finite() {
        return Err(Error::config("rsinr_db", "must be finite"));
    }
    let mut spec = ExperimentSpec::new(kind, base);
    let full_scale = flags.full_scale || file.full_scale.unwrap_or(false);
    spec.trials = flags.trials.or(file.trials).unwrap_or(if full_scale {
        FULL_SCALE_TRIALS
    } else {
        DEFAULT_TRIALS
    });
    spec.seed = flags.seed.or(file.seed).or(env_seed).unwrap_or(0);
    if let Some(modes) = flags.mode.clone().or_else(|| file.mode.clone()) {
        spec.modes = modes;
    }
    if let Some(sweep) = flags.sweep.clone().or_else(|| file.sweep.clone()) {
        spec.sweep = sweep;
    }
    if let Some(grid) = flags
        .snr_grid_db
        .clone()
        .or_else(|| file.snr_grid_db.clone())
    {
        spec.snr_grid_db = grid;
    }
    if let Some(list) = &flags.strategies {
        spec.strategies = list.clone();
    } else if let Some(list) = &file.strategies {
        spec.strategies = list.iter().map(|s| s.parse()).collect::<Result<_>>()?;
    }
    if let Some(policy) = flags.fd_selection.or(file.fd_selection) {
        spec.fd_selection = policy;
    }
    spec.workers = flags.workers.or(file.workers).unwrap_or(0);
    spec.out = Some(
        flags
            .out
            .clone()
            .or_else(|| file.out.clone())
            .unwrap_or_else(|| PathBuf::from(format!("{kind}.csv"))),
    );
    if let Some(strategy) = spec.strategies.iter().find(|st| st.s > base.m) {
        return Err(Error::config(
            "S",
            format!("strategy {strategy} needs S <= M={}", base.m),
        ));
    }
    spec.validate()?;
    Ok(spec)
}

/// Normalized TOML echo of a resolved spec.
pub fn echo(spec: &ExperimentSpec) -> String {
    let file = FileConfig {
        k: Some(spec.base.k),
        n: Some(spec.base.n),
        m: Some(spec.base.m),
        s: Some(spec.base.s),
        snr_db: Some(crate::linear_to_db(spec.base.snr)),
        rsinr_db: Some(crate::linear_to_db(spec.base.rsinr)),
        l_slots: Some(spec.base.l_slots),
        trials: Some(spec.trials),
        seed: Some(spec.seed),
        mode: Some(spec.modes.clone()),
        out: spec.out.clone(),
        workers: Some(spec.workers),
        sweep: Some(spec.sweep.clone()),
        snr_grid_db: Some(spec.snr_grid_db.clone()),
        strategies: Some(spec.strategies.iter().map(|s| s.to_string()).collect()),
        fd_selection: Some(spec.fd_selection),
        full_scale: None,
    };
    format!(
        "# {}\n{}",
        spec.kind,
        toml::to_string(&file).expect("config echo is serializable")
    )
}
