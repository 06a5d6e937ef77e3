//! Seeded parallel Monte Carlo driver and the canned experiments.
//!
//! Trial `i` of every sweep point draws from the ChaCha8 stream `i` of the
//! master seed, so results do not depend on the worker count and sweep points
//! share common random numbers.

use std::fmt;
use std::fs::File;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analysis::{self, ShapeParams};
use crate::channel::{draw_block, ChannelRealization, Mode, NetworkConfig};
use crate::selection::{
    inter_relay_power, make_beam_configs, metric_stage1, select_full_duplex, select_set,
    select_with_metrics, stage1_table, BeamConfig, FullDuplexSelection, RelayAssignment,
};
use crate::transmission::{stream_terms, StreamTerms};
use crate::{db_to_linear, Error, Result};

/// Exact header of every sweep CSV.
pub const CSV_HEADER: [&str; 10] = [
    "sweep_param",
    "value",
    "mode",
    "S",
    "mean_sum_rate",
    "stderr",
    "mean_til_last",
    "discarded",
    "trials",
    "seed",
];

/// Header of the distribution-check CSV.
pub const DIST_HEADER: [&str; 7] = [
    "metric",
    "K",
    "S",
    "shape",
    "samples",
    "ks_distance",
    "seed",
];

/// Header of the lookup-table CSV.
pub const LOOKUP_HEADER: [&str; 6] = ["N", "snr_db", "strategy", "mode", "S", "t_max"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    TilDecay,
    RateVsSnr,
    RateVsN,
    RateVsRsinr,
    Lookup,
    DistCheck,
}

impl ExperimentKind {
    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::TilDecay => "til-decay",
            ExperimentKind::RateVsSnr => "rate-vs-snr",
            ExperimentKind::RateVsN => "rate-vs-n",
            ExperimentKind::RateVsRsinr => "rate-vs-rsinr",
            ExperimentKind::Lookup => "lookup",
            ExperimentKind::DistCheck => "dist-check",
        }
    }

    /// Name written to the `sweep_param` column.
    pub fn sweep_param(self) -> &'static str {
        match self {
            ExperimentKind::TilDecay | ExperimentKind::RateVsN => "N",
            ExperimentKind::RateVsSnr | ExperimentKind::Lookup => "snr_db",
            ExperimentKind::RateVsRsinr => "rsinr_db",
            ExperimentKind::DistCheck => "samples",
        }
    }

    pub fn default_sweep(self) -> Vec<f64> {
        match self {
            ExperimentKind::TilDecay => vec![25.0, 50.0, 100.0, 200.0, 400.0, 800.0],
            ExperimentKind::RateVsN => vec![25.0, 50.0, 100.0, 200.0, 400.0],
            ExperimentKind::RateVsSnr => (0..=8).map(|i| 5.0 * i as f64).collect(),
            ExperimentKind::RateVsRsinr => (0..=6).map(|i| 5.0 * i as f64).collect(),
            ExperimentKind::Lookup => vec![50.0, 100.0, 200.0],
            ExperimentKind::DistCheck => Vec::new(),
        }
    }

    pub fn default_modes(self) -> Vec<Mode> {
        match self {
            ExperimentKind::TilDecay | ExperimentKind::DistCheck => vec![Mode::Alternate],
            ExperimentKind::RateVsSnr | ExperimentKind::RateVsN => {
                vec![Mode::Alternate, Mode::NonAlternate]
            }
            ExperimentKind::RateVsRsinr => vec![Mode::Alternate, Mode::FullDuplex],
            ExperimentKind::Lookup => vec![Mode::Alternate, Mode::NonAlternate],
        }
    }
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ExperimentKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        [
            ExperimentKind::TilDecay,
            ExperimentKind::RateVsSnr,
            ExperimentKind::RateVsN,
            ExperimentKind::RateVsRsinr,
            ExperimentKind::Lookup,
            ExperimentKind::DistCheck,
        ]
        .into_iter()
        .find(|k| k.name() == s)
        .ok_or_else(|| Error::config("kind", format!("unknown experiment `{s}`")))
    }
}

/// A transmission strategy of the lookup table: protocol plus stream count.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Strategy {
    pub mode: Mode,
    pub s: usize,
}

impl Strategy {
    /// AR with S = 3, 2, 1, then NAR with S = 1.
    pub fn defaults() -> Vec<Strategy> {
        vec![
            Strategy {
                mode: Mode::Alternate,
                s: 3,
            },
            Strategy {
                mode: Mode::Alternate,
                s: 2,
            },
            Strategy {
                mode: Mode::Alternate,
                s: 1,
            },
            Strategy {
                mode: Mode::NonAlternate,
                s: 1,
            },
        ]
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.mode, self.s)
    }
}

impl FromStr for Strategy {
    type Err = Error;

    fn from_str(text: &str) -> Result<Self> {
        let bad = || Error::config("strategies", format!("`{text}` is not of the form mode:S"));
        let (mode, s) = text.split_once(':').ok_or_else(bad)?;
        Ok(Strategy {
            mode: mode.parse()?,
            s: s.trim().parse().map_err(|_| bad())?,
        })
    }
}

/// Fully resolved description of one run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSpec {
    pub kind: ExperimentKind,
    pub base: NetworkConfig,
    /// `N` values, snr in dB or RSINR in dB depending on `kind`; `N` values
    /// for the lookup table.
    pub sweep: Vec<f64>,
    /// snr grid in dB used by the lookup table.
    pub snr_grid_db: Vec<f64>,
    pub modes: Vec<Mode>,
    pub strategies: Vec<Strategy>,
    pub fd_selection: FullDuplexSelection,
    pub trials: usize,
    pub seed: u64,
    pub out: Option<PathBuf>,
    /// Worker threads; 0 picks the number of CPUs.
    pub workers: usize,
}

impl ExperimentSpec {
    /// A spec with the defaults of `kind` on top of `base`.
    pub fn new(kind: ExperimentKind, base: NetworkConfig) -> Self {
        ExperimentSpec {
            kind,
            base,
            sweep: kind.default_sweep(),
            snr_grid_db: (0..=15).map(|i| 2.0 * i as f64).collect(),
            modes: kind.default_modes(),
            strategies: Strategy::defaults(),
            fd_selection: FullDuplexSelection::default(),
            trials: 10_000,
            seed: 0,
            out: None,
            workers: 0,
        }
    }

    fn sweep_n(&self) -> Result<Vec<usize>> {
        self.sweep
            .iter()
            .map(|&v| {
                if v >= 1.0 && v.fract() == 0.0 && v <= u32::MAX as f64 {
                    Ok(v as usize)
                } else {
                    Err(Error::config(
                        "sweep",
                        format!("`{v}` is not a relay count"),
                    ))
                }
            })
            .collect()
    }

    /// Checks every configuration the run would touch.
    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::config("trials", "need at least one trial"));
        }
        if self.modes.is_empty() && self.kind != ExperimentKind::Lookup {
            return Err(Error::config("mode", "need at least one mode"));
        }
        if self.kind != ExperimentKind::DistCheck && self.sweep.is_empty() {
            return Err(Error::config("sweep", "sweep must not be empty"));
        }
        if self
            .sweep
            .iter()
            .chain(&self.snr_grid_db)
            .any(|v| !v.is_finite())
        {
            return Err(Error::config("sweep", "sweep values must be finite"));
        }
        match self.kind {
            ExperimentKind::TilDecay | ExperimentKind::RateVsN => {
                for n in self.sweep_n()? {
                    let cfg = NetworkConfig { n, ..self.base };
                    for &mode in &self.modes {
                        cfg.validate(mode)?;
                    }
                }
                if self.kind == ExperimentKind::TilDecay && !self.modes.contains(&Mode::Alternate) {
                    return Err(Error::config("mode", "til-decay needs mode ar"));
                }
            }
            ExperimentKind::RateVsSnr | ExperimentKind::RateVsRsinr => {
                for &mode in &self.modes {
                    self.base.validate(mode)?;
                }
            }
            ExperimentKind::Lookup => {
                if self.strategies.is_empty() {
                    return Err(Error::config("strategies", "need at least one strategy"));
                }
                if self.snr_grid_db.is_empty() {
                    return Err(Error::config("snr_grid_db", "grid must not be empty"));
                }
                for n in self.sweep_n()? {
                    for st in &self.strategies {
                        NetworkConfig {
                            n,
                            s: st.s,
                            ..self.base
                        }
                        .validate(st.mode)?;
                    }
                }
            }
            ExperimentKind::DistCheck => {
                self.base.validate(Mode::NonAlternate)?;
                if self.base.n <= self.base.sk() {
                    return Err(Error::config(
                        "N",
                        "dist-check needs N > SK so a probe relay stays outside the first set",
                    ));
                }
                if self.base.sk() < 2 {
                    return Err(Error::config("K", "dist-check needs SK >= 2"));
                }
            }
        }
        Ok(())
    }
}

/// One line of a sweep CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub sweep_param: String,
    pub value: f64,
    pub mode: Mode,
    pub s: usize,
    pub mean_sum_rate: f64,
    pub stderr: f64,
    /// Mean of the largest TIL in `Π2`; alternate rows only.
    pub mean_til_last: Option<f64>,
    /// Trials dropped because an equalizer was singular.
    pub discarded: usize,
    /// Requested trials.
    pub trials: usize,
    pub seed: u64,
}

impl SweepRow {
    pub fn completed(&self) -> usize {
        self.trials - self.discarded
    }

    fn record(&self) -> [String; 10] {
        [
            self.sweep_param.clone(),
            self.value.to_string(),
            self.mode.to_string(),
            self.s.to_string(),
            self.mean_sum_rate.to_string(),
            self.stderr.to_string(),
            self.mean_til_last
                .map(|v| v.to_string())
                .unwrap_or_default(),
            self.discarded.to_string(),
            self.trials.to_string(),
            self.seed.to_string(),
        ]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub spec: ExperimentSpec,
    pub rows: Vec<SweepRow>,
    /// `(N, mean TIL over all of Π2)`; TIL sweeps only.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub til_mean_all: Vec<(f64, f64)>,
    pub version: String,
    pub wall_time_s: f64,
}

impl SweepResult {
    /// Rows of one mode, in sweep order.
    pub fn mode_rows(&self, mode: Mode) -> Vec<&SweepRow> {
        self.rows.iter().filter(|r| r.mode == mode).collect()
    }

    /// `(N, mean L_{SK-th})` points of a TIL sweep.
    pub fn til_points(&self) -> Vec<(f64, f64)> {
        self.rows
            .iter()
            .filter_map(|r| r.mean_til_last.map(|t| (r.value, t)))
            .collect()
    }
}

/// Version string in `git describe` style.
pub fn version_string() -> String {
    match option_env!("MSOND_GIT_DESCRIBE") {
        Some(d) => d.to_string(),
        None => format!("v{}", env!("CARGO_PKG_VERSION")),
    }
}

/// RNG of trial `index`.
pub fn trial_rng(seed: u64, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    rng
}

/// One block: beams, channels and every mode's selection drawn from the same
/// randomness.
pub struct Block {
    pub beams: Vec<BeamConfig>,
    pub chan: ChannelRealization,
}

impl Block {
    pub fn draw(cfg: &NetworkConfig, rng: &mut ChaCha8Rng) -> Result<Self> {
        let beams = make_beam_configs(cfg, rng)?;
        let chan = draw_block(cfg, rng)?;
        Ok(Block { beams, chan })
    }
}

/// Per-trial outcome for one mode.
#[derive(Debug, Clone)]
pub struct ModeOutcome {
    /// `None` when an equalizer was singular.
    pub terms: Option<StreamTerms>,
    pub assignment: RelayAssignment,
    /// Largest selected TIL (alternate relaying only).
    pub til_last: Option<f64>,
    /// Mean TIL over all of `Π2` (alternate relaying only).
    pub til_mean: Option<f64>,
}

/// Runs selection and link evaluation of every mode on one block.
pub fn evaluate_block(
    block: &Block,
    cfg: &NetworkConfig,
    modes: &[Mode],
    fd_selection: FullDuplexSelection,
) -> Result<Vec<ModeOutcome>> {
    let mut alternate = None;
    if modes
        .iter()
        .any(|m| matches!(m, Mode::Alternate | Mode::NonAlternate))
    {
        let needs_two = modes.contains(&Mode::Alternate);
        alternate = Some(if needs_two {
            let o = select_with_metrics(&block.chan, &block.beams, cfg)?;
            let last = analysis::til_order_statistic(&o.assignment, &o.stage2)?;
            let mean = analysis::mean_selected_til(&o.assignment, &o.stage2)?;
            (o.assignment, Some((last, mean)))
        } else {
            let table = stage1_table(&block.chan, &block.beams);
            let pi1 = select_set(&table, &[], cfg.k, cfg.s)?;
            let idle = (0..cfg.n).filter(|n| !pi1.contains(*n)).collect();
            (
                RelayAssignment {
                    pi1,
                    pi2: None,
                    idle,
                },
                None,
            )
        });
    }
    let finish = |assignment: RelayAssignment, mode: Mode, til: Option<(f64, f64)>| {
        let terms = match stream_terms(&block.chan, &block.beams, &assignment, mode) {
            Ok(t) => Some(t),
            Err(Error::Singular { .. }) => None,
            Err(e) => return Err(e),
        };
        Ok(ModeOutcome {
            terms,
            assignment,
            til_last: til.map(|t| t.0),
            til_mean: til.map(|t| t.1),
        })
    };
    modes
        .iter()
        .map(|&mode| match mode {
            Mode::Alternate => {
                let (a, til) = alternate.clone().expect("selected above");
                finish(a, mode, til)
            }
            Mode::NonAlternate => {
                let (a, _) = alternate.clone().expect("selected above");
                let idle = (0..cfg.n).filter(|n| !a.pi1.contains(*n)).collect();
                let single = RelayAssignment {
                    pi1: a.pi1,
                    pi2: None,
                    idle,
                };
                finish(single, mode, None)
            }
            Mode::FullDuplex => {
                let a = select_full_duplex(&block.chan, &block.beams, cfg, fd_selection)?;
                finish(a, mode, None)
            }
        })
        .collect()
}

/// Operating point of one CSV row within a group.
#[derive(Debug, Clone, Copy)]
struct RowPoint {
    value: f64,
    snr: f64,
    rsinr: f64,
}

/// Sweep points that share a network structure and therefore trials.
struct Group {
    cfg: NetworkConfig,
    rows: Vec<RowPoint>,
}

struct TrialSummary {
    /// `[mode][row]`.
    rates: Vec<Vec<Option<f64>>>,
    til_last: Option<f64>,
    til_mean: Option<f64>,
}

fn run_trial(
    group: &Group,
    modes: &[Mode],
    fd_selection: FullDuplexSelection,
    seed: u64,
    index: usize,
) -> Result<TrialSummary> {
    let mut rng = trial_rng(seed, index);
    let block = Block::draw(&group.cfg, &mut rng)?;
    let outcomes = evaluate_block(&block, &group.cfg, modes, fd_selection)?;
    let mut til_last = None;
    let mut til_mean = None;
    let rates = outcomes
        .iter()
        .map(|o| {
            if o.til_last.is_some() && o.terms.is_some() {
                til_last = o.til_last;
                til_mean = o.til_mean;
            }
            group
                .rows
                .iter()
                .map(|p| {
                    o.terms
                        .as_ref()
                        .map(|t| t.rates(p.snr, p.rsinr, group.cfg.l_slots).sum_rate)
                })
                .collect()
        })
        .collect();
    Ok(TrialSummary {
        rates,
        til_last,
        til_mean,
    })
}

fn mean_stderr(values: &[f64]) -> (f64, f64) {
    if values.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

fn thread_pool(workers: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::InvalidArgument(format!("cannot start worker pool: {e}")))
}

fn run_group(
    pool: &rayon::ThreadPool,
    spec: &ExperimentSpec,
    group: &Group,
    modes: &[Mode],
) -> Result<(Vec<SweepRow>, Option<f64>)> {
    let trials: Vec<TrialSummary> = pool.install(|| {
        (0..spec.trials)
            .into_par_iter()
            .map(|i| run_trial(group, modes, spec.fd_selection, spec.seed, i))
            .collect::<Result<Vec<_>>>()
    })?;
    let til_means: Vec<f64> = trials.iter().filter_map(|t| t.til_mean).collect();
    let til_mean = (!til_means.is_empty()).then(|| mean_stderr(&til_means).0);
    let mut rows = Vec::new();
    for (r, point) in group.rows.iter().enumerate() {
        for (mi, &mode) in modes.iter().enumerate() {
            let rates: Vec<f64> = trials.iter().filter_map(|t| t.rates[mi][r]).collect();
            let (mean, stderr) = mean_stderr(&rates);
            let mean_til_last = (mode == Mode::Alternate).then(|| {
                let tils: Vec<f64> = trials.iter().filter_map(|t| t.til_last).collect();
                mean_stderr(&tils).0
            });
            rows.push(SweepRow {
                sweep_param: spec.kind.sweep_param().to_string(),
                value: point.value,
                mode,
                s: group.cfg.s,
                mean_sum_rate: mean,
                stderr,
                mean_til_last,
                discarded: spec.trials - rates.len(),
                trials: spec.trials,
                seed: spec.seed,
            });
        }
    }
    Ok((rows, til_mean))
}

/// Runs a sweep experiment and writes its CSV and JSON summary when `out` is
/// set. Lookup and dist-check have their own entry points.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<SweepResult> {
    spec.validate()?;
    let started = Instant::now();
    let pool = thread_pool(spec.workers)?;
    let base = spec.base;
    let point = |value: f64, snr: f64, rsinr: f64| RowPoint { value, snr, rsinr };
    let groups: Vec<Group> = match spec.kind {
        ExperimentKind::TilDecay | ExperimentKind::RateVsN => spec
            .sweep_n()?
            .into_iter()
            .map(|n| Group {
                cfg: NetworkConfig { n, ..base },
                rows: vec![point(n as f64, base.snr, base.rsinr)],
            })
            .collect(),
        ExperimentKind::RateVsSnr => vec![Group {
            cfg: base,
            rows: spec
                .sweep
                .iter()
                .map(|&db| point(db, db_to_linear(db), base.rsinr))
                .collect(),
        }],
        ExperimentKind::RateVsRsinr => vec![Group {
            cfg: base,
            rows: spec
                .sweep
                .iter()
                .map(|&db| point(db, base.snr, db_to_linear(db)))
                .collect(),
        }],
        ExperimentKind::Lookup | ExperimentKind::DistCheck => {
            return Err(Error::config(
                "kind",
                format!("{} is not a sweep experiment", spec.kind),
            ))
        }
    };
    let mut rows = Vec::new();
    let mut til_mean_all = Vec::new();
    for group in &groups {
        let (group_rows, til_mean) = run_group(&pool, spec, group, &spec.modes)?;
        if let (ExperimentKind::TilDecay, Some(t)) = (spec.kind, til_mean) {
            til_mean_all.push((group.cfg.n as f64, t));
        }
        rows.extend(group_rows);
    }
    let result = SweepResult {
        spec: spec.clone(),
        rows,
        til_mean_all,
        version: version_string(),
        wall_time_s: started.elapsed().as_secs_f64(),
    };
    if let Some(out) = &spec.out {
        write_sweep_csv(out, &result.rows)?;
        let mut summary = serde_json::to_value(&result).expect("serializable");
        if spec.kind == ExperimentKind::TilDecay {
            if let Ok(fit) = analysis::fit_decay(&result.til_points()) {
                summary["decay_fit"] = serde_json::to_value(fit).expect("serializable");
            }
        }
        write_json(&out.with_extension("json"), &summary)?;
    }
    Ok(result)
}

fn io_error(path: &Path) -> impl FnOnce(std::io::Error) -> Error + '_ {
    move |source| Error::Io {
        path: path.display().to_string(),
        source,
    }
}

fn csv_error(path: &Path) -> impl FnOnce(csv::Error) -> Error + '_ {
    move |e| Error::Io {
        path: path.display().to_string(),
        source: std::io::Error::other(e),
    }
}

fn write_records<const W: usize>(
    path: &Path,
    header: [&str; W],
    records: impl IntoIterator<Item = [String; W]>,
) -> Result<()> {
    let file = File::create(path).map_err(io_error(path))?;
    let mut writer = csv::Writer::from_writer(file);
    writer.write_record(header).map_err(csv_error(path))?;
    for r in records {
        writer.write_record(&r).map_err(csv_error(path))?;
    }
    writer.flush().map_err(io_error(path))
}

/// Writes rows in the sweep CSV schema.
pub fn write_sweep_csv(path: &Path, rows: &[SweepRow]) -> Result<()> {
    write_records(path, CSV_HEADER, rows.iter().map(SweepRow::record))
}

/// Reads a sweep CSV back, checking the header.
pub fn read_sweep_csv(path: &Path) -> Result<Vec<SweepRow>> {
    let mut reader = csv::Reader::from_path(path).map_err(csv_error(path))?;
    let header = reader.headers().map_err(csv_error(path))?.clone();
    if header.iter().ne(CSV_HEADER) {
        return Err(Error::InvalidArgument(format!(
            "{} does not have the sweep header",
            path.display()
        )));
    }
    let bad = |what: &str| Error::InvalidArgument(format!("{}: bad {what}", path.display()));
    let mut rows = Vec::new();
    for record in reader.records() {
        let r = record.map_err(csv_error(path))?;
        let num = |i: usize| r[i].parse::<f64>().map_err(|_| bad(CSV_HEADER[i]));
        let int = |i: usize| r[i].parse::<usize>().map_err(|_| bad(CSV_HEADER[i]));
        rows.push(SweepRow {
            sweep_param: r[0].to_string(),
            value: num(1)?,
            mode: r[2].parse()?,
            s: int(3)?,
            mean_sum_rate: num(4)?,
            stderr: num(5)?,
            mean_til_last: if r[6].is_empty() { None } else { Some(num(6)?) },
            discarded: int(7)?,
            trials: int(8)?,
            seed: r[9].parse().map_err(|_| bad("seed"))?,
        });
    }
    Ok(rows)
}

fn write_json(path: &Path, value: &serde_json::Value) -> Result<()> {
    let mut file = File::create(path).map_err(io_error(path))?;
    let text = serde_json::to_string_pretty(value).expect("serializable");
    writeln!(file, "{text}").map_err(io_error(path))
}

/// Best strategy of one `(N, snr)` cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LookupCell {
    pub n: usize,
    pub snr_db: f64,
    pub best: Strategy,
    pub t_max: f64,
    /// Mean sum rate of every strategy, in strategy order.
    pub rates: Vec<f64>,
}

/// snr at which the best strategy changes for a given `N`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegimeBoundary {
    pub n: usize,
    pub from: Strategy,
    pub to: Strategy,
    /// Midpoint between the last grid point of `from` and the first of `to`.
    pub snr_db: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LookupTable {
    pub strategies: Vec<Strategy>,
    pub cells: Vec<LookupCell>,
    pub boundaries: Vec<RegimeBoundary>,
    /// Per-strategy sweep rows, keyed by `N`.
    pub sweeps: Vec<(usize, Vec<SweepRow>)>,
}

impl LookupTable {
    pub fn cell(&self, n: usize, snr_db: f64) -> Option<&LookupCell> {
        self.cells.iter().find(|c| c.n == n && c.snr_db == snr_db)
    }

    /// Boundaries into `to` for relay count `n`.
    pub fn thresholds_into(&self, n: usize, to: Strategy) -> Vec<f64> {
        self.boundaries
            .iter()
            .filter(|b| b.n == n && b.to == to)
            .map(|b| b.snr_db)
            .collect()
    }
}

/// Evaluates every strategy on every `(N, snr)` cell and picks the one with
/// the largest mean sum rate. Ties go to the earlier strategy.
pub fn build_lookup_table(spec: &ExperimentSpec) -> Result<LookupTable> {
    let mut spec = spec.clone();
    spec.kind = ExperimentKind::Lookup;
    spec.validate()?;
    let pool = thread_pool(spec.workers)?;
    let mut cells = Vec::new();
    let mut boundaries = Vec::new();
    let mut sweeps = Vec::new();
    for n in spec.sweep_n()? {
        let mut rows = Vec::new();
        for st in &spec.strategies {
            let group = Group {
                cfg: NetworkConfig {
                    n,
                    s: st.s,
                    ..spec.base
                },
                rows: spec
                    .snr_grid_db
                    .iter()
                    .map(|&db| RowPoint {
                        value: db,
                        snr: db_to_linear(db),
                        rsinr: spec.base.rsinr,
                    })
                    .collect(),
            };
            rows.extend(run_group(&pool, &spec, &group, &[st.mode])?.0);
        }
        let per_strategy = spec.snr_grid_db.len();
        let mut previous: Option<(Strategy, f64)> = None;
        for (g, &db) in spec.snr_grid_db.iter().enumerate() {
            let rates: Vec<f64> = (0..spec.strategies.len())
                .map(|i| rows[i * per_strategy + g].mean_sum_rate)
                .collect();
            let mut best = 0;
            for (i, r) in rates.iter().enumerate() {
                if *r > rates[best] {
                    best = i;
                }
            }
            let strategy = spec.strategies[best];
            if let Some((prev, prev_db)) = previous {
                if prev != strategy {
                    boundaries.push(RegimeBoundary {
                        n,
                        from: prev,
                        to: strategy,
                        snr_db: 0.5 * (prev_db + db),
                    });
                }
            }
            previous = Some((strategy, db));
            cells.push(LookupCell {
                n,
                snr_db: db,
                best: strategy,
                t_max: rates[best],
                rates,
            });
        }
        sweeps.push((n, rows));
    }
    let table = LookupTable {
        strategies: spec.strategies.clone(),
        cells,
        boundaries,
        sweeps,
    };
    if let Some(out) = &spec.out {
        write_lookup(out, &spec, &table)?;
    }
    Ok(table)
}

fn write_lookup(out: &Path, spec: &ExperimentSpec, table: &LookupTable) -> Result<()> {
    write_records(
        out,
        LOOKUP_HEADER,
        table.cells.iter().map(|c| {
            [
                c.n.to_string(),
                c.snr_db.to_string(),
                c.best.to_string(),
                c.best.mode.to_string(),
                c.best.s.to_string(),
                c.t_max.to_string(),
            ]
        }),
    )?;
    for (n, rows) in &table.sweeps {
        let stem = out.file_stem().and_then(|s| s.to_str()).unwrap_or("lookup");
        write_sweep_csv(&out.with_file_name(format!("{stem}_N{n}.csv")), rows)?;
    }
    let summary = serde_json::json!({
        "spec": spec,
        "version": version_string(),
        "cells": table.cells,
        "boundaries": table.boundaries,
    });
    write_json(&out.with_extension("json"), &summary)
}

/// Result of comparing one metric's samples with its Gamma law.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistRow {
    pub metric: String,
    pub k: usize,
    pub s: usize,
    pub shape: u32,
    pub samples: usize,
    pub ks_distance: f64,
    pub seed: u64,
}

/// Samples both scheduling metrics of a uniformly random relay and slot. The
/// probe relay is kept out of `Π1`, so its stage-2 metric is the TIL it would
/// report as a candidate.
pub fn sample_metrics(cfg: &NetworkConfig, seed: u64, index: usize) -> Result<(f64, f64)> {
    let mut rng = trial_rng(seed, index);
    let block = Block::draw(cfg, &mut rng)?;
    let n = rng.random_range(0..cfg.n);
    let k = rng.random_range(0..cfg.k);
    let s = rng.random_range(0..cfg.s);
    let table = stage1_table(&block.chan, &block.beams);
    let pi1 = select_set(&table, &[n], cfg.k, cfg.s)?;
    let m1 = metric_stage1(&block.chan, &block.beams, n, k, s)?;
    Ok((m1, m1 + inter_relay_power(&block.chan, &pi1, n)))
}

/// Kolmogorov–Smirnov check of both metric distributions.
pub fn run_dist_check(spec: &ExperimentSpec) -> Result<Vec<DistRow>> {
    let mut spec = spec.clone();
    spec.kind = ExperimentKind::DistCheck;
    spec.validate()?;
    let cfg = spec.base;
    let pool = thread_pool(spec.workers)?;
    let samples: Vec<(f64, f64)> = pool.install(|| {
        (0..spec.trials)
            .into_par_iter()
            .map(|i| sample_metrics(&cfg, spec.seed, i))
            .collect::<Result<Vec<_>>>()
    })?;
    let shape = ShapeParams::new(cfg.k, cfg.s)?;
    let mut rows = Vec::new();
    for (metric, a, values) in [
        (
            "stage1",
            shape.a1,
            samples.iter().map(|p| p.0).collect::<Vec<_>>(),
        ),
        ("stage2", shape.a2, samples.iter().map(|p| p.1).collect()),
    ] {
        let ks = analysis::ks_distance(&values, |l| {
            analysis::cdf_metric(l, a).expect("metric values are non-negative")
        });
        rows.push(DistRow {
            metric: metric.to_string(),
            k: cfg.k,
            s: cfg.s,
            shape: a,
            samples: values.len(),
            ks_distance: ks,
            seed: spec.seed,
        });
    }
    if let Some(out) = &spec.out {
        write_records(
            out,
            DIST_HEADER,
            rows.iter().map(|r| {
                [
                    r.metric.clone(),
                    r.k.to_string(),
                    r.s.to_string(),
                    r.shape.to_string(),
                    r.samples.to_string(),
                    r.ks_distance.to_string(),
                    r.seed.to_string(),
                ]
            }),
        )?;
        let summary = serde_json::json!({
            "spec": spec,
            "version": version_string(),
            "rows": rows,
        });
        write_json(&out.with_extension("json"), &summary)?;
    }
    Ok(rows)
}
