//! Beamforming setup, scheduling metrics and distributed relay-set selection.
//!
//! Slots are the `(pair, stream)` combinations a relay can serve. They are
//! flattened as `k * S + s`, so ascending slot index is the lexicographic
//! `(k, s)` order used for tie-breaking.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::channel::{ChannelRealization, Mode, NetworkConfig};
use crate::linalg::{dot_t, norm_sqr, project_signal, random_unitary, split_spaces, ComplexMatrix};
use crate::{Error, Result};

/// Per-pair transmit beams and receive subspaces.
#[derive(Debug, Clone, PartialEq)]
pub struct BeamConfig {
    /// Random-beamforming unitary; column `t` is the beam of stream `t`.
    pub v: ComplexMatrix,
    /// Interference space announced by the destination, `M × (M − S)`.
    pub q: ComplexMatrix,
    /// Signal space `null(Q)`, `M × S`.
    pub u: ComplexMatrix,
}

/// Draws the beam configuration of every pair, pair 0 first.
pub fn make_beam_configs<R: Rng + ?Sized>(
    cfg: &NetworkConfig,
    rng: &mut R,
) -> Result<Vec<BeamConfig>> {
    cfg.validate(Mode::NonAlternate)?;
    (0..cfg.k)
        .map(|_| {
            let v = random_unitary(cfg.m, rng)?;
            let (q, u) = split_spaces(cfg.m, cfg.s, rng)?;
            Ok(BeamConfig { v, q, u })
        })
        .collect()
}

/// Scheduling metric values indexed by relay and slot.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricTable {
    relays: usize,
    pairs: usize,
    streams: usize,
    values: Vec<f64>,
}

impl MetricTable {
    /// Builds a table from relay-major values (`values[n * S·K + k * S + s]`).
    pub fn new(relays: usize, pairs: usize, streams: usize, values: Vec<f64>) -> Result<Self> {
        if values.len() != relays * pairs * streams {
            return Err(Error::InvalidDimension(format!(
                "metric table {relays}x{pairs}x{streams} needs {} values, got {}",
                relays * pairs * streams,
                values.len()
            )));
        }
        if let Some(bad) = values.iter().find(|v| !(v.is_finite() && **v >= 0.0)) {
            return Err(Error::InvalidArgument(format!(
                "metric values must be finite and non-negative, got {bad}"
            )));
        }
        Ok(MetricTable {
            relays,
            pairs,
            streams,
            values,
        })
    }

    pub fn relays(&self) -> usize {
        self.relays
    }

    pub fn pairs(&self) -> usize {
        self.pairs
    }

    pub fn streams(&self) -> usize {
        self.streams
    }

    pub fn slots(&self) -> usize {
        self.pairs * self.streams
    }

    pub fn get(&self, n: usize, k: usize, s: usize) -> f64 {
        self.by_slot(n, k * self.streams + s)
    }

    pub fn by_slot(&self, n: usize, slot: usize) -> f64 {
        self.values[n * self.slots() + slot]
    }

    pub fn row(&self, n: usize) -> &[f64] {
        &self.values[n * self.slots()..(n + 1) * self.slots()]
    }
}

/// One relay set: the relay serving each `(pair, stream)` slot.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RelaySet {
    streams: usize,
    relays: Vec<usize>,
}

impl RelaySet {
    pub fn new(streams: usize, relays: Vec<usize>) -> Result<Self> {
        if streams == 0 || !relays.len().is_multiple_of(streams) {
            return Err(Error::InvalidArgument(format!(
                "{} relays cannot cover slots of {streams} streams",
                relays.len()
            )));
        }
        let mut sorted = relays.clone();
        sorted.sort_unstable();
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidArgument("relay set is not injective".into()));
        }
        Ok(RelaySet { streams, relays })
    }

    pub fn streams(&self) -> usize {
        self.streams
    }

    pub fn pairs(&self) -> usize {
        self.relays.len() / self.streams
    }

    pub fn len(&self) -> usize {
        self.relays.len()
    }

    pub fn is_empty(&self) -> bool {
        self.relays.is_empty()
    }

    /// `π(k, s)`.
    pub fn relay(&self, k: usize, s: usize) -> usize {
        self.relays[k * self.streams + s]
    }

    /// Relay indices in slot order.
    pub fn as_slice(&self) -> &[usize] {
        &self.relays
    }

    pub fn contains(&self, n: usize) -> bool {
        self.relays.contains(&n)
    }
}

/// The selected relay sets of one block.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RelayAssignment {
    pub pi1: RelaySet,
    /// Present only for alternate relaying.
    pub pi2: Option<RelaySet>,
    /// Relays that stay silent for the whole block, ascending.
    pub idle: Vec<usize>,
}

impl RelayAssignment {
    fn build(relays: usize, pi1: RelaySet, pi2: Option<RelaySet>) -> Self {
        let idle = (0..relays)
            .filter(|&n| !pi1.contains(n) && !pi2.as_ref().is_some_and(|p| p.contains(n)))
            .collect();
        RelayAssignment { pi1, pi2, idle }
    }

    /// Checks that the assignment has the shape `mode` expects.
    pub fn check_mode(&self, mode: Mode) -> Result<()> {
        match (mode, &self.pi2) {
            (Mode::Alternate, Some(_)) => Ok(()),
            (Mode::NonAlternate | Mode::FullDuplex, None) => Ok(()),
            (Mode::Alternate, None) => Err(Error::InvalidArgument(
                "alternate relaying needs a second relay set".into(),
            )),
            (_, Some(_)) => Err(Error::InvalidArgument(format!(
                "mode {mode} uses a single relay set"
            ))),
        }
    }
}

/// Received beam gains and leakage of a single relay.
struct RelayProfile {
    /// `|v_j^(t)ᵀ h^(1)_{nj}|²` for `j < K`, `t < S`, slot-major.
    beam: Vec<f64>,
    /// `‖U_jᴴ h^(2)_{jn}‖²` for `j < K`.
    leak: Vec<f64>,
}

fn relay_profile(
    chan: &ChannelRealization,
    beams: &[BeamConfig],
    streams: usize,
    n: usize,
) -> RelayProfile {
    let mut beam = Vec::with_capacity(beams.len() * streams);
    let mut leak = Vec::with_capacity(beams.len());
    for (j, cfg) in beams.iter().enumerate() {
        let h = chan.hop1(n, j);
        for t in 0..streams {
            beam.push(dot_t(cfg.v.column(t), h).norm_sqr());
        }
        let proj =
            project_signal(&cfg.u, chan.hop2(j, n)).expect("beam and channel dimensions agree");
        leak.push(norm_sqr(&proj));
    }
    RelayProfile { beam, leak }
}

impl RelayProfile {
    fn stage1(&self, streams: usize, k: usize, s: usize) -> f64 {
        let pairs = self.leak.len();
        let mut total = 0.0;
        for t in (0..streams).filter(|&t| t != s) {
            total += self.beam[k * streams + t];
        }
        for j in (0..pairs).filter(|&j| j != k) {
            for t in 0..streams {
                total += self.beam[j * streams + t];
            }
        }
        for j in (0..pairs).filter(|&j| j != k) {
            total += self.leak[j];
        }
        total
    }
}

fn check_indices(
    chan: &ChannelRealization,
    beams: &[BeamConfig],
    n: usize,
    k: usize,
    s: usize,
) -> Result<usize> {
    if beams.len() != chan.pairs() {
        return Err(Error::InvalidArgument(format!(
            "{} beam configs for {} pairs",
            beams.len(),
            chan.pairs()
        )));
    }
    let streams = beams[0].u.cols();
    if n >= chan.relays() || k >= chan.pairs() || s >= streams {
        return Err(Error::InvalidArgument(format!(
            "index (n={n}, k={k}, s={s}) out of range for N={}, K={}, S={streams}",
            chan.relays(),
            chan.pairs()
        )));
    }
    Ok(streams)
}

/// First-stage scheduling metric of relay `n` for slot `(k, s)`: interference
/// received from the other beams of source `k`, from all beams of the other
/// sources, and the leakage the relay would cause in the other destinations'
/// signal spaces.
pub fn metric_stage1(
    chan: &ChannelRealization,
    beams: &[BeamConfig],
    n: usize,
    k: usize,
    s: usize,
) -> Result<f64> {
    let streams = check_indices(chan, beams, n, k, s)?;
    Ok(relay_profile(chan, beams, streams, n).stage1(streams, k, s))
}

/// Inter-relay interference a relay receives from (equivalently, by
/// reciprocity, causes at) the members of `set`.
pub fn inter_relay_power(chan: &ChannelRealization, set: &RelaySet, n: usize) -> f64 {
    set.as_slice()
        .iter()
        .map(|&m| chan.relay().gain(n, m))
        .sum()
}

/// Second-stage metric (total interference level) of candidate `n` given the
/// first relay set.
pub fn metric_stage2(
    chan: &ChannelRealization,
    beams: &[BeamConfig],
    pi1: &RelaySet,
    n: usize,
    k: usize,
    s: usize,
) -> Result<f64> {
    check_indices(chan, beams, n, k, s)?;
    if pi1.contains(n) {
        return Err(Error::InvalidArgument(format!(
            "relay {n} already belongs to the first set"
        )));
    }
    Ok(metric_stage1(chan, beams, n, k, s)? + inter_relay_power(chan, pi1, n))
}

/// Stage-1 metrics of every relay and slot.
pub fn stage1_table(chan: &ChannelRealization, beams: &[BeamConfig]) -> MetricTable {
    let streams = beams[0].u.cols();
    let pairs = beams.len();
    let mut values = Vec::with_capacity(chan.relays() * pairs * streams);
    for n in 0..chan.relays() {
        let profile = relay_profile(chan, beams, streams, n);
        for k in 0..pairs {
            for s in 0..streams {
                values.push(profile.stage1(streams, k, s));
            }
        }
    }
    MetricTable::new(chan.relays(), pairs, streams, values).expect("gains are finite")
}

/// Stage-2 metrics derived from the stage-1 table. Rows of relays in `pi1`
/// are filled too (their own diagonal term is zero) but such relays are never
/// candidates.
pub fn stage2_table(
    chan: &ChannelRealization,
    stage1: &MetricTable,
    pi1: &RelaySet,
) -> MetricTable {
    let slots = stage1.slots();
    let mut values = stage1.values.clone();
    for n in 0..stage1.relays() {
        let extra = inter_relay_power(chan, pi1, n);
        for v in &mut values[n * slots..(n + 1) * slots] {
            *v += extra;
        }
    }
    MetricTable::new(stage1.relays, stage1.pairs, stage1.streams, values).expect("gains are finite")
}

/// Greedy emulation of the timer protocol. `penalty[n]` is added to every
/// metric of relay `n`; `on_pick` may update it after each selection.
fn greedy_select(
    metrics: &MetricTable,
    excluded: &[usize],
    mut on_pick: impl FnMut(usize, &mut [f64]),
) -> Result<RelaySet> {
    let relays = metrics.relays();
    let slots = metrics.slots();
    let mut blocked = vec![false; relays];
    for &n in excluded {
        if n >= relays {
            return Err(Error::InvalidArgument(format!(
                "excluded relay {n} out of range"
            )));
        }
        blocked[n] = true;
    }
    let available = blocked.iter().filter(|b| !**b).count();
    if available < slots {
        return Err(Error::InfeasibleSelection {
            needed: slots,
            available,
        });
    }

    let mut penalty = vec![0.0; relays];
    let mut reserved = vec![false; slots];
    let mut chosen = vec![usize::MAX; slots];
    for _ in 0..slots {
        let mut best: Option<(f64, usize, usize)> = None;
        for n in (0..relays).filter(|&n| !blocked[n]) {
            let row = metrics.row(n);
            for c in (0..slots).filter(|&c| !reserved[c]) {
                let value = row[c] + penalty[n];
                if best.is_none_or(|(b, _, _)| value < b) {
                    best = Some((value, n, c));
                }
            }
        }
        let (_, n, c) = best.expect("enough candidates were checked above");
        chosen[c] = n;
        reserved[c] = true;
        blocked[n] = true;
        on_pick(n, &mut penalty);
    }
    RelaySet::new(metrics.streams(), chosen)
}

/// Emulates the distributed timer-based selection of one relay set.
///
/// Every candidate runs one timer per slot, proportional to its metric. The
/// earliest expiry claims its slot; the winner clears its other timers and
/// every relay clears its timer for the claimed slot. With continuous metrics
/// this is exactly a greedy assignment in ascending metric order. Exact ties
/// go to the lower relay index, then the lower slot.
pub fn select_set(
    metrics: &MetricTable,
    excluded: &[usize],
    pairs: usize,
    streams: usize,
) -> Result<RelaySet> {
    if metrics.pairs() != pairs || metrics.streams() != streams {
        return Err(Error::InvalidArgument(format!(
            "metric table is {}x{} slots, expected {pairs}x{streams}",
            metrics.pairs(),
            metrics.streams()
        )));
    }
    greedy_select(metrics, excluded, |_, _| {})
}

/// Metric tables alongside the selected sets.
#[derive(Debug, Clone)]
pub struct SelectionOutcome {
    pub assignment: RelayAssignment,
    pub stage1: MetricTable,
    pub stage2: MetricTable,
}

/// Selects both relay sets for alternate relaying and keeps the metric tables.
pub fn select_with_metrics(
    chan: &ChannelRealization,
    beams: &[BeamConfig],
    cfg: &NetworkConfig,
) -> Result<SelectionOutcome> {
    if cfg.n < 2 * cfg.sk() {
        return Err(Error::InfeasibleSelection {
            needed: 2 * cfg.sk(),
            available: cfg.n,
        });
    }
    let stage1 = stage1_table(chan, beams);
    let pi1 = select_set(&stage1, &[], cfg.k, cfg.s)?;
    let stage2 = stage2_table(chan, &stage1, &pi1);
    let pi2 = select_set(&stage2, pi1.as_slice(), cfg.k, cfg.s)?;
    Ok(SelectionOutcome {
        assignment: RelayAssignment::build(cfg.n, pi1, Some(pi2)),
        stage1,
        stage2,
    })
}

/// Selects `Π1` on stage-1 metrics, then `Π2` among the remaining relays on
/// the total interference level.
pub fn select_both_sets(
    chan: &ChannelRealization,
    beams: &[BeamConfig],
    cfg: &NetworkConfig,
) -> Result<RelayAssignment> {
    select_with_metrics(chan, beams, cfg).map(|o| o.assignment)
}

/// Selects the single relay set used without alternate relaying.
pub fn select_single_set(
    chan: &ChannelRealization,
    beams: &[BeamConfig],
    cfg: &NetworkConfig,
) -> Result<RelayAssignment> {
    let stage1 = stage1_table(chan, beams);
    let pi1 = select_set(&stage1, &[], cfg.k, cfg.s)?;
    Ok(RelayAssignment::build(cfg.n, pi1, None))
}

/// How the full-duplex benchmark picks its relays.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FullDuplexSelection {
    /// Stage-1 metric plus the inter-relay power from relays already picked,
    /// so each pick also limits the interference it exchanges with earlier
    /// picks (reciprocal channel).
    #[default]
    InterRelayAware,
    /// Stage-1 metric only.
    Stage1,
}

impl std::str::FromStr for FullDuplexSelection {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "inter-relay-aware" | "aware" => Ok(FullDuplexSelection::InterRelayAware),
            "stage1" => Ok(FullDuplexSelection::Stage1),
            other => Err(Error::config(
                "fd_selection",
                format!("unknown policy `{other}` (expected `aware` or `stage1`)"),
            )),
        }
    }
}

/// Selects the `SK` full-duplex relays.
pub fn select_full_duplex(
    chan: &ChannelRealization,
    beams: &[BeamConfig],
    cfg: &NetworkConfig,
    policy: FullDuplexSelection,
) -> Result<RelayAssignment> {
    let stage1 = stage1_table(chan, beams);
    let set = match policy {
        FullDuplexSelection::Stage1 => select_set(&stage1, &[], cfg.k, cfg.s)?,
        FullDuplexSelection::InterRelayAware => {
            let relay = chan.relay();
            greedy_select(&stage1, &[], |picked, penalty| {
                for (n, p) in penalty.iter_mut().enumerate() {
                    *p += relay.gain(n, picked);
                }
            })?
        }
    };
    Ok(RelayAssignment::build(cfg.n, set, None))
}

/// Bits exchanged by the RTS messages of both selection rounds,
/// `2·SK·⌈log₂ SK⌉`.
pub fn signaling_overhead_bits(k: usize, s: usize) -> u64 {
    let sk = (k * s) as u64;
    if sk <= 1 {
        return 0;
    }
    let ceil_log2 = u64::from(64 - (sk - 1).leading_zeros());
    2 * sk * ceil_log2
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::draw_block;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn cfg(k: usize, n: usize, s: usize) -> NetworkConfig {
        NetworkConfig {
            k,
            n,
            m: 4,
            s,
            ..NetworkConfig::default()
        }
    }

    fn table(rows: &[&[f64]], pairs: usize, streams: usize) -> MetricTable {
        MetricTable::new(rows.len(), pairs, streams, rows.concat()).unwrap()
    }

    #[test]
    fn beam_config_shapes() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let beams = make_beam_configs(&cfg(2, 10, 2), &mut rng).unwrap();
        assert_eq!(beams.len(), 2);
        for b in &beams {
            assert_eq!((b.v.rows(), b.v.cols()), (4, 4));
            assert_eq!((b.q.rows(), b.q.cols()), (4, 2));
            assert_eq!((b.u.rows(), b.u.cols()), (4, 2));
            assert!(b.v.unitarity_error() < 1e-12);
        }
    }

    #[test]
    fn full_stream_count_has_empty_interference_space() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let beams = make_beam_configs(&cfg(2, 20, 4), &mut rng).unwrap();
        assert_eq!(beams[0].q.cols(), 0);
        assert!(beams[0].u.unitarity_error() < 1e-12);
    }

    #[test]
    fn beam_configs_are_reproducible() {
        let a = make_beam_configs(&cfg(2, 10, 1), &mut ChaCha8Rng::seed_from_u64(3)).unwrap();
        let b = make_beam_configs(&cfg(2, 10, 1), &mut ChaCha8Rng::seed_from_u64(3)).unwrap();
        assert_eq!(a, b);
        assert_ne!(a[0], a[1]);
    }

    #[test]
    fn zero_channel_metrics_vanish() {
        let config = cfg(2, 6, 1);
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let beams = make_beam_configs(&config, &mut rng).unwrap();
        let chan = ChannelRealization::zeros(2, 6, 4);
        assert_eq!(metric_stage1(&chan, &beams, 0, 1, 0).unwrap(), 0.0);
        let pi1 = RelaySet::new(1, vec![0, 1]).unwrap();
        assert_eq!(metric_stage2(&chan, &beams, &pi1, 3, 1, 0).unwrap(), 0.0);
    }

    #[test]
    fn single_stream_single_pair_metric_is_zero() {
        let config = cfg(1, 5, 1);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let beams = make_beam_configs(&config, &mut rng).unwrap();
        let chan = draw_block(&config, &mut rng).unwrap();
        for n in 0..5 {
            assert_eq!(metric_stage1(&chan, &beams, n, 0, 0).unwrap(), 0.0);
        }
    }

    #[test]
    fn metric_index_errors() {
        let config = cfg(2, 6, 1);
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let beams = make_beam_configs(&config, &mut rng).unwrap();
        let chan = draw_block(&config, &mut rng).unwrap();
        assert!(metric_stage1(&chan, &beams, 6, 0, 0).is_err());
        assert!(metric_stage1(&chan, &beams, 0, 2, 0).is_err());
        assert!(metric_stage1(&chan, &beams, 0, 0, 1).is_err());
        let pi1 = RelaySet::new(1, vec![0, 1]).unwrap();
        assert!(metric_stage2(&chan, &beams, &pi1, 1, 0, 0).is_err());
    }

    #[test]
    fn stage2_dominates_stage1_and_tables_agree() {
        let config = cfg(2, 12, 2);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let beams = make_beam_configs(&config, &mut rng).unwrap();
        let chan = draw_block(&config, &mut rng).unwrap();
        let outcome = select_with_metrics(&chan, &beams, &config).unwrap();
        let pi1 = &outcome.assignment.pi1;
        for n in (0..12).filter(|n| !pi1.contains(*n)) {
            for k in 0..2 {
                for s in 0..2 {
                    let m1 = metric_stage1(&chan, &beams, n, k, s).unwrap();
                    let m2 = metric_stage2(&chan, &beams, pi1, n, k, s).unwrap();
                    assert!(m2 >= m1);
                    assert!((outcome.stage1.get(n, k, s) - m1).abs() < 1e-12);
                    assert!((outcome.stage2.get(n, k, s) - m2).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn stage1_mean_matches_term_count() {
        // K=2, S=1: 2SK−S−1 = 2 unit-mean exponential terms.
        let config = cfg(2, 4, 1);
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let draws = 25_000;
        let mut sum = 0.0;
        for _ in 0..draws {
            let beams = make_beam_configs(&config, &mut rng).unwrap();
            let chan = draw_block(&config, &mut rng).unwrap();
            let t = stage1_table(&chan, &beams);
            sum += (0..4).map(|n| t.get(n, 0, 0)).sum::<f64>();
        }
        let mean = sum / (4 * draws) as f64;
        assert!((mean - 2.0).abs() < 0.05, "mean {mean}");
    }

    #[test]
    fn hand_traced_greedy() {
        let t = table(&[&[0.5, 0.9], &[0.1, 0.8], &[0.7, 0.2]], 1, 2);
        let set = select_set(&t, &[], 1, 2).unwrap();
        assert_eq!(set.relay(0, 0), 1);
        assert_eq!(set.relay(0, 1), 2);
    }

    #[test]
    fn exact_fit_uses_every_relay() {
        let t = table(
            &[
                &[0.3, 0.2, 0.7, 0.4],
                &[0.1, 0.5, 0.2, 0.3],
                &[0.4, 0.6, 0.1, 0.8],
                &[0.9, 0.05, 0.6, 0.2],
            ],
            2,
            2,
        );
        let set = select_set(&t, &[], 2, 2).unwrap();
        let mut used = set.as_slice().to_vec();
        used.sort_unstable();
        assert_eq!(used, vec![0, 1, 2, 3]);
    }

    #[test]
    fn ties_follow_index_order() {
        let t = table(
            &[&[1.0; 4], &[1.0; 4], &[1.0; 4], &[1.0; 4], &[1.0; 4]],
            2,
            2,
        );
        let set = select_set(&t, &[], 2, 2).unwrap();
        assert_eq!(set.as_slice(), &[0, 1, 2, 3]);
    }

    #[test]
    fn exclusions_and_infeasibility() {
        let t = table(&[&[0.1], &[0.2], &[0.3]], 1, 1);
        assert_eq!(select_set(&t, &[0], 1, 1).unwrap().as_slice(), &[1]);
        assert!(matches!(
            select_set(&t, &[0, 1, 2], 1, 1),
            Err(Error::InfeasibleSelection {
                needed: 1,
                available: 0
            })
        ));
    }

    #[test]
    fn both_sets_need_two_sk_relays() {
        let config = cfg(2, 4, 1);
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let beams = make_beam_configs(&config, &mut rng).unwrap();
        let chan = draw_block(&config, &mut rng).unwrap();
        let a = select_both_sets(&chan, &beams, &config).unwrap();
        assert!(a.idle.is_empty());

        let small = cfg(2, 3, 1);
        let chan = draw_block(&small, &mut rng).unwrap();
        assert!(matches!(
            select_both_sets(&chan, &beams, &small),
            Err(Error::InfeasibleSelection { .. })
        ));
    }

    #[test]
    fn mode_shape_checks() {
        let pi1 = RelaySet::new(1, vec![0, 1]).unwrap();
        let single = RelayAssignment::build(4, pi1.clone(), None);
        assert!(single.check_mode(Mode::NonAlternate).is_ok());
        assert!(single.check_mode(Mode::Alternate).is_err());
        let both = RelayAssignment::build(4, pi1, Some(RelaySet::new(1, vec![2, 3]).unwrap()));
        assert!(both.check_mode(Mode::FullDuplex).is_err());
        assert!(both.idle.is_empty());
    }

    #[test]
    fn overhead_bits() {
        assert_eq!(signaling_overhead_bits(2, 1), 4);
        assert_eq!(signaling_overhead_bits(1, 1), 0);
        assert_eq!(signaling_overhead_bits(2, 2), 16);
        assert_eq!(signaling_overhead_bits(3, 1), 12);
        assert_eq!(signaling_overhead_bits(3, 3), 72);
    }

    #[test]
    fn full_duplex_policies_pick_sk_relays() {
        let config = cfg(2, 30, 1);
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let beams = make_beam_configs(&config, &mut rng).unwrap();
        let chan = draw_block(&config, &mut rng).unwrap();
        for policy in [
            FullDuplexSelection::Stage1,
            FullDuplexSelection::InterRelayAware,
        ] {
            let a = select_full_duplex(&chan, &beams, &config, policy).unwrap();
            assert_eq!(a.pi1.len(), 2);
            assert!(a.pi2.is_none());
            assert_eq!(a.idle.len(), 28);
        }
        // With the relay channel zeroed both policies coincide.
        let quiet = chan.with_zero_relay();
        assert_eq!(
            select_full_duplex(&quiet, &beams, &config, FullDuplexSelection::Stage1).unwrap(),
            select_full_duplex(
                &quiet,
                &beams,
                &config,
                FullDuplexSelection::InterRelayAware
            )
            .unwrap()
        );
    }
}
