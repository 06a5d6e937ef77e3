//! Hop SINRs, the zero-forcing equalizer, achievable rates and a
//! symbol-level slot simulator.
//!
//! Powers are normalised to unit noise, so the transmit power of every node is
//! `snr`.

use num_complex::Complex64;
use rand::RngCore;
use serde::{Deserialize, Serialize};

use crate::channel::{ChannelRealization, Mode, NetworkConfig};
use crate::linalg::{complex_normal, dot_h, dot_t, invert_small, project_signal, ComplexMatrix};
use crate::selection::{BeamConfig, RelayAssignment, RelaySet};
use crate::{Error, Result};

/// Which of the two relay sets a quantity refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum RelaySetId {
    First,
    Second,
}

impl RelaySetId {
    pub fn index(self) -> usize {
        match self {
            RelaySetId::First => 0,
            RelaySetId::Second => 1,
        }
    }

    pub fn other(self) -> RelaySetId {
        match self {
            RelaySetId::First => RelaySetId::Second,
            RelaySetId::Second => RelaySetId::First,
        }
    }
}

fn relay_set(assignment: &RelayAssignment, b: RelaySetId) -> Result<&RelaySet> {
    match b {
        RelaySetId::First => Ok(&assignment.pi1),
        RelaySetId::Second => assignment
            .pi2
            .as_ref()
            .ok_or_else(|| Error::InvalidArgument("assignment has no second relay set".into())),
    }
}

/// Hop-1 received powers at relay `π_b(k, s)`, each in units of `snr`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Hop1Terms {
    /// `|v_k^(s)ᵀ h_{nk}|²`.
    pub signal: f64,
    /// Other beams of the same source.
    pub inter_beam: f64,
    /// All beams of the other sources.
    pub inter_source: f64,
    /// Relays transmitting while this one listens.
    pub inter_relay: f64,
}

impl Hop1Terms {
    /// SINR for transmit power `snr` and additional noise-relative
    /// interference `extra` (residual self-interference).
    pub fn sinr(&self, snr: f64, extra: f64) -> f64 {
        snr * self.signal
            / (1.0 + extra + snr * (self.inter_beam + self.inter_source + self.inter_relay))
    }
}

/// Hop-2 quantities of stream `(k, s)` after zero-forcing.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Hop2Terms {
    /// `‖f_{k,s}‖²`, the noise enhancement.
    pub noise_gain: f64,
    /// `Σ_{j≠k,t} |f_{k,s}ᴴ U_kᴴ h_{k,π_b(j,t)}|²`.
    pub leakage: f64,
}

impl Hop2Terms {
    pub fn sinr(&self, snr: f64) -> f64 {
        snr / (self.noise_gain + snr * self.leakage)
    }
}

fn check_mode(assignment: &RelayAssignment, mode: Mode) -> Result<()> {
    assignment.check_mode(mode)
}

/// Hop-1 term decomposition at the relay serving `(k, s)` in set `b`.
pub fn hop1_terms(
    chan: &ChannelRealization,
    beams: &[BeamConfig],
    assignment: &RelayAssignment,
    mode: Mode,
    b: RelaySetId,
    k: usize,
    s: usize,
) -> Result<Hop1Terms> {
    check_mode(assignment, mode)?;
    let set = relay_set(assignment, b)?;
    if k >= set.pairs() || s >= set.streams() {
        return Err(Error::InvalidArgument(format!(
            "stream ({k}, {s}) out of range"
        )));
    }
    let n = set.relay(k, s);
    let mut terms = Hop1Terms::default();
    for (j, cfg) in beams.iter().enumerate() {
        let h = chan.hop1(n, j);
        for t in 0..set.streams() {
            let g = dot_t(cfg.v.column(t), h).norm_sqr();
            if j == k && t == s {
                terms.signal = g;
            } else if j == k {
                terms.inter_beam += g;
            } else {
                terms.inter_source += g;
            }
        }
    }
    let relay = chan.relay();
    terms.inter_relay = match mode {
        Mode::Alternate => {
            let other = relay_set(assignment, b.other())?;
            other.as_slice().iter().map(|&m| relay.gain(n, m)).sum()
        }
        Mode::NonAlternate => 0.0,
        Mode::FullDuplex => set
            .as_slice()
            .iter()
            .filter(|&&m| m != n)
            .map(|&m| relay.gain(n, m))
            .sum(),
    };
    Ok(terms)
}

/// Hop-1 SINR at relay `π_b(k, s)`. `rsinr` (linear) only enters full duplex.
#[allow(clippy::too_many_arguments)]
pub fn sinr_hop1(
    chan: &ChannelRealization,
    beams: &[BeamConfig],
    assignment: &RelayAssignment,
    mode: Mode,
    b: RelaySetId,
    k: usize,
    s: usize,
    snr: f64,
    rsinr: f64,
) -> Result<f64> {
    let terms = hop1_terms(chan, beams, assignment, mode, b, k, s)?;
    Ok(terms.sinr(snr, residual(mode, rsinr)))
}

fn residual(mode: Mode, rsinr: f64) -> f64 {
    if mode == Mode::FullDuplex {
        rsinr
    } else {
        0.0
    }
}

/// Zero-forcing equalizer `F_k = (A⁻¹)ᴴ` with `A = [U_kᴴ h_{k,π(k,1)} … U_kᴴ h_{k,π(k,S)}]`.
pub fn zf_equalizer(
    u: &ComplexMatrix,
    chan: &ChannelRealization,
    set: &RelaySet,
    k: usize,
) -> Result<ComplexMatrix> {
    let columns = effective_columns(u, chan, set, k)?;
    let a = ComplexMatrix::from_columns(u.cols(), &columns)?;
    Ok(invert_small(&a)?.adjoint())
}

fn effective_columns(
    u: &ComplexMatrix,
    chan: &ChannelRealization,
    set: &RelaySet,
    k: usize,
) -> Result<Vec<Vec<Complex64>>> {
    if u.cols() != set.streams() {
        return Err(Error::InvalidDimension(format!(
            "signal space has {} columns for {} streams",
            u.cols(),
            set.streams()
        )));
    }
    (0..set.streams())
        .map(|s| project_signal(u, chan.hop2(k, set.relay(k, s))))
        .collect()
}

/// Hop-2 quantities of stream `(k, s)` given its equalizer.
pub fn hop2_terms(
    u: &ComplexMatrix,
    f: &ComplexMatrix,
    chan: &ChannelRealization,
    set: &RelaySet,
    k: usize,
    s: usize,
) -> Result<Hop2Terms> {
    let fs = f.column(s);
    let mut leakage = 0.0;
    for j in (0..set.pairs()).filter(|&j| j != k) {
        for t in 0..set.streams() {
            let proj = project_signal(u, chan.hop2(k, set.relay(j, t)))?;
            leakage += dot_h(fs, &proj).norm_sqr();
        }
    }
    Ok(Hop2Terms {
        noise_gain: fs.iter().map(|z| z.norm_sqr()).sum(),
        leakage,
    })
}

/// Effective hop-2 SINR of stream `(k, s)` at destination `k`.
pub fn sinr_hop2(
    u: &ComplexMatrix,
    f: &ComplexMatrix,
    chan: &ChannelRealization,
    set: &RelaySet,
    k: usize,
    s: usize,
    snr: f64,
) -> Result<f64> {
    Ok(hop2_terms(u, f, chan, set, k, s)?.sinr(snr))
}

/// Per-stream SINRs, indexed `[set][k * S + s]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HopSinrs {
    pub sinr1: Vec<Vec<f64>>,
    pub sinr2: Vec<Vec<f64>>,
}

/// Rates of one block.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateReport {
    pub mode: Mode,
    /// Bits per slot for each stream, indexed `k * S + s`.
    pub per_stream: Vec<f64>,
    pub sum_rate: f64,
    pub snr: f64,
    pub l_slots: usize,
}

/// Channel-dependent terms of every active stream. SINRs and rates for any
/// `snr` and `rsinr` follow without touching the channel again, because
/// selection does not depend on either.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StreamTerms {
    pub mode: Mode,
    pub pairs: usize,
    pub streams: usize,
    pub hop1: Vec<Vec<Hop1Terms>>,
    pub hop2: Vec<Vec<Hop2Terms>>,
}

/// Computes the terms of every stream in every active set. Fails with
/// [`Error::Singular`] when an equalizer cannot be formed.
pub fn stream_terms(
    chan: &ChannelRealization,
    beams: &[BeamConfig],
    assignment: &RelayAssignment,
    mode: Mode,
) -> Result<StreamTerms> {
    check_mode(assignment, mode)?;
    let pairs = assignment.pi1.pairs();
    let streams = assignment.pi1.streams();
    let sets: &[RelaySetId] = match mode {
        Mode::Alternate => &[RelaySetId::First, RelaySetId::Second],
        _ => &[RelaySetId::First],
    };
    let mut hop1 = Vec::with_capacity(sets.len());
    let mut hop2 = Vec::with_capacity(sets.len());
    for &b in sets {
        let set = relay_set(assignment, b)?;
        let mut h1 = Vec::with_capacity(pairs * streams);
        let mut h2 = Vec::with_capacity(pairs * streams);
        for k in 0..pairs {
            let u = &beams[k].u;
            let f = zf_equalizer(u, chan, set, k)?;
            for s in 0..streams {
                h1.push(hop1_terms(chan, beams, assignment, mode, b, k, s)?);
                h2.push(hop2_terms(u, &f, chan, set, k, s)?);
            }
        }
        hop1.push(h1);
        hop2.push(h2);
    }
    Ok(StreamTerms {
        mode,
        pairs,
        streams,
        hop1,
        hop2,
    })
}

impl StreamTerms {
    pub fn sinrs(&self, snr: f64, rsinr: f64) -> HopSinrs {
        let extra = residual(self.mode, rsinr);
        HopSinrs {
            sinr1: self
                .hop1
                .iter()
                .map(|set| set.iter().map(|t| t.sinr(snr, extra)).collect())
                .collect(),
            sinr2: self
                .hop2
                .iter()
                .map(|set| set.iter().map(|t| t.sinr(snr)).collect())
                .collect(),
        }
    }

    pub fn rates(&self, snr: f64, rsinr: f64, l_slots: usize) -> RateReport {
        let sinrs = self.sinrs(snr, rsinr);
        let slots = self.pairs * self.streams;
        let per_stream: Vec<f64> = (0..slots)
            .map(|c| {
                let capacity = |b: usize| (1.0 + sinrs.sinr1[b][c].min(sinrs.sinr2[b][c])).log2();
                match self.mode {
                    Mode::Alternate => {
                        let prelog = (l_slots as f64 - 1.0) / l_slots as f64;
                        prelog * 0.5 * (capacity(0) + capacity(1))
                    }
                    Mode::NonAlternate => 0.5 * capacity(0),
                    Mode::FullDuplex => capacity(0),
                }
            })
            .collect();
        RateReport {
            mode: self.mode,
            sum_rate: per_stream.iter().sum(),
            per_stream,
            snr,
            l_slots,
        }
    }
}

/// Sum rate of one block at the operating point in `cfg`.
pub fn sum_rate(
    chan: &ChannelRealization,
    beams: &[BeamConfig],
    assignment: &RelayAssignment,
    cfg: &NetworkConfig,
    mode: Mode,
) -> Result<RateReport> {
    Ok(stream_terms(chan, beams, assignment, mode)?.rates(cfg.snr, cfg.rsinr, cfg.l_slots))
}

/// Slot parity within a block. Odd slots feed `Π1` and drain `Π2`; even slots
/// do the reverse.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SlotParity {
    Odd,
    Even,
}

/// Symbols sent in one slot, indexed `[k][s]`.
#[derive(Debug, Clone, PartialEq)]
pub struct SlotSymbols {
    /// Symbol of stream `(k, s)` at source `k`.
    pub source: Vec<Vec<Complex64>>,
    /// Symbol forwarded by the transmitting relay that serves `(k, s)`.
    pub relay: Vec<Vec<Complex64>>,
}

/// Received signal at a listening relay, split by origin.
#[derive(Debug, Clone, PartialEq)]
pub struct RelayReception {
    pub relay: usize,
    pub pair: usize,
    pub stream: usize,
    pub desired: Complex64,
    pub inter_beam: Vec<Complex64>,
    pub inter_source: Vec<Complex64>,
    pub inter_relay: Vec<Complex64>,
    /// Thermal noise plus residual self-interference.
    pub noise: Complex64,
}

impl RelayReception {
    pub fn total(&self) -> Complex64 {
        self.desired
            + self.inter_beam.iter().sum::<Complex64>()
            + self.inter_source.iter().sum::<Complex64>()
            + self.inter_relay.iter().sum::<Complex64>()
            + self.noise
    }
}

/// Post-processed destination output `r_{k,s}`, split by origin.
#[derive(Debug, Clone, PartialEq)]
pub struct DestinationOutput {
    pub pair: usize,
    pub stream: usize,
    pub desired: Complex64,
    /// Residual intra-pair streams after zero-forcing.
    pub inter_stream: Vec<Complex64>,
    pub inter_pair: Vec<Complex64>,
    pub noise: Complex64,
}

impl DestinationOutput {
    pub fn total(&self) -> Complex64 {
        self.desired
            + self.inter_stream.iter().sum::<Complex64>()
            + self.inter_pair.iter().sum::<Complex64>()
            + self.noise
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct SlotOutput {
    pub relays: Vec<RelayReception>,
    pub destinations: Vec<DestinationOutput>,
}

/// Parameters of [`simulate_slot`] besides the network state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlotParams {
    pub mode: Mode,
    pub parity: SlotParity,
    pub snr: f64,
    pub rsinr: f64,
}

/// Simulates one data slot at symbol level: which nodes transmit follows the
/// mode and parity, relays receive per-beam superpositions and destinations
/// apply `F_kᴴ U_kᴴ` to their antenna outputs. Without a noise stream every
/// noise sample is zero.
pub fn simulate_slot(
    chan: &ChannelRealization,
    beams: &[BeamConfig],
    assignment: &RelayAssignment,
    symbols: &SlotSymbols,
    params: SlotParams,
    mut noise: Option<&mut dyn RngCore>,
) -> Result<SlotOutput> {
    check_mode(assignment, params.mode)?;
    let pairs = assignment.pi1.pairs();
    let streams = assignment.pi1.streams();
    let shape_ok =
        |v: &Vec<Vec<Complex64>>| v.len() == pairs && v.iter().all(|r| r.len() == streams);
    if !shape_ok(&symbols.source) || !shape_ok(&symbols.relay) {
        return Err(Error::InvalidDimension(format!(
            "slot symbols must be {pairs}x{streams}"
        )));
    }
    let amp = params.snr.sqrt();
    let (rx, tx) = match (params.mode, params.parity) {
        (Mode::Alternate, SlotParity::Odd) => (Some(RelaySetId::First), Some(RelaySetId::Second)),
        (Mode::Alternate, SlotParity::Even) => (Some(RelaySetId::Second), Some(RelaySetId::First)),
        (Mode::NonAlternate, SlotParity::Odd) => (Some(RelaySetId::First), None),
        (Mode::NonAlternate, SlotParity::Even) => (None, Some(RelaySetId::First)),
        (Mode::FullDuplex, _) => (Some(RelaySetId::First), Some(RelaySetId::First)),
    };
    let mut draw = |variance: f64| match noise.as_deref_mut() {
        Some(rng) if variance > 0.0 => complex_normal(rng) * variance.sqrt(),
        _ => Complex64::new(0.0, 0.0),
    };

    let mut out = SlotOutput::default();
    if let Some(b) = rx {
        let set = relay_set(assignment, b)?;
        let talkers = tx.map(|t| relay_set(assignment, t)).transpose()?;
        for k in 0..pairs {
            for s in 0..streams {
                let n = set.relay(k, s);
                let mut rec = RelayReception {
                    relay: n,
                    pair: k,
                    stream: s,
                    desired: Complex64::new(0.0, 0.0),
                    inter_beam: Vec::new(),
                    inter_source: Vec::new(),
                    inter_relay: Vec::new(),
                    noise: Complex64::new(0.0, 0.0),
                };
                for (j, cfg) in beams.iter().enumerate() {
                    let h = chan.hop1(n, j);
                    for t in 0..streams {
                        let y = amp * dot_t(cfg.v.column(t), h) * symbols.source[j][t];
                        if j == k && t == s {
                            rec.desired = y;
                        } else if j == k {
                            rec.inter_beam.push(y);
                        } else {
                            rec.inter_source.push(y);
                        }
                    }
                }
                if let Some(talkers) = talkers {
                    for j in 0..pairs {
                        for t in 0..streams {
                            let m = talkers.relay(j, t);
                            if m != n {
                                rec.inter_relay
                                    .push(amp * chan.relay().get(n, m) * symbols.relay[j][t]);
                            }
                        }
                    }
                }
                rec.noise = draw(1.0) + draw(residual(params.mode, params.rsinr));
                out.relays.push(rec);
            }
        }
    }

    if let Some(b) = tx {
        let set = relay_set(assignment, b)?;
        for (k, cfg) in beams.iter().enumerate() {
            let f = zf_equalizer(&cfg.u, chan, set, k)?;
            let antenna_noise: Vec<Complex64> = (0..chan.antennas()).map(|_| draw(1.0)).collect();
            let projected_noise = project_signal(&cfg.u, &antenna_noise)?;
            for s in 0..streams {
                let fs = f.column(s);
                let mut dest = DestinationOutput {
                    pair: k,
                    stream: s,
                    desired: Complex64::new(0.0, 0.0),
                    inter_stream: Vec::new(),
                    inter_pair: Vec::new(),
                    noise: dot_h(fs, &projected_noise),
                };
                for j in 0..pairs {
                    for t in 0..streams {
                        let proj = project_signal(&cfg.u, chan.hop2(k, set.relay(j, t)))?;
                        let y = amp * dot_h(fs, &proj) * symbols.relay[j][t];
                        if j == k && t == s {
                            dest.desired = y;
                        } else if j == k {
                            dest.inter_stream.push(y);
                        } else {
                            dest.inter_pair.push(y);
                        }
                    }
                }
                out.destinations.push(dest);
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::draw_block;
    use crate::selection::{
        make_beam_configs, select_both_sets, select_full_duplex, select_single_set,
        FullDuplexSelection,
    };
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

    fn setup(
        config: &NetworkConfig,
        seed: u64,
    ) -> (ChannelRealization, Vec<BeamConfig>, RelayAssignment) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let beams = make_beam_configs(config, &mut rng).unwrap();
        let chan = draw_block(config, &mut rng).unwrap();
        let assignment = select_both_sets(&chan, &beams, config).unwrap();
        (chan, beams, assignment)
    }

    #[test]
    fn interference_free_reduction() {
        let config = cfg(1, 4, 1);
        let (chan, beams, assignment) = setup(&config, 1);
        let chan = chan.with_zero_relay();
        let n = assignment.pi1.relay(0, 0);
        let expected = 10.0 * dot_t(beams[0].v.column(0), chan.hop1(n, 0)).norm_sqr();
        let got = sinr_hop1(
            &chan,
            &beams,
            &assignment,
            Mode::Alternate,
            RelaySetId::First,
            0,
            0,
            10.0,
            0.0,
        )
        .unwrap();
        assert!((got - expected).abs() < 1e-12 * expected.max(1.0));
    }

    #[test]
    fn mode_mismatch_is_rejected() {
        let config = cfg(2, 10, 1);
        let (chan, beams, assignment) = setup(&config, 2);
        assert!(hop1_terms(
            &chan,
            &beams,
            &assignment,
            Mode::NonAlternate,
            RelaySetId::First,
            0,
            0
        )
        .is_err());
        let single = select_single_set(&chan, &beams, &config).unwrap();
        assert!(hop1_terms(
            &chan,
            &beams,
            &single,
            Mode::Alternate,
            RelaySetId::First,
            0,
            0
        )
        .is_err());
        assert!(hop1_terms(
            &chan,
            &beams,
            &single,
            Mode::NonAlternate,
            RelaySetId::First,
            0,
            0
        )
        .is_ok());
    }

    #[test]
    fn sinr_vanishes_with_snr() {
        let config = cfg(2, 10, 1);
        let (chan, beams, assignment) = setup(&config, 3);
        let terms = stream_terms(&chan, &beams, &assignment, Mode::Alternate).unwrap();
        let report = terms.rates(1e-12, 0.0, 1001);
        assert!(report.sum_rate < 1e-9);
    }

    #[test]
    fn zf_identity() {
        let config = cfg(2, 20, 2);
        for seed in 0..20 {
            let (chan, beams, assignment) = setup(&config, seed);
            for (k, beam) in beams.iter().enumerate() {
                let u = &beam.u;
                let f = zf_equalizer(u, &chan, &assignment.pi1, k).unwrap();
                let a = ComplexMatrix::from_columns(
                    2,
                    &effective_columns(u, &chan, &assignment.pi1, k).unwrap(),
                )
                .unwrap();
                let product = f.adjoint().mul(&a).unwrap();
                assert!(product.max_abs_diff(&ComplexMatrix::identity(2)) < 1e-9);
            }
        }
    }

    #[test]
    fn single_stream_equalizer_is_scalar_inverse() {
        let config = cfg(2, 10, 1);
        let (chan, beams, assignment) = setup(&config, 4);
        let u = &beams[0].u;
        let f = zf_equalizer(u, &chan, &assignment.pi1, 0).unwrap();
        let proj = project_signal(u, chan.hop2(0, assignment.pi1.relay(0, 0))).unwrap();
        assert!((f[(0, 0)] - proj[0].conj().inv()).norm() < 1e-12);
        assert!((dot_h(f.column(0), &proj) - 1.0).norm() < 1e-12);
    }

    #[test]
    fn identical_hop2_vectors_are_singular() {
        let config = cfg(1, 4, 2);
        let (mut chan, beams, assignment) = setup(&config, 5);
        let (a, b) = (assignment.pi1.relay(0, 0), assignment.pi1.relay(0, 1));
        let copy = chan.hop2(0, a).to_vec();
        chan.hop2_mut(0, b).copy_from_slice(&copy);
        assert!(matches!(
            zf_equalizer(&beams[0].u, &chan, &assignment.pi1, 0),
            Err(Error::Singular { .. })
        ));
    }

    #[test]
    fn single_pair_hop2_has_no_leakage() {
        let config = cfg(1, 6, 2);
        let (chan, beams, assignment) = setup(&config, 6);
        let u = &beams[0].u;
        let f = zf_equalizer(u, &chan, &assignment.pi1, 0).unwrap();
        let t = hop2_terms(u, &f, &chan, &assignment.pi1, 0, 1).unwrap();
        assert_eq!(t.leakage, 0.0);
        let got = sinr_hop2(u, &f, &chan, &assignment.pi1, 0, 1, 7.0).unwrap();
        assert!((got - 7.0 / t.noise_gain).abs() < 1e-12);
    }

    #[test]
    fn zeroed_cross_pair_vectors_match_single_pair() {
        let config = cfg(2, 10, 1);
        let (mut chan, beams, assignment) = setup(&config, 7);
        let other = assignment.pi1.relay(1, 0);
        chan.hop2_mut(0, other).fill(Complex64::new(0.0, 0.0));
        let u = &beams[0].u;
        let f = zf_equalizer(u, &chan, &assignment.pi1, 0).unwrap();
        let got = sinr_hop2(u, &f, &chan, &assignment.pi1, 0, 0, 3.0).unwrap();
        let noise_gain: f64 = f.column(0).iter().map(|z| z.norm_sqr()).sum();
        assert!((got - 3.0 / noise_gain).abs() < 1e-12);
    }

    #[test]
    fn alternate_prelog_approaches_one() {
        let config = cfg(1, 4, 1);
        let (chan, beams, assignment) = setup(&config, 8);
        let chan = chan.with_zero_relay();
        let terms = stream_terms(&chan, &beams, &assignment, Mode::Alternate).unwrap();
        let snr = 1e12;
        let r = terms.rates(snr, 0.0, 1_000_001).sum_rate;
        let d = terms.rates(snr, 0.0, 3).sum_rate;
        assert!((r / snr.log2() - 1.0).abs() < 0.15);
        assert!((d / r - 2.0 / 3.0).abs() < 1e-5);
    }

    #[test]
    fn rate_monotone_in_snr() {
        let config = cfg(2, 40, 1);
        for seed in 0..10 {
            let (chan, beams, assignment) = setup(&config, seed);
            let terms = stream_terms(&chan, &beams, &assignment, Mode::Alternate).unwrap();
            let mut last = 0.0;
            for db in 0..=40 {
                let r = terms
                    .rates(crate::db_to_linear(db as f64), 0.0, 1001)
                    .sum_rate;
                assert!(r >= last);
                last = r;
            }
        }
    }

    #[test]
    fn full_duplex_non_increasing_in_rsinr() {
        let config = cfg(2, 40, 1);
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let beams = make_beam_configs(&config, &mut rng).unwrap();
        let chan = draw_block(&config, &mut rng).unwrap();
        let a = select_full_duplex(&chan, &beams, &config, FullDuplexSelection::default()).unwrap();
        let terms = stream_terms(&chan, &beams, &a, Mode::FullDuplex).unwrap();
        let mut last = f64::INFINITY;
        for db in 0..=30 {
            let r = terms
                .rates(config.snr, crate::db_to_linear(db as f64), 1001)
                .sum_rate;
            assert!(r <= last);
            last = r;
        }
    }

    #[test]
    fn sum_is_total_of_streams() {
        let config = cfg(2, 20, 2);
        let (chan, beams, assignment) = setup(&config, 10);
        let report = sum_rate(&chan, &beams, &assignment, &config, Mode::Alternate).unwrap();
        assert_eq!(report.per_stream.len(), 4);
        assert!((report.sum_rate - report.per_stream.iter().sum::<f64>()).abs() < 1e-12);
        assert!(report.per_stream.iter().all(|r| *r >= 0.0));
    }

    #[test]
    fn relay_receives_beam_times_symbol() {
        let config = cfg(1, 4, 1);
        let (chan, beams, assignment) = setup(&config, 11);
        let chan = chan.with_zero_relay();
        let x = Complex64::new(0.6, -0.8);
        let symbols = SlotSymbols {
            source: vec![vec![x]],
            relay: vec![vec![Complex64::new(1.0, 0.0)]],
        };
        let params = SlotParams {
            mode: Mode::Alternate,
            parity: SlotParity::Odd,
            snr: 1.0,
            rsinr: 0.0,
        };
        let out = simulate_slot(&chan, &beams, &assignment, &symbols, params, None).unwrap();
        let n = assignment.pi1.relay(0, 0);
        let expected = dot_t(beams[0].v.column(0), chan.hop1(n, 0)) * x;
        assert!((out.relays[0].total() - expected).norm() < 1e-12);
        assert!((out.destinations[0].total() - 1.0).norm() < 1e-9);
    }
}
