//! Network configuration and block-fading channel realizations.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rand::rngs::SmallRng;
use rand::{Rng, SeedableRng};
use serde::{Deserialize, Serialize};

use crate::linalg::{complex_normal, MAX_DIM};
use crate::{Error, Result};

/// Relaying protocol variant.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Mode {
    /// Two relay sets toggling between receive and transmit (virtual full duplex).
    #[serde(rename = "ar")]
    Alternate,
    /// A single relay set; sources and relays transmit in separate slots.
    #[serde(rename = "nar")]
    NonAlternate,
    /// Single-antenna full-duplex relays with residual self-interference.
    #[serde(rename = "fd")]
    FullDuplex,
}

impl Mode {
    pub const ALL: [Mode; 3] = [Mode::Alternate, Mode::NonAlternate, Mode::FullDuplex];

    pub fn short_name(self) -> &'static str {
        match self {
            Mode::Alternate => "ar",
            Mode::NonAlternate => "nar",
            Mode::FullDuplex => "fd",
        }
    }

    /// Number of relay sets the mode selects.
    pub fn relay_sets(self) -> usize {
        match self {
            Mode::Alternate => 2,
            Mode::NonAlternate | Mode::FullDuplex => 1,
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.short_name())
    }
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "ar" | "alternate" => Ok(Mode::Alternate),
            "nar" | "non-alternate" => Ok(Mode::NonAlternate),
            "fd" | "full-duplex" => Ok(Mode::FullDuplex),
            other => Err(Error::config("mode", format!("unknown mode `{other}`"))),
        }
    }
}

/// Parameters of the K×N×K network.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NetworkConfig {
    /// Source–destination pairs.
    pub k: usize,
    /// Relay candidates.
    pub n: usize,
    /// Antennas per source and destination.
    pub m: usize,
    /// Streams per pair.
    pub s: usize,
    /// Linear transmit SNR `P / N0`.
    pub snr: f64,
    /// Data slots per block (odd).
    pub l_slots: usize,
    /// Linear residual self-interference-to-noise ratio (full duplex only).
    pub rsinr: f64,
}

impl Default for NetworkConfig {
    fn default() -> Self {
        NetworkConfig {
            k: 2,
            n: 200,
            m: 4,
            s: 1,
            snr: crate::db_to_linear(15.0),
            l_slots: 1001,
            rsinr: 1.0,
        }
    }
}

impl NetworkConfig {
    /// Total number of streams, `S·K`.
    pub fn sk(&self) -> usize {
        self.s * self.k
    }

    /// Relays the mode needs: `2SK` for alternate relaying, `SK` otherwise.
    pub fn relays_needed(&self, mode: Mode) -> usize {
        self.sk() * mode.relay_sets()
    }

    /// Checks the structural invariants for running `mode`.
    pub fn validate(&self, mode: Mode) -> Result<()> {
        if self.k == 0 {
            return Err(Error::config("K", "need at least one S-D pair"));
        }
        if self.m == 0 || self.m > MAX_DIM {
            return Err(Error::config(
                "M",
                format!("antenna count M={} must be in 1..={MAX_DIM}", self.m),
            ));
        }
        if self.s == 0 || self.s > self.m {
            return Err(Error::config(
                "S",
                format!("S={} must satisfy 1 <= S <= M={}", self.s, self.m),
            ));
        }
        let needed = self.relays_needed(mode);
        if self.n < needed {
            let rule = if mode == Mode::Alternate { "2SK" } else { "SK" };
            return Err(Error::config(
                "N",
                format!(
                    "N={} is below {rule}={needed} required by mode {mode}",
                    self.n
                ),
            ));
        }
        if self.l_slots < 3 || self.l_slots.is_multiple_of(2) {
            return Err(Error::config(
                "L",
                format!("slot count L={} must be odd and >= 3", self.l_slots),
            ));
        }
        if !(self.snr > 0.0 && self.snr.is_finite()) {
            return Err(Error::config(
                "snr",
                format!("snr={} must be positive", self.snr),
            ));
        }
        if !(self.rsinr >= 0.0 && self.rsinr.is_finite()) {
            return Err(Error::config(
                "rsinr",
                format!("rsinr={} must be non-negative", self.rsinr),
            ));
        }
        Ok(())
    }
}

/// Inter-relay channel `h^(r)_{mn}`: symmetric with a zero diagonal.
///
/// Block draws use the keyed form, where each unordered pair owns an
/// independent random stream derived from the block key. Only the entries the
/// protocol touches are ever generated, so large `N` stays cheap.
#[derive(Debug, Clone, PartialEq)]
pub enum RelayChannel {
    Keyed {
        n: usize,
        key: u64,
    },
    /// Upper triangle, row-major, without the diagonal.
    Dense {
        n: usize,
        upper: Vec<Complex64>,
    },
}

impl RelayChannel {
    pub fn zeros(n: usize) -> Self {
        RelayChannel::Dense {
            n,
            upper: vec![Complex64::new(0.0, 0.0); n * n.saturating_sub(1) / 2],
        }
    }

    /// Builds a dense channel from a full matrix given as rows. Only the upper
    /// triangle is read; the result is symmetric with a zero diagonal.
    pub fn from_upper(n: usize, full: &[Vec<Complex64>]) -> Result<Self> {
        if full.len() != n || full.iter().any(|r| r.len() != n) {
            return Err(Error::InvalidDimension(format!(
                "relay matrix must be {n}x{n}"
            )));
        }
        let mut upper = Vec::with_capacity(n * n.saturating_sub(1) / 2);
        for (i, row) in full.iter().enumerate() {
            upper.extend_from_slice(&row[i + 1..]);
        }
        Ok(RelayChannel::Dense { n, upper })
    }

    pub fn len(&self) -> usize {
        match self {
            RelayChannel::Keyed { n, .. } | RelayChannel::Dense { n, .. } => *n,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn upper_index(n: usize, i: usize, j: usize) -> usize {
        debug_assert!(i < j && j < n);
        i * (2 * n - i - 1) / 2 + (j - i - 1)
    }

    pub fn get(&self, a: usize, b: usize) -> Complex64 {
        let n = self.len();
        assert!(a < n && b < n, "relay index out of range");
        if a == b {
            return Complex64::new(0.0, 0.0);
        }
        let (i, j) = if a < b { (a, b) } else { (b, a) };
        match self {
            RelayChannel::Dense { upper, .. } => upper[Self::upper_index(n, i, j)],
            RelayChannel::Keyed { key, .. } => {
                let pair = (i as u64) * (n as u64) + j as u64;
                let mut rng =
                    SmallRng::seed_from_u64(key ^ pair.wrapping_mul(0xD1B5_4A32_D192_ED03));
                complex_normal(&mut rng)
            }
        }
    }

    /// `|h^(r)_{ab}|²`.
    pub fn gain(&self, a: usize, b: usize) -> f64 {
        self.get(a, b).norm_sqr()
    }
}

/// One block-fading draw of every channel in the network.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelRealization {
    k: usize,
    n: usize,
    m: usize,
    /// `h^(1)_{nk}`, indexed `[n][k][antenna]`.
    hop1: Vec<Complex64>,
    /// `h^(2)_{kn}`, indexed `[k][n][antenna]`.
    hop2: Vec<Complex64>,
    relay: RelayChannel,
}

impl ChannelRealization {
    /// Assembles a realization from explicit parts. `hop1` is laid out
    /// `[relay][pair][antenna]` and `hop2` `[pair][relay][antenna]`.
    pub fn from_parts(
        k: usize,
        n: usize,
        m: usize,
        hop1: Vec<Complex64>,
        hop2: Vec<Complex64>,
        relay: RelayChannel,
    ) -> Result<Self> {
        if hop1.len() != n * k * m || hop2.len() != k * n * m || relay.len() != n {
            return Err(Error::InvalidDimension(format!(
                "channel parts do not match K={k}, N={n}, M={m}"
            )));
        }
        let finite = |v: &[Complex64]| v.iter().all(|z| z.re.is_finite() && z.im.is_finite());
        if !finite(&hop1) || !finite(&hop2) {
            return Err(Error::InvalidArgument(
                "channel entries must be finite".into(),
            ));
        }
        Ok(ChannelRealization {
            k,
            n,
            m,
            hop1,
            hop2,
            relay,
        })
    }

    /// All-zero channel of the given shape.
    pub fn zeros(k: usize, n: usize, m: usize) -> Self {
        let z = Complex64::new(0.0, 0.0);
        ChannelRealization {
            k,
            n,
            m,
            hop1: vec![z; n * k * m],
            hop2: vec![z; k * n * m],
            relay: RelayChannel::zeros(n),
        }
    }

    pub fn pairs(&self) -> usize {
        self.k
    }

    pub fn relays(&self) -> usize {
        self.n
    }

    pub fn antennas(&self) -> usize {
        self.m
    }

    /// First-hop vector from source `k` to relay `n`.
    pub fn hop1(&self, n: usize, k: usize) -> &[Complex64] {
        let start = (n * self.k + k) * self.m;
        &self.hop1[start..start + self.m]
    }

    pub fn hop1_mut(&mut self, n: usize, k: usize) -> &mut [Complex64] {
        let start = (n * self.k + k) * self.m;
        &mut self.hop1[start..start + self.m]
    }

    /// Second-hop vector from relay `n` to destination `k`.
    pub fn hop2(&self, k: usize, n: usize) -> &[Complex64] {
        let start = (k * self.n + n) * self.m;
        &self.hop2[start..start + self.m]
    }

    pub fn hop2_mut(&mut self, k: usize, n: usize) -> &mut [Complex64] {
        let start = (k * self.n + n) * self.m;
        &mut self.hop2[start..start + self.m]
    }

    pub fn relay(&self) -> &RelayChannel {
        &self.relay
    }

    pub fn set_relay(&mut self, relay: RelayChannel) -> Result<()> {
        if relay.len() != self.n {
            return Err(Error::InvalidDimension(format!(
                "relay channel for {} relays, network has {}",
                relay.len(),
                self.n
            )));
        }
        self.relay = relay;
        Ok(())
    }

    /// Replaces the inter-relay channel with zeros.
    pub fn with_zero_relay(mut self) -> Self {
        self.relay = RelayChannel::zeros(self.n);
        self
    }
}

/// Draws one block: i.i.d. unit-variance Rayleigh coefficients for both hops
/// and a reciprocal inter-relay channel.
///
/// Only the structural checks common to every mode are applied here; the
/// relay-count rule of a specific mode is checked at selection time.
pub fn draw_block<R: Rng + ?Sized>(cfg: &NetworkConfig, rng: &mut R) -> Result<ChannelRealization> {
    cfg.validate(Mode::NonAlternate)?;
    let (k, n, m) = (cfg.k, cfg.n, cfg.m);
    let hop1 = (0..n * k * m).map(|_| complex_normal(rng)).collect();
    let hop2 = (0..k * n * m).map(|_| complex_normal(rng)).collect();
    let relay = RelayChannel::Keyed {
        n,
        key: rng.random(),
    };
    Ok(ChannelRealization {
        k,
        n,
        m,
        hop1,
        hop2,
        relay,
    })
}
