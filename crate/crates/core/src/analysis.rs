//! Metric distributions, order-statistic bounds, relay-scaling evaluators and
//! estimators for simulated curves.
//!
//! With unit-variance fading each metric term is a unit-mean exponential, so a
//! metric with `a` terms is Gamma(a, 1) with CDF `P(a, l) = γ(a, l)/Γ(a)`.

use serde::{Deserialize, Serialize};
use statrs::function::factorial::ln_binomial;
use statrs::function::gamma::{gamma_lr, gamma_ur, ln_gamma};

use crate::channel::Mode;
use crate::selection::{MetricTable, RelayAssignment};
use crate::{Error, Result};

const INVERSE_TOL: f64 = 1e-10;

/// Term counts of the two scheduling metrics.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ShapeParams {
    /// Stage-1 metric, `2SK − S − 1`.
    pub a1: u32,
    /// Total interference level, `3SK − S − 1`.
    pub a2: u32,
}

impl ShapeParams {
    pub fn new(k: usize, s: usize) -> Result<Self> {
        if k == 0 || s == 0 {
            return Err(Error::InvalidArgument(format!(
                "K={k} and S={s} must be positive"
            )));
        }
        let sk = (k * s) as u32;
        let s = s as u32;
        Ok(ShapeParams {
            a1: 2 * sk - s - 1,
            a2: 3 * sk - s - 1,
        })
    }

    /// Exponent used by `mode` in the relay-scaling law.
    pub fn for_mode(&self, mode: Mode) -> u32 {
        match mode {
            Mode::Alternate => self.a2,
            Mode::NonAlternate | Mode::FullDuplex => self.a1,
        }
    }
}

fn check_shape(a: u32) -> Result<()> {
    if a == 0 {
        return Err(Error::InvalidArgument("shape must be at least 1".into()));
    }
    Ok(())
}

/// CDF of a metric made of `a` unit-mean exponential terms.
pub fn cdf_metric(l: f64, a: u32) -> Result<f64> {
    check_shape(a)?;
    if l.is_nan() || l < 0.0 {
        return Err(Error::InvalidArgument(format!(
            "metric level must be >= 0, got {l}"
        )));
    }
    if l == 0.0 {
        return Ok(0.0);
    }
    if l.is_infinite() {
        return Ok(1.0);
    }
    Ok(gamma_lr(a as f64, l))
}

/// The same CDF in the chi-square convention, where each term has mean 2.
pub fn cdf_metric_chi2(l: f64, a: u32) -> Result<f64> {
    cdf_metric(l / 2.0, a)
}

/// Lower bound `C·lᵃ` on the metric CDF for small levels.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SmallLevelBound {
    /// `e⁻¹·2⁻ᵃ/Γ(a+1)`.
    pub constant: f64,
    pub bound: f64,
    /// Variant `e⁻¹·2ᵃ/Γ(a)`; exceeds the CDF for small `a`, so not a valid bound.
    pub variant_constant: f64,
}

/// Evaluates the small-level CDF bound for `0 < l ≤ 2`.
pub fn small_level_bound(l: f64, a: u32) -> Result<SmallLevelBound> {
    check_shape(a)?;
    if !(l > 0.0 && l <= 2.0) {
        return Err(Error::InvalidArgument(format!(
            "level must lie in (0, 2], got {l}"
        )));
    }
    let a_f = a as f64;
    let constant = (-1.0 - a_f * std::f64::consts::LN_2 - ln_gamma(a_f + 1.0)).exp();
    let variant_constant = (-1.0 + a_f * std::f64::consts::LN_2 - ln_gamma(a_f)).exp();
    Ok(SmallLevelBound {
        constant,
        bound: constant * l.powi(a as i32),
        variant_constant,
    })
}

/// Level `l` with `cdf_metric(l, a) = p`, by bisection on a doubling bracket.
pub fn inverse_cdf(p: f64, a: u32) -> Result<f64> {
    check_shape(a)?;
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "probability must lie in (0, 1), got {p}"
        )));
    }
    let mut hi = 1.0;
    while gamma_lr(a as f64, hi) < p {
        hi *= 2.0;
    }
    let mut lo = 0.0;
    // Bisect to machine precision; the CDF tolerance then holds for any shape.
    while hi - lo > f64::EPSILON * hi {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if gamma_lr(a as f64, mid) < p {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    debug_assert!((gamma_lr(a as f64, 0.5 * (lo + hi)) - p).abs() < INVERSE_TOL);
    Ok(0.5 * (lo + hi))
}

/// Probability that exactly `SK` of `N` relays have a total interference
/// level below `eps`.
pub fn prob_exactly_sk(n: usize, k: usize, s: usize, eps: f64) -> Result<f64> {
    let shape = ShapeParams::new(k, s)?;
    let sk = k * s;
    if n < sk {
        return Err(Error::InvalidArgument(format!("N={n} is below SK={sk}")));
    }
    if eps.is_nan() || eps <= 0.0 {
        return Err(Error::InvalidArgument(format!(
            "eps must be positive, got {eps}"
        )));
    }
    let a = shape.a2 as f64;
    let (below, above) = if eps.is_infinite() {
        (1.0, 0.0)
    } else {
        (gamma_lr(a, eps), gamma_ur(a, eps))
    };
    if below == 0.0 || (above == 0.0 && n > sk) {
        return Ok(0.0);
    }
    let mut log_p = ln_binomial(n as u64, sk as u64) + sk as f64 * below.ln();
    if n > sk {
        log_p += (n - sk) as f64 * above.ln();
    }
    Ok(log_p.exp())
}

/// Explicit lower bound on `E[1/L_{SK-th}]`,
/// `(C₂N/SK)^{1/a₂}·(SK)^{−SK}·e^{−SK}`.
pub fn til_decay_bound(n: usize, k: usize, s: usize) -> Result<f64> {
    let shape = ShapeParams::new(k, s)?;
    let sk = k * s;
    if n < sk {
        return Err(Error::InvalidArgument(format!("N={n} is below SK={sk}")));
    }
    let c2 = small_level_bound(1.0, shape.a2)?.constant;
    let sk_f = sk as f64;
    Ok((c2 * n as f64 / sk_f).powf(1.0 / shape.a2 as f64) * sk_f.powf(-sk_f) * (-sk_f).exp())
}

/// Relay count from the scaling law, `⌈snrᵃ⌉`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RequiredRelays {
    pub count: u64,
    /// True when `snrᵃ` does not fit in `count`.
    pub saturated: bool,
}

/// Number of relays needed at `snr` (linear) so that the interference stays
/// at the noise level; `a₂` for alternate relaying, `a₁` without it.
pub fn required_relays(snr: f64, k: usize, s: usize, mode: Mode) -> Result<RequiredRelays> {
    if snr.is_nan() || snr <= 0.0 || snr.is_infinite() {
        return Err(Error::InvalidArgument(format!(
            "snr must be positive and finite, got {snr}"
        )));
    }
    if mode == Mode::FullDuplex {
        return Err(Error::InvalidArgument(
            "relay scaling is defined for alternate and non-alternate relaying".into(),
        ));
    }
    let a = ShapeParams::new(k, s)?.for_mode(mode);
    let value = snr.powi(a as i32).ceil();
    if !value.is_finite() || value >= u64::MAX as f64 {
        return Ok(RequiredRelays {
            count: u64::MAX,
            saturated: true,
        });
    }
    Ok(RequiredRelays {
        count: (value as u64).max(1),
        saturated: false,
    })
}

fn selected_tils(assignment: &RelayAssignment, stage2: &MetricTable) -> Result<Vec<f64>> {
    let pi2 = assignment
        .pi2
        .as_ref()
        .ok_or_else(|| Error::InvalidArgument("TIL statistics need a second relay set".into()))?;
    let mut out = Vec::with_capacity(pi2.len());
    for k in 0..pi2.pairs() {
        for s in 0..pi2.streams() {
            out.push(stage2.get(pi2.relay(k, s), k, s));
        }
    }
    Ok(out)
}

/// `L_{SK-th}`: the largest TIL among the relays of `Π2`.
pub fn til_order_statistic(assignment: &RelayAssignment, stage2: &MetricTable) -> Result<f64> {
    Ok(selected_tils(assignment, stage2)?
        .into_iter()
        .fold(f64::NEG_INFINITY, f64::max))
}

/// Mean TIL over the relays of `Π2`.
pub fn mean_selected_til(assignment: &RelayAssignment, stage2: &MetricTable) -> Result<f64> {
    let tils = selected_tils(assignment, stage2)?;
    Ok(tils.iter().sum::<f64>() / tils.len() as f64)
}

/// Least-squares line through log–log points.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecayFit {
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
}

fn least_squares(xs: &[f64], ys: &[f64]) -> (f64, f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r2 = if syy == 0.0 {
        1.0
    } else {
        (sxy * sxy / (sxx * syy)).clamp(0.0, 1.0)
    };
    (slope, intercept, r2)
}

/// Fits `ln(mean) = intercept + slope·ln(N)`.
pub fn fit_decay(points: &[(f64, f64)]) -> Result<DecayFit> {
    if points.len() < 4 {
        return Err(Error::InvalidArgument(format!(
            "decay fit needs at least 4 points, got {}",
            points.len()
        )));
    }
    if points.iter().any(|&(n, v)| !(n > 0.0 && v > 0.0)) {
        return Err(Error::InvalidArgument(
            "decay fit needs positive N and values".into(),
        ));
    }
    let mut ns: Vec<f64> = points.iter().map(|p| p.0).collect();
    ns.sort_by(f64::total_cmp);
    if ns.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::InvalidArgument(
            "decay fit needs distinct N values".into(),
        ));
    }
    let xs: Vec<f64> = points.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    let (slope, intercept, r2) = least_squares(&xs, &ys);
    Ok(DecayFit {
        slope,
        intercept,
        r2,
    })
}

/// Empirical degrees of freedom: slope of the sum rate against `log₂ snr`
/// over the top decade of the grid. The grid must span at least 20 dB.
pub fn estimate_dof(curve: &[(f64, f64)]) -> Result<f64> {
    if curve
        .iter()
        .any(|&(snr, r)| snr.is_nan() || snr <= 0.0 || !r.is_finite())
    {
        return Err(Error::InvalidArgument(
            "rate curve needs positive snr and finite rates".into(),
        ));
    }
    let lo = curve.iter().map(|p| p.0).fold(f64::INFINITY, f64::min);
    let hi = curve.iter().map(|p| p.0).fold(0.0, f64::max);
    if curve.len() < 2 || hi / lo < 100.0 * (1.0 - 1e-9) {
        return Err(Error::InvalidArgument(
            "rate curve must span at least 20 dB".into(),
        ));
    }
    let top: Vec<&(f64, f64)> = curve
        .iter()
        .filter(|p| p.0 >= hi / 10.0 * (1.0 - 1e-9))
        .collect();
    if top.len() < 2 {
        return Err(Error::InvalidArgument(
            "need at least two points in the top decade".into(),
        ));
    }
    let xs: Vec<f64> = top.iter().map(|p| p.0.log2()).collect();
    let ys: Vec<f64> = top.iter().map(|p| p.1).collect();
    Ok(least_squares(&xs, &ys).0)
}

/// Kolmogorov–Smirnov distance between a sample and a continuous CDF.
pub fn ks_distance(samples: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    sorted
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).abs().max(((i + 1) as f64 / n - f).abs())
        })
        .fold(0.0, f64::max)
}
