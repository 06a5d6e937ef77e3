//! Cross-module property tests.

use num_complex::Complex64;
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::analysis::{cdf_metric, small_level_bound, til_decay_bound};
use crate::channel::{draw_block, Mode, NetworkConfig};
use crate::linalg::{
    complex_normal, dot_h, invert_small, norm_sqr, project_signal, random_unitary, split_spaces,
    ComplexMatrix,
};
use crate::selection::{
    make_beam_configs, metric_stage1, metric_stage2, select_both_sets, select_set, MetricTable,
};
use crate::transmission::{stream_terms, RelaySetId};
use crate::Error;

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn network(k: usize, s: usize, extra: usize) -> NetworkConfig {
    NetworkConfig {
        k,
        n: 2 * k * s + extra,
        m: 4,
        s,
        ..NetworkConfig::default()
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn unitary_for_small_dims(dim in 1usize..=8, seed in any::<u64>()) {
        let v = random_unitary(dim, &mut rng(seed)).unwrap();
        prop_assert!(v.unitarity_error() < 1e-12);
    }

    #[test]
    fn stacked_spaces_are_unitary(m in 1usize..=8, s_frac in 0.0f64..1.0, seed in any::<u64>()) {
        let s = 1 + ((m - 1) as f64 * s_frac) as usize;
        let mut r = rng(seed);
        let (q, u) = split_spaces(m, s, &mut r).unwrap();
        let columns: Vec<Vec<Complex64>> = (0..q.cols())
            .map(|c| q.column(c).to_vec())
            .chain((0..u.cols()).map(|c| u.column(c).to_vec()))
            .collect();
        let stacked = ComplexMatrix::from_columns(m, &columns).unwrap();
        prop_assert!(stacked.unitarity_error() < 1e-12);

        let h: Vec<Complex64> = (0..m).map(|_| complex_normal(&mut r)).collect();
        let parts = norm_sqr(&project_signal(&u, &h).unwrap())
            + norm_sqr(&q.adjoint_mul_vec(&h).unwrap());
        prop_assert!((parts - norm_sqr(&h)).abs() < 1e-10 * norm_sqr(&h).max(1.0));
    }

    #[test]
    fn inversion_round_trip(dim in 1usize..=6, seed in any::<u64>()) {
        let mut r = rng(seed);
        let entries: Vec<Complex64> = (0..dim * dim).map(|_| complex_normal(&mut r)).collect();
        let a = ComplexMatrix::from_rows(dim, dim, &entries).unwrap();
        match invert_small(&a) {
            Ok(inv) => {
                let product = a.mul(&inv).unwrap();
                prop_assert!(product.max_abs_diff(&ComplexMatrix::identity(dim)) < 1e-9);
            }
            Err(Error::Singular { condition }) => prop_assert!(condition > 1e12),
            Err(e) => prop_assert!(false, "unexpected error {e}"),
        }
    }

    #[test]
    fn relay_sets_are_disjoint_and_full(
        k in 1usize..=3,
        s in 1usize..=2,
        extra in 0usize..10,
        seed in any::<u64>(),
    ) {
        let cfg = network(k, s, extra);
        let mut r = rng(seed);
        let beams = make_beam_configs(&cfg, &mut r).unwrap();
        let chan = draw_block(&cfg, &mut r).unwrap();
        let a = select_both_sets(&chan, &beams, &cfg).unwrap();
        let pi2 = a.pi2.as_ref().unwrap();
        prop_assert_eq!(a.pi1.len(), k * s);
        prop_assert_eq!(pi2.len(), k * s);
        prop_assert_eq!(a.idle.len(), extra);
        let mut all: Vec<usize> = a.pi1.as_slice().iter().chain(pi2.as_slice()).chain(&a.idle).copied().collect();
        all.sort_unstable();
        prop_assert_eq!(all, (0..cfg.n).collect::<Vec<_>>());
    }

    #[test]
    fn stage2_never_below_stage1(k in 1usize..=3, s in 1usize..=2, seed in any::<u64>()) {
        let cfg = network(k, s, 5);
        let mut r = rng(seed);
        let beams = make_beam_configs(&cfg, &mut r).unwrap();
        let chan = draw_block(&cfg, &mut r).unwrap();
        let a = select_both_sets(&chan, &beams, &cfg).unwrap();
        for n in (0..cfg.n).filter(|n| !a.pi1.contains(*n)) {
            for kk in 0..k {
                for ss in 0..s {
                    let m1 = metric_stage1(&chan, &beams, n, kk, ss).unwrap();
                    let m2 = metric_stage2(&chan, &beams, &a.pi1, n, kk, ss).unwrap();
                    prop_assert!(m2 >= m1 && m1 >= 0.0);
                }
            }
        }
    }

    #[test]
    fn selection_is_permutation_equivariant(
        relays in 2usize..=12,
        k in 1usize..=2,
        s in 1usize..=2,
        seed in any::<u64>(),
    ) {
        prop_assume!(relays >= k * s);
        let mut r = rng(seed);
        let slots = k * s;
        let values: Vec<f64> = (0..relays * slots).map(|_| rand::Rng::random::<f64>(&mut r)).collect();
        let mut perm: Vec<usize> = (0..relays).collect();
        perm.shuffle(&mut r);
        // Relay `perm[n]` of the relabelled table is relay `n` of the original.
        let mut relabelled = vec![0.0; values.len()];
        for n in 0..relays {
            relabelled[perm[n] * slots..(perm[n] + 1) * slots]
                .copy_from_slice(&values[n * slots..(n + 1) * slots]);
        }
        let a = select_set(&MetricTable::new(relays, k, s, values).unwrap(), &[], k, s).unwrap();
        let b = select_set(&MetricTable::new(relays, k, s, relabelled).unwrap(), &[], k, s).unwrap();
        let mapped: Vec<usize> = a.as_slice().iter().map(|&n| perm[n]).collect();
        prop_assert_eq!(mapped, b.as_slice().to_vec());
    }

    #[test]
    fn cdf_is_monotone_and_bounded(a in 1u32..=12, x in 0.0f64..40.0, dx in 0.0f64..5.0) {
        let lo = cdf_metric(x, a).unwrap();
        let hi = cdf_metric(x + dx, a).unwrap();
        prop_assert!((0.0..=1.0).contains(&lo) && (0.0..=1.0).contains(&hi));
        prop_assert!(hi >= lo);
    }

    #[test]
    fn small_level_bound_below_cdf(a in 1u32..=12, l in 1e-6f64..=2.0) {
        let b = small_level_bound(l, a).unwrap();
        prop_assert!(b.bound <= cdf_metric(l, a).unwrap());
    }

    #[test]
    fn decay_bound_is_power_law(n in 4usize..10_000, k in 1usize..=3, s in 1usize..=2) {
        prop_assume!(n >= k * s);
        let a2 = (3 * k * s - s - 1) as f64;
        prop_assume!(a2 > 0.0);
        let ratio = til_decay_bound(2 * n, k, s).unwrap() / til_decay_bound(n, k, s).unwrap();
        prop_assert!((ratio - 2f64.powf(1.0 / a2)).abs() < 1e-12);
    }

    #[test]
    fn rates_respect_interference_free_bound(seed in any::<u64>(), snr_db in 0.0f64..40.0) {
        let cfg = network(2, 1, 10);
        let mut r = rng(seed);
        let beams = make_beam_configs(&cfg, &mut r).unwrap();
        let chan = draw_block(&cfg, &mut r).unwrap();
        let a = select_both_sets(&chan, &beams, &cfg).unwrap();
        let snr = crate::db_to_linear(snr_db);
        let terms = stream_terms(&chan, &beams, &a, Mode::Alternate).unwrap();
        let sinrs = terms.sinrs(snr, 0.0);
        for b in [RelaySetId::First, RelaySetId::Second] {
            for (c, t) in terms.hop1[b.index()].iter().enumerate() {
                let min = sinrs.sinr1[b.index()][c].min(sinrs.sinr2[b.index()][c]);
                prop_assert!(0.5 * (1.0 + min).log2() <= 0.5 * (1.0 + snr * t.signal).log2() + 1e-12);
            }
        }
        let low = terms.rates(snr, 0.0, cfg.l_slots).sum_rate;
        let high = terms.rates(snr * 1.5, 0.0, cfg.l_slots).sum_rate;
        prop_assert!(high >= low);
    }
}

#[test]
fn beam_gain_is_unit_exponential() {
    let mut r = rng(11);
    let samples: Vec<f64> = (0..100_000)
        .map(|_| {
            let v = random_unitary(4, &mut r).unwrap();
            let h: Vec<Complex64> = (0..4).map(|_| complex_normal(&mut r)).collect();
            dot_h(v.column(0), &h).norm_sqr()
        })
        .collect();
    let d = crate::analysis::ks_distance(&samples, |x| 1.0 - (-x).exp());
    assert!(d < 0.01, "KS distance {d}");
}

#[test]
fn consecutive_blocks_are_uncorrelated() {
    let cfg = NetworkConfig {
        k: 1,
        n: 2,
        m: 1,
        s: 1,
        ..NetworkConfig::default()
    };
    let mut r = rng(12);
    let draws: Vec<Complex64> = (0..100_001)
        .map(|_| draw_block(&cfg, &mut r).unwrap().hop1(0, 0)[0])
        .collect();
    let n = (draws.len() - 1) as f64;
    let corr: Complex64 = draws
        .windows(2)
        .map(|w| w[0] * w[1].conj())
        .sum::<Complex64>()
        / n;
    assert!(corr.norm() < 0.02, "correlation {corr}");
}

#[test]
fn interference_free_dof_matches_prelog() {
    let cfg = network(1, 1, 0);
    let mut r = rng(13);
    let blocks: Vec<_> = (0..200)
        .map(|_| {
            let beams = make_beam_configs(&cfg, &mut r).unwrap();
            let chan = draw_block(&cfg, &mut r).unwrap().with_zero_relay();
            let a = select_both_sets(&chan, &beams, &cfg).unwrap();
            stream_terms(&chan, &beams, &a, Mode::Alternate).unwrap()
        })
        .collect();
    let curve: Vec<(f64, f64)> = (0..=40)
        .map(|i| {
            let snr = crate::db_to_linear(20.0 + i as f64);
            let mean = blocks
                .iter()
                .map(|t| t.rates(snr, 0.0, cfg.l_slots).sum_rate)
                .sum::<f64>()
                / blocks.len() as f64;
            (snr, mean)
        })
        .collect();
    let dof = crate::analysis::estimate_dof(&curve).unwrap();
    let prelog = (cfg.l_slots - 1) as f64 / cfg.l_slots as f64;
    assert!((dof - prelog).abs() < 0.01, "dof {dof}");
    assert!(dof <= (cfg.m * cfg.k) as f64);
}
