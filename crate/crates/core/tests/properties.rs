// SPDX-License-Identifier: Apache-2.0
//! Statistical and algebraic properties of the simulator.

use proptest::prelude::*;
use srff_puf::array::{challenge_response, full_response, Challenge, MODE_BIT};
use srff_puf::metrics::{evaluate, reliability, uniqueness};
use srff_puf::montecarlo::{build_population, run_experiment, EvalNoise};
use srff_puf::rng::StreamFactory;
use srff_puf::{ArrayLayout, BitString, ComparisonPolicy, EnvPoint, ExperimentConfig, NodeKind};

fn bitstring(v: &[bool]) -> BitString {
    v.iter().copied().collect()
}

#[test]
fn hd_metric_axioms_exhaustive() {
    let n = 6;
    let all: Vec<BitString> = (0..1u32 << n)
        .map(|v| (0..n).map(|i| v >> i & 1 == 1).collect())
        .collect();
    for a in &all {
        assert_eq!(a.hamming(a).unwrap(), 0);
        for b in &all {
            let ab = a.hamming(b).unwrap();
            assert_eq!(ab, b.hamming(a).unwrap());
            for c in all.iter().step_by(3) {
                assert!(a.hamming(c).unwrap() <= ab + b.hamming(c).unwrap());
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn uniqueness_invariant_under_complement(
        rows in proptest::collection::vec(proptest::collection::vec(any::<bool>(), 24), 2..20)
    ) {
        let refs: Vec<BitString> = rows.iter().map(|r| bitstring(r)).collect();
        let flipped: Vec<BitString> = refs.iter().map(BitString::complement).collect();
        let p = ComparisonPolicy::default();
        prop_assert_eq!(uniqueness(&refs, &p).unwrap(), uniqueness(&flipped, &p).unwrap());
    }

    #[test]
    fn subset_challenges_restrict_full_response(
        words in proptest::collection::vec(0u8..4, 8 * 2),
        die in 0u32..20,
        rep in 0u32..4,
    ) {
        let cfg = ExperimentConfig {
            n_dies: 20,
            noise_std: 0.3,
            ..ExperimentConfig::new(NodeKind::N45, 32).unwrap()
        };
        let pop = build_population(&cfg).unwrap();
        let streams = StreamFactory::new(cfg.seed);
        let noise = EvalNoise::new(&streams, die, 1, rep, cfg.noise_std);
        let env = &cfg.env_points[1];
        let cells = &pop[die as usize].cells;
        let full = full_response(cells, &cfg.layout, &cfg.node, env, &noise).unwrap();
        let c = Challenge::new(2, words.iter().map(|w| w | MODE_BIT).collect());
        let sub = challenge_response(cells, &cfg.layout, &cfg.node, env, &c, &noise).unwrap();
        prop_assert_eq!(sub.bits.len(), 16);
        for (g, pair) in words.chunks(2).enumerate() {
            for (k, &w) in pair.iter().enumerate() {
                let pos = g * 4 + w as usize;
                prop_assert_eq!(sub.bits.get(g * 2 + k), full.bits.get(pos));
            }
        }
    }
}

#[test]
fn sampled_policy_converges_to_all_pairs() {
    let cfg = ExperimentConfig {
        n_dies: 100,
        ..ExperimentConfig::new(NodeKind::N32, 64).unwrap()
    };
    let ds = run_experiment(&cfg).unwrap();
    let refs: Vec<BitString> = ds.references.iter().map(|r| r.bits.clone()).collect();
    let exact = uniqueness(&refs, &ComparisonPolicy::default())
        .unwrap()
        .mean_pct;
    let mut prev_err = f64::INFINITY;
    for n in [500, 2000, 4000, 4950] {
        let errs: Vec<f64> = (0..10)
            .map(|s| {
                (uniqueness(&refs, &ComparisonPolicy::sampled(n, s))
                    .unwrap()
                    .mean_pct
                    - exact)
                    .abs()
            })
            .collect();
        let mean_err = errs.iter().sum::<f64>() / errs.len() as f64;
        assert!(mean_err < 1.0);
        assert!(
            mean_err <= prev_err + 0.05,
            "n={n}: {mean_err} vs {prev_err}"
        );
        prev_err = mean_err;
    }
    assert_eq!(prev_err, 0.0);
}

#[test]
fn hotter_corner_flips_more() {
    let cfg = ExperimentConfig::new(NodeKind::N90, 128).unwrap();
    let rel = reliability(&run_experiment(&cfg).unwrap()).unwrap();
    let ber = |t: f64| {
        rel.per_env
            .iter()
            .find(|e| e.temperature == t)
            .unwrap()
            .ber_pct
    };
    assert!(
        ber(80.0) >= ber(40.0),
        "80C {} < 40C {}",
        ber(80.0),
        ber(40.0)
    );
}

#[test]
fn default_flip_rate_in_calibrated_band() {
    let cfg = ExperimentConfig::new(NodeKind::N90, 128).unwrap();
    let report = evaluate(&run_experiment(&cfg).unwrap(), &ComparisonPolicy::default()).unwrap();
    assert!(
        (0.02..=0.15).contains(&report.mean_ber_pct),
        "per-bit flip rate {}%",
        report.mean_ber_pct
    );
}

#[test]
fn zero_variation_die_gives_constant_response() {
    let mut cfg = ExperimentConfig::new(NodeKind::N90, 16).unwrap();
    cfg.n_dies = 5;
    cfg.variation.intra_frac = 0.0;
    cfg.variation.sigma_off = 0.0;
    cfg.variation.mu_off = 0.0;
    let layout = ArrayLayout::new(16).unwrap();
    for die in build_population(&cfg).unwrap() {
        let r = full_response(
            &die.cells,
            &layout,
            &cfg.node,
            &EnvPoint::reference(),
            &srff_puf::array::NoNoise,
        )
        .unwrap();
        assert_eq!(r.bits.len(), 16);
        assert!(r.bits.iter().all(|b| b == r.bits.get(0)));
        assert_eq!(r.marginal, 16);
    }
}
