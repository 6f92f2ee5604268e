// SPDX-License-Identifier: Apache-2.0
//! Acceptance gate. One test per criterion; each prints a PASS/FAIL line.
//!
//!   cargo test -p srff-puf --test acceptance -- --nocapture

use std::sync::OnceLock;
use std::time::{Duration, Instant};

use srff_puf::dataset::write_dataset;
use srff_puf::metrics::{
    bit_aliasing, collision, evaluate, reliability, uniformity, uniqueness, MetricsReport,
};
use srff_puf::montecarlo::run_experiment;
use srff_puf::{BitString, ComparisonPolicy, EnvPoint, ExperimentConfig, NodeKind};

const KEY_LENGTHS: [usize; 4] = [16, 32, 64, 128];
const UNIQUENESS_BAND: (f64, f64) = (47.0, 51.0);
const SWEEP_BUDGET: Duration = Duration::from_secs(60);
const RELIABILITY_BAND: (f64, f64) = (88.0, 95.0);
const P_ZERO_POSITION_BAND: (f64, f64) = (0.45, 0.75);
const P_ZERO_MEAN_BAND: (f64, f64) = (0.5, 0.7);
const SAMPLED_TOLERANCE_PCT: f64 = 1.0;

struct Sweep {
    reports: Vec<MetricsReport>,
    elapsed: Duration,
}

/// Default 1000-die populations for every node and key length.
fn sweep() -> &'static Sweep {
    static SWEEP: OnceLock<Sweep> = OnceLock::new();
    SWEEP.get_or_init(|| {
        let start = Instant::now();
        let mut reports = Vec::new();
        for node in NodeKind::ALL {
            for bits in KEY_LENGTHS {
                let cfg = ExperimentConfig::new(node, bits).unwrap();
                let ds = run_experiment(&cfg).unwrap();
                reports.push(evaluate(&ds, &ComparisonPolicy::default()).unwrap());
            }
        }
        Sweep {
            reports,
            elapsed: start.elapsed(),
        }
    })
}

fn verdict(ok: bool) -> &'static str {
    if ok {
        "PASS"
    } else {
        "FAIL"
    }
}

fn within(x: f64, (lo, hi): (f64, f64)) -> bool {
    (lo..=hi).contains(&x)
}

#[test]
fn criterion_1_uniqueness() {
    let s = sweep();
    let mut all_ok = true;
    for r in &s.reports {
        let ok = within(r.mean_inter_hd_pct, UNIQUENESS_BAND);
        all_ok &= ok;
        println!(
            "  {} {:>3}-bit uniqueness {:.2}% in [{}, {}]: {}",
            r.config.node.name,
            r.n_bits,
            r.mean_inter_hd_pct,
            UNIQUENESS_BAND.0,
            UNIQUENESS_BAND.1,
            verdict(ok)
        );
    }
    let fast = s.elapsed < SWEEP_BUDGET;
    println!(
        "[{}] criterion 1: uniqueness in band for all 12 cells; sweep took {:.1}s (budget {}s)",
        verdict(all_ok && fast),
        s.elapsed.as_secs_f64(),
        SWEEP_BUDGET.as_secs()
    );
    assert!(all_ok, "uniqueness outside band");
    assert!(fast, "sweep exceeded runtime budget");
}

#[test]
fn criterion_2_reliability() {
    let s = sweep();
    let mut all_ok = true;
    for r in s
        .reports
        .iter()
        .filter(|r| r.config.node.name == NodeKind::N90)
    {
        let ok = within(r.frac_hd_zero_pct, RELIABILITY_BAND);
        all_ok &= ok;
        println!(
            "  N90 {:>3}-bit HD=0 {:.2}% (BER {:.4}%) in [{}, {}]: {}",
            r.n_bits,
            r.frac_hd_zero_pct,
            r.mean_ber_pct,
            RELIABILITY_BAND.0,
            RELIABILITY_BAND.1,
            verdict(ok)
        );
    }
    println!(
        "[{}] criterion 2: HD=0 fraction over 0-80 °C in band for every key length",
        verdict(all_ok)
    );
    assert!(
        all_ok,
        "HD=0 fraction outside band for at least one key length"
    );
}

#[test]
fn criterion_3_uniformity() {
    let s = sweep();
    let mut all_ok = true;
    for r in &s.reports {
        let lo = r
            .p_zero_per_position
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min);
        let hi = r
            .p_zero_per_position
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max);
        let ok = within(lo, P_ZERO_POSITION_BAND)
            && within(hi, P_ZERO_POSITION_BAND)
            && within(r.p_zero_mean, P_ZERO_MEAN_BAND);
        all_ok &= ok;
        println!(
            "  {} {:>3}-bit P(zero) range [{lo:.3}, {hi:.3}] mean {:.3}: {}",
            r.config.node.name,
            r.n_bits,
            r.p_zero_mean,
            verdict(ok)
        );
    }
    println!(
        "[{}] criterion 3: per-position P(zero) in {:?}, mean in {:?}",
        verdict(all_ok),
        P_ZERO_POSITION_BAND,
        P_ZERO_MEAN_BAND
    );
    assert!(all_ok);
}

fn naive_hd(a: &[bool], b: &[bool]) -> usize {
    let mut d = 0;
    for i in 0..a.len() {
        if a[i] != b[i] {
            d += 1;
        }
    }
    d
}

fn dataset_bytes(cfg: &ExperimentConfig, threads: usize) -> Vec<u8> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .unwrap();
    pool.install(|| {
        let ds = run_experiment(cfg).unwrap();
        let mut buf = Vec::new();
        write_dataset(&ds, &mut buf).unwrap();
        buf
    })
}

#[test]
fn criterion_4_property_suite() {
    let mut checks: Vec<(&str, bool)> = Vec::new();

    // exhaustive HD oracle, every pair of bit-vectors up to 8 bits
    let mut hd_ok = true;
    for n in 1..=8usize {
        let vecs: Vec<Vec<bool>> = (0..1u32 << n)
            .map(|v| (0..n).map(|i| v >> i & 1 == 1).collect())
            .collect();
        let packed: Vec<BitString> = vecs.iter().map(|v| v.iter().copied().collect()).collect();
        for i in 0..vecs.len() {
            for j in 0..vecs.len() {
                hd_ok &= packed[i].hamming(&packed[j]).unwrap() == naive_hd(&vecs[i], &vecs[j]);
            }
        }
    }
    checks.push(("HD equals naive oracle on all vectors n<=8", hd_ok));

    let r: BitString = (0..64).map(|i| (i * 37 + 11) % 5 < 2).collect();
    let pair = vec![r.clone(), r.complement()];
    let u = uniqueness(&pair, &ComparisonPolicy::default()).unwrap();
    checks.push(("uniqueness of {r, !r} is 100%", u.mean_pct == 100.0));

    let mut cfg = ExperimentConfig::new(NodeKind::N90, 64).unwrap();
    cfg.n_dies = 200;
    cfg.noise_std = 0.0;
    cfg.env_points = vec![EnvPoint::at(25.0).unwrap()];
    let rel = reliability(&run_experiment(&cfg).unwrap()).unwrap();
    checks.push((
        "zero noise at reference env: HD=0 100%, BER 0%",
        rel.frac_hd_zero_pct == 100.0 && rel.mean_ber_pct == 0.0,
    ));

    let cfg = ExperimentConfig {
        n_dies: 300,
        ..ExperimentConfig::new(NodeKind::N45, 128).unwrap()
    };
    let ds = run_experiment(&cfg).unwrap();
    let refs: Vec<BitString> = ds.references.iter().map(|r| r.bits.clone()).collect();
    let p0 = uniformity(&refs).unwrap();
    let p1 = bit_aliasing(&refs).unwrap();
    checks.push((
        "p0 + p1 = 1 at every position",
        p0.iter().zip(&p1).all(|(a, b)| a + b == 1.0),
    ));

    let mut cfg = ExperimentConfig::new(NodeKind::N32, 128).unwrap();
    cfg.n_dies = 300;
    cfg.variation.mu_off = 0.0;
    cfg.variation.sigma_off = 0.0;
    let env = EnvPoint::reference();
    let mut shift_ok = true;
    for die in srff_puf::build_population(&cfg).unwrap() {
        for c in &die.cells {
            let mut clone = *c;
            clone.nd1.length_factor -= die.global_shift;
            clone.nd2.length_factor -= die.global_shift;
            let a = srff_puf::srff::resolve_race(c, &cfg.node, &env, 0.0).unwrap();
            let b = srff_puf::srff::resolve_race(&clone, &cfg.node, &env, 0.0).unwrap();
            shift_ok &= a.bit == b.bit;
        }
    }
    checks.push(("global shift alone never flips a bit", shift_ok));

    let cfg = ExperimentConfig {
        n_dies: 200,
        ..ExperimentConfig::new(NodeKind::N90, 32).unwrap()
    };
    let one = dataset_bytes(&cfg, 1);
    let same = [4, 8].iter().all(|&t| dataset_bytes(&cfg, t) == one);
    checks.push(("byte-identical datasets on 1, 4 and 8 threads", same));

    let all_ok = checks.iter().all(|(_, ok)| *ok);
    for (name, ok) in &checks {
        println!("  {name}: {}", verdict(*ok));
    }
    println!("[{}] criterion 4: exact property suite", verdict(all_ok));
    assert!(all_ok);
}

#[test]
fn criterion_5_sampled_policy() {
    let mut worst: f64 = 0.0;
    for seed in 0..20u64 {
        let cfg = ExperimentConfig {
            n_dies: 100,
            seed: 1000 + seed,
            ..ExperimentConfig::new(NodeKind::N90, 128).unwrap()
        };
        let ds = run_experiment(&cfg).unwrap();
        let refs: Vec<BitString> = ds.references.iter().map(|r| r.bits.clone()).collect();
        let exact = uniqueness(&refs, &ComparisonPolicy::default()).unwrap();
        let sampled = uniqueness(&refs, &ComparisonPolicy::sampled(2000, seed)).unwrap();
        assert_eq!(exact.n_comparisons, 4950);
        assert_eq!(sampled.n_comparisons, 2000);
        worst = worst.max((sampled.mean_pct - exact.mean_pct).abs());
    }
    let ok = worst < SAMPLED_TOLERANCE_PCT;
    println!(
        "[{}] criterion 5: |sampled(2000) - all_pairs| max over 20 seeds = {worst:.3}% (< {SAMPLED_TOLERANCE_PCT}%)",
        verdict(ok)
    );
    assert!(ok);
}

#[test]
fn criterion_6_documented_exclusions() {
    // The <30% collision figure and the synthesis overhead tables are not
    // reproduced. Both collision estimators must still be emitted.
    let s = sweep();
    let mut ok = true;
    for r in &s.reports {
        let c = &r.collision;
        ok &= c.match_per_position.len() == r.n_bits
            && c.mismatch_per_position.len() == r.n_bits
            && (c.match_avg + c.mismatch_avg - 1.0).abs() < 1e-12;
    }
    let r128 = &s.reports[3];
    println!(
        "  N90 128-bit collision estimators: match {:.3}, mismatch {:.3} (informational)",
        r128.collision.match_avg, r128.collision.mismatch_avg
    );
    let refs = vec![BitString::zeros(4), BitString::zeros(4).complement()];
    ok &= collision(&refs, 0).unwrap().match_avg == 0.0;
    println!(
        "[{}] criterion 6: collision (<30%) and PPA overhead explicitly not reproduced; both collision estimators emitted",
        verdict(ok)
    );
    assert!(ok);
}
