// SPDX-License-Identifier: Apache-2.0
//! One-time calibration of the evaluation-noise std and the temperature
//! sensitivity spread.
//!
//! Sweeps `noise_std × sigma_k` on 90 nm populations for every key length and
//! ranks each point by the squared distance of its HD=0 fractions to the
//! target reliability values. Uniqueness and mean P(zero) are printed
//! alongside so the offset defaults can be checked in the same pass.
//!
//!   cargo run -r -p srff-puf --example calibrate -- [n_dies] [seed]

use srff_puf::metrics::{reliability, uniformity, uniqueness};
use srff_puf::{run_experiment, BitString, ComparisonPolicy, ExperimentConfig, NodeKind};

/// HD=0 targets, percent, for 16/32/64/128-bit keys at 90 nm.
const TARGETS: [(usize, f64); 4] = [(16, 92.3), (32, 92.2), (64, 90.7), (128, 92.7)];

const NOISE_GRID: [f64; 6] = [0.0, 0.005, 0.01, 0.02, 0.05, 0.15];
const SIGMA_K_GRID: [f64; 4] = [0.0, 0.005, 0.01, 0.02];
/// Mean layout skew, ps. Flips at temperature come mostly from this term, so
/// it is swept together with the two noise parameters.
const MU_OFF_GRID: [f64; 4] = [0.2, 0.25, 0.3, 0.4];

fn main() -> srff_puf::Result<()> {
    let mut args = std::env::args().skip(1);
    let n_dies: usize = args.next().map_or(1000, |s| s.parse().expect("n_dies"));
    let seed: u64 = args.next().map_or(1, |s| s.parse().expect("seed"));

    let mut rows = Vec::new();
    for &mu_off in &MU_OFF_GRID {
        for &noise_std in &NOISE_GRID {
            for &sigma_k in &SIGMA_K_GRID {
                let mut fracs = Vec::new();
                let mut extras = Vec::new();
                for &(bits, _) in &TARGETS {
                    let mut cfg = ExperimentConfig::new(NodeKind::N90, bits)?;
                    cfg.n_dies = n_dies;
                    cfg.seed = seed;
                    cfg.noise_std = noise_std;
                    cfg.variation.sigma_k = sigma_k;
                    cfg.variation.mu_off = mu_off;
                    let ds = run_experiment(&cfg)?;
                    let rel = reliability(&ds)?;
                    let refs: Vec<BitString> =
                        ds.references.iter().map(|r| r.bits.clone()).collect();
                    let u = uniqueness(&refs, &ComparisonPolicy::default())?;
                    let p0 = uniformity(&refs)?;
                    let p0_mean = p0.iter().sum::<f64>() / p0.len() as f64;
                    fracs.push(rel.frac_hd_zero_pct);
                    extras.push((rel.mean_ber_pct, u.mean_pct, p0_mean));
                }
                let sse: f64 = fracs
                    .iter()
                    .zip(TARGETS)
                    .map(|(f, (_, t))| (f - t).powi(2))
                    .sum();
                rows.push((sse, mu_off, noise_std, sigma_k, fracs, extras));
            }
        }
    }
    rows.sort_by(|a, b| a.0.total_cmp(&b.0));
    println!("mu_off noise_std sigma_k   sse     hd0[16,32,64,128]              ber%(128) uniq%(128) p0(128)");
    for (sse, mu, noise, sk, fracs, extras) in &rows {
        let (ber, uniq, p0) = extras[3];
        println!(
            "{mu:>6.2} {noise:>8.3} {sk:>7.3} {sse:>7.1}   {:>6.2} {:>6.2} {:>6.2} {:>6.2}   {ber:>8.4} {uniq:>9.2} {p0:>7.3}",
            fracs[0], fracs[1], fracs[2], fracs[3]
        );
    }
    Ok(())
}
