// SPDX-License-Identifier: Apache-2.0
//! PUF quality metrics.
//!
//! All statistics are accumulated as integer counts and converted to
//! fractions once at the end, so results do not depend on reduction order.
//! Histograms are indexed by absolute Hamming distance; summary percentages
//! use distance normalized by key length.

use rand::seq::index;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::bits::BitString;
use crate::error::{PufError, Result};
use crate::montecarlo::{map_indexed, CrpDataset, Execution, ExperimentConfig};
use crate::rng::{Purpose, StreamFactory, StreamId};

pub fn hamming_distance(a: &BitString, b: &BitString) -> Result<usize> {
    a.hamming(b)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PairMode {
    AllPairs,
    Sampled,
}

/// Which die pairs enter the uniqueness estimate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ComparisonPolicy {
    pub mode: PairMode,
    pub n_sampled: usize,
    pub seed: u64,
}

impl Default for ComparisonPolicy {
    fn default() -> Self {
        Self {
            mode: PairMode::AllPairs,
            n_sampled: 2000,
            seed: 0,
        }
    }
}

impl ComparisonPolicy {
    pub fn sampled(n_sampled: usize, seed: u64) -> Self {
        Self {
            mode: PairMode::Sampled,
            n_sampled,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.mode == PairMode::Sampled && self.n_sampled == 0 {
            return Err(PufError::InvalidConfig("n_sampled must be >= 1".into()));
        }
        Ok(())
    }
}

/// `(i, j)` with `i < j` for the `k`-th pair in row-major order.
fn pairs(m: usize, policy: &ComparisonPolicy) -> Vec<(usize, usize)> {
    let total = m * (m - 1) / 2;
    let all = || {
        (0..m)
            .flat_map(|i| (i + 1..m).map(move |j| (i, j)))
            .collect()
    };
    if policy.mode == PairMode::AllPairs || policy.n_sampled >= total {
        return all();
    }
    let mut rng = StreamFactory::new(policy.seed).stream(StreamId::new(Purpose::PairSampling));
    let mut picked = index::sample(&mut rng, total, policy.n_sampled).into_vec();
    picked.sort_unstable();
    // walk the sorted ranks row by row
    let mut out = Vec::with_capacity(picked.len());
    let (mut row, mut row_start) = (0usize, 0usize);
    for k in picked {
        while k >= row_start + (m - 1 - row) {
            row_start += m - 1 - row;
            row += 1;
        }
        out.push((row, row + 1 + (k - row_start)));
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Uniqueness {
    pub mean_pct: f64,
    /// Pair counts by absolute distance, `0..=n_bits`.
    pub histogram: Vec<u64>,
    pub n_comparisons: u64,
}

pub fn uniqueness(refs: &[BitString], policy: &ComparisonPolicy) -> Result<Uniqueness> {
    uniqueness_with(refs, policy, Execution::default())
}

pub fn uniqueness_with(
    refs: &[BitString],
    policy: &ComparisonPolicy,
    exec: Execution,
) -> Result<Uniqueness> {
    policy.validate()?;
    if refs.len() < 2 {
        return Err(PufError::TooFewDies {
            needed: 2,
            got: refs.len(),
        });
    }
    let n = refs[0].len();
    let pairs = pairs(refs.len(), policy);
    let distances = map_indexed(pairs.len(), exec, |k| {
        let (i, j) = pairs[k];
        refs[i].hamming(&refs[j])
    })?;
    let mut histogram = vec![0u64; n + 1];
    let mut total = 0u64;
    for d in &distances {
        histogram[*d] += 1;
        total += *d as u64;
    }
    let n_comparisons = distances.len() as u64;
    Ok(Uniqueness {
        mean_pct: pct(total, n_comparisons * n as u64),
        histogram,
        n_comparisons,
    })
}

fn pct(num: u64, den: u64) -> f64 {
    if den == 0 {
        0.0
    } else {
        100.0 * num as f64 / den as f64
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnvReliability {
    pub label: String,
    pub temperature: f64,
    /// Response counts by absolute distance to the die's reference.
    pub histogram: Vec<u64>,
    pub n_responses: u64,
    pub frac_hd_zero_pct: f64,
    pub ber_pct: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Reliability {
    pub frac_hd_zero_pct: f64,
    pub mean_ber_pct: f64,
    pub n_responses: u64,
    pub per_env: Vec<EnvReliability>,
}

pub fn reliability(dataset: &CrpDataset) -> Result<Reliability> {
    if dataset.stress.is_empty() {
        return Err(PufError::EmptyStress);
    }
    let n = dataset.n_bits();
    let envs = &dataset.config.env_points;
    let mut hist = vec![vec![0u64; n + 1]; envs.len()];
    for r in &dataset.stress {
        let reference = dataset.references.get(r.die_id as usize).ok_or_else(|| {
            PufError::CorruptDataset(format!("no reference for die {}", r.die_id))
        })?;
        let e = r
            .env_index
            .filter(|&e| e < envs.len())
            .ok_or_else(|| PufError::CorruptDataset("stress record without env index".into()))?;
        hist[e][r.bits.hamming(&reference.bits)?] += 1;
    }
    let summarize = |h: &[u64]| {
        let count: u64 = h.iter().sum();
        let flips: u64 = h.iter().enumerate().map(|(d, c)| d as u64 * c).sum();
        (count, h[0], flips)
    };
    let mut per_env = Vec::with_capacity(envs.len());
    let (mut count, mut zero, mut flips) = (0, 0, 0);
    for (env, h) in envs.iter().zip(hist) {
        let (c, z, f) = summarize(&h);
        count += c;
        zero += z;
        flips += f;
        per_env.push(EnvReliability {
            label: env.label.clone(),
            temperature: env.temperature,
            n_responses: c,
            frac_hd_zero_pct: pct(z, c),
            ber_pct: pct(f, c * n as u64),
            histogram: h,
        });
    }
    Ok(Reliability {
        frac_hd_zero_pct: pct(zero, count),
        mean_ber_pct: pct(flips, count * n as u64),
        n_responses: count,
        per_env,
    })
}

fn ones_per_position(refs: &[BitString]) -> Result<Vec<u64>> {
    let n = refs.first().map_or(0, BitString::len);
    let mut ones = vec![0u64; n];
    for r in refs {
        if r.len() != n {
            return Err(PufError::LengthMismatch {
                left: n,
                right: r.len(),
            });
        }
        for (l, b) in r.iter().enumerate() {
            ones[l] += b as u64;
        }
    }
    Ok(ones)
}

/// Fraction of dies with a 0 at each position.
pub fn uniformity(refs: &[BitString]) -> Result<Vec<f64>> {
    let m = refs.len() as u64;
    if m == 0 {
        return Err(PufError::TooFewDies { needed: 1, got: 0 });
    }
    Ok(ones_per_position(refs)?
        .into_iter()
        .map(|o| (m - o) as f64 / m as f64)
        .collect())
}

/// Fraction of dies with a 1 at each position.
pub fn bit_aliasing(refs: &[BitString]) -> Result<Vec<f64>> {
    let m = refs.len() as u64;
    if m == 0 {
        return Err(PufError::TooFewDies { needed: 1, got: 0 });
    }
    Ok(ones_per_position(refs)?
        .into_iter()
        .map(|o| o as f64 / m as f64)
        .collect())
}

/// Per-position agreement with one randomly chosen reference die.
///
/// Two estimators are reported because the target definition is ambiguous:
/// `match_*` is the fraction of other dies equal to the reference at a
/// position, `mismatch_*` its complement.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Collision {
    pub reference_die: usize,
    pub match_per_position: Vec<f64>,
    pub mismatch_per_position: Vec<f64>,
    pub match_avg: f64,
    pub mismatch_avg: f64,
}

pub fn collision_reference_die(n_dies: usize, seed: u64) -> usize {
    let mut rng = StreamFactory::new(seed).stream(StreamId::new(Purpose::CollisionReference));
    rng.random_range(0..n_dies)
}

pub fn collision(refs: &[BitString], reference_die: usize) -> Result<Collision> {
    if refs.len() < 2 {
        return Err(PufError::TooFewDies {
            needed: 2,
            got: refs.len(),
        });
    }
    let reference = refs.get(reference_die).ok_or_else(|| {
        PufError::InvalidConfig(format!("reference die {reference_die} out of range"))
    })?;
    let n = reference.len();
    let others = (refs.len() - 1) as u64;
    let mut matches = vec![0u64; n];
    for (i, r) in refs.iter().enumerate() {
        if i == reference_die {
            continue;
        }
        if r.len() != n {
            return Err(PufError::LengthMismatch {
                left: n,
                right: r.len(),
            });
        }
        for (l, m) in matches.iter_mut().enumerate() {
            *m += (r.get(l) == reference.get(l)) as u64;
        }
    }
    let total_match: u64 = matches.iter().sum();
    let denom = others * n as u64;
    Ok(Collision {
        reference_die,
        match_per_position: matches.iter().map(|&c| c as f64 / others as f64).collect(),
        mismatch_per_position: matches
            .iter()
            .map(|&c| (others - c) as f64 / others as f64)
            .collect(),
        match_avg: total_match as f64 / denom as f64,
        mismatch_avg: (denom - total_match) as f64 / denom as f64,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub config: ExperimentConfig,
    pub policy: ComparisonPolicy,
    pub n_bits: usize,
    pub n_dies: usize,
    pub mean_inter_hd_pct: f64,
    pub inter_hd_histogram: Vec<u64>,
    pub n_comparisons: u64,
    pub frac_hd_zero_pct: f64,
    pub mean_ber_pct: f64,
    pub intra_hd_histograms: Vec<EnvReliability>,
    pub p_zero_per_position: Vec<f64>,
    pub p_zero_mean: f64,
    pub bit_aliasing_per_position: Vec<f64>,
    pub collision: Collision,
    pub marginal_ties: u64,
}

pub fn evaluate(dataset: &CrpDataset, policy: &ComparisonPolicy) -> Result<MetricsReport> {
    let refs: Vec<BitString> = dataset.references.iter().map(|r| r.bits.clone()).collect();
    let uniq = uniqueness(&refs, policy)?;
    let rel = reliability(dataset)?;
    let p_zero = uniformity(&refs)?;
    let p_zero_mean = p_zero.iter().sum::<f64>() / p_zero.len() as f64;
    let collision = collision(&refs, collision_reference_die(refs.len(), policy.seed))?;
    Ok(MetricsReport {
        config: dataset.config.clone(),
        policy: *policy,
        n_bits: dataset.n_bits(),
        n_dies: refs.len(),
        mean_inter_hd_pct: uniq.mean_pct,
        inter_hd_histogram: uniq.histogram,
        n_comparisons: uniq.n_comparisons,
        frac_hd_zero_pct: rel.frac_hd_zero_pct,
        mean_ber_pct: rel.mean_ber_pct,
        intra_hd_histograms: rel.per_env,
        p_zero_per_position: p_zero,
        p_zero_mean,
        bit_aliasing_per_position: bit_aliasing(&refs)?,
        collision,
        marginal_ties: dataset.marginal_ties,
    })
}
