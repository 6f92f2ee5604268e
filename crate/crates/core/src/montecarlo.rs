// SPDX-License-Identifier: Apache-2.0
//! Die populations and CRP experiments.
//!
//! A die is fully determined by `(seed, die_id)`; every evaluation-noise draw
//! by `(seed, die_id, cell, env, rep)`. Dies are independent, so they can be
//! built and evaluated in any order or in parallel with identical results.

use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::array::{full_response, ArrayLayout, Evaluation, NoNoise, NoiseSource};
use crate::bits::BitString;
use crate::error::{PufError, Result};
use crate::rng::{Purpose, StreamFactory, StreamId, MAX_DIES, MAX_ENVS, MAX_REPS};
use crate::srff::SrffCell;
use crate::variation::{
    sample_gate, sample_global_shift, EnvPoint, NodeKind, ProcessNode, VariationSpec,
};

/// Default stress temperatures, °C.
pub const DEFAULT_TEMPERATURES: [f64; 5] = [0.0, 20.0, 40.0, 60.0, 80.0];

/// Calibrated evaluation noise std, ps.
pub const DEFAULT_NOISE_STD: f64 = 0.005;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub node: ProcessNode,
    /// Key length in bits.
    #[serde(rename = "n_bits")]
    pub layout: ArrayLayout,
    pub variation: VariationSpec,
    pub seed: u64,
    pub n_dies: usize,
    /// Stress operating points. The reference point is always 25 °C.
    pub env_points: Vec<EnvPoint>,
    /// Std of the evaluation noise η, ps.
    pub noise_std: f64,
    /// Re-evaluations per stress point.
    pub n_reps: usize,
}

impl ExperimentConfig {
    pub fn new(node: NodeKind, n_bits: usize) -> Result<Self> {
        Ok(Self {
            node: ProcessNode::preset(node),
            layout: ArrayLayout::new(n_bits)?,
            variation: VariationSpec::default(),
            seed: 1,
            n_dies: 1000,
            env_points: DEFAULT_TEMPERATURES
                .iter()
                .map(|&t| EnvPoint::at(t))
                .collect::<Result<_>>()?,
            noise_std: DEFAULT_NOISE_STD,
            n_reps: 10,
        })
    }

    pub fn validate(&self) -> Result<()> {
        self.node.validate()?;
        self.variation.validate()?;
        let bad = |what: String| Err(PufError::InvalidConfig(what));
        if self.n_dies < 2 {
            return bad(format!("n_dies = {} must be >= 2", self.n_dies));
        }
        if self.n_dies as u64 > MAX_DIES {
            return bad(format!("n_dies = {} exceeds {MAX_DIES}", self.n_dies));
        }
        if self.env_points.is_empty() {
            return bad("env_points must not be empty".into());
        }
        if self.env_points.len() as u64 > MAX_ENVS {
            return bad(format!("at most {MAX_ENVS} env_points"));
        }
        for env in &self.env_points {
            env.validate()?;
        }
        if !(self.noise_std >= 0.0 && self.noise_std.is_finite()) {
            return bad(format!("noise_std = {} must be >= 0", self.noise_std));
        }
        if self.n_reps == 0 || self.n_reps as u64 > MAX_REPS {
            return bad(format!(
                "n_reps = {} must lie in [1, {MAX_REPS}]",
                self.n_reps
            ));
        }
        Ok(())
    }
}

/// How dies are distributed over threads.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Execution {
    Sequential,
    /// Rayon's current pool. Same as `Sequential` without the `parallel` feature.
    Parallel,
}

impl Default for Execution {
    fn default() -> Self {
        if cfg!(feature = "parallel") {
            Execution::Parallel
        } else {
            Execution::Sequential
        }
    }
}

/// Maps `f` over `0..n`, keeping index order in the output.
pub(crate) fn map_indexed<T, F>(n: usize, exec: Execution, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(usize) -> Result<T> + Sync + Send,
{
    match exec {
        #[cfg(feature = "parallel")]
        Execution::Parallel => {
            use rayon::prelude::*;
            (0..n).into_par_iter().map(f).collect()
        }
        _ => (0..n).map(f).collect(),
    }
}

/// One virtual die.
#[derive(Debug, Clone, PartialEq)]
pub struct DieSample {
    pub die_id: u32,
    pub global_shift: f64,
    pub cells: Vec<SrffCell>,
}

/// Per-position systematic skew, ps. Identical for every die.
pub fn position_offsets(cfg: &ExperimentConfig) -> Vec<f64> {
    let streams = StreamFactory::new(cfg.seed);
    let spec = &cfg.variation;
    (0..cfg.layout.n_bits())
        .map(|p| {
            let mut rng = streams.stream(StreamId::new(Purpose::PositionOffset).cell(p));
            let z: f64 = StandardNormal.sample(&mut rng);
            spec.mu_off + spec.sigma_off * z
        })
        .collect()
}

fn sample_die(
    cfg: &ExperimentConfig,
    streams: &StreamFactory,
    offsets: &[f64],
    die_id: u32,
) -> Result<DieSample> {
    let spec = &cfg.variation;
    let mut rng = streams.stream(StreamId::new(Purpose::GlobalShift).die(die_id));
    let global_shift = sample_global_shift(spec, &mut rng)?;
    let cells = offsets
        .iter()
        .enumerate()
        .map(|(p, &sys_offset)| {
            let mut rng = streams.stream(StreamId::new(Purpose::Gate).die(die_id).cell(p));
            Ok(SrffCell {
                nd1: sample_gate(spec, &cfg.node, global_shift, &mut rng)?,
                nd2: sample_gate(spec, &cfg.node, global_shift, &mut rng)?,
                sys_offset,
            })
        })
        .collect::<Result<_>>()?;
    Ok(DieSample {
        die_id,
        global_shift,
        cells,
    })
}

/// Builds die `die_id` of the configured population.
pub fn build_die(cfg: &ExperimentConfig, die_id: u32) -> Result<DieSample> {
    cfg.validate()?;
    sample_die(
        cfg,
        &StreamFactory::new(cfg.seed),
        &position_offsets(cfg),
        die_id,
    )
}

pub fn build_population(cfg: &ExperimentConfig) -> Result<Vec<DieSample>> {
    build_population_with(cfg, Execution::default())
}

pub fn build_population_with(cfg: &ExperimentConfig, exec: Execution) -> Result<Vec<DieSample>> {
    cfg.validate()?;
    let streams = StreamFactory::new(cfg.seed);
    let offsets = position_offsets(cfg);
    map_indexed(cfg.n_dies, exec, |i| {
        sample_die(cfg, &streams, &offsets, i as u32)
    })
}

/// Gaussian η for one `(die, env, rep)` evaluation, drawn per cell.
#[derive(Debug, Clone)]
pub struct EvalNoise<'a> {
    streams: &'a StreamFactory,
    die: u32,
    env: usize,
    rep: u32,
    std: f64,
}

impl<'a> EvalNoise<'a> {
    pub fn new(streams: &'a StreamFactory, die: u32, env: usize, rep: u32, std: f64) -> Self {
        Self {
            streams,
            die,
            env,
            rep,
            std,
        }
    }
}

impl NoiseSource for EvalNoise<'_> {
    fn eta(&self, position: usize) -> f64 {
        if self.std == 0.0 {
            return 0.0;
        }
        let id = StreamId::new(Purpose::EvalNoise)
            .die(self.die)
            .cell(position)
            .env(self.env)
            .rep(self.rep);
        let z: f64 = StandardNormal.sample(&mut self.streams.stream(id));
        self.std * z
    }
}

/// One response vector with its provenance.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ResponseBits {
    pub die_id: u32,
    pub env: String,
    /// Index into `env_points`; `None` for the reference evaluation.
    pub env_index: Option<usize>,
    pub rep: Option<u32>,
    /// Challenge id; `None` for a full-array read.
    pub challenge: Option<String>,
    pub bits: BitString,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CrpDataset {
    pub config: ExperimentConfig,
    pub sys_offsets: Vec<f64>,
    /// Noise-free responses at 25 °C, one per die in id order.
    pub references: Vec<ResponseBits>,
    /// Ordered by die, then env point, then rep.
    pub stress: Vec<ResponseBits>,
    /// Evaluations that hit Δ + η = 0 exactly.
    pub marginal_ties: u64,
}

impl CrpDataset {
    pub fn n_bits(&self) -> usize {
        self.config.layout.n_bits()
    }

    /// Stress responses of one die.
    pub fn stress_of(&self, die_index: usize) -> &[ResponseBits] {
        let per_die = self.config.env_points.len() * self.config.n_reps;
        &self.stress[die_index * per_die..(die_index + 1) * per_die]
    }

    /// Structural checks used after loading from disk.
    pub fn validate(&self) -> Result<()> {
        self.config.validate()?;
        let bad = |m: String| Err(PufError::CorruptDataset(m));
        let n = self.n_bits();
        if self.sys_offsets.len() != n {
            return bad(format!(
                "{} offsets for {n} positions",
                self.sys_offsets.len()
            ));
        }
        if self.references.len() != self.config.n_dies {
            return bad(format!(
                "{} references for {} dies",
                self.references.len(),
                self.config.n_dies
            ));
        }
        let per_die = self.config.env_points.len() * self.config.n_reps;
        if self.stress.len() != self.config.n_dies * per_die {
            return bad(format!(
                "{} stress responses, expected {}",
                self.stress.len(),
                self.config.n_dies * per_die
            ));
        }
        for (i, r) in self.references.iter().enumerate() {
            if r.die_id as usize != i || r.env_index.is_some() {
                return bad(format!("reference record {i} out of order"));
            }
        }
        for (i, r) in self.stress.iter().enumerate() {
            let die = i / per_die;
            let env = i % per_die / self.config.n_reps;
            let rep = i % self.config.n_reps;
            if r.die_id as usize != die || r.env_index != Some(env) || r.rep != Some(rep as u32) {
                return bad(format!("stress record {i} out of order"));
            }
        }
        if let Some(r) = self
            .references
            .iter()
            .chain(&self.stress)
            .find(|r| r.bits.len() != n)
        {
            return bad(format!(
                "die {} response has {} bits, expected {n}",
                r.die_id,
                r.bits.len()
            ));
        }
        Ok(())
    }
}

struct DieRun {
    reference: ResponseBits,
    stress: Vec<ResponseBits>,
    marginal: usize,
}

fn run_die(
    cfg: &ExperimentConfig,
    streams: &StreamFactory,
    offsets: &[f64],
    die_id: u32,
) -> Result<DieRun> {
    let die = sample_die(cfg, streams, offsets, die_id)?;
    let reference_env = EnvPoint::reference();
    let Evaluation { bits, mut marginal } =
        full_response(&die.cells, &cfg.layout, &cfg.node, &reference_env, &NoNoise)?;
    let reference = ResponseBits {
        die_id,
        env: reference_env.label,
        env_index: None,
        rep: None,
        challenge: None,
        bits,
    };
    let mut stress = Vec::with_capacity(cfg.env_points.len() * cfg.n_reps);
    for (e, env) in cfg.env_points.iter().enumerate() {
        for rep in 0..cfg.n_reps as u32 {
            let noise = EvalNoise::new(streams, die_id, e, rep, cfg.noise_std);
            let eval = full_response(&die.cells, &cfg.layout, &cfg.node, env, &noise)?;
            marginal += eval.marginal;
            stress.push(ResponseBits {
                die_id,
                env: env.label.clone(),
                env_index: Some(e),
                rep: Some(rep),
                challenge: None,
                bits: eval.bits,
            });
        }
    }
    Ok(DieRun {
        reference,
        stress,
        marginal,
    })
}

pub fn run_experiment(cfg: &ExperimentConfig) -> Result<CrpDataset> {
    run_experiment_with(cfg, Execution::default())
}

pub fn run_experiment_with(cfg: &ExperimentConfig, exec: Execution) -> Result<CrpDataset> {
    cfg.validate()?;
    let streams = StreamFactory::new(cfg.seed);
    let sys_offsets = position_offsets(cfg);
    let runs = map_indexed(cfg.n_dies, exec, |i| {
        run_die(cfg, &streams, &sys_offsets, i as u32)
    })?;
    let mut references = Vec::with_capacity(cfg.n_dies);
    let mut stress = Vec::with_capacity(cfg.n_dies * cfg.env_points.len() * cfg.n_reps);
    let mut marginal_ties = 0;
    for run in runs {
        references.push(run.reference);
        stress.extend(run.stress);
        marginal_ties += run.marginal as u64;
    }
    Ok(CrpDataset {
        config: cfg.clone(),
        sys_offsets,
        references,
        stress,
        marginal_ties,
    })
}
