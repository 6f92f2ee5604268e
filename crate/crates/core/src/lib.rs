// SPDX-License-Identifier: Apache-2.0
//! Monte Carlo simulator for SR flip-flop race-condition PUFs.
//!
//! A cell's bit is decided by which of its two cross-coupled feedback NAND
//! gates wins the race after the forbidden `S = R = 1` input is released.
//! Process variation in channel length sets the winner per die; temperature
//! and evaluation noise occasionally flip cells that sit close to the
//! metastable point.
//!
//! * [`variation`]: truncated-normal length variation and the gate-delay model
//! * [`srff`]: the latch truth table and race resolution
//! * [`array`]: 4×4 centroid grids, challenge decoding, response assembly
//! * [`montecarlo`]: die populations and CRP experiments
//! * [`metrics`]: uniqueness, reliability, uniformity, bit-aliasing, collision
//! * [`dataset`]: NDJSON persistence
//!
//! With the `parallel` feature (default) dies are evaluated on the rayon
//! pool. Every random draw comes from a counter-keyed substream, so results
//! are bit-identical for any thread count.

pub mod array;
pub mod bits;
pub mod dataset;
pub mod error;
pub mod metrics;
pub mod montecarlo;
pub mod rng;
pub mod srff;
pub mod variation;

pub use array::{ArrayLayout, Challenge, Selection};
pub use bits::BitString;
pub use error::{PufError, Result};
pub use metrics::{evaluate, ComparisonPolicy, MetricsReport, PairMode};
pub use montecarlo::{
    build_population, run_experiment, run_experiment_with, CrpDataset, DieSample, Execution,
    ExperimentConfig, ResponseBits,
};
pub use variation::{EnvPoint, NodeKind, ProcessNode, VariationSpec};
