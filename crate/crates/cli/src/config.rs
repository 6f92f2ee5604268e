// SPDX-License-Identifier: Apache-2.0
//! Run configuration file (TOML). Every key is optional; unknown keys are
//! rejected.
//!
//! ```toml
//! seed = 1
//! n_dies = 1000
//! node = "N90"
//! n_bits = 128
//! noise_std = 0.005
//! n_reps = 10
//! temperatures = [0, 20, 40, 60, 80]
//! out_dir = "out"
//!
//! [variation]        # any VariationSpec field
//! mu_off = 0.2
//!
//! [node_overrides]   # any of l_nom, d_nom, alpha, k_temp_nom, v_nom
//! alpha = 1.3
//!
//! [comparison]
//! mode = "all_pairs" # or "sampled"
//! n_sampled = 2000
//!
//! [sweep]
//! nodes = ["N90", "N45", "N32"]
//! n_bits = [16, 32, 64, 128]
//! ```

use std::path::{Path, PathBuf};

use serde::Deserialize;
use srff_puf::array::SUPPORTED_BITS;
use srff_puf::{
    ComparisonPolicy, EnvPoint, ExperimentConfig, NodeKind, PairMode, ProcessNode, VariationSpec,
};

use crate::error::CliError;

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub seed: Option<u64>,
    pub n_dies: Option<usize>,
    pub node: Option<NodeKind>,
    pub n_bits: Option<usize>,
    pub noise_std: Option<f64>,
    pub n_reps: Option<usize>,
    pub temperatures: Option<Vec<f64>>,
    pub out_dir: Option<PathBuf>,
    pub variation: Option<VariationSpec>,
    pub node_overrides: Option<NodeOverrides>,
    pub comparison: Option<ComparisonSection>,
    pub sweep: Option<SweepSection>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NodeOverrides {
    pub l_nom: Option<f64>,
    pub d_nom: Option<f64>,
    pub alpha: Option<f64>,
    pub k_temp_nom: Option<f64>,
    pub v_nom: Option<f64>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ComparisonSection {
    pub mode: Option<PairMode>,
    pub n_sampled: Option<usize>,
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    pub nodes: Option<Vec<NodeKind>>,
    pub n_bits: Option<Vec<usize>>,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        Self::parse(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
    }

    pub fn parse(text: &str) -> Result<Self, String> {
        toml::from_str(text).map_err(|e| e.to_string())
    }

    /// Experiment for one node and key length, with file overrides applied.
    pub fn experiment(&self, node: NodeKind, n_bits: usize) -> Result<ExperimentConfig, CliError> {
        let mut cfg = ExperimentConfig::new(node, n_bits).map_err(CliError::from_core)?;
        cfg.node = self.node_params(node);
        if let Some(v) = self.variation {
            cfg.variation = v;
        }
        if let Some(s) = self.seed {
            cfg.seed = s;
        }
        if let Some(n) = self.n_dies {
            cfg.n_dies = n;
        }
        if let Some(s) = self.noise_std {
            cfg.noise_std = s;
        }
        if let Some(r) = self.n_reps {
            cfg.n_reps = r;
        }
        if let Some(ts) = &self.temperatures {
            cfg.env_points = ts
                .iter()
                .map(|&t| EnvPoint::at(t))
                .collect::<srff_puf::Result<_>>()
                .map_err(CliError::from_core)?;
        }
        cfg.validate().map_err(CliError::from_core)?;
        Ok(cfg)
    }

    /// The single experiment used by `generate`.
    pub fn primary_experiment(&self) -> Result<ExperimentConfig, CliError> {
        self.experiment(
            self.node.unwrap_or(NodeKind::N90),
            self.n_bits.unwrap_or(128),
        )
    }

    pub fn sweep_matrix(&self) -> (Vec<NodeKind>, Vec<usize>) {
        let s = self.sweep.clone().unwrap_or_default();
        (
            s.nodes.unwrap_or_else(|| NodeKind::ALL.to_vec()),
            s.n_bits.unwrap_or_else(|| SUPPORTED_BITS.to_vec()),
        )
    }

    pub fn policy(&self, default_seed: u64) -> ComparisonPolicy {
        let c = self.comparison.clone().unwrap_or_default();
        let d = ComparisonPolicy::default();
        ComparisonPolicy {
            mode: c.mode.unwrap_or(d.mode),
            n_sampled: c.n_sampled.unwrap_or(d.n_sampled),
            seed: c.seed.unwrap_or(default_seed),
        }
    }

    fn node_params(&self, node: NodeKind) -> ProcessNode {
        let mut p = ProcessNode::preset(node);
        if let Some(o) = &self.node_overrides {
            p.l_nom = o.l_nom.unwrap_or(p.l_nom);
            p.d_nom = o.d_nom.unwrap_or(p.d_nom);
            p.alpha = o.alpha.unwrap_or(p.alpha);
            p.k_temp_nom = o.k_temp_nom.unwrap_or(p.k_temp_nom);
            p.v_nom = o.v_nom.unwrap_or(p.v_nom);
        }
        p
    }
}
