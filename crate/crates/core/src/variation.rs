// SPDX-License-Identifier: Apache-2.0
//! Process variation and the behavioral gate-delay model.
//!
//! Channel length is the only varied device parameter. A die draws one global
//! (inter-die) fractional shift; every gate on it then draws a local
//! (intra-die) deviation on top. Both are zero-mean normals truncated at
//! their stated envelopes by rejection.
//!
//! Delay follows `d_nom * length_factor^alpha * (1 + k_temp * (T - 25))`.

// `!(x > 0.0)` also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{PufError, Result};

/// Reference temperature of the delay model, °C.
pub const T_REF: f64 = 25.0;

pub const T_MIN: f64 = -40.0;
pub const T_MAX: f64 = 125.0;

/// Resample cap for the truncated-normal rejection loop.
pub const MAX_RESAMPLES: usize = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum NodeKind {
    N90,
    N45,
    N32,
}

impl NodeKind {
    pub const ALL: [NodeKind; 3] = [NodeKind::N90, NodeKind::N45, NodeKind::N32];
}

impl fmt::Display for NodeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            NodeKind::N90 => "N90",
            NodeKind::N45 => "N45",
            NodeKind::N32 => "N32",
        })
    }
}

impl FromStr for NodeKind {
    type Err = PufError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim_start_matches(['n', 'N']).trim_end_matches("nm") {
            "90" => Ok(NodeKind::N90),
            "45" => Ok(NodeKind::N45),
            "32" => Ok(NodeKind::N32),
            _ => Err(PufError::InvalidConfig(format!(
                "unknown process node {s:?}"
            ))),
        }
    }
}

/// Nominal parameters of one CMOS process node.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProcessNode {
    pub name: NodeKind,
    /// Nominal channel length, nm.
    pub l_nom: f64,
    /// Nominal NAND propagation delay, ps.
    pub d_nom: f64,
    /// Delay-vs-length exponent.
    pub alpha: f64,
    /// Nominal fractional delay change per °C.
    pub k_temp_nom: f64,
    /// Supply voltage, V. Held fixed.
    pub v_nom: f64,
}

impl ProcessNode {
    pub fn preset(name: NodeKind) -> Self {
        let (l_nom, d_nom) = match name {
            NodeKind::N90 => (90.0, 35.0),
            NodeKind::N45 => (45.0, 22.0),
            NodeKind::N32 => (32.0, 18.0),
        };
        Self {
            name,
            l_nom,
            d_nom,
            alpha: 1.3,
            k_temp_nom: 0.0012,
            v_nom: 1.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str| {
            Err(PufError::InvalidConfig(format!(
                "{} node: {what}",
                self.name
            )))
        };
        if !(self.l_nom > 0.0) {
            return bad("l_nom must be > 0");
        }
        if !(self.d_nom > 0.0) {
            return bad("d_nom must be > 0");
        }
        if !(self.alpha > 0.0) {
            return bad("alpha must be > 0");
        }
        if !(self.k_temp_nom > 0.0) {
            return bad("k_temp_nom must be > 0");
        }
        if !(self.v_nom > 0.0) {
            return bad("v_nom must be > 0");
        }
        Ok(())
    }
}

/// Statistical envelope of the process variation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct VariationSpec {
    /// Max fractional global (inter-die) length deviation.
    pub inter_frac: f64,
    /// Max fractional local (intra-die) length deviation.
    pub intra_frac: f64,
    /// Truncation bound in standard deviations; sigma = bound / trunc_sigma.
    pub trunc_sigma: f64,
    /// Relative spread of per-gate temperature sensitivity.
    pub sigma_k: f64,
    /// Spread of the per-position systematic offset, ps.
    pub sigma_off: f64,
    /// Mean per-position systematic offset, ps.
    pub mu_off: f64,
}

impl Default for VariationSpec {
    fn default() -> Self {
        Self {
            inter_frac: 0.33,
            intra_frac: 0.15,
            trunc_sigma: 3.0,
            sigma_k: 0.0,
            sigma_off: 0.08,
            mu_off: 0.2,
        }
    }
}

impl VariationSpec {
    pub fn validate(&self) -> Result<()> {
        let bad = |what: String| Err(PufError::InvalidConfig(format!("variation: {what}")));
        for (name, v) in [
            ("inter_frac", self.inter_frac),
            ("intra_frac", self.intra_frac),
        ] {
            if !(0.0..1.0).contains(&v) {
                return bad(format!("{name} = {v} must lie in [0, 1)"));
            }
        }
        if self.inter_frac + self.intra_frac >= 1.0 {
            return bad("inter_frac + intra_frac must stay below 1".into());
        }
        if !(self.trunc_sigma > 0.0) {
            return bad(format!("trunc_sigma = {} must be > 0", self.trunc_sigma));
        }
        // k_temp = k_nom * (1 + delta) with |delta| <= 3 sigma_k must stay positive
        if !(0.0..1.0 / 3.0).contains(&self.sigma_k) {
            return bad(format!("sigma_k = {} must lie in [0, 1/3)", self.sigma_k));
        }
        if !(self.sigma_off >= 0.0) {
            return bad(format!("sigma_off = {} must be >= 0", self.sigma_off));
        }
        if !self.mu_off.is_finite() {
            return bad("mu_off must be finite".into());
        }
        Ok(())
    }

    /// Largest possible |length_factor - 1|.
    pub fn max_total_frac(&self) -> f64 {
        self.inter_frac + self.intra_frac
    }
}

/// Device parameters of one NAND gate on one die.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GateParams {
    /// Multiplier on `l_nom`, global shift and local deviation combined.
    pub length_factor: f64,
    /// Fractional delay change per °C for this gate.
    pub k_temp: f64,
}

impl GateParams {
    pub fn nominal(node: &ProcessNode) -> Self {
        Self {
            length_factor: 1.0,
            k_temp: node.k_temp_nom,
        }
    }
}

/// Operating point for one evaluation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnvPoint {
    /// °C
    pub temperature: f64,
    pub label: String,
}

impl EnvPoint {
    pub fn new(temperature: f64, label: impl Into<String>) -> Result<Self> {
        let env = Self {
            temperature,
            label: label.into(),
        };
        env.validate()?;
        Ok(env)
    }

    /// Labeled `T<temp>C`.
    pub fn at(temperature: f64) -> Result<Self> {
        Self::new(temperature, format!("T{temperature}C"))
    }

    pub fn reference() -> Self {
        Self {
            temperature: T_REF,
            label: "reference".into(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(T_MIN..=T_MAX).contains(&self.temperature) {
            return Err(PufError::TemperatureOutOfRange(self.temperature));
        }
        Ok(())
    }
}

/// Zero-mean normal with standard deviation `std`, resampled until `|x| <= bound`.
pub fn truncated_normal<R: Rng + ?Sized>(rng: &mut R, std: f64, bound: f64) -> Result<f64> {
    if std == 0.0 || bound == 0.0 {
        return Ok(0.0);
    }
    for _ in 0..MAX_RESAMPLES {
        let z: f64 = StandardNormal.sample(rng);
        let x = z * std;
        if x.abs() <= bound {
            return Ok(x);
        }
    }
    Err(PufError::DegenerateSpec {
        bound,
        attempts: MAX_RESAMPLES,
    })
}

/// Inter-die fractional length shift for one die.
pub fn sample_global_shift<R: Rng + ?Sized>(spec: &VariationSpec, rng: &mut R) -> Result<f64> {
    truncated_normal(rng, spec.inter_frac / spec.trunc_sigma, spec.inter_frac)
}

/// One gate on a die with the given global shift.
pub fn sample_gate<R: Rng + ?Sized>(
    spec: &VariationSpec,
    node: &ProcessNode,
    global_shift: f64,
    rng: &mut R,
) -> Result<GateParams> {
    let local = truncated_normal(rng, spec.intra_frac / spec.trunc_sigma, spec.intra_frac)?;
    let delta_k = truncated_normal(rng, spec.sigma_k, 3.0 * spec.sigma_k)?;
    Ok(GateParams {
        length_factor: 1.0 + global_shift + local,
        k_temp: node.k_temp_nom * (1.0 + delta_k),
    })
}

/// Propagation delay of one gate, ps.
pub fn gate_delay(node: &ProcessNode, gate: &GateParams, env: &EnvPoint) -> Result<f64> {
    let delay = node.d_nom
        * gate.length_factor.powf(node.alpha)
        * (1.0 + gate.k_temp * (env.temperature - T_REF));
    if !(delay > 0.0) {
        return Err(PufError::NonPositiveDelay {
            delay_ps: delay,
            length_factor: gate.length_factor,
            k_temp: gate.k_temp,
            temperature: env.temperature,
        });
    }
    Ok(delay)
}
