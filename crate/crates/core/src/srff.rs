// SPDX-License-Identifier: Apache-2.0
//! The SR flip-flop cell.
//!
//! In regular mode the cell is an ordinary NAND latch. In PUF mode both inputs
//! are pulsed high together and released; the two cross-coupled feedback
//! gates then race and whichever is faster decides the settled output. Only
//! the feedback pair is modeled, the input gates are treated as ideal.
//!
//! Sign convention: ND1 (driving Q) faster means Q settles to 1.

use crate::error::Result;
use crate::variation::{gate_delay, EnvPoint, GateParams, ProcessNode};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SrffCell {
    /// Feedback NAND driving Q.
    pub nd1: GateParams,
    /// Feedback NAND driving Q̄.
    pub nd2: GateParams,
    /// Layout skew added to the ND1 path, ps. Shared by every die at this position.
    pub sys_offset: f64,
}

impl SrffCell {
    /// The same cell with its gates exchanged and the skew moved to the other side.
    pub fn mirrored(&self) -> Self {
        Self {
            nd1: self.nd2,
            nd2: self.nd1,
            sys_offset: -self.sys_offset,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SrffState {
    pub q: bool,
    pub q_bar: bool,
    /// False only in the forbidden S=R=1 state where Q = Q̄ = 1.
    pub consistent: bool,
}

impl SrffState {
    pub fn holding(q: bool) -> Self {
        Self {
            q,
            q_bar: !q,
            consistent: true,
        }
    }
}

impl Default for SrffState {
    fn default() -> Self {
        Self::holding(false)
    }
}

/// Regular-mode truth table.
pub fn srff_step(s: bool, r: bool, prev: SrffState) -> SrffState {
    match (s, r) {
        (true, false) => SrffState::holding(true),
        (false, true) => SrffState::holding(false),
        (false, false) => prev,
        (true, true) => SrffState {
            q: true,
            q_bar: true,
            consistent: false,
        },
    }
}

/// Result of releasing the forbidden state.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RaceOutcome {
    pub bit: bool,
    /// Δ + η was exactly zero; the bit is the tie-break value.
    pub marginal: bool,
}

/// Signed race mismatch Δ = (d(ND1) + offset) − d(ND2), ps.
pub fn race_delta(cell: &SrffCell, node: &ProcessNode, env: &EnvPoint) -> Result<f64> {
    let d1 = gate_delay(node, &cell.nd1, env)?;
    let d2 = gate_delay(node, &cell.nd2, env)?;
    Ok(d1 + cell.sys_offset - d2)
}

/// Settled Q after the race, with evaluation noise `eta` (ps) added to Δ.
pub fn resolve_race(
    cell: &SrffCell,
    node: &ProcessNode,
    env: &EnvPoint,
    eta: f64,
) -> Result<RaceOutcome> {
    let total = race_delta(cell, node, env)? + eta;
    Ok(RaceOutcome {
        bit: total < 0.0,
        marginal: total == 0.0,
    })
}

/// Distance from the metastable point, |Δ| in ps.
pub fn margin(cell: &SrffCell, node: &ProcessNode, env: &EnvPoint) -> Result<f64> {
    Ok(race_delta(cell, node, env)?.abs())
}
