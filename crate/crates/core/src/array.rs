// SPDX-License-Identifier: Apache-2.0
//! Dual-mode SR-FF array with 4×4 centroid grids.
//!
//! An `n`-bit array is `n / 16` stacked 4×4 grids. Each grid is split into
//! four 2×2 MUX groups:
//!
//! ```text
//!   col  0  1 | 2  3
//! row 0  g0   |  g1
//! row 1       |
//!     -------------
//! row 2  g2   |  g3
//! row 3       |
//! ```
//!
//! Bit position `p` of a full response is cell `local` of group `group` in
//! grid `grid`, where `p = grid * 16 + group * 4 + local` and `local` is the
//! row-major index inside the 2×2 group.
//!
//! A selector word is three bits: bits 0–1 choose the cell inside the group,
//! bit 2 is the mode (1 = PUF, 0 = regular register).

use serde::{Deserialize, Serialize};

use crate::bits::BitString;
use crate::error::{PufError, Result};
use crate::srff::{resolve_race, srff_step, SrffCell, SrffState};
use crate::variation::{EnvPoint, ProcessNode};

pub const GRID_ROWS: usize = 4;
pub const GRID_COLS: usize = 4;
pub const CELLS_PER_GRID: usize = GRID_ROWS * GRID_COLS;
pub const GROUPS_PER_GRID: usize = 4;
pub const CELLS_PER_GROUP: usize = 4;
pub const SELECTOR_BITS: usize = 3;
pub const MODE_BIT: u8 = 0b100;
pub const SUPPORTED_BITS: [usize; 4] = [16, 32, 64, 128];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "usize", into = "usize")]
pub struct ArrayLayout {
    n_bits: usize,
}

impl ArrayLayout {
    pub fn new(n_bits: usize) -> Result<Self> {
        if !SUPPORTED_BITS.contains(&n_bits) {
            return Err(PufError::InvalidConfig(format!(
                "key length {n_bits} not one of {SUPPORTED_BITS:?}"
            )));
        }
        Ok(Self { n_bits })
    }

    pub fn n_bits(&self) -> usize {
        self.n_bits
    }

    pub fn n_grids(&self) -> usize {
        self.n_bits / CELLS_PER_GRID
    }

    pub fn n_groups(&self) -> usize {
        self.n_grids() * GROUPS_PER_GRID
    }

    /// Bit position of `(grid, group, local)`.
    pub fn position(&self, grid: usize, group: usize, local: usize) -> usize {
        grid * CELLS_PER_GRID + group * CELLS_PER_GROUP + local
    }

    /// Physical `(grid, row, col)` of a bit position.
    pub fn coordinates(&self, position: usize) -> (usize, usize, usize) {
        let grid = position / CELLS_PER_GRID;
        let group = position % CELLS_PER_GRID / CELLS_PER_GROUP;
        let local = position % CELLS_PER_GROUP;
        let row = 2 * (group / 2) + local / 2;
        let col = 2 * (group % 2) + local % 2;
        (grid, row, col)
    }
}

impl TryFrom<usize> for ArrayLayout {
    type Error = PufError;

    fn try_from(n_bits: usize) -> Result<Self> {
        Self::new(n_bits)
    }
}

impl From<ArrayLayout> for usize {
    fn from(layout: ArrayLayout) -> usize {
        layout.n_bits
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Regular,
    Puf,
}

/// MUX selector words for one query.
///
/// Each MUX group reads `rounds` selectors in sequence. Words are stored
/// grid-major, then group, then round.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Challenge {
    rounds: usize,
    words: Vec<u8>,
}

impl Challenge {
    pub fn new(rounds: usize, words: Vec<u8>) -> Self {
        Self { rounds, words }
    }

    /// One PUF-mode selector per group, all choosing `local`.
    pub fn uniform(layout: &ArrayLayout, local: u8) -> Self {
        Self::new(1, vec![MODE_BIT | (local & 0b11); layout.n_groups()])
    }

    /// Reads every cell of every group, in position order.
    pub fn all_cells(layout: &ArrayLayout) -> Self {
        let words = (0..layout.n_groups())
            .flat_map(|_| (0..CELLS_PER_GROUP as u8).map(|l| MODE_BIT | l))
            .collect();
        Self::new(CELLS_PER_GROUP, words)
    }

    /// Regular (non-PUF) mode query.
    pub fn regular(layout: &ArrayLayout) -> Self {
        Self::new(1, vec![0; layout.n_groups()])
    }

    pub fn rounds(&self) -> usize {
        self.rounds
    }

    pub fn words(&self) -> &[u8] {
        &self.words
    }

    /// Little-endian bit packing: word `i` occupies bits `3i..3i+3`.
    pub fn to_packed(&self) -> Vec<u8> {
        let mut out = vec![0u8; (self.words.len() * SELECTOR_BITS).div_ceil(8)];
        for (i, &w) in self.words.iter().enumerate() {
            for b in 0..SELECTOR_BITS {
                if w >> b & 1 == 1 {
                    let bit = i * SELECTOR_BITS + b;
                    out[bit / 8] |= 1 << (bit % 8);
                }
            }
        }
        out
    }

    pub fn from_packed(layout: &ArrayLayout, rounds: usize, packed: &[u8]) -> Result<Self> {
        let n_words = layout.n_groups() * rounds;
        if packed.len() != (n_words * SELECTOR_BITS).div_ceil(8) {
            return Err(PufError::ChallengeMismatch(format!(
                "{} packed bytes for {n_words} selector words",
                packed.len()
            )));
        }
        let words = (0..n_words)
            .map(|i| {
                (0..SELECTOR_BITS).fold(0u8, |w, b| {
                    let bit = i * SELECTOR_BITS + b;
                    w | ((packed[bit / 8] >> (bit % 8) & 1) << b)
                })
            })
            .collect();
        Ok(Self::new(rounds, words))
    }

    /// Stable identifier: `<rounds>:<packed hex>`.
    pub fn id(&self) -> String {
        let hex: String = self
            .to_packed()
            .iter()
            .map(|b| format!("{b:02x}"))
            .collect();
        format!("{}:{hex}", self.rounds)
    }
}

/// Outcome of decoding a challenge.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Selection {
    /// Bit positions read, in response order.
    Puf(Vec<usize>),
    Regular,
}

pub fn decode_challenge(layout: &ArrayLayout, challenge: &Challenge) -> Result<Selection> {
    let expected = layout.n_groups() * challenge.rounds;
    if challenge.rounds == 0 || challenge.words.len() != expected {
        return Err(PufError::ChallengeMismatch(format!(
            "{} selector words for {} groups x {} rounds",
            challenge.words.len(),
            layout.n_groups(),
            challenge.rounds
        )));
    }
    if let Some(w) = challenge.words.iter().find(|&&w| w >> SELECTOR_BITS != 0) {
        return Err(PufError::ChallengeMismatch(format!(
            "selector word {w:#b} wider than {SELECTOR_BITS} bits"
        )));
    }
    let puf = challenge
        .words
        .iter()
        .filter(|&&w| w & MODE_BIT != 0)
        .count();
    if puf == 0 {
        return Ok(Selection::Regular);
    }
    if puf != challenge.words.len() {
        return Err(PufError::ChallengeMismatch("mixed mode bits".into()));
    }
    let positions = challenge
        .words
        .chunks(challenge.rounds)
        .enumerate()
        .flat_map(|(g, group_words)| {
            let (grid, group) = (g / GROUPS_PER_GRID, g % GROUPS_PER_GRID);
            group_words
                .iter()
                .map(move |&w| layout.position(grid, group, (w & 0b11) as usize))
        })
        .collect();
    Ok(Selection::Puf(positions))
}

/// Source of per-cell evaluation noise η, ps.
pub trait NoiseSource {
    fn eta(&self, position: usize) -> f64;
}

/// η = 0 everywhere.
#[derive(Debug, Clone, Copy, Default)]
pub struct NoNoise;

impl NoiseSource for NoNoise {
    fn eta(&self, _position: usize) -> f64 {
        0.0
    }
}

impl<F: Fn(usize) -> f64> NoiseSource for F {
    fn eta(&self, position: usize) -> f64 {
        self(position)
    }
}

/// Response bits plus how many evaluations landed exactly on the tie.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Evaluation {
    pub bits: BitString,
    pub marginal: usize,
}

/// Evaluates the given positions of a die's cells in order.
pub fn evaluate_positions<N: NoiseSource + ?Sized>(
    cells: &[SrffCell],
    positions: impl IntoIterator<Item = usize>,
    node: &ProcessNode,
    env: &EnvPoint,
    noise: &N,
) -> Result<Evaluation> {
    let mut bits = BitString::zeros(0);
    let mut marginal = 0;
    for p in positions {
        let cell = cells.get(p).ok_or_else(|| {
            PufError::ChallengeMismatch(format!("position {p} outside array of {}", cells.len()))
        })?;
        let out = resolve_race(cell, node, env, noise.eta(p))?;
        marginal += out.marginal as usize;
        bits.push(out.bit);
    }
    Ok(Evaluation { bits, marginal })
}

/// Every cell in position order.
pub fn full_response<N: NoiseSource + ?Sized>(
    cells: &[SrffCell],
    layout: &ArrayLayout,
    node: &ProcessNode,
    env: &EnvPoint,
    noise: &N,
) -> Result<Evaluation> {
    if cells.len() != layout.n_bits() {
        return Err(PufError::ChallengeMismatch(format!(
            "die has {} cells, layout needs {}",
            cells.len(),
            layout.n_bits()
        )));
    }
    evaluate_positions(cells, 0..layout.n_bits(), node, env, noise)
}

/// Response to a PUF-mode challenge, restricted to the selected cells.
pub fn challenge_response<N: NoiseSource + ?Sized>(
    cells: &[SrffCell],
    layout: &ArrayLayout,
    node: &ProcessNode,
    env: &EnvPoint,
    challenge: &Challenge,
    noise: &N,
) -> Result<Evaluation> {
    match decode_challenge(layout, challenge)? {
        Selection::Regular => Err(PufError::NotPufMode),
        Selection::Puf(positions) => evaluate_positions(cells, positions, node, env, noise),
    }
}

/// The array in regular mode: a plain register of SR latches.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Register {
    state: Vec<SrffState>,
}

impl Register {
    pub fn new(layout: &ArrayLayout) -> Self {
        Self {
            state: vec![SrffState::default(); layout.n_bits()],
        }
    }

    /// Applies one (S, R) pair per cell.
    pub fn step(&mut self, set: &BitString, reset: &BitString) -> Result<()> {
        for v in [set, reset] {
            if v.len() != self.state.len() {
                return Err(PufError::LengthMismatch {
                    left: v.len(),
                    right: self.state.len(),
                });
            }
        }
        for (i, st) in self.state.iter_mut().enumerate() {
            *st = srff_step(set.get(i), reset.get(i), *st);
        }
        Ok(())
    }

    pub fn state(&self) -> &[SrffState] {
        &self.state
    }

    pub fn q(&self) -> BitString {
        self.state.iter().map(|s| s.q).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::variation::{GateParams, NodeKind};
    use proptest::prelude::*;
    use std::collections::HashSet;

    fn l16() -> ArrayLayout {
        ArrayLayout::new(16).unwrap()
    }

    #[test]
    fn layout_shapes() {
        for n in SUPPORTED_BITS {
            let l = ArrayLayout::new(n).unwrap();
            assert_eq!(l.n_grids() * 16, n);
        }
        assert!(ArrayLayout::new(48).is_err());
        assert!(ArrayLayout::new(8).is_err());
    }

    #[test]
    fn coordinates_cover_the_grid_once() {
        let l = ArrayLayout::new(32).unwrap();
        let coords: HashSet<_> = (0..32).map(|p| l.coordinates(p)).collect();
        assert_eq!(coords.len(), 32);
        assert!(coords.iter().all(|&(g, r, c)| g < 2 && r < 4 && c < 4));
    }

    #[test]
    fn all_zero_selectors_pick_group_corners() {
        // hand enumeration: local 0 of each 2x2 group is its top-left cell,
        // i.e. physical (0,0), (0,2), (2,0), (2,2)
        let l = l16();
        let sel = decode_challenge(&l, &Challenge::uniform(&l, 0)).unwrap();
        assert_eq!(sel, Selection::Puf(vec![0, 4, 8, 12]));
        let phys: Vec<_> = [0, 4, 8, 12].iter().map(|&p| l.coordinates(p)).collect();
        assert_eq!(phys, vec![(0, 0, 0), (0, 0, 2), (0, 2, 0), (0, 2, 2)]);
    }

    #[test]
    fn local_three_is_bottom_right() {
        let l = l16();
        let sel = decode_challenge(&l, &Challenge::uniform(&l, 3)).unwrap();
        assert_eq!(sel, Selection::Puf(vec![3, 7, 11, 15]));
        assert_eq!(l.coordinates(15), (0, 3, 3));
        assert_eq!(l.coordinates(7), (0, 1, 3));
    }

    #[test]
    fn regular_mode_selects_nothing() {
        let l = l16();
        assert_eq!(
            decode_challenge(&l, &Challenge::regular(&l)).unwrap(),
            Selection::Regular
        );
    }

    #[test]
    fn malformed_challenges() {
        let l = l16();
        for c in [
            Challenge::new(1, vec![MODE_BIT; 3]),
            Challenge::new(0, vec![]),
            Challenge::new(1, vec![MODE_BIT, MODE_BIT, MODE_BIT, 0b1000]),
            Challenge::new(1, vec![MODE_BIT, MODE_BIT, MODE_BIT, 0]),
        ] {
            assert!(matches!(
                decode_challenge(&l, &c),
                Err(PufError::ChallengeMismatch(_))
            ));
        }
    }

    #[test]
    fn all_cells_is_identity_order() {
        for n in SUPPORTED_BITS {
            let l = ArrayLayout::new(n).unwrap();
            let sel = decode_challenge(&l, &Challenge::all_cells(&l)).unwrap();
            assert_eq!(sel, Selection::Puf((0..n).collect()));
        }
    }

    #[test]
    fn packing_round_trip_and_layout() {
        let l = l16();
        let c = Challenge::new(1, vec![0b101, 0b110, 0b111, 0b100]);
        let packed = c.to_packed();
        // 101 | 110<<3 | 111<<6 | 100<<9 = 0b100_111_110_101
        assert_eq!(packed, vec![0b1111_0101, 0b0000_1001]);
        assert_eq!(Challenge::from_packed(&l, 1, &packed).unwrap(), c);
        assert_eq!(c.id(), "1:f509");
    }

    fn cells(n: usize) -> Vec<SrffCell> {
        let node = ProcessNode::preset(NodeKind::N90);
        (0..n)
            .map(|i| SrffCell {
                nd1: GateParams {
                    length_factor: 1.0 + ((i * 7919) % 13) as f64 / 100.0 - 0.06,
                    k_temp: node.k_temp_nom,
                },
                nd2: GateParams::nominal(&node),
                sys_offset: 0.0,
            })
            .collect()
    }

    #[test]
    fn subset_matches_full_response() {
        let node = ProcessNode::preset(NodeKind::N90);
        let env = EnvPoint::reference();
        let l = ArrayLayout::new(32).unwrap();
        let cs = cells(32);
        let noise = |p: usize| (p as f64 * 0.37).sin();
        let full = full_response(&cs, &l, &node, &env, &noise).unwrap();
        assert_eq!(full.bits.len(), 32);
        let all =
            challenge_response(&cs, &l, &node, &env, &Challenge::all_cells(&l), &noise).unwrap();
        assert_eq!(all, full);
        let c = Challenge::new(
            1,
            vec![
                MODE_BIT | 2,
                MODE_BIT,
                MODE_BIT | 1,
                MODE_BIT | 3,
                MODE_BIT,
                MODE_BIT,
                MODE_BIT | 2,
                MODE_BIT | 1,
            ],
        );
        let sub = challenge_response(&cs, &l, &node, &env, &c, &noise).unwrap();
        assert_eq!(sub.bits.len(), 8);
        let Selection::Puf(pos) = decode_challenge(&l, &c).unwrap() else {
            unreachable!()
        };
        for (i, p) in pos.iter().enumerate() {
            assert_eq!(sub.bits.get(i), full.bits.get(*p));
        }
    }

    #[test]
    fn regular_challenge_has_no_response() {
        let node = ProcessNode::preset(NodeKind::N90);
        let l = l16();
        let r = challenge_response(
            &cells(16),
            &l,
            &node,
            &EnvPoint::reference(),
            &Challenge::regular(&l),
            &NoNoise,
        );
        assert!(matches!(r, Err(PufError::NotPufMode)));
    }

    #[test]
    fn register_follows_truth_table() {
        let l = l16();
        let mut reg = Register::new(&l);
        let pattern: BitString = (0..16).map(|i| i % 3 == 0).collect();
        reg.step(&pattern, &pattern.complement()).unwrap();
        assert_eq!(reg.q(), pattern);
        reg.step(&BitString::zeros(16), &BitString::zeros(16))
            .unwrap();
        assert_eq!(reg.q(), pattern);
        let ones = BitString::zeros(16).complement();
        reg.step(&ones, &ones).unwrap();
        assert!(reg.state().iter().all(|s| s.q && s.q_bar && !s.consistent));
        reg.step(&BitString::zeros(16), &ones).unwrap();
        assert_eq!(reg.q(), BitString::zeros(16));
    }

    proptest! {
        #[test]
        fn decode_is_injective(
            a in proptest::collection::vec(0u8..4, 8),
            b in proptest::collection::vec(0u8..4, 8),
        ) {
            let l = ArrayLayout::new(32).unwrap();
            let ca = Challenge::new(1, a.iter().map(|w| w | MODE_BIT).collect());
            let cb = Challenge::new(1, b.iter().map(|w| w | MODE_BIT).collect());
            let sa = decode_challenge(&l, &ca).unwrap();
            let sb = decode_challenge(&l, &cb).unwrap();
            prop_assert_eq!(a == b, sa == sb);
        }

        #[test]
        fn packing_round_trips(words in proptest::collection::vec(0u8..8, 16)) {
            let l = ArrayLayout::new(64).unwrap();
            let c = Challenge::new(1, words);
            prop_assert_eq!(Challenge::from_packed(&l, 1, &c.to_packed()).unwrap(), c);
        }
    }
}
