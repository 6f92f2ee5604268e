// SPDX-License-Identifier: Apache-2.0
//! Counter-based random substreams.
//!
//! Every random quantity in a run is drawn from its own ChaCha8 stream. The
//! cipher key comes from the run seed and the 64-bit stream id is an
//! injective packing of `(purpose, die, cell, env, rep)`, so the value of any
//! draw depends only on its coordinates and never on evaluation order or the
//! number of worker threads.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Largest die index representable in a stream id.
pub const MAX_DIES: u64 = 1 << 24;
/// Largest cell index (bit position) representable in a stream id.
pub const MAX_CELLS: u64 = 1 << 8;
pub const MAX_ENVS: u64 = 1 << 8;
pub const MAX_REPS: u64 = 1 << 16;

/// What a stream is used for. Keeps draws for different roles disjoint even
/// when the numeric coordinates coincide.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u8)]
pub enum Purpose {
    GlobalShift = 1,
    Gate = 2,
    PositionOffset = 3,
    EvalNoise = 4,
    PairSampling = 5,
    CollisionReference = 6,
}

/// Coordinates of one substream.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StreamId {
    pub purpose: Purpose,
    pub die: u32,
    pub cell: u16,
    pub env: u16,
    pub rep: u32,
}

impl StreamId {
    pub fn new(purpose: Purpose) -> Self {
        Self {
            purpose,
            die: 0,
            cell: 0,
            env: 0,
            rep: 0,
        }
    }

    pub fn die(mut self, die: u32) -> Self {
        self.die = die;
        self
    }

    pub fn cell(mut self, cell: usize) -> Self {
        self.cell = cell as u16;
        self
    }

    pub fn env(mut self, env: usize) -> Self {
        self.env = env as u16;
        self
    }

    pub fn rep(mut self, rep: u32) -> Self {
        self.rep = rep;
        self
    }

    /// Bit layout (msb → lsb): purpose:4 | die:24 | cell:8 | env:8 | rep:16.
    pub fn pack(&self) -> u64 {
        debug_assert!((self.die as u64) < MAX_DIES);
        debug_assert!((self.cell as u64) < MAX_CELLS);
        debug_assert!((self.env as u64) < MAX_ENVS);
        debug_assert!((self.rep as u64) < MAX_REPS);
        ((self.purpose as u64) << 56)
            | ((self.die as u64 & (MAX_DIES - 1)) << 32)
            | ((self.cell as u64 & (MAX_CELLS - 1)) << 24)
            | ((self.env as u64 & (MAX_ENVS - 1)) << 16)
            | (self.rep as u64 & (MAX_REPS - 1))
    }
}

/// Hands out independent substreams for one run seed.
#[derive(Debug, Clone)]
pub struct StreamFactory {
    key: [u8; 32],
}

impl StreamFactory {
    pub fn new(seed: u64) -> Self {
        // splitmix64 expansion of the seed into a 256-bit key
        let mut state = seed;
        let mut key = [0u8; 32];
        for chunk in key.chunks_exact_mut(8) {
            state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
            let mut z = state;
            z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
            z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
            z ^= z >> 31;
            chunk.copy_from_slice(&z.to_le_bytes());
        }
        Self { key }
    }

    pub fn stream(&self, id: StreamId) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::from_seed(self.key);
        rng.set_stream(id.pack());
        rng
    }
}
