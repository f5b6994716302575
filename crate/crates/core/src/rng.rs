//! Named, resumable random streams.
//!
//! Every consumer of randomness in a simulation owns its own [`RngStream`]
//! derived from the scenario seed and a stable name. Streams record their
//! exact position so a saved simulation resumes on the same draws.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// 64-bit FNV-1a, used to turn a stream name into a ChaCha stream id.
fn fnv1a(name: &str) -> u64 {
    let mut hash: u64 = 0xcbf2_9ce4_8422_2325;
    for byte in name.as_bytes() {
        hash ^= u64::from(*byte);
        hash = hash.wrapping_mul(0x0100_0000_01b3);
    }
    hash
}

#[derive(Debug, Clone)]
pub struct RngStream {
    name: String,
    rng: ChaCha8Rng,
}

impl RngStream {
    pub fn new(seed: u64, name: impl Into<String>) -> Self {
        let name = name.into();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(fnv1a(&name));
        Self { name, rng }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    /// Uniform draw in `[0, 1)`.
    pub fn unit(&mut self) -> f64 {
        self.rng.random::<f64>()
    }

    /// Uniform draw in `[lo, hi)`; returns `lo` when the interval is empty.
    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.unit()
    }

    /// Uniform index in `0..n`. `n` must be non-zero.
    pub fn index(&mut self, n: usize) -> usize {
        self.rng.random_range(0..n)
    }

    pub fn chance(&mut self, p: f64) -> bool {
        self.unit() < p
    }

    pub fn state(&self) -> RngState {
        RngState {
            seed: self.rng.get_seed().iter().map(|b| format!("{b:02x}")).collect(),
            stream: self.rng.get_stream(),
            word_pos: self.rng.get_word_pos().to_string(),
        }
    }

    pub fn from_state(name: impl Into<String>, state: &RngState) -> Result<Self, RngStateError> {
        let name = name.into();
        let hex = state.seed.as_bytes();
        if hex.len() != 64 {
            return Err(RngStateError::Seed(name));
        }
        let mut seed = [0u8; 32];
        for (i, chunk) in hex.chunks(2).enumerate() {
            let text = std::str::from_utf8(chunk).map_err(|_| RngStateError::Seed(name.clone()))?;
            seed[i] = u8::from_str_radix(text, 16).map_err(|_| RngStateError::Seed(name.clone()))?;
        }
        let word_pos: u128 = state
            .word_pos
            .parse()
            .map_err(|_| RngStateError::WordPos(name.clone()))?;
        let mut rng = ChaCha8Rng::from_seed(seed);
        rng.set_stream(state.stream);
        rng.set_word_pos(word_pos);
        Ok(Self { name, rng })
    }
}

impl PartialEq for RngStream {
    fn eq(&self, other: &Self) -> bool {
        self.name == other.name && self.rng == other.rng
    }
}

/// Serializable position of a stream: key, stream id and word offset.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RngState {
    pub seed: String,
    pub stream: u64,
    pub word_pos: String,
}

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum RngStateError {
    #[error("rng stream `{0}`: seed must be 64 hex digits")]
    Seed(String),
    #[error("rng stream `{0}`: word_pos is not an unsigned integer")]
    WordPos(String),
}
