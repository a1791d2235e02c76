//! Counter-based randomness: every random object is a pure function of a
//! master seed and a stream index, independent of thread scheduling.

use rand::{RngCore, SeedableRng};
use rand_chacha::{ChaCha20Rng, ChaCha8Rng};

/// Stream index reserved for derived per-trial seeds.
const DERIVE_STREAM_BASE: u64 = 1 << 32;

/// Seed for trial `index` of a run started from `master`.
pub fn derive_seed(master: u64, index: u64) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(master);
    rng.set_stream(DERIVE_STREAM_BASE.wrapping_add(index));
    rng.next_u64()
}

/// ChaCha generator for `(seed, stream)`.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha20Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Diagonal of independent ±1 entries, stored one bit per entry
/// (bit set means −1).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SignDiagonal {
    len: usize,
    words: Vec<u64>,
}

impl SignDiagonal {
    /// Bit `b` is bit `b mod 64` of the `b / 64`-th output word of the
    /// ChaCha20 keystream for `(seed, stream)`.
    pub fn generate(seed: u64, stream: u64, len: usize) -> Self {
        let mut rng = stream_rng(seed, stream);
        let mut words: Vec<u64> = (0..len.div_ceil(64)).map(|_| rng.next_u64()).collect();
        if len % 64 != 0 {
            if let Some(last) = words.last_mut() {
                *last &= (1u64 << (len % 64)) - 1;
            }
        }
        Self { len, words }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Entry `i` as ±1.
    pub fn sign(&self, i: usize) -> f64 {
        if self.words[i / 64] >> (i % 64) & 1 == 1 {
            -1.0
        } else {
            1.0
        }
    }

    pub fn to_vec(&self) -> Vec<f64> {
        (0..self.len).map(|i| self.sign(i)).collect()
    }

    /// Multiplies `buf` entrywise by the diagonal.
    pub fn apply(&self, buf: &mut [f64]) {
        debug_assert_eq!(buf.len(), self.len);
        for (chunk, &word) in buf.chunks_mut(64).zip(&self.words) {
            for (b, v) in chunk.iter_mut().enumerate() {
                *v = f64::from_bits(v.to_bits() ^ ((word >> b & 1) << 63));
            }
        }
    }
}
