//! Uniform random streams.
//!
//! Every random draw in the crate is a transform of open-interval uniforms
//! pulled from a [`UniformSource`]. Chains get independent ChaCha streams
//! keyed by `(master seed, tag, chain index)`, so results do not depend on
//! thread scheduling.

use rand::RngCore;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// A source of uniform variates on the open interval (0, 1).
pub trait UniformSource {
    fn uniform(&mut self) -> f64;
}

impl<R: RngCore + ?Sized> UniformSource for R {
    #[inline]
    fn uniform(&mut self) -> f64 {
        // 53 random bits, offset by half an ulp: never exactly 0 or 1.
        ((self.next_u64() >> 11) as f64 + 0.5) * (1.0 / (1u64 << 53) as f64)
    }
}

/// The generator used for all chains.
pub type StreamRng = ChaCha8Rng;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Mixes a master seed, a textual tag and an index into a 64-bit stream seed.
pub fn stream_seed(master_seed: u64, tag: &str, index: u64) -> u64 {
    // FNV-1a over the tag bytes.
    let mut tag_hash: u64 = 0xcbf2_9ce4_8422_2325;
    for byte in tag.bytes() {
        tag_hash ^= u64::from(byte);
        tag_hash = tag_hash.wrapping_mul(0x0100_0000_01b3);
    }
    splitmix64(splitmix64(master_seed ^ splitmix64(tag_hash)) ^ index)
}

/// A fresh generator for chain `index` of the stream family `tag`.
pub fn chain_rng(master_seed: u64, tag: &str, index: u64) -> StreamRng {
    StreamRng::seed_from_u64(stream_seed(master_seed, tag, index))
}

/// Replays a fixed list of uniforms; panics when exhausted.
///
/// Used to drive kernels with known stream values in tests and examples.
#[derive(Debug, Clone)]
pub struct ScriptedUniforms {
    values: Vec<f64>,
    next: usize,
}

impl ScriptedUniforms {
    pub fn new(values: impl Into<Vec<f64>>) -> Self {
        Self {
            values: values.into(),
            next: 0,
        }
    }

    /// Number of values consumed so far.
    pub fn consumed(&self) -> usize {
        self.next
    }
}

impl UniformSource for ScriptedUniforms {
    fn uniform(&mut self) -> f64 {
        let u = *self.values.get(self.next).expect("scripted uniform stream exhausted");
        self.next += 1;
        u
    }
}
