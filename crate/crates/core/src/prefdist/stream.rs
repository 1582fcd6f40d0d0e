//! Labelled, reproducible random streams.
//!
//! A stream is identified by a master seed and a label. Its generator is ChaCha8 seeded with
//! `splitmix64(seed ^ splitmix64(fnv1a64(label)))`, so equal `(seed, label)` pairs replay the
//! same draws and distinct labels give unrelated streams.

use alloc::format;
use alloc::string::String;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type StreamRng = ChaCha8Rng;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SeededStream {
    seed: u64,
    label: String,
}

impl SeededStream {
    pub fn new(seed: u64, label: impl Into<String>) -> Self {
        SeededStream {
            seed,
            label: label.into(),
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// A sub-stream labelled `"{label}/{name}"` under the same master seed.
    pub fn child(&self, name: impl core::fmt::Display) -> SeededStream {
        SeededStream {
            seed: self.seed,
            label: format!("{}/{}", self.label, name),
        }
    }

    /// The 64-bit seed actually fed to the generator.
    pub fn derived_seed(&self) -> u64 {
        splitmix64(self.seed ^ splitmix64(fnv1a64(self.label.as_bytes())))
    }

    /// A fresh generator positioned at the start of this stream.
    pub fn rng(&self) -> StreamRng {
        ChaCha8Rng::seed_from_u64(self.derived_seed())
    }
}

pub fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn fnv1a64(bytes: &[u8]) -> u64 {
    bytes.iter().fold(0xCBF2_9CE4_8422_2325, |h, &b| {
        (h ^ u64::from(b)).wrapping_mul(0x0000_0100_0000_01B3)
    })
}
