//! Counter-based random streams.
//!
//! Every random quantity in the crate is drawn from a [`Substream`]: a 64-bit
//! key plus a counter. Keys are derived by hashing `(seed, label, purpose)`, so
//! streams for different vertices, replicas or purposes never share state and
//! adding a consumer never perturbs the draws of another one. The k-th output
//! of a stream can be read directly without advancing it, which is how the
//! per-vertex uniforms `U_{k,v}` are addressed.

use rand::RngCore;

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

/// SplitMix64 finaliser.
#[inline]
pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut hash = 0xcbf2_9ce4_8422_2325u64;
    for &b in bytes {
        hash ^= u64::from(b);
        hash = hash.wrapping_mul(0x0100_0000_01b3);
    }
    hash
}

/// Derive a child key from a parent key, a byte label and a purpose tag.
pub fn derive_key(parent: u64, label: &[u8], purpose: &str) -> u64 {
    let a = mix64(parent ^ 0xD134_2543_DE82_EF95);
    let b = mix64(fnv1a64(label).wrapping_add(GOLDEN));
    let c = mix64(fnv1a64(purpose.as_bytes()) ^ 0xA076_1D64_78BD_642F);
    mix64(a ^ b.rotate_left(17) ^ c.rotate_left(41))
}

/// Key for replica `index` of a run seeded with `seed`.
pub fn replica_key(seed: u64, index: u64) -> u64 {
    derive_key(seed, &index.to_le_bytes(), "replica")
}

#[inline]
fn to_unit_open_closed(x: u64) -> f64 {
    // (0, 1]: never returns 0, so -ln(u) is always finite.
    ((x >> 11) + 1) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// A deterministic stream of 64-bit outputs addressed by a counter.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Substream {
    key: u64,
    counter: u64,
}

impl Substream {
    pub fn new(key: u64) -> Self {
        Self { key, counter: 0 }
    }

    pub fn derive(seed: u64, label: &[u8], purpose: &str) -> Self {
        Self::new(derive_key(seed, label, purpose))
    }

    /// Stream for replica `index` of a run.
    pub fn for_replica(seed: u64, index: u64) -> Self {
        Self::new(replica_key(seed, index))
    }

    /// A child stream; does not advance `self`.
    pub fn child(&self, purpose: &str) -> Self {
        Self::new(derive_key(self.key, &[], purpose))
    }

    pub fn key(&self) -> u64 {
        self.key
    }

    /// Number of 64-bit outputs consumed so far.
    pub fn position(&self) -> u64 {
        self.counter
    }

    #[inline]
    fn output_at(&self, index: u64) -> u64 {
        mix64(self.key ^ mix64(index.wrapping_add(1).wrapping_mul(GOLDEN)))
    }

    /// The `k`-th uniform (1-based, matching `U_k`) without advancing.
    pub fn uniform_at(&self, k: u64) -> f64 {
        to_unit_open_closed(self.output_at(k - 1))
    }

    #[inline]
    pub fn next_raw(&mut self) -> u64 {
        let out = self.output_at(self.counter);
        self.counter += 1;
        out
    }

    /// Next uniform in (0, 1].
    #[inline]
    pub fn uniform(&mut self) -> f64 {
        to_unit_open_closed(self.next_raw())
    }

    /// Next standard exponential, as `-ln(U)`.
    #[inline]
    pub fn exponential(&mut self) -> f64 {
        -self.uniform().ln()
    }
}

impl RngCore for Substream {
    fn next_u32(&mut self) -> u32 {
        (self.next_raw() >> 32) as u32
    }

    fn next_u64(&mut self) -> u64 {
        self.next_raw()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        for chunk in dst.chunks_mut(8) {
            let bytes = self.next_raw().to_le_bytes();
            chunk.copy_from_slice(&bytes[..chunk.len()]);
        }
    }
}

/// Source of uniforms in (0, 1]. Finite sources return `None` when exhausted.
pub trait UniformSource {
    fn next_uniform(&mut self) -> Option<f64>;

    fn next_exponential(&mut self) -> Option<f64> {
        self.next_uniform().map(|u| -u.ln())
    }
}

impl UniformSource for Substream {
    fn next_uniform(&mut self) -> Option<f64> {
        Some(self.uniform())
    }
}

/// A recorded, finite sequence of uniforms.
#[derive(Clone, Debug)]
pub struct RecordedUniforms<'a> {
    values: &'a [f64],
    pos: usize,
}

impl<'a> RecordedUniforms<'a> {
    pub fn new(values: &'a [f64]) -> Self {
        Self { values, pos: 0 }
    }

    pub fn consumed(&self) -> usize {
        self.pos
    }
}

impl UniformSource for RecordedUniforms<'_> {
    fn next_uniform(&mut self) -> Option<f64> {
        let u = self.values.get(self.pos).copied()?;
        self.pos += 1;
        Some(u)
    }
}
