//! Reproducible random streams.
//!
//! Every random object in the crate is a pure function of an [`RngConfig`].
//! A config names a ChaCha8 key (derived from `seed`) and one of its 2^64
//! independent streams. [`RngConfig::child`] derives further configs, so a
//! Monte Carlo job gets one independent stream per trial and results do not
//! depend on how trials are scheduled across threads.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::LatticePoint;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RngConfig {
    pub seed: u64,
    pub stream: u64,
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

impl RngConfig {
    pub fn new(seed: u64, stream: u64) -> Self {
        RngConfig { seed, stream }
    }

    pub fn from_seed(seed: u64) -> Self {
        RngConfig { seed, stream: 0 }
    }

    pub fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.stream);
        rng
    }

    /// The `index`-th child stream. Children of one config share a key and
    /// differ in stream id; the key is a hash of the parent's (seed, stream).
    pub fn child(&self, index: u64) -> RngConfig {
        let key = splitmix64(splitmix64(self.seed ^ 0x5eed_0f_c41d_u64) ^ self.stream.rotate_left(29));
        RngConfig { seed: key, stream: index }
    }

    /// Stream for the walk started at lattice point `p`.
    pub fn for_point(&self, p: &LatticePoint) -> Result<RngConfig> {
        Ok(self.child(point_stream_id(p)?))
    }
}

const COORD_BITS: u32 = 21;
const COORD_OFFSET: i64 = 1 << (COORD_BITS - 1);

/// Injective packing of a lattice point into a stream id; coordinates must
/// lie in `[-2^20, 2^20)`.
pub fn point_stream_id(p: &LatticePoint) -> Result<u64> {
    let enc = |c: i64| -> Result<u64> {
        let shifted = c.checked_add(COORD_OFFSET).ok_or(Error::CoordinateOverflow)?;
        if !(0..(1 << COORD_BITS)).contains(&shifted) {
            return Err(Error::CoordinateOverflow);
        }
        Ok(shifted as u64)
    };
    Ok((enc(p.x)? << (2 * COORD_BITS)) | (enc(p.y)? << COORD_BITS) | enc(p.z)?)
}

/// Uniform draws from `0..6` using three random bits at a time, rejecting
/// the two surplus values. Exact, and about twenty directions per `u64`.
pub struct DirectionSampler<R> {
    rng: R,
    bits: u64,
    left: u32,
}

impl<R: RngCore> DirectionSampler<R> {
    pub fn new(rng: R) -> Self {
        DirectionSampler { rng, bits: 0, left: 0 }
    }

    #[inline]
    pub fn next_dir(&mut self) -> usize {
        loop {
            if self.left == 0 {
                self.bits = self.rng.next_u64();
                self.left = 21;
            }
            let v = (self.bits & 7) as usize;
            self.bits >>= 3;
            self.left -= 1;
            if v < 6 {
                return v;
            }
        }
    }

    /// Uniform draw from `0..k` for small `k` (tree walks).
    #[inline]
    pub fn below(&mut self, k: usize) -> usize {
        debug_assert!(k > 0);
        if k == 1 {
            return 0;
        }
        // Lemire's method with rejection: exact.
        let k64 = k as u64;
        loop {
            let x = self.rng.next_u32() as u64;
            let m = x * k64;
            let low = m as u32 as u64;
            if low >= (1u64 << 32) % k64 {
                return (m >> 32) as usize;
            }
        }
    }

    pub fn rng_mut(&mut self) -> &mut R {
        &mut self.rng
    }
}
