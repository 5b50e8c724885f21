//! Deterministic random streams and Halton nodes.
//!
//! A [`RandomStream`] is a ChaCha8 generator keyed by `(seed, stream_id)`.
//! ChaCha is counter based: the stream id selects an independent keystream,
//! so work items can be handed their own substream up front and results do
//! not depend on the order in which they are executed.

use rand::seq::index;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

#[derive(Clone, Debug)]
pub struct RandomStream {
    seed: u64,
    stream_id: u64,
    rng: ChaCha8Rng,
}

/// SplitMix64 finalizer.
fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

impl RandomStream {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream_id);
        Self {
            seed,
            stream_id,
            rng,
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream_id(&self) -> u64 {
        self.stream_id
    }

    /// Fresh stream labelled by `label` under this one. Depends only on
    /// `(seed, stream_id, label)`, never on how far `self` has advanced.
    pub fn substream(&self, label: u64) -> RandomStream {
        RandomStream::new(self.seed, mix64(self.stream_id ^ mix64(label)))
    }

    pub fn normal(&mut self) -> f64 {
        self.rng.sample(StandardNormal)
    }

    /// One draw from the open interval (-1, 1).
    pub fn uniform_symmetric_one(&mut self) -> f64 {
        loop {
            let u: f64 = self.rng.random_range(-1.0..1.0);
            if u > -1.0 {
                return u;
            }
        }
    }

    pub fn standard_normal(&mut self, count: usize) -> Vec<f64> {
        (0..count).map(|_| self.normal()).collect()
    }

    pub fn uniform_symmetric(&mut self, count: usize) -> Vec<f64> {
        (0..count).map(|_| self.uniform_symmetric_one()).collect()
    }

    /// Uniformly random permutation of `0..len`.
    pub fn permutation(&mut self, len: usize) -> Vec<usize> {
        let mut p: Vec<usize> = (0..len).collect();
        for i in (1..len).rev() {
            let j = self.rng.random_range(0..=i);
            p.swap(i, j);
        }
        p
    }

    /// `amount` distinct indices from `0..len`, in draw order.
    pub fn sample_indices(&mut self, len: usize, amount: usize) -> Vec<usize> {
        index::sample(&mut self.rng, len, amount).into_vec()
    }
}

impl RngCore for RandomStream {
    fn next_u32(&mut self) -> u32 {
        self.rng.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.rng.fill_bytes(dst)
    }
}

fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

/// Van der Corput radical inverse of `index` in `base`.
pub fn radical_inverse(mut index: u64, base: u64) -> f64 {
    let inv_base = 1.0 / base as f64;
    let mut scale = inv_base;
    let mut value = 0.0;
    while index > 0 {
        value += (index % base) as f64 * scale;
        index /= base;
        scale *= inv_base;
    }
    value
}

/// Halton point number `index` (1-based; index 0 is the origin and is never
/// produced).
pub fn halton_point(index: u64, bases: &[u64]) -> Result<Vec<f64>> {
    if index == 0 {
        return Err(Error::InvalidArgument("Halton index starts at 1".into()));
    }
    for (i, &b) in bases.iter().enumerate() {
        if !is_prime(b) {
            return Err(Error::NotPrime { base: b });
        }
        if bases[..i].contains(&b) {
            return Err(Error::InvalidArgument(format!("repeated Halton base {b}")));
        }
    }
    Ok(bases.iter().map(|&b| radical_inverse(index, b)).collect())
}
