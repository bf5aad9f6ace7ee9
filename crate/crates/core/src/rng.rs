//! Seeded, splittable random streams.

use rand::distr::{Distribution as _, Open01};
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// A reproducible stream of uniform variates identified by `(seed, stream)`.
///
/// Backed by ChaCha8 with the stream id mapped to the cipher's stream
/// counter, so distinct ids give independent sequences and parallel workers
/// can each take their own.
#[derive(Debug, Clone)]
pub struct RngStream {
    seed: u64,
    stream: u64,
    rng: ChaCha8Rng,
}

impl RngStream {
    pub fn new(seed: u64, stream: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        Self { seed, stream, rng }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream(&self) -> u64 {
        self.stream
    }

    /// A fresh stream sharing this seed.
    pub fn fork(&self, stream: u64) -> Self {
        Self::new(self.seed, stream)
    }

    /// Uniform on the open interval (0, 1), so `ln u` is always finite.
    pub fn uniform(&mut self) -> f64 {
        Open01.sample(&mut self.rng)
    }

    pub fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }
}

impl RngCore for RngStream {
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

/// Inverse-CDF sampler over a fixed probability vector: one uniform per draw,
/// binary search over cumulative masses. Zero-mass entries are never drawn.
#[derive(Debug, Clone)]
pub struct Categorical {
    cumulative: Vec<f64>,
}

impl Categorical {
    pub fn new(probs: &[f64]) -> Self {
        let mut acc = 0.0;
        let cumulative = probs
            .iter()
            .map(|p| {
                acc += p;
                acc
            })
            .collect();
        Self { cumulative }
    }

    pub fn len(&self) -> usize {
        self.cumulative.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cumulative.is_empty()
    }

    pub fn sample(&self, rng: &mut RngStream) -> usize {
        let total = *self.cumulative.last().expect("empty categorical");
        let u = rng.uniform() * total;
        let i = self.cumulative.partition_point(|c| *c <= u);
        // Rounding can push `u` onto the final boundary; fall back to the last
        // index with positive mass.
        if i < self.cumulative.len() {
            i
        } else {
            let last = self.cumulative.len() - 1;
            (0..=last)
                .rev()
                .find(|&j| j == 0 || self.cumulative[j] > self.cumulative[j - 1])
                .unwrap_or(last)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    // Pins the generator: any change to the seeding scheme breaks saved runs.
    #[test]
    fn compatibility_vector() {
        let mut rng = RngStream::new(42, 0);
        let got: Vec<u64> = (0..3).map(|_| rng.next_u64()).collect();
        assert_eq!(got, PINNED_42_0);
        let mut other = RngStream::new(42, 1);
        assert_ne!(other.next_u64(), PINNED_42_0[0]);
    }

    const PINNED_42_0: [u64; 3] = [12578764544318200737, 17529487244874322312, 7886285670807131020];

    #[test]
    fn same_seed_same_sequence() {
        let mut a = RngStream::new(7, 3);
        let mut b = RngStream::new(7, 3);
        for _ in 0..100 {
            assert_eq!(a.uniform().to_bits(), b.uniform().to_bits());
        }
    }

    #[test]
    fn uniform_is_open() {
        let mut rng = RngStream::new(1, 1);
        for _ in 0..100_000 {
            let u = rng.uniform();
            assert!(u > 0.0 && u < 1.0);
        }
    }

    #[test]
    fn categorical_skips_zero_mass() {
        let cat = Categorical::new(&[0.0, 0.5, 0.0, 0.5, 0.0]);
        let mut rng = RngStream::new(5, 0);
        let mut counts = [0usize; 5];
        for _ in 0..10_000 {
            counts[cat.sample(&mut rng)] += 1;
        }
        assert_eq!(counts[0] + counts[2] + counts[4], 0);
        assert!((counts[1] as f64 / 10_000.0 - 0.5).abs() < 0.03);
    }
}
