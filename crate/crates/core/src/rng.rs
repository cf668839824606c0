//! Reproducible randomness.
//!
//! Every algorithm draws from a [`SeedStream`], a tree of ChaCha8 streams
//! keyed by a master seed. Batch sampling splits work into fixed-size chunks
//! and gives each chunk its own stream, so results depend only on the master
//! seed and never on how many worker threads ran the chunks.
//!
//! Individual realizations use [`EdgeCoins`]: a counter-based coin per edge,
//! derived from a 64-bit key. Because the coin of an edge does not depend on
//! the order in which edges are inspected, two traversals that share a key
//! see the same live-edge graph even when they block different nodes.

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

/// Generator handed to per-chunk sampling closures.
pub type StreamRng = ChaCha8Rng;

/// Samples generated per independent stream in batch routines.
pub(crate) const CHUNK: usize = 256;

#[inline]
pub(crate) fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// A deterministic source of independent random streams.
#[derive(Clone, Debug)]
pub struct SeedStream {
    key: u64,
    next: u64,
}

impl SeedStream {
    pub fn new(seed: u64) -> Self {
        SeedStream {
            key: mix64(seed),
            next: 0,
        }
    }

    fn bump(&mut self) -> u64 {
        let id = self.next;
        self.next += 1;
        id
    }

    /// Derives a child source whose streams never overlap with this one's.
    pub fn fork(&mut self) -> SeedStream {
        let id = self.bump();
        SeedStream {
            key: mix64(self.key ^ mix64(id ^ 0xA5A5_A5A5_A5A5_A5A5)),
            next: 0,
        }
    }

    /// Next independent generator.
    pub fn rng(&mut self) -> StreamRng {
        let id = self.bump();
        let mut rng = ChaCha8Rng::seed_from_u64(self.key);
        rng.set_stream(id);
        rng
    }

    /// Runs `f` over `count` samples split into chunks of [`CHUNK`], one stream
    /// per chunk, in parallel. Chunk results come back in chunk order.
    pub(crate) fn par_chunks<T, F>(&mut self, count: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(&mut StreamRng, usize) -> T + Sync + Send,
    {
        let jobs: Vec<(StreamRng, usize)> = (0..count.div_ceil(CHUNK))
            .map(|c| (self.rng(), CHUNK.min(count - c * CHUNK)))
            .collect();
        jobs.into_par_iter()
            .map(|(mut rng, len)| f(&mut rng, len))
            .collect()
    }

    /// Like [`par_chunks`](Self::par_chunks) but folds every chunk into a
    /// per-worker accumulator. `merge` must be associative and commutative
    /// (integer sums, say) for the result to be thread-count independent.
    pub(crate) fn par_fold<A, I, F, M>(&mut self, count: usize, init: I, f: F, merge: M) -> A
    where
        A: Send,
        I: Fn() -> A + Sync + Send,
        F: Fn(&mut StreamRng, usize, &mut A) + Sync + Send,
        M: Fn(A, A) -> A + Sync + Send,
    {
        let jobs: Vec<(StreamRng, usize)> = (0..count.div_ceil(CHUNK))
            .map(|c| (self.rng(), CHUNK.min(count - c * CHUNK)))
            .collect();
        jobs.into_par_iter()
            .fold(&init, |mut acc, (mut rng, len)| {
                f(&mut rng, len, &mut acc);
                acc
            })
            .reduce(&init, &merge)
    }
}

/// Counter-based edge coins for one realization.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct EdgeCoins(u64);

impl EdgeCoins {
    pub fn new(key: u64) -> Self {
        EdgeCoins(key)
    }

    pub fn draw<R: RngCore + ?Sized>(rng: &mut R) -> Self {
        EdgeCoins(rng.next_u64())
    }

    /// Whether edge `edge` with probability `p` is live.
    #[inline]
    pub fn is_live(self, edge: usize, p: f64) -> bool {
        if p >= 1.0 {
            return true;
        }
        if p <= 0.0 {
            return false;
        }
        let bits = mix64(self.0 ^ mix64(edge as u64));
        ((bits >> 11) as f64) * (1.0 / (1u64 << 53) as f64) < p
    }
}

/// Uniform index in `0..n` (convenience over `gen_range`).
#[inline]
pub(crate) fn uniform_index<R: Rng + ?Sized>(rng: &mut R, n: usize) -> usize {
    rng.gen_range(0..n)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn streams_are_reproducible() {
        let mut a = SeedStream::new(7);
        let mut b = SeedStream::new(7);
        assert_eq!(a.rng().next_u64(), b.rng().next_u64());
        assert_eq!(a.fork().rng().next_u64(), b.fork().rng().next_u64());
        let mut c = SeedStream::new(8);
        assert_ne!(SeedStream::new(7).rng().next_u64(), c.rng().next_u64());
    }

    #[test]
    fn chunk_results_do_not_depend_on_thread_count() {
        let run = |threads: usize| {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap();
            pool.install(|| {
                SeedStream::new(3).par_chunks(1000, |rng, len| {
                    (0..len).map(|_| rng.next_u64()).collect::<Vec<_>>()
                })
            })
        };
        assert_eq!(run(1), run(4));
    }

    #[test]
    fn coins_match_probability() {
        let coins = EdgeCoins::new(99);
        let live = (0..200_000).filter(|&e| coins.is_live(e, 0.3)).count();
        let frac = live as f64 / 200_000.0;
        // 3 sigma of a Bernoulli(0.3) mean over 2e5 draws is about 0.003
        assert!((frac - 0.3).abs() < 0.004, "{frac}");
        assert!((0..100).all(|e| coins.is_live(e, 1.0)));
        assert!((0..100).all(|e| !coins.is_live(e, 0.0)));
    }

    #[test]
    fn coins_are_independent_across_keys() {
        // Pearson correlation between the coins of the same edge under
        // consecutive keys should vanish.
        let n = 100_000;
        let mut both = 0usize;
        let mut first = 0usize;
        let mut second = 0usize;
        for k in 0..n {
            let a = EdgeCoins::new(k as u64).is_live(5, 0.5);
            let b = EdgeCoins::new(k as u64 + 1).is_live(5, 0.5);
            first += a as usize;
            second += b as usize;
            both += (a && b) as usize;
        }
        let pa = first as f64 / n as f64;
        let pb = second as f64 / n as f64;
        let pab = both as f64 / n as f64;
        assert!((pab - pa * pb).abs() < 0.006);
    }
}
