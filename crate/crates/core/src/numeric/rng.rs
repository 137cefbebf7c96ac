use rand::{Rng as _, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{invalid, Result};

/// Deterministic random number generator.
///
/// Backed by ChaCha8. The 64-bit seed is expanded into the 256-bit key with
/// `seed_from_u64`; children share the parent's key and pick a distinct
/// ChaCha stream id, so sibling children are disjoint keystreams by
/// construction. Output is reproducible per seed within this crate; no
/// promise is made across implementations.
#[derive(Debug, Clone)]
pub struct Rng {
    seed: u64,
    stream: u64,
    inner: ChaCha8Rng,
}

impl Rng {
    pub fn new(seed: u64) -> Self {
        Self::with_stream(seed, 0)
    }

    fn with_stream(seed: u64, stream: u64) -> Self {
        let mut inner = ChaCha8Rng::seed_from_u64(seed);
        inner.set_stream(stream);
        Self {
            seed,
            stream,
            inner,
        }
    }

    /// Independent child generator for `(seed, index)`.
    ///
    /// Children of the same seed occupy ChaCha streams `index + 1`, so they
    /// never overlap each other or the root stream 0.
    pub fn child(seed: u64, index: u64) -> Self {
        Self::with_stream(seed, index.wrapping_add(1))
    }

    /// Derives a child of this generator, independent of its current position.
    ///
    /// Nested derivation re-keys from `(seed, stream)` so grandchildren of
    /// different children cannot collide.
    pub fn derive(&self, index: u64) -> Self {
        let key = if self.stream == 0 {
            self.seed
        } else {
            splitmix64(self.seed ^ splitmix64(self.stream))
        };
        Self::child(key, index)
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Uniform sample in `[lo, hi)`.
    pub fn uniform(&mut self, lo: f64, hi: f64) -> Result<f64> {
        if !lo.is_finite() || !hi.is_finite() || lo >= hi {
            return Err(invalid(format!("uniform requires finite lo < hi, got [{lo}, {hi})")));
        }
        let u: f64 = self.inner.random();
        let x = lo + (hi - lo) * u;
        // Rounding can land exactly on `hi` for wide intervals.
        Ok(if x >= hi { lo.max(hi.next_down()) } else { x })
    }

    /// Gaussian sample with the given mean and standard deviation.
    pub fn normal(&mut self, mean: f64, std: f64) -> Result<f64> {
        if !std.is_finite() || !mean.is_finite() || std <= 0.0 {
            return Err(invalid(format!("normal requires std > 0, got {std}")));
        }
        let z: f64 = self.inner.sample(StandardNormal);
        Ok(mean + std * z)
    }

    /// Uniform integer in `0..n`. Panics if `n == 0`.
    pub fn below(&mut self, n: usize) -> usize {
        self.inner.random_range(0..n)
    }

    pub fn coin(&mut self) -> bool {
        self.inner.random::<f64>() < 0.5
    }

    /// In-place Fisher-Yates shuffle.
    pub fn shuffle<T>(&mut self, items: &mut [T]) {
        for i in (1..items.len()).rev() {
            let j = self.below(i + 1);
            items.swap(i, j);
        }
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn draws(rng: &mut Rng, n: usize) -> Vec<f64> {
        (0..n).map(|_| rng.uniform(0.0, 1.0).unwrap()).collect()
    }

    #[test]
    fn uniform_mean_is_half() {
        let mut rng = Rng::new(2024);
        let n = 1_000_000;
        let mut sum = 0.0;
        for _ in 0..n {
            let x = rng.uniform(0.0, 1.0).unwrap();
            assert!((0.0..1.0).contains(&x));
            sum += x;
        }
        let mean = sum / n as f64;
        assert!((0.499..=0.501).contains(&mean), "mean {mean}");
    }

    #[test]
    fn same_seed_same_sequence() {
        assert_eq!(draws(&mut Rng::new(7), 100), draws(&mut Rng::new(7), 100));
        let a: Vec<f64> = {
            let mut r = Rng::new(7);
            (0..100).map(|_| r.normal(0.0, 1.0).unwrap()).collect()
        };
        let b: Vec<f64> = {
            let mut r = Rng::new(7);
            (0..100).map(|_| r.normal(0.0, 1.0).unwrap()).collect()
        };
        assert_eq!(a, b);
    }

    #[test]
    fn children_are_distinct_streams() {
        let a = draws(&mut Rng::child(42, 0), 100);
        let b = draws(&mut Rng::child(42, 1), 100);
        let root = draws(&mut Rng::new(42), 100);
        assert!(a.iter().zip(&b).all(|(x, y)| x != y));
        assert_ne!(a, root);
    }

    #[test]
    fn nested_derivation_is_position_independent() {
        let parent = Rng::child(1, 3);
        let mut advanced = parent.clone();
        draws(&mut advanced, 10);
        assert_eq!(
            draws(&mut parent.derive(0), 20),
            draws(&mut advanced.derive(0), 20)
        );
        assert_ne!(
            draws(&mut Rng::child(1, 3).derive(0), 20),
            draws(&mut Rng::child(1, 4).derive(0), 20)
        );
    }

    #[test]
    fn normal_sample_std() {
        let mut rng = Rng::new(99);
        let n = 1_000_000;
        let xs: Vec<f64> = (0..n).map(|_| rng.normal(0.0, 1.0).unwrap()).collect();
        let mean = xs.iter().sum::<f64>() / n as f64;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        let std = var.sqrt();
        assert!((0.995..=1.005).contains(&std), "std {std}");
    }

    #[test]
    fn tiny_std_clusters_at_mean() {
        let mut rng = Rng::new(1);
        for _ in 0..1000 {
            assert!((rng.normal(5.0, 1e-12).unwrap() - 5.0).abs() < 1e-9);
        }
    }

    #[test]
    fn rejects_bad_parameters() {
        let mut rng = Rng::new(0);
        assert!(rng.uniform(1.0, 1.0).is_err());
        assert!(rng.uniform(2.0, 1.0).is_err());
        assert!(rng.normal(0.0, 0.0).is_err());
        assert!(rng.normal(0.0, -1.0).is_err());
    }

    #[test]
    fn shuffle_is_permutation() {
        let mut rng = Rng::new(5);
        let mut v: Vec<usize> = (0..100).collect();
        rng.shuffle(&mut v);
        let mut sorted = v.clone();
        sorted.sort_unstable();
        assert_eq!(sorted, (0..100).collect::<Vec<_>>());
        assert_ne!(v, sorted);
    }
}
