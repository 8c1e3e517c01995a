//! Seedable, stream-splittable randomness.
//!
//! Every run owns exactly one [`RandomStream`], seeded from a [`RunSeed`] that is
//! a pure function of the master seed and the (grid point, run) indices. Draws
//! within a minute are consumed in a fixed order: the update permutation first,
//! then for each agent its instigation coin, the number of contact attempts,
//! the peers probed and finally the conversation duration.

use std::fmt;
use std::str::FromStr;

use rand_core::{RngCore, SeedableRng};
use rand_xoshiro::Xoshiro256PlusPlus;

use crate::error::StochasticsError;

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

/// SplitMix64 finalizer. A bijection on `u64`.
#[inline]
pub fn mix64(mut x: u64) -> u64 {
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

/// User-facing seed for a whole invocation.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MasterSeed(pub u64);

impl FromStr for MasterSeed {
    type Err = StochasticsError;

    /// Accepts decimal (`42`) or hexadecimal (`0x2a`).
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        let parsed = match s.strip_prefix("0x").or_else(|| s.strip_prefix("0X")) {
            Some(hex) => u64::from_str_radix(hex, 16),
            None => s.parse::<u64>(),
        };
        parsed
            .map(MasterSeed)
            .map_err(|_| StochasticsError::InvalidSeed(s.to_string()))
    }
}

impl fmt::Display for MasterSeed {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Seed of a single run.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RunSeed(pub u64);

/// Derives the seed of run `run_index` at grid point `grid_index`.
///
/// Stateless, so runs can be scheduled in any order on any thread. For a fixed
/// `(master, grid_index)` the map from `run_index` to seed is injective.
pub fn derive_run_seed(master: MasterSeed, grid_index: u64, run_index: u64) -> RunSeed {
    let point = mix64(master.0 ^ mix64(grid_index.wrapping_add(GOLDEN_GAMMA)));
    RunSeed(mix64(point.wrapping_add(run_index.wrapping_mul(GOLDEN_GAMMA))))
}

/// Generator state for one run (xoshiro256++).
#[derive(Clone, Debug)]
pub struct RandomStream {
    rng: Xoshiro256PlusPlus,
}

impl RandomStream {
    pub fn new(seed: RunSeed) -> Self {
        Self {
            rng: Xoshiro256PlusPlus::seed_from_u64(seed.0),
        }
    }

    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    /// Uniform on `[0, 1)` with 53 bits of resolution.
    #[inline]
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform on `[0, n)`, `n > 0`. Lemire's multiply-shift with rejection,
    /// so there is no modulo bias.
    #[inline]
    pub fn below(&mut self, n: u64) -> u64 {
        debug_assert!(n > 0);
        let mut m = u128::from(self.next_u64()) * u128::from(n);
        let mut low = m as u64;
        if low < n {
            let threshold = n.wrapping_neg() % n;
            while low < threshold {
                m = u128::from(self.next_u64()) * u128::from(n);
                low = m as u64;
            }
        }
        (m >> 64) as u64
    }

    /// Uniform integer on the inclusive range `[lo, hi]`.
    pub fn uniform_int(&mut self, lo: i64, hi: i64) -> Result<i64, StochasticsError> {
        if lo > hi {
            return Err(StochasticsError::EmptyRange { lo, hi });
        }
        let span = hi.wrapping_sub(lo) as u64;
        let offset = if span == u64::MAX {
            self.next_u64()
        } else {
            self.below(span + 1)
        };
        Ok(lo.wrapping_add(offset as i64))
    }

    /// Fisher-Yates shuffle in place.
    pub fn shuffle<T>(&mut self, items: &mut [T]) {
        for i in (1..items.len()).rev() {
            let j = self.below(i as u64 + 1) as usize;
            items.swap(i, j);
        }
    }

    /// Exact Poisson sample. A zero mean returns 0 without consuming a draw.
    pub fn poisson(&mut self, mean: f64) -> u64 {
        debug_assert!(mean >= 0.0 && mean.is_finite());
        if mean <= 0.0 {
            0
        } else if mean <= INVERSION_LIMIT {
            self.poisson_inversion(mean)
        } else {
            self.poisson_ptrs(mean)
        }
    }

    /// Sequential-search inversion.
    fn poisson_inversion(&mut self, mean: f64) -> u64 {
        let u = self.next_f64();
        let mut k = 0u64;
        let mut pmf = (-mean).exp();
        let mut cdf = pmf;
        while u >= cdf {
            k += 1;
            pmf *= mean / k as f64;
            let next = cdf + pmf;
            // cdf stopped growing: u sits in the rounding gap just below 1
            if next == cdf {
                break;
            }
            cdf = next;
        }
        k
    }

    /// Hörmann's transformed rejection with squeeze (PTRS), exact for `mean >= 10`.
    fn poisson_ptrs(&mut self, mean: f64) -> u64 {
        let slam = mean.sqrt();
        let loglam = mean.ln();
        let b = 0.931 + 2.53 * slam;
        let a = -0.059 + 0.02483 * b;
        let inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
        let vr = 0.9277 - 3.6224 / (b - 2.0);
        loop {
            let u = self.next_f64() - 0.5;
            let v = self.next_f64();
            let us = 0.5 - u.abs();
            let k = ((2.0 * a / us + b) * u + mean + 0.43).floor();
            if us >= 0.07 && v <= vr {
                return k as u64;
            }
            if k < 0.0 || (us < 0.013 && v > us) {
                continue;
            }
            let lhs = v.ln() + inv_alpha.ln() - (a / (us * us) + b).ln();
            let rhs = -mean + k * loglam - ln_factorial(k as u64);
            if lhs <= rhs {
                return k as u64;
            }
        }
    }
}

const INVERSION_LIMIT: f64 = 10.0;

/// `ln(k!)`: direct sum for small `k`, Stirling series otherwise.
pub(crate) fn ln_factorial(k: u64) -> f64 {
    if k < 16 {
        return (2..=k).map(|i| (i as f64).ln()).sum();
    }
    let x = k as f64;
    let x2 = x * x;
    x * x.ln() - x + 0.5 * (std::f64::consts::TAU * x).ln() + 1.0 / (12.0 * x) - 1.0 / (360.0 * x * x2)
        + 1.0 / (1260.0 * x * x2 * x2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    fn stream(seed: u64) -> RandomStream {
        RandomStream::new(RunSeed(seed))
    }

    #[test]
    fn seed_parsing_accepts_decimal_and_hex() {
        assert_eq!("42".parse::<MasterSeed>().unwrap(), MasterSeed(42));
        assert_eq!("0x2A".parse::<MasterSeed>().unwrap(), MasterSeed(42));
        assert_eq!(
            "0xffffffffffffffff".parse::<MasterSeed>().unwrap(),
            MasterSeed(u64::MAX)
        );
        assert!("-1".parse::<MasterSeed>().is_err());
        assert!("0xzz".parse::<MasterSeed>().is_err());
    }

    #[test]
    fn run_seed_is_pure_and_distinct() {
        let s = MasterSeed(7);
        assert_eq!(derive_run_seed(s, 0, 0), derive_run_seed(s, 0, 0));
        assert_ne!(derive_run_seed(s, 0, 0), derive_run_seed(s, 0, 1));
        assert_ne!(derive_run_seed(s, 0, 0), derive_run_seed(s, 1, 0));
        assert_ne!(derive_run_seed(s, 0, 0), derive_run_seed(MasterSeed(8), 0, 0));
    }

    #[test]
    fn run_seed_collision_scan() {
        let master = MasterSeed(0xDEAD_BEEF);
        let mut seen = HashSet::with_capacity(1_000_000);
        for grid in 0..1000u64 {
            for run in 0..1000u64 {
                assert!(seen.insert(derive_run_seed(master, grid, run)));
            }
        }
        assert_eq!(seen.len(), 1_000_000);
    }

    #[test]
    fn identical_seed_replays() {
        let mut a = stream(99);
        let mut b = stream(99);
        for _ in 0..1000 {
            assert_eq!(a.next_u64(), b.next_u64());
        }
        assert_eq!(a.poisson(3.0), b.poisson(3.0));
        assert_eq!(a.poisson(500.0), b.poisson(500.0));
    }

    #[test]
    fn poisson_zero_consumes_nothing() {
        let mut a = stream(1);
        let mut b = stream(1);
        assert_eq!(a.poisson(0.0), 0);
        assert_eq!(a.next_u64(), b.next_u64());
    }

    #[test]
    fn uniform_int_edges() {
        let mut s = stream(3);
        for _ in 0..10 {
            assert_eq!(s.uniform_int(5, 5).unwrap(), 5);
        }
        assert!(matches!(
            s.uniform_int(3, 2),
            Err(StochasticsError::EmptyRange { lo: 3, hi: 2 })
        ));
        let full = s.uniform_int(i64::MIN, i64::MAX);
        assert!(full.is_ok());
        for _ in 0..1000 {
            let v = s.uniform_int(-3, 3).unwrap();
            assert!((-3..=3).contains(&v));
        }
    }

    #[test]
    fn uniform_frequencies_1_to_20() {
        let mut s = stream(11);
        let mut counts = [0u32; 21];
        for _ in 0..1_000_000 {
            counts[s.uniform_int(1, 20).unwrap() as usize] += 1;
        }
        assert_eq!(counts[0], 0);
        for &c in &counts[1..] {
            assert!((47_500..=52_500).contains(&c), "count {c}");
        }
    }

    #[test]
    fn shuffle_empty_and_pair() {
        let mut s = stream(5);
        let mut empty: [u8; 0] = [];
        s.shuffle(&mut empty);
        let mut ab_first = 0;
        for _ in 0..100_000 {
            let mut v = ['a', 'b'];
            s.shuffle(&mut v);
            if v == ['a', 'b'] {
                ab_first += 1;
            }
        }
        assert!((49_000..=51_000).contains(&ab_first), "{ab_first}");
    }

    #[test]
    fn shuffle_all_24_orders_of_four() {
        let mut s = stream(17);
        let mut counts = std::collections::HashMap::new();
        for _ in 0..1_000_000 {
            let mut v = [0u8, 1, 2, 3];
            s.shuffle(&mut v);
            *counts.entry(v).or_insert(0u32) += 1;
        }
        assert_eq!(counts.len(), 24);
        let expected = 1_000_000.0 / 24.0;
        for &c in counts.values() {
            assert!((f64::from(c) - expected).abs() <= 0.05 * expected, "{c}");
        }
    }

    fn moments(samples: &[u64]) -> (f64, f64) {
        let n = samples.len() as f64;
        let mean = samples.iter().map(|&x| x as f64).sum::<f64>() / n;
        let var = samples.iter().map(|&x| (x as f64 - mean).powi(2)).sum::<f64>() / (n - 1.0);
        (mean, var)
    }

    #[test]
    fn poisson_moments_mean_two() {
        let mut s = stream(23);
        let samples: Vec<u64> = (0..1_000_000).map(|_| s.poisson(2.0)).collect();
        let (mean, var) = moments(&samples);
        assert!((mean - 2.0).abs() <= 0.005, "mean {mean}");
        assert!((var - 2.0).abs() <= 0.02, "var {var}");
    }

    #[test]
    fn poisson_moments_mean_thousand() {
        let mut s = stream(29);
        let samples: Vec<u64> = (0..100_000).map(|_| s.poisson(1000.0)).collect();
        let (mean, var) = moments(&samples);
        assert!((mean - 1000.0).abs() <= 1.0, "mean {mean}");
        assert!((var - 1000.0).abs() <= 30.0, "var {var}");
    }

    #[test]
    fn poisson_pmf_matches_at_inversion_boundary() {
        // mean 10 is the last inversion mean, 10.5 the first rejection mean
        for (seed, mean) in [(31u64, 10.0f64), (37, 10.5)] {
            let mut s = stream(seed);
            let n = 400_000;
            let mut counts = vec![0u32; 64];
            for _ in 0..n {
                let k = s.poisson(mean) as usize;
                counts[k.min(63)] += 1;
            }
            for k in 0..30u64 {
                let pmf = (-mean + k as f64 * mean.ln() - ln_factorial(k)).exp();
                let se = (pmf * (1.0 - pmf) / f64::from(n)).sqrt();
                let freq = f64::from(counts[k as usize]) / f64::from(n);
                assert!(
                    (freq - pmf).abs() <= 5.0 * se + 1e-6,
                    "mean {mean} k {k}: {freq} vs {pmf}"
                );
            }
        }
    }

    #[test]
    fn ln_factorial_branches_agree() {
        let direct: f64 = (2..=40u64).map(|i| (i as f64).ln()).sum();
        assert!((ln_factorial(40) - direct).abs() < 1e-10);
        let direct15: f64 = (2..=15u64).map(|i| (i as f64).ln()).sum();
        assert!((ln_factorial(15) - direct15).abs() < 1e-12);
        assert_eq!(ln_factorial(0), 0.0);
        assert_eq!(ln_factorial(1), 0.0);
    }
}
