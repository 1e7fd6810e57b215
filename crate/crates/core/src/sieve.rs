//! Segmented least-prime-factor sieve.
//!
//! A [`SieveSegment`] covers a half-open block `[lo, hi)` and records, for
//! every `n` in the block, its least prime factor, the multiplicity of that
//! prime in `n`, and the Möbius value of the cofactor `n / lpf(n)^mult`.
//! μ and Λ are both read off these arrays without further factoring.
//!
//! Segments are independent: each one only needs the primes up to
//! `√(hi − 1)`, so disjoint blocks can be built concurrently and the result
//! is bit-identical whatever the scheduling.

use std::sync::Arc;

use rayon::prelude::*;

use crate::cache::SegmentCache;
use crate::error::{Error, Result};

/// Largest supported argument. Everything is `u64`; values above this are refused.
pub const MAX_N: u64 = (1 << 63) - 1;

pub const DEFAULT_SEGMENT_SIZE: usize = 1 << 20;

/// Primes up to and including `bound`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BasePrimes {
    bound: u64,
    primes: Vec<u64>,
}

impl BasePrimes {
    /// Plain sieve of Eratosthenes over `[2, bound]`.
    pub fn up_to(bound: u64) -> Self {
        let b = bound as usize;
        let mut composite = vec![false; b + 1];
        let mut primes = Vec::new();
        for i in 2..=b {
            if !composite[i] {
                primes.push(i as u64);
                let mut j = i * i;
                while j <= b {
                    composite[j] = true;
                    j += i;
                }
            }
        }
        Self { bound, primes }
    }

    /// Enough primes to sieve any segment ending at or below `hi`.
    pub fn for_limit(hi: u64) -> Self {
        Self::up_to(hi.saturating_sub(1).isqrt())
    }

    pub fn bound(&self) -> u64 {
        self.bound
    }

    pub fn primes(&self) -> &[u64] {
        &self.primes
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SieveSegment {
    lo: u64,
    hi: u64,
    lpf: Vec<u64>,
    lpf_mult: Vec<u8>,
    cofactor_mu: Vec<i8>,
    base_primes: Arc<BasePrimes>,
}

impl SieveSegment {
    /// Sieve `[lo, hi)`. `base_primes` must reach `√(hi − 1)`.
    pub fn build(lo: u64, hi: u64, base_primes: Arc<BasePrimes>) -> Result<Self> {
        if lo == 0 || hi <= lo {
            return Err(Error::range(format!("segment [{lo}, {hi}) is empty or starts below 1")));
        }
        if hi - 1 > MAX_N {
            return Err(Error::range(format!("segment end {hi} exceeds 2^63")));
        }
        let need = (hi - 1).isqrt();
        if base_primes.bound < need {
            return Err(Error::Precondition(format!(
                "base primes reach {}, segment [{lo}, {hi}) needs primes up to {need}",
                base_primes.bound
            )));
        }

        let len = (hi - lo) as usize;
        let last = hi - 1;
        let mut lpf = vec![0u64; len];
        let mut lpf_mult = vec![0u8; len];
        // product of all sieved prime powers found so far
        let mut prod = vec![1u64; len];
        // bit 0: parity of distinct sieved primes other than lpf
        // bit 1: some prime other than lpf divides n at least twice
        let mut flags = vec![0u8; len];

        for &p in base_primes.primes.iter().take_while(|&&p| p <= need) {
            let mut i = (first_multiple(lo, p) - lo) as usize;
            while i < len {
                if lpf[i] == 0 {
                    lpf[i] = p;
                    lpf_mult[i] = 1;
                } else {
                    flags[i] ^= 1;
                }
                prod[i] *= p;
                i += p as usize;
            }

            let mut pk = p * p;
            while pk <= last {
                let mut i = (first_multiple(lo, pk) - lo) as usize;
                while i < len {
                    if lpf[i] == p {
                        lpf_mult[i] += 1;
                    } else {
                        flags[i] |= 2;
                    }
                    prod[i] *= p;
                    i += pk as usize;
                }
                pk = match pk.checked_mul(p) {
                    Some(v) => v,
                    None => break,
                };
            }
        }

        let mut cofactor_mu = vec![0i8; len];
        for i in 0..len {
            let n = lo + i as u64;
            if n == 1 {
                lpf[i] = 1;
                lpf_mult[i] = 0;
                cofactor_mu[i] = 1;
            } else if lpf[i] == 0 {
                // no prime below √(hi-1) divides n: n is prime
                lpf[i] = n;
                lpf_mult[i] = 1;
                cofactor_mu[i] = 1;
            } else {
                let mut parity = flags[i] & 1;
                if prod[i] != n {
                    // one remaining prime factor above √(hi-1)
                    parity ^= 1;
                }
                cofactor_mu[i] = if flags[i] & 2 != 0 {
                    0
                } else if parity == 1 {
                    -1
                } else {
                    1
                };
            }
        }

        Ok(Self { lo, hi, lpf, lpf_mult, cofactor_mu, base_primes })
    }

    pub(crate) fn from_parts(
        lo: u64,
        hi: u64,
        lpf: Vec<u64>,
        lpf_mult: Vec<u8>,
        cofactor_mu: Vec<i8>,
        base_primes: Arc<BasePrimes>,
    ) -> Self {
        Self { lo, hi, lpf, lpf_mult, cofactor_mu, base_primes }
    }

    pub fn lo(&self) -> u64 {
        self.lo
    }

    pub fn hi(&self) -> u64 {
        self.hi
    }

    pub fn len(&self) -> usize {
        self.lpf.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lpf.is_empty()
    }

    pub fn lpf(&self) -> &[u64] {
        &self.lpf
    }

    pub fn lpf_mult(&self) -> &[u8] {
        &self.lpf_mult
    }

    /// μ(n / lpf(n)^mult) for every n in the segment.
    pub fn cofactor_mu(&self) -> &[i8] {
        &self.cofactor_mu
    }

    pub fn base_primes(&self) -> &BasePrimes {
        &self.base_primes
    }

    #[inline]
    fn mu_at(&self, i: usize) -> i8 {
        match self.lpf_mult[i] {
            0 => self.cofactor_mu[i],
            1 => -self.cofactor_mu[i],
            _ => 0,
        }
    }

    #[inline]
    fn is_prime_power_at(&self, i: usize) -> bool {
        let n = self.lo + i as u64;
        let k = self.lpf_mult[i];
        k >= 1 && self.lpf[i].checked_pow(k as u32) == Some(n)
    }

    /// μ(n) for n in `[lo, hi)`.
    pub fn mobius(&self) -> Vec<i8> {
        (0..self.len()).map(|i| self.mu_at(i)).collect()
    }

    /// Λ(n) for n in `[lo, hi)`, natural-log units.
    pub fn von_mangoldt(&self) -> Vec<f64> {
        (0..self.len())
            .map(|i| {
                if self.is_prime_power_at(i) {
                    (self.lpf[i] as f64).ln()
                } else {
                    0.0
                }
            })
            .collect()
    }

    /// `(n, p)` for every prime power `n = p^k` in the segment.
    pub fn prime_powers(&self) -> impl Iterator<Item = (u64, u64)> + '_ {
        (0..self.len())
            .filter(|&i| self.is_prime_power_at(i))
            .map(|i| (self.lo + i as u64, self.lpf[i]))
    }
}

#[inline]
fn first_multiple(lo: u64, p: u64) -> u64 {
    lo.div_ceil(p) * p
}

/// Drives segment construction over `[1, n_max]`.
#[derive(Debug, Clone)]
pub struct SegmentedSieve {
    n_max: u64,
    segment_size: usize,
    base_primes: Arc<BasePrimes>,
    cache: Option<SegmentCache>,
}

impl SegmentedSieve {
    pub fn new(n_max: u64, segment_size: usize) -> Result<Self> {
        if n_max == 0 {
            return Err(Error::range("n_max must be at least 1"));
        }
        if n_max > MAX_N {
            return Err(Error::range(format!("n_max {n_max} exceeds 2^63 - 1")));
        }
        if segment_size == 0 {
            return Err(Error::range("segment size must be positive"));
        }
        Ok(Self {
            n_max,
            segment_size,
            base_primes: Arc::new(BasePrimes::up_to(n_max.isqrt())),
            cache: None,
        })
    }

    pub fn with_cache(mut self, cache: SegmentCache) -> Self {
        self.cache = Some(cache);
        self
    }

    pub fn n_max(&self) -> u64 {
        self.n_max
    }

    pub fn segment_size(&self) -> usize {
        self.segment_size
    }

    pub fn base_primes(&self) -> &Arc<BasePrimes> {
        &self.base_primes
    }

    pub fn ranges(&self) -> Vec<(u64, u64)> {
        let step = self.segment_size as u64;
        let end = self.n_max + 1;
        let mut out = Vec::new();
        let mut lo = 1;
        while lo < end {
            let hi = lo.saturating_add(step).min(end);
            out.push((lo, hi));
            lo = hi;
        }
        out
    }

    fn obtain(&self, lo: u64, hi: u64) -> Result<SieveSegment> {
        if let Some(cache) = &self.cache {
            if let Some(seg) = cache.load(lo, hi, &self.base_primes)? {
                return Ok(seg);
            }
            let seg = SieveSegment::build(lo, hi, self.base_primes.clone())?;
            cache.store(&seg)?;
            return Ok(seg);
        }
        SieveSegment::build(lo, hi, self.base_primes.clone())
    }

    /// Hand every segment to `visit` in increasing order. Segments are built
    /// in parallel batches; the visiting order never depends on scheduling.
    pub fn for_each_segment<F>(&self, mut visit: F) -> Result<()>
    where
        F: FnMut(&SieveSegment) -> Result<()>,
    {
        let ranges = self.ranges();
        let batch = rayon::current_num_threads().max(1);
        for chunk in ranges.chunks(batch) {
            let built: Vec<Result<SieveSegment>> =
                chunk.par_iter().map(|&(lo, hi)| self.obtain(lo, hi)).collect();
            for seg in built {
                visit(&seg?)?;
            }
        }
        Ok(())
    }

    /// μ(n) for n in `[0, n_max]` (index 0 holds 0).
    pub fn mobius_table(&self) -> Result<Vec<i8>> {
        let mut mu = Vec::with_capacity(self.n_max as usize + 1);
        mu.push(0);
        self.for_each_segment(|seg| {
            mu.extend(seg.mobius());
            Ok(())
        })?;
        Ok(mu)
    }

    /// Λ(n) for n in `[0, n_max]` (index 0 holds 0).
    pub fn von_mangoldt_table(&self) -> Result<Vec<f64>> {
        let mut lambda = Vec::with_capacity(self.n_max as usize + 1);
        lambda.push(0.0);
        self.for_each_segment(|seg| {
            lambda.extend(seg.von_mangoldt());
            Ok(())
        })?;
        Ok(lambda)
    }
}

/// μ(n) for n in `[0, n_max]` by Euler's linear sieve.
///
/// Shares no code with [`SieveSegment`]; used to cross-check Mertens values.
pub fn mobius_linear(n_max: usize) -> Vec<i8> {
    let mut mu = vec![0i8; n_max + 1];
    let mut composite = vec![false; n_max + 1];
    let mut primes: Vec<usize> = Vec::new();
    if n_max >= 1 {
        mu[1] = 1;
    }
    for i in 2..=n_max {
        if !composite[i] {
            primes.push(i);
            mu[i] = -1;
        }
        for &p in &primes {
            let ip = i * p;
            if ip > n_max {
                break;
            }
            composite[ip] = true;
            if i % p == 0 {
                mu[ip] = 0;
                break;
            }
            mu[ip] = -mu[i];
        }
    }
    mu
}

#[cfg(test)]
mod tests {
    use super::*;

    fn trial_factor(mut n: u64) -> Vec<(u64, u32)> {
        let mut out = Vec::new();
        let mut d = 2;
        while d * d <= n {
            let mut k = 0;
            while n.is_multiple_of(d) {
                n /= d;
                k += 1;
            }
            if k > 0 {
                out.push((d, k));
            }
            d += 1;
        }
        if n > 1 {
            out.push((n, 1));
        }
        out
    }

    fn seg(lo: u64, hi: u64) -> SieveSegment {
        SieveSegment::build(lo, hi, Arc::new(BasePrimes::for_limit(hi))).unwrap()
    }

    #[test]
    fn only_sentinel_for_one() {
        let s = seg(1, 2);
        assert_eq!(s.lpf(), &[1]);
        assert_eq!(s.lpf_mult(), &[0]);
        assert_eq!(s.mobius(), vec![1]);
        assert_eq!(s.von_mangoldt(), vec![0.0]);
    }

    #[test]
    fn small_block_lpf() {
        let s = seg(2, 11);
        assert_eq!(s.lpf(), &[2, 3, 2, 5, 2, 7, 2, 3, 2]);
        assert_eq!(s.mobius(), vec![-1, -1, 0, -1, 1, -1, 0, 0, 1]);
    }

    #[test]
    fn million_is_two_to_the_sixth_times_five_to_the_sixth() {
        let s = seg(1_000_000, 1_000_008);
        assert_eq!(s.lpf()[0], 2);
        assert_eq!(s.lpf_mult()[0], 6);
        for (i, &n) in (1_000_000u64..1_000_008).collect::<Vec<_>>().iter().enumerate() {
            let f = trial_factor(n);
            assert_eq!(s.lpf()[i], f[0].0);
            assert_eq!(s.lpf_mult()[i] as u32, f[0].1);
        }
    }

    #[test]
    fn mobius_and_lambda_spot_values() {
        let s = seg(1, 31);
        let mu = s.mobius();
        let lam = s.von_mangoldt();
        assert_eq!(mu[29], -1);
        assert_eq!(lam[0], 0.0);
        assert_eq!(lam[7], 2f64.ln());
        assert_eq!(lam[5], 0.0);
        // Λ(p) and Λ(p²) are bit-identical
        assert_eq!(lam[2].to_bits(), lam[8].to_bits());
    }

    #[test]
    fn rejects_bad_ranges_and_short_base() {
        let bp = Arc::new(BasePrimes::up_to(10));
        assert!(matches!(SieveSegment::build(5, 5, bp.clone()), Err(Error::Range(_))));
        assert!(matches!(SieveSegment::build(0, 5, bp.clone()), Err(Error::Range(_))));
        match SieveSegment::build(1, 200, bp) {
            Err(Error::Precondition(msg)) => assert!(msg.contains("14")),
            other => panic!("expected precondition error, got {other:?}"),
        }
    }

    #[test]
    fn matches_trial_division_up_to_1e5() {
        let sieve = SegmentedSieve::new(100_000, 4096).unwrap();
        let mu = sieve.mobius_table().unwrap();
        let lam = sieve.von_mangoldt_table().unwrap();
        for n in 1..=100_000u64 {
            let f = trial_factor(n);
            let want_mu = if f.iter().any(|&(_, k)| k > 1) {
                0
            } else if f.len().is_multiple_of(2) {
                1
            } else {
                -1
            };
            let want_lam = if f.len() == 1 { (f[0].0 as f64).ln() } else { 0.0 };
            assert_eq!(mu[n as usize], want_mu, "mu({n})");
            assert_eq!(lam[n as usize], want_lam, "Lambda({n})");
        }
    }

    #[test]
    fn linear_sieve_agrees() {
        let sieve = SegmentedSieve::new(200_000, 1 << 14).unwrap();
        assert_eq!(sieve.mobius_table().unwrap(), mobius_linear(200_000));
    }

    #[test]
    fn squarefree_density_near_six_over_pi_squared() {
        let mu = SegmentedSieve::new(1_000_000, DEFAULT_SEGMENT_SIZE)
            .unwrap()
            .mobius_table()
            .unwrap();
        let count = mu.iter().filter(|&&m| m != 0).count();
        let ratio = count as f64 / 1e6;
        assert!((ratio - 0.607927).abs() < 1e-3, "{ratio}");
    }

    #[test]
    fn refuses_oversized_n_max() {
        assert!(SegmentedSieve::new(u64::MAX, 1024).is_err());
        assert!(SegmentedSieve::new(0, 1024).is_err());
    }
}
