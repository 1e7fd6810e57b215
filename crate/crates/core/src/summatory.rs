//! Checkpointed prefix sums and the smoothed Mertens sums.
//!
//! [`PrefixSums`] keeps μ densely (one byte per integer) and snapshots the
//! running sums every `checkpoint_stride` integers:
//!
//! * `M(k) = Σ_{n≤k} μ(n)` as an exact `i64`,
//! * `A(k) = Σ_{n≤k} μ(n) log n`, compensated,
//! * `I(k) = ∫₁^k M(y)/y dy = Σ_{j<k} M(j) log(1 + 1/j)`, compensated.
//!
//! A query between checkpoints replays μ from the nearest snapshot below, so
//! the same `k` always produces the same bits. ψ and `Σ Λ(n)/n` live on the
//! sparse list of prime powers; `Σ Θ` and `Σ Λ₂` are dense prefix arrays up
//! to the convolution cap.

use std::io::Write;

use crate::dirichlet::ArithTable;
use crate::error::{Error, Result};
use crate::format::g17;
use crate::kahan::NeumaierSum;
use crate::sieve::{SegmentedSieve, DEFAULT_SEGMENT_SIZE};

pub const DEFAULT_CHECKPOINT_STRIDE: usize = 64;

/// Which normalized Mertens function: `𝓗(x) = 𝓕(e^{√x})/e^{√x}` or
/// `H(x) = M(e^{√x})/e^{√x}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProfileKind {
    Smoothed,
    Mertens,
}

impl ProfileKind {
    pub fn name(self) -> &'static str {
        match self {
            ProfileKind::Smoothed => "smoothed",
            ProfileKind::Mertens => "mertens",
        }
    }
}

impl std::str::FromStr for ProfileKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "smoothed" => Ok(ProfileKind::Smoothed),
            "mertens" => Ok(ProfileKind::Mertens),
            other => Err(Error::Config(format!("unknown profile kind {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, Default)]
struct State {
    m: i64,
    a: NeumaierSum,
    i: NeumaierSum,
}

impl State {
    #[inline]
    fn step(&mut self, n: u64, mu: i8) {
        if n >= 2 && self.m != 0 {
            self.i += self.m as f64 * (1.0 / (n - 1) as f64).ln_1p();
        }
        if mu != 0 {
            self.m += mu as i64;
            self.a += mu as f64 * (n as f64).ln();
        }
    }
}

#[derive(Debug, Clone)]
pub struct PrefixSums {
    n_max: u64,
    stride: usize,
    mu: Vec<i8>,
    checkpoints: Vec<State>,
    prime_powers: Vec<u64>,
    prime_power_log: Vec<f64>,
    psi_cum: Vec<f64>,
    lambda_over_n_cum: Vec<f64>,
    s_theta: Vec<f64>,
    s_lambda2: Vec<f64>,
}

impl PrefixSums {
    /// Sieve `[1, n_max]` with default settings and no convolution columns.
    pub fn new(n_max: u64) -> Result<Self> {
        let sieve = SegmentedSieve::new(n_max, DEFAULT_SEGMENT_SIZE)?;
        Self::build(&sieve, DEFAULT_CHECKPOINT_STRIDE, None)
    }

    pub fn build(sieve: &SegmentedSieve, stride: usize, table: Option<&ArithTable>) -> Result<Self> {
        if stride == 0 {
            return Err(Error::range("checkpoint stride must be positive"));
        }
        let n_max = sieve.n_max();
        let mut mu = Vec::with_capacity(n_max as usize + 1);
        mu.push(0i8);
        let mut checkpoints = Vec::with_capacity(n_max as usize / stride + 1);
        checkpoints.push(State::default());
        let mut state = State::default();
        let mut prime_powers = Vec::new();
        let mut prime_power_log = Vec::new();
        let stride64 = stride as u64;

        sieve.for_each_segment(|seg| {
            let seg_mu = seg.mobius();
            for (i, &m) in seg_mu.iter().enumerate() {
                let n = seg.lo() + i as u64;
                state.step(n, m);
                if n.is_multiple_of(stride64) {
                    checkpoints.push(state);
                }
            }
            mu.extend_from_slice(&seg_mu);
            for (n, p) in seg.prime_powers() {
                prime_powers.push(n);
                prime_power_log.push((p as f64).ln());
            }
            Ok(())
        })?;

        let mut psi = NeumaierSum::new();
        let mut lon = NeumaierSum::new();
        let mut psi_cum = Vec::with_capacity(prime_powers.len());
        let mut lambda_over_n_cum = Vec::with_capacity(prime_powers.len());
        for (&n, &l) in prime_powers.iter().zip(&prime_power_log) {
            psi += l;
            lon += l / n as f64;
            psi_cum.push(psi.sum());
            lambda_over_n_cum.push(lon.sum());
        }

        let (s_theta, s_lambda2) = match table {
            Some(t) => {
                let cap = t.n_max().min(n_max) as usize;
                (prefix(&t.theta()[..=cap]), prefix(&t.lambda2()[..=cap]))
            }
            None => (vec![0.0], vec![0.0]),
        };

        Ok(Self {
            n_max,
            stride,
            mu,
            checkpoints,
            prime_powers,
            prime_power_log,
            psi_cum,
            lambda_over_n_cum,
            s_theta,
            s_lambda2,
        })
    }

    pub fn n_max(&self) -> u64 {
        self.n_max
    }

    pub fn checkpoint_stride(&self) -> usize {
        self.stride
    }

    /// Largest `x` for which `Σ Θ` and `Σ Λ₂` are available (0 without a table).
    pub fn conv_cap(&self) -> u64 {
        (self.s_lambda2.len() - 1) as u64
    }

    pub fn mu(&self, n: u64) -> i8 {
        self.mu[n as usize]
    }

    pub fn mu_column(&self) -> &[i8] {
        &self.mu
    }

    /// Prime powers `p^k ≤ n_max` in increasing order, with `log p`.
    pub fn prime_powers(&self) -> (&[u64], &[f64]) {
        (&self.prime_powers, &self.prime_power_log)
    }

    fn state(&self, k: u64) -> State {
        let c = (k / self.stride as u64) as usize;
        let mut s = self.checkpoints[c];
        for n in (c * self.stride) as u64 + 1..=k {
            s.step(n, self.mu[n as usize]);
        }
        s
    }

    /// `(M(k), A(k))` without the integral column.
    fn state_ma(&self, k: u64) -> (i64, NeumaierSum) {
        let c = (k / self.stride as u64) as usize;
        let State { mut m, mut a, .. } = self.checkpoints[c];
        for n in (c * self.stride) as u64 + 1..=k {
            let mu = self.mu[n as usize];
            if mu != 0 {
                m += mu as i64;
                a += mu as f64 * (n as f64).ln();
            }
        }
        (m, a)
    }

    /// `(M(k), A(k))` for an integer `0 ≤ k ≤ n_max`.
    pub fn partial(&self, k: u64) -> (i64, f64) {
        assert!(k <= self.n_max, "partial sum index {k} past n_max {}", self.n_max);
        let (m, a) = self.state_ma(k);
        (m, a.sum())
    }

    pub(crate) fn floor_in_range(&self, x: f64, lo: f64, what: &str) -> Result<u64> {
        if !x.is_finite() || x < lo {
            return Err(Error::range(format!("{what} needs x >= {lo}, got {x}")));
        }
        if x >= (self.n_max + 1) as f64 {
            return Err(self.capability(what, x));
        }
        Ok(x.floor() as u64)
    }

    pub(crate) fn capability(&self, what: &str, x: f64) -> Error {
        Error::Capability {
            what: what.to_string(),
            cap: "n_max",
            needed: x.floor(),
            available: self.n_max as f64,
            max_usable: self.n_max as f64,
        }
    }

    /// `M(⌊x⌋)`, exact.
    pub fn mertens(&self, x: f64) -> Result<i64> {
        let k = self.floor_in_range(x, 1.0, "mertens")?;
        Ok(self.state_ma(k).0)
    }

    /// `A(⌊x⌋) = Σ_{n≤x} μ(n) log n`.
    pub fn mu_log_sum(&self, x: f64) -> Result<f64> {
        let k = self.floor_in_range(x, 1.0, "mu_log_sum")?;
        Ok(self.state_ma(k).1.sum())
    }

    /// `𝓕(x) = Σ_{n≤x} μ(n) log(x/n) = M(⌊x⌋) log x − A(⌊x⌋)`.
    pub fn big_f(&self, x: f64) -> Result<f64> {
        let k = self.floor_in_range(x, 1.0, "big_f")?;
        Ok(self.big_f_unchecked(x, k))
    }

    #[inline]
    fn big_f_unchecked(&self, x: f64, k: u64) -> f64 {
        let (m, a) = self.state_ma(k);
        m as f64 * x.ln() - a.sum()
    }

    /// `∫₁ˣ M(y)/y dy` summed step by step over the integers.
    pub fn big_f_integral(&self, x: f64) -> Result<f64> {
        let k = self.floor_in_range(x, 1.0, "big_f_integral")?;
        let s = self.state(k);
        Ok(s.i.sum() + s.m as f64 * (x / k as f64).ln())
    }

    /// `𝓗` through its `y = e^{√x}` parametrization: `𝓕(y)/y`.
    pub fn h_smoothed(&self, y: f64) -> Result<f64> {
        Ok(self.big_f(y)? / y)
    }

    /// Mertens-normalized `H` through `y = e^{√x}`: `M(y)/y`.
    pub fn h_mertens(&self, y: f64) -> Result<f64> {
        Ok(self.mertens(y)? as f64 / y)
    }

    pub fn h_value(&self, kind: ProfileKind, y: f64) -> Result<f64> {
        match kind {
            ProfileKind::Smoothed => self.h_smoothed(y),
            ProfileKind::Mertens => self.h_mertens(y),
        }
    }

    /// `Σ_{n≤x} 𝓕(x/n)`, one 𝓕 evaluation per distinct `⌊x/n⌋`.
    pub fn f_sum(&self, x: f64) -> Result<f64> {
        let top = self.floor_in_range(x, 1.0, "f_sum")?;
        let log_x = x.ln();
        let mut acc = NeumaierSum::new();
        let mut n = 1u64;
        while n <= top {
            let q = top / n;
            let last = top / q;
            let (m, a) = self.state_ma(q);
            if last == n {
                acc += m as f64 * (x / n as f64).ln() - a.sum();
            } else {
                let count = (last - n + 1) as f64;
                let log_sum = count * log_x - ln_factorial_range(n, last);
                acc += m as f64 * log_sum - count * a.sum();
            }
            n = last + 1;
        }
        Ok(acc.sum())
    }

    /// `G(x) = log x · Σ_{n≤x} 𝓕(x/n)`.
    pub fn g_weighted(&self, x: f64) -> Result<f64> {
        Ok(x.ln() * self.f_sum(x)?)
    }

    /// `ψ(x) = Σ_{n≤x} Λ(n)`.
    pub fn psi(&self, x: f64) -> Result<f64> {
        let k = self.floor_in_range(x, 1.0, "psi")?;
        let idx = self.prime_powers.partition_point(|&p| p <= k);
        Ok(if idx == 0 { 0.0 } else { self.psi_cum[idx - 1] })
    }

    /// `(Σ_{n≤x} Λ(n)/n, Σ Λ(n)/n − log x)`.
    pub fn lambda_over_n_sum(&self, x: f64) -> Result<(f64, f64)> {
        let k = self.floor_in_range(x, 2.0, "lambda_over_n_sum")?;
        let idx = self.prime_powers.partition_point(|&p| p <= k);
        let v = if idx == 0 { 0.0 } else { self.lambda_over_n_cum[idx - 1] };
        Ok((v, v - x.ln()))
    }

    fn conv_prefix(&self, col: &[f64], x: f64, what: &str) -> Result<f64> {
        if !x.is_finite() || x < 1.0 {
            return Err(Error::range(format!("{what} needs x >= 1, got {x}")));
        }
        let cap = self.conv_cap();
        if x.floor() > cap as f64 {
            return Err(Error::Capability {
                what: what.to_string(),
                cap: "conv_cap",
                needed: x.floor(),
                available: cap as f64,
                max_usable: cap as f64,
            });
        }
        Ok(col[x.floor() as usize])
    }

    /// `Σ_{n≤x} Θ(n)`.
    pub fn sum_theta(&self, x: f64) -> Result<f64> {
        self.conv_prefix(&self.s_theta, x, "sum_theta")
    }

    /// `Σ_{n≤x} Λ₂(n)`.
    pub fn sum_lambda2(&self, x: f64) -> Result<f64> {
        self.conv_prefix(&self.s_lambda2, x, "sum_lambda2")
    }

    /// Sequential access starting at `n` (state includes `n`).
    pub fn cursor(&self, n: u64) -> Cursor<'_> {
        assert!(n >= 1 && n <= self.n_max, "cursor start {n} outside [1, {}]", self.n_max);
        Cursor { sums: self, n, state: self.state(n) }
    }

    /// `∫₁^y w(u) du` and `∫₁^y |w(u)| du` at every `y` in `ys`, where
    /// `w(u) = 𝓕(u) log u / u²` for [`ProfileKind::Smoothed`] and
    /// `w(u) = M(u) log u / u²` for [`ProfileKind::Mertens`].
    ///
    /// Twice these are `∫₀ˣ 𝓗` and `∫₀ˣ |𝓗|` at `x = log² y`. One pass over the
    /// integers up to `max(ys)`; each unit step is integrated in closed form.
    pub fn kernel_integrals(&self, kind: ProfileKind, ys: &[f64]) -> Result<Vec<KernelIntegral>> {
        let mut order: Vec<usize> = (0..ys.len()).collect();
        for &y in ys {
            self.floor_in_range(y, 1.0, "kernel_integrals")?;
        }
        order.sort_by(|&a, &b| ys[a].total_cmp(&ys[b]));
        let mut out = vec![KernelIntegral::default(); ys.len()];
        let Some(&last) = order.last() else { return Ok(out) };
        let y_top = ys[last];

        let mut cur = self.cursor(1);
        let mut abs = NeumaierSum::new();
        let mut signed = NeumaierSum::new();
        let mut q = 0;
        loop {
            let k = cur.n();
            let (m, a) = cur.kernel_coefficients(kind);
            let u0 = k as f64;
            while q < order.len() && ys[order[q]] < u0 + 1.0 {
                let y = ys[order[q]];
                out[order[q]] = KernelIntegral {
                    signed: signed.sum() + log_kernel_integral(m, a, u0, y),
                    abs: abs.sum() + log_kernel_abs_integral(m, a, u0, y),
                };
                q += 1;
            }
            if q == order.len() || u0 + 1.0 > y_top {
                break;
            }
            signed += log_kernel_integral(m, a, u0, u0 + 1.0);
            abs += log_kernel_abs_integral(m, a, u0, u0 + 1.0);
            if !cur.advance() {
                break;
            }
        }
        Ok(out)
    }

    /// CSV rows `x,M,F_sum,F_integral,psi,S_lambda2`; `S_lambda2` is empty past the convolution cap.
    pub fn write_csv<W: Write>(&self, mut w: W, xs: &[f64]) -> Result<()> {
        writeln!(w, "x,M,F_sum,F_integral,psi,S_lambda2")?;
        for &x in xs {
            let s_l2 = if x.floor() <= self.conv_cap() as f64 && self.conv_cap() > 0 {
                g17(self.sum_lambda2(x)?)
            } else {
                String::new()
            };
            writeln!(
                w,
                "{},{},{},{},{},{}",
                g17(x),
                self.mertens(x)?,
                g17(self.big_f(x)?),
                g17(self.big_f_integral(x)?),
                g17(self.psi(x)?),
                s_l2
            )?;
        }
        Ok(())
    }
}

fn prefix(col: &[f64]) -> Vec<f64> {
    let mut acc = NeumaierSum::new();
    col.iter()
        .map(|&v| {
            acc += v;
            acc.sum()
        })
        .collect()
}

/// Signed and absolute integrals returned by [`PrefixSums::kernel_integrals`].
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct KernelIntegral {
    pub signed: f64,
    pub abs: f64,
}

/// Forward-only walk over `n = 1, 2, …, n_max`.
#[derive(Debug, Clone)]
pub struct Cursor<'a> {
    sums: &'a PrefixSums,
    n: u64,
    state: State,
}

impl Cursor<'_> {
    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn mertens(&self) -> i64 {
        self.state.m
    }

    pub fn mu_log_sum(&self) -> f64 {
        self.state.a.sum()
    }

    /// `∫₁ⁿ M(y)/y dy`.
    pub fn f_integral(&self) -> f64 {
        self.state.i.sum()
    }

    /// `𝓕(u)` for `u` in `[n, n+1)`.
    pub fn big_f_at(&self, u: f64) -> f64 {
        self.state.m as f64 * u.ln() - self.state.a.sum()
    }

    /// `(m, a)` such that the step integrand is `(m log u − a) log u / u²`.
    pub fn kernel_coefficients(&self, kind: ProfileKind) -> (f64, f64) {
        match kind {
            ProfileKind::Smoothed => (self.state.m as f64, self.state.a.sum()),
            ProfileKind::Mertens => (0.0, -(self.state.m as f64)),
        }
    }

    /// Move to `n + 1`; false at `n_max`.
    pub fn advance(&mut self) -> bool {
        if self.n >= self.sums.n_max {
            return false;
        }
        self.n += 1;
        self.state.step(self.n, self.sums.mu[self.n as usize]);
        true
    }
}

/// `Σ_{n≤x} log²(x/n)` and its remainder against `2x`.
pub fn log_square_sum(x: f64) -> Result<(f64, f64)> {
    if !x.is_finite() || x < 1.0 {
        return Err(Error::range(format!("log_square_sum needs x >= 1, got {x}")));
    }
    let top = x.floor() as u64;
    let value = crate::kahan::sum((1..=top).map(|n| (x / n as f64).ln().powi(2)));
    Ok((value, value - 2.0 * x))
}

/// `Σ_{j=a}^{b} log j`. Short ranges are summed directly, long ones through a
/// Stirling difference arranged to avoid subtracting two large `log Γ` values.
pub fn ln_factorial_range(a: u64, b: u64) -> f64 {
    const DIRECT: u64 = 64;
    if b < a {
        return 0.0;
    }
    if a < DIRECT {
        let split = b.min(DIRECT - 1);
        let head = crate::kahan::sum((a.max(1)..=split).map(|j| (j as f64).ln()));
        return if b < DIRECT { head } else { head + ln_factorial_range(DIRECT, b) };
    }
    if b - a < DIRECT {
        return crate::kahan::sum((a..=b).map(|j| (j as f64).ln()));
    }
    // log Γ(b+1) − log Γ(a)
    let z0 = a as f64;
    let z1 = (b + 1) as f64;
    let c = (b + 1 - a) as f64;
    let main = (z0 - 0.5) * (c / z0).ln_1p() + c * z1.ln() - c;
    main + stirling_tail(z1) - stirling_tail(z0)
}

fn stirling_tail(z: f64) -> f64 {
    let inv = 1.0 / z;
    let inv2 = inv * inv;
    inv * (1.0 / 12.0 - inv2 * (1.0 / 360.0 - inv2 * (1.0 / 1260.0 - inv2 / 1680.0)))
}

/// `x = log² y`.
pub fn x_of_y(y: f64) -> f64 {
    y.ln().powi(2)
}

/// `y = e^{√x}`.
pub fn y_of_x(x: f64) -> f64 {
    x.max(0.0).sqrt().exp()
}

/// `∫_{u0}^{u1} (m log u − a) log u / u² du`, closed form.
///
/// The antiderivative is `−P(log u)/u` with `P(ℓ) = m(ℓ² + 2ℓ + 2) − a(ℓ + 1)`;
/// the difference is rearranged around `log(u1/u0)` so that nearby endpoints do
/// not cancel.
pub fn log_kernel_integral(m: f64, a: f64, u0: f64, u1: f64) -> f64 {
    if u1 == u0 {
        return 0.0;
    }
    let l0 = u0.ln();
    let l1 = u1.ln();
    let delta = ((u1 - u0) / u0).ln_1p();
    let p0 = m * (l0 * l0 + 2.0 * l0 + 2.0) - a * (l0 + 1.0);
    p0 * (u1 - u0) / (u0 * u1) - delta * (m * (l1 + l0 + 2.0) - a) / u1
}

/// `∫_{u0}^{u1} |m log u − a| log u / u² du`, split at `u = e^{a/m}`.
pub fn log_kernel_abs_integral(m: f64, a: f64, u0: f64, u1: f64) -> f64 {
    if m != 0.0 {
        let root = (a / m).exp();
        if root > u0 && root < u1 {
            return log_kernel_integral(m, a, u0, root).abs() + log_kernel_integral(m, a, root, u1).abs();
        }
    }
    log_kernel_integral(m, a, u0, u1).abs()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dirichlet::{Lambda2Method, Tolerances};

    fn sums(n: u64) -> PrefixSums {
        PrefixSums::new(n).unwrap()
    }

    #[test]
    fn mertens_small_values() {
        let s = sums(1000);
        assert_eq!(s.mertens(1.0).unwrap(), 1);
        assert_eq!(s.mertens(10.0).unwrap(), -1);
        assert_eq!(s.mertens(10.99).unwrap(), -1);
        assert_eq!(s.mertens(100.0).unwrap(), 1);
        assert_eq!(s.mertens(1000.0).unwrap(), 2);
        assert!(matches!(s.mertens(0.5), Err(Error::Range(_))));
        assert!(matches!(s.mertens(1001.0), Err(Error::Capability { .. })));
    }

    #[test]
    fn big_f_hand_values() {
        let s = sums(100);
        assert_eq!(s.big_f(1.0).unwrap(), 0.0);
        assert!((s.big_f(2.0).unwrap() - 2f64.ln()).abs() < 1e-15);
        assert!((s.big_f(4.0).unwrap() - 1.5f64.ln()).abs() < 1e-15);
        assert_eq!(s.big_f_integral(1.0).unwrap(), 0.0);
        assert!((s.big_f_integral(2.0).unwrap() - 2f64.ln()).abs() < 1e-15);
        assert!((s.big_f_integral(4.0).unwrap() - 1.5f64.ln()).abs() < 1e-15);
        assert!(matches!(s.big_f(0.9), Err(Error::Range(_))));
    }

    #[test]
    fn h_values() {
        let s = sums(100);
        assert_eq!(s.h_smoothed(1.0).unwrap(), 0.0);
        assert!((s.h_smoothed(2.0).unwrap() - 2f64.ln() / 2.0).abs() < 1e-15);
        assert_eq!(s.h_mertens(10.0).unwrap(), -0.1);
        assert!(matches!(s.h_smoothed(0.5), Err(Error::Range(_))));
        assert!((x_of_y(y_of_x(3.7)) - 3.7).abs() < 1e-14);
    }

    #[test]
    fn g_weighted_hand_values() {
        let s = sums(100);
        assert_eq!(s.g_weighted(1.0).unwrap(), 0.0);
        assert!((s.g_weighted(2.0).unwrap() - 2f64.ln().powi(2)).abs() < 1e-14);
        assert!((s.g_weighted(4.0).unwrap() - 4f64.ln().powi(2)).abs() < 1e-14);
    }

    #[test]
    fn f_sum_blocks_match_direct_sum() {
        let s = sums(50_000);
        for &x in &[7.5, 99.0, 1234.567, 49_999.9] {
            let direct = crate::kahan::sum((1..=(x as u64)).map(|n| s.big_f(x / n as f64).unwrap()));
            assert!((s.f_sum(x).unwrap() - direct).abs() < 1e-9 * x, "x={x}");
            assert!((direct - x.ln()).abs() < 1e-9 * x);
        }
    }

    #[test]
    fn log_square_sum_values() {
        assert_eq!(log_square_sum(1.0).unwrap(), (0.0, -2.0));
        let (v, r) = log_square_sum(2.0).unwrap();
        assert!((v - 2f64.ln().powi(2)).abs() < 1e-15);
        assert!((r - (2f64.ln().powi(2) - 4.0)).abs() < 1e-14);
        let (_, r) = log_square_sum(1e6).unwrap();
        assert!(r.abs() <= 5.0 * 1e6f64.ln().powi(2), "{r}");
    }

    #[test]
    fn lambda_over_n_values() {
        let s = sums(1000);
        let (_, r2) = s.lambda_over_n_sum(2.0).unwrap();
        assert!((r2 - (2f64.ln() / 2.0 - 2f64.ln())).abs() < 1e-15);
        let (_, r3) = s.lambda_over_n_sum(3.0).unwrap();
        assert!((r3 - (2f64.ln() / 2.0 + 3f64.ln() / 3.0 - 3f64.ln())).abs() < 1e-15);
        assert!(matches!(s.lambda_over_n_sum(1.5), Err(Error::Range(_))));
    }

    #[test]
    fn stride_does_not_change_answers() {
        let sieve = SegmentedSieve::new(5000, 777).unwrap();
        let a = PrefixSums::build(&sieve, 1, None).unwrap();
        let b = PrefixSums::build(&sieve, 1000, None).unwrap();
        for x in [1.0, 2.5, 999.0, 1000.0, 1001.0, 4999.5, 5000.0] {
            assert_eq!(a.mertens(x).unwrap(), b.mertens(x).unwrap());
            assert!((a.big_f(x).unwrap() - b.big_f(x).unwrap()).abs() < 1e-12);
            assert!((a.big_f_integral(x).unwrap() - b.big_f_integral(x).unwrap()).abs() < 1e-12);
        }
    }

    #[test]
    fn ln_factorial_range_against_direct() {
        for &(a, b) in &[(1u64, 1u64), (1, 10), (5, 200), (63, 64), (64, 10_000), (1000, 1100), (99_999, 400_000)] {
            let direct = crate::kahan::sum((a..=b).map(|j| (j as f64).ln()));
            let got = ln_factorial_range(a, b);
            assert!((got - direct).abs() <= 1e-13 * direct.abs().max(1.0), "[{a},{b}] {got} vs {direct}");
        }
        assert_eq!(ln_factorial_range(5, 4), 0.0);
    }

    #[test]
    fn kernel_against_midpoint_quadrature() {
        for &(m, a, u0, u1) in &[(1.0, 0.0, 1.0, 2.0), (-3.0, -5.2, 5.0, 6.0), (17.0, 40.0, 1e5, 1e5 + 1.0), (0.0, -4.0, 7.0, 7.5)] {
            let n = 200_000;
            let h = (u1 - u0) / n as f64;
            let w = |u: f64| (m * u.ln() - a) * u.ln() / (u * u);
            let quad = crate::kahan::sum((0..n).map(|i| w(u0 + (i as f64 + 0.5) * h))) * h;
            let quad_abs = crate::kahan::sum((0..n).map(|i| w(u0 + (i as f64 + 0.5) * h).abs())) * h;
            let scale = quad_abs.max(1e-300);
            assert!((log_kernel_integral(m, a, u0, u1) - quad).abs() < 1e-8 * scale, "{m} {a} {u0}");
            assert!((log_kernel_abs_integral(m, a, u0, u1) - quad_abs).abs() < 1e-8 * scale);
        }
    }

    #[test]
    fn kernel_integral_at_two() {
        // ∫₁² log² u / u² du = 1 − log 2 − log²2 / 2
        let s = sums(10);
        let k = s.kernel_integrals(ProfileKind::Smoothed, &[2.0, 1.0]).unwrap();
        let want = 1.0 - 2f64.ln() - 2f64.ln().powi(2) / 2.0;
        assert!((k[0].abs - want).abs() < 1e-15);
        assert_eq!(k[1], KernelIntegral::default());
    }

    #[test]
    fn conv_columns_need_a_table() {
        let s = sums(100);
        assert!(matches!(s.sum_lambda2(10.0), Err(Error::Capability { .. })));
        let t = ArithTable::build(100, Lambda2Method::SelbergForm, Tolerances::default()).unwrap();
        let sieve = SegmentedSieve::new(100, 64).unwrap();
        let s = PrefixSums::build(&sieve, 8, Some(&t)).unwrap();
        let want: f64 = t.lambda2()[..=10].iter().sum();
        assert!((s.sum_lambda2(10.0).unwrap() - want).abs() < 1e-13);
        assert!((s.sum_lambda2(10.0).unwrap() - 19.282_884_394_108_43).abs() < 1e-12);
    }

    #[test]
    fn csv_rows() {
        let s = sums(20);
        let mut buf = Vec::new();
        s.write_csv(&mut buf, &[1.0, 10.0]).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let rows: Vec<&str> = text.lines().collect();
        assert_eq!(rows[0], "x,M,F_sum,F_integral,psi,S_lambda2");
        assert!(rows[1].starts_with("1,1,0,0,0,"));
        assert!(rows[2].starts_with("10,-1,"));
    }
}
