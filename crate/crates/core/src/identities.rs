//! Exact identities checked to rounding, and asymptotic claims sampled as
//! normalized remainder series.

use std::io::Write;

use rayon::prelude::*;
use serde::Serialize;

use crate::dirichlet::Tolerances;
use crate::error::{Error, Result};
use crate::format::g17;
use crate::kahan::NeumaierSum;
use crate::summatory::{ln_factorial_range, log_square_sum, x_of_y, y_of_x, PrefixSums, ProfileKind};

/// Values of `x` below this are treated as this value on the `𝓗` axis.
pub const X_MIN: f64 = 1e-6;

/// A function `F` on `[1, ∞)` for the Tatuzawa–Iseki identity.
///
/// `g` must return `G(y) = log y · Σ_{m≤y} F(y/m)`; the default sums directly.
pub trait TestFunction: Sync {
    fn name(&self) -> &str;
    fn eval(&self, y: f64) -> f64;

    fn g(&self, y: f64) -> f64 {
        let top = y.floor() as u64;
        y.ln() * crate::kahan::sum((1..=top).map(|m| self.eval(y / m as f64)))
    }
}

/// `F ≡ 1`.
#[derive(Debug, Clone, Copy)]
pub struct One;

impl TestFunction for One {
    fn name(&self) -> &str {
        "one"
    }
    fn eval(&self, _: f64) -> f64 {
        1.0
    }
    fn g(&self, y: f64) -> f64 {
        y.ln() * y.floor()
    }
}

/// `F = log`.
#[derive(Debug, Clone, Copy)]
pub struct Log;

impl TestFunction for Log {
    fn name(&self) -> &str {
        "log"
    }
    fn eval(&self, y: f64) -> f64 {
        y.ln()
    }
    fn g(&self, y: f64) -> f64 {
        let n = y.floor() as u64;
        let l = y.ln();
        l * (n as f64 * l - ln_factorial_range(1, n))
    }
}

/// `F = 𝓕`, with `G` evaluated in blocks of equal `⌊y/m⌋`.
#[derive(Debug, Clone, Copy)]
pub struct Smoothed<'a>(pub &'a PrefixSums);

impl TestFunction for Smoothed<'_> {
    fn name(&self) -> &str {
        "smoothed"
    }
    fn eval(&self, y: f64) -> f64 {
        self.0.big_f(y).expect("argument inside the table")
    }
    fn g(&self, y: f64) -> f64 {
        self.0.g_weighted(y).expect("argument inside the table")
    }
}

/// Any closure, with `G` summed directly.
pub struct FnTest<F> {
    pub name: String,
    pub f: F,
}

impl<F: Fn(f64) -> f64 + Sync> TestFunction for FnTest<F> {
    fn name(&self) -> &str {
        &self.name
    }
    fn eval(&self, y: f64) -> f64 {
        (self.f)(y)
    }
}

/// Two sides of an identity at one `x`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IdentityCheck {
    pub x: f64,
    pub lhs: f64,
    pub rhs: f64,
    pub residual: f64,
    pub threshold: f64,
}

impl IdentityCheck {
    fn new(x: f64, lhs: f64, rhs: f64, threshold: f64) -> Self {
        Self { x, lhs, rhs, residual: lhs - rhs, threshold }
    }

    pub fn passed(&self) -> bool {
        self.residual.abs() <= self.threshold
    }
}

fn check_x(sums: &PrefixSums, x: f64, lo: f64, what: &str) -> Result<u64> {
    sums.floor_in_range(x, lo, what)
}

/// `F(x) log x + Σ_{n≤x} F(x/n) Λ(n)` against `Σ_{d≤x} μ(d) G(x/d)`.
///
/// The threshold is `tol.rel · x log² x`.
pub fn check_tatuzawa_iseki(sums: &PrefixSums, f: &dyn TestFunction, x: f64, tol: Tolerances) -> Result<IdentityCheck> {
    let top = check_x(sums, x, 2.0, "tatuzawa_iseki")?;
    let log_x = x.ln();
    let (pp, logs) = sums.prime_powers();
    let mut lhs = NeumaierSum::from(f.eval(x) * log_x);
    for (&n, &l) in pp.iter().zip(logs).take_while(|(&n, _)| n <= top) {
        lhs += f.eval(x / n as f64) * l;
    }
    let mut rhs = NeumaierSum::new();
    for d in 1..=top {
        let m = sums.mu(d);
        if m != 0 {
            rhs += m as f64 * f.g(x / d as f64);
        }
    }
    Ok(IdentityCheck::new(x, lhs.sum(), rhs.sum(), tol.rel * x * log_x * log_x))
}

/// `Σ_{n≤x} 𝓕(x/n)` against `log x`; threshold `tol.rel · x`.
pub fn check_f_sum_identity(sums: &PrefixSums, x: f64, tol: Tolerances) -> Result<IdentityCheck> {
    Ok(IdentityCheck::new(x, sums.f_sum(x)?, x.ln(), tol.rel * x))
}

/// `Σ_{n≤x} μ(n)⌊x/n⌋ log(x/n)` against `log x + ψ(x)`; threshold `tol.rel · x log x`.
pub fn floor_weighted_mu_sum(sums: &PrefixSums, x: f64, tol: Tolerances) -> Result<IdentityCheck> {
    let top = check_x(sums, x, 2.0, "floor_weighted_mu_sum")?;
    let log_x = x.ln();
    let mut acc = NeumaierSum::new();
    let mut n = 1u64;
    while n <= top {
        let q = top / n;
        let last = top / q;
        if last == n {
            let m = sums.mu(n);
            if m != 0 {
                acc += (m as f64 * q as f64) * (x / n as f64).ln();
            }
        } else {
            let (m0, a0) = sums.partial(n - 1);
            let (m1, a1) = sums.partial(last);
            acc += q as f64 * ((m1 - m0) as f64 * log_x - (a1 - a0));
        }
        n = last + 1;
    }
    Ok(IdentityCheck::new(x, acc.sum(), log_x + sums.psi(x)?, tol.rel * x * log_x))
}

/// The asymptotic claims sampled as remainder series.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RemainderKind {
    /// `Σ Λ₂(n) − 2x log x`, over `x`.
    Selberg,
    /// `Σ (Λ(n) + Θ(n)) − 2x`, over `x / log x`.
    LambdaTheta,
    /// `Σ μ(n)⌊x/n⌋ log(x/n)`, over `log x`.
    FloorWeighted,
    /// `Σ log²(x/n) − 2x`, over `log² x`.
    LogSquare,
    /// `Σ Λ(n)/n − log x`, unnormalized.
    LambdaOverN,
    /// `|𝓕(x)| log² x − 2∫₁ˣ |𝓕(x/t)| log(x/t) dt`, over `x log x`.
    SmoothedInequality,
    /// `|𝓗(x)| − (1/x)∫₀ˣ |𝓗|`, times `√x`; `x` on the `𝓗` axis.
    HInequality,
    /// `|H(x)| − (1/x)∫₀ˣ |H|` for the Mertens-normalized `H`, unnormalized.
    MertensInequality,
}

impl RemainderKind {
    pub const ALL: [RemainderKind; 8] = [
        RemainderKind::Selberg,
        RemainderKind::LambdaTheta,
        RemainderKind::FloorWeighted,
        RemainderKind::LogSquare,
        RemainderKind::LambdaOverN,
        RemainderKind::SmoothedInequality,
        RemainderKind::HInequality,
        RemainderKind::MertensInequality,
    ];

    pub fn name(self) -> &'static str {
        match self {
            RemainderKind::Selberg => "selberg",
            RemainderKind::LambdaTheta => "lambda_theta",
            RemainderKind::FloorWeighted => "floor_weighted",
            RemainderKind::LogSquare => "log_square",
            RemainderKind::LambdaOverN => "lambda_over_n",
            RemainderKind::SmoothedInequality => "smoothed_inequality",
            RemainderKind::HInequality => "h_inequality",
            RemainderKind::MertensInequality => "mertens_inequality",
        }
    }

    pub fn normalization(self) -> &'static str {
        match self {
            RemainderKind::Selberg => "x",
            RemainderKind::LambdaTheta => "x/max(log x,1)",
            RemainderKind::FloorWeighted => "log x",
            RemainderKind::LogSquare => "max(log x,1)^2",
            RemainderKind::LambdaOverN => "1",
            RemainderKind::SmoothedInequality => "x*log x",
            RemainderKind::HInequality => "1/sqrt(x)",
            RemainderKind::MertensInequality => "1",
        }
    }

    /// True when `x` lives on the `𝓗` axis, `x = log² y`.
    pub fn h_axis(self) -> bool {
        matches!(self, RemainderKind::HInequality | RemainderKind::MertensInequality)
    }

    /// Smallest admissible `x`.
    pub fn x_lower(self) -> f64 {
        match self {
            RemainderKind::Selberg | RemainderKind::LambdaTheta | RemainderKind::LogSquare => 1.0,
            RemainderKind::FloorWeighted | RemainderKind::LambdaOverN | RemainderKind::SmoothedInequality => 2.0,
            RemainderKind::HInequality | RemainderKind::MertensInequality => 0.0,
        }
    }

    /// The name of the table bound limiting this kind and its value for `sums`.
    pub fn cap(self, sums: &PrefixSums) -> (&'static str, f64) {
        match self {
            RemainderKind::Selberg | RemainderKind::LambdaTheta => ("conv_cap", sums.conv_cap() as f64),
            k if k.h_axis() => ("n_max", x_of_y(sums.n_max() as f64)),
            _ => ("n_max", sums.n_max() as f64),
        }
    }
}

impl std::str::FromStr for RemainderKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        RemainderKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown remainder kind {s:?}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Sample {
    pub x: f64,
    pub raw: f64,
    pub normalized: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RemainderSeries {
    pub kind: RemainderKind,
    pub samples: Vec<Sample>,
    pub normalization: &'static str,
    pub sup_normalized: f64,
    pub argmax_x: f64,
}

/// JSON summary of a series.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SeriesSummary {
    pub kind: &'static str,
    pub sup_normalized: f64,
    pub argmax_x: f64,
    pub n_samples: usize,
    pub caps: Caps,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Caps {
    pub name: &'static str,
    pub value: f64,
}

impl RemainderSeries {
    fn from_samples(kind: RemainderKind, samples: Vec<Sample>) -> Self {
        let (mut sup, mut argmax) = (0.0f64, f64::NAN);
        for s in &samples {
            if argmax.is_nan() || s.normalized.abs() > sup {
                sup = s.normalized.abs();
                argmax = s.x;
            }
        }
        Self { kind, samples, normalization: kind.normalization(), sup_normalized: sup, argmax_x: argmax }
    }

    pub fn summary(&self, sums: &PrefixSums) -> SeriesSummary {
        let (name, value) = self.kind.cap(sums);
        SeriesSummary {
            kind: self.kind.name(),
            sup_normalized: self.sup_normalized,
            argmax_x: self.argmax_x,
            n_samples: self.samples.len(),
            caps: Caps { name, value },
        }
    }

    /// Rows `kind,x,raw,normalized`, header included when `header` is set.
    pub fn write_csv<W: Write>(&self, mut w: W, header: bool) -> Result<()> {
        if header {
            writeln!(w, "kind,x,raw,normalized")?;
        }
        for s in &self.samples {
            writeln!(w, "{},{},{},{}", self.kind.name(), g17(s.x), g17(s.raw), g17(s.normalized))?;
        }
        Ok(())
    }

    /// `sup |normalized|` over samples in `[10^k, 10^{k+1}]` for `k` in `k_lo..k_hi`.
    pub fn decade_sups(&self, k_lo: i32, k_hi: i32) -> Vec<DecadeSup> {
        (k_lo..k_hi)
            .map(|k| {
                let (lo, hi) = (10f64.powi(k), 10f64.powi(k + 1));
                let mut d = DecadeSup { k, sup: f64::NAN, argmax_x: f64::NAN, n_samples: 0 };
                for s in self.samples.iter().filter(|s| s.x >= lo && s.x <= hi) {
                    if d.n_samples == 0 || s.normalized.abs() > d.sup {
                        d.sup = s.normalized.abs();
                        d.argmax_x = s.x;
                    }
                    d.n_samples += 1;
                }
                d
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DecadeSup {
    pub k: i32,
    pub sup: f64,
    pub argmax_x: f64,
    pub n_samples: usize,
}

/// Largest ratio `sup_{k+1} / sup_k` between consecutive decades.
pub fn worst_decade_growth(sups: &[DecadeSup]) -> f64 {
    sups.windows(2).map(|w| w[1].sup / w[0].sup).fold(f64::NEG_INFINITY, f64::max)
}

/// `log x`, held at 1 below `e` for the kinds that admit `x < 2`.
fn floor_log(x: f64) -> f64 {
    x.ln().max(1.0)
}

/// Sample one remainder kind at `xs` (sorted and deduplicated first).
pub fn remainder_series(sums: &PrefixSums, kind: RemainderKind, xs: &[f64], tol: Tolerances) -> Result<RemainderSeries> {
    let mut xs: Vec<f64> = xs.to_vec();
    xs.sort_by(f64::total_cmp);
    xs.dedup();
    let (cap_name, cap) = kind.cap(sums);
    for &x in &xs {
        if !x.is_finite() || x < kind.x_lower() {
            return Err(Error::range(format!("{} needs x >= {}, got {x}", kind.name(), kind.x_lower())));
        }
        let over = if kind.h_axis() { y_of_x(x) >= (sums.n_max() + 1) as f64 } else { x.floor() > cap };
        if over {
            return Err(Error::Capability {
                what: format!("{} remainder", kind.name()),
                cap: cap_name,
                needed: x,
                available: cap,
                max_usable: cap,
            });
        }
    }

    let samples: Vec<Sample> = match kind {
        RemainderKind::SmoothedInequality => smoothed_inequality_series(sums, &xs)?,
        RemainderKind::HInequality => h_inequality_series(sums, ProfileKind::Smoothed, &xs)?,
        RemainderKind::MertensInequality => h_inequality_series(sums, ProfileKind::Mertens, &xs)?,
        _ => xs
            .par_iter()
            .map(|&x| pointwise_sample(sums, kind, x, tol))
            .collect::<Result<_>>()?,
    };
    Ok(RemainderSeries::from_samples(kind, samples))
}

fn pointwise_sample(sums: &PrefixSums, kind: RemainderKind, x: f64, tol: Tolerances) -> Result<Sample> {
    let (raw, norm) = match kind {
        RemainderKind::Selberg => (sums.sum_lambda2(x)? - 2.0 * x * x.ln(), x),
        RemainderKind::LambdaTheta => (sums.psi(x)? + sums.sum_theta(x)? - 2.0 * x, x / floor_log(x)),
        RemainderKind::FloorWeighted => (floor_weighted_mu_sum(sums, x, tol)?.lhs, x.ln()),
        RemainderKind::LogSquare => (log_square_sum(x)?.1, floor_log(x).powi(2)),
        RemainderKind::LambdaOverN => (sums.lambda_over_n_sum(x)?.1, 1.0),
        _ => unreachable!("integral kinds are sampled in one pass"),
    };
    Ok(Sample { x, raw, normalized: raw / norm })
}

fn smoothed_inequality_series(sums: &PrefixSums, xs: &[f64]) -> Result<Vec<Sample>> {
    let j = sums.kernel_integrals(ProfileKind::Smoothed, xs)?;
    xs.iter()
        .zip(&j)
        .map(|(&x, k)| {
            let l = x.ln();
            let raw = sums.big_f(x)?.abs() * l * l - 2.0 * x * k.abs;
            Ok(Sample { x, raw, normalized: raw / (x * l) })
        })
        .collect()
}

fn h_inequality_series(sums: &PrefixSums, kind: ProfileKind, xs: &[f64]) -> Result<Vec<Sample>> {
    let xg: Vec<f64> = xs.iter().map(|&x| x.max(X_MIN)).collect();
    let ys: Vec<f64> = xg.iter().map(|&x| y_of_x(x)).collect();
    let j = sums.kernel_integrals(kind, &ys)?;
    xs.iter()
        .zip(xg.iter().zip(&ys).zip(&j))
        .map(|(&x, ((&xg, &y), k))| {
            let raw = sums.h_value(kind, y)?.abs() - 2.0 * k.abs / xg;
            let normalized = match kind {
                ProfileKind::Smoothed => raw * xg.sqrt(),
                ProfileKind::Mertens => raw,
            };
            Ok(Sample { x, raw, normalized })
        })
        .collect()
}

/// `c(x) = (|𝓕(x)| log² x − 2∫₁ˣ |𝓕(x/t)| log(x/t) dt) / (x log x)`.
pub fn check_smoothed_inequality(sums: &PrefixSums, x: f64) -> Result<f64> {
    check_x(sums, x, 2.0, "smoothed_inequality")?;
    Ok(smoothed_inequality_series(sums, &[x])?[0].normalized)
}

/// `(|𝓗(x)| − (1/x)∫₀ˣ |𝓗|)·√x` for the smoothed kind, unnormalized for Mertens.
pub fn check_h_inequality(sums: &PrefixSums, kind: ProfileKind, x: f64) -> Result<f64> {
    if !(x > 0.0) {
        return Err(Error::range(format!("h inequality needs x > 0, got {x}")));
    }
    if y_of_x(x) >= (sums.n_max() + 1) as f64 {
        let max_x = x_of_y(sums.n_max() as f64);
        return Err(Error::Capability {
            what: "h inequality".into(),
            cap: "n_max",
            needed: x,
            available: max_x,
            max_usable: max_x,
        });
    }
    Ok(h_inequality_series(sums, kind, &[x])?[0].normalized)
}

/// `start · ratio^i` for `i < count`.
pub fn geometric_grid(start: f64, ratio: f64, count: usize) -> Vec<f64> {
    (0..count).map(|i| start * ratio.powi(i as i32)).collect()
}

/// `start · ratio^i` while at most `end`, with `end` appended if the last
/// point falls short of it.
pub fn geometric_grid_to(start: f64, ratio: f64, end: f64) -> Vec<f64> {
    let mut out = Vec::new();
    let mut i = 0;
    loop {
        let x = start * ratio.powi(i);
        if x > end * (1.0 + 1e-12) {
            break;
        }
        out.push(x.min(end));
        i += 1;
    }
    if out.last().is_some_and(|&l| l < end) {
        out.push(end);
    }
    out
}
