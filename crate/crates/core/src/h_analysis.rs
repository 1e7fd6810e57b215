//! Profiles of `𝓗(x) = 𝓕(e^{√x})/e^{√x}` and of `H(x) = M(e^{√x})/e^{√x}`:
//! zeros, the intervals between them, and empirical values of the constants
//! that bound them.
//!
//! Everything is written against [`ProfileSource`], so the same machinery runs
//! on the sieved tables ([`TableSource`]) and on synthetic profiles with known
//! answers ([`ParabolicArches`], [`SineProfile`]).

use std::io::Write;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::format::g17;
use crate::identities::X_MIN;
use crate::summatory::{x_of_y, y_of_x, KernelIntegral, PrefixSums, ProfileKind};

/// Default fraction of the x-range treated as the tail.
pub const DEFAULT_TAIL_FRACTION: f64 = 0.5;
/// Margin applied to `m̂/2` when choosing `h`.
pub const H_MARGIN: f64 = 0.1;
/// Lower bound on `h`.
pub const H_FLOOR: f64 = 1e-9;
/// Relative x-tolerance of bisection.
pub const ROOT_REL_TOL: f64 = 1e-12;

/// A real function on `[0, x_max]` with exact integrals.
pub trait ProfileSource: Sync {
    fn label(&self) -> &str;
    fn x_max(&self) -> f64;
    fn h(&self, x: f64) -> f64;

    /// `H'(x)`, or `None` for step functions.
    fn derivative(&self, x: f64) -> Option<f64>;

    /// `(∫₀ˣ H, ∫₀ˣ |H|)` at every `x` in `xs`.
    fn integrals(&self, xs: &[f64]) -> Result<Vec<KernelIntegral>>;

    /// True when zeros follow the step convention instead of sign changes.
    fn step_zeros(&self) -> bool {
        false
    }

    /// Zeros in `(0, x_max)`, increasing.
    fn zeros(&self) -> Result<Vec<f64>> {
        Ok(scan_zeros(|x| self.h(x), 0.0, self.x_max(), 1 << 16))
    }

    /// `sup |H|` on `[x0, x1]`.
    fn sup_abs(&self, x0: f64, x1: f64) -> Result<(f64, f64)> {
        Ok(dense_sup(|x| self.h(x).abs(), x0, x1, 4096))
    }

    /// `sup |H'|` on `[x0, x1]`, `None` for step functions.
    fn sup_abs_derivative(&self, x0: f64, x1: f64) -> Result<Option<f64>> {
        if self.derivative(x0.max(X_MIN)).is_none() {
            return Ok(None);
        }
        Ok(Some(dense_sup(|x| self.derivative(x).unwrap().abs(), x0.max(X_MIN), x1, 4096).0))
    }
}

fn dense_sup(f: impl Fn(f64) -> f64, x0: f64, x1: f64, n: usize) -> (f64, f64) {
    let mut best = (f64::NEG_INFINITY, x0);
    for i in 0..=n {
        let x = if i == n { x1 } else { x0 + (x1 - x0) * i as f64 / n as f64 };
        let v = f(x);
        if v > best.0 {
            best = (v, x);
        }
    }
    best
}

/// Sign changes of `f` on `(x0, x1)`, found on a uniform scan of `steps`
/// cells and refined by bisection.
pub fn scan_zeros(f: impl Fn(f64) -> f64, x0: f64, x1: f64, steps: usize) -> Vec<f64> {
    let mut out = Vec::new();
    let mut prev: Option<(f64, f64)> = None;
    for i in 0..=steps {
        let x = if i == steps { x1 } else { x0 + (x1 - x0) * i as f64 / steps as f64 };
        let v = f(x);
        if v == 0.0 {
            continue;
        }
        if let Some((xp, vp)) = prev {
            if vp.signum() != v.signum() {
                out.push(bisect(&f, xp, x, vp));
            }
        }
        prev = Some((x, v));
    }
    out
}

fn bisect(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, f_lo: f64) -> f64 {
    let s_lo = f_lo.signum();
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if hi - lo <= ROOT_REL_TOL * mid.abs().max(f64::MIN_POSITIVE) || mid == lo || mid == hi {
            return mid;
        }
        let v = f(mid);
        if v == 0.0 {
            return mid;
        }
        if v.signum() == s_lo {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// `𝓗` or Mertens `H` on `x ∈ [0, log² y_max]`, read from prefix sums.
#[derive(Debug, Clone, Copy)]
pub struct TableSource<'a> {
    sums: &'a PrefixSums,
    kind: ProfileKind,
    y_max: f64,
}

impl<'a> TableSource<'a> {
    pub fn new(sums: &'a PrefixSums, kind: ProfileKind, y_max: f64) -> Result<Self> {
        if !(y_max >= 1.0) {
            return Err(Error::range(format!("profile needs y_max >= 1, got {y_max}")));
        }
        if y_max > sums.n_max() as f64 {
            return Err(Error::Capability {
                what: "h profile".into(),
                cap: "n_max",
                needed: y_max,
                available: sums.n_max() as f64,
                max_usable: sums.n_max() as f64,
            });
        }
        Ok(Self { sums, kind, y_max })
    }

    pub fn kind(&self) -> ProfileKind {
        self.kind
    }

    pub fn y_max(&self) -> f64 {
        self.y_max
    }

    fn y(&self, x: f64) -> f64 {
        y_of_x(x.max(X_MIN)).min(self.y_max)
    }

    /// Walk the unit steps of `y` meeting `[y0, y1]`, passing
    /// `(u0, u1, m, a)` with `u0 < u1` the part of the step inside the range.
    fn walk(&self, y0: f64, y1: f64, mut visit: impl FnMut(f64, f64, f64, f64)) {
        let k0 = (y0.floor() as u64).max(1);
        let mut cur = self.sums.cursor(k0);
        loop {
            let k = cur.n() as f64;
            let u0 = k.max(y0);
            let u1 = (k + 1.0).min(y1);
            if u1 > u0 {
                let (m, a) = match self.kind {
                    ProfileKind::Smoothed => cur.kernel_coefficients(ProfileKind::Smoothed),
                    ProfileKind::Mertens => (cur.mertens() as f64, 0.0),
                };
                visit(u0, u1, m, a);
            }
            if k + 1.0 > y1 || !cur.advance() {
                break;
            }
        }
    }
}

fn smoothed_h_of_u(m: f64, a: f64, u: f64) -> f64 {
    (m * u.ln() - a) / u
}

fn smoothed_dh_of_u(m: f64, a: f64, u: f64) -> f64 {
    let l = u.ln();
    (m - (m * l - a)) / (2.0 * u * l)
}

impl ProfileSource for TableSource<'_> {
    fn label(&self) -> &str {
        self.kind.name()
    }

    fn x_max(&self) -> f64 {
        x_of_y(self.y_max)
    }

    fn h(&self, x: f64) -> f64 {
        self.sums.h_value(self.kind, self.y(x)).expect("y inside the table")
    }

    fn derivative(&self, x: f64) -> Option<f64> {
        match self.kind {
            ProfileKind::Smoothed => {
                let y = self.y(x);
                let m = self.sums.mertens(y).ok()? as f64;
                let f = self.sums.big_f(y).ok()?;
                Some((m - f) / (2.0 * y * y.ln()))
            }
            ProfileKind::Mertens => None,
        }
    }

    fn integrals(&self, xs: &[f64]) -> Result<Vec<KernelIntegral>> {
        let ys: Vec<f64> = xs.iter().map(|&x| if x <= 0.0 { 1.0 } else { self.y(x) }).collect();
        let k = self.sums.kernel_integrals(self.kind, &ys)?;
        Ok(k.into_iter().map(|k| KernelIntegral { signed: 2.0 * k.signed, abs: 2.0 * k.abs }).collect())
    }

    fn step_zeros(&self) -> bool {
        self.kind == ProfileKind::Mertens
    }

    fn zeros(&self) -> Result<Vec<f64>> {
        let mut out = Vec::new();
        match self.kind {
            ProfileKind::Smoothed => self.walk(1.0, self.y_max, |u0, u1, m, a| {
                // 𝓕(u) = m log u − a vanishes at log u = a/m
                if m != 0.0 {
                    let l = a / m;
                    if l > 0.0 && l >= u0.ln() && l < u1.ln() {
                        out.push(l * l);
                    }
                }
            }),
            ProfileKind::Mertens => {
                let mut prev = 1.0f64;
                self.walk(2.0, self.y_max, |u0, _, m, _| {
                    if u0.fract() == 0.0 && (m == 0.0 || m * prev < 0.0) {
                        out.push(x_of_y(u0));
                    }
                    prev = m;
                })
            }
        }
        Ok(out)
    }

    fn sup_abs(&self, x0: f64, x1: f64) -> Result<(f64, f64)> {
        let (y0, y1) = (self.y(x0), self.y(x1));
        let mut best = (0.0f64, x0);
        let mut consider = |u: f64, v: f64| {
            if v.abs() > best.0 {
                best = (v.abs(), x_of_y(u));
            }
        };
        match self.kind {
            ProfileKind::Smoothed => self.walk(y0, y1, |u0, u1, m, a| {
                consider(u0, smoothed_h_of_u(m, a, u0));
                consider(u1, smoothed_h_of_u(m, a, u1));
                if m != 0.0 {
                    let uc = (1.0 + a / m).exp();
                    if uc > u0 && uc < u1 {
                        consider(uc, smoothed_h_of_u(m, a, uc));
                    }
                }
            }),
            ProfileKind::Mertens => self.walk(y0, y1, |u0, _, m, _| consider(u0, m / u0)),
        }
        Ok(best)
    }

    fn sup_abs_derivative(&self, x0: f64, x1: f64) -> Result<Option<f64>> {
        if self.kind == ProfileKind::Mertens {
            return Ok(None);
        }
        let (y0, y1) = (self.y(x0), self.y(x1));
        let mut best = 0.0f64;
        self.walk(y0, y1, |u0, u1, m, a| {
            for u in [u0, 0.5 * (u0 + u1), u1] {
                best = best.max(smoothed_dh_of_u(m, a, u).abs());
            }
        });
        Ok(Some(best))
    }
}

/// `H'` at `x = log² y` from the closed form `(M(y) − 𝓕(y)) / (2 y log y)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Derivative {
    pub y: f64,
    pub x: f64,
    pub value: f64,
    /// Set when `y` is an integer and the value is the right limit.
    pub one_sided: bool,
}

pub fn h_derivative(sums: &PrefixSums, y: f64) -> Result<Derivative> {
    sums.floor_in_range(y, 1.0, "h_derivative")?;
    let x = x_of_y(y).max(X_MIN);
    let y_eff = y_of_x(x).max(y);
    let m = sums.mertens(y_eff)? as f64;
    let f = sums.big_f(y_eff)?;
    Ok(Derivative { y, x, value: (m - f) / (2.0 * y_eff * y_eff.ln()), one_sided: y.fract() == 0.0 })
}

/// Arches `s_i c_i (x − z_i)(z_{i+1} − x)` between given zeros, signs alternating.
#[derive(Debug, Clone, PartialEq)]
pub struct ParabolicArches {
    pub zeros: Vec<f64>,
    pub heights: Vec<f64>,
}

impl ParabolicArches {
    /// `zeros` starts at 0 and ends at `x_max`; `heights[i]` is `c_i > 0`.
    pub fn new(zeros: Vec<f64>, heights: Vec<f64>) -> Result<Self> {
        if zeros.len() < 2 || heights.len() + 1 != zeros.len() || zeros[0] != 0.0 {
            return Err(Error::range("arches need zeros 0 = z_0 < … < z_n and n heights"));
        }
        if zeros.windows(2).any(|w| w[0] >= w[1]) || heights.iter().any(|&c| !(c > 0.0)) {
            return Err(Error::range("arch zeros must increase and heights be positive"));
        }
        Ok(Self { zeros, heights })
    }

    fn arch(&self, x: f64) -> usize {
        self.zeros.partition_point(|&z| z <= x).clamp(1, self.heights.len()) - 1
    }

    fn sign(i: usize) -> f64 {
        if i.is_multiple_of(2) {
            1.0
        } else {
            -1.0
        }
    }

    /// `∫_{z_i}^{x} |arch_i|`.
    fn partial(&self, i: usize, x: f64) -> f64 {
        let (a, b, c) = (self.zeros[i], self.zeros[i + 1], self.heights[i]);
        let t = x - a;
        c * (t * t * (b - a) / 2.0 - t * t * t / 3.0)
    }

    /// `c_i (b−a)³ / 6`.
    pub fn arch_integral(&self, i: usize) -> f64 {
        self.heights[i] * (self.zeros[i + 1] - self.zeros[i]).powi(3) / 6.0
    }
}

impl ProfileSource for ParabolicArches {
    fn label(&self) -> &str {
        "parabolic-arches"
    }
    fn x_max(&self) -> f64 {
        *self.zeros.last().unwrap()
    }
    fn h(&self, x: f64) -> f64 {
        let i = self.arch(x);
        Self::sign(i) * self.heights[i] * (x - self.zeros[i]) * (self.zeros[i + 1] - x)
    }
    fn derivative(&self, x: f64) -> Option<f64> {
        let i = self.arch(x);
        Some(Self::sign(i) * self.heights[i] * (self.zeros[i] + self.zeros[i + 1] - 2.0 * x))
    }
    fn integrals(&self, xs: &[f64]) -> Result<Vec<KernelIntegral>> {
        Ok(xs
            .iter()
            .map(|&x| {
                let x = x.clamp(0.0, self.x_max());
                let i = self.arch(x);
                let mut k = KernelIntegral::default();
                for j in 0..i {
                    k.abs += self.arch_integral(j);
                    k.signed += Self::sign(j) * self.arch_integral(j);
                }
                let p = self.partial(i, x);
                k.abs += p;
                k.signed += Self::sign(i) * p;
                k
            })
            .collect())
    }
    fn sup_abs_derivative(&self, x0: f64, x1: f64) -> Result<Option<f64>> {
        let mut best = 0.0f64;
        for i in self.arch(x0)..=self.arch(x1) {
            let lo = x0.max(self.zeros[i]);
            let hi = x1.min(self.zeros[i + 1]);
            let mid = 0.5 * (self.zeros[i] + self.zeros[i + 1]);
            for x in [lo, hi] {
                best = best.max(self.heights[i] * 2.0 * (x - mid).abs());
            }
        }
        Ok(Some(best))
    }
}

/// `A sin(ωx)` on `[0, x_max]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SineProfile {
    pub amplitude: f64,
    pub omega: f64,
    pub x_max: f64,
}

impl SineProfile {
    /// Number of zeros in `(0, x_max)`.
    pub fn zero_count(&self) -> usize {
        let n = (self.omega * self.x_max / std::f64::consts::PI).floor() as usize;
        if (n as f64 * std::f64::consts::PI / self.omega) < self.x_max {
            n
        } else {
            n.saturating_sub(1)
        }
    }
}

impl ProfileSource for SineProfile {
    fn label(&self) -> &str {
        "sine"
    }
    fn x_max(&self) -> f64 {
        self.x_max
    }
    fn h(&self, x: f64) -> f64 {
        self.amplitude * (self.omega * x).sin()
    }
    fn derivative(&self, x: f64) -> Option<f64> {
        Some(self.amplitude * self.omega * (self.omega * x).cos())
    }
    fn integrals(&self, xs: &[f64]) -> Result<Vec<KernelIntegral>> {
        let half = std::f64::consts::PI / self.omega;
        let lobe = 2.0 * self.amplitude.abs() / self.omega;
        Ok(xs
            .iter()
            .map(|&x| {
                let full = (x / half).floor();
                let rest = x - full * half;
                KernelIntegral {
                    signed: self.amplitude * (1.0 - (self.omega * x).cos()) / self.omega,
                    abs: full * lobe + self.amplitude.abs() * (1.0 - (self.omega * rest).cos()) / self.omega,
                }
            })
            .collect())
    }
}

/// Geometric grid in `y` from 1 to `y_max`, mapped to `x = log² y`.
pub fn y_grid(y_max: f64, samples_per_decade: usize) -> Result<Vec<f64>> {
    if samples_per_decade < 10 {
        return Err(Error::range(format!("need at least 10 samples per decade, got {samples_per_decade}")));
    }
    if y_max <= 1.0 {
        return Ok(Vec::new());
    }
    let mut ys = vec![1.0];
    let mut i = 1;
    loop {
        let y = 10f64.powf(i as f64 / samples_per_decade as f64);
        if y >= y_max {
            break;
        }
        ys.push(y);
        i += 1;
    }
    ys.push(y_max);
    Ok(ys)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProfileSample {
    pub x: f64,
    pub h: f64,
    pub cum_abs: f64,
    pub cum_signed: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HProfile {
    pub label: String,
    pub x_max: f64,
    pub samples: Vec<ProfileSample>,
    pub zeros: Vec<f64>,
    pub step_zeros: bool,
}

/// Zero-count branch of the interval analysis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ZeroBranch {
    /// Fewer than two zeros in range; no intervals.
    FiniteZeros,
    Intervals,
}

impl HProfile {
    pub fn branch(&self) -> ZeroBranch {
        if self.zeros.len() < 2 {
            ZeroBranch::FiniteZeros
        } else {
            ZeroBranch::Intervals
        }
    }

    /// Rows `x,y,h,cum_abs,cum_signed`; `y` is `e^{√x}`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "x,y,h,cum_abs,cum_signed")?;
        for s in &self.samples {
            writeln!(w, "{},{},{},{},{}", g17(s.x), g17(y_of_x(s.x)), g17(s.h), g17(s.cum_abs), g17(s.cum_signed))?;
        }
        Ok(())
    }

    /// Rows `index,x,a_or_b`: `a` for the first zero, `b` for the last, `ab`
    /// between, `-` when there is only one.
    pub fn write_zeros_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "index,x,a_or_b")?;
        let n = self.zeros.len();
        for (i, z) in self.zeros.iter().enumerate() {
            let role = match (n, i) {
                (1, _) => "-",
                (_, 0) => "a",
                (_, i) if i + 1 == n => "b",
                _ => "ab",
            };
            writeln!(w, "{i},{},{role}", g17(*z))?;
        }
        Ok(())
    }
}

/// Sample `source` at `xs` (sorted and deduplicated) and locate its zeros.
pub fn build_profile(source: &dyn ProfileSource, xs: &[f64]) -> Result<HProfile> {
    let mut xs: Vec<f64> = xs.iter().map(|&x| x.clamp(0.0, source.x_max())).collect();
    xs.sort_by(f64::total_cmp);
    xs.dedup();
    let cum = source.integrals(&xs)?;
    let samples = xs
        .iter()
        .zip(&cum)
        .map(|(&x, k)| ProfileSample { x, h: source.h(x), cum_abs: k.abs, cum_signed: k.signed })
        .collect();
    Ok(HProfile {
        label: source.label().to_string(),
        x_max: source.x_max(),
        samples,
        zeros: if source.x_max() > 0.0 { source.zeros()? } else { Vec::new() },
        step_zeros: source.step_zeros(),
    })
}

/// Profile of `𝓗` or Mertens `H` up to `y_max`, geometric in `y`.
pub fn build_table_profile(sums: &PrefixSums, kind: ProfileKind, y_max: f64, samples_per_decade: usize) -> Result<HProfile> {
    let source = TableSource::new(sums, kind, y_max)?;
    let xs: Vec<f64> = y_grid(y_max, samples_per_decade)?.into_iter().map(x_of_y).collect();
    if xs.is_empty() {
        return Ok(HProfile {
            label: kind.name().to_string(),
            x_max: 0.0,
            samples: Vec::new(),
            zeros: Vec::new(),
            step_zeros: source.step_zeros(),
        });
    }
    build_profile(&source, &xs)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ZeroInterval {
    pub a: f64,
    pub b: f64,
    /// `∫ₐᵇ |H|`
    pub integral_abs: f64,
    /// A point with `|H(ξ)| = h_at_xi`, found by bisection.
    pub xi: f64,
    /// `integral_abs / (b − a)`
    pub h_at_xi: f64,
    /// `½ m̂ (b−a)²`, absent for step profiles.
    pub slope_bound: Option<f64>,
    /// `α̂ (b−a)(1 − κ h_at_xi)`, absent when `κ` is.
    pub contraction_rhs: Option<f64>,
    /// `max |H|` over `[a, b]`.
    pub sup_abs: f64,
}

fn raw_intervals(source: &dyn ProfileSource, zeros: &[f64]) -> Result<Vec<ZeroInterval>> {
    if zeros.len() < 2 {
        return Ok(Vec::new());
    }
    let cum = source.integrals(zeros)?;
    zeros
        .windows(2)
        .zip(cum.windows(2))
        .map(|(z, c)| {
            let (a, b) = (z[0], z[1]);
            let integral_abs = (c[1].abs - c[0].abs).max(0.0);
            let h_at_xi = integral_abs / (b - a);
            let (sup_abs, x_peak) = source.sup_abs(a, b)?;
            let xi = if h_at_xi == 0.0 {
                0.5 * (a + b)
            } else {
                bisect(|x| source.h(x).abs() - h_at_xi, a, x_peak.clamp(a, b), -h_at_xi)
            };
            Ok(ZeroInterval { a, b, integral_abs, xi, h_at_xi, slope_bound: None, contraction_rhs: None, sup_abs })
        })
        .collect()
}

#[allow(non_snake_case)]
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConstantEstimates {
    /// `sup |H|` over the tail window.
    pub alpha_hat: f64,
    /// `|H| ≤ 1` always holds for the smoothed profile.
    pub alpha_bound: f64,
    /// ESTIMATE: `sup |H|` over the last `tail_fraction` of the tail window.
    pub ell_hat: f64,
    /// ESTIMATE: `(1/x_max) ∫₀^{x_max} |H|`.
    pub L_hat: f64,
    /// `sup |H'|` from the first zero (or the tail start) on; absent for step profiles.
    pub m_hat: Option<f64>,
    /// `max − min` of `∫₀ˣ H`.
    pub M_hat: f64,
    /// `min h_at_xi` over intervals.
    pub iota_hat: Option<f64>,
    pub kappa: Option<f64>,
    pub epsilon: f64,
    pub h_param: f64,
    pub provenance: Provenance,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Provenance {
    pub label: String,
    pub x_max: f64,
    pub tail_fraction: f64,
    pub tail_window: [f64; 2],
    pub ell_window: [f64; 2],
    pub derivative_window: Option<[f64; 2]>,
    pub n_samples: usize,
    pub n_zeros: usize,
    pub h_margin: f64,
}

fn estimate(source: &dyn ProfileSource, profile: &HProfile, intervals: &[ZeroInterval], tail_fraction: f64) -> Result<ConstantEstimates> {
    if !(tail_fraction > 0.0 && tail_fraction < 1.0) {
        return Err(Error::range(format!("tail fraction must lie in (0, 1), got {tail_fraction}")));
    }
    let x_max = profile.x_max;
    if !(x_max > 0.0) {
        return Err(Error::range("tail window is empty"));
    }
    let tail = [(1.0 - tail_fraction) * x_max, x_max];
    let ell_window = [x_max - tail_fraction * tail_fraction * x_max, x_max];
    let alpha_hat = source.sup_abs(tail[0], tail[1])?.0;
    let ell_hat = source.sup_abs(ell_window[0], ell_window[1])?.0;

    let mut probe = vec![0.0, x_max];
    probe.extend(profile.zeros.iter().copied());
    probe.extend(profile.samples.iter().map(|s| s.x));
    probe.sort_by(f64::total_cmp);
    probe.dedup();
    let cum = source.integrals(&probe)?;
    let l_hat = cum.last().unwrap().abs / x_max;
    let (lo, hi) = cum.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), k| (lo.min(k.signed), hi.max(k.signed)));
    let big_m = hi - lo;

    let d_start = profile.zeros.first().copied().unwrap_or(tail[0]).min(tail[0]).max(X_MIN);
    let m_hat = source.sup_abs_derivative(d_start, x_max)?;
    let derivative_window = m_hat.map(|_| [d_start, x_max]);

    let iota_hat = intervals.iter().map(|i| i.h_at_xi).reduce(f64::min);
    let min_width = intervals.iter().map(|i| i.b - i.a).reduce(f64::min);
    let h1 = min_width.map_or(0.0, |w| alpha_hat / w);
    let h2 = m_hat.map_or(0.0, |m| m / 2.0 * (1.0 + H_MARGIN));
    let h_param = h1.max(h2).max(H_FLOOR);
    let kappa = match m_hat {
        Some(m) if big_m > 0.0 => Some((2.0 * h_param - m) * alpha_hat / (2.0 * big_m * h_param * h_param)),
        _ => None,
    };

    Ok(ConstantEstimates {
        alpha_hat,
        alpha_bound: 1.0,
        ell_hat,
        L_hat: l_hat,
        m_hat,
        M_hat: big_m,
        iota_hat,
        kappa,
        epsilon: alpha_hat / h_param,
        h_param,
        provenance: Provenance {
            label: profile.label.clone(),
            x_max,
            tail_fraction,
            tail_window: tail,
            ell_window,
            derivative_window,
            n_samples: profile.samples.len(),
            n_zeros: profile.zeros.len(),
            h_margin: H_MARGIN,
        },
    })
}

/// Intervals between successive zeros and the constants they feed.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IntervalAnalysis {
    pub branch: ZeroBranch,
    pub intervals: Vec<ZeroInterval>,
    pub constants: ConstantEstimates,
}

impl IntervalAnalysis {
    /// Rows `a,b,integral_abs,xi,h_at_xi,slope_bound,contraction_rhs`; empty fields are not applicable.
    pub fn write_intervals_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "a,b,integral_abs,xi,h_at_xi,slope_bound,contraction_rhs")?;
        let opt = |v: Option<f64>| v.map(g17).unwrap_or_default();
        for i in &self.intervals {
            writeln!(
                w,
                "{},{},{},{},{},{},{}",
                g17(i.a),
                g17(i.b),
                g17(i.integral_abs),
                g17(i.xi),
                g17(i.h_at_xi),
                opt(i.slope_bound),
                opt(i.contraction_rhs)
            )?;
        }
        Ok(())
    }

    /// Intervals whose integral exceeds the slope bound.
    pub fn slope_bound_violations(&self) -> Vec<&ZeroInterval> {
        self.intervals
            .iter()
            .filter(|i| i.slope_bound.is_some_and(|b| i.integral_abs > b))
            .collect()
    }
}

/// Estimate the constants over the profile and attach the bounds to each interval.
pub fn analyze_intervals(source: &dyn ProfileSource, profile: &HProfile, tail_fraction: f64) -> Result<IntervalAnalysis> {
    let mut intervals = raw_intervals(source, &profile.zeros)?;
    let constants = estimate(source, profile, &intervals, tail_fraction)?;
    for i in &mut intervals {
        let w = i.b - i.a;
        i.slope_bound = constants.m_hat.map(|m| 0.5 * m * w * w);
        i.contraction_rhs = constants.kappa.map(|k| constants.alpha_hat * w * (1.0 - k * i.h_at_xi));
    }
    Ok(IntervalAnalysis { branch: profile.branch(), intervals, constants })
}

/// `sup_{10^k ≤ y ≤ n_max} |M(y)|/y`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TailSup {
    pub k: u32,
    pub sup: Option<f64>,
    pub argmax_y: Option<u64>,
}

pub fn mertens_tail_sups(sums: &PrefixSums, ks: std::ops::RangeInclusive<u32>) -> Vec<TailSup> {
    let ks: Vec<u32> = ks.collect();
    let starts: Vec<u64> = ks.iter().map(|&k| 10u64.pow(k)).collect();
    let mut best: Vec<(f64, u64)> = vec![(-1.0, 0); ks.len()];
    let first = starts.iter().copied().min().unwrap_or(1).max(1);
    if first <= sums.n_max() {
        let mut cur = sums.cursor(first);
        loop {
            let y = cur.n();
            let v = (cur.mertens() as f64 / y as f64).abs();
            for (b, &s) in best.iter_mut().zip(&starts) {
                if y >= s && v > b.0 {
                    *b = (v, y);
                }
            }
            if !cur.advance() {
                break;
            }
        }
    }
    ks.iter()
        .zip(best)
        .map(|(&k, (v, y))| TailSup { k, sup: (v >= 0.0).then_some(v), argmax_y: (v >= 0.0).then_some(y) })
        .collect()
}

/// True when the available tail sups never increase with `k`.
pub fn tail_sups_non_increasing(sups: &[TailSup]) -> bool {
    let v: Vec<f64> = sups.iter().filter_map(|t| t.sup).collect();
    v.windows(2).all(|w| w[1] <= w[0])
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LambdaStep {
    pub k: usize,
    pub lambda_k: f64,
    /// `α̂ / λ_k`
    pub bound: f64,
    /// `α̂ / (1+λ)^k`
    pub shrinking_alpha: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LambdaIteration {
    pub lambda: f64,
    pub alpha: f64,
    /// `1 / (1 − λ)`
    pub limit: f64,
    pub steps: Vec<LambdaStep>,
}

/// `λ_0 = 1`, `λ_k = 1 + λ λ_{k−1}` for `k ≤ n_steps`, with two readings of
/// the resulting bound on `α̂`.
pub fn lambda_iteration(lambda: f64, n_steps: usize, alpha: f64) -> Result<LambdaIteration> {
    if !(lambda > 0.0 && lambda < 1.0) {
        return Err(Error::Domain(format!("lambda must lie in (0, 1), got {lambda}")));
    }
    if n_steps == 0 {
        return Err(Error::Domain("lambda iteration needs at least one step".into()));
    }
    let mut lambda_k = 1.0;
    let mut steps = Vec::with_capacity(n_steps + 1);
    for k in 0..=n_steps {
        if k > 0 {
            lambda_k = 1.0 + lambda * lambda_k;
        }
        steps.push(LambdaStep { k, lambda_k, bound: alpha / lambda_k, shrinking_alpha: alpha / (1.0 + lambda).powi(k as i32) });
    }
    Ok(LambdaIteration { lambda, alpha, limit: 1.0 / (1.0 - lambda), steps })
}

impl LambdaIteration {
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "k,lambda_k,bound,shrinking_alpha")?;
        for s in &self.steps {
            writeln!(w, "{},{},{},{}", s.k, g17(s.lambda_k), g17(s.bound), g17(s.shrinking_alpha))?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sums(n: u64) -> PrefixSums {
        PrefixSums::new(n).unwrap()
    }

    #[test]
    fn profile_at_two_and_one() {
        let s = sums(100);
        let p = build_table_profile(&s, ProfileKind::Smoothed, 2.0, 10).unwrap();
        let last = p.samples.last().unwrap();
        assert!((last.x - 2f64.ln().powi(2)).abs() < 1e-15);
        assert!((last.h - 2f64.ln() / 2.0).abs() < 1e-15);
        let p = build_table_profile(&s, ProfileKind::Smoothed, 1.0, 10).unwrap();
        assert!(p.samples.is_empty() && p.zeros.is_empty());
        assert_eq!(p.branch(), ZeroBranch::FiniteZeros);
    }

    #[test]
    fn mertens_profile_and_step_zeros() {
        let s = sums(100);
        let src = TableSource::new(&s, ProfileKind::Mertens, 10.0).unwrap();
        assert!((src.h(x_of_y(10.0)) - -0.1).abs() < 1e-12);
        let z = src.zeros().unwrap();
        assert!((z[0] - 2f64.ln().powi(2)).abs() < 1e-15);
    }

    #[test]
    fn smoothed_zeros_are_roots() {
        let s = sums(20_000);
        let src = TableSource::new(&s, ProfileKind::Smoothed, 20_000.0).unwrap();
        let z = src.zeros().unwrap();
        assert!(!z.is_empty());
        for &x in &z {
            let y = y_of_x(x);
            assert!(s.big_f(y).unwrap().abs() < 1e-9 * y.ln(), "F({y}) = {}", s.big_f(y).unwrap());
        }
        let p = build_table_profile(&s, ProfileKind::Smoothed, 20_000.0, 20).unwrap();
        for pair in p.zeros.windows(2) {
            let signs: Vec<f64> = p
                .samples
                .iter()
                .filter(|q| q.x > pair[0] && q.x < pair[1] && q.h != 0.0)
                .map(|q| q.h.signum())
                .collect();
            assert!(signs.windows(2).all(|w| w[0] == w[1]));
        }
    }

    #[test]
    fn derivative_hand_value() {
        let s = sums(100);
        let d = h_derivative(&s, 2.5).unwrap();
        assert!((d.value - -0.151_294_159_473_206).abs() < 1e-14, "{}", d.value);
        assert!(!d.one_sided);
        assert!(h_derivative(&s, 3.0).unwrap().one_sided);
    }

    #[test]
    fn arches_recover_zeros_and_integrals() {
        let zeros = vec![0.0, 1.0, 2.5, 3.0, 4.75, 6.0];
        let k = 0.8;
        let heights: Vec<f64> = zeros.windows(2).map(|w| k / (w[1] - w[0])).collect();
        let arches = ParabolicArches::new(zeros.clone(), heights).unwrap();
        let xs: Vec<f64> = (0..=600).map(|i| i as f64 / 100.0).collect();
        let p = build_profile(&arches, &xs).unwrap();
        assert_eq!(p.zeros.len(), 4);
        for (got, want) in p.zeros.iter().zip(&zeros[1..5]) {
            assert!((got - want).abs() <= 1e-10 * want);
        }
        let a = analyze_intervals(&arches, &p, 0.5).unwrap();
        assert_eq!(a.intervals.len(), 3);
        assert!((a.constants.m_hat.unwrap() - k).abs() < 1e-12);
        for (n, iv) in a.intervals.iter().enumerate() {
            let want = arches.arch_integral(n + 1);
            assert!((iv.integral_abs - want).abs() <= 1e-9 * want);
            assert!((iv.integral_abs / iv.slope_bound.unwrap() - 1.0 / 3.0).abs() < 1e-9);
            assert!((arches.h(iv.xi).abs() - iv.h_at_xi).abs() < 1e-9);
            assert!(iv.h_at_xi <= iv.sup_abs);
        }
    }

    #[test]
    fn sine_zero_count() {
        let s = SineProfile { amplitude: 0.3, omega: 2.7, x_max: 40.0 };
        let p = build_profile(&s, &[0.0, 20.0, 40.0]).unwrap();
        assert_eq!(p.zeros.len(), s.zero_count());
        let a = analyze_intervals(&s, &p, 0.5).unwrap();
        let lobe = 2.0 * 0.3 / 2.7;
        for iv in &a.intervals {
            assert!((iv.integral_abs - lobe).abs() < 1e-9 * lobe);
        }
        assert!((a.constants.M_hat - lobe).abs() < 1e-9);
    }

    #[test]
    fn zero_profile_constants() {
        let s = SineProfile { amplitude: 0.0, omega: 1.0, x_max: 10.0 };
        let p = build_profile(&s, &[0.0, 10.0]).unwrap();
        assert!(p.zeros.is_empty());
        let a = analyze_intervals(&s, &p, 0.5).unwrap();
        let c = &a.constants;
        assert_eq!((c.alpha_hat, c.L_hat, c.M_hat, c.epsilon), (0.0, 0.0, 0.0, 0.0));
        assert_eq!(c.h_param, H_FLOOR);
        assert_eq!(c.kappa, None);
        assert_eq!(a.branch, ZeroBranch::FiniteZeros);
    }

    #[test]
    fn lambda_iteration_hand_values() {
        let it = lambda_iteration(0.5, 3, 1.0).unwrap();
        let ls: Vec<f64> = it.steps.iter().map(|s| s.lambda_k).collect();
        assert_eq!(ls, vec![1.0, 1.5, 1.75, 1.875]);
        assert_eq!(it.limit, 2.0);
        assert!(matches!(lambda_iteration(1.0, 3, 1.0), Err(Error::Domain(_))));
        assert!(matches!(lambda_iteration(0.5, 0, 1.0), Err(Error::Domain(_))));
    }

    #[test]
    fn tail_sups_small() {
        let s = sums(1000);
        let t = mertens_tail_sups(&s, 2..=4);
        assert!(t[0].sup.is_some() && t[2].sup.is_none());
        let want = (100..=1000u64).map(|y| (s.mertens(y as f64).unwrap() as f64 / y as f64).abs()).fold(0.0, f64::max);
        assert_eq!(t[0].sup.unwrap(), want);
    }

    #[test]
    fn zeros_csv_roles() {
        let p = HProfile { label: "t".into(), x_max: 1.0, samples: vec![], zeros: vec![0.1, 0.2, 0.3], step_zeros: false };
        let mut buf = Vec::new();
        p.write_zeros_csv(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "index,x,a_or_b\n0,0.10000000000000001,a\n1,0.20000000000000001,ab\n2,0.29999999999999999,b\n");
    }
}
