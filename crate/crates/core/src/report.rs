//! Run configuration, the default verification suite and its report.

use std::path::PathBuf;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::dirichlet::{ArithTable, Lambda2Method, Tolerances};
use crate::error::{Error, Result};
use crate::h_analysis::{
    analyze_intervals, build_profile, build_table_profile, h_derivative, lambda_iteration, mertens_tail_sups,
    tail_sups_non_increasing, LambdaIteration, ParabolicArches, ProfileSource, TableSource, TailSup, ZeroBranch,
};
use crate::identities::{
    check_f_sum_identity, check_tatuzawa_iseki, floor_weighted_mu_sum, geometric_grid, geometric_grid_to,
    remainder_series, worst_decade_growth, DecadeSup, Log, One, RemainderKind, RemainderSeries, SeriesSummary,
    Smoothed, TestFunction,
};
use crate::cache::SegmentCache;
use crate::sieve::{mobius_linear, SegmentedSieve, DEFAULT_SEGMENT_SIZE};
use crate::summatory::{x_of_y, PrefixSums, ProfileKind, DEFAULT_CHECKPOINT_STRIDE};

pub const DEFAULT_N_MAX: u64 = 10_000_000;
pub const DEFAULT_CONV_CAP: u64 = 1_000_000;
pub const DEFAULT_GRID_START: f64 = 100.0;
pub const DEFAULT_GRID_RATIO: f64 = 1.25;
pub const DEFAULT_SAMPLES_PER_DECADE: usize = 20;
pub const DEFAULT_SEED: u64 = 0x6d6c_6162;

/// Sample points: the default geometric grid, an explicit geometric grid, or a list.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "type", rename_all = "kebab-case")]
pub enum GridSpec {
    /// `100 · 1.25^i` up to the relevant cap.
    Default,
    Geometric { start: f64, ratio: f64, count: usize },
    Points { points: Vec<f64> },
}

impl GridSpec {
    /// Points for a quantity whose cap is `end`; the default grid stops at `end`.
    pub fn resolve(&self, end: f64) -> Vec<f64> {
        match self {
            GridSpec::Default => geometric_grid_to(DEFAULT_GRID_START, DEFAULT_GRID_RATIO, end),
            GridSpec::Geometric { start, ratio, count } => geometric_grid(*start, *ratio, *count),
            GridSpec::Points { points } => points.clone(),
        }
    }

    pub fn is_default(&self) -> bool {
        matches!(self, GridSpec::Default)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub n_max: u64,
    pub conv_cap: u64,
    pub segment_size: usize,
    pub checkpoint_stride: usize,
    pub grid: GridSpec,
    pub samples_per_decade: usize,
    pub tail_fraction: f64,
    pub tolerances: Tolerances,
    pub seed: u64,
    #[serde(skip)]
    pub cache_dir: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            n_max: DEFAULT_N_MAX,
            conv_cap: DEFAULT_CONV_CAP,
            segment_size: DEFAULT_SEGMENT_SIZE,
            checkpoint_stride: DEFAULT_CHECKPOINT_STRIDE,
            grid: GridSpec::Default,
            samples_per_decade: DEFAULT_SAMPLES_PER_DECADE,
            tail_fraction: crate::h_analysis::DEFAULT_TAIL_FRACTION,
            tolerances: Tolerances::default(),
            seed: DEFAULT_SEED,
            cache_dir: None,
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_max < 2 {
            return Err(Error::Config(format!("n_max must be at least 2, got {}", self.n_max)));
        }
        if self.conv_cap > self.n_max {
            return Err(Error::Config(format!("conv_cap {} exceeds n_max {}", self.conv_cap, self.n_max)));
        }
        if !(self.tail_fraction > 0.0 && self.tail_fraction < 1.0) {
            return Err(Error::Config(format!("tail fraction must lie in (0, 1), got {}", self.tail_fraction)));
        }
        if self.segment_size == 0 || self.checkpoint_stride == 0 {
            return Err(Error::Config("segment size and checkpoint stride must be positive".into()));
        }
        if self.samples_per_decade < 10 {
            return Err(Error::Config("samples per decade must be at least 10".into()));
        }
        match &self.grid {
            GridSpec::Geometric { start, ratio, count } => {
                if *count == 0 {
                    return Err(Error::Config("grid is empty".into()));
                }
                if !(*start > 0.0 && *ratio > 1.0) {
                    return Err(Error::Config(format!("grid needs start > 0 and ratio > 1, got {start}:{ratio}")));
                }
            }
            GridSpec::Points { points } => {
                if points.is_empty() {
                    return Err(Error::Config("grid is empty".into()));
                }
                if points.iter().any(|p| !p.is_finite()) {
                    return Err(Error::Config("grid points must be finite".into()));
                }
            }
            GridSpec::Default => {}
        }
        Ok(())
    }

    pub fn sieve(&self, n_max: u64) -> Result<SegmentedSieve> {
        let sieve = SegmentedSieve::new(n_max, self.segment_size)?;
        Ok(match &self.cache_dir {
            Some(dir) => sieve.with_cache(SegmentCache::new(dir)?),
            None => sieve,
        })
    }

    /// Prefix sums to `n_max` and a Selberg-form table to `conv_cap`.
    pub fn workbench(&self, method: Lambda2Method) -> Result<Workbench> {
        let table = ArithTable::from_sieve(&self.sieve(self.conv_cap.max(1))?, method, self.tolerances)?;
        let sums = PrefixSums::build(&self.sieve(self.n_max)?, self.checkpoint_stride, Some(&table))?;
        Ok(Workbench { sums, table })
    }
}

pub struct Workbench {
    pub sums: PrefixSums,
    pub table: ArithTable,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    Pass,
    Fail,
    NotApplicable,
}

/// One executed check. Unasserted checks are measurements and never fail the run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckResult {
    pub name: String,
    pub status: Status,
    pub asserted: bool,
    pub measured: Option<f64>,
    pub threshold: Option<f64>,
    pub worst_x: Option<f64>,
    pub detail: String,
}

impl CheckResult {
    fn bound(name: impl Into<String>, measured: f64, threshold: f64, worst_x: Option<f64>, detail: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            status: if measured <= threshold { Status::Pass } else { Status::Fail },
            asserted: true,
            measured: Some(measured),
            threshold: Some(threshold),
            worst_x,
            detail: detail.into(),
        }
    }

    fn measurement(name: impl Into<String>, ok: bool, measured: Option<f64>, detail: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            status: if ok { Status::Pass } else { Status::Fail },
            asserted: false,
            measured,
            threshold: None,
            worst_x: None,
            detail: detail.into(),
        }
    }

    pub fn failed(&self) -> bool {
        self.asserted && self.status == Status::Fail
    }
}

/// Largest `|residual| / threshold` over identity checks at `xs`, as a single result.
fn worst_ratio(name: &str, checks: &[crate::identities::IdentityCheck], detail: &str) -> CheckResult {
    let mut worst = (0.0f64, None);
    for c in checks {
        let r = c.residual.abs() / c.threshold;
        if worst.1.is_none() || r > worst.0 {
            worst = (r, Some(c.x));
        }
    }
    CheckResult::bound(name, worst.0, 1.0, worst.1, format!("{detail}; measured is max |residual|/threshold over {} points", checks.len()))
}

fn user_or(cfg: &RunConfig, default: impl FnOnce() -> Vec<f64>, end: f64) -> Vec<f64> {
    if cfg.grid.is_default() {
        default()
    } else {
        cfg.grid.resolve(end)
    }
}

/// 200 geometric points on `[2, min(10⁵, n_max)]` unless the config sets a grid.
pub fn tatuzawa_iseki_points(cfg: &RunConfig) -> Vec<f64> {
    let end = (1e5f64).min(cfg.n_max as f64);
    user_or(cfg, || geometric_grid(2.0, (end / 2.0).powf(1.0 / 199.0), 200), end)
}

pub fn tatuzawa_iseki_checks(wb: &Workbench, cfg: &RunConfig, fs: &[&dyn TestFunction]) -> Result<Vec<CheckResult>> {
    use rayon::prelude::*;
    let xs = tatuzawa_iseki_points(cfg);
    fs.iter()
        .map(|f| {
            let checks: Vec<_> = xs
                .par_iter()
                .map(|&x| check_tatuzawa_iseki(&wb.sums, *f, x, cfg.tolerances))
                .collect::<Result<_>>()?;
            Ok(worst_ratio(&format!("tatuzawa_iseki.{}", f.name()), &checks, "threshold tol.rel * x * log(x)^2"))
        })
        .collect()
}

pub fn lambda2_form_checks(wb: &Workbench) -> Vec<CheckResult> {
    let mut out = Vec::new();
    match wb.table.form_check() {
        Some(fc) => out.push(CheckResult::bound(
            "lambda2.forms",
            fc.max_abs,
            fc.threshold,
            Some(fc.worst_n as f64),
            format!("max |mobius form - selberg form| over n <= {}", wb.table.n_max()),
        )),
        None => out.push(CheckResult {
            name: "lambda2.forms".into(),
            status: Status::NotApplicable,
            asserted: false,
            measured: None,
            threshold: None,
            worst_x: None,
            detail: "table built with a single form".into(),
        }),
    }
    if wb.table.n_max() >= 12 {
        let l2 = 2f64.ln();
        let err4 = (wb.table.lambda2()[4] - 3.0 * l2 * l2).abs();
        let err12 = (wb.table.lambda2()[12] - 2.0 * l2 * 3f64.ln()).abs();
        out.push(CheckResult::bound("lambda2.hand_values", err4.max(err12), 1e-12, None, "Lambda2(4) = 3 log^2 2, Lambda2(12) = 2 log 2 log 3"));
    }
    out
}

/// `|𝓕_sum(x) − 𝓕_int(x)| / (1 + |𝓕(x)| + log x)` at `n` seeded random points.
pub fn dual_route_check(sums: &PrefixSums, n: usize, seed: u64, rel: f64) -> Result<CheckResult> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let hi = sums.n_max() as f64;
    let mut worst = (0.0f64, 1.0);
    for _ in 0..n {
        let x: f64 = rng.gen_range(1.0..hi);
        let a = sums.big_f(x)?;
        let b = sums.big_f_integral(x)?;
        let r = (a - b).abs() / (1.0 + a.abs() + x.ln());
        if r > worst.0 {
            worst = (r, x);
        }
    }
    Ok(CheckResult::bound("f.dual_route", worst.0, rel, Some(worst.1), format!("{n} random x in [1, {}]", sums.n_max())))
}

pub fn f_sum_checks(sums: &PrefixSums, cfg: &RunConfig) -> Result<Vec<CheckResult>> {
    use rayon::prelude::*;
    let end = (1e6f64).min(cfg.n_max as f64);
    let xs: Vec<f64> = cfg.grid.resolve(end).into_iter().filter(|&x| x >= 2.0).collect();
    let tol = cfg.tolerances;
    let fs: Vec<_> = xs.par_iter().map(|&x| check_f_sum_identity(sums, x, tol)).collect::<Result<_>>()?;
    let fw: Vec<_> = xs.par_iter().map(|&x| floor_weighted_mu_sum(sums, x, tol)).collect::<Result<_>>()?;
    Ok(vec![
        worst_ratio("f_sum.collapse", &fs, "sum F(x/n) = log x; threshold tol.rel * x"),
        worst_ratio("f_sum.floor_weighted", &fw, "sum mu(n) floor(x/n) log(x/n) = log x + psi(x); threshold tol.rel * x * log x"),
    ])
}

/// Known `M(10^k)`.
pub const MERTENS_POWERS_OF_TEN: [i64; 7] = [-1, 1, 2, -23, -48, 212, 1037];

pub fn mertens_checks(sums: &PrefixSums) -> Vec<CheckResult> {
    let mut bad = 0;
    let mut checked = 0;
    for (k, &want) in MERTENS_POWERS_OF_TEN.iter().enumerate() {
        let x = 10f64.powi(k as i32 + 1);
        if x <= sums.n_max() as f64 {
            checked += 1;
            if sums.mertens(x).unwrap() != want {
                bad += 1;
            }
        }
    }
    let linear = mobius_linear(sums.n_max() as usize);
    let mismatches = linear.iter().zip(sums.mu_column()).skip(1).filter(|(a, b)| a != b).count();
    vec![
        CheckResult::bound("mertens.powers_of_ten", bad as f64, 0.0, None, format!("{checked} known values of M(10^k)")),
        CheckResult::bound("mertens.linear_sieve", mismatches as f64, 0.0, None, format!("mu from segmented and linear sieves, n <= {}", sums.n_max())),
    ]
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SeriesReport {
    pub summary: SeriesSummary,
    pub decade_sups: Vec<DecadeSup>,
    pub worst_decade_growth: Option<f64>,
}

/// Decades `[10^k, 10^{k+1}]` from `k = 4` that fit below `cap`.
pub fn growth_decades(cap: f64) -> std::ops::Range<i32> {
    4..(cap.log10() + 1e-9).floor() as i32
}

/// Grid for a remainder kind: y-values mapped to `x = log² y` on the `𝓗` axis.
pub fn remainder_points(cfg: &RunConfig, sums: &PrefixSums, kind: RemainderKind) -> Vec<f64> {
    let (_, cap) = kind.cap(sums);
    if kind.h_axis() {
        cfg.grid.resolve(sums.n_max() as f64).into_iter().map(x_of_y).collect()
    } else {
        cfg.grid.resolve(cap).into_iter().filter(|&x| x >= kind.x_lower()).collect()
    }
}

pub fn remainder_reports(wb: &Workbench, cfg: &RunConfig, kinds: &[RemainderKind]) -> Result<(Vec<RemainderSeries>, Vec<SeriesReport>)> {
    let mut series = Vec::new();
    let mut reports = Vec::new();
    for &kind in kinds {
        let xs = remainder_points(cfg, &wb.sums, kind);
        let s = remainder_series(&wb.sums, kind, &xs, cfg.tolerances)?;
        let (_, cap) = kind.cap(&wb.sums);
        let decades: Vec<DecadeSup> = if kind.h_axis() { Vec::new() } else { s.decade_sups(growth_decades(cap).start, growth_decades(cap).end) };
        let growth = (decades.len() >= 2).then(|| worst_decade_growth(&decades));
        reports.push(SeriesReport { summary: s.summary(&wb.sums), decade_sups: decades, worst_decade_growth: growth });
        series.push(s);
    }
    Ok((series, reports))
}

/// Allowed growth of the per-decade sup between consecutive decades.
pub const DECADE_GROWTH_LIMIT: f64 = 1.1;

pub fn growth_checks(reports: &[SeriesReport]) -> Vec<CheckResult> {
    reports
        .iter()
        .filter(|r| matches!(r.summary.kind, "selberg" | "lambda_theta" | "log_square"))
        .map(|r| match r.worst_decade_growth {
            Some(g) => CheckResult::bound(
                format!("remainder.{}.decade_growth", r.summary.kind),
                g,
                DECADE_GROWTH_LIMIT,
                None,
                "largest ratio of consecutive per-decade sups of |normalized| from 10^4 on",
            ),
            None => CheckResult {
                name: format!("remainder.{}.decade_growth", r.summary.kind),
                status: Status::NotApplicable,
                asserted: false,
                measured: None,
                threshold: Some(DECADE_GROWTH_LIMIT),
                worst_x: None,
                detail: "fewer than two complete decades from 10^4 below the cap".into(),
            },
        })
        .collect()
}

pub fn finiteness_checks(reports: &[SeriesReport]) -> Vec<CheckResult> {
    reports
        .iter()
        .filter(|r| matches!(r.summary.kind, "smoothed_inequality" | "h_inequality" | "mertens_inequality"))
        .map(|r| {
            let v = r.summary.sup_normalized;
            CheckResult {
                name: format!("remainder.{}.finite", r.summary.kind),
                status: if v.is_finite() { Status::Pass } else { Status::Fail },
                asserted: true,
                measured: Some(v),
                threshold: None,
                worst_x: Some(r.summary.argmax_x),
                detail: "sup |normalized| over the grid; recorded, only finiteness asserted".into(),
            }
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProfileReport {
    pub kind: ProfileKind,
    pub y_max: f64,
    pub n_samples: usize,
    pub n_zeros: usize,
    pub first_zero: Option<f64>,
    pub last_zero: Option<f64>,
    pub branch: ZeroBranch,
    pub n_intervals: usize,
    pub sup_abs_h: f64,
    pub sup_abs_h_at: f64,
    pub sup_abs_h_samples: f64,
    pub slope_bound_violations: usize,
    pub max_slope_ratio: Option<f64>,
    pub constants: crate::h_analysis::ConstantEstimates,
}

pub fn profile_report(sums: &PrefixSums, kind: ProfileKind, cfg: &RunConfig) -> Result<ProfileReport> {
    let y_max = sums.n_max() as f64;
    let source = TableSource::new(sums, kind, y_max)?;
    let profile = build_table_profile(sums, kind, y_max, cfg.samples_per_decade)?;
    let analysis = analyze_intervals(&source, &profile, cfg.tail_fraction)?;
    let (sup, at) = source.sup_abs(0.0, source.x_max())?;
    let max_slope_ratio = analysis
        .intervals
        .iter()
        .filter_map(|i| i.slope_bound.map(|b| i.integral_abs / b))
        .reduce(f64::max);
    Ok(ProfileReport {
        kind,
        y_max,
        n_samples: profile.samples.len(),
        n_zeros: profile.zeros.len(),
        first_zero: profile.zeros.first().copied(),
        last_zero: profile.zeros.last().copied(),
        branch: analysis.branch,
        n_intervals: analysis.intervals.len(),
        sup_abs_h: sup,
        sup_abs_h_at: at,
        sup_abs_h_samples: profile.samples.iter().map(|s| s.h.abs()).fold(0.0, f64::max),
        slope_bound_violations: analysis.slope_bound_violations().len(),
        max_slope_ratio,
        constants: analysis.constants,
    })
}

pub fn profile_checks(smoothed: &ProfileReport, tol: Tolerances) -> Vec<CheckResult> {
    vec![
        CheckResult::bound("h.bounded_by_one", smoothed.sup_abs_h, 1.0 + tol.abs, Some(smoothed.sup_abs_h_at), "exact sup of |H| over every unit step of y"),
        CheckResult::bound(
            "h.slope_bound",
            smoothed.slope_bound_violations as f64,
            0.0,
            None,
            format!("intervals with integral above m_hat (b-a)^2 / 2; worst ratio {:?}", smoothed.max_slope_ratio),
        ),
    ]
}

/// Zeros, interval integrals and slope-bound ratio on equal-slope parabolic arches.
pub fn synthetic_arches_check() -> Result<Vec<CheckResult>> {
    let zeros = vec![0.0, 0.7, 1.9, 2.2, 3.6, 5.0, 5.5, 7.25, 9.0];
    let k = 1.3;
    let heights: Vec<f64> = zeros.windows(2).map(|w| k / (w[1] - w[0])).collect();
    let arches = ParabolicArches::new(zeros.clone(), heights)?;
    let xs: Vec<f64> = (0..=900).map(|i| i as f64 / 100.0).collect();
    let p = build_profile(&arches, &xs)?;
    let a = analyze_intervals(&arches, &p, 0.5)?;
    let inner = &zeros[1..zeros.len() - 1];
    let zero_err = if p.zeros.len() == inner.len() {
        p.zeros.iter().zip(inner).map(|(g, w)| ((g - w) / w).abs()).fold(0.0, f64::max)
    } else {
        f64::INFINITY
    };
    let int_err = a
        .intervals
        .iter()
        .enumerate()
        .map(|(i, iv)| ((iv.integral_abs - arches.arch_integral(i + 1)) / arches.arch_integral(i + 1)).abs())
        .fold(0.0, f64::max);
    let ratio_err = a
        .intervals
        .iter()
        .map(|iv| (iv.integral_abs / iv.slope_bound.unwrap_or(f64::NAN) - 1.0 / 3.0).abs())
        .fold(0.0, f64::max);
    Ok(vec![
        CheckResult::bound("synthetic.zeros", zero_err, 1e-10, None, "relative error of recovered arch zeros"),
        CheckResult::bound("synthetic.integrals", int_err, 1e-9, None, "relative error of interval integrals against c(b-a)^3/6"),
        CheckResult::bound("synthetic.slope_ratio", ratio_err, 1e-9, None, "|integral / slope bound - 1/3|"),
    ])
}

/// Closed-form `𝓗'` against central differences (step `1e-6` in x) at `n` random non-integer `y`.
pub fn derivative_check(sums: &PrefixSums, n: usize, seed: u64) -> Result<CheckResult> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xd1ff);
    let src = TableSource::new(sums, ProfileKind::Smoothed, sums.n_max() as f64)?;
    let hstep = 1e-6;
    let mut worst = (0.0f64, 0.0);
    let mut done = 0;
    let y_hi = (sums.n_max() as f64 - 1.0).min(1e6);
    while done < n {
        let y: f64 = (rng.gen_range(1.5f64.ln()..y_hi.ln())).exp();
        let x = x_of_y(y);
        let (ya, yb) = (crate::summatory::y_of_x(x - hstep), crate::summatory::y_of_x(x + hstep));
        if ya.floor() != yb.floor() || y.fract() == 0.0 {
            continue;
        }
        let fd = (src.h(x + hstep) - src.h(x - hstep)) / (2.0 * hstep);
        let d = h_derivative(sums, y)?.value;
        if (fd - d).abs() > worst.0 {
            worst = ((fd - d).abs(), x);
        }
        done += 1;
    }
    Ok(CheckResult::bound("h.derivative", worst.0, 1e-4, Some(worst.1), format!("{n} random non-integer y")))
}

pub fn lambda_checks() -> Result<Vec<CheckResult>> {
    let mut out = Vec::new();
    let it = lambda_iteration(0.5, 50, 1.0)?;
    out.push(CheckResult::bound("lambda.limit", (it.steps[50].lambda_k - 2.0).abs(), 1e-12, None, "|lambda_50 - 2| for lambda = 0.5"));
    let mut worst = 0.0f64;
    let mut monotone = true;
    for lambda in [0.1, 0.5, 0.9] {
        let it = lambda_iteration(lambda, 200, 1.0)?;
        for w in it.steps.windows(2) {
            let settled = (w[1].lambda_k - it.limit).abs() <= 1e-15 * it.limit;
            monotone &= w[1].lambda_k > w[0].lambda_k || settled;
            monotone &= w[1].lambda_k <= it.limit * (1.0 + 1e-15);
        }
        for s in &it.steps {
            let bound = lambda.powi(s.k as i32) * (1.0 - it.limit).abs();
            worst = worst.max((s.lambda_k - it.limit).abs() - bound);
        }
    }
    out.push(CheckResult::bound("lambda.contraction", worst.max(0.0), 1e-12, None, "max of |lambda_k - L| - lambda^k |1 - L| for lambda in {0.1, 0.5, 0.9}"));
    out.push(CheckResult::bound("lambda.monotone", if monotone { 0.0 } else { 1.0 }, 0.0, None, "lambda_k increasing and below 1/(1-lambda)"));
    Ok(out)
}

pub fn tail_sup_check(sups: &[TailSup]) -> CheckResult {
    let ok = tail_sups_non_increasing(sups);
    CheckResult::measurement(
        "mertens.tail_sups",
        ok,
        sups.iter().rev().find_map(|t| t.sup),
        "sup over y >= 10^k of |M(y)|/y should not increase with k; reported as data",
    )
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Tool {
    pub name: &'static str,
    pub version: &'static str,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerificationReport {
    pub tool: Tool,
    pub config: RunConfig,
    pub checks: Vec<CheckResult>,
    pub remainders: Vec<SeriesReport>,
    pub profiles: Vec<ProfileReport>,
    pub mertens_tail_sups: Vec<TailSup>,
    pub lambda_iteration: LambdaIteration,
    pub status: Status,
}

impl VerificationReport {
    pub fn failures(&self) -> Vec<&CheckResult> {
        self.checks.iter().filter(|c| c.failed()).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Timing {
    pub stage: String,
    pub seconds: f64,
}

struct Clock {
    start: Instant,
    out: Vec<Timing>,
}

impl Clock {
    fn lap(&mut self, stage: &str) {
        let now = Instant::now();
        self.out.push(Timing { stage: stage.into(), seconds: (now - self.start).as_secs_f64() });
        self.start = now;
    }
}

/// The full default suite. Timings are returned separately so the report
/// itself depends only on the configuration.
pub fn run_suite(cfg: &RunConfig) -> Result<(VerificationReport, Vec<Timing>)> {
    cfg.validate()?;
    let mut clock = Clock { start: Instant::now(), out: Vec::new() };
    let wb = cfg.workbench(Lambda2Method::Both)?;
    clock.lap("tables");

    let mut checks = Vec::new();
    let smoothed = Smoothed(&wb.sums);
    checks.extend(tatuzawa_iseki_checks(&wb, cfg, &[&smoothed, &One, &Log])?);
    clock.lap("tatuzawa_iseki");
    checks.extend(lambda2_form_checks(&wb));
    checks.push(dual_route_check(&wb.sums, 10_000, cfg.seed, 1e-8)?);
    checks.extend(f_sum_checks(&wb.sums, cfg)?);
    checks.extend(mertens_checks(&wb.sums));
    clock.lap("identities");

    let (_, remainders) = remainder_reports(&wb, cfg, &RemainderKind::ALL)?;
    checks.extend(growth_checks(&remainders));
    checks.extend(finiteness_checks(&remainders));
    clock.lap("remainders");

    let p_smoothed = profile_report(&wb.sums, ProfileKind::Smoothed, cfg)?;
    let p_mertens = profile_report(&wb.sums, ProfileKind::Mertens, cfg)?;
    checks.extend(profile_checks(&p_smoothed, cfg.tolerances));
    checks.extend(synthetic_arches_check()?);
    checks.push(derivative_check(&wb.sums, 100, cfg.seed)?);
    clock.lap("profiles");

    let tail = mertens_tail_sups(&wb.sums, 2..=7);
    checks.push(tail_sup_check(&tail));
    checks.extend(lambda_checks()?);
    let iteration = lambda_iteration(0.5, 50, p_smoothed.constants.alpha_hat)?;
    clock.lap("diagnostics");

    let status = if checks.iter().any(|c| c.failed()) { Status::Fail } else { Status::Pass };
    let report = VerificationReport {
        tool: Tool { name: env!("CARGO_PKG_NAME"), version: env!("CARGO_PKG_VERSION") },
        config: cfg.clone(),
        checks,
        remainders,
        profiles: vec![p_smoothed, p_mertens],
        mertens_tail_sups: tail,
        lambda_iteration: iteration,
        status,
    };
    Ok((report, clock.out))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> RunConfig {
        RunConfig { n_max: 200_000, conv_cap: 100_000, ..RunConfig::default() }
    }

    #[test]
    fn config_validation() {
        assert!(RunConfig::default().validate().is_ok());
        let bad = RunConfig { conv_cap: 10, n_max: 5, ..RunConfig::default() };
        assert!(matches!(bad.validate(), Err(Error::Config(_))));
        let empty = RunConfig { grid: GridSpec::Points { points: vec![] }, ..RunConfig::default() };
        assert!(matches!(empty.validate(), Err(Error::Config(_))));
        let tf = RunConfig { tail_fraction: 1.0, ..RunConfig::default() };
        assert!(tf.validate().is_err());
    }

    #[test]
    fn small_suite_passes_and_lists_every_kind() {
        let (report, timings) = run_suite(&small()).unwrap();
        let failing: Vec<_> = report.failures().iter().map(|c| c.name.clone()).collect();
        assert!(failing.is_empty(), "{failing:?}");
        assert_eq!(report.remainders.len(), 8);
        let mut names: Vec<&str> = report.checks.iter().map(|c| c.name.as_str()).collect();
        let n = names.len();
        names.sort();
        names.dedup();
        assert_eq!(names.len(), n, "check names are unique");
        assert!(!timings.is_empty());
    }
}
