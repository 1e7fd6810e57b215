//! The `mlab` command line.
//!
//! Exit status: 0 when every executed assertion passes, 1 when one fails,
//! 2 for invalid configuration, 3 when a table cap is too small.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::dirichlet::{pointwise_residuals, ArithTable, Column, Lambda2Method, Tolerances};
use crate::error::{Error, Result};
use crate::format::{g17, to_json};
use crate::h_analysis::{analyze_intervals, build_profile, lambda_iteration, ProfileSource, TableSource};
use crate::identities::{Log, One, RemainderKind, Smoothed, TestFunction};
use crate::report::{self, CheckResult, GridSpec, RunConfig, Status};
use crate::summatory::{x_of_y, ProfileKind};

pub const CACHE_ENV: &str = "MLAB_CACHE";

#[derive(Debug, Parser)]
#[command(name = "mlab", version, about = "Sieve, smoothed Mertens sums and finite-range checks")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub opts: Opts,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sieve [1, n_max]; per-point factorization rows or a summary.
    Sieve,
    /// Columns mu, lambda, lambda2, lambda2_minus, theta up to the convolution cap.
    Table,
    /// M, F by both routes, psi and the Lambda2 sum at sample points.
    Mertens,
    /// Exact identities and cross-checks.
    Verify,
    /// Remainder series of the asymptotic claims.
    Remainders,
    /// Sampled H profile and its zeros.
    HProfile,
    /// Intervals between successive zeros and the estimated constants.
    #[command(alias = "intervals")]
    Lemma2,
    /// The lambda_k = 1 + lambda lambda_{k-1} recurrence.
    Iterate,
    /// The full default suite as one report.
    Report,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Which {
    TatuzawaIseki,
    FSum,
    FloorWeighted,
    DualRoute,
    Lambda2Forms,
    Mertens,
    HBound,
    All,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FChoice {
    One,
    Log,
    Smoothed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MethodChoice {
    SelbergForm,
    MobiusForm,
    Both,
}

impl From<MethodChoice> for Lambda2Method {
    fn from(m: MethodChoice) -> Self {
        match m {
            MethodChoice::SelbergForm => Lambda2Method::SelbergForm,
            MethodChoice::MobiusForm => Lambda2Method::MobiusForm,
            MethodChoice::Both => Lambda2Method::Both,
        }
    }
}

#[derive(Debug, Args)]
pub struct Opts {
    /// Sieve bound (accepts 1e7).
    #[arg(long, global = true, value_parser = parse_count)]
    pub n_max: Option<u64>,
    /// Bound of the convolution tables.
    #[arg(long, global = true, value_parser = parse_count)]
    pub conv_cap: Option<u64>,
    #[arg(long, global = true, value_parser = parse_count)]
    pub segment_size: Option<u64>,
    /// Geometric grid start:ratio:count.
    #[arg(long, global = true)]
    pub grid: Option<String>,
    /// Explicit sample points a,b,c.
    #[arg(long, global = true)]
    pub points: Option<String>,
    #[arg(long, global = true, value_enum)]
    pub which: Option<Which>,
    /// Profile kind (smoothed|mertens) or remainder kind.
    #[arg(long, global = true)]
    pub kind: Option<String>,
    #[arg(long, global = true)]
    pub tail_fraction: Option<f64>,
    #[arg(long, global = true)]
    pub samples_per_decade: Option<usize>,
    /// Segment cache directory; MLAB_CACHE overrides it.
    #[arg(long, global = true)]
    pub cache: Option<PathBuf>,
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Test function for the Tatuzawa–Iseki check; all three when absent.
    #[arg(long = "f", global = true, value_enum)]
    pub f: Option<FChoice>,
    #[arg(long, global = true, value_enum)]
    pub method: Option<MethodChoice>,
    #[arg(long, global = true)]
    pub lambda: Option<f64>,
    #[arg(long, global = true)]
    pub steps: Option<usize>,
    #[arg(long, global = true)]
    pub alpha: Option<f64>,
    #[arg(long, global = true)]
    pub tol_rel: Option<f64>,
    #[arg(long, global = true)]
    pub tol_abs: Option<f64>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
}

fn parse_count(s: &str) -> std::result::Result<u64, String> {
    if let Ok(v) = s.parse::<u64>() {
        return Ok(v);
    }
    let f: f64 = s.parse().map_err(|_| format!("not a count: {s:?}"))?;
    if f >= 0.0 && f.fract() == 0.0 && f < 1.8e19 {
        Ok(f as u64)
    } else {
        Err(format!("not a non-negative integer: {s:?}"))
    }
}

fn parse_grid(s: &str) -> Result<GridSpec> {
    let parts: Vec<&str> = s.split(':').collect();
    let bad = || Error::Config(format!("grid must be start:ratio:count, got {s:?}"));
    if parts.len() != 3 {
        return Err(bad());
    }
    let start: f64 = parts[0].parse().map_err(|_| bad())?;
    let ratio: f64 = parts[1].parse().map_err(|_| bad())?;
    let count = parse_count(parts[2]).map_err(|_| bad())? as usize;
    Ok(GridSpec::Geometric { start, ratio, count })
}

fn parse_points(s: &str) -> Result<GridSpec> {
    let points = s
        .split(',')
        .map(str::trim)
        .filter(|p| !p.is_empty())
        .map(|p| p.parse::<f64>().map_err(|_| Error::Config(format!("bad point {p:?}"))))
        .collect::<Result<Vec<_>>>()?;
    Ok(GridSpec::Points { points })
}

impl Opts {
    /// Build and validate the run configuration.
    pub fn config(&self) -> Result<RunConfig> {
        let mut cfg = RunConfig::default();
        if let Some(n) = self.n_max {
            cfg.n_max = n;
            if self.conv_cap.is_none() {
                cfg.conv_cap = cfg.conv_cap.min(n);
            }
        }
        if let Some(c) = self.conv_cap {
            cfg.conv_cap = c;
        }
        if let Some(s) = self.segment_size {
            cfg.segment_size = s as usize;
        }
        cfg.grid = match (&self.grid, &self.points) {
            (Some(_), Some(_)) => return Err(Error::Config("use either --grid or --points".into())),
            (Some(g), None) => parse_grid(g)?,
            (None, Some(p)) => parse_points(p)?,
            (None, None) => GridSpec::Default,
        };
        if let Some(t) = self.tail_fraction {
            cfg.tail_fraction = t;
        }
        if let Some(s) = self.samples_per_decade {
            cfg.samples_per_decade = s;
        }
        let mut tol = Tolerances::default();
        if let Some(r) = self.tol_rel {
            tol.rel = r;
        }
        if let Some(a) = self.tol_abs {
            tol.abs = a;
        }
        cfg.tolerances = tol;
        if let Some(seed) = self.seed {
            cfg.seed = seed;
        }
        cfg.cache_dir = std::env::var_os(CACHE_ENV).map(PathBuf::from).or_else(|| self.cache.clone());
        cfg.validate()?;
        Ok(cfg)
    }

    fn profile_kind(&self) -> Result<ProfileKind> {
        self.kind.as_deref().map_or(Ok(ProfileKind::Smoothed), str::parse)
    }
}

/// A file to write, or standard output when `path` is `None`.
struct Artifact {
    path: Option<PathBuf>,
    bytes: Vec<u8>,
}

struct Outcome {
    artifacts: Vec<Artifact>,
    checks: Vec<CheckResult>,
}

impl Outcome {
    fn single(out: &Option<PathBuf>, bytes: Vec<u8>) -> Self {
        Self { artifacts: vec![Artifact { path: out.clone(), bytes }], checks: Vec::new() }
    }
}

/// `dir/stem.tag.ext` next to `out`.
fn sibling(out: &Path, tag: &str, ext: &str) -> PathBuf {
    let stem = out.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    out.with_file_name(format!("{stem}.{tag}.{ext}"))
}

/// Write through a temporary file in the same directory, then rename.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let name = path.file_name().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    let tmp = dir.join(format!(".{name}.tmp{}", std::process::id()));
    let res = (|| -> std::io::Result<()> {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
        fs::rename(&tmp, path)
    })();
    if res.is_err() {
        let _ = fs::remove_file(&tmp);
    }
    Ok(res?)
}

fn json_bytes<T: Serialize + ?Sized>(v: &T) -> Result<Vec<u8>> {
    Ok(to_json(v).map_err(|e| Error::Config(e.to_string()))?.into_bytes())
}

/// Exit status for an error.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Capability { .. } => 3,
        Error::Range(_) | Error::Config(_) | Error::Domain(_) | Error::Precondition(_) => 2,
        _ => 1,
    }
}

/// Parse `args` (program name first), run, and return the exit status.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match execute(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("mlab: {e}");
            exit_code(&e)
        }
    }
}

fn execute(cli: &Cli) -> Result<i32> {
    let cfg = cli.opts.config()?;
    let started = Instant::now();
    let outcome = match cli.command {
        Command::Sieve => cmd_sieve(cli, &cfg)?,
        Command::Table => cmd_table(cli, &cfg)?,
        Command::Mertens => cmd_mertens(cli, &cfg)?,
        Command::Verify => cmd_verify(cli, &cfg)?,
        Command::Remainders => cmd_remainders(cli, &cfg)?,
        Command::HProfile => cmd_h_profile(cli, &cfg)?,
        Command::Lemma2 => cmd_intervals(cli, &cfg)?,
        Command::Iterate => cmd_iterate(cli)?,
        Command::Report => cmd_report(cli, &cfg)?,
    };
    for a in &outcome.artifacts {
        match &a.path {
            Some(p) => write_atomic(p, &a.bytes)?,
            None => std::io::stdout().write_all(&a.bytes)?,
        }
    }
    eprintln!("mlab: finished in {:.3}s", started.elapsed().as_secs_f64());
    let failed: Vec<&CheckResult> = outcome.checks.iter().filter(|c| c.failed()).collect();
    for c in &failed {
        eprintln!(
            "mlab: FAIL {}: measured {} threshold {}",
            c.name,
            c.measured.map(g17).unwrap_or_else(|| "-".into()),
            c.threshold.map(g17).unwrap_or_else(|| "-".into())
        );
    }
    Ok(if failed.is_empty() { 0 } else { 1 })
}

fn format_or(cli: &Cli, default: Format) -> Format {
    cli.opts.format.unwrap_or(default)
}

/// Integer points from the grid, or `None` for the default grid.
fn integer_points(cfg: &RunConfig, cap: u64, what: &str) -> Result<Option<Vec<u64>>> {
    if cfg.grid.is_default() {
        return Ok(None);
    }
    let mut ns: Vec<u64> = cfg.grid.resolve(cap as f64).iter().map(|&x| x.floor().max(0.0) as u64).collect();
    ns.sort_unstable();
    ns.dedup();
    if let Some(&n) = ns.iter().find(|&&n| n == 0 || n > cap) {
        if n == 0 {
            return Err(Error::range(format!("{what} points must be at least 1")));
        }
        return Err(Error::Capability { what: what.into(), cap: "n_max", needed: n as f64, available: cap as f64, max_usable: cap as f64 });
    }
    Ok(Some(ns))
}

#[derive(Serialize)]
struct SieveSummary {
    n_max: u64,
    segment_size: usize,
    segments: usize,
    primes: u64,
    squarefree: u64,
    mertens: i64,
}

#[derive(Serialize)]
struct SieveRow {
    n: u64,
    lpf: u64,
    lpf_mult: u8,
    mu: i8,
    lambda: f64,
}

fn cmd_sieve(cli: &Cli, cfg: &RunConfig) -> Result<Outcome> {
    let points = integer_points(cfg, cfg.n_max, "sieve")?;
    let sieve = cfg.sieve(cfg.n_max)?;
    let started = Instant::now();
    let mut summary = SieveSummary { n_max: cfg.n_max, segment_size: cfg.segment_size, segments: 0, primes: 0, squarefree: 0, mertens: 0 };
    let mut rows = Vec::new();
    let mut next = 0;
    sieve.for_each_segment(|seg| {
        summary.segments += 1;
        let mu = seg.mobius();
        let lambda = seg.von_mangoldt();
        for (i, &m) in mu.iter().enumerate() {
            let n = seg.lo() + i as u64;
            summary.mertens += m as i64;
            summary.squarefree += (m != 0) as u64;
            summary.primes += (n > 1 && seg.lpf()[i] == n) as u64;
            if let Some(ps) = &points {
                while next < ps.len() && ps[next] == n {
                    rows.push(SieveRow { n, lpf: seg.lpf()[i], lpf_mult: seg.lpf_mult()[i], mu: m, lambda: lambda[i] });
                    next += 1;
                }
            }
        }
        Ok(())
    })?;
    let secs = started.elapsed().as_secs_f64();
    eprintln!("mlab: sieved {} integers in {:.3}s ({:.3e}/s)", cfg.n_max, secs, cfg.n_max as f64 / secs);
    let bytes = match (format_or(cli, Format::Csv), points.is_some()) {
        (Format::Json, _) => {
            #[derive(Serialize)]
            struct Out<'a> {
                summary: &'a SieveSummary,
                rows: &'a [SieveRow],
            }
            json_bytes(&Out { summary: &summary, rows: &rows })?
        }
        (Format::Csv, true) => {
            let mut b = b"n,lpf,lpf_mult,mu,lambda\n".to_vec();
            for r in &rows {
                writeln!(b, "{},{},{},{},{}", r.n, r.lpf, r.lpf_mult, r.mu, g17(r.lambda))?;
            }
            b
        }
        (Format::Csv, false) => {
            let s = &summary;
            format!(
                "n_max,segment_size,segments,primes,squarefree,mertens\n{},{},{},{},{},{}\n",
                s.n_max, s.segment_size, s.segments, s.primes, s.squarefree, s.mertens
            )
            .into_bytes()
        }
    };
    Ok(Outcome::single(&cli.opts.out, bytes))
}

fn cmd_table(cli: &Cli, cfg: &RunConfig) -> Result<Outcome> {
    let method = cli.opts.method.map_or(Lambda2Method::Both, Lambda2Method::from);
    let points = integer_points(cfg, cfg.conv_cap, "table")?;
    let table = ArithTable::from_sieve(&cfg.sieve(cfg.conv_cap)?, method, cfg.tolerances)?;
    let ns: Vec<u64> = points.unwrap_or_else(|| (1..=cfg.conv_cap).collect());
    let bytes = match format_or(cli, Format::Csv) {
        Format::Csv => {
            let mut b = Vec::new();
            table.write_csv(&mut b, ns.iter().copied(), &Column::ALL)?;
            b
        }
        Format::Json => {
            #[derive(Serialize)]
            struct Out {
                n_max: u64,
                method: Lambda2Method,
                form_check: Option<crate::dirichlet::FormDiscrepancy>,
                pointwise_residuals: Option<crate::dirichlet::PointwiseResiduals>,
                rows: Vec<serde_json::Value>,
            }
            let rows = ns
                .iter()
                .map(|&n| {
                    let i = n as usize;
                    serde_json::json!({
                        "n": n, "mu": table.mu()[i], "lambda": table.lambda()[i], "lambda2": table.lambda2()[i],
                        "lambda2_minus": table.lambda2_minus()[i], "theta": table.theta()[i],
                    })
                })
                .collect();
            let residuals = if table.n_max() >= 2 { Some(pointwise_residuals(&table, table.n_max() as f64)?) } else { None };
            json_bytes(&Out { n_max: table.n_max(), method, form_check: table.form_check().cloned(), pointwise_residuals: residuals, rows })?
        }
    };
    Ok(Outcome::single(&cli.opts.out, bytes))
}

fn cmd_mertens(cli: &Cli, cfg: &RunConfig) -> Result<Outcome> {
    let wb = cfg.workbench(Lambda2Method::SelbergForm)?;
    let xs = cfg.grid.resolve(cfg.n_max as f64);
    let mut csv = Vec::new();
    wb.sums.write_csv(&mut csv, &xs)?;
    let bytes = match format_or(cli, Format::Csv) {
        Format::Csv => csv,
        Format::Json => {
            let rows: Vec<serde_json::Value> = xs
                .iter()
                .map(|&x| -> Result<serde_json::Value> {
                    let s_l2 = if x.floor() <= wb.sums.conv_cap() as f64 { Some(wb.sums.sum_lambda2(x)?) } else { None };
                    Ok(serde_json::json!({
                        "x": x, "M": wb.sums.mertens(x)?, "F_sum": wb.sums.big_f(x)?,
                        "F_integral": wb.sums.big_f_integral(x)?, "psi": wb.sums.psi(x)?, "S_lambda2": s_l2,
                    }))
                })
                .collect::<Result<_>>()?;
            json_bytes(&rows)?
        }
    };
    Ok(Outcome::single(&cli.opts.out, bytes))
}

fn checks_bytes(checks: &[CheckResult], format: Format) -> Result<Vec<u8>> {
    match format {
        Format::Json => json_bytes(checks),
        Format::Csv => {
            let mut b = b"check,status,measured,threshold,worst_x\n".to_vec();
            let opt = |v: Option<f64>| v.map(g17).unwrap_or_default();
            for c in checks {
                let status = match c.status {
                    Status::Pass => "pass",
                    Status::Fail => "fail",
                    Status::NotApplicable => "not-applicable",
                };
                writeln!(b, "{},{},{},{},{}", c.name, status, opt(c.measured), opt(c.threshold), opt(c.worst_x))?;
            }
            Ok(b)
        }
    }
}

fn cmd_verify(cli: &Cli, cfg: &RunConfig) -> Result<Outcome> {
    let which = cli.opts.which.unwrap_or(Which::All);
    let all = which == Which::All;
    let method = if all || which == Which::Lambda2Forms { Lambda2Method::Both } else { Lambda2Method::SelbergForm };
    let wb = cfg.workbench(method)?;
    let mut checks = Vec::new();
    if all || which == Which::TatuzawaIseki {
        let smoothed = Smoothed(&wb.sums);
        let fs: Vec<&dyn TestFunction> = match cli.opts.f {
            Some(FChoice::One) => vec![&One],
            Some(FChoice::Log) => vec![&Log],
            Some(FChoice::Smoothed) => vec![&smoothed],
            None => vec![&smoothed, &One, &Log],
        };
        checks.extend(report::tatuzawa_iseki_checks(&wb, cfg, &fs)?);
    }
    if all || which == Which::Lambda2Forms {
        checks.extend(report::lambda2_form_checks(&wb));
    }
    if all || which == Which::DualRoute {
        checks.push(report::dual_route_check(&wb.sums, 10_000, cfg.seed, 1e-8)?);
    }
    if all || matches!(which, Which::FSum | Which::FloorWeighted) {
        let both = report::f_sum_checks(&wb.sums, cfg)?;
        checks.extend(both.into_iter().filter(|c| {
            all || (which == Which::FSum) == (c.name == "f_sum.collapse")
        }));
    }
    if all || which == Which::Mertens {
        checks.extend(report::mertens_checks(&wb.sums));
    }
    if all || which == Which::HBound {
        let p = report::profile_report(&wb.sums, ProfileKind::Smoothed, cfg)?;
        checks.extend(report::profile_checks(&p, cfg.tolerances).into_iter().take(1));
    }
    let bytes = checks_bytes(&checks, format_or(cli, Format::Json))?;
    Ok(Outcome { artifacts: vec![Artifact { path: cli.opts.out.clone(), bytes }], checks })
}

fn cmd_remainders(cli: &Cli, cfg: &RunConfig) -> Result<Outcome> {
    let kinds: Vec<RemainderKind> = match cli.opts.kind.as_deref() {
        None | Some("all") => RemainderKind::ALL.to_vec(),
        Some(k) => vec![k.parse()?],
    };
    let wb = cfg.workbench(Lambda2Method::SelbergForm)?;
    let (series, reports) = report::remainder_reports(&wb, cfg, &kinds)?;
    let bytes = match format_or(cli, Format::Csv) {
        Format::Csv => {
            let mut b = Vec::new();
            for (i, s) in series.iter().enumerate() {
                s.write_csv(&mut b, i == 0)?;
            }
            b
        }
        Format::Json => json_bytes(&reports)?,
    };
    let mut out = Outcome::single(&cli.opts.out, bytes);
    if let (Some(p), Format::Csv) = (&cli.opts.out, format_or(cli, Format::Csv)) {
        out.artifacts.push(Artifact { path: Some(sibling(p, "summary", "json")), bytes: json_bytes(&reports)? });
    }
    Ok(out)
}

fn profile_points(cfg: &RunConfig, y_max: f64) -> Result<Vec<f64>> {
    let ys = if cfg.grid.is_default() {
        crate::h_analysis::y_grid(y_max, cfg.samples_per_decade)?
    } else {
        cfg.grid.resolve(y_max)
    };
    if let Some(&y) = ys.iter().find(|&&y| y > y_max || !(y >= 1.0)) {
        if y > y_max {
            return Err(Error::Capability { what: "h profile".into(), cap: "n_max", needed: y, available: y_max, max_usable: y_max });
        }
        return Err(Error::range(format!("profile points are y values >= 1, got {y}")));
    }
    Ok(ys.into_iter().map(x_of_y).collect())
}

fn cmd_h_profile(cli: &Cli, cfg: &RunConfig) -> Result<Outcome> {
    let kind = cli.opts.profile_kind()?;
    let wb = cfg.workbench(Lambda2Method::SelbergForm)?;
    let y_max = cfg.n_max as f64;
    let source = TableSource::new(&wb.sums, kind, y_max)?;
    let profile = build_profile(&source, &profile_points(cfg, y_max)?)?;
    let mut out = Outcome { artifacts: Vec::new(), checks: Vec::new() };
    match format_or(cli, Format::Csv) {
        Format::Csv => {
            let mut b = Vec::new();
            profile.write_csv(&mut b)?;
            out.artifacts.push(Artifact { path: cli.opts.out.clone(), bytes: b });
            if let Some(p) = &cli.opts.out {
                let mut z = Vec::new();
                profile.write_zeros_csv(&mut z)?;
                out.artifacts.push(Artifact { path: Some(sibling(p, "zeros", "csv")), bytes: z });
            }
        }
        Format::Json => out.artifacts.push(Artifact { path: cli.opts.out.clone(), bytes: json_bytes(&profile)? }),
    }
    if kind == ProfileKind::Smoothed {
        let (sup, at) = source.sup_abs(0.0, source.x_max())?;
        out.checks.push(CheckResult {
            name: "h.bounded_by_one".into(),
            status: if sup <= 1.0 + cfg.tolerances.abs { Status::Pass } else { Status::Fail },
            asserted: true,
            measured: Some(sup),
            threshold: Some(1.0 + cfg.tolerances.abs),
            worst_x: Some(at),
            detail: String::new(),
        });
    }
    Ok(out)
}

fn cmd_intervals(cli: &Cli, cfg: &RunConfig) -> Result<Outcome> {
    let kind = cli.opts.profile_kind()?;
    let wb = cfg.workbench(Lambda2Method::SelbergForm)?;
    let y_max = cfg.n_max as f64;
    let source = TableSource::new(&wb.sums, kind, y_max)?;
    let profile = build_profile(&source, &profile_points(cfg, y_max)?)?;
    let analysis = analyze_intervals(&source, &profile, cfg.tail_fraction)?;
    let mut out = Outcome { artifacts: Vec::new(), checks: Vec::new() };
    match format_or(cli, Format::Csv) {
        Format::Csv => {
            let mut b = Vec::new();
            analysis.write_intervals_csv(&mut b)?;
            out.artifacts.push(Artifact { path: cli.opts.out.clone(), bytes: b });
            if let Some(p) = &cli.opts.out {
                out.artifacts.push(Artifact { path: Some(sibling(p, "constants", "json")), bytes: json_bytes(&analysis.constants)? });
            }
        }
        Format::Json => out.artifacts.push(Artifact { path: cli.opts.out.clone(), bytes: json_bytes(&analysis)? }),
    }
    let violations = analysis.slope_bound_violations().len();
    out.checks.push(CheckResult {
        name: "intervals.slope_bound".into(),
        status: if violations == 0 { Status::Pass } else { Status::Fail },
        asserted: analysis.constants.m_hat.is_some(),
        measured: Some(violations as f64),
        threshold: Some(0.0),
        worst_x: None,
        detail: String::new(),
    });
    Ok(out)
}

fn cmd_iterate(cli: &Cli) -> Result<Outcome> {
    let it = lambda_iteration(cli.opts.lambda.unwrap_or(0.5), cli.opts.steps.unwrap_or(50), cli.opts.alpha.unwrap_or(1.0))?;
    let bytes = match format_or(cli, Format::Csv) {
        Format::Csv => {
            let mut b = Vec::new();
            it.write_csv(&mut b)?;
            b
        }
        Format::Json => json_bytes(&it)?,
    };
    Ok(Outcome::single(&cli.opts.out, bytes))
}

fn cmd_report(cli: &Cli, cfg: &RunConfig) -> Result<Outcome> {
    let (report, timings) = report::run_suite(cfg)?;
    for t in &timings {
        eprintln!("mlab: {:<16} {:.3}s", t.stage, t.seconds);
    }
    let bytes = match format_or(cli, Format::Json) {
        Format::Json => json_bytes(&report)?,
        Format::Csv => checks_bytes(&report.checks, Format::Csv)?,
    };
    let mut out = Outcome { artifacts: vec![Artifact { path: cli.opts.out.clone(), bytes }], checks: report.checks };
    if let Some(p) = &cli.opts.out {
        out.artifacts.push(Artifact { path: Some(sibling(p, "timings", "json")), bytes: json_bytes(&timings)? });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_counts_and_grids() {
        assert_eq!(parse_count("1e7"), Ok(10_000_000));
        assert_eq!(parse_count("42"), Ok(42));
        assert!(parse_count("1.5").is_err());
        assert_eq!(parse_grid("100:1.25:3").unwrap(), GridSpec::Geometric { start: 100.0, ratio: 1.25, count: 3 });
        assert!(parse_grid("100:1.25").is_err());
        assert_eq!(parse_points("1, 10").unwrap(), GridSpec::Points { points: vec![1.0, 10.0] });
    }

    #[test]
    fn sibling_paths() {
        assert_eq!(sibling(Path::new("out/p.csv"), "zeros", "csv"), PathBuf::from("out/p.zeros.csv"));
    }

    #[test]
    fn exit_codes() {
        assert_eq!(exit_code(&Error::Config("x".into())), 2);
        assert_eq!(exit_code(&Error::Capability { what: "x".into(), cap: "n_max", needed: 2.0, available: 1.0, max_usable: 1.0 }), 3);
    }
}
