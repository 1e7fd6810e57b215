//! Dirichlet convolution and the Selberg weights Λ₂, Λ₂⁻, Θ.
//!
//! Columns are dense arrays indexed by `n` itself; index 0 is unused and
//! always holds zero.

use std::io::Write;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::format::g17;
use crate::kahan::NeumaierSum;
use crate::sieve::{SegmentedSieve, DEFAULT_SEGMENT_SIZE};

pub const DEFAULT_CONV_CAP: u64 = 10_000_000;

/// Relative and absolute tolerances for identity comparisons.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Tolerances {
    pub rel: f64,
    pub abs: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self { rel: 1e-9, abs: 1e-9 }
    }
}

const BLOCK: usize = 1 << 16;

/// `(f ∗ g)(n) = Σ_{d|n} f(d) g(n/d)` for `1 ≤ n ≤ n_max`.
///
/// Every target is accumulated with compensation and always in increasing
/// order of `d`, so the output does not depend on blocking or thread count.
pub fn convolve_prefix(f: &[f64], g: &[f64], n_max: u64) -> Result<Vec<f64>> {
    if n_max == 0 {
        return Err(Error::range("convolution needs n_max >= 1"));
    }
    let n = n_max as usize;
    if f.len() <= n || g.len() <= n {
        return Err(Error::range(format!(
            "columns of length {} and {} do not cover n_max = {n}",
            f.len(),
            g.len()
        )));
    }
    let nz_f: Vec<usize> = (1..=n).filter(|&d| f[d] != 0.0).collect();

    let blocks: Vec<(usize, usize)> = (1..=n)
        .step_by(BLOCK)
        .map(|lo| (lo, (lo + BLOCK).min(n + 1)))
        .collect();
    let parts: Vec<Vec<f64>> = blocks
        .par_iter()
        .map(|&(lo, hi)| convolve_block(f, g, &nz_f, lo, hi))
        .collect();

    let mut out = Vec::with_capacity(n + 1);
    out.push(0.0);
    for p in parts {
        out.extend(p);
    }
    Ok(out)
}

fn convolve_block(f: &[f64], g: &[f64], nz_f: &[usize], lo: usize, hi: usize) -> Vec<f64> {
    let mut acc = vec![NeumaierSum::new(); hi - lo];
    let d_split = ((hi - 1) as f64).sqrt() as usize + 1;

    // small d: walk the cofactors m directly
    for &d in nz_f.iter().take_while(|&&d| d < d_split) {
        let fd = f[d];
        let m_lo = lo.div_ceil(d).max(1);
        let m_hi = (hi - 1) / d;
        for m in m_lo..=m_hi {
            let gm = g[m];
            if gm != 0.0 {
                acc[d * m - lo] += fd * gm;
            }
        }
    }

    // large d: m is small, visit m downwards so that d still increases per target
    let m_max = (hi - 1) / d_split;
    for m in (1..=m_max).rev() {
        let gm = g[m];
        if gm == 0.0 {
            continue;
        }
        let d_lo = lo.div_ceil(m).max(d_split);
        let d_hi = (hi - 1) / m;
        if d_lo > d_hi {
            continue;
        }
        let start = nz_f.partition_point(|&d| d < d_lo);
        for &d in nz_f[start..].iter().take_while(|&&d| d <= d_hi) {
            acc[d * m - lo] += f[d] * gm;
        }
    }

    acc.into_iter().map(|a| a.sum()).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Lambda2Method {
    /// `(Λ ∗ Λ)(n) + Λ(n) log n`
    SelbergForm,
    /// `Σ_{d|n} μ(d) log²(n/d)`
    MobiusForm,
    /// Both, store the Selberg form, record the discrepancy.
    Both,
}

/// Outcome of comparing the two Λ₂ forms.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct FormDiscrepancy {
    pub max_abs: f64,
    pub worst_n: u64,
    /// `max |Λ₂^μ(n) − Λ₂^Λ(n)| / log²(n)` over `n ≥ 2`.
    pub max_rel: f64,
    pub threshold: f64,
}

/// Dense arithmetic columns up to `n_max`.
#[derive(Debug, Clone)]
pub struct ArithTable {
    n_max: u64,
    mu: Vec<i8>,
    lambda: Vec<f64>,
    lambda_conv: Vec<f64>,
    lambda2: Vec<f64>,
    lambda2_minus: Vec<f64>,
    theta: Vec<f64>,
    form_check: Option<FormDiscrepancy>,
}

impl ArithTable {
    pub fn build(n_max: u64, method: Lambda2Method, tol: Tolerances) -> Result<Self> {
        let sieve = SegmentedSieve::new(n_max, DEFAULT_SEGMENT_SIZE)?;
        Self::from_sieve(&sieve, method, tol)
    }

    pub fn from_sieve(sieve: &SegmentedSieve, method: Lambda2Method, tol: Tolerances) -> Result<Self> {
        let mut mu = Vec::with_capacity(sieve.n_max() as usize + 1);
        let mut lambda = Vec::with_capacity(sieve.n_max() as usize + 1);
        mu.push(0);
        lambda.push(0.0);
        sieve.for_each_segment(|seg| {
            mu.extend(seg.mobius());
            lambda.extend(seg.von_mangoldt());
            Ok(())
        })?;
        Self::from_columns(mu, lambda, method, tol)
    }

    /// Build from μ and Λ columns (index 0 ignored).
    pub fn from_columns(mu: Vec<i8>, lambda: Vec<f64>, method: Lambda2Method, tol: Tolerances) -> Result<Self> {
        if mu.len() < 2 || mu.len() != lambda.len() {
            return Err(Error::range("table needs matching mu/lambda columns with n_max >= 1"));
        }
        let n_max = (mu.len() - 1) as u64;
        let n = n_max as usize;

        let lambda_conv = convolve_prefix(&lambda, &lambda, n_max)?;
        let mut lambda2 = vec![0.0; n + 1];
        let mut lambda2_minus = vec![0.0; n + 1];
        let mut theta = vec![0.0; n + 1];
        for k in 2..=n {
            let log_k = (k as f64).ln();
            let tail = lambda[k] * log_k;
            lambda2[k] = lambda_conv[k] + tail;
            lambda2_minus[k] = lambda_conv[k] - tail;
            theta[k] = lambda_conv[k] / log_k;
        }

        let mobius_form = match method {
            Lambda2Method::SelbergForm => None,
            Lambda2Method::MobiusForm | Lambda2Method::Both => Some(lambda2_mobius_form(&mu)?),
        };

        let mut form_check = None;
        if let Some(mob) = mobius_form {
            if method == Lambda2Method::Both {
                let check = compare_forms(&mob, &lambda2, tol);
                if check.max_abs > check.threshold {
                    return Err(Error::CrossCheck {
                        check: "lambda2 mobius-form vs selberg-form",
                        worst_n: check.worst_n,
                        discrepancy: check.max_abs,
                        threshold: check.threshold,
                    });
                }
                form_check = Some(check);
            } else {
                lambda2 = mob;
            }
        }

        Ok(Self { n_max, mu, lambda, lambda_conv, lambda2, lambda2_minus, theta, form_check })
    }

    pub fn n_max(&self) -> u64 {
        self.n_max
    }
    pub fn mu(&self) -> &[i8] {
        &self.mu
    }
    pub fn lambda(&self) -> &[f64] {
        &self.lambda
    }
    /// `(Λ ∗ Λ)(n)`.
    pub fn lambda_conv(&self) -> &[f64] {
        &self.lambda_conv
    }
    pub fn lambda2(&self) -> &[f64] {
        &self.lambda2
    }
    pub fn lambda2_minus(&self) -> &[f64] {
        &self.lambda2_minus
    }
    pub fn theta(&self) -> &[f64] {
        &self.theta
    }
    pub fn form_check(&self) -> Option<&FormDiscrepancy> {
        self.form_check.as_ref()
    }

    /// Write `n,<columns...>` rows for the given `n` values.
    pub fn write_csv<W: Write>(&self, mut w: W, ns: impl IntoIterator<Item = u64>, columns: &[Column]) -> Result<()> {
        let mut header = String::from("n");
        for c in columns {
            header.push(',');
            header.push_str(c.name());
        }
        writeln!(w, "{header}")?;
        for n in ns {
            if n == 0 || n > self.n_max {
                return Err(Error::range(format!("row {n} outside [1, {}]", self.n_max)));
            }
            let k = n as usize;
            let mut line = n.to_string();
            for c in columns {
                line.push(',');
                match c {
                    Column::Mu => line.push_str(&self.mu[k].to_string()),
                    Column::Lambda => line.push_str(&g17(self.lambda[k])),
                    Column::Lambda2 => line.push_str(&g17(self.lambda2[k])),
                    Column::Lambda2Minus => line.push_str(&g17(self.lambda2_minus[k])),
                    Column::Theta => line.push_str(&g17(self.theta[k])),
                }
            }
            writeln!(w, "{line}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Column {
    Mu,
    Lambda,
    Lambda2,
    Lambda2Minus,
    Theta,
}

impl Column {
    pub const ALL: [Column; 5] = [Column::Mu, Column::Lambda, Column::Lambda2, Column::Lambda2Minus, Column::Theta];

    pub fn name(self) -> &'static str {
        match self {
            Column::Mu => "mu",
            Column::Lambda => "lambda",
            Column::Lambda2 => "lambda2",
            Column::Lambda2Minus => "lambda2_minus",
            Column::Theta => "theta",
        }
    }
}

/// `Σ_{d|n} μ(d) log²(n/d)`.
pub fn lambda2_mobius_form(mu: &[i8]) -> Result<Vec<f64>> {
    let n_max = (mu.len() - 1) as u64;
    let f: Vec<f64> = mu.iter().map(|&m| m as f64).collect();
    let g: Vec<f64> = (0..mu.len())
        .map(|m| if m == 0 { 0.0 } else { (m as f64).ln().powi(2) })
        .collect();
    convolve_prefix(&f, &g, n_max)
}

fn compare_forms(mobius: &[f64], selberg: &[f64], tol: Tolerances) -> FormDiscrepancy {
    let n_max = selberg.len() - 1;
    let mut max_abs = 0.0;
    let mut worst_n = 1;
    let mut max_rel: f64 = 0.0;
    for k in 1..=n_max {
        let d = (mobius[k] - selberg[k]).abs();
        if d > max_abs {
            max_abs = d;
            worst_n = k as u64;
        }
        if k >= 2 {
            max_rel = max_rel.max(d / (k as f64).ln().powi(2));
        }
    }
    FormDiscrepancy {
        max_abs,
        worst_n,
        max_rel,
        threshold: tol.rel * (n_max as f64).ln().powi(2),
    }
}

/// Statistics of the pointwise forms of `2Λ(n)log(x/n) ≈ |Λ₂⁻(n)|` and
/// `2 log n ≈ Λ₂(n)`. These hold only on average; pointwise they fail badly
/// (Λ₂(30) = 0), so they are measured, never asserted.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct PointwiseResiduals {
    pub x: f64,
    /// `max_n |r₋(n)| / log(n+1)`
    pub minus_max: f64,
    pub minus_argmax: u64,
    /// mean over `n ≤ x` of `|r₋(n)| / log(n+1)`
    pub minus_mean: f64,
    /// `(1/x) Σ_{n≤x} r₋(n)`
    pub minus_average: f64,
    pub lambda2_max: f64,
    pub lambda2_argmax: u64,
    /// `(1/x) Σ_{n≤x} r₂(n)`
    pub lambda2_average: f64,
}

/// `r₋(n) = 2Λ(n) log(x/n) − |Λ₂⁻(n)|`, `r₂(n) = 2 log n − Λ₂(n)`, for n ≤ x.
pub fn pointwise_residuals(table: &ArithTable, x: f64) -> Result<PointwiseResiduals> {
    if !(x >= 2.0) {
        return Err(Error::range(format!("pointwise residuals need x >= 2, got {x}")));
    }
    if x.floor() > table.n_max as f64 {
        return Err(Error::Capability {
            what: "pointwise residuals".into(),
            cap: "conv_cap",
            needed: x.floor(),
            available: table.n_max as f64,
            max_usable: table.n_max as f64,
        });
    }
    let n_top = x.floor() as usize;
    let log_x = x.ln();
    let mut minus_sum = NeumaierSum::new();
    let mut minus_abs_norm = NeumaierSum::new();
    let mut lambda2_sum = NeumaierSum::new();
    let (mut minus_max, mut minus_argmax) = (0.0f64, 1u64);
    let (mut lambda2_max, mut lambda2_argmax) = (0.0f64, 1u64);
    for n in 1..=n_top {
        let log_n = (n as f64).ln();
        let r_minus = 2.0 * table.lambda[n] * (log_x - log_n) - table.lambda2_minus[n].abs();
        let r_lambda2 = 2.0 * log_n - table.lambda2[n];
        let norm = ((n + 1) as f64).ln();
        let rmn = r_minus.abs() / norm;
        if rmn > minus_max {
            minus_max = rmn;
            minus_argmax = n as u64;
        }
        if r_lambda2.abs() > lambda2_max {
            lambda2_max = r_lambda2.abs();
            lambda2_argmax = n as u64;
        }
        minus_sum += r_minus;
        minus_abs_norm += rmn;
        lambda2_sum += r_lambda2;
    }
    Ok(PointwiseResiduals {
        x,
        minus_max,
        minus_argmax,
        minus_mean: minus_abs_norm.sum() / n_top as f64,
        minus_average: minus_sum.sum() / x,
        lambda2_max,
        lambda2_argmax,
        lambda2_average: lambda2_sum.sum() / x,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table(n: u64, method: Lambda2Method) -> ArithTable {
        ArithTable::build(n, method, Tolerances::default()).unwrap()
    }

    fn naive_convolve(f: &[f64], g: &[f64], n: usize) -> f64 {
        (1..=n).filter(|d| n.is_multiple_of(*d)).map(|d| f[d] * g[n / d]).sum()
    }

    #[test]
    fn identity_element() {
        let mut e = vec![0.0; 101];
        e[1] = 1.0;
        let c = convolve_prefix(&e, &e, 100).unwrap();
        assert_eq!(c[1], 1.0);
        assert!(c[2..].iter().all(|&v| v == 0.0));
    }

    #[test]
    fn rejects_empty_range() {
        assert!(matches!(convolve_prefix(&[0.0], &[0.0], 0), Err(Error::Range(_))));
    }

    #[test]
    fn lambda_self_convolution_at_12() {
        let t = table(100, Lambda2Method::SelbergForm);
        let want = 2.0 * 2f64.ln() * 3f64.ln();
        assert!((t.lambda_conv()[12] - want).abs() < 1e-14);
    }

    #[test]
    fn blocked_matches_naive_divisor_sum() {
        // spans several blocks and both loop phases
        let n = 3 * BLOCK + 17;
        let f: Vec<f64> = (0..=n).map(|k| ((k * 7919) % 13) as f64 - 6.0).collect();
        let g: Vec<f64> = (0..=n).map(|k| if k % 5 == 0 { 0.0 } else { (k as f64).sqrt() }).collect();
        let c = convolve_prefix(&f, &g, n as u64).unwrap();
        for k in [1, 2, 360, 65_535, 65_536, 65_537, 131_072, 150_000, n] {
            let want = naive_convolve(&f, &g, k);
            assert!((c[k] - want).abs() <= 1e-9 * (1.0 + want.abs()), "n={k}: {} vs {want}", c[k]);
        }
    }

    #[test]
    fn mobius_log_is_von_mangoldt() {
        let t = table(10_000, Lambda2Method::SelbergForm);
        let f: Vec<f64> = t.mu().iter().map(|&m| m as f64).collect();
        let g: Vec<f64> = (0..=10_000).map(|m| if m == 0 { 0.0 } else { (m as f64).ln() }).collect();
        let c = convolve_prefix(&f, &g, 10_000).unwrap();
        for (n, (a, b)) in c.iter().zip(t.lambda()).enumerate() {
            assert!((a - b).abs() < 1e-12, "n={n}");
        }
    }

    #[test]
    fn lambda2_hand_values_both_forms() {
        let t = table(1000, Lambda2Method::Both);
        let l2 = 2f64.ln();
        let l3 = 3f64.ln();
        assert_eq!(t.lambda2()[1], 0.0);
        assert!((t.lambda2()[4] - 3.0 * l2 * l2).abs() < 1e-12);
        assert!((t.lambda2()[12] - 2.0 * l2 * l3).abs() < 1e-12);
        let m = table(1000, Lambda2Method::MobiusForm);
        let mob12 = 12f64.ln().powi(2) - 6f64.ln().powi(2) - 4f64.ln().powi(2) + 2f64.ln().powi(2);
        assert!((m.lambda2()[12] - mob12).abs() < 1e-12);
        assert!((m.lambda2()[12] - 2.0 * l2 * l3).abs() < 1e-12);
        assert!(m.lambda2()[1].abs() < 1e-15);
        assert!(t.form_check().unwrap().max_abs < 1e-11);
    }

    #[test]
    fn theta_and_minus_columns() {
        let t = table(5000, Lambda2Method::SelbergForm);
        assert_eq!(t.theta()[1], 0.0);
        for n in 2..=5000 {
            let log_n = (n as f64).ln();
            assert!((t.theta()[n] * log_n - t.lambda_conv()[n]).abs() <= 1e-9 * log_n * log_n);
            assert_eq!(t.lambda2_minus()[n], t.lambda_conv()[n] - t.lambda()[n] * log_n);
            assert!(t.lambda2()[n] >= 0.0);
        }
    }

    #[test]
    fn pointwise_fourteen_fails_at_thirty() {
        let t = table(1000, Lambda2Method::SelbergForm);
        assert_eq!(t.lambda2()[30], 0.0);
        let r = pointwise_residuals(&t, 30.0).unwrap();
        assert!(r.lambda2_max >= 2.0 * 30f64.ln() - 1e-12);
        assert!(matches!(pointwise_residuals(&t, 1.5), Err(Error::Range(_))));
        assert!(matches!(pointwise_residuals(&t, 2000.0), Err(Error::Capability { .. })));
    }

    #[test]
    fn csv_columns() {
        let t = table(20, Lambda2Method::SelbergForm);
        let mut buf = Vec::new();
        t.write_csv(&mut buf, [1, 4], &Column::ALL).unwrap();
        let s = String::from_utf8(buf).unwrap();
        let mut lines = s.lines();
        assert_eq!(lines.next(), Some("n,mu,lambda,lambda2,lambda2_minus,theta"));
        assert_eq!(lines.next(), Some("1,1,0,0,0,0"));
        assert!(lines.next().unwrap().starts_with("4,0,0.69314718055994529,1.4413590417546"));
    }
}
