//! The Tatuzawa–Iseki identity for built-in and custom test functions, and the
//! collapse Σ 𝓕(x/n) = log x.

use mlab::dirichlet::Tolerances;
use mlab::identities::{check_f_sum_identity, check_tatuzawa_iseki, floor_weighted_mu_sum, FnTest, Log, One, Smoothed, TestFunction};
use mlab::sieve::SegmentedSieve;
use mlab::summatory::PrefixSums;

fn main() -> mlab::Result<()> {
    let sums = PrefixSums::build(&SegmentedSieve::new(100_000, 1 << 16)?, 64, None)?;
    let tol = Tolerances::default();
    let sqrt = FnTest { name: "sqrt".into(), f: f64::sqrt };
    let smoothed = Smoothed(&sums);
    let fs: [&dyn TestFunction; 4] = [&One, &Log, &smoothed, &sqrt];

    for f in fs {
        for x in [4.0, 97.3, 5000.0] {
            let c = check_tatuzawa_iseki(&sums, f, x, tol)?;
            println!("{:>8} x={x:<7} lhs={:<22.15e} residual={:+.2e} ok={}", f.name(), c.lhs, c.residual, c.passed());
        }
    }
    for x in [10.0, 1e4, 1e5] {
        let c = check_f_sum_identity(&sums, x, tol)?;
        let d = floor_weighted_mu_sum(&sums, x, tol)?;
        println!("x={x:<8} sum F(x/n) - log x = {:+.2e}   floor-weighted residual = {:+.2e}", c.residual, d.residual);
    }
    Ok(())
}
