//! Segmented smallest-prime-factor sieve, Möbius and von Mangoldt columns,
//! checked against the linear sieve.

use mlab::sieve::{mobius_linear, SegmentedSieve};

fn main() -> mlab::Result<()> {
    let n_max = 1_000_000;
    let sieve = SegmentedSieve::new(n_max, 1 << 16)?;
    println!("{} segments over [1, {n_max}]", sieve.ranges().len());

    let mu = sieve.mobius_table()?;
    let linear = mobius_linear(n_max as usize);
    assert_eq!(mu, linear);
    println!("segmented and linear Möbius columns agree");

    sieve.for_each_segment(|seg| {
        if seg.lo() == 1 {
            println!("{:>4} {:>4} {:>4} {:>3} {:>10}", "n", "lpf", "mult", "mu", "Lambda");
            let lambda = seg.von_mangoldt();
            for (i, l) in lambda.iter().enumerate().take(12) {
                let n = seg.lo() + i as u64;
                println!("{n:>4} {:>4} {:>4} {:>3} {l:>10.6}", seg.lpf()[i], seg.lpf_mult()[i], mu[n as usize]);
            }
        }
        Ok(())
    })?;

    let primes = sieve.von_mangoldt_table()?.iter().enumerate().filter(|&(n, &l)| l > 0.0 && (l - (n as f64).ln()).abs() < 1e-12).count();
    println!("pi({n_max}) = {primes}");
    Ok(())
}
