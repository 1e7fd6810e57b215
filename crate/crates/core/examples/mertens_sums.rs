//! M(x), the smoothed sum 𝓕(x) by both routes, ψ(x) and the Λ₂ sum.

use mlab::dirichlet::{ArithTable, Lambda2Method, Tolerances};
use mlab::sieve::SegmentedSieve;
use mlab::summatory::{PrefixSums, DEFAULT_CHECKPOINT_STRIDE};

fn main() -> mlab::Result<()> {
    let n_max = 1_000_000;
    let sieve = SegmentedSieve::new(n_max, 1 << 18)?;
    let table = ArithTable::from_sieve(&SegmentedSieve::new(10_000, 1 << 18)?, Lambda2Method::SelbergForm, Tolerances::default())?;
    let sums = PrefixSums::build(&sieve, DEFAULT_CHECKPOINT_STRIDE, Some(&table))?;

    for k in 1..=6 {
        let x = 10f64.powi(k);
        println!("M(10^{k}) = {}", sums.mertens(x)?);
    }
    for x in [10.0, 1234.5, 99_999.9, 1e6] {
        let a = sums.big_f(x)?;
        let b = sums.big_f_integral(x)?;
        println!("F({x}) = {a:.12} (sum) {b:.12} (integral), psi = {:.6}", sums.psi(x)?);
    }
    println!("sum Lambda2(n), n <= 10 = {:.15}", sums.sum_lambda2(10.0)?);
    sums.write_csv(std::io::stdout(), &[2.0, 3.5, 100.0])?;
    Ok(())
}
