//! Remainder series of the asymptotic statements and their per-decade sups.

use mlab::dirichlet::{ArithTable, Lambda2Method, Tolerances};
use mlab::identities::{geometric_grid_to, remainder_series, worst_decade_growth, RemainderKind};
use mlab::sieve::SegmentedSieve;
use mlab::summatory::PrefixSums;

fn main() -> mlab::Result<()> {
    let n = 1_000_000;
    let table = ArithTable::build(n, Lambda2Method::SelbergForm, Tolerances::default())?;
    let sums = PrefixSums::build(&SegmentedSieve::new(n, 1 << 18)?, 64, Some(&table))?;
    let xs = geometric_grid_to(10.0, 1.05, n as f64);

    for kind in RemainderKind::ALL {
        let xs: Vec<f64> = if kind.h_axis() { xs.iter().map(|x| x.ln().powi(2)).filter(|&x| x >= kind.x_lower()).collect() } else { xs.clone() };
        let s = remainder_series(&sums, kind, &xs, Tolerances::default())?;
        let decades = s.decade_sups(2, 6);
        let growth = if decades.len() > 1 { format!("{:.3}", worst_decade_growth(&decades)) } else { "-".into() };
        println!("{:<20} {:<22} sup {:>9.5} at x = {:<12.6} worst decade growth {growth}", kind.name(), s.normalization, s.sup_normalized, s.argmax_x);
    }
    Ok(())
}
