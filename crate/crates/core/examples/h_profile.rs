//! The normalized profile 𝓗(x) = 𝓕(e^√x)/e^√x and the Mertens analogue, with zeros.

use mlab::h_analysis::{build_table_profile, h_derivative};
use mlab::sieve::SegmentedSieve;
use mlab::summatory::{PrefixSums, ProfileKind};

fn main() -> mlab::Result<()> {
    let y_max = 1_000_000;
    let sums = PrefixSums::build(&SegmentedSieve::new(y_max, 1 << 18)?, 64, None)?;
    for kind in [ProfileKind::Smoothed, ProfileKind::Mertens] {
        let p = build_table_profile(&sums, kind, y_max as f64, 20)?;
        let sup = p.samples.iter().map(|s| s.h.abs()).fold(0.0, f64::max);
        let last = p.samples.last().expect("non-empty profile");
        println!(
            "{:<9} samples {:>4}  zeros {:>5}  sup|H| {:.6}  integral of |H| to {:.2}: {:.6}",
            kind.name(),
            p.samples.len(),
            p.zeros.len(),
            sup,
            last.x,
            last.cum_abs
        );
        println!("          first zeros {:?}", &p.zeros[..p.zeros.len().min(4)]);
    }
    let d = h_derivative(&sums, 2.5)?;
    println!("H'(x) at y = 2.5 (x = {:.6}): {:.15}", d.x, d.value);
    Ok(())
}
