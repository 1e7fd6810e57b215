//! Intervals between zeros: a synthetic profile with known answers, then the table profile.

use mlab::h_analysis::{analyze_intervals, build_profile, ParabolicArches, ProfileSource, TableSource};
use mlab::identities::geometric_grid_to;
use mlab::sieve::SegmentedSieve;
use mlab::summatory::{x_of_y, PrefixSums, ProfileKind};

fn main() -> mlab::Result<()> {
    let arches = ParabolicArches::new(vec![0.0, 1.0, 2.0, 3.5, 4.0, 6.0], vec![0.8, 0.5, 0.3, 0.9, 0.4])?;
    let xs: Vec<f64> = (0..=600).map(|i| 6.0 * i as f64 / 600.0).collect();
    let profile = build_profile(&arches, &xs)?;
    let a = analyze_intervals(&arches, &profile, 0.5)?;
    println!("synthetic zeros {:?}", profile.zeros);
    for (i, iv) in a.intervals.iter().enumerate() {
        println!("  [{}, {}] integral {:.12} (closed form {:.12})", iv.a, iv.b, iv.integral_abs, arches.arch_integral(i + 1));
    }

    let sums = PrefixSums::build(&SegmentedSieve::new(100_000, 1 << 16)?, 64, None)?;
    let source = TableSource::new(&sums, ProfileKind::Smoothed, 1e5)?;
    let xs: Vec<f64> = geometric_grid_to(1.0, 1.02, 1e5).into_iter().map(x_of_y).collect();
    let profile = build_profile(&source, &xs)?;
    let a = analyze_intervals(&source, &profile, 0.5)?;
    let c = &a.constants;
    println!("{}: {} intervals on [0, {:.3}]", source.label(), a.intervals.len(), source.x_max());
    println!("  alpha_hat {:.6}  ell_hat {:.6}  L_hat {:.6}  M_hat {:.6}", c.alpha_hat, c.ell_hat, c.L_hat, c.M_hat);
    println!("  m_hat {:?}  kappa {:?}  h {:.6}  epsilon {:.6}", c.m_hat, c.kappa, c.h_param, c.epsilon);
    println!("  slope bound violations: {}", a.slope_bound_violations().len());
    a.write_intervals_csv(std::io::stdout())?;
    Ok(())
}
