//! Frozen values from a 40-digit reference evaluation, plus brute-force
//! oracles written independently of the library code paths.

#![allow(clippy::excessive_precision)]

use mlab::dirichlet::{ArithTable, Lambda2Method, Tolerances};
use mlab::h_analysis::{h_derivative, ProfileSource, TableSource};
use mlab::identities::{check_tatuzawa_iseki, Log, One, TestFunction};
use mlab::sieve::SegmentedSieve;
use mlab::summatory::{x_of_y, PrefixSums, ProfileKind};

fn sums(n: u64) -> PrefixSums {
    let table = ArithTable::build(n.min(10_000), Lambda2Method::Both, Tolerances::default()).unwrap();
    PrefixSums::build(&SegmentedSieve::new(n, 4096).unwrap(), 16, Some(&table)).unwrap()
}

fn close(got: f64, want: f64, rel: f64) {
    assert!((got - want).abs() <= rel * want.abs().max(1.0), "got {got:e}, want {want:e}");
}

fn trial_division_mu(mut n: u64) -> i64 {
    let mut mu = 1;
    let mut d = 2;
    while d * d <= n {
        if n.is_multiple_of(d) {
            n /= d;
            if n.is_multiple_of(d) {
                return 0;
            }
            mu = -mu;
        }
        d += 1;
    }
    if n > 1 {
        mu = -mu;
    }
    mu
}

#[test]
fn mertens_matches_trial_division() {
    let s = sums(100_000);
    let mut m = 0;
    for n in 1..=100_000u64 {
        m += trial_division_mu(n);
        if n.is_power_of_two() || n % 9973 == 0 || n == 100_000 {
            assert_eq!(s.mertens(n as f64).unwrap(), m, "M({n})");
        }
    }
    assert_eq!(m, -48);
}

#[test]
fn selberg_weight_hand_values() {
    let t = ArithTable::build(100, Lambda2Method::Both, Tolerances::default()).unwrap();
    close(t.lambda2()[4], 1.441359041754604274, 1e-14);
    close(t.lambda2()[12], 1.5230000208376179729, 1e-14);
    assert_eq!(t.lambda2()[30], 0.0);
}

#[test]
fn summatory_reference_values() {
    let s = sums(10_000);
    close(s.sum_lambda2(10.0).unwrap(), 19.282884394108426937, 1e-13);
    close(s.sum_lambda2(100.0).unwrap(), 602.97017506025916073, 1e-13);
    close(s.sum_theta(100.0).unwrap(), 67.524153154754266047, 1e-13);
    close(s.psi(100.0).unwrap(), 94.045311229357392246, 1e-14);
    close(s.big_f(4.0).unwrap(), 0.40546510810816438198, 1e-14);
    close(s.big_f(100.0).unwrap(), -5.4122408393339780559, 1e-13);
    close(s.big_f(1234.5).unwrap(), -10.998640338062491824, 1e-13);
    close(s.big_f_integral(1234.5).unwrap(), -10.998640338062491824, 1e-12);
    let (_, rem) = s.lambda_over_n_sum(3.0).unwrap();
    close(rem, -0.38583460216543380622, 1e-14);
}

#[test]
fn profile_reference_values() {
    let s = sums(1000);
    close(s.h_smoothed(2.0).unwrap(), 0.34657359027997265471, 1e-14);
    close(s.h_smoothed(10.0).unwrap(), -0.10498221244986776883, 1e-13);
    close(h_derivative(&s, 2.5).unwrap().value, -0.15129415947320600589, 1e-12);
    let k = s.kernel_integrals(ProfileKind::Smoothed, &[20.0]).unwrap()[0];
    close(2.0 * k.signed, -0.072026885824741895006, 1e-11);
    close(2.0 * k.abs, 1.0717694878461377461, 1e-11);
    let src = TableSource::new(&s, ProfileKind::Smoothed, 1000.0).unwrap();
    let k = src.integrals(&[x_of_y(20.0)]).unwrap()[0];
    close(k.signed, -0.072026885824741895006, 1e-11);
    close(k.abs, 1.0717694878461377461, 1e-11);
    assert!((x_of_y(20.0) - 20f64.ln().powi(2)).abs() < 1e-15);
}

#[test]
fn tatuzawa_iseki_reference_values() {
    let s = sums(1000);
    let c = check_tatuzawa_iseki(&s, &One, 4.0, Tolerances::default()).unwrap();
    close(c.lhs, 3.8712010109078909291, 1e-14);
    close(c.rhs, 3.8712010109078909291, 1e-14);
    close(Log.g(7.5), 11.241465898311487100, 1e-14);
}
