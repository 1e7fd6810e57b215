use proptest::prelude::*;

use mlab::cache::SegmentCache;
use mlab::dirichlet::{convolve_prefix, ArithTable, Lambda2Method, Tolerances};
use mlab::format::g17;
use mlab::h_analysis::{analyze_intervals, build_profile, lambda_iteration, ParabolicArches};
use mlab::identities::{check_tatuzawa_iseki, FnTest};
use mlab::kahan;
use mlab::sieve::{mobius_linear, SegmentedSieve};
use mlab::summatory::{ln_factorial_range, log_kernel_abs_integral, log_kernel_integral, PrefixSums, ProfileKind};

fn sums(n: u64, stride: usize) -> PrefixSums {
    PrefixSums::build(&SegmentedSieve::new(n, 1000).unwrap(), stride, None).unwrap()
}

fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    let h = (b - a) / n as f64;
    let inner: f64 = (1..n).map(|i| f(a + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 }).sum();
    (f(a) + f(b) + inner) * h / 3.0
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn segment_size_does_not_change_the_sieve(n in 2u64..6000, seg in 1usize..700) {
        let mu = SegmentedSieve::new(n, seg).unwrap().mobius_table().unwrap();
        prop_assert_eq!(mu, mobius_linear(n as usize));
    }

    #[test]
    fn mertens_is_exact_between_checkpoints(stride in 1usize..200, x in 1.0f64..20_000.0) {
        let s = sums(20_000, stride);
        let direct: i64 = s.mu_column()[1..=x as usize].iter().map(|&m| m as i64).sum();
        prop_assert_eq!(s.mertens(x).unwrap(), direct);
    }

    #[test]
    fn smoothed_sum_routes_agree(x in 1.0f64..50_000.0) {
        let s = sums(50_000, 64);
        let a = s.big_f(x).unwrap();
        let b = s.big_f_integral(x).unwrap();
        prop_assert!((a - b).abs() <= 1e-9 * a.abs().max(1.0), "{a} vs {b}");
    }

    #[test]
    fn profile_is_bounded_by_one(y in 1.0f64..50_000.0) {
        let s = sums(50_000, 64);
        prop_assert!(s.h_smoothed(y).unwrap().abs() <= 1.0 + 1e-12);
        prop_assert!(s.h_mertens(y).unwrap().abs() <= 1.0);
    }

    #[test]
    fn tatuzawa_iseki_holds_for_polynomials(c0 in -2.0f64..2.0, c1 in -1.0f64..1.0, x in 1.0f64..3000.0) {
        let s = sums(3000, 64);
        let f = FnTest { name: "poly".into(), f: move |y: f64| c0 + c1 * y };
        let c = check_tatuzawa_iseki(&s, &f, x, Tolerances::default()).unwrap();
        prop_assert!(c.passed(), "{c:?}");
    }

    #[test]
    fn arch_constants_match_the_closed_form(widths in prop::collection::vec(0.1f64..3.0, 1..7), heights in prop::collection::vec(0.05f64..2.0, 7)) {
        let mut zeros = vec![0.0];
        for w in &widths {
            zeros.push(zeros.last().unwrap() + w);
        }
        let heights = heights[..widths.len()].to_vec();
        let arches = ParabolicArches::new(zeros.clone(), heights).unwrap();
        let x_max = *zeros.last().unwrap();
        let xs: Vec<f64> = (0..=400).map(|i| x_max * i as f64 / 400.0).collect();
        let a = analyze_intervals(&arches, &build_profile(&arches, &xs).unwrap(), 0.5).unwrap();

        let mut cum = vec![0.0f64];
        for i in 0..widths.len() {
            let s = if i % 2 == 0 { 1.0 } else { -1.0 };
            cum.push(cum.last().unwrap() + s * arches.arch_integral(i));
        }
        let hi = cum.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let lo = cum.iter().copied().fold(f64::INFINITY, f64::min);
        prop_assert!((a.constants.M_hat - (hi - lo)).abs() <= 1e-9 * (hi - lo).max(1e-12));
        for (i, iv) in a.intervals.iter().enumerate() {
            let want = arches.arch_integral(i + 1);
            prop_assert!((iv.integral_abs - want).abs() <= 1e-9 * want);
        }
    }

    #[test]
    fn lambda_recurrence_contracts(lambda in 0.01f64..0.99, steps in 1usize..80) {
        let it = lambda_iteration(lambda, steps, 1.0).unwrap();
        for w in it.steps.windows(2) {
            prop_assert!(w[1].lambda_k >= w[0].lambda_k);
            let lhs = (it.limit - w[1].lambda_k).abs();
            let rhs = lambda * (it.limit - w[0].lambda_k).abs();
            prop_assert!(lhs <= rhs + 1e-12 * it.limit);
        }
    }

    #[test]
    fn convolution_matches_the_naive_sum(f in prop::collection::vec(-3.0f64..3.0, 2..300), g in prop::collection::vec(-3.0f64..3.0, 300)) {
        let n = f.len() - 1;
        let out = convolve_prefix(&f, &g, n as u64).unwrap();
        for m in 1..=n {
            let naive: f64 = (1..=m).filter(|d| m % d == 0).map(|d| f[d] * g[m / d]).sum();
            prop_assert!((out[m] - naive).abs() <= 1e-12 * (1.0 + naive.abs()) * m as f64);
        }
    }

    #[test]
    fn compensated_sum_is_exact_on_dyadic_terms(ks in prop::collection::vec(-1_000_000i64..1_000_000, 1..500), scale in -30i32..30) {
        let s = 2f64.powi(scale);
        let exact = ks.iter().sum::<i64>() as f64 * s;
        prop_assert_eq!(kahan::sum(ks.iter().map(|&k| k as f64 * s)), exact);
    }

    #[test]
    fn ln_factorial_ranges(a in 1u64..5000, len in 0u64..5000) {
        let b = a + len;
        let direct: f64 = kahan::sum((a..=b).map(|k| (k as f64).ln()));
        prop_assert!((ln_factorial_range(a, b) - direct).abs() <= 1e-9 * direct.max(1.0));
    }

    #[test]
    fn log_kernel_matches_quadrature(m in -5.0f64..5.0, a in -8.0f64..8.0, u0 in 1.0f64..40.0, w in 0.01f64..30.0) {
        let u1 = u0 + w;
        let f = |u: f64| (m * u.ln() - a) * u.ln() / (u * u);
        let signed = simpson(f, u0, u1, 2000);
        prop_assert!((log_kernel_integral(m, a, u0, u1) - signed).abs() <= 1e-8 * (1.0 + signed.abs()));
        let abs = log_kernel_abs_integral(m, a, u0, u1);
        let mut pts = vec![u0, u1];
        if m != 0.0 {
            let z = (a / m).exp();
            if z > u0 && z < u1 {
                pts.insert(1, z);
            }
        }
        let quad: f64 = pts.windows(2).map(|p| simpson(f, p[0], p[1], 2000).abs()).sum();
        prop_assert!((abs - quad).abs() <= 1e-8 * (1.0 + quad));
    }

    #[test]
    fn g17_round_trips(v in any::<f64>().prop_filter("finite", |v| v.is_finite())) {
        prop_assert_eq!(g17(v).parse::<f64>().unwrap(), v);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn cached_segments_reproduce_the_sieve(n in 2u64..50_000, seg in 100usize..20_000) {
        let dir = tempfile::tempdir().unwrap();
        let plain = SegmentedSieve::new(n, seg).unwrap().mobius_table().unwrap();
        for _ in 0..2 {
            let cached = SegmentedSieve::new(n, seg).unwrap().with_cache(SegmentCache::new(dir.path()).unwrap());
            prop_assert_eq!(&cached.mobius_table().unwrap(), &plain);
        }
    }

    #[test]
    fn both_selberg_forms_agree(n in 2u64..20_000) {
        let t = ArithTable::build(n, Lambda2Method::Both, Tolerances::default()).unwrap();
        let c = t.form_check().unwrap();
        prop_assert!(c.max_abs <= c.threshold);
    }

    #[test]
    fn step_zeros_are_sign_changes_or_roots(y_max in 20.0f64..5000.0) {
        let s = sums(5000, 64);
        let src = mlab::h_analysis::TableSource::new(&s, ProfileKind::Mertens, y_max).unwrap();
        use mlab::h_analysis::ProfileSource;
        for z in src.zeros().unwrap() {
            let k = z.sqrt().exp().round();
            let m = s.mertens(k).unwrap();
            let before = s.mertens(k - 1.0).unwrap();
            prop_assert!(m == 0 || m.signum() != before.signum(), "zero at y = {k}");
        }
    }
}
