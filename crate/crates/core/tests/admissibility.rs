use num_bigint::BigInt;
use num_rational::BigRational;
use proptest::prelude::*;
use psieve::admissibility::growth::{check_growth, growth_lhs};
use psieve::admissibility::ssum::{mu_max, nu_last, omega_y_monotone, S1Inner};
use psieve::admissibility::*;
use psieve::funcsys::{make_preset, make_preset_with, FunctionSystem, PresetId};
use psieve::numerics::{ceil_pow, Dyadic, Interval, Precision, RefinableReal, XInterval};
use std::collections::BTreeMap;

fn q(p: i64, d: i64) -> BigRational {
    BigRational::new(p.into(), d.into())
}

fn pow2(k: i64) -> BigRational {
    if k >= 0 {
        BigRational::from_integer(BigInt::from(1) << k as usize)
    } else {
        BigRational::new(1.into(), BigInt::from(1) << (-k) as usize)
    }
}

fn overlaps(a: &XInterval, b: &Interval) -> bool {
    let a = a.to_interval();
    a.lo <= b.hi && b.lo <= a.hi
}

/// Exact-arithmetic `S1(X)`: every `mu`, arbitrary precision intervals.
fn s1_oracle(sys: &FunctionSystem, x: u64, eps: &BigRational, a: &BigRational) -> Interval {
    let e = Interval::from_rational(eps, 200);
    let mut acc = Interval::zero();
    for nu in x..=nu_last(x, a) {
        let nu = nu as i64;
        let w = sys.omega2().at(&Dyadic::pow2(nu + 1), 200).unwrap();
        assert_eq!(w.lo.floor_log2(), w.hi.floor_log2());
        for mu in 1..=w.lo.floor_log2() + 1 {
            let d = sys.delta1(mu, nu, &e, 160).unwrap();
            let om = sys.big_omega(&Interval::point(Dyadic::pow2(mu - 1)), &Interval::point(Dyadic::pow2(nu + 1)), 160).unwrap();
            let m = om.max(&Interval::point(Dyadic::pow2(nu - mu))).max(&Interval::one());
            acc = acc.add(&d.mul(&m, 160), 160);
        }
    }
    acc
}

#[test]
fn nu_range_boundaries() {
    assert_eq!(nu_last(1, &q(4, 1)), 7);
    assert_eq!(nu_last(3, &q(3, 2)), 5);
    assert_eq!(nu_last(2, &q(5, 4)), 3);
    assert_eq!(nu_last(10, &q(11, 10)), 12);
}

#[test]
fn ceil_pow_boundaries() {
    assert_eq!(ceil_pow(&BigInt::from(16), &q(3, 2)), BigInt::from(64));
    assert_eq!(ceil_pow(&BigInt::from(10), &q(1, 2)), BigInt::from(4));
    assert_eq!(ceil_pow(&(BigInt::from(1) << 16), &q(4, 1)), BigInt::from(1) << 64);
    assert_eq!(ceil_pow(&BigInt::from(7), &q(1, 1)), BigInt::from(7));
}

#[test]
fn mu_limit_matches_closed_form() {
    let s1 = make_preset(PresetId::Example1);
    // omega2(2^(nu+1)) = 3 2^(nu+1): floor log2 = nu + 2
    for nu in [1u64, 5, 100, 4_000_000] {
        assert_eq!(mu_max(&s1, nu).unwrap(), nu as i64 + 3);
    }
    let s = make_preset_with(PresetId::Example1, &[("gamma".to_string(), "2".to_string())].into()).unwrap();
    assert_eq!(mu_max(&s, 10).unwrap(), 13);
}

#[test]
fn fast_inner_sum_matches_exact_summation() {
    let eps = pow2(-14);
    for id in [PresetId::Example1, PresetId::Example2, PresetId::Example3, PresetId::Example4] {
        let s = make_preset(id);
        assert!(S1Inner::new(&s, &eps).unwrap().is_fast(), "{id:?}");
        for x in [4u64, 9, 16] {
            let got = sum_s1(x, &eps, &q(4, 1), &s).unwrap();
            let want = s1_oracle(&s, x, &eps, &q(4, 1));
            assert!(overlaps(&got, &want), "{id:?} X={x}: {got:?} vs {}", want.to_f64());
            assert!(got.rel_width() < 1e-9);
        }
    }
}

#[test]
fn scan_differences_match_direct_sums() {
    let s = make_preset(PresetId::Example1);
    let eps = pow2(-14);
    let a = q(7, 2);
    let mut seen = vec![];
    scan_s(&s, &eps, &a, 20, 60, |x, v| seen.push((x, v))).unwrap();
    assert_eq!(seen.len(), 41);
    for (x, v) in seen {
        let d = sum_s1(x, &eps, &a, &s).unwrap();
        assert!(v.lo <= d.hi && d.lo <= v.hi, "X={x}");
    }
}

#[test]
fn example1_respects_closed_form_bound() {
    // X >= gamma / eps with eps = 2^-8: X >= 768
    let s = make_preset(PresetId::Example1);
    let eps = pow2(-8);
    let bound = 16.0 * 2f64.powi(-8) * 8f64.ln();
    let r = check_sum_threshold(&s, &eps, &q(4, 1), 768, 1200).unwrap();
    assert!(r.sup.hi_f64 <= bound);
    assert_eq!(r.advisory_bound, Some(bound));
    assert_eq!(r.within_advisory, Some(true));
}

#[test]
fn example4_respects_closed_form_bound() {
    let s = make_preset(PresetId::Example4);
    let eps = pow2(-20);
    let v = sum_s1(2048, &eps, &q(4, 1), &s).unwrap();
    let bound = 32.0 * 2f64.powi(-20) * 8f64.ln() / 0.5;
    assert!(v.hi.to_f64() <= bound, "{} > {bound}", v.hi.to_f64());
}

#[test]
fn example4_threshold_at_corollary_epsilon() {
    // eps = 1/(2^20 (1 - a)) with a = 1/2
    let s = make_preset(PresetId::Example4);
    let r = check_sum_threshold(&s, &pow2(-19), &q(4, 1), 64, 2048).unwrap();
    assert!(r.ok, "{:?}", r.sup);
}

#[test]
fn doubling_eps_doubles_s() {
    let s = make_preset(PresetId::Example3);
    let a = sum_s1(50, &pow2(-12), &q(4, 1), &s).unwrap();
    let b = sum_s1(50, &pow2(-11), &q(4, 1), &s).unwrap();
    assert_eq!(a.shl(1), b);
}

#[test]
fn large_eps_fails_threshold() {
    let s = make_preset(PresetId::Example1);
    let r = check_sum_threshold(&s, &q(1, 4), &q(4, 1), 1 << 10, 1 << 11).unwrap();
    assert!(!r.ok);
    assert_eq!(r.violation_count, 1025);
}

#[test]
fn example6_s2_matches_closed_form() {
    let s = make_preset_with(PresetId::Example6, &[("Delta".to_string(), "1024".to_string())].into()).unwrap();
    let c = s.param("c").unwrap().clone();
    let c = c.numer().to_string().parse::<f64>().unwrap() / c.denom().to_string().parse::<f64>().unwrap();
    let eps = 2f64.powi(-4);
    let x = 40u64;
    let mut want = 0.0;
    for nu in x..=nu_last(x, &q(4, 1)) {
        let n = nu as f64;
        let r = eps / (1024.0 * 2f64.powf(n));
        let z = 2f64.powf(n + 1.0);
        let y = 1.0 / (2.0 * r);
        let om = c * (z * z.log2() / y).sqrt();
        want += eps / n.powf(1.5) * om.max(2f64.powf(n) * r).max(1.0);
    }
    let got = sum_s2(x, &pow2(-4), &q(4, 1), &s).unwrap();
    assert!((got.mid_f64() - want).abs() <= 1e-12 * want);
}

#[test]
fn example5_s2_is_of_order_eps_log_a() {
    let s = make_preset(PresetId::Example5);
    let eps = pow2(-10);
    let unit = 2f64.powi(-10) * 8f64.ln();
    let mut ratios = vec![];
    scan_s(&s, &eps, &q(4, 1), 16, 4096, |_, v| ratios.push(v.hi.to_f64() / unit)).unwrap();
    let (lo, hi) = ratios.iter().fold((f64::MAX, 0f64), |(a, b), &r| (a.min(r), b.max(r)));
    assert!(hi / lo < 4.0 && hi < 64.0, "{lo} {hi}");
}

#[test]
fn growth_condition_examples() {
    let s = make_preset(PresetId::Example1);
    let eps = pow2(-14);
    let p = Precision::default();
    // X0 / ln^2 X0 >= 1/eps holds at 2^24
    let r = check_growth(&s, &(BigInt::from(1) << 24), &eps, &q(4, 1), 256, p).unwrap();
    assert!(r.ok && r.failed_at.is_none());
    assert_eq!(r.certified_intervals, r.points.len() - 1);
    let r = check_growth(&s, &(BigInt::from(1) << 16), &eps, &q(4, 1), 64, p).unwrap();
    assert!(!r.ok);
    assert_eq!(r.failed_at.as_deref(), Some("65536"));
    let r = check_growth(&s, &(BigInt::from(1) << 24), &eps, &q(1, 1), 128, p).unwrap();
    assert!(!r.ok);
    let s6 = make_preset_with(PresetId::Example6, &[("Delta".to_string(), "1024".to_string())].into()).unwrap();
    let r = check_growth(&s6, &BigInt::from(1 << 10), &pow2(-4), &q(4, 1), 256, p).unwrap();
    assert!(r.ok);
}

#[test]
fn growth_lhs_closed_form() {
    // example1: log2(X phi(X) psi1(1/2) / (2 eps)) = log2(X * X log2(X)^2 / 2^-13 / 2)
    let s = make_preset(PresetId::Example1);
    let x = BigInt::from(1) << 20;
    let v = growth_lhs(&s, &x, &pow2(-14), 80).unwrap();
    let want = 20.0 + 20.0 + 2.0 * 20f64.log2() - 1.0 + 14.0 - 1.0;
    assert!((v.to_f64() - want).abs() < 1e-12);
}

fn golden_input<'a>(sys: &'a FunctionSystem, eps: BigRational, a: BigRational, direct: u64) -> TSumInput<'a> {
    TSumInput {
        sys,
        eps,
        a,
        alpha: RefinableReal::golden(),
        eta: RefinableReal::parse("0").unwrap(),
        direct,
        filter_homogeneous: false,
    }
}

#[test]
fn t1_direct_part_matches_float_oracle() {
    let s = make_preset(PresetId::Example1);
    let inp = golden_input(&s, pow2(-14), q(3, 2), 1 << 20);
    let r = sum_t(&inp, &BigInt::from(16)).unwrap();
    assert_eq!(r.end, "64");
    assert_eq!(r.shells, 0);
    let g = (1.0 + 5f64.sqrt()) / 2.0;
    let want: f64 = (16..64)
        .map(|x| {
            let x = x as f64;
            let d = ((x * g) - (x * g).round()).abs();
            2f64.powi(-14) / (x * x.log2().powi(2) * d)
        })
        .sum();
    assert!(r.direct_lo <= want * (1.0 + 1e-12) && want * (1.0 - 1e-12) <= r.direct_hi);
}

#[test]
fn shell_bound_dominates_direct_sum() {
    let s = make_preset(PresetId::Example1);
    for y in [16u64, 100, 1000] {
        let exact = sum_t(&golden_input(&s, pow2(-14), q(2, 1), u64::MAX / 4), &BigInt::from(y)).unwrap();
        let shells = sum_t(&golden_input(&s, pow2(-14), q(2, 1), 0), &BigInt::from(y)).unwrap();
        assert!(exact.direct_hi <= shells.upper_f64, "Y={y}");
        assert!(shells.upper_f64 <= 40.0 * exact.direct_hi, "Y={y}: shells too loose");
    }
}

#[test]
fn t_sum_bridge_for_admissible_configuration() {
    let s = make_preset(PresetId::Example1);
    let eps = pow2(-14);
    assert!(check_sum_threshold(&s, &eps, &q(4, 1), 1 << 12, 1 << 13).unwrap().ok);
    for k in [12u32, 13] {
        let r = sum_t(&golden_input(&s, eps.clone(), q(4, 1), 1 << 12), &(BigInt::from(1) << k)).unwrap();
        assert!(r.ok, "{r:?}");
    }
}

#[test]
fn t2_filter_rejecting_everything_is_zero() {
    let s = make_preset_with(PresetId::Example6, &[("Delta".to_string(), "1024".to_string())].into()).unwrap();
    let r = sum_t(&golden_input(&s, pow2(-5), q(4, 1), 1 << 12), &(BigInt::from(1) << 12)).unwrap();
    assert_eq!(r.upper, "0");
    assert!(r.ok);
}

#[test]
fn t2_counts_filtered_terms() {
    // Delta = 2: ||x alpha - 1/3|| <= eps / (2x) happens for some x
    let mut p = BTreeMap::new();
    p.insert("Delta".to_string(), "2".to_string());
    let s = make_preset_with(PresetId::Example6, &p).unwrap();
    let mut inp = golden_input(&s, q(1, 2), q(2, 1), 1 << 20);
    inp.eta = RefinableReal::parse("1/3").unwrap();
    let r = sum_t(&inp, &BigInt::from(8)).unwrap();
    let g = (1.0 + 5f64.sqrt()) / 2.0;
    let want: f64 = (8..64)
        .filter(|&x| {
            let v = x as f64 * g - 1.0 / 3.0;
            2.0 * x as f64 * (v - v.round()).abs() <= 0.5
        })
        .map(|x| 0.5 / (x as f64).log2().powf(1.5))
        .sum();
    assert!(want > 0.0);
    assert!((r.direct_hi - want).abs() < 1e-9 * want, "{} vs {want}", r.direct_hi);
}

#[test]
fn shape_assumption_holds_for_product_presets() {
    for id in [PresetId::Example1, PresetId::Example2, PresetId::Example3, PresetId::Example4] {
        assert!(omega_y_monotone(&make_preset(id), 128).unwrap(), "{id:?}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn s_is_monotone_in_eps(k in 6i64..20, d in 1i64..4, x in 4u64..200) {
        let s = make_preset(PresetId::Example2);
        let small = sum_s1(x, &pow2(-k - d), &q(4, 1), &s).unwrap();
        let big = sum_s1(x, &pow2(-k), &q(4, 1), &s).unwrap();
        prop_assert!(small.hi <= big.lo);
    }

    #[test]
    fn t_is_monotone_in_eps(k in 6i64..20, y in 8u64..64) {
        let s = make_preset(PresetId::Example1);
        let small = sum_t(&golden_input(&s, pow2(-k - 1), q(2, 1), 256), &BigInt::from(y)).unwrap();
        let big = sum_t(&golden_input(&s, pow2(-k), q(2, 1), 256), &BigInt::from(y)).unwrap();
        prop_assert!(small.upper_f64 <= big.upper_f64);
    }
}
