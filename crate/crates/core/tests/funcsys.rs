use num_bigint::BigInt;
use num_rational::BigRational;
use proptest::prelude::*;
use psieve::funcsys::expr::Expr;
use psieve::funcsys::presets::{make_preset_with, PresetId};
use psieve::funcsys::validate::{inverse_roundtrip, monotone_on_grid, omega_grid};
use psieve::funcsys::{make_preset, preset_from_name, FunctionSystem, SystemError};
use psieve::numerics::{Interval, Precision};
use std::collections::BTreeMap;

fn eps(k: i64) -> Interval {
    Interval::pow2(-k)
}

fn close(got: &Interval, want: f64, rel: f64) -> bool {
    let (lo, hi) = (got.lo.to_f64(), got.hi.to_f64());
    (lo - want).abs() <= rel * want && (hi - want).abs() <= rel * want
}

fn params(kv: &[(&str, &str)]) -> BTreeMap<String, String> {
    kv.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect()
}

#[test]
fn example1_delta1_closed_form() {
    let s = make_preset(PresetId::Example1);
    let e = eps(14);
    for nu in 2..40i64 {
        for mu in 1..=nu {
            let d = s.delta1(mu, nu, &e, 96).unwrap();
            let want = 2.0 * 2f64.powi(-14) * 2f64.powi((mu - nu) as i32) / (nu * nu) as f64;
            assert!(close(&d, want, 1e-12), "mu={mu} nu={nu}");
        }
    }
}

#[test]
fn delta1_at_mu_equal_nu() {
    let s = make_preset(PresetId::Example3);
    let e = eps(10);
    let nu = 9;
    let d = s.delta1(nu, nu, &e, 96).unwrap();
    let want = 2f64.powi(-10) / (512.0 * 81.0 * 2f64.powi(-10));
    assert!(close(&d, want, 1e-12));
}

#[test]
fn example4_delta1_closed_form() {
    let s = make_preset(PresetId::Example4);
    let e = eps(20);
    for nu in 2..30i64 {
        for mu in 1..=nu {
            let d = s.delta1(mu, nu, &e, 96).unwrap();
            let want = 2.0 * 2f64.powi(-20) * 2f64.powi((mu - nu) as i32)
                / ((nu as f64).powf(1.5) * ((mu + 1) as f64).sqrt());
            assert!(close(&d, want, 1e-12), "mu={mu} nu={nu}");
        }
    }
}

#[test]
fn example4_with_a_zero_matches_example1() {
    let s4 = make_preset_with(PresetId::Example4, &params(&[("a", "0")])).unwrap();
    let s1 = make_preset(PresetId::Example1);
    let e = eps(14);
    for nu in [3i64, 10, 33] {
        for mu in [1i64, 2, nu] {
            let a = s4.delta1(mu, nu, &e, 80).unwrap();
            let b = s1.delta1(mu, nu, &e, 80).unwrap();
            assert!(close(&a, b.mid().to_f64(), 1e-15));
        }
    }
}

#[test]
fn example5_delta2_and_r_eps() {
    let s = make_preset(PresetId::Example5);
    let e = eps(8);
    for nu in 2..50i64 {
        let base = (nu as f64) * 2f64.powi(nu as i32);
        let want = 2f64.powi(-8) / base.sqrt();
        assert!(close(&s.delta2(nu, &e, 96).unwrap(), want, 1e-12));
        assert!(close(&s.r_eps(nu, &e, 96).unwrap(), want, 1e-12));
    }
}

#[test]
fn example6_delta2_and_r_eps() {
    let s = make_preset(PresetId::Example6);
    let e = eps(5);
    for nu in 2..60i64 {
        let d2 = 2f64.powi(-5) / (nu as f64).powf(1.5);
        assert!(close(&s.delta2(nu, &e, 96).unwrap(), d2, 1e-12));
        let r = 2f64.powi(-5) / (8.0 * 2f64.powi(nu as i32));
        assert!(close(&s.r_eps(nu, &e, 96).unwrap(), r, 1e-12));
    }
}

#[test]
fn sigma_matches_independent_evaluation() {
    // 2^-14 / (100 log2(100)^2 0.01), evaluated separately at 40 digits.
    let want = 1.382737095481209368765910559355233e-6;
    let s = make_preset(PresetId::Example1);
    let dist = Interval::from_rational(&BigRational::new(1.into(), 100.into()), 200);
    let got = s.sigma(&Interval::int(100), &dist, &eps(14), 120).unwrap();
    assert!(close(&got, want, 1e-15));
    assert!(got.width().to_f64() < 1e-30);
}

#[test]
fn sigma_at_dyadic_points_matches_deltas() {
    let s1 = make_preset(PresetId::Example1);
    let e = eps(14);
    let (nu, mu) = (12i64, 5i64);
    let sig = s1.sigma(&Interval::pow2(nu), &Interval::pow2(-mu - 1), &e, 96).unwrap();
    let d = s1.delta1(mu, nu, &e, 96).unwrap();
    assert!(close(&sig, d.mid().to_f64(), 1e-20));

    let s6 = make_preset(PresetId::Example6);
    let sig = s6.sigma(&Interval::pow2(nu), &Interval::zero(), &e, 96).unwrap();
    let d = s6.delta2(nu, &e, 96).unwrap();
    assert!(close(&sig, d.mid().to_f64(), 1e-20));
}

#[test]
fn preset_modes_and_identity_psi2() {
    let s1 = make_preset(PresetId::Example1);
    assert!(s1.psi2_is_identity());
    assert!(s1.phi.is_some() && s1.phi1.is_none());
    let s6 = make_preset(PresetId::Example6);
    assert!(s6.phi1.is_some() && s6.phi2.is_some());
    assert!(s6.delta1(1, 4, &eps(3), 64).is_err());
}

#[test]
fn parameter_ranges_enforced() {
    for (name, kv) in [
        ("example1", vec![("gamma", "1")]),
        ("example4", vec![("a", "1")]),
        ("example4", vec![("a", "-1/2")]),
        ("example5", vec![("u", "1/3")]),
        ("example6", vec![("Delta", "1")]),
        ("example2", vec![("c", "0")]),
        ("example1", vec![("zeta", "2")]),
    ] {
        let r = preset_from_name(name, &params(&kv));
        assert!(matches!(r, Err(SystemError::ParamRange(_))), "{name} {kv:?}");
    }
    assert!(preset_from_name("example7", &BTreeMap::new()).is_err());
}

#[test]
fn omega_implication_holds_on_grid() {
    for id in PresetId::ALL {
        let s = make_preset(id);
        let r = omega_grid(&s, 1 << 10, Precision::default()).unwrap();
        assert!(r.violations.is_empty(), "{id:?}: {:?}", &r.violations[..r.violations.len().min(5)]);
        assert_eq!(r.checked, 1 << 20);
    }
}

#[test]
fn reciprocal_gamma_omega_is_too_small() {
    let mut spec = make_preset(PresetId::Example1).spec.clone();
    spec.big_omega = "sqrt(z/(gamma*y))".into();
    let s = FunctionSystem::from_spec(&spec).unwrap();
    let r = omega_grid(&s, 64, Precision::default()).unwrap();
    assert!(r.violations.contains(&(1, 1, 1)));
}

#[test]
fn derived_c_matches_frozen_value() {
    let defaults = make_preset(PresetId::Example6);
    let fresh = make_preset_with(PresetId::Example6, &params(&[("gamma", "2")])).unwrap();
    assert_eq!(defaults.param("c"), fresh.param("c"));
    let other = make_preset_with(PresetId::Example6, &params(&[("gamma", "8")])).unwrap();
    assert!(omega_grid(&other, 256, Precision::default()).unwrap().violations.is_empty());
}

#[test]
fn functions_increase_on_grid() {
    for id in PresetId::ALL {
        let s = make_preset(id);
        let mut fs = vec![("omega1", &s.omega1), ("psi2", &s.psi2)];
        for (n, f) in [("omega2", &s.omega2), ("phi", &s.phi), ("phi1", &s.phi1), ("phi2", &s.phi2)] {
            if let Some(f) = f {
                fs.push((n, f));
            }
        }
        for (n, f) in fs {
            let r = monotone_on_grid(n, f, -120, 120, 80);
            assert!(r.decreases.is_empty() && r.not_strict == 0, "{id:?} {n}: {r:?}");
        }
        // psi1 of example 4 is only checked well inside (0, 1/2).
        let hi = if id == PresetId::Example4 { -8 } else { 120 };
        let r = monotone_on_grid("psi1", &s.psi1, -120, hi, 80);
        assert!(r.decreases.is_empty() && r.not_strict == 0, "{id:?} psi1: {r:?}");
    }
}

#[test]
fn inverses_round_trip() {
    for id in PresetId::ALL {
        let s = make_preset(id);
        let mut fs = vec![("omega1", &s.omega1), ("psi1", &s.psi1), ("psi2", &s.psi2)];
        for (n, f) in [("omega2", &s.omega2), ("phi", &s.phi), ("phi1", &s.phi1), ("phi2", &s.phi2)] {
            if let Some(f) = f {
                fs.push((n, f));
            }
        }
        for (n, f) in fs {
            let hi = if id == PresetId::Example4 && n == "psi1" { -4 } else { 30 };
            let r = inverse_roundtrip(f, -30, hi, 64);
            assert!(!r.is_empty());
            let bad: Vec<_> = r.iter().filter(|(_, ok)| !ok).collect();
            assert!(bad.is_empty(), "{id:?} {n}: {bad:?}");
        }
    }
}

#[test]
fn log_based_functions_are_linear_below_four() {
    let s = make_preset(PresetId::Example1);
    let at4 = s.phi().eval_f64(4.0);
    assert_eq!(at4, 16.0);
    assert!((s.phi().eval_f64(1.0) - 4.0).abs() < 1e-12);
    assert_eq!(s.phi().eval_f64(0.0), 0.0);
}

#[test]
fn custom_system_round_trips_through_json() {
    let s = make_preset(PresetId::Example5);
    let js = serde_json::to_string(&s.spec).unwrap();
    let back: psieve::funcsys::SystemSpec = serde_json::from_str(&js).unwrap();
    assert_eq!(back, s.spec);
    assert!(js.contains("\"Omega\""));
}

fn expr_strategy() -> impl Strategy<Value = String> {
    let leaf = prop_oneof![
        (1u32..50).prop_map(|n| n.to_string()),
        Just("t".to_string()),
        Just("gamma".to_string()),
        (1u32..9, 2u32..9).prop_map(|(p, q)| format!("{p}/{q}")),
    ];
    leaf.prop_recursive(4, 24, 3, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone(), 0usize..4).prop_map(|(a, b, o)| {
                let op = ["+", "-", "*", "/"][o];
                format!("({a}{op}{b})")
            }),
            (inner.clone(), 1u32..4).prop_map(|(a, k)| format!("({a})^{k}")),
            inner.clone().prop_map(|a| format!("log2(1+({a})^2)")),
            inner.clone().prop_map(|a| format!("-({a})")),
            (inner.clone(), inner).prop_map(|(a, b)| format!("max({a},{b})")),
        ]
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn expr_display_reparses(src in expr_strategy()) {
        let e = Expr::parse(&src).unwrap();
        let again = Expr::parse(&e.to_string()).unwrap();
        prop_assert_eq!(&e, &again);
    }

    #[test]
    fn expr_interval_contains_f64(src in expr_strategy(), t in 1u32..1000) {
        let mut ps = BTreeMap::new();
        ps.insert("gamma".to_string(), BigRational::from_integer(BigInt::from(3)));
        let c = Expr::parse(&src).unwrap().compile(&ps, &["t"]).unwrap();
        let tv = t as f64 / 8.0;
        let f = c.eval_f64(&[tv]);
        if let Ok(iv) = c.eval(&[Interval::from_rational(&BigRational::new(t.into(), 8.into()), 64)], 96) {
            if f.is_finite() && f.abs() < 1e200 && iv.width().to_f64() < 1e-6 * (1.0 + f.abs()) {
                let slack = 1e-9 * (1.0 + f.abs());
                prop_assert!(iv.lo.to_f64() <= f + slack && f - slack <= iv.hi.to_f64(), "{} {} {:?}", src, f, iv);
            }
        }
    }

    #[test]
    fn omega1_inverse_brackets(k in -20i64..20, m in 1u32..64) {
        let s = make_preset(PresetId::Example2);
        let y = Interval::pow2(k).mul(&Interval::int(m as i64), 64);
        let x = s.omega1_star(&y, 64).unwrap();
        let back_lo = s.omega1.eval(&Interval::point(x.lo.clone()), 96).unwrap();
        let back_hi = s.omega1.eval(&Interval::point(x.hi.clone()), 96).unwrap();
        prop_assert!(back_lo.lo <= y.hi && y.lo <= back_hi.hi);
    }
}
