//! Grid checks for function systems: monotonicity, inverse round trips and
//! the `Omega` implication.

use super::system::{FunctionSystem, UnaryFn};
use crate::numerics::{Dyadic, Interval, NumericsError, Precision};
use num_bigint::BigInt;
use num_rational::BigRational;
use serde::Serialize;

const SCREEN: f64 = 1e-9;

/// Largest `x` in `[1, z]` with `x y <= omega1(z / x)`, or 0 if none.
///
/// The condition is monotone in `x` (left side increasing, right side
/// decreasing), so the admissible `x` form an initial segment.
pub fn x_max(sys: &FunctionSystem, y: u64, z: u64, start: u64, prec: Precision) -> Result<u64, NumericsError> {
    let mut x = start.min(z);
    while x >= 1 && !holds(sys, x, y, z, prec)? {
        x -= 1;
    }
    Ok(x)
}

/// `x y <= omega1(z/x)`; undecidable cases count as holding (conservative).
fn holds(sys: &FunctionSystem, x: u64, y: u64, z: u64, prec: Precision) -> Result<bool, NumericsError> {
    let lhs = (x as f64) * (y as f64);
    let r = sys.omega1.eval_f64(z as f64 / x as f64);
    if r.is_finite() {
        if lhs < r * (1.0 - SCREEN) {
            return Ok(true);
        }
        if lhs > r * (1.0 + SCREEN) {
            return Ok(false);
        }
    }
    let arg = BigRational::new(BigInt::from(z), BigInt::from(x));
    let lhs = Dyadic::from_int(x as u128 * y as u128);
    let out = prec.escalate(|bits| {
        let w = sys.omega1.eval(&Interval::from_rational(&arg, bits), bits)?;
        if lhs <= w.lo {
            Ok(Some(true))
        } else if lhs > w.hi {
            Ok(Some(false))
        } else {
            Ok(None)
        }
    });
    match out {
        Err(NumericsError::PrecisionCap(_)) => Ok(true),
        r => r,
    }
}

/// `Omega(y, z) >= target`; undecidable cases count as failing.
fn omega_at_least(sys: &FunctionSystem, y: u64, z: u64, target: f64, prec: Precision) -> Result<bool, NumericsError> {
    let w = sys.big_omega_f64(y as f64, z as f64);
    if w.is_finite() {
        if w > target * (1.0 + SCREEN) {
            return Ok(true);
        }
        if w < target * (1.0 - SCREEN) {
            return Ok(false);
        }
    }
    let t = Dyadic::from_f64(target).expect("finite target");
    let out = prec.escalate(|bits| {
        let o = sys.big_omega(&Interval::int(y as i64), &Interval::int(z as i64), bits)?;
        if o.lo >= t {
            Ok(Some(true))
        } else if o.hi < t {
            Ok(Some(false))
        } else {
            Ok(None)
        }
    });
    match out {
        Err(NumericsError::PrecisionCap(_)) => Ok(false),
        r => r,
    }
}

#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct OmegaGridReport {
    pub n: u64,
    pub checked: u64,
    pub violations: Vec<(u64, u64, u64)>,
    /// `max 2 x_max / Omega` over the grid (floating point, informational).
    pub worst_ratio: f64,
}

/// Visit every `(y, z, x_max(y, z))` on `[1, n]^2`.
fn for_each_xmax(
    sys: &FunctionSystem,
    n: u64,
    prec: Precision,
    mut f: impl FnMut(u64, u64, u64) -> Result<(), NumericsError>,
) -> Result<(), NumericsError> {
    for z in 1..=n {
        let mut x = z;
        for y in 1..=n {
            x = x_max(sys, y, z, x, prec)?;
            f(y, z, x)?;
            if x == 0 {
                for y2 in y + 1..=n {
                    f(y2, z, 0)?;
                }
                break;
            }
        }
    }
    Ok(())
}

/// The implication `x y <= omega1(z/x), x <= z  =>  x <= Omega(y, z)` over
/// all integers `x, y, z <= n`.
pub fn omega_grid(sys: &FunctionSystem, n: u64, prec: Precision) -> Result<OmegaGridReport, NumericsError> {
    let mut rep = OmegaGridReport { n, checked: 0, violations: vec![], worst_ratio: 0.0 };
    for_each_xmax(sys, n, prec, |y, z, x| {
        rep.checked += 1;
        if x == 0 {
            return Ok(());
        }
        let w = sys.big_omega_f64(y as f64, z as f64);
        rep.worst_ratio = rep.worst_ratio.max(2.0 * x as f64 / w);
        if !omega_at_least(sys, y, z, x as f64, prec)? {
            rep.violations.push((x, y, z));
        }
        Ok(())
    })?;
    Ok(rep)
}

/// Smallest power of two `c` with `c Omega_1(y, z) >= 2 x_max(y, z)` on the
/// grid, where `Omega_1` is the system's `Omega` evaluated with `c = 1`.
pub fn derive_c(sys_c1: &FunctionSystem, n: u64, prec: Precision) -> Result<i64, NumericsError> {
    let mut worst = 0.0f64;
    let mut pts = vec![];
    for_each_xmax(sys_c1, n, prec, |y, z, x| {
        if x > 0 {
            let r = 2.0 * x as f64 / sys_c1.big_omega_f64(y as f64, z as f64);
            if r > worst * (1.0 - 1e-6) {
                worst = worst.max(r);
                pts.push((y, z, x, r));
            }
        }
        Ok(())
    })?;
    let mut k = worst.log2().ceil() as i64;
    // Confirm with enclosures near the extreme points; bump if needed.
    loop {
        let mut ok = true;
        for &(y, z, x, r) in &pts {
            if r < worst * (1.0 - 1e-6) {
                continue;
            }
            let o = sys_c1.big_omega(&Interval::int(y as i64), &Interval::int(z as i64), prec.start)?;
            if o.shl(k).lo < Dyadic::from_int(2 * x) {
                ok = false;
            }
        }
        if ok {
            return Ok(k);
        }
        k += 1;
    }
}

#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct MonotoneReport {
    pub function: String,
    pub points: usize,
    /// Grid steps where a decrease was certified.
    pub decreases: Vec<f64>,
    /// Grid steps where a strict increase could not be certified.
    pub not_strict: usize,
}

/// Check an increasing function on `t = 2^(k/4)`, `k` in `[lo, hi]`.
pub fn monotone_on_grid(name: &str, f: &UnaryFn, lo: i64, hi: i64, prec: u32) -> MonotoneReport {
    let mut rep = MonotoneReport { function: name.into(), points: 0, decreases: vec![], not_strict: 0 };
    let mut prev: Option<Interval> = None;
    for k in lo..=hi {
        let t = Interval::pow2(k.div_euclid(4)).mul(
            &Interval::pow2(0).add(&Interval::point(Dyadic::new(BigInt::from(k.rem_euclid(4)), -2)), 64),
            64,
        );
        // t = 2^floor(k/4) (1 + r/4), a monotone grid
        let v = match f.eval(&t, prec) {
            Ok(v) => v,
            Err(_) => continue,
        };
        rep.points += 1;
        if let Some(p) = &prev {
            if p.lo > v.hi {
                rep.decreases.push(t.to_f64());
            } else if p.hi >= v.lo {
                rep.not_strict += 1;
            }
        }
        prev = Some(v);
    }
    rep
}

/// `f*(f(t))` contains `t` and is tight, for `t = 2^k`, `k` in `[lo, hi]`.
pub fn inverse_roundtrip(f: &UnaryFn, lo: i64, hi: i64, prec: u32) -> Vec<(i64, bool)> {
    (lo..=hi)
        .filter_map(|k| {
            let t = Dyadic::pow2(k);
            let y = f.at(&t, prec + 16).ok()?;
            let back = f.inv(&y, prec).ok()?;
            let tight = back.width() <= t.shl(-(prec as i64) + 12);
            Some((k, back.contains(&t) && tight))
        })
        .collect()
}
