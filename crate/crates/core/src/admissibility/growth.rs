//! The growth condition
//! `log2(X / (2 psi2*(eps / D(X)))) <= (A - 1) log2 X`, where
//! `D(X) = phi(X) psi1(1/2)` in product mode and `phi2(X)` in max mode.

use crate::funcsys::{FunctionSystem, Mode, SystemError};
use crate::numerics::{Dyadic, Interval, NumericsError, Precision};
use num_bigint::BigInt;
use num_rational::BigRational;
use serde::Serialize;

type Res<T> = Result<T, SystemError>;

#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct GrowthPoint {
    /// `X` as a decimal integer.
    pub x: String,
    pub lhs: f64,
    pub rhs: f64,
    pub ok: bool,
}

#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct GrowthReport {
    pub ok: bool,
    /// Grid points `X0 2^k` checked.
    pub points: Vec<GrowthPoint>,
    /// Consecutive grid intervals certified through monotonicity.
    pub certified_intervals: usize,
    /// First failing grid point.
    pub failed_at: Option<String>,
}

/// Left side at `X`.
pub fn growth_lhs(sys: &FunctionSystem, x: &BigInt, eps: &BigRational, prec: u32) -> Res<Interval> {
    let p = prec + 16;
    let xd = Dyadic::from_int(x.clone());
    let d = match sys.mode {
        Mode::Product => {
            let half = sys.psi1.at(&Dyadic::pow2(-1), p)?;
            sys.phi().at(&xd, p)?.mul(&half, p)
        }
        Mode::Max => sys.phi2().at(&xd, p)?,
    };
    let e = Interval::from_rational(eps, p);
    let s = sys.psi2_star(&e.div(&d, p)?, p)?;
    let inner = Interval::point(xd).div(&s.shl(1), p)?;
    Ok(inner.log2(prec)?)
}

/// Right side `(A - 1) log2 X`.
pub fn growth_rhs(x: &BigInt, a: &BigRational, prec: u32) -> Res<Interval> {
    let p = prec + 16;
    let l = Interval::point(Dyadic::from_int(x.clone())).log2(p)?;
    let am1 = Interval::from_rational(&(a - BigRational::from_integer(1.into())), p);
    Ok(l.mul(&am1, prec))
}

enum Cmp {
    Le,
    Gt,
}

fn decide(lhs: impl Fn(u32) -> Res<Interval>, rhs: impl Fn(u32) -> Res<Interval>, prec: Precision) -> Res<Cmp> {
    let r = prec.escalate(|bits| {
        let (l, r) = match (lhs(bits), rhs(bits)) {
            (Ok(l), Ok(r)) => (l, r),
            (Err(SystemError::Numerics(e)), _) | (_, Err(SystemError::Numerics(e))) => return Err(e),
            (Err(e), _) | (_, Err(e)) => return Err(NumericsError::Domain(e.to_string())),
        };
        Ok(if l.hi <= r.lo {
            Some(Cmp::Le)
        } else if l.lo > r.hi {
            Some(Cmp::Gt)
        } else {
            None
        })
    });
    match r {
        Ok(c) => Ok(c),
        // An undecided comparison counts as a failure.
        Err(NumericsError::PrecisionCap(_)) => Ok(Cmp::Gt),
        Err(e) => Err(e.into()),
    }
}

/// Check the growth condition on `X = X0 2^k` for `X <= 2^cap_log2`.
///
/// Both sides increase with `X`, so `lhs(X_{k+1}) <= rhs(X_k)` certifies the
/// whole interval `[X_k, X_{k+1}]`.
pub fn check_growth(
    sys: &FunctionSystem,
    x0: &BigInt,
    eps: &BigRational,
    a: &BigRational,
    cap_log2: u64,
    prec: Precision,
) -> Res<GrowthReport> {
    let mut rep = GrowthReport { ok: true, points: vec![], certified_intervals: 0, failed_at: None };
    let mut x = x0.clone();
    let mut prev: Option<BigInt> = None;
    while x.bits() <= cap_log2 || prev.is_none() {
        let ok = matches!(decide(|b| growth_lhs(sys, &x, eps, b), |b| growth_rhs(&x, a, b), prec)?, Cmp::Le);
        rep.points.push(GrowthPoint {
            x: x.to_string(),
            lhs: growth_lhs(sys, &x, eps, 64)?.to_f64(),
            rhs: growth_rhs(&x, a, 64)?.to_f64(),
            ok,
        });
        if !ok && rep.ok {
            rep.ok = false;
            rep.failed_at = Some(x.to_string());
        }
        if let Some(px) = &prev {
            let c = decide(|b| growth_lhs(sys, &x, eps, b), |b| growth_rhs(px, a, b), prec)?;
            if matches!(c, Cmp::Le) {
                rep.certified_intervals += 1;
            }
        }
        prev = Some(x.clone());
        x <<= 1u32;
    }
    Ok(rep)
}
