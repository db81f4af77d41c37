//! Continued-fraction convergents.

use super::real::{CfSpec, RefinableReal};
use super::{NumericsError, Precision};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

/// Partial quotients of a continued-fraction description, repeating the period.
pub fn quotients(cf: &CfSpec, n: usize) -> Vec<BigInt> {
    let mut out: Vec<BigInt> = cf.pre.iter().take(n).cloned().collect();
    if !cf.period.is_empty() {
        let mut i = 0;
        while out.len() < n {
            out.push(cf.period[i % cf.period.len()].clone());
            i += 1;
        }
    }
    out
}

fn rational_quotients(q: &BigRational, n: usize) -> Vec<BigInt> {
    let mut out = vec![];
    let (mut a, mut b) = (q.numer().clone(), q.denom().clone());
    while out.len() < n && !b.is_zero() {
        let t = num_integer::Integer::div_floor(&a, &b);
        let r = &a - &t * &b;
        out.push(t);
        a = std::mem::replace(&mut b, r);
    }
    out
}

/// Quotients read off enclosures: a quotient is accepted only when both
/// endpoints agree on it.
fn enclosure_quotients(theta: &RefinableReal, n: usize, prec: Precision) -> Result<Vec<BigInt>, NumericsError> {
    prec.escalate(|bits| {
        let e = match theta.enclose(bits) {
            Ok(e) => e,
            Err(NumericsError::DecimalPrecision) => theta.enclose_lenient(bits),
            Err(err) => return Err(err),
        };
        let (mut lo, mut hi) = (e.lo.to_rational(), e.hi.to_rational());
        let mut out = vec![];
        while out.len() < n {
            let (a, b) = (lo.floor(), hi.floor());
            if a != b {
                break;
            }
            out.push(a.to_integer());
            let (fl, fh) = (&lo - &a, &hi - &a);
            if fl.is_zero() {
                break;
            }
            let (nl, nh) = (fh.recip(), fl.recip());
            lo = nl;
            hi = nh;
        }
        if out.len() >= n || theta.is_decimal() {
            Ok(Some(out))
        } else {
            Ok(None)
        }
    })
}

/// The first `n` convergents `p_k/q_k` of `theta` (fewer if `theta` is
/// rational with a shorter expansion, or a decimal literal whose stated
/// precision does not determine more quotients).
pub fn convergents(theta: &RefinableReal, n: usize) -> Result<Vec<BigRational>, NumericsError> {
    convergents_with(theta, n, Precision::default())
}

pub fn convergents_with(theta: &RefinableReal, n: usize, prec: Precision) -> Result<Vec<BigRational>, NumericsError> {
    let qs = match theta {
        RefinableReal::Rational(q) => rational_quotients(q, n),
        RefinableReal::Quadratic { cf, .. } => quotients(cf, n),
        _ => enclosure_quotients(theta, n, prec)?,
    };
    Ok(from_quotients(&qs))
}

pub fn from_quotients(qs: &[BigInt]) -> Vec<BigRational> {
    let (mut p0, mut q0) = (BigInt::zero(), BigInt::one());
    let (mut p1, mut q1) = (BigInt::one(), BigInt::zero());
    let mut out = vec![];
    for a in qs {
        let p2 = a * &p1 + &p0;
        let q2 = a * &q1 + &q0;
        p0 = std::mem::replace(&mut p1, p2);
        q0 = std::mem::replace(&mut q1, q2);
        out.push(BigRational::new(p1.clone(), q1.clone()));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::render_rational;

    fn show(v: &[BigRational]) -> Vec<String> {
        v.iter().map(render_rational).collect()
    }

    #[test]
    fn golden_fibonacci() {
        let c = convergents(&RefinableReal::golden(), 5).unwrap();
        assert_eq!(show(&c), ["1", "2", "3/2", "5/3", "8/5"]);
    }

    #[test]
    fn sqrt2() {
        let c = convergents(&RefinableReal::parse("[1; (2)]").unwrap(), 4).unwrap();
        assert_eq!(show(&c), ["1", "3/2", "7/5", "17/12"]);
    }

    #[test]
    fn half_stops_early() {
        let c = convergents(&RefinableReal::parse("1/2").unwrap(), 1).unwrap();
        assert_eq!(show(&c), ["0"]);
        let c = convergents(&RefinableReal::parse("1/2").unwrap(), 5).unwrap();
        assert_eq!(show(&c), ["0", "1/2"]);
    }

    #[test]
    fn decimal_limited_by_precision() {
        let r = RefinableReal::parse("1.6180339887~1e-10").unwrap();
        let c = convergents(&r, 40).unwrap();
        assert!(c.len() >= 10 && c.len() < 40);
        assert_eq!(show(&c[..5]), ["1", "2", "3/2", "5/3", "8/5"]);
    }

    #[test]
    fn affine_matches_quadratic() {
        // 3*phi - 0 via enclosures agrees with the exact expansion of 3*phi.
        let g = RefinableReal::golden();
        let a = g.affine(BigInt::from(3), RefinableReal::parse("0").unwrap());
        let c = convergents(&a, 12).unwrap();
        let v = c.last().unwrap();
        assert!((v.numer().to_string().parse::<f64>().unwrap() / v.denom().to_string().parse::<f64>().unwrap()
            - 3.0 * 1.618033988749895).abs() < 1e-9);
    }
}
