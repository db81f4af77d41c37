//! Exact counting of `#{x in [l, r) : ||x alpha - eta|| <= t}` by floor sums.
//!
//! For `0 <= t < 1/2`, `||u|| <= t` iff `{u + t} <= 2t`, and for `0 <= c < 1`,
//! `[{z} <= c] = floor(z) + floor(c - z) + 1`. Both floor terms sum in
//! logarithmic time. Irrational inputs are handled through enclosures: each
//! floor sum is monotone in the slope and the shift, so evaluating at the
//! enclosure endpoints brackets the count.

use super::real::RefinableReal;
use super::{NumericsError, Precision};
use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

/// `sum_{i=0}^{n-1} floor((a i + b) / m)` for `n >= 0`, `m >= 1`.
pub fn floor_sum(n: &BigInt, m: &BigInt, a: &BigInt, b: &BigInt) -> BigInt {
    assert!(!n.is_negative() && m.is_positive());
    let mut ans = BigInt::zero();
    let (mut n, mut m) = (n.clone(), m.clone());
    let tri = |n: &BigInt| n * (n - 1u32) / 2u32;
    let (qa, mut a) = a.div_mod_floor(&m);
    ans += &qa * tri(&n);
    let (qb, mut b) = b.div_mod_floor(&m);
    ans += &qb * &n;
    loop {
        if a >= m {
            let (q, r) = a.div_mod_floor(&m);
            ans += &q * tri(&n);
            a = r;
        }
        if b >= m {
            let (q, r) = b.div_mod_floor(&m);
            ans += &q * &n;
            b = r;
        }
        let y_max = &a * &n + &b;
        if y_max < m {
            break;
        }
        let (q, r) = y_max.div_mod_floor(&m);
        n = q;
        b = r;
        std::mem::swap(&mut m, &mut a);
    }
    ans
}

/// `sum_{x=l}^{r-1} floor(x alpha + s)` for rationals.
fn sum_floor_affine(l: &BigInt, r: &BigInt, alpha: &BigRational, s: &BigRational) -> BigInt {
    let n = r - l;
    if !n.is_positive() {
        return BigInt::zero();
    }
    let m = alpha.denom().lcm(s.denom());
    let a = alpha.numer() * (&m / alpha.denom());
    let sn = s.numer() * (&m / s.denom());
    floor_sum(&n, &m, &a, &(l * &a + sn))
}

/// Count bounds given rational brackets of `alpha` and `eta`.
pub fn count_near_bracketed(
    alpha: (&BigRational, &BigRational),
    eta: (&BigRational, &BigRational),
    t: &BigRational,
    l: &BigInt,
    r: &BigInt,
) -> (BigInt, BigInt) {
    let n = (r - l).max(BigInt::zero());
    if t.is_negative() {
        return (BigInt::zero(), BigInt::zero());
    }
    let half = BigRational::new(BigInt::one(), BigInt::from(2));
    if t >= &half {
        return (n.clone(), n);
    }
    let (al, ah) = alpha;
    let (el, eh) = eta;
    // z = x alpha + (t - eta); c - z = -x alpha + (t + eta).
    let f1 = |a: &BigRational, s: BigRational| sum_floor_affine(l, r, a, &s);
    let f2 = |a: &BigRational, u: BigRational| sum_floor_affine(l, r, &-a, &u);
    let lo = f1(al, t - eh) + f2(ah, t + el) + &n;
    let hi = f1(ah, t - el) + f2(al, t + eh) + &n;
    (lo, hi)
}

/// Bracket of the count using enclosures of width `2^-bits`.
pub fn count_near_bounds(
    alpha: &RefinableReal,
    eta: &RefinableReal,
    t: &BigRational,
    l: &BigInt,
    r: &BigInt,
    bits: u32,
) -> Result<(BigInt, BigInt), NumericsError> {
    let a = match alpha.exact_rational() {
        Some(q) => (q.clone(), q.clone()),
        None => {
            let e = alpha.enclose(bits)?;
            (e.lo.to_rational(), e.hi.to_rational())
        }
    };
    let e = match eta.exact_rational() {
        Some(q) => (q.clone(), q.clone()),
        None => {
            let e = eta.enclose(bits)?;
            (e.lo.to_rational(), e.hi.to_rational())
        }
    };
    Ok(count_near_bracketed((&a.0, &a.1), (&e.0, &e.1), t, l, r))
}

/// Exact count, refining until the bracket closes.
pub fn count_near(
    alpha: &RefinableReal,
    eta: &RefinableReal,
    t: &BigRational,
    l: &BigInt,
    r: &BigInt,
    prec: Precision,
) -> Result<BigInt, NumericsError> {
    let extra = r.bits() as u32;
    prec.escalate(|bits| {
        let (lo, hi) = count_near_bounds(alpha, eta, t, l, r, bits + 2 * extra)?;
        Ok(if lo == hi { Some(lo) } else { None })
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::distance::dist_rational;

    fn brute_floor_sum(n: i64, m: i64, a: i64, b: i64) -> i64 {
        (0..n).map(|i| (a * i + b).div_euclid(m)).sum()
    }

    #[test]
    fn floor_sum_small() {
        for n in 0..12 {
            for m in 1..7 {
                for a in -9..9 {
                    for b in -9..9 {
                        let got = floor_sum(&n.into(), &m.into(), &a.into(), &b.into());
                        assert_eq!(got, BigInt::from(brute_floor_sum(n, m, a, b)), "{n} {m} {a} {b}");
                    }
                }
            }
        }
    }

    #[test]
    fn rational_counts_match_brute_force() {
        let q = |p: i64, d: i64| BigRational::new(p.into(), d.into());
        let alpha = q(5, 17);
        let eta = q(1, 3);
        for t in [q(0, 1), q(1, 51), q(1, 8), q(2, 7), q(1, 2)] {
            let brute = (1..300)
                .filter(|&x| dist_rational(&(&alpha * BigRational::from_integer(x.into()) - &eta)) <= t)
                .count();
            let got = count_near(
                &RefinableReal::Rational(alpha.clone()),
                &RefinableReal::Rational(eta.clone()),
                &t,
                &BigInt::from(1),
                &BigInt::from(300),
                Precision::default(),
            )
            .unwrap();
            assert_eq!(got, BigInt::from(brute));
        }
    }

    #[test]
    fn golden_counts() {
        let g = RefinableReal::golden();
        let eta = RefinableReal::parse("1/3").unwrap();
        let t = BigRational::new(1.into(), 64.into());
        let got = count_near(&g, &eta, &t, &1.into(), &100_000.into(), Precision::default()).unwrap();
        let phi = (1.0 + 5f64.sqrt()) / 2.0;
        let brute = (1..100_000i64)
            .filter(|&x| {
                let u = x as f64 * phi - 1.0 / 3.0;
                (u - u.round()).abs() <= 1.0 / 64.0
            })
            .count();
        assert_eq!(got, BigInt::from(brute));
    }
}
