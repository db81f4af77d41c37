//! Distance to the nearest integer.

use super::dyadic::Dyadic;
use super::interval::Interval;
use super::real::RefinableReal;
use super::NumericsError;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed};

/// Enclosure of `{ ||t|| : t in e }`.
///
/// `||.||` is piecewise linear with minima at integers and maxima at
/// half-integers, so the image is determined by the endpoints plus whether
/// an integer or a half-integer lies inside.
pub fn dist_interval(e: &Interval) -> Interval {
    let half = Dyadic::pow2(-1);
    let d_at = |t: &Dyadic| -> Dyadic {
        let n = t.add(&half).floor();
        t.sub(&Dyadic::from_int(n)).abs()
    };
    let (dl, dh) = (d_at(&e.lo), d_at(&e.hi));
    let contains_int = e.lo.ceil() <= e.hi.floor();
    // Half-integers h = k + 1/2 with lo <= h <= hi.
    let contains_half = e.lo.sub(&half).ceil() <= e.hi.sub(&half).floor();
    let lo = if contains_int { Dyadic::zero() } else { dl.lesser(&dh).clone() };
    let hi = if contains_half { half } else { dl.greater(&dh).clone() };
    Interval::new(lo, hi)
}

/// Exact `||q||` for a rational.
pub fn dist_rational(q: &BigRational) -> BigRational {
    let half = BigRational::new(BigInt::one(), BigInt::from(2));
    let n = (q + &half).floor();
    (q - n).abs()
}

/// Enclosure of `||x||` with absolute width at most `2^-bits`.
pub fn nearest_int_distance(x: &RefinableReal, bits: u32) -> Result<Interval, NumericsError> {
    Ok(dist_interval(&x.enclose(bits)?))
}

/// Cached enclosure of `alpha` for repeated evaluation of `||x alpha - eta||`.
#[derive(Clone, Debug)]
pub struct DistanceContext {
    alpha: RefinableReal,
    bits: u32,
    enc: Interval,
}

impl DistanceContext {
    pub fn new(alpha: &RefinableReal, bits: u32) -> DistanceContext {
        let enc = alpha.enclose_lenient(bits);
        DistanceContext { alpha: alpha.clone(), bits, enc }
    }

    pub fn alpha(&self) -> &RefinableReal {
        &self.alpha
    }

    pub fn bits(&self) -> u32 {
        self.bits
    }

    /// `x alpha - eta` for an exact `eta` enclosure, computed exactly from
    /// the cached enclosure of `alpha`.
    pub fn linear(&self, x: &BigInt, eta: &Interval) -> Interval {
        self.enc.scale_int(x).sub_exact(eta)
    }

    pub fn dist(&self, x: &BigInt, eta: &Interval) -> Interval {
        dist_interval(&self.linear(x, eta))
    }

    /// A context with at least twice the precision.
    pub fn refined(&self) -> DistanceContext {
        DistanceContext::new(&self.alpha, self.bits * 2)
    }

    /// Whether further refinement can shrink enclosures.
    pub fn refinable(&self) -> bool {
        !self.alpha.is_decimal()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{compare_to_dyadic, Comparison};

    #[test]
    fn golden_double() {
        // ||2 phi|| = sqrt(5) - 2
        let g = RefinableReal::golden();
        let x = g.affine(BigInt::from(2), RefinableReal::parse("0").unwrap());
        let d = nearest_int_distance(&x, 80).unwrap();
        let v = 5f64.sqrt() - 2.0;
        assert!((d.lo.to_f64() - v).abs() < 1e-15 && (d.hi.to_f64() - v).abs() < 1e-15);
        assert_eq!(compare_to_dyadic(&d, &Dyadic::pow2(-2)), Comparison::Below);
        assert_eq!(compare_to_dyadic(&d, &Dyadic::pow2(-3)), Comparison::Above);
    }

    #[test]
    fn straddling_intervals() {
        let i = Interval::new(Dyadic::from_f64(0.4).unwrap(), Dyadic::from_f64(0.6).unwrap());
        let d = dist_interval(&i);
        assert_eq!(d.hi, Dyadic::pow2(-1));
        assert!((d.lo.to_f64() - 0.4).abs() < 1e-15);
        let j = Interval::new(Dyadic::from_f64(-0.1).unwrap(), Dyadic::from_f64(0.05).unwrap());
        let d = dist_interval(&j);
        assert!(d.lo.is_zero() && (d.hi.to_f64() - 0.1).abs() < 1e-15);
    }

    #[test]
    fn rational_distance() {
        let q = BigRational::new(BigInt::from(7), BigInt::from(3));
        assert_eq!(dist_rational(&q), BigRational::new(BigInt::one(), BigInt::from(3)));
        let q = BigRational::new(BigInt::from(-5), BigInt::from(4));
        assert_eq!(dist_rational(&q), BigRational::new(BigInt::one(), BigInt::from(4)));
    }
}
