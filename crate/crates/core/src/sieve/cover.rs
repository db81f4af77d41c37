//! Danger zones `E(x, y)`, their levels `l_x` and the dyadic covers `A(x)`.

use super::cells::{DyadicIntervalSet, LevelOverflow, MAX_LEVEL};
use crate::numerics::{Dyadic, Round};
use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// Significant bits kept when `sigma` is rounded up to a dyadic radius.
pub const SIGMA_BITS: u32 = 48;

/// The radius actually used for a zone: the upper end of the `sigma`
/// enclosure rounded up to `SIGMA_BITS` significant bits.
pub fn round_sigma(sigma_hi: &Dyadic) -> Dyadic {
    sigma_hi.round(SIGMA_BITS, Round::Up)
}

/// `floor(log2(n / m))` for positive integers.
fn floor_log2_ratio(n: &BigInt, m: &BigInt) -> i64 {
    let k = n.bits() as i64 - m.bits() as i64;
    let ge = if k >= 0 { *n >= (m << k as usize) } else { (n << (-k) as usize) >= *m };
    if ge {
        k
    } else {
        k - 1
    }
}

/// `l_x = floor(log2(x / (2 sigma)))`, clamped below at 0.
pub fn level_of(x: u64, sigma: &Dyadic) -> Result<u32, LevelOverflow> {
    assert!(sigma.is_positive(), "sigma must be positive");
    let l = floor_log2_ratio(&BigInt::from(x), sigma.mantissa()) - sigma.exponent() - 1;
    if l <= 0 {
        return Ok(0);
    }
    if l > MAX_LEVEL as i64 {
        return Err(LevelOverflow(l.min(u32::MAX as i64) as u32));
    }
    Ok(l as u32)
}

/// Cell range `[a_lo, a_hi)` at level `l` covering `E(x, y) ∩ [0, 1]`, or
/// `None` when the zone misses `[0, 1]`.
pub fn zone_cells(x: u64, y: u64, eta: &BigRational, sigma: &Dyadic, l: u32) -> Option<(u128, u128)> {
    let (p, q) = (eta.numer(), eta.denom());
    let sh = (-sigma.exponent()).max(0) as usize;
    let m = sigma.mantissa() << (sigma.exponent().max(0) as usize);
    // (y + eta -+ sigma) 2^l / x over the common denominator x q 2^sh
    let base = (BigInt::from(y) * q + p) << sh;
    let d = (BigInt::from(x) * q) << sh;
    let lo_num = (&base - &m * q) << l as usize;
    let hi_num = (&base + &m * q) << l as usize;
    let top = BigInt::one() << l as usize;
    if hi_num.is_negative() || lo_num > (&d * &top) {
        return None;
    }
    let a_lo = lo_num.div_floor(&d).clamp(BigInt::zero(), &top - 1u32);
    let a_hi = (-((-hi_num).div_floor(&d))).clamp(BigInt::one(), top);
    Some((a_lo.to_u128().unwrap(), a_hi.to_u128().unwrap()))
}

/// The smallest union `A(x)` of level-`l` cells covering `E(x)`.
pub fn danger_cover(x: u64, eta: &BigRational, sigma: &Dyadic, l: u32) -> DyadicIntervalSet {
    let mut s = DyadicIntervalSet::empty(l);
    if l == 0 {
        s.insert_run(0, 1);
        return s;
    }
    for y in 0..=x {
        if let Some((a, b)) = zone_cells(x, y, eta, sigma, l) {
            s.insert_run(a, b);
        }
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn levels() {
        assert_eq!(level_of(4, &Dyadic::pow2(-3)).unwrap(), 4);
        assert_eq!(level_of(2, &Dyadic::one()).unwrap(), 0);
        assert_eq!(level_of(3, &Dyadic::pow2(-3)).unwrap(), 3);
    }

    #[test]
    fn hand_covers() {
        let c = danger_cover(2, &q(0, 1), &Dyadic::pow2(-3), 3);
        assert_eq!(c.cells().collect::<Vec<_>>(), vec![0, 3, 4, 7]);
        let c = danger_cover(2, &q(1, 2), &Dyadic::pow2(-3), 3);
        assert_eq!(c.cells().collect::<Vec<_>>(), vec![1, 2, 5, 6]);
    }
}
