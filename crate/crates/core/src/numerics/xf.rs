//! Extended-exponent floating point with directed rounding.
//!
//! An [`XF`] is `m 2^e` with an `f64` mantissa `1 <= |m| < 2` (or zero) and an
//! `i64` exponent, so values like `2^-4000000` are representable. Products,
//! quotients, sums and square roots are rounded in the requested direction
//! exactly, using error-free transformations (fma residuals, two-sum).
//! `log2` and `exp2` call the platform libm and widen its result by a
//! relative `2^-44`, far above the few-ulp error of any mainstream libm.
//!
//! [`XInterval`] is the interval type built on it. It is used where the
//! arbitrary precision [`Interval`] would be too slow (millions of terms).

use super::{Dyadic, Interval, NumericsError, Round};
use num_bigint::{BigInt, Sign};
use num_traits::{Signed, ToPrimitive};
use std::cmp::Ordering;

type Res<T> = Result<T, NumericsError>;

const LIBM_REL: f64 = 1.0 / (1u64 << 44) as f64;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct XF {
    m: f64,
    e: i64,
}

fn pow2_f64(k: i64) -> f64 {
    debug_assert!((-1022..=1023).contains(&k));
    f64::from_bits(((1023 + k) as u64) << 52)
}

fn bump(v: f64, err_sign: f64, dir: Round) -> f64 {
    match dir {
        Round::Up if err_sign > 0.0 => v.next_up(),
        Round::Down if err_sign < 0.0 => v.next_down(),
        _ => v,
    }
}

impl XF {
    pub const ZERO: XF = XF { m: 0.0, e: 0 };
    pub const ONE: XF = XF { m: 1.0, e: 0 };

    /// `v 2^e`, normalized. `v` must be finite.
    fn norm(v: f64, e: i64) -> XF {
        if v == 0.0 {
            return XF::ZERO;
        }
        debug_assert!(v.is_finite());
        let bits = v.to_bits();
        let field = ((bits >> 52) & 0x7ff) as i64;
        if field == 0 {
            return XF::norm(v * pow2_f64(64), e - 64);
        }
        let m = f64::from_bits((bits & !(0x7ffu64 << 52)) | (1023u64 << 52));
        XF { m, e: e + field - 1023 }
    }

    pub fn from_f64(v: f64) -> XF {
        XF::norm(v, 0)
    }

    pub fn pow2(k: i64) -> XF {
        XF { m: 1.0, e: k }
    }

    pub fn from_i64(n: i64, dir: Round) -> XF {
        if n.unsigned_abs() < 1 << 53 {
            XF::from_f64(n as f64)
        } else {
            XF::from_dyadic(&Dyadic::from_int(n), dir)
        }
    }

    pub fn from_dyadic(d: &Dyadic, dir: Round) -> XF {
        if d.is_zero() {
            return XF::ZERO;
        }
        let mant = d.mantissa();
        let bits = mant.bits() as i64;
        if bits <= 53 {
            return XF::norm(mant.to_f64().expect("53-bit integer"), d.exponent());
        }
        let shift = bits - 53;
        let mag: BigInt = mant.abs() >> (shift as usize);
        let mut m = mag.to_f64().expect("53-bit integer");
        let exact = (&mag << (shift as usize)) == mant.abs();
        if mant.sign() == Sign::Minus {
            m = -m;
        }
        if !exact {
            // Truncation moved the value toward zero.
            m = bump(m, if m > 0.0 { 1.0 } else { -1.0 }, dir);
        }
        XF::norm(m, d.exponent() + shift)
    }

    pub fn to_dyadic(self) -> Dyadic {
        if self.m == 0.0 {
            return Dyadic::zero();
        }
        Dyadic::from_f64(self.m).expect("finite").shl(self.e)
    }

    pub fn is_zero(self) -> bool {
        self.m == 0.0
    }

    pub fn is_positive(self) -> bool {
        self.m > 0.0
    }

    pub fn is_negative(self) -> bool {
        self.m < 0.0
    }

    pub fn mantissa(self) -> f64 {
        self.m
    }

    pub fn exponent(self) -> i64 {
        self.e
    }

    /// `floor(log2 |x|)`.
    pub fn floor_log2(self) -> i64 {
        self.e
    }

    pub fn neg(self) -> XF {
        XF { m: -self.m, e: self.e }
    }

    pub fn shl(self, k: i64) -> XF {
        if self.m == 0.0 {
            self
        } else {
            XF { m: self.m, e: self.e + k }
        }
    }

    /// Nearest `f64` (saturating to 0 or infinity).
    pub fn to_f64(self) -> f64 {
        if self.m == 0.0 {
            0.0
        } else if self.e > 1023 {
            self.m * f64::INFINITY
        } else if self.e < -1074 {
            0.0 * self.m
        } else if self.e < -1022 {
            self.m * pow2_f64(self.e + 64) * pow2_f64(-64)
        } else {
            self.m * pow2_f64(self.e)
        }
    }

    pub fn mul(self, o: XF, dir: Round) -> XF {
        if self.m == 0.0 || o.m == 0.0 {
            return XF::ZERO;
        }
        let p = self.m * o.m;
        let err = self.m.mul_add(o.m, -p);
        XF::norm(bump(p, err, dir), self.e + o.e)
    }

    pub fn div(self, o: XF, dir: Round) -> XF {
        assert!(o.m != 0.0, "division by zero");
        if self.m == 0.0 {
            return XF::ZERO;
        }
        let q = self.m / o.m;
        let r = (-q).mul_add(o.m, self.m);
        XF::norm(bump(q, r * o.m.signum(), dir), self.e - o.e)
    }

    pub fn add(self, o: XF, dir: Round) -> XF {
        if self.m == 0.0 {
            return o;
        }
        if o.m == 0.0 {
            return self;
        }
        let (big, small) = if self.e >= o.e { (self, o) } else { (o, self) };
        let d = big.e - small.e;
        if d > 1000 {
            return XF::norm(bump(big.m, small.m, dir), big.e);
        }
        let sm = small.m * pow2_f64(-d);
        let s = big.m + sm;
        let bb = s - big.m;
        let err = (big.m - (s - bb)) + (sm - bb);
        XF::norm(bump(s, err, dir), big.e)
    }

    pub fn sub(self, o: XF, dir: Round) -> XF {
        self.add(o.neg(), dir)
    }

    /// Square root of a nonnegative value.
    pub fn sqrt(self, dir: Round) -> XF {
        assert!(self.m >= 0.0, "sqrt of a negative number");
        if self.m == 0.0 {
            return XF::ZERO;
        }
        let (m, e) = if self.e.rem_euclid(2) == 1 { (self.m * 2.0, self.e - 1) } else { (self.m, self.e) };
        let s = m.sqrt();
        let r = (-s).mul_add(s, m);
        XF::norm(bump(s, r, dir), e / 2)
    }

    /// `log2` of a positive value.
    pub fn log2(self, dir: Round) -> XF {
        assert!(self.m > 0.0, "log of a nonpositive number");
        let e = XF::from_i64(self.e, dir);
        if self.m == 1.0 {
            return e;
        }
        let l = self.m.log2();
        let slack = l * LIBM_REL + f64::MIN_POSITIVE;
        let l = match dir {
            Round::Down => (l - slack).max(0.0),
            Round::Up => (l + slack).min(1.0),
        };
        e.add(XF::from_f64(l), dir)
    }

    /// `2^x`; fails if the result's exponent would not fit.
    pub fn exp2(self, dir: Round) -> Res<XF> {
        if self.e > 61 {
            return Err(NumericsError::Domain("exp2 argument too large".into()));
        }
        // `v` is exact: |v| < 2^62 and the mantissa has 53 bits.
        let v = self.to_f64();
        let n = v.floor();
        let f = v - n;
        let g = f.exp2();
        let g = match dir {
            Round::Down => g * (1.0 - LIBM_REL),
            Round::Up => g * (1.0 + LIBM_REL),
        };
        Ok(XF::norm(g, n as i64))
    }
}

impl PartialOrd for XF {
    fn partial_cmp(&self, o: &XF) -> Option<Ordering> {
        let s = |x: &XF| if x.m > 0.0 { 1 } else if x.m < 0.0 { -1 } else { 0 };
        let (a, b) = (s(self), s(o));
        if a != b || a == 0 {
            return a.partial_cmp(&b);
        }
        let mag = self.e.cmp(&o.e).then(self.m.abs().partial_cmp(&o.m.abs())?);
        Some(if a > 0 { mag } else { mag.reverse() })
    }
}

fn lesser(a: XF, b: XF) -> XF {
    if a <= b {
        a
    } else {
        b
    }
}

fn greater(a: XF, b: XF) -> XF {
    if a >= b {
        a
    } else {
        b
    }
}

/// A closed interval with [`XF`] endpoints.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct XInterval {
    pub lo: XF,
    pub hi: XF,
}

impl XInterval {
    pub const ZERO: XInterval = XInterval { lo: XF::ZERO, hi: XF::ZERO };

    pub fn new(lo: XF, hi: XF) -> XInterval {
        debug_assert!(lo <= hi, "{lo:?} > {hi:?}");
        XInterval { lo, hi }
    }

    pub fn point(v: XF) -> XInterval {
        XInterval { lo: v, hi: v }
    }

    pub fn pow2(k: i64) -> XInterval {
        XInterval::point(XF::pow2(k))
    }

    pub fn int(n: i64) -> XInterval {
        XInterval { lo: XF::from_i64(n, Round::Down), hi: XF::from_i64(n, Round::Up) }
    }

    pub fn from_interval(iv: &Interval) -> XInterval {
        XInterval { lo: XF::from_dyadic(&iv.lo, Round::Down), hi: XF::from_dyadic(&iv.hi, Round::Up) }
    }

    pub fn to_interval(self) -> Interval {
        Interval::new(self.lo.to_dyadic(), self.hi.to_dyadic())
    }

    pub fn contains_zero(self) -> bool {
        !self.lo.is_positive() && !self.hi.is_negative()
    }

    pub fn is_positive(self) -> bool {
        self.lo.is_positive()
    }

    pub fn neg(self) -> XInterval {
        XInterval { lo: self.hi.neg(), hi: self.lo.neg() }
    }

    pub fn shl(self, k: i64) -> XInterval {
        XInterval { lo: self.lo.shl(k), hi: self.hi.shl(k) }
    }

    pub fn add(self, o: XInterval) -> XInterval {
        XInterval { lo: self.lo.add(o.lo, Round::Down), hi: self.hi.add(o.hi, Round::Up) }
    }

    pub fn sub(self, o: XInterval) -> XInterval {
        self.add(o.neg())
    }

    pub fn mul(self, o: XInterval) -> XInterval {
        if !self.lo.is_negative() && !o.lo.is_negative() {
            return XInterval { lo: self.lo.mul(o.lo, Round::Down), hi: self.hi.mul(o.hi, Round::Up) };
        }
        let c = [(self.lo, o.lo), (self.lo, o.hi), (self.hi, o.lo), (self.hi, o.hi)];
        let mut lo = c[0].0.mul(c[0].1, Round::Down);
        let mut hi = c[0].0.mul(c[0].1, Round::Up);
        for &(a, b) in &c[1..] {
            lo = lesser(lo, a.mul(b, Round::Down));
            hi = greater(hi, a.mul(b, Round::Up));
        }
        XInterval { lo, hi }
    }

    pub fn div(self, o: XInterval) -> Res<XInterval> {
        if o.contains_zero() {
            return Err(NumericsError::Domain("division by an interval containing 0".into()));
        }
        let c = [(self.lo, o.lo), (self.lo, o.hi), (self.hi, o.lo), (self.hi, o.hi)];
        let mut lo = c[0].0.div(c[0].1, Round::Down);
        let mut hi = c[0].0.div(c[0].1, Round::Up);
        for &(a, b) in &c[1..] {
            lo = lesser(lo, a.div(b, Round::Down));
            hi = greater(hi, a.div(b, Round::Up));
        }
        Ok(XInterval { lo, hi })
    }

    pub fn min(self, o: XInterval) -> XInterval {
        XInterval { lo: lesser(self.lo, o.lo), hi: lesser(self.hi, o.hi) }
    }

    pub fn max(self, o: XInterval) -> XInterval {
        XInterval { lo: greater(self.lo, o.lo), hi: greater(self.hi, o.hi) }
    }

    pub fn hull(self, o: XInterval) -> XInterval {
        XInterval { lo: lesser(self.lo, o.lo), hi: greater(self.hi, o.hi) }
    }

    pub fn sqrt(self) -> Res<XInterval> {
        if self.hi.is_negative() {
            return Err(NumericsError::Domain("root of a negative number".into()));
        }
        let lo = if self.lo.is_negative() { XF::ZERO } else { self.lo };
        Ok(XInterval { lo: lo.sqrt(Round::Down), hi: self.hi.sqrt(Round::Up) })
    }

    pub fn log2(self) -> Res<XInterval> {
        if !self.lo.is_positive() {
            return Err(NumericsError::Domain("log of a nonpositive number".into()));
        }
        Ok(XInterval { lo: self.lo.log2(Round::Down), hi: self.hi.log2(Round::Up) })
    }

    pub fn ln(self) -> Res<XInterval> {
        Ok(self.log2()?.mul(ln2()))
    }

    pub fn exp2(self) -> Res<XInterval> {
        Ok(XInterval { lo: self.lo.exp2(Round::Down)?, hi: self.hi.exp2(Round::Up)? })
    }

    pub fn recip(self) -> Res<XInterval> {
        XInterval::point(XF::ONE).div(self)
    }

    pub fn powi(self, n: i64) -> Res<XInterval> {
        if n < 0 {
            return self.powi(-n)?.recip();
        }
        let mut base = if n % 2 == 0 { self.abs() } else { self };
        let mut acc = XInterval::point(XF::ONE);
        let mut k = n as u64;
        // Both factors are nonnegative here unless the base is negative and
        // the exponent odd, which `mul` handles in general.
        while k > 0 {
            if k & 1 == 1 {
                acc = acc.mul(base);
            }
            k >>= 1;
            if k > 0 {
                base = base.mul(base);
            }
        }
        Ok(acc)
    }

    pub fn abs(self) -> XInterval {
        if !self.lo.is_negative() {
            self
        } else if !self.hi.is_positive() {
            self.neg()
        } else {
            XInterval { lo: XF::ZERO, hi: greater(self.lo.neg(), self.hi) }
        }
    }

    /// `x^y` for `x > 0` (or `x >= 0` with `y > 0`).
    pub fn pow(self, y: XInterval) -> Res<XInterval> {
        if self.lo.is_zero() && y.lo.is_positive() {
            let hi = if self.hi.is_zero() { XInterval::ZERO } else { XInterval::point(self.hi).pow(y)? };
            return Ok(XInterval { lo: XF::ZERO, hi: hi.hi });
        }
        y.mul(self.log2()?).exp2()
    }

    /// `x^(p/q)` for `x >= 0`.
    pub fn pow_rat(self, p: i64, q: u32) -> Res<XInterval> {
        match q {
            1 => self.powi(p),
            2 => self.sqrt()?.powi(p),
            _ => {
                let y = XInterval::int(p).div(XInterval::int(q as i64))?;
                if self.hi.is_negative() || (self.lo.is_negative() && q % 2 == 0) {
                    return Err(NumericsError::Domain("fractional power of a negative number".into()));
                }
                let x = if self.lo.is_negative() { XInterval { lo: XF::ZERO, hi: self.hi } } else { self };
                x.pow(y)
            }
        }
    }

    pub fn mid_f64(self) -> f64 {
        0.5 * (self.lo.to_f64() + self.hi.to_f64())
    }

    pub fn certainly_le(self, o: XInterval) -> bool {
        self.hi <= o.lo
    }

    pub fn certainly_lt(self, o: XInterval) -> bool {
        self.hi < o.lo
    }

    /// Relative width `(hi - lo) / |lo|` as an `f64`, for diagnostics.
    pub fn rel_width(self) -> f64 {
        let w = self.hi.sub(self.lo, Round::Up);
        if self.lo.is_zero() {
            return if w.is_zero() { 0.0 } else { f64::INFINITY };
        }
        w.div(self.lo, Round::Up).to_f64().abs()
    }
}

fn ln2() -> XInterval {
    let v = std::f64::consts::LN_2;
    XInterval { lo: XF::from_f64(v.next_down()), hi: XF::from_f64(v.next_up()) }
}

impl Default for XInterval {
    fn default() -> Self {
        XInterval::ZERO
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::BigRational;

    fn contains(x: XInterval, q: &BigRational) -> bool {
        x.to_interval().contains_rational(q)
    }

    #[test]
    fn directed_products_bracket() {
        let a = XF::from_f64(1.0 / 3.0);
        let b = XF::from_f64(7.1);
        let lo = a.mul(b, Round::Down).to_dyadic();
        let hi = a.mul(b, Round::Up).to_dyadic();
        let exact = a.to_dyadic().mul(&b.to_dyadic());
        assert!(lo <= exact && exact <= hi && lo < hi);
    }

    #[test]
    fn huge_exponents() {
        let x = XInterval::pow2(-4_000_000).mul(XInterval::int(3));
        let y = x.div(XInterval::pow2(-4_000_000)).unwrap();
        assert!(contains(y, &BigRational::from_integer(3.into())));
        assert_eq!(XInterval::pow2(-4_000_000).log2().unwrap(), XInterval::int(-4_000_000));
    }

    #[test]
    fn sums_far_apart() {
        let x = XInterval::int(1).add(XInterval::pow2(-3000));
        assert_eq!(x.lo, XF::ONE);
        assert!(x.hi > XF::ONE);
    }

    #[test]
    fn sqrt_and_log_bracket() {
        let s = XInterval::int(2).sqrt().unwrap();
        assert!(s.mul(s).lo <= XF::from_f64(2.0) && XF::from_f64(2.0) <= s.mul(s).hi);
        let l = XInterval::int(100).log2().unwrap();
        assert!(l.lo.to_f64() < 100f64.log2() && 100f64.log2() < l.hi.to_f64());
        let back = l.exp2().unwrap();
        assert!(back.lo.to_f64() <= 100.0 && 100.0 <= back.hi.to_f64());
    }

    #[test]
    fn dyadic_round_trip() {
        let d = Dyadic::new(BigInt::from(12345678901234567891u64) * 977, -700);
        let lo = XF::from_dyadic(&d, Round::Down).to_dyadic();
        let hi = XF::from_dyadic(&d, Round::Up).to_dyadic();
        assert!(lo < d && d < hi);
        let n = Dyadic::new(BigInt::from(-12345678901234567891i128) * 977, 3);
        let lo = XF::from_dyadic(&n, Round::Down).to_dyadic();
        let hi = XF::from_dyadic(&n, Round::Up).to_dyadic();
        assert!(lo < n && n < hi);
        assert!(XF::from_f64(0.75).to_dyadic() == Dyadic::new(3.into(), -2));
        assert!(!XF::from_f64(5e-324).to_dyadic().is_zero());
    }

    #[test]
    fn ordering() {
        let v = [-3.0, -0.5, 0.0, 1e-300, 0.25, 2.0, 1e300];
        for a in v {
            for b in v {
                assert_eq!(XF::from_f64(a).partial_cmp(&XF::from_f64(b)), a.partial_cmp(&b));
            }
        }
    }

    #[test]
    fn rational_powers() {
        let x = XInterval::int(8).pow_rat(2, 3).unwrap();
        assert!(x.lo.to_f64() <= 4.0 && 4.0 <= x.hi.to_f64());
        let y = XInterval::int(2).pow_rat(-3, 2).unwrap();
        let want = 2f64.powf(-1.5);
        assert!(y.lo.to_f64() <= want && want <= y.hi.to_f64());
    }
}
