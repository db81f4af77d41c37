//! Closed intervals with dyadic endpoints and outward rounding.
//!
//! Every operation takes a working precision `prec` (significant bits of
//! each endpoint). The result always contains the exact image of the inputs.

use super::dyadic::{Dyadic, Round};
use super::NumericsError;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use std::sync::OnceLock;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Interval {
    pub lo: Dyadic,
    pub hi: Dyadic,
}

type Res<T> = Result<T, NumericsError>;

impl Interval {
    pub fn new(lo: Dyadic, hi: Dyadic) -> Interval {
        debug_assert!(lo <= hi, "inverted interval");
        Interval { lo, hi }
    }

    pub fn point(v: Dyadic) -> Interval {
        Interval { lo: v.clone(), hi: v }
    }

    pub fn int(v: i64) -> Interval {
        Interval::point(Dyadic::from_int(v))
    }

    pub fn pow2(k: i64) -> Interval {
        Interval::point(Dyadic::pow2(k))
    }

    pub fn zero() -> Interval {
        Interval::point(Dyadic::zero())
    }

    pub fn one() -> Interval {
        Interval::point(Dyadic::one())
    }

    pub fn from_rational(q: &BigRational, prec: u32) -> Interval {
        if let Some(d) = Dyadic::try_from_rational(q) {
            return Interval::point(d).round(prec);
        }
        Interval {
            lo: Dyadic::from_rational(q, prec, Round::Down),
            hi: Dyadic::from_rational(q, prec, Round::Up),
        }
    }

    pub fn is_point(&self) -> bool {
        self.lo == self.hi
    }

    pub fn width(&self) -> Dyadic {
        self.hi.sub(&self.lo)
    }

    /// Midpoint (exact).
    pub fn mid(&self) -> Dyadic {
        self.lo.add(&self.hi).shl(-1)
    }

    pub fn contains(&self, v: &Dyadic) -> bool {
        &self.lo <= v && v <= &self.hi
    }

    pub fn contains_rational(&self, q: &BigRational) -> bool {
        &self.lo.to_rational() <= q && q <= &self.hi.to_rational()
    }

    pub fn contains_zero(&self) -> bool {
        !self.lo.is_positive() && !self.hi.is_negative()
    }

    pub fn is_positive(&self) -> bool {
        self.lo.is_positive()
    }

    /// Outward rounding to `prec` bits.
    pub fn round(&self, prec: u32) -> Interval {
        Interval { lo: self.lo.round(prec, Round::Down), hi: self.hi.round(prec, Round::Up) }
    }

    pub fn neg(&self) -> Interval {
        Interval { lo: self.hi.neg(), hi: self.lo.neg() }
    }

    pub fn add(&self, o: &Interval, prec: u32) -> Interval {
        Interval {
            lo: self.lo.add_round(&o.lo, prec, Round::Down),
            hi: self.hi.add_round(&o.hi, prec, Round::Up),
        }
    }

    pub fn sub(&self, o: &Interval, prec: u32) -> Interval {
        self.add(&o.neg(), prec)
    }

    /// Exact sum (no rounding).
    pub fn add_exact(&self, o: &Interval) -> Interval {
        Interval { lo: self.lo.add(&o.lo), hi: self.hi.add(&o.hi) }
    }

    /// Exact difference (no rounding).
    pub fn sub_exact(&self, o: &Interval) -> Interval {
        Interval { lo: self.lo.sub(&o.hi), hi: self.hi.sub(&o.lo) }
    }

    pub fn mul(&self, o: &Interval, prec: u32) -> Interval {
        if !self.lo.is_negative() && !o.lo.is_negative() {
            return Interval {
                lo: self.lo.mul_round(&o.lo, prec, Round::Down),
                hi: self.hi.mul_round(&o.hi, prec, Round::Up),
            };
        }
        let c = [self.lo.mul(&o.lo), self.lo.mul(&o.hi), self.hi.mul(&o.lo), self.hi.mul(&o.hi)];
        let lo = c.iter().min().unwrap().round(prec, Round::Down);
        let hi = c.iter().max().unwrap().round(prec, Round::Up);
        Interval { lo, hi }
    }

    /// Exact product with an integer.
    pub fn scale_int(&self, k: &BigInt) -> Interval {
        let kd = Dyadic::from_int(k.clone());
        let (a, b) = (self.lo.mul(&kd), self.hi.mul(&kd));
        if a <= b {
            Interval { lo: a, hi: b }
        } else {
            Interval { lo: b, hi: a }
        }
    }

    /// Exact product with `2^k`.
    pub fn shl(&self, k: i64) -> Interval {
        Interval { lo: self.lo.shl(k), hi: self.hi.shl(k) }
    }

    pub fn recip(&self, prec: u32) -> Res<Interval> {
        if self.contains_zero() {
            return Err(NumericsError::Domain("reciprocal of an interval containing zero".into()));
        }
        let one = Dyadic::one();
        Ok(Interval {
            lo: one.div_round(&self.hi, prec, Round::Down),
            hi: one.div_round(&self.lo, prec, Round::Up),
        })
    }

    pub fn div(&self, o: &Interval, prec: u32) -> Res<Interval> {
        if o.contains_zero() {
            return Err(NumericsError::Domain("division by an interval containing zero".into()));
        }
        if !self.lo.is_negative() && o.lo.is_positive() {
            return Ok(Interval {
                lo: self.lo.div_round(&o.hi, prec, Round::Down),
                hi: self.hi.div_round(&o.lo, prec, Round::Up),
            });
        }
        let mut lo: Option<Dyadic> = None;
        let mut hi: Option<Dyadic> = None;
        for a in [&self.lo, &self.hi] {
            for b in [&o.lo, &o.hi] {
                let l = a.div_round(b, prec, Round::Down);
                let h = a.div_round(b, prec, Round::Up);
                lo = Some(match lo {
                    Some(x) if x <= l => x,
                    _ => l,
                });
                hi = Some(match hi {
                    Some(x) if x >= h => x,
                    _ => h,
                });
            }
        }
        Ok(Interval { lo: lo.unwrap(), hi: hi.unwrap() })
    }

    pub fn abs(&self) -> Interval {
        if !self.lo.is_negative() {
            self.clone()
        } else if !self.hi.is_positive() {
            self.neg()
        } else {
            Interval { lo: Dyadic::zero(), hi: self.lo.abs().greater(&self.hi).clone() }
        }
    }

    pub fn min(&self, o: &Interval) -> Interval {
        Interval { lo: self.lo.lesser(&o.lo).clone(), hi: self.hi.lesser(&o.hi).clone() }
    }

    pub fn max(&self, o: &Interval) -> Interval {
        Interval { lo: self.lo.greater(&o.lo).clone(), hi: self.hi.greater(&o.hi).clone() }
    }

    /// Convex hull.
    pub fn hull(&self, o: &Interval) -> Interval {
        Interval { lo: self.lo.lesser(&o.lo).clone(), hi: self.hi.greater(&o.hi).clone() }
    }

    /// Integer power; negative exponents need an interval away from zero.
    pub fn powi(&self, n: i64, prec: u32) -> Res<Interval> {
        if n == 0 {
            return Ok(Interval::one());
        }
        if n < 0 {
            return self.powi(-n, prec + 4)?.recip(prec);
        }
        let n = n as u64;
        let base = if n % 2 == 0 { self.abs() } else { self.clone() };
        // x -> x^n is monotone on the (possibly folded) base.
        let p = prec + 2 * (64 - n.leading_zeros());
        let lo = pow_dir(&base.lo, n, p, Round::Down).round(prec, Round::Down);
        let hi = pow_dir(&base.hi, n, p, Round::Up).round(prec, Round::Up);
        Ok(Interval { lo, hi })
    }

    pub fn sqrt(&self, prec: u32) -> Res<Interval> {
        self.nth_root(2, prec)
    }

    /// Real `n`-th root on the nonnegative part; fails if the interval is
    /// entirely negative.
    pub fn nth_root(&self, n: u32, prec: u32) -> Res<Interval> {
        if self.hi.is_negative() {
            return Err(NumericsError::Domain("root of a negative number".into()));
        }
        let lo = if self.lo.is_negative() { Dyadic::zero() } else { self.lo.clone() };
        Ok(Interval {
            lo: lo.nth_root_round(n, prec, Round::Down),
            hi: self.hi.nth_root_round(n, prec, Round::Up),
        })
    }

    /// `x^(p/q)` for `x >= 0`, `q >= 1`.
    pub fn pow_rat(&self, p: i64, q: u32, prec: u32) -> Res<Interval> {
        if q == 1 {
            return self.powi(p, prec);
        }
        if p < 0 {
            let pos = self.pow_rat(-p, q, prec + 4)?;
            return pos.recip(prec);
        }
        let inner = self.powi(p, prec + 8)?;
        inner.nth_root(q, prec)
    }

    /// `log2 x` for `x > 0`.
    pub fn log2(&self, prec: u32) -> Res<Interval> {
        if !self.lo.is_positive() {
            return Err(NumericsError::Domain("log of a nonpositive number".into()));
        }
        Ok(Interval { lo: log2_dir(&self.lo, prec, Round::Down), hi: log2_dir(&self.hi, prec, Round::Up) })
    }

    /// Natural logarithm for `x > 0`.
    pub fn ln(&self, prec: u32) -> Res<Interval> {
        let l2 = self.log2(prec + 4)?;
        Ok(l2.mul(&ln2(prec + 4), prec))
    }

    /// `2^x` for arbitrary real `x` (used for inverses of logarithms).
    pub fn exp2(&self, prec: u32) -> Interval {
        Interval { lo: exp2_dir(&self.lo, prec, Round::Down), hi: exp2_dir(&self.hi, prec, Round::Up) }
    }

    /// `e^x`.
    pub fn exp(&self, prec: u32) -> Interval {
        let l2e = ln2(prec + 8).recip(prec + 8).expect("ln 2 > 0");
        self.mul(&l2e, prec + 8).exp2(prec)
    }

    pub fn to_f64(&self) -> f64 {
        self.mid().to_f64()
    }

    /// Whether every point of `self` is `< o` pointwise.
    pub fn certainly_lt(&self, o: &Interval) -> bool {
        self.hi < o.lo
    }

    pub fn certainly_le(&self, o: &Interval) -> bool {
        self.hi <= o.lo
    }

    /// Exact rational endpoints rendered as strings.
    pub fn render(&self) -> [String; 2] {
        [self.lo.to_string(), self.hi.to_string()]
    }
}

fn pow_dir(b: &Dyadic, n: u64, prec: u32, dir: Round) -> Dyadic {
    // Monotone square-and-multiply with directed rounding; valid for b >= 0,
    // and for odd n with b < 0 via symmetry.
    if b.is_negative() {
        return pow_dir(&b.neg(), n, prec, dir.flip()).neg();
    }
    let mut result = Dyadic::one();
    let mut base = b.clone();
    let mut e = n;
    while e > 0 {
        if e & 1 == 1 {
            result = result.mul_round(&base, prec, dir);
        }
        e >>= 1;
        if e > 0 {
            base = base.mul_round(&base, prec, dir);
        }
    }
    result
}

/// Directed `log2` of a positive dyadic: exact for powers of two; otherwise
/// extracts fractional bits by repeated squaring of a fixed-point mantissa.
pub(crate) fn log2_dir(v: &Dyadic, prec: u32, dir: Round) -> Dyadic {
    let k = v.floor_log2();
    if v.is_pow2() {
        return Dyadic::from_int(k);
    }
    let nbits = prec as i64 + 4;
    let w = (2 * nbits + 16) as usize;
    // m = v / 2^k in (1, 2), as a fixed-point integer y / 2^w.
    let scaled = v.shl(w as i64 - k);
    let mut y = match dir {
        Round::Down => scaled.floor(),
        Round::Up => scaled.ceil(),
    };
    let two = BigInt::one() << (w + 1);
    let mut frac = BigInt::zero();
    for _ in 0..nbits {
        let sq = &y * &y;
        y = match dir {
            Round::Down => sq >> w,
            Round::Up => -((-sq) >> w),
        };
        frac <<= 1usize;
        if y >= two {
            frac += 1;
            y = match dir {
                Round::Down => y >> 1usize,
                Round::Up => -((-y) >> 1usize),
            };
        }
    }
    if dir == Round::Up {
        frac += 1;
    }
    Dyadic::from_int(k).add(&Dyadic::new(frac, -nbits)).round(prec, dir)
}

/// Directed `2^x`.
fn exp2_dir(x: &Dyadic, prec: u32, dir: Round) -> Dyadic {
    let n = x.floor();
    let f = x.sub(&Dyadic::from_int(n.clone()));
    let n: i64 = num_traits::ToPrimitive::to_i64(&n).expect("exponent out of range");
    if f.is_zero() {
        return Dyadic::pow2(n);
    }
    // 2^f = e^(f ln 2), f in (0,1); Taylor series with a tail bound.
    let p = prec + 16;
    let l2 = ln2(p);
    let t = match dir {
        Round::Down => f.mul_round(&l2.lo, p, Round::Down),
        Round::Up => f.mul_round(&l2.hi, p, Round::Up),
    };
    let mut sum = Dyadic::one();
    let mut term = Dyadic::one();
    let mut k = 1i64;
    loop {
        term = term.mul_round(&t, p, dir).div_round(&Dyadic::from_int(k), p, dir);
        sum = sum.add_round(&term, p, dir);
        k += 1;
        if term.is_zero() || term.floor_log2() < -(p as i64) - 4 {
            break;
        }
    }
    if dir == Round::Up {
        // Tail after the last term is at most twice that term (t < 1).
        sum = sum.add_round(&term.shl(1), p, Round::Up);
    }
    sum.shl(n).round(prec, dir)
}

static LN2: OnceLock<Interval> = OnceLock::new();
const LN2_BITS: u32 = 1024;

fn ln2_series(prec: u32) -> Interval {
    // ln 2 = sum_{k>=1} 1/(k 2^k); tail after n terms < 1/((n+1) 2^n).
    let p = prec + 32;
    let n = prec as i64 + 16;
    let mut lo = Dyadic::zero();
    for k in 1..=n {
        let term = Dyadic::one().div_round(&Dyadic::from_int(k), p, Round::Down).shl(-k);
        lo = lo.add_round(&term, p, Round::Down);
    }
    let mut hi = lo.clone();
    for k in 1..=n {
        let lo_t = Dyadic::one().div_round(&Dyadic::from_int(k), p, Round::Down).shl(-k);
        let hi_t = Dyadic::one().div_round(&Dyadic::from_int(k), p, Round::Up).shl(-k);
        hi = hi.add_round(&hi_t.sub(&lo_t), p, Round::Up);
    }
    let tail = Dyadic::one().div_round(&Dyadic::from_int(n + 1), p, Round::Up).shl(-n);
    hi = hi.add_round(&tail, p, Round::Up);
    Interval { lo, hi }.round(prec)
}

/// Enclosure of `ln 2` with at least `prec` bits.
pub fn ln2(prec: u32) -> Interval {
    if prec <= LN2_BITS - 8 {
        LN2.get_or_init(|| ln2_series(LN2_BITS)).round(prec)
    } else {
        ln2_series(prec)
    }
}
