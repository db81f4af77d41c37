//! Exact dyadic rationals `mant * 2^exp` with directed rounding.

use num_bigint::{BigInt, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use std::cmp::Ordering;
use std::fmt;

/// Rounding direction for inexact operations.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Round {
    Down,
    Up,
}

impl Round {
    pub fn flip(self) -> Round {
        match self {
            Round::Down => Round::Up,
            Round::Up => Round::Down,
        }
    }
}

/// `mant * 2^exp`. The mantissa is kept odd (or zero with `exp == 0`), so
/// structural equality is value equality.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Dyadic {
    mant: BigInt,
    exp: i64,
}

fn bits(m: &BigInt) -> i64 {
    m.bits() as i64
}

impl Dyadic {
    pub fn new(mant: BigInt, exp: i64) -> Dyadic {
        if mant.is_zero() {
            return Dyadic::zero();
        }
        let tz = mant.trailing_zeros().unwrap_or(0);
        if tz == 0 {
            Dyadic { mant, exp }
        } else {
            Dyadic { mant: mant >> tz, exp: exp + tz as i64 }
        }
    }

    pub fn zero() -> Dyadic {
        Dyadic { mant: BigInt::zero(), exp: 0 }
    }

    pub fn one() -> Dyadic {
        Dyadic { mant: BigInt::one(), exp: 0 }
    }

    pub fn from_int<T: Into<BigInt>>(v: T) -> Dyadic {
        Dyadic::new(v.into(), 0)
    }

    /// `2^k`.
    pub fn pow2(k: i64) -> Dyadic {
        Dyadic { mant: BigInt::one(), exp: k }
    }

    pub fn mantissa(&self) -> &BigInt {
        &self.mant
    }

    pub fn exponent(&self) -> i64 {
        self.exp
    }

    pub fn is_zero(&self) -> bool {
        self.mant.is_zero()
    }

    pub fn signum(&self) -> i32 {
        match self.mant.sign() {
            Sign::Minus => -1,
            Sign::NoSign => 0,
            Sign::Plus => 1,
        }
    }

    pub fn is_positive(&self) -> bool {
        self.signum() > 0
    }

    pub fn is_negative(&self) -> bool {
        self.signum() < 0
    }

    pub fn neg(&self) -> Dyadic {
        Dyadic { mant: -&self.mant, exp: self.exp }
    }

    pub fn abs(&self) -> Dyadic {
        Dyadic { mant: self.mant.abs(), exp: self.exp }
    }

    /// Multiply by `2^k` (exact).
    pub fn shl(&self, k: i64) -> Dyadic {
        if self.is_zero() {
            return Dyadic::zero();
        }
        Dyadic { mant: self.mant.clone(), exp: self.exp + k }
    }

    /// Position of the leading bit: `2^(top-1) <= |v| < 2^top`.
    fn top(&self) -> i64 {
        bits(&self.mant) + self.exp
    }

    /// `floor(log2 |v|)` for nonzero values.
    pub fn floor_log2(&self) -> i64 {
        assert!(!self.is_zero(), "floor_log2 of zero");
        self.top() - 1
    }

    /// Whether `|v|` is an exact power of two.
    pub fn is_pow2(&self) -> bool {
        !self.is_zero() && self.mant.abs().is_one()
    }

    pub fn add(&self, o: &Dyadic) -> Dyadic {
        if self.is_zero() {
            return o.clone();
        }
        if o.is_zero() {
            return self.clone();
        }
        let e = self.exp.min(o.exp);
        let a = &self.mant << (self.exp - e) as usize;
        let b = &o.mant << (o.exp - e) as usize;
        Dyadic::new(a + b, e)
    }

    pub fn sub(&self, o: &Dyadic) -> Dyadic {
        self.add(&o.neg())
    }

    pub fn mul(&self, o: &Dyadic) -> Dyadic {
        if self.is_zero() || o.is_zero() {
            return Dyadic::zero();
        }
        Dyadic { mant: &self.mant * &o.mant, exp: self.exp + o.exp }
    }

    /// Round to at most `prec` significant bits.
    pub fn round(&self, prec: u32, dir: Round) -> Dyadic {
        let b = bits(&self.mant);
        if b <= prec as i64 {
            return self.clone();
        }
        let s = (b - prec as i64) as usize;
        let m = match dir {
            Round::Down => &self.mant >> s,
            Round::Up => -((-&self.mant) >> s),
        };
        Dyadic::new(m, self.exp + s as i64)
    }

    /// Round to a multiple of `2^-frac_bits` (absolute grid).
    pub fn round_abs(&self, frac_bits: i64, dir: Round) -> Dyadic {
        if self.exp >= -frac_bits {
            return self.clone();
        }
        let s = (-frac_bits - self.exp) as usize;
        let m = match dir {
            Round::Down => &self.mant >> s,
            Round::Up => -((-&self.mant) >> s),
        };
        Dyadic::new(m, -frac_bits)
    }

    /// Directed sum. Cheap even when the exponents are far apart.
    pub fn add_round(&self, o: &Dyadic, prec: u32, dir: Round) -> Dyadic {
        if self.is_zero() {
            return o.round(prec, dir);
        }
        if o.is_zero() {
            return self.round(prec, dir);
        }
        let (big, small) = if self.top() >= o.top() { (self, o) } else { (o, self) };
        let cut = big.top() - prec as i64 - 3;
        if small.top() < cut {
            // Replace the tiny summand by a one-sided proxy of magnitude 2^cut.
            let proxy = match (small.signum() > 0, dir) {
                (true, Round::Down) | (false, Round::Up) => Dyadic::zero(),
                (true, Round::Up) => Dyadic::pow2(cut),
                (false, Round::Down) => Dyadic::pow2(cut).neg(),
            };
            return big.add(&proxy).round(prec, dir);
        }
        self.add(o).round(prec, dir)
    }

    pub fn sub_round(&self, o: &Dyadic, prec: u32, dir: Round) -> Dyadic {
        self.add_round(&o.neg(), prec, dir)
    }

    pub fn mul_round(&self, o: &Dyadic, prec: u32, dir: Round) -> Dyadic {
        self.mul(o).round(prec, dir)
    }

    /// Directed quotient; panics on a zero divisor.
    pub fn div_round(&self, o: &Dyadic, prec: u32, dir: Round) -> Dyadic {
        assert!(!o.is_zero(), "division by zero");
        if self.is_zero() {
            return Dyadic::zero();
        }
        let k = (prec as i64 + 2 + bits(&o.mant) - bits(&self.mant)).max(0);
        let num = &self.mant << k as usize;
        let (mut q, r) = num.div_mod_floor(&o.mant);
        if dir == Round::Up && !r.is_zero() {
            q += 1;
        }
        Dyadic::new(q, self.exp - o.exp - k).round(prec, dir)
    }

    /// Directed square root of a nonnegative value.
    pub fn sqrt_round(&self, prec: u32, dir: Round) -> Dyadic {
        self.nth_root_round(2, prec, dir)
    }

    /// Directed `n`-th root of a nonnegative value.
    pub fn nth_root_round(&self, n: u32, prec: u32, dir: Round) -> Dyadic {
        assert!(n >= 1);
        assert!(!self.is_negative(), "root of a negative number");
        if self.is_zero() || n == 1 {
            return self.round(prec, dir);
        }
        let n64 = n as i64;
        let want = n64 * (prec as i64 + 2);
        let mut k = (want - bits(&self.mant)).max(0);
        let r = (self.exp - k).rem_euclid(n64);
        k += r;
        let m = &self.mant << k as usize;
        let mut root = m.nth_root(n);
        if dir == Round::Up && root.pow(n) != m {
            root += 1;
        }
        Dyadic::new(root, (self.exp - k) / n64).round(prec, dir)
    }

    pub fn floor(&self) -> BigInt {
        if self.exp >= 0 {
            &self.mant << self.exp as usize
        } else {
            &self.mant >> (-self.exp) as usize
        }
    }

    pub fn ceil(&self) -> BigInt {
        -(self.neg().floor())
    }

    pub fn to_rational(&self) -> BigRational {
        if self.exp >= 0 {
            BigRational::from_integer(&self.mant << self.exp as usize)
        } else {
            BigRational::new(self.mant.clone(), BigInt::one() << (-self.exp) as usize)
        }
    }

    /// Directed conversion of a rational.
    pub fn from_rational(q: &BigRational, prec: u32, dir: Round) -> Dyadic {
        if q.denom().is_one() {
            return Dyadic::from_int(q.numer().clone()).round(prec, dir);
        }
        let n = Dyadic::from_int(q.numer().clone());
        let d = Dyadic::from_int(q.denom().clone());
        n.div_round(&d, prec, dir)
    }

    /// Exact conversion when the denominator is a power of two.
    pub fn try_from_rational(q: &BigRational) -> Option<Dyadic> {
        let d = q.denom();
        let tz = d.trailing_zeros()?;
        if (d >> tz as usize).is_one() {
            Some(Dyadic::new(q.numer().clone(), -(tz as i64)))
        } else {
            None
        }
    }

    /// Nearest `f64` (approximate; for display and heuristics only).
    pub fn to_f64(&self) -> f64 {
        if self.is_zero() {
            return 0.0;
        }
        let b = bits(&self.mant);
        let (m, e) = if b > 60 {
            let s = (b - 60) as usize;
            ((&self.mant >> s).to_f64().unwrap_or(0.0), self.exp + s as i64)
        } else {
            (self.mant.to_f64().unwrap_or(0.0), self.exp)
        };
        let e = e.clamp(-2200, 2200) as i32;
        m * 2f64.powi(e / 2) * 2f64.powi(e - e / 2)
    }

    /// `log2 |v|` as an approximate `f64`, valid far outside the `f64` range.
    pub fn log2_f64(&self) -> f64 {
        let b = bits(&self.mant);
        let s = (b - 60).max(0) as usize;
        let m = (&self.mant.abs() >> s).to_f64().unwrap_or(1.0);
        m.log2() + (self.exp + s as i64) as f64
    }

    /// Exact conversion from a finite `f64`.
    pub fn from_f64(v: f64) -> Option<Dyadic> {
        if !v.is_finite() {
            return None;
        }
        if v == 0.0 {
            return Some(Dyadic::zero());
        }
        let bits = v.to_bits();
        let sign = if bits >> 63 == 1 { -1i64 } else { 1 };
        let e = ((bits >> 52) & 0x7ff) as i64;
        let f = (bits & ((1u64 << 52) - 1)) as i64;
        let (m, ex) = if e == 0 { (f, -1074) } else { (f | (1i64 << 52), e - 1075) };
        Some(Dyadic::new(BigInt::from(sign * m), ex))
    }

    pub fn lesser<'a>(&'a self, o: &'a Dyadic) -> &'a Dyadic {
        if self <= o {
            self
        } else {
            o
        }
    }

    pub fn greater<'a>(&'a self, o: &'a Dyadic) -> &'a Dyadic {
        if self >= o {
            self
        } else {
            o
        }
    }
}

impl Ord for Dyadic {
    fn cmp(&self, o: &Dyadic) -> Ordering {
        let (sa, sb) = (self.signum(), o.signum());
        if sa != sb {
            return sa.cmp(&sb);
        }
        if sa == 0 {
            return Ordering::Equal;
        }
        let (ta, tb) = (self.top(), o.top());
        if ta != tb {
            let mag = ta.cmp(&tb);
            return if sa > 0 { mag } else { mag.reverse() };
        }
        let e = self.exp.min(o.exp);
        let a = &self.mant << (self.exp - e) as usize;
        let b = &o.mant << (o.exp - e) as usize;
        a.cmp(&b)
    }
}

impl PartialOrd for Dyadic {
    fn partial_cmp(&self, o: &Dyadic) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}

impl fmt::Display for Dyadic {
    /// Exact rendering as `p/q` (or an integer).
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let q = self.to_rational();
        if q.denom().is_one() {
            write!(f, "{}", q.numer())
        } else {
            write!(f, "{}/{}", q.numer(), q.denom())
        }
    }
}
