//! Exact and interval arithmetic.

pub mod cf;
pub mod distance;
pub mod dyadic;
pub mod floor_count;
pub mod interval;
pub mod real;
pub mod xf;

pub use dyadic::{Dyadic, Round};
pub use interval::Interval;
pub use real::RefinableReal;
pub use xf::{XInterval, XF};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::ToPrimitive;

/// Exact rational numbers (configuration values, bookkeeping).
pub type ExactRational = BigRational;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum NumericsError {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("precision cap of {0} bits reached without a decision")]
    PrecisionCap(u32),
    #[error("decimal literal cannot be refined below its stated precision")]
    DecimalPrecision,
    #[error("parse error: {0}")]
    Parse(String),
}

/// Working-precision policy: start low, double on ambiguity, stop at a cap.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Precision {
    pub start: u32,
    pub cap: u32,
}

impl Default for Precision {
    fn default() -> Self {
        Precision { start: 64, cap: 4096 }
    }
}

impl Precision {
    pub fn with_cap(cap: u32) -> Precision {
        Precision { start: 64.min(cap), cap }
    }

    /// Run `f` at increasing precision until it yields a decision.
    pub fn escalate<T>(
        &self,
        mut f: impl FnMut(u32) -> Result<Option<T>, NumericsError>,
    ) -> Result<T, NumericsError> {
        let mut bits = self.start.max(16);
        loop {
            if let Some(v) = f(bits)? {
                return Ok(v);
            }
            if bits >= self.cap {
                return Err(NumericsError::PrecisionCap(self.cap));
            }
            bits = (bits * 2).min(self.cap);
        }
    }
}

/// Three-way comparison of an enclosure against a point.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Comparison {
    Below,
    Above,
    RefineNeeded,
}

/// `Below` iff the whole enclosure is `< d`, `Above` iff it is `> d`.
pub fn compare_to_dyadic(e: &Interval, d: &Dyadic) -> Comparison {
    if &e.hi < d {
        Comparison::Below
    } else if &e.lo > d {
        Comparison::Above
    } else {
        Comparison::RefineNeeded
    }
}

/// Parse `p/q`, an integer, or a plain decimal such as `0.125` (exact).
pub fn parse_rational(s: &str) -> Result<BigRational, NumericsError> {
    use num_bigint::BigInt;
    use num_traits::Zero;
    let s = s.trim();
    let bad = || NumericsError::Parse(format!("not a rational: {s:?}"));
    if let Some((p, q)) = s.split_once('/') {
        let p: BigInt = p.trim().parse().map_err(|_| bad())?;
        let q: BigInt = q.trim().parse().map_err(|_| bad())?;
        if q.is_zero() {
            return Err(bad());
        }
        return Ok(BigRational::new(p, q));
    }
    let (mant, exp10) = match s.split_once(['e', 'E']) {
        Some((m, e)) => (m, e.parse::<i32>().map_err(|_| bad())?),
        None => (s, 0),
    };
    let (neg, mant) = match mant.strip_prefix('-') {
        Some(m) => (true, m),
        None => (false, mant.strip_prefix('+').unwrap_or(mant)),
    };
    let (ip, fp) = mant.split_once('.').unwrap_or((mant, ""));
    if ip.is_empty() && fp.is_empty() {
        return Err(bad());
    }
    if !ip.chars().chain(fp.chars()).all(|c| c.is_ascii_digit()) {
        return Err(bad());
    }
    let digits: BigInt = format!("{ip}{fp}").parse().unwrap_or_else(|_| BigInt::zero());
    let e = exp10 - fp.len() as i32;
    let ten = BigInt::from(10);
    let mut q = if e >= 0 {
        BigRational::from_integer(digits * num_traits::pow(ten, e as usize))
    } else {
        BigRational::new(digits, num_traits::pow(ten, (-e) as usize))
    };
    if neg {
        q = -q;
    }
    Ok(q)
}

/// Render a rational as `p/q` (or an integer).
pub fn render_rational(q: &BigRational) -> String {
    if *q.denom() == num_bigint::BigInt::from(1) {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

/// Smallest integer `n >= y^a` for `y >= 1` and rational `a > 0`.
pub fn ceil_pow(y: &BigInt, a: &BigRational) -> BigInt {
    let p = a.numer().to_u32().expect("exponent numerator fits u32");
    let q = a.denom().to_u32().expect("exponent denominator fits u32");
    let v = num_traits::pow(y.clone(), p as usize);
    let r = v.nth_root(q);
    if num_traits::pow(r.clone(), q as usize) == v {
        r
    } else {
        r + 1
    }
}

/// Smallest integer `>= q`.
pub fn ceil_rational(q: &BigRational) -> BigInt {
    q.ceil().to_integer()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_rationals() {
        assert_eq!(render_rational(&parse_rational("3/6").unwrap()), "1/2");
        assert_eq!(render_rational(&parse_rational("0.125").unwrap()), "1/8");
        assert_eq!(render_rational(&parse_rational("-2.5e-1").unwrap()), "-1/4");
        assert_eq!(render_rational(&parse_rational("17").unwrap()), "17");
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("abc").is_err());
    }

    #[test]
    fn escalation_hits_cap() {
        let p = Precision { start: 64, cap: 256 };
        let mut seen = vec![];
        let r: Result<(), _> = p.escalate(|b| {
            seen.push(b);
            Ok(None)
        });
        assert_eq!(r, Err(NumericsError::PrecisionCap(256)));
        assert_eq!(seen, vec![64, 128, 256]);
    }
}
