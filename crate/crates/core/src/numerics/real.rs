//! Real numbers that can be enclosed to any requested absolute width.

use super::dyadic::Dyadic;
use super::interval::Interval;
use super::{parse_rational, render_rational, NumericsError};
use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use std::fmt;

/// `(a + b sqrt(d)) / c` with `d > 1` not a square and `c > 0`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QuadSurd {
    pub a: BigInt,
    pub b: BigInt,
    pub d: BigInt,
    pub c: BigInt,
}

/// Continued fraction `[a0; a1, ..., ak, (p1, ..., pm)]` with an optional
/// repeating tail.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CfSpec {
    pub pre: Vec<BigInt>,
    pub period: Vec<BigInt>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum RefinableReal {
    Rational(BigRational),
    Quadratic { surd: QuadSurd, cf: CfSpec },
    /// Decimal literal: value plus a stated half-width.
    Decimal { value: BigRational, half_width: BigRational },
    /// `scale * base - offset`.
    Affine { scale: BigInt, base: Box<RefinableReal>, offset: Box<RefinableReal> },
}

type Res<T> = Result<T, NumericsError>;

/// `[floor(q 2^bits), ceil(q 2^bits)] / 2^bits`.
pub fn rational_enclosure(q: &BigRational, bits: u32) -> Interval {
    if let Some(d) = Dyadic::try_from_rational(q) {
        return Interval::point(d);
    }
    let scaled = q * BigRational::from_integer(BigInt::one() << bits as usize);
    Interval::new(
        Dyadic::new(scaled.floor().to_integer(), -(bits as i64)),
        Dyadic::new(scaled.ceil().to_integer(), -(bits as i64)),
    )
}

fn convergent_pair(quotients: &[BigInt]) -> (BigInt, BigInt, BigInt, BigInt) {
    // Returns (P_k, Q_k, P_{k-1}, Q_{k-1}).
    let (mut p0, mut q0) = (BigInt::one(), BigInt::zero());
    let (mut p1, mut q1) = (quotients[0].clone(), BigInt::one());
    for a in &quotients[1..] {
        let p2 = a * &p1 + &p0;
        let q2 = a * &q1 + &q0;
        p0 = std::mem::replace(&mut p1, p2);
        q0 = std::mem::replace(&mut q1, q2);
    }
    (p1, q1, p0, q0)
}

impl QuadSurd {
    fn normalized(a: BigInt, b: BigInt, d: BigInt, c: BigInt) -> QuadSurd {
        let (mut a, mut b, mut c) = if c.is_negative() { (-a, -b, -c) } else { (a, b, c) };
        let g = a.gcd(&b).gcd(&c);
        if !g.is_zero() && !g.is_one() {
            a /= &g;
            b /= &g;
            c /= &g;
        }
        QuadSurd { a, b, d, c }
    }

    /// Surd for an eventually periodic continued fraction with a nonempty period.
    pub fn from_cf(cf: &CfSpec) -> QuadSurd {
        assert!(!cf.period.is_empty() && !cf.pre.is_empty());
        // theta = [p1; ..., pm, theta] solves Qm t^2 + (Q_{m-1} - Pm) t - P_{m-1} = 0.
        let (pm, qm, pm1, qm1) = convergent_pair(&cf.period);
        let bq = &qm1 - &pm;
        let disc = &bq * &bq + BigInt::from(4) * &qm * &pm1;
        // theta = (-bq + sqrt(disc)) / (2 qm), as (u + v sqrt(disc)) / w
        let (u, v, w) = (-bq, BigInt::one(), BigInt::from(2) * &qm);
        // x = (Pk theta + P_{k-1}) / (Qk theta + Q_{k-1})
        let (pk, qk, pk1, qk1) = convergent_pair(&cf.pre);
        let (n1, n2) = (&pk * &u + &pk1 * &w, &pk * &v);
        let (m1, m2) = (&qk * &u + &qk1 * &w, &qk * &v);
        // N/M = N conj(M) / (m1^2 - m2^2 disc)
        let a = &n1 * &m1 - &n2 * &m2 * &disc;
        let b = &n2 * &m1 - &n1 * &m2;
        let c = &m1 * &m1 - &m2 * &m2 * &disc;
        // Pull square factors out of the discriminant.
        let (mut d, mut k) = (disc, BigInt::one());
        let mut f = BigInt::from(2);
        while &f * &f <= d && f < BigInt::from(1u32 << 16) {
            let ff = &f * &f;
            while (&d % &ff).is_zero() {
                d /= &ff;
                k *= &f;
            }
            f += 1;
        }
        QuadSurd::normalized(a, b * k, d, c)
    }

    pub fn enclose(&self, bits: u32) -> Interval {
        let inner = bits + 2;
        let p = inner as usize + self.b.bits() as usize + 2;
        let s = (&self.d << (2 * p)).sqrt();
        let base = &self.a << p;
        let (lo, hi) = if self.b.is_negative() {
            (&base + &self.b * (&s + 1u32), &base + &self.b * &s)
        } else {
            (&base + &self.b * &s, &base + &self.b * (&s + 1u32))
        };
        let den = &self.c << p;
        let to = |n: BigInt, up: bool| {
            let num = n << inner as usize;
            let (q, r) = num.div_mod_floor(&den);
            let q = if up && !r.is_zero() { q + 1 } else { q };
            Dyadic::new(q, -(inner as i64))
        };
        Interval::new(to(lo, false), to(hi, true))
    }
}

impl RefinableReal {
    pub fn rational(q: BigRational) -> RefinableReal {
        RefinableReal::Rational(q)
    }

    pub fn from_cf(cf: CfSpec) -> RefinableReal {
        if cf.period.is_empty() {
            let (p, q, _, _) = convergent_pair(&cf.pre);
            return RefinableReal::Rational(BigRational::new(p, q));
        }
        RefinableReal::Quadratic { surd: QuadSurd::from_cf(&cf), cf }
    }

    /// The golden ratio `[1; (1)]`.
    pub fn golden() -> RefinableReal {
        RefinableReal::from_cf(CfSpec { pre: vec![BigInt::one()], period: vec![BigInt::one()] })
    }

    /// `scale * self - offset`.
    pub fn affine(&self, scale: BigInt, offset: RefinableReal) -> RefinableReal {
        if let (RefinableReal::Rational(x), RefinableReal::Rational(y)) = (self, &offset) {
            return RefinableReal::Rational(x * BigRational::from_integer(scale) - y);
        }
        RefinableReal::Affine { scale, base: Box::new(self.clone()), offset: Box::new(offset) }
    }

    pub fn exact_rational(&self) -> Option<&BigRational> {
        match self {
            RefinableReal::Rational(q) => Some(q),
            _ => None,
        }
    }

    /// An enclosure of absolute width at most `2^-bits`.
    pub fn enclose(&self, bits: u32) -> Res<Interval> {
        match self {
            RefinableReal::Rational(q) => Ok(rational_enclosure(q, bits + 1)),
            RefinableReal::Quadratic { surd, .. } => Ok(surd.enclose(bits)),
            RefinableReal::Decimal { half_width, .. } => {
                let lim = BigRational::new(BigInt::one(), BigInt::one() << (bits as usize + 2));
                if half_width > &lim {
                    return Err(NumericsError::DecimalPrecision);
                }
                Ok(self.stated_enclosure(bits + 8).unwrap())
            }
            RefinableReal::Affine { scale, base, offset } => {
                let extra = scale.bits() as u32 + 2;
                let b = base.enclose(bits + extra)?.scale_int(scale);
                let o = offset.enclose(bits + 2)?;
                Ok(b.sub_exact(&o))
            }
        }
    }

    /// For a decimal literal, its stated interval rounded outward to `bits`
    /// fractional bits.
    pub fn stated_enclosure(&self, bits: u32) -> Option<Interval> {
        match self {
            RefinableReal::Decimal { value, half_width } => {
                let lo = rational_enclosure(&(value - half_width), bits).lo;
                let hi = rational_enclosure(&(value + half_width), bits).hi;
                Some(Interval::new(lo, hi))
            }
            _ => None,
        }
    }

    /// Best enclosure available without failing: decimals yield their
    /// stated interval, everything else refines to `bits`.
    pub fn enclose_lenient(&self, bits: u32) -> Interval {
        match self {
            RefinableReal::Decimal { .. } => self.stated_enclosure(bits + 8).unwrap(),
            RefinableReal::Affine { scale, base, offset } => {
                let extra = scale.bits() as u32 + 2;
                base.enclose_lenient(bits + extra).scale_int(scale).sub_exact(&offset.enclose_lenient(bits + 2))
            }
            _ => self.enclose(bits).expect("exact kinds always refine"),
        }
    }

    pub fn is_decimal(&self) -> bool {
        match self {
            RefinableReal::Decimal { .. } => true,
            RefinableReal::Affine { base, offset, .. } => base.is_decimal() || offset.is_decimal(),
            _ => false,
        }
    }

    pub fn to_f64(&self) -> f64 {
        self.enclose_lenient(64).to_f64()
    }

    /// Parse `[a0; a1, (p1, p2)]`, `p/q`, `0.125`, `0.1234~1e-6`,
    /// or one of the names `golden`, `sqrt2`.
    pub fn parse(s: &str) -> Res<RefinableReal> {
        let s = s.trim();
        match s {
            "golden" | "phi" => return Ok(RefinableReal::golden()),
            "sqrt2" => return RefinableReal::parse("[1; (2)]"),
            _ => {}
        }
        if s.starts_with('[') {
            return Ok(RefinableReal::from_cf(parse_cf(s)?));
        }
        if let Some((v, h)) = s.split_once('~') {
            let value = parse_rational(v)?;
            let half_width = parse_rational(h)?;
            if !half_width.is_positive() {
                return Err(NumericsError::Parse("decimal half-width must be positive".into()));
            }
            return Ok(RefinableReal::Decimal { value, half_width });
        }
        Ok(RefinableReal::Rational(parse_rational(s)?))
    }
}

pub fn parse_cf(s: &str) -> Res<CfSpec> {
    let bad = |m: &str| NumericsError::Parse(format!("continued fraction {s:?}: {m}"));
    let body = s
        .trim()
        .strip_prefix('[')
        .and_then(|r| r.strip_suffix(']'))
        .ok_or_else(|| bad("expected brackets"))?;
    let (head, tail) = match body.split_once(';') {
        Some((h, t)) => (h, t),
        None => (body, ""),
    };
    let num = |t: &str| -> Res<BigInt> { t.trim().parse::<BigInt>().map_err(|_| bad("bad quotient")) };
    let mut pre = vec![num(head)?];
    let mut period = vec![];
    let (plain, rep) = match tail.find('(') {
        Some(i) => {
            let r = tail[i + 1..].trim_end();
            let r = r.strip_suffix(')').ok_or_else(|| bad("unclosed period"))?;
            (&tail[..i], Some(r))
        }
        None => (tail, None),
    };
    for t in plain.split(',') {
        if !t.trim().is_empty() {
            pre.push(num(t)?);
        }
    }
    if let Some(r) = rep {
        for t in r.split(',') {
            period.push(num(t)?);
        }
        if period.is_empty() {
            return Err(bad("empty period"));
        }
    }
    for q in pre.iter().skip(1).chain(period.iter()) {
        if !q.is_positive() {
            return Err(bad("partial quotients after the first must be positive"));
        }
    }
    Ok(CfSpec { pre, period })
}

impl fmt::Display for CfSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}", self.pre[0])?;
        let rest: Vec<String> = self.pre[1..].iter().map(|q| q.to_string()).collect();
        let per: Vec<String> = self.period.iter().map(|q| q.to_string()).collect();
        if !rest.is_empty() || !per.is_empty() {
            write!(f, "; {}", rest.join(", "))?;
            if !per.is_empty() {
                if !rest.is_empty() {
                    write!(f, ", ")?;
                }
                write!(f, "({})", per.join(", "))?;
            }
        }
        write!(f, "]")
    }
}

impl fmt::Display for RefinableReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RefinableReal::Rational(q) => write!(f, "{}", render_rational(q)),
            RefinableReal::Quadratic { cf, .. } => write!(f, "{cf}"),
            RefinableReal::Decimal { value, half_width } => {
                write!(f, "{}~{}", render_rational(value), render_rational(half_width))
            }
            RefinableReal::Affine { scale, base, offset } => write!(f, "{scale}*({base})-({offset})"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn golden_surd() {
        let g = RefinableReal::golden();
        match &g {
            RefinableReal::Quadratic { surd, .. } => {
                assert_eq!((surd.a.clone(), surd.b.clone(), surd.d.clone(), surd.c.clone()),
                    (1.into(), 1.into(), 5.into(), 2.into()));
            }
            _ => panic!(),
        }
        let e = g.enclose(100).unwrap();
        assert!(e.width() <= Dyadic::pow2(-100));
        assert!((e.to_f64() - 1.618033988749895).abs() < 1e-15);
    }

    #[test]
    fn sqrt2_and_preperiod() {
        let r = RefinableReal::parse("[1; (2)]").unwrap();
        assert!((r.to_f64() - 2f64.sqrt()).abs() < 1e-15);
        // [0; 1, (1)] = 1/phi
        let r = RefinableReal::parse("[0; 1, (1)]").unwrap();
        assert!((r.to_f64() - 0.6180339887498949).abs() < 1e-15);
        // [2; 3, (1, 4)]
        let r = RefinableReal::parse("[2; 3, (1, 4)]").unwrap();
        let mut x = 0.0f64;
        let seq = [2.0, 3.0, 1.0, 4.0, 1.0, 4.0, 1.0, 4.0, 1.0, 4.0, 1.0, 4.0, 1.0, 4.0, 1.0, 4.0, 1.0, 4.0];
        for a in seq.iter().rev() {
            x = if x == 0.0 { *a } else { a + 1.0 / x };
        }
        assert!((r.to_f64() - x).abs() < 1e-12);
    }

    #[test]
    fn rational_cf_collapses() {
        let r = RefinableReal::parse("[0; 2]").unwrap();
        assert_eq!(r, RefinableReal::Rational(BigRational::new(1.into(), 2.into())));
        assert_eq!(parse_cf("[1; 2, (3, 4)]").unwrap().to_string(), "[1; 2, (3, 4)]");
    }

    #[test]
    fn decimal_refuses_refinement() {
        let r = RefinableReal::parse("0.123456~1e-6").unwrap();
        assert!(r.enclose(10).is_ok());
        assert_eq!(r.enclose(40), Err(NumericsError::DecimalPrecision));
        let s = r.enclose_lenient(40);
        assert!(s.width().to_f64() >= 2e-6);
    }

    #[test]
    fn affine_width() {
        let g = RefinableReal::golden();
        let a = g.affine(BigInt::from(1_000_000u64), RefinableReal::parse("1/3").unwrap());
        let e = a.enclose(60).unwrap();
        assert!(e.width() <= Dyadic::pow2(-60));
        assert!((e.to_f64() - (1e6 * 1.618033988749895 - 1.0 / 3.0)).abs() < 1e-6);
    }
}
