//! Brute-force ground truth: exact counts of `x` by distance scale, finite
//! badness scans and witness verification.

pub mod verify;

pub use verify::{verify_witness, VerifyInput, VerifyReport};

use crate::admissibility::ssum::mu_max;
use crate::funcsys::{FunctionSystem, SystemError, UnaryFn};
use crate::numerics::cf::convergents;
use crate::numerics::distance::{dist_rational, DistanceContext};
use crate::numerics::{Dyadic, Interval, NumericsError, Precision, RefinableReal};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use serde::Serialize;

type Res<T> = Result<T, SystemError>;

/// Where `||x alpha - eta||` sits among the scales `(2^-mu-1, 2^-mu]`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Scale {
    Zero,
    Exact(i64),
    /// Undecided between `mu` and `mu + 1` at the precision cap.
    Between(i64),
}

/// `mu = floor(log2(1/d))` for each `x` of a dyadic block.
pub struct Classifier {
    alpha: RefinableReal,
    eta: RefinableReal,
    ctx: DistanceContext,
    prec: Precision,
}

impl Classifier {
    pub fn new(alpha: &RefinableReal, eta: &RefinableReal, x_max: u64, prec: Precision) -> Classifier {
        let bits = 2 * (64 - x_max.leading_zeros()) + 64;
        Classifier { alpha: alpha.clone(), eta: eta.clone(), ctx: DistanceContext::new(alpha, bits), prec }
    }

    pub fn scale(&mut self, x: u64) -> Res<Scale> {
        if let (Some(a), Some(e)) = (self.alpha.exact_rational(), self.eta.exact_rational()) {
            let d = dist_rational(&(a * BigRational::from_integer(x.into()) - e));
            if d.is_zero() {
                return Ok(Scale::Zero);
            }
            // floor(log2(1/d)) = floor(log2(den/num))
            let (n, m) = (d.denom().clone(), d.numer().clone());
            let k = n.bits() as i64 - m.bits() as i64;
            let ge = if k >= 0 { n >= (&m << k as usize) } else { (&n << (-k) as usize) >= m };
            return Ok(Scale::Exact(if ge { k } else { k - 1 }));
        }
        let xb = BigInt::from(x);
        let mut ctx = self.ctx.clone();
        let mut last = None;
        let r = self.prec.escalate(|bits| {
            while ctx.bits() < bits && ctx.refinable() {
                ctx = ctx.refined();
            }
            let d = ctx.dist(&xb, &self.eta.enclose_lenient(ctx.bits()));
            if d.hi.is_zero() {
                return Ok(Some(Scale::Zero));
            }
            if !d.lo.is_positive() {
                return Ok(if ctx.refinable() { None } else { Some(Scale::Zero) });
            }
            // d in (2^-mu-1, 2^-mu]  <=>  mu = floor(log2(1/d))
            let mu_of = |v: &Dyadic| -> i64 {
                let f = v.floor_log2();
                if v.is_pow2() {
                    -f
                } else {
                    -f - 1
                }
            };
            let (a, b) = (mu_of(&d.hi), mu_of(&d.lo));
            last = Some(a);
            Ok(if a == b {
                Some(Scale::Exact(a))
            } else if !ctx.refinable() {
                Some(Scale::Between(a))
            } else {
                None
            })
        });
        match r {
            Ok(s) => Ok(s),
            Err(NumericsError::PrecisionCap(_)) => Ok(Scale::Between(last.unwrap_or(1))),
            Err(e) => Err(e.into()),
        }
    }
}

/// Counts of one dyadic block `[2^nu, 2^(nu+1))` by scale.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BlockProfile {
    pub nu: u32,
    /// `(mu, count)` for certainly placed `x`.
    pub exact: Vec<(i64, u64)>,
    /// `(mu, count)` of `x` undecided between `mu` and `mu + 1`.
    pub between: Vec<(i64, u64)>,
    pub zero: u64,
}

impl BlockProfile {
    fn get(v: &[(i64, u64)], mu: i64) -> u64 {
        v.iter().find(|p| p.0 == mu).map_or(0, |p| p.1)
    }

    /// `card A_{nu,mu}`, counting undecided `x` in both neighbouring cells.
    pub fn card_mu(&self, mu: i64) -> u64 {
        Self::get(&self.exact, mu) + Self::get(&self.between, mu) + Self::get(&self.between, mu - 1)
    }

    /// `card A_nu(2^-m)`: distance at most `2^-m`, i.e. scale `mu >= m`.
    pub fn card_t(&self, m: i64) -> u64 {
        let e: u64 = self.exact.iter().filter(|p| p.0 >= m).map(|p| p.1).sum();
        let b: u64 = self.between.iter().filter(|p| p.0 + 1 >= m).map(|p| p.1).sum();
        e + b + self.zero
    }

    pub fn total(&self) -> u64 {
        self.exact.iter().chain(&self.between).map(|p| p.1).sum::<u64>() + self.zero
    }
}

pub fn block_profile(c: &mut Classifier, nu: u32) -> Res<BlockProfile> {
    let mut exact = std::collections::BTreeMap::new();
    let mut between = std::collections::BTreeMap::new();
    let mut zero = 0;
    for x in (1u64 << nu)..(1u64 << (nu + 1)) {
        match c.scale(x)? {
            Scale::Zero => zero += 1,
            Scale::Exact(m) => *exact.entry(m).or_insert(0) += 1,
            Scale::Between(m) => *between.entry(m).or_insert(0) += 1,
        }
    }
    Ok(BlockProfile { nu, exact: exact.into_iter().collect(), between: between.into_iter().collect(), zero })
}

/// `x` in `[2^nu, 2^(nu+1))` with `2^-mu-1 < ||x alpha - eta|| <= 2^-mu`.
pub fn enumerate_a_mu(c: &mut Classifier, nu: u32, mu: i64) -> Res<Vec<u64>> {
    let mut out = vec![];
    for x in (1u64 << nu)..(1u64 << (nu + 1)) {
        match c.scale(x)? {
            Scale::Exact(m) if m == mu => out.push(x),
            Scale::Between(m) if m == mu || m + 1 == mu => out.push(x),
            _ => {}
        }
    }
    Ok(out)
}

/// `x` in `[2^nu, 2^(nu+1))` with `||x alpha - eta|| <= t`.
pub fn enumerate_a_t(alpha: &RefinableReal, eta: &RefinableReal, nu: u32, t: &BigRational, prec: Precision) -> Res<Vec<u64>> {
    let mut out = vec![];
    let bits = 2 * (nu + 1) + 64;
    for x in (1u64 << nu)..(1u64 << (nu + 1)) {
        if let (Some(a), Some(e)) = (alpha.exact_rational(), eta.exact_rational()) {
            if dist_rational(&(a * BigRational::from_integer(x.into()) - e)) <= *t {
                out.push(x);
            }
            continue;
        }
        let xb = BigInt::from(x);
        let r = prec.escalate(|b| {
            let ctx = DistanceContext::new(alpha, b.max(bits));
            let d = ctx.dist(&xb, &eta.enclose_lenient(ctx.bits()));
            let tt = Interval::from_rational(t, b + 16);
            Ok(if d.hi <= tt.lo {
                Some(true)
            } else if d.lo > tt.hi {
                Some(false)
            } else if !ctx.refinable() {
                Some(true)
            } else {
                None
            })
        });
        match r {
            Ok(true) | Err(NumericsError::PrecisionCap(_)) => out.push(x),
            Ok(false) => {}
            Err(e) => return Err(e.into()),
        }
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CountReport {
    pub nu: u32,
    /// `mu` for the first counting lemma, `m` with `t = 2^-m` for the second.
    pub scale: i64,
    pub kind: CountKind,
    pub exact_count: u64,
    /// Right-hand side enclosure `[lo, hi]`.
    pub bound: [f64; 2],
    pub pass: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CountKind {
    Cell,
    Ball,
}

/// `factor * max(Omega(2^(k-1), 2^(nu+1)), 2^(nu-k), 1)`.
pub fn count_bound(sys: &FunctionSystem, nu: u32, k: i64, factor: i64, prec: u32) -> Res<Interval> {
    let om = sys.big_omega(&Interval::pow2(k - 1), &Interval::pow2(nu as i64 + 1), prec)?;
    let m = om.max(&Interval::pow2(nu as i64 - k)).max(&Interval::one());
    Ok(m.mul(&Interval::int(factor), prec))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CountingReport {
    pub nu_max: u32,
    pub checked: u64,
    pub violations: Vec<CountReport>,
    pub partition_ok: bool,
    pub reports: Vec<CountReport>,
}

impl CountingReport {
    pub fn ok(&self) -> bool {
        self.violations.is_empty() && self.partition_ok
    }
}

/// Both counting bounds for `1 <= nu <= nu_max`: cells for
/// `1 <= mu <= mu_max(nu)` and balls `t = 2^-m` for `1 <= m <= nu`.
pub fn check_counting(sys: &FunctionSystem, alpha: &RefinableReal, eta: &RefinableReal, nu_max: u32, prec: Precision) -> Res<CountingReport> {
    let mut c = Classifier::new(alpha, eta, 1 << (nu_max + 1), prec);
    let mut rep = CountingReport { nu_max, checked: 0, violations: vec![], partition_ok: true, reports: vec![] };
    for nu in 1..=nu_max {
        let prof = block_profile(&mut c, nu)?;
        rep.partition_ok &= prof.total() == 1u64 << nu;
        let mut push = |r: CountReport| {
            rep.checked += 1;
            if !r.pass {
                rep.violations.push(r.clone());
            }
            rep.reports.push(r);
        };
        for mu in 1..=mu_max(sys, nu as u64)? {
            let b = count_bound(sys, nu, mu, 8, 64)?;
            let n = prof.card_mu(mu);
            push(CountReport {
                nu,
                scale: mu,
                kind: CountKind::Cell,
                exact_count: n,
                bound: [b.lo.to_f64(), b.hi.to_f64()],
                pass: Dyadic::from_int(n) <= b.hi,
            });
        }
        for m in 1..=nu as i64 {
            let b = count_bound(sys, nu, m, 4, 64)?;
            let n = prof.card_t(m);
            push(CountReport {
                nu,
                scale: m,
                kind: CountKind::Ball,
                exact_count: n,
                bound: [b.lo.to_f64(), b.hi.to_f64()],
                pass: Dyadic::from_int(n) <= b.hi,
            });
        }
    }
    Ok(rep)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Trust {
    FiniteRange,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BadnessReport {
    pub x0: u64,
    pub x_max: u64,
    /// Enclosure of `min omega(x) ||x alpha - eta||` over the range.
    pub min_product: [f64; 2],
    pub argmin: u64,
    /// First `x` where the product is certainly below 1.
    pub first_failure: Option<u64>,
    pub undecided: u64,
    pub pass: bool,
    pub trust: Trust,
    /// `min q ||q alpha||` over convergent denominators `q <= x_max`
    /// (quadratic `alpha`, `eta = 0`).
    pub convergent_constant: Option<f64>,
}

/// Finite-range check of `inf omega(x) ||x alpha - eta|| >= 1`.
pub fn check_badness(alpha: &RefinableReal, eta: &RefinableReal, omega: &UnaryFn, x0: u64, x_max: u64, prec: Precision) -> Res<BadnessReport> {
    let mut c = DistanceContext::new(alpha, 2 * (64 - x_max.leading_zeros()) + 64);
    let mut rep = BadnessReport {
        x0,
        x_max,
        min_product: [f64::INFINITY, f64::INFINITY],
        argmin: x0,
        first_failure: None,
        undecided: 0,
        pass: true,
        trust: Trust::FiniteRange,
        convergent_constant: None,
    };
    let one = Dyadic::one();
    for x in x0..=x_max {
        let xb = BigInt::from(x);
        let xi = Interval::int(x as i64);
        let mut last = Interval::zero();
        let r = prec.escalate(|bits| {
            while c.bits() < bits && c.refinable() {
                c = c.refined();
            }
            let d = c.dist(&xb, &eta.enclose_lenient(c.bits()));
            let p = omega.eval(&xi, bits)?.mul(&d, bits);
            last = p.clone();
            Ok(if p.lo >= one || p.hi < one || !c.refinable() || p.is_point() { Some(p) } else { None })
        });
        let p = match r {
            Ok(p) => p,
            Err(NumericsError::PrecisionCap(_)) => last.clone(),
            Err(e) => return Err(e.into()),
        };
        if p.lo.to_f64() < rep.min_product[0] {
            rep.min_product = [p.lo.to_f64(), p.hi.to_f64()];
            rep.argmin = x;
        }
        if p.hi < one {
            rep.pass = false;
            rep.first_failure.get_or_insert(x);
        } else if p.lo < one {
            rep.pass = false;
            rep.undecided += 1;
        }
    }
    if eta.exact_rational().is_some_and(|e| e.is_zero()) && matches!(alpha, RefinableReal::Quadratic { .. }) {
        let cs = convergents(alpha, 200)?;
        let mut best = f64::INFINITY;
        for q in cs.iter().map(|r| r.denom().clone()) {
            if q > BigInt::from(x_max) {
                break;
            }
            let d = DistanceContext::new(alpha, 2 * q.bits() as u32 + 64).dist(&q, &Interval::zero());
            best = best.min(q.to_f64().unwrap() * d.to_f64());
        }
        rep.convergent_constant = Some(best);
    }
    Ok(rep)
}
