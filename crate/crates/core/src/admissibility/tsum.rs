//! The sums `T1(Y)` and `T2(Y)` over `Y <= x < Y^A`.
//!
//! The first `direct` values of `x` are summed term by term with certified
//! distances. The rest of the range is split into dyadic shells
//! `[s, min(2s, end))`, bounded through exact counts of `x` with
//! `||x alpha - eta|| <= t`.

use crate::funcsys::{FunctionSystem, Mode, SystemError};
use crate::numerics::distance::DistanceContext;
use crate::numerics::floor_count::count_near_bounds;
use crate::numerics::{ceil_pow, Dyadic, Interval, NumericsError, RefinableReal, Round, XInterval, XF};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use serde::Serialize;

type Res<T> = Result<T, SystemError>;

/// Deepest distance scale `2^-m` examined per shell.
const MAX_SCALE: i64 = 4096;

#[derive(Clone, Debug)]
pub struct TSumInput<'a> {
    pub sys: &'a FunctionSystem,
    pub eps: BigRational,
    pub a: BigRational,
    pub alpha: RefinableReal,
    pub eta: RefinableReal,
    /// Number of leading `x` summed term by term.
    pub direct: u64,
    /// Use `||x alpha||` instead of `||x alpha - eta||` in the max-mode filter.
    pub filter_homogeneous: bool,
}

#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct TSumReport {
    pub y: String,
    /// `ceil(Y^A)`; the range is `[y, end)`.
    pub end: String,
    pub direct_count: u64,
    pub direct_lo: f64,
    pub direct_hi: f64,
    pub shells: u64,
    pub shell_bound: f64,
    /// Upper bound for the whole sum, as an exact dyadic `p/q`.
    pub upper: String,
    pub upper_f64: f64,
    /// Filter decisions that could not be certified (counted as passing).
    pub ambiguous_filter: u64,
    /// `upper <= 2^-6`.
    pub ok: bool,
}

fn xf_of(x: &BigInt, dir: Round) -> XF {
    XF::from_dyadic(&Dyadic::from_int(x.clone()), dir)
}

fn inv_xi(f: &crate::funcsys::UnaryFn, v: XInterval, identity: bool) -> Res<XInterval> {
    if identity {
        Ok(v)
    } else {
        Ok(XInterval::from_interval(&f.inv(&v.to_interval(), 64)?))
    }
}

/// Certified `||x alpha - eta||`, refined until it excludes 0.
fn distance(ctx: &mut DistanceContext, x: &BigInt, eta: &RefinableReal) -> Res<XInterval> {
    for _ in 0..6 {
        let e = eta.enclose_lenient(ctx.bits());
        let d = ctx.dist(x, &e);
        if d.lo.is_positive() {
            return Ok(XInterval::from_interval(&d));
        }
        if !ctx.refinable() {
            break;
        }
        *ctx = ctx.refined();
    }
    Err(NumericsError::Domain(format!("||x alpha - eta|| not separated from 0 at x = {x}")).into())
}

/// Upper bound on `#{x in [l, r) : ||x alpha - eta|| <= t}`.
fn count_hi(alpha: &RefinableReal, eta: &RefinableReal, t: &BigRational, l: &BigInt, r: &BigInt) -> Res<BigInt> {
    let bits = 2 * r.bits() as u32 + 64;
    let (_, hi) = count_near_bounds(alpha, eta, t, l, r, bits)?;
    Ok(hi)
}

fn ratio_pow2(m: i64) -> BigRational {
    BigRational::new(BigInt::from(1), BigInt::from(1) << (m as usize))
}

/// `T(Y)`: product mode sums `sigma1`, max mode sums the filtered `sigma2`.
pub fn sum_t(inp: &TSumInput, y: &BigInt) -> Res<TSumReport> {
    let sys = inp.sys;
    let end = ceil_pow(y, &inp.a);
    let eps = XInterval::from_interval(&Interval::from_rational(&inp.eps, 80));
    let direct_end = (y + inp.direct).min(end.clone());
    let mut ctx = DistanceContext::new(&inp.alpha, 2 * end.bits() as u32 + 64);
    let zero_eta = RefinableReal::rational(BigRational::zero());
    let filter_eta = if inp.filter_homogeneous { &zero_eta } else { &inp.eta };
    let mut ctx_f = ctx.clone();

    let mut direct = XInterval::ZERO;
    let mut ambiguous = 0u64;
    let mut x = y.clone();
    while x < direct_end {
        let xf = XInterval { lo: xf_of(&x, Round::Down), hi: xf_of(&x, Round::Up) };
        match sys.mode {
            Mode::Product => {
                let d = distance(&mut ctx, &x, &inp.eta)?;
                let den = sys.phi().eval_xi(xf)?.mul(sys.psi1.eval_xi(d)?);
                direct = direct.add(inv_xi(&sys.psi2, eps.div(den)?, sys.psi2_is_identity())?);
            }
            Mode::Max => {
                let d = distance(&mut ctx_f, &x, filter_eta)?;
                let f = sys.phi1().eval_xi(xf)?.mul(sys.psi1.eval_xi(d)?);
                if f.lo <= eps.hi {
                    if !(f.hi <= eps.lo) {
                        ambiguous += 1;
                    }
                    let s = inv_xi(&sys.psi2, eps.div(sys.phi2().eval_xi(xf)?)?, sys.psi2_is_identity())?;
                    direct = direct.add(s);
                }
            }
        }
        x += 1u32;
    }

    let mut shells = 0u64;
    let mut bound = XInterval::ZERO;
    let mut s = direct_end.clone();
    while s < end {
        let r = (&s << 1u32).min(end.clone());
        shells += 1;
        let sx = XInterval::point(xf_of(&s, Round::Down));
        match sys.mode {
            Mode::Product => {
                let phi = sys.phi().eval_xi(sx)?;
                let weight = |m: i64| -> Res<XInterval> {
                    let den = phi.mul(sys.psi1.at_xi(XF::pow2(-m - 1))?);
                    inv_xi(&sys.psi2, eps.div(den)?, sys.psi2_is_identity())
                };
                let mut prev = XF::ZERO;
                let mut m = 1i64;
                let mut n = xf_of(&(&r - &s), Round::Up);
                loop {
                    let w = weight(m)?;
                    let step = w.hi.sub(prev, Round::Up);
                    bound = bound.add(XInterval::point(n.mul(step, Round::Up)));
                    prev = w.lo;
                    let next = count_hi(&inp.alpha, &inp.eta, &ratio_pow2(m + 1), &s, &r)?;
                    if next.is_zero() {
                        break;
                    }
                    m += 1;
                    if m > MAX_SCALE {
                        return Err(NumericsError::Domain(format!("distances below 2^-{MAX_SCALE} in shell at {s}")).into());
                    }
                    n = xf_of(&next, Round::Up);
                }
            }
            Mode::Max => {
                let v = eps.div(sys.phi1().eval_xi(sx)?)?;
                let t = inv_xi(&sys.psi1, v, sys.psi1_is_identity())?.hi;
                let n = count_hi(&inp.alpha, filter_eta, &t.to_dyadic().to_rational(), &s, &r)?;
                if !n.is_zero() {
                    let w = inv_xi(&sys.psi2, eps.div(sys.phi2().eval_xi(sx)?)?, sys.psi2_is_identity())?;
                    bound = bound.add(XInterval::point(xf_of(&n, Round::Up).mul(w.hi, Round::Up)));
                }
            }
        }
        s = r;
    }

    let total = direct.add(bound);
    Ok(TSumReport {
        y: y.to_string(),
        end: end.to_string(),
        direct_count: (&direct_end - y).to_u64().unwrap_or(0),
        direct_lo: direct.lo.to_f64(),
        direct_hi: direct.hi.to_f64(),
        shells,
        shell_bound: bound.hi.to_f64(),
        upper: crate::numerics::render_rational(&total.hi.to_dyadic().to_rational()),
        upper_f64: total.hi.to_f64(),
        ambiguous_filter: ambiguous,
        ok: total.hi <= XF::pow2(-6),
    })
}
