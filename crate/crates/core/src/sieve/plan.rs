//! Per-`x` data needed by the engines: the filter decision, the radius and
//! the level of `A(x)`.

use super::cells::{LevelOverflow, MAX_LEVEL};
use super::cover::{danger_cover, level_of, round_sigma};
use super::eta::{EtaProvider, EtaValue};
use super::SieveError;
use crate::funcsys::{FunctionSystem, Mode, SystemError};
use crate::numerics::distance::DistanceContext;
use crate::numerics::{ceil_pow, Dyadic, Interval, NumericsError, Precision, RefinableReal};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};

/// What happens at one `x`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Zone {
    /// Max mode: the filter rejected `x`.
    Filtered,
    /// `sigma` is unbounded (the distance vanishes): `A(x) = [0, 1]`.
    Whole,
    Radius { sigma: Dyadic, level: u32 },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct XPlan {
    pub x: u64,
    pub eta: EtaValue,
    pub zone: Zone,
    /// The filter could not be decided and `x` was kept.
    pub ambiguous: bool,
}

impl XPlan {
    pub fn level(&self) -> u32 {
        match &self.zone {
            Zone::Radius { level, .. } => *level,
            _ => 0,
        }
    }

    pub fn active(&self) -> bool {
        !matches!(self.zone, Zone::Filtered)
    }
}

/// Everything the plan needs besides `x`.
#[derive(Clone, Debug)]
pub struct PlanInput<'a> {
    pub sys: &'a FunctionSystem,
    pub eps: BigRational,
    pub alpha: RefinableReal,
    pub eta: RefinableReal,
    pub eta_x: &'a EtaProvider,
    pub filter_homogeneous: bool,
    pub prec: Precision,
}

const SIGMA_PREC: u32 = 96;

fn dist_separated(ctx: &mut DistanceContext, eta: &RefinableReal, x: u64, cap: u32) -> Option<Interval> {
    let xb = BigInt::from(x);
    loop {
        let e = eta.enclose_lenient(ctx.bits());
        let d = ctx.dist(&xb, &e);
        if d.lo.is_positive() {
            return Some(d);
        }
        if !ctx.refinable() || ctx.bits() >= cap {
            return None;
        }
        *ctx = ctx.refined();
    }
}

/// Exact distance when `alpha` and `eta` are both rational.
fn exact_dist(alpha: &RefinableReal, eta: &RefinableReal, x: u64) -> Option<BigRational> {
    let (a, e) = (alpha.exact_rational()?, eta.exact_rational()?);
    Some(crate::numerics::distance::dist_rational(&(a * BigRational::from_integer(x.into()) - e)))
}

pub struct Planner<'a> {
    inp: PlanInput<'a>,
    ctx: DistanceContext,
    eps: Interval,
}

impl<'a> Planner<'a> {
    pub fn new(inp: PlanInput<'a>, x_max: u64) -> Planner<'a> {
        let bits = 2 * (64 - x_max.leading_zeros()) + 64;
        let ctx = DistanceContext::new(&inp.alpha, bits);
        let eps = Interval::from_rational(&inp.eps, SIGMA_PREC + 16);
        Planner { inp, ctx, eps }
    }

    fn filter(&mut self, x: u64) -> Result<(bool, bool), SieveError> {
        let zero = RefinableReal::rational(BigRational::zero());
        let eta = if self.inp.filter_homogeneous { zero } else { self.inp.eta.clone() };
        if let Some(d) = exact_dist(&self.inp.alpha, &eta, x) {
            if d.is_zero() {
                return Ok((true, false));
            }
        }
        let sys = self.inp.sys;
        let xi = Interval::int(x as i64);
        let mut ctx = self.ctx.clone();
        let eps = self.inp.eps.clone();
        let r = self.inp.prec.escalate(|bits| {
            while ctx.bits() < bits && ctx.refinable() {
                ctx = ctx.refined();
            }
            let e = eta.enclose_lenient(ctx.bits());
            let d = ctx.dist(&BigInt::from(x), &e);
            let f = sys.phi1().eval(&xi, bits)?.mul(&sys.psi1.eval(&d, bits)?, bits);
            let ep = Interval::from_rational(&eps, bits + 8);
            Ok(if f.hi <= ep.lo {
                Some(true)
            } else if f.lo > ep.hi {
                Some(false)
            } else {
                None
            })
        });
        match r {
            Ok(keep) => Ok((keep, false)),
            Err(NumericsError::PrecisionCap(_)) => Ok((true, true)),
            Err(e) => Err(SystemError::from(e).into()),
        }
    }

    fn radius(&mut self, x: u64) -> Result<Zone, SieveError> {
        let sys = self.inp.sys;
        let xi = Interval::int(x as i64);
        let dist = match sys.mode {
            Mode::Max => Interval::zero(),
            Mode::Product => {
                if let Some(d) = exact_dist(&self.inp.alpha, &self.inp.eta, x) {
                    if d.is_zero() {
                        return Ok(Zone::Whole);
                    }
                    Interval::from_rational(&d, SIGMA_PREC + 16)
                } else {
                    match dist_separated(&mut self.ctx, &self.inp.eta, x, self.inp.prec.cap) {
                        Some(d) => d,
                        None => return Ok(Zone::Whole),
                    }
                }
            }
        };
        let s = sys.sigma(&xi, &dist, &self.eps, SIGMA_PREC)?;
        let sigma = round_sigma(&s.hi);
        let level = level_of(x, &sigma)?;
        if level == 0 {
            return Ok(Zone::Whole);
        }
        Ok(Zone::Radius { sigma, level })
    }

    pub fn plan(&mut self, x: u64) -> Result<XPlan, SieveError> {
        assert!(x >= 2, "the sieve starts at x >= 2");
        let eta = self.inp.eta_x.get(x);
        let (keep, ambiguous) = match self.inp.sys.mode {
            Mode::Product => (true, false),
            Mode::Max => self.filter(x)?,
        };
        let zone = if keep { self.radius(x)? } else { Zone::Filtered };
        Ok(XPlan { x, eta, zone, ambiguous })
    }
}

/// Plans for `x` in `[from, to]`.
pub fn plan_range(inp: PlanInput, from: u64, to: u64) -> Result<Vec<XPlan>, SieveError> {
    if to < from {
        return Ok(vec![]);
    }
    let mut p = Planner::new(inp, to);
    (from..=to).map(|x| p.plan(x)).collect()
}

/// `A(x)` for a plan, at the plan's own level.
pub fn plan_cover(p: &XPlan) -> super::cells::DyadicIntervalSet {
    match &p.zone {
        Zone::Filtered => super::cells::DyadicIntervalSet::empty(0),
        Zone::Whole => super::cells::DyadicIntervalSet::full(),
        Zone::Radius { sigma, level } => danger_cover(p.x, &p.eta.to_rational(), sigma, *level),
    }
}

/// Block boundaries `q0, ceil(q0^A), ...` up to and including the first one
/// at or beyond `q_max`.
pub fn block_boundaries(q0: u64, a: &BigRational, q_max: u64) -> Vec<u64> {
    let mut out = vec![q0];
    let mut q = BigInt::from(q0);
    while q < BigInt::from(q_max) {
        let next = ceil_pow(&q, a);
        let next = if next <= q { &q + 1u32 } else { next };
        match next.to_u64() {
            Some(v) => out.push(v),
            None => {
                out.push(u64::MAX);
                break;
            }
        }
        q = next;
    }
    out
}

/// Upper bound on the measure removed in the first block: each of the
/// `x + 1` zones of `A(x)` spans at most two cells of width `2^-l_x`.
pub fn first_block_bound(plans: &[XPlan]) -> BigRational {
    let mut s = BigRational::zero();
    for p in plans {
        match &p.zone {
            Zone::Filtered => {}
            Zone::Whole => s += BigRational::from_integer(1.into()),
            Zone::Radius { level, .. } => {
                s += BigRational::new(BigInt::from(2 * (p.x + 1)), BigInt::from(1u8) << *level as usize)
            }
        }
    }
    s
}

/// Largest level among active plans.
pub fn max_level(plans: &[XPlan]) -> Result<u32, LevelOverflow> {
    let l = plans.iter().filter(|p| p.active()).map(|p| p.level()).max().unwrap_or(0);
    if l > MAX_LEVEL {
        Err(LevelOverflow(l))
    } else {
        Ok(l)
    }
}
