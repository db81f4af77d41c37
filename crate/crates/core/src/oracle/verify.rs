//! Witness verification by worst-point evaluation over the final cell.

use crate::funcsys::{FunctionSystem, Mode, SystemError};
use crate::numerics::distance::DistanceContext;
use crate::numerics::{Interval, NumericsError, Precision, RefinableReal};
use crate::sieve::{DyadicInterval, EtaProvider};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::Serialize;

/// At most this many failing or undecided `x` are listed.
const LIST_CAP: usize = 32;

#[derive(Clone, Debug)]
pub struct VerifyInput<'a> {
    pub sys: &'a FunctionSystem,
    pub eps: BigRational,
    pub alpha: RefinableReal,
    pub eta: RefinableReal,
    pub eta_x: &'a EtaProvider,
    pub cell: DyadicInterval,
    pub from: u64,
    pub to: u64,
    pub prec: Precision,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VerifyReport {
    pub from: u64,
    pub to: u64,
    pub checked: u64,
    /// The range is empty.
    pub vacuous: bool,
    /// Enclosure of the smallest value seen, by lower end.
    pub min_value: Option<[f64; 2]>,
    pub argmin: Option<u64>,
    /// `min_value.lo / eps`.
    pub margin: Option<f64>,
    pub failure_count: u64,
    pub failures: Vec<u64>,
    pub undecided_count: u64,
    pub undecided: Vec<u64>,
    pub pass: bool,
}

/// `min ||x beta - eta_x||` over `beta` in the cell, exactly.
pub fn worst_distance(cell: &DyadicInterval, x: u64, eta_x: &BigRational) -> BigRational {
    let xr = BigRational::from_integer(BigInt::from(x));
    let lo = &xr * cell.lo() - eta_x;
    let hi = &xr * cell.hi() - eta_x;
    if hi.floor() >= lo.ceil() {
        return BigRational::zero();
    }
    let n = lo.floor();
    let a = &lo - &n;
    let b = n + BigRational::one() - hi;
    a.min(b)
}

enum Outcome {
    Pass(Interval),
    Fail(Interval),
    Undecided(Interval),
}

struct Evaluator<'a> {
    inp: &'a VerifyInput<'a>,
    ctx: DistanceContext,
}

impl Evaluator<'_> {
    fn value(&mut self, x: u64, worst: &BigRational, bits: u32) -> Result<Interval, NumericsError> {
        let sys = self.inp.sys;
        while self.ctx.bits() < bits && self.ctx.refinable() {
            self.ctx = self.ctx.refined();
        }
        let xi = Interval::int(x as i64);
        let d1 = self.ctx.dist(&BigInt::from(x), &self.inp.eta.enclose_lenient(self.ctx.bits()));
        let psi2 = if worst.is_zero() {
            Interval::zero()
        } else {
            sys.psi2.eval(&Interval::from_rational(worst, bits + 8), bits)?
        };
        let psi1 = if d1.hi.is_zero() { Interval::zero() } else { sys.psi1.eval(&d1, bits)? };
        Ok(match sys.mode {
            Mode::Product => sys.phi().eval(&xi, bits)?.mul(&psi1, bits).mul(&psi2, bits),
            Mode::Max => {
                let b1 = sys.phi1().eval(&xi, bits)?.mul(&psi1, bits);
                let b2 = sys.phi2().eval(&xi, bits)?.mul(&psi2, bits);
                b1.max(&b2)
            }
        })
    }

    fn judge(&mut self, x: u64) -> Result<Outcome, SystemError> {
        let worst = worst_distance(&self.inp.cell, x, &self.inp.eta_x.get(x).to_rational());
        let eps = self.inp.eps.clone();
        let mut last = Interval::zero();
        let r = self.inp.prec.escalate(|bits| {
            let v = self.value(x, &worst, bits)?;
            let e = Interval::from_rational(&eps, bits + 8);
            last = v.clone();
            Ok(if v.lo >= e.hi {
                Some(Outcome::Pass(v))
            } else if v.hi < e.lo {
                Some(Outcome::Fail(v))
            } else {
                None
            })
        });
        match r {
            Ok(o) => Ok(o),
            Err(NumericsError::PrecisionCap(_)) => Ok(Outcome::Undecided(last)),
            Err(e) => Err(e.into()),
        }
    }
}

/// Checks the target inequality at every `x` in `[from, to]` for every
/// `beta` in the cell.
pub fn verify_witness(inp: &VerifyInput) -> Result<VerifyReport, SystemError> {
    let mut rep = VerifyReport {
        from: inp.from,
        to: inp.to,
        checked: 0,
        vacuous: inp.to < inp.from,
        min_value: None,
        argmin: None,
        margin: None,
        failure_count: 0,
        failures: vec![],
        undecided_count: 0,
        undecided: vec![],
        pass: true,
    };
    if rep.vacuous {
        return Ok(rep);
    }
    let bits = 2 * (64 - inp.to.leading_zeros()) + 64;
    let mut ev = Evaluator { inp, ctx: DistanceContext::new(&inp.alpha, bits) };
    let eps_f = Interval::from_rational(&inp.eps, 64).lo.to_f64();
    for x in inp.from.max(1)..=inp.to {
        let v = match ev.judge(x)? {
            Outcome::Pass(v) => v,
            Outcome::Fail(v) => {
                rep.failure_count += 1;
                if rep.failures.len() < LIST_CAP {
                    rep.failures.push(x);
                }
                v
            }
            Outcome::Undecided(v) => {
                rep.undecided_count += 1;
                if rep.undecided.len() < LIST_CAP {
                    rep.undecided.push(x);
                }
                v
            }
        };
        rep.checked += 1;
        let lo = v.lo.to_f64();
        if rep.min_value.is_none_or(|m| lo < m[0]) {
            rep.min_value = Some([lo, v.hi.to_f64()]);
            rep.argmin = Some(x);
        }
    }
    rep.margin = rep.min_value.map(|m| m[0] / eps_f);
    rep.pass = rep.failure_count == 0 && rep.undecided_count == 0;
    Ok(rep)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn worst_distance_cases() {
        // cell [1/2, 3/4], x = 2: x beta in [1, 3/2] contains 1
        let c = DyadicInterval::new(2, 2);
        assert_eq!(worst_distance(&c, 2, &q(0, 1)), q(0, 1));
        // x = 1, eta = 0: [1/2, 3/4] -> min distance 1/4
        assert_eq!(worst_distance(&c, 1, &q(0, 1)), q(1, 4));
        // x = 1, eta = 1/8: [3/8, 5/8] -> 3/8
        assert_eq!(worst_distance(&c, 1, &q(1, 8)), q(3, 8));
    }
}
