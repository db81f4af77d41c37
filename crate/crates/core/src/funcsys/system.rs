//! Function systems and the quantities derived from them.

use super::expr::{Compiled, Expr, ExprError};
use crate::numerics::{parse_rational, render_rational, Dyadic, Interval, NumericsError, Round, XInterval, XF};
use num_rational::BigRational;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// `phi(x) psi1(||x alpha - eta||) psi2(||x beta - eta_x||) >= eps`.
    Product,
    /// `max(phi1(x) psi1(..), phi2(x) psi2(..)) >= eps`.
    Max,
}

/// Textual description of a one-variable function in `t`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FnSpec {
    pub expr: String,
    /// Explicit inverse in `t`; without one, inverses are found by bisection.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub inverse: Option<String>,
    /// Below this point the function is replaced by the chord `f(t0) t / t0`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub linear_below: Option<String>,
    /// Largest admissible argument.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub domain_max: Option<String>,
}

impl FnSpec {
    pub fn new(expr: &str) -> FnSpec {
        FnSpec { expr: expr.into(), inverse: None, linear_below: None, domain_max: None }
    }

    pub fn inv(mut self, e: &str) -> FnSpec {
        self.inverse = Some(e.into());
        self
    }

    pub fn linear_below(mut self, t0: &str) -> FnSpec {
        self.linear_below = Some(t0.into());
        self
    }

    pub fn domain_max(mut self, m: &str) -> FnSpec {
        self.domain_max = Some(m.into());
        self
    }
}

/// Serializable description of a whole system.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SystemSpec {
    pub name: String,
    pub mode: Mode,
    /// Parameter values as exact rationals (`p/q` strings).
    pub params: BTreeMap<String, String>,
    pub omega1: FnSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub omega2: Option<FnSpec>,
    /// `Omega(y, z)`.
    #[serde(rename = "Omega")]
    pub big_omega: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phi: Option<FnSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phi1: Option<FnSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phi2: Option<FnSpec>,
    pub psi1: FnSpec,
    pub psi2: FnSpec,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SystemError {
    #[error(transparent)]
    Expr(#[from] ExprError),
    #[error(transparent)]
    Numerics(#[from] NumericsError),
    #[error("parameter out of range: {0}")]
    ParamRange(String),
    #[error("incomplete system: {0}")]
    Missing(String),
    #[error("wrong mode: {0}")]
    Mode(String),
}

type Res<T> = Result<T, SystemError>;

/// A compiled increasing function of one variable.
#[derive(Clone, Debug)]
pub struct UnaryFn {
    pub spec: FnSpec,
    f: Compiled,
    inverse: Option<Compiled>,
    linear_below: Option<Dyadic>,
    domain_max: Option<BigRational>,
    domain_max_xf: Option<XF>,
}

fn dyadic_param(s: &str, params: &BTreeMap<String, BigRational>) -> Res<BigRational> {
    let e = Expr::parse(s)?.compile(params, &[])?;
    e.constant().ok_or_else(|| SystemError::Missing(format!("{s:?} is not a constant")))
}

impl UnaryFn {
    pub fn compile(spec: &FnSpec, params: &BTreeMap<String, BigRational>) -> Res<UnaryFn> {
        let f = Expr::parse(&spec.expr)?.compile(params, &["t"])?;
        let inverse = match &spec.inverse {
            Some(s) => Some(Expr::parse(s)?.compile(params, &["t"])?),
            None => None,
        };
        let linear_below = match &spec.linear_below {
            Some(s) => {
                let q = dyadic_param(s, params)?;
                Some(Dyadic::try_from_rational(&q).ok_or_else(|| {
                    SystemError::ParamRange(format!("linear_below must be dyadic, got {}", render_rational(&q)))
                })?)
            }
            None => None,
        };
        let domain_max = match &spec.domain_max {
            Some(s) => Some(dyadic_param(s, params)?),
            None => None,
        };
        let domain_max_xf = domain_max.as_ref().map(|m| XF::from_dyadic(&Dyadic::from_rational(m, 60, Round::Down), Round::Down));
        Ok(UnaryFn { spec: spec.clone(), f, inverse, linear_below, domain_max, domain_max_xf })
    }

    fn raw(&self, t: &Dyadic, prec: u32) -> Result<Interval, NumericsError> {
        self.f.eval(&[Interval::point(t.clone())], prec)
    }

    /// Value at a single point (zero at and below zero).
    pub fn at(&self, t: &Dyadic, prec: u32) -> Result<Interval, NumericsError> {
        if !t.is_positive() {
            return Ok(Interval::zero());
        }
        if let Some(m) = &self.domain_max {
            if &t.to_rational() > m {
                return Err(NumericsError::Domain(format!("{} outside domain", self.spec.expr)));
            }
        }
        if let Some(t0) = &self.linear_below {
            if t < t0 {
                let v = self.raw(t0, prec + 8)?;
                let s = Interval::point(t.clone()).div(&Interval::point(t0.clone()), prec + 8)?;
                return Ok(v.mul(&s, prec + 4).round(prec));
            }
        }
        self.raw(t, prec)
    }

    /// Value at a single point in extended-exponent floating point.
    pub fn at_xi(&self, t: XF) -> Result<XInterval, NumericsError> {
        if !t.is_positive() {
            return Ok(XInterval::ZERO);
        }
        if let (Some(m), Some(mx)) = (&self.domain_max, self.domain_max_xf) {
            if t > mx && &t.to_dyadic().to_rational() > m {
                return Err(NumericsError::Domain(format!("{} outside domain", self.spec.expr)));
            }
        }
        if let Some(t0) = &self.linear_below {
            let t0x = XF::from_dyadic(t0, Round::Down);
            if t < t0x {
                let v = self.f.eval_xi(&[XInterval::point(t0x)])?;
                return v.mul(XInterval::point(t)).div(XInterval::point(t0x));
            }
        }
        self.f.eval_xi(&[XInterval::point(t)])
    }

    /// Extended floating-point enclosure over an interval.
    pub fn eval_xi(&self, t: XInterval) -> Result<XInterval, NumericsError> {
        if t.lo == t.hi {
            return self.at_xi(t.lo);
        }
        Ok(XInterval::new(self.at_xi(t.lo)?.lo, self.at_xi(t.hi)?.hi))
    }

    /// Enclosure over an interval, using monotonicity.
    pub fn eval(&self, t: &Interval, prec: u32) -> Result<Interval, NumericsError> {
        if t.is_point() {
            return self.at(&t.lo, prec);
        }
        let lo = self.at(&t.lo, prec)?.lo;
        let hi = self.at(&t.hi, prec)?.hi;
        Ok(Interval::new(lo, hi))
    }

    pub fn eval_f64(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return 0.0;
        }
        if let Some(t0) = &self.linear_below {
            let t0 = t0.to_f64();
            if t < t0 {
                return self.f.eval_f64(&[t0]) * t / t0;
            }
        }
        self.f.eval_f64(&[t])
    }

    pub fn has_explicit_inverse(&self) -> bool {
        self.inverse.is_some()
    }

    /// Enclosure of the inverse function at `y`.
    pub fn inv(&self, y: &Interval, prec: u32) -> Result<Interval, NumericsError> {
        if y.hi.is_negative() {
            return Err(NumericsError::Domain("inverse of a negative value".into()));
        }
        if let Some(t0) = &self.linear_below {
            let f0 = self.raw(t0, prec + 8)?;
            if y.hi < f0.lo {
                // inverse of the chord: y t0 / f(t0)
                let t0i = Interval::point(t0.clone());
                return Ok(y.mul(&t0i, prec + 8).div(&f0, prec)?);
            }
            if y.lo <= f0.hi {
                return self.bisect_inv(y, prec);
            }
        }
        match &self.inverse {
            Some(g) => {
                if y.is_point() {
                    g.eval(&[y.clone()], prec)
                } else {
                    let lo = g.eval(&[Interval::point(y.lo.clone())], prec)?.lo;
                    let hi = g.eval(&[Interval::point(y.hi.clone())], prec)?.hi;
                    Ok(Interval::new(lo, hi))
                }
            }
            None => self.bisect_inv(y, prec),
        }
    }

    /// Bisection for the inverse of an increasing function: the lower end is
    /// a point certainly mapped below `y.lo`, the upper end one certainly
    /// mapped above `y.hi`.
    fn bisect_inv(&self, y: &Interval, prec: u32) -> Result<Interval, NumericsError> {
        let lo = if y.lo.is_positive() { self.search(&y.lo, prec, true)? } else { Dyadic::zero() };
        let hi = self.search(&y.hi, prec, false)?;
        Ok(Interval::new(lo, hi))
    }

    fn search(&self, target: &Dyadic, prec: u32, below: bool) -> Result<Dyadic, NumericsError> {
        let ep = prec + 16;
        // `ok(x)`: f(x) certainly <= target (below) or >= target (above).
        let ok = |x: &Dyadic| -> Result<bool, NumericsError> {
            let v = self.at(x, ep)?;
            Ok(if below { v.hi <= *target } else { v.lo >= *target })
        };
        // The predicate is monotone: true on an initial segment (below) or a
        // final segment (above). Find a bracketing pair of powers of two.
        let top = match &self.domain_max {
            Some(m) => Dyadic::from_rational(m, 64, crate::numerics::Round::Down).floor_log2(),
            None => 1i64 << 40,
        };
        let mut e: i64 = top.min(0);
        let mut step: i64 = 1;
        let good0 = ok(&Dyadic::pow2(e))?;
        let dir: i64 = if good0 == below { 1 } else { -1 };
        let limit = 1i64 << 40;
        loop {
            let next = e + dir * step;
            if next.abs() > limit || next > top {
                return Err(NumericsError::Domain("inverse search out of range".into()));
            }
            let g = ok(&Dyadic::pow2(next))?;
            if g != good0 {
                // transition between e and next
                let (mut a, mut b) = if e < next { (e, next) } else { (next, e) };
                while b - a > 1 {
                    let m = a + (b - a) / 2;
                    let gm = ok(&Dyadic::pow2(m))?;
                    if gm == below {
                        a = m;
                    } else {
                        b = m;
                    }
                }
                // below: ok at 2^a, not at 2^b; above: ok at 2^b, not at 2^a
                let (mut good, mut bad) =
                    if below { (Dyadic::pow2(a), Dyadic::pow2(b)) } else { (Dyadic::pow2(b), Dyadic::pow2(a)) };
                for _ in 0..prec + 2 {
                    let mid = good.add(&bad).shl(-1);
                    if ok(&mid)? {
                        good = mid;
                    } else {
                        bad = mid;
                    }
                }
                return Ok(good);
            }
            e = next;
            step *= 2;
        }
    }
}

/// A compiled function system.
#[derive(Clone, Debug)]
pub struct FunctionSystem {
    pub spec: SystemSpec,
    pub mode: Mode,
    pub params: BTreeMap<String, BigRational>,
    pub omega1: UnaryFn,
    pub omega2: Option<UnaryFn>,
    big_omega: Compiled,
    pub phi: Option<UnaryFn>,
    pub phi1: Option<UnaryFn>,
    pub phi2: Option<UnaryFn>,
    pub psi1: UnaryFn,
    pub psi2: UnaryFn,
}

fn opt(spec: &Option<FnSpec>, params: &BTreeMap<String, BigRational>) -> Res<Option<UnaryFn>> {
    spec.as_ref().map(|s| UnaryFn::compile(s, params)).transpose()
}

impl FunctionSystem {
    pub fn from_spec(spec: &SystemSpec) -> Res<FunctionSystem> {
        let mut params = BTreeMap::new();
        for (k, v) in &spec.params {
            params.insert(k.clone(), parse_rational(v)?);
        }
        let sys = FunctionSystem {
            spec: spec.clone(),
            mode: spec.mode,
            omega1: UnaryFn::compile(&spec.omega1, &params)?,
            omega2: opt(&spec.omega2, &params)?,
            big_omega: Expr::parse(&spec.big_omega)?.compile(&params, &["y", "z"])?,
            phi: opt(&spec.phi, &params)?,
            phi1: opt(&spec.phi1, &params)?,
            phi2: opt(&spec.phi2, &params)?,
            psi1: UnaryFn::compile(&spec.psi1, &params)?,
            psi2: UnaryFn::compile(&spec.psi2, &params)?,
            params,
        };
        match sys.mode {
            Mode::Product => {
                if sys.phi.is_none() || sys.omega2.is_none() {
                    return Err(SystemError::Missing("product mode needs phi and omega2".into()));
                }
            }
            Mode::Max => {
                if sys.phi1.is_none() || sys.phi2.is_none() {
                    return Err(SystemError::Missing("max mode needs phi1 and phi2".into()));
                }
            }
        }
        // Value 0 at 0 for phi, phi1, phi2, psi1, psi2.
        for f in [&sys.phi, &sys.phi1, &sys.phi2].into_iter().flatten().chain([&sys.psi1, &sys.psi2]) {
            debug_assert!(f.at(&Dyadic::zero(), 16)?.hi.is_zero());
        }
        Ok(sys)
    }

    pub fn name(&self) -> &str {
        &self.spec.name
    }

    pub fn param(&self, k: &str) -> Option<&BigRational> {
        self.params.get(k)
    }

    /// `Omega(y, z)`.
    pub fn big_omega(&self, y: &Interval, z: &Interval, prec: u32) -> Result<Interval, NumericsError> {
        self.big_omega.eval(&[y.clone(), z.clone()], prec)
    }

    pub fn big_omega_xi(&self, y: XInterval, z: XInterval) -> Result<XInterval, NumericsError> {
        self.big_omega.eval_xi(&[y, z])
    }

    pub fn big_omega_f64(&self, y: f64, z: f64) -> f64 {
        self.big_omega.eval_f64(&[y, z])
    }

    pub fn omega1_star(&self, t: &Interval, prec: u32) -> Result<Interval, NumericsError> {
        self.omega1.inv(t, prec)
    }

    pub fn psi1_star(&self, t: &Interval, prec: u32) -> Result<Interval, NumericsError> {
        self.psi1.inv(t, prec)
    }

    pub fn psi2_star(&self, t: &Interval, prec: u32) -> Result<Interval, NumericsError> {
        self.psi2.inv(t, prec)
    }

    pub fn phi(&self) -> &UnaryFn {
        self.phi.as_ref().expect("product-mode system")
    }

    pub fn phi1(&self) -> &UnaryFn {
        self.phi1.as_ref().expect("max-mode system")
    }

    pub fn phi2(&self) -> &UnaryFn {
        self.phi2.as_ref().expect("max-mode system")
    }

    pub fn omega2(&self) -> &UnaryFn {
        self.omega2.as_ref().expect("product-mode system")
    }

    /// Whether `psi2*` is the identity (enables closed-form sum shortcuts).
    pub fn psi2_is_identity(&self) -> bool {
        self.spec.psi2.expr.trim() == "t" && self.spec.psi2.linear_below.is_none()
    }

    pub fn psi1_is_identity(&self) -> bool {
        self.spec.psi1.expr.trim() == "t" && self.spec.psi1.linear_below.is_none()
    }

    fn need(&self, m: Mode) -> Res<()> {
        if self.mode == m {
            Ok(())
        } else {
            Err(SystemError::Mode(format!("operation requires {m:?} mode")))
        }
    }

    /// `psi2*( eps / (phi(2^nu) psi1(2^(-mu-1))) )`.
    pub fn delta1(&self, mu: i64, nu: i64, eps: &Interval, prec: u32) -> Res<Interval> {
        self.need(Mode::Product)?;
        let p = prec + 8;
        let den = self.phi().at(&Dyadic::pow2(nu), p)?.mul(&self.psi1.at(&Dyadic::pow2(-mu - 1), p)?, p);
        if den.contains_zero() {
            return Err(NumericsError::Domain("phi(2^nu) psi1(2^(-mu-1)) vanishes".into()).into());
        }
        Ok(self.psi2_star(&eps.div(&den, p)?, prec)?)
    }

    /// `psi2*( eps / phi2(2^nu) )`.
    pub fn delta2(&self, nu: i64, eps: &Interval, prec: u32) -> Res<Interval> {
        self.need(Mode::Max)?;
        let p = prec + 8;
        let den = self.phi2().at(&Dyadic::pow2(nu), p)?;
        if den.contains_zero() {
            return Err(NumericsError::Domain("phi2(2^nu) vanishes".into()).into());
        }
        Ok(self.psi2_star(&eps.div(&den, p)?, prec)?)
    }

    /// `psi1*( eps / phi1(2^nu) )`.
    pub fn r_eps(&self, nu: i64, eps: &Interval, prec: u32) -> Res<Interval> {
        self.need(Mode::Max)?;
        let p = prec + 8;
        let den = self.phi1().at(&Dyadic::pow2(nu), p)?;
        if den.contains_zero() {
            return Err(NumericsError::Domain("phi1(2^nu) vanishes".into()).into());
        }
        Ok(self.psi1_star(&eps.div(&den, p)?, prec)?)
    }

    /// The per-`x` threshold: `psi2*(eps / (phi(x) psi1(dist)))` in product
    /// mode, `psi2*(eps / phi2(x))` in max mode (`dist` ignored).
    pub fn sigma(&self, x: &Interval, dist: &Interval, eps: &Interval, prec: u32) -> Res<Interval> {
        let p = prec + 8;
        let den = match self.mode {
            Mode::Product => {
                if dist.contains_zero() {
                    return Err(NumericsError::Domain("distance enclosure contains 0".into()).into());
                }
                self.phi().eval(x, p)?.mul(&self.psi1.eval(dist, p)?, p)
            }
            Mode::Max => self.phi2().eval(x, p)?,
        };
        if den.contains_zero() {
            return Err(NumericsError::Domain("sigma denominator vanishes".into()).into());
        }
        Ok(self.psi2_star(&eps.div(&den, p)?, prec)?)
    }
}

pub fn delta1(mu: i64, nu: i64, eps: &Interval, sys: &FunctionSystem, prec: u32) -> Res<Interval> {
    sys.delta1(mu, nu, eps, prec)
}

pub fn delta2(nu: i64, eps: &Interval, sys: &FunctionSystem, prec: u32) -> Res<Interval> {
    sys.delta2(nu, eps, prec)
}

pub fn r_eps(nu: i64, eps: &Interval, sys: &FunctionSystem, prec: u32) -> Res<Interval> {
    sys.r_eps(nu, eps, prec)
}

pub fn sigma(x: &Interval, dist: &Interval, eps: &Interval, sys: &FunctionSystem, prec: u32) -> Res<Interval> {
    sys.sigma(x, dist, eps, prec)
}
