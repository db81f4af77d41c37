//! The sums `S1` (product mode) and `S2` (max mode).
//!
//! `S(X)` adds inner terms `I(nu)` over `X <= nu < A(X+1)`. A scan over many
//! `X` computes `I(nu)` once per `nu` and takes differences of prefix sums.

use crate::funcsys::{FunctionSystem, Mode, SystemError};
use crate::numerics::{ceil_rational, Interval, NumericsError, Precision, XInterval, XF};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::ToPrimitive;

type Res<T> = Result<T, SystemError>;

/// Last index of the range `X <= nu < A(X+1)`.
pub fn nu_last(x: u64, a: &BigRational) -> u64 {
    let end = ceil_rational(&(a * BigRational::from_integer(BigInt::from(x + 1))));
    (end - 1u32).to_u64().expect("nu range fits u64")
}

fn xi_eps(eps: &BigRational) -> XInterval {
    XInterval::from_interval(&Interval::from_rational(eps, 80))
}

/// `floor(log2 omega2(2^(nu+1))) + 1`, the last `mu` of the inner sum.
pub fn mu_max(sys: &FunctionSystem, nu: u64) -> Res<i64> {
    let w = sys.omega2().at_xi(XF::pow2(nu as i64 + 1))?;
    if w.lo.is_positive() && w.lo.floor_log2() == w.hi.floor_log2() {
        return Ok(w.lo.floor_log2() + 1);
    }
    let t = crate::numerics::Dyadic::pow2(nu as i64 + 1);
    let f = Precision::default().escalate(|bits| {
        let w = sys.omega2().at(&t, bits)?;
        if !w.lo.is_positive() {
            return Err(NumericsError::Domain("omega2 vanishes".into()));
        }
        let (a, b) = (w.lo.floor_log2(), w.hi.floor_log2());
        Ok(if a == b { Some(a) } else { None })
    })?;
    Ok(f + 1)
}

/// Whether `y Omega(y, z)` is nondecreasing along powers of two in `y`, on
/// `z = 2^k`, `k <= kmax`, `y <= 8z`. This is the shape assumption behind
/// the fast inner sum.
pub fn omega_y_monotone(sys: &FunctionSystem, kmax: i64) -> Res<bool> {
    for k in 0..=kmax {
        let z = XInterval::pow2(k);
        let mut prev = sys.big_omega_xi(XInterval::pow2(0), z)?;
        for j in 1..=k + 3 {
            let cur = sys.big_omega_xi(XInterval::pow2(j), z)?.shl(j);
            if !prev.certainly_le(cur) {
                return Ok(false);
            }
            prev = cur;
        }
    }
    Ok(true)
}

/// Incremental evaluator of the product-mode inner sum
/// `I(nu) = sum_mu delta1(mu, nu) max(Omega(2^(mu-1), 2^(nu+1)), 2^(nu-mu), 1)`.
pub struct S1Inner<'a> {
    sys: &'a FunctionSystem,
    eps: XInterval,
    fast: bool,
    // running sum K(m) of 2^-mu / psi1(2^(-mu-1)) over mu = 1..=m
    k_m: i64,
    k_val: XInterval,
    mu_star: i64,
    pub direct_terms: u64,
}

impl<'a> S1Inner<'a> {
    pub fn new(sys: &'a FunctionSystem, eps: &BigRational) -> Res<S1Inner<'a>> {
        if sys.mode != Mode::Product {
            return Err(SystemError::Mode("S1 needs a product-mode system".into()));
        }
        let fast = sys.psi2_is_identity() && omega_y_monotone(sys, 64)?;
        Ok(S1Inner {
            sys,
            eps: xi_eps(eps),
            fast,
            k_m: 0,
            k_val: XInterval::ZERO,
            mu_star: 0,
            direct_terms: 0,
        })
    }

    pub fn is_fast(&self) -> bool {
        self.fast
    }

    fn k_term(&self, mu: i64) -> Res<XInterval> {
        let p = self.sys.psi1.at_xi(XF::pow2(-mu - 1))?;
        Ok(XInterval::pow2(-mu).div(p)?)
    }

    fn move_k(&mut self, m: i64) -> Res<()> {
        while self.k_m < m {
            self.k_m += 1;
            self.k_val = self.k_val.add(self.k_term(self.k_m)?);
        }
        while self.k_m > m {
            let t = self.k_term(self.k_m)?;
            self.k_val = self.k_val.sub(t);
            self.k_m -= 1;
        }
        if m == 0 {
            self.k_val = XInterval::ZERO;
        }
        Ok(())
    }

    fn psi2_star(&self, v: XInterval) -> Res<XInterval> {
        if self.sys.psi2_is_identity() {
            return Ok(v);
        }
        let iv = self.sys.psi2_star(&v.to_interval(), 64)?;
        Ok(XInterval::from_interval(&iv))
    }

    /// One term `delta1(mu, nu) max(...)`.
    fn term(&mut self, mu: i64, nu: i64, phi: XInterval) -> Res<XInterval> {
        self.direct_terms += 1;
        let den = phi.mul(self.sys.psi1.at_xi(XF::pow2(-mu - 1))?);
        let d = self.psi2_star(self.eps.div(den)?)?;
        let om = self.sys.big_omega_xi(XInterval::pow2(mu - 1), XInterval::pow2(nu + 1))?;
        let m = om.max(XInterval::pow2(nu - mu)).max(XInterval::pow2(0));
        Ok(d.mul(m))
    }

    /// `Omega(2^(mu-1), 2^(nu+1)) <= 2^(nu-mu)` and `mu <= nu`, certified.
    fn bulk_ok(&self, mu: i64, nu: i64) -> Res<bool> {
        if mu > nu {
            return Ok(false);
        }
        let om = self.sys.big_omega_xi(XInterval::pow2(mu - 1), XInterval::pow2(nu + 1))?;
        Ok(om.hi <= XF::pow2(nu - mu))
    }

    pub fn inner(&mut self, nu: u64) -> Res<XInterval> {
        let top = mu_max(self.sys, nu)?;
        let nu = nu as i64;
        if top < 1 {
            return Ok(XInterval::ZERO);
        }
        let phi = self.sys.phi().at_xi(XF::pow2(nu))?;
        if !phi.is_positive() {
            return Err(NumericsError::Domain("phi(2^nu) vanishes".into()).into());
        }
        if !self.fast {
            let mut acc = XInterval::ZERO;
            for mu in 1..=top {
                acc = acc.add(self.term(mu, nu, phi)?);
            }
            return Ok(acc);
        }
        // Largest certified mu* (monotone in mu by the shape assumption).
        let cap = top.min(nu);
        let mut m = self.mu_star.min(cap);
        while m > 0 && !self.bulk_ok(m, nu)? {
            m -= 1;
        }
        while m < cap && self.bulk_ok(m + 1, nu)? {
            m += 1;
        }
        self.mu_star = m;
        self.move_k(m)?;
        let c = self.eps.shl(nu).div(phi)?;
        let mut acc = c.mul(self.k_val);
        for mu in m + 1..=top {
            acc = acc.add(self.term(mu, nu, phi)?);
        }
        Ok(acc)
    }
}

/// Max-mode inner term
/// `delta2(nu) max(Omega(1/(2 r), 2^(nu+1)), 2^nu r, 1)`, `r = r_eps(nu)`.
pub fn s2_term(sys: &FunctionSystem, nu: u64, eps: &XInterval) -> Res<XInterval> {
    if sys.mode != Mode::Max {
        return Err(SystemError::Mode("S2 needs a max-mode system".into()));
    }
    let nu = nu as i64;
    let t = XF::pow2(nu);
    let inv = |f: &crate::funcsys::UnaryFn, v: XInterval, identity: bool| -> Res<XInterval> {
        if identity {
            Ok(v)
        } else {
            Ok(XInterval::from_interval(&f.inv(&v.to_interval(), 64)?))
        }
    };
    let d2 = inv(&sys.psi2, eps.div(sys.phi2().at_xi(t)?)?, sys.psi2_is_identity())?;
    let r = inv(&sys.psi1, eps.div(sys.phi1().at_xi(t)?)?, sys.psi1_is_identity())?;
    let y = XInterval::pow2(-1).div(r)?;
    let om = sys.big_omega_xi(y, XInterval::pow2(nu + 1))?;
    let m = om.max(r.shl(nu)).max(XInterval::pow2(0));
    Ok(d2.mul(m))
}

/// `S1(X)` by direct summation over its `nu` range.
pub fn sum_s1(x: u64, eps: &BigRational, a: &BigRational, sys: &FunctionSystem) -> Res<XInterval> {
    let mut inner = S1Inner::new(sys, eps)?;
    let mut acc = XInterval::ZERO;
    for nu in x..=nu_last(x, a) {
        acc = acc.add(inner.inner(nu)?);
    }
    Ok(acc)
}

/// `S2(X)` by direct summation.
pub fn sum_s2(x: u64, eps: &BigRational, a: &BigRational, sys: &FunctionSystem) -> Res<XInterval> {
    let e = xi_eps(eps);
    let mut acc = XInterval::ZERO;
    for nu in x..=nu_last(x, a) {
        acc = acc.add(s2_term(sys, nu, &e)?);
    }
    Ok(acc)
}

/// `S(X)` for every `X` in `[from, to]`, in order.
pub fn scan_s(
    sys: &FunctionSystem,
    eps: &BigRational,
    a: &BigRational,
    from: u64,
    to: u64,
    mut visit: impl FnMut(u64, XInterval),
) -> Res<()> {
    let last = nu_last(to, a);
    let n = (last - from + 1) as usize;
    let mut prefix = Vec::with_capacity(n + 1);
    prefix.push(XInterval::ZERO);
    let mut acc = XInterval::ZERO;
    match sys.mode {
        Mode::Product => {
            let mut inner = S1Inner::new(sys, eps)?;
            for nu in from..=last {
                acc = acc.add(inner.inner(nu)?);
                prefix.push(acc);
            }
        }
        Mode::Max => {
            let e = xi_eps(eps);
            for nu in from..=last {
                acc = acc.add(s2_term(sys, nu, &e)?);
                prefix.push(acc);
            }
        }
    }
    for x in from..=to {
        let hi = (nu_last(x, a) - from + 1) as usize;
        let lo = (x - from) as usize;
        let v = prefix[hi].sub(prefix[lo]);
        let v = XInterval { lo: if v.lo.is_negative() { XF::ZERO } else { v.lo }, hi: v.hi };
        visit(x, v);
    }
    Ok(())
}
