//! Numerical checks of the sum and growth hypotheses.

pub mod growth;
pub mod ssum;
pub mod tsum;

pub use growth::{check_growth, GrowthReport};
pub use ssum::{scan_s, sum_s1, sum_s2};
pub use tsum::{sum_t, TSumInput, TSumReport};

use crate::funcsys::{FunctionSystem, Mode, SystemError};
use crate::numerics::{render_rational, Precision, XInterval, XF};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::ToPrimitive;
use serde::Serialize;

/// The sum threshold `2^-9`.
pub const S_THRESHOLD_LOG2: i64 = -9;
/// The `T` threshold `2^-6`.
pub const T_THRESHOLD_LOG2: i64 = -6;
/// Per-`X` values kept in a report.
pub const PER_X_LIMIT: usize = 2048;

#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct SValue {
    pub x: u64,
    /// Enclosure endpoints as exact dyadic rationals.
    pub lo: String,
    pub hi: String,
    pub hi_f64: f64,
}

impl SValue {
    fn new(x: u64, v: XInterval) -> SValue {
        SValue {
            x,
            lo: render_rational(&v.lo.to_dyadic().to_rational()),
            hi: render_rational(&v.hi.to_dyadic().to_rational()),
            hi_f64: v.hi.to_f64(),
        }
    }
}

#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct SumReport {
    pub scan_range: [u64; 2],
    pub sup: SValue,
    /// Every `X` whose upper bound exceeds the threshold, up to the limit.
    pub violations: Vec<u64>,
    pub violation_count: u64,
    pub ok: bool,
    /// Evenly spaced sample of per-`X` values (all of them for short scans).
    pub per_x: Vec<SValue>,
    pub per_x_stride: u64,
    /// Closed-form bound from the preset's derivation, when it has one.
    pub advisory_bound: Option<f64>,
    pub within_advisory: Option<bool>,
}

#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct AdmissibilityReport {
    pub mode: Mode,
    pub system: String,
    #[serde(rename = "A")]
    pub a: String,
    pub epsilon: String,
    #[serde(rename = "X0")]
    pub x0: String,
    pub cond_growth_ok: bool,
    pub cond_sum_ok: bool,
    pub growth: GrowthReport,
    pub sum: SumReport,
}

impl AdmissibilityReport {
    pub fn ok(&self) -> bool {
        self.cond_growth_ok && self.cond_sum_ok
    }
}

/// Closed-form upper bounds stated for the presets, as `f64`.
pub fn advisory_bound(sys: &FunctionSystem, eps: &BigRational, a: &BigRational) -> Option<f64> {
    let e = eps.to_f64()?;
    let l = (2.0 * a.to_f64()?).ln();
    match sys.name() {
        "example1" => Some(16.0 * e * l),
        "example4" => {
            let av = sys.param("a")?.to_f64()?;
            Some(32.0 * e * l / (1.0 - av))
        }
        _ => None,
    }
}

/// Scan `S(X)` for `X` in `[from, to]` against `2^-9`.
pub fn check_sum_threshold(
    sys: &FunctionSystem,
    eps: &BigRational,
    a: &BigRational,
    from: u64,
    to: u64,
) -> Result<SumReport, SystemError> {
    let count = to - from + 1;
    let stride = count.div_ceil(PER_X_LIMIT as u64).max(1);
    let thr = XF::pow2(S_THRESHOLD_LOG2);
    let mut sup: Option<(u64, XInterval)> = None;
    let mut per_x = vec![];
    let mut violations = vec![];
    let mut violation_count = 0u64;
    scan_s(sys, eps, a, from, to, |x, v| {
        if sup.map_or(true, |(_, s)| v.hi > s.hi) {
            sup = Some((x, v));
        }
        if !(v.hi <= thr) {
            violation_count += 1;
            if violations.len() < PER_X_LIMIT {
                violations.push(x);
            }
        }
        if (x - from) % stride == 0 || x == to {
            per_x.push(SValue::new(x, v));
        }
    })?;
    let (sx, sv) = sup.expect("nonempty scan");
    let advisory = advisory_bound(sys, eps, a);
    Ok(SumReport {
        scan_range: [from, to],
        sup: SValue::new(sx, sv),
        violations,
        violation_count,
        ok: violation_count == 0,
        per_x,
        per_x_stride: stride,
        advisory_bound: advisory,
        within_advisory: advisory.map(|b| sv.lo.to_f64() <= b),
    })
}

/// Growth condition plus sum threshold.
#[allow(clippy::too_many_arguments)]
pub fn check_admissibility(
    sys: &FunctionSystem,
    eps: &BigRational,
    a: &BigRational,
    x0: &BigInt,
    growth_cap_log2: u64,
    scan_from: u64,
    scan_to: u64,
    prec: Precision,
) -> Result<AdmissibilityReport, SystemError> {
    let growth = check_growth(sys, x0, eps, a, growth_cap_log2, prec)?;
    let sum = check_sum_threshold(sys, eps, a, scan_from, scan_to)?;
    Ok(AdmissibilityReport {
        mode: sys.mode,
        system: sys.name().to_string(),
        a: render_rational(a),
        epsilon: render_rational(eps),
        x0: x0.to_string(),
        cond_growth_ok: growth.ok,
        cond_sum_ok: sum.ok,
        growth,
        sum,
    })
}

/// Largest `eps = 2^-k`, `k <= kmax`, passing both checks.
#[allow(clippy::too_many_arguments)]
pub fn find_epsilon(
    sys: &FunctionSystem,
    a: &BigRational,
    x0: &BigInt,
    growth_cap_log2: u64,
    scan_from: u64,
    scan_to: u64,
    kmax: u32,
    prec: Precision,
) -> Result<Option<u32>, SystemError> {
    for k in 0..=kmax {
        let eps = BigRational::new(1.into(), BigInt::from(1) << (k as usize));
        let r = check_admissibility(sys, &eps, a, x0, growth_cap_log2, scan_from, scan_to, prec)?;
        if r.ok() {
            return Ok(Some(k));
        }
    }
    Ok(None)
}
