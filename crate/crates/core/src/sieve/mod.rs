//! The dyadic interval sieve: survivor sets `B_q`, block checks and the
//! extraction of `beta`.

pub mod cells;
pub mod cover;
pub mod eta;
pub mod plan;
pub mod seq;
pub mod sweep;

pub use cells::{DyadicInterval, DyadicIntervalSet, LevelOverflow, MAX_LEVEL};
pub use cover::{danger_cover, level_of};
pub use eta::{EtaProvider, EtaSpec, EtaValue};
pub use plan::{XPlan, Zone};
pub use seq::SieveState;
pub use sweep::SweepProgress;

use crate::funcsys::{FunctionSystem, Mode, SystemError};
use crate::numerics::{render_rational, NumericsError, Precision, RefinableReal};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use plan::{block_boundaries, first_block_bound, max_level, plan_range, PlanInput};
use serde::{Deserialize, Serialize};

#[derive(Debug, thiserror::Error)]
pub enum SieveError {
    #[error(transparent)]
    Level(#[from] LevelOverflow),
    #[error(transparent)]
    System(#[from] SystemError),
    #[error("input error: {0}")]
    Input(String),
    #[error("no power-of-two q0 <= {0} satisfies the first-block bound")]
    NoBase(u64),
    #[error("checkpoint: {0}")]
    Checkpoint(String),
}

impl From<NumericsError> for SieveError {
    fn from(e: NumericsError) -> Self {
        SieveError::System(e.into())
    }
}

/// Per-`x` results of an engine run, all cell counts at level `level`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SweepResult {
    pub level: u32,
    /// Measure removed by each plan from the survivors before it.
    pub marginal: Vec<u128>,
    /// `mes(B_{q_{k-1}} ∩ A(x))` for `x` in block `k >= 1`.
    pub inter16: Vec<u128>,
    /// `mes(B_{q_k} ∩ A(x))` for `x` in block `k >= 1`.
    pub inter32: Vec<u128>,
    pub first_survivor: Option<u128>,
    /// Per-window unions agreed with the charged measure.
    pub union_matches: bool,
    /// Uncovered measure counted directly.
    pub uncovered: u128,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Engine {
    #[default]
    Auto,
    Sequential,
    Sweep,
}

#[derive(Clone, Debug)]
pub struct SieveConfig {
    pub sys: FunctionSystem,
    pub eps: BigRational,
    pub a: BigRational,
    pub alpha: RefinableReal,
    pub eta: RefinableReal,
    pub eta_x: EtaProvider,
    /// `None` selects the smallest admissible power of two.
    pub q0: Option<u64>,
    pub q_max: u64,
    pub filter_homogeneous: bool,
    pub prec: Precision,
    pub threads: usize,
    pub engine: Engine,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlockRecord {
    pub q: u64,
    /// `B_q` has been fully computed (`q <= q_max`).
    pub complete: bool,
    /// Level of `B_q`: the largest `l_x` with `x <= q`.
    pub level: u32,
    /// `mes B_q` (at `q_max` for the incomplete block).
    pub measure: String,
    pub measure_f64: f64,
    /// `mes B_q >= mes B_{q_prev} / 2 > 0`; `None` for the first boundary.
    pub halving_ok: Option<bool>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PpReport {
    pub checked: u64,
    pub violations16: Vec<u64>,
    pub violations32: Vec<u64>,
    /// Largest observed `mes(B_q ∩ A(x)) / (sigma mes B_q)`.
    pub worst_ratio16: f64,
    pub worst_ratio32: f64,
}

/// Full outcome of a construction.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SieveRun {
    pub mode: Mode,
    pub q0: u64,
    pub q0_auto: bool,
    pub q_max: u64,
    pub first_block_bound: String,
    pub boundaries: Vec<u64>,
    pub engine: Engine,
    pub level: u32,
    pub processed: u64,
    pub filtered: u64,
    pub ambiguous_filter: u64,
    pub whole_covers: u64,
    pub blocks: Vec<BlockRecord>,
    pub halving_ok: bool,
    pub pp: PpReport,
    pub survivors_measure: String,
    pub survivors_measure_f64: f64,
    pub removed_total: String,
    /// `mes B = 1 - sum of removals`, checked exactly, and the per-window
    /// unions agree with the charges.
    pub measure_identity: bool,
    /// Removal per processed `x` (cells at `level`), as `(x, count)`.
    #[serde(skip)]
    pub removals: Vec<(u64, u128)>,
    /// Final chain; empty when the survivors are empty.
    pub chain: Vec<DyadicInterval>,
}

impl SieveRun {
    pub fn survivors_nonempty(&self) -> bool {
        !self.chain.is_empty()
    }

    pub fn beta(&self) -> Option<&DyadicInterval> {
        self.chain.last()
    }
}

fn pow2(l: u32) -> BigInt {
    BigInt::one() << l as usize
}

fn rat(n: u128, l: u32) -> BigRational {
    BigRational::new(BigInt::from(n), pow2(l))
}

/// `n <= factor * sigma * m` for counts at one level.
fn pp_holds(n: u128, factor: u32, sigma: &crate::numerics::Dyadic, m: u128) -> (bool, f64) {
    let rhs = BigRational::from_integer(BigInt::from(m) * factor)
        * crate::numerics::Dyadic::new(sigma.mantissa().clone(), sigma.exponent()).to_rational();
    let lhs = BigRational::from_integer(BigInt::from(n));
    let ratio = if m == 0 { 0.0 } else { n as f64 / (m as f64 * sigma.to_f64()) };
    (lhs <= rhs, ratio)
}

/// Checkpoint plumbing for long sweeps.
#[derive(Default)]
pub struct RunHooks<'a> {
    pub resume: Option<SweepProgress>,
    pub checkpoint: Option<&'a mut dyn FnMut(&SweepProgress) -> Result<(), SieveError>>,
}

fn plan_input(cfg: &SieveConfig) -> PlanInput<'_> {
    PlanInput {
        sys: &cfg.sys,
        eps: cfg.eps.clone(),
        alpha: cfg.alpha.clone(),
        eta: cfg.eta.clone(),
        eta_x: &cfg.eta_x,
        filter_homogeneous: cfg.filter_homogeneous,
        prec: cfg.prec,
    }
}

/// Choose `q0` and compute the plans for `[q0, q_max]`.
fn resolve_base(cfg: &SieveConfig) -> Result<(u64, bool, BigRational, Vec<XPlan>), SieveError> {
    if cfg.q_max > cfg.eta_x.limit() {
        return Err(SieveError::Input(format!("eta_x provider has only {} values", cfg.eta_x.limit())));
    }
    if let Some(q0) = cfg.q0 {
        if q0 < 4 {
            return Err(SieveError::Input("q0 must be at least 4".into()));
        }
        let plans = plan_range(plan_input(cfg), q0, cfg.q_max)?;
        let q1 = block_boundaries(q0, &cfg.a, cfg.q_max).get(1).copied().unwrap_or(q0);
        let n = plans.iter().take_while(|p| p.x <= q1).count();
        return Ok((q0, false, first_block_bound(&plans[..n]), plans));
    }
    let all = plan_range(plan_input(cfg), 4, cfg.q_max)?;
    let half = BigRational::new(1.into(), 2.into());
    let mut q0 = 4u64;
    loop {
        if q0 > cfg.q_max {
            // Nothing to process: the trivial run.
            return Ok((q0, true, BigRational::zero(), vec![]));
        }
        let q1 = block_boundaries(q0, &cfg.a, cfg.q_max)[1];
        let from = (q0 - 4) as usize;
        let n = all[from..].iter().take_while(|p| p.x <= q1).count();
        let bound = first_block_bound(&all[from..from + n]);
        if bound <= half {
            return Ok((q0, true, bound, all[from..].to_vec()));
        }
        q0 = q0.checked_mul(2).ok_or(SieveError::NoBase(cfg.q_max))?;
    }
}

/// Run the sieve from `q0` to `q_max`.
pub fn construct(cfg: &SieveConfig, hooks: RunHooks) -> Result<SieveRun, SieveError> {
    let (q0, q0_auto, fbb, plans) = resolve_base(cfg)?;
    let boundaries = block_boundaries(q0, &cfg.a, cfg.q_max.max(q0));
    let level = max_level(&plans)?;
    let index_of = |q: u64| plans.iter().position(|p| p.x == q);

    // Block index per plan and the packing thresholds.
    let block_of = |x: u64| boundaries[1..].iter().take_while(|&&q| q < x).count();
    let mut th = sweep::Thresholds { t16: vec![None; plans.len()], t32: vec![None; plans.len()] };
    for (i, p) in plans.iter().enumerate() {
        let k = block_of(p.x);
        if k >= 1 {
            th.t16[i] = index_of(boundaries[k - 1]).map(|v| v as u32);
            th.t32[i] = index_of(boundaries[k]).map(|v| v as u32);
        }
    }

    let layout = sweep::layout(&plans, level);
    let engine = match (cfg.engine, layout) {
        (Engine::Sequential, _) | (Engine::Auto, None) => Engine::Sequential,
        (Engine::Sweep, None) => {
            return Err(SieveError::Input("values do not fit the sweep engine's fixed-point layout".into()))
        }
        (Engine::Auto, Some(_)) if plans.len() <= 1 << 11 => Engine::Sequential,
        _ => Engine::Sweep,
    };
    let res = match engine {
        Engine::Sweep => {
            let lay = layout.unwrap();
            let state = match hooks.resume {
                Some(s) if s.layout == lay && s.marginal.len() == plans.len() => s,
                Some(_) => return Err(SieveError::Checkpoint("checkpoint does not match this run".into())),
                None => SweepProgress::new(lay, plans.len()),
            };
            let mut cp = hooks.checkpoint;
            sweep::run_sweep(&plans, &th, state, cfg.threads, |s| match cp.as_mut() {
                Some(f) => f(s),
                None => Ok(()),
            })?
        }
        _ => SieveState::new(&plans, &boundaries, level)?.run()?.0,
    };
    Ok(assemble(cfg, q0, q0_auto, fbb, boundaries, engine, &plans, res))
}

#[allow(clippy::too_many_arguments)]
fn assemble(
    cfg: &SieveConfig,
    q0: u64,
    q0_auto: bool,
    fbb: BigRational,
    boundaries: Vec<u64>,
    engine: Engine,
    plans: &[XPlan],
    res: SweepResult,
) -> SieveRun {
    let l = res.level;
    let total = 1u128 << l;
    let removed: u128 = res.marginal.iter().sum();
    let survivors = total - removed.min(total);

    // Measures at boundaries.
    let mut blocks = vec![];
    let mut acc = 0u128;
    let mut lvl = 0u32;
    let mut bi = 0usize;
    let mut measures: Vec<u128> = vec![];
    let mut prefix_ok = removed <= total;
    for (i, p) in plans.iter().enumerate() {
        acc += res.marginal[i];
        lvl = lvl.max(if p.active() { p.level() } else { 0 });
        prefix_ok &= acc <= total;
        while bi < boundaries.len() && boundaries[bi] == p.x {
            measures.push(total - acc.min(total));
            let m = total - acc.min(total);
            let halving_ok = (bi > 0).then(|| m > 0 && 2 * m >= measures[bi - 1]);
            blocks.push(BlockRecord {
                q: p.x,
                complete: true,
                level: lvl,
                measure: render_rational(&rat(m, l)),
                measure_f64: m as f64 / total as f64,
                halving_ok,
            });
            bi += 1;
        }
    }
    if bi < boundaries.len() && !plans.is_empty() {
        blocks.push(BlockRecord {
            q: boundaries[bi],
            complete: false,
            level: lvl,
            measure: render_rational(&rat(survivors, l)),
            measure_f64: survivors as f64 / total as f64,
            halving_ok: None,
        });
    }
    let halving_ok = blocks.iter().all(|b| b.halving_ok != Some(false));

    // Packing checks.
    let mut pp = PpReport { checked: 0, violations16: vec![], violations32: vec![], worst_ratio16: 0.0, worst_ratio32: 0.0 };
    let block_of = |x: u64| boundaries[1..].iter().take_while(|&&q| q < x).count();
    for (i, p) in plans.iter().enumerate() {
        let k = block_of(p.x);
        let Zone::Radius { sigma, .. } = &p.zone else { continue };
        if k == 0 || k >= measures.len() {
            continue;
        }
        pp.checked += 1;
        let (ok16, r16) = pp_holds(res.inter16[i], 16, sigma, measures[k - 1]);
        let (ok32, r32) = pp_holds(res.inter32[i], 32, sigma, measures[k]);
        pp.worst_ratio16 = pp.worst_ratio16.max(r16);
        pp.worst_ratio32 = pp.worst_ratio32.max(r32);
        if !ok16 {
            pp.violations16.push(p.x);
        }
        if !ok32 {
            pp.violations32.push(p.x);
        }
    }

    let measure_identity = prefix_ok && res.union_matches && res.uncovered == survivors;
    let chain = match res.first_survivor {
        Some(a) if survivors > 0 => {
            let cell = DyadicInterval::new(a, l);
            let mut c: Vec<DyadicInterval> = blocks.iter().map(|b| cell.ancestor(b.level)).collect();
            c.insert(0, DyadicInterval::new(0, 0));
            c.push(cell);
            c.dedup();
            c
        }
        None if plans.is_empty() => vec![DyadicInterval::new(0, 0)],
        _ => vec![],
    };
    SieveRun {
        mode: cfg.sys.mode,
        q0,
        q0_auto,
        q_max: cfg.q_max,
        first_block_bound: render_rational(&fbb),
        boundaries,
        engine,
        level: l,
        processed: plans.iter().filter(|p| p.active()).count() as u64,
        filtered: plans.iter().filter(|p| !p.active()).count() as u64,
        ambiguous_filter: plans.iter().filter(|p| p.ambiguous).count() as u64,
        whole_covers: plans.iter().filter(|p| p.zone == Zone::Whole).count() as u64,
        blocks,
        halving_ok,
        pp,
        survivors_measure: render_rational(&rat(survivors, l)),
        survivors_measure_f64: survivors as f64 / total as f64,
        removed_total: render_rational(&rat(removed, l)),
        measure_identity,
        removals: plans.iter().zip(&res.marginal).filter(|(p, _)| p.active()).map(|(p, &m)| (p.x, m)).collect(),
        chain,
    }
}

/// Exact decimal expansion of a dyadic rational in `[0, 1]`.
pub fn dyadic_decimal(q: &BigRational) -> String {
    let d = q.denom();
    let k = d.bits() - 1;
    debug_assert!(*d == BigInt::one() << k as usize);
    let digits = q.numer() * BigInt::from(5).pow(k as u32);
    let s = digits.to_string();
    if k == 0 {
        return s;
    }
    let k = k as usize;
    let padded = if s.len() <= k { format!("{}{}", "0".repeat(k + 1 - s.len()), s) } else { s };
    let (int, frac) = padded.split_at(padded.len() - k);
    format!("{int}.{frac}")
}
