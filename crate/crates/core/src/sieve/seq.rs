//! Step-by-step engine over an explicit survivor set.

use super::cells::DyadicIntervalSet;
use super::plan::{plan_cover, XPlan};
use super::{SieveError, SweepResult};

/// Survivor set plus snapshots at completed block boundaries.
#[derive(Clone, Debug)]
pub struct SieveState<'a> {
    plans: &'a [XPlan],
    boundaries: &'a [u64],
    level: u32,
    pub survivors: DyadicIntervalSet,
    /// Index into `plans` of the next `x`.
    pub next: usize,
    /// `B_{q_k}` for each boundary reached so far.
    snapshots: Vec<DyadicIntervalSet>,
    pub marginal: Vec<u128>,
    pub inter16: Vec<u128>,
    pub inter32: Vec<u128>,
}

impl<'a> SieveState<'a> {
    /// `plans` must be consecutive in `x` and start at `boundaries[0]`.
    pub fn new(plans: &'a [XPlan], boundaries: &'a [u64], level: u32) -> Result<SieveState<'a>, SieveError> {
        let mut survivors = DyadicIntervalSet::full();
        survivors.refine_to(level)?;
        Ok(SieveState {
            plans,
            boundaries,
            level,
            survivors,
            next: 0,
            snapshots: vec![],
            marginal: vec![0; plans.len()],
            inter16: vec![0; plans.len()],
            inter32: vec![0; plans.len()],
        })
    }

    pub fn done(&self) -> bool {
        self.next >= self.plans.len()
    }

    /// Block index `k` with `q_k < x <= q_{k+1}`, counting `x = q0` as 0.
    fn block_of(&self, x: u64) -> usize {
        self.boundaries[1..].iter().take_while(|&&q| q < x).count()
    }

    /// Process one `x`: subtract `A(x)` and record the removed measure.
    pub fn step(&mut self) -> Result<(), SieveError> {
        let i = self.next;
        let p = &self.plans[i];
        if p.active() {
            let mut cover = plan_cover(p);
            cover.refine_to(self.level)?;
            let k = self.block_of(p.x);
            if k >= 1 {
                self.inter16[i] = self.snapshots[k - 1].intersect_count(&cover).0;
                self.inter32[i] = self.snapshots[k].intersect_count(&cover).0;
            }
            self.marginal[i] = self.survivors.subtract(&cover)?;
        }
        if self.boundaries.contains(&p.x) {
            self.snapshots.push(self.survivors.clone());
        }
        self.next += 1;
        Ok(())
    }

    pub fn run(mut self) -> Result<(SweepResult, DyadicIntervalSet), SieveError> {
        while !self.done() {
            self.step()?;
        }
        let res = SweepResult {
            level: self.level,
            marginal: self.marginal,
            inter16: self.inter16,
            inter32: self.inter32,
            first_survivor: self.survivors.first().map(|c| c.a),
            union_matches: true,
            uncovered: self.survivors.count(),
        };
        Ok((res, self.survivors))
    }
}
