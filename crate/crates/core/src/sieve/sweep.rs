//! Window sweep: the final survivor set is never materialised.
//!
//! `[0, 1]` is cut into `2^w` windows at the final level `L`. For each window
//! every `x` emits the parts of its zone covers that fall inside, and a
//! sweep over the sorted pieces charges each covered stretch to the smallest
//! `x` covering it. That charge is exactly the measure `x` removes from
//! `B_{x-1}`. Zone endpoints are tracked with an incremental integer
//! division per `x`, so the inner loop has no divisions.

use super::plan::{XPlan, Zone};
use super::{SieveError, SweepResult};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};

/// Minimum number of window bits.
const MIN_WINDOW_BITS: u32 = 12;
/// Target number of zone pieces per window.
const PIECES_PER_WINDOW: u128 = 1 << 15;
/// Checkpoint rounds per run.
const ROUNDS: u64 = 64;
/// Positions at level `L` are `u64`.
const MAX_SWEEP_LEVEL: u32 = 62;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Layout {
    /// Final level `L`.
    pub level: u32,
    /// `2^w` windows.
    pub window_bits: u32,
}

impl Layout {
    fn window_size(&self) -> u64 {
        1u64 << (self.level - self.window_bits)
    }

    pub fn windows(&self) -> u64 {
        1u64 << self.window_bits
    }
}

/// The sweep layout, or `None` when positions or `x` do not fit it.
pub fn layout(plans: &[XPlan], level: u32) -> Option<Layout> {
    let x_max = plans.last().map_or(2, |p| p.x);
    if level > MAX_SWEEP_LEVEL || x_max > i64::MAX as u64 / 4 {
        return None;
    }
    let pieces: u128 = plans.iter().filter(|p| p.active()).map(|p| p.x as u128 + 1).sum();
    let want = 128 - (pieces / PIECES_PER_WINDOW).leading_zeros();
    let window_bits = want.max(MIN_WINDOW_BITS).min(level);
    Some(Layout { level, window_bits })
}

/// Per-`x` zone walker. Zone `y` covers cells
/// `floor((y 2^l + clo) / x) .. floor((y 2^l + chi) / x)` at level `l`,
/// with `clo = floor((eta - sigma) 2^l)` and
/// `chi = ceil((eta + sigma) 2^l) + x - 1`.
#[derive(Clone, Debug)]
struct Walker {
    idx: u32,
    x: i64,
    whole: bool,
    top: i64,
    lsh: u32,
    clo: i128,
    chi: i128,
    y: u64,
    done: bool,
    qlo: i64,
    rlo: i64,
    qhi: i64,
    rhi: i64,
    dq: i64,
    dr: i64,
    /// The `y = x` zone starts beyond 1.
    last_outside: bool,
    /// `ceil(sigma)`.
    sig: u64,
    /// Own plan index exceeds its packing thresholds.
    f16: bool,
    f32: bool,
    /// Lengths emitted since positioning; cluster overlaps are corrected
    /// separately.
    credit: u128,
}

fn floor_i128(q: &BigRational) -> i128 {
    q.floor().to_integer().to_i128().expect("zone offset fits")
}

impl Walker {
    /// Walker with its constants set but not yet positioned.
    fn new(idx: u32, p: &XPlan, lay: &Layout, th: &Thresholds) -> Walker {
        let mut w = Walker {
            idx,
            x: p.x as i64,
            whole: true,
            top: 0,
            lsh: 0,
            clo: 0,
            chi: 0,
            y: 0,
            done: false,
            qlo: 0,
            rlo: 0,
            qhi: 0,
            rhi: 0,
            dq: 0,
            dr: 0,
            last_outside: false,
            sig: 0,
            f16: th.t16[idx as usize].is_some_and(|t| idx > t),
            f32: th.t32[idx as usize].is_some_and(|t| idx > t),
            credit: 0,
        };
        let (sigma, l) = match &p.zone {
            Zone::Radius { sigma, level } => (sigma.to_rational(), *level),
            _ => return w,
        };
        let eta = p.eta.to_rational();
        let scale = BigRational::from_integer(BigInt::from(1u64) << l as usize);
        let x = p.x as i64;
        w.whole = false;
        w.top = 1i64 << l;
        w.lsh = lay.level - l;
        w.clo = floor_i128(&((&eta - &sigma) * &scale));
        w.chi = -floor_i128(&(-(&eta + &sigma) * &scale)) + x as i128 - 1;
        w.dq = w.top / x;
        w.dr = w.top % x;
        w.last_outside = eta > sigma;
        w.sig = sigma.ceil().to_integer().to_u64().unwrap_or(u64::MAX);
        w
    }

    /// A copy at the first zone ending after position `from`.
    fn positioned(&self, lay: &Layout, from: u64) -> Walker {
        let mut w = self.clone();
        if w.whole {
            return w;
        }
        // Zones with y below from x / 2^L - sigma - 2 end before `from`.
        let y0 = ((from as u128 * self.x as u128) >> lay.level) as u64;
        w.seek(y0.saturating_sub(self.sig.saturating_add(2)));
        while !w.done && w.current().1 <= from {
            w.advance();
        }
        w
    }

    fn seek(&mut self, y: u64) {
        let x = self.x as i128;
        let base = y as i128 * self.top as i128;
        let (nlo, nhi) = (base + self.clo, base + self.chi);
        self.qlo = nlo.div_euclid(x) as i64;
        self.rlo = nlo.rem_euclid(x) as i64;
        self.qhi = nhi.div_euclid(x) as i64;
        self.rhi = nhi.rem_euclid(x) as i64;
        self.y = y;
        self.done = y > self.x as u64 || (y == self.x as u64 && self.last_outside);
    }

    #[inline]
    fn advance(&mut self) {
        self.qlo += self.dq;
        self.rlo += self.dr;
        if self.rlo >= self.x {
            self.rlo -= self.x;
            self.qlo += 1;
        }
        self.qhi += self.dq;
        self.rhi += self.dr;
        if self.rhi >= self.x {
            self.rhi -= self.x;
            self.qhi += 1;
        }
        self.y += 1;
        if self.y > self.x as u64 || (self.y == self.x as u64 && self.last_outside) {
            self.done = true;
        }
    }

    /// Current zone as positions `[start, end)` at level `L`.
    #[inline]
    fn current(&self) -> (u64, u64) {
        let lo = self.qlo.clamp(0, self.top - 1);
        let hi = self.qhi.clamp(1, self.top);
        ((lo as u64) << self.lsh, (hi as u64) << self.lsh)
    }
}

/// Partial sums; also the checkpointed state.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SweepProgress {
    pub layout: Layout,
    pub next_window: u64,
    #[serde(with = "u128_vec")]
    pub marginal: Vec<u128>,
    #[serde(with = "u128_vec")]
    pub inter16: Vec<u128>,
    #[serde(with = "u128_vec")]
    pub inter32: Vec<u128>,
    #[serde(with = "opt_u128")]
    pub first_survivor: Option<u128>,
    pub union_matches: bool,
    #[serde(with = "super::cells::u128_str")]
    pub uncovered: u128,
}

impl SweepProgress {
    pub fn new(layout: Layout, n: usize) -> SweepProgress {
        SweepProgress {
            layout,
            next_window: 0,
            marginal: vec![0; n],
            inter16: vec![0; n],
            inter32: vec![0; n],
            first_survivor: None,
            union_matches: true,
            uncovered: 0,
        }
    }

    fn absorb(&mut self, o: SweepProgress) {
        for (a, b) in self.marginal.iter_mut().zip(o.marginal) {
            *a += b;
        }
        for (a, b) in self.inter16.iter_mut().zip(o.inter16) {
            *a += b;
        }
        for (a, b) in self.inter32.iter_mut().zip(o.inter32) {
            *a += b;
        }
        self.first_survivor = match (self.first_survivor, o.first_survivor) {
            (Some(a), Some(b)) => Some(a.min(b)),
            (a, b) => a.or(b),
        };
        self.union_matches &= o.union_matches;
        self.uncovered += o.uncovered;
    }

    pub fn finish(self) -> SweepResult {
        SweepResult {
            level: self.layout.level,
            marginal: self.marginal,
            inter16: self.inter16,
            inter32: self.inter32,
            first_survivor: self.first_survivor,
            union_matches: self.union_matches,
            uncovered: self.uncovered,
        }
    }
}

/// PP thresholds per plan index: `x` is charged in the packing sums only for
/// stretches not covered by any plan index `<= t`.
#[derive(Clone, Debug)]
pub struct Thresholds {
    pub t16: Vec<Option<u32>>,
    pub t32: Vec<Option<u32>>,
}

#[derive(Clone, Copy)]
struct Piece {
    start: u64,
    end: u64,
    idx: u32,
}

fn sweep_windows(protos: &[Walker], n: usize, th: &Thresholds, lay: &Layout, from: u64, to: u64) -> SweepProgress {
    let z = lay.window_size();
    let mut walkers: Vec<Walker> = protos.iter().map(|w| w.positioned(lay, from * z)).collect();
    let mut acc = SweepProgress::new(*lay, n);
    let mut pieces: Vec<Piece> = Vec::new();
    let mut active: Vec<Piece> = Vec::new();
    // Walkers are bucketed by the window of their next zone, so each window
    // only touches the walkers that reach it.
    let mut buckets: Vec<Vec<u32>> = vec![vec![]; (to - from) as usize];
    let mut whole = vec![];
    for (k, w) in walkers.iter().enumerate() {
        if w.whole {
            whole.push(k as u32);
        } else if !w.done {
            let b = (w.current().0 / z).max(from);
            if b < to {
                buckets[(b - from) as usize].push(k as u32);
            }
        }
    }
    for j in from..to {
        let ws = j * z;
        let we = ws + z;
        pieces.clear();
        for &k in &whole {
            let w = &mut walkers[k as usize];
            w.credit += z as u128;
            pieces.push(Piece { start: 0, end: z, idx: w.idx });
        }
        let list = std::mem::take(&mut buckets[(j - from) as usize]);
        for &k in &list {
            let w = &mut walkers[k as usize];
            while !w.done {
                let (s, e) = w.current();
                if s >= we {
                    break;
                }
                let (a, b) = (s.max(ws) - ws, e.min(we) - ws);
                w.credit += (b - a) as u128;
                pieces.push(Piece { start: a, end: b, idx: w.idx });
                if e > we {
                    break;
                }
                w.advance();
            }
            if !w.done {
                let b = (w.current().0 / z).max(j + 1);
                if b < to {
                    buckets[(b - from) as usize].push(k);
                }
            }
        }
        // The charges below do not depend on the order of equal starts.
        sort_pieces(&mut pieces, z);

        // Clusters of chained overlapping pieces. A lone piece keeps the
        // credit its walker took; larger clusters go through the event sweep.
        let mut merged = 0u128;
        let mut charged = 0u128;
        let mut pos = 0u64;
        let mut i = 0;
        while i < pieces.len() {
            let (s0, mut reach) = (pieces[i].start, pieces[i].end);
            let mut k = i + 1;
            while k < pieces.len() && pieces[k].start < reach {
                reach = reach.max(pieces[k].end);
                k += 1;
            }
            if s0 > pos {
                acc.uncovered += (s0 - pos) as u128;
                acc.first_survivor.get_or_insert((ws + pos) as u128);
            }
            merged += (reach - s0) as u128;
            if k == i + 1 {
                charged += (pieces[i].end - pieces[i].start) as u128;
            } else {
                charged += charge_cluster(&pieces[i..k], th, &mut acc, &mut active);
            }
            pos = reach;
            i = k;
        }
        if pos < z {
            acc.uncovered += (z - pos) as u128;
            acc.first_survivor.get_or_insert((ws + pos) as u128);
        }
        if merged != charged {
            acc.union_matches = false;
        }
    }
    for w in &walkers {
        let u = w.idx as usize;
        acc.marginal[u] = acc.marginal[u].wrapping_add(w.credit);
        if w.f16 {
            acc.inter16[u] = acc.inter16[u].wrapping_add(w.credit);
        }
        if w.f32 {
            acc.inter32[u] = acc.inter32[u].wrapping_add(w.credit);
        }
    }
    acc.next_window = to;
    acc
}

/// Sort by start: a radix pass on the leading 16 bits of the offset, then an
/// insertion pass that fixes the few remaining inversions.
fn sort_pieces(pieces: &mut [Piece], z: u64) {
    let sh = (64 - z.leading_zeros()).saturating_sub(16);
    radsort::sort_by_key(pieces, |p| (p.start >> sh) as u16);
    let mut budget = 8 * pieces.len();
    for i in 1..pieces.len() {
        let mut j = i;
        while j > 0 && pieces[j - 1].start > pieces[j].start {
            pieces.swap(j - 1, j);
            j -= 1;
            budget = budget.saturating_sub(1);
        }
        if budget == 0 {
            pieces.sort_unstable_by_key(|p| p.start);
            return;
        }
    }
}

/// Event sweep over one cluster: each stretch is charged to the smallest
/// plan index covering it. Every piece was already credited as if alone, so
/// that credit is taken back first; sums wrap until the walkers are flushed.
/// Returns the covered length.
fn charge_cluster(pieces: &[Piece], th: &Thresholds, acc: &mut SweepProgress, active: &mut Vec<Piece>) -> u128 {
    for p in pieces {
        let (u, len) = (p.idx as usize, (p.end - p.start) as u128);
        acc.marginal[u] = acc.marginal[u].wrapping_sub(len);
        if th.t16[u].is_some_and(|t| p.idx > t) {
            acc.inter16[u] = acc.inter16[u].wrapping_sub(len);
        }
        if th.t32[u].is_some_and(|t| p.idx > t) {
            acc.inter32[u] = acc.inter32[u].wrapping_sub(len);
        }
    }
    let end = pieces.iter().map(|p| p.end).max().unwrap_or(0);
    let mut charged = 0u128;
    let mut pos = pieces[0].start;
    let mut i = 0;
    active.clear();
    while pos < end {
        let next_start = pieces.get(i).map_or(end, |p| p.start);
        let ev = match active.iter().map(|p| p.end).min() {
            Some(e) => e.min(next_start),
            None => next_start,
        };
        if ev > pos && !active.is_empty() {
            let len = (ev - pos) as u128;
            charged += len;
            let min = active.iter().map(|p| p.idx).min().unwrap();
            acc.marginal[min as usize] = acc.marginal[min as usize].wrapping_add(len);
            for (k, p) in active.iter().enumerate() {
                if active[..k].iter().any(|q| q.idx == p.idx) {
                    continue;
                }
                let u = p.idx as usize;
                if th.t16[u].is_some_and(|t| min > t) {
                    acc.inter16[u] = acc.inter16[u].wrapping_add(len);
                }
                if th.t32[u].is_some_and(|t| min > t) {
                    acc.inter32[u] = acc.inter32[u].wrapping_add(len);
                }
            }
        }
        pos = pos.max(ev);
        active.retain(|p| p.end > pos);
        while i < pieces.len() && pieces[i].start == pos {
            if pieces[i].end > pos {
                active.push(pieces[i]);
            }
            i += 1;
        }
    }
    charged
}

/// Run (or resume) the sweep. `checkpoint` is called after every round with
/// the accumulated state.
pub fn run_sweep(
    plans: &[XPlan],
    th: &Thresholds,
    mut state: SweepProgress,
    threads: usize,
    mut checkpoint: impl FnMut(&SweepProgress) -> Result<(), SieveError>,
) -> Result<SweepResult, SieveError> {
    let lay = state.layout;
    let total = lay.windows();
    let threads = threads.max(1) as u64;
    let protos: Vec<Walker> = plans
        .iter()
        .enumerate()
        .filter(|(_, p)| p.active())
        .map(|(i, p)| Walker::new(i as u32, p, &lay, th))
        .collect();
    let (protos, n) = (&protos[..], plans.len());
    while state.next_window < total {
        let start = state.next_window;
        let round = (total / ROUNDS).max(threads);
        let end = (start + round).min(total);
        let per = (end - start).div_ceil(threads);
        let parts: Vec<SweepProgress> = std::thread::scope(|sc| {
            let hs: Vec<_> = (0..threads)
                .map(|t| {
                    let a = (start + t * per).min(end);
                    let b = (a + per).min(end);
                    sc.spawn(move || sweep_windows(protos, n, th, &lay, a, b))
                })
                .collect();
            hs.into_iter().map(|h| h.join().expect("sweep thread")).collect()
        });
        for p in parts {
            state.absorb(p);
        }
        state.next_window = end;
        checkpoint(&state)?;
    }
    Ok(state.finish())
}

mod u128_vec {
    use serde::{de::Error, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &[u128], s: S) -> Result<S::Ok, S::Error> {
        s.collect_seq(v.iter().map(|n| n.to_string()))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<u128>, D::Error> {
        Vec::<String>::deserialize(d)?.iter().map(|s| s.parse().map_err(D::Error::custom)).collect()
    }
}

mod opt_u128 {
    use serde::{de::Error, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &Option<u128>, s: S) -> Result<S::Ok, S::Error> {
        match v {
            Some(n) => s.serialize_some(&n.to_string()),
            None => s.serialize_none(),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<u128>, D::Error> {
        Option::<String>::deserialize(d)?.map(|s| s.parse().map_err(D::Error::custom)).transpose()
    }
}
