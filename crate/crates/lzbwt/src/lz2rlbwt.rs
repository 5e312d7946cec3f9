//! LZ77 to run-length BWT by repeatedly doubling ℓ in the BWT modulo ℓ.
//!
//! BWT_ℓ keeps the real BWT symbol wherever the length-ℓ context of a suffix
//! is not left-maximal and the leftmost occurrence of that context elsewhere.
//! A round turns RL(BWT_ℓ) into RL(BWT_2ℓ). Runs of positions are resolved
//! through a compressed wavelet tree over the reversed contexts that precede
//! synchronizing positions. Inside periodic regions they are filled uniformly
//! and then corrected with local ranks.
//!
//! All strings are read from the cyclic text T∞. Because the sentinel is
//! unique and smallest, comparing rotations is the same as comparing suffixes.

use crate::compressed_index::CompressedIndex;
use crate::cwt::{Cwt, CwtStats, StringSet};
use crate::grammar_queries::{Direction, Fragment, GrammarIndex};
use crate::range::{MergeSortTree, Point};
use crate::rlslp::recompress;
use crate::syncset::{build_compressed_sync_set, SyncError, SyncSet};
use crate::text::{
    build_bwt_runs, build_lcp, build_suffix_array, lz77_decode, lz77_parse, shortest_period, BwtRuns, Lz77Parse,
    ParseError, Run, Text,
};
use serde::Serialize;
use std::cmp::Ordering;
use std::collections::{BTreeSet, HashMap};
use thiserror::Error;

/// Rounds start from the directly computed BWT modulo this value.
pub const ORACLE_BELOW: usize = 16;
pub const DEFAULT_SAMPLING_CONSTANT: f64 = 4.0;
/// Synchronizing positions are kept within 6 blocks of every phrase end.
pub const COMP_K: usize = 6;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum BwtSym {
    Char(u8),
    /// Leftmost occurrence of a left-maximal context.
    Pos(usize),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BwtModulo {
    pub ell: usize,
    pub runs: Vec<(BwtSym, u64)>,
}

fn push(out: &mut Vec<(BwtSym, u64)>, sym: BwtSym, len: u64) {
    if len == 0 {
        return;
    }
    match out.last_mut() {
        Some(last) if last.0 == sym => last.1 += len,
        _ => out.push((sym, len)),
    }
}

impl BwtModulo {
    pub fn n(&self) -> u64 {
        self.runs.iter().map(|r| r.1).sum()
    }

    pub fn rl_len(&self) -> usize {
        self.runs.len()
    }

    pub fn numeric_runs(&self) -> usize {
        self.runs.iter().filter(|r| matches!(r.0, BwtSym::Pos(_))).count()
    }

    /// The plain RL(BWT) once no positions remain.
    pub fn to_bwt_runs(&self) -> Option<BwtRuns> {
        self.runs
            .iter()
            .map(|&(s, len)| match s {
                BwtSym::Char(c) => Some(Run { sym: c, len: len as usize }),
                BwtSym::Pos(_) => None,
            })
            .collect::<Option<Vec<Run>>>()
            .map(|runs| BwtRuns { runs })
    }
}

#[derive(Debug, Error)]
pub enum ConvertError {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Sync(#[from] SyncError),
    #[error("a round needs ell >= {ORACLE_BELOW}, got {0}")]
    SmallEll(usize),
    #[error("position {0} is not in a periodic run")]
    NotPeriodic(usize),
    #[error("internal inconsistency: {0}")]
    Internal(String),
}

fn internal(msg: impl Into<String>) -> ConvertError {
    ConvertError::Internal(msg.into())
}

/// BWT modulo ℓ computed from the suffix array and LCP array.
pub fn bwt_modulo_oracle(text: &Text, ell: usize) -> BwtModulo {
    let sa = build_suffix_array(text);
    let bwt = build_bwt_runs(text, &sa);
    let lcp = build_lcp(text, &sa, &bwt);
    let sym = bwt.decode();
    let n = text.len();
    let mut runs = Vec::new();
    let mut i = 0;
    while i < n {
        let mut j = i + 1;
        while j < n && lcp.lcp[j] >= ell {
            j += 1;
        }
        if sym[i..j].iter().any(|&c| c != sym[i]) {
            push(&mut runs, BwtSym::Pos(*sa.sa[i..j].iter().min().unwrap()), (j - i) as u64);
        } else {
            push(&mut runs, BwtSym::Char(sym[i]), (j - i) as u64);
        }
        i = j;
    }
    BwtModulo { ell, runs }
}

/// The definition applied literally: contexts read from T∞, left-maximality
/// from the set of preceding symbols over all n rotations.
pub fn bwt_modulo_by_definition(text: &Text, ell: usize) -> BwtModulo {
    let n = text.len();
    let inf = text.inf();
    let sa = build_suffix_array(text);
    let mut before: HashMap<Vec<u8>, (BTreeSet<u8>, usize)> = HashMap::new();
    for j in 0..n {
        let e = before.entry(inf.substring(j as i64, ell)).or_insert_with(|| (BTreeSet::new(), j));
        e.0.insert(inf.at(j as i64 - 1));
        e.1 = e.1.min(j);
    }
    let mut runs = Vec::new();
    for &p in &sa.sa {
        let (set, left) = &before[&inf.substring(p as i64, ell)];
        let sym = if set.len() > 1 { BwtSym::Pos(*left) } else { BwtSym::Char(inf.at(p as i64 - 1)) };
        push(&mut runs, sym, 1);
    }
    BwtModulo { ell, runs }
}

/// Cyclic reads and comparisons on T∞ backed by grammar LCE queries.
pub struct Cyclic<'a> {
    t: &'a [u8],
    gi: &'a GrammarIndex,
}

impl<'a> Cyclic<'a> {
    pub fn new(t: &'a [u8], gi: &'a GrammarIndex) -> Cyclic<'a> {
        Cyclic { t, gi }
    }

    pub fn at(&self, i: i64) -> u8 {
        self.t[i.rem_euclid(self.t.len() as i64) as usize]
    }

    /// LCP of T∞[a..) and T∞[b..), capped at `limit`. The unique sentinel
    /// ends every comparison of distinct rotations inside T.
    pub fn fwd_lcp(&self, a: usize, b: usize, limit: usize) -> usize {
        if a == b || limit == 0 {
            return limit;
        }
        self.gi.lce_bounded(a, b, Direction::Forward, limit).min(limit)
    }

    pub fn fwd_cmp(&self, a: usize, b: usize, len: usize) -> Ordering {
        let k = self.fwd_lcp(a, b, len);
        if k >= len {
            Ordering::Equal
        } else {
            self.at((a + k) as i64).cmp(&self.at((b + k) as i64))
        }
    }

    /// Longest common suffix of T∞[..a) and T∞[..b), capped at `limit`.
    pub fn back_lcp(&self, a: usize, b: usize, limit: usize) -> usize {
        if a == b || limit == 0 {
            return limit;
        }
        self.gi.lce_bounded(a, b, Direction::Reverse, limit).min(limit)
    }

    /// Order of the reversed strings T∞[a−len..a) and T∞[b−len..b).
    pub fn back_cmp(&self, a: usize, b: usize, len: usize) -> Ordering {
        let k = self.back_lcp(a, b, len);
        if k >= len {
            Ordering::Equal
        } else {
            self.at(a as i64 - 1 - k as i64).cmp(&self.at(b as i64 - 1 - k as i64))
        }
    }
}

/// Reversed length-τ contexts T∞[s−τ..s) of the W elements.
struct PrefStrings<'a> {
    cyc: &'a Cyclic<'a>,
    starts: Vec<usize>,
    width: usize,
}

impl StringSet for PrefStrings<'_> {
    fn count(&self) -> usize {
        self.starts.len()
    }

    fn width(&self) -> usize {
        self.width
    }

    fn symbol(&self, id: usize, d: usize) -> u8 {
        self.cyc.at(self.starts[id] as i64 - 1 - d as i64)
    }

    fn lcp(&self, a: usize, b: usize) -> usize {
        self.cyc.back_lcp(self.starts[a], self.starts[b], self.width)
    }
}

/// |D_i| for the distinguishing prefix D_i = T[i..i_succ+2τ).
pub fn distinguishing_prefix(s: &SyncSet, n: usize, i: usize) -> usize {
    let tau = s.tau;
    let succ = s.positions.get(s.positions.partition_point(|&p| p < i)).copied().unwrap_or(n + 1 - 2 * tau);
    succ + 2 * tau - i
}

/// Smallest rotation offset (two-pointer minimum-expression scan).
fn least_rotation(s: &[u8]) -> usize {
    let n = s.len();
    let (mut i, mut j, mut k) = (0, 1, 0);
    while i < n && j < n && k < n {
        let (a, b) = (s[(i + k) % n], s[(j + k) % n]);
        if a == b {
            k += 1;
            continue;
        }
        if a > b {
            i += k + 1;
        } else {
            j += k + 1;
        }
        if i == j {
            j += 1;
        }
        k = 0;
    }
    i.min(j)
}

/// A maximal run of periodic positions, described at its first position.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct PeriodicRun {
    pub start: usize,
    pub period: usize,
    /// End (exclusive) of the longest prefix of T[start..) with this period.
    pub rend: usize,
    pub root: usize,
    /// Offset of the first full copy of the root: T[start+phase..start+phase+p) = H.
    pub phase: usize,
    pub exp: usize,
    /// Length of the partial copy of H after H^exp.
    pub tail: usize,
    /// The run ends with a symbol larger than the one the period predicts.
    pub plus: bool,
}

impl PeriodicRun {
    pub fn len(&self) -> usize {
        self.rend - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.rend == self.start
    }
}

/// Signature (|H′|, k, |H″|) capped at exponent ⌈2ℓ/|H|⌉.
pub fn truncate_signature(sig: (usize, usize, usize), ell: usize, period: usize) -> (usize, usize, usize) {
    let cap = (2 * ell).div_ceil(period);
    if sig.1 < cap {
        sig
    } else {
        (0, cap, sig.2)
    }
}

#[derive(Clone, Debug)]
struct ZEntry {
    root: usize,
    tail: usize,
    rend: usize,
    y: usize,
    weight: u64,
}

type Signature = (usize, usize, usize);

#[derive(Clone, Debug, Default)]
struct Side {
    /// Truncated signatures per root with their multiplicities.
    sigs: HashMap<usize, Vec<(Signature, u64)>>,
    z: Vec<ZEntry>,
    tree: Option<MergeSortTree>,
}

/// Local rank split into the part counted by the exponent rounds and the
/// part counted on the sorted run sequence.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct LocalRank {
    pub lt: i64,
    pub eq: i64,
}

impl LocalRank {
    pub fn total(&self) -> i64 {
        self.lt + self.eq
    }
}

/// Runs of periodic positions and the tables that rank periodic contexts.
#[derive(Clone, Debug)]
pub struct PeriodicTables {
    pub ell: usize,
    pub tau: usize,
    pub runs: Vec<PeriodicRun>,
    /// Root id to (leftmost run start, period).
    pub roots: Vec<(usize, usize)>,
    sides: [Side; 2],
    tail_len: usize,
}

impl PeriodicTables {
    pub fn build(cyc: &Cyclic, s: &SyncSet, ell: usize) -> Result<PeriodicTables, ConvertError> {
        let tau = s.tau;
        let n = cyc.t.len();
        let mut bounds: Vec<i64> = vec![-1];
        bounds.extend(s.positions.iter().map(|&p| p as i64));
        bounds.push((n + 1 - 2 * tau) as i64);
        let starts: Vec<usize> =
            bounds.windows(2).filter(|w| w[1] - w[0] > tau as i64).map(|w| (w[0] + 1) as usize).collect();
        let mut root_ids: HashMap<Vec<u8>, usize> = HashMap::new();
        let mut roots: Vec<(usize, usize)> = Vec::new();
        let mut root_rot: Vec<usize> = Vec::new();
        let mut runs = Vec::with_capacity(starts.len());
        for j in starts {
            let p = period_of(cyc, j, tau).ok_or_else(|| internal(format!("run start {j} is not periodic")))?;
            let rend = j + p + cyc.gi.lce(j, j + p, Direction::Forward);
            let rot = least_rotation(&cyc.t[j..j + p]);
            let key: Vec<u8> = (0..p).map(|d| cyc.t[j + (rot + d) % p]).collect();
            let next = roots.len();
            let root = *root_ids.entry(key).or_insert(next);
            if root == next {
                roots.push((j, p));
                root_rot.push(rot);
            }
            let phase = (rot + p - root_rot[root]) % p;
            let len = rend - j;
            runs.push(PeriodicRun {
                start: j,
                period: p,
                rend,
                root,
                phase,
                exp: (len - phase) / p,
                tail: (len - phase) % p,
                plus: cyc.t[rend] > cyc.t[rend - p],
            });
        }
        let tail_len = 2 * ell + 1 - 3 * tau;
        let mut sides = [Side::default(), Side::default()];
        for r in &runs {
            let side = &mut sides[r.plus as usize];
            let sig = truncate_signature((r.phase, r.exp, r.tail), ell, r.period);
            let list = side.sigs.entry(r.root).or_default();
            match list.iter_mut().find(|e| e.0 == sig) {
                Some(e) => e.1 += 1,
                None => list.push((sig, 1)),
            }
            side.z.push(ZEntry {
                root: r.root,
                tail: r.tail,
                rend: r.rend,
                y: (r.phase + r.exp * r.period).min(2 * ell),
                weight: 1,
            });
        }
        for side in &mut sides {
            let key = |a: &ZEntry, b: &ZEntry| {
                a.root.cmp(&b.root).then(a.tail.cmp(&b.tail)).then_with(|| cyc.fwd_cmp(a.rend, b.rend, tail_len)).then(a.y.cmp(&b.y))
            };
            side.z.sort_by(key);
            let mut merged: Vec<ZEntry> = Vec::new();
            for e in side.z.drain(..) {
                match merged.last_mut() {
                    Some(last) if key(last, &e) == Ordering::Equal => last.weight += e.weight,
                    _ => merged.push(e),
                }
            }
            side.tree = Some(MergeSortTree::new(
                merged.iter().enumerate().map(|(x, e)| Point { x, y: e.y, w: e.weight as i64 }).collect(),
            ));
            side.z = merged;
        }
        Ok(PeriodicTables { ell, tau, runs, roots, sides, tail_len })
    }

    fn run_containing(&self, j: usize) -> Result<&PeriodicRun, ConvertError> {
        let k = self.runs.partition_point(|r| r.start <= j);
        let r = k.checked_sub(1).map(|k| &self.runs[k]).ok_or(ConvertError::NotPeriodic(j))?;
        if r.rend - j < 3 * self.tau - 1 || j < r.start {
            return Err(ConvertError::NotPeriodic(j));
        }
        Ok(r)
    }

    /// (Δ, p) with R-root(j) = T[j+Δ..j+Δ+p).
    pub fn root_offset(&self, j: usize) -> Result<(usize, usize), ConvertError> {
        let r = self.run_containing(j)?;
        let p = r.period;
        Ok(((r.phase + p * (j - r.start + 1) - (j - r.start)) % p, p))
    }

    /// R-signature (|H′|, k, |H″|) of a periodic position.
    pub fn signature(&self, j: usize) -> Result<(usize, usize, usize), ConvertError> {
        let r = self.run_containing(j)?;
        let (delta, p) = self.root_offset(j)?;
        let len = r.rend - j;
        Ok((delta, (len - delta) / p, (len - delta) % p))
    }

    pub fn root_string(&self, cyc: &Cyclic, root: usize) -> Vec<u8> {
        let (s, p) = self.roots[root];
        cyc.t[s..s + p].to_vec()
    }

    /// Distinct truncated signatures summed over roots and both run types.
    pub fn signature_classes(&self) -> usize {
        self.sides.iter().map(|s| s.sigs.values().map(Vec::len).sum::<usize>()).sum()
    }

    /// For each (phase, k): the number of positions of this root and type
    /// with that phase and exponent below k. Exponents are processed in
    /// increasing rounds over a counter array indexed by phase, where a
    /// range increment of C[0..=t] is stored at t and read as a suffix sum.
    pub fn exponent_counts(&self, plus: bool, root: usize, queries: &[(usize, usize)]) -> Vec<u64> {
        let p = self.roots[root].1;
        let empty = Vec::new();
        let sigs = self.sides[plus as usize].sigs.get(&root).unwrap_or(&empty);
        let mut events: Vec<usize> = sigs.iter().map(|e| e.0 .1).chain(queries.iter().map(|q| q.1)).collect();
        events.sort_unstable();
        events.dedup();
        let weight_from = |i: usize| sigs.iter().filter(|e| e.0 .1 >= i).map(|e| e.1).sum::<u64>();
        let mut diff = vec![0u64; p];
        let mut all = 0u64;
        let mut out = vec![0u64; queries.len()];
        let mut prev = 0;
        for &i in &events {
            // Exponents strictly between rounds come from runs with a larger exponent.
            all += (i - prev).saturating_sub(1) as u64 * weight_from(i);
            for (q, &(t, k)) in queries.iter().enumerate() {
                if k == i {
                    out[q] = all + diff[t..].iter().sum::<u64>();
                }
            }
            for &((t, k0, _), w) in sigs {
                if k0 == i {
                    diff[t] += w;
                }
            }
            all += weight_from(i + 1);
            prev = i;
        }
        out
    }

    fn z_range(&self, plus: bool, pred_less: impl Fn(&ZEntry) -> bool) -> usize {
        self.sides[plus as usize].z.partition_point(pred_less)
    }

    fn z_sum(&self, plus: bool, lo: usize, hi: usize, y_min: usize) -> u64 {
        if lo >= hi {
            return 0;
        }
        self.sides[plus as usize].tree.as_ref().unwrap().sum(lo, hi, y_min, usize::MAX) as u64
    }

    /// Positions of this root, type and phase whose periodic extension is
    /// shorter than `m`, as (exponent-round part, sequence part).
    fn shorter(&self, plus: bool, root: usize, phase: usize, m: usize) -> (u64, u64) {
        let p = self.roots[root].1;
        let k = (m - phase) / p;
        let h = (m - phase) % p;
        let c = self.exponent_counts(plus, root, &[(phase, k)])[0];
        let lo = self.z_range(plus, |e| e.root < root);
        let hi = self.z_range(plus, |e| (e.root, e.tail) < (root, h));
        (c, self.z_sum(plus, lo, hi, phase + k * p))
    }

    /// Local rank of X = T∞[j..j+2ℓ) for a run start j: the number of
    /// periodic positions whose length-2ℓ context is smaller than X while
    /// sharing its length-ℓ prefix. `count_y` and `count_x` are the
    /// frequencies of X[..ℓ] and X.
    pub fn local_rank(&self, cyc: &Cyclic, j: usize, count_y: u64, count_x: u64) -> Result<LocalRank, ConvertError> {
        let k = self.runs.partition_point(|r| r.start < j);
        let r = self.runs.get(k).filter(|r| r.start == j).ok_or(ConvertError::NotPeriodic(j))?;
        let ell = self.ell;
        let two = 2 * ell;
        let len = r.len();
        let p = r.period;
        let y_min = r.phase + r.exp * p;
        let block = |plus: bool| {
            let lo = self.z_range(plus, |e| (e.root, e.tail) < (r.root, r.tail));
            let hi = self.z_range(plus, |e| (e.root, e.tail) <= (r.root, r.tail));
            (lo, hi)
        };
        let diff = |plus: bool, m_hi: usize, m_lo: usize| {
            let a = self.shorter(plus, r.root, r.phase, m_hi);
            let b = self.shorter(plus, r.root, r.phase, m_lo);
            (a.0 as i64 - b.0 as i64, a.1 as i64 - b.1 as i64)
        };
        let rank = if len >= two {
            let (lt, eq) = diff(false, two, ell);
            LocalRank { lt, eq }
        } else if len >= ell {
            let m = two - len;
            let (lt, eq) = diff(r.plus, len, ell);
            let (lo, hi) = block(r.plus);
            let side = &self.sides[r.plus as usize].z;
            if !r.plus {
                let cut = lo + side[lo..hi].partition_point(|e| cyc.fwd_cmp(e.rend, r.rend, m) == Ordering::Less);
                LocalRank { lt, eq: eq + self.z_sum(false, lo, cut, y_min) as i64 }
            } else {
                let cut = lo + side[lo..hi].partition_point(|e| cyc.fwd_cmp(e.rend, r.rend, m) != Ordering::Greater);
                let above = eq + self.z_sum(true, cut, hi, y_min) as i64;
                LocalRank { lt: -lt, eq: count_y as i64 - count_x as i64 - above }
            }
        } else {
            let (lo, hi) = block(r.plus);
            let side = &self.sides[r.plus as usize].z;
            let a = lo + side[lo..hi].partition_point(|e| cyc.fwd_cmp(e.rend, r.rend, ell - len) == Ordering::Less);
            let b = lo + side[lo..hi].partition_point(|e| cyc.fwd_cmp(e.rend, r.rend, two - len) == Ordering::Less);
            LocalRank { lt: 0, eq: self.z_sum(r.plus, a, b.max(a), y_min) as i64 }
        };
        debug_assert!(self.tail_len >= two.saturating_sub(len).min(self.tail_len));
        Ok(rank)
    }
}

fn period_of(cyc: &Cyclic, j: usize, tau: usize) -> Option<usize> {
    let f = Fragment::new(j, j + 3 * tau - 1);
    cyc.gi.two_period(f).ok().flatten().filter(|&p| 3 * p <= tau)
}

/// |{j′ periodic : T∞[j′..j′+ℓ) = T∞[j..j+ℓ) and T∞[j′..j′+2ℓ) ≺ T∞[j..j+2ℓ)}| by enumeration.
pub fn local_rank_brute(text: &Text, tau: usize, ell: usize, j: usize) -> u64 {
    let t = text.as_bytes();
    let n = t.len();
    let inf = text.inf();
    let x = inf.substring(j as i64, 2 * ell);
    (0..=(n + 1).saturating_sub(3 * tau))
        .filter(|&q| 3 * shortest_period(&t[q..q + 3 * tau - 1]) <= tau)
        .filter(|&q| {
            let w = inf.substring(q as i64, 2 * ell);
            w[..ell] == x[..ell] && w < x
        })
        .count() as u64
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Correction {
    pub j: usize,
    pub start: u64,
    pub len: u64,
    pub rank: LocalRank,
    pub sym: BwtSym,
}

#[derive(Clone, Debug, Serialize)]
pub struct RoundStats {
    pub ell: usize,
    pub tau: usize,
    pub sync_size: usize,
    pub comp_size: usize,
    pub z: usize,
    pub attempts: u32,
    pub rl_w: usize,
    pub rl_w_pref: usize,
    pub cwt: Option<CwtStats>,
    pub numeric_runs: usize,
    pub periodic_runs: usize,
    pub f_prime: usize,
    pub r_prime: usize,
    pub signature_classes: usize,
    pub rl_out: usize,
    pub corrections: Vec<Correction>,
}

pub struct RoundOutput {
    pub next: BwtModulo,
    pub stats: RoundStats,
}

/// Replaces the ranges `(start, len, sym)`, sorted and disjoint, in a run sequence.
fn overwrite(runs: &[(BwtSym, u64)], edits: &[(u64, u64, BwtSym)]) -> Vec<(BwtSym, u64)> {
    let mut out = Vec::new();
    let mut e = 0;
    let mut pos = 0u64;
    for &(sym, len) in runs {
        let end = pos + len;
        let mut cur = pos;
        while cur < end {
            while e < edits.len() && edits[e].0 + edits[e].1 <= cur {
                e += 1;
            }
            if e < edits.len() && edits[e].0 <= cur {
                let stop = (edits[e].0 + edits[e].1).min(end);
                push(&mut out, edits[e].2, stop - cur);
                cur = stop;
            } else {
                let stop = edits.get(e).map_or(end, |ed| ed.0.min(end));
                push(&mut out, sym, stop - cur);
                cur = stop;
            }
        }
        pos = end;
    }
    out
}

/// Holds the decoded text and its compressed index across rounds.
pub struct Converter {
    text: Text,
    parse: Lz77Parse,
    index: CompressedIndex,
    pub sampling_constant: f64,
}

impl Converter {
    pub fn new(parse: &Lz77Parse) -> Result<Converter, ConvertError> {
        let text = lz77_decode(parse)?;
        Ok(Converter::with_parse(text, parse.clone()))
    }

    pub fn from_text(text: &Text) -> Converter {
        Converter::with_parse(text.clone(), lz77_parse(text))
    }

    fn with_parse(text: Text, parse: Lz77Parse) -> Converter {
        let index = CompressedIndex::build(recompress(&text));
        Converter { text, parse, index, sampling_constant: DEFAULT_SAMPLING_CONSTANT }
    }

    pub fn text(&self) -> &Text {
        &self.text
    }

    pub fn parse(&self) -> &Lz77Parse {
        &self.parse
    }

    pub fn index(&self) -> &CompressedIndex {
        &self.index
    }

    /// One doubling step: RL(BWT_ℓ) to RL(BWT_2ℓ).
    pub fn round(&self, prev: &BwtModulo, seed: u64) -> Result<RoundOutput, ConvertError> {
        let ell = prev.ell;
        if ell < ORACLE_BELOW {
            return Err(ConvertError::SmallEll(ell));
        }
        let t = self.text.as_bytes();
        let n = t.len();
        let tau = ell / 3;
        let two = 2 * ell;
        let index = &self.index;
        let cyc = Cyclic::new(t, index.grammar_index());
        let lv = build_compressed_sync_set(&self.text, &self.parse, tau, COMP_K, self.sampling_constant, seed)?;
        let (sync, comp) = (&lv.set, &lv.comp);

        // Distinct elements of W. A position e+τ after a phrase end e lies in
        // the range comp_6 keeps in full, so comp_6 already holds it when it is in S.
        let mut cands: Vec<usize> = comp.positions.clone();
        let cmp_w = |a: usize, b: usize| cyc.fwd_cmp(a, b, 7 * tau).then_with(|| cyc.back_cmp(a, b, tau));
        cands.sort_by(|&a, &b| cmp_w(a, b));
        cands.dedup_by(|a, b| cmp_w(*a, *b) == Ordering::Equal);
        let w_runs: Vec<(usize, u64)> = cands
            .iter()
            .map(|&p| {
                if p >= tau && p + 7 * tau <= n {
                    let f = Fragment::new(p - tau, p + 7 * tau);
                    (index.leftmost(f) + tau, index.count(f))
                } else {
                    (p, 1)
                }
            })
            .collect();
        let total: u64 = w_runs.iter().map(|r| r.1).sum();
        if total != sync.positions.len() as u64 {
            return Err(internal(format!("W covers {total} positions, S has {}", sync.positions.len())));
        }
        let mut w_starts = Vec::with_capacity(w_runs.len() + 1);
        let mut acc = 0;
        for r in &w_runs {
            w_starts.push(acc);
            acc += r.1;
        }
        w_starts.push(acc);
        let strings = PrefStrings { cyc: &cyc, starts: w_runs.iter().map(|r| r.0).collect(), width: tau };
        let ids: Vec<(usize, u64)> = w_runs.iter().enumerate().map(|(i, r)| (i, r.1)).collect();
        let cwt = Cwt::build(&strings, &ids).map_err(|e| internal(e.to_string()))?;
        let s_at = |x: u64| w_runs[w_starts.partition_point(|&s| s <= x) - 1].0;

        let mut stats = RoundStats {
            ell,
            tau,
            sync_size: sync.positions.len(),
            comp_size: comp.len(),
            z: self.parse.z(),
            attempts: lv.attempts,
            rl_w: w_runs.len(),
            rl_w_pref: cwt.stats().rl_w,
            cwt: Some(cwt.stats()),
            numeric_runs: prev.numeric_runs(),
            periodic_runs: 0,
            f_prime: 0,
            r_prime: 0,
            signature_classes: 0,
            rl_out: 0,
            corrections: Vec::new(),
        };

        let mut out: Vec<(BwtSym, u64)> = Vec::new();
        let mut periodic: HashMap<usize, (u64, u64)> = HashMap::new();
        let mut y = 0u64;
        for &(sym, len) in &prev.runs {
            match sym {
                BwtSym::Char(_) => push(&mut out, sym, len),
                BwtSym::Pos(c) => {
                    if c + ell >= n {
                        return Err(internal(format!("left-maximal context at {c} reaches the sentinel")));
                    }
                    let lo = comp.positions.partition_point(|&p| p < c);
                    match comp.positions.get(lo).filter(|&&p| p < c + tau) {
                        None => {
                            let p = period_of(&cyc, c, tau).ok_or_else(|| internal(format!("context at {c} has no small period")))?;
                            push(&mut out, BwtSym::Char(t[c + p - 1]), len);
                            periodic.insert(c, (y, len));
                            stats.periodic_runs += 1;
                        }
                        Some(&succ) => {
                            let h = succ - c;
                            let rest = ell - h;
                            let lo = w_runs.partition_point(|r| cyc.fwd_cmp(r.0, succ, rest) == Ordering::Less);
                            let hi = w_runs.partition_point(|r| cyc.fwd_cmp(r.0, succ, rest) != Ordering::Greater);
                            let (x, x_end) = (w_starts[lo], w_starts[hi]);
                            let locus = cwt
                                .locate(&strings, h, |d| cyc.at(succ as i64 - 1 - d as i64))
                                .ok_or_else(|| internal(format!("context head at {c} missing from the wavelet tree")))?;
                            let node = cwt.node(locus.node);
                            if locus.depth < node.depth {
                                push(&mut out, BwtSym::Char(strings.symbol(node.rep, locus.depth)), len);
                            } else {
                                let v = locus.node;
                                let b = cwt.rank_below(v, x);
                                let b_end = cwt.rank_below(v, x_end);
                                if b_end - b != len {
                                    return Err(internal(format!("range at {c}: wavelet tree gives {} entries, run has {len}", b_end - b)));
                                }
                                let pieces = node.runs_in(b, b_end);
                                let need = two - h;
                                let pi = |q: u64| cwt.primary_index(v, q).map(s_at).expect("rank in range");
                                let mut edits: Vec<(u64, u64, BwtSym)> = Vec::new();
                                let mut covered = b;
                                let mut pos = b;
                                for &(_, plen) in &pieces[..pieces.len() - 1] {
                                    pos += plen;
                                    let q = pos - 1;
                                    if q < covered {
                                        continue;
                                    }
                                    let s1 = pi(q);
                                    if cyc.fwd_lcp(s1, pi(q + 1), need) < need {
                                        continue;
                                    }
                                    let same = |qq: u64| cyc.fwd_lcp(pi(qq), s1, need) >= need;
                                    let (mut a, mut z) = (covered, q);
                                    while a < z {
                                        let mid = (a + z) / 2;
                                        if same(mid) {
                                            z = mid;
                                        } else {
                                            a = mid + 1;
                                        }
                                    }
                                    let first = a;
                                    let (mut a, mut z) = (q + 1, b_end);
                                    while a < z {
                                        let mid = (a + z) / 2;
                                        if same(mid) {
                                            a = mid + 1;
                                        } else {
                                            z = mid;
                                        }
                                    }
                                    let end = a;
                                    if s1 < h || s1 - h + two > n {
                                        return Err(internal("left-maximal extension leaves the text"));
                                    }
                                    let left = index.leftmost(Fragment::new(s1 - h, s1 - h + two));
                                    edits.push((first - b, end - first, BwtSym::Pos(left)));
                                    covered = end;
                                }
                                let local: Vec<(BwtSym, u64)> = pieces.iter().map(|&(c, l)| (BwtSym::Char(c), l)).collect();
                                for (s, l) in overwrite(&local, &edits) {
                                    push(&mut out, s, l);
                                }
                            }
                        }
                    }
                }
            }
            y += len;
        }

        if !periodic.is_empty() {
            let tables = PeriodicTables::build(&cyc, sync, ell)?;
            stats.r_prime = tables.runs.len();
            stats.signature_classes = tables.signature_classes();
            let mut cand: Vec<usize> = vec![0];
            for (k, &s) in comp.positions.iter().enumerate() {
                if comp.positions.get(k + 1).is_none_or(|&nx| nx - s > tau) {
                    cand.push(s + 1);
                }
            }
            cand.sort_unstable();
            cand.dedup();
            cand.retain(|&j| j + 3 * tau <= n + 1 && period_of(&cyc, j, tau).is_some());
            cand.sort_by(|&a, &b| cyc.fwd_cmp(a, b, two).then(a.cmp(&b)));
            let mut groups: Vec<(usize, BTreeSet<u8>)> = Vec::new();
            for &j in &cand {
                let c = cyc.at(j as i64 - 1);
                match groups.last_mut() {
                    Some((rep, set)) if cyc.fwd_cmp(*rep, j, two) == Ordering::Equal => {
                        set.insert(c);
                    }
                    _ => groups.push((j, BTreeSet::from([c]))),
                }
            }
            stats.f_prime = groups.len();
            if groups.len() > comp.len().max(1) {
                return Err(internal(format!("{} corrected contexts exceed |comp| = {}", groups.len(), comp.len())));
            }
            let mut edits: Vec<(u64, u64, BwtSym)> = Vec::new();
            for (j, chars) in groups {
                if j + ell >= n {
                    continue;
                }
                let Some(&(y0, count_y)) = periodic.get(&index.leftmost(Fragment::new(j, j + ell))) else {
                    continue;
                };
                let inside = j + two <= n;
                let count_x = if inside { index.count(Fragment::new(j, j + two)) } else { 1 };
                let only = (chars.len() == 1).then(|| *chars.first().unwrap());
                let uniform = only.filter(|_| {
                    let with_c = if j >= 1 && inside { index.count(Fragment::new(j - 1, j + two)) } else { 1 };
                    with_c == count_x
                });
                let sym = match uniform {
                    Some(c) => BwtSym::Char(c),
                    None if inside => BwtSym::Pos(index.leftmost(Fragment::new(j, j + two))),
                    None => return Err(internal("non-uniform context through the sentinel")),
                };
                let rank = tables.local_rank(&cyc, j, count_y, count_x)?;
                let start = y0 as i64 + rank.total();
                if rank.total() < 0 || rank.total() as u64 + count_x > count_y {
                    return Err(internal(format!("local rank {} out of range at {j}", rank.total())));
                }
                edits.push((start as u64, count_x, sym));
                stats.corrections.push(Correction { j, start: start as u64, len: count_x, rank, sym });
            }
            edits.sort_unstable_by_key(|e| e.0);
            out = overwrite(&out, &edits);
        }
        stats.rl_out = out.len();
        Ok(RoundOutput { next: BwtModulo { ell: two, runs: out }, stats })
    }

    /// Runs all rounds, reporting every intermediate BWT modulo ℓ.
    pub fn run(
        &self,
        seed: u64,
        mut observe: impl FnMut(&BwtModulo, Option<&RoundStats>),
    ) -> Result<BwtRuns, ConvertError> {
        let n = self.text.len();
        let mut cur = bwt_modulo_oracle(&self.text, ORACLE_BELOW);
        observe(&cur, None);
        let mut round = 0u64;
        while cur.ell < n {
            let step = self.round(&cur, seed.wrapping_add(round))?;
            observe(&step.next, Some(&step.stats));
            log::debug!("round ell={} -> {} runs", cur.ell, step.next.rl_len());
            cur = step.next;
            round += 1;
        }
        cur.to_bwt_runs().ok_or_else(|| internal("positions remain after the last round"))
    }
}

/// RL(BWT) of the text described by an LZ77 parse.
pub fn convert(parse: &Lz77Parse, seed: u64) -> Result<BwtRuns, ConvertError> {
    Converter::new(parse)?.run(seed, |_, _| {})
}
