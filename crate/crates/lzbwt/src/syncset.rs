//! τ-synchronizing sets: construction with periodic-region handling, brute-force
//! verification, the phrase-end compressed form and window reconstruction.
//!
//! Positions are 0-based, so S ⊆ [0..n−2τ].

use crate::compressed_index::CompressedIndex;
use crate::grammar_queries::Fragment;
use crate::text::{shortest_period, Lz77Parse, Text};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use std::collections::{HashMap, VecDeque};
use thiserror::Error;

/// Attempts before a Las Vegas construction gives up.
pub const MAX_ATTEMPTS: u32 = 32;

pub const UNSAMPLED: u32 = u32::MAX;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SyncError {
    #[error("tau must satisfy 1 <= tau <= n/2 (tau = {tau}, n = {n})")]
    BadTau { tau: usize, n: usize },
    #[error("some window has no sampled identifier; redraw the sample")]
    RestartRequested,
    #[error("no acceptable sample after {0} attempts")]
    Exhausted(u32),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SyncSet {
    pub tau: usize,
    pub positions: Vec<usize>,
}

impl SyncSet {
    pub fn contains(&self, p: usize) -> bool {
        self.positions.binary_search(&p).is_ok()
    }

    /// S ∩ [lo..hi).
    pub fn range(&self, lo: usize, hi: usize) -> &[usize] {
        let a = self.positions.partition_point(|&p| p < lo);
        let b = self.positions.partition_point(|&p| p < hi);
        &self.positions[a..b]
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CompSyncSet {
    pub tau: usize,
    pub k: usize,
    pub positions: Vec<usize>,
    pub phrase_ends: Vec<usize>,
}

/// Q (τ/3-periodic windows) and B (their boundary) as membership vectors over [0..n−τ].
#[derive(Clone, Debug)]
pub struct PeriodicSets {
    pub q: Vec<bool>,
    pub b: Vec<bool>,
}

fn small_period(s: &[u8], tau: usize) -> bool {
    3 * shortest_period(s) <= tau
}

impl PeriodicSets {
    pub fn new(t: &[u8], tau: usize) -> PeriodicSets {
        let m = t.len() - tau + 1;
        let q: Vec<bool> = (0..m).map(|i| small_period(&t[i..i + tau], tau)).collect();
        let b = (0..m)
            .map(|i| {
                !q[i] && (small_period(&t[i..i + tau - 1], tau) || small_period(&t[i + 1..i + tau], tau))
            })
            .collect();
        PeriodicSets { q, b }
    }

    pub fn b_positions(&self) -> Vec<usize> {
        (0..self.b.len()).filter(|&i| self.b[i]).collect()
    }
}

/// Class of each length-`m` substring T[i..i+m), i ∈ [0..n−m]; equal strings share a class.
/// Classes are numbered by leftmost occurrence.
fn substring_classes(t: &[u8], m: usize) -> Vec<u32> {
    let mut seen: HashMap<&[u8], u32> = HashMap::new();
    (0..=t.len() - m)
        .map(|i| {
            let next = seen.len() as u32;
            *seen.entry(&t[i..i + m]).or_insert(next)
        })
        .collect()
}

fn check_tau(n: usize, tau: usize) -> Result<(), SyncError> {
    if tau == 0 || 2 * tau > n {
        return Err(SyncError::BadTau { tau, n });
    }
    Ok(())
}

/// S from per-position identifiers: i ∈ S iff the minimum id over
/// [i..i+τ] \ Q is attained at i or i+τ.
fn select(ids: &[u32], q: &[bool], n: usize, tau: usize) -> Vec<usize> {
    let key = |j: usize| if q[j] { None } else { Some(ids[j]) };
    let mut out = Vec::new();
    // Sliding minimum over windows of τ+1 positions.
    let mut dq: VecDeque<usize> = VecDeque::new();
    let push = |dq: &mut VecDeque<usize>, j: usize| {
        if let Some(v) = key(j) {
            while dq.back().is_some_and(|&b| ids[b] >= v) {
                dq.pop_back();
            }
            dq.push_back(j);
        }
    };
    for j in 0..tau {
        push(&mut dq, j);
    }
    for i in 0..=n - 2 * tau {
        push(&mut dq, i + tau);
        while dq.front().is_some_and(|&f| f < i) {
            dq.pop_front();
        }
        if let Some(&f) = dq.front() {
            let m = ids[f];
            if m != UNSAMPLED && (key(i) == Some(m) || key(i + tau) == Some(m)) {
                out.push(i);
            }
        }
    }
    out
}

fn priority_ids(classes: &[u32], ps: &PeriodicSets, rng: &mut ChaCha8Rng, keep: impl Fn(u32) -> bool) -> Vec<u32> {
    let nclasses = classes.iter().map(|&c| c as usize + 1).max().unwrap_or(0);
    let mut in_b = vec![false; nclasses];
    for (i, &c) in classes.iter().enumerate() {
        if ps.b[i] {
            in_b[c as usize] = true;
        }
    }
    let mut first: Vec<u32> = (0..nclasses as u32).filter(|&c| in_b[c as usize]).collect();
    let mut rest: Vec<u32> = (0..nclasses as u32).filter(|&c| !in_b[c as usize] && keep(c)).collect();
    first.shuffle(rng);
    rest.shuffle(rng);
    let mut pi = vec![UNSAMPLED; nclasses];
    for (id, &c) in first.iter().chain(rest.iter()).enumerate() {
        pi[c as usize] = id as u32;
    }
    classes.iter().map(|&c| pi[c as usize]).collect()
}

/// Synchronizing set from a seeded random bijection that ranks strings of
/// boundary positions before all others.
pub fn build_sync_set(text: &Text, tau: usize, seed: u64) -> Result<SyncSet, SyncError> {
    let t = text.as_bytes();
    let n = t.len();
    check_tau(n, tau)?;
    let ps = PeriodicSets::new(t, tau);
    let classes = substring_classes(t, tau);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let ids = priority_ids(&classes, &ps, &mut rng, |_| true);
    Ok(SyncSet { tau, positions: select(&ids, &ps.q, n, tau) })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub enum Violation {
    OutOfRange { pos: usize },
    /// Equal 2τ-contexts, different membership.
    Consistency { i: usize, j: usize },
    /// The window [i..i+τ) is empty iff it should not be.
    Density { i: usize, empty: bool, periodic: bool },
}

/// Brute-force check of both conditions.
pub fn verify_sync_set(text: &Text, s: &SyncSet) -> Result<(), Violation> {
    let t = text.as_bytes();
    let n = t.len();
    let tau = s.tau;
    if let Some(&pos) = s.positions.iter().find(|&&p| p + 2 * tau > n) {
        return Err(Violation::OutOfRange { pos });
    }
    let mut member = vec![false; n];
    for &p in &s.positions {
        member[p] = true;
    }
    let mut rep: HashMap<&[u8], usize> = HashMap::new();
    for i in 0..=n - 2 * tau {
        let j = *rep.entry(&t[i..i + 2 * tau]).or_insert(i);
        if member[i] != member[j] {
            return Err(Violation::Consistency { i: j, j: i });
        }
    }
    if 3 * tau <= n + 1 {
        for i in 0..=n + 1 - 3 * tau {
            let empty = (i..i + tau).all(|p| !member[p]);
            let periodic = small_period(&t[i..i + 3 * tau - 1], tau);
            if empty != periodic {
                return Err(Violation::Density { i, empty, periodic });
            }
        }
    }
    Ok(())
}

/// S restricted to the windows (e − 3kτ + 2 .. e + kτ) around phrase ends e.
pub fn compress(s: &SyncSet, parse: &Lz77Parse, k: usize) -> CompSyncSet {
    let tau = s.tau;
    let mut positions: Vec<usize> = Vec::new();
    for &e in &parse.ends {
        let lo = (e + 3).saturating_sub(3 * k * tau);
        let hi = e + k * tau;
        positions.extend_from_slice(s.range(lo, hi));
    }
    positions.sort_unstable();
    positions.dedup();
    CompSyncSet { tau, k, positions, phrase_ends: parse.ends.clone() }
}

impl CompSyncSet {
    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    /// S ∩ [i..i+τ), recovered through the leftmost occurrence of the
    /// surrounding 3τ−1 characters (clipped at the text end).
    pub fn window(&self, index: &CompressedIndex, i: usize) -> Vec<usize> {
        let n = index.n();
        let tau = self.tau;
        if i + 2 * tau > n {
            return Vec::new();
        }
        let end = (i + 3 * tau - 1).min(n);
        let left = index.leftmost(Fragment::new(i, end));
        let a = self.positions.partition_point(|&p| p < left);
        let b = self.positions.partition_point(|&p| p < left + tau);
        self.positions[a..b].iter().map(|&p| p - left + i).filter(|&p| p + 2 * tau <= n).collect()
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SampledIds {
    /// Identifier per position in [0..n−τ]; `UNSAMPLED` stands for ∞.
    pub ids: Vec<u32>,
    pub kappa: f64,
    /// |P′_sample|: positions of P_close drawn by the coin flips.
    pub drawn: usize,
    /// Distinct strings that received a finite identifier outside the boundary set.
    pub sampled: usize,
}

/// Sampling rate κ = max(1, τ / (3c′ ln 2 · log₂ n)).
pub fn kappa(tau: usize, n: usize, c_prime: f64) -> f64 {
    let denom = 3.0 * c_prime * std::f64::consts::LN_2 * (n.max(2) as f64).log2();
    (tau as f64 / denom).max(1.0)
}

/// Identifiers from element-wise sampling of P_close, restricted to leftmost
/// occurrences. Boundary strings always receive the smallest identifiers.
pub fn sampled_ids(text: &Text, parse: &Lz77Parse, tau: usize, c_prime: f64, seed: u64) -> Result<SampledIds, SyncError> {
    let t = text.as_bytes();
    let n = t.len();
    check_tau(n, tau)?;
    let ps = PeriodicSets::new(t, tau);
    let classes = substring_classes(t, tau);
    let k = kappa(tau, n, c_prime);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut close = vec![false; n - tau + 1];
    for &e in &parse.ends {
        for p in (e + 1).saturating_sub(tau)..=e.min(n - tau) {
            close[p] = !ps.q[p];
        }
    }
    // Leftmost occurrences: classes are numbered in order of first appearance.
    let mut is_left = vec![false; n - tau + 1];
    let mut seen = 0u32;
    for (p, &c) in classes.iter().enumerate() {
        if c == seen {
            is_left[p] = true;
            seen += 1;
        }
    }
    let mut chosen = vec![false; seen as usize];
    let mut drawn = 0;
    for p in 0..close.len() {
        if close[p] && rng.gen_bool(1.0 / k) {
            drawn += 1;
            if is_left[p] {
                chosen[classes[p] as usize] = true;
            }
        }
    }
    let ids = priority_ids(&classes, &ps, &mut rng, |c| chosen[c as usize]);
    let sampled = (0..seen as usize).filter(|&c| chosen[c]).count();
    for i in 0..=n - 2 * tau {
        let window = i..=i + tau;
        let mut live = window.clone().filter(|&j| !ps.q[j]).peekable();
        if live.peek().is_some() && live.all(|j| ids[j] == UNSAMPLED) {
            return Err(SyncError::RestartRequested);
        }
    }
    Ok(SampledIds { ids, kappa: k, drawn, sampled })
}

#[derive(Clone, Debug, Serialize)]
pub struct LasVegasRun {
    pub set: SyncSet,
    pub comp: CompSyncSet,
    pub attempts: u32,
    pub restarts: u32,
    pub sample: SampledIds,
}

/// Draws samples until every window has a finite identifier and
/// |comp_k(S)| ≤ 72kz.
pub fn build_compressed_sync_set(
    text: &Text,
    parse: &Lz77Parse,
    tau: usize,
    k: usize,
    c_prime: f64,
    seed: u64,
) -> Result<LasVegasRun, SyncError> {
    let n = text.len();
    check_tau(n, tau)?;
    let ps = PeriodicSets::new(text.as_bytes(), tau);
    let mut restarts = 0;
    for attempt in 0..MAX_ATTEMPTS {
        let s = seed.wrapping_add(attempt as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15);
        let sample = match sampled_ids(text, parse, tau, c_prime, s) {
            Ok(x) => x,
            Err(SyncError::RestartRequested) => {
                restarts += 1;
                log::debug!("sample without full window coverage, attempt {attempt}");
                continue;
            }
            Err(e) => return Err(e),
        };
        let set = SyncSet { tau, positions: select(&sample.ids, &ps.q, n, tau) };
        let comp = compress(&set, parse, k);
        if comp.len() <= 72 * k * parse.z() {
            return Ok(LasVegasRun { set, comp, attempts: attempt + 1, restarts, sample });
        }
        log::debug!("comp size {} above 72kz, attempt {attempt}", comp.len());
    }
    Err(SyncError::Exhausted(MAX_ATTEMPTS))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::thue_morse;
    use crate::rlslp::recompress;
    use crate::text::lz77_parse;
    use proptest::prelude::*;

    fn text(body: &[u8]) -> Text {
        Text::from_body(body).unwrap()
    }

    #[test]
    fn thue_morse_is_dense() {
        let t = text(&thue_morse(512));
        let s = build_sync_set(&t, 8, 1).unwrap();
        verify_sync_set(&t, &s).unwrap();
        assert!(s.positions.len() * 8 >= t.len() / 4, "{}", s.positions.len());
    }

    #[test]
    fn unary_run_is_empty_inside() {
        let t = text(&[b'a'; 64]);
        let s = build_sync_set(&t, 4, 0).unwrap();
        verify_sync_set(&t, &s).unwrap();
        assert!(s.range(0, 48).is_empty(), "{:?}", s.positions);
    }

    #[test]
    fn mutations_are_caught() {
        let t = text(b"abaababaabaababaababaabaababaabaababaababaabab");
        let tau = 4;
        let s = build_sync_set(&t, tau, 5).unwrap();
        verify_sync_set(&t, &s).unwrap();
        let run = text(&[b"ab".as_slice(), &[b'a'; 30], b"ba"].concat());
        let everything = SyncSet { tau, positions: (0..=run.len() - 2 * tau).collect() };
        assert!(matches!(verify_sync_set(&run, &everything), Err(Violation::Density { empty: false, periodic: true, .. })));
        // Removing the only element of some non-periodic window breaks a condition.
        let n = t.len();
        let lonely = s.positions.iter().copied().find(|&p| {
            (p.saturating_sub(tau - 1)..=p).any(|i| i + 3 * tau <= n + 1 && s.range(i, i + tau) == [p])
        });
        let p = lonely.expect("some window has one element");
        let cut = SyncSet { tau, positions: s.positions.iter().copied().filter(|&q| q != p).collect() };
        assert!(verify_sync_set(&t, &cut).is_err());
    }

    #[test]
    fn deterministic_under_seed() {
        let t = text(&thue_morse(200));
        assert_eq!(build_sync_set(&t, 5, 9).unwrap(), build_sync_set(&t, 5, 9).unwrap());
        assert!(build_sync_set(&t, 0, 9).is_err());
        assert!(build_sync_set(&t, 101, 9).is_err());
    }

    #[test]
    fn single_phrase_window_covers_everything() {
        let t = text(b"a");
        let parse = lz77_parse(&t);
        let s = build_sync_set(&t, 1, 0).unwrap();
        let comp = compress(&s, &parse, 1);
        assert_eq!(comp.positions, s.positions);
    }

    #[test]
    fn rate_clamps_to_one() {
        assert_eq!(kappa(4, 1024, 2.0), 1.0);
        assert!(kappa(4096, 1 << 20, 1.0) > 1.0);
    }

    #[test]
    fn las_vegas_run_is_valid() {
        let t = text(&crate::corpus::random_body(&mut ChaCha8Rng::seed_from_u64(4), 300, 3));
        let parse = lz77_parse(&t);
        let run = build_compressed_sync_set(&t, &parse, 16, 6, 2.0, 11).unwrap();
        verify_sync_set(&t, &run.set).unwrap();
        assert!(run.comp.len() <= 72 * 6 * parse.z());
    }

    fn body_strategy() -> impl Strategy<Value = Vec<u8>> {
        prop_oneof![
            proptest::collection::vec(b'a'..b'c', 8..200),
            proptest::collection::vec(b'a'..b'e', 8..200),
            (proptest::collection::vec(b'a'..b'c', 1..4), 4usize..60, proptest::collection::vec(b'a'..b'c', 0..30))
                .prop_map(|(u, k, tail)| [u.repeat(k), tail].concat()),
        ]
    }

    proptest! {
        #[test]
        fn built_sets_verify(body in body_strategy(), tau in 1usize..12, seed in any::<u64>()) {
            let t = text(&body);
            let tau = tau.min(t.len() / 2);
            let s = build_sync_set(&t, tau, seed).unwrap();
            prop_assert_eq!(verify_sync_set(&t, &s), Ok(()));
            let ps = PeriodicSets::new(t.as_bytes(), tau);
            let w = tau.div_ceil(3);
            for i in 0..ps.b.len() {
                prop_assert!(ps.b[i..(i + w).min(ps.b.len())].iter().filter(|&&b| b).count() <= 2);
            }
        }

        #[test]
        fn sampled_sets_verify(body in body_strategy(), tau in 1usize..12, seed in any::<u64>(), c in 1.0f64..3.0) {
            let t = text(&body);
            let tau = tau.min(t.len() / 2);
            let parse = lz77_parse(&t);
            match build_compressed_sync_set(&t, &parse, tau, 1, c, seed) {
                Ok(run) => prop_assert_eq!(verify_sync_set(&t, &run.set), Ok(())),
                Err(e) => prop_assert_eq!(e, SyncError::Exhausted(MAX_ATTEMPTS)),
            }
        }

        #[test]
        fn windows_rebuild_the_set(body in body_strategy(), tau in 1usize..10, seed in any::<u64>()) {
            let t = text(&body);
            let tau = tau.min(t.len() / 2);
            let parse = lz77_parse(&t);
            let s = build_sync_set(&t, tau, seed).unwrap();
            let comp = compress(&s, &parse, 1);
            prop_assert!(comp.positions.iter().all(|&p| s.contains(p)));
            let index = CompressedIndex::build(recompress(&t));
            for i in 0..t.len() {
                prop_assert_eq!(comp.window(&index, i), s.range(i, i + tau).iter().copied().filter(|&p| p + 2 * tau <= t.len()).collect::<Vec<_>>(), "window {}", i);
            }
        }
    }
}
