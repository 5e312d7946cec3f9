//! Compressed wavelet trees over run-length sequences of equal-length strings.
//!
//! The tree shape is the compacted trie of the distinct strings. Every kept
//! internal node stores its string B_X run-length encoded. Primary indices are
//! routed upward with per-character select lists on light edges and with a
//! weighted range-counting structure along each heavy path.

use crate::range::{MergeSortTree, Point};
use rand::Rng;
use std::cmp::{Ordering, Reverse};
use std::collections::BinaryHeap;
use thiserror::Error;

/// A symbol, (count of the symbol before the run, run start) per run, and a running total.
type CharRuns = (u8, Vec<(u64, u64)>, u64);

#[derive(Debug, Error, PartialEq, Eq)]
pub enum CwtError {
    #[error("string {index} has length {found}, expected {expected}")]
    UnequalLengths { index: usize, expected: usize, found: usize },
    #[error("unknown string id {0}")]
    UnknownString(usize),
    #[error("rank {q} out of range for a node with {size} elements")]
    RankOutOfRange { q: u64, size: u64 },
}

/// A family of equal-length strings addressed by id.
pub trait StringSet {
    fn count(&self) -> usize;
    fn width(&self) -> usize;
    fn symbol(&self, id: usize, d: usize) -> u8;

    fn lcp(&self, a: usize, b: usize) -> usize {
        (0..self.width()).take_while(|&d| self.symbol(a, d) == self.symbol(b, d)).count()
    }

    fn compare(&self, a: usize, b: usize) -> Ordering {
        let l = self.lcp(a, b);
        if l >= self.width() {
            Ordering::Equal
        } else {
            self.symbol(a, l).cmp(&self.symbol(b, l))
        }
    }
}

/// Strings held in memory.
#[derive(Clone, Debug)]
pub struct Materialized {
    strings: Vec<Vec<u8>>,
    width: usize,
}

impl Materialized {
    pub fn new(strings: Vec<Vec<u8>>) -> Result<Materialized, CwtError> {
        let width = strings.first().map_or(0, Vec::len);
        if let Some((index, s)) = strings.iter().enumerate().find(|(_, s)| s.len() != width) {
            return Err(CwtError::UnequalLengths { index, expected: width, found: s.len() });
        }
        Ok(Materialized { strings, width })
    }

    pub fn get(&self, id: usize) -> &[u8] {
        &self.strings[id]
    }
}

impl StringSet for Materialized {
    fn count(&self) -> usize {
        self.strings.len()
    }

    fn width(&self) -> usize {
        self.width
    }

    fn symbol(&self, id: usize, d: usize) -> u8 {
        self.strings[id][d]
    }
}

#[derive(Clone, Debug)]
struct PathIndex {
    /// Run starts of RL((ℓ_i)) in B of the path top.
    starts: Vec<u64>,
    values: Vec<usize>,
    tree: MergeSortTree,
}

#[derive(Clone, Debug)]
pub struct CwtNode {
    pub depth: usize,
    pub parent: Option<usize>,
    /// Children keyed by the first symbol of their edge label.
    pub children: Vec<(u8, usize)>,
    /// Id of a string whose prefix spells the node label.
    pub rep: usize,
    /// Distinct-string class for leaves.
    pub leaf: Option<usize>,
    /// |B_X|, i.e. the number of W elements below the node.
    pub size: u64,
    pub leaves: usize,
    /// RL(B_X); empty for leaves.
    pub runs: Vec<(u8, u64)>,
    pub heavy: Option<usize>,
    pub top: usize,
    run_starts: Vec<u64>,
    select: Vec<(u8, Vec<(u64, u64)>)>,
    path: Option<PathIndex>,
    path_rl: usize,
}

impl CwtNode {
    pub fn is_leaf(&self) -> bool {
        self.leaf.is_some()
    }

    /// B_X[q].
    pub fn symbol_at(&self, q: u64) -> u8 {
        let k = self.run_starts.partition_point(|&s| s <= q) - 1;
        self.runs[k].0
    }

    /// Runs of B_X[lo..hi).
    pub fn runs_in(&self, lo: u64, hi: u64) -> Vec<(u8, u64)> {
        let mut out = Vec::new();
        if lo >= hi {
            return out;
        }
        let mut k = self.run_starts.partition_point(|&s| s <= lo) - 1;
        while k < self.runs.len() && self.run_starts[k] < hi {
            let a = self.run_starts[k].max(lo);
            let b = (self.run_starts[k] + self.runs[k].1).min(hi);
            out.push((self.runs[k].0, b - a));
            k += 1;
        }
        out
    }

    /// Position in B_X of the `q`-th (0-based) occurrence of `c`.
    fn select(&self, c: u8, q: u64) -> u64 {
        let list = &self.select[self.select.binary_search_by_key(&c, |e| e.0).expect("child symbol occurs")].1;
        let k = list.partition_point(|&(cum, _)| cum <= q) - 1;
        list[k].1 + (q - list[k].0)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, serde::Serialize)]
pub struct CwtStats {
    /// Σ |RL(B_X)| over kept internal nodes.
    pub total_rl: usize,
    pub nodes: usize,
    pub leaves: usize,
    pub heavy_paths: usize,
    /// |RL(W)| after merging adjacent equal strings.
    pub rl_w: usize,
    pub distinct: usize,
    /// |RL((ℓ_i))| ≤ Σ_{X on path} |RL(B_X)| held for every heavy path.
    pub path_bound_holds: bool,
}

#[derive(Clone, Debug)]
pub struct Cwt {
    nodes: Vec<CwtNode>,
    width: usize,
    rl_w: usize,
    distinct: usize,
}

/// Where a label ends: exactly at `node`, or inside the edge leading to it.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Locus {
    pub node: usize,
    pub depth: usize,
}

struct RlCursor<'a> {
    seq: &'a [(usize, u64)],
    k: usize,
    off: u64,
}

impl RlCursor<'_> {
    fn take(&mut self, mut want: u64, out: &mut Vec<(usize, u64)>) {
        while want > 0 {
            let (v, len) = self.seq[self.k];
            let step = (len - self.off).min(want);
            push_run(out, v, step);
            want -= step;
            self.off += step;
            if self.off == len {
                self.k += 1;
                self.off = 0;
            }
        }
    }
}

fn push_run<T: PartialEq + Copy>(out: &mut Vec<(T, u64)>, v: T, len: u64) {
    match out.last_mut() {
        Some(last) if last.0 == v => last.1 += len,
        _ => out.push((v, len)),
    }
}

impl Cwt {
    /// Builds the tree of the sequence whose runs are `(string id, length)`.
    pub fn build<S: StringSet + ?Sized>(strings: &S, w: &[(usize, u64)]) -> Result<Cwt, CwtError> {
        let width = strings.width();
        if let Some(&(id, _)) = w.iter().find(|&&(id, _)| id >= strings.count()) {
            return Err(CwtError::UnknownString(id));
        }
        let mut ids: Vec<usize> = w.iter().filter(|r| r.1 > 0).map(|r| r.0).collect();
        ids.sort_unstable();
        ids.dedup();
        ids.sort_by(|&a, &b| strings.compare(a, b));
        // Distinct classes in sorted order, with LCPs of neighbours.
        let mut reps: Vec<usize> = Vec::new();
        let mut lcps: Vec<usize> = Vec::new();
        let mut class_of: std::collections::HashMap<usize, usize> = std::collections::HashMap::new();
        for &id in &ids {
            match reps.last() {
                Some(&last) if strings.lcp(last, id) >= width => {}
                Some(&last) => {
                    lcps.push(strings.lcp(last, id));
                    reps.push(id);
                }
                None => {
                    lcps.push(0);
                    reps.push(id);
                }
            }
            class_of.insert(id, reps.len() - 1);
        }
        let mut runs: Vec<(usize, u64)> = Vec::new();
        for &(id, len) in w.iter().filter(|r| r.1 > 0) {
            push_run(&mut runs, class_of[&id], len);
        }

        let mut nodes: Vec<CwtNode> = vec![Self::blank(0, None, reps.first().copied().unwrap_or(0))];
        if width == 0 {
            nodes[0].leaf = Some(0);
        } else {
            let mut stack = vec![0usize];
            for (c, &rep) in reps.iter().enumerate() {
                let h = lcps[c];
                let mut popped = None;
                while nodes[*stack.last().unwrap()].depth > h {
                    popped = stack.pop();
                }
                let top = *stack.last().unwrap();
                if nodes[top].depth < h {
                    let below = popped.expect("a deeper node was popped");
                    let mid = nodes.len();
                    let mut node = Self::blank(h, Some(top), rep);
                    node.children.push((0, below));
                    nodes.push(node);
                    nodes[below].parent = Some(mid);
                    let slot = nodes[top].children.iter().position(|e| e.1 == below).unwrap();
                    nodes[top].children[slot].1 = mid;
                    stack.push(mid);
                }
                let top = *stack.last().unwrap();
                let leaf = nodes.len();
                let mut node = Self::blank(width, Some(top), rep);
                node.leaf = Some(c);
                nodes.push(node);
                nodes[top].children.push((0, leaf));
                stack.push(leaf);
            }
        }
        // Edge symbols.
        for v in 0..nodes.len() {
            let d = nodes[v].depth;
            for e in 0..nodes[v].children.len() {
                let ch = nodes[v].children[e].1;
                nodes[v].children[e].0 = strings.symbol(nodes[ch].rep, d);
            }
        }

        let mut order = Vec::with_capacity(nodes.len());
        let mut dfs = vec![(0usize, false)];
        while let Some((v, done)) = dfs.pop() {
            if done {
                order.push(v);
            } else {
                dfs.push((v, true));
                dfs.extend(nodes[v].children.iter().rev().map(|&(_, c)| (c, false)));
            }
        }

        let mut jsets: Vec<Vec<usize>> = vec![Vec::new(); nodes.len()];
        let mut lseqs: Vec<Vec<(usize, u64)>> = vec![Vec::new(); nodes.len()];
        let mut leaf_of_class = vec![0usize; reps.len()];
        for (v, node) in nodes.iter().enumerate() {
            if let Some(c) = node.leaf {
                leaf_of_class[c] = v;
            }
        }
        for (i, &(c, _)) in runs.iter().enumerate() {
            jsets[leaf_of_class[c]].push(i);
        }
        for &v in &order {
            if nodes[v].is_leaf() {
                nodes[v].leaves = 1;
                nodes[v].size = jsets[v].iter().map(|&i| runs[i].1).sum();
                continue;
            }
            let children = nodes[v].children.clone();
            let heavy = children
                .iter()
                .map(|&(_, c)| c)
                .fold(None, |best: Option<usize>, c| match best {
                    Some(b) if nodes[b].leaves >= nodes[c].leaves => Some(b),
                    _ => Some(c),
                })
                .unwrap();
            let heavy_internal = !nodes[heavy].is_leaf();
            let heavy_seq = std::mem::take(&mut lseqs[heavy]);
            let mut cursor = RlCursor { seq: &heavy_seq, k: 0, off: 0 };
            let mut heap = BinaryHeap::new();
            let mut ptr = vec![0usize; children.len()];
            for (h, &(_, c)) in children.iter().enumerate() {
                if let Some(&j) = jsets[c].first() {
                    heap.push(Reverse((j, h)));
                }
            }
            let mut merged = Vec::new();
            let mut brl: Vec<(u8, u64)> = Vec::new();
            let mut lseq: Vec<(usize, u64)> = Vec::new();
            while let Some(Reverse((_, h))) = heap.pop() {
                let bound = heap.peek().map_or(usize::MAX, |Reverse((j, _))| *j);
                let (sym, c) = children[h];
                let list = &jsets[c];
                let from = ptr[h];
                while ptr[h] < list.len() && list[ptr[h]] < bound {
                    ptr[h] += 1;
                }
                let weight: u64 = list[from..ptr[h]].iter().map(|&i| runs[i].1).sum();
                merged.extend_from_slice(&list[from..ptr[h]]);
                push_run(&mut brl, sym, weight);
                if c == heavy && heavy_internal {
                    cursor.take(weight, &mut lseq);
                } else {
                    push_run(&mut lseq, nodes[v].depth, weight);
                }
                if ptr[h] < list.len() {
                    heap.push(Reverse((list[ptr[h]], h)));
                }
            }
            for &(_, c) in &children {
                jsets[c] = Vec::new();
            }
            jsets[v] = merged;
            lseqs[v] = lseq;
            let node = &mut nodes[v];
            node.heavy = Some(heavy);
            node.runs = brl;
            node.size = node.runs.iter().map(|r| r.1).sum();
            let leaves: usize = children.iter().map(|&(_, c)| nodes[c].leaves).sum();
            nodes[v].leaves = leaves;
            // Light internal children keep their sequences as path tops.
            for &(_, c) in &children {
                if c != heavy && !nodes[c].is_leaf() {
                    let seq = std::mem::take(&mut lseqs[c]);
                    Self::attach_path(&mut nodes[c], seq);
                }
            }
        }
        if !nodes[0].is_leaf() {
            let seq = std::mem::take(&mut lseqs[0]);
            Self::attach_path(&mut nodes[0], seq);
        }

        for node in nodes.iter_mut() {
            let mut pos = 0;
            // Per symbol: (count of the symbol before the run, run start) for each run.
            let mut per_char: Vec<CharRuns> = Vec::new();
            for &(c, len) in &node.runs {
                node.run_starts.push(pos);
                let slot = match per_char.binary_search_by_key(&c, |e| e.0) {
                    Ok(s) => s,
                    Err(s) => {
                        per_char.insert(s, (c, Vec::new(), 0));
                        s
                    }
                };
                let entry = &mut per_char[slot];
                entry.1.push((entry.2, pos));
                entry.2 += len;
                pos += len;
            }
            node.select = per_char.into_iter().map(|(c, list, _)| (c, list)).collect();
        }

        // Heavy-path tops.
        let mut stack = vec![0usize];
        while let Some(v) = stack.pop() {
            let top = match nodes[v].parent {
                Some(p) if nodes[p].heavy == Some(v) => nodes[p].top,
                _ => v,
            };
            nodes[v].top = top;
            stack.extend(nodes[v].children.iter().map(|&(_, c)| c));
        }
        Ok(Cwt { nodes, width, rl_w: runs.len(), distinct: reps.len() })
    }

    fn blank(depth: usize, parent: Option<usize>, rep: usize) -> CwtNode {
        CwtNode {
            depth,
            parent,
            children: Vec::new(),
            rep,
            leaf: None,
            size: 0,
            leaves: 0,
            runs: Vec::new(),
            heavy: None,
            top: 0,
            run_starts: Vec::new(),
            select: Vec::new(),
            path: None,
            path_rl: 0,
        }
    }

    fn attach_path(node: &mut CwtNode, seq: Vec<(usize, u64)>) {
        let mut starts = Vec::with_capacity(seq.len());
        let mut pos = 0;
        let points = seq
            .iter()
            .enumerate()
            .map(|(k, &(t, len))| {
                starts.push(pos);
                pos += len;
                Point { x: k, y: t, w: len as i64 }
            })
            .collect();
        node.path_rl = seq.len();
        node.path = Some(PathIndex { starts, values: seq.iter().map(|e| e.0).collect(), tree: MergeSortTree::new(points) });
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn root(&self) -> usize {
        0
    }

    pub fn node(&self, v: usize) -> &CwtNode {
        &self.nodes[v]
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes[0].size == 0
    }

    pub fn label<S: StringSet + ?Sized>(&self, strings: &S, v: usize) -> Vec<u8> {
        let node = &self.nodes[v];
        (0..node.depth).map(|d| strings.symbol(node.rep, d)).collect()
    }

    /// The node whose element set is that of the label of length `len`,
    /// or `None` when no element has that prefix.
    pub fn locate<S: StringSet + ?Sized>(&self, strings: &S, len: usize, label: impl Fn(usize) -> u8) -> Option<Locus> {
        let mut v = 0;
        loop {
            let node = &self.nodes[v];
            if node.depth >= len {
                return Some(Locus { node: v, depth: len });
            }
            let c = label(node.depth);
            let &(_, child) = node.children.iter().find(|e| e.0 == c)?;
            let child_node = &self.nodes[child];
            let stop = child_node.depth.min(len);
            if (node.depth + 1..stop).any(|d| strings.symbol(child_node.rep, d) != label(d)) {
                return None;
            }
            v = child;
        }
    }

    /// B for a locus as runs: stored runs at a kept internal node, a single
    /// run inside an edge, `None` at a leaf.
    pub fn locus_runs<S: StringSet + ?Sized>(&self, strings: &S, locus: Locus) -> Option<Vec<(u8, u64)>> {
        let node = &self.nodes[locus.node];
        if locus.depth == node.depth {
            if node.is_leaf() {
                None
            } else {
                Some(node.runs.clone())
            }
        } else {
            Some(vec![(strings.symbol(node.rep, locus.depth), node.size)])
        }
    }

    /// Position in W of the element behind the `q`-th (0-based) entry of the
    /// node's string. Leaves are accepted and route through their parent.
    pub fn primary_index(&self, v: usize, q: u64) -> Result<u64, CwtError> {
        let size = self.nodes[v].size;
        if q >= size {
            return Err(CwtError::RankOutOfRange { q, size });
        }
        let (mut v, mut q) = (v, q);
        loop {
            let node = &self.nodes[v];
            if !node.is_leaf() && node.top != v {
                q = self.heavy_route(node.top, node.depth, q);
                v = node.top;
                continue;
            }
            match node.parent {
                None => return Ok(q),
                Some(p) => {
                    let c = self.nodes[p].children.iter().find(|e| e.1 == v).unwrap().0;
                    q = self.nodes[p].select(c, q);
                    v = p;
                }
            }
        }
    }

    /// Number of entries of the node's string whose primary index is below `x`.
    pub fn rank_below(&self, v: usize, x: u64) -> u64 {
        let (mut lo, mut hi) = (0, self.nodes[v].size);
        while lo < hi {
            let mid = (lo + hi) / 2;
            if self.primary_index(v, mid).unwrap() < x {
                lo = mid + 1;
            } else {
                hi = mid;
            }
        }
        lo
    }

    fn heavy_route(&self, top: usize, depth: usize, q: u64) -> u64 {
        let path = self.nodes[top].path.as_ref().expect("path tops carry an index");
        let k_all = path.values.len();
        let reach = |k: usize| path.tree.sum(0, k, depth, usize::MAX) as u64;
        let (mut lo, mut hi) = (1, k_all);
        while lo < hi {
            let mid = (lo + hi) / 2;
            if reach(mid) > q {
                hi = mid;
            } else {
                lo = mid + 1;
            }
        }
        let k = lo - 1;
        debug_assert!(path.values[k] >= depth);
        path.starts[k] + (q - reach(k))
    }

    pub fn stats(&self) -> CwtStats {
        let internal = self.nodes.iter().filter(|n| !n.is_leaf());
        let total_rl = internal.clone().map(|n| n.runs.len()).sum();
        let mut path_sum = vec![0usize; self.nodes.len()];
        for n in internal.clone() {
            path_sum[n.top] += n.runs.len();
        }
        let tops: Vec<&CwtNode> = internal.filter(|n| n.path.is_some()).collect();
        let path_bound_holds = self
            .nodes
            .iter()
            .enumerate()
            .filter(|(_, n)| n.path.is_some())
            .all(|(v, n)| n.path_rl <= path_sum[v]);
        CwtStats {
            total_rl,
            nodes: self.nodes.len(),
            leaves: self.nodes.iter().filter(|n| n.is_leaf()).count(),
            heavy_paths: tops.len(),
            rl_w: self.rl_w,
            distinct: self.distinct,
            path_bound_holds,
        }
    }
}

/// W written out element by element.
pub fn expand_sequence<S: StringSet + ?Sized>(strings: &S, w: &[(usize, u64)]) -> Vec<Vec<u8>> {
    let mut out = Vec::new();
    for &(id, len) in w {
        let s: Vec<u8> = (0..strings.width()).map(|d| strings.symbol(id, d)).collect();
        out.extend(std::iter::repeat_n(s, len as usize));
    }
    out
}

/// Uncompressed wavelet-tree simulation: B_X as (symbol, primary index)
/// pairs, obtained by partitioning W one symbol of X at a time.
pub fn uncompressed_node(expanded: &[Vec<u8>], label: &[u8]) -> Vec<(u8, u64)> {
    let mut positions: Vec<usize> = (0..expanded.len()).collect();
    for (d, &c) in label.iter().enumerate() {
        positions.retain(|&p| expanded[p][d] == c);
    }
    positions
        .into_iter()
        .filter(|&p| expanded[p].len() > label.len())
        .map(|p| (expanded[p][label.len()], p as u64))
        .collect()
}

/// Random sequence of at most `max_runs` runs over strings of width at most
/// `max_width` that share prefixes, with repeated strings allowed in
/// non-adjacent runs.
pub fn random_instance<R: Rng>(rng: &mut R, max_runs: usize, max_width: usize, sigma: u8) -> (Materialized, Vec<(usize, u64)>) {
    let width = rng.gen_range(1..=max_width);
    let runs = rng.gen_range(1..=max_runs);
    let pool_size = rng.gen_range(1..=runs);
    let letter = |rng: &mut R| b'a' + rng.gen_range(0..sigma);
    let mut pool: Vec<Vec<u8>> = vec![(0..width).map(|_| letter(rng)).collect()];
    let mut attempts = 0;
    while pool.len() < pool_size && attempts < 50 * pool_size {
        attempts += 1;
        let mut s = pool[rng.gen_range(0..pool.len())].clone();
        let cut = rng.gen_range(0..width);
        for c in &mut s[cut..] {
            *c = letter(rng);
        }
        if !pool.contains(&s) {
            pool.push(s);
        }
    }
    let mut w: Vec<(usize, u64)> = Vec::new();
    for _ in 0..runs {
        let mut id = rng.gen_range(0..pool.len());
        if pool.len() > 1 {
            while w.last().is_some_and(|&(last, _)| last == id) {
                id = rng.gen_range(0..pool.len());
            }
        }
        w.push((id, rng.gen_range(1..=5)));
    }
    (Materialized::new(pool).expect("equal widths"), w)
}

/// Checks every kept node's B and every primary index against the
/// uncompressed simulation. Returns the first mismatch.
pub fn check_against_oracle(cwt: &Cwt, strings: &Materialized, w: &[(usize, u64)]) -> Result<(), String> {
    let expanded = expand_sequence(strings, w);
    for v in 0..cwt.len() {
        let node = cwt.node(v);
        if node.is_leaf() {
            continue;
        }
        let label = cwt.label(strings, v);
        let oracle = uncompressed_node(&expanded, &label);
        let mut symbols: Vec<(u8, u64)> = Vec::new();
        for &(c, _) in &oracle {
            push_run(&mut symbols, c, 1);
        }
        if symbols != node.runs {
            return Err(format!("B mismatch at node {v} (label {:?})", String::from_utf8_lossy(&label)));
        }
        for (q, &(_, p)) in oracle.iter().enumerate() {
            let got = cwt.primary_index(v, q as u64).map_err(|e| e.to_string())?;
            if got != p {
                return Err(format!("primary index mismatch at node {v}, q={q}: {got} vs {p}"));
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn build(strings: &[&[u8]], w: &[(usize, u64)]) -> (Materialized, Cwt) {
        let m = Materialized::new(strings.iter().map(|s| s.to_vec()).collect()).unwrap();
        let c = Cwt::build(&m, w).unwrap();
        (m, c)
    }

    #[test]
    fn single_run_is_a_path() {
        let (m, c) = build(&[b"abc"], &[(0, 7)]);
        assert_eq!(c.len(), 2);
        assert_eq!(c.node(0).runs, vec![(b'a', 7)]);
        assert_eq!(c.primary_index(1, 6), Ok(6));
        check_against_oracle(&c, &m, &[(0, 7)]).unwrap();
    }

    #[test]
    fn root_splits_on_first_symbol() {
        let w = [(0, 2), (1, 3), (0, 1)];
        let (m, c) = build(&[b"ab", b"ba"], &w);
        assert_eq!(c.node(0).runs, vec![(b'a', 2), (b'b', 3), (b'a', 1)]);
        let leaf_b = c.node(0).children[1].1;
        assert_eq!(c.primary_index(leaf_b, 2), Ok(4));
        let leaf_a = c.node(0).children[0].1;
        assert_eq!(c.primary_index(leaf_a, 2), Ok(5));
        check_against_oracle(&c, &m, &w).unwrap();
    }

    #[test]
    fn unequal_lengths_are_rejected() {
        assert!(matches!(Materialized::new(vec![b"ab".to_vec(), b"a".to_vec()]), Err(CwtError::UnequalLengths { .. })));
        let (m, _) = build(&[b"ab"], &[(0, 1)]);
        assert_eq!(Cwt::build(&m, &[(3, 1)]).unwrap_err(), CwtError::UnknownString(3));
    }

    #[test]
    fn removed_nodes_are_answered_through_loci() {
        let w = [(0, 1), (1, 1)];
        let (m, c) = build(&[b"xxab", b"xxba"], &w);
        let locus = c.locate(&m, 1, |d| b"xx"[d]).unwrap();
        assert_eq!(c.locus_runs(&m, locus), Some(vec![(b'x', 2)]));
        assert!(c.locate(&m, 3, |d| b"xxc"[d]).is_none());
        assert_eq!(c.rank_below(0, 1), 1);
    }

    #[test]
    fn random_instances_match_simulation() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..200 {
            let (m, w) = random_instance(&mut rng, 64, 32, 3);
            let c = Cwt::build(&m, &w).unwrap();
            check_against_oracle(&c, &m, &w).unwrap();
            let st = c.stats();
            assert!(st.nodes < 2 * st.distinct.max(1) + 1);
            assert!(st.path_bound_holds);
        }
    }

    proptest! {
        #[test]
        fn matches_simulation(seed in any::<u64>(), sigma in 2u8..5) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let (m, w) = random_instance(&mut rng, 40, 12, sigma);
            let c = Cwt::build(&m, &w).unwrap();
            prop_assert_eq!(check_against_oracle(&c, &m, &w), Ok(()));
            let expanded = expand_sequence(&m, &w);
            // Every prefix of every string resolves to a locus with the right B.
            for s in 0..m.count() {
                for d in 0..m.width() {
                    let label = &m.get(s)[..d];
                    match c.locate(&m, d, |t| label[t]) {
                        Some(locus) => {
                            let runs = c.locus_runs(&m, locus).unwrap();
                            let mut want: Vec<(u8, u64)> = Vec::new();
                            for (ch, _) in uncompressed_node(&expanded, label) {
                                push_run(&mut want, ch, 1);
                            }
                            prop_assert_eq!(runs, want);
                        }
                        None => prop_assert!(uncompressed_node(&expanded, label).is_empty()),
                    }
                }
            }
        }
    }
}
