//! Pattern-matching indexes over a recompression RLSLP: reporting, leftmost
//! and rightmost occurrences, and exact counting.
//!
//! Patterns are given by an occurrence in the text.

use crate::grammar_queries::{Direction, Fragment, GrammarIndex};
use crate::range::{MergeSortTree, Point};
use crate::rlslp::{Rhs, Rlslp, Sym};
use serde::Serialize;
use std::cmp::Ordering;
use std::collections::HashMap;

/// A triple (x, y, w) of two text fragments and a weight.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct FragTriple {
    pub x: Fragment,
    pub y: Fragment,
    pub w: i64,
}

/// Triples ranked by reversed x and by y, with a 2D range structure on the ranks.
pub struct FragPairIndex {
    triples: Vec<FragTriple>,
    /// Triple indices ordered by reversed x.
    by_x: Vec<usize>,
    by_y: Vec<usize>,
    tree: MergeSortTree,
}

/// Orders `x` against the query `q` where every x with suffix q compares equal.
fn cmp_suffix_class(gi: &GrammarIndex, x: Fragment, q: Fragment) -> Ordering {
    if q.is_empty() {
        return Ordering::Equal;
    }
    let m = x.len().min(q.len());
    let l = if m == 0 { 0 } else { gi.lce_bounded(x.end, q.end, Direction::Reverse, m) };
    if l >= q.len() {
        Ordering::Equal
    } else if l >= x.len() {
        Ordering::Less
    } else {
        gi.char_at(x.end - 1 - l).cmp(&gi.char_at(q.end - 1 - l))
    }
}

/// Orders `y` against the query `q` where every y with prefix q compares equal.
fn cmp_prefix_class(gi: &GrammarIndex, y: Fragment, q: Fragment) -> Ordering {
    if q.is_empty() {
        return Ordering::Equal;
    }
    let m = y.len().min(q.len());
    let l = if m == 0 { 0 } else { gi.lce_bounded(y.start, q.start, Direction::Forward, m) };
    if l >= q.len() {
        Ordering::Equal
    } else if l >= y.len() {
        Ordering::Less
    } else {
        gi.char_at(y.start + l).cmp(&gi.char_at(q.start + l))
    }
}

impl FragPairIndex {
    pub fn build(triples: Vec<FragTriple>, gi: &GrammarIndex) -> FragPairIndex {
        let mut by_x: Vec<usize> = (0..triples.len()).collect();
        by_x.sort_by(|&a, &b| gi.cmp_rev_lex(triples[a].x, triples[b].x));
        let mut by_y: Vec<usize> = (0..triples.len()).collect();
        by_y.sort_by(|&a, &b| gi.cmp_lex(triples[a].y, triples[b].y));
        let mut xr = vec![0; triples.len()];
        let mut yr = vec![0; triples.len()];
        for (r, &i) in by_x.iter().enumerate() {
            xr[i] = r;
        }
        for (r, &i) in by_y.iter().enumerate() {
            yr[i] = r;
        }
        let points = (0..triples.len()).map(|i| Point { x: xr[i], y: yr[i], w: triples[i].w }).collect();
        FragPairIndex { triples, by_x, by_y, tree: MergeSortTree::new(points) }
    }

    pub fn len(&self) -> usize {
        self.triples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.triples.is_empty()
    }

    /// Rank rectangle of triples whose x has suffix `xq` and whose y has
    /// prefix `yq`, or `None` when no x qualifies.
    fn rect(&self, gi: &GrammarIndex, xq: Fragment, yq: Fragment) -> Option<(usize, usize, usize, usize)> {
        let xs = |i: &usize| cmp_suffix_class(gi, self.triples[*i].x, xq);
        let x_lo = self.by_x.partition_point(|i| xs(i) == Ordering::Less);
        let x_hi = x_lo + self.by_x[x_lo..].partition_point(|i| xs(i) != Ordering::Greater);
        if x_lo == x_hi {
            return None;
        }
        let ys = |i: &usize| cmp_prefix_class(gi, self.triples[*i].y, yq);
        let y_lo = self.by_y.partition_point(|i| ys(i) == Ordering::Less);
        let y_hi = y_lo + self.by_y[y_lo..].partition_point(|i| ys(i) != Ordering::Greater);
        (y_lo < y_hi).then_some((x_lo, x_hi, y_lo, y_hi))
    }

    /// Triples matching the query.
    pub fn enumerate(&self, gi: &GrammarIndex, xq: Fragment, yq: Fragment) -> Vec<FragTriple> {
        self.rect(gi, xq, yq)
            .map(|(a, b, c, d)| self.tree.enumerate(a, b, c, d).into_iter().map(|i| self.triples[i]).collect())
            .unwrap_or_default()
    }

    pub fn min(&self, gi: &GrammarIndex, xq: Fragment, yq: Fragment) -> Option<i64> {
        let (a, b, c, d) = self.rect(gi, xq, yq)?;
        self.tree.min(a, b, c, d)
    }

    pub fn sum(&self, gi: &GrammarIndex, xq: Fragment, yq: Fragment) -> i64 {
        self.rect(gi, xq, yq).map_or(0, |(a, b, c, d)| self.tree.sum(a, b, c, d))
    }
}

/// Exponent sets K(B) with suffix aggregates for count(B, m).
pub struct PowerTable {
    /// Per base: sorted exponents, Σ k·count(A) and Σ count(A) over exponents above each entry.
    table: HashMap<Sym, Vec<(u64, i64, i64)>>,
}

impl PowerTable {
    pub fn build(g: &Rlslp, counts: &[u64]) -> PowerTable {
        let mut by_base: HashMap<Sym, Vec<(u64, i64)>> = HashMap::new();
        for a in g.symbols() {
            if let Rhs::Power(b, k) = g.rhs(a) {
                by_base.entry(b).or_default().push((k as u64, counts[a as usize] as i64));
            }
        }
        let mut table = HashMap::new();
        for (b, mut entries) in by_base {
            entries.sort_unstable();
            let mut ks: Vec<u64> = entries.iter().map(|e| e.0).collect();
            ks.push(1);
            ks.sort_unstable();
            ks.dedup();
            let mut rows = Vec::with_capacity(ks.len());
            for &m in &ks {
                let above = entries.iter().filter(|e| e.0 > m);
                let (s1, s0) = above.fold((0i64, 0i64), |(s1, s0), e| (s1 + e.0 as i64 * e.1, s0 + e.1));
                rows.push((m, s1, s0));
            }
            table.insert(b, rows);
        }
        PowerTable { table }
    }

    /// Σ (k − m)·count(A) over A → B^k with k > m.
    pub fn count(&self, b: Sym, m: u64) -> i64 {
        assert!(m >= 1, "count(B, m) needs m >= 1");
        let Some(rows) = self.table.get(&b) else {
            return 0;
        };
        let idx = rows.partition_point(|r| r.0 <= m) - 1;
        let (_, s1, s0) = rows[idx];
        s1 - m as i64 * s0
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct CountBreakdown {
    pub regular: u64,
    pub special: u64,
}

impl CountBreakdown {
    pub fn total(&self) -> u64 {
        self.regular + self.special
    }
}

fn pair_triples(g: &Rlslp, firsts: &[usize], weight: impl Fn(Sym, usize) -> i64) -> Vec<FragTriple> {
    let mut out = Vec::new();
    for a in g.symbols() {
        let l = firsts[a as usize];
        let (b, rest) = match g.rhs(a) {
            Rhs::Terminal(_) => continue,
            Rhs::Pair(b, c) => (b, g.exp_len(c)),
            Rhs::Power(b, k) => (b, g.exp_len(b) * (k as usize - 1)),
        };
        let lb = g.exp_len(b);
        out.push(FragTriple {
            x: Fragment::new(l, l + lb),
            y: Fragment::new(l + lb, l + lb + rest),
            w: weight(a, l),
        });
    }
    out
}

/// Leftmost-occurrence structure for one orientation of the text.
struct LeftmostIndex {
    firsts: Vec<usize>,
    terminals: HashMap<u8, Sym>,
    pairs: FragPairIndex,
}

impl LeftmostIndex {
    fn build(gi: &GrammarIndex) -> LeftmostIndex {
        let g = gi.grammar();
        let firsts = g.first_positions();
        let triples = pair_triples(g, &firsts, |a, l| match g.rhs(a) {
            Rhs::Pair(b, _) | Rhs::Power(b, _) => (l + g.exp_len(b)) as i64,
            Rhs::Terminal(_) => unreachable!(),
        });
        LeftmostIndex { firsts, terminals: terminal_map(g), pairs: FragPairIndex::build(triples, gi) }
    }

    fn query(&self, gi: &GrammarIndex, p: Fragment) -> usize {
        if p.len() == 1 {
            return self.firsts[self.terminals[&gi.char_at(p.start)] as usize];
        }
        let mut best = usize::MAX;
        for a in gi.anchors(p).expect("valid fragment") {
            if a == 0 {
                continue;
            }
            if let Some(w) = self.pairs.min(gi, p.prefix(a), p.suffix_from(a)) {
                best = best.min(w as usize - a);
            }
        }
        best
    }
}

fn terminal_map(g: &Rlslp) -> HashMap<u8, Sym> {
    g.symbols()
        .filter_map(|a| match g.rhs(a) {
            Rhs::Terminal(c) => Some((c, a)),
            _ => None,
        })
        .collect()
}

pub struct CompressedIndex {
    gi: GrammarIndex,
    rev: GrammarIndex,
    counts: Vec<u64>,
    terminals: HashMap<u8, Sym>,
    report: FragPairIndex,
    leftmost: LeftmostIndex,
    rightmost: LeftmostIndex,
    regular: FragPairIndex,
    /// Symbols sorted by expansion.
    sorted: Vec<Sym>,
    firsts: Vec<usize>,
    powers: PowerTable,
}

impl CompressedIndex {
    pub fn build(g: Rlslp) -> CompressedIndex {
        let rev = GrammarIndex::new(g.reversed());
        let gi = GrammarIndex::new(g);
        let g = gi.grammar();
        let firsts = g.first_positions();
        let counts = g.counts();
        let report = FragPairIndex::build(pair_triples(g, &firsts, |a, _| a as i64), &gi);
        let mut regular_triples = Vec::new();
        for a in g.symbols() {
            let l = firsts[a as usize];
            let c = counts[a as usize] as i64;
            match g.rhs(a) {
                Rhs::Terminal(_) => {}
                Rhs::Pair(b, d) => {
                    let lb = g.exp_len(b);
                    regular_triples.push(FragTriple {
                        x: Fragment::new(l, l + lb),
                        y: Fragment::new(l + lb, l + lb + g.exp_len(d)),
                        w: c,
                    });
                }
                Rhs::Power(b, k) => {
                    let lb = g.exp_len(b);
                    let x = Fragment::new(l, l + lb);
                    regular_triples.push(FragTriple { x, y: Fragment::new(l + lb, l + 2 * lb), w: c });
                    if k >= 3 {
                        regular_triples.push(FragTriple { x, y: Fragment::new(l + lb, l + 3 * lb), w: (k as i64 - 2) * c });
                    }
                }
            }
        }
        let regular = FragPairIndex::build(regular_triples, &gi);
        let mut sorted: Vec<Sym> = g.symbols().collect();
        let frag = |a: Sym| Fragment::new(firsts[a as usize], firsts[a as usize] + g.exp_len(a));
        sorted.sort_by(|&a, &b| gi.cmp_lex(frag(a), frag(b)).then(a.cmp(&b)));
        debug_assert!(sorted.windows(2).all(|w| gi.cmp_lex(frag(w[0]), frag(w[1])) == Ordering::Less));
        let powers = PowerTable::build(g, &counts);
        let leftmost = LeftmostIndex::build(&gi);
        let rightmost = LeftmostIndex::build(&rev);
        CompressedIndex {
            terminals: terminal_map(g),
            gi,
            rev,
            counts,
            report,
            leftmost,
            rightmost,
            regular,
            sorted,
            firsts,
            powers,
        }
    }

    pub fn grammar_index(&self) -> &GrammarIndex {
        &self.gi
    }

    pub fn n(&self) -> usize {
        self.gi.n()
    }

    fn terminal(&self, p: Fragment) -> Sym {
        self.terminals[&self.gi.char_at(p.start)]
    }

    /// All occurrences of the pattern spelled by `p`, sorted.
    pub fn report(&self, p: Fragment) -> Vec<usize> {
        let g = self.gi.grammar();
        if p.len() == 1 {
            return g.enumerate_nodes(self.terminal(p)).unwrap().into_iter().map(|n| n.start).collect();
        }
        let mut out = Vec::new();
        for a in self.gi.anchors(p).unwrap() {
            if a == 0 {
                continue;
            }
            let pr = p.len() - a;
            for t in self.report.enumerate(&self.gi, p.prefix(a), p.suffix_from(a)) {
                let sym = t.w as Sym;
                for node in g.enumerate_nodes(sym).unwrap() {
                    match g.rhs(sym) {
                        Rhs::Pair(b, _) => out.push(node.start + g.exp_len(b) - a),
                        Rhs::Power(b, k) => {
                            let lb = g.exp_len(b);
                            let last = k as usize - pr.div_ceil(lb);
                            out.extend((1..=last).map(|i| node.start + i * lb - a));
                        }
                        Rhs::Terminal(_) => unreachable!(),
                    }
                }
            }
        }
        out.sort_unstable();
        debug_assert!(out.windows(2).all(|w| w[0] < w[1]), "occurrence reported twice");
        out
    }

    pub fn leftmost(&self, p: Fragment) -> usize {
        self.leftmost.query(&self.gi, p)
    }

    pub fn rightmost(&self, p: Fragment) -> usize {
        let n = self.n();
        let q = self.rightmost.query(&self.rev, Fragment::new(n - p.end, n - p.start));
        n - q - p.len()
    }

    pub fn count(&self, p: Fragment) -> u64 {
        self.count_breakdown(p).total()
    }

    pub fn count_breakdown(&self, p: Fragment) -> CountBreakdown {
        if p.len() == 1 {
            return CountBreakdown { regular: self.counts[self.terminal(p) as usize], special: 0 };
        }
        let anchors = self.gi.anchors(p).unwrap();
        let regular = anchors
            .iter()
            .filter(|&&a| a > 0)
            .map(|&a| self.regular.sum(&self.gi, p.prefix(a), p.suffix_from(a)))
            .sum::<i64>() as u64;
        let mut special = 0i64;
        if let Some(per) = self.gi.two_period(p).unwrap() {
            for &a in anchors.iter().filter(|&&a| a > 0) {
                if a > per || 2 * per >= p.len() - a {
                    continue;
                }
                if let Some(b) = self.symbol_spelling(Fragment::new(p.start + a, p.start + a + per)) {
                    special += self.powers.count(b, (p.len() - a).div_ceil(per) as u64);
                }
            }
        }
        CountBreakdown { regular, special: special as u64 }
    }

    /// The unique symbol whose expansion equals the fragment, if any.
    pub fn symbol_spelling(&self, f: Fragment) -> Option<Sym> {
        let g = self.gi.grammar();
        let frag = |a: Sym| Fragment::new(self.firsts[a as usize], self.firsts[a as usize] + g.exp_len(a));
        let i = self.sorted.partition_point(|&a| self.gi.cmp_lex(frag(a), f) == Ordering::Less);
        let a = *self.sorted.get(i)?;
        self.gi.equal(frag(a), f).then_some(a)
    }

    pub fn count_power_suffix(&self, b: Sym, m: u64) -> i64 {
        self.powers.count(b, m)
    }

    /// `true` iff the occurrence overlaps at most three children of its hook.
    pub fn is_regular_occurrence(&self, x: Fragment) -> bool {
        if x.len() == 1 {
            return true;
        }
        let g = self.gi.grammar();
        let hook = self.gi.hook(x);
        let (_, i) = g.child_containing(hook, x.start).unwrap();
        let (_, j) = g.child_containing(hook, x.end - 1).unwrap();
        j - i < 3
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rlslp::{recompress, recompress_bytes, Partition};
    use crate::text::Text;
    use proptest::prelude::*;

    fn naive_occ(s: &[u8], p: &[u8]) -> Vec<usize> {
        (0..=s.len() - p.len()).filter(|&i| &s[i..i + p.len()] == p).collect()
    }

    #[test]
    fn figure_one_queries() {
        let t = Text::parse(b"bbabaababababaababa$").unwrap();
        let idx = CompressedIndex::build(recompress(&t));
        assert_eq!(idx.report(Fragment::new(2, 4)), vec![2, 5, 7, 9, 11, 14, 16]);
        assert_eq!(idx.leftmost(Fragment::new(4, 5)), 2);
        let whole = Fragment::new(0, 20);
        assert_eq!((idx.leftmost(whole), idx.rightmost(whole), idx.count(whole)), (0, 0, 1));
        assert_eq!(idx.report(whole), vec![0]);
    }

    #[test]
    fn unary_counts() {
        let idx = CompressedIndex::build(recompress(&Text::parse(b"aaaa$").unwrap()));
        assert_eq!(idx.count(Fragment::new(0, 2)), 3);
        assert_eq!(idx.count(Fragment::new(1, 2)), 4);
    }

    #[test]
    fn power_suffix_formula() {
        let g = Rlslp::from_text_format("0 T a\n1 T b\n2 P 0 1\n3 R 2 5\n4 P 3 0\n5 P 4 3\nS 5\n").unwrap();
        let idx = CompressedIndex::build(g);
        assert_eq!(idx.grammar_index().grammar().count(3).unwrap(), 2);
        assert_eq!(idx.count_power_suffix(2, 3), 4);
        assert_eq!(idx.count_power_suffix(2, 5), 0);
        assert_eq!(idx.count_power_suffix(2, 1), 8);
        assert_eq!(idx.count_power_suffix(0, 1), 0);
    }

    #[test]
    fn empty_and_single_triple_sets() {
        let t = Text::parse(b"abcab$").unwrap();
        let gi = GrammarIndex::new(recompress(&t));
        let empty = FragPairIndex::build(vec![], &gi);
        let (x, y) = (Fragment::new(0, 1), Fragment::new(1, 3));
        assert_eq!(empty.sum(&gi, x, y), 0);
        assert_eq!(empty.min(&gi, x, y), None);
        let one = FragPairIndex::build(vec![FragTriple { x, y, w: 7 }], &gi);
        assert_eq!(one.min(&gi, x, y), Some(7));
        assert_eq!(one.sum(&gi, Fragment::new(3, 4), Fragment::new(4, 5)), 7);
    }

    fn text_strategy() -> impl Strategy<Value = Vec<u8>> {
        prop_oneof![
            proptest::collection::vec(b'a'..b'c', 2..120),
            proptest::collection::vec(b'a'..b'e', 2..120),
            (proptest::collection::vec(b'a'..b'c', 1..5), 2usize..40).prop_map(|(u, k)| u.repeat(k)),
        ]
    }

    proptest! {
        #[test]
        fn range_queries_match_filter(s in text_strategy(), raw in proptest::collection::vec((any::<usize>(), any::<usize>(), any::<usize>(), any::<usize>(), -9i64..9), 1..60), q in (any::<usize>(), any::<usize>(), any::<usize>(), any::<usize>())) {
            let gi = GrammarIndex::new(recompress_bytes(&s, Partition::Greedy));
            let n = s.len();
            let frag = |a: usize, b: usize| {
                let l = 1 + b % n.min(6);
                let st = a % (n - l + 1);
                Fragment::new(st, st + l)
            };
            let triples: Vec<FragTriple> = raw.iter().map(|&(a, b, c, d, w)| FragTriple { x: frag(a, b), y: frag(c, d), w }).collect();
            let idx = FragPairIndex::build(triples.clone(), &gi);
            let (xq, yq) = (frag(q.0, q.1), frag(q.2, q.3));
            let want: Vec<i64> = triples.iter().filter(|t| s[t.x.start..t.x.end].ends_with(&s[xq.start..xq.end]) && s[t.y.start..t.y.end].starts_with(&s[yq.start..yq.end])).map(|t| t.w).collect();
            let mut got: Vec<i64> = idx.enumerate(&gi, xq, yq).iter().map(|t| t.w).collect();
            let mut want_sorted = want.clone();
            got.sort_unstable();
            want_sorted.sort_unstable();
            prop_assert_eq!(got, want_sorted);
            prop_assert_eq!(idx.sum(&gi, xq, yq), want.iter().sum::<i64>());
            prop_assert_eq!(idx.min(&gi, xq, yq), want.iter().copied().min());
        }

        #[test]
        fn index_matches_naive(s in text_strategy(), start in any::<usize>(), len in 1usize..21) {
            let idx = CompressedIndex::build(recompress_bytes(&s, Partition::Greedy));
            let n = s.len();
            let len = len.min(n);
            let start = start % (n - len + 1);
            let p = Fragment::new(start, start + len);
            let want = naive_occ(&s, &s[p.start..p.end]);
            prop_assert_eq!(idx.report(p), want.clone());
            prop_assert_eq!(idx.leftmost(p), want[0]);
            prop_assert_eq!(idx.rightmost(p), *want.last().unwrap());
            let bd = idx.count_breakdown(p);
            let regular = want.iter().filter(|&&j| idx.is_regular_occurrence(Fragment::new(j, j + len))).count() as u64;
            prop_assert_eq!(bd.regular, regular);
            prop_assert_eq!(bd.total(), want.len() as u64);
        }

        #[test]
        fn power_table_matches_direct_sum(s in text_strategy(), m in 1u64..12) {
            let g = recompress_bytes(&s, Partition::Greedy);
            let counts = g.counts();
            let table = PowerTable::build(&g, &counts);
            for b in g.symbols() {
                let direct: i64 = g.symbols().filter_map(|a| match g.rhs(a) {
                    Rhs::Power(bb, k) if bb == b && k as u64 > m => Some((k as i64 - m as i64) * counts[a as usize] as i64),
                    _ => None,
                }).sum();
                prop_assert_eq!(table.count(b, m), direct);
            }
        }
    }
}
