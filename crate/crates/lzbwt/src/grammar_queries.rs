//! Queries answered from the grammar alone: LCE on the text and its reverse,
//! hooks and anchors, internal pattern matching and 2-period queries.

use crate::rlslp::{NodeHandle, Rhs, Rlslp, Sym};
use serde::Serialize;
use std::cmp::Ordering;
use std::collections::HashMap;
use std::sync::RwLock;
use thiserror::Error;

/// Half-open fragment `[start..end)` of the text, 0-based.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct Fragment {
    pub start: usize,
    pub end: usize,
}

impl Fragment {
    pub fn new(start: usize, end: usize) -> Fragment {
        assert!(start <= end, "fragment start after end");
        Fragment { start, end }
    }

    pub fn len(&self) -> usize {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.start == self.end
    }

    pub fn prefix(&self, m: usize) -> Fragment {
        Fragment::new(self.start, self.start + m)
    }

    pub fn suffix_from(&self, a: usize) -> Fragment {
        Fragment::new(self.start + a, self.end)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Direction {
    Forward,
    /// Longest common suffix of `T[..i)` and `T[..j)`.
    Reverse,
}

/// `count` terms `first, first+step, ...`; the empty progression is all zeros.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize)]
pub struct ArithProgression {
    pub first: usize,
    pub step: usize,
    pub count: usize,
}

impl ArithProgression {
    /// `None` unless the sorted, deduplicated input is a progression.
    pub fn from_sorted(v: &[usize]) -> Option<ArithProgression> {
        match v.len() {
            0 => Some(ArithProgression::default()),
            1 => Some(ArithProgression { first: v[0], step: 0, count: 1 }),
            _ => {
                let step = v[1] - v[0];
                v.windows(2)
                    .all(|w| w[1] - w[0] == step)
                    .then_some(ArithProgression { first: v[0], step, count: v.len() })
            }
        }
    }

    pub fn to_vec(&self) -> Vec<usize> {
        (0..self.count).map(|i| self.first + i * self.step).collect()
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum QueryError {
    #[error("IPM needs |y| <= 2|x| (got |x| = {x}, |y| = {y})")]
    IpmPrecondition { x: usize, y: usize },
    #[error("empty fragment")]
    EmptyFragment,
    #[error("fragment [{start}..{end}) exceeds the text length {n}")]
    OutOfRange { start: usize, end: usize, n: usize },
    #[error("occurrences do not form a progression")]
    NotProgression,
}

type Piece = (Sym, usize);

/// LCE over one grammar, memoizing the LCP of symbol expansions.
struct LceEngine {
    g: Rlslp,
    memo: RwLock<HashMap<(Sym, Sym), usize>>,
}

impl LceEngine {
    fn new(g: Rlslp) -> LceEngine {
        LceEngine { g, memo: RwLock::new(HashMap::new()) }
    }

    /// Pieces whose concatenation (top first) spells `T[i..)`.
    fn suffix_stack(&self, i: usize) -> Vec<Piece> {
        let g = &self.g;
        let mut stack = Vec::new();
        if i >= g.text_len() {
            return stack;
        }
        let mut node = g.root();
        while node.start != i {
            let (child, idx) = g.child_containing(node, i).expect("i inside node");
            match g.rhs(node.sym) {
                Rhs::Pair(_, c) if idx == 0 => stack.push((c, 1)),
                Rhs::Power(b, k) if idx + 1 < k as usize => stack.push((b, k as usize - idx - 1)),
                _ => {}
            }
            node = child;
        }
        stack.push((node.sym, 1));
        stack
    }

    fn pop_one(stack: &mut Vec<Piece>) -> Sym {
        let top = stack.last_mut().expect("non-empty stack");
        let s = top.0;
        top.1 -= 1;
        if top.1 == 0 {
            stack.pop();
        }
        s
    }

    /// Replaces one repetition of the top piece by its children.
    fn expand_top(&self, stack: &mut Vec<Piece>) {
        let s = Self::pop_one(stack);
        match self.g.rhs(s) {
            Rhs::Pair(b, c) => {
                stack.push((c, 1));
                stack.push((b, 1));
            }
            Rhs::Power(b, k) => stack.push((b, k as usize)),
            Rhs::Terminal(_) => unreachable!("terminals are never expanded"),
        }
    }

    fn compare_stacks(&self, mut s1: Vec<Piece>, mut s2: Vec<Piece>, limit: usize) -> usize {
        let g = &self.g;
        let mut total = 0;
        while total < limit {
            let (Some(&(a, ra)), Some(&(b, rb))) = (s1.last(), s2.last()) else {
                break;
            };
            if a == b {
                let m = ra.min(rb);
                total += m * g.exp_len(a);
                for s in [&mut s1, &mut s2] {
                    let top = s.last_mut().unwrap();
                    top.1 -= m;
                    if top.1 == 0 {
                        s.pop();
                    }
                }
                continue;
            }
            let (la, lb) = (g.exp_len(a), g.exp_len(b));
            let l = self.lcp_sym(a, b);
            if l < la.min(lb) {
                total += l;
                break;
            }
            if la <= lb {
                Self::pop_one(&mut s1);
                total += la;
                self.drop_prefix(&mut s2, la);
            } else {
                Self::pop_one(&mut s2);
                total += lb;
                self.drop_prefix(&mut s1, lb);
            }
        }
        total.min(limit)
    }

    /// Removes the first `m` characters from a stack whose top piece is longer than `m`.
    fn drop_prefix(&self, stack: &mut Vec<Piece>, mut m: usize) {
        while m > 0 {
            let (s, _) = *stack.last().unwrap();
            let l = self.g.exp_len(s);
            if l <= m {
                Self::pop_one(stack);
                m -= l;
            } else {
                self.expand_top(stack);
            }
        }
    }

    /// LCP of exp(a) and exp(b).
    fn lcp_sym(&self, a: Sym, b: Sym) -> usize {
        if a == b {
            return self.g.exp_len(a);
        }
        let key = (a.min(b), a.max(b));
        if let Some(&v) = self.memo.read().unwrap().get(&key) {
            return v;
        }
        let g = &self.g;
        let v = match (g.rhs(a), g.rhs(b)) {
            (Rhs::Terminal(x), Rhs::Terminal(y)) => usize::from(x == y),
            _ => {
                let (mut s1, mut s2) = (vec![(a, 1)], vec![(b, 1)]);
                if g.exp_len(a) >= g.exp_len(b) {
                    self.expand_top(&mut s1);
                } else {
                    self.expand_top(&mut s2);
                }
                self.compare_stacks(s1, s2, usize::MAX)
            }
        };
        self.memo.write().unwrap().insert(key, v);
        v
    }

    fn lce(&self, i: usize, j: usize, limit: usize) -> usize {
        let n = self.g.text_len();
        if i >= n || j >= n {
            return 0;
        }
        if i == j {
            return (n - i).min(limit);
        }
        self.compare_stacks(self.suffix_stack(i), self.suffix_stack(j), limit)
    }
}

/// Grammar of `T` and of its reverse, with LCE, anchors, IPM and periods.
pub struct GrammarIndex {
    fwd: LceEngine,
    rev: LceEngine,
}

impl GrammarIndex {
    pub fn new(g: Rlslp) -> GrammarIndex {
        let rev = g.reversed();
        GrammarIndex { fwd: LceEngine::new(g), rev: LceEngine::new(rev) }
    }

    pub fn grammar(&self) -> &Rlslp {
        &self.fwd.g
    }

    pub fn reversed_grammar(&self) -> &Rlslp {
        &self.rev.g
    }

    pub fn n(&self) -> usize {
        self.fwd.g.text_len()
    }

    pub fn lce(&self, i: usize, j: usize, dir: Direction) -> usize {
        self.lce_bounded(i, j, dir, usize::MAX)
    }

    pub fn lce_bounded(&self, i: usize, j: usize, dir: Direction, limit: usize) -> usize {
        match dir {
            Direction::Forward => self.fwd.lce(i, j, limit),
            Direction::Reverse => {
                let n = self.n();
                if i == 0 || j == 0 {
                    return 0;
                }
                self.rev.lce(n - i, n - j, limit)
            }
        }
    }

    pub fn char_at(&self, i: usize) -> u8 {
        self.fwd.g.char_at(i)
    }

    /// `true` iff the fragments spell the same string.
    pub fn equal(&self, x: Fragment, y: Fragment) -> bool {
        x.len() == y.len() && (x.is_empty() || self.lce_bounded(x.start, y.start, Direction::Forward, x.len()) >= x.len())
    }

    /// Lexicographic order of two fragments.
    pub fn cmp_lex(&self, x: Fragment, y: Fragment) -> Ordering {
        let m = x.len().min(y.len());
        let l = if m == 0 { 0 } else { self.lce_bounded(x.start, y.start, Direction::Forward, m) };
        if l >= m {
            x.len().cmp(&y.len())
        } else {
            self.char_at(x.start + l).cmp(&self.char_at(y.start + l))
        }
    }

    /// Order of the reversed fragments.
    pub fn cmp_rev_lex(&self, x: Fragment, y: Fragment) -> Ordering {
        let m = x.len().min(y.len());
        let l = if m == 0 { 0 } else { self.lce_bounded(x.end, y.end, Direction::Reverse, m) };
        if l >= m {
            x.len().cmp(&y.len())
        } else {
            self.char_at(x.end - 1 - l).cmp(&self.char_at(y.end - 1 - l))
        }
    }

    fn check(&self, x: Fragment) -> Result<(), QueryError> {
        if x.is_empty() {
            return Err(QueryError::EmptyFragment);
        }
        if x.end > self.n() {
            return Err(QueryError::OutOfRange { start: x.start, end: x.end, n: self.n() });
        }
        Ok(())
    }

    /// Lowest parse-tree node whose expansion contains `x`.
    pub fn hook(&self, x: Fragment) -> NodeHandle {
        let g = &self.fwd.g;
        let mut node = g.root();
        while g.arity(node.sym) > 0 {
            let (child, _) = g.child_containing(node, x.start).unwrap();
            if child.end() < x.end {
                break;
            }
            node = child;
        }
        node
    }

    /// Length of the longest prefix of `x` whose hook differs from hook(x).
    pub fn anch(&self, x: Fragment) -> usize {
        if x.len() == 1 {
            return 0;
        }
        let hook = self.hook(x);
        let (child, _) = self.fwd.g.child_containing(hook, x.start).unwrap();
        child.end() - x.start
    }

    /// The block of the round-`j` sequence that covers `pos` (the top-most node
    /// on the path to `pos` introduced no later than round `j`), and the extent
    /// of the run of equal blocks it belongs to.
    fn level_block(&self, pos: usize, j: u32) -> (NodeHandle, Fragment) {
        let g = &self.fwd.g;
        let mut node = g.root();
        let mut parent = None;
        while g.level(node.sym) > j {
            parent = Some(node);
            node = g.child_containing(node, pos).unwrap().0;
        }
        let run = match parent.map(|p| (p, g.rhs(p.sym))) {
            Some((p, Rhs::Power(b, _))) if b == node.sym => Fragment::new(p.start, p.end()),
            _ => Fragment::new(node.start, node.end()),
        };
        (node, run)
    }

    /// The first (or last) `k` round-`j` block boundaries strictly inside `x`.
    fn level_boundaries(&self, x: Fragment, j: u32, k: usize, from_end: bool, out: &mut Vec<usize>) {
        let mut found = 0;
        let mut pos = if from_end { x.end - 1 } else { x.start };
        while found < k {
            let (block, run) = self.level_block(pos, j);
            let step = block.len;
            if from_end {
                // Boundaries block.start, block.start - step, ... down to the run start.
                let mut b = block.start;
                while found < k && b > x.start {
                    out.push(b - x.start);
                    found += 1;
                    if b <= run.start {
                        break;
                    }
                    b -= step;
                }
                if b <= x.start || b > run.start {
                    return;
                }
                pos = b - 1;
            } else {
                let mut b = block.end();
                while found < k && b < x.end {
                    out.push(b - x.start);
                    found += 1;
                    if b >= run.end {
                        break;
                    }
                    b += step;
                }
                if b >= x.end || b < run.end {
                    return;
                }
                pos = b;
            }
        }
    }

    /// Potential anchors of every occurrence of the pattern spelled by `x`:
    /// per round, the first and last few block boundaries inside `x`.
    pub fn anchors(&self, x: Fragment) -> Result<Vec<usize>, QueryError> {
        self.check(x)?;
        if x.len() == 1 {
            return Ok(vec![0]);
        }
        let mut out = vec![self.anch(x)];
        for j in 0..=self.fwd.g.height() {
            self.level_boundaries(x, j, BOUNDARIES_PER_SIDE, false, &mut out);
            self.level_boundaries(x, j, BOUNDARIES_PER_SIDE, true, &mut out);
        }
        out.sort_unstable();
        out.dedup();
        Ok(out)
    }

    /// Occurrences of `x` whose hook is `node` and whose anchor is `a`.
    pub fn occ_at_node(&self, x: Fragment, a: usize, node: NodeHandle) -> Vec<usize> {
        let g = &self.fwd.g;
        let (pl, pr) = (a, x.len() - a);
        match g.rhs(node.sym) {
            Rhs::Terminal(c) => {
                if a == 0 && x.len() == 1 && self.char_at(x.start) == c {
                    vec![node.start]
                } else {
                    vec![]
                }
            }
            Rhs::Pair(b, c) => {
                let (lb, lc) = (g.exp_len(b), g.exp_len(c));
                let mid = node.start + lb;
                if pl == 0 || pr == 0 || pl > lb || pr > lc {
                    return vec![];
                }
                let ok = self.lce_bounded(x.start + a, mid, Direction::Reverse, pl) >= pl
                    && self.lce_bounded(x.start + a, mid, Direction::Forward, pr) >= pr;
                if ok {
                    vec![mid - pl]
                } else {
                    vec![]
                }
            }
            Rhs::Power(b, k) => {
                let lb = g.exp_len(b);
                let mid = node.start + lb;
                if pl == 0 || pr == 0 || pl > lb || pr > (k as usize - 1) * lb {
                    return vec![];
                }
                let ok = self.lce_bounded(x.start + a, mid, Direction::Reverse, pl) >= pl
                    && self.lce_bounded(x.start + a, mid, Direction::Forward, pr) >= pr;
                if !ok {
                    return vec![];
                }
                let last = k as usize - pr.div_ceil(lb);
                (1..=last).map(|i| node.start + i * lb - pl).collect()
            }
        }
    }

    /// Start positions of `x` inside `y`, relative to `y.start`. Requires |y| ≤ 2|x|.
    pub fn ipm(&self, x: Fragment, y: Fragment) -> Result<ArithProgression, QueryError> {
        self.check(x)?;
        self.check(y)?;
        if y.len() > 2 * x.len() {
            return Err(QueryError::IpmPrecondition { x: x.len(), y: y.len() });
        }
        if x.len() > y.len() {
            return Ok(ArithProgression::default());
        }
        if y.len() == 2 * x.len() {
            // The last start is checked directly; the rest satisfies |y'| < 2|x|.
            let mut occ = self.ipm(x, Fragment::new(y.start, y.end - 1))?.to_vec();
            if self.equal(x, Fragment::new(y.end - x.len(), y.end)) {
                occ.push(x.len());
            }
            return ArithProgression::from_sorted(&occ).ok_or(QueryError::NotProgression);
        }
        let g = &self.fwd.g;
        let anchors = self.anchors(x)?;
        let target = y.start + x.len() - 1;
        let mut hooks = Vec::new();
        let mut node = g.root();
        loop {
            let overlap = node.end().min(y.end).saturating_sub(node.start.max(y.start));
            if overlap < x.len() {
                break;
            }
            hooks.push(node);
            if g.arity(node.sym) == 0 {
                break;
            }
            node = g.child_containing(node, target).unwrap().0;
        }
        let mut occ = Vec::new();
        for &a in &anchors {
            for &h in &hooks {
                occ.extend(
                    self.occ_at_node(x, a, h)
                        .into_iter()
                        .filter(|&p| p >= y.start && p + x.len() <= y.end)
                        .map(|p| p - y.start),
                );
            }
        }
        occ.sort_unstable();
        occ.dedup();
        ArithProgression::from_sorted(&occ).ok_or(QueryError::NotProgression)
    }

    /// per(x) when it is at most |x|/2, otherwise `None`.
    pub fn two_period(&self, x: Fragment) -> Result<Option<usize>, QueryError> {
        self.check(x)?;
        if x.len() < 2 {
            return Ok(None);
        }
        let half = x.prefix(x.len().div_ceil(2));
        let occ = self.ipm(half, x.suffix_from(1))?;
        if occ.count == 0 {
            return Ok(None);
        }
        let q = occ.first + 1;
        if 2 * q > x.len() {
            return Ok(None);
        }
        let need = x.len() - q;
        Ok((self.lce_bounded(x.start, x.start + q, Direction::Forward, need) >= need).then_some(q))
    }
}

/// Block boundaries taken from each end of the pattern per recompression round.
pub const BOUNDARIES_PER_SIDE: usize = 3;
