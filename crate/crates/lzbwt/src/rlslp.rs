//! Run-length straight-line programs built by recompression, plus parse-tree
//! navigation.

use crate::text::{decode_symbol, encode_symbol, lz77_decode, shortest_period, Lz77Parse, ParseError, Text};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::HashMap;
use std::fmt::Write as _;
use thiserror::Error;

pub type Sym = u32;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Rhs {
    Terminal(u8),
    Pair(Sym, Sym),
    Power(Sym, u32),
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GrammarError {
    #[error("child index {index} out of range for arity {arity}")]
    ChildIndex { index: usize, arity: usize },
    #[error("position {pos} outside node fragment [{start}..{end})")]
    Position { pos: usize, start: usize, end: usize },
    #[error("symbol {0} does not occur in the parse tree")]
    UnusedSymbol(Sym),
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error(transparent)]
    Parse(#[from] ParseError),
}

/// How the pairing rounds split the current alphabet into left and right symbols.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Partition {
    /// Greedy max cut over adjacent-pair frequencies.
    #[default]
    Greedy,
    /// Independent fair coins from a seeded generator.
    Random(u64),
}

/// A parse-tree node: the symbol and the fragment `[start..start+len)` it expands to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct NodeHandle {
    pub sym: Sym,
    pub start: usize,
    pub len: usize,
}

impl NodeHandle {
    pub fn end(&self) -> usize {
        self.start + self.len
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Rlslp {
    rhs: Vec<Rhs>,
    len: Vec<usize>,
    level: Vec<u32>,
    start: Sym,
    height: u32,
}

struct Builder {
    rhs: Vec<Rhs>,
    len: Vec<usize>,
    level: Vec<u32>,
    ids: HashMap<Rhs, Sym>,
}

impl Builder {
    fn intern(&mut self, r: Rhs, level: u32) -> Sym {
        if let Some(&id) = self.ids.get(&r) {
            return id;
        }
        let len = match r {
            Rhs::Terminal(_) => 1,
            Rhs::Pair(b, c) => self.len[b as usize] + self.len[c as usize],
            Rhs::Power(b, k) => self.len[b as usize] * k as usize,
        };
        let id = self.rhs.len() as Sym;
        self.rhs.push(r);
        self.len.push(len);
        self.level.push(level);
        self.ids.insert(r, id);
        id
    }
}

fn run_length_round(seq: &[Sym], b: &mut Builder, level: u32) -> Vec<Sym> {
    let mut out = Vec::with_capacity(seq.len());
    let mut i = 0;
    while i < seq.len() {
        let mut j = i + 1;
        while j < seq.len() && seq[j] == seq[i] {
            j += 1;
        }
        out.push(if j - i >= 2 { b.intern(Rhs::Power(seq[i], (j - i) as u32), level) } else { seq[i] });
        i = j;
    }
    out
}

fn cut_value(seq: &[Sym], left: &HashMap<Sym, bool>) -> usize {
    seq.windows(2).filter(|w| left[&w[0]] && !left[&w[1]]).count()
}

fn greedy_partition(seq: &[Sym]) -> HashMap<Sym, bool> {
    let mut freq: HashMap<(Sym, Sym), usize> = HashMap::new();
    for w in seq.windows(2) {
        *freq.entry((w[0], w[1])).or_default() += 1;
    }
    let mut adj: HashMap<Sym, Vec<(Sym, usize)>> = HashMap::new();
    for (&(a, c), &f) in &freq {
        if a != c {
            adj.entry(a).or_default().push((c, f));
            adj.entry(c).or_default().push((a, f));
        }
    }
    let mut syms: Vec<Sym> = seq.to_vec();
    syms.sort_unstable();
    syms.dedup();
    // Undirected max cut: each symbol joins the side opposite its heavier
    // already-placed neighbourhood. The better orientation is chosen below.
    let mut left: HashMap<Sym, bool> = HashMap::new();
    for &s in &syms {
        let (mut to_left, mut to_right) = (0, 0);
        for &(d, f) in adj.get(&s).map(Vec::as_slice).unwrap_or(&[]) {
            match left.get(&d) {
                Some(true) => to_left += f,
                Some(false) => to_right += f,
                None => {}
            }
        }
        left.insert(s, to_left <= to_right);
    }
    let forward = cut_value(seq, &left);
    let flipped: HashMap<Sym, bool> = left.iter().map(|(&k, &v)| (k, !v)).collect();
    if cut_value(seq, &flipped) > forward {
        flipped
    } else {
        left
    }
}

fn random_partition(seq: &[Sym], rng: &mut ChaCha8Rng) -> HashMap<Sym, bool> {
    let mut syms: Vec<Sym> = seq.to_vec();
    syms.sort_unstable();
    syms.dedup();
    for _ in 0..64 {
        let left: HashMap<Sym, bool> = syms.iter().map(|&s| (s, rng.gen_bool(0.5))).collect();
        if cut_value(seq, &left) > 0 {
            return left;
        }
    }
    greedy_partition(seq)
}

fn pairing_round(seq: &[Sym], left: &HashMap<Sym, bool>, b: &mut Builder, level: u32) -> Vec<Sym> {
    let mut out = Vec::with_capacity(seq.len());
    let mut i = 0;
    while i < seq.len() {
        if i + 1 < seq.len() && left[&seq[i]] && !left[&seq[i + 1]] {
            out.push(b.intern(Rhs::Pair(seq[i], seq[i + 1]), level));
            i += 2;
        } else {
            out.push(seq[i]);
            i += 1;
        }
    }
    out
}

/// Builds a recompression RLSLP for `text` with the greedy partition.
pub fn recompress(text: &Text) -> Rlslp {
    recompress_bytes(text.as_bytes(), Partition::Greedy)
}

/// Recompression over an arbitrary non-empty byte string.
pub fn recompress_bytes(s: &[u8], partition: Partition) -> Rlslp {
    assert!(!s.is_empty(), "cannot build a grammar for the empty string");
    let mut b = Builder { rhs: Vec::new(), len: Vec::new(), level: Vec::new(), ids: HashMap::new() };
    let mut present = [false; 256];
    for &c in s {
        present[c as usize] = true;
    }
    for c in 0..=255u8 {
        if present[c as usize] {
            b.intern(Rhs::Terminal(c), 0);
        }
    }
    let mut seq: Vec<Sym> = s.iter().map(|c| b.ids[&Rhs::Terminal(*c)]).collect();
    let mut rng = match partition {
        Partition::Random(seed) => Some(ChaCha8Rng::seed_from_u64(seed)),
        Partition::Greedy => None,
    };
    let mut round = 0u32;
    while seq.len() > 1 {
        round += 1;
        seq = if round % 2 == 1 {
            run_length_round(&seq, &mut b, round)
        } else {
            let left = match rng.as_mut() {
                Some(r) => random_partition(&seq, r),
                None => greedy_partition(&seq),
            };
            pairing_round(&seq, &left, &mut b, round)
        };
    }
    let g = Rlslp { rhs: b.rhs, len: b.len, level: b.level, start: seq[0], height: round };
    g.trimmed()
}

/// Decodes the parse and recompresses the result.
pub fn rlslp_from_lz77(parse: &Lz77Parse) -> Result<Rlslp, GrammarError> {
    Ok(recompress(&lz77_decode(parse)?))
}

impl Rlslp {
    pub fn rhs(&self, a: Sym) -> Rhs {
        self.rhs[a as usize]
    }

    pub fn exp_len(&self, a: Sym) -> usize {
        self.len[a as usize]
    }

    /// Recompression round that introduced `a` (0 for terminals).
    pub fn level(&self, a: Sym) -> u32 {
        self.level[a as usize]
    }

    pub fn start(&self) -> Sym {
        self.start
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    /// Number of symbols |𝒮|.
    pub fn size(&self) -> usize {
        self.rhs.len()
    }

    pub fn text_len(&self) -> usize {
        self.len[self.start as usize]
    }

    pub fn symbols(&self) -> impl Iterator<Item = Sym> {
        0..self.rhs.len() as Sym
    }

    /// Drops symbols unreachable from the start and renumbers, keeping order.
    fn trimmed(self) -> Rlslp {
        let mut keep = vec![false; self.rhs.len()];
        keep[self.start as usize] = true;
        for a in (0..self.rhs.len()).rev() {
            if !keep[a] {
                continue;
            }
            match self.rhs[a] {
                Rhs::Terminal(_) => {}
                Rhs::Pair(b, c) => {
                    keep[b as usize] = true;
                    keep[c as usize] = true;
                }
                Rhs::Power(b, _) => keep[b as usize] = true,
            }
        }
        if keep.iter().all(|&k| k) {
            return self;
        }
        let mut map = vec![Sym::MAX; self.rhs.len()];
        let mut g = Rlslp { rhs: Vec::new(), len: Vec::new(), level: Vec::new(), start: 0, height: self.height };
        for a in 0..self.rhs.len() {
            if !keep[a] {
                continue;
            }
            map[a] = g.rhs.len() as Sym;
            g.rhs.push(match self.rhs[a] {
                Rhs::Terminal(c) => Rhs::Terminal(c),
                Rhs::Pair(b, c) => Rhs::Pair(map[b as usize], map[c as usize]),
                Rhs::Power(b, k) => Rhs::Power(map[b as usize], k),
            });
            g.len.push(self.len[a]);
            g.level.push(self.level[a]);
        }
        g.start = map[self.start as usize];
        g
    }

    /// The grammar of the reversed text: every pair swaps its children.
    pub fn reversed(&self) -> Rlslp {
        let rhs = self
            .rhs
            .iter()
            .map(|r| match *r {
                Rhs::Pair(b, c) => Rhs::Pair(c, b),
                other => other,
            })
            .collect();
        Rlslp { rhs, ..self.clone() }
    }

    pub fn expand(&self, a: Sym) -> Vec<u8> {
        let mut out = Vec::with_capacity(self.exp_len(a));
        self.expand_into(a, &mut out);
        out
    }

    fn expand_into(&self, a: Sym, out: &mut Vec<u8>) {
        match self.rhs(a) {
            Rhs::Terminal(c) => out.push(c),
            Rhs::Pair(b, c) => {
                self.expand_into(b, out);
                self.expand_into(c, out);
            }
            Rhs::Power(b, k) => {
                let from = out.len();
                self.expand_into(b, out);
                let piece = self.exp_len(b);
                for _ in 1..k {
                    out.extend_from_within(from..from + piece);
                }
            }
        }
    }

    pub fn expand_text(&self) -> Vec<u8> {
        self.expand(self.start)
    }

    /// Symbol at text position `pos`.
    pub fn char_at(&self, pos: usize) -> u8 {
        let mut node = self.root();
        loop {
            if let Rhs::Terminal(c) = self.rhs(node.sym) {
                return c;
            }
            node = self.child_containing(node, pos).expect("position inside root").0;
        }
    }

    pub fn root(&self) -> NodeHandle {
        NodeHandle { sym: self.start, start: 0, len: self.text_len() }
    }

    pub fn arity(&self, a: Sym) -> usize {
        match self.rhs(a) {
            Rhs::Terminal(_) => 0,
            Rhs::Pair(..) => 2,
            Rhs::Power(_, k) => k as usize,
        }
    }

    pub fn child_at(&self, node: NodeHandle, i: usize) -> Result<NodeHandle, GrammarError> {
        let arity = self.arity(node.sym);
        if i >= arity {
            return Err(GrammarError::ChildIndex { index: i, arity });
        }
        Ok(match self.rhs(node.sym) {
            Rhs::Pair(b, c) => {
                if i == 0 {
                    NodeHandle { sym: b, start: node.start, len: self.exp_len(b) }
                } else {
                    let lb = self.exp_len(b);
                    NodeHandle { sym: c, start: node.start + lb, len: self.exp_len(c) }
                }
            }
            Rhs::Power(b, _) => {
                let lb = self.exp_len(b);
                NodeHandle { sym: b, start: node.start + i * lb, len: lb }
            }
            Rhs::Terminal(_) => unreachable!(),
        })
    }

    pub fn child_containing(&self, node: NodeHandle, pos: usize) -> Result<(NodeHandle, usize), GrammarError> {
        if pos < node.start || pos >= node.end() {
            return Err(GrammarError::Position { pos, start: node.start, end: node.end() });
        }
        let i = match self.rhs(node.sym) {
            Rhs::Terminal(_) => return Err(GrammarError::ChildIndex { index: 0, arity: 0 }),
            Rhs::Pair(b, _) => usize::from(pos - node.start >= self.exp_len(b)),
            Rhs::Power(b, _) => (pos - node.start) / self.exp_len(b),
        };
        Ok((self.child_at(node, i)?, i))
    }

    /// Root-to-leaf path of nodes containing `pos`.
    pub fn path_to(&self, pos: usize) -> Vec<NodeHandle> {
        let mut node = self.root();
        let mut path = vec![node];
        while self.arity(node.sym) > 0 {
            node = self.child_containing(node, pos).expect("pos inside the text").0;
            path.push(node);
        }
        path
    }

    /// Start position of first(A) for every symbol.
    pub fn first_positions(&self) -> Vec<usize> {
        let mut first = vec![usize::MAX; self.size()];
        let mut stack = vec![(self.start, 0usize)];
        while let Some((a, pos)) = stack.pop() {
            if first[a as usize] != usize::MAX {
                continue;
            }
            first[a as usize] = pos;
            match self.rhs(a) {
                Rhs::Terminal(_) => {}
                Rhs::Pair(b, c) => {
                    stack.push((c, pos + self.exp_len(b)));
                    stack.push((b, pos));
                }
                Rhs::Power(b, _) => stack.push((b, pos)),
            }
        }
        first
    }

    pub fn first(&self, a: Sym) -> Result<NodeHandle, GrammarError> {
        let pos = self.first_positions()[a as usize];
        if pos == usize::MAX {
            return Err(GrammarError::UnusedSymbol(a));
        }
        Ok(NodeHandle { sym: a, start: pos, len: self.exp_len(a) })
    }

    /// count(A) for every symbol, accumulated in decreasing id order.
    pub fn counts(&self) -> Vec<u64> {
        let mut count = vec![0u64; self.size()];
        count[self.start as usize] = 1;
        for a in (0..self.size()).rev() {
            let c = count[a];
            match self.rhs[a] {
                Rhs::Terminal(_) => {}
                Rhs::Pair(b, d) => {
                    count[b as usize] += c;
                    count[d as usize] += c;
                }
                Rhs::Power(b, k) => count[b as usize] += c * k as u64,
            }
        }
        count
    }

    pub fn count(&self, a: Sym) -> Result<u64, GrammarError> {
        match self.counts()[a as usize] {
            0 => Err(GrammarError::UnusedSymbol(a)),
            c => Ok(c),
        }
    }

    /// Occurrences of each symbol as a child: (parent, offset inside parent).
    pub fn parent_lists(&self) -> Vec<Vec<(Sym, usize)>> {
        let mut parents = vec![Vec::new(); self.size()];
        for a in self.symbols() {
            match self.rhs(a) {
                Rhs::Terminal(_) => {}
                Rhs::Pair(b, c) => {
                    parents[b as usize].push((a, 0));
                    parents[c as usize].push((a, self.exp_len(b)));
                }
                Rhs::Power(b, k) => {
                    let lb = self.exp_len(b);
                    parents[b as usize].extend((0..k as usize).map(|i| (a, i * lb)));
                }
            }
        }
        parents
    }

    /// All parse-tree nodes labelled `a`, sorted by start.
    pub fn enumerate_nodes(&self, a: Sym) -> Result<Vec<NodeHandle>, GrammarError> {
        let parents = self.parent_lists();
        let mut out = Vec::new();
        let mut stack = vec![(a, 0usize)];
        while let Some((s, off)) = stack.pop() {
            if s == self.start {
                out.push(NodeHandle { sym: a, start: off, len: self.exp_len(a) });
            }
            for &(p, o) in &parents[s as usize] {
                stack.push((p, off + o));
            }
        }
        if out.is_empty() {
            return Err(GrammarError::UnusedSymbol(a));
        }
        out.sort_by_key(|n| n.start);
        Ok(out)
    }

    /// Line format: `<id> T <tok>`, `<id> P <b> <c>`, `<id> R <b> <k>`, then `S <start>`.
    pub fn to_text_format(&self) -> String {
        let mut s = String::new();
        for a in self.symbols() {
            let _ = match self.rhs(a) {
                Rhs::Terminal(c) => writeln!(s, "{a} T {}", encode_symbol(c)),
                Rhs::Pair(b, c) => writeln!(s, "{a} P {b} {c}"),
                Rhs::Power(b, k) => writeln!(s, "{a} R {b} {k}"),
            };
        }
        let _ = writeln!(s, "S {}", self.start);
        s
    }

    /// Parses the line format. Levels are recomputed from the structure and
    /// the height is taken as the largest level.
    pub fn from_text_format(input: &str) -> Result<Rlslp, GrammarError> {
        let mut g = Rlslp { rhs: Vec::new(), len: Vec::new(), level: Vec::new(), start: 0, height: 0 };
        let mut start = None;
        for (idx, line) in input.lines().enumerate() {
            let line_no = idx + 1;
            let err = |msg: &str| GrammarError::Syntax { line: line_no, msg: msg.to_string() };
            let toks: Vec<&str> = line.split_whitespace().collect();
            if toks.is_empty() {
                continue;
            }
            if toks[0] == "S" {
                let s: Sym = toks.get(1).and_then(|t| t.parse().ok()).ok_or_else(|| err("bad start"))?;
                if s as usize >= g.rhs.len() {
                    return Err(err("start refers to an unknown symbol"));
                }
                start = Some(s);
                continue;
            }
            let id: usize = toks[0].parse().map_err(|_| err("bad id"))?;
            if id != g.rhs.len() {
                return Err(err("ids must be consecutive from 0"));
            }
            let num = |i: usize| -> Result<u32, GrammarError> {
                toks.get(i).and_then(|t| t.parse().ok()).ok_or_else(|| err("bad number"))
            };
            let known = |s: u32| -> Result<u32, GrammarError> {
                if (s as usize) < id {
                    Ok(s)
                } else {
                    Err(err("reference to a later symbol"))
                }
            };
            let (r, len, level) = match toks.get(1).copied() {
                Some("T") => {
                    let c = toks.get(2).and_then(|t| decode_symbol(t)).ok_or_else(|| err("bad symbol"))?;
                    (Rhs::Terminal(c), 1, 0)
                }
                Some("P") => {
                    let (b, c) = (known(num(2)?)?, known(num(3)?)?);
                    if b == c {
                        return Err(err("pair with equal children"));
                    }
                    let lv = g.level[b as usize].max(g.level[c as usize]) + 1;
                    (Rhs::Pair(b, c), g.len[b as usize] + g.len[c as usize], lv)
                }
                Some("R") => {
                    let (b, k) = (known(num(2)?)?, num(3)?);
                    if k < 2 {
                        return Err(err("power exponent below 2"));
                    }
                    (Rhs::Power(b, k), g.len[b as usize] * k as usize, g.level[b as usize] + 1)
                }
                _ => return Err(err("expected T, P or R")),
            };
            g.rhs.push(r);
            g.len.push(len);
            g.level.push(level);
        }
        g.start = start.ok_or(GrammarError::Syntax { line: 0, msg: "missing start line".into() })?;
        g.height = g.level.iter().copied().max().unwrap_or(0);
        Ok(g)
    }

    /// Pairs of distinct symbols with equal expansions.
    pub fn injectivity_violations(&self) -> Vec<(Sym, Sym)> {
        let mut seen: HashMap<Vec<u8>, Sym> = HashMap::new();
        let mut bad = Vec::new();
        for a in self.symbols() {
            if let Some(&b) = seen.get(&self.expand(a)) {
                bad.push((b, a));
            } else {
                seen.insert(self.expand(a), a);
            }
        }
        bad
    }

    /// Power symbols whose base is not primitive in the sense per(exp(B)²) = |exp(B)|.
    pub fn primitivity_violations(&self) -> Vec<Sym> {
        self.symbols()
            .filter(|&a| match self.rhs(a) {
                Rhs::Power(b, _) => {
                    let mut e = self.expand(b);
                    let l = e.len();
                    e.extend_from_within(..);
                    shortest_period(&e) != l
                }
                _ => false,
            })
            .collect()
    }

    /// Checks rhs shape, ordering and lengths.
    pub fn structure_ok(&self) -> bool {
        self.symbols().all(|a| match self.rhs(a) {
            Rhs::Terminal(_) => self.exp_len(a) == 1,
            Rhs::Pair(b, c) => b != c && b < a && c < a && self.exp_len(a) == self.exp_len(b) + self.exp_len(c),
            Rhs::Power(b, k) => k >= 2 && b < a && self.exp_len(a) == self.exp_len(b) * k as usize,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::text::lz77_parse;
    use proptest::prelude::*;

    fn fig1() -> Text {
        Text::parse(b"bbabaababababaababa$").unwrap()
    }

    fn brute_nodes(g: &Rlslp) -> Vec<NodeHandle> {
        let mut out = Vec::new();
        let mut stack = vec![g.root()];
        while let Some(n) = stack.pop() {
            out.push(n);
            for i in 0..g.arity(n.sym) {
                stack.push(g.child_at(n, i).unwrap());
            }
        }
        out
    }

    #[test]
    fn unary_text_collapses_in_one_round() {
        let g = recompress_bytes(b"aaaa", Partition::Greedy);
        assert_eq!(g.height(), 1);
        assert_eq!(g.size(), 2);
        let a = g.symbols().find(|&s| g.rhs(s) == Rhs::Terminal(b'a')).unwrap();
        assert_eq!(g.count(a).unwrap(), 4);
        let t = recompress(&Text::parse(b"aaaa$").unwrap());
        assert_eq!(t.expand_text(), b"aaaa\0");
        assert!(t.height() <= 3);
    }

    #[test]
    fn trivial_parse_gives_three_symbols() {
        let t = Text::parse(b"a$").unwrap();
        let g = rlslp_from_lz77(&lz77_parse(&t)).unwrap();
        assert_eq!(g.size(), 3);
        assert_eq!(g.count(g.start()).unwrap(), 1);
    }

    #[test]
    fn figure_one_expands() {
        let t = fig1();
        let g = recompress(&t);
        assert_eq!(g.expand_text(), t.as_bytes());
        assert!(g.structure_ok());
        assert!(g.injectivity_violations().is_empty());
        assert!(g.primitivity_violations().is_empty());
        let h = rlslp_from_lz77(&lz77_parse(&t)).unwrap();
        assert_eq!(h, g);
        let mut rev = t.as_bytes().to_vec();
        rev.reverse();
        assert_eq!(g.reversed().expand_text(), rev);
    }

    #[test]
    fn power_child_arithmetic() {
        let g = Rlslp::from_text_format("0 T a\n1 T b\n2 P 0 1\n3 P 2 0\n4 P 3 1\n5 R 4 3\nS 5\n").unwrap();
        assert_eq!(g.exp_len(4), 4);
        let root = g.root();
        let (child, idx) = g.child_containing(NodeHandle { start: 10, ..root }, 15).unwrap();
        assert_eq!((idx, child.start), (1, 14));
        assert!(g.child_at(root, 3).is_err());
        assert!(g.child_containing(root, 12).is_err());
        let leaf = g.path_to(0).last().copied().unwrap();
        assert_eq!(g.rhs(leaf.sym), Rhs::Terminal(b'a'));
    }

    #[test]
    fn text_format_round_trip_and_errors() {
        let g = recompress(&fig1());
        let back = Rlslp::from_text_format(&g.to_text_format()).unwrap();
        assert_eq!(back.expand_text(), g.expand_text());
        assert_eq!(back.to_text_format(), g.to_text_format());
        assert!(Rlslp::from_text_format("0 T a\n1 P 0 0\nS 1\n").is_err());
        assert!(Rlslp::from_text_format("0 T a\n1 R 0 1\nS 1\n").is_err());
        assert!(Rlslp::from_text_format("0 T a\n1 P 0 2\nS 1\n").is_err());
        assert!(Rlslp::from_text_format("0 T a\n").is_err());
    }

    #[test]
    fn random_partition_is_deterministic_under_seed() {
        let t = fig1();
        let a = recompress_bytes(t.as_bytes(), Partition::Random(7));
        let b = recompress_bytes(t.as_bytes(), Partition::Random(7));
        assert_eq!(a, b);
        assert_eq!(a.expand_text(), t.as_bytes());
    }

    #[test]
    fn unused_symbol_errors() {
        let g = Rlslp::from_text_format("0 T a\n1 T b\n2 P 0 1\nS 0\n").unwrap();
        assert_eq!(g.count(1), Err(GrammarError::UnusedSymbol(1)));
        assert!(g.first(2).is_err());
        assert!(g.enumerate_nodes(1).is_err());
    }

    proptest! {
        #[test]
        fn grammar_invariants(v in proptest::collection::vec(b'a'..b'd', 1..300), seed in any::<u64>(), random in any::<bool>()) {
            let part = if random { Partition::Random(seed) } else { Partition::Greedy };
            let g = recompress_bytes(&v, part);
            prop_assert_eq!(g.expand_text(), v.clone());
            prop_assert!(g.structure_ok());
            prop_assert!(g.injectivity_violations().is_empty());
            prop_assert!(g.primitivity_violations().is_empty());
            let n = v.len() as f64;
            prop_assert!((g.height() as f64) <= 8.0 * n.max(2.0).log2() + 2.0);
        }

        #[test]
        fn node_statistics_match_traversal(v in proptest::collection::vec(b'a'..b'c', 1..120)) {
            let g = recompress_bytes(&v, Partition::Greedy);
            let nodes = brute_nodes(&g);
            let counts = g.counts();
            let firsts = g.first_positions();
            for a in g.symbols() {
                let mut mine: Vec<NodeHandle> = nodes.iter().copied().filter(|n| n.sym == a).collect();
                mine.sort_by_key(|n| n.start);
                prop_assert_eq!(counts[a as usize], mine.len() as u64);
                prop_assert_eq!(firsts[a as usize], mine[0].start);
                prop_assert_eq!(g.enumerate_nodes(a).unwrap(), mine);
            }
        }

        #[test]
        fn children_tile_parent(v in proptest::collection::vec(b'a'..b'c', 1..120), pos in any::<usize>()) {
            let g = recompress_bytes(&v, Partition::Greedy);
            let pos = pos % v.len();
            for node in g.path_to(pos) {
                let mut at = node.start;
                for i in 0..g.arity(node.sym) {
                    let c = g.child_at(node, i).unwrap();
                    prop_assert_eq!(c.start, at);
                    at = c.end();
                }
                if g.arity(node.sym) > 0 {
                    prop_assert_eq!(at, node.end());
                }
            }
            prop_assert_eq!(g.char_at(pos), v[pos]);
        }
    }
}
