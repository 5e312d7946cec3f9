//! Ground-truth string machinery: suffix array, BWT, LCP, LZ77 and friends.
//!
//! Positions are 0-based throughout. The sentinel `$` is stored as byte 0.

use num_rational::Ratio;
use serde::{Deserialize, Serialize};
use std::collections::HashSet;
use std::fmt;
use thiserror::Error;

pub const SENTINEL: u8 = 0;

/// Default ceiling for the exhaustive T∞ enumeration.
pub const DELTA_ENUMERATION_LIMIT: usize = 4096;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum TextError {
    #[error("empty input")]
    Empty,
    #[error("byte 0 at position {0} is reserved for the sentinel")]
    ReservedByte(usize),
    #[error("sentinel `$` at position {0} is not the last symbol")]
    MisplacedSentinel(usize),
    #[error("text is not terminated by the sentinel")]
    Unterminated,
    #[error("exhaustive enumeration refused: n = {n} exceeds the limit {limit}")]
    TooLarge { n: usize, limit: usize },
}

/// A byte string terminated by a unique, lexicographically smallest sentinel.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Text {
    bytes: Vec<u8>,
}

impl Text {
    /// Appends the sentinel to `body`.
    pub fn from_body(body: &[u8]) -> Result<Text, TextError> {
        if let Some(p) = body.iter().position(|&c| c == SENTINEL) {
            return Err(TextError::ReservedByte(p));
        }
        let mut bytes = body.to_vec();
        bytes.push(SENTINEL);
        Ok(Text { bytes })
    }

    /// Takes the internal representation: byte 0 exactly once, at the end.
    pub fn from_terminated(bytes: Vec<u8>) -> Result<Text, TextError> {
        match bytes.iter().position(|&c| c == SENTINEL) {
            None => Err(TextError::Unterminated),
            Some(p) if p + 1 != bytes.len() => Err(TextError::MisplacedSentinel(p)),
            Some(_) => Ok(Text { bytes }),
        }
    }

    /// Loads raw file contents where a literal `$` denotes the sentinel.
    ///
    /// A missing final `$` is appended with a warning.
    pub fn parse(raw: &[u8]) -> Result<Text, TextError> {
        if raw.is_empty() {
            return Err(TextError::Empty);
        }
        if let Some(p) = raw.iter().position(|&c| c == SENTINEL) {
            return Err(TextError::ReservedByte(p));
        }
        let body = match raw.iter().position(|&c| c == b'$') {
            Some(p) if p + 1 == raw.len() => &raw[..p],
            Some(p) => return Err(TextError::MisplacedSentinel(p)),
            None => {
                log::warn!("input lacks the `$` sentinel; appending it");
                raw
            }
        };
        Text::from_body(body)
    }

    pub fn as_bytes(&self) -> &[u8] {
        &self.bytes
    }

    /// The text without its sentinel.
    pub fn body(&self) -> &[u8] {
        &self.bytes[..self.bytes.len() - 1]
    }

    pub fn len(&self) -> usize {
        self.bytes.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Number of distinct symbols, sentinel included.
    pub fn sigma(&self) -> usize {
        let mut seen = [false; 256];
        self.bytes.iter().for_each(|&c| seen[c as usize] = true);
        seen.iter().filter(|&&b| b).count()
    }

    /// The reversed body followed by the sentinel.
    pub fn reversed(&self) -> Text {
        let mut bytes: Vec<u8> = self.body().iter().rev().copied().collect();
        bytes.push(SENTINEL);
        Text { bytes }
    }

    pub fn inf(&self) -> TextInf<'_> {
        TextInf { base: self }
    }

    /// Raw serialization with `$` standing for the sentinel.
    pub fn to_raw(&self) -> Vec<u8> {
        let mut out = self.body().to_vec();
        out.push(b'$');
        out
    }
}

impl fmt::Display for Text {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&display_bytes(&self.bytes))
    }
}

impl fmt::Debug for Text {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Text({:?})", display_bytes(&self.bytes))
    }
}

/// Renders bytes with the sentinel shown as `$`.
pub fn display_bytes(bytes: &[u8]) -> String {
    bytes
        .iter()
        .map(|&c| if c == SENTINEL { '$' } else { c as char })
        .collect()
}

/// Cyclic view of a text: `at(i)` is defined for every integer `i`.
#[derive(Clone, Copy)]
pub struct TextInf<'a> {
    base: &'a Text,
}

impl TextInf<'_> {
    pub fn at(&self, i: i64) -> u8 {
        let n = self.base.len() as i64;
        self.base.bytes[i.rem_euclid(n) as usize]
    }

    pub fn substring(&self, i: i64, m: usize) -> Vec<u8> {
        (0..m as i64).map(|d| self.at(i + d)).collect()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SuffixArray {
    pub sa: Vec<usize>,
    pub isa: Vec<usize>,
}

/// Prefix doubling; deterministic and fast enough for desk-scale inputs.
pub fn build_suffix_array(text: &Text) -> SuffixArray {
    let s = text.as_bytes();
    let n = s.len();
    let mut sa: Vec<usize> = (0..n).collect();
    let mut rank: Vec<usize> = s.iter().map(|&c| c as usize).collect();
    let mut tmp = vec![0usize; n];
    let mut k = 1;
    loop {
        let key = |i: usize| (rank[i], if i + k < n { rank[i + k] + 1 } else { 0 });
        sa.sort_unstable_by_key(|&i| key(i));
        tmp[sa[0]] = 0;
        for w in 1..n {
            tmp[sa[w]] = tmp[sa[w - 1]] + usize::from(key(sa[w - 1]) != key(sa[w]));
        }
        std::mem::swap(&mut rank, &mut tmp);
        if rank[sa[n - 1]] == n - 1 || k >= n {
            break;
        }
        k *= 2;
    }
    let mut isa = vec![0; n];
    for (r, &p) in sa.iter().enumerate() {
        isa[p] = r;
    }
    SuffixArray { sa, isa }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Run {
    pub sym: u8,
    pub len: usize,
}

/// Run-length encoded BWT.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BwtRuns {
    pub runs: Vec<Run>,
}

impl BwtRuns {
    pub fn from_symbols(bwt: &[u8]) -> BwtRuns {
        let mut runs: Vec<Run> = Vec::new();
        for &c in bwt {
            match runs.last_mut() {
                Some(last) if last.sym == c => last.len += 1,
                _ => runs.push(Run { sym: c, len: 1 }),
            }
        }
        BwtRuns { runs }
    }

    pub fn r(&self) -> usize {
        self.runs.len()
    }

    pub fn n(&self) -> usize {
        self.runs.iter().map(|r| r.len).sum()
    }

    /// Run starts (0-based) paired with run symbols.
    pub fn starts(&self) -> Vec<(usize, u8)> {
        let mut pos = 0;
        self.runs
            .iter()
            .map(|r| {
                let s = (pos, r.sym);
                pos += r.len;
                s
            })
            .collect()
    }

    pub fn decode(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(self.n());
        for r in &self.runs {
            out.extend(std::iter::repeat_n(r.sym, r.len));
        }
        out
    }
}

impl fmt::Display for BwtRuns {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for r in &self.runs {
            let c = if r.sym == SENTINEL { '$' } else { r.sym as char };
            write!(f, "{}^{}", c, r.len)?;
        }
        Ok(())
    }
}

pub fn bwt_symbols(text: &Text, sa: &SuffixArray) -> Vec<u8> {
    let s = text.as_bytes();
    let n = s.len();
    sa.sa.iter().map(|&p| s[(p + n - 1) % n]).collect()
}

pub fn build_bwt_runs(text: &Text, sa: &SuffixArray) -> BwtRuns {
    BwtRuns::from_symbols(&bwt_symbols(text, sa))
}

/// Inverts a BWT of a sentinel-terminated text via the LF mapping.
pub fn invert_bwt(bwt: &[u8]) -> Option<Vec<u8>> {
    let n = bwt.len();
    let mut counts = [0usize; 257];
    for &c in bwt {
        counts[c as usize + 1] += 1;
    }
    for c in 1..257 {
        counts[c] += counts[c - 1];
    }
    let mut seen = [0usize; 256];
    let mut lf = vec![0usize; n];
    for (i, &c) in bwt.iter().enumerate() {
        lf[i] = counts[c as usize] + seen[c as usize];
        seen[c as usize] += 1;
    }
    if n == 0 || bwt.iter().filter(|&&c| c == SENTINEL).count() != 1 {
        return None;
    }
    // Row 0 is the suffix `$`, so BWT[0] is the last body symbol.
    let mut out = vec![0u8; n];
    out[n - 1] = SENTINEL;
    let mut row = 0;
    for k in (0..n - 1).rev() {
        out[k] = bwt[row];
        row = lf[row];
    }
    Some(out)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LcpArray {
    pub lcp: Vec<usize>,
    pub irreducible: Vec<bool>,
}

impl LcpArray {
    pub fn irreducible_values(&self) -> Vec<usize> {
        self.lcp
            .iter()
            .zip(&self.irreducible)
            .filter(|(_, &irr)| irr)
            .map(|(&v, _)| v)
            .collect()
    }
}

/// Kasai's algorithm plus the irreducibility mask.
pub fn build_lcp(text: &Text, sa: &SuffixArray, bwt: &BwtRuns) -> LcpArray {
    let s = text.as_bytes();
    let n = s.len();
    let mut lcp = vec![0usize; n];
    let mut h = 0usize;
    for i in 0..n {
        let r = sa.isa[i];
        if r == 0 {
            h = 0;
            continue;
        }
        let j = sa.sa[r - 1];
        while i + h < n && j + h < n && s[i + h] == s[j + h] {
            h += 1;
        }
        lcp[r] = h;
        h = h.saturating_sub(1);
    }
    let mut irreducible = vec![false; n];
    for (start, _) in bwt.starts() {
        irreducible[start] = true;
    }
    LcpArray { lcp, irreducible }
}

/// Length of the longest common prefix of the suffixes at `i` and `j`.
pub fn lce_naive(text: &[u8], i: usize, j: usize) -> usize {
    text[i..].iter().zip(&text[j..]).take_while(|(a, b)| a == b).count()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Phrase {
    Literal { sym: u8 },
    Copy { src: usize, len: usize },
}

impl Phrase {
    pub fn len(&self) -> usize {
        match *self {
            Phrase::Literal { .. } => 1,
            Phrase::Copy { len, .. } => len,
        }
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ParseError {
    #[error("phrase {index} at position {pos} copies from {src}, which is not earlier")]
    BadSource { index: usize, pos: usize, src: usize },
    #[error("phrase {index} has zero length")]
    EmptyPhrase { index: usize },
    #[error("malformed record on line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("decoded text is invalid: {0}")]
    Text(#[from] TextError),
}

/// Greedy LZ77 parsing. `ends[i]` is the last position of phrase `i`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Lz77Parse {
    pub phrases: Vec<Phrase>,
    pub ends: Vec<usize>,
}

impl Lz77Parse {
    pub fn from_phrases(phrases: Vec<Phrase>) -> Lz77Parse {
        let mut ends = Vec::with_capacity(phrases.len());
        let mut pos = 0;
        for p in &phrases {
            pos += p.len();
            ends.push(pos - 1);
        }
        Lz77Parse { phrases, ends }
    }

    pub fn z(&self) -> usize {
        self.phrases.len()
    }

    pub fn n(&self) -> usize {
        self.ends.last().map_or(0, |&e| e + 1)
    }

    /// Line format: `L <char>` or `C <src> <len>`, with 1-based sources.
    pub fn to_text_format(&self) -> String {
        let mut out = String::new();
        for p in &self.phrases {
            match *p {
                Phrase::Literal { sym } => out.push_str(&format!("L {}\n", encode_symbol(sym))),
                Phrase::Copy { src, len } => out.push_str(&format!("C {} {}\n", src + 1, len)),
            }
        }
        out
    }

    pub fn from_text_format(input: &str) -> Result<Lz77Parse, ParseError> {
        let mut phrases = Vec::new();
        for (k, line) in input.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let syntax = |msg: &str| ParseError::Syntax { line: k + 1, msg: msg.to_string() };
            let mut parts = line.split_whitespace();
            match parts.next() {
                Some("L") => {
                    let tok = parts.next().ok_or_else(|| syntax("missing symbol"))?;
                    let sym = decode_symbol(tok).ok_or_else(|| syntax("bad symbol"))?;
                    phrases.push(Phrase::Literal { sym });
                }
                Some("C") => {
                    let src: usize = parts
                        .next()
                        .and_then(|t| t.parse().ok())
                        .ok_or_else(|| syntax("bad source"))?;
                    let len: usize = parts
                        .next()
                        .and_then(|t| t.parse().ok())
                        .ok_or_else(|| syntax("bad length"))?;
                    if src == 0 {
                        return Err(syntax("sources are 1-based"));
                    }
                    phrases.push(Phrase::Copy { src: src - 1, len });
                }
                _ => return Err(syntax("expected `L` or `C`")),
            }
            if parts.next().is_some() {
                return Err(syntax("trailing tokens"));
            }
        }
        Ok(Lz77Parse::from_phrases(phrases))
    }
}

impl fmt::Display for Lz77Parse {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .phrases
            .iter()
            .map(|p| match *p {
                Phrase::Literal { sym } => {
                    let c = if sym == SENTINEL { '$' } else { sym as char };
                    format!("({},0)", c)
                }
                Phrase::Copy { src, len } => format!("({},{})", src + 1, len),
            })
            .collect();
        f.write_str(&parts.join(","))
    }
}

/// Symbol token used in line-based formats: printable ASCII as itself,
/// the sentinel as `$`, everything else as `\xHH`.
pub fn encode_symbol(sym: u8) -> String {
    match sym {
        SENTINEL => "$".to_string(),
        b'$' | b'\\' => format!("\\x{:02x}", sym),
        0x21..=0x7e => (sym as char).to_string(),
        _ => format!("\\x{:02x}", sym),
    }
}

pub fn decode_symbol(tok: &str) -> Option<u8> {
    if tok == "$" {
        return Some(SENTINEL);
    }
    if let Some(hex) = tok.strip_prefix("\\x") {
        return u8::from_str_radix(hex, 16).ok();
    }
    let b = tok.as_bytes();
    (b.len() == 1).then(|| b[0])
}

/// Greedy longest-previous-factor parsing.
///
/// The source of each phrase is the nearest lexicographic neighbour (in
/// suffix order) among earlier positions with maximal overlap; on a tie
/// the later position wins.
pub fn lz77_parse(text: &Text) -> Lz77Parse {
    let s = text.as_bytes();
    let n = s.len();
    let sa = build_suffix_array(text);
    // psv[r] / nsv[r]: nearest rank above / below r whose position is smaller.
    let mut psv = vec![usize::MAX; n];
    let mut nsv = vec![usize::MAX; n];
    let mut stack: Vec<usize> = Vec::new();
    for r in 0..n {
        while let Some(&top) = stack.last() {
            if sa.sa[top] > sa.sa[r] {
                nsv[top] = r;
                stack.pop();
            } else {
                break;
            }
        }
        psv[r] = stack.last().copied().unwrap_or(usize::MAX);
        stack.push(r);
    }
    let mut phrases = Vec::new();
    let mut i = 0;
    while i < n {
        let r = sa.isa[i];
        let mut best = (0usize, 0usize);
        for cand in [psv[r], nsv[r]] {
            if cand == usize::MAX {
                continue;
            }
            let j = sa.sa[cand];
            let l = lce_naive(s, i, j);
            if l > best.0 || (l == best.0 && l > 0 && j > best.1) {
                best = (l, j);
            }
        }
        if best.0 == 0 {
            phrases.push(Phrase::Literal { sym: s[i] });
            i += 1;
        } else {
            phrases.push(Phrase::Copy { src: best.1, len: best.0 });
            i += best.0;
        }
    }
    Lz77Parse::from_phrases(phrases)
}

pub fn lz77_decode(parse: &Lz77Parse) -> Result<Text, ParseError> {
    let mut out: Vec<u8> = Vec::new();
    for (index, p) in parse.phrases.iter().enumerate() {
        match *p {
            Phrase::Literal { sym } => out.push(sym),
            Phrase::Copy { src, len } => {
                let pos = out.len();
                if len == 0 {
                    return Err(ParseError::EmptyPhrase { index });
                }
                if src >= pos {
                    return Err(ParseError::BadSource { index, pos, src });
                }
                for d in 0..len {
                    let c = out[src + d];
                    out.push(c);
                }
            }
        }
    }
    Ok(Text::from_terminated(out)?)
}

/// Counts |S_m| for m = 1..=n, where S_m is the set of distinct length-m
/// substrings of T∞. Entry `m - 1` holds |S_m|.
///
/// Because the sentinel is unique, rotations sort like suffixes and two
/// adjacent rotations share exactly their LCP value.
pub fn distinct_counts(text: &Text) -> Vec<usize> {
    let n = text.len();
    let sa = build_suffix_array(text);
    let bwt = build_bwt_runs(text, &sa);
    let lcp = build_lcp(text, &sa, &bwt);
    let mut below = vec![0usize; n + 2];
    for &v in &lcp.lcp[1..] {
        below[v + 1] += 1;
    }
    // below[m] after prefix sums = #{i >= 1 : lcp[i] < m}
    for m in 1..=n + 1 {
        below[m] += below[m - 1];
    }
    (1..=n).map(|m| 1 + below[m.min(n + 1)]).collect()
}

/// Substring complexity δ = max_m |S_m| / m, with the smallest maximizing m.
pub fn substring_complexity(text: &Text) -> (Ratio<u64>, usize) {
    let counts = distinct_counts(text);
    best_ratio(&counts)
}

/// The same quantity computed by literal enumeration of T∞ substrings.
/// Refuses inputs longer than `limit`.
pub fn substring_complexity_enumerated(
    text: &Text,
    limit: usize,
) -> Result<(Ratio<u64>, usize), TextError> {
    let n = text.len();
    if n > limit {
        return Err(TextError::TooLarge { n, limit });
    }
    let inf = text.inf();
    let doubled: Vec<u8> = (0..2 * n as i64).map(|i| inf.at(i)).collect();
    let counts: Vec<usize> = (1..=n)
        .map(|m| {
            let set: HashSet<&[u8]> = (0..n).map(|i| &doubled[i..i + m]).collect();
            set.len()
        })
        .collect();
    Ok(best_ratio(&counts))
}

fn best_ratio(counts: &[usize]) -> (Ratio<u64>, usize) {
    let mut best = (Ratio::new(0u64, 1), 1usize);
    for (k, &c) in counts.iter().enumerate() {
        let q = Ratio::new(c as u64, k as u64 + 1);
        if q > best.0 {
            best = (q, k + 1);
        }
    }
    best
}

/// Shortest period via the KMP failure function.
pub fn shortest_period(s: &[u8]) -> usize {
    if s.is_empty() {
        return 0;
    }
    let mut fail = vec![0usize; s.len()];
    let mut k = 0;
    for i in 1..s.len() {
        while k > 0 && s[i] != s[k] {
            k = fail[k - 1];
        }
        if s[i] == s[k] {
            k += 1;
        }
        fail[i] = k;
    }
    s.len() - fail[s.len() - 1]
}

/// `true` iff per(s) ≤ |s|/2.
pub fn is_periodic(s: &[u8]) -> bool {
    !s.is_empty() && 2 * shortest_period(s) <= s.len()
}

/// Bundles the uncompressed structures for one text.
#[derive(Clone, Debug)]
pub struct Analysis {
    pub sa: SuffixArray,
    pub bwt: BwtRuns,
    pub lcp: LcpArray,
    pub parse: Lz77Parse,
}

impl Analysis {
    pub fn of(text: &Text) -> Analysis {
        let sa = build_suffix_array(text);
        let bwt = build_bwt_runs(text, &sa);
        let lcp = build_lcp(text, &sa, &bwt);
        let parse = lz77_parse(text);
        Analysis { sa, bwt, lcp, parse }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    pub(crate) fn fig1() -> Text {
        Text::parse(b"bbabaababababaababa$").unwrap()
    }

    fn naive_sa(s: &[u8]) -> Vec<usize> {
        let mut sa: Vec<usize> = (0..s.len()).collect();
        sa.sort_by(|&a, &b| s[a..].cmp(&s[b..]));
        sa
    }

    #[test]
    fn figure_one_suffix_array() {
        let t = fig1();
        let sa = build_suffix_array(&t);
        let one_based: Vec<usize> = sa.sa.iter().map(|&p| p + 1).collect();
        assert_eq!(
            one_based,
            vec![20, 19, 14, 5, 17, 12, 3, 15, 10, 8, 6, 18, 13, 4, 16, 11, 2, 9, 7, 1]
        );
    }

    #[test]
    fn figure_one_bwt_and_lcp() {
        let t = fig1();
        let a = Analysis::of(&t);
        assert_eq!(a.bwt.to_string(), "a^1b^6a^1b^2a^6b^1a^2$^1");
        assert_eq!(a.bwt.r(), 8);
        assert_eq!(
            a.lcp.lcp,
            vec![0, 0, 1, 6, 1, 3, 8, 3, 5, 5, 7, 0, 2, 7, 2, 4, 9, 4, 6, 1]
        );
        let mut irr = a.lcp.irreducible_values();
        irr.sort_unstable();
        assert_eq!(irr, vec![0, 0, 1, 3, 4, 5, 7, 9]);
    }

    #[test]
    fn figure_one_lz77() {
        let t = fig1();
        let p = lz77_parse(&t);
        assert_eq!(p.to_string(), "(b,0),(1,1),(a,0),(2,2),(3,3),(7,6),(10,5),($,0)");
        assert_eq!(p.z(), 8);
        assert_eq!(lz77_decode(&p).unwrap(), t);
        assert_eq!(lce_naive(t.as_bytes(), 2, 14), 3);
    }

    #[test]
    fn trivial_text() {
        let t = Text::from_body(b"a").unwrap();
        let a = Analysis::of(&t);
        assert_eq!(a.sa.sa, vec![1, 0]);
        assert_eq!(a.bwt.to_string(), "a^1$^1");
        assert_eq!(a.lcp.lcp, vec![0, 0]);
        assert_eq!(a.lcp.irreducible, vec![true, true]);
        assert_eq!(a.parse.to_string(), "(a,0),($,0)");
        let (d, m) = substring_complexity(&t);
        assert_eq!((d, m), (Ratio::from_integer(2), 1));
    }

    #[test]
    fn unary_text_bwt() {
        let t = Text::from_body(b"aaaa").unwrap();
        let a = Analysis::of(&t);
        assert_eq!(display_bytes(&a.bwt.decode()), "aaaa$");
        assert_eq!(a.bwt.decode(), bwt_symbols(&t, &a.sa));
    }

    #[test]
    fn loading_rules() {
        assert_eq!(Text::parse(b""), Err(TextError::Empty));
        assert_eq!(Text::parse(b"a$b$"), Err(TextError::MisplacedSentinel(1)));
        assert_eq!(Text::parse(b"a\0b"), Err(TextError::ReservedByte(1)));
        assert_eq!(Text::parse(b"ab").unwrap(), Text::parse(b"ab$").unwrap());
        assert_eq!(Text::parse(b"$").unwrap().len(), 1);
    }

    #[test]
    fn decode_rejects_forward_reference() {
        let p = Lz77Parse::from_phrases(vec![
            Phrase::Literal { sym: b'a' },
            Phrase::Copy { src: 1, len: 1 },
        ]);
        assert!(matches!(lz77_decode(&p), Err(ParseError::BadSource { .. })));
        let only = Lz77Parse::from_phrases(vec![Phrase::Literal { sym: SENTINEL }]);
        assert_eq!(lz77_decode(&only).unwrap().len(), 1);
    }

    #[test]
    fn parse_text_format_round_trip() {
        let p = lz77_parse(&fig1());
        let s = p.to_text_format();
        assert!(s.starts_with("L b\nC 1 1\n"));
        assert_eq!(Lz77Parse::from_text_format(&s).unwrap(), p);
        let json = serde_json::to_string(&p).unwrap();
        assert_eq!(serde_json::from_str::<Lz77Parse>(&json).unwrap(), p);
    }

    #[test]
    fn periods() {
        assert_eq!(shortest_period(b"bababa"), 2);
        assert_eq!(shortest_period(b"abaab"), 3);
        assert!(!is_periodic(b"abaababa"));
        assert!(is_periodic(b"abab"));
    }

    #[test]
    fn figure_one_delta_is_bounded_by_r_and_z() {
        let t = fig1();
        let (d, _) = substring_complexity(&t);
        assert!(d <= Ratio::from_integer(8));
        assert_eq!(substring_complexity_enumerated(&t, 4096).unwrap(), substring_complexity(&t));
    }

    fn text_strategy(max_len: usize, sigma: u8) -> impl Strategy<Value = Text> {
        proptest::collection::vec(0..sigma, 0..max_len)
            .prop_map(|v| Text::from_body(&v.iter().map(|c| b'a' + c).collect::<Vec<_>>()).unwrap())
    }

    fn naive_period(s: &[u8]) -> usize {
        (1..=s.len()).find(|&p| (p..s.len()).all(|i| s[i] == s[i - p])).unwrap()
    }

    fn gcd(a: usize, b: usize) -> usize {
        if b == 0 { a } else { gcd(b, a % b) }
    }

    proptest! {
        #[test]
        fn sa_matches_sorting_suffixes(t in text_strategy(64, 3)) {
            prop_assert_eq!(build_suffix_array(&t).sa, naive_sa(t.as_bytes()));
        }

        #[test]
        fn lcp_matches_pairwise_comparison(t in text_strategy(64, 3)) {
            let a = Analysis::of(&t);
            let s = t.as_bytes();
            for r in 1..t.len() {
                prop_assert_eq!(a.lcp.lcp[r], lce_naive(s, a.sa.sa[r], a.sa.sa[r - 1]));
            }
            prop_assert_eq!(a.lcp.irreducible.iter().filter(|&&b| b).count(), a.bwt.r());
        }

        #[test]
        fn bwt_inverts(t in text_strategy(80, 4)) {
            let a = Analysis::of(&t);
            prop_assert_eq!(a.bwt.decode(), bwt_symbols(&t, &a.sa));
            prop_assert_eq!(invert_bwt(&a.bwt.decode()).unwrap(), t.as_bytes().to_vec());
        }

        #[test]
        fn lz77_is_greedy_and_decodes(t in text_strategy(80, 3)) {
            let p = lz77_parse(&t);
            prop_assert_eq!(&lz77_decode(&p).unwrap(), &t);
            let s = t.as_bytes();
            let mut pos = 0;
            for ph in &p.phrases {
                let best = (0..pos).map(|j| lce_naive(s, pos, j)).max().unwrap_or(0);
                match *ph {
                    Phrase::Literal { .. } => prop_assert_eq!(best, 0),
                    Phrase::Copy { src, len } => {
                        prop_assert!(src < pos);
                        prop_assert_eq!(&s[src..src + len], &s[pos..pos + len]);
                        prop_assert_eq!(len, best);
                    }
                }
                pos += ph.len();
            }
        }

        #[test]
        fn delta_matches_enumeration(t in text_strategy(40, 3)) {
            prop_assert_eq!(
                substring_complexity(&t),
                substring_complexity_enumerated(&t, DELTA_ENUMERATION_LIMIT).unwrap()
            );
        }

        #[test]
        fn substring_counts_bounded_by_mz(t in text_strategy(60, 3)) {
            let z = lz77_parse(&t).z();
            let (delta, _) = substring_complexity(&t);
            for (k, &c) in distinct_counts(&t).iter().enumerate() {
                let m = k + 1;
                prop_assert!(c <= m * z);
                prop_assert!(Ratio::from_integer(c as u64) <= delta * Ratio::from_integer(m as u64));
            }
        }

        #[test]
        fn period_matches_naive(v in proptest::collection::vec(0u8..2, 1..40)) {
            prop_assert_eq!(shortest_period(&v), naive_period(&v));
        }

        #[test]
        fn fine_wilf(base in proptest::collection::vec(0u8..2, 1..6), reps in 2usize..8) {
            let s: Vec<u8> = base.iter().cycle().take(base.len() * reps + 1).copied().collect();
            let periods: Vec<usize> = (1..=s.len())
                .filter(|&p| (p..s.len()).all(|i| s[i] == s[i - p]))
                .collect();
            for &p in &periods {
                for &q in &periods {
                    if p + q - gcd(p, q) <= s.len() {
                        prop_assert!(periods.contains(&gcd(p, q)));
                    }
                }
            }
        }
    }
}
