//! Lower-bound string families: the T_{Δ,N} construction and de Bruijn texts.

use crate::measures::irreducible_lcp_sum;
use crate::text::{build_bwt_runs, build_suffix_array, substring_complexity, Text};
use num_rational::Ratio;
use serde::Serialize;
use thiserror::Error;

/// Largest σ^k a de Bruijn request may produce.
pub const DE_BRUIJN_LIMIT: u64 = 1 << 24;

/// Alphabets larger than this cannot be mapped to bytes.
pub const MAX_SIGMA: usize = 219;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum LbError {
    #[error("{0} is not a power of two")]
    NotPowerOfTwo(usize),
    #[error("parameters must satisfy 4 <= delta <= N (got delta = {delta}, N = {n})")]
    OutOfRange { delta: usize, n: usize },
    #[error("generator needs the {expected} regime (delta log delta {op} N)")]
    Regime { expected: &'static str, op: &'static str },
    #[error("alphabet of size {0} does not fit in bytes")]
    AlphabetTooLarge(usize),
    #[error("sigma^k = {0} exceeds the size guard")]
    TooLarge(u64),
    #[error("de Bruijn sequences need sigma >= 2 and k >= 1")]
    BadDeBruijn,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct LbParams {
    pub delta: usize,
    pub n: usize,
}

fn log2_exact(x: usize) -> u32 {
    x.trailing_zeros()
}

impl LbParams {
    pub fn new(delta: usize, n: usize) -> Result<LbParams, LbError> {
        for v in [delta, n] {
            if !v.is_power_of_two() {
                return Err(LbError::NotPowerOfTwo(v));
            }
        }
        if delta < 4 || delta > n {
            return Err(LbError::OutOfRange { delta, n });
        }
        Ok(LbParams { delta, n })
    }

    pub fn log_delta(&self) -> u32 {
        log2_exact(self.delta)
    }

    /// Δ log Δ ≤ N.
    pub fn is_small_regime(&self) -> bool {
        self.delta * self.log_delta() as usize <= self.n
    }

    /// The block lengths ℓ = 2^k with log Δ ≤ ℓ ≤ N/Δ.
    pub fn block_lengths(&self) -> Vec<usize> {
        let lo = self.log_delta() as usize;
        let hi = self.n / self.delta;
        (0..usize::BITS).map(|k| 1usize << k).filter(|&l| l >= lo && l <= hi).collect()
    }

    /// Number of (S, P) pairs counted by the run lower bound.
    pub fn pair_count(&self) -> i64 {
        let (d, l) = (self.delta as i64, self.log_delta() as i64);
        d * (l - 3) + l + 3
    }

    /// Exact lower bound on r for the small-Δ family.
    pub fn r_lower_bound(&self) -> i64 {
        let levels = log2_exact(self.n / self.delta) as i64 - ceil_log2(self.log_delta() as usize) as i64 + 1;
        self.pair_count() * levels
    }

    /// Exact lower bound on the irreducible LCP sum for the small-Δ family.
    pub fn sum_lower_bound(&self) -> i64 {
        self.pair_count() * (self.n / self.delta).next_power_of_two() as i64
    }
}

fn ceil_log2(x: usize) -> u32 {
    x.next_power_of_two().trailing_zeros()
}

fn bin(x: usize, width: u32) -> impl Iterator<Item = u8> {
    (0..width).rev().map(move |b| if (x >> b) & 1 == 1 { b'1' } else { b'0' })
}

/// B_ℓ = ⊙_{i<Δ} 2^ℓ · bin_{log Δ}(i).
pub fn block(ell: usize, delta: usize) -> Vec<u8> {
    let w = log2_exact(delta);
    let mut out = Vec::with_capacity(delta * (ell + w as usize));
    for i in 0..delta {
        out.extend(std::iter::repeat_n(b'2', ell));
        out.extend(bin(i, w));
    }
    out
}

pub fn gen_small_delta(p: &LbParams) -> Result<Text, LbError> {
    if !p.is_small_regime() {
        return Err(LbError::Regime { expected: "small", op: "<=" });
    }
    let mut body = Vec::new();
    for ell in p.block_lengths() {
        body.extend(block(ell, p.delta));
    }
    Ok(Text::from_body(&body).expect("family alphabet excludes the sentinel"))
}

/// De Bruijn sequence of order `k` over `[0..sigma)` as the concatenation of
/// Lyndon words whose length divides `k`, in lexicographic order.
pub fn gen_de_bruijn(sigma: usize, k: usize) -> Result<Vec<u32>, LbError> {
    if sigma < 2 || k < 1 {
        return Err(LbError::BadDeBruijn);
    }
    let total = (sigma as u64).checked_pow(k as u32).unwrap_or(u64::MAX);
    if total > DE_BRUIJN_LIMIT {
        return Err(LbError::TooLarge(total));
    }
    let mut seq = Vec::with_capacity(total as usize);
    let mut a = vec![0u32; k + 1];
    fkm(1, 1, k, sigma as u32, &mut a, &mut seq);
    Ok(seq)
}

fn fkm(t: usize, p: usize, k: usize, sigma: u32, a: &mut [u32], seq: &mut Vec<u32>) {
    if t > k {
        if k.is_multiple_of(p) {
            seq.extend_from_slice(&a[1..=p]);
        }
        return;
    }
    a[t] = a[t - p];
    fkm(t + 1, p, k, sigma, a, seq);
    for j in a[t - p] + 1..sigma {
        a[t] = j;
        fkm(t + 1, t, k, sigma, a, seq);
    }
}

/// Order-preserving byte for value `v` of an alphabet of size `sigma`.
pub fn symbol_for(v: usize, sigma: usize) -> Result<u8, LbError> {
    let base = match sigma {
        0..=10 => b'0',
        11..=26 => b'a',
        s if s <= MAX_SIGMA => b'%',
        s => return Err(LbError::AlphabetTooLarge(s)),
    };
    Ok(base + v as u8)
}

fn map_values(values: &[u32], sigma: usize) -> Result<Text, LbError> {
    let body = values
        .iter()
        .map(|&v| symbol_for(v as usize, sigma))
        .collect::<Result<Vec<u8>, _>>()?;
    Ok(Text::from_body(&body).expect("mapped symbols are nonzero"))
}

/// A de Bruijn sequence followed by the sentinel.
pub fn de_bruijn_text(sigma: usize, k: usize) -> Result<Text, LbError> {
    if sigma > MAX_SIGMA {
        return Err(LbError::AlphabetTooLarge(sigma));
    }
    map_values(&gen_de_bruijn(sigma, k)?, sigma)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum LargeCase {
    /// One de Bruijn sequence with |Σ| = ⌊N^{1/k}⌋, k = N/Δ.
    Single,
    /// Prefix of T_0 T_1 ⋯ over disjoint alphabets of size 2^a.
    Concatenated,
}

#[derive(Clone, Debug, Serialize)]
pub struct LargeDelta {
    #[serde(skip)]
    pub text: Text,
    pub case: LargeCase,
    /// Alphabet size of each de Bruijn component.
    pub sigma: usize,
    pub k: usize,
    /// Δ′ after the rounding policy (may be fractional in the concatenated case).
    pub adjusted_delta: f64,
    pub adjusted_n: usize,
}

fn integer_root(n: usize, k: u32) -> usize {
    let mut s = (n as f64).powf(1.0 / k as f64).round() as usize + 1;
    while s > 0 && (s as u128).pow(k) > n as u128 {
        s -= 1;
    }
    s
}

/// Boundary between the two large-Δ cases: N log log N / log N.
pub fn large_case_threshold(n: usize) -> f64 {
    let l = (n as f64).log2();
    n as f64 * l.log2() / l
}

pub fn gen_large_delta(p: &LbParams) -> Result<LargeDelta, LbError> {
    if p.is_small_regime() {
        return Err(LbError::Regime { expected: "large", op: ">" });
    }
    let log_n = log2_exact(p.n) as usize;
    if p.delta as f64 >= large_case_threshold(p.n) {
        // Δ and N are powers of two, so k = N/Δ is already integral.
        let k = p.n / p.delta;
        let sigma = integer_root(p.n, k as u32);
        if sigma > MAX_SIGMA {
            return Err(LbError::AlphabetTooLarge(sigma));
        }
        if sigma < 2 {
            return Err(LbError::BadDeBruijn);
        }
        let text = map_values(&gen_de_bruijn(sigma, k)?, sigma)?;
        return Ok(LargeDelta {
            text,
            case: LargeCase::Single,
            sigma,
            k,
            adjusted_delta: p.delta as f64,
            adjusted_n: p.n,
        });
    }
    // Round Δ up to a multiple a·N/log N with a ≥ 2.
    let a = ((p.delta * log_n).div_ceil(p.n)).max(2);
    let sigma = 1usize << a;
    let k = (log_n / a).max(1);
    let component = gen_de_bruijn(sigma, k)?;
    let n_prime = component.len();
    let parts = p.n.div_ceil(n_prime);
    let total_sigma = parts * sigma;
    if total_sigma > MAX_SIGMA {
        return Err(LbError::AlphabetTooLarge(total_sigma));
    }
    let mut values = Vec::with_capacity(p.n);
    'outer: for j in 0..parts {
        for &v in &component {
            if values.len() == p.n {
                break 'outer;
            }
            values.push(j as u32 * sigma as u32 + v);
        }
    }
    let text = map_values(&values, total_sigma)?;
    Ok(LargeDelta {
        text,
        case: LargeCase::Concatenated,
        sigma,
        k,
        adjusted_delta: a as f64 * p.n as f64 / log_n as f64,
        adjusted_n: p.n,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct FamilyReport {
    pub params: LbParams,
    pub small_regime: bool,
    pub degenerate: bool,
    pub n: usize,
    pub delta_num: u64,
    pub delta_den: u64,
    pub r: usize,
    pub irreducible_sum: u64,
    /// Counting bounds; `None` outside the small regime.
    pub r_bound: Option<i64>,
    pub sum_bound: Option<i64>,
    pub r_bound_holds: bool,
    pub sum_bound_holds: bool,
    pub n_in_band: bool,
    pub delta_in_band: bool,
}

/// Measures a generated text and checks the family's claims.
///
/// `band` is the multiplicative tolerance for n/N and δ/Δ.
pub fn verify_family(text: &Text, p: &LbParams, band: f64) -> FamilyReport {
    let sa = build_suffix_array(text);
    let r = build_bwt_runs(text, &sa).r();
    let (delta, _) = substring_complexity(text);
    let irreducible_sum = irreducible_lcp_sum(text, 0, None);
    let small = p.is_small_regime();
    let (r_bound, sum_bound) = if small {
        (Some(p.r_lower_bound()), Some(p.sum_lower_bound()))
    } else {
        (None, None)
    };
    let within = |x: f64| x >= 1.0 / band && x <= band;
    let d = *delta.numer() as f64 / *delta.denom() as f64;
    FamilyReport {
        params: *p,
        small_regime: small,
        degenerate: p.delta == p.n,
        n: text.len(),
        delta_num: *delta.numer(),
        delta_den: *delta.denom(),
        r,
        irreducible_sum,
        r_bound,
        sum_bound,
        r_bound_holds: r_bound.is_none_or(|b| r as i64 >= b),
        sum_bound_holds: sum_bound.is_none_or(|b| irreducible_sum as i64 >= b),
        n_in_band: within(text.len() as f64 / p.n as f64),
        delta_in_band: within(d / p.delta as f64),
    }
}

/// `true` iff every length-k word over [0..sigma) occurs exactly once cyclically.
pub fn is_de_bruijn(seq: &[u32], sigma: usize, k: usize) -> bool {
    let n = seq.len();
    if (sigma as u64).pow(k as u32) != n as u64 {
        return false;
    }
    let mut seen = vec![false; n];
    for i in 0..n {
        let code = (0..k).fold(0usize, |acc, d| acc * sigma + seq[(i + d) % n] as usize);
        if seen[code] {
            return false;
        }
        seen[code] = true;
    }
    true
}

/// The measured run count of a de Bruijn text against (σ−1)/σ·|S|.
pub fn de_bruijn_run_bound_holds(text: &Text, sigma: usize) -> bool {
    let sa = build_suffix_array(text);
    let r = build_bwt_runs(text, &sa).r();
    let s_len = text.len() - 1;
    Ratio::from_integer(r as u64) >= Ratio::new((sigma as u64 - 1) * s_len as u64, sigma as u64)
}
