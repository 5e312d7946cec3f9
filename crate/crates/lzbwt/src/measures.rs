//! Repetitiveness measures and the inequalities that relate them.

use crate::text::{build_bwt_runs, build_lcp, build_suffix_array, lz77_parse, substring_complexity, Analysis, Text};
use num_rational::Ratio;
use serde::Serialize;
use std::io;

pub const DEFAULT_CONSTANT: f64 = 64.0;

/// log₂ with the argument clamped below at 2.
pub fn lg(x: f64) -> f64 {
    x.max(2.0).log2()
}

fn ratio_f64(q: Ratio<u64>) -> f64 {
    *q.numer() as f64 / *q.denom() as f64
}

/// Sum of irreducible LCP values `v` with `lo ≤ v < hi` (`hi = None` is ∞).
pub fn irreducible_lcp_sum(text: &Text, lo: usize, hi: Option<usize>) -> u64 {
    let sa = build_suffix_array(text);
    let bwt = build_bwt_runs(text, &sa);
    let lcp = build_lcp(text, &sa, &bwt);
    lcp.irreducible_values()
        .into_iter()
        .filter(|&v| v >= lo && hi.is_none_or(|h| v < h))
        .map(|v| v as u64)
        .sum()
}

#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct BoundRecord {
    pub bound: &'static str,
    pub lhs: f64,
    pub rhs: f64,
    pub constant: f64,
    pub holds: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct BoundReport {
    pub n: usize,
    pub r: usize,
    pub r_rev: usize,
    pub z: usize,
    pub delta_num: u64,
    pub delta_den: u64,
    pub irreducible_sum: u64,
    pub records: Vec<BoundRecord>,
}

impl BoundReport {
    pub fn delta(&self) -> Ratio<u64> {
        Ratio::new(self.delta_num, self.delta_den)
    }

    pub fn all_hold(&self) -> bool {
        self.records.iter().all(|r| r.holds)
    }

    pub fn violations(&self) -> Vec<&BoundRecord> {
        self.records.iter().filter(|r| !r.holds).collect()
    }
}

fn record(bound: &'static str, lhs: f64, rhs: f64, constant: f64) -> BoundRecord {
    BoundRecord { bound, lhs, rhs, constant, holds: lhs <= rhs }
}

/// Evaluates every inequality with the harness constant `c`.
pub fn verify_bounds(text: &Text, c: f64) -> BoundReport {
    let a = Analysis::of(text);
    let n = text.len();
    let r = a.bwt.r();
    let z = a.parse.z();
    let r_rev = {
        let rev = text.reversed();
        build_bwt_runs(&rev, &build_suffix_array(&rev)).r()
    };
    let (delta, _) = substring_complexity(text);
    let irreducible_sum: u64 = a.lcp.irreducible_values().iter().map(|&v| v as u64).sum();

    let (nf, rf, zf, df) = (n as f64, r as f64, z as f64, ratio_f64(delta));
    let lgn = lg(nf);
    let exact = |bound, holds: bool, lhs: f64, rhs: f64| BoundRecord { bound, lhs, rhs, constant: 1.0, holds };
    let records = vec![
        exact("delta_le_z", delta <= Ratio::from_integer(z as u64), df, zf),
        exact("delta_le_r", delta <= Ratio::from_integer(r as u64), df, rf),
        record("z_le_c_r_log_n", zf, c * rf * lgn, c),
        record("r_le_c_z_log2_n", rf, c * zf * lgn * lgn, c),
        record(
            "r_le_c_z_log_z_ratio",
            rf,
            c * zf * lg(zf) * f64::max(1.0, lgn / (zf * lg(zf))),
            c,
        ),
        record("r_le_c_delta_log2_n", rf, c * df * lgn * lgn, c),
        record(
            "r_le_c_delta_log_delta_ratio",
            rf,
            c * df * lg(df) * f64::max(1.0, lgn / (df * lg(df))),
            c,
        ),
        record("r_rev_le_c_r_log2_n", r_rev as f64, c * rf * lgn * lgn, c),
        record("irr_sum_le_n_log_r", irreducible_sum as f64, nf * lg(rf), 1.0),
        record("irr_sum_le_c_n_log_delta", irreducible_sum as f64, c * nf * lg(df), c),
    ];
    BoundReport {
        n,
        r,
        r_rev,
        z,
        delta_num: *delta.numer(),
        delta_den: *delta.denom(),
        irreducible_sum,
        records,
    }
}

/// Writes one CSV row per (text, bound).
pub fn write_csv<W: io::Write>(reports: &[(String, BoundReport)], out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["text", "n", "r", "r_rev", "z", "delta", "bound", "lhs", "rhs", "constant", "holds"])?;
    for (name, rep) in reports {
        for rec in &rep.records {
            w.write_record([
                name.clone(),
                rep.n.to_string(),
                rep.r.to_string(),
                rep.r_rev.to_string(),
                rep.z.to_string(),
                format!("{}/{}", rep.delta_num, rep.delta_den),
                rec.bound.to_string(),
                format!("{:.3}", rec.lhs),
                format!("{:.3}", rec.rhs),
                rec.constant.to_string(),
                rec.holds.to_string(),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct CoverReport {
    pub ell: usize,
    pub covered: usize,
    /// covered ≤ 3δℓ, compared exactly.
    pub within_delta_bound: bool,
    /// covered ≤ 2zℓ.
    pub within_z_bound: bool,
}

/// Number of positions of T∞ covered by the leftmost occurrences of all
/// distinct length-ℓ substrings.
pub fn leftmost_cover(text: &Text, ell: usize) -> CoverReport {
    assert!(ell >= 1 && ell <= text.len(), "ell must lie in [1..n]");
    let n = text.len();
    let sa = build_suffix_array(text);
    let bwt = build_bwt_runs(text, &sa);
    let lcp = build_lcp(text, &sa, &bwt);
    let mut marks = vec![false; n + ell];
    let mut group_min = sa.sa[0];
    let flush = |start: usize, marks: &mut Vec<bool>| {
        for m in &mut marks[start..start + ell] {
            *m = true;
        }
    };
    for k in 1..n {
        if lcp.lcp[k] < ell {
            flush(group_min, &mut marks);
            group_min = sa.sa[k];
        } else {
            group_min = group_min.min(sa.sa[k]);
        }
    }
    flush(group_min, &mut marks);
    let covered = marks.iter().filter(|&&b| b).count();
    let (delta, _) = substring_complexity(text);
    let z = lz77_parse(text).z();
    CoverReport {
        ell,
        covered,
        within_delta_bound: Ratio::from_integer(covered as u64)
            <= delta * Ratio::from_integer(3 * ell as u64),
        within_z_bound: covered <= 2 * z * ell,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::text::{build_suffix_array, Text};
    use proptest::prelude::*;
    use std::collections::HashMap;

    fn fig1() -> Text {
        Text::parse(b"bbabaababababaababa$").unwrap()
    }

    #[test]
    fn figure_one_irreducible_sum() {
        assert_eq!(irreducible_lcp_sum(&fig1(), 0, None), 29);
        assert_eq!(irreducible_lcp_sum(&fig1(), 0, Some(1)), 0);
        assert_eq!(irreducible_lcp_sum(&fig1(), 4, Some(8)), 4 + 5 + 7);
    }

    #[test]
    fn figure_one_report() {
        let rep = verify_bounds(&fig1(), DEFAULT_CONSTANT);
        assert_eq!((rep.r, rep.z, rep.n), (8, 8, 20));
        assert!(rep.all_hold(), "{:?}", rep.violations());
        let mut buf = Vec::new();
        write_csv(&[("fig1".into(), rep)], &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap().lines().count(), 11);
    }

    #[test]
    fn trivial_report_holds() {
        let rep = verify_bounds(&Text::from_body(b"a").unwrap(), DEFAULT_CONSTANT);
        assert!(rep.all_hold());
    }

    fn brute_cover(text: &Text, ell: usize) -> usize {
        let n = text.len();
        let inf = text.inf();
        let mut first: HashMap<Vec<u8>, usize> = HashMap::new();
        for j in 0..n {
            first.entry(inf.substring(j as i64, ell)).or_insert(j);
        }
        let mut marks = vec![false; n + ell];
        for &j in first.values() {
            marks[j..j + ell].iter_mut().for_each(|m| *m = true);
        }
        marks.iter().filter(|&&b| b).count()
    }

    #[test]
    fn figure_one_cover() {
        let t = fig1();
        let rep = leftmost_cover(&t, 4);
        assert_eq!(rep.covered, brute_cover(&t, 4));
        assert!(rep.within_delta_bound && rep.within_z_bound);
        let one = leftmost_cover(&t, 1);
        assert_eq!(one.covered, t.sigma());
    }

    proptest! {
        #[test]
        fn irreducible_sum_matches_naive(v in proptest::collection::vec(b'a'..b'd', 1..60), lo in 0usize..4, span in 1usize..10) {
            let t = Text::from_body(&v).unwrap();
            let s = t.as_bytes();
            let sa = build_suffix_array(&t);
            let n = t.len();
            let bwt: Vec<u8> = sa.sa.iter().map(|&p| s[(p + n - 1) % n]).collect();
            let mut want = 0u64;
            for k in 0..n {
                let irr = k == 0 || bwt[k] != bwt[k - 1];
                let l = if k == 0 { 0 } else { crate::text::lce_naive(s, sa.sa[k], sa.sa[k - 1]) };
                if irr && l >= lo && l < lo + span {
                    want += l as u64;
                }
            }
            prop_assert_eq!(irreducible_lcp_sum(&t, lo, Some(lo + span)), want);
        }

        #[test]
        fn cover_matches_brute_force(v in proptest::collection::vec(b'a'..b'c', 1..40), ell in 1usize..8) {
            let t = Text::from_body(&v).unwrap();
            let ell = ell.min(t.len());
            let rep = leftmost_cover(&t, ell);
            prop_assert_eq!(rep.covered, brute_cover(&t, ell));
            prop_assert!(rep.within_delta_bound);
            prop_assert!(rep.within_z_bound);
        }

        #[test]
        fn bounds_hold_on_random_texts(v in proptest::collection::vec(b'a'..b'e', 3..120)) {
            let rep = verify_bounds(&Text::from_body(&v).unwrap(), DEFAULT_CONSTANT);
            prop_assert!(rep.all_hold(), "{:?}", rep.violations());
        }
    }
}
