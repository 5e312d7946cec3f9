use lzbwt::compressed_index::CompressedIndex;
use lzbwt::corpus::{fibonacci_word, random_text};
use lzbwt::grammar_queries::Fragment;
use lzbwt::lz2rlbwt::{bwt_modulo_oracle, convert, Converter};
use lzbwt::rlslp::{recompress, rlslp_from_lz77, Rlslp};
use lzbwt::text::{build_bwt_runs, build_suffix_array, invert_bwt, lz77_decode, lz77_parse, Lz77Parse, Text};

#[test]
fn parse_file_round_trip_then_convert() {
    for seed in 0..8 {
        let t = random_text(seed, 300, [2, 4, 26][seed as usize % 3]);
        let text = lz77_parse(&t).to_text_format();
        let parse = Lz77Parse::from_text_format(&text).unwrap();
        assert_eq!(lz77_decode(&parse).unwrap(), t);
        let bwt = convert(&parse, seed).unwrap();
        assert_eq!(bwt, build_bwt_runs(&t, &build_suffix_array(&t)));
        assert_eq!(invert_bwt(&bwt.decode()).unwrap(), t.as_bytes());
    }
}

#[test]
fn grammar_file_round_trip_keeps_queries() {
    let t = Text::from_body(&fibonacci_word(600)).unwrap();
    let g = recompress(&t);
    let back = Rlslp::from_text_format(&g.to_text_format()).unwrap();
    // Levels are not stored, so only the rules and the expansion survive exactly.
    assert_eq!(back.size(), g.size());
    assert_eq!(back.start(), g.start());
    for a in 0..g.size() {
        assert_eq!(back.rhs(a as _), g.rhs(a as _));
    }
    assert_eq!(back.expand_text(), g.expand_text());
    let idx = CompressedIndex::build(back);
    let f = Fragment::new(10, 31);
    let occ = idx.report(f);
    assert_eq!(occ.len() as u64, idx.count(f));
    assert_eq!(occ[0], idx.leftmost(f));
    assert_eq!(*occ.last().unwrap(), idx.rightmost(f));
    let from_lz = rlslp_from_lz77(&lz77_parse(&t)).unwrap();
    assert_eq!(from_lz.expand_text(), t.as_bytes());
}

#[test]
fn rounds_can_be_driven_one_at_a_time() {
    let t = random_text(11, 400, 2);
    let conv = Converter::from_text(&t);
    let mut cur = bwt_modulo_oracle(&t, 16);
    let mut seed = 0;
    while cur.ell < t.len() {
        let step = conv.round(&cur, seed).unwrap();
        assert_eq!(step.next, bwt_modulo_oracle(&t, 2 * cur.ell));
        assert_eq!(step.stats.rl_out, step.next.rl_len());
        cur = step.next;
        seed += 1;
    }
    assert_eq!(cur.to_bwt_runs().unwrap(), build_bwt_runs(&t, &build_suffix_array(&t)));
}
