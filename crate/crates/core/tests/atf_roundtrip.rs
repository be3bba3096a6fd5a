use std::collections::BTreeMap;

use pe_numerals::atf::{
    extract_numerals, parse_corpus, parse_notation, DigitRun, Entry, SignToken, Strictness, Surface, Token,
};
use pe_numerals::{Corpus, Tablet};
use proptest::prelude::*;

const TEXT: &[&str] = &["M288", "M056~f", "M341", "M376", "M367~i", "M388", "M9"];
const DIGITS: &[&str] = &["N01", "N14", "N34", "N45", "N8B", "N39B", "N02", "N51"];

fn text_token() -> impl Strategy<Value = Token> {
    prop_oneof![
        6 => prop::sample::select(TEXT).prop_map(|s| Token::Sign(SignToken::text(s))),
        1 => Just(Token::Sign(SignToken::damage())),
        1 => Just(Token::Sign(SignToken { name: "...".into(), kind: pe_numerals::atf::SignKind::Damage })),
    ]
}

fn run_token() -> impl Strategy<Value = Token> {
    (1u32..30, prop::sample::select(DIGITS)).prop_map(|(n, s)| Token::Run(DigitRun::new(n, s.parse().unwrap())))
}

/// Adjacent runs of one sign are stored merged, so generate them that way.
fn merged(tokens: Vec<Token>) -> Vec<Token> {
    let mut out: Vec<Token> = Vec::new();
    for t in tokens {
        if let (Token::Run(r), Some(Token::Run(p))) = (&t, out.last_mut()) {
            if p.sign == r.sign {
                p.count += r.count;
                continue;
            }
        }
        out.push(t);
    }
    out
}

fn entry() -> impl Strategy<Value = (Surface, Vec<Token>, Vec<Token>, bool)> {
    let surface = prop::sample::select(vec![Surface::Obverse, Surface::Reverse, Surface::Unknown]);
    let text = prop::collection::vec(prop_oneof![3 => text_token(), 1 => run_token()], 0..4).prop_map(merged);
    let numeral = prop::collection::vec(
        prop_oneof![4 => run_token(), 1 => Just(Token::Sign(SignToken::damage()))],
        0..4,
    )
    .prop_map(merged);
    (surface, text, numeral, any::<bool>())
        .prop_filter("entry needs content", |(_, t, n, _)| !t.is_empty() || !n.is_empty())
}

fn tablet(id: usize) -> impl Strategy<Value = Tablet> {
    let header = prop::option::of(prop::collection::vec(prop::sample::select(TEXT), 1..3));
    (header, prop::collection::vec(entry(), 0..6)).prop_map(move |(header, entries)| {
        let mut t = Tablet::new(format!("P{:06}", id));
        t.header = header.map(|h| h.into_iter().map(SignToken::text).collect());
        let mut next: BTreeMap<Surface, u32> = BTreeMap::new();
        for (surface, text, numeral, summary) in entries {
            let n = next.entry(surface).or_insert(0);
            *n += 1;
            t.entries.push(Entry {
                line_no: *n,
                surface,
                text,
                numeral,
                summary_annotation: summary,
            });
        }
        t
    })
}

fn corpus() -> impl Strategy<Value = Corpus> {
    (0usize..5)
        .prop_flat_map(|n| (0..n).map(tablet).collect::<Vec<_>>())
        .prop_map(|ts| Corpus::from_tablets(ts).unwrap())
}

proptest! {
    #[test]
    fn write_then_parse_is_identity(c in corpus()) {
        let text = pe_numerals::atf::write_corpus(&c);
        let back = parse_corpus(&text, Strictness::Strict).unwrap();
        prop_assert!(back.warnings.is_empty());
        prop_assert_eq!(back.corpus, c);
    }

    #[test]
    fn extraction_partitions_digit_tokens(c in corpus()) {
        for t in c.tablets() {
            let ex = extract_numerals(t);
            let mut covered = 0u64;
            for n in ex.intact.iter().chain(&ex.damaged) {
                prop_assert!(!n.runs.is_empty());
                covered += n.runs.iter().map(|r| r.count as u64).sum::<u64>();
            }
            let digits: u64 = t.entries.iter().flat_map(|e| e.tokens()).filter_map(|tok| tok.as_run()).map(|r| r.count as u64).sum();
            prop_assert_eq!(covered, digits);
            prop_assert!(ex.intact.iter().all(|n| !n.damaged));
            prop_assert!(ex.damaged.iter().all(|n| n.damaged));
        }
    }

    #[test]
    fn notation_text_round_trips(runs in prop::collection::vec(run_token(), 1..6)) {
        let runs: Vec<DigitRun> = merged(runs).iter().filter_map(|t| t.as_run().copied()).collect();
        let text = pe_numerals::atf::format_runs(&runs);
        prop_assert_eq!(parse_notation(&text).unwrap(), runs);
    }
}

#[test]
fn damaged_neighbour_only_within_entry() {
    let c = parse_corpus("&P1\n1. M1 , 1(N01) X\n2. , 2(N01)\n", Strictness::Strict).unwrap().corpus;
    let ex = extract_numerals(&c.tablets()[0]);
    assert_eq!(ex.intact.len(), 1);
    assert_eq!(ex.damaged.len(), 1);
    assert_eq!(ex.intact[0].location.line_no, 2);
}

#[test]
fn lenient_skips_bad_lines() {
    let src = "&P1\n@obverse\n1. M1 , 1(N01\n2. M2 , 2(N01)\n@edge\n3. M3 , 1(N14)\n";
    assert!(parse_corpus(src, Strictness::Strict).is_err());
    let parsed = parse_corpus(src, Strictness::Lenient).unwrap();
    assert_eq!(parsed.warnings.len(), 2);
    let t = &parsed.corpus.tablets()[0];
    assert_eq!(t.entries.len(), 2);
    assert_eq!(t.entries[1].surface, Surface::Unknown);
}
