use std::collections::HashMap;
use std::fmt::Write as _;

use thiserror::Error;

use super::{Corpus, CorpusError, DigitRun, DigitSign, Entry, SignKind, SignToken, Surface, Tablet, Token};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Strictness {
    Strict,
    #[default]
    Lenient,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParseWarning {
    pub line: usize,
    pub message: String,
}

#[derive(Debug)]
pub struct ParsedCorpus {
    pub corpus: Corpus,
    /// Lines skipped in lenient mode.
    pub warnings: Vec<ParseWarning>,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ParseError {
    #[error("line {line}: {message} (`{token}`)")]
    Syntax {
        line: usize,
        token: String,
        message: String,
    },
    #[error("line {line}: duplicate tablet id `{id}`")]
    DuplicateTablet { line: usize, id: String },
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum NotationError {
    #[error("malformed digit token `{0}`")]
    Malformed(String),
    #[error("digit count must be positive in `{0}`")]
    ZeroCount(String),
    #[error("`{0}` is not a digit sign")]
    NotDigit(String),
}

enum LineError {
    Syntax { token: String, message: String },
}

fn syntax(token: impl Into<String>, message: impl Into<String>) -> LineError {
    LineError::Syntax {
        token: token.into(),
        message: message.into(),
    }
}

/// Parses one whitespace-free token.
fn parse_token(tok: &str) -> Result<Token, NotationError> {
    if let Some(open) = tok.find('(') {
        let inner = tok[open + 1..]
            .strip_suffix(')')
            .ok_or_else(|| NotationError::Malformed(tok.to_string()))?;
        if inner.contains(['(', ')']) {
            return Err(NotationError::Malformed(tok.to_string()));
        }
        let count_str = &tok[..open];
        if count_str.is_empty() || !count_str.bytes().all(|b| b.is_ascii_digit()) {
            return Err(NotationError::Malformed(tok.to_string()));
        }
        let count: u32 = count_str
            .parse()
            .map_err(|_| NotationError::Malformed(tok.to_string()))?;
        if count == 0 {
            return Err(NotationError::ZeroCount(tok.to_string()));
        }
        let sign: DigitSign = inner
            .parse()
            .map_err(|_| NotationError::NotDigit(inner.to_string()))?;
        return Ok(Token::Run(DigitRun::new(count, sign)));
    }
    if tok.contains(')') {
        return Err(NotationError::Malformed(tok.to_string()));
    }
    match SignKind::classify(tok) {
        Some(SignKind::Digit) => {
            let sign = tok
                .parse()
                .map_err(|_| NotationError::NotDigit(tok.to_string()))?;
            Ok(Token::Run(DigitRun::new(1, sign)))
        }
        Some(kind) => Ok(Token::Sign(SignToken {
            name: tok.to_string(),
            kind,
        })),
        None => Err(NotationError::Malformed(tok.to_string())),
    }
}

/// Merges neighbouring runs of the same sign by summing their counts.
fn merge_runs(tokens: Vec<Token>) -> Vec<Token> {
    let mut out: Vec<Token> = Vec::with_capacity(tokens.len());
    for t in tokens {
        if let (Token::Run(next), Some(Token::Run(prev))) = (&t, out.last_mut()) {
            if prev.sign == next.sign {
                prev.count += next.count;
                continue;
            }
        }
        out.push(t);
    }
    out
}

/// Parses a numeral such as `1(N45) 2(N14) 7(N01)`; bare `N01` counts once.
pub fn parse_notation(token_string: &str) -> Result<Vec<DigitRun>, NotationError> {
    let tokens = token_string
        .split_whitespace()
        .map(|tok| match parse_token(tok)? {
            Token::Run(r) => Ok(Token::Run(r)),
            Token::Sign(s) => Err(NotationError::NotDigit(s.name)),
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(merge_runs(tokens)
        .into_iter()
        .filter_map(|t| t.as_run().copied())
        .collect())
}

struct State {
    corpus: Corpus,
    current: Option<Tablet>,
    surface: Surface,
    last_line: HashMap<Surface, u32>,
    pending_summary: bool,
}

impl State {
    fn finish_tablet(&mut self) -> Result<(), CorpusError> {
        if let Some(t) = self.current.take() {
            self.corpus.push(t)?;
        }
        Ok(())
    }
}

fn split_line_no(line: &str) -> Option<(&str, &str)> {
    let digits = line.bytes().take_while(u8::is_ascii_digit).count();
    if digits == 0 {
        return None;
    }
    let rest = line[digits..].strip_prefix('.')?;
    Some((&line[..digits], rest))
}

fn parse_part(part: &str, numeral_side: bool) -> Result<Vec<Token>, LineError> {
    let mut tokens = Vec::new();
    for tok in part.split_whitespace() {
        let t = parse_token(tok).map_err(|e| syntax(tok, e.to_string()))?;
        if numeral_side && t.as_text().is_some() {
            return Err(syntax(tok, "text sign in numeral field"));
        }
        tokens.push(t);
    }
    Ok(merge_runs(tokens))
}

fn content_line(state: &mut State, line: &str) -> Result<(), LineError> {
    let Some(tablet) = state.current.as_mut() else {
        return Err(syntax(line, "content before any `&P` tablet line"));
    };
    let numbered = split_line_no(line);
    let body = numbered.map_or(line, |(_, rest)| rest);
    let Some((text_part, numeral_part)) = body.split_once(',') else {
        if tablet.entries.is_empty() && tablet.header.is_none() {
            let mut header = Vec::new();
            for tok in body.split_whitespace() {
                match parse_token(tok) {
                    Ok(Token::Sign(s)) => header.push(s),
                    _ => return Err(syntax(tok, "header may only hold text signs")),
                }
            }
            if !header.iter().any(SignToken::is_text) {
                return Err(syntax(line, "header without text"));
            }
            tablet.header = Some(header);
            state.pending_summary = false;
            return Ok(());
        }
        return Err(syntax(line, "entry line without comma"));
    };
    let Some((no, _)) = numbered else {
        return Err(syntax(line, "entry line without `<n>.` line number"));
    };
    let line_no: u32 = no.parse().map_err(|_| syntax(no, "line number out of range"))?;
    let text = parse_part(text_part, false)?;
    let numeral = parse_part(numeral_part, true)?;
    if text.is_empty() && numeral.is_empty() {
        return Err(syntax(line, "empty entry"));
    }
    if let Some(&last) = state.last_line.get(&state.surface) {
        if line_no <= last {
            return Err(syntax(no, format!("line number not increasing (previous {last})")));
        }
    }
    state.last_line.insert(state.surface, line_no);
    tablet.entries.push(Entry {
        line_no,
        surface: state.surface,
        text,
        numeral,
        summary_annotation: std::mem::take(&mut state.pending_summary),
    });
    Ok(())
}

/// Reads the line-oriented transliteration format.
///
/// `&P<id>` opens a tablet, `@obverse` / `@reverse` switch surface, entries
/// are `<n>. <text signs> , <numeral>`, `# summary` flags the next entry and
/// other `#` lines are comments. Lenient mode skips anything else with a
/// warning instead of failing.
pub fn parse_corpus(input: &str, strictness: Strictness) -> Result<ParsedCorpus, ParseError> {
    let mut state = State {
        corpus: Corpus::new(),
        current: None,
        surface: Surface::Unknown,
        last_line: HashMap::new(),
        pending_summary: false,
    };
    let mut warnings = Vec::new();
    let strict = strictness == Strictness::Strict;

    for (idx, raw) in input.lines().enumerate() {
        let lineno = idx + 1;
        let line = raw.trim();
        let outcome: Result<(), LineError> = if line.is_empty() {
            state.pending_summary = false;
            Ok(())
        } else if let Some(rest) = line.strip_prefix('&') {
            let id = rest.split_whitespace().next().unwrap_or("");
            if id.len() < 2 || !id.starts_with('P') {
                Err(syntax(line, "tablet id must look like `P<digits>`"))
            } else {
                state.finish_tablet().map_err(|CorpusError::DuplicateTablet(id)| {
                    ParseError::DuplicateTablet { line: lineno, id }
                })?;
                if state.corpus.get(id).is_some() {
                    return Err(ParseError::DuplicateTablet {
                        line: lineno,
                        id: id.to_string(),
                    });
                }
                state.current = Some(Tablet::new(id));
                state.surface = Surface::Unknown;
                state.last_line.clear();
                state.pending_summary = false;
                Ok(())
            }
        } else if let Some(rest) = line.strip_prefix('@') {
            state.pending_summary = false;
            match rest.split_whitespace().next().unwrap_or("") {
                "obverse" => {
                    state.surface = Surface::Obverse;
                    Ok(())
                }
                "reverse" => {
                    state.surface = Surface::Reverse;
                    Ok(())
                }
                "unknown" => {
                    state.surface = Surface::Unknown;
                    Ok(())
                }
                "tablet" if !strict => Ok(()),
                other if !strict => {
                    warnings.push(ParseWarning {
                        line: lineno,
                        message: format!("surface `@{other}` read as unknown"),
                    });
                    state.surface = Surface::Unknown;
                    Ok(())
                }
                _ => Err(syntax(line, "unknown surface marker")),
            }
        } else if let Some(rest) = line.strip_prefix('#') {
            state.pending_summary = rest.trim() == "summary";
            Ok(())
        } else {
            content_line(&mut state, line)
        };

        if let Err(LineError::Syntax { token, message }) = outcome {
            if strict {
                return Err(ParseError::Syntax {
                    line: lineno,
                    token,
                    message,
                });
            }
            state.pending_summary = false;
            warnings.push(ParseWarning {
                line: lineno,
                message: format!("{message} (`{token}`)"),
            });
        }
    }
    let last_line = input.lines().count();
    state
        .finish_tablet()
        .map_err(|CorpusError::DuplicateTablet(id)| ParseError::DuplicateTablet { line: last_line, id })?;
    Ok(ParsedCorpus {
        corpus: state.corpus,
        warnings,
    })
}

fn join_tokens(tokens: &[Token]) -> String {
    tokens
        .iter()
        .map(|t| t.to_string())
        .collect::<Vec<_>>()
        .join(" ")
}

/// Serializes a corpus in the form `parse_corpus` reads back.
pub fn write_corpus(corpus: &Corpus) -> String {
    let mut out = String::new();
    for tablet in corpus.tablets() {
        let _ = writeln!(out, "&{}", tablet.id);
        if let Some(header) = &tablet.header {
            let names: Vec<&str> = header.iter().map(|s| s.name.as_str()).collect();
            let _ = writeln!(out, "{}", names.join(" "));
        }
        let mut surface = Surface::Unknown;
        for entry in &tablet.entries {
            if entry.surface != surface {
                surface = entry.surface;
                out.push_str(match surface {
                    Surface::Obverse => "@obverse\n",
                    Surface::Reverse => "@reverse\n",
                    Surface::Unknown => "@unknown\n",
                });
            }
            if entry.summary_annotation {
                out.push_str("# summary\n");
            }
            let mut line = format!("{}.", entry.line_no);
            let text = join_tokens(&entry.text);
            if !text.is_empty() {
                line.push(' ');
                line.push_str(&text);
            }
            line.push_str(" ,");
            let numeral = join_tokens(&entry.numeral);
            if !numeral.is_empty() {
                line.push(' ');
                line.push_str(&numeral);
            }
            out.push_str(&line);
            out.push('\n');
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::atf::runs;

    pub(crate) const P008805: &str = "&P008805\n@obverse\n1. M056~f , 1(N34) 5(N14) 1(N01) 1(N8B)\n2. M341 M288 , 7(N14) 2(N01) 3(N39B)\n";

    #[test]
    fn reads_two_entry_tablet() {
        let parsed = parse_corpus(P008805, Strictness::Strict).unwrap();
        let t = parsed.corpus.get("P008805").unwrap();
        assert_eq!(t.entries.len(), 2);
        let e = &t.entries[0];
        assert_eq!(e.surface, Surface::Obverse);
        assert_eq!(e.text, vec![Token::Sign(SignToken::text("M056~f"))]);
        let nums: Vec<DigitRun> = e.numeral.iter().filter_map(|t| t.as_run().copied()).collect();
        assert_eq!(nums, runs(&[(1, "N34"), (5, "N14"), (1, "N01"), (1, "N8B")]));
    }

    #[test]
    fn empty_stream() {
        let parsed = parse_corpus("", Strictness::Strict).unwrap();
        assert!(parsed.corpus.is_empty());
    }

    #[test]
    fn notation_forms() {
        assert_eq!(
            parse_notation("1(N45) 2(N14) 7(N01)").unwrap(),
            runs(&[(1, "N45"), (2, "N14"), (7, "N01")])
        );
        assert_eq!(parse_notation("N01").unwrap(), runs(&[(1, "N01")]));
        assert_eq!(parse_notation("2(N01) 3(N01)").unwrap(), runs(&[(5, "N01")]));
        assert_eq!(parse_notation("").unwrap(), vec![]);
    }

    #[test]
    fn notation_errors() {
        assert_eq!(parse_notation("1(N01"), Err(NotationError::Malformed("1(N01".into())));
        assert_eq!(parse_notation("N01)"), Err(NotationError::Malformed("N01)".into())));
        assert_eq!(parse_notation("0(N01)"), Err(NotationError::ZeroCount("0(N01)".into())));
        assert_eq!(parse_notation("-1(N01)"), Err(NotationError::Malformed("-1(N01)".into())));
        assert_eq!(parse_notation("2(M288)"), Err(NotationError::NotDigit("M288".into())));
        assert_eq!(parse_notation("M288"), Err(NotationError::NotDigit("M288".into())));
    }

    #[test]
    fn strict_reports_line_and_token() {
        let err = parse_corpus("&P1\n1. M1 , 1(N01\n", Strictness::Strict).unwrap_err();
        assert_eq!(
            err,
            ParseError::Syntax {
                line: 2,
                token: "1(N01".into(),
                message: "malformed digit token `1(N01`".into()
            }
        );
    }

    #[test]
    fn lenient_skips_and_warns() {
        let input = "&P1 = MDP 26\n#atf: lang pe\n$ reverse broken\n@obverse\n1. M1 , 2(N01)\n2'. M2 , 1(N01)\n3. M3 , 1(N14)\n";
        let parsed = parse_corpus(input, Strictness::Lenient).unwrap();
        let t = parsed.corpus.get("P1").unwrap();
        assert_eq!(t.entries.iter().map(|e| e.line_no).collect::<Vec<_>>(), vec![1, 3]);
        assert_eq!(parsed.warnings.len(), 2);
        assert_eq!(parsed.warnings[0].line, 3);
        assert!(parse_corpus(input, Strictness::Strict).is_err());
    }

    #[test]
    fn duplicate_tablet_is_an_error_in_both_modes() {
        let input = "&P1\n1. M1 , 1(N01)\n&P1\n1. M1 , 1(N01)\n";
        for mode in [Strictness::Strict, Strictness::Lenient] {
            assert_eq!(
                parse_corpus(input, mode).unwrap_err(),
                ParseError::DuplicateTablet { line: 3, id: "P1".into() }
            );
        }
    }

    #[test]
    fn header_summary_and_surfaces() {
        let input = "&P2\nM157 M288\n@obverse\n1. M288 , 3(N01)\n2. , 2(N01)\n@reverse\n# summary\n1. M288 , 5(N01)\n";
        let parsed = parse_corpus(input, Strictness::Strict).unwrap();
        let t = parsed.corpus.get("P2").unwrap();
        assert_eq!(t.header.as_ref().unwrap().len(), 2);
        assert_eq!(t.first_sign(), Some("M157"));
        assert!(t.entries[1].text.is_empty());
        let rev = &t.entries[2];
        assert_eq!(rev.surface, Surface::Reverse);
        assert!(rev.summary_annotation);
        assert!(!t.entries[0].summary_annotation);
    }

    #[test]
    fn summary_must_immediately_precede() {
        let input = "&P2\n# summary\n# other\n1. M288 , 5(N01)\n";
        let parsed = parse_corpus(input, Strictness::Strict).unwrap();
        assert!(!parsed.corpus.tablets()[0].entries[0].summary_annotation);
    }

    #[test]
    fn rejects_bad_entries_in_strict() {
        for bad in [
            "&P1\n1. M1 , M2\n",
            "&P1\n1. ,\n",
            "&P1\n2. M1 , 1(N01)\n1. M1 , 1(N01)\n",
            "1. M1 , 1(N01)\n",
            "&P1\n1. M1 , 1(N01)\n2. M2\n",
            "&P1\n@left\n",
            "&Q1\n",
        ] {
            assert!(parse_corpus(bad, Strictness::Strict).is_err(), "{bad:?}");
        }
    }

    #[test]
    fn line_numbers_restart_per_surface() {
        let input = "&P1\n@obverse\n1. M1 , 1(N01)\n@reverse\n1. M1 , 1(N01)\n";
        assert!(parse_corpus(input, Strictness::Strict).is_ok());
    }

    #[test]
    fn writer_is_canonical() {
        let input = "&P1\n@obverse\n1. M1 N01 N01 , 2(N01) 3(N01) X\n";
        let parsed = parse_corpus(input, Strictness::Strict).unwrap();
        let written = write_corpus(&parsed.corpus);
        assert_eq!(written, "&P1\n@obverse\n1. M1 2(N01) , 5(N01) X\n");
        let again = parse_corpus(&written, Strictness::Strict).unwrap();
        assert_eq!(again.corpus, parsed.corpus);
    }
}
