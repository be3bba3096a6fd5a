use super::{DigitRun, Location, NumeralNotation, Tablet, Token};

/// Numerals found on one tablet, split by intactness.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Extraction {
    pub intact: Vec<NumeralNotation>,
    /// Notations touching an `X` or `...` token in the same entry.
    pub damaged: Vec<NumeralNotation>,
}

/// Every maximal run of digit tokens in each entry becomes one notation.
pub fn extract_numerals(tablet: &Tablet) -> Extraction {
    let mut out = Extraction::default();
    for (entry_index, entry) in tablet.entries.iter().enumerate() {
        let tokens: Vec<&Token> = entry.tokens().collect();
        let mut i = 0;
        while i < tokens.len() {
            if tokens[i].as_run().is_none() {
                i += 1;
                continue;
            }
            let start = i;
            let mut runs: Vec<DigitRun> = Vec::new();
            while let Some(r) = tokens.get(i).and_then(|t| t.as_run()) {
                match runs.last_mut() {
                    Some(prev) if prev.sign == r.sign => prev.count += r.count,
                    _ => runs.push(*r),
                }
                i += 1;
            }
            let before = start.checked_sub(1).map(|j| tokens[j]);
            let after = tokens.get(i).copied();
            let damaged = before.is_some_and(Token::is_damage) || after.is_some_and(Token::is_damage);
            let notation = NumeralNotation {
                runs,
                damaged,
                location: Location {
                    tablet_id: tablet.id.clone(),
                    line_no: entry.line_no,
                    entry_index,
                    token_index: start,
                },
            };
            if damaged {
                out.damaged.push(notation);
            } else {
                out.intact.push(notation);
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::atf::{runs, Entry, SignToken, Surface};

    fn entry(tokens: Vec<Token>) -> Tablet {
        let mut t = Tablet::new("P1");
        t.entries.push(Entry {
            line_no: 1,
            surface: Surface::Obverse,
            text: tokens,
            numeral: vec![],
            summary_annotation: false,
        });
        t
    }

    fn text(s: &str) -> Token {
        Token::Sign(SignToken::text(s))
    }

    fn run_tokens(pairs: &[(u32, &str)]) -> Vec<Token> {
        runs(pairs).into_iter().map(Token::Run).collect()
    }

    #[test]
    fn one_intact_notation_after_text() {
        let mut toks = vec![text("M341"), text("M288")];
        toks.extend(run_tokens(&[(7, "N14"), (2, "N01"), (3, "N39B")]));
        let ex = extract_numerals(&entry(toks));
        assert_eq!(ex.intact.len(), 1);
        assert_eq!(ex.intact[0].runs.len(), 3);
        assert_eq!(ex.intact[0].location.token_index, 2);
        assert!(ex.damaged.is_empty());
    }

    #[test]
    fn damage_neighbour_excludes() {
        let mut toks = run_tokens(&[(1, "N01")]);
        toks.push(Token::Sign(SignToken::damage()));
        let ex = extract_numerals(&entry(toks));
        assert!(ex.intact.is_empty());
        assert_eq!(ex.damaged.len(), 1);
        assert!(ex.damaged[0].damaged);
    }

    #[test]
    fn damage_before_also_counts() {
        let mut toks = vec![Token::Sign(SignToken {
            name: "...".into(),
            kind: crate::atf::SignKind::Damage,
        })];
        toks.extend(run_tokens(&[(2, "N14")]));
        toks.push(text("M1"));
        toks.extend(run_tokens(&[(3, "N01")]));
        let ex = extract_numerals(&entry(toks));
        assert_eq!(ex.damaged.len(), 1);
        assert_eq!(ex.intact.len(), 1);
        assert_eq!(ex.intact[0].runs, runs(&[(3, "N01")]));
    }

    #[test]
    fn no_digits_no_notations() {
        let ex = extract_numerals(&entry(vec![text("M1"), text("M2")]));
        assert_eq!(ex, Extraction::default());
    }

    #[test]
    fn text_and_numeral_parts_join() {
        let mut t = entry(vec![text("M1")]);
        t.entries[0].numeral = run_tokens(&[(1, "N14"), (2, "N01")]);
        let ex = extract_numerals(&t);
        assert_eq!(ex.intact.len(), 1);
        assert_eq!(ex.intact[0].location.token_index, 1);
    }
}
