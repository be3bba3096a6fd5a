//! Document model for transliterated tablets plus the line-oriented reader
//! and writer.
//!
//! Text signs carry `M` labels, digits carry `N` labels, and `X` / `...`
//! mark damage. A digit written `n` times is `n(Nxx)`.

mod extract;
mod parser;
mod sign;

use std::collections::HashMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use extract::{extract_numerals, Extraction};
pub use parser::{
    parse_corpus, parse_notation, write_corpus, NotationError, ParseError, ParseWarning, ParsedCorpus, Strictness,
};
pub use sign::{DigitSign, ParseSignError};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum SignKind {
    Text,
    Digit,
    Damage,
}

impl SignKind {
    /// Classifies a bare sign name, `None` for names outside the sign list.
    pub fn classify(name: &str) -> Option<SignKind> {
        if name == "X" || name == "..." {
            Some(SignKind::Damage)
        } else if sign::is_digit_name(name) {
            Some(SignKind::Digit)
        } else if sign::is_text_name(name) {
            Some(SignKind::Text)
        } else {
            None
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct SignToken {
    pub name: String,
    pub kind: SignKind,
}

impl SignToken {
    pub fn text(name: impl Into<String>) -> Self {
        SignToken {
            name: name.into(),
            kind: SignKind::Text,
        }
    }

    pub fn damage() -> Self {
        SignToken {
            name: "X".into(),
            kind: SignKind::Damage,
        }
    }

    pub fn is_text(&self) -> bool {
        self.kind == SignKind::Text
    }

    pub fn is_damage(&self) -> bool {
        self.kind == SignKind::Damage
    }
}

/// `count` copies of one digit sign.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct DigitRun {
    pub count: u32,
    pub sign: DigitSign,
}

impl DigitRun {
    pub fn new(count: u32, sign: DigitSign) -> Self {
        debug_assert!(count >= 1);
        DigitRun { count, sign }
    }
}

impl std::fmt::Debug for DigitRun {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}({})", self.count, self.sign)
    }
}

impl std::fmt::Display for DigitRun {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}({})", self.count, self.sign)
    }
}

/// Shorthand used by tests and fixtures: `runs(&[(1, "N45"), (2, "N14")])`.
///
/// Panics on an invalid digit sign name.
pub fn runs(pairs: &[(u32, &str)]) -> Vec<DigitRun> {
    pairs
        .iter()
        .map(|&(n, s)| DigitRun::new(n, DigitSign::placeholder(s).expect("digit sign")))
        .collect()
}

/// Writes runs in canonical `n(SIGN)` form separated by single spaces.
pub fn format_runs(runs: &[DigitRun]) -> String {
    runs.iter()
        .map(|r| r.to_string())
        .collect::<Vec<_>>()
        .join(" ")
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Token {
    /// A text or damage sign.
    Sign(SignToken),
    Run(DigitRun),
}

impl Token {
    pub fn as_run(&self) -> Option<&DigitRun> {
        match self {
            Token::Run(r) => Some(r),
            Token::Sign(_) => None,
        }
    }

    pub fn as_text(&self) -> Option<&str> {
        match self {
            Token::Sign(s) if s.is_text() => Some(&s.name),
            _ => None,
        }
    }

    pub fn is_damage(&self) -> bool {
        matches!(self, Token::Sign(s) if s.is_damage())
    }
}

impl std::fmt::Display for Token {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Token::Sign(s) => f.write_str(&s.name),
            Token::Run(r) => write!(f, "{r}"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Surface {
    Obverse,
    Reverse,
    Unknown,
}

/// One transliterated line: text before the comma, numeral after it.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Entry {
    pub line_no: u32,
    pub surface: Surface,
    pub text: Vec<Token>,
    pub numeral: Vec<Token>,
    pub summary_annotation: bool,
}

impl Entry {
    /// Text part followed by the numeral part.
    pub fn tokens(&self) -> impl Iterator<Item = &Token> {
        self.text.iter().chain(self.numeral.iter())
    }

    pub fn text_signs(&self) -> impl Iterator<Item = &str> {
        self.tokens().filter_map(Token::as_text)
    }

    pub fn has_digits(&self) -> bool {
        self.tokens().any(|t| t.as_run().is_some())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Location {
    pub tablet_id: String,
    pub line_no: u32,
    /// Index of the entry within its tablet.
    pub entry_index: usize,
    /// Offset of the first run within the entry's token stream.
    pub token_index: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct NumeralNotation {
    pub runs: Vec<DigitRun>,
    pub damaged: bool,
    pub location: Location,
}

impl std::fmt::Display for NumeralNotation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&format_runs(&self.runs))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Tablet {
    pub id: String,
    pub header: Option<Vec<SignToken>>,
    pub entries: Vec<Entry>,
}

impl Tablet {
    pub fn new(id: impl Into<String>) -> Self {
        Tablet {
            id: id.into(),
            header: None,
            entries: Vec::new(),
        }
    }

    pub fn entry_by_line(&self, line_no: u32) -> impl Iterator<Item = (usize, &Entry)> {
        self.entries
            .iter()
            .enumerate()
            .filter(move |(_, e)| e.line_no == line_no)
    }

    /// First text sign on the tablet, header included.
    pub fn first_sign(&self) -> Option<&str> {
        self.header
            .iter()
            .flatten()
            .find(|s| s.is_text())
            .map(|s| s.name.as_str())
            .or_else(|| self.entries.iter().flat_map(|e| e.text_signs()).next())
    }

    pub fn text_signs(&self) -> impl Iterator<Item = &str> {
        self.header
            .iter()
            .flatten()
            .filter(|s| s.is_text())
            .map(|s| s.name.as_str())
            .chain(self.entries.iter().flat_map(|e| e.text_signs()))
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum CorpusError {
    #[error("duplicate tablet id `{0}`")]
    DuplicateTablet(String),
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Corpus {
    tablets: Vec<Tablet>,
    index: HashMap<String, usize>,
}

impl Corpus {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_tablets(tablets: Vec<Tablet>) -> Result<Self, CorpusError> {
        let mut corpus = Corpus::new();
        for t in tablets {
            corpus.push(t)?;
        }
        Ok(corpus)
    }

    pub fn push(&mut self, tablet: Tablet) -> Result<(), CorpusError> {
        if self.index.contains_key(&tablet.id) {
            return Err(CorpusError::DuplicateTablet(tablet.id));
        }
        self.index.insert(tablet.id.clone(), self.tablets.len());
        self.tablets.push(tablet);
        Ok(())
    }

    pub fn tablets(&self) -> &[Tablet] {
        &self.tablets
    }

    pub fn get(&self, id: &str) -> Option<&Tablet> {
        self.index.get(id).map(|&i| &self.tablets[i])
    }

    pub fn len(&self) -> usize {
        self.tablets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tablets.is_empty()
    }

    /// Merges another corpus, rejecting clashing ids.
    pub fn extend(&mut self, other: Corpus) -> Result<(), CorpusError> {
        for t in other.tablets {
            self.push(t)?;
        }
        Ok(())
    }
}
