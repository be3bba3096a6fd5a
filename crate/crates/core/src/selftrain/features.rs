use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::atf::{Location, Tablet, Token};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum FeatureKind {
    Tablet,
    FirstSign,
    SameEntry,
    SameTablet,
    Object,
    ImplicitObject,
}

impl FeatureKind {
    pub const ALL: [FeatureKind; 6] = [
        FeatureKind::Tablet,
        FeatureKind::FirstSign,
        FeatureKind::SameEntry,
        FeatureKind::SameTablet,
        FeatureKind::Object,
        FeatureKind::ImplicitObject,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            FeatureKind::Tablet => "TABLET",
            FeatureKind::FirstSign => "FIRST_SIGN",
            FeatureKind::SameEntry => "SAME_ENTRY",
            FeatureKind::SameTablet => "SAME_TABLET",
            FeatureKind::Object => "OBJECT",
            FeatureKind::ImplicitObject => "IMPLICIT_OBJECT",
        }
    }
}

impl fmt::Display for FeatureKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for FeatureKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        FeatureKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| format!("unknown feature kind `{s}`"))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Feature {
    pub kind: FeatureKind,
    pub value: String,
}

impl Feature {
    pub fn new(kind: FeatureKind, value: impl Into<String>) -> Self {
        Feature {
            kind,
            value: value.into(),
        }
    }
}

impl fmt::Display for Feature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}={}", self.kind, self.value)
    }
}

pub type FeatureSet = BTreeSet<Feature>;

/// Features of the numeral starting at `at`. Missing positions are skipped.
pub fn extract_features(at: &Location, tablet: &Tablet) -> FeatureSet {
    let mut out = FeatureSet::new();
    out.insert(Feature::new(FeatureKind::Tablet, &tablet.id));
    if let Some(s) = tablet.first_sign() {
        out.insert(Feature::new(FeatureKind::FirstSign, s));
    }
    if let Some(entry) = tablet.entries.get(at.entry_index) {
        for s in entry.text_signs() {
            out.insert(Feature::new(FeatureKind::SameEntry, s));
        }
        let before = at.token_index.checked_sub(1).and_then(|i| entry.tokens().nth(i));
        if let Some(s) = before.and_then(Token::as_text) {
            out.insert(Feature::new(FeatureKind::Object, s));
        }
    }
    for s in tablet.text_signs() {
        out.insert(Feature::new(FeatureKind::SameTablet, s));
    }
    if let Some(s) = tablet.entries.first().and_then(|e| e.text_signs().last()) {
        out.insert(Feature::new(FeatureKind::ImplicitObject, s));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::atf::{extract_numerals, parse_corpus, Strictness};

    fn f(kind: FeatureKind, v: &str) -> Feature {
        Feature::new(kind, v)
    }

    #[test]
    fn p008805_second_numeral() {
        let c = parse_corpus(
            "&P008805\n1. M056~f , 1(N34) 5(N14) 1(N01) 1(N8B)\n2. M341 M288 , 7(N14) 2(N01) 3(N39B)\n",
            Strictness::Strict,
        )
        .unwrap()
        .corpus;
        let t = &c.tablets()[0];
        let n = &extract_numerals(t).intact[1];
        let fs = extract_features(&n.location, t);
        use FeatureKind::*;
        let expected: FeatureSet = [
            f(Tablet, "P008805"),
            f(FirstSign, "M056~f"),
            f(SameEntry, "M341"),
            f(SameEntry, "M288"),
            f(SameTablet, "M056~f"),
            f(SameTablet, "M341"),
            f(SameTablet, "M288"),
            f(Object, "M288"),
            f(ImplicitObject, "M056~f"),
        ]
        .into_iter()
        .collect();
        assert_eq!(fs, expected);
    }

    #[test]
    fn bare_numeral_gets_tablet_only() {
        let c = parse_corpus("&P1\n1. , 3(N01)\n", Strictness::Strict).unwrap().corpus;
        let t = &c.tablets()[0];
        let n = &extract_numerals(t).intact[0];
        let fs = extract_features(&n.location, t);
        assert_eq!(fs.len(), 1);
        assert_eq!(fs.iter().next().unwrap().kind, FeatureKind::Tablet);
    }

    #[test]
    fn object_is_sign_right_before_numeral() {
        let c = parse_corpus("&P2\nM9\n1. M1 2(N01) M2 M3 , 1(N14)\n", Strictness::Strict).unwrap().corpus;
        let t = &c.tablets()[0];
        let nums = extract_numerals(t).intact;
        let first = extract_features(&nums[0].location, t);
        let second = extract_features(&nums[1].location, t);
        let obj = |fs: &FeatureSet| fs.iter().filter(|x| x.kind == FeatureKind::Object).cloned().collect::<Vec<_>>();
        assert_eq!(obj(&first), vec![f(FeatureKind::Object, "M1")]);
        assert_eq!(obj(&second), vec![f(FeatureKind::Object, "M3")]);
        assert!(first.contains(&f(FeatureKind::FirstSign, "M9")));
        assert!(first.contains(&f(FeatureKind::ImplicitObject, "M3")));
    }
}
