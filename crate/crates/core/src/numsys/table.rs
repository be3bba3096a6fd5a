use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::SystemId;
use crate::atf::{DigitSign, ParseSignError};
use crate::rational::{common_denominator, Rational};

/// Built-in profile whose digit names reproduce the worked examples.
pub const PAPER_EXAMPLES: &str = include_str!("../../tables/paper-examples.json");
/// Built-in profile that names only the glyphs identified in the chain figure.
pub const FIGURE1_CHAIN: &str = include_str!("../../tables/figure1-chain.json");

#[derive(Debug, Error, PartialEq, Eq)]
pub enum TableError {
    #[error("{system}: chain does not contain anchor sign {anchor}")]
    MissingAnchor { system: SystemId, anchor: DigitSign },
    #[error("{system}: N01 must be present with value 1")]
    MissingUnit { system: SystemId },
    #[error("{system}: duplicate sign {sign}")]
    DuplicateSign { system: SystemId, sign: DigitSign },
    #[error("{system}: multiplier after {sign} must be at least 2 (got {multiplier})")]
    BadMultiplier {
        system: SystemId,
        sign: DigitSign,
        multiplier: i64,
    },
    #[error("{system}: {sign} needs a multiplier to the next digit")]
    MissingMultiplier { system: SystemId, sign: DigitSign },
    #[error("{system}: top sign {sign} must not carry a multiplier")]
    TopMultiplier { system: SystemId, sign: DigitSign },
    #[error("{system}: empty chain")]
    EmptyChain { system: SystemId },
    #[error("{system}: extra sign {sign} needs a positive value")]
    BadExtraValue { system: SystemId, sign: DigitSign },
    #[error("{system}: values too large for exact evaluation")]
    Overflow { system: SystemId },
    #[error("bad sign name: {0}")]
    Sign(#[from] ParseSignError),
    #[error("system {0} missing from table config")]
    MissingSystem(SystemId),
    #[error("unknown table profile `{0}`")]
    UnknownProfile(String),
    #[error("table config: {0}")]
    Json(String),
}

/// One step of a bundling chain: `multiplier` copies of `sign` make one of
/// the next digit up. The top digit has no multiplier.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ChainLink {
    pub sign: DigitSign,
    pub multiplier: Option<i64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum MaxCount {
    Bounded(u32),
    Unbounded,
}

impl MaxCount {
    pub fn allows(&self, n: u32) -> bool {
        match *self {
            MaxCount::Bounded(m) => n <= m,
            MaxCount::Unbounded => true,
        }
    }

    pub fn bounded(&self) -> Option<u32> {
        match *self {
            MaxCount::Bounded(m) => Some(m),
            MaxCount::Unbounded => None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DigitEntry {
    pub sign: DigitSign,
    pub value: Rational,
    pub max_count: MaxCount,
    /// `value * scale` of the owning table; always an integer.
    pub(super) scaled: i128,
    pub in_chain: bool,
}

/// Digit values and repeat limits of one numeration system.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SystemTable {
    system: SystemId,
    chain: Vec<ChainLink>,
    /// Chain digits in ascending order, then extras.
    digits: Vec<DigitEntry>,
    scale: i128,
}

impl SystemTable {
    pub fn system(&self) -> SystemId {
        self.system
    }

    pub fn chain(&self) -> &[ChainLink] {
        &self.chain
    }

    pub fn digits(&self) -> &[DigitEntry] {
        &self.digits
    }

    /// Chain digits from largest to smallest.
    pub fn chain_descending(&self) -> impl Iterator<Item = &DigitEntry> {
        self.digits.iter().filter(|d| d.in_chain).rev()
    }

    pub fn lookup(&self, sign: DigitSign) -> Option<&DigitEntry> {
        self.digits.iter().find(|d| d.sign == sign)
    }

    pub fn contains(&self, sign: DigitSign) -> bool {
        self.lookup(sign).is_some()
    }

    pub fn value(&self, sign: DigitSign) -> Option<Rational> {
        self.lookup(sign).map(|d| d.value)
    }

    pub fn max_count(&self, sign: DigitSign) -> Option<MaxCount> {
        self.lookup(sign).map(|d| d.max_count)
    }

    /// Common denominator of every digit value.
    pub fn scale(&self) -> i128 {
        self.scale
    }

    pub fn top(&self) -> &DigitEntry {
        self.chain_descending().next().expect("non-empty chain")
    }
}

pub fn build_table(
    system: SystemId,
    chain: &[ChainLink],
    extra_signs: &[(DigitSign, Rational)],
) -> Result<SystemTable, TableError> {
    let unit: DigitSign = "N01".parse()?;
    build_table_anchored(system, chain, unit, extra_signs)
}

/// Values follow the cumulative multiplier product, with `anchor` worth one.
pub fn build_table_anchored(
    system: SystemId,
    chain: &[ChainLink],
    anchor: DigitSign,
    extra_signs: &[(DigitSign, Rational)],
) -> Result<SystemTable, TableError> {
    if chain.is_empty() {
        return Err(TableError::EmptyChain { system });
    }
    let mut seen = std::collections::HashSet::new();
    for sign in chain.iter().map(|l| l.sign).chain(extra_signs.iter().map(|e| e.0)) {
        if !seen.insert(sign) {
            return Err(TableError::DuplicateSign { system, sign });
        }
    }
    let last = chain.len() - 1;
    let mut mults = Vec::with_capacity(last);
    for (i, link) in chain.iter().enumerate() {
        match (i == last, link.multiplier) {
            (true, None) => {}
            (true, Some(_)) => {
                return Err(TableError::TopMultiplier {
                    system,
                    sign: link.sign,
                })
            }
            (false, None) => {
                return Err(TableError::MissingMultiplier {
                    system,
                    sign: link.sign,
                })
            }
            (false, Some(m)) if m < 2 => {
                return Err(TableError::BadMultiplier {
                    system,
                    sign: link.sign,
                    multiplier: m,
                })
            }
            (false, Some(m)) => mults.push(m as i128),
        }
    }
    let anchor_at = chain
        .iter()
        .position(|l| l.sign == anchor)
        .ok_or(TableError::MissingAnchor { system, anchor })?;

    let overflow = || TableError::Overflow { system };
    let mut values = vec![Rational::ONE; chain.len()];
    for i in anchor_at + 1..chain.len() {
        values[i] = values[i - 1]
            .checked_mul(&Rational::from_integer(mults[i - 1]))
            .ok_or_else(overflow)?;
    }
    for i in (0..anchor_at).rev() {
        values[i] = values[i + 1] / Rational::from_integer(mults[i]);
    }

    let mut digits: Vec<DigitEntry> = chain
        .iter()
        .enumerate()
        .map(|(i, l)| DigitEntry {
            sign: l.sign,
            value: values[i],
            max_count: if i == last {
                MaxCount::Unbounded
            } else {
                MaxCount::Bounded((mults[i] - 1) as u32)
            },
            scaled: 0,
            in_chain: true,
        })
        .collect();

    for &(sign, value) in extra_signs {
        if !value.is_positive() {
            return Err(TableError::BadExtraValue { system, sign });
        }
        // Largest count that stays below the next chain digit.
        let max_count = match values.iter().find(|v| **v > value) {
            Some(next) => {
                let ratio = *next / value;
                let ceil = if ratio.is_integer() { ratio.floor() } else { ratio.floor() + 1 };
                MaxCount::Bounded((ceil - 1).max(0) as u32)
            }
            None => MaxCount::Unbounded,
        };
        digits.push(DigitEntry {
            sign,
            value,
            max_count,
            scaled: 0,
            in_chain: false,
        });
    }

    let unit: DigitSign = "N01".parse()?;
    if !digits.iter().any(|d| d.sign == unit && d.value == Rational::ONE) {
        return Err(TableError::MissingUnit { system });
    }

    let all_values: Vec<Rational> = digits.iter().map(|d| d.value).collect();
    let scale = common_denominator(&all_values).ok_or_else(overflow)?;
    for d in &mut digits {
        let scaled = d.value.checked_mul(&Rational::from_integer(scale)).ok_or_else(overflow)?;
        debug_assert!(scaled.is_integer());
        d.scaled = scaled.numer();
    }

    Ok(SystemTable {
        system,
        chain: chain.to_vec(),
        digits,
        scale,
    })
}

/// JSON form of one system: ascending `[sign, multiplier]` pairs.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SystemConfig {
    #[serde(default = "default_anchor")]
    pub anchor: String,
    pub chain: Vec<(String, Option<i64>)>,
    #[serde(default)]
    pub extra: BTreeMap<String, Rational>,
}

fn default_anchor() -> String {
    "N01".into()
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TableConfig {
    pub profile: String,
    #[serde(default)]
    pub description: String,
    pub systems: BTreeMap<SystemId, SystemConfig>,
}

impl TableConfig {
    pub fn from_json(text: &str) -> Result<Self, TableError> {
        serde_json::from_str(text).map_err(|e| TableError::Json(e.to_string()))
    }

    pub fn build(&self) -> Result<TableSet, TableError> {
        let mut tables = Vec::with_capacity(4);
        for system in SystemId::ALL {
            let cfg = self.systems.get(&system).ok_or(TableError::MissingSystem(system))?;
            let chain = cfg
                .chain
                .iter()
                .map(|(s, m)| {
                    Ok(ChainLink {
                        sign: DigitSign::placeholder(s)?,
                        multiplier: *m,
                    })
                })
                .collect::<Result<Vec<_>, TableError>>()?;
            let extra = cfg
                .extra
                .iter()
                .map(|(s, v)| Ok((DigitSign::placeholder(s)?, *v)))
                .collect::<Result<Vec<_>, TableError>>()?;
            let anchor = DigitSign::placeholder(&cfg.anchor)?;
            tables.push(build_table_anchored(system, &chain, anchor, &extra)?);
        }
        Ok(TableSet {
            profile: self.profile.clone(),
            tables: tables.try_into().expect("four systems"),
        })
    }
}

/// One table per system.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TableSet {
    profile: String,
    tables: [SystemTable; 4],
}

impl TableSet {
    pub fn new(profile: impl Into<String>, tables: [SystemTable; 4]) -> Self {
        TableSet {
            profile: profile.into(),
            tables,
        }
    }

    /// Loads `paper-examples` or `figure1-chain`.
    pub fn builtin(profile: &str) -> Result<TableSet, TableError> {
        let text = match profile {
            "paper-examples" => PAPER_EXAMPLES,
            "figure1-chain" => FIGURE1_CHAIN,
            other => return Err(TableError::UnknownProfile(other.to_string())),
        };
        TableConfig::from_json(text)?.build()
    }

    pub fn paper_examples() -> TableSet {
        Self::builtin("paper-examples").expect("bundled table config")
    }

    pub fn from_json(text: &str) -> Result<TableSet, TableError> {
        TableConfig::from_json(text)?.build()
    }

    pub fn profile(&self) -> &str {
        &self.profile
    }

    pub fn get(&self, s: SystemId) -> &SystemTable {
        &self.tables[s.index()]
    }

    pub fn iter(&self) -> impl Iterator<Item = &SystemTable> {
        self.tables.iter()
    }

    /// True if any system knows the sign.
    pub fn knows(&self, sign: DigitSign) -> bool {
        self.tables.iter().any(|t| t.contains(sign))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sign(s: &str) -> DigitSign {
        DigitSign::placeholder(s).unwrap()
    }

    fn chain(links: &[(&str, Option<i64>)]) -> Vec<ChainLink> {
        links
            .iter()
            .map(|&(s, m)| ChainLink {
                sign: sign(s),
                multiplier: m,
            })
            .collect()
    }

    #[test]
    fn capacity_values_from_multipliers() {
        let c = chain(&[
            ("N39B", Some(5)),
            ("N01", Some(6)),
            ("N14", Some(10)),
            ("N45", Some(3)),
            ("N34", None),
        ]);
        let t = build_table(SystemId::C, &c, &[]).unwrap();
        assert_eq!(t.value(sign("N14")), Some(Rational::from_integer(6)));
        assert_eq!(t.value(sign("N45")), Some(Rational::from_integer(60)));
        assert_eq!(t.value(sign("N39B")), Some(Rational::new(1, 5)));
        assert_eq!(t.max_count(sign("N01")), Some(MaxCount::Bounded(5)));
        assert_eq!(t.max_count(sign("N34")), Some(MaxCount::Unbounded));
        assert_eq!(t.scale(), 5);
    }

    #[test]
    fn single_sign_chain() {
        let t = build_table(SystemId::D, &chain(&[("N01", None)]), &[]).unwrap();
        assert_eq!(t.max_count(sign("N01")), Some(MaxCount::Unbounded));
        assert_eq!(t.top().sign, sign("N01"));
    }

    #[test]
    fn decimal_powers() {
        let d = chain(&[
            ("N01", Some(10)),
            ("N14", Some(10)),
            ("U6", Some(10)),
            ("U5", Some(10)),
            ("U4", None),
        ]);
        let t = build_table(SystemId::D, &d, &[]).unwrap();
        let mut expected = 1i128;
        for link in &d {
            assert_eq!(t.value(link.sign), Some(Rational::from_integer(expected)));
            expected *= 10;
        }
    }

    #[test]
    fn construction_errors() {
        assert_eq!(
            build_table(SystemId::S, &chain(&[("N14", None)]), &[]),
            Err(TableError::MissingAnchor {
                system: SystemId::S,
                anchor: sign("N01")
            })
        );
        assert!(matches!(
            build_table(SystemId::S, &chain(&[("N01", Some(10)), ("N01", None)]), &[]),
            Err(TableError::DuplicateSign { .. })
        ));
        assert!(matches!(
            build_table(SystemId::S, &chain(&[("N01", Some(0)), ("N14", None)]), &[]),
            Err(TableError::BadMultiplier { multiplier: 0, .. })
        ));
        assert!(matches!(
            build_table(SystemId::S, &chain(&[("N01", Some(-3)), ("N14", None)]), &[]),
            Err(TableError::BadMultiplier { multiplier: -3, .. })
        ));
        assert!(matches!(
            build_table(SystemId::S, &chain(&[("N01", None), ("N14", None)]), &[]),
            Err(TableError::MissingMultiplier { .. })
        ));
        assert!(matches!(
            build_table(SystemId::S, &chain(&[("N01", Some(10))]), &[]),
            Err(TableError::TopMultiplier { .. })
        ));
        assert!(matches!(
            build_table(SystemId::S, &chain(&[("N01", None)]), &[(sign("N01"), Rational::ONE)]),
            Err(TableError::DuplicateSign { .. })
        ));
    }

    #[test]
    fn extra_sign_bound_below_next_digit() {
        let t = build_table(
            SystemId::S,
            &chain(&[("N8B", Some(2)), ("N01", None)]),
            &[(sign("N08"), Rational::new(1, 2))],
        )
        .unwrap();
        assert_eq!(t.max_count(sign("N08")), Some(MaxCount::Bounded(1)));
        assert!(!t.lookup(sign("N08")).unwrap().in_chain);
    }

    #[test]
    fn builtin_profiles_load() {
        for p in ["paper-examples", "figure1-chain"] {
            let ts = TableSet::builtin(p).unwrap();
            assert_eq!(ts.profile(), p);
            for t in ts.iter() {
                assert_eq!(t.value(sign("N01")), Some(Rational::ONE));
                let chain_values: Vec<Rational> = t.digits().iter().filter(|d| d.in_chain).map(|d| d.value).collect();
                assert!(chain_values.windows(2).all(|w| w[0] < w[1]));
            }
        }
        assert!(matches!(TableSet::builtin("nope"), Err(TableError::UnknownProfile(_))));
    }

    #[test]
    fn paper_examples_values() {
        let ts = TableSet::paper_examples();
        let s = ts.get(SystemId::S);
        assert_eq!(s.value(sign("N45")), Some(Rational::from_integer(3600)));
        assert_eq!(s.value(sign("N8B")), Some(Rational::new(1, 2)));
        assert_eq!(s.value(sign("N08")), Some(Rational::new(1, 2)));
        let c = ts.get(SystemId::C);
        assert_eq!(c.value(sign("U13")), Some(Rational::new(1, 120)));
        assert_eq!(c.scale(), 120);
        assert_eq!(c.top().value, Rational::from_integer(10800));
        let b = ts.get(SystemId::B);
        assert_eq!(b.value(sign("N51")), Some(Rational::from_integer(120)));
        assert_eq!(b.max_count(sign("N34")), Some(MaxCount::Bounded(1)));
    }

    #[test]
    fn config_rejects_missing_system() {
        let text = r#"{"profile":"x","systems":{"S":{"chain":[["N01",null]]}}}"#;
        assert!(matches!(TableSet::from_json(text), Err(TableError::MissingSystem(_))));
        assert!(matches!(TableSet::from_json("{"), Err(TableError::Json(_))));
    }
}
