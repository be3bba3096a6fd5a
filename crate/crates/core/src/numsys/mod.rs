//! The four numeration systems and conversion of digit runs into readings.

mod eval;
mod table;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::rational::Rational;

pub use eval::{
    canonicalize, evaluate, is_canonical, lint, readings, readings_with, value_of, value_of_with,
    CanonicalizeError, EvalOptions, Invalid, NotationLint,
};
pub use table::{
    build_table, build_table_anchored, ChainLink, DigitEntry, MaxCount, SystemConfig, SystemTable,
    TableConfig, TableError, TableSet, FIGURE1_CHAIN, PAPER_EXAMPLES,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum SystemId {
    B,
    C,
    D,
    S,
}

impl SystemId {
    /// Alphabetical; also the tie-break order for predictions.
    pub const ALL: [SystemId; 4] = [SystemId::B, SystemId::C, SystemId::D, SystemId::S];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> SystemId {
        Self::ALL[i]
    }

    pub fn name(self) -> &'static str {
        match self {
            SystemId::B => "B",
            SystemId::C => "C",
            SystemId::D => "D",
            SystemId::S => "S",
        }
    }
}

impl fmt::Display for SystemId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
#[error("unknown number system `{0}` (expected S, D, B or C)")]
pub struct ParseSystemError(pub String);

impl FromStr for SystemId {
    type Err = ParseSystemError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "B" | "b" => Ok(SystemId::B),
            "C" | "c" => Ok(SystemId::C),
            "D" | "d" => Ok(SystemId::D),
            "S" | "s" => Ok(SystemId::S),
            other => Err(ParseSystemError(other.to_string())),
        }
    }
}

/// A subset of `{B, C, D, S}`.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize, Deserialize)]
pub struct SystemSet(u8);

impl SystemSet {
    pub const EMPTY: SystemSet = SystemSet(0);
    pub const FULL: SystemSet = SystemSet(0b1111);

    pub fn single(s: SystemId) -> Self {
        SystemSet(1 << s.index())
    }

    pub fn insert(&mut self, s: SystemId) {
        self.0 |= 1 << s.index();
    }

    pub fn remove(&mut self, s: SystemId) {
        self.0 &= !(1 << s.index());
    }

    pub fn contains(&self, s: SystemId) -> bool {
        self.0 & (1 << s.index()) != 0
    }

    pub fn len(&self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(&self) -> bool {
        self.0 == 0
    }

    pub fn iter(&self) -> impl Iterator<Item = SystemId> + '_ {
        SystemId::ALL.into_iter().filter(|s| self.contains(*s))
    }

    /// The only member, if there is exactly one.
    pub fn sole(&self) -> Option<SystemId> {
        (self.len() == 1).then(|| self.iter().next().unwrap())
    }

    pub fn intersection(&self, other: SystemSet) -> SystemSet {
        SystemSet(self.0 & other.0)
    }

    pub fn bits(&self) -> u8 {
        self.0
    }

    /// All 16 subsets ordered by size, then alphabetically.
    pub fn all_subsets() -> Vec<SystemSet> {
        let mut v: Vec<SystemSet> = (0u8..16).map(SystemSet).collect();
        v.sort_by_key(|s| (s.len(), s.iter().map(|x| x.index()).collect::<Vec<_>>()));
        v
    }

    /// Compact form such as `CS` or `-` for the empty set.
    pub fn compact(&self) -> String {
        if self.is_empty() {
            return "-".into();
        }
        self.iter().map(|s| s.name()).collect()
    }
}

impl FromIterator<SystemId> for SystemSet {
    fn from_iter<T: IntoIterator<Item = SystemId>>(iter: T) -> Self {
        let mut set = SystemSet::EMPTY;
        for s in iter {
            set.insert(s);
        }
        set
    }
}

impl fmt::Debug for SystemSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{{}}}", self.compact())
    }
}

/// Reads like `none`, `S`, `C or D`, `B, C, or S`.
impl fmt::Display for SystemSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names: Vec<&str> = self.iter().map(|s| s.name()).collect();
        match names.as_slice() {
            [] => f.write_str("none"),
            [a] => f.write_str(a),
            [a, b] => write!(f, "{a} or {b}"),
            [init @ .., last] => write!(f, "{}, or {}", init.join(", "), last),
        }
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
#[error("invalid system set `{0}`")]
pub struct ParseSystemSetError(pub String);

impl FromStr for SystemSet {
    type Err = ParseSystemSetError;

    /// Accepts the compact form (`CS`, `-`).
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if s == "-" {
            return Ok(SystemSet::EMPTY);
        }
        s.chars()
            .map(|c| c.to_string().parse::<SystemId>())
            .collect::<Result<SystemSet, _>>()
            .map_err(|_| ParseSystemSetError(s.to_string()))
    }
}

/// Per-system value of one notation; `None` is the invalid reading.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct ReadingSet([Option<Rational>; 4]);

impl ReadingSet {
    pub fn new(values: [Option<Rational>; 4]) -> Self {
        ReadingSet(values)
    }

    pub fn get(&self, s: SystemId) -> Option<Rational> {
        self.0[s.index()]
    }

    pub fn set(&mut self, s: SystemId, v: Option<Rational>) {
        self.0[s.index()] = v;
    }

    pub fn valid_systems(&self) -> SystemSet {
        SystemId::ALL.into_iter().filter(|s| self.get(*s).is_some()).collect()
    }

    pub fn is_unambiguous(&self) -> bool {
        self.valid_systems().len() == 1
    }

    pub fn sole_system(&self) -> Option<SystemId> {
        self.valid_systems().sole()
    }

    pub fn is_invalid(&self) -> bool {
        self.valid_systems().is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (SystemId, Option<Rational>)> + '_ {
        SystemId::ALL.into_iter().map(|s| (s, self.get(s)))
    }
}

impl fmt::Debug for ReadingSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut m = f.debug_map();
        for (s, v) in self.iter() {
            match v {
                Some(v) => m.entry(&s, &v),
                None => m.entry(&s, &"⊥"),
            };
        }
        m.finish()
    }
}

/// Helper predicates on reading sets.
pub fn unambiguous(rs: &ReadingSet) -> bool {
    rs.is_unambiguous()
}

pub fn valid_systems(rs: &ReadingSet) -> SystemSet {
    rs.valid_systems()
}
