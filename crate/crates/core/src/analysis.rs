//! Readings for every numeral of a corpus, computed once and shared by the
//! disambiguation and reporting passes.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::atf::{extract_numerals, Corpus, NumeralNotation, Tablet};
use crate::numsys::{readings_with, EvalOptions, ReadingSet, SystemSet, TableSet};

/// Stable identity of one numeral within a corpus.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct NumeralKey {
    pub tablet_id: String,
    pub entry_index: usize,
    pub token_index: usize,
}

impl NumeralKey {
    pub fn of(n: &NumeralNotation) -> Self {
        NumeralKey {
            tablet_id: n.location.tablet_id.clone(),
            entry_index: n.location.entry_index,
            token_index: n.location.token_index,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AnalyzedNumeral {
    pub notation: NumeralNotation,
    pub readings: ReadingSet,
}

impl AnalyzedNumeral {
    pub fn key(&self) -> NumeralKey {
        NumeralKey::of(&self.notation)
    }

    pub fn valid(&self) -> SystemSet {
        self.readings.valid_systems()
    }
}

/// The numeral an entry is read as: the last notation on its line.
#[derive(Clone, Copy, Debug)]
pub enum EntryNumeral<'a> {
    Intact(&'a AnalyzedNumeral),
    Damaged(&'a NumeralNotation),
}

#[derive(Clone, Debug)]
pub struct TabletNumerals<'a> {
    pub tablet: &'a Tablet,
    pub intact: Vec<AnalyzedNumeral>,
    pub damaged: Vec<NumeralNotation>,
}

impl<'a> TabletNumerals<'a> {
    pub fn entry_numeral(&self, entry_index: usize) -> Option<EntryNumeral<'_>> {
        let intact = self
            .intact
            .iter()
            .filter(|n| n.notation.location.entry_index == entry_index)
            .max_by_key(|n| n.notation.location.token_index);
        let damaged = self
            .damaged
            .iter()
            .filter(|n| n.location.entry_index == entry_index)
            .max_by_key(|n| n.location.token_index);
        match (intact, damaged) {
            (Some(i), Some(d)) if d.location.token_index > i.notation.location.token_index => {
                Some(EntryNumeral::Damaged(d))
            }
            (Some(i), _) => Some(EntryNumeral::Intact(i)),
            (None, Some(d)) => Some(EntryNumeral::Damaged(d)),
            (None, None) => None,
        }
    }

    pub fn intact_for_entry(&self, entry_index: usize) -> Option<&AnalyzedNumeral> {
        match self.entry_numeral(entry_index) {
            Some(EntryNumeral::Intact(n)) => Some(n),
            _ => None,
        }
    }

    pub fn has_damage(&self) -> bool {
        !self.damaged.is_empty()
    }
}

pub fn analyze_tablet<'a>(tablet: &'a Tablet, tables: &TableSet, opts: EvalOptions) -> TabletNumerals<'a> {
    let ex = extract_numerals(tablet);
    let intact = ex
        .intact
        .into_iter()
        .map(|notation| {
            let readings = readings_with(&notation.runs, tables, opts);
            AnalyzedNumeral { notation, readings }
        })
        .collect();
    TabletNumerals {
        tablet,
        intact,
        damaged: ex.damaged,
    }
}

pub fn analyze_corpus<'a>(corpus: &'a Corpus, tables: &TableSet, opts: EvalOptions) -> Vec<TabletNumerals<'a>> {
    corpus
        .tablets()
        .iter()
        .map(|t| analyze_tablet(t, tables, opts))
        .collect()
}

/// Count of numerals per set of valid systems; all sixteen rows present.
pub fn ambiguity_distribution<'a, I>(readings: I) -> BTreeMap<SystemSet, usize>
where
    I: IntoIterator<Item = &'a ReadingSet>,
{
    let mut dist: BTreeMap<SystemSet, usize> = SystemSet::all_subsets().into_iter().map(|s| (s, 0)).collect();
    for rs in readings {
        *dist.entry(rs.valid_systems()).or_default() += 1;
    }
    dist
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::atf::{parse_corpus, Strictness};
    use crate::numsys::SystemId;
    use crate::rational::Rational;

    const P008805: &str = "&P008805\n@obverse\n1. M056~f , 1(N34) 5(N14) 1(N01) 1(N8B)\n2. M341 M288 , 7(N14) 2(N01) 3(N39B)\n";

    #[test]
    fn p008805_readings() {
        let corpus = parse_corpus(P008805, Strictness::Strict).unwrap().corpus;
        let ts = TableSet::paper_examples();
        let all = analyze_corpus(&corpus, &ts, EvalOptions::default());
        let nums = &all[0].intact;
        assert_eq!(nums.len(), 2);
        assert_eq!(nums[0].readings.sole_system(), Some(SystemId::S));
        assert_eq!(nums[0].readings.get(SystemId::S), Some(Rational::new(223, 2)));
        assert_eq!(nums[1].readings.sole_system(), Some(SystemId::C));
        assert_eq!(nums[1].readings.get(SystemId::C), Some(Rational::new(223, 5)));

        let dist = ambiguity_distribution(nums.iter().map(|n| &n.readings));
        assert_eq!(dist.len(), 16);
        assert_eq!(dist[&SystemSet::single(SystemId::S)], 1);
        assert_eq!(dist[&SystemSet::single(SystemId::C)], 1);
        assert_eq!(dist.values().sum::<usize>(), 2);
    }

    #[test]
    fn entry_numeral_prefers_last_notation() {
        let corpus = parse_corpus("&P1\n1. M1 1(N01) M2 , 2(N14) X\n2. , 3(N01)\n", Strictness::Strict)
            .unwrap()
            .corpus;
        let ts = TableSet::paper_examples();
        let tn = analyze_tablet(&corpus.tablets()[0], &ts, EvalOptions::default());
        assert!(matches!(tn.entry_numeral(0), Some(EntryNumeral::Damaged(_))));
        assert!(tn.intact_for_entry(1).is_some());
        assert!(tn.has_damage());
    }
}
