//! Summary lines: a total on the reverse that equals some combination of
//! obverse entries pins down the system the tablet is written in.

mod subset;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::analysis::{analyze_tablet, AnalyzedNumeral, TabletNumerals};
use crate::atf::{Surface, Tablet};
use crate::numsys::{EvalOptions, SystemId, SystemSet, TableSet};
use crate::rational::Rational;

pub use subset::{subset_sum, subset_sum_with, SubsetSumConfig, SubsetSumError};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum SummaryReason {
    Annotated,
    ReverseFewEntries,
}

impl SummaryReason {
    pub fn as_str(self) -> &'static str {
        match self {
            SummaryReason::Annotated => "ANNOTATED",
            SummaryReason::ReverseFewEntries => "REVERSE_FEW_ENTRIES",
        }
    }
}

/// Points at one entry of a tablet.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct EntryRef {
    pub entry_index: usize,
    pub line_no: u32,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SummaryCandidate {
    pub tablet_id: String,
    pub entry: EntryRef,
    pub reason: SummaryReason,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SumMatch {
    pub tablet_id: String,
    pub system: SystemId,
    pub summary: EntryRef,
    pub components: Vec<EntryRef>,
    pub summary_value: Rational,
    /// Every candidate component on the tablet took part.
    pub full_cover: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Evidence {
    SummaryMatch,
    Unambiguous,
    Classifier,
    Manual,
}

impl Evidence {
    pub fn as_str(self) -> &'static str {
        match self {
            Evidence::SummaryMatch => "SUMMARY_MATCH",
            Evidence::Unambiguous => "UNAMBIGUOUS",
            Evidence::Classifier => "CLASSIFIER",
            Evidence::Manual => "MANUAL",
        }
    }
}

impl std::str::FromStr for Evidence {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "SUMMARY_MATCH" => Ok(Evidence::SummaryMatch),
            "UNAMBIGUOUS" => Ok(Evidence::Unambiguous),
            "CLASSIFIER" => Ok(Evidence::Classifier),
            "MANUAL" => Ok(Evidence::Manual),
            other => Err(format!("unknown evidence `{other}`")),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SystemAssignment {
    pub tablet_id: String,
    pub entry: EntryRef,
    pub system: SystemId,
    pub evidence: Evidence,
    pub note: String,
}

/// The entry is known to be in one of `allowed`, but not which.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SystemConstraint {
    pub tablet_id: String,
    pub entry: EntryRef,
    pub allowed: SystemSet,
    pub note: String,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SumcheckWarning {
    pub tablet_id: String,
    pub summary: EntryRef,
    pub system: Option<SystemId>,
    pub message: String,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SummaryAnalysis {
    pub tablet_id: String,
    pub candidates: Vec<SummaryCandidate>,
    pub matches: Vec<SumMatch>,
    pub assignments: Vec<SystemAssignment>,
    pub constraints: Vec<SystemConstraint>,
    pub warnings: Vec<SumcheckWarning>,
    /// A damaged notation kept matches from becoming assignments.
    pub damaged: bool,
}

pub fn detect_summaries(tablet: &Tablet) -> Vec<SummaryCandidate> {
    let reverse: Vec<usize> = tablet
        .entries
        .iter()
        .enumerate()
        .filter(|(_, e)| e.surface == Surface::Reverse && e.has_digits())
        .map(|(i, _)| i)
        .collect();
    let few = (1..=2).contains(&reverse.len());
    tablet
        .entries
        .iter()
        .enumerate()
        .filter_map(|(i, e)| {
            let reason = if e.summary_annotation {
                SummaryReason::Annotated
            } else if few && reverse.contains(&i) {
                SummaryReason::ReverseFewEntries
            } else {
                return None;
            };
            Some(SummaryCandidate {
                tablet_id: tablet.id.clone(),
                entry: EntryRef {
                    entry_index: i,
                    line_no: e.line_no,
                },
                reason,
            })
        })
        .collect()
}

pub fn disambiguate_by_summary(tablet: &Tablet, tables: &TableSet) -> SummaryAnalysis {
    disambiguate_with(&analyze_tablet(tablet, tables, EvalOptions::default()), &SubsetSumConfig::default())
}

pub fn disambiguate_with(numerals: &TabletNumerals<'_>, cfg: &SubsetSumConfig) -> SummaryAnalysis {
    let tablet = numerals.tablet;
    let tid = &tablet.id;
    let candidates = detect_summaries(tablet);
    let mut out = SummaryAnalysis {
        tablet_id: tid.clone(),
        damaged: numerals.has_damage(),
        ..Default::default()
    };

    let summary_idx: BTreeSet<usize> = candidates.iter().map(|c| c.entry.entry_index).collect();
    let entry_ref = |i: usize| EntryRef {
        entry_index: i,
        line_no: tablet.entries[i].line_no,
    };
    let components: Vec<(usize, &AnalyzedNumeral)> = (0..tablet.entries.len())
        .filter(|i| !summary_idx.contains(i) && tablet.entries[*i].surface != Surface::Reverse)
        .filter_map(|i| numerals.intact_for_entry(i).map(|n| (i, n)))
        .collect();
    let summaries: Vec<(&SummaryCandidate, &AnalyzedNumeral)> = candidates
        .iter()
        .filter_map(|c| {
            let n = numerals.intact_for_entry(c.entry.entry_index);
            if n.is_none() {
                out.warnings.push(SumcheckWarning {
                    tablet_id: tid.clone(),
                    summary: c.entry,
                    system: None,
                    message: "summary candidate has no intact numeral".into(),
                });
            }
            n.map(|n| (c, n))
        })
        .collect();

    // Per system, larger summaries claim their components first.
    let mut by_summary: BTreeMap<usize, BTreeMap<SystemId, Vec<usize>>> = BTreeMap::new();
    for system in SystemId::ALL {
        let mut order: Vec<(&SummaryCandidate, Rational)> = summaries
            .iter()
            .filter_map(|(c, n)| n.readings.get(system).map(|v| (*c, v)))
            .filter(|(_, v)| v.is_positive())
            .collect();
        order.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.entry.entry_index.cmp(&b.0.entry.entry_index)));
        let mut used: BTreeSet<usize> = BTreeSet::new();
        for (cand, target) in order {
            let pool: Vec<(usize, Rational)> = components
                .iter()
                .filter(|(i, _)| !used.contains(i))
                .filter_map(|(i, n)| n.readings.get(system).map(|v| (*i, v)))
                .collect();
            let values: Vec<Rational> = pool.iter().map(|p| p.1).collect();
            match subset_sum_with(&values, target, cfg) {
                Ok(Some(picked)) => {
                    let idx: Vec<usize> = picked.iter().map(|&k| pool[k].0).collect();
                    used.extend(idx.iter().copied());
                    out.matches.push(SumMatch {
                        tablet_id: tid.clone(),
                        system,
                        summary: cand.entry,
                        components: idx.iter().map(|&i| entry_ref(i)).collect(),
                        summary_value: target,
                        full_cover: idx.len() == components.len(),
                    });
                    by_summary.entry(cand.entry.entry_index).or_default().insert(system, idx);
                }
                Ok(None) => {}
                Err(e) => out.warnings.push(SumcheckWarning {
                    tablet_id: tid.clone(),
                    summary: cand.entry,
                    system: Some(system),
                    message: e.to_string(),
                }),
            }
        }
    }

    if out.damaged {
        return out;
    }

    let numeral_of = |i: usize| numerals.intact_for_entry(i).expect("matched entries are intact");
    let mut assigned: BTreeMap<usize, SystemAssignment> = BTreeMap::new();
    let mut conflicted: BTreeSet<usize> = BTreeSet::new();
    for (cand, summary) in &summaries {
        let s_idx = cand.entry.entry_index;
        let Some(hits) = by_summary.get(&s_idx) else { continue };
        let matched: SystemSet = hits.keys().copied().collect();
        let witnessed: Vec<SystemId> = hits
            .iter()
            .filter(|(sys, comps)| {
                summary.valid().sole() == Some(**sys) || comps.iter().any(|&i| numeral_of(i).valid().sole() == Some(**sys))
            })
            .map(|(sys, _)| *sys)
            .collect();

        if let [system] = witnessed[..] {
            let comps = &hits[&system];
            let note = format!(
                "sum of lines {} = {}{}",
                comps.iter().map(|&i| tablet.entries[i].line_no.to_string()).collect::<Vec<_>>().join(","),
                summary.readings.get(system).expect("matched summary has a reading"),
                if comps.len() == components.len() { " (full cover)" } else { "" }
            );
            for &i in std::iter::once(&s_idx).chain(comps.iter()) {
                let a = SystemAssignment {
                    tablet_id: tid.clone(),
                    entry: entry_ref(i),
                    system,
                    evidence: Evidence::SummaryMatch,
                    note: note.clone(),
                };
                match assigned.get(&i) {
                    Some(prev) if prev.system != system => {
                        conflicted.insert(i);
                    }
                    Some(_) => {}
                    None => {
                        assigned.insert(i, a);
                    }
                }
            }
            continue;
        }

        if matched.intersection(summary.valid()) != summary.valid() || witnessed.len() > 1 {
            let note = if witnessed.len() > 1 {
                format!("summary matches in {matched}; witnesses disagree")
            } else {
                format!("summary matches only in {matched}")
            };
            let mut shared: Option<BTreeSet<usize>> = None;
            for comps in hits.values() {
                let set: BTreeSet<usize> = comps.iter().copied().collect();
                shared = Some(match shared {
                    None => set,
                    Some(prev) => prev.intersection(&set).copied().collect(),
                });
            }
            for i in std::iter::once(s_idx).chain(shared.unwrap_or_default()) {
                let allowed = matched.intersection(numeral_of(i).valid());
                if allowed != numeral_of(i).valid() {
                    out.constraints.push(SystemConstraint {
                        tablet_id: tid.clone(),
                        entry: entry_ref(i),
                        allowed,
                        note: note.clone(),
                    });
                }
            }
        }
    }
    for i in &conflicted {
        assigned.remove(i);
        out.warnings.push(SumcheckWarning {
            tablet_id: tid.clone(),
            summary: entry_ref(*i),
            system: None,
            message: "summaries assign conflicting systems; entry left unassigned".into(),
        });
    }
    out.assignments = assigned.into_values().collect();
    out.candidates = candidates;
    out
}

pub const REPORT_HEADER: &str = "tablet\tline\tsystems\tevidence\tvalue\tdetail";

/// One TSV record per match, assignment, constraint and warning.
pub fn write_report(analyses: &[SummaryAnalysis]) -> String {
    let mut s = String::new();
    writeln!(s, "{REPORT_HEADER}").unwrap();
    for a in analyses {
        for m in &a.matches {
            let comps: Vec<String> = m.components.iter().map(|c| c.line_no.to_string()).collect();
            writeln!(
                s,
                "{}\t{}\t{}\tSUM_MATCH\t{}\tcomponents={}{}",
                m.tablet_id,
                m.summary.line_no,
                m.system,
                m.summary_value,
                comps.join(","),
                if m.full_cover { ";full_cover" } else { "" }
            )
            .unwrap();
        }
        if a.damaged && !a.matches.is_empty() {
            writeln!(s, "{}\t-\t-\tDAMAGED\t-\tdamaged notation on tablet; matches not applied", a.tablet_id).unwrap();
        }
        for x in &a.assignments {
            writeln!(
                s,
                "{}\t{}\t{}\t{}\t-\t{}",
                x.tablet_id,
                x.entry.line_no,
                x.system,
                x.evidence.as_str(),
                x.note
            )
            .unwrap();
        }
        for c in &a.constraints {
            writeln!(
                s,
                "{}\t{}\t{}\tSUMMARY_CONSTRAINT\t-\t{}",
                c.tablet_id,
                c.entry.line_no,
                c.allowed.compact(),
                c.note
            )
            .unwrap();
        }
        for w in &a.warnings {
            writeln!(
                s,
                "{}\t{}\t{}\tWARNING\t-\t{}",
                w.tablet_id,
                w.summary.line_no,
                w.system.map_or("-".to_string(), |x| x.to_string()),
                w.message
            )
            .unwrap();
        }
    }
    s
}
