//! Corpus-level reports: invalid notations, tablets mixing systems,
//! signs tied to systems, ratio checks and magnitudes per feature.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::analysis::{analyze_corpus, AnalyzedNumeral, NumeralKey, TabletNumerals};
use crate::atf::{format_runs, Corpus, DigitRun, NumeralNotation, Token};
use crate::numsys::{canonicalize, evaluate, EvalOptions, Invalid, SystemId, SystemSet, TableSet};
use crate::rational::Rational;
use crate::selftrain::{extract_features, Feature};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum InvalidReason {
    /// Every sign is known to some system that holds them all, but a count
    /// is too high.
    BundlingViolation,
    /// A sign belongs to no system.
    UnknownSign,
    /// Each sign is known, but no single system has all of them.
    IncompatibleSigns,
}

impl InvalidReason {
    pub fn as_str(self) -> &'static str {
        match self {
            InvalidReason::BundlingViolation => "BUNDLING_VIOLATION",
            InvalidReason::UnknownSign => "UNKNOWN_SIGN",
            InvalidReason::IncompatibleSigns => "INCOMPATIBLE_SIGNS",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InvalidNotation {
    pub notation: NumeralNotation,
    pub reason: InvalidReason,
    pub detail: String,
}

/// Why `runs` reads in no system, or `None` if some system reads it.
pub fn invalid_reason(runs: &[DigitRun], tables: &TableSet) -> Option<(InvalidReason, String)> {
    let results: Vec<(SystemId, Result<Rational, Invalid>)> = tables
        .iter()
        .map(|t| (t.system(), evaluate(runs, t, EvalOptions::default())))
        .collect();
    if results.iter().any(|(_, r)| r.is_ok()) {
        return None;
    }
    if let Some(r) = runs.iter().find(|r| !tables.knows(r.sign)) {
        return Some((InvalidReason::UnknownSign, format!("{} is not a digit of any system", r.sign)));
    }
    let bundling: Vec<String> = results
        .iter()
        .filter_map(|(s, r)| match r {
            Err(Invalid::ExceedsMaxCount { sign, count, max }) => Some(format!("{s}: {count}({sign}) exceeds {max}")),
            _ => None,
        })
        .collect();
    if bundling.is_empty() {
        Some((InvalidReason::IncompatibleSigns, "no system uses all of these signs".into()))
    } else {
        Some((InvalidReason::BundlingViolation, bundling.join("; ")))
    }
}

pub fn invalid_report(corpus: &Corpus, tables: &TableSet) -> Vec<InvalidNotation> {
    analyze_corpus(corpus, tables, EvalOptions::default())
        .iter()
        .flat_map(|tn| tn.intact.iter())
        .filter(|n| n.readings.is_invalid())
        .filter_map(|n| {
            invalid_reason(&n.notation.runs, tables).map(|(reason, detail)| InvalidNotation {
                notation: n.notation.clone(),
                reason,
                detail,
            })
        })
        .collect()
}

fn attested(tn: &TabletNumerals<'_>) -> SystemSet {
    tn.intact.iter().filter_map(|n| n.readings.sole_system()).collect()
}

/// Tablets whose unambiguous notations come from two or more systems.
pub fn mixed_system_report(corpus: &Corpus, tables: &TableSet) -> BTreeMap<String, SystemSet> {
    analyze_corpus(corpus, tables, EvalOptions::default())
        .iter()
        .map(|tn| (tn.tablet.id.clone(), attested(tn)))
        .filter(|(_, s)| s.len() >= 2)
        .collect()
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct SignAssociation {
    pub counts: BTreeMap<SystemId, usize>,
    pub systems: SystemSet,
    /// Seen with more than one system; likely a qualifier, not an object.
    pub multi_system: bool,
}

impl SignAssociation {
    pub fn total(&self) -> usize {
        self.counts.values().sum()
    }
}

/// Text sign written immediately before a notation, if any.
fn preceding_sign<'a>(tn: &'a TabletNumerals<'_>, n: &AnalyzedNumeral) -> Option<&'a str> {
    let loc = &n.notation.location;
    let entry = tn.tablet.entries.get(loc.entry_index)?;
    let prev = loc.token_index.checked_sub(1)?;
    entry.tokens().nth(prev).and_then(Token::as_text)
}

pub fn object_system_associations(corpus: &Corpus, tables: &TableSet) -> BTreeMap<String, SignAssociation> {
    let mut by_sign: BTreeMap<String, SignAssociation> = BTreeMap::new();
    for tn in analyze_corpus(corpus, tables, EvalOptions::default()) {
        for n in &tn.intact {
            let (Some(sys), Some(sign)) = (n.readings.sole_system(), preceding_sign(&tn, n)) else {
                continue;
            };
            let a = by_sign.entry(sign.to_string()).or_default();
            *a.counts.entry(sys).or_default() += 1;
            a.systems.insert(sys);
        }
    }
    by_sign.retain(|_, a| a.total() >= 2);
    for a in by_sign.values_mut() {
        a.multi_system = a.systems.len() > 1;
    }
    by_sign
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum RatioScope {
    WithinTablet,
    AdjacentEntries,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RatioSpec {
    pub antecedent: String,
    pub consequent: String,
    pub expected: Rational,
    pub scope: RatioScope,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Verdict {
    Match,
    Deviation,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RatioFinding {
    pub tablet_id: String,
    pub antecedent_lines: Vec<u32>,
    pub consequent_lines: Vec<u32>,
    pub antecedent_value: Rational,
    pub consequent_value: Rational,
    pub consequent_system: SystemId,
    pub observed: Rational,
    pub expected: Rational,
    pub verdict: Verdict,
    /// Canonical notation of the consequent value the ratio calls for.
    pub suggestion: Option<String>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct RatioReport {
    pub findings: Vec<RatioFinding>,
    pub warnings: Vec<String>,
}

/// Single-system value of an entry: the assigned reading if one is given,
/// otherwise the sole valid reading.
fn entry_value(
    n: &AnalyzedNumeral,
    assignments: Option<&BTreeMap<NumeralKey, SystemId>>,
) -> Option<(SystemId, Rational)> {
    let sys = assignments
        .and_then(|a| a.get(&n.key()).copied())
        .or_else(|| n.readings.sole_system())?;
    n.readings.get(sys).map(|v| (sys, v))
}

struct Side {
    lines: Vec<u32>,
    total: Rational,
    system: SystemId,
}

pub fn ratio_check(
    corpus: &Corpus,
    spec: &RatioSpec,
    tables: &TableSet,
    assignments: Option<&BTreeMap<NumeralKey, SystemId>>,
) -> RatioReport {
    let mut report = RatioReport::default();
    if !spec.expected.is_positive() {
        report.warnings.push(format!("expected ratio {} is not positive", spec.expected));
        return report;
    }
    for tn in analyze_corpus(corpus, tables, EvalOptions::default()) {
        let tid = &tn.tablet.id;
        // (entry index, is antecedent, line, system, value)
        let mut tagged: Vec<(usize, bool, u32, SystemId, Rational)> = Vec::new();
        for (i, e) in tn.tablet.entries.iter().enumerate() {
            let Some(last) = e.text.iter().filter_map(Token::as_text).next_back() else { continue };
            let role = if last == spec.antecedent {
                true
            } else if last == spec.consequent {
                false
            } else {
                continue;
            };
            let Some(n) = tn.intact_for_entry(i) else {
                report.warnings.push(format!("{tid} line {}: no intact numeral", e.line_no));
                continue;
            };
            match entry_value(n, assignments) {
                Some((sys, v)) => tagged.push((i, role, e.line_no, sys, v)),
                None => report
                    .warnings
                    .push(format!("{tid} line {}: no single-system value for {}", e.line_no, n.notation)),
            }
        }
        let groups: Vec<(Side, Side)> = match spec.scope {
            RatioScope::WithinTablet => {
                let side = |role: bool| {
                    let part: Vec<_> = tagged.iter().filter(|t| t.1 == role).collect();
                    let last = part.last()?;
                    Some(Side {
                        lines: part.iter().map(|t| t.2).collect(),
                        total: part.iter().map(|t| t.4).sum(),
                        system: last.3,
                    })
                };
                match (side(true), side(false)) {
                    (Some(a), Some(c)) => vec![(a, c)],
                    _ => vec![],
                }
            }
            RatioScope::AdjacentEntries => tagged
                .windows(2)
                .filter(|w| w[1].0 == w[0].0 + 1 && w[0].1 != w[1].1)
                .map(|w| {
                    let (a, c) = if w[0].1 { (&w[0], &w[1]) } else { (&w[1], &w[0]) };
                    (
                        Side {
                            lines: vec![a.2],
                            total: a.4,
                            system: a.3,
                        },
                        Side {
                            lines: vec![c.2],
                            total: c.4,
                            system: c.3,
                        },
                    )
                })
                .collect(),
        };
        for (a, c) in groups {
            if a.total.is_zero() || c.total.is_zero() {
                report
                    .warnings
                    .push(format!("{tid}: zero value on lines {:?}/{:?}; ratio skipped", a.lines, c.lines));
                continue;
            }
            let observed = a.total / c.total;
            let verdict = if observed == spec.expected {
                Verdict::Match
            } else {
                Verdict::Deviation
            };
            let suggestion = (verdict == Verdict::Deviation)
                .then(|| canonicalize(a.total / spec.expected, tables.get(c.system)).ok())
                .flatten()
                .map(|r| format_runs(&r));
            report.findings.push(RatioFinding {
                tablet_id: tid.clone(),
                antecedent_lines: a.lines,
                consequent_lines: c.lines,
                antecedent_value: a.total,
                consequent_value: c.total,
                consequent_system: c.system,
                observed,
                expected: spec.expected,
                verdict,
                suggestion,
            });
        }
    }
    report
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct MagnitudeRow {
    pub feature: Feature,
    pub system: SystemId,
    pub count: usize,
    pub mean: Rational,
    pub median: Rational,
}

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum MagnitudeError {
    #[error("{tablet} line {line}: numeral has no system assignment (run classify first)")]
    MissingAssignment { tablet: String, line: u32 },
    #[error("{tablet} line {line}: assigned system {system} cannot read this numeral")]
    InvalidAssignment { tablet: String, line: u32, system: SystemId },
}

/// Mean and median value per feature, kept apart per system.
pub fn magnitude_stats(
    corpus: &Corpus,
    assignments: &BTreeMap<NumeralKey, SystemId>,
    tables: &TableSet,
) -> Result<Vec<MagnitudeRow>, MagnitudeError> {
    let mut groups: BTreeMap<(Feature, SystemId), Vec<Rational>> = BTreeMap::new();
    for tn in analyze_corpus(corpus, tables, EvalOptions::default()) {
        for n in tn.intact.iter().filter(|n| !n.readings.is_invalid()) {
            let loc = &n.notation.location;
            let sys = assignments.get(&n.key()).copied().ok_or_else(|| MagnitudeError::MissingAssignment {
                tablet: loc.tablet_id.clone(),
                line: loc.line_no,
            })?;
            let v = n.readings.get(sys).ok_or_else(|| MagnitudeError::InvalidAssignment {
                tablet: loc.tablet_id.clone(),
                line: loc.line_no,
                system: sys,
            })?;
            for f in extract_features(loc, tn.tablet) {
                groups.entry((f, sys)).or_default().push(v);
            }
        }
    }
    let mut rows: Vec<MagnitudeRow> = groups
        .into_iter()
        .map(|((feature, system), mut vals)| {
            vals.sort();
            let count = vals.len();
            let mean = vals.iter().copied().sum::<Rational>() / Rational::from_integer(count as i128);
            let median = if count % 2 == 1 {
                vals[count / 2]
            } else {
                (vals[count / 2 - 1] + vals[count / 2]) / Rational::from_integer(2)
            };
            MagnitudeRow {
                feature,
                system,
                count,
                mean,
                median,
            }
        })
        .collect();
    rows.sort_by(|a, b| {
        b.mean
            .cmp(&a.mean)
            .then_with(|| a.feature.cmp(&b.feature))
            .then(a.system.cmp(&b.system))
    });
    Ok(rows)
}

pub fn invalid_tsv(rows: &[InvalidNotation]) -> String {
    let mut s = String::from("tablet\tline\tnotation\treason\tdetail\n");
    for r in rows {
        let loc = &r.notation.location;
        writeln!(s, "{}\t{}\t{}\t{}\t{}", loc.tablet_id, loc.line_no, r.notation, r.reason.as_str(), r.detail).unwrap();
    }
    s
}

pub fn mixed_tsv(rows: &BTreeMap<String, SystemSet>) -> String {
    let mut s = String::from("tablet\tsystems\n");
    for (t, set) in rows {
        writeln!(s, "{t}\t{}", set.compact()).unwrap();
    }
    s
}

pub fn associations_tsv(rows: &BTreeMap<String, SignAssociation>) -> String {
    let mut s = String::from("sign\tsystems\tB\tC\tD\tS\tmulti_system\n");
    for (sign, a) in rows {
        write!(s, "{sign}\t{}", a.systems.compact()).unwrap();
        for sys in SystemId::ALL {
            write!(s, "\t{}", a.counts.get(&sys).copied().unwrap_or(0)).unwrap();
        }
        writeln!(s, "\t{}", a.multi_system).unwrap();
    }
    s
}

fn join_lines(lines: &[u32]) -> String {
    lines.iter().map(|l| l.to_string()).collect::<Vec<_>>().join(",")
}

pub fn ratio_tsv(report: &RatioReport) -> String {
    let mut s = String::from("tablet\tantecedent_lines\tconsequent_lines\tantecedent\tconsequent\tconsequent_system\tobserved\texpected\tverdict\tsuggestion\n");
    for f in &report.findings {
        writeln!(
            s,
            "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}",
            f.tablet_id,
            join_lines(&f.antecedent_lines),
            join_lines(&f.consequent_lines),
            f.antecedent_value,
            f.consequent_value,
            f.consequent_system,
            f.observed,
            f.expected,
            match f.verdict {
                Verdict::Match => "MATCH",
                Verdict::Deviation => "DEVIATION",
            },
            f.suggestion.as_deref().unwrap_or("-")
        )
        .unwrap();
    }
    s
}

pub fn magnitude_tsv(rows: &[MagnitudeRow]) -> String {
    let mut s = String::from("kind\tvalue\tsystem\tcount\tmean\tmedian\tmean_decimal\n");
    for r in rows {
        writeln!(
            s,
            "{}\t{}\t{}\t{}\t{}\t{}\t{:.4}",
            r.feature.kind,
            r.feature.value,
            r.system,
            r.count,
            r.mean,
            r.median,
            r.mean.to_f64()
        )
        .unwrap();
    }
    s
}
