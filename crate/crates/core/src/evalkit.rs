//! Gold test sets and scoring of system predictions.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::Serialize;
use thiserror::Error;

use crate::analysis::{analyze_tablet, EntryNumeral, NumeralKey};
use crate::atf::Corpus;
use crate::numsys::{EvalOptions, SystemId, TableSet};

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TestItem {
    pub tablet_id: String,
    pub line: u32,
    pub gold: SystemId,
    pub evidence: String,
    /// The numeral the row resolved to.
    pub key: NumeralKey,
}

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum TestSetError {
    #[error("row {row}: expected 4 tab-separated fields, found {found}")]
    Fields { row: usize, found: usize },
    #[error("row {row}: bad line number `{value}`")]
    Line { row: usize, value: String },
    #[error("row {row}: {message}")]
    System { row: usize, message: String },
    #[error("row {row}: unknown tablet `{tablet}`")]
    UnknownTablet { row: usize, tablet: String },
    #[error("row {row}: tablet {tablet} has no line {line}")]
    UnknownEntry { row: usize, tablet: String, line: u32 },
    #[error("row {row}: line {line} of {tablet} appears on more than one surface")]
    AmbiguousLine { row: usize, tablet: String, line: u32 },
    #[error("row {row}: {tablet} line {line} has no intact numeral")]
    NoIntactNumeral { row: usize, tablet: String, line: u32 },
    #[error("row {row}: {tablet} line {line} cannot be read in {gold}")]
    InvalidGold {
        row: usize,
        tablet: String,
        line: u32,
        gold: SystemId,
    },
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct TestSet {
    pub items: Vec<TestItem>,
    pub errors: Vec<TestSetError>,
}

impl TestSet {
    pub fn class_counts(&self) -> BTreeMap<SystemId, usize> {
        let mut m: BTreeMap<SystemId, usize> = SystemId::ALL.into_iter().map(|s| (s, 0)).collect();
        for it in &self.items {
            *m.get_mut(&it.gold).unwrap() += 1;
        }
        m
    }
}

/// Reads `tablet<TAB>line<TAB>system<TAB>evidence` rows and checks each
/// one against the corpus. Rows that fail are reported, not dropped silently.
///
/// Blank lines and lines starting with `#` are skipped, as is a `tablet`
/// header before the first row.
pub fn load_test_set(text: &str, corpus: &Corpus, tables: &TableSet) -> TestSet {
    let mut set = TestSet::default();
    let mut first = true;
    for (i, raw) in text.lines().enumerate() {
        let row = i + 1;
        let line = raw.trim_end_matches('\r');
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        if std::mem::take(&mut first) && line.starts_with("tablet\t") {
            continue;
        }
        match check_row(row, line, corpus, tables) {
            Ok(item) => set.items.push(item),
            Err(e) => set.errors.push(e),
        }
    }
    set
}

fn check_row(row: usize, line: &str, corpus: &Corpus, tables: &TableSet) -> Result<TestItem, TestSetError> {
    let fields: Vec<&str> = line.split('\t').collect();
    if fields.len() != 4 {
        return Err(TestSetError::Fields {
            row,
            found: fields.len(),
        });
    }
    let tablet_id = fields[0].trim().to_string();
    let line_no: u32 = fields[1].trim().parse().map_err(|_| TestSetError::Line {
        row,
        value: fields[1].to_string(),
    })?;
    let gold: SystemId = fields[2].parse().map_err(|e: crate::numsys::ParseSystemError| TestSetError::System {
        row,
        message: e.to_string(),
    })?;
    let tablet = corpus.get(&tablet_id).ok_or_else(|| TestSetError::UnknownTablet {
        row,
        tablet: tablet_id.clone(),
    })?;
    let hits: Vec<usize> = tablet.entry_by_line(line_no).map(|(i, _)| i).collect();
    let entry_index = match hits[..] {
        [] => {
            return Err(TestSetError::UnknownEntry {
                row,
                tablet: tablet_id,
                line: line_no,
            })
        }
        [i] => i,
        _ => {
            return Err(TestSetError::AmbiguousLine {
                row,
                tablet: tablet_id,
                line: line_no,
            })
        }
    };
    let tn = analyze_tablet(tablet, tables, EvalOptions::default());
    let numeral = match tn.entry_numeral(entry_index) {
        Some(EntryNumeral::Intact(n)) => n,
        _ => {
            return Err(TestSetError::NoIntactNumeral {
                row,
                tablet: tablet_id,
                line: line_no,
            })
        }
    };
    if !numeral.valid().contains(gold) {
        return Err(TestSetError::InvalidGold {
            row,
            tablet: tablet_id,
            line: line_no,
            gold,
        });
    }
    Ok(TestItem {
        key: numeral.key(),
        tablet_id,
        line: line_no,
        gold,
        evidence: fields[3].to_string(),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Mode {
    FourWay,
    /// Capacity against everything else.
    TwoWay,
}

impl Mode {
    pub fn labels(self) -> &'static [&'static str] {
        match self {
            Mode::FourWay => &["B", "C", "D", "S"],
            Mode::TwoWay => &["C", "NONC"],
        }
    }

    fn label(self, s: SystemId) -> usize {
        match self {
            Mode::FourWay => s.index(),
            Mode::TwoWay => usize::from(s != SystemId::C),
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Mode::FourWay => "FOUR_WAY",
            Mode::TwoWay => "TWO_WAY",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Average {
    #[default]
    Micro,
    Macro,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ClassScore {
    pub label: String,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub support: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Metrics {
    pub mode: Mode,
    pub average: Average,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub accuracy: f64,
    pub items: usize,
    pub labels: Vec<String>,
    /// `confusion[gold][predicted]`.
    pub confusion: Vec<Vec<usize>>,
    pub per_class: Vec<ClassScore>,
}

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum EvalError {
    #[error("no prediction for gold item {tablet} line {line}")]
    MissingPrediction { tablet: String, line: u32 },
}

fn ratio(a: usize, b: usize) -> f64 {
    if b == 0 {
        0.0
    } else {
        a as f64 / b as f64
    }
}

fn f1(p: f64, r: f64) -> f64 {
    if p + r == 0.0 {
        0.0
    } else {
        2.0 * p * r / (p + r)
    }
}

pub fn evaluate(
    predictions: &BTreeMap<NumeralKey, SystemId>,
    gold: &[TestItem],
    mode: Mode,
) -> Result<Metrics, EvalError> {
    evaluate_with(predictions, gold, mode, Average::Micro)
}

pub fn evaluate_with(
    predictions: &BTreeMap<NumeralKey, SystemId>,
    gold: &[TestItem],
    mode: Mode,
    average: Average,
) -> Result<Metrics, EvalError> {
    let labels = mode.labels();
    let k = labels.len();
    let mut confusion = vec![vec![0usize; k]; k];
    for item in gold {
        let p = predictions.get(&item.key).ok_or_else(|| EvalError::MissingPrediction {
            tablet: item.tablet_id.clone(),
            line: item.line,
        })?;
        confusion[mode.label(item.gold)][mode.label(*p)] += 1;
    }
    let per_class: Vec<ClassScore> = (0..k)
        .map(|c| {
            let tp = confusion[c][c];
            let gold_c: usize = confusion[c].iter().sum();
            let pred_c: usize = (0..k).map(|g| confusion[g][c]).sum();
            let precision = ratio(tp, pred_c);
            let recall = ratio(tp, gold_c);
            ClassScore {
                label: labels[c].to_string(),
                precision,
                recall,
                f1: f1(precision, recall),
                support: gold_c,
            }
        })
        .collect();
    let tp: usize = (0..k).map(|c| confusion[c][c]).sum();
    let total = gold.len();
    let (precision, recall, f) = match average {
        Average::Micro => {
            let fp: usize = (0..k).map(|c| (0..k).filter(|&g| g != c).map(|g| confusion[g][c]).sum::<usize>()).sum();
            let fn_: usize = (0..k).map(|c| (0..k).filter(|&p| p != c).map(|p| confusion[c][p]).sum::<usize>()).sum();
            let p = ratio(tp, tp + fp);
            let r = ratio(tp, tp + fn_);
            (p, r, f1(p, r))
        }
        Average::Macro => {
            let present: Vec<&ClassScore> = per_class.iter().filter(|c| c.support > 0).collect();
            let n = present.len().max(1) as f64;
            (
                present.iter().map(|c| c.precision).sum::<f64>() / n,
                present.iter().map(|c| c.recall).sum::<f64>() / n,
                present.iter().map(|c| c.f1).sum::<f64>() / n,
            )
        }
    };
    Ok(Metrics {
        mode,
        average,
        precision,
        recall,
        f1: f,
        accuracy: ratio(tp, total),
        items: total,
        labels: labels.iter().map(|s| s.to_string()).collect(),
        confusion,
        per_class,
    })
}

impl Metrics {
    /// Gold labels down the rows, predictions across.
    pub fn confusion_tsv(&self) -> String {
        let mut s = String::from("gold\\predicted");
        for l in &self.labels {
            write!(s, "\t{l}").unwrap();
        }
        s.push('\n');
        for (l, row) in self.labels.iter().zip(&self.confusion) {
            s.push_str(l);
            for v in row {
                write!(s, "\t{v}").unwrap();
            }
            s.push('\n');
        }
        s
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("metrics serialize")
    }
}
