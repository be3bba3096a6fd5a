use thiserror::Error;

use super::{ReadingSet, SystemTable, TableSet};
use crate::atf::{DigitRun, DigitSign};
use crate::rational::Rational;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct EvalOptions {
    /// Off only for diagnostics: every known sign is summed regardless of count.
    pub enforce_max_count: bool,
    /// Extra repeats tolerated on top of each digit's bound.
    pub slack: u32,
}

impl Default for EvalOptions {
    fn default() -> Self {
        EvalOptions {
            enforce_max_count: true,
            slack: 0,
        }
    }
}

impl EvalOptions {
    pub fn diagnostic() -> Self {
        EvalOptions {
            enforce_max_count: false,
            slack: 0,
        }
    }
}

/// Why a notation has no reading in a system.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Invalid {
    UnknownSign(DigitSign),
    ExceedsMaxCount { sign: DigitSign, count: u32, max: u32 },
}

/// Sums `count * value` per run, failing on the first sign the table lacks
/// or the first run that should have carried into the next digit.
pub fn evaluate(runs: &[DigitRun], table: &SystemTable, opts: EvalOptions) -> Result<Rational, Invalid> {
    let mut total: i128 = 0;
    for run in runs {
        let digit = table.lookup(run.sign).ok_or(Invalid::UnknownSign(run.sign))?;
        if opts.enforce_max_count {
            if let Some(max) = digit.max_count.bounded() {
                if run.count > max.saturating_add(opts.slack) {
                    return Err(Invalid::ExceedsMaxCount {
                        sign: run.sign,
                        count: run.count,
                        max,
                    });
                }
            }
        }
        total += run.count as i128 * digit.scaled;
    }
    Ok(Rational::new(total, table.scale()))
}

pub fn value_of(runs: &[DigitRun], table: &SystemTable) -> Option<Rational> {
    evaluate(runs, table, EvalOptions::default()).ok()
}

pub fn value_of_with(runs: &[DigitRun], table: &SystemTable, opts: EvalOptions) -> Option<Rational> {
    evaluate(runs, table, opts).ok()
}

pub fn readings(runs: &[DigitRun], tables: &TableSet) -> ReadingSet {
    readings_with(runs, tables, EvalOptions::default())
}

pub fn readings_with(runs: &[DigitRun], tables: &TableSet, opts: EvalOptions) -> ReadingSet {
    let mut rs = ReadingSet::default();
    for table in tables.iter() {
        rs.set(table.system(), value_of_with(runs, table, opts));
    }
    rs
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum CanonicalizeError {
    #[error("only positive values have a notation (got {0})")]
    NotPositive(Rational),
    #[error("{value} leaves remainder {remainder} below the smallest digit")]
    NotRepresentable { value: Rational, remainder: Rational },
}

/// Greedy decomposition over the chain, largest digit first.
pub fn canonicalize(value: Rational, table: &SystemTable) -> Result<Vec<DigitRun>, CanonicalizeError> {
    if !value.is_positive() {
        return Err(CanonicalizeError::NotPositive(value));
    }
    let mut remainder = value;
    let mut out = Vec::new();
    for digit in table.chain_descending() {
        let k = (remainder / digit.value).floor();
        if k > 0 {
            let count = u32::try_from(k).map_err(|_| CanonicalizeError::NotRepresentable { value, remainder })?;
            out.push(DigitRun::new(count, digit.sign));
            remainder = remainder - digit.value.mul_int(k);
        }
    }
    if !remainder.is_zero() {
        return Err(CanonicalizeError::NotRepresentable { value, remainder });
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NotationLint {
    pub value: Result<Rational, Invalid>,
    /// Runs appear with strictly decreasing digit values.
    pub descending: bool,
    pub canonical: bool,
    pub canonical_form: Option<Vec<DigitRun>>,
}

/// Ordering and bundling checks, reported separately.
pub fn lint(runs: &[DigitRun], table: &SystemTable) -> NotationLint {
    let value = evaluate(runs, table, EvalOptions::default());
    let digit_values: Option<Vec<Rational>> = runs.iter().map(|r| table.value(r.sign)).collect();
    let descending = digit_values.is_some_and(|v| v.windows(2).all(|w| w[0] > w[1]));
    let canonical_form = match value {
        Ok(v) if v.is_positive() => canonicalize(v, table).ok(),
        _ => None,
    };
    let canonical = canonical_form.as_deref() == Some(runs);
    NotationLint {
        value,
        descending,
        canonical,
        canonical_form,
    }
}

pub fn is_canonical(runs: &[DigitRun], table: &SystemTable) -> bool {
    lint(runs, table).canonical
}
