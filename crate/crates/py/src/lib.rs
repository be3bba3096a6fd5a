//! Python bindings: readings, canonical forms, corpus parsing, summary
//! checks, training, classification and scoring.

use std::collections::BTreeMap;

use pe_numerals::analysis::NumeralKey;
use pe_numerals::atf::{format_runs, parse_corpus, parse_notation as parse_runs, write_corpus, Strictness};
use pe_numerals::evalkit::{evaluate_with, load_test_set, Average, Mode};
use pe_numerals::numsys::{canonicalize as canon, evaluate as eval_runs, readings_with, EvalOptions, Invalid};
use pe_numerals::selftrain::{assign_all, collect_seeds, train as train_dl, DecisionList, Strategy, TrainParams};
use pe_numerals::sumcheck::{disambiguate_by_summary, write_report};
use pe_numerals::synth::{generate, SynthConfig};
use pe_numerals::{Corpus as CoreCorpus, Rational, SystemId, TableSet};
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

fn err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn opts(no_max_count: bool) -> EvalOptions {
    if no_max_count {
        EvalOptions::diagnostic()
    } else {
        EvalOptions::default()
    }
}

fn system(s: &str) -> PyResult<SystemId> {
    s.parse().map_err(err)
}

/// `[(count, sign), ...]` for a notation such as `"1(N14) 2(N01)"`.
#[pyfunction]
fn parse_notation(text: &str) -> PyResult<Vec<(u32, String)>> {
    let runs = parse_runs(text).map_err(err)?;
    Ok(runs.iter().map(|r| (r.count, r.sign.to_string())).collect())
}

/// The four system tables of one profile.
#[pyclass(name = "Tables", frozen)]
struct PyTables(TableSet);

#[pymethods]
impl PyTables {
    #[new]
    #[pyo3(signature = (profile = "paper-examples"))]
    fn new(profile: &str) -> PyResult<Self> {
        TableSet::builtin(profile).map(PyTables).map_err(err)
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        TableSet::from_json(text).map(PyTables).map_err(err)
    }

    #[getter]
    fn profile(&self) -> String {
        self.0.profile().to_string()
    }

    /// `{system: value or None}`, values as exact `p/q` strings.
    #[pyo3(signature = (notation, no_max_count = false))]
    fn readings(&self, notation: &str, no_max_count: bool) -> PyResult<BTreeMap<String, Option<String>>> {
        let runs = parse_runs(notation).map_err(err)?;
        let rs = readings_with(&runs, &self.0, opts(no_max_count));
        Ok(rs.iter().map(|(s, v)| (s.to_string(), v.map(|v| v.to_string()))).collect())
    }

    /// Why `notation` has no reading in `system`, or None if it has one.
    fn invalid_reason(&self, notation: &str, system_name: &str) -> PyResult<Option<String>> {
        let runs = parse_runs(notation).map_err(err)?;
        Ok(match eval_runs(&runs, self.0.get(system(system_name)?), EvalOptions::default()) {
            Ok(_) => None,
            Err(Invalid::UnknownSign(s)) => Some(format!("sign {s} is not part of the system")),
            Err(Invalid::ExceedsMaxCount { sign, count, max }) => {
                Some(format!("{count} repeats of {sign}, at most {max} allowed"))
            }
        })
    }

    /// Shortest notation for `value` (e.g. `"223/2"`) in `system`.
    fn canonicalize(&self, value: &str, system_name: &str) -> PyResult<String> {
        let v: Rational = value.parse().map_err(err)?;
        let runs = canon(v, self.0.get(system(system_name)?)).map_err(err)?;
        Ok(format_runs(&runs))
    }
}

/// A parsed transliteration.
#[pyclass(name = "Corpus", frozen)]
struct PyCorpus {
    corpus: CoreCorpus,
    #[pyo3(get)]
    warnings: Vec<String>,
}

#[pymethods]
impl PyCorpus {
    #[new]
    #[pyo3(signature = (text, strict = false))]
    fn new(text: &str, strict: bool) -> PyResult<Self> {
        let strictness = if strict { Strictness::Strict } else { Strictness::Lenient };
        let parsed = parse_corpus(text, strictness).map_err(err)?;
        Ok(PyCorpus {
            corpus: parsed.corpus,
            warnings: parsed.warnings.iter().map(|w| format!("line {}: {}", w.line, w.message)).collect(),
        })
    }

    fn __len__(&self) -> usize {
        self.corpus.len()
    }

    fn tablet_ids(&self) -> Vec<String> {
        self.corpus.tablets().iter().map(|t| t.id.clone()).collect()
    }

    fn to_atf(&self) -> String {
        write_corpus(&self.corpus)
    }

    /// Summary-line report as TSV.
    fn sumcheck(&self, tables: &PyTables) -> String {
        let analyses: Vec<_> = self
            .corpus
            .tablets()
            .iter()
            .map(|t| disambiguate_by_summary(t, &tables.0))
            .collect();
        write_report(&analyses)
    }
}

type Key = (String, usize, usize);

fn key_tuple(k: &NumeralKey) -> Key {
    (k.tablet_id.clone(), k.entry_index, k.token_index)
}

/// A trained decision list.
#[pyclass(name = "Model", frozen)]
struct PyModel(DecisionList);

#[pymethods]
impl PyModel {
    #[staticmethod]
    #[pyo3(signature = (
        corpus, tables, strategy = "conf", zeta = 0.95, epsilon = 0.1, n0 = 5, n_step = 5,
        max_iterations = 1000, balance = true, seed = 0, no_max_count = false
    ))]
    #[allow(clippy::too_many_arguments)]
    fn train(
        corpus: &PyCorpus,
        tables: &PyTables,
        strategy: &str,
        zeta: f64,
        epsilon: f64,
        n0: usize,
        n_step: usize,
        max_iterations: usize,
        balance: bool,
        seed: u64,
        no_max_count: bool,
    ) -> PyResult<Self> {
        let strategy = match strategy.to_ascii_lowercase().as_str() {
            "freq" => Strategy::FreqCautious,
            "conf" => Strategy::ConfCautious,
            other => other.to_ascii_uppercase().parse::<Strategy>().map_err(err)?,
        };
        let params = TrainParams {
            n0,
            n_step,
            zeta,
            epsilon,
            max_iterations,
            seed,
            strategy,
        };
        let ds = collect_seeds(&corpus.corpus, &tables.0, opts(no_max_count), balance, seed);
        train_dl(&ds, &params).map(PyModel).map_err(err)
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        let v: serde_json::Value = serde_json::from_str(text).map_err(err)?;
        DecisionList::from_json(&v).map(PyModel).map_err(err)
    }

    fn to_json(&self) -> String {
        self.0.to_json().to_string()
    }

    #[getter]
    fn iterations(&self) -> usize {
        self.0.iterations
    }

    #[getter]
    fn converged(&self) -> bool {
        self.0.converged
    }

    #[getter]
    fn rule_count(&self) -> usize {
        self.0.rules.len()
    }

    /// `{(tablet, entry, token): (system, evidence, confidence)}` for every
    /// readable numeral.
    #[pyo3(signature = (corpus, tables, no_max_count = false))]
    fn classify(
        &self,
        corpus: &PyCorpus,
        tables: &PyTables,
        no_max_count: bool,
    ) -> BTreeMap<Key, (String, String, f64)> {
        let ds = collect_seeds(&corpus.corpus, &tables.0, opts(no_max_count), false, 0);
        assign_all(&ds, &self.0)
            .into_iter()
            .map(|a| {
                (
                    key_tuple(&a.key),
                    (a.system.to_string(), a.evidence.as_str().to_string(), a.confidence),
                )
            })
            .collect()
    }
}

/// Scores predictions against a `tablet, line, system, evidence` test set.
/// Returns the metrics as a JSON string.
#[pyfunction]
#[pyo3(signature = (corpus, tables, test_set, predictions, mode = "four_way", macro_average = false))]
fn evaluate(
    corpus: &PyCorpus,
    tables: &PyTables,
    test_set: &str,
    predictions: BTreeMap<Key, String>,
    mode: &str,
    macro_average: bool,
) -> PyResult<String> {
    let mode = match mode {
        "four_way" => Mode::FourWay,
        "two_way" => Mode::TwoWay,
        other => return Err(err(format!("unknown mode `{other}` (expected four_way or two_way)"))),
    };
    let mut preds = BTreeMap::new();
    for ((tablet_id, entry_index, token_index), s) in predictions {
        let key = NumeralKey {
            tablet_id,
            entry_index,
            token_index,
        };
        preds.insert(key, system(&s)?);
    }
    let set = load_test_set(test_set, &corpus.corpus, &tables.0);
    if let Some(e) = set.errors.first() {
        return Err(err(format!("test set {e}")));
    }
    let average = if macro_average { Average::Macro } else { Average::Micro };
    let m = evaluate_with(&preds, &set.items, mode, average).map_err(err)?;
    Ok(m.to_json().to_string())
}

/// Seeded synthetic corpus as `(atf_text, test_set)`, the second holding
/// the planted system of every numeral in `evaluate`'s test-set format.
#[pyfunction]
#[pyo3(signature = (tablets = 500, seed_rate = 0.1, seed = 0))]
fn synth(tablets: usize, seed_rate: f64, seed: u64) -> PyResult<(String, String)> {
    if !(0.0..=1.0).contains(&seed_rate) {
        return Err(err("seed_rate must lie in [0, 1]"));
    }
    let sc = generate(&SynthConfig {
        tablets,
        seed_rate,
        seed,
        ..SynthConfig::default()
    });
    let mut truth = String::from("tablet\tline\tsystem\tevidence\n");
    for t in sc.corpus.tablets() {
        for (i, e) in t.entries.iter().enumerate() {
            let key = NumeralKey {
                tablet_id: t.id.clone(),
                entry_index: i,
                token_index: e.text.len(),
            };
            if let Some(s) = sc.truth.get(&key) {
                truth.push_str(&format!("{}\t{}\t{s}\tPLANTED\n", t.id, e.line_no));
            }
        }
    }
    Ok((write_corpus(&sc.corpus), truth))
}

#[pymodule]
fn penum(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyTables>()?;
    m.add_class::<PyCorpus>()?;
    m.add_class::<PyModel>()?;
    m.add_function(wrap_pyfunction!(parse_notation, m)?)?;
    m.add_function(wrap_pyfunction!(evaluate, m)?)?;
    m.add_function(wrap_pyfunction!(synth, m)?)?;
    Ok(())
}
