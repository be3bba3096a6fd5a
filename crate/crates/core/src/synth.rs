//! Seeded synthetic corpora with known systems, for exercising the
//! classifier and reports.
//!
//! Every tablet has a home system. Its header sign and counted objects are
//! drawn from signs reserved for that system, a few shared qualifier signs
//! add noise, and some tablets mix capacity entries into another system.

use std::collections::BTreeMap;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::analysis::NumeralKey;
use crate::atf::{runs, Corpus, DigitRun, Entry, SignToken, Surface, Tablet, Token};
use crate::numsys::SystemId;

#[derive(Clone, Debug, PartialEq)]
pub struct SynthConfig {
    pub tablets: usize,
    pub min_entries: usize,
    pub max_entries: usize,
    /// Share of notations written so only one system can read them.
    pub seed_rate: f64,
    /// Share of non-capacity tablets that also carry capacity entries.
    pub mixed_rate: f64,
    /// Share of entries with a shared qualifier sign after the object.
    pub qualifier_rate: f64,
    /// Relative frequency of home systems, in B, C, D, S order.
    pub system_weights: [f64; 4],
    pub objects_per_system: usize,
    pub headers_per_system: usize,
    pub qualifiers: usize,
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            tablets: 500,
            min_entries: 3,
            max_entries: 8,
            seed_rate: 0.1,
            mixed_rate: 0.2,
            qualifier_rate: 0.2,
            system_weights: [0.1, 0.4, 0.2, 0.3],
            objects_per_system: 6,
            headers_per_system: 2,
            qualifiers: 3,
            seed: 0,
        }
    }
}

#[derive(Clone, Debug)]
pub struct SynthCorpus {
    pub corpus: Corpus,
    /// Planted system of every numeral.
    pub truth: BTreeMap<NumeralKey, SystemId>,
    pub home: BTreeMap<String, SystemId>,
}

pub fn object_sign(system: SystemId, k: usize) -> String {
    format!("M{}{:02}", system.index() + 1, k)
}

pub fn header_sign(system: SystemId, k: usize) -> String {
    format!("M9{}{}", system.index(), k)
}

pub fn qualifier_sign(k: usize) -> String {
    format!("M05{k}")
}

/// A notation readable in all four systems.
pub fn ambiguous_notation(rng: &mut impl Rng) -> Vec<DigitRun> {
    loop {
        let a = rng.gen_range(0..=5);
        let b = rng.gen_range(0..=5);
        if a + b > 0 {
            return tens_units(a, b);
        }
    }
}

/// A notation only `system` can read.
pub fn unambiguous_notation(system: SystemId, rng: &mut impl Rng) -> Vec<DigitRun> {
    let mut out = Vec::new();
    match system {
        SystemId::B => {
            out.push((1, "N51"));
            push_tens_units(&mut out, rng.gen_range(0..=5), rng.gen_range(0..=5));
        }
        SystemId::C => {
            push_tens_units(&mut out, rng.gen_range(0..=9), rng.gen_range(0..=5));
            out.push((1, "N39B"));
        }
        SystemId::D => push_tens_units(&mut out, rng.gen_range(6..=9), rng.gen_range(6..=9)),
        SystemId::S => {
            push_tens_units(&mut out, rng.gen_range(0..=5), rng.gen_range(0..=5));
            out.push((1, "N8B"));
        }
    }
    runs(&out)
}

fn tens_units(a: u32, b: u32) -> Vec<DigitRun> {
    let mut out = Vec::new();
    push_tens_units(&mut out, a, b);
    runs(&out)
}

fn push_tens_units(out: &mut Vec<(u32, &'static str)>, a: u32, b: u32) {
    if a > 0 {
        out.push((a, "N14"));
    }
    if b > 0 {
        out.push((b, "N01"));
    }
}

fn pick_system(weights: &[f64; 4], rng: &mut impl Rng) -> SystemId {
    let total: f64 = weights.iter().sum();
    let mut x = rng.gen::<f64>() * total;
    for s in SystemId::ALL {
        x -= weights[s.index()];
        if x < 0.0 {
            return s;
        }
    }
    SystemId::S
}

pub fn generate(cfg: &SynthConfig) -> SynthCorpus {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut corpus = Corpus::new();
    let mut truth = BTreeMap::new();
    let mut home = BTreeMap::new();
    for t in 0..cfg.tablets {
        let id = format!("P{:06}", 100_000 + t);
        let system = pick_system(&cfg.system_weights, &mut rng);
        let mixed = system != SystemId::C && rng.gen_bool(cfg.mixed_rate);
        let mut tablet = Tablet::new(&id);
        tablet.header = Some(vec![SignToken::text(header_sign(
            system,
            rng.gen_range(0..cfg.headers_per_system),
        ))]);
        let n = rng.gen_range(cfg.min_entries..=cfg.max_entries);
        for e in 0..n {
            let sys = if mixed && rng.gen_bool(0.5) { SystemId::C } else { system };
            let mut text = vec![Token::Sign(SignToken::text(object_sign(
                sys,
                rng.gen_range(0..cfg.objects_per_system),
            )))];
            if rng.gen_bool(cfg.qualifier_rate) {
                text.push(Token::Sign(SignToken::text(qualifier_sign(rng.gen_range(0..cfg.qualifiers)))));
            }
            let notation = if rng.gen_bool(cfg.seed_rate) {
                unambiguous_notation(sys, &mut rng)
            } else {
                ambiguous_notation(&mut rng)
            };
            truth.insert(
                NumeralKey {
                    tablet_id: id.clone(),
                    entry_index: e,
                    token_index: text.len(),
                },
                sys,
            );
            tablet.entries.push(Entry {
                line_no: e as u32 + 1,
                surface: Surface::Obverse,
                text,
                numeral: notation.into_iter().map(Token::Run).collect(),
                summary_annotation: false,
            });
        }
        home.insert(id, system);
        corpus.push(tablet).expect("generated ids are unique");
    }
    SynthCorpus { corpus, truth, home }
}
