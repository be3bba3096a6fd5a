use std::collections::BTreeMap;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::features::{extract_features, FeatureSet};
use crate::analysis::{analyze_corpus, NumeralKey};
use crate::atf::Corpus;
use crate::numsys::{EvalOptions, ReadingSet, SystemId, SystemSet, TableSet};

#[derive(Clone, Debug, PartialEq)]
pub struct Example {
    pub key: NumeralKey,
    pub line_no: u32,
    pub features: FeatureSet,
    pub readings: ReadingSet,
}

impl Example {
    pub fn valid(&self) -> SystemSet {
        self.readings.valid_systems()
    }
}

/// Numerals with at least one valid reading, split into seeds and the rest.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Dataset {
    pub examples: Vec<Example>,
    /// Indices of seed examples; upsampled seeds appear more than once.
    pub seeds: Vec<usize>,
    pub unlabeled: Vec<usize>,
    pub warnings: Vec<String>,
}

impl Dataset {
    /// Seed label of an example: its only valid system.
    pub fn seed_label(&self, i: usize) -> Option<SystemId> {
        self.examples[i].readings.sole_system()
    }

    pub fn seed_counts(&self) -> BTreeMap<SystemId, usize> {
        let mut counts: BTreeMap<SystemId, usize> = SystemId::ALL.into_iter().map(|s| (s, 0)).collect();
        for &i in &self.seeds {
            if let Some(s) = self.seed_label(i) {
                *counts.get_mut(&s).unwrap() += 1;
            }
        }
        counts
    }

    /// How many times each example appears in the seed pool.
    pub fn seed_weights(&self) -> Vec<u64> {
        let mut w = vec![0u64; self.examples.len()];
        for &i in &self.seeds {
            w[i] += 1;
        }
        w
    }

    pub fn from_examples(examples: Vec<Example>) -> Self {
        let mut ds = Dataset {
            examples,
            ..Default::default()
        };
        for (i, ex) in ds.examples.iter().enumerate() {
            if ex.readings.is_unambiguous() {
                ds.seeds.push(i);
            } else {
                ds.unlabeled.push(i);
            }
        }
        ds.warn_missing_classes();
        ds
    }

    fn warn_missing_classes(&mut self) {
        let counts = self.seed_counts();
        for (s, n) in counts {
            if n == 0 {
                self.warnings
                    .push(format!("no seeds for system {s}; it can only be predicted where it is the sole reading"));
            }
        }
    }

    /// Draws minority seeds with replacement until every seeded class
    /// matches the largest one.
    pub fn upsample(&mut self, seed: u64) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut by_class: BTreeMap<SystemId, Vec<usize>> = BTreeMap::new();
        for &i in &self.seeds {
            if let Some(s) = self.seed_label(i) {
                by_class.entry(s).or_default().push(i);
            }
        }
        let target = by_class.values().map(Vec::len).max().unwrap_or(0);
        for members in by_class.values() {
            for _ in members.len()..target {
                self.seeds.push(members[rng.gen_range(0..members.len())]);
            }
        }
    }
}

/// Builds the example pool for a corpus; with `balance` the seed classes
/// are equalised by upsampling.
pub fn collect_seeds(corpus: &Corpus, tables: &TableSet, opts: EvalOptions, balance: bool, seed: u64) -> Dataset {
    let mut examples = Vec::new();
    for tn in analyze_corpus(corpus, tables, opts) {
        for n in &tn.intact {
            if n.readings.is_invalid() {
                continue;
            }
            examples.push(Example {
                key: n.key(),
                line_no: n.notation.location.line_no,
                features: extract_features(&n.notation.location, tn.tablet),
                readings: n.readings,
            });
        }
    }
    let mut ds = Dataset::from_examples(examples);
    if balance {
        ds.upsample(seed);
    }
    ds
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::atf::{parse_corpus, Strictness};
    use crate::rational::Rational;

    #[test]
    fn p008805_gives_two_seeds() {
        let c = parse_corpus(
            "&P008805\n1. M056~f , 1(N34) 5(N14) 1(N01) 1(N8B)\n2. M341 M288 , 7(N14) 2(N01) 3(N39B)\n3. M1 , 1(N01)\n",
            Strictness::Strict,
        )
        .unwrap()
        .corpus;
        let ds = collect_seeds(&c, &TableSet::paper_examples(), EvalOptions::default(), false, 0);
        assert_eq!(ds.seeds.len(), 2);
        let counts = ds.seed_counts();
        assert_eq!(counts[&SystemId::S], 1);
        assert_eq!(counts[&SystemId::C], 1);
        assert_eq!(ds.unlabeled.len(), 1);
        assert_eq!(ds.examples[ds.unlabeled[0]].valid(), SystemSet::FULL);
        assert_eq!(ds.warnings.len(), 2);
    }

    fn unambiguous(s: SystemId) -> Example {
        let mut rs = ReadingSet::default();
        rs.set(s, Some(Rational::ONE));
        Example {
            key: NumeralKey {
                tablet_id: "P".into(),
                entry_index: 0,
                token_index: 0,
            },
            line_no: 1,
            features: FeatureSet::new(),
            readings: rs,
        }
    }

    #[test]
    fn upsampling_equalises_classes() {
        let mut ex: Vec<Example> = (0..100).map(|_| unambiguous(SystemId::C)).collect();
        ex.extend((0..10).map(|_| unambiguous(SystemId::S)));
        let mut ds = Dataset::from_examples(ex);
        ds.upsample(7);
        let counts = ds.seed_counts();
        assert_eq!(counts[&SystemId::C], 100);
        assert_eq!(counts[&SystemId::S], 100);
        assert_eq!(ds.seeds.len(), 200);
        // Duplicates come from the S seeds only.
        assert!(ds.seeds[110..].iter().all(|&i| i >= 100));
        let mut again = Dataset::from_examples(ds.examples.clone());
        again.upsample(7);
        assert_eq!(again.seeds, ds.seeds);
    }
}
