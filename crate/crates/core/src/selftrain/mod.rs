//! Bootstrapped decision-list classifier for ambiguous notations.
//!
//! Unambiguous notations seed the labels. Each iteration admits rules
//! from the labeled pool and relabels the rest where the classifier is
//! confident enough.

mod dataset;
mod features;
mod model;

use serde::{Deserialize, Serialize};

use crate::analysis::NumeralKey;
use crate::numsys::SystemId;
use crate::sumcheck::Evidence;

pub use dataset::{collect_seeds, Dataset, Example};
pub use features::{extract_features, Feature, FeatureKind, FeatureSet};
pub use model::{
    classify, predict, train, DecisionList, IterationLog, LabelDist, Rule, Strategy, TrainError, TrainParams,
};

/// System chosen for one numeral.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NumeralAssignment {
    pub key: NumeralKey,
    pub line_no: u32,
    pub system: SystemId,
    pub evidence: Evidence,
    /// Probability of `system` under the classifier; 1 for sole readings.
    pub confidence: f64,
}

/// Predictions for every example of a dataset.
pub fn assign_all(ds: &Dataset, dl: &DecisionList) -> Vec<NumeralAssignment> {
    ds.examples
        .iter()
        .filter_map(|ex| {
            let valid = ex.valid();
            let (system, evidence, confidence) = match valid.sole() {
                Some(s) => (s, Evidence::Unambiguous, 1.0),
                None => {
                    let (s, p) = classify(&ex.features, dl, valid).argmax()?;
                    (s, Evidence::Classifier, p)
                }
            };
            Some(NumeralAssignment {
                key: ex.key.clone(),
                line_no: ex.line_no,
                system,
                evidence,
                confidence,
            })
        })
        .collect()
}
