use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::dataset::{Dataset, Example};
use super::features::{Feature, FeatureSet};
use crate::numsys::{SystemId, SystemSet};

/// Probability per system, indexed in `SystemId::ALL` order.
#[derive(Clone, Copy, Debug, PartialEq, Default, Serialize, Deserialize)]
pub struct LabelDist(pub [f64; 4]);

impl LabelDist {
    pub fn uniform(valid: SystemSet) -> Self {
        let mut p = [0.0; 4];
        let n = valid.len() as f64;
        for s in valid.iter() {
            p[s.index()] = 1.0 / n;
        }
        LabelDist(p)
    }

    pub fn get(&self, s: SystemId) -> f64 {
        self.0[s.index()]
    }

    pub fn support(&self) -> SystemSet {
        SystemId::ALL.into_iter().filter(|s| self.get(*s) > 0.0).collect()
    }

    pub fn sum(&self) -> f64 {
        self.0.iter().sum()
    }

    /// Most likely system; ties go to the earlier of B, C, D, S.
    pub fn argmax(&self) -> Option<(SystemId, f64)> {
        let mut best: Option<(SystemId, f64)> = None;
        for s in SystemId::ALL {
            let p = self.get(s);
            if p > 0.0 && best.is_none_or(|(_, b)| p > b) {
                best = Some((s, p));
            }
        }
        best
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Strategy {
    /// Keep the `n` best-supported candidates, `n` growing each iteration.
    #[default]
    FreqCautious,
    /// Accept a rule only when it makes its own distribution more peaked.
    ConfCautious,
}

impl Strategy {
    pub fn as_str(self) -> &'static str {
        match self {
            Strategy::FreqCautious => "FREQ_CAUTIOUS",
            Strategy::ConfCautious => "CONF_CAUTIOUS",
        }
    }
}

impl std::str::FromStr for Strategy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_uppercase().replace('-', "_").as_str() {
            "FREQ_CAUTIOUS" | "FREQ" => Ok(Strategy::FreqCautious),
            "CONF_CAUTIOUS" | "CONF" => Ok(Strategy::ConfCautious),
            _ => Err(format!("unknown strategy `{s}` (expected freq-cautious or conf-cautious)")),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainParams {
    pub n0: usize,
    pub n_step: usize,
    pub zeta: f64,
    pub epsilon: f64,
    pub max_iterations: usize,
    /// Drives seed upsampling in callers; training itself draws nothing.
    pub seed: u64,
    pub strategy: Strategy,
}

impl Default for TrainParams {
    fn default() -> Self {
        TrainParams {
            n0: 5,
            n_step: 5,
            zeta: 0.95,
            epsilon: 0.1,
            max_iterations: 1000,
            seed: 0,
            strategy: Strategy::FreqCautious,
        }
    }
}

impl TrainParams {
    pub fn validate(&self) -> Result<(), TrainError> {
        let bad = |m: &str| Err(TrainError::InvalidParams(m.to_string()));
        if !(self.zeta > 0.5 && self.zeta <= 1.0) {
            return bad("confidence threshold must lie in (0.5, 1]");
        }
        if !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            return bad("smoothing must be positive");
        }
        if self.max_iterations == 0 {
            return bad("max_iterations must be at least 1");
        }
        if self.n0 == 0 && self.n_step == 0 {
            return bad("rule budget never grows above zero");
        }
        Ok(())
    }

    /// Rule budget for iteration `it` (counted from zero).
    pub fn budget(&self, it: usize) -> usize {
        self.n0.saturating_add(self.n_step.saturating_mul(it))
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum TrainError {
    #[error("no labeled examples to learn from")]
    EmptyLabeledPool,
    #[error("invalid training parameters: {0}")]
    InvalidParams(String),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Rule {
    pub feature: Feature,
    /// Smoothed, in `SystemId::ALL` order.
    pub theta: [f64; 4],
    pub support: u64,
    pub admitted_at: usize,
}

impl Rule {
    pub fn confidence(&self) -> f64 {
        max4(&self.theta)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct IterationLog {
    pub iteration: usize,
    /// Rule budget; only the frequency strategy has one.
    pub budget: Option<usize>,
    pub candidates: usize,
    pub labeled: usize,
    pub label_changes: usize,
    pub admitted: usize,
    pub updated: usize,
    pub dropped: usize,
    pub rules: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecisionList {
    pub strategy: Strategy,
    pub params: TrainParams,
    pub iterations: usize,
    pub converged: bool,
    pub rules: BTreeMap<Feature, Rule>,
    pub log: Vec<IterationLog>,
}

impl DecisionList {
    pub fn empty(params: TrainParams) -> Self {
        DecisionList {
            strategy: params.strategy,
            params,
            iterations: 0,
            converged: false,
            rules: BTreeMap::new(),
            log: Vec::new(),
        }
    }

    pub fn to_json(&self) -> serde_json::Value {
        let rules: Vec<serde_json::Value> = self
            .rules
            .values()
            .map(|r| {
                let theta: serde_json::Map<String, serde_json::Value> = SystemId::ALL
                    .iter()
                    .map(|s| (s.to_string(), serde_json::json!(r.theta[s.index()])))
                    .collect();
                serde_json::json!({
                    "kind": r.feature.kind.as_str(),
                    "value": r.feature.value,
                    "theta": theta,
                    "support": r.support,
                    "admitted_at": r.admitted_at,
                })
            })
            .collect();
        serde_json::json!({
            "strategy": self.strategy.as_str(),
            "params": {
                "n0": self.params.n0,
                "n_step": self.params.n_step,
                "zeta": self.params.zeta,
                "epsilon": self.params.epsilon,
                "max_iterations": self.params.max_iterations,
                "seed": self.params.seed,
            },
            "iterations": self.iterations,
            "converged": self.converged,
            "rules": rules,
        })
    }

    pub fn from_json(v: &serde_json::Value) -> Result<Self, String> {
        let get = |k: &str| v.get(k).ok_or_else(|| format!("model is missing `{k}`"));
        let strategy: Strategy = get("strategy")?.as_str().ok_or("strategy must be a string")?.parse()?;
        let p = get("params")?;
        let num = |k: &str| p.get(k).and_then(|x| x.as_f64()).ok_or_else(|| format!("params.{k} missing"));
        let params = TrainParams {
            n0: num("n0")? as usize,
            n_step: num("n_step")? as usize,
            zeta: num("zeta")?,
            epsilon: num("epsilon")?,
            max_iterations: num("max_iterations")? as usize,
            seed: p.get("seed").and_then(|x| x.as_u64()).ok_or("params.seed missing")?,
            strategy,
        };
        let mut rules = BTreeMap::new();
        for r in get("rules")?.as_array().ok_or("rules must be a list")? {
            let kind = r.get("kind").and_then(|x| x.as_str()).ok_or("rule kind missing")?.parse()?;
            let value = r.get("value").and_then(|x| x.as_str()).ok_or("rule value missing")?;
            let mut theta = [0.0; 4];
            for s in SystemId::ALL {
                theta[s.index()] = r
                    .get("theta")
                    .and_then(|t| t.get(s.name()))
                    .and_then(|x| x.as_f64())
                    .ok_or_else(|| format!("rule theta for {s} missing"))?;
            }
            let feature = Feature::new(kind, value);
            rules.insert(
                feature.clone(),
                Rule {
                    feature,
                    theta,
                    support: r.get("support").and_then(|x| x.as_u64()).unwrap_or(0),
                    admitted_at: r.get("admitted_at").and_then(|x| x.as_u64()).unwrap_or(0) as usize,
                },
            );
        }
        Ok(DecisionList {
            strategy,
            params,
            iterations: get("iterations")?.as_u64().unwrap_or(0) as usize,
            converged: get("converged")?.as_bool().unwrap_or(false),
            rules,
            log: Vec::new(),
        })
    }

    /// Line-per-iteration TSV.
    pub fn log_tsv(&self) -> String {
        let mut s = String::from("iteration\tbudget\tcandidates\tlabeled\tlabel_changes\tadmitted\tupdated\tdropped\trules\n");
        for l in &self.log {
            writeln!(
                s,
                "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}",
                l.iteration,
                l.budget.map_or("-".to_string(), |b| b.to_string()),
                l.candidates,
                l.labeled, l.label_changes, l.admitted, l.updated, l.dropped, l.rules
            )
            .unwrap();
        }
        s
    }
}

fn max4(t: &[f64; 4]) -> f64 {
    t.iter().copied().fold(f64::NEG_INFINITY, f64::max)
}

/// Product of admitted θ rows over the example's features, renormalised
/// over `valid`.
fn combine<'a>(thetas: impl Iterator<Item = &'a [f64; 4]>, valid: SystemSet) -> LabelDist {
    let mut logp = [0.0f64; 4];
    let mut any = false;
    for t in thetas {
        any = true;
        for s in valid.iter() {
            logp[s.index()] += t[s.index()].ln();
        }
    }
    if !any || valid.is_empty() {
        return LabelDist::uniform(valid);
    }
    let top = valid.iter().map(|s| logp[s.index()]).fold(f64::NEG_INFINITY, f64::max);
    let mut p = [0.0; 4];
    for s in valid.iter() {
        p[s.index()] = (logp[s.index()] - top).exp();
    }
    let z: f64 = p.iter().sum();
    for x in &mut p {
        *x /= z;
    }
    LabelDist(p)
}

pub fn classify(features: &FeatureSet, dl: &DecisionList, valid: SystemSet) -> LabelDist {
    combine(features.iter().filter_map(|f| dl.rules.get(f)).map(|r| &r.theta), valid)
}

/// The sole valid system if there is one, otherwise the classifier's choice.
pub fn predict(example: &Example, dl: &DecisionList) -> Option<SystemId> {
    let valid = example.valid();
    if let Some(s) = valid.sole() {
        return Some(s);
    }
    classify(&example.features, dl, valid).argmax().map(|(s, _)| s)
}

#[derive(Clone, Copy, Debug)]
struct Candidate {
    feature: usize,
    theta: [f64; 4],
    support: u64,
}

#[derive(Clone, Copy, Debug)]
struct Active {
    theta: [f64; 4],
    support: u64,
    admitted_at: usize,
}

pub fn train(ds: &Dataset, params: &TrainParams) -> Result<DecisionList, TrainError> {
    params.validate()?;
    if ds.seeds.is_empty() {
        return Err(TrainError::EmptyLabeledPool);
    }

    let mut vocab: BTreeMap<&Feature, usize> = BTreeMap::new();
    for ex in &ds.examples {
        for f in &ex.features {
            vocab.entry(f).or_insert(0);
        }
    }
    let names: Vec<&Feature> = vocab.keys().copied().collect();
    for (i, f) in names.iter().enumerate() {
        vocab.insert(f, i);
    }
    let feats: Vec<Vec<usize>> = ds
        .examples
        .iter()
        .map(|ex| ex.features.iter().map(|f| vocab[f]).collect())
        .collect();
    let valid: Vec<SystemSet> = ds.examples.iter().map(Example::valid).collect();
    let weights = ds.seed_weights();
    let seed_label: Vec<Option<SystemId>> = (0..ds.examples.len())
        .map(|i| if weights[i] > 0 { ds.seed_label(i) } else { None })
        .collect();

    let mut labels: BTreeMap<usize, SystemId> = BTreeMap::new();
    let mut active: BTreeMap<usize, Active> = BTreeMap::new();
    let mut dl = DecisionList::empty(*params);
    let eps = params.epsilon;

    for it in 0..params.max_iterations {
        // Unsmoothed label counts over the labeled pool.
        let mut counts = vec![[0u64; 4]; names.len()];
        let mut add = |i: usize, s: SystemId, w: u64| {
            for &f in &feats[i] {
                counts[f][s.index()] += w;
            }
        };
        for (i, s) in seed_label.iter().enumerate() {
            if let Some(s) = s {
                add(i, *s, weights[i]);
            }
        }
        for (&i, &s) in &labels {
            add(i, s, 1);
        }
        let mut candidates: Vec<Candidate> = counts
            .iter()
            .enumerate()
            .filter_map(|(f, c)| {
                let total: u64 = c.iter().sum();
                let majority = *c.iter().max().unwrap();
                if total == 0 || (majority as f64) <= params.zeta * total as f64 {
                    return None;
                }
                let denom = total as f64 + 4.0 * eps;
                let theta = [0, 1, 2, 3].map(|j| (c[j] as f64 + eps) / denom);
                Some(Candidate {
                    feature: f,
                    theta,
                    support: total,
                })
            })
            .collect();

        let n_candidates = candidates.len();
        let mut budget = None;
        let (mut admitted, mut updated, mut dropped) = (0, 0, 0);
        match params.strategy {
            Strategy::FreqCautious => {
                candidates.sort_by(|a, b| b.support.cmp(&a.support).then(a.feature.cmp(&b.feature)));
                budget = Some(params.budget(it));
                candidates.truncate(params.budget(it));
                let mut next = BTreeMap::new();
                for c in &candidates {
                    let admitted_at = match active.get(&c.feature) {
                        Some(prev) => {
                            if prev.theta != c.theta {
                                updated += 1;
                            }
                            prev.admitted_at
                        }
                        None => {
                            admitted += 1;
                            it
                        }
                    };
                    next.insert(
                        c.feature,
                        Active {
                            theta: c.theta,
                            support: c.support,
                            admitted_at,
                        },
                    );
                }
                dropped = active.keys().filter(|f| !next.contains_key(f)).count();
                active = next;
            }
            Strategy::ConfCautious => {
                // Each feature is judged on its own, so visiting order is moot.
                for c in &candidates {
                    match active.get_mut(&c.feature) {
                        None => {
                            active.insert(
                                c.feature,
                                Active {
                                    theta: c.theta,
                                    support: c.support,
                                    admitted_at: it,
                                },
                            );
                            admitted += 1;
                        }
                        Some(a) if max4(&c.theta) > max4(&a.theta) => {
                            a.theta = c.theta;
                            a.support = c.support;
                            updated += 1;
                        }
                        Some(_) => {}
                    }
                }
            }
        }

        let mut label_changes = 0;
        for &i in &ds.unlabeled {
            let dist = combine(feats[i].iter().filter_map(|f| active.get(f)).map(|a| &a.theta), valid[i]);
            let next = dist.argmax().filter(|(_, p)| *p > params.zeta).map(|(s, _)| s);
            let prev = labels.get(&i).copied();
            if next != prev {
                label_changes += 1;
                match next {
                    Some(s) => labels.insert(i, s),
                    None => labels.remove(&i),
                };
            }
        }

        dl.log.push(IterationLog {
            iteration: it,
            budget,
            candidates: n_candidates,
            labeled: ds.seeds.len() + labels.len(),
            label_changes,
            admitted,
            updated,
            dropped,
            rules: active.len(),
        });
        dl.iterations = it + 1;
        if ds.unlabeled.is_empty() || (label_changes == 0 && admitted + updated + dropped == 0) {
            dl.converged = true;
            break;
        }
    }

    dl.rules = active
        .into_iter()
        .map(|(f, a)| {
            let feature = names[f].clone();
            (
                feature.clone(),
                Rule {
                    feature,
                    theta: a.theta,
                    support: a.support,
                    admitted_at: a.admitted_at,
                },
            )
        })
        .collect();
    Ok(dl)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::NumeralKey;
    use crate::numsys::ReadingSet;
    use crate::rational::Rational;
    use crate::selftrain::FeatureKind;

    fn rule(kind: FeatureKind, v: &str, theta: [f64; 4]) -> Rule {
        Rule {
            feature: Feature::new(kind, v),
            theta,
            support: 1,
            admitted_at: 0,
        }
    }

    fn dl_with(rules: Vec<Rule>) -> DecisionList {
        let mut dl = DecisionList::empty(TrainParams::default());
        for r in rules {
            dl.rules.insert(r.feature.clone(), r);
        }
        dl
    }

    fn set(s: &str) -> SystemSet {
        s.parse().unwrap()
    }

    fn fs(names: &[&str]) -> FeatureSet {
        names.iter().map(|n| Feature::new(FeatureKind::Object, *n)).collect()
    }

    #[test]
    fn single_feature_normalises() {
        // order B, C, D, S
        let dl = dl_with(vec![rule(FeatureKind::Object, "f", [0.0, 0.9, 0.0, 0.1])]);
        let d = classify(&fs(&["f"]), &dl, set("CS"));
        assert!((d.get(SystemId::C) - 0.9).abs() < 1e-12);
        assert!((d.get(SystemId::S) - 0.1).abs() < 1e-12);
        assert_eq!(d.support(), set("CS"));
    }

    #[test]
    fn prior_when_no_rule_applies() {
        let dl = dl_with(vec![]);
        let d = classify(&fs(&["g"]), &dl, set("BCD"));
        for s in ["B", "C", "D"] {
            assert!((d.get(s.parse().unwrap()) - 1.0 / 3.0).abs() < 1e-15);
        }
        assert_eq!(d.get(SystemId::S), 0.0);
    }

    #[test]
    fn products_compare_by_hand() {
        let dl = dl_with(vec![
            rule(FeatureKind::Object, "a", [0.0, 0.8, 0.0, 0.2]),
            rule(FeatureKind::Object, "b", [0.0, 0.8, 0.0, 0.2]),
            rule(FeatureKind::Object, "c", [0.0, 0.1, 0.0, 0.9]),
        ]);
        let d = classify(&fs(&["a", "b", "c"]), &dl, set("CS"));
        let (pc, ps) = (0.8 * 0.8 * 0.1, 0.2 * 0.2 * 0.9);
        assert!((d.get(SystemId::C) - pc / (pc + ps)).abs() < 1e-12);
        assert_eq!(d.argmax().unwrap().0, SystemId::C);
    }

    fn example(valid: &str, features: FeatureSet) -> Example {
        let mut rs = ReadingSet::default();
        for s in set(valid).iter() {
            rs.set(s, Some(Rational::ONE));
        }
        Example {
            key: NumeralKey {
                tablet_id: "P".into(),
                entry_index: 0,
                token_index: 0,
            },
            line_no: 1,
            features,
            readings: rs,
        }
    }

    #[test]
    fn prediction_restricted_to_valid() {
        let dl = dl_with(vec![rule(FeatureKind::Object, "d", [0.05, 0.05, 0.85, 0.05])]);
        assert_eq!(predict(&example("BCDS", fs(&["d"])), &dl), Some(SystemId::D));
        assert_eq!(predict(&example("C", fs(&["d"])), &dl), Some(SystemId::C));
        let adversarial = dl_with(vec![rule(FeatureKind::Object, "b", [0.97, 0.01, 0.01, 0.01])]);
        assert_eq!(predict(&example("CS", fs(&["b"])), &adversarial), Some(SystemId::C));
        // All-equal distribution ties break toward C before S.
        assert_eq!(predict(&example("CS", fs(&["z"])), &adversarial), Some(SystemId::C));
    }

    #[test]
    fn all_seeds_converge_at_once() {
        let ds = Dataset::from_examples(vec![example("C", fs(&["a"])), example("S", fs(&["b"]))]);
        for strategy in [Strategy::FreqCautious, Strategy::ConfCautious] {
            let params = TrainParams {
                strategy,
                ..TrainParams::default()
            };
            let dl = train(&ds, &params).unwrap();
            assert_eq!(dl.iterations, 1);
            assert!(dl.converged);
            for ex in &ds.examples {
                assert_eq!(predict(ex, &dl), ex.readings.sole_system());
            }
        }
    }

    #[test]
    fn bootstraps_through_shared_feature() {
        let mut ex = vec![example("C", fs(&["pot", "x"])), example("C", fs(&["pot"]))];
        ex.push(example("CD", fs(&["pot", "y"])));
        ex.push(example("CS", fs(&["y"])));
        let ds = Dataset::from_examples(ex);
        let dl = train(&ds, &TrainParams::default()).unwrap();
        assert!(dl.converged);
        assert_eq!(predict(&ds.examples[2], &dl), Some(SystemId::C));
        for r in dl.rules.values() {
            assert!((r.theta.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn params_checked() {
        let ds = Dataset::from_examples(vec![example("C", fs(&["a"]))]);
        let bad = TrainParams {
            zeta: 0.5,
            ..TrainParams::default()
        };
        assert!(matches!(train(&ds, &bad), Err(TrainError::InvalidParams(_))));
        let empty = Dataset::from_examples(vec![example("CS", fs(&["a"]))]);
        assert_eq!(train(&empty, &TrainParams::default()), Err(TrainError::EmptyLabeledPool));
    }

    #[test]
    fn json_round_trip() {
        let dl = dl_with(vec![rule(FeatureKind::SameTablet, "M288", [0.1, 0.6, 0.2, 0.1])]);
        let back = DecisionList::from_json(&dl.to_json()).unwrap();
        assert_eq!(back.rules, dl.rules);
        assert_eq!(back.params, dl.params);
    }
}
