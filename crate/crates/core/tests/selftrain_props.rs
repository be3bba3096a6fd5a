use pe_numerals::numsys::{EvalOptions, SystemId, TableSet};
use pe_numerals::selftrain::{classify, collect_seeds, predict, train, Dataset, Strategy, TrainParams};
use pe_numerals::synth::{generate, SynthConfig};

fn small_dataset(seed: u64) -> (Dataset, pe_numerals::synth::SynthCorpus) {
    let sc = generate(&SynthConfig {
        tablets: 120,
        seed,
        ..SynthConfig::default()
    });
    let ds = collect_seeds(&sc.corpus, &TableSet::paper_examples(), EvalOptions::default(), true, seed);
    (ds, sc)
}

fn params(strategy: Strategy, max_iterations: usize) -> TrainParams {
    TrainParams {
        strategy,
        max_iterations,
        seed: 11,
        ..TrainParams::default()
    }
}

#[test]
fn confidence_strategy_never_lowers_rule_confidence() {
    let (ds, _) = small_dataset(2);
    let full = train(&ds, &params(Strategy::ConfCautious, 1000)).unwrap();
    let mut prev: Option<pe_numerals::selftrain::DecisionList> = None;
    for k in 1..=full.iterations {
        // Training stopped after k iterations reproduces the full run's prefix.
        let dl = train(&ds, &params(Strategy::ConfCautious, k)).unwrap();
        if let Some(p) = &prev {
            for (f, r) in &p.rules {
                let now = dl.rules.get(f).expect("rules are never dropped");
                assert!(now.confidence() >= r.confidence(), "{f} lost confidence at {k}");
            }
        }
        prev = Some(dl);
    }
}

#[test]
fn frequency_strategy_respects_budget() {
    let (ds, _) = small_dataset(3);
    let p = params(Strategy::FreqCautious, 1000);
    let dl = train(&ds, &p).unwrap();
    let mut allowed = 0;
    for log in &dl.log {
        allowed += p.budget(log.iteration);
        assert!(log.rules <= allowed);
        assert!(log.rules <= p.budget(log.iteration));
    }
}

#[test]
fn theta_rows_and_distributions_normalised() {
    let (ds, _) = small_dataset(4);
    for strategy in [Strategy::FreqCautious, Strategy::ConfCautious] {
        let dl = train(&ds, &params(strategy, 1000)).unwrap();
        for r in dl.rules.values() {
            assert!((r.theta.iter().sum::<f64>() - 1.0).abs() <= 1e-12);
            assert!(r.theta.iter().all(|t| (0.0..=1.0).contains(t)));
        }
        for ex in &ds.examples {
            let d = classify(&ex.features, &dl, ex.valid());
            assert!((d.sum() - 1.0).abs() <= 1e-12);
            assert_eq!(d.support().intersection(ex.valid()), d.support());
            let p = predict(ex, &dl).unwrap();
            assert!(ex.valid().contains(p));
        }
    }
}

#[test]
fn identical_inputs_identical_models() {
    let (a, _) = small_dataset(5);
    let (b, _) = small_dataset(5);
    assert_eq!(a, b);
    for strategy in [Strategy::FreqCautious, Strategy::ConfCautious] {
        let x = train(&a, &params(strategy, 1000)).unwrap();
        let y = train(&b, &params(strategy, 1000)).unwrap();
        assert_eq!(x, y);
        assert_eq!(x.to_json().to_string(), y.to_json().to_string());
    }
}

#[test]
fn missing_class_warns_but_trains() {
    let sc = generate(&SynthConfig {
        tablets: 40,
        system_weights: [0.0, 1.0, 0.0, 1.0],
        mixed_rate: 0.0,
        ..SynthConfig::default()
    });
    let ds = collect_seeds(&sc.corpus, &TableSet::paper_examples(), EvalOptions::default(), true, 0);
    assert_eq!(ds.warnings.len(), 2);
    let counts = ds.seed_counts();
    assert_eq!(counts[&SystemId::C], counts[&SystemId::S]);
    assert!(train(&ds, &TrainParams::default()).is_ok());
}
