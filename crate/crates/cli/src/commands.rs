use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::PathBuf;

use anyhow::{anyhow, bail, Context, Result};
use pe_numerals::analysis::{ambiguity_distribution, analyze_corpus, analyze_tablet, NumeralKey};
use pe_numerals::atf::write_corpus;
use pe_numerals::evalkit::{evaluate_with, load_test_set, Average, Mode};
use pe_numerals::insights::{
    associations_tsv, invalid_report, invalid_tsv, magnitude_stats, magnitude_tsv, mixed_system_report, mixed_tsv,
    object_system_associations, ratio_check, ratio_tsv, RatioScope, RatioSpec,
};
use pe_numerals::numsys::{SystemId, SystemSet};
use pe_numerals::selftrain::{
    assign_all, classify, collect_seeds, train, DecisionList, NumeralAssignment, Strategy, TrainParams,
};
use pe_numerals::sumcheck::{disambiguate_with, write_report, Evidence, SubsetSumConfig, SummaryAnalysis};
use pe_numerals::synth::{generate, SynthConfig};
use pe_numerals::Rational;

use crate::cli::{ClassifyArgs, Command, Common, EvaluateArgs, ReportArgs, StrategyArg, SynthArgs, TrainArgs};
use crate::config::{digest_hex, read, write_json, write_tsv, Fingerprint, RunConfig};

pub fn run(command: Command) -> Result<Vec<PathBuf>> {
    match command {
        Command::Convert(c) => convert(&c),
        Command::Sumcheck(c) => sumcheck(&c),
        Command::Train(a) => cmd_train(&a),
        Command::Classify(a) => cmd_classify(&a),
        Command::Evaluate(a) => cmd_evaluate(&a),
        Command::Report(a) => report(&a),
        Command::Synth(a) => synth(&a),
    }
}

fn load(command: &str, c: &Common) -> Result<RunConfig> {
    let cfg = RunConfig::load(command, c)?;
    for w in &cfg.warnings {
        eprintln!("warning: {w}");
    }
    cfg.ensure_out()?;
    Ok(cfg)
}

fn readings_cell(rs: &pe_numerals::ReadingSet) -> String {
    let parts: Vec<String> = rs.iter().filter_map(|(s, v)| v.map(|v| format!("{s}: {v}"))).collect();
    if parts.is_empty() {
        "-".into()
    } else {
        parts.join("; ")
    }
}

fn convert(c: &Common) -> Result<Vec<PathBuf>> {
    let mut cfg = load("convert", c)?;
    let analyzed = analyze_corpus(&cfg.corpus, &cfg.tables, cfg.opts);
    let mut body = String::from("tablet\tline\tnotation\treadings\tsystems\n");
    for tn in &analyzed {
        let mut rows: Vec<(u32, usize, String, String, String)> = tn
            .intact
            .iter()
            .map(|n| {
                let l = &n.notation.location;
                (l.line_no, l.token_index, n.notation.to_string(), readings_cell(&n.readings), n.valid().compact())
            })
            .collect();
        rows.extend(tn.damaged.iter().map(|n| {
            let l = &n.location;
            (l.line_no, l.token_index, n.to_string(), "-".into(), "DAMAGED".into())
        }));
        rows.sort();
        for (line, _, notation, readings, systems) in rows {
            writeln!(body, "{}\t{line}\t{notation}\t{readings}\t{systems}", tn.tablet.id)?;
        }
    }
    let dist = ambiguity_distribution(analyzed.iter().flat_map(|tn| tn.intact.iter().map(|n| &n.readings)));
    let mut rows: Vec<(SystemSet, usize)> = dist.into_iter().collect();
    rows.sort_by_key(|(s, _)| (s.len(), s.compact()));
    let mut summary = String::from("systems\tclass\tcount\n");
    let mut total = 0;
    for (set, n) in rows {
        let class = match set.len() {
            0 => "none",
            1 => "single",
            2 => "pair",
            3 => "triple",
            _ => "four-way",
        };
        let name = if set.is_empty() { "none".to_string() } else { set.compact() };
        writeln!(summary, "{name}\t{class}\t{n}")?;
        total += n;
    }
    writeln!(summary, "total\t-\t{total}")?;

    let fp = cfg.fingerprint().hex();
    let readings = cfg.out_path("readings.tsv");
    let ambiguity = cfg.out_path("ambiguity.tsv");
    write_tsv(&readings, &fp, &body)?;
    write_tsv(&ambiguity, &fp, &summary)?;
    Ok(vec![readings, ambiguity])
}

fn summary_analyses(cfg: &RunConfig) -> Vec<SummaryAnalysis> {
    let sc = SubsetSumConfig::default();
    cfg.corpus
        .tablets()
        .iter()
        .map(|t| disambiguate_with(&analyze_tablet(t, &cfg.tables, cfg.opts), &sc))
        .collect()
}

fn sumcheck(c: &Common) -> Result<Vec<PathBuf>> {
    let mut cfg = load("sumcheck", c)?;
    let analyses = summary_analyses(&cfg);
    for a in &analyses {
        for w in &a.warnings {
            eprintln!("warning: {}: {}", w.tablet_id, w.message);
        }
    }
    let path = cfg.out_path("sumcheck.tsv");
    write_tsv(&path, &cfg.fingerprint().hex(), &write_report(&analyses))?;
    Ok(vec![path])
}

pub fn train_params(a: &TrainArgs) -> TrainParams {
    TrainParams {
        n0: a.n0,
        n_step: a.n_step,
        zeta: a.zeta,
        epsilon: a.epsilon,
        max_iterations: a.max_iterations,
        seed: a.common.seed,
        strategy: match a.strategy {
            StrategyArg::Freq => Strategy::FreqCautious,
            StrategyArg::Conf => Strategy::ConfCautious,
        },
    }
}

fn cmd_train(a: &TrainArgs) -> Result<Vec<PathBuf>> {
    let mut cfg = load("train", &a.common)?;
    let params = train_params(a);
    let fp = cfg.fingerprint();
    fp.field("params", &serde_json::to_string(&params)?);
    fp.field("balance", &(!a.no_balance).to_string());
    let ds = collect_seeds(&cfg.corpus, &cfg.tables, cfg.opts, !a.no_balance, cfg.seed);
    for w in &ds.warnings {
        eprintln!("warning: {w}");
    }
    let dl = train(&ds, &params)?;
    eprintln!(
        "{}: {} iterations, {} rules, {}",
        params.strategy.as_str(),
        dl.iterations,
        dl.rules.len(),
        if dl.converged { "converged" } else { "stopped at the iteration limit" }
    );
    let fp = cfg.fingerprint().hex();
    let model = cfg.out_path("model.json");
    let log = cfg.out_path("train_log.tsv");
    write_json(&model, &fp, dl.to_json())?;
    write_tsv(&log, &fp, &dl.log_tsv())?;
    Ok(vec![model, log])
}

pub const ASSIGNMENTS_HEADER: &str = "tablet\tline\tentry\ttoken\tnotation\tsystem\tevidence\tconfidence";

fn cmd_classify(a: &ClassifyArgs) -> Result<Vec<PathBuf>> {
    let mut cfg = load("classify", &a.common)?;
    let model_path = a.model.clone().unwrap_or_else(|| cfg.out_path("model.json"));
    let model_text = read(&model_path).with_context(|| "no model; run `penum train` first")?;
    cfg.fingerprint().field("model", &digest_hex(model_text.as_bytes()));
    let dl = DecisionList::from_json(&serde_json::from_str(&model_text)?).map_err(|e| anyhow!("{e}"))?;

    let ds = collect_seeds(&cfg.corpus, &cfg.tables, cfg.opts, false, cfg.seed);
    let mut chosen: BTreeMap<NumeralKey, NumeralAssignment> =
        assign_all(&ds, &dl).into_iter().map(|x| (x.key.clone(), x)).collect();
    let index: BTreeMap<&NumeralKey, usize> = ds.examples.iter().enumerate().map(|(i, e)| (&e.key, i)).collect();

    // Summary evidence outranks the classifier.
    for (tablet, an) in cfg.corpus.tablets().iter().zip(summary_analyses(&cfg)) {
        let tn = analyze_tablet(tablet, &cfg.tables, cfg.opts);
        for c in &an.constraints {
            let Some(n) = tn.intact_for_entry(c.entry.entry_index) else { continue };
            let (Some(cur), Some(&i)) = (chosen.get_mut(&n.key()), index.get(&n.key())) else { continue };
            if cur.evidence != Evidence::Classifier || c.allowed.contains(cur.system) {
                continue;
            }
            let ex = &ds.examples[i];
            if let Some((s, p)) = classify(&ex.features, &dl, ex.valid().intersection(c.allowed)).argmax() {
                cur.system = s;
                cur.confidence = p;
            }
        }
        for asg in &an.assignments {
            let Some(n) = tn.intact_for_entry(asg.entry.entry_index) else { continue };
            if let Some(cur) = chosen.get_mut(&n.key()) {
                if cur.evidence == Evidence::Classifier && n.valid().contains(asg.system) {
                    cur.system = asg.system;
                    cur.evidence = Evidence::SummaryMatch;
                    cur.confidence = 1.0;
                }
            }
        }
    }

    let notation: BTreeMap<NumeralKey, String> = analyze_corpus(&cfg.corpus, &cfg.tables, cfg.opts)
        .iter()
        .flat_map(|tn| tn.intact.iter().map(|n| (n.key(), n.notation.to_string())))
        .collect();
    let mut body = format!("{ASSIGNMENTS_HEADER}\n");
    for x in chosen.values() {
        writeln!(
            body,
            "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{:.6}",
            x.key.tablet_id,
            x.line_no,
            x.key.entry_index,
            x.key.token_index,
            notation.get(&x.key).map_or("", String::as_str),
            x.system,
            x.evidence.as_str(),
            x.confidence
        )?;
    }
    let path = cfg.out_path("assignments.tsv");
    write_tsv(&path, &cfg.fingerprint().hex(), &body)?;
    Ok(vec![path])
}

/// Reads the file `classify` writes back into a key to system map.
pub fn parse_assignments(text: &str) -> Result<BTreeMap<NumeralKey, SystemId>> {
    let mut out = BTreeMap::new();
    for (i, line) in text.lines().enumerate() {
        if line.starts_with('#') || line.trim().is_empty() || line.starts_with("tablet\t") {
            continue;
        }
        let f: Vec<&str> = line.split('\t').collect();
        if f.len() != 8 {
            bail!("assignments row {}: expected 8 fields, found {}", i + 1, f.len());
        }
        let bad = |what: &str| anyhow!("assignments row {}: bad {what}", i + 1);
        let key = NumeralKey {
            tablet_id: f[0].to_string(),
            entry_index: f[2].parse().map_err(|_| bad("entry"))?,
            token_index: f[3].parse().map_err(|_| bad("token"))?,
        };
        let system: SystemId = f[5].parse().map_err(|_| bad("system"))?;
        out.insert(key, system);
    }
    Ok(out)
}

fn load_assignments(cfg: &mut RunConfig, path: Option<&PathBuf>) -> Result<BTreeMap<NumeralKey, SystemId>> {
    let path = path.cloned().unwrap_or_else(|| cfg.out_path("assignments.tsv"));
    if !path.exists() {
        bail!("no assignments at {}; run `penum classify` first", path.display());
    }
    let text = read(&path)?;
    cfg.fingerprint().field("assignments", &digest_hex(text.as_bytes()));
    parse_assignments(&text)
}

fn cmd_evaluate(a: &EvaluateArgs) -> Result<Vec<PathBuf>> {
    let mut cfg = load("evaluate", &a.common)?;
    let predictions = load_assignments(&mut cfg, a.assignments.as_ref())?;
    let text = read(&a.test_set)?;
    let average = if a.macro_average { Average::Macro } else { Average::Micro };
    let fp = cfg.fingerprint();
    fp.field("test_set", &digest_hex(text.as_bytes()));
    fp.field("average", &format!("{average:?}"));
    let set = load_test_set(&text, &cfg.corpus, &cfg.tables);
    for e in &set.errors {
        eprintln!("warning: test set {e}");
    }
    if set.items.is_empty() {
        bail!("test set {} has no usable rows", a.test_set.display());
    }
    let fp = cfg.fingerprint().hex();
    let mut written = Vec::new();
    let mut metrics = serde_json::Map::new();
    for (mode, name) in [(Mode::FourWay, "four_way"), (Mode::TwoWay, "two_way")] {
        let m = evaluate_with(&predictions, &set.items, mode, average)?;
        eprintln!("{}: P={:.4} R={:.4} F1={:.4}", mode.as_str(), m.precision, m.recall, m.f1);
        let path = cfg.out_path(&format!("confusion_{name}.tsv"));
        write_tsv(&path, &fp, &m.confusion_tsv())?;
        written.push(path);
        metrics.insert(name.into(), m.to_json());
    }
    metrics.insert(
        "test_set_errors".into(),
        set.errors.iter().map(|e| e.to_string()).collect::<Vec<_>>().into(),
    );
    let path = cfg.out_path("metrics.json");
    write_json(&path, &fp, metrics.into())?;
    written.insert(0, path);
    Ok(written)
}

pub fn parse_ratio(s: &str) -> Result<RatioSpec> {
    let parts: Vec<&str> = s.split(':').collect();
    let scope = match parts.get(3) {
        None => RatioScope::WithinTablet,
        Some(&"adjacent") => RatioScope::AdjacentEntries,
        Some(&"tablet") => RatioScope::WithinTablet,
        Some(other) => bail!("unknown ratio scope `{other}`"),
    };
    if !(3..=4).contains(&parts.len()) {
        bail!("ratio `{s}` should look like ANTECEDENT:CONSEQUENT:RATIO[:adjacent]");
    }
    let expected: Rational = parts[2].parse().map_err(|e| anyhow!("ratio `{s}`: {e}"))?;
    Ok(RatioSpec {
        antecedent: parts[0].to_string(),
        consequent: parts[1].to_string(),
        expected,
        scope,
    })
}

fn report(a: &ReportArgs) -> Result<Vec<PathBuf>> {
    let mut cfg = load("report", &a.common)?;
    let specs: Vec<RatioSpec> = a.ratio.iter().map(|s| parse_ratio(s)).collect::<Result<_>>()?;
    cfg.fingerprint().field("ratio", &a.ratio.join(","));
    let assignments = load_assignments(&mut cfg, a.assignments.as_ref())?;
    let dir = cfg.out_path("report");
    fs::create_dir_all(&dir)?;
    let fp = cfg.fingerprint().hex();
    let (corpus, tables) = (&cfg.corpus, &cfg.tables);

    let mut files: Vec<(&str, String)> = vec![
        ("invalid.tsv", invalid_tsv(&invalid_report(corpus, tables))),
        ("mixed.tsv", mixed_tsv(&mixed_system_report(corpus, tables))),
        ("associations.tsv", associations_tsv(&object_system_associations(corpus, tables))),
        ("magnitudes.tsv", magnitude_tsv(&magnitude_stats(corpus, &assignments, tables)?)),
    ];
    let mut ratios = String::new();
    for spec in &specs {
        let rep = ratio_check(corpus, spec, tables, Some(&assignments));
        for w in &rep.warnings {
            eprintln!("warning: ratio {}:{}: {w}", spec.antecedent, spec.consequent);
        }
        let tsv = ratio_tsv(&rep);
        // One header for the whole file.
        if ratios.is_empty() {
            ratios.push_str(&tsv);
        } else {
            ratios.extend(tsv.lines().skip(1).map(|l| format!("{l}\n")));
        }
    }
    if !specs.is_empty() {
        files.push(("ratio.tsv", ratios));
    }
    let mut written = Vec::new();
    for (name, body) in files {
        let path = dir.join(name);
        write_tsv(&path, &fp, &body)?;
        written.push(path);
    }
    Ok(written)
}

fn synth(a: &SynthArgs) -> Result<Vec<PathBuf>> {
    let cfg = SynthConfig {
        tablets: a.tablets,
        seed_rate: a.seed_rate,
        seed: a.seed,
        ..SynthConfig::default()
    };
    if !(0.0..=1.0).contains(&cfg.seed_rate) {
        bail!("--seed-rate must lie in [0, 1]");
    }
    let sc = generate(&cfg);
    let mut fp = Fingerprint::new("synth");
    fp.field("config", &format!("{cfg:?}"));
    let fp = fp.hex();
    fs::create_dir_all(&a.out)?;
    let corpus = a.out.join("synth.atf");
    fs::write(&corpus, format!("# fingerprint {fp}\n{}", write_corpus(&sc.corpus)))?;
    let mut truth = String::from("tablet\tline\tsystem\tevidence\n");
    for t in sc.corpus.tablets() {
        for (i, e) in t.entries.iter().enumerate() {
            let key = NumeralKey {
                tablet_id: t.id.clone(),
                entry_index: i,
                token_index: e.text.len(),
            };
            if let Some(s) = sc.truth.get(&key) {
                writeln!(truth, "{}\t{}\t{s}\tPLANTED", t.id, e.line_no)?;
            }
        }
    }
    let truth_path = a.out.join("synth_truth.tsv");
    write_tsv(&truth_path, &fp, &truth)?;
    Ok(vec![corpus, truth_path])
}
