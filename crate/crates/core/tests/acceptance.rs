//! Acceptance criteria. Runs without the libtest harness and prints one
//! PASS/FAIL line per criterion; exits non-zero if any fails.

mod common;

use std::collections::{BTreeSet, HashMap};
use std::fs;
use std::time::{Duration, Instant};

use letalone::exchange::{item_scores, score_suite_with_ngram};
use letalone::filter::{filter_bytes, split_units, Filter, FilterScenario, ScenarioName};
use letalone::lexicon::{LexiconConfig, Noun, Predicate};
use letalone::ngram::NGramModel;
use letalone::pipeline::{run_pipeline, RunConfig};
use letalone::report::Report;
use letalone::scoring::{evaluate_suite, EvalOptions, ItemScores, TieRule};
use letalone::template::{generate_suite, ConditionLabel, PerCondition, Property};
use letalone::tokenize::TokenizerSpec;
use letalone::unigram::{build_unigram_from_str, SmoothingSpec};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Check = Result<String, String>;
type Criterion = (&'static str, Duration, fn() -> Check);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn zero_point() -> Check {
    let tok = TokenizerSpec::whitespace();
    let unigram = build_unigram_from_str(common::TOY_CORPUS, tok.clone(), SmoothingSpec::default()).map_err(|e| e.to_string())?;
    let model = NGramModel::train_str(common::TOY_CORPUS, 1, 0.5, tok).map_err(|e| e.to_string())?;
    let mut suites: Vec<_> = Property::ALL
        .iter()
        .map(|&p| generate_suite(&common::toy_lexicon(), p).unwrap())
        .collect();
    suites.push(generate_suite(&LexiconConfig::default_formal(), Property::Npi).unwrap());
    let (mut max_slor, mut items) = (0.0f64, 0usize);
    for suite in &suites {
        let records = score_suite_with_ngram(&model, suite).map_err(|e| e.to_string())?;
        let (scores, fp) = item_scores(suite, &records, &unigram).map_err(|e| e.to_string())?;
        for s in scores.values() {
            for (_, v) in s.slor.iter() {
                max_slor = max_slor.max(v.abs());
            }
            ensure(s.delta_ltaln == 0.0 && s.delta_and == 0.0, || format!("{}: nonzero delta", s.item_id))?;
        }
        let opts = EvalOptions {
            model_fingerprint: fp,
            ..Default::default()
        };
        let r = evaluate_suite(suite, &scores, &opts).map_err(|e| e.to_string())?;
        ensure(r.accuracy == 1.0, || format!("{}: accuracy {}", suite.property, r.accuracy))?;
        items += suite.k();
    }
    ensure(max_slor <= 1e-9, || format!("max |SLOR| = {max_slor:e}"))?;
    Ok(format!("{items} items, max |SLOR| = {max_slor:e}, every delta 0, accuracy 1.0"))
}

fn metric_oracle() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let verbs = [("lift", "weight"), ("afford", "price"), ("reach", "height")];
    let mods = ["blue", "red", "green", "black"];
    let mut compared = 0usize;
    for set in 0..1000 {
        let lex = common::lexicon(
            &verbs[..rng.gen_range(1..=3)],
            &["I", "she"][..rng.gen_range(1..=2)],
            &["crate", "box"][..rng.gen_range(1..=2)],
            &mods[..rng.gen_range(2..=4)],
        );
        let property = Property::ALL[rng.gen_range(0..Property::ALL.len())];
        let suite = generate_suite(&lex, property).unwrap();
        let ties = rng.gen_bool(0.5);
        let strict = set % 4 == 3;
        let scores = common::random_scores(&suite, &mut rng, ties);
        let opts = EvalOptions {
            tie_rule: if strict { TieRule::Strict } else { TieRule::Inclusive },
            ..Default::default()
        };
        let got = evaluate_suite(&suite, &scores, &opts).map_err(|e| e.to_string())?;
        let (joint, accuracy) = common::brute_force(&suite, &scores, strict);
        let got_joint: Vec<bool> = got.records.iter().map(|r| r.joint_correct).collect();
        ensure(got_joint == joint, || format!("set {set}: pair verdicts differ"))?;
        ensure((got.accuracy - accuracy).abs() <= 1e-12, || {
            format!("set {set}: accuracy {} vs {accuracy}", got.accuracy)
        })?;
        compared += joint.len();
    }
    Ok(format!("1000 sets, {compared} pairs identical"))
}

fn chance_level() -> Check {
    // 100 predicates x 10 nouns x 1 subject x C(5,2) = 10,000 twin pairs.
    let mut lex = common::lexicon(&[], &["I"], &[], &["blue", "red", "green", "black", "white"]);
    lex.nouns = (0..10).map(|i| Noun::singular(format!("n{i}"))).collect();
    lex.predicates = (0..100)
        .map(|i| Predicate {
            verb: format!("v{i}"),
            domain: "weight".into(),
            nouns: None,
        })
        .collect();
    let suite = generate_suite(&lex, Property::ConjClause).unwrap();
    ensure(suite.pairs() == 10_000, || format!("{} pairs", suite.pairs()))?;
    let mut rng = ChaCha8Rng::seed_from_u64(2025);
    let scores: HashMap<String, ItemScores> = suite
        .items
        .iter()
        .map(|i| {
            let slor = PerCondition::from_fn(|_| rng.gen::<f64>());
            (i.item_id.clone(), ItemScores::from_slor(&i.item_id, slor).unwrap())
        })
        .collect();
    let r = evaluate_suite(&suite, &scores, &EvalOptions::default()).map_err(|e| e.to_string())?;
    ensure((r.accuracy - 0.25).abs() <= 0.02, || format!("accuracy {}", r.accuracy))?;
    Ok(format!("10000 pairs, accuracy {:.4}", r.accuracy))
}

fn template_fidelity() -> Check {
    let frame = common::lexicon(&[("lift", "weight")], &["I"], &["crate"], &["blue", "red"]);
    let rows = [
        (Property::ConjClause, "I couldn't lift the blue crate let alone I couldn't lift the red crate."),
        (Property::ConjVp, "I couldn't lift the blue crate let alone lift the red crate."),
        (Property::ConjGap, "I couldn't lift the blue crate let alone you the red crate."),
        (Property::Cleft, "It is the blue crate let alone the red crate that I couldn't lift."),
        (Property::Npi, "I could lift the blue crate let alone the red crate."),
    ];
    for (p, expected) in rows {
        let suite = generate_suite(&frame, p).unwrap();
        let got = suite.items[0].sentence(ConditionLabel::PLUS_MANIP_PLUS_LTALN);
        ensure(got == expected, || format!("{p}: `{got}`"))?;
    }

    // Hand-counted items: subjects x (predicate, noun) frames x ordered modifier pairs.
    let toys = [
        (common::toy_lexicon(), 24),
        (
            common::lexicon(&[("lift", "weight")], &["I", "she", "we"], &["crate"], &["a", "b", "c", "d"]),
            3 * 12,
        ),
        (
            {
                let mut lex =
                    common::lexicon(&[("lift", "weight"), ("buy", "price"), ("reach", "height")], &["I"], &["box"], &["a", "b"]);
                lex.domain_nouns.insert("price".into(), vec![Noun::singular("car"), Noun::plural("shoes")]);
                lex.predicates[2].nouns = Some(vec![Noun::singular("shelf"), Noun::singular("roof"), Noun::singular("branch")]);
                lex
            },
            2 * (1 + 2 + 3),
        ),
    ];
    for (i, (lex, items)) in toys.iter().enumerate() {
        for p in Property::ALL {
            let k = generate_suite(lex, p).unwrap().k();
            ensure(k == *items, || format!("toy {i} {p}: {k} items, expected {items}"))?;
        }
    }

    let formal = LexiconConfig::default_formal();
    for p in Property::FORMAL {
        let pairs = generate_suite(&formal, p).unwrap().pairs();
        ensure(pairs == 5217, || format!("{p}: {pairs} pairs"))?;
    }
    let semantic = generate_suite(&LexiconConfig::default_semantic(), Property::ScalarSemantics).unwrap();
    ensure(semantic.pairs() == 16887, || format!("semantic: {} pairs", semantic.pairs()))?;
    Ok("5 reference sentences verbatim, 3 toy lexicons, 5217 formal / 16887 semantic pairs".into())
}

const FILLER: &[&str] = &[
    "the", "a", "dog", "ran", "to", "school", "and", "she", "was", "happy", "letting", "lonely", "outlet", "Let's",
    "alone-ness", "letter", "mind", "much", "less", "more", "never", "than", "mention", "not",
];
const TRIGGERS: &[&str] = &[
    "let", "Let", "alone", "ALONE", "let alone", "Let Alone", "much less", "never mind", "not to mention", "more than",
    "less than",
];

fn synthetic_corpus(lines: usize, rng: &mut ChaCha8Rng) -> String {
    let mut s = String::with_capacity(lines * 48);
    for _ in 0..lines {
        let n = rng.gen_range(3..10);
        for j in 0..n {
            if j > 0 {
                s.push(' ');
            }
            let w = if rng.gen_bool(0.02) {
                TRIGGERS[rng.gen_range(0..TRIGGERS.len())]
            } else {
                FILLER[rng.gen_range(0..FILLER.len())]
            };
            s.push_str(w);
        }
        s.push_str(".\n");
    }
    s
}

fn filter_properties() -> Check {
    let fixture = include_str!("fixtures/filter50.txt");
    let expected = [0u64, 10, 15, 14, 13, 20];
    for (name, want) in ScenarioName::ALL.into_iter().zip(expected) {
        let (out, report) = filter_bytes(fixture.as_bytes(), &FilterScenario::new(name)).map_err(|e| e.to_string())?;
        ensure(report.units_removed == want, || format!("fixture {name}: removed {}", report.units_removed))?;
        let out = String::from_utf8(out).unwrap();
        ensure(out.contains("Letting go is hard.") && out.contains("lonely road"), || {
            format!("fixture {name}: letting/lonely removed")
        })?;
    }

    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut sizes = Vec::new();
    for lines in [1_000, 10_000, 100_000, 1_000_000] {
        let corpus = synthetic_corpus(lines, &mut rng);
        let units = split_units(&corpus, Default::default());
        let mut removed: HashMap<ScenarioName, BTreeSet<usize>> = HashMap::new();
        for name in ScenarioName::ALL {
            let scenario = FilterScenario::new(name);
            let filter = Filter::new(scenario.clone()).unwrap();
            let (once, report) = filter_bytes(corpus.as_bytes(), &scenario).map_err(|e| e.to_string())?;
            let (twice, _) = filter_bytes(&once, &scenario).map_err(|e| e.to_string())?;
            ensure(once == twice, || format!("{lines} lines {name}: not idempotent"))?;
            let once = String::from_utf8(once).unwrap();
            for line in once.lines() {
                ensure(!filter.matches(line), || format!("{lines} lines {name}: residue `{line}`"))?;
                ensure(!scenario.patterns.iter().any(|p| common::has_word(line, p)), || {
                    format!("{lines} lines {name}: oracle residue `{line}`")
                })?;
            }
            let set: BTreeSet<usize> = units
                .iter()
                .enumerate()
                .filter(|(_, u)| filter.matches(u))
                .map(|(i, _)| i)
                .collect();
            ensure(set.len() as u64 == report.units_removed, || format!("{lines} lines {name}: count mismatch"))?;
            removed.insert(name, set);
        }
        let both = &removed[&ScenarioName::NoLetorAlone];
        ensure(
            removed[&ScenarioName::NoLet].union(&removed[&ScenarioName::NoAlone]).all(|i| both.contains(i)),
            || format!("{lines} lines: NoLetorAlone misses a NoLet or NoAlone unit"),
        )?;
        ensure(
            removed[&ScenarioName::NoPairedFocus].is_subset(&removed[&ScenarioName::NoPairedFocComp]),
            || format!("{lines} lines: NoPairedFocComp misses a NoPairedFocus unit"),
        )?;
        sizes.push(format!("{lines}:{}", both.len()));
    }
    Ok(format!("fixture exact, corpora (lines:NoLetorAlone removals) {}", sizes.join(" ")))
}

fn report_layout() -> Check {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let d = dir.path();
    fs::write(d.join("corpus.txt"), common::TOY_CORPUS).unwrap();
    fs::write(d.join("lexicon.json"), serde_json::to_string(&common::toy_lexicon()).unwrap()).unwrap();
    let cfg = "corpus = \"corpus.txt\"\noutput_dir = \"out\"\nformal_lexicon = \"lexicon.json\"\n\
               semantic_lexicon = \"lexicon.json\"\n\
               [[seeds]]\nid = \"seed-1\"\nscorer = \"reference-lm\"\norder = 2\ndiscount = 0.5\n\
               [[seeds]]\nid = \"seed-2\"\nscorer = \"reference-lm\"\norder = 3\ndiscount = 0.8\n";
    fs::write(d.join("run.toml"), cfg).unwrap();
    let cfg = RunConfig::load(&d.join("run.toml")).map_err(|e| e.to_string())?;
    let outcome = run_pipeline(&cfg).map_err(|e| e.to_string())?;
    let md = fs::read_to_string(d.join("out/report/report.md")).map_err(|e| e.to_string())?;
    let report: Report =
        serde_json::from_str(&fs::read_to_string(d.join("out/report/report.json")).unwrap()).map_err(|e| e.to_string())?;

    let t_975_1 = 12.706204736432095;
    for cell in &report.cells {
        let acc: Vec<f64> = cell.seeds.values().copied().collect();
        ensure(acc.len() == 2, || format!("{}/{}: {} seeds", cell.scenario, cell.property, acc.len()))?;
        let mean = (acc[0] + acc[1]) / 2.0;
        ensure((cell.interval.mean - mean).abs() <= 1e-12, || format!("{}/{}: mean", cell.scenario, cell.property))?;
        let half = t_975_1 * (acc[0] - acc[1]).abs() / 2.0;
        let got = cell.interval.half_width.ok_or("missing interval")?;
        ensure((got - half).abs() <= 1e-9, || format!("{}/{}: CI {got} vs {half}", cell.scenario, cell.property))?;
    }

    let lines: Vec<&str> = md.lines().collect();
    let find = |s: &str| lines.iter().position(|l| *l == s);
    let t2 = find("| Formal Property | Prediction | Accuracy |").ok_or("no syntactic table")?;
    let formal_rows = [
        ("Conjunction (Clause)", "near 100%"),
        ("Clefting", "near 100%"),
        ("NPI", "near 100%"),
        ("Conjunction (VP)", "near 25%"),
        ("Conjunction (Gap)", "near 25%"),
    ];
    for (i, (name, pred)) in formal_rows.iter().enumerate() {
        let row = lines[t2 + 2 + i];
        ensure(row.starts_with(&format!("| {name} | {pred} | ")) && row.contains(" ± "), || {
            format!("syntactic row {i}: `{row}`")
        })?;
    }
    let sem = find("| Model | Property | Prediction | Accuracy |").ok_or("no semantic table")?;
    ensure(lines[sem + 2].contains("| Scalar Semantics | near 100% |"), || "semantic row".into())?;
    let grid = find(
        "| Filtering Scenario | NPI | Conjunction (Clause) | Clefting | Conjunction (VP) | Conjunction (Elided VP) | Scalar Semantics |",
    )
    .ok_or("no filtered-pretraining grid")?;
    for (i, name) in ScenarioName::ALL.iter().enumerate() {
        let row = lines[grid + 2 + i];
        let cells: Vec<&str> = row.trim_matches('|').split('|').map(str::trim).collect();
        ensure(cells.len() == 7 && cells[0] == name.as_str(), || format!("grid row {i}: `{row}`"))?;
        ensure(cells[1..].iter().all(|c| c.contains(" ± ") && c.ends_with('%')), || format!("grid row {i}: `{row}`"))?;
    }
    ensure(md.contains("Low power"), || "low-power note missing".into())?;
    Ok(format!(
        "{} results, syntactic / semantic / 6x6 grid with mean ± 95% CI over 2 seeds",
        outcome.results.len()
    ))
}

fn main() {
    let criteria: [Criterion; 6] = [
        ("zero-point chain", Duration::from_secs(5), zero_point),
        ("metric oracle", Duration::from_secs(5), metric_oracle),
        ("chance level", Duration::from_secs(10), chance_level),
        ("template fidelity", Duration::from_secs(10), template_fidelity),
        ("filter properties", Duration::from_secs(30), filter_properties),
        ("report layout", Duration::MAX, report_layout),
    ];
    let mut failed = 0;
    for (name, budget, check) in criteria {
        let start = Instant::now();
        let outcome = check();
        let took = start.elapsed();
        let outcome = match outcome {
            Ok(detail) if took > budget => Err(format!("{detail}; over budget of {budget:?}")),
            other => other,
        };
        match outcome {
            Ok(detail) => println!("PASS {name} ({:.2}s): {detail}", took.as_secs_f64()),
            Err(why) => {
                failed += 1;
                println!("FAIL {name} ({:.2}s): {why}", took.as_secs_f64());
            }
        }
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
