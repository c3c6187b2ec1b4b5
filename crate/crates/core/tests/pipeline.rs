mod common;

use std::fs;
use std::path::Path;
use std::process::Command;

use letalone::exchange::{load_records, save_records};
use letalone::pipeline::{run_pipeline, RunConfig};
use letalone::report::Report;
use letalone::scoring::SuiteResult;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_letalone"))
}

fn setup(dir: &Path, seeds: &str, extra: &str) -> RunConfig {
    fs::write(dir.join("corpus.txt"), common::TOY_CORPUS).unwrap();
    fs::write(dir.join("lexicon.json"), serde_json::to_string(&common::toy_lexicon()).unwrap()).unwrap();
    let text = format!(
        "corpus = \"corpus.txt\"\noutput_dir = \"out\"\nformal_lexicon = \"lexicon.json\"\n\
         semantic_lexicon = \"lexicon.json\"\n{extra}\n{seeds}"
    );
    fs::write(dir.join("run.toml"), &text).unwrap();
    RunConfig::load(&dir.join("run.toml")).unwrap()
}

const UNIGRAM_SEED: &str = "[[seeds]]\nid = \"u\"\nscorer = \"reference-lm\"\norder = 1\n";

#[test]
fn unigram_scorer_gives_zero_slor_everywhere() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = setup(dir.path(), UNIGRAM_SEED, "scenarios = [\"NoFiltering\", \"NoLet\"]");
    let outcome = run_pipeline(&cfg).unwrap();
    assert_eq!(outcome.results.len(), 2 * 6);
    for r in &outcome.results {
        assert_eq!(r.k, 24);
        assert_eq!(r.pairs, 12);
        assert_eq!(r.accuracy, 1.0);
        for pair in &r.records {
            for item in &pair.items {
                for (_, s) in item.slor.iter() {
                    assert!(s.abs() < 1e-9, "{}: {s}", item.item_id);
                }
            }
        }
    }
}

#[test]
fn reruns_are_byte_identical_and_artifacts_carry_lineage() {
    let dir = tempfile::tempdir().unwrap();
    let seeds = "[[seeds]]\nid = \"a\"\nscorer = \"reference-lm\"\norder = 2\n\
                 [[seeds]]\nid = \"b\"\nscorer = \"reference-lm\"\norder = 3\ndiscount = 0.8\n";
    let cfg = setup(dir.path(), seeds, "scenarios = [\"NoFiltering\", \"NoAlone\"]\nproperties = [\"npi\", \"scalar_semantics\"]");
    run_pipeline(&cfg).unwrap();
    let read = |name: &str| fs::read(dir.path().join("out").join(name)).unwrap();
    let first: Vec<Vec<u8>> = ["report/report.md", "report/report.json", "report/deltas.tsv", "lineage.json"]
        .iter()
        .map(|n| read(n))
        .collect();
    run_pipeline(&cfg).unwrap();
    for (i, n) in ["report/report.md", "report/report.json", "report/deltas.tsv", "lineage.json"].iter().enumerate() {
        assert_eq!(first[i], read(n), "{n} changed between runs");
    }
    let result = SuiteResult::load(&dir.path().join("out/scenarios/NoAlone/b/results/npi.json")).unwrap();
    assert_eq!(result.lexicon_fingerprint.len(), 64);
    assert_eq!(result.model_fingerprint.len(), 64);
    assert_eq!(result.unigram_fingerprint.len(), 64);
    let report: Report = serde_json::from_slice(&read("report/report.json")).unwrap();
    assert_eq!(report.lineage.len(), 2 * 2 * 2);
    assert!(!dir.path().join("out/.lock").exists());
}

#[test]
fn corrupted_logprobs_name_the_item() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = setup(dir.path(), UNIGRAM_SEED, "scenarios = [\"NoFiltering\"]\nproperties = [\"npi\"]");
    run_pipeline(&cfg).unwrap();
    let lp = dir.path().join("out/scenarios/NoFiltering/u/logprobs/npi.jsonl");
    let mut records = load_records(&lp).unwrap();
    records[5].tokens.pop();
    records[5].logprobs.pop();
    let victim = records[5].item_id.clone();
    fs::create_dir_all(dir.path().join("ext")).unwrap();
    save_records(&records, &dir.path().join("ext/npi.jsonl")).unwrap();
    let seeds = "[[seeds]]\nid = \"ext\"\nscorer = \"logprobs\"\npath = \"ext/{property}.jsonl\"\n";
    let cfg = setup(dir.path(), seeds, "scenarios = [\"NoFiltering\"]\nproperties = [\"npi\"]");
    let err = run_pipeline(&cfg).err().expect("must fail").to_string();
    assert!(err.contains("score"), "{err}");
    assert!(err.contains(&victim), "{err}");
}

#[test]
fn missing_corpus_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = setup(dir.path(), UNIGRAM_SEED, "");
    cfg.corpus = dir.path().join("nope.txt");
    let err = run_pipeline(&cfg).err().unwrap().to_string();
    assert!(err.contains("config") && err.contains("corpus"), "{err}");
}

#[test]
fn cli_chain() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    fs::write(d.join("corpus.txt"), common::TOY_CORPUS).unwrap();
    fs::write(d.join("lexicon.json"), serde_json::to_string(&common::toy_lexicon()).unwrap()).unwrap();
    let ok = |args: &[&str]| {
        let out = bin().current_dir(d).args(args).output().unwrap();
        assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
        String::from_utf8(out.stdout).unwrap()
    };
    ok(&["generate", "--property", "npi", "--lexicon", "lexicon.json", "-o", "npi.jsonl"]);
    ok(&["unigram", "--corpus", "corpus.txt", "-o", "unigram.tsv"]);
    ok(&["score", "--suite", "npi.jsonl", "--corpus", "corpus.txt", "--order", "1", "-o", "lp.jsonl"]);
    let v = ok(&["validate", "--suite", "npi.jsonl", "--logprobs", "lp.jsonl", "--unigram", "unigram.tsv"]);
    assert!(v.starts_with("ok: 96 records"), "{v}");
    let e = ok(&["evaluate", "--suite", "npi.jsonl", "--logprobs", "lp.jsonl", "--unigram", "unigram.tsv", "-o", "r.json"]);
    assert_eq!(e.trim(), "npi\t12/12 pairs\t1.0000");
    let md = ok(&["report", "r.json", "-o", "rep"]);
    assert!(md.contains("| NPI | near 100% | 100.0% (CI undefined) |"), "{md}");
    let m = ok(&["emit-manifest"]);
    assert!(m.contains("\"vocab_size\": 16384"));

    let filter = |scenario: &str| {
        bin()
            .current_dir(d)
            .args(["filter", "--scenario", scenario, "-i", "corpus.txt", "-o", "f.txt", "--report", "f.json"])
            .status()
            .unwrap()
            .code()
    };
    assert_eq!(filter("NoLet"), Some(0));
    assert_eq!(fs::read_to_string(d.join("f.txt")).unwrap().lines().count(), 4);
    assert_eq!(filter("NoFiltering"), Some(3));

    let bad = bin().current_dir(d).args(["filter", "--scenario", "NoSuch"]).output().unwrap();
    assert_eq!(bad.status.code(), Some(2));
}
