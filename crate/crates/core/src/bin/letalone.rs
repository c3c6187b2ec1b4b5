use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};

use letalone::exchange::{item_scores, load_records, save_records, score_suite_with_ngram, validate_records};
use letalone::filter::{filter_bytes, filter_stream, BoundaryMode, FilterScenario, RemovalUnit, ScenarioName};
use letalone::lexicon::LexiconConfig;
use letalone::manifest::TrainingManifest;
use letalone::ngram::NGramModel;
use letalone::pipeline::{run_pipeline, RunConfig};
use letalone::report::write_report;
use letalone::scoring::{evaluate_suite, EvalOptions, SuiteResult, TieRule};
use letalone::suite_io::{read_suite, write_suite};
use letalone::template::{generate_suite, Property};
use letalone::tokenize::TokenizerSpec;
use letalone::unigram::{build_unigram, SmoothingSpec, UnigramModel};

/// Exit status of `filter` when no unit matched any pattern.
const EXIT_NO_MATCHES: u8 = 3;

#[derive(Parser)]
#[command(name = "letalone", version, about = "Let-alone minimal-pair suites, SLOR scoring and corpus filtering")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct TokenizerArgs {
    /// `whitespace` or `vocab:PATH` for pre-segmented subword text.
    #[arg(long, default_value = "whitespace")]
    tokenizer: String,
    #[arg(long)]
    lowercase: bool,
}

impl TokenizerArgs {
    fn spec(&self) -> Result<TokenizerSpec> {
        Ok(self.tokenizer.parse::<TokenizerSpec>()?.lowercased(self.lowercase))
    }
}

#[derive(Subcommand)]
enum Command {
    /// Generate a test suite.
    Generate {
        #[arg(long)]
        property: Property,
        /// Lexicon JSON; defaults to the bundled formal or semantic lexicon.
        #[arg(long)]
        lexicon: Option<PathBuf>,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Remove every unit matching a scenario's patterns. Exits with 3 when
    /// nothing matched.
    Filter {
        #[arg(long)]
        scenario: ScenarioName,
        #[arg(long, default_value = "line")]
        unit: RemovalUnit,
        #[arg(long, default_value = "word")]
        boundary: BoundaryMode,
        /// Input corpus; `-` reads stdin.
        #[arg(short, long, default_value = "-")]
        input: PathBuf,
        /// Output corpus; `-` writes stdout.
        #[arg(short, long, default_value = "-")]
        output: PathBuf,
        /// Where to write the JSON report.
        #[arg(long)]
        report: Option<PathBuf>,
        /// Load the corpus into memory and filter shards on all cores.
        #[arg(long)]
        parallel: bool,
    },
    /// Build a unigram model.
    Unigram {
        #[arg(long)]
        corpus: PathBuf,
        #[command(flatten)]
        tokenizer: TokenizerArgs,
        /// `none`, `floor`, `floor:EPS` or `add-k:K`.
        #[arg(long, default_value = "floor")]
        smoothing: SmoothingSpec,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Score a suite with the reference n-gram model.
    Score {
        #[arg(long)]
        suite: PathBuf,
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long, default_value_t = 3)]
        order: usize,
        #[arg(long, default_value_t = 0.5)]
        discount: f64,
        #[command(flatten)]
        tokenizer: TokenizerArgs,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Compute SLOR deltas and accuracy from an exchange file.
    Evaluate {
        #[arg(long)]
        suite: PathBuf,
        #[arg(long)]
        logprobs: PathBuf,
        #[arg(long)]
        unigram: PathBuf,
        #[arg(long, default_value = "NoFiltering")]
        scenario: String,
        #[arg(long, default_value = "seed-0")]
        seed: String,
        /// Count exact ties as incorrect.
        #[arg(long)]
        strict: bool,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Check an exchange file against a suite.
    Validate {
        #[arg(long)]
        suite: PathBuf,
        #[arg(long)]
        logprobs: PathBuf,
        /// Also compare tokens with the whitespace tokenization of each sentence.
        #[arg(long)]
        unigram: Option<PathBuf>,
    },
    /// Aggregate result files over seeds into tables.
    Report {
        #[arg(required = true)]
        results: Vec<PathBuf>,
        #[arg(short, long)]
        out_dir: PathBuf,
    },
    /// Write the training hyperparameter manifest.
    EmitManifest {
        /// Defaults to stdout.
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Run the whole chain from a TOML config.
    Pipeline {
        #[arg(long)]
        config: PathBuf,
    },
}

fn open_input(path: &Path) -> Result<Box<dyn BufRead>> {
    if path == Path::new("-") {
        Ok(Box::new(BufReader::new(io::stdin().lock())))
    } else {
        let f = File::open(path).with_context(|| format!("opening {}", path.display()))?;
        Ok(Box::new(BufReader::with_capacity(1 << 20, f)))
    }
}

fn open_output(path: &Path) -> Result<Box<dyn Write>> {
    if path == Path::new("-") {
        Ok(Box::new(BufWriter::new(io::stdout().lock())))
    } else {
        let f = File::create(path).with_context(|| format!("creating {}", path.display()))?;
        Ok(Box::new(BufWriter::with_capacity(1 << 20, f)))
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Generate {
            property,
            lexicon,
            output,
        } => {
            let lex = match lexicon {
                Some(p) => LexiconConfig::load(&p)?,
                None if property.is_formal() => LexiconConfig::default_formal(),
                None => LexiconConfig::default_semantic(),
            };
            let suite = generate_suite(&lex, property)?;
            write_suite(&suite, &output)?;
            eprintln!("{property}: {} items, {} pairs", suite.k(), suite.pairs());
        }
        Command::Filter {
            scenario,
            unit,
            boundary,
            input,
            output,
            report,
            parallel,
        } => {
            let scenario = FilterScenario::new(scenario).with_unit(unit).with_boundary(boundary);
            let mut reader = open_input(&input)?;
            let mut writer = open_output(&output)?;
            let rep = if parallel {
                let mut buf = Vec::new();
                reader.read_to_end(&mut buf).context("reading corpus")?;
                let (out, rep) = filter_bytes(&buf, &scenario)?;
                writer.write_all(&out)?;
                writer.flush()?;
                rep
            } else {
                filter_stream(reader, writer, &scenario)?
            };
            let json = serde_json::to_string_pretty(&rep)? + "\n";
            match report {
                Some(p) => std::fs::write(&p, json).with_context(|| format!("writing {}", p.display()))?,
                None => eprint!("{json}"),
            }
            if !rep.any_removed() {
                return Ok(ExitCode::from(EXIT_NO_MATCHES));
            }
        }
        Command::Unigram {
            corpus,
            tokenizer,
            smoothing,
            output,
        } => {
            let model = build_unigram(open_input(&corpus)?, tokenizer.spec()?, smoothing)?;
            model.save(&output)?;
            eprintln!("{} tokens, {} types", model.total(), model.vocab_size());
        }
        Command::Score {
            suite,
            corpus,
            order,
            discount,
            tokenizer,
            output,
        } => {
            let suite = read_suite(&suite)?;
            let model = NGramModel::train(open_input(&corpus)?, order, discount, tokenizer.spec()?)?;
            let records = score_suite_with_ngram(&model, &suite)?;
            save_records(&records, &output)?;
        }
        Command::Evaluate {
            suite,
            logprobs,
            unigram,
            scenario,
            seed,
            strict,
            output,
        } => {
            let suite = read_suite(&suite)?;
            let records = load_records(&logprobs)?;
            let unigram = UnigramModel::load(&unigram)?;
            let (scores, model_fingerprint) = item_scores(&suite, &records, &unigram)?;
            let opts = EvalOptions {
                tie_rule: if strict { TieRule::Strict } else { TieRule::Inclusive },
                scenario,
                seed,
                model_fingerprint,
                unigram_fingerprint: unigram.fingerprint(),
            };
            let result = evaluate_suite(&suite, &scores, &opts)?;
            result.save(&output)?;
            println!(
                "{}\t{}/{} pairs\t{:.4}",
                result.property, result.correct_pairs, result.pairs, result.accuracy
            );
        }
        Command::Validate {
            suite,
            logprobs,
            unigram,
        } => {
            let suite = read_suite(&suite)?;
            let records = load_records(&logprobs)?;
            let tokenizer = match unigram {
                Some(p) => Some(UnigramModel::load(&p)?.tokenizer().clone()),
                None => None,
            };
            validate_records(&suite, &records, tokenizer.as_ref())?;
            println!("ok: {} records for {} items", records.len(), suite.k());
        }
        Command::Report { results, out_dir } => {
            let results = results
                .iter()
                .map(|p| SuiteResult::load(p).with_context(|| format!("reading {}", p.display())))
                .collect::<Result<Vec<_>>>()?;
            let report = write_report(&results, &out_dir)?;
            print!("{}", report.to_markdown());
        }
        Command::EmitManifest { output } => {
            let m = TrainingManifest::default();
            match output {
                Some(p) => m.save(&p)?,
                None => print!("{}", m.to_json()),
            }
        }
        Command::Pipeline { config } => {
            let cfg = RunConfig::load(&config)?;
            let outcome = run_pipeline(&cfg)?;
            if outcome.results.is_empty() {
                bail!("pipeline produced no results");
            }
            print!("{}", outcome.report.to_markdown());
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
