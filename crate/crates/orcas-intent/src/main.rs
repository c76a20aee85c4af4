//! Command-line front end: `label`, `eval`, `stats` and `agreement`
//! subcommands over the library. All domain logic lives in the library;
//! this file only parses flags, opens files and prints reports.

use std::collections::{BTreeMap, HashMap};
use std::io::{self, BufRead, Write};
use std::process::ExitCode;

use clap::{Args, CommandFactory, FromArgMatches, Parser, Subcommand, ValueEnum};

use orcas_intent::aggregate::{
    fit_agreement_weights, load_weights, majority_vote, save_weights, TiePolicy,
    DEFAULT_MIN_FIT_RECORDS,
};
use orcas_intent::config::{Aggregator, ConfigError, RunConfig};
use orcas_intent::eval::{agreement_rate, cohen_kappa, evaluate, evaluate_top_level};
use orcas_intent::ingest::{
    open_input, open_output, parse_annotated_line, read_gold_tsv, read_orcas_tsv, LabeledTsvWriter,
    OrcasReader, RowError,
};
use orcas_intent::lexicon::LexiconSet;
use orcas_intent::pipeline::{StreamError, StreamOptions};
use orcas_intent::rules::{QueryContext, Registry, RuleParams};
use orcas_intent::stats::{corpus_stats, CorpusAccumulator, CountingMode, LabelDistribution};
use orcas_intent::taxonomy::{IntentLabel, Level, LevelVote};
use orcas_intent::url::parse_url;

#[derive(Parser)]
#[command(
    name = "orcas-intent",
    version,
    about = "Rule-based user-intent labelling for web-search click logs"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Label a click log (TSV: query id, query, doc id, URL)
    Label(LabelArgs),
    /// Score a labelled file against a gold file
    Eval(EvalArgs),
    /// Corpus statistics and, for labelled input, the label distribution
    Stats(StatsArgs),
    /// Inter-annotator agreement between two gold files
    Agreement(AgreementArgs),
}

#[derive(Args)]
struct LabelArgs {
    /// Input click log; '-' for stdin
    #[arg(short, long, default_value = "-")]
    input: String,
    /// Output file; '-' for stdout
    #[arg(short, long, default_value = "-")]
    output: String,
    /// Config file of `key = value` lines (overridden by flags)
    #[arg(long)]
    config: Option<String>,
    /// Directory of lexicon files (default: bundled set, or $INTENT_LEXICONS)
    #[arg(long)]
    lexicons: Option<String>,
    /// Minimum query↔domain similarity for a navigational vote
    #[arg(long)]
    nav_threshold: Option<f64>,
    /// How votes are combined: majority or agreement-weighted
    #[arg(long)]
    aggregator: Option<Aggregator>,
    /// Drop the three URL-dependent rules (ablation mode)
    #[arg(long)]
    mute_url_lfs: bool,
    /// Append a column with every rule's vote
    #[arg(long)]
    include_votes: bool,
    /// Labelling threads; 1 preserves input order
    #[arg(long)]
    workers: Option<usize>,
    /// Disable one labelling function by id (repeatable)
    #[arg(long = "disable-lf", value_name = "ID")]
    disable_lf: Vec<String>,
    /// Load agreement weights from a file instead of fitting them
    #[arg(long)]
    weights_file: Option<String>,
    /// Write the agreement weights that were used
    #[arg(long)]
    save_weights: Option<String>,
    /// Rows to sample when fitting agreement weights
    #[arg(long, default_value_t = 100_000)]
    fit_sample: usize,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum EvalLevel {
    /// All five leaf labels
    Full,
    /// Projected onto navigational / transactional / informational
    Top,
}

#[derive(Args)]
struct EvalArgs {
    /// Predictions: labelled output (6/7 columns) or gold format (5)
    pred: String,
    /// Gold file (5 columns: corpus columns + label)
    gold: String,
    #[arg(long, value_enum, default_value_t = EvalLevel::Full)]
    level: EvalLevel,
}

#[derive(Args)]
struct StatsArgs {
    /// Input file; '-' for stdin
    #[arg(short, long, default_value = "-")]
    input: String,
    /// Input is labelled/gold output; also report the label distribution
    #[arg(long)]
    labeled: bool,
    /// Use probabilistic unique counting (bounded memory, ~0.8% error)
    #[arg(long)]
    approximate: bool,
    /// Directory of lexicon files (for domain extraction)
    #[arg(long)]
    lexicons: Option<String>,
}

#[derive(Args)]
struct AgreementArgs {
    /// First annotator's gold-format file
    file_a: String,
    /// Second annotator's gold-format file
    file_b: String,
}

enum CliError {
    /// Wrong flags, bad config, inconsistent arguments: exit 2.
    Usage(String),
    /// I/O or data failures at runtime: exit 1.
    Fatal(String),
}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        match e {
            ConfigError::Lexicon(_) | ConfigError::Io { .. } => CliError::Fatal(e.to_string()),
            other => CliError::Usage(other.to_string()),
        }
    }
}

impl From<StreamError> for CliError {
    fn from(e: StreamError) -> Self {
        CliError::Fatal(e.to_string())
    }
}

fn fatal(context: &str) -> impl Fn(io::Error) -> CliError + '_ {
    move |e| CliError::Fatal(format!("{context}: {e}"))
}

fn main() -> ExitCode {
    let rule_help = rule_help();
    let matches = Cli::command()
        .mut_subcommand("label", |sub| sub.after_help(rule_help))
        .get_matches();
    let cli = match Cli::from_arg_matches(&matches) {
        Ok(cli) => cli,
        Err(e) => e.exit(),
    };
    let result = match cli.command {
        Command::Label(args) => cmd_label(args),
        Command::Eval(args) => cmd_eval(args),
        Command::Stats(args) => cmd_stats(args),
        Command::Agreement(args) => cmd_agreement(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(CliError::Fatal(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}

/// One help line per registered labelling function, straight from the
/// registry so the list can never drift from the code.
fn rule_help() -> String {
    let mut text = String::from("Labelling functions (toggle with --disable-lf <ID>):\n");
    for f in Registry::default_set().functions() {
        let level = match f.level {
            Level::One => "1",
            Level::Two => "2",
        };
        let url_note = if f.uses_url { ", uses URL" } else { "" };
        text.push_str(&format!(
            "  {:<32} level {level} \u{2192} {}{url_note}\n",
            f.id, f.target
        ));
    }
    text
}

fn build_config(args: &LabelArgs) -> Result<RunConfig, CliError> {
    let mut config = RunConfig::default();
    if let Some(path) = &args.config {
        config.apply_file(path)?;
    }
    if let Some(dir) = &args.lexicons {
        config.lexicon_dir = Some(dir.into());
    }
    if let Some(t) = args.nav_threshold {
        config.nav_threshold = t;
    }
    if let Some(a) = args.aggregator {
        config.aggregator = a;
    }
    if args.mute_url_lfs {
        config.mute_url_lfs = true;
    }
    if args.include_votes {
        config.include_votes = true;
    }
    if let Some(w) = args.workers {
        config.workers = w;
    }
    for id in &args.disable_lf {
        config.lf_overrides.insert(id.clone(), false);
    }
    config.validate()?;
    Ok(config)
}

fn cmd_label(args: LabelArgs) -> Result<(), CliError> {
    let config = build_config(&args)?;

    let weights = match config.aggregator {
        Aggregator::Majority => None,
        Aggregator::AgreementWeighted => {
            let weights = match &args.weights_file {
                Some(path) => {
                    let file = open_input(path).map_err(fatal(path))?;
                    load_weights(file)
                        .map_err(|e| CliError::Fatal(format!("weights file {path}: {e}")))?
                }
                None => fit_weights(&args.input, &config, args.fit_sample)?,
            };
            if let Some(path) = &args.save_weights {
                let mut out = open_output(path).map_err(fatal(path))?;
                save_weights(&mut out, &weights).map_err(fatal(path))?;
                out.flush().map_err(fatal(path))?;
            }
            Some(weights)
        }
    };

    let labeler = config.build_labeler(weights)?;
    let reader = read_orcas_tsv(&args.input).map_err(fatal(&args.input))?;
    let sink = open_output(&args.output).map_err(fatal(&args.output))?;
    let mut writer = LabeledTsvWriter::new(sink, config.include_votes);
    let options = StreamOptions {
        workers: config.workers,
        ..StreamOptions::default()
    };
    let summary = labeler.label_stream(reader, &mut writer, &options)?;
    writer.flush().map_err(fatal(&args.output))?;

    let mut err = io::stderr().lock();
    summary.write_human(&mut err).map_err(fatal("stderr"))?;
    summary.write_machine(&mut err).map_err(fatal("stderr"))?;
    Ok(())
}

/// Two-pass weight fitting: sample the input once, collect per-level vote
/// vectors (level 2 only where level 1 reached no decision, mirroring the
/// cascade), and estimate one weight per rule from inter-rule agreement.
fn fit_weights(
    input: &str,
    config: &RunConfig,
    fit_sample: usize,
) -> Result<BTreeMap<String, f64>, CliError> {
    if input == "-" {
        return Err(CliError::Usage(
            "fitting agreement weights reads the input twice, which stdin cannot do; \
             pass a file path or provide --weights-file"
                .into(),
        ));
    }
    let registry = config.build_registry()?;
    let lexicons = config.load_lexicons().map_err(ConfigError::from)?;
    let params = RuleParams {
        nav_threshold: config.nav_threshold,
    };
    let mut level1 = Vec::new();
    let mut level2 = Vec::new();
    let reader = read_orcas_tsv(input).map_err(fatal(input))?;
    for item in reader.take(fit_sample) {
        let record = match item {
            Ok(record) => record,
            Err(RowError::Malformed { .. }) => continue,
            Err(RowError::Io(e)) => return Err(fatal(input)(e)),
        };
        let url = parse_url(&record.url, &lexicons.tld_suffixes).ok();
        let ctx = QueryContext::new(&record.query, url.as_ref());
        let votes1 = registry.apply_level(&record.query_id, &ctx, Level::One, &lexicons, &params);
        if majority_vote(&votes1, TiePolicy::AbstainOnTie).label == LevelVote::NoVote {
            level2.push(registry.apply_level(
                &record.query_id,
                &ctx,
                Level::Two,
                &lexicons,
                &params,
            ));
        }
        level1.push(votes1);
    }
    let mut weights = fit_agreement_weights(&level1, DEFAULT_MIN_FIT_RECORDS)
        .map_err(|e| CliError::Fatal(format!("fitting level-1 weights from {input}: {e}")))?;
    let second = fit_agreement_weights(&level2, DEFAULT_MIN_FIT_RECORDS).map_err(|e| {
        CliError::Fatal(format!(
            "fitting level-2 weights from {input}: {e}; a larger --fit-sample may help"
        ))
    })?;
    weights.extend(second);
    eprintln!(
        "fitted agreement weights for {} rules from {} sampled rows",
        weights.len(),
        level1.len()
    );
    Ok(weights)
}

/// Streams prediction rows (labelled or gold format) and pairs each with
/// its gold label by (query id, URL).
fn join_predictions(
    pred_path: &str,
    gold_path: &str,
) -> Result<(Vec<IntentLabel>, Vec<IntentLabel>), CliError> {
    let gold_rows = read_gold_tsv(gold_path).map_err(|e| CliError::Fatal(e.to_string()))?;
    let mut gold: HashMap<(String, String), IntentLabel> = HashMap::new();
    for row in gold_rows {
        gold.insert(
            (row.record.query_id.clone(), row.record.url.clone()),
            row.gold_label,
        );
    }
    let total_gold = gold.len();

    let source = open_input(pred_path).map_err(fatal(pred_path))?;
    let mut pred_labels = Vec::new();
    let mut gold_labels = Vec::new();
    let mut unmatched_pred = 0u64;
    for (idx, line) in source.lines().enumerate() {
        let line = line.map_err(fatal(pred_path))?;
        if line.is_empty() {
            continue;
        }
        let row = parse_annotated_line(&line)
            .map_err(|reason| CliError::Fatal(format!("{pred_path}:{}: {reason}", idx + 1)))?;
        let key = (row.record.query_id, row.record.url);
        match gold.remove(&key) {
            Some(gold_label) => {
                pred_labels.push(row.final_label);
                gold_labels.push(gold_label);
            }
            None => unmatched_pred += 1,
        }
    }

    let unmatched_gold = gold.len();
    if unmatched_pred > 0 || unmatched_gold > 0 {
        eprintln!(
            "warning: {unmatched_pred} prediction rows without a gold match; \
             {unmatched_gold} of {total_gold} gold rows never predicted"
        );
    }
    if pred_labels.is_empty() {
        return Err(CliError::Fatal(format!(
            "no predictions in {pred_path} match gold records in {gold_path} \
             (joined on query id + URL)"
        )));
    }
    Ok((pred_labels, gold_labels))
}

fn cmd_eval(args: EvalArgs) -> Result<(), CliError> {
    let (pred, gold) = join_predictions(&args.pred, &args.gold)?;
    let stdout = io::stdout().lock();
    let mut out = io::BufWriter::new(stdout);
    match args.level {
        EvalLevel::Full => {
            let report = evaluate(&pred, &gold, &IntentLabel::ALL)
                .map_err(|e| CliError::Usage(e.to_string()))?;
            report.write_table(&mut out).map_err(fatal("stdout"))?;
            writeln!(out).map_err(fatal("stdout"))?;
            report.write_machine(&mut out).map_err(fatal("stdout"))?;
        }
        EvalLevel::Top => {
            let report =
                evaluate_top_level(&pred, &gold).map_err(|e| CliError::Usage(e.to_string()))?;
            report.write_table(&mut out).map_err(fatal("stdout"))?;
            writeln!(out).map_err(fatal("stdout"))?;
            report.write_machine(&mut out).map_err(fatal("stdout"))?;
        }
    }
    out.flush().map_err(fatal("stdout"))?;
    Ok(())
}

fn cmd_stats(args: StatsArgs) -> Result<(), CliError> {
    let config = RunConfig {
        lexicon_dir: args.lexicons.as_ref().map(Into::into),
        ..RunConfig::default()
    };
    let lexicons: LexiconSet = config
        .load_lexicons()
        .map_err(|e| CliError::Fatal(e.to_string()))?;
    let mode = if args.approximate {
        CountingMode::Approximate
    } else {
        CountingMode::Exact
    };

    let stdout = io::stdout().lock();
    let mut out = io::BufWriter::new(stdout);
    if args.labeled {
        let source = open_input(&args.input).map_err(fatal(&args.input))?;
        let mut acc = CorpusAccumulator::new(mode);
        let mut counts = [0u64; IntentLabel::ALL.len()];
        for (idx, line) in source.lines().enumerate() {
            let line = line.map_err(fatal(&args.input))?;
            if line.is_empty() {
                continue;
            }
            let row = parse_annotated_line(&line).map_err(|reason| {
                CliError::Fatal(format!("{}:{}: {reason}", args.input, idx + 1))
            })?;
            acc.add(&row.record, &lexicons.tld_suffixes);
            counts[row.final_label.index()] += 1;
        }
        let stats = acc.finish();
        let dist =
            LabelDistribution::from_counts(counts).map_err(|e| CliError::Fatal(e.to_string()))?;
        stats.write_human(&mut out).map_err(fatal("stdout"))?;
        writeln!(out).map_err(fatal("stdout"))?;
        dist.write_human(&mut out).map_err(fatal("stdout"))?;
        writeln!(out).map_err(fatal("stdout"))?;
        stats.write_machine(&mut out).map_err(fatal("stdout"))?;
        dist.write_machine(&mut out).map_err(fatal("stdout"))?;
    } else {
        let reader: OrcasReader<_> = read_orcas_tsv(&args.input).map_err(fatal(&args.input))?;
        let stats = corpus_stats(reader, &lexicons.tld_suffixes, mode)
            .map_err(|e| CliError::Fatal(format!("{}: {e}", args.input)))?;
        stats.write_human(&mut out).map_err(fatal("stdout"))?;
        writeln!(out).map_err(fatal("stdout"))?;
        stats.write_machine(&mut out).map_err(fatal("stdout"))?;
    }
    out.flush().map_err(fatal("stdout"))?;
    Ok(())
}

fn cmd_agreement(args: AgreementArgs) -> Result<(), CliError> {
    let read = |path: &str| read_gold_tsv(path).map_err(|e| CliError::Fatal(e.to_string()));
    let rows_a = read(&args.file_a)?;
    let rows_b = read(&args.file_b)?;
    if rows_a.len() != rows_b.len() {
        return Err(CliError::Usage(format!(
            "annotation files cover different record counts: {} vs {}",
            rows_a.len(),
            rows_b.len()
        )));
    }

    let mut by_key: HashMap<(String, String), IntentLabel> = HashMap::new();
    for row in rows_a {
        by_key.insert(
            (row.record.query_id.clone(), row.record.url.clone()),
            row.gold_label,
        );
    }
    let mut labels_a = Vec::new();
    let mut labels_b = Vec::new();
    let mut unmatched = 0usize;
    for row in rows_b {
        let key = (row.record.query_id, row.record.url);
        match by_key.remove(&key) {
            Some(label_a) => {
                labels_a.push(label_a);
                labels_b.push(row.gold_label);
            }
            None => unmatched += 1,
        }
    }
    if unmatched > 0 {
        eprintln!("warning: {unmatched} records appear in only one file");
    }
    if labels_a.is_empty() {
        return Err(CliError::Fatal(
            "the two files share no records (joined on query id + URL)".into(),
        ));
    }

    let kappa = cohen_kappa(&labels_a, &labels_b).map_err(|e| CliError::Usage(e.to_string()))?;
    let observed =
        agreement_rate(&labels_a, &labels_b).map_err(|e| CliError::Usage(e.to_string()))?;
    println!("records compared     {:>8}", labels_a.len());
    println!("observed agreement   {observed:>8.3}");
    println!("cohen kappa          {kappa:>8.3}");
    println!("n={}", labels_a.len());
    println!("observed_agreement={observed:.3}");
    println!("kappa={kappa:.3}");
    Ok(())
}
