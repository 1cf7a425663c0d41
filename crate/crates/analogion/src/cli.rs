//! Command-line pipeline: data preparation, training, evaluation, analyses
//! and report emission.

use std::collections::BTreeMap;
use std::fs::{self, File};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::config::{parse_fold_spec, PipelineConfig};
use crate::corpus::{
    assemble_corpus, dedup_u4_against_u2, expand_scan_topic, generate_scan_negatives, make_folds,
    mc_to_quads, parse_multiple_choice, parse_scan_topics, read_corpus_tsv, read_fold_json,
    write_corpus_tsv, write_fold_json, AnalogyQuad, BalancedCorpus, FoldSplit, Source,
};
use crate::embedding::{
    EmbeddingBackend, FrequencyTable, StaticBackend, StubBackend, StubTokenizer, ToyBackend,
};
use crate::error::{Error, Result};
use crate::evaluation::{
    aggregate_runs, classification_markdown, compare_reports, distractor_markdown,
    evaluate_classification, evaluate_distractor, evaluate_ranking, evaluate_wordsim,
    read_distractor_csv, read_wordsim_csv, score_heldout, ClassifierScorer, EvaluationReport,
    OffsetScorer, Scorer, ScoredQuad,
};
use crate::evaluation::breakdown::{
    frequency_breakdown, frequency_histogram, histogram_csv, oov_breakdown,
};
use crate::manifest::Manifest;
use crate::training::{artifact_is_complete, init_backend, train_fold, Objective};

pub const CACHE_ENV: &str = "ANALOGION_CACHE";

#[derive(Parser, Debug)]
#[command(name = "analogion", version, about = "Proportional-analogy training and evaluation")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Pipeline configuration file (TOML)
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Override the config's seed
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Fold subset, e.g. "3", "1,4,7" or "0..4" (inclusive)
    #[arg(long, global = true)]
    pub folds: Option<String>,
    /// Fold-level worker threads for training
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    /// Redo work even when complete artifacts exist
    #[arg(long, global = true)]
    pub force: bool,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Build the balanced corpus TSV and fold assignments from source files
    PrepareData,
    /// Fine-tune the toy backend on every training fold
    Train,
    /// Score held-out folds and emit classification/ranking reports
    Evaluate,
    /// Score the two-option distractor dataset
    DistractorEval,
    /// Correlate model similarities with human word-similarity judgments
    WordsimEval,
    /// Frequency histogram and frequency/OOV breakdown data files
    FreqAnalysis,
    /// Combine emitted report files into one markdown summary
    Report,
    /// Write synthetic source fixtures and a ready-to-run config
    GenFixtures {
        /// Target directory
        #[arg(long)]
        dir: PathBuf,
    },
}

/// Parse arguments, dispatch, and map errors to exit codes:
/// 0 success, 1 internal error, 2 user/config error.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match dispatch(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_user_error() {
                2
            } else {
                1
            }
        }
    }
}

fn dispatch(cli: Cli) -> Result<()> {
    if let Command::GenFixtures { dir } = &cli.command {
        return cmd_gen_fixtures(dir, cli.seed.unwrap_or(7));
    }
    let config_path = cli
        .config
        .as_deref()
        .ok_or_else(|| Error::Config("--config is required".into()))?;
    let mut config = PipelineConfig::load(config_path)?;
    if let Some(seed) = cli.seed {
        config.seed = seed;
        config.train.seed = seed;
    }
    match cli.command {
        Command::PrepareData => cmd_prepare_data(&config),
        Command::Train => cmd_train(&config, cli.folds.as_deref(), cli.jobs.unwrap_or(1), cli.force),
        Command::Evaluate => cmd_evaluate(&config),
        Command::DistractorEval => cmd_distractor_eval(&config),
        Command::WordsimEval => cmd_wordsim_eval(&config),
        Command::FreqAnalysis => cmd_freq_analysis(&config),
        Command::Report => cmd_report(&config),
        Command::GenFixtures { .. } => unreachable!("handled above"),
    }
}

fn cmd_gen_fixtures(dir: &Path, seed: u64) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let paths = crate::fixtures::write_source_fixtures(dir, seed)?;
    let config_path = dir.join("config.toml");
    let text = format!(
        r#"seed = {seed}
output_dir = "{out}"

[data]
sat = "{sat}"
u2 = "{u2}"
u4 = "{u4}"
scan = "{scan}"
frequency = "{freq}"
wordsim = "{wordsim}"
distractor = "{distractor}"

[train]
learning_rate = 0.01
backbone_id = "toy:16"
"#,
        out = dir.join("out").display(),
        sat = paths.sat.display(),
        u2 = paths.u2.display(),
        u4 = paths.u4.display(),
        scan = paths.scan.display(),
        freq = paths.frequency.display(),
        wordsim = paths.wordsim.display(),
        distractor = paths.distractor.display(),
    );
    fs::write(&config_path, text).map_err(|e| Error::io(&config_path, e))?;
    println!("fixtures written to {}", dir.display());
    println!("config: {}", config_path.display());
    Ok(())
}

fn open_reader(path: &Path) -> Result<BufReader<File>> {
    Ok(BufReader::new(
        File::open(path).map_err(|e| Error::io(path, e))?,
    ))
}

/// Resolve a backend file path, falling back to the ANALOGION_CACHE
/// directory for relative paths that do not exist locally.
fn resolve_cached(path: &Path) -> PathBuf {
    if path.is_file() || path.is_absolute() {
        return path.to_path_buf();
    }
    match std::env::var_os(CACHE_ENV) {
        Some(cache) => Path::new(&cache).join(path),
        None => path.to_path_buf(),
    }
}

/// Tokenizer-driven backend for OOV flags and piece counts. Stub vocabulary
/// is the set of corpus terms seen at least 50,000 times, so rarer words
/// split into character chunks and count as OOV.
fn analysis_backend(
    config: &PipelineConfig,
    corpus: &BalancedCorpus,
    freq: Option<&FrequencyTable>,
) -> Result<Box<dyn EmbeddingBackend>> {
    if let Some(rest) = config.analysis_backend.strip_prefix("stub:") {
        let dim: usize = rest
            .parse()
            .map_err(|_| Error::Config(format!("bad stub dimension {rest:?}")))?;
        let vocab: Vec<String> = match freq {
            Some(table) => corpus_terms(corpus)
                .into_iter()
                .filter(|t| table.lookup(t).unwrap_or(0) >= 50_000)
                .collect(),
            None => Vec::new(),
        };
        return Ok(Box::new(StubBackend::new(
            dim,
            config.seed,
            StubTokenizer::new(vocab, 4),
        )));
    }
    if let Some(path) = config.analysis_backend.strip_prefix("static:") {
        let path = resolve_cached(Path::new(path));
        return Ok(Box::new(StaticBackend::load(&path)?));
    }
    Err(Error::Config(format!(
        "unknown analysis backend {:?} (expected stub:<dim> or static:<path>)",
        config.analysis_backend
    )))
}

fn corpus_terms(corpus: &BalancedCorpus) -> Vec<String> {
    let mut terms: Vec<String> = corpus
        .quads
        .iter()
        .flat_map(|q| q.terms().map(str::to_string))
        .collect();
    terms.sort();
    terms.dedup();
    terms
}

fn load_frequency(config: &PipelineConfig) -> Result<Option<FrequencyTable>> {
    match &config.data.frequency {
        Some(path) => Ok(Some(FrequencyTable::load(path)?)),
        None => Ok(None),
    }
}

fn cmd_prepare_data(config: &PipelineConfig) -> Result<()> {
    fs::create_dir_all(&config.output_dir).map_err(|e| Error::io(&config.output_dir, e))?;

    let mut parts = Vec::new();
    for (source, path, stream) in [
        (Source::Sat, &config.data.sat, 1u64),
        (Source::U2, &config.data.u2, 2),
        (Source::U4, &config.data.u4, 3),
    ] {
        let records = parse_multiple_choice(open_reader(path)?, source)?;
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed ^ (0x5157 + stream));
        let mut quads = Vec::with_capacity(records.len() * 2);
        for record in &records {
            let (pos, neg) = mc_to_quads(record, &mut rng, source)?;
            quads.push(pos);
            quads.push(neg);
        }
        parts.push(quads);
    }
    // U4 questions repeated from U2 are dropped before assembly
    let u4 = parts.pop().unwrap();
    let u4 = dedup_u4_against_u2(&parts[1], u4);
    parts.push(u4);

    let topics = parse_scan_topics(open_reader(&config.data.scan)?)?;
    let mut scan_positives = Vec::new();
    for topic in &topics {
        scan_positives.extend(expand_scan_topic(topic)?);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed ^ 0x5C44);
    let scan_negatives = generate_scan_negatives(&scan_positives, &mut rng)?;
    let mut scan = scan_positives;
    scan.extend(scan_negatives);
    parts.push(scan);

    let corpus = assemble_corpus(parts)?;
    let mut fold_rng = ChaCha8Rng::seed_from_u64(config.seed ^ 0xF01D);
    let folds = make_folds(&corpus, config.folds, &mut fold_rng)?;

    write_corpus_tsv(&corpus, &config.corpus_path())?;
    write_fold_json(&folds, &config.folds_path())?;

    print_corpus_summary(config, &corpus)?;

    let mut manifest = Manifest::new(config)?;
    manifest.add_file(&config.output_dir, &config.corpus_path())?;
    manifest.add_file(&config.output_dir, &config.folds_path())?;
    manifest.write(&config.manifest_path())?;
    println!("manifest: {}", config.manifest_path().display());
    Ok(())
}

fn print_corpus_summary(config: &PipelineConfig, corpus: &BalancedCorpus) -> Result<()> {
    let freq = load_frequency(config)?;
    let backend = analysis_backend(config, corpus, freq.as_ref()).ok();
    println!("source\tpositives\tnegatives\ttotal\t%OOV\tmean_freq");
    let mut total = 0usize;
    for (source, (pos, neg)) in &corpus.per_source_counts {
        total += pos + neg;
        let terms: Vec<&str> = corpus
            .quads
            .iter()
            .filter(|q| q.source == *source)
            .flat_map(|q| q.terms())
            .collect();
        let oov = match &backend {
            Some(b) => {
                let n = terms.iter().filter(|t| b.is_oov(t)).count();
                format!("{:.1}", 100.0 * n as f64 / terms.len() as f64)
            }
            None => "-".into(),
        };
        let mean_freq = match &freq {
            Some(table) => {
                let counts: Vec<u64> = terms.iter().filter_map(|t| table.lookup(t)).collect();
                if counts.is_empty() {
                    "-".into()
                } else {
                    format!(
                        "{:.0}",
                        counts.iter().sum::<u64>() as f64 / counts.len() as f64
                    )
                }
            }
            None => "-".into(),
        };
        println!(
            "{}\t{pos}\t{neg}\t{}\t{oov}\t{mean_freq}",
            source.as_str(),
            pos + neg
        );
    }
    println!("TOTAL\t\t\t{total}\t\t");
    Ok(())
}

fn load_prepared(config: &PipelineConfig) -> Result<(BalancedCorpus, FoldSplit)> {
    let corpus_path = config.corpus_path();
    if !corpus_path.is_file() {
        return Err(Error::Config(format!(
            "prepared corpus {} not found; run prepare-data first",
            corpus_path.display()
        )));
    }
    let corpus = read_corpus_tsv(&corpus_path)?;
    let folds = read_fold_json(&config.folds_path())?;
    Ok((corpus, folds))
}

fn cmd_train(
    config: &PipelineConfig,
    fold_spec: Option<&str>,
    jobs: usize,
    force: bool,
) -> Result<()> {
    let (corpus, folds) = load_prepared(config)?;
    let indices = match fold_spec {
        Some(spec) => parse_fold_spec(spec, folds.k)?,
        None => (0..folds.k).collect(),
    };
    let runs_dir = config.runs_dir();
    fs::create_dir_all(&runs_dir).map_err(|e| Error::io(&runs_dir, e))?;

    let pending: Vec<usize> = indices
        .into_iter()
        .filter(|&i| {
            if !force && artifact_is_complete(&runs_dir, i) {
                println!("fold {i}: complete artifact exists, skipping (--force to redo)");
                false
            } else {
                true
            }
        })
        .collect();

    let train_one = |fold: usize| -> Result<()> {
        let artifact = train_fold(&corpus, &folds, fold, &config.train, Some(&runs_dir))?;
        println!(
            "fold {fold}: final loss {:.4} in {:.1}s",
            artifact.metrics.final_loss, artifact.metrics.duration_secs
        );
        Ok(())
    };

    if jobs <= 1 {
        for fold in pending {
            train_one(fold)?;
        }
    } else {
        std::thread::scope(|scope| -> Result<()> {
            let mut handles = Vec::new();
            for chunk in pending.chunks(pending.len().div_ceil(jobs)) {
                handles.push(scope.spawn(move || -> Result<()> {
                    for &fold in chunk {
                        train_one(fold)?;
                    }
                    Ok(())
                }));
            }
            for handle in handles {
                handle
                    .join()
                    .map_err(|_| Error::Generation("training worker panicked".into()))??;
            }
            Ok(())
        })?;
    }
    Ok(())
}

/// Score with the offset cosine for offset objectives, the classifier head
/// probability otherwise.
pub fn scorer_for<'a>(objective: Objective, backend: &'a ToyBackend) -> Box<dyn Scorer + 'a> {
    match objective.offset_variant() {
        Some(variant) => Box::new(OffsetScorer { backend, variant }),
        None => Box::new(ClassifierScorer { backend }),
    }
}

/// Cosine scores are signed, so the default cutoff 0 works; classifier
/// probabilities live in [0,1], where the neutral cutoff is 0.5.
pub fn effective_threshold(objective: Objective, configured: f64) -> f64 {
    if objective == Objective::SimpleClassifier && configured == 0.0 {
        0.5
    } else {
        configured
    }
}

fn heldout_quads<'a>(
    corpus: &'a BalancedCorpus,
    folds: &FoldSplit,
    fold: usize,
) -> Result<Vec<AnalogyQuad>> {
    let mut quads = Vec::new();
    for quad in &corpus.quads {
        let assigned = folds.fold_of(&quad.id()).ok_or_else(|| {
            Error::Validation(format!("quad {} missing from fold assignments", quad.id()))
        })?;
        if assigned == fold {
            quads.push(quad.clone());
        }
    }
    Ok(quads)
}

pub fn write_scores_jsonl(path: &Path, scored: &[ScoredQuad]) -> Result<()> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut writer = BufWriter::new(file);
    for item in scored {
        serde_json::to_writer(&mut writer, item)?;
        writer.write_all(b"\n").map_err(|e| Error::io(path, e))?;
    }
    writer.flush().map_err(|e| Error::io(path, e))?;
    Ok(())
}

pub fn read_scores_jsonl(path: &Path) -> Result<Vec<ScoredQuad>> {
    let reader = open_reader(path)?;
    let mut scored = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        scored.push(serde_json::from_str(&line).map_err(|e| Error::Parse {
            line: idx + 1,
            message: e.to_string(),
        })?);
    }
    Ok(scored)
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    serde_json::to_writer_pretty(BufWriter::new(file), value)?;
    Ok(())
}

fn load_tuned_backend(config: &PipelineConfig, fold: usize) -> Result<ToyBackend> {
    let dir = config.runs_dir();
    if !artifact_is_complete(&dir, fold) {
        return Err(Error::Config(format!(
            "fold {fold} artifact incomplete under {}; run train first",
            dir.display()
        )));
    }
    ToyBackend::load(&dir.join(format!("fold_{fold}")).join("params.json"))
}

/// Per-fold tuned and baseline scores over the held-out sets; scores are
/// dumped as JSONL next to the reports for recount checks.
fn score_all_folds(
    config: &PipelineConfig,
    corpus: &BalancedCorpus,
    folds: &FoldSplit,
) -> Result<(Vec<Vec<ScoredQuad>>, Vec<Vec<ScoredQuad>>)> {
    let threshold = effective_threshold(config.train.objective, config.evaluation.threshold);
    let mut tuned_all = Vec::with_capacity(folds.k);
    let mut baseline_all = Vec::with_capacity(folds.k);
    for fold in 0..folds.k {
        let heldout = heldout_quads(corpus, folds, fold)?;
        let tuned_backend = load_tuned_backend(config, fold)?;
        let baseline_backend = init_backend(corpus, &config.train, fold)?;

        let tuned = score_heldout(
            scorer_for(config.train.objective, &tuned_backend).as_ref(),
            &heldout,
            threshold,
            Some(fold),
        )?;
        let baseline = score_heldout(
            scorer_for(config.train.objective, &baseline_backend).as_ref(),
            &heldout,
            threshold,
            Some(fold),
        )?;
        write_scores_jsonl(
            &config.scores_dir(false).join(format!("fold_{fold}.jsonl")),
            &tuned,
        )?;
        write_scores_jsonl(
            &config.scores_dir(true).join(format!("fold_{fold}.jsonl")),
            &baseline,
        )?;
        tuned_all.push(tuned);
        baseline_all.push(baseline);
    }
    Ok((tuned_all, baseline_all))
}

const CLASSIFICATION_CATEGORIES: [&str; 7] = [
    "OVERALL",
    "SAT",
    "U2",
    "U4",
    "SCAN",
    "SCAN-science",
    "SCAN-metaphor",
];

fn aggregate_protocol(
    per_fold: &[Vec<ScoredQuad>],
    evaluate: fn(&[ScoredQuad]) -> Result<EvaluationReport>,
) -> Result<EvaluationReport> {
    let reports: Vec<EvaluationReport> = per_fold
        .iter()
        .map(|scored| evaluate(scored))
        .collect::<Result<_>>()?;
    aggregate_runs(&reports)
}

fn emit_report(
    config: &PipelineConfig,
    name: &str,
    mut tuned: EvaluationReport,
    baseline: &EvaluationReport,
    categories: &[&str],
    markdown: fn(&EvaluationReport, &[&str]) -> String,
) -> Result<()> {
    tuned.comparisons = compare_reports(&tuned, baseline);
    tuned
        .meta
        .insert("baseline".into(), "non-tuned backend".into());
    write_json(&config.reports_dir().join(format!("{name}.json")), &tuned)?;
    write_json(
        &config.reports_dir().join(format!("{name}_baseline.json")),
        baseline,
    )?;
    let md_path = config.reports_dir().join(format!("{name}.md"));
    fs::write(&md_path, markdown(&tuned, categories)).map_err(|e| Error::io(&md_path, e))?;
    println!("wrote {}", md_path.display());
    Ok(())
}

fn cmd_evaluate(config: &PipelineConfig) -> Result<()> {
    let (corpus, folds) = load_prepared(config)?;
    let (tuned_folds, baseline_folds) = score_all_folds(config, &corpus, &folds)?;

    if config.evaluation.classification {
        let tuned = aggregate_protocol(&tuned_folds, evaluate_classification)?;
        let baseline = aggregate_protocol(&baseline_folds, evaluate_classification)?;
        emit_report(
            config,
            "classification",
            tuned,
            &baseline,
            &CLASSIFICATION_CATEGORIES,
            classification_markdown,
        )?;
    }
    if config.evaluation.ranking {
        let tuned = aggregate_protocol(&tuned_folds, evaluate_ranking)?;
        let baseline = aggregate_protocol(&baseline_folds, evaluate_ranking)?;
        emit_report(
            config,
            "ranking",
            tuned,
            &baseline,
            &CLASSIFICATION_CATEGORIES,
            classification_markdown,
        )?;
    }

    if config.data.distractor.is_some() {
        cmd_distractor_eval(config)?;
    } else {
        eprintln!("warning: no distractor file configured, skipping distractor protocol");
    }
    if config.data.wordsim.is_some() {
        cmd_wordsim_eval(config)?;
    } else {
        eprintln!("warning: no wordsim file configured, skipping word similarity");
    }
    if config.data.frequency.is_some() {
        cmd_freq_analysis(config)?;
    } else {
        eprintln!("warning: no frequency table configured, skipping frequency analysis");
    }
    Ok(())
}

const DISTRACTOR_CATEGORIES: [&str; 9] = [
    "OVERALL",
    "near",
    "near-categorical",
    "near-causal",
    "near-compositional",
    "far",
    "far-categorical",
    "far-causal",
    "far-compositional",
];

fn cmd_distractor_eval(config: &PipelineConfig) -> Result<()> {
    let path = config.data.distractor.as_deref().ok_or_else(|| {
        Error::Config("no distractor file configured (data.distractor)".into())
    })?;
    let items = read_distractor_csv(path)?;
    let (corpus, folds) = load_prepared(config)?;

    let mut tuned_reports = Vec::new();
    let mut baseline_reports = Vec::new();
    for fold in 0..folds.k {
        let tuned_backend = load_tuned_backend(config, fold)?;
        let baseline_backend = init_backend(&corpus, &config.train, fold)?;
        tuned_reports.push(evaluate_distractor(
            scorer_for(config.train.objective, &tuned_backend).as_ref(),
            &items,
        )?);
        baseline_reports.push(evaluate_distractor(
            scorer_for(config.train.objective, &baseline_backend).as_ref(),
            &items,
        )?);
    }
    let tuned = aggregate_runs(&tuned_reports)?;
    let baseline = aggregate_runs(&baseline_reports)?;
    emit_report(
        config,
        "distractor",
        tuned,
        &baseline,
        &DISTRACTOR_CATEGORIES,
        distractor_markdown,
    )
}

fn cmd_wordsim_eval(config: &PipelineConfig) -> Result<()> {
    let path = config.data.wordsim.as_deref().ok_or_else(|| {
        Error::Config("no word-similarity file configured (data.wordsim)".into())
    })?;
    let pairs = read_wordsim_csv(path)?;
    let (_, folds) = load_prepared(config)?;

    let mut per_fold = Vec::new();
    for fold in 0..folds.k {
        let backend = load_tuned_backend(config, fold)?;
        let result = evaluate_wordsim(&backend, &pairs)?;
        per_fold.push(result);
    }
    let mean_rho = per_fold.iter().map(|r| r.rho).sum::<f64>() / per_fold.len() as f64;
    let out = serde_json::json!({
        "per_fold": per_fold,
        "mean_rho": mean_rho,
        "pairs": pairs.len(),
    });
    let path = config.reports_dir().join("wordsim.json");
    write_json(&path, &out)?;
    println!("wordsim mean rho {mean_rho:.3} over {} folds", per_fold.len());
    Ok(())
}

fn read_all_scores(config: &PipelineConfig, baseline: bool, k: usize) -> Result<Vec<ScoredQuad>> {
    let dir = config.scores_dir(baseline);
    let mut all = Vec::new();
    for fold in 0..k {
        let path = dir.join(format!("fold_{fold}.jsonl"));
        if !path.is_file() {
            return Err(Error::Config(format!(
                "score dump {} not found; run evaluate first",
                path.display()
            )));
        }
        all.extend(read_scores_jsonl(&path)?);
    }
    Ok(all)
}

fn cmd_freq_analysis(config: &PipelineConfig) -> Result<()> {
    let freq = load_frequency(config)?.ok_or_else(|| {
        Error::Config("no frequency table configured (data.frequency)".into())
    })?;
    let (corpus, folds) = load_prepared(config)?;
    let backend = analysis_backend(config, &corpus, Some(&freq))?;

    let words = corpus_terms(&corpus);
    let hist = frequency_histogram(
        &words,
        &freq,
        backend.as_ref(),
        &config.evaluation.histogram_edges,
    )?;
    let reports_dir = config.reports_dir();
    fs::create_dir_all(&reports_dir).map_err(|e| Error::io(&reports_dir, e))?;
    let csv_path = reports_dir.join("histogram.csv");
    fs::write(&csv_path, histogram_csv(&hist)).map_err(|e| Error::io(&csv_path, e))?;
    write_json(&reports_dir.join("histogram.json"), &hist)?;
    println!("wrote {}", csv_path.display());

    // per-dataset frequency/OOV breakdowns, before (baseline) and after
    // (tuned) fine-tuning, when score dumps exist
    for (tag, baseline) in [("after", false), ("before", true)] {
        let scored = match read_all_scores(config, baseline, folds.k) {
            Ok(scored) => scored,
            Err(e) => {
                eprintln!("warning: skipping {tag} breakdowns: {e}");
                continue;
            }
        };
        let mut by_source: BTreeMap<&'static str, Vec<ScoredQuad>> = BTreeMap::new();
        for item in scored {
            by_source.entry(item.source.as_str()).or_default().push(item);
        }
        let mut freq_tables = BTreeMap::new();
        let mut oov_tables = BTreeMap::new();
        let mut all: Vec<ScoredQuad> = Vec::new();
        for (source, scored) in &by_source {
            freq_tables.insert(*source, frequency_breakdown(scored, &freq));
            oov_tables.insert(*source, oov_breakdown(scored, backend.as_ref()));
            all.extend(scored.iter().cloned());
        }
        freq_tables.insert("OVERALL", frequency_breakdown(&all, &freq));
        oov_tables.insert("OVERALL", oov_breakdown(&all, backend.as_ref()));
        write_json(
            &reports_dir.join(format!("frequency_breakdown_{tag}.json")),
            &freq_tables,
        )?;
        write_json(
            &reports_dir.join(format!("oov_breakdown_{tag}.json")),
            &oov_tables,
        )?;
    }
    Ok(())
}

fn cmd_report(config: &PipelineConfig) -> Result<()> {
    let reports_dir = config.reports_dir();
    let mut out = String::from("# Evaluation summary\n");
    let mut found = false;
    for (name, title, categories, renderer) in [
        (
            "classification",
            "Classification accuracy",
            &CLASSIFICATION_CATEGORIES[..],
            classification_markdown as fn(&EvaluationReport, &[&str]) -> String,
        ),
        (
            "ranking",
            "Ranking accuracy",
            &CLASSIFICATION_CATEGORIES[..],
            classification_markdown,
        ),
        (
            "distractor",
            "Distractor accuracy",
            &DISTRACTOR_CATEGORIES[..],
            distractor_markdown,
        ),
    ] {
        let path = reports_dir.join(format!("{name}.json"));
        if !path.is_file() {
            continue;
        }
        found = true;
        let text = fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
        let report: EvaluationReport = serde_json::from_str(&text)?;
        out.push_str(&format!("\n## {title}\n\n"));
        out.push_str(&renderer(&report, categories));
        out.push_str("\nArrows compare against the non-tuned baseline; bold marks p < 0.05.\n");
    }
    let wordsim = reports_dir.join("wordsim.json");
    if wordsim.is_file() {
        found = true;
        let text = fs::read_to_string(&wordsim).map_err(|e| Error::io(&wordsim, e))?;
        let value: serde_json::Value = serde_json::from_str(&text)?;
        if let Some(rho) = value.get("mean_rho").and_then(|v| v.as_f64()) {
            out.push_str(&format!("\n## Word similarity\n\nMean Spearman rho: {rho:.3}\n"));
        }
    }
    if !found {
        return Err(Error::Config(format!(
            "no report files under {}; run evaluate first",
            reports_dir.display()
        )));
    }
    let path = reports_dir.join("report.md");
    fs::write(&path, out).map_err(|e| Error::io(&path, e))?;
    println!("wrote {}", path.display());
    Ok(())
}
